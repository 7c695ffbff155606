use crate::imodel::{render_item, OModelItem};
use crate::knowledge::{PatternItem, Store};
use crate::refine::rule_set;
use crate::rewrite::{nf_equivalent, normalize, RuleSet};
use crate::terms::{SrcPos, Term};

use super::{Reveal, SpecSession, SpecifyError, TacticInput, View};

fn has_cor(s: &SpecSession, view: View, slot: &PatternItem) -> bool {
    s.i_model(view).items.iter().any(|i| {
        i.field == slot.field && i.feedback.is_cor() && i.feedback.descriptor() == Some(slot.descriptor.as_str())
    })
}

/// Pattern slots of both views without a correct item, plus references
/// not yet confirmed.
pub fn missing_count(store: &Store, s: &SpecSession) -> Result<usize, SpecifyError> {
    let mut n = [&s.refs.theory, &s.refs.problem, &s.refs.method].iter().filter(|r| !r.entered).count();
    for view in [View::Problem, View::Method] {
        n += s.pattern(store, view)?.items.iter().filter(|slot| !has_cor(s, view, slot)).count();
    }
    Ok(n)
}

/// The next tactic a tutor would suggest: fill the first open slot of the
/// current view, then confirm references, then switch to the other view if
/// it has open slots, then finish.
pub fn propose_next(store: &Store, s: &SpecSession) -> Result<TacticInput, SpecifyError> {
    if s.is_finished() {
        return Err(SpecifyError::Finished);
    }
    if let Some(t) = propose_item(store, s, s.view)? {
        return Ok(t);
    }
    if !s.refs.theory.entered {
        return Ok(TacticInput::SpecifyTheory { id: s.refs.theory.id.clone() });
    }
    if !s.refs.problem.entered {
        return Ok(TacticInput::SpecifyProblem { id: s.refs.problem.id.clone() });
    }
    if !s.refs.method.entered {
        return Ok(TacticInput::SpecifyMethod { id: s.refs.method.id.clone() });
    }
    if propose_item(store, s, s.view.other())?.is_some() {
        return Ok(TacticInput::ToggleView);
    }
    Ok(TacticInput::FinishSpecify)
}

fn propose_item(store: &Store, s: &SpecSession, view: View) -> Result<Option<TacticInput>, SpecifyError> {
    let live = s.live();
    let rules = rule_set(&s.problem_def(store)?.where_rls);
    for slot in &s.pattern(store, view)?.items {
        if has_cor(s, view, slot) {
            continue;
        }
        let Some(o) = s
            .o_model(view)
            .items
            .iter()
            .find(|o| o.descriptor == slot.descriptor && o.field == slot.field && !o.variants.is_disjoint(&live))
        else {
            continue;
        };
        let text = match s.settings.next_step_reveals {
            Reveal::Partial if o.is_list => {
                let entered =
                    s.i_model(view).placed(slot.field, &slot.descriptor).map_or(&[][..], |i| i.feedback.values());
                reveal_one(&rules, o, entered)
            }
            _ => o.render(),
        };
        return Ok(Some(TacticInput::add(slot.field, text, SrcPos::START)));
    }
    Ok(None)
}

/// The entered elements plus the first prepared element not among them.
fn reveal_one(rules: &RuleSet, o: &OModelItem, entered: &[Term]) -> String {
    let nf = |t: &Term| normalize(rules, t).ok();
    let mut used = vec![false; entered.len()];
    let mut values = entered.to_vec();
    for prepared in &o.values {
        let p = nf(prepared);
        let hit = (0..entered.len())
            .find(|&j| !used[j] && matches!((&p, nf(&entered[j])), (Some(a), Some(b)) if nf_equivalent(a, &b)));
        match hit {
            Some(j) => used[j] = true,
            None => {
                values.push(prepared.clone());
                break;
            }
        }
    }
    render_item(&o.descriptor, &values, true)
}
