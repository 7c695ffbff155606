use crate::knowledge::{join_id, FormItem, Formalisation, References, Store};
use crate::refine::rule_set;
use crate::rewrite::{eval_pred, Truth};
use crate::terms::{parse_call, render, substitute, Env, Term};

use super::session::apply_internal;
use super::{start_formalisation, Settings, SpecSession, SpecifyError, TacticInput};

/// Specifies a problem from a command such as `solve (x + 1 = 2, x)`
/// without student interaction.
///
/// The first problem whose CAS pattern has the command's head and arity,
/// and whose preconditions hold for the arguments, is taken. A
/// formalisation is built from the arguments and completed, then refined
/// from the problem's start node, completed for the refined problem and
/// finished.
pub fn cas_command(store: &Store, raw: &str) -> Result<SpecSession, SpecifyError> {
    let mut reason = "no problem accepts this command".to_string();
    'problems: for (path, p) in store.problems.iter() {
        let Some(cas) = &p.cas else { continue };
        let ctx = store.theory_context(&p.theory);
        let (head, args) = match parse_call(raw, &ctx) {
            Ok(call) => call,
            Err(e) => {
                reason = format!("{}:{}: {}", e.pos.line, e.pos.col, e.msg);
                continue;
            }
        };
        if head != cas.head || args.len() != cas.params.len() {
            continue;
        }
        let env: Env = cas.params.iter().cloned().zip(args).collect();
        let rules = rule_set(&p.where_rls);
        for pre in &p.where_ {
            if eval_pred(&rules, &substitute(&env, &pre.term)) != Truth::True {
                reason = format!("{} does not hold", pre.source);
                continue 'problems;
            }
        }
        let Some(method) = p.solve_mets.first() else {
            reason = format!("{} has no method", join_id(&path));
            continue;
        };
        let items = p
            .model
            .items
            .iter()
            .map(|slot| {
                let value =
                    env.get(slot.placeholder_name()).cloned().unwrap_or_else(|| Term::var(slot.placeholder_name()));
                let term = Term::descriptor(slot.descriptor.clone(), value);
                FormItem { text: render(&term), term, variants: None }
            })
            .collect();
        let f = Formalisation {
            id: raw.to_string(),
            text: raw.to_string(),
            items,
            refs: References { theory: p.theory.clone(), problem: path.clone(), method: method.clone() },
        };
        let mut s = start_formalisation(store, f, "", Settings::default())?;
        let start = p.start_refine.clone().unwrap_or(path);
        s = apply_internal(store, &s, TacticInput::CompleteSpec)?;
        s = apply_internal(store, &s, TacticInput::RefineTacitly { id: join_id(&start) })?;
        s = apply_internal(store, &s, TacticInput::CompleteSpec)?;
        s = apply_internal(store, &s, TacticInput::FinishSpecify)?;
        return Ok(s);
    }
    Err(SpecifyError::NoCasMatch(reason))
}
