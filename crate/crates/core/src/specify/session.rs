use std::collections::BTreeSet;

use crate::imodel::{
    check_input, check_preconds, init_o_model, init_o_models, is_complete, live_variants, make_environments,
    render_item, Checker, Feedback, IModel, OModel, PreCondsChecked, Variants,
};
use crate::knowledge::{join_id, split_id, Formalisation, MethodDef, ModelPattern, ProblemDef, Store};
use crate::refine::{refine_problem, rule_set};
use crate::terms::{SrcPos, TypeContext};

use super::{
    Entry, Origin, Outcome, RefState, Refs, Settings, SolveHandoff, SpecSession, SpecifyError, TacticApplied,
    TacticInput, View,
};

impl SpecSession {
    pub fn problem_def<'s>(&self, store: &'s Store) -> Result<&'s ProblemDef, SpecifyError> {
        Ok(store.lookup_problem(&split_id(&self.refs.problem.id))?)
    }

    pub fn method_def<'s>(&self, store: &'s Store) -> Result<&'s MethodDef, SpecifyError> {
        Ok(store.lookup_method(&split_id(&self.refs.method.id))?)
    }

    pub fn pattern<'s>(&self, store: &'s Store, view: View) -> Result<&'s ModelPattern, SpecifyError> {
        Ok(match view {
            View::Problem => &self.problem_def(store)?.model,
            View::Method => &self.method_def(store)?.guard,
        })
    }

    /// Variants consistent with everything placed in either view.
    pub fn live(&self) -> Variants {
        live_variants(&self.o_model_problem.all_variants, &[&self.i_model_problem, &self.i_model_method])
    }

    /// Preconditions of the view's pattern: the problem's Where items, none
    /// for a method.
    pub fn preconds(&self, store: &Store, view: View) -> Result<PreCondsChecked, SpecifyError> {
        let p = self.problem_def(store)?;
        let where_ = match view {
            View::Problem => p.where_.as_slice(),
            View::Method => &[],
        };
        Ok(check_preconds(&rule_set(&p.where_rls), where_, self.pattern(store, view)?, self.i_model(view)))
    }

    pub fn view_complete(&self, store: &Store, view: View) -> Result<bool, SpecifyError> {
        let checked = self.preconds(store, view)?;
        Ok(is_complete(self.pattern(store, view)?, self.i_model(view), &checked))
    }

    /// The problem model is complete; references may still be open.
    pub fn is_complete(&self, store: &Store) -> Result<bool, SpecifyError> {
        self.view_complete(store, View::Problem)
    }

    /// Both views complete and all references confirmed.
    pub fn ready_to_finish(&self, store: &Store) -> Result<bool, SpecifyError> {
        Ok(self.refs.all_entered()
            && self.view_complete(store, View::Problem)?
            && self.view_complete(store, View::Method)?)
    }

    fn formalisation_ctx(&self, store: &Store) -> TypeContext {
        store.theory_context(&self.origin.formalisation.refs.theory)
    }
}

fn invalid(msg: impl Into<String>) -> SpecifyError {
    SpecifyError::InvalidTactic(msg.into())
}

/// Starts the specify phase on an example from the store.
pub fn start_example(store: &Store, id: &str, settings: Settings) -> Result<SpecSession, SpecifyError> {
    let f = store.lookup_example(id)?.clone();
    start_formalisation(store, f, id, settings)
}

/// Starts the specify phase on any formalisation, e.g. one built from a
/// CAS command. With `skip_specify` the session comes back finished.
pub fn start_formalisation(
    store: &Store,
    f: Formalisation,
    example_id: &str,
    settings: Settings,
) -> Result<SpecSession, SpecifyError> {
    store.lookup_theory(&f.refs.theory)?;
    let problem = store.lookup_problem(&f.refs.problem)?;
    let method = store.lookup_method(&f.refs.method)?;
    let ctx = store.theory_context(&f.refs.theory);
    let (o_model_problem, o_model_method) = init_o_models(&f, &problem.model, &method.guard, &ctx, &store.descriptors)?;
    let refs = Refs {
        theory: RefState::default_for(f.refs.theory.clone()),
        problem: RefState::default_for(join_id(&f.refs.problem)),
        method: RefState::default_for(join_id(&f.refs.method)),
    };
    let started = TacticApplied {
        tactic: TacticInput::ModelProblem,
        outcome: Outcome::Started { problem: f.refs.problem.clone(), method: f.refs.method.clone() },
    };
    let mut s = SpecSession {
        origin: Origin { example_id: example_id.to_string(), formalisation: f, settings },
        o_model_problem,
        o_model_method,
        i_model_problem: IModel::default(),
        i_model_method: IModel::default(),
        entries: Vec::new(),
        refs,
        view: View::Problem,
        settings,
        history: vec![started],
        next_seq: 0,
        last_refine: None,
        handoff: None,
    };
    if settings.skip_specify {
        s = apply_internal(store, &s, TacticInput::CompleteSpec)?;
        s = apply_internal(store, &s, TacticInput::FinishSpecify)?;
    }
    Ok(s)
}

/// Applies a student tactic. Engine-only tactics are rejected.
pub fn apply_tactic(store: &Store, s: &SpecSession, t: TacticInput) -> Result<SpecSession, SpecifyError> {
    if t.is_internal() {
        return Err(invalid(format!("{t} is applied by the engine only")));
    }
    apply_internal(store, s, t)
}

/// Starts the origin again and applies the recorded tactics.
pub fn replay(store: &Store, origin: &Origin, history: &[TacticApplied]) -> Result<SpecSession, SpecifyError> {
    let plain = Settings { skip_specify: false, ..origin.settings };
    let mut s = start_formalisation(store, origin.formalisation.clone(), &origin.example_id, plain)?;
    s.origin.settings = origin.settings;
    s.settings = origin.settings;
    for step in history.iter().skip(1) {
        s = apply_internal(store, &s, step.tactic.clone())?;
    }
    Ok(s)
}

pub(super) fn apply_internal(store: &Store, s: &SpecSession, t: TacticInput) -> Result<SpecSession, SpecifyError> {
    if s.is_finished() {
        return Err(invalid("the specification is finished"));
    }
    let mut s = s.clone();
    let outcome = match &t {
        TacticInput::ModelProblem => return Err(invalid("the specify phase has already started")),
        TacticInput::AddGiven { .. } | TacticInput::AddFind { .. } | TacticInput::AddRelation { .. } => {
            let (field, text, pos) = t.as_add().expect("add tactic");
            s.entries.push(Entry { seq: s.next_seq, view: s.view, field, text: text.to_string(), pos });
            s.next_seq += 1;
            rebuild(store, &mut s)?;
            let item = s
                .i_model(s.view)
                .items
                .iter()
                .find(|i| i.field == field && i.source == text)
                .expect("entered item is in the model");
            Outcome::Item { feedback: item.feedback.kind().to_string(), message: item.message.clone() }
        }
        TacticInput::DeleteItem { field, text } => {
            let seq = s
                .i_model(s.view)
                .items
                .iter()
                .find(|i| i.field == *field && i.source == *text)
                .map(|i| i.seq)
                .ok_or_else(|| invalid(format!("no item '{text}' in {field}")))?;
            s.entries.retain(|e| e.seq != seq);
            rebuild(store, &mut s)?;
            Outcome::Deleted
        }
        TacticInput::SpecifyTheory { id } => {
            store.lookup_theory(id)?;
            s.refs.theory = RefState { id: id.clone(), pos: SrcPos::START, entered: true };
            rebuild(store, &mut s)?;
            Outcome::Reference { id: id.clone() }
        }
        TacticInput::SpecifyProblem { id } => {
            set_problem(store, &mut s, id, true)?;
            rebuild(store, &mut s)?;
            Outcome::Reference { id: id.clone() }
        }
        TacticInput::SpecifyMethod { id } => {
            set_method(store, &mut s, id, true)?;
            rebuild(store, &mut s)?;
            Outcome::Reference { id: id.clone() }
        }
        TacticInput::RefineProblem { id } | TacticInput::RefineTacitly { id } => {
            let result = refine_problem(store, &split_id(id), &s.i_model_problem)?;
            if let Some(matched) = &result.matched {
                let matched_id = join_id(matched);
                set_problem(store, &mut s, &matched_id, true)?;
                // the engine picks the method; a student's choice is kept
                let tacit = matches!(t, TacticInput::RefineTacitly { .. });
                if tacit || !s.refs.method.entered {
                    if let Some(m) = store.lookup_problem(matched)?.solve_mets.first() {
                        set_method(store, &mut s, &join_id(m), tacit)?;
                    }
                }
                rebuild(store, &mut s)?;
            }
            s.last_refine = Some(result.clone());
            Outcome::Refined { result }
        }
        TacticInput::ToggleView => {
            s.view = s.view.other();
            Outcome::Toggled { view: s.view }
        }
        TacticInput::CompleteSpec => {
            let added = complete(store, &mut s)?;
            s.refs.theory.entered = true;
            s.refs.problem.entered = true;
            s.refs.method.entered = true;
            Outcome::Completed { added }
        }
        TacticInput::FinishSpecify => {
            let handoff = finish(store, &s)?;
            s.handoff = Some(handoff.clone());
            Outcome::Finished { handoff }
        }
    };
    s.history.push(TacticApplied { tactic: t, outcome });
    Ok(s)
}

fn set_problem(store: &Store, s: &mut SpecSession, id: &str, entered: bool) -> Result<(), SpecifyError> {
    let p = store.lookup_problem(&split_id(id))?;
    s.o_model_problem =
        init_o_model(&s.origin.formalisation, &p.model, &s.formalisation_ctx(store), &store.descriptors)?;
    s.refs.problem = RefState { id: id.to_string(), pos: SrcPos::START, entered };
    Ok(())
}

fn set_method(store: &Store, s: &mut SpecSession, id: &str, entered: bool) -> Result<(), SpecifyError> {
    let m = store.lookup_method(&split_id(id))?;
    s.o_model_method =
        init_o_model(&s.origin.formalisation, &m.guard, &s.formalisation_ctx(store), &store.descriptors)?;
    s.refs.method = RefState { id: id.to_string(), pos: SrcPos::START, entered };
    Ok(())
}

fn slot(view: View) -> usize {
    match view {
        View::Problem => 0,
        View::Method => 1,
    }
}

/// Recomputes both I-models from the entries, under the current theory
/// and patterns. Entries whose item was replaced by a later one are
/// dropped, so deleting the later one leaves the slot empty.
pub(super) fn rebuild(store: &Store, s: &mut SpecSession) -> Result<(), SpecifyError> {
    let ctx = store.theory_context(&s.refs.theory.id);
    let rules = rule_set(&s.problem_def(store)?.where_rls);
    let checker = Checker { ctx: &ctx, descriptors: &store.descriptors, rules: &rules };
    let patterns = [s.pattern(store, View::Problem)?, s.pattern(store, View::Method)?];
    let o_models = [&s.o_model_problem, &s.o_model_method];
    loop {
        let models = replay_entries(&s.entries, o_models, patterns, &checker);
        let used: BTreeSet<u64> = models.iter().flat_map(|m| m.items.iter().map(|i| i.seq)).collect();
        let before = s.entries.len();
        s.entries.retain(|e| used.contains(&e.seq));
        if s.entries.len() == before {
            let [p, m] = models;
            s.i_model_problem = p;
            s.i_model_method = m;
            return Ok(());
        }
    }
}

/// Enters every input in its view. A placed item is also entered in the
/// other view when that view's pattern has the descriptor, and a syntax
/// error is kept in both.
fn replay_entries(entries: &[Entry], om: [&OModel; 2], mp: [&ModelPattern; 2], checker: &Checker) -> [IModel; 2] {
    let mut models = [IModel::default(), IModel::default()];
    for e in entries {
        let live = live_variants(&om[0].all_variants, &[&models[0], &models[1]]);
        let (t, o) = (slot(e.view), slot(e.view.other()));
        models[t] = check_input(&e.text, e.pos, e.field, e.seq, om[t], mp[t], &models[t], &live, checker);
        let item = models[t].items.iter().find(|i| i.field == e.field && i.source == e.text).expect("just entered");
        let mirror_field = match &item.feedback {
            Feedback::Syn { .. } => Some(e.field),
            f if f.is_placed() => f.descriptor().and_then(|d| mp[o].find(d)).map(|slot| slot.field),
            _ => None,
        };
        let Some(field) = mirror_field else { continue };
        let seq = item.seq;
        let keep_syntax = !item.feedback.is_placed();
        let mirrored = check_input(&e.text, e.pos, field, seq, om[o], mp[o], &models[o], &live, checker);
        let fits = mirrored
            .items
            .iter()
            .find(|i| i.field == field && i.source == e.text)
            .is_some_and(|i| i.feedback.is_placed() || keep_syntax);
        if fits {
            models[o] = mirrored;
        }
    }
    models
}

/// Fills every slot without a correct item from the O-model, choosing the
/// lowest variant still open. Returns the number of items added.
fn complete(store: &Store, s: &mut SpecSession) -> Result<usize, SpecifyError> {
    let mut added = 0;
    for view in [View::Problem, View::Method] {
        let Some(&v) = s.live().iter().next() else { break };
        let mp = s.pattern(store, view)?.clone();
        for slot in &mp.items {
            let done = s.i_model(view).items.iter().any(|i| {
                i.field == slot.field
                    && i.feedback.is_cor()
                    && i.feedback.descriptor() == Some(slot.descriptor.as_str())
                    && i.variants.contains(&v)
            });
            if done {
                continue;
            }
            let Some(o) = s
                .o_model(view)
                .items
                .iter()
                .find(|o| o.descriptor == slot.descriptor && o.field == slot.field && o.variants.contains(&v))
            else {
                continue;
            };
            let text = o.render();
            s.entries.push(Entry { seq: s.next_seq, view, field: slot.field, text, pos: SrcPos::START });
            s.next_seq += 1;
            added += 1;
            rebuild(store, s)?;
        }
    }
    Ok(added)
}

fn finish(store: &Store, s: &SpecSession) -> Result<SolveHandoff, SpecifyError> {
    let mut blockers = Vec::new();
    for view in [View::Problem, View::Method] {
        if !s.view_complete(store, view)? {
            blockers.push(format!(
                "the {} model is incomplete",
                match view {
                    View::Problem => "problem",
                    View::Method => "method",
                }
            ));
        }
    }
    for (name, r) in [("theory", &s.refs.theory), ("problem", &s.refs.problem), ("method", &s.refs.method)] {
        if !r.entered {
            blockers.push(format!("the {name} reference is not confirmed"));
        }
    }
    if !blockers.is_empty() {
        return Err(invalid(blockers.join("; ")));
    }
    let method = s.method_def(store)?;
    let (subst, _) = make_environments(&method.guard, &s.i_model_method).map_err(|e| invalid(e.to_string()))?;
    let guard = method
        .guard
        .items
        .iter()
        .map(|slot| {
            let value = subst.get(slot.placeholder_name()).cloned().unwrap_or_else(|| slot.placeholder.clone());
            match value {
                crate::terms::Term::List(elems) => render_item(&slot.descriptor, &elems, true),
                v => render_item(&slot.descriptor, &[v], false),
            }
        })
        .collect();
    Ok(SolveHandoff { method: method.id.clone(), actual_args: subst, guard })
}
