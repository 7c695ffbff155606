use proptest::prelude::*;
use specify_core::imodel::{environments, Feedback, Variants};
use specify_core::knowledge::{split_id, MField, Store};
use specify_core::refine::{refine_problem, rule_set};
use specify_core::rewrite::{equivalent, normalize};
use specify_core::specify::{
    apply_tactic, cas_command, missing_count, propose_next, replay, start_example, Settings, SpecSession, TacticInput,
    View,
};
use specify_core::terms::{SrcPos, Term};

const DEMO: &str = "Diff_App/coil-kernel";

const POOL: &[(MField, &str)] = &[
    (MField::Given, "Constants [r = 7]"),
    (MField::Given, "Constants [r = 9]"),
    (MField::Find, "Maximum A"),
    (MField::Find, "AdditionalValues [u, v]"),
    (MField::Find, "AdditionalValues [u]"),
    (MField::Relate, "Extremum (A = 2 * u * v - u ^ 2)"),
    (MField::Relate, "SideConditions [(u / 2) ^ 2 + (v / 2) ^ 2 = r ^ 2]"),
    (MField::Relate, "SideConditions [u / 2 = r * sin α, v / 2 = r * cos α]"),
    (MField::Relate, "SideConditions [v = sin α]"),
    (MField::Given, "FunctionVariable u"),
    (MField::Given, "FunctionVariable v"),
    (MField::Given, "FunctionVariable α"),
    (MField::Given, "Domain {0 <..< r}"),
    (MField::Given, "Domain {0 <..< π / 2}"),
    (MField::Given, "ErrorBound (ε = 0)"),
    (MField::Given, "Maximum ("),
];

fn store() -> &'static Store {
    use std::sync::OnceLock;
    static STORE: OnceLock<Store> = OnceLock::new();
    STORE.get_or_init(Store::shipped)
}

fn fresh() -> SpecSession {
    start_example(store(), DEMO, Settings::default()).unwrap()
}

fn add(s: &SpecSession, (field, text): (MField, &str)) -> SpecSession {
    apply_tactic(store(), s, TacticInput::add(field, text, SrcPos::START)).unwrap()
}

fn entries() -> impl Strategy<Value = Vec<(MField, &'static str)>> {
    prop::collection::vec(prop::sample::select(POOL.to_vec()), 0..10)
}

fn item<'s>(s: &'s SpecSession, text: &str) -> Option<&'s specify_core::imodel::IModelItem> {
    s.i_model(s.view).items.iter().find(|i| i.source == text)
}

fn cor_intersection(s: &SpecSession, view: View) -> Variants {
    let mut live: Variants = (1..=3).collect();
    for i in s.i_model(view).items.iter().filter(|i| i.feedback.is_cor()) {
        live = live.intersection(&i.variants).copied().collect();
    }
    live
}

/// Equation forms of the Pythagoras and extremum relations scaled by `k`.
fn rescaled(k: i64) -> [(MField, String, &'static str); 3] {
    [
        (MField::Relate, format!("SideConditions [{k} * ((u / 2) ^ 2 + (v / 2) ^ 2) = {k} * r ^ 2]"), "SideConditions"),
        (MField::Relate, format!("Extremum ({k} * A = {k} * (2 * u * v - u ^ 2))"), "Extremum"),
        (MField::Given, format!("Constants [{k} * r = {}]", 7 * k), "Constants"),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn resubmitting_a_correct_item_changes_nothing(seq in entries()) {
        let mut s = fresh();
        for e in seq {
            s = add(&s, e);
        }
        let cor: Vec<(MField, String)> =
            s.i_model_problem.items.iter().filter(|i| i.feedback.is_cor()).map(|i| (i.field, i.source.clone())).collect();
        for (field, text) in cor {
            let again = add(&s, (field, &text));
            prop_assert_eq!(&again.i_model_problem, &s.i_model_problem);
            prop_assert_eq!(&again.i_model_method, &s.i_model_method);
        }
    }

    #[test]
    fn live_variants_only_shrink_as_items_are_added(seq in entries()) {
        let mut s = fresh();
        for e in seq {
            let before = s.live();
            s = add(&s, e);
            let placed = item(&s, e.1).is_some_and(|i| !matches!(i.feedback, Feedback::Sup { .. }));
            if placed {
                prop_assert!(s.live().is_subset(&before), "{} grew {:?} to {:?}", e.1, before, s.live());
            }
        }
    }

    #[test]
    fn deleting_recomputes_the_live_variants(seq in entries(), pick in any::<prop::sample::Index>()) {
        let mut s = fresh();
        for e in &seq {
            s = add(&s, *e);
        }
        let items = s.i_model_problem.items.clone();
        prop_assume!(!items.is_empty());
        let gone = pick.get(&items);
        let s = apply_tactic(store(), &s, TacticInput::DeleteItem { field: gone.field, text: gone.source.clone() }).unwrap();
        let mut rebuilt = fresh();
        for e in seq.iter().filter(|e| !(e.0 == gone.field && e.1 == gone.source)) {
            rebuilt = add(&rebuilt, *e);
        }
        prop_assert_eq!(s.live(), rebuilt.live());
    }

    #[test]
    fn completion_needs_one_variant(seq in entries(), complete in any::<bool>()) {
        let mut s = fresh();
        for e in seq {
            s = add(&s, e);
        }
        if complete {
            s = apply_tactic(store(), &s, TacticInput::CompleteSpec).unwrap();
        }
        if s.is_complete(store()).unwrap() {
            prop_assert!(!cor_intersection(&s, View::Problem).is_empty());
        }
        if s.ready_to_finish(store()).unwrap() {
            prop_assert!(!cor_intersection(&s, View::Method).is_empty());
        }
    }

    #[test]
    fn equivalent_inputs_classify_alike(k in prop_oneof![-9i64..=-1, 2i64..=9]) {
        let s = fresh();
        for (field, text, descriptor) in rescaled(k) {
            let prepared = match descriptor {
                "SideConditions" => "SideConditions [(u / 2) ^ 2 + (v / 2) ^ 2 = r ^ 2]",
                "Extremum" => "Extremum (A = 2 * u * v - u ^ 2)",
                _ => "Constants [r = 7]",
            };
            let a = add(&s, (field, prepared));
            let b = add(&s, (field, &text));
            let (ia, ib) = (item(&a, prepared).unwrap(), item(&b, &text).unwrap());
            prop_assert_eq!(ia.feedback.kind(), ib.feedback.kind());
            prop_assert_eq!(ia.feedback.descriptor(), ib.feedback.descriptor());
            prop_assert_eq!(&ia.variants, &ib.variants);
        }
    }

    #[test]
    fn env_eval_comes_from_entered_equalities(seq in entries()) {
        let mut s = fresh();
        for e in seq {
            s = add(&s, e);
        }
        let mp = s.pattern(store(), View::Problem).unwrap();
        let envs = environments(mp, &s.i_model_problem);
        let rules = rule_set("eval_rls");
        for (x, q) in envs.eval.iter() {
            let found = s.i_model_problem.items.iter().filter(|i| i.feedback.is_placed()).any(|i| {
                i.feedback.values().iter().any(|v| match v.as_equation() {
                    Some((Term::Var { name, .. }, rhs)) if name == x => {
                        equivalent(&rules, &Term::eq(Term::var("_"), rhs.clone()), &Term::eq(Term::var("_"), q.clone()))
                            .unwrap_or(false)
                    }
                    _ => false,
                })
            });
            prop_assert!(found, "{} ↦ {} has no source", x, q);
            prop_assert!(normalize(&rules, q).is_ok());
        }
    }

    #[test]
    fn toggling_keeps_syntax_errors_verbatim(seq in entries(), bad in "[A-Z][a-z]{2,8} \\(\\[[a-z ]{0,4}") {
        let mut s = fresh();
        for e in seq {
            s = add(&s, e);
        }
        s = add(&s, (MField::Given, &bad));
        let there = apply_tactic(store(), &s, TacticInput::ToggleView).unwrap();
        prop_assert!(there.i_model(View::Method).items.iter().any(|i| i.source == bad && i.feedback.kind() == "syntax"));
        let back = apply_tactic(store(), &there, TacticInput::ToggleView).unwrap();
        prop_assert!(back.i_model(View::Problem).items.iter().any(|i| i.source == bad && i.feedback.kind() == "syntax"));
    }

    #[test]
    fn handoff_binds_every_guard_placeholder(seq in entries()) {
        let mut s = fresh();
        for e in seq {
            s = add(&s, e);
        }
        let s = apply_tactic(store(), &s, TacticInput::CompleteSpec).unwrap();
        let s = apply_tactic(store(), &s, TacticInput::FinishSpecify).unwrap();
        let handoff = s.handoff.as_ref().unwrap();
        let guard = &store().lookup_method(&handoff.method).unwrap().guard;
        for p in guard.placeholders() {
            prop_assert!(handoff.actual_args.get(p).is_some(), "{} unbound", p);
        }
    }

    #[test]
    fn proposals_make_progress(seq in entries()) {
        let mut s = fresh();
        for e in seq {
            s = add(&s, e);
        }
        let mut toggled = false;
        for _ in 0..40 {
            if s.is_finished() {
                break;
            }
            let before = missing_count(store(), &s).unwrap();
            let t = propose_next(store(), &s).unwrap();
            s = apply_tactic(store(), &s, t.clone()).unwrap();
            if t == TacticInput::ToggleView {
                prop_assert!(!toggled, "two toggles in a row");
                toggled = true;
            } else {
                toggled = false;
                prop_assert!(s.is_finished() || missing_count(store(), &s).unwrap() < before, "{} made no progress", t);
            }
        }
        prop_assert!(s.is_finished());
    }

    #[test]
    fn replay_reproduces_random_sessions(seq in entries(), toggles in prop::collection::vec(any::<bool>(), 10)) {
        let mut s = fresh();
        for (e, toggle) in seq.into_iter().zip(toggles) {
            s = add(&s, e);
            if toggle {
                s = apply_tactic(store(), &s, TacticInput::ToggleView).unwrap();
            }
        }
        prop_assert_eq!(replay(store(), &s.origin, &s.history).unwrap(), s);
    }

    #[test]
    fn refinement_trail_is_consistent(a in -5i64..=5, b in -5i64..=5, c in 1i64..=5, degree in 1u32..=3) {
        let lhs = match degree {
            1 => format!("{c} * x + {a}"),
            2 => format!("{c} * x ^ 2 + {a} * x + {b}"),
            _ => format!("{c} * x ^ 3 + {b}"),
        };
        let s = cas_command(store(), &format!("solve ({lhs} = 0, x)")).unwrap();
        let result = s.last_refine.clone().unwrap();
        let again = refine_problem(store(), &split_id("univariate/equation"), &s.i_model_problem).unwrap();
        prop_assert_eq!(&again, &result);

        for (i, e) in result.trail.iter().enumerate() {
            if !e.checked.all_true {
                for later in &result.trail[i + 1..] {
                    prop_assert!(!later.problem.starts_with(&e.problem), "descendant of a failed node checked");
                }
            }
        }
        let matched = result.matched.unwrap();
        prop_assert_eq!(&result.trail.iter().rev().find(|e| e.checked.all_true).unwrap().problem, &matched);
        for depth in 2..matched.len() {
            let ancestor = &matched[..depth];
            prop_assert!(result.trail.iter().any(|e| e.problem == ancestor && e.checked.all_true));
        }
        let expected = if degree == 1 { "univariate/equation/linear" } else { "univariate/equation/polynomial" };
        prop_assert_eq!(matched, split_id(expected));
    }
}
