//! Problem refinement: find the most specific problem in the tree whose
//! preconditions hold for an I-model.

use serde::{Deserialize, Serialize};

use crate::imodel::{check_preconds, IModel, PreCondsChecked};
use crate::knowledge::{IdPath, LookupError, Store};
use crate::rewrite::{difference, BuiltinFn, RatFn, RuleSet, Truth};
use crate::terms::{OpId, Pred, Term};

/// The structural predicates behind the equation tree's preconditions.
pub fn register_builtin_predicates() -> Vec<(Pred, BuiltinFn)> {
    vec![
        (Pred::HasEquality, has_equality),
        (Pred::IsLinearIn, is_linear_in),
        (Pred::IsRootFormIn, is_root_form_in),
        (Pred::IsPolynomialIn, is_polynomial_in),
        (Pred::IsRationalIn, is_rational_in),
    ]
}

/// The rule set named `id`, with the builtin predicates registered.
pub fn rule_set(id: &str) -> RuleSet {
    register_builtin_predicates().into_iter().fold(RuleSet::new(id), |rs, (p, f)| rs.with_builtin(p.name(), f))
}

fn has_equality(_: &RuleSet, args: &[Term]) -> Truth {
    match &args[0] {
        Term::Var { .. } => Truth::Unknown,
        t => Truth::from(t.is_equation()),
    }
}

/// `lhs - rhs` of an equation and the variable it is about.
fn equation_in(args: &[Term]) -> Result<(RatFn, &str), Truth> {
    let x = args[1].as_var().ok_or(Truth::Unknown)?;
    match &args[0] {
        Term::App(OpId::Eq, sides) => difference(&sides[0], &sides[1]).map(|d| (d, x)).map_err(|_| Truth::False),
        Term::Var { .. } => Err(Truth::Unknown),
        _ => Err(Truth::False),
    }
}

fn in_denominator(d: &RatFn, x: &str) -> bool {
    d.den.atoms().any(|a| a.mentions(x))
}

fn in_opaque(d: &RatFn, x: &str) -> bool {
    d.num.atoms().chain(d.den.atoms()).any(|a| !a.is_var(x) && a.mentions(x))
}

fn polynomial_degree(args: &[Term]) -> Result<Option<u32>, Truth> {
    let (d, x) = equation_in(args)?;
    if in_denominator(&d, x) || in_opaque(&d, x) {
        return Ok(None);
    }
    Ok(Some(d.num.degree_in(x)))
}

fn is_linear_in(_: &RuleSet, args: &[Term]) -> Truth {
    match polynomial_degree(args) {
        Ok(deg) => Truth::from(deg == Some(1)),
        Err(t) => t,
    }
}

fn is_polynomial_in(_: &RuleSet, args: &[Term]) -> Truth {
    match polynomial_degree(args) {
        Ok(deg) => Truth::from(deg.is_some_and(|n| n >= 1)),
        Err(t) => t,
    }
}

fn is_root_form_in(_: &RuleSet, args: &[Term]) -> Truth {
    match equation_in(args) {
        Ok((d, x)) => Truth::from(d.num.atoms().chain(d.den.atoms()).any(|a| a.is_root() && a.mentions(x))),
        Err(t) => t,
    }
}

fn is_rational_in(_: &RuleSet, args: &[Term]) -> Truth {
    match equation_in(args) {
        Ok((d, x)) => Truth::from(in_denominator(&d, x)),
        Err(t) => t,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrailEntry {
    pub problem: IdPath,
    pub checked: PreCondsChecked,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefineResult {
    pub matched: Option<IdPath>,
    /// Nodes in the order they were checked.
    pub trail: Vec<TrailEntry>,
}

fn check_node(store: &Store, path: &[String], im: &IModel) -> Result<TrailEntry, LookupError> {
    let p = store.lookup_problem(path)?;
    let checked = check_preconds(&rule_set(&p.where_rls), &p.where_, &p.model, im);
    Ok(TrailEntry { problem: path.to_vec(), checked })
}

/// Searches downwards from `start`. Children are checked in declaration
/// order and the search descends into the first one that holds; nodes
/// below a failing node are never visited.
pub fn refine_problem(store: &Store, start: &[String], im: &IModel) -> Result<RefineResult, LookupError> {
    let root = check_node(store, start, im)?;
    let holds = root.checked.all_true;
    let mut result = RefineResult { matched: None, trail: vec![root] };
    if !holds {
        return Ok(result);
    }
    let mut node = start.to_vec();
    result.matched = Some(node.clone());
    'descend: loop {
        for child in store.problems.children(&node) {
            let entry = check_node(store, &child, im)?;
            let holds = entry.checked.all_true;
            result.trail.push(entry);
            if holds {
                result.matched = Some(child.clone());
                node = child;
                continue 'descend;
            }
        }
        return Ok(result);
    }
}

/// Refinement run by the engine itself, e.g. for a CAS command. The
/// result is the same; callers record it rather than display it.
pub fn refine_tacitly(store: &Store, start: &[String], im: &IModel) -> Result<RefineResult, LookupError> {
    refine_problem(store, start, im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imodel::{Feedback, IModelItem};
    use crate::knowledge::{split_id, MField};
    use crate::rewrite::eval_pred;
    use crate::terms::{parse_count, parse_term, SrcPos, TypeContext};

    fn t(s: &str) -> Term {
        parse_term(s, &TypeContext::default()).unwrap()
    }

    fn pred(s: &str) -> Truth {
        eval_pred(&rule_set("eval_rls"), &t(s))
    }

    #[test]
    fn builtin_examples() {
        assert_eq!(pred("is_linear_in(12 - 6 * x = 0, x)"), Truth::True);
        assert_eq!(pred("is_linear_in(x ^ 2 = 0, x)"), Truth::False);
        assert_eq!(pred("has_equality(12 - 6 * x)"), Truth::False);
        assert_eq!(pred("has_equality(x = 1)"), Truth::True);
    }

    #[test]
    fn equation_classes() {
        assert_eq!(pred("is_polynomial_in(x ^ 2 - 1 = 0, x)"), Truth::True);
        assert_eq!(pred("is_polynomial_in(1 / x = 2, x)"), Truth::False);
        assert_eq!(pred("is_rational_in(1 / x = 2, x)"), Truth::True);
        assert_eq!(pred("is_rational_in(x / 2 = 1, x)"), Truth::False);
        assert_eq!(pred("is_root_form_in(x ^ 0.5 = 3, x)"), Truth::True);
        assert_eq!(pred("is_polynomial_in(x ^ 0.5 = 3, x)"), Truth::False);
        assert_eq!(pred("is_linear_in(a * x = b, x)"), Truth::True);
        assert_eq!(pred("is_linear_in(x ^ 2 - x ^ 2 + x = 0, x)"), Truth::True);
        assert_eq!(pred("is_linear_in(y = 0, x)"), Truth::False);
        assert_eq!(pred("is_linear_in(e, x)"), Truth::Unknown);
    }

    fn equation_model(eq: &str, x: &str) -> IModel {
        let item = |d: &str, v: Term| IModelItem {
            seq: 0,
            variants: [1].into(),
            field: MField::Given,
            feedback: Feedback::Cor { descriptor: d.into(), values: vec![v] },
            pos: SrcPos::START,
            source: String::new(),
            message: String::new(),
        };
        IModel { items: vec![item("Equation", t(eq)), item("SolveFor", t(x))] }
    }

    fn visited(r: &RefineResult) -> Vec<(String, bool)> {
        r.trail.iter().map(|e| (e.problem.last().unwrap().clone(), e.checked.all_true)).collect()
    }

    #[test]
    fn refines_linear_equation() {
        let store = Store::shipped();
        let im = equation_model("12 - 6 * x = 0", "x");
        let start = split_id("univariate/equation");
        let before = parse_count();
        let r = refine_problem(&store, &start, &im).unwrap();
        assert_eq!(parse_count(), before);
        assert_eq!(r.matched, Some(split_id("univariate/equation/linear")));
        assert_eq!(r.trail.last().unwrap().problem, split_id("univariate/equation/linear"));
    }

    #[test]
    fn refines_quadratic_to_polynomial() {
        let store = Store::shipped();
        let r =
            refine_problem(&store, &split_id("univariate/equation"), &equation_model("x ^ 2 - 1 = 0", "x")).unwrap();
        assert_eq!(r.matched, Some(split_id("univariate/equation/polynomial")));
        assert_eq!(
            visited(&r),
            [("equation", true), ("linear", false), ("root", false), ("polynomial", true)]
                .map(|(n, b)| (n.to_string(), b))
        );
    }

    #[test]
    fn failing_root_stops_the_search() {
        let store = Store::shipped();
        let r = refine_problem(&store, &split_id("univariate/equation"), &equation_model("x + 1", "x")).unwrap();
        assert_eq!(r.matched, None);
        assert_eq!(r.trail.len(), 1);
        assert!(refine_problem(&store, &split_id("no/where"), &IModel::default()).is_err());
    }
}
