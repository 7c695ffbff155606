//! Normal forms, equivalence and predicate evaluation.
//!
//! Arithmetic is normalised by a fixed pipeline: expand, clear
//! denominators, collect, fix sign and scale. `sin`, `cos` and powers with
//! non-integer exponents are opaque atoms, so trigonometric identities are
//! not recognised.

mod poly;

use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub use poly::{Atom, Monomial, Poly, RatFn};

use crate::terms::{render, Env, OpId, Term};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RewriteError {
    #[error("cannot normalise '{0}'")]
    Unsupported(String),
    #[error("division by zero in '{0}'")]
    DivisionByZero(String),
}

/// Outcome of evaluating a predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl From<bool> for Truth {
    fn from(b: bool) -> Self {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }
}

pub type BuiltinFn = fn(&RuleSet, &[Term]) -> Truth;

#[derive(Clone)]
pub enum Rule {
    /// A native evaluator for the predicate named `id`.
    Builtin { id: String, eval: BuiltinFn },
    /// Oriented rewrite; variables in `lhs` match any subterm.
    Rewrite { lhs: Term, rhs: Term },
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Builtin { id, .. } => write!(f, "Builtin({id})"),
            Rule::Rewrite { lhs, rhs } => write!(f, "Rewrite({} -> {})", render(lhs), render(rhs)),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RuleSet {
    pub id: String,
    pub rules: Vec<Rule>,
}

const MAX_PASSES: usize = 16;

impl RuleSet {
    pub fn new(id: impl Into<String>) -> RuleSet {
        RuleSet { id: id.into(), rules: Vec::new() }
    }

    pub fn with_builtin(mut self, id: impl Into<String>, eval: BuiltinFn) -> RuleSet {
        self.rules.push(Rule::Builtin { id: id.into(), eval });
        self
    }

    pub fn with_rewrite(mut self, lhs: Term, rhs: Term) -> RuleSet {
        self.rules.push(Rule::Rewrite { lhs, rhs });
        self
    }

    pub fn builtin(&self, id: &str) -> Option<BuiltinFn> {
        self.rules.iter().find_map(|r| match r {
            Rule::Builtin { id: rid, eval } if rid == id => Some(*eval),
            _ => None,
        })
    }

    /// Applies the rewrite rules bottom-up until nothing changes, with a
    /// bound on the number of passes.
    pub fn apply_rewrites(&self, t: &Term) -> Term {
        let rules: Vec<(&Term, &Term)> = self
            .rules
            .iter()
            .filter_map(|r| match r {
                Rule::Rewrite { lhs, rhs } => Some((lhs, rhs)),
                Rule::Builtin { .. } => None,
            })
            .collect();
        if rules.is_empty() {
            return t.clone();
        }
        let mut cur = t.clone();
        for _ in 0..MAX_PASSES {
            let next = cur.map_bottom_up(&mut |node| {
                for (lhs, rhs) in &rules {
                    let mut env = Env::default();
                    if match_pattern(lhs, &node, &mut env) {
                        return crate::terms::substitute(&env, rhs);
                    }
                }
                node
            });
            if next == cur {
                break;
            }
            cur = next;
        }
        cur
    }
}

fn match_pattern(pat: &Term, t: &Term, env: &mut Env) -> bool {
    match (pat, t) {
        (Term::Var { name, .. }, _) => match env.get(name) {
            Some(bound) => bound == t,
            None => {
                env.bind(name.clone(), t.clone());
                true
            }
        },
        (Term::Num(a), Term::Num(b)) => a == b,
        (Term::App(op1, a1), Term::App(op2, a2)) => {
            op1 == op2 && a1.len() == a2.len() && a1.iter().zip(a2).all(|(p, x)| match_pattern(p, x, env))
        }
        (Term::List(a1), Term::List(a2)) => {
            a1.len() == a2.len() && a1.iter().zip(a2).all(|(p, x)| match_pattern(p, x, env))
        }
        (Term::Interval(l1, h1), Term::Interval(l2, h2)) => match_pattern(l1, l2, env) && match_pattern(h1, h2, env),
        _ => false,
    }
}

#[derive(Debug, Clone)]
pub enum NormalForm {
    /// `lhs = rhs` as the primitive numerator of `lhs - rhs`.
    Equation(Poly),
    /// `0 < poly` or `0 <= poly`, scaled by a positive factor only.
    Inequality {
        poly: Poly,
        strict: bool,
    },
    Expr(RatFn),
    Interval(RatFn, RatFn),
    List(Vec<NormalForm>),
    Item {
        descriptor: String,
        value: Box<NormalForm>,
    },
    Opaque(Term),
}

impl PartialEq for NormalForm {
    fn eq(&self, other: &Self) -> bool {
        use NormalForm::*;
        match (self, other) {
            (Equation(a), Equation(b)) => a == b,
            (Inequality { poly: a, strict: s }, Inequality { poly: b, strict: t }) => s == t && a == b,
            (Expr(a), Expr(b)) => a.same_value(b),
            (Interval(a1, b1), Interval(a2, b2)) => a1.same_value(a2) && b1.same_value(b2),
            (List(a), List(b)) => a == b,
            (Item { descriptor: d1, value: v1 }, Item { descriptor: d2, value: v2 }) => d1 == d2 && v1 == v2,
            (Opaque(a), Opaque(b)) => a == b,
            _ => false,
        }
    }
}

impl NormalForm {
    pub fn is_zero_equation(&self) -> bool {
        matches!(self, NormalForm::Equation(p) if p.is_zero())
    }

    /// A term whose normal form is `self`.
    pub fn to_term(&self) -> Term {
        match self {
            NormalForm::Equation(p) => Term::eq(p.to_term(), Term::num(0)),
            NormalForm::Inequality { poly, strict } => {
                Term::binary(if *strict { OpId::Lt } else { OpId::Le }, Term::num(0), poly.to_term())
            }
            NormalForm::Expr(r) => r.to_term(),
            NormalForm::Interval(lo, hi) => Term::interval(lo.to_term(), hi.to_term()),
            NormalForm::List(elems) => Term::List(elems.iter().map(NormalForm::to_term).collect()),
            NormalForm::Item { descriptor, value } => Term::descriptor(descriptor, value.to_term()),
            NormalForm::Opaque(t) => t.clone(),
        }
    }
}

/// Largest integer exponent that is expanded rather than kept opaque.
const MAX_EXPAND: i64 = 64;

/// Normalises an arithmetic term to a rational function.
pub fn arith(t: &Term) -> Result<RatFn, RewriteError> {
    match t {
        Term::Num(n) => Ok(RatFn::constant(n.clone())),
        Term::Var { name, .. } => Ok(RatFn::poly(Poly::atom(Atom::var(name)))),
        Term::App(op, args) => match op {
            OpId::Add => Ok(arith(&args[0])?.add(&arith(&args[1])?)),
            OpId::Sub => Ok(arith(&args[0])?.sub(&arith(&args[1])?)),
            OpId::Mul => Ok(arith(&args[0])?.mul(&arith(&args[1])?)),
            OpId::Div => arith(&args[0])?.div(&arith(&args[1])?).ok_or_else(|| RewriteError::DivisionByZero(render(t))),
            OpId::Neg => Ok(arith(&args[0])?.neg()),
            OpId::Pow => {
                let base = arith(&args[0])?;
                let exp = arith(&args[1])?;
                match exp.as_constant() {
                    Some(e) if e.is_integer() && e.abs() <= BigRational::from_integer(MAX_EXPAND.into()) => {
                        let n = e.to_integer().to_i64().expect("bounded exponent");
                        base.powi(n).ok_or_else(|| RewriteError::DivisionByZero(render(t)))
                    }
                    Some(e) => Ok(opaque(Term::binary(OpId::Pow, base.to_term(), Term::Num(e)))),
                    None => Ok(opaque(Term::binary(OpId::Pow, base.to_term(), exp.to_term()))),
                }
            }
            OpId::Fn(_) => Ok(opaque(Term::app(op.clone(), vec![arith(&args[0])?.to_term()]))),
            _ => Err(RewriteError::Unsupported(render(t))),
        },
        Term::List(_) | Term::Interval(..) => Err(RewriteError::Unsupported(render(t))),
    }
}

fn opaque(t: Term) -> RatFn {
    RatFn::poly(Poly::atom(Atom::opaque(t)))
}

/// `lhs - rhs` of an equation or comparison, denominators kept.
pub fn difference(lhs: &Term, rhs: &Term) -> Result<RatFn, RewriteError> {
    Ok(arith(lhs)?.sub(&arith(rhs)?))
}

pub fn normalize(rs: &RuleSet, t: &Term) -> Result<NormalForm, RewriteError> {
    normalize_rewritten(&rs.apply_rewrites(t))
}

fn normalize_rewritten(t: &Term) -> Result<NormalForm, RewriteError> {
    match t {
        Term::App(OpId::Eq, args) => Ok(NormalForm::Equation(difference(&args[0], &args[1])?.num.primitive())),
        Term::App(op @ (OpId::Lt | OpId::Le), args) => {
            let (lo, hi) = (arith(&args[0])?, arith(&args[1])?);
            let strict = matches!(op, OpId::Lt);
            let d = hi.sub(&lo);
            if d.has_denominator() {
                // the sign of a variable denominator is unknown
                let canon = Term::binary(op.clone(), lo.to_term(), hi.to_term());
                Ok(NormalForm::Opaque(canon))
            } else {
                Ok(NormalForm::Inequality { poly: d.num.content_normalized(), strict })
            }
        }
        Term::App(OpId::Descriptor(d), args) => {
            Ok(NormalForm::Item { descriptor: d.clone(), value: Box::new(normalize_rewritten(&args[0])?) })
        }
        Term::App(OpId::Pred(_), _) => Ok(NormalForm::Opaque(t.clone())),
        Term::List(elems) => Ok(NormalForm::List(elems.iter().map(normalize_rewritten).collect::<Result<_, _>>()?)),
        Term::Interval(lo, hi) => Ok(NormalForm::Interval(arith(lo)?, arith(hi)?)),
        _ => Ok(NormalForm::Expr(arith(t)?)),
    }
}

/// Equality of normal forms, with lists compared as multisets.
pub fn equivalent(rs: &RuleSet, a: &Term, b: &Term) -> Result<bool, RewriteError> {
    Ok(nf_equivalent(&normalize(rs, a)?, &normalize(rs, b)?))
}

pub fn nf_equivalent(a: &NormalForm, b: &NormalForm) -> bool {
    match (a, b) {
        (NormalForm::List(xs), NormalForm::List(ys)) => {
            if xs.len() != ys.len() {
                return false;
            }
            let mut used = vec![false; ys.len()];
            xs.iter().all(|x| match (0..ys.len()).find(|&j| !used[j] && nf_equivalent(x, &ys[j])) {
                Some(j) => {
                    used[j] = true;
                    true
                }
                None => false,
            })
        }
        (NormalForm::Item { descriptor: d1, value: v1 }, NormalForm::Item { descriptor: d2, value: v2 }) => {
            d1 == d2 && nf_equivalent(v1, v2)
        }
        _ => a == b,
    }
}

/// Exact value of a ground arithmetic term, if it is rational.
pub fn rational_value(rs: &RuleSet, t: &Term) -> Option<BigRational> {
    let t = rs.apply_rewrites(t);
    if !t.is_ground() {
        return None;
    }
    arith(&t).ok()?.as_constant()
}

pub fn eval_pred(rs: &RuleSet, p: &Term) -> Truth {
    let p = rs.apply_rewrites(p);
    match &p {
        Term::App(OpId::Pred(pred), args) => match rs.builtin(pred.name()) {
            Some(eval) => eval(rs, args),
            None => Truth::Unknown,
        },
        Term::App(op @ (OpId::Eq | OpId::Lt | OpId::Le), args) => {
            if !p.is_ground() {
                return Truth::Unknown;
            }
            let (Some(l), Some(r)) = (rational_value(rs, &args[0]), rational_value(rs, &args[1])) else {
                return Truth::Unknown;
            };
            let d = r - l;
            Truth::from(match op {
                OpId::Eq => d.is_zero(),
                OpId::Lt => d.is_positive(),
                _ => !d.is_negative(),
            })
        }
        _ => Truth::Unknown,
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::terms::{parse_term, TypeContext};

    fn t(src: &str) -> Term {
        parse_term(src, &TypeContext::default()).unwrap()
    }

    fn rs() -> RuleSet {
        RuleSet::new("test")
    }

    fn equiv(a: &str, b: &str) -> bool {
        equivalent(&rs(), &t(a), &t(b)).unwrap()
    }

    /// Monomial map keyed by rendered power products.
    fn monomials(nf: &NormalForm) -> BTreeMap<String, BigRational> {
        let NormalForm::Equation(p) = nf else { panic!("not an equation") };
        p.terms()
            .map(|(m, c)| {
                let key: Vec<String> = m.factors().iter().map(|(a, e)| format!("{}^{e}", render(a.term()))).collect();
                (key.join("*"), c.clone())
            })
            .collect()
    }

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn pythagoras_variants_are_equivalent() {
        assert!(equiv("u^2 + v^2 = 4*r^2", "(u/2)^2 + (v/2)^2 = r^2"));
        let nf = normalize(&rs(), &t("(u/2)^2 + (v/2)^2 = r^2")).unwrap();
        let m = monomials(&nf);
        let expected: BTreeMap<String, BigRational> =
            [("u^2", q(1)), ("v^2", q(1)), ("r^2", q(-4))].map(|(k, v)| (k.to_string(), v)).into();
        let negated: BTreeMap<String, BigRational> = expected.iter().map(|(k, v)| (k.clone(), -v)).collect();
        assert!(m == expected || m == negated, "{m:?}");
    }

    #[test]
    fn reflexive_equation_is_zero() {
        assert!(normalize(&rs(), &t("x = x")).unwrap().is_zero_equation());
    }

    #[test]
    fn rearranged_extremum() {
        let a = monomials(&normalize(&rs(), &t("2*u*v - u^2 - A = 0")).unwrap());
        let b = monomials(&normalize(&rs(), &t("A = 2*u*v - u^2")).unwrap());
        assert_eq!(a, b);
        let by_hand: BTreeMap<String, BigRational> =
            [("A^1", q(1)), ("u^1*v^1", q(-2)), ("u^2", q(1))].map(|(k, v)| (k.to_string(), v)).into();
        let negated: BTreeMap<String, BigRational> = by_hand.iter().map(|(k, v)| (k.clone(), -v)).collect();
        assert!(a == by_hand || a == negated, "{a:?}");
    }

    #[test]
    fn distinct_variants_differ() {
        assert!(!equiv("u/2 = r * sin alpha", "(u/2)^2 + (v/2)^2 = r^2"));
        assert!(equiv("u/2 = r * sin alpha", "u = 2 * r * sin α"));
    }

    #[test]
    fn trig_is_opaque() {
        assert!(!equiv("sin x ^ 2 + cos x ^ 2 = 1", "0 = 0"));
        assert!(equiv("sin (x + x) = 1", "sin (2 * x) = 1"));
    }

    #[test]
    fn lists_are_multisets() {
        assert!(equiv("[a = 1, b = 2]", "[2 = b, a = 1]"));
        assert!(!equiv("[a = 1, b = 2]", "[a = 1]"));
        assert!(!equiv("[a = 1, a = 1]", "[a = 1, b = 2]"));
        assert!(equiv("Constants [r = 7]", "Constants [7 = r]"));
        assert!(!equiv("Constants [r = 7]", "Maximum [r = 7]"));
    }

    #[test]
    fn intervals() {
        assert!(equiv("{0 <..< pi/2}", "{0 <..< 0.5 * π}"));
        assert!(!equiv("{0 <..< r}", "{0 <..< π / 2}"));
        assert!(matches!(normalize(&rs(), &t("x + {0 <..< 1} = 2")), Err(RewriteError::Unsupported(_))));
    }

    #[test]
    fn eval_ground_comparisons() {
        assert_eq!(eval_pred(&rs(), &t("0 < 7")), Truth::True);
        assert_eq!(eval_pred(&rs(), &t("0 < 0")), Truth::False);
        assert_eq!(eval_pred(&rs(), &t("0 <= 0")), Truth::True);
        assert_eq!(eval_pred(&rs(), &t("1/3 + 1/6 = 0.5")), Truth::True);
        assert_eq!(eval_pred(&rs(), &t("0 < r")), Truth::Unknown);
        assert_eq!(eval_pred(&rs(), &t("x = x")), Truth::Unknown);
        assert_eq!(eval_pred(&rs(), &t("1 / 0 < 2")), Truth::Unknown);
    }

    #[test]
    fn builtins_are_dispatched() {
        fn always(_: &RuleSet, _: &[Term]) -> Truth {
            Truth::True
        }
        let p = t("has_equality(x = 1)");
        assert_eq!(eval_pred(&rs(), &p), Truth::Unknown);
        assert_eq!(eval_pred(&rs().with_builtin("has_equality", always), &p), Truth::True);
    }

    #[test]
    fn rewrite_rules_apply_before_normalising() {
        let rules = rs().with_rewrite(t("sin x ^ 2"), t("1 - cos x ^ 2"));
        assert!(equivalent(&rules, &t("sin a ^ 2 + cos a ^ 2 = 1"), &t("0 = 0")).unwrap());
    }

    #[test]
    fn idempotent_on_examples() {
        for src in ["(u/2)^2 + (v/2)^2 = r^2", "x / (x + 1) = 3", "0 < 2 * r", "[a = 1, b]", "sqrtish ^ 0.5 = 2"] {
            let nf = normalize(&rs(), &t(src)).unwrap();
            let again = normalize(&rs(), &t(&render(&nf.to_term()))).unwrap();
            assert_eq!(nf, again, "{src}");
        }
    }
}
