use num_rational::BigRational;
use proptest::prelude::*;
use specify_core::rewrite::{equivalent, eval_pred, normalize, RuleSet, Truth};
use specify_core::terms::{parse_term, render, OpId, Term, TypeContext};

fn arith_term() -> impl Strategy<Value = Term> {
    let leaf =
        prop_oneof![(-9i64..10).prop_map(Term::num), prop::sample::select(vec!["x", "y", "z"]).prop_map(Term::var),];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::binary(OpId::Add, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::binary(OpId::Sub, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::binary(OpId::Mul, a, b)),
            (inner.clone(), 1i64..5).prop_map(|(a, d)| Term::binary(OpId::Div, a, Term::num(d))),
            (inner.clone(), 0i64..3).prop_map(|(a, e)| Term::binary(OpId::Pow, a, Term::num(e))),
            inner.prop_map(|a| Term::app(OpId::Neg, vec![a])),
        ]
    })
}

fn equation() -> impl Strategy<Value = Term> {
    (arith_term(), arith_term()).prop_map(|(a, b)| Term::eq(a, b))
}

fn nonzero_rational() -> impl Strategy<Value = BigRational> {
    (1i64..20, 1i64..20, any::<bool>())
        .prop_map(|(n, d, neg)| BigRational::new((if neg { -n } else { n }).into(), d.into()))
}

fn scaled(c: &BigRational, t: &Term) -> Term {
    Term::binary(OpId::Mul, Term::Num(c.clone()), t.clone())
}

fn rs() -> RuleSet {
    RuleSet::new("props")
}

proptest! {
    #[test]
    fn normalize_is_idempotent(t in equation()) {
        let nf = normalize(&rs(), &t).unwrap();
        let text = render(&nf.to_term());
        let reparsed = parse_term(&text, &TypeContext::default()).unwrap();
        prop_assert_eq!(normalize(&rs(), &reparsed).unwrap(), nf);
    }

    #[test]
    fn expressions_are_idempotent(t in arith_term()) {
        let nf = normalize(&rs(), &t).unwrap();
        let reparsed = parse_term(&render(&nf.to_term()), &TypeContext::default()).unwrap();
        prop_assert_eq!(normalize(&rs(), &reparsed).unwrap(), nf);
    }

    #[test]
    fn equivalence_is_reflexive_and_symmetric(a in equation(), b in equation()) {
        prop_assert!(equivalent(&rs(), &a, &a).unwrap());
        prop_assert_eq!(equivalent(&rs(), &a, &b).unwrap(), equivalent(&rs(), &b, &a).unwrap());
    }

    #[test]
    fn equivalence_is_transitive(
        t in equation(),
        c1 in nonzero_rational(),
        c2 in nonzero_rational(),
        other in equation(),
    ) {
        let (l, r) = t.as_equation().unwrap();
        let a = t.clone();
        let b = Term::eq(scaled(&c1, r), scaled(&c1, l));
        let c = Term::eq(Term::binary(OpId::Sub, scaled(&c2, l), scaled(&c2, r)), Term::num(0));
        let ab = equivalent(&rs(), &a, &b).unwrap();
        let bc = equivalent(&rs(), &b, &c).unwrap();
        prop_assert!(ab && bc);
        prop_assert!(equivalent(&rs(), &a, &c).unwrap());
        // and against an arbitrary third equation
        let ao = equivalent(&rs(), &a, &other).unwrap();
        let bo = equivalent(&rs(), &b, &other).unwrap();
        prop_assert_eq!(ao, bo);
    }

    #[test]
    fn scale_invariance(t in equation(), c in nonzero_rational()) {
        let (l, r) = t.as_equation().unwrap();
        let s = Term::eq(scaled(&c, l), scaled(&c, r));
        prop_assert!(equivalent(&rs(), &t, &s).unwrap());
    }

    #[test]
    fn eval_pred_is_unknown_on_open_terms(a in arith_term(), b in arith_term(), op in 0u8..3) {
        let op = [OpId::Eq, OpId::Lt, OpId::Le][op as usize].clone();
        let p = Term::binary(op, a, b);
        let v = eval_pred(&rs(), &p);
        if !p.is_ground() {
            prop_assert_eq!(v, Truth::Unknown);
        } else {
            prop_assert_ne!(v, Truth::Unknown);
        }
    }
}
