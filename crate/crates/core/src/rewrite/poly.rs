//! Multivariate polynomials and rational functions over opaque atoms with
//! exact rational coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::terms::{render, OpId, Term, Typ};

/// A variable, or a non-polynomial subterm (`sin a`, `b ^ 0.5`) treated as
/// an indivisible symbol. Atoms compare by their canonical rendering.
#[derive(Debug, Clone)]
pub struct Atom {
    key: String,
    term: Term,
    is_var: bool,
}

impl Atom {
    pub fn var(name: &str) -> Atom {
        Atom { key: name.to_string(), term: Term::typed_var(name, Typ::Real), is_var: true }
    }

    /// An opaque atom from a term already in canonical form.
    pub fn opaque(term: Term) -> Atom {
        Atom { key: render(&term), term, is_var: false }
    }

    pub fn term(&self) -> &Term {
        &self.term
    }

    pub fn is_var(&self, name: &str) -> bool {
        self.is_var && self.key == name
    }

    pub fn mentions(&self, name: &str) -> bool {
        self.term.contains_var(name)
    }

    /// `b ^ e` with a non-integer exponent.
    pub fn is_root(&self) -> bool {
        matches!(&self.term, Term::App(OpId::Pow, args)
            if matches!(&args[1], Term::Num(e) if !e.is_integer()))
    }
}

impl PartialEq for Atom {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl Eq for Atom {}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Atom {
    fn cmp(&self, other: &Self) -> Ordering {
        // variables before opaque atoms, then by key
        other.is_var.cmp(&self.is_var).then_with(|| self.key.cmp(&other.key))
    }
}

/// A power product, sorted by atom with positive exponents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial(Vec<(Atom, u32)>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(Vec::new())
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Atom, u32)] {
        &self.0
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut merged: BTreeMap<Atom, u32> = BTreeMap::new();
        for (a, e) in self.0.iter().chain(other.0.iter()) {
            *merged.entry(a.clone()).or_default() += e;
        }
        Monomial(merged.into_iter().collect())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    /// Graded order: total degree first, then the factor lists.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn constant(c: BigRational) -> Poly {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub fn one() -> Poly {
        Poly::constant(BigRational::one())
    }

    pub fn atom(a: Atom) -> Poly {
        let mut p = Poly::zero();
        p.terms.insert(Monomial(vec![(a, 1)]), BigRational::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn leading(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.terms.keys().flat_map(|m| m.0.iter().map(|(a, _)| a))
    }

    /// Highest exponent of variable `name` over all monomials.
    pub fn degree_in(&self, name: &str) -> u32 {
        self.terms.keys().flat_map(|m| m.0.iter()).filter(|(a, _)| a.is_var(name)).map(|(_, e)| *e).max().unwrap_or(0)
    }

    fn insert(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m.clone()).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &BigRational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect() }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.insert(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Integer coefficients with gcd 1, denominators cleared.
    fn integer_content_scale(&self) -> BigRational {
        let lcm = self.terms.values().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let gcd = self
            .terms
            .values()
            .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
            .fold(BigInt::zero(), |acc, n| acc.gcd(&n));
        if gcd.is_zero() {
            BigRational::one()
        } else {
            BigRational::new(lcm, gcd)
        }
    }

    /// Scales by a positive factor so the coefficients are coprime integers.
    pub fn content_normalized(&self) -> Poly {
        self.scale(&self.integer_content_scale())
    }

    /// Coprime integer coefficients with a positive leading coefficient.
    pub fn primitive(&self) -> Poly {
        let p = self.content_normalized();
        match p.leading() {
            Some((_, c)) if c.is_negative() => p.neg(),
            _ => p,
        }
    }

    pub fn to_term(&self) -> Term {
        let mut acc: Option<Term> = None;
        for (m, c) in self.terms.iter().rev() {
            let magnitude = monomial_term(m, &c.abs());
            acc = Some(match acc {
                None if c.is_negative() => Term::app(OpId::Neg, vec![magnitude]),
                None => magnitude,
                Some(prev) if c.is_negative() => Term::binary(OpId::Sub, prev, magnitude),
                Some(prev) => Term::binary(OpId::Add, prev, magnitude),
            });
        }
        acc.unwrap_or_else(|| Term::num(0))
    }
}

fn coefficient_term(c: &BigRational) -> Term {
    if c.is_integer() || render(&Term::Num(c.clone())).contains('.') {
        Term::Num(c.clone())
    } else {
        Term::binary(
            OpId::Div,
            Term::Num(BigRational::from_integer(c.numer().clone())),
            Term::Num(BigRational::from_integer(c.denom().clone())),
        )
    }
}

fn monomial_term(m: &Monomial, c: &BigRational) -> Term {
    let factors = m.0.iter().map(|(a, e)| {
        if *e == 1 {
            a.term.clone()
        } else {
            Term::binary(OpId::Pow, a.term.clone(), Term::num(i64::from(*e)))
        }
    });
    let product = factors.reduce(|l, r| Term::binary(OpId::Mul, l, r));
    match product {
        None => coefficient_term(c),
        Some(p) if c.is_one() => p,
        Some(p) if c.is_integer() => Term::binary(OpId::Mul, Term::Num(c.clone()), p),
        Some(p) => match coefficient_term(c) {
            num @ Term::Num(_) => Term::binary(OpId::Mul, num, p),
            _ => Term::binary(
                OpId::Div,
                Term::binary(OpId::Mul, Term::Num(BigRational::from_integer(c.numer().clone())), p),
                Term::Num(BigRational::from_integer(c.denom().clone())),
            ),
        },
    }
}

/// `num / den` without cancellation of common factors; a constant
/// denominator is always folded into the numerator.
#[derive(Debug, Clone)]
pub struct RatFn {
    pub num: Poly,
    pub den: Poly,
}

impl RatFn {
    pub fn poly(p: Poly) -> RatFn {
        RatFn { num: p, den: Poly::one() }
    }

    pub fn constant(c: BigRational) -> RatFn {
        RatFn::poly(Poly::constant(c))
    }

    fn fold(num: Poly, den: Poly) -> RatFn {
        if num.is_zero() {
            return RatFn::poly(Poly::zero());
        }
        match den.as_constant() {
            Some(c) => RatFn::poly(num.scale(&c.recip())),
            None => RatFn { num, den },
        }
    }

    pub fn has_denominator(&self) -> bool {
        self.den.as_constant().is_none()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        if self.has_denominator() {
            None
        } else {
            self.num.as_constant()
        }
    }

    pub fn add(&self, other: &RatFn) -> RatFn {
        if self.den == other.den {
            return RatFn::fold(self.num.add(&other.num), self.den.clone());
        }
        RatFn::fold(self.num.mul(&other.den).add(&other.num.mul(&self.den)), self.den.mul(&other.den))
    }

    pub fn neg(&self) -> RatFn {
        RatFn { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, other: &RatFn) -> RatFn {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RatFn) -> RatFn {
        RatFn::fold(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    /// `None` on division by zero.
    pub fn div(&self, other: &RatFn) -> Option<RatFn> {
        if other.num.is_zero() {
            return None;
        }
        Some(RatFn::fold(self.num.mul(&other.den), self.den.mul(&other.num)))
    }

    pub fn powi(&self, n: i64) -> Option<RatFn> {
        let k = n.unsigned_abs() as u32;
        let p = RatFn::fold(self.num.pow(k), self.den.pow(k));
        if n >= 0 {
            Some(p)
        } else {
            RatFn::poly(Poly::one()).div(&p)
        }
    }

    /// Cross-multiplied equality; sound because polynomials form an
    /// integral domain.
    pub fn same_value(&self, other: &RatFn) -> bool {
        self.num.mul(&other.den) == other.num.mul(&self.den)
    }

    pub fn to_term(&self) -> Term {
        if self.has_denominator() {
            Term::binary(OpId::Div, self.num.to_term(), self.den.to_term())
        } else {
            self.num.to_term()
        }
    }
}
