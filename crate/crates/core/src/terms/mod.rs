//! The inner term language: typed mathematical expressions, their parser,
//! printer, substitution and type adaptation.

mod lexer;
mod parser;
mod render;
mod typing;

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

pub use lexer::locate_ident;
pub use parser::{parse_call, parse_count, parse_term, SyntaxError};
pub use render::render;
pub use typing::{adapt_term_to_type, TypeContext, TypeError};

/// Types of terms. `Unknown` only exists between parsing and adaptation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Typ {
    Real,
    Bool,
    ListOf(Box<Typ>),
    SetOfReal,
    Unknown,
}

impl Typ {
    pub fn is_known(&self) -> bool {
        match self {
            Typ::Unknown => false,
            Typ::ListOf(inner) => inner.is_known(),
            _ => true,
        }
    }
}

impl fmt::Display for Typ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Typ::Real => f.write_str("real"),
            Typ::Bool => f.write_str("bool"),
            Typ::ListOf(inner) => write!(f, "{inner} list"),
            Typ::SetOfReal => f.write_str("real set"),
            Typ::Unknown => f.write_str("?"),
        }
    }
}

/// Position in a source text. Lines and columns are 1-based and count chars.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SrcPos {
    pub line: usize,
    pub col: usize,
    pub len: usize,
}

impl SrcPos {
    pub const START: SrcPos = SrcPos { line: 1, col: 1, len: 0 };

    pub fn new(line: usize, col: usize, len: usize) -> Self {
        SrcPos { line, col, len }
    }

    /// Translates a position relative to a snippet into the coordinates of
    /// the text the snippet was taken from, `self` being where it starts.
    pub fn offset(self, inner: SrcPos) -> SrcPos {
        if inner.line <= 1 {
            SrcPos::new(self.line, self.col + inner.col - 1, inner.len)
        } else {
            SrcPos::new(self.line + inner.line - 1, inner.col, inner.len)
        }
    }
}

impl fmt::Display for SrcPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Trigonometric functions known to the term language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Func {
    Sin,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            _ => None,
        }
    }

    pub const ALL: [Func; 2] = [Func::Sin, Func::Cos];
}

/// Structural predicates with native evaluators (see `refine`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pred {
    HasEquality,
    IsLinearIn,
    IsRootFormIn,
    IsPolynomialIn,
    IsRationalIn,
}

impl Pred {
    pub const ALL: [Pred; 5] =
        [Pred::HasEquality, Pred::IsLinearIn, Pred::IsRootFormIn, Pred::IsPolynomialIn, Pred::IsRationalIn];

    pub fn name(self) -> &'static str {
        match self {
            Pred::HasEquality => "has_equality",
            Pred::IsLinearIn => "is_linear_in",
            Pred::IsRootFormIn => "is_root_form_in",
            Pred::IsPolynomialIn => "is_polynomial_in",
            Pred::IsRationalIn => "is_rational_in",
        }
    }

    pub fn from_name(name: &str) -> Option<Pred> {
        Pred::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            Pred::HasEquality => 1,
            _ => 2,
        }
    }
}

/// Operators. The arithmetic and comparison set is closed; descriptor
/// application (`Constants [r = 7]`) is how model items are written.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OpId {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Neg,
    Eq,
    Lt,
    Le,
    Fn(Func),
    Pred(Pred),
    Descriptor(String),
}

impl OpId {
    pub fn arity(&self) -> usize {
        match self {
            OpId::Neg | OpId::Fn(_) | OpId::Descriptor(_) => 1,
            OpId::Pred(p) => p.arity(),
            _ => 2,
        }
    }

    pub fn symbol(&self) -> &str {
        match self {
            OpId::Add => "+",
            OpId::Sub => "-",
            OpId::Mul => "*",
            OpId::Div => "/",
            OpId::Pow => "^",
            OpId::Neg => "-",
            OpId::Eq => "=",
            OpId::Lt => "<",
            OpId::Le => "<=",
            OpId::Fn(f) => f.name(),
            OpId::Pred(p) => p.name(),
            OpId::Descriptor(d) => d,
        }
    }

    pub fn is_comparison(&self) -> bool {
        matches!(self, OpId::Eq | OpId::Lt | OpId::Le)
    }

    pub fn is_arithmetic(&self) -> bool {
        matches!(self, OpId::Add | OpId::Sub | OpId::Mul | OpId::Div | OpId::Pow | OpId::Neg | OpId::Fn(_))
    }
}

/// A typed mathematical expression.
///
/// Terms are immutable values; equality is structural and includes the
/// types recorded on variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Num(BigRational),
    Var { name: String, typ: Typ },
    App(OpId, Vec<Term>),
    List(Vec<Term>),
    Interval(Box<Term>, Box<Term>),
}

impl Term {
    pub fn num(n: i64) -> Term {
        Term::Num(BigRational::from_integer(n.into()))
    }

    pub fn ratio(n: i64, d: i64) -> Term {
        Term::Num(BigRational::new(n.into(), d.into()))
    }

    pub fn var(name: impl Into<String>) -> Term {
        Term::Var { name: name.into(), typ: Typ::Unknown }
    }

    pub fn typed_var(name: impl Into<String>, typ: Typ) -> Term {
        Term::Var { name: name.into(), typ }
    }

    pub fn app(op: OpId, args: Vec<Term>) -> Term {
        debug_assert_eq!(op.arity(), args.len(), "arity mismatch for {op:?}");
        Term::App(op, args)
    }

    pub fn binary(op: OpId, lhs: Term, rhs: Term) -> Term {
        Term::app(op, vec![lhs, rhs])
    }

    pub fn eq(lhs: Term, rhs: Term) -> Term {
        Term::binary(OpId::Eq, lhs, rhs)
    }

    pub fn descriptor(name: impl Into<String>, arg: Term) -> Term {
        Term::app(OpId::Descriptor(name.into()), vec![arg])
    }

    pub fn interval(lo: Term, hi: Term) -> Term {
        Term::Interval(Box::new(lo), Box::new(hi))
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var { name, .. } => Some(name),
            _ => None,
        }
    }

    pub fn is_equation(&self) -> bool {
        matches!(self, Term::App(OpId::Eq, _))
    }

    /// Splits `lhs = rhs`.
    pub fn as_equation(&self) -> Option<(&Term, &Term)> {
        match self {
            Term::App(OpId::Eq, args) => Some((&args[0], &args[1])),
            _ => None,
        }
    }

    /// Splits a descriptor application into the descriptor name and argument.
    pub fn as_descriptor_app(&self) -> Option<(&str, &Term)> {
        match self {
            Term::App(OpId::Descriptor(d), args) => Some((d, &args[0])),
            _ => None,
        }
    }

    /// Visits every subterm in pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        match self {
            Term::Num(_) | Term::Var { .. } => {}
            Term::App(_, args) | Term::List(args) => args.iter().for_each(|a| a.walk(f)),
            Term::Interval(lo, hi) => {
                lo.walk(f);
                hi.walk(f);
            }
        }
    }

    /// Names of all variables, in order of first occurrence.
    pub fn vars(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        self.walk(&mut |t| {
            if let Term::Var { name, .. } = t {
                if !out.contains(&name.as_str()) {
                    out.push(name);
                }
            }
        });
        out
    }

    pub fn contains_var(&self, name: &str) -> bool {
        let mut found = false;
        self.walk(&mut |t| {
            if let Term::Var { name: n, .. } = t {
                found |= n == name;
            }
        });
        found
    }

    pub fn is_ground(&self) -> bool {
        let mut ground = true;
        self.walk(&mut |t| ground &= !matches!(t, Term::Var { .. }));
        ground
    }

    /// Rebuilds the term bottom-up, applying `f` to every rebuilt node.
    pub fn map_bottom_up(&self, f: &mut impl FnMut(Term) -> Term) -> Term {
        let rebuilt = match self {
            Term::Num(_) | Term::Var { .. } => self.clone(),
            Term::App(op, args) => Term::App(op.clone(), args.iter().map(|a| a.map_bottom_up(f)).collect()),
            Term::List(elems) => Term::List(elems.iter().map(|a| a.map_bottom_up(f)).collect()),
            Term::Interval(lo, hi) => Term::interval(lo.map_bottom_up(f), hi.map_bottom_up(f)),
        };
        f(rebuilt)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

/// A substitution from placeholder names to terms. Order is kept for display.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Env(Vec<(String, Term)>);

impl Env {
    pub fn new() -> Self {
        Env(Vec::new())
    }

    /// Adds a binding; an existing binding for the name is replaced in place.
    pub fn bind(&mut self, name: impl Into<String>, value: Term) {
        let name = name.into();
        match self.0.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = value,
            None => self.0.push((name, value)),
        }
    }

    pub fn get(&self, name: &str) -> Option<&Term> {
        self.0.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.0.iter().map(|(n, t)| (n.as_str(), t))
    }

    /// Keeps only the bindings whose name satisfies `keep`.
    pub fn restrict(&self, mut keep: impl FnMut(&str) -> bool) -> Env {
        Env(self.0.iter().filter(|(n, _)| keep(n)).cloned().collect())
    }
}

impl FromIterator<(String, Term)> for Env {
    fn from_iter<I: IntoIterator<Item = (String, Term)>>(iter: I) -> Self {
        let mut env = Env::new();
        for (n, t) in iter {
            env.bind(n, t);
        }
        env
    }
}

/// Replaces every variable bound in `env`. The language has no binders, so
/// there is nothing to capture.
pub fn substitute(env: &Env, t: &Term) -> Term {
    if env.is_empty() {
        return t.clone();
    }
    match t {
        Term::Var { name, .. } => env.get(name).cloned().unwrap_or_else(|| t.clone()),
        Term::Num(_) => t.clone(),
        Term::App(op, args) => Term::App(op.clone(), args.iter().map(|a| substitute(env, a)).collect()),
        Term::List(elems) => Term::List(elems.iter().map(|a| substitute(env, a)).collect()),
        Term::Interval(lo, hi) => Term::interval(substitute(env, lo), substitute(env, hi)),
    }
}

/// Greek letters accepted under their ASCII names; the renderer emits the
/// Unicode letter.
pub(crate) const GREEK: &[(&str, char)] = &[
    ("alpha", 'α'),
    ("beta", 'β'),
    ("gamma", 'γ'),
    ("delta", 'δ'),
    ("epsilon", 'ε'),
    ("zeta", 'ζ'),
    ("eta", 'η'),
    ("theta", 'θ'),
    ("iota", 'ι'),
    ("kappa", 'κ'),
    ("lambda", 'λ'),
    ("mu", 'μ'),
    ("nu", 'ν'),
    ("xi", 'ξ'),
    ("pi", 'π'),
    ("rho", 'ρ'),
    ("sigma", 'σ'),
    ("tau", 'τ'),
    ("phi", 'φ'),
    ("chi", 'χ'),
    ("psi", 'ψ'),
    ("omega", 'ω'),
];

pub(crate) fn greek_from_ascii(name: &str) -> Option<char> {
    GREEK.iter().find(|(n, _)| *n == name).map(|(_, c)| *c)
}

/// Bindings of variable names to types, shared by the parser and `adapt`.
pub type Bindings = BTreeMap<String, Typ>;
