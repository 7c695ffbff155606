use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Bindings, Func, OpId, SrcPos, Term, Typ};

/// Variable types known in a theory, plus the functions the theory provides.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeContext {
    pub theory: String,
    pub bindings: Bindings,
    pub functions: BTreeSet<Func>,
}

impl Default for TypeContext {
    /// A permissive context: no bindings, every function available.
    fn default() -> Self {
        TypeContext { theory: "Base".into(), bindings: Bindings::new(), functions: Func::ALL.into_iter().collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("cannot determine the type of '{name}'")]
pub struct TypeError {
    pub name: String,
    pub pos: Option<SrcPos>,
}

impl TypeContext {
    pub fn new(theory: impl Into<String>) -> Self {
        TypeContext { theory: theory.into(), bindings: Bindings::new(), functions: BTreeSet::new() }
    }

    pub fn with_binding(mut self, name: impl Into<String>, typ: Typ) -> Self {
        self.bindings.insert(name.into(), typ);
        self
    }

    pub fn lookup(&self, name: &str) -> Option<&Typ> {
        self.bindings.get(name)
    }

    /// Records types for the unbound variables of `t`.
    ///
    /// Annotated variables contribute their annotation. Bare variables get
    /// `expected` when they sit where a value of that type is required, and
    /// `Real` when used arithmetically. Existing bindings win.
    pub fn learn(&mut self, t: &Term, expected: Option<&Typ>) {
        match t {
            Term::Num(_) => {}
            Term::Var { name, typ } => {
                if self.bindings.contains_key(name) {
                    return;
                }
                let typ = if typ.is_known() { Some(typ.clone()) } else { expected.cloned() };
                if let Some(typ) = typ.filter(Typ::is_known) {
                    self.bindings.insert(name.clone(), typ);
                }
            }
            Term::List(elems) => {
                let elem_typ = match expected {
                    Some(Typ::ListOf(inner)) => Some(inner.as_ref().clone()),
                    _ => None,
                };
                for e in elems {
                    self.learn(e, elem_typ.as_ref());
                }
            }
            Term::Interval(lo, hi) => {
                self.learn(lo, Some(&Typ::Real));
                self.learn(hi, Some(&Typ::Real));
            }
            Term::App(op, args) => {
                let arg_typ = match op {
                    OpId::Descriptor(_) | OpId::Pred(_) => None,
                    _ => Some(&Typ::Real),
                };
                for a in args {
                    self.learn(a, arg_typ);
                }
            }
        }
    }
}

/// Resolves the types of all variables from `ctx`.
///
/// A variable keeps an explicit annotation; otherwise its binding in `ctx`
/// is used. A variable with neither is an error. Numeric literals are exact
/// rationals and need no coercion. Idempotent.
pub fn adapt_term_to_type(ctx: &TypeContext, t: &Term) -> Result<Term, TypeError> {
    match t {
        Term::Num(_) => Ok(t.clone()),
        Term::Var { name, typ } => {
            if typ.is_known() {
                return Ok(t.clone());
            }
            match ctx.lookup(name) {
                Some(bound) => Ok(Term::Var { name: name.clone(), typ: bound.clone() }),
                None => Err(TypeError { name: name.clone(), pos: None }),
            }
        }
        Term::App(op, args) => {
            Ok(Term::App(op.clone(), args.iter().map(|a| adapt_term_to_type(ctx, a)).collect::<Result<_, _>>()?))
        }
        Term::List(elems) => {
            Ok(Term::List(elems.iter().map(|a| adapt_term_to_type(ctx, a)).collect::<Result<_, _>>()?))
        }
        Term::Interval(lo, hi) => Ok(Term::interval(adapt_term_to_type(ctx, lo)?, adapt_term_to_type(ctx, hi)?)),
    }
}
