use serde::{Deserialize, Serialize};

use crate::knowledge::{ModelPattern, Precond};
use crate::rewrite::{eval_pred, rational_value, RuleSet, Truth};
use crate::terms::{substitute, Env, OpId, SrcPos, Term, Typ};

use super::{IModel, Variants};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("missing items: {}", .0.join(", "))]
pub struct MissingItems(pub Vec<String>);

/// Placeholder values and ground variable values, possibly partial.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Environments {
    pub subst: Env,
    pub eval: Env,
    /// Descriptors of pattern items without a placed input.
    pub missing: Vec<String>,
}

/// Builds what the environments can be built from the placed items, and
/// lists the descriptors that are still missing.
pub fn environments(mp: &ModelPattern, im: &IModel) -> Environments {
    let mut envs = Environments::default();
    let rules = RuleSet::default();
    for slot in &mp.items {
        let Some(item) = im.placed(slot.field, &slot.descriptor) else {
            envs.missing.push(slot.descriptor.clone());
            continue;
        };
        let values = item.feedback.values();
        let list_typed = matches!(slot.placeholder, Term::Var { typ: Typ::ListOf(_), .. });
        let value = if list_typed || values.len() != 1 { Term::List(values.to_vec()) } else { values[0].clone() };
        envs.subst.bind(slot.placeholder_name(), value);
        if matches!(&slot.placeholder, Term::Var { typ: Typ::ListOf(inner), .. } if **inner == Typ::Bool) {
            // equalities `x = q` with rational q, in the order entered
            for v in values {
                let Some((lhs, rhs)) = v.as_equation() else { continue };
                let (Some(x), Some(q)) = (lhs.as_var(), rational_value(&rules, rhs)) else { continue };
                envs.eval.bind(x, Term::Num(q));
            }
        }
    }
    envs
}

/// `(env_subst, env_eval)`, or the descriptors still missing.
pub fn make_environments(mp: &ModelPattern, im: &IModel) -> Result<(Env, Env), MissingItems> {
    let envs = environments(mp, im);
    if envs.missing.is_empty() {
        Ok((envs.subst, envs.eval))
    } else {
        Err(MissingItems(envs.missing))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreCondItem {
    pub holds: bool,
    pub pred: Term,
    pub pos: SrcPos,
    pub source: String,
    /// Why a precondition does not hold when it is not simply false.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreCondsChecked {
    pub all_true: bool,
    pub items: Vec<PreCondItem>,
}

/// Instances of a precondition. A placeholder bound to a list in an
/// arithmetic position yields one instance per element, an equality
/// element contributing its left side: `0 < fixes` with `fixes = [r = 7]`
/// becomes `0 < r`.
fn instances(t: &Term, subst: &Env) -> Vec<Term> {
    if matches!(t, Term::App(OpId::Pred(_), _)) {
        return vec![substitute(subst, t)];
    }
    let mut out = vec![t.clone()];
    for name in t.vars() {
        let Some(Term::List(elems)) = subst.get(name) else { continue };
        out = out
            .iter()
            .flat_map(|inst| {
                elems.iter().map(move |e| {
                    let scalar = e.as_equation().map_or(e, |(lhs, _)| lhs).clone();
                    substitute(&Env::from_iter([(name.to_string(), scalar)]), inst)
                })
            })
            .collect();
    }
    out.iter().map(|inst| substitute(subst, inst)).collect()
}

pub fn check_preconds(rs: &RuleSet, where_: &[Precond], mp: &ModelPattern, im: &IModel) -> PreCondsChecked {
    let envs = environments(mp, im);
    let mut items = Vec::new();
    for pre in where_ {
        let insts = instances(&pre.term, &envs.subst);
        if insts.is_empty() {
            items.push(PreCondItem {
                holds: false,
                pred: pre.term.clone(),
                pos: pre.pos,
                source: pre.source.clone(),
                note: Some("no values".into()),
            });
        }
        for inst in insts {
            let pred = substitute(&envs.eval, &inst);
            let (holds, note) = match eval_pred(rs, &pred) {
                Truth::True => (true, None),
                Truth::False => (false, None),
                Truth::Unknown => (false, Some("not ground".to_string())),
            };
            items.push(PreCondItem { holds, pred, pos: pre.pos, source: pre.source.clone(), note });
        }
    }
    PreCondsChecked { all_true: items.iter().all(|i| i.holds), items }
}

/// Every pattern item has a correct input for one common variant, and the
/// preconditions hold.
pub fn is_complete(mp: &ModelPattern, im: &IModel, checked: &PreCondsChecked) -> bool {
    if !checked.all_true {
        return false;
    }
    let candidates: Variants = im.items.iter().flat_map(|i| i.variants.iter().copied()).collect();
    if mp.items.is_empty() {
        return true;
    }
    candidates.iter().any(|v| {
        mp.items.iter().all(|slot| {
            im.items.iter().any(|i| {
                i.field == slot.field
                    && i.feedback.is_cor()
                    && i.feedback.descriptor() == Some(slot.descriptor.as_str())
                    && i.variants.contains(v)
            })
        })
    })
}
