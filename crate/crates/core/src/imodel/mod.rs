//! O-model (prepared items) and I-model (student input with feedback).

mod check;
mod env;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use check::{check_input, classify, live_variants, Checker};
pub use env::{
    check_preconds, environments, is_complete, make_environments, Environments, MissingItems, PreCondItem,
    PreCondsChecked,
};

use crate::knowledge::{AuthoringError, DescriptorRegistry, Formalisation, MField, ModelPattern};
use crate::terms::{adapt_term_to_type, render, SrcPos, Term, TypeContext};

/// Indices of the formalisation variants an item is consistent with.
pub type Variants = BTreeSet<u32>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OModelItem {
    pub variants: Variants,
    pub field: MField,
    pub descriptor: String,
    pub values: Vec<Term>,
    /// Whether the values were written as a list.
    pub is_list: bool,
}

impl OModelItem {
    /// The item in input syntax, e.g. `Constants [r = 7]`.
    pub fn render(&self) -> String {
        render_item(&self.descriptor, &self.values, self.is_list)
    }
}

/// An item in input syntax from its parts.
pub fn render_item(descriptor: &str, values: &[Term], is_list: bool) -> String {
    let arg = if is_list { Term::List(values.to_vec()) } else { values[0].clone() };
    render(&Term::descriptor(descriptor, arg))
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OModel {
    pub items: Vec<OModelItem>,
    pub all_variants: Variants,
}

impl OModel {
    pub fn with_descriptor<'a>(&'a self, descriptor: &'a str) -> impl Iterator<Item = &'a OModelItem> + 'a {
        self.items.iter().filter(move |i| i.descriptor == descriptor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Feedback {
    Cor { descriptor: String, values: Vec<Term> },
    Inc { descriptor: String, values: Vec<Term> },
    Sup { descriptor: String, values: Vec<Term> },
    Syn { raw: String },
}

impl Feedback {
    pub fn descriptor(&self) -> Option<&str> {
        match self {
            Feedback::Cor { descriptor, .. } | Feedback::Inc { descriptor, .. } | Feedback::Sup { descriptor, .. } => {
                Some(descriptor)
            }
            Feedback::Syn { .. } => None,
        }
    }

    pub fn values(&self) -> &[Term] {
        match self {
            Feedback::Cor { values, .. } | Feedback::Inc { values, .. } | Feedback::Sup { values, .. } => values,
            Feedback::Syn { .. } => &[],
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Feedback::Cor { .. } => "correct",
            Feedback::Inc { .. } => "incomplete",
            Feedback::Sup { .. } => "superfluous",
            Feedback::Syn { .. } => "syntax",
        }
    }

    pub fn is_cor(&self) -> bool {
        matches!(self, Feedback::Cor { .. })
    }

    /// Cor or Inc: the item occupies a slot of the model.
    pub fn is_placed(&self) -> bool {
        matches!(self, Feedback::Cor { .. } | Feedback::Inc { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IModelItem {
    /// Order of entry; items keep it when replaced in place.
    pub seq: u64,
    pub variants: Variants,
    pub field: MField,
    pub feedback: Feedback,
    /// Where the input sits in the student's text.
    pub pos: SrcPos,
    pub source: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IModel {
    pub items: Vec<IModelItem>,
}

impl IModel {
    /// The placed (Cor or Inc) item for a pattern slot.
    pub fn placed(&self, field: MField, descriptor: &str) -> Option<&IModelItem> {
        self.items
            .iter()
            .find(|i| i.field == field && i.feedback.is_placed() && i.feedback.descriptor() == Some(descriptor))
    }
}

/// Splits an item term into descriptor, values and whether it was a list.
pub(crate) fn split_item(t: &Term) -> Option<(&str, Vec<Term>, bool)> {
    let (d, arg) = t.as_descriptor_app()?;
    Some(match arg {
        Term::List(elems) => (d, elems.clone(), true),
        other => (d, vec![other.clone()], false),
    })
}

/// Variant indices of every formalisation item, in item order.
///
/// Annotated items keep their annotation. A descriptor appearing once
/// without annotation belongs to every variant; repeated unannotated
/// descriptors are numbered 1..n in order of appearance.
pub fn formalisation_variants(f: &Formalisation) -> Vec<Variants> {
    let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
    for item in f.items.iter().filter(|i| i.variants.is_none()) {
        if let Some((d, _)) = item.term.as_descriptor_app() {
            *counts.entry(d).or_default() += 1;
        }
    }
    let explicit_max = f.items.iter().filter_map(|i| i.variants.as_ref()?.iter().max().copied()).max();
    let n = counts.values().copied().chain(explicit_max).max().unwrap_or(1).max(1);
    let mut seen: BTreeMap<&str, u32> = BTreeMap::new();
    f.items
        .iter()
        .map(|item| {
            if let Some(vs) = &item.variants {
                return vs.clone();
            }
            let d = item.term.as_descriptor_app().map_or("", |(d, _)| d);
            if counts.get(d).copied().unwrap_or(1) == 1 {
                (1..=n).collect()
            } else {
                let k = seen.entry(d).or_default();
                *k += 1;
                BTreeSet::from([*k])
            }
        })
        .collect()
}

/// Typing context for the items of a formalisation: the theory context
/// plus the types its items imply for their variables.
pub fn formalisation_context(
    f: &Formalisation,
    theory_ctx: &TypeContext,
    descriptors: &DescriptorRegistry,
) -> TypeContext {
    let mut ctx = theory_ctx.clone();
    for item in &f.items {
        let expected = item.term.as_descriptor_app().and_then(|(d, _)| descriptors.get(d)).map(|d| d.typ.clone());
        if let Some((_, arg)) = item.term.as_descriptor_app() {
            ctx.learn(arg, expected.as_ref());
        }
    }
    ctx
}

/// Builds the O-model for one pattern: the formalisation items whose
/// descriptor the pattern has, placed in the pattern's field.
pub fn init_o_model(
    f: &Formalisation,
    mp: &ModelPattern,
    ctx: &TypeContext,
    descriptors: &DescriptorRegistry,
) -> Result<OModel, AuthoringError> {
    let variants = formalisation_variants(f);
    let ctx = formalisation_context(f, ctx, descriptors);
    let mut om = OModel { items: Vec::new(), all_variants: variants.iter().flatten().copied().collect() };
    let authoring = |msg: String| AuthoringError { file: f.id.clone(), pos: SrcPos::START, msg };
    for (item, vs) in f.items.iter().zip(variants) {
        let term = adapt_term_to_type(&ctx, &item.term).map_err(|e| authoring(e.to_string()))?;
        let Some((d, values, written_as_list)) = split_item(&term) else {
            return Err(authoring(format!("item '{}' has no descriptor", item.text)));
        };
        let Some(slot) = mp.find(d) else { continue };
        om.items.push(OModelItem {
            variants: vs,
            field: slot.field,
            descriptor: d.to_string(),
            values,
            is_list: written_as_list,
        });
    }
    Ok(om)
}

/// O-models for the problem and the method view. Every item must belong
/// to at least one of them.
pub fn init_o_models(
    f: &Formalisation,
    problem: &ModelPattern,
    method: &ModelPattern,
    ctx: &TypeContext,
    descriptors: &DescriptorRegistry,
) -> Result<(OModel, OModel), AuthoringError> {
    for item in &f.items {
        let d = item.term.as_descriptor_app().map_or("", |(d, _)| d);
        if problem.find(d).is_none() && method.find(d).is_none() {
            return Err(AuthoringError {
                file: f.id.clone(),
                pos: SrcPos::START,
                msg: format!("descriptor '{d}' occurs in neither the problem nor the method"),
            });
        }
    }
    Ok((init_o_model(f, problem, ctx, descriptors)?, init_o_model(f, method, ctx, descriptors)?))
}
