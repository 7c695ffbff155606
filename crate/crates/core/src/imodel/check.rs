use crate::knowledge::{DescriptorRegistry, MField, ModelPattern};
use crate::rewrite::{nf_equivalent, normalize, NormalForm, RuleSet};
use crate::terms::{adapt_term_to_type, locate_ident, parse_term, SrcPos, Term, TypeContext};

use super::{split_item, Feedback, IModel, IModelItem, OModel, OModelItem, Variants};

/// What classification needs besides the models.
#[derive(Clone, Copy)]
pub struct Checker<'a> {
    pub ctx: &'a TypeContext,
    pub descriptors: &'a DescriptorRegistry,
    pub rules: &'a RuleSet,
}

/// Variants still open given the placed items of all models: the
/// intersection of their variant sets, starting from `all`.
pub fn live_variants(all: &Variants, models: &[&IModel]) -> Variants {
    let mut live = all.clone();
    for im in models {
        for item in im.items.iter().filter(|i| i.feedback.is_placed()) {
            live = live.intersection(&item.variants).copied().collect();
        }
    }
    live
}

enum Match {
    Complete,
    Partial,
    None,
}

/// Multiset comparison of entered values against prepared ones.
fn compare(entered: &[NormalForm], prepared: &[NormalForm]) -> Match {
    let mut used = vec![false; prepared.len()];
    for e in entered {
        match (0..prepared.len()).find(|&j| !used[j] && nf_equivalent(e, &prepared[j])) {
            Some(j) => used[j] = true,
            None => return Match::None,
        }
    }
    if entered.len() == prepared.len() {
        Match::Complete
    } else {
        Match::Partial
    }
}

fn normal_forms(rules: &RuleSet, values: &[Term]) -> Option<Vec<NormalForm>> {
    values.iter().map(|v| normalize(rules, v).ok()).collect()
}

fn item(field: MField, pos: SrcPos, raw: &str, feedback: Feedback, variants: Variants, message: String) -> IModelItem {
    IModelItem { seq: 0, variants, field, feedback, pos, source: raw.to_string(), message }
}

/// Classifies one input against the O-model of the current view.
///
/// `live` is the set of variants consistent with everything placed so
/// far; only prepared items in one of those variants are candidates.
pub fn classify(
    raw: &str,
    pos: SrcPos,
    field: MField,
    om: &OModel,
    mp: &ModelPattern,
    live: &Variants,
    checker: &Checker,
) -> IModelItem {
    let syn =
        |at: SrcPos, msg: String| item(field, at, raw, Feedback::Syn { raw: raw.to_string() }, Variants::new(), msg);
    let parsed = match parse_term(raw, checker.ctx) {
        Ok(t) => t,
        Err(e) => return syn(pos.offset(e.pos), e.msg),
    };
    let Some((d, _)) = parsed.as_descriptor_app() else {
        return item(
            field,
            pos,
            raw,
            Feedback::Sup { descriptor: String::new(), values: vec![parsed.clone()] },
            Variants::new(),
            "an item starts with a descriptor, e.g. Constants".into(),
        );
    };
    let Some(desc) = checker.descriptors.get(d) else {
        let (_, values, _) = split_item(&parsed).expect("descriptor application");
        return item(
            field,
            pos,
            raw,
            Feedback::Sup { descriptor: d.to_string(), values },
            Variants::new(),
            format!("unknown descriptor '{d}'"),
        );
    };
    let mut ctx = checker.ctx.clone();
    let (_, arg) = parsed.as_descriptor_app().expect("descriptor application");
    ctx.learn(arg, Some(&desc.typ));
    let typed = match adapt_term_to_type(&ctx, &parsed) {
        Ok(t) => t,
        Err(e) => {
            let at = locate_ident(raw, &e.name).map_or(pos, |p| pos.offset(p));
            return syn(at, e.to_string());
        }
    };
    let (d, values, _) = split_item(&typed).expect("descriptor application");
    let descriptor = d.to_string();
    let sup = |message: String| {
        item(
            field,
            pos,
            raw,
            Feedback::Sup { descriptor: descriptor.clone(), values: values.clone() },
            Variants::new(),
            message,
        )
    };

    let in_field: Vec<&OModelItem> = om.with_descriptor(d).filter(|o| o.field == field).collect();
    if in_field.is_empty() {
        return match mp.find(d) {
            Some(slot) if slot.field != field => sup(format!("{d} belongs to {}", slot.field)),
            _ => sup(format!("{d} is not part of this model")),
        };
    }
    let candidates: Vec<&&OModelItem> = in_field.iter().filter(|o| !o.variants.is_disjoint(live)).collect();
    if candidates.is_empty() {
        return sup(format!("{d} does not fit the items entered so far"));
    }
    let Some(entered) = normal_forms(checker.rules, &values) else {
        return sup(format!("{d}: the value cannot be compared"));
    };
    let mut complete = Variants::new();
    let mut partial = Variants::new();
    let mut expected_len = 0;
    for cand in candidates {
        let Some(prepared) = normal_forms(checker.rules, &cand.values) else { continue };
        let shared: Variants = cand.variants.intersection(live).copied().collect();
        match compare(&entered, &prepared) {
            Match::Complete => complete.extend(shared),
            Match::Partial => {
                partial.extend(shared);
                expected_len = expected_len.max(prepared.len());
            }
            Match::None => {}
        }
    }
    if !complete.is_empty() {
        item(field, pos, raw, Feedback::Cor { descriptor, values }, complete, "correct".into())
    } else if !partial.is_empty() {
        let msg = format!("incomplete: {} of {} elements", values.len(), expected_len);
        item(field, pos, raw, Feedback::Inc { descriptor, values }, partial, msg)
    } else {
        sup(format!("{d}: does not match the problem"))
    }
}

/// First word of an input, used to pair a correction with an earlier
/// syntax error.
fn leading_word(s: &str) -> &str {
    s.trim_start().split(|c: char| !c.is_alphanumeric() && c != '_').next().unwrap_or("")
}

/// Classifies `raw` and merges it into `im`.
///
/// Resubmitting the same text in the same field replaces the old entry in
/// place. A placed item replaces placed items of the same slot whose
/// variants overlap, and any item replaces syntax errors that start with
/// the same word.
#[allow(clippy::too_many_arguments)]
pub fn check_input(
    raw: &str,
    pos: SrcPos,
    field: MField,
    seq: u64,
    om: &OModel,
    mp: &ModelPattern,
    im: &IModel,
    live: &Variants,
    checker: &Checker,
) -> IModel {
    let mut new = classify(raw, pos, field, om, mp, live, checker);
    new.seq = seq;
    let mut items = im.items.clone();
    if let Some(i) = items.iter().position(|x| x.field == field && x.source == raw) {
        new.seq = items[i].seq;
        items[i] = new;
        return IModel { items };
    }
    let lead = leading_word(raw);
    items.retain(|x| {
        !(matches!(x.feedback, Feedback::Syn { .. }) && x.field == field && leading_word(&x.source) == lead)
    });
    if new.feedback.is_placed() {
        items.retain(|x| {
            !(x.feedback.is_placed()
                && x.field == field
                && x.feedback.descriptor() == new.feedback.descriptor()
                && !x.variants.is_disjoint(&new.variants))
        });
    }
    items.push(new);
    IModel { items }
}
