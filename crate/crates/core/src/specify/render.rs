use serde::{Deserialize, Serialize};

use crate::imodel::{PreCondsChecked, Variants};
use crate::knowledge::{MField, Store, PATH_REF_TEMPLATE, THEORY_REF_TEMPLATE};
use crate::terms::SrcPos;

use super::{SpecSession, SpecifyError, View};

/// One line of the model as shown to the student.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedItem {
    pub m_field: MField,
    pub descriptor: String,
    pub text: String,
    /// correct, incomplete, superfluous, syntax or missing.
    pub feedback_kind: String,
    pub pos: SrcPos,
    pub template: String,
    pub variants: Variants,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefLine {
    pub kind: String,
    pub id: String,
    pub entered: bool,
    pub template: String,
    pub pos: SrcPos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionView {
    pub view: View,
    pub model: Vec<RenderedItem>,
    pub refs: Vec<RefLine>,
    pub preconds: PreCondsChecked,
    pub complete: bool,
    pub finished: bool,
}

impl SpecSession {
    /// The current view: per field, each pattern slot with its item or a
    /// template, followed by the items that fit no slot.
    pub fn render(&self, store: &Store) -> Result<SessionView, SpecifyError> {
        let mp = self.pattern(store, self.view)?;
        let im = self.i_model(self.view);
        let template_of = |d: &str| store.descriptors.get(d).map_or("__", |d| d.template()).to_string();
        let mut model = Vec::new();
        for field in MField::ALL {
            for slot in mp.items.iter().filter(|s| s.field == field) {
                let line = match im.placed(field, &slot.descriptor) {
                    Some(item) => RenderedItem {
                        m_field: field,
                        descriptor: slot.descriptor.clone(),
                        text: if item.feedback.values().is_empty() {
                            format!("{} {}", slot.descriptor, template_of(&slot.descriptor))
                        } else {
                            item.source.clone()
                        },
                        feedback_kind: item.feedback.kind().into(),
                        pos: item.pos,
                        template: template_of(&slot.descriptor),
                        variants: item.variants.clone(),
                        message: item.message.clone(),
                    },
                    None => RenderedItem {
                        m_field: field,
                        descriptor: slot.descriptor.clone(),
                        text: format!("{} {}", slot.descriptor, template_of(&slot.descriptor)),
                        feedback_kind: "missing".into(),
                        pos: slot.pos,
                        template: template_of(&slot.descriptor),
                        variants: Variants::new(),
                        message: String::new(),
                    },
                };
                model.push(line);
            }
            for item in im.items.iter().filter(|i| i.field == field && !i.feedback.is_placed()) {
                let descriptor = item.feedback.descriptor().unwrap_or_default().to_string();
                model.push(RenderedItem {
                    m_field: field,
                    template: template_of(&descriptor),
                    descriptor,
                    text: item.source.clone(),
                    feedback_kind: item.feedback.kind().into(),
                    pos: item.pos,
                    variants: item.variants.clone(),
                    message: item.message.clone(),
                });
            }
        }
        let refs = [
            ("Theory_Ref", &self.refs.theory, THEORY_REF_TEMPLATE),
            ("Problem_Ref", &self.refs.problem, PATH_REF_TEMPLATE),
            ("Method_Ref", &self.refs.method, PATH_REF_TEMPLATE),
        ]
        .into_iter()
        .map(|(kind, r, template)| RefLine {
            kind: kind.into(),
            id: r.id.clone(),
            entered: r.entered,
            template: template.into(),
            pos: r.pos,
        })
        .collect();
        Ok(SessionView {
            view: self.view,
            model,
            refs,
            preconds: self.preconds(store, self.view)?,
            complete: self.is_complete(store)?,
            finished: self.is_finished(),
        })
    }
}
