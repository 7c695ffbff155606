//! The specify phase: tactics over a session, next-step proposals,
//! auto-completion, view toggling and the hand-off to solving.

mod cas;
mod propose;
mod render;
mod script;
mod session;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use cas::cas_command;
pub use propose::{missing_count, propose_next};
pub use render::{RefLine, RenderedItem, SessionView};
pub use script::{parse_script, Script, ScriptError, ScriptStep};
pub use session::{apply_tactic, replay, start_example, start_formalisation};

use crate::imodel::{IModel, OModel};
use crate::knowledge::{AuthoringError, Formalisation, IdPath, LookupError, MField};
use crate::refine::RefineResult;
use crate::terms::{Env, SrcPos};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum View {
    Problem,
    Method,
}

impl View {
    pub fn other(self) -> View {
        match self {
            View::Problem => View::Method,
            View::Method => View::Problem,
        }
    }
}

/// How much a next-step proposal gives away for list items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reveal {
    #[default]
    Full,
    /// One list element at a time.
    Partial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Settings {
    #[serde(default)]
    pub skip_specify: bool,
    #[serde(default)]
    pub next_step_reveals: Reveal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tactic", rename_all = "snake_case")]
pub enum TacticInput {
    /// Starts the phase; engine only.
    ModelProblem,
    AddGiven {
        text: String,
        pos: SrcPos,
    },
    AddFind {
        text: String,
        pos: SrcPos,
    },
    AddRelation {
        text: String,
        pos: SrcPos,
    },
    /// Removes the entered item with this text from the current view.
    DeleteItem {
        field: MField,
        text: String,
    },
    SpecifyTheory {
        id: String,
    },
    SpecifyProblem {
        id: String,
    },
    SpecifyMethod {
        id: String,
    },
    RefineProblem {
        id: String,
    },
    /// Refinement on the engine's own account; engine only.
    RefineTacitly {
        id: String,
    },
    ToggleView,
    CompleteSpec,
    FinishSpecify,
}

impl TacticInput {
    pub fn add(field: MField, text: impl Into<String>, pos: SrcPos) -> TacticInput {
        let text = text.into();
        match field {
            MField::Given => TacticInput::AddGiven { text, pos },
            MField::Find => TacticInput::AddFind { text, pos },
            MField::Relate => TacticInput::AddRelation { text, pos },
        }
    }

    pub fn is_internal(&self) -> bool {
        matches!(self, TacticInput::ModelProblem | TacticInput::RefineTacitly { .. })
    }

    /// Field and text of an Add tactic.
    pub fn as_add(&self) -> Option<(MField, &str, SrcPos)> {
        match self {
            TacticInput::AddGiven { text, pos } => Some((MField::Given, text, *pos)),
            TacticInput::AddFind { text, pos } => Some((MField::Find, text, *pos)),
            TacticInput::AddRelation { text, pos } => Some((MField::Relate, text, *pos)),
            _ => None,
        }
    }
}

impl fmt::Display for TacticInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TacticInput::ModelProblem => f.write_str("Model_Problem"),
            TacticInput::AddGiven { text, .. } => write!(f, "Add_Given \"{text}\""),
            TacticInput::AddFind { text, .. } => write!(f, "Add_Find \"{text}\""),
            TacticInput::AddRelation { text, .. } => write!(f, "Add_Relation \"{text}\""),
            TacticInput::DeleteItem { field, text } => write!(f, "Delete_Item {field} \"{text}\""),
            TacticInput::SpecifyTheory { id } => write!(f, "Specify_Theory \"{id}\""),
            TacticInput::SpecifyProblem { id } => write!(f, "Specify_Problem \"{id}\""),
            TacticInput::SpecifyMethod { id } => write!(f, "Specify_Method \"{id}\""),
            TacticInput::RefineProblem { id } => write!(f, "Refine_Problem \"{id}\""),
            TacticInput::RefineTacitly { id } => write!(f, "Refine_Tacitly \"{id}\""),
            TacticInput::ToggleView => f.write_str("Toggle_View"),
            TacticInput::CompleteSpec => f.write_str("Complete_Spec"),
            TacticInput::FinishSpecify => f.write_str("Finish_Specify"),
        }
    }
}

/// What applying a tactic produced, recorded next to the tactic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Outcome {
    Started { problem: IdPath, method: IdPath },
    Item { feedback: String, message: String },
    Deleted,
    Reference { id: String },
    Refined { result: RefineResult },
    Toggled { view: View },
    Completed { added: usize },
    Finished { handoff: SolveHandoff },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TacticApplied {
    pub tactic: TacticInput,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefState {
    pub id: String,
    pub pos: SrcPos,
    pub entered: bool,
}

impl RefState {
    fn default_for(id: String) -> RefState {
        RefState { id, pos: SrcPos::START, entered: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Refs {
    pub theory: RefState,
    pub problem: RefState,
    pub method: RefState,
}

impl Refs {
    pub fn all_entered(&self) -> bool {
        self.theory.entered && self.problem.entered && self.method.entered
    }
}

/// One student input, kept so the models can be rebuilt from scratch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub seq: u64,
    pub view: View,
    pub field: MField,
    pub text: String,
    pub pos: SrcPos,
}

/// Where a session came from, enough to start it again.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Origin {
    pub example_id: String,
    pub formalisation: Formalisation,
    pub settings: Settings,
}

/// Data for the solve phase: the method and its actual arguments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveHandoff {
    pub method: IdPath,
    pub actual_args: Env,
    /// The method guard with its placeholders instantiated.
    pub guard: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecSession {
    pub origin: Origin,
    pub o_model_problem: OModel,
    pub o_model_method: OModel,
    pub i_model_problem: IModel,
    pub i_model_method: IModel,
    pub entries: Vec<Entry>,
    pub refs: Refs,
    pub view: View,
    pub settings: Settings,
    pub history: Vec<TacticApplied>,
    pub next_seq: u64,
    pub last_refine: Option<RefineResult>,
    pub handoff: Option<SolveHandoff>,
}

impl SpecSession {
    pub fn example_id(&self) -> &str {
        &self.origin.example_id
    }

    pub fn is_finished(&self) -> bool {
        self.handoff.is_some()
    }

    pub fn i_model(&self, view: View) -> &IModel {
        match view {
            View::Problem => &self.i_model_problem,
            View::Method => &self.i_model_method,
        }
    }

    pub fn o_model(&self, view: View) -> &OModel {
        match view {
            View::Problem => &self.o_model_problem,
            View::Method => &self.o_model_method,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecifyError {
    #[error(transparent)]
    NotFound(#[from] LookupError),
    #[error("invalid tactic: {0}")]
    InvalidTactic(String),
    #[error("nothing left to specify")]
    Finished,
    #[error("no problem matches the command: {0}")]
    NoCasMatch(String),
    #[error(transparent)]
    Authoring(#[from] AuthoringError),
}
