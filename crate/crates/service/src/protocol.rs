//! Wire types. One request per line, one response per request; every
//! response carries the full render of the session's current view.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use specify_core::knowledge::{join_id, Store};
use specify_core::refine::RefineResult;
use specify_core::specify::{RefLine, RenderedItem, SpecSession, TacticInput, View};
use specify_core::terms::{render, SrcPos};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    #[serde(default)]
    pub session_id: Option<String>,
    pub command: String,
    #[serde(default)]
    pub payload: Value,
}

impl Request {
    pub fn new(session_id: Option<&str>, command: &str, payload: Value) -> Request {
        Request { session_id: session_id.map(str::to_string), command: command.into(), payload }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecondLine {
    pub holds: bool,
    /// The instantiated precondition.
    pub text: String,
    pub source: String,
    pub pos: SrcPos,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proposal {
    /// The tactic as the student would write it.
    pub text: String,
    pub tactic: TacticInput,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrailLine {
    pub problem: String,
    pub holds: bool,
}

pub fn trail_lines(r: &RefineResult) -> Vec<TrailLine> {
    r.trail.iter().map(|e| TrailLine { problem: join_id(&e.problem), holds: e.checked.all_true }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub session_id: Option<String>,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub view: Option<View>,
    #[serde(default)]
    pub model_render: Vec<RenderedItem>,
    #[serde(default)]
    pub refs_render: Vec<RefLine>,
    #[serde(default)]
    pub preconds_render: Vec<PrecondLine>,
    #[serde(default)]
    pub complete: bool,
    #[serde(default)]
    pub finished: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proposals: Option<Vec<Proposal>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trail: Option<Vec<TrailLine>>,
    /// Command-specific data: listings, the solve hand-off.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<Value>,
}

impl Response {
    pub fn ok(session_id: Option<String>) -> Response {
        Response {
            session_id,
            status: Status::Ok,
            message: None,
            view: None,
            model_render: Vec::new(),
            refs_render: Vec::new(),
            preconds_render: Vec::new(),
            complete: false,
            finished: false,
            proposals: None,
            trail: None,
            data: None,
        }
    }

    pub fn error(session_id: Option<String>, message: impl Into<String>) -> Response {
        Response { status: Status::Error, message: Some(message.into()), ..Response::ok(session_id) }
    }

    /// Fills in the render of the session's current view.
    pub fn with_state(mut self, store: &Store, s: &SpecSession) -> Response {
        match s.render(store) {
            Ok(v) => {
                self.view = Some(v.view);
                self.model_render = v.model;
                self.refs_render = v.refs;
                self.preconds_render = v
                    .preconds
                    .items
                    .into_iter()
                    .map(|i| PrecondLine {
                        holds: i.holds,
                        text: render(&i.pred),
                        source: i.source,
                        pos: i.pos,
                        note: i.note,
                    })
                    .collect();
                self.complete = v.complete;
                self.finished = v.finished;
            }
            Err(e) => {
                self.status = Status::Error;
                self.message = Some(e.to_string());
            }
        }
        self
    }

    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }
}
