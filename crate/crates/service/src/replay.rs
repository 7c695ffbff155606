use std::fmt::Write as _;

use serde::Serialize;
use specify_core::imodel::Feedback;
use specify_core::knowledge::Store;
use specify_core::specify::{apply_tactic, parse_script, start_example, Reveal, Settings, SpecSession, View};
use specify_core::terms::{render, SrcPos};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepReport {
    pub pos: SrcPos,
    pub tactic: String,
    /// Feedback kind for items, `ok` or `error` for references.
    pub feedback: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplayReport {
    pub exit_code: i32,
    pub steps: Vec<StepReport>,
    pub warnings: Vec<String>,
    /// Why the model is not complete.
    pub diagnostic: Option<String>,
    #[serde(skip)]
    pub session: Option<SpecSession>,
}

impl ReplayReport {
    fn failed(diagnostic: String) -> ReplayReport {
        ReplayReport {
            exit_code: 1,
            steps: Vec::new(),
            warnings: Vec::new(),
            diagnostic: Some(diagnostic),
            session: None,
        }
    }

    /// Plain-text transcript, one line per step.
    pub fn transcript(&self) -> String {
        let mut out = String::new();
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        for s in &self.steps {
            let _ = write!(out, "{}:{}: {} {}", s.pos.line, s.pos.col, s.feedback, s.tactic);
            if !s.message.is_empty() && s.feedback != "correct" {
                let _ = write!(out, " ({})", s.message);
            }
            out.push('\n');
        }
        match &self.diagnostic {
            Some(d) => {
                let _ = writeln!(out, "{d}");
            }
            None => out.push_str("model complete\n"),
        }
        out
    }
}

fn at(pos: SrcPos, msg: &str) -> String {
    format!("{}:{}: {msg}", pos.line, pos.col)
}

/// Replays a session script against the store. Exit code 0 iff the
/// resulting model is complete.
pub fn replay_script(store: &Store, src: &str, settings: Settings) -> ReplayReport {
    let script = match parse_script(src) {
        Ok(s) => s,
        Err(e) => return ReplayReport::failed(e.to_string()),
    };
    let warnings: Vec<String> = script.warnings.iter().map(|w| w.to_string()).collect();
    let Some((example, example_pos)) = &script.example else {
        return ReplayReport {
            warnings,
            ..ReplayReport::failed("model incomplete: the script names no example".into())
        };
    };
    // a script is the student's own work, so it is never completed for them
    let settings = Settings { skip_specify: false, ..settings };
    let mut s = match start_example(store, example, settings) {
        Ok(s) => s,
        Err(e) => return ReplayReport { warnings, ..ReplayReport::failed(at(*example_pos, &e.to_string())) },
    };
    let mut steps = Vec::new();
    let mut first_error = None;
    for step in &script.steps {
        match apply_tactic(store, &s, step.tactic.clone()) {
            Ok(next) => {
                s = next;
                let report = match step.tactic.as_add() {
                    Some((field, text, _)) => {
                        let item = s.i_model(s.view).items.iter().find(|i| i.field == field && i.source == text);
                        let item = item.expect("replayed item is in the model");
                        StepReport {
                            pos: item.pos,
                            tactic: step.tactic.to_string(),
                            feedback: item.feedback.kind().into(),
                            message: item.message.clone(),
                        }
                    }
                    None => StepReport {
                        pos: step.pos,
                        tactic: step.tactic.to_string(),
                        feedback: "ok".into(),
                        message: String::new(),
                    },
                };
                steps.push(report);
            }
            Err(e) => {
                let msg = e.to_string();
                first_error.get_or_insert_with(|| at(step.pos, &msg));
                steps.push(StepReport {
                    pos: step.pos,
                    tactic: step.tactic.to_string(),
                    feedback: "error".into(),
                    message: msg,
                });
            }
        }
    }
    let complete = s.is_complete(store).unwrap_or(false);
    let diagnostic = if complete { None } else { Some(first_error.unwrap_or_else(|| blocking(store, &s))) };
    ReplayReport { exit_code: i32::from(!complete), steps, warnings, diagnostic, session: Some(s) }
}

/// The first reason the problem model is not complete.
fn blocking(store: &Store, s: &SpecSession) -> String {
    let im = s.i_model(View::Problem);
    let mut items: Vec<_> = im.items.iter().filter(|i| !i.feedback.is_cor()).collect();
    items.sort_by_key(|i| (i.pos.line, i.pos.col));
    if let Some(i) = items.first() {
        let kind = match i.feedback {
            Feedback::Syn { .. } => "syntax error",
            Feedback::Sup { .. } => "superfluous",
            _ => "incomplete",
        };
        return at(i.pos, &format!("{kind}: {}", i.message));
    }
    if let Ok(mp) = s.pattern(store, View::Problem) {
        let missing: Vec<&str> = mp
            .items
            .iter()
            .filter(|slot| {
                !im.items.iter().any(|i| i.field == slot.field && i.feedback.descriptor() == Some(&slot.descriptor))
            })
            .map(|slot| slot.descriptor.as_str())
            .collect();
        if !missing.is_empty() {
            return format!("model incomplete: missing {}", missing.join(", "));
        }
    }
    if let Ok(checked) = s.preconds(store, View::Problem) {
        if let Some(p) = checked.items.iter().find(|p| !p.holds) {
            let note = p.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default();
            return format!("model incomplete: precondition {} does not hold{note}", render(&p.pred));
        }
    }
    "model incomplete: the items belong to different variants".into()
}

/// Default settings from `key = value` lines; `#` starts a comment.
pub fn parse_settings(text: &str) -> Result<Settings, String> {
    let mut settings = Settings::default();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", n + 1))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "skip_specify" => {
                settings.skip_specify =
                    value.parse().map_err(|_| format!("line {}: skip_specify is true or false", n + 1))?
            }
            "next_step_reveals" => {
                settings.next_step_reveals = match value {
                    "full" => Reveal::Full,
                    "partial" => Reveal::Partial,
                    _ => return Err(format!("line {}: next_step_reveals is full or partial", n + 1)),
                }
            }
            _ => return Err(format!("line {}: unknown setting '{key}'", n + 1)),
        }
    }
    Ok(settings)
}
