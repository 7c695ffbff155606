//! Line commands for the interactive loop, mapped onto protocol requests.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use serde_json::{json, Value};
use specify_core::knowledge::MField;

use crate::protocol::{Request, Response, Status};
use crate::server::Service;

pub const HELP: &str = "\
commands:
  examples | problems               list the store
  start <example id>                start a session
  cas <command>                     specify from a command, e.g. cas solve (x + 1 = 2, x)
  given|find|relate <item>          enter an item
  delete <field> <item>             remove an entered item
  theory|problem|method <id>        set a reference
  refine [problem id]               refine the problem
  next [apply]                      propose (and apply) a next step
  toggle | complete | finish | status
  quit";

fn unquote(s: &str) -> String {
    let s = s.trim();
    s.strip_prefix('"').and_then(|r| r.strip_suffix('"')).unwrap_or(s).to_string()
}

/// The request for one command line, or a message for the user.
pub fn parse_command(line: &str, session: Option<&str>) -> Result<Request, String> {
    let line = line.trim();
    let (word, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
    let rest = rest.trim();
    let on = |command: &str, payload: Value| Ok(Request::new(session, command, payload));
    match word.to_ascii_lowercase().as_str() {
        "examples" => on("list_examples", Value::Null),
        "problems" => on("list_problems", Value::Null),
        "start" if !rest.is_empty() => on("start", json!({ "example_id": unquote(rest) })),
        "cas" if !rest.is_empty() => on("cas", json!({ "command": rest })),
        f @ ("given" | "find" | "relate") if !rest.is_empty() => {
            on("input", json!({ "field": MField::from_name(f).expect("field name").name(), "text": unquote(rest) }))
        }
        "delete" => {
            let (f, item) = rest.split_once(char::is_whitespace).ok_or("usage: delete <field> <item>")?;
            on("delete", json!({ "field": f, "text": unquote(item) }))
        }
        k @ ("theory" | "problem" | "method") if !rest.is_empty() => {
            on("specify", json!({ "kind": k, "id": unquote(rest) }))
        }
        "refine" if rest.is_empty() => on("refine", Value::Null),
        "refine" => on("refine", json!({ "problem_id": unquote(rest) })),
        "next" => on("next_step", json!({ "apply": rest == "apply" })),
        c @ ("toggle" | "complete" | "finish" | "status") => on(c, Value::Null),
        _ => Err(HELP.to_string()),
    }
}

/// A response for people: the model by field, references, preconditions.
pub fn render_response(r: &Response) -> String {
    let mut out = String::new();
    if let Some(m) = &r.message {
        let _ = writeln!(out, "{}: {m}", if r.status == Status::Error { "error" } else { "note" });
    }
    if let Some(data) = &r.data {
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(data).unwrap_or_default());
    }
    if let Some(view) = r.view {
        let _ = writeln!(
            out,
            "[{} view]",
            serde_json::to_value(view).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
        );
        let mut last = None;
        for item in &r.model_render {
            if last != Some(item.m_field) {
                let _ = writeln!(out, "{}:", item.m_field);
                last = Some(item.m_field);
            }
            let _ = write!(out, "  [{}] {}", item.feedback_kind, item.text);
            if !item.message.is_empty() && item.feedback_kind != "correct" {
                let _ = write!(out, "  -- {}", item.message);
            }
            out.push('\n');
        }
        for p in &r.preconds_render {
            let _ = writeln!(out, "Where: {} {}", p.text, if p.holds { "holds" } else { "fails" });
        }
        out.push_str("References:\n");
        for line in &r.refs_render {
            let _ = writeln!(out, "  {} \"{}\"{}", line.kind, line.id, if line.entered { "" } else { " (open)" });
        }
        let state = if r.finished {
            "finished"
        } else if r.complete {
            "complete"
        } else {
            "incomplete"
        };
        let _ = writeln!(out, "model {state}");
    }
    for p in r.proposals.iter().flatten() {
        let _ = writeln!(out, "next: {}", p.text);
    }
    for t in r.trail.iter().flatten() {
        let _ = writeln!(out, "  {} {}", if t.holds { "+" } else { "-" }, t.problem);
    }
    out
}

/// Reads commands until end of input or `quit`.
pub fn run_repl(service: &Service, input: impl BufRead, mut output: impl Write, json_out: bool) -> io::Result<()> {
    let mut session: Option<String> = None;
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if matches!(line.trim(), "quit" | "exit") {
            break;
        }
        let resp = match parse_command(&line, session.as_deref()) {
            Ok(req) => service.handle(&req),
            Err(help) => {
                writeln!(output, "{help}")?;
                continue;
            }
        };
        if resp.is_ok() && resp.session_id.is_some() {
            session = resp.session_id.clone();
        }
        if json_out {
            writeln!(output, "{}", serde_json::to_string(&resp).expect("responses serialize"))?;
        } else {
            write!(output, "{}", render_response(&resp))?;
        }
    }
    Ok(())
}
