use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::Arc;
use std::thread;

use serde_json::{json, Value};
use specify_core::knowledge::Store;
use specify_core::specify::{replay, Settings};
use specify_service::repl::run_repl;
use specify_service::{serve_on, Request, Response, Service, Status};

const DEMO: &str = "Diff_App/coil-kernel";

fn service() -> Service {
    Service::new(Store::shipped(), Settings::default())
}

fn call(svc: &Service, sid: Option<&str>, command: &str, payload: Value) -> Response {
    svc.handle(&Request::new(sid, command, payload))
}

fn start(svc: &Service) -> String {
    let r = call(svc, None, "start", json!({ "example_id": DEMO }));
    assert!(r.is_ok(), "{:?}", r.message);
    r.session_id.unwrap()
}

#[test]
fn start_shows_templates() {
    let svc = service();
    let r = call(&svc, None, "start", json!({ "example_id": DEMO }));
    assert!(r.model_render.iter().all(|i| i.feedback_kind == "missing"));
    let constants = &r.model_render[0];
    assert_eq!(constants.descriptor, "Constants");
    assert_eq!(constants.template, "[__=__, __=__]");
    assert_eq!(constants.text, "Constants [__=__, __=__]");
    assert!(r.refs_render.iter().all(|l| !l.entered));
    assert!(!r.complete);
}

#[test]
fn input_marks_item_correct() {
    let svc = service();
    let sid = start(&svc);
    let pos = json!({ "line": 3, "col": 12, "len": 17 });
    let r = call(&svc, Some(&sid), "input", json!({ "field": "Given", "text": "Constants [r = 7]", "pos": pos }));
    assert_eq!(r.status, Status::Ok);
    assert_eq!(r.model_render[0].feedback_kind, "correct");
    assert_eq!((r.model_render[0].pos.line, r.model_render[0].pos.col), (3, 12));
    let r = call(&svc, Some(&sid), "input", json!({ "field": "Given", "text": "Maximum (", "pos": pos }));
    let syn = r.model_render.iter().find(|i| i.feedback_kind == "syntax").unwrap();
    assert_eq!(syn.pos.line, 3);
    assert!(syn.pos.col > 12);
}

#[test]
fn errors_keep_the_session() {
    let svc = service();
    let r = call(&svc, Some("nope"), "status", Value::Null);
    assert_eq!(r.status, Status::Error);
    assert_eq!(r.message.as_deref(), Some("no such session"));
    let sid = start(&svc);
    for (command, payload) in [
        ("input", json!({ "field": "Where", "text": "x" })),
        ("input", json!({ "text": "x" })),
        ("finish", Value::Null),
        ("specify", json!({ "kind": "problem", "id": "no/such" })),
        ("fly", Value::Null),
    ] {
        let r = call(&svc, Some(&sid), command, payload);
        assert_eq!(r.status, Status::Error, "{command}");
        assert!(!r.model_render.is_empty(), "{command}: state is still rendered");
    }
    assert!(call(&svc, Some(&sid), "status", Value::Null).is_ok());
    let line = svc.handle_line("{not json");
    assert!(line.contains("\"status\":\"error\""));
    assert_eq!(call(&svc, None, "start", json!({ "example_id": "none" })).status, Status::Error);
}

#[test]
fn listings() {
    let svc = service();
    let ex = call(&svc, None, "list_examples", Value::Null).data.unwrap();
    assert_eq!(ex[0]["id"], DEMO);
    let pbl = call(&svc, None, "list_problems", Value::Null).data.unwrap();
    let ids: Vec<&str> = pbl.as_array().unwrap().iter().map(|p| p["id"].as_str().unwrap()).collect();
    assert!(ids.contains(&"univariate/equation/linear"));
}

#[test]
fn next_step_complete_and_finish() {
    let svc = service();
    let sid = start(&svc);
    let r = call(&svc, Some(&sid), "next_step", Value::Null);
    let p = &r.proposals.unwrap()[0];
    assert_eq!(p.text, "Add_Given \"Constants [r = 7]\"");
    assert_eq!(r.model_render[0].feedback_kind, "missing");
    let r = call(&svc, Some(&sid), "next_step", json!({ "apply": true }));
    assert_eq!(r.model_render[0].feedback_kind, "correct");
    assert!(call(&svc, Some(&sid), "complete", Value::Null).complete);
    let r = call(&svc, Some(&sid), "finish", Value::Null);
    assert!(r.finished);
    assert_eq!(r.data.unwrap()["guard"][0], "Constants [r = 7]");
}

#[test]
fn refine_and_cas() {
    let svc = service();
    let r = call(&svc, None, "cas", json!({ "command": "solve (12 - 6 * x = 0, x)" }));
    assert!(r.finished);
    let trail = r.trail.unwrap();
    assert_eq!(trail.last().unwrap().problem, "univariate/equation/linear");
    let sid = r.session_id.unwrap();
    assert!(call(&svc, Some(&sid), "status", Value::Null).finished);
    let r = call(&svc, None, "cas", json!({ "command": "solve (x, x)" }));
    assert_eq!(r.status, Status::Error);

    let sid = start(&svc);
    let r = call(&svc, Some(&sid), "refine", Value::Null);
    assert!(r.is_ok());
    assert_eq!(r.trail.unwrap().len(), 1);
}

#[test]
fn status_matches_replayed_history() {
    let svc = service();
    let sid = start(&svc);
    for (command, payload) in [
        ("input", json!({ "field": "Given", "text": "Constants [r = 7]" })),
        ("input", json!({ "field": "Relate", "text": "SideConditions [v = sin α]" })),
        ("toggle", Value::Null),
        ("input", json!({ "field": "Given", "text": "FunctionVariable α" })),
        ("next_step", json!({ "apply": true })),
        ("specify", json!({ "kind": "theory", "id": "Diff_App" })),
        ("delete", json!({ "field": "Given", "text": "FunctionVariable α" })),
        ("toggle", Value::Null),
    ] {
        let live = call(&svc, Some(&sid), command, payload);
        let s = svc.snapshot(&sid).unwrap();
        let again = replay(svc.store(), &s.origin, &s.history).unwrap();
        assert_eq!(again, s);
        let status = call(&svc, Some(&sid), "status", Value::Null);
        let rebuilt = Response::ok(Some(sid.clone())).with_state(svc.store(), &again);
        assert_eq!(status, rebuilt);
        assert_eq!(live.model_render, status.model_render);
    }
}

#[test]
fn sessions_run_concurrently() {
    let svc = Arc::new(service());
    let shared = start(&svc);
    let items = ["Constants [r = 7]", "Maximum A", "Constants [r = 8]", "AdditionalValues [u, v]"];
    let handles: Vec<_> = (0..8)
        .map(|k| {
            let svc = Arc::clone(&svc);
            let shared = shared.clone();
            thread::spawn(move || {
                let own = start(&svc);
                for i in 0..4 {
                    let text = items[(k + i) % items.len()];
                    let field = if text.starts_with("Constants") { "Given" } else { "Find" };
                    assert!(call(&svc, Some(&own), "input", json!({ "field": field, "text": text })).is_ok());
                    assert!(call(&svc, Some(&shared), "input", json!({ "field": field, "text": text })).is_ok());
                }
                own
            })
        })
        .collect();
    for h in handles {
        let own = h.join().unwrap();
        assert_eq!(svc.snapshot(&own).unwrap().history.len(), 5);
    }
    let s = svc.snapshot(&shared).unwrap();
    assert_eq!(s.history.len(), 1 + 8 * 4);
    assert_eq!(replay(svc.store(), &s.origin, &s.history).unwrap(), s);
}

#[test]
fn tcp_round_trip() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let svc = Arc::new(service());
    thread::spawn(move || serve_on(listener, svc));
    let stream = TcpStream::connect(addr).unwrap();
    let mut writer = stream.try_clone().unwrap();
    let mut lines = BufReader::new(stream).lines();
    let mut send = |v: Value| -> Value {
        writeln!(writer, "{v}").unwrap();
        serde_json::from_str(&lines.next().unwrap().unwrap()).unwrap()
    };
    let r = send(json!({ "command": "start", "payload": { "example_id": DEMO } }));
    let sid = r["session_id"].as_str().unwrap().to_string();
    let r = send(json!({ "session_id": sid, "command": "input", "payload": { "field": "Find", "text": "Maximum A" } }));
    assert_eq!(r["status"], "ok");
    let max = r["model_render"].as_array().unwrap().iter().find(|i| i["descriptor"] == "Maximum").unwrap();
    assert_eq!(max["feedback_kind"], "correct");
    let r = send(json!({ "session_id": "x", "command": "status" }));
    assert_eq!(r["message"], "no such session");
}

#[test]
fn repl_transcript() {
    let svc = service();
    let input = "start Diff_App/coil-kernel\ngiven Constants [r = 7]\nfind Maximum (\nbogus\nquit\nstatus\n";
    let mut out = Vec::new();
    run_repl(&svc, input.as_bytes(), &mut out, false).unwrap();
    let out = String::from_utf8(out).unwrap();
    assert!(out.contains("[correct] Constants [r = 7]"));
    assert!(out.contains("[syntax] Maximum ("));
    assert!(out.contains("commands:"));
    let mut out = Vec::new();
    run_repl(&svc, "examples\n".as_bytes(), &mut out, true).unwrap();
    let v: Value = serde_json::from_slice(&out).unwrap();
    assert_eq!(v["status"], "ok");
}
