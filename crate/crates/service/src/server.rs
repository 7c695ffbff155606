use std::collections::HashMap;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::thread;

use parking_lot::{FairMutex, RwLock};
use serde::Deserialize;
use serde_json::{json, Value};
use specify_core::knowledge::{join_id, MField, Store};
use specify_core::specify::{
    apply_tactic, cas_command, propose_next, start_example, Outcome, Reveal, Settings, SpecSession, TacticInput,
};
use specify_core::terms::SrcPos;

use crate::protocol::{trail_lines, Proposal, Request, Response, Status};

/// Settings sent with `start`; absent keys fall back to the defaults.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettingsPatch {
    pub skip_specify: Option<bool>,
    pub next_step_reveals: Option<Reveal>,
}

impl SettingsPatch {
    pub fn over(self, base: Settings) -> Settings {
        Settings {
            skip_specify: self.skip_specify.unwrap_or(base.skip_specify),
            next_step_reveals: self.next_step_reveals.unwrap_or(base.next_step_reveals),
        }
    }
}

type Slot = Arc<FairMutex<SpecSession>>;

/// Sessions over a shared store. Each session has its own fair lock, so
/// commands to one session run one at a time in arrival order while other
/// sessions proceed.
pub struct Service {
    store: Store,
    defaults: Settings,
    sessions: RwLock<HashMap<String, Slot>>,
    counter: AtomicU64,
}

#[derive(Deserialize)]
struct StartPayload {
    example_id: String,
    #[serde(default)]
    settings: SettingsPatch,
}

#[derive(Deserialize)]
struct InputPayload {
    field: String,
    text: String,
    #[serde(default)]
    pos: Option<SrcPos>,
}

#[derive(Deserialize)]
struct DeletePayload {
    field: String,
    text: String,
}

#[derive(Deserialize)]
struct SpecifyPayload {
    kind: String,
    id: String,
}

#[derive(Deserialize, Default)]
struct RefinePayload {
    #[serde(default)]
    problem_id: Option<String>,
}

#[derive(Deserialize, Default)]
struct NextPayload {
    #[serde(default)]
    apply: bool,
}

#[derive(Deserialize)]
struct CasPayload {
    command: String,
}

fn payload<T: for<'de> Deserialize<'de>>(v: &Value) -> Result<T, String> {
    let v = if v.is_null() { json!({}) } else { v.clone() };
    serde_json::from_value(v).map_err(|e| format!("bad payload: {e}"))
}

fn field(name: &str) -> Result<MField, String> {
    MField::from_name(name).ok_or_else(|| format!("unknown field '{name}'"))
}

impl Service {
    pub fn new(store: Store, defaults: Settings) -> Service {
        Service { store, defaults, sessions: RwLock::new(HashMap::new()), counter: AtomicU64::new(0) }
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    /// A copy of a session's current state.
    pub fn snapshot(&self, id: &str) -> Option<SpecSession> {
        let slot = self.sessions.read().get(id).cloned()?;
        let s = slot.lock().clone();
        Some(s)
    }

    fn register(&self, s: SpecSession) -> String {
        let id = format!("s{}", self.counter.fetch_add(1, Ordering::Relaxed) + 1);
        self.sessions.write().insert(id.clone(), Arc::new(FairMutex::new(s)));
        id
    }

    /// Parses a request line and answers it; malformed JSON is answered
    /// with an error rather than dropped.
    pub fn handle_line(&self, line: &str) -> String {
        let resp = match serde_json::from_str::<Request>(line) {
            Ok(req) => self.handle(&req),
            Err(e) => Response::error(None, format!("malformed request: {e}")),
        };
        serde_json::to_string(&resp).expect("responses serialize")
    }

    pub fn handle(&self, req: &Request) -> Response {
        match req.command.as_str() {
            "start" => self.start(req),
            "cas" => self.cas(req),
            "list_examples" => {
                let data: Vec<Value> =
                    self.store.examples.values().map(|f| json!({ "id": f.id, "text": f.text })).collect();
                Response { data: Some(Value::Array(data)), ..Response::ok(req.session_id.clone()) }
            }
            "list_problems" => {
                let data: Vec<Value> = self
                    .store
                    .problems
                    .iter()
                    .into_iter()
                    .map(|(id, p)| json!({ "id": join_id(&id), "guh": p.guh, "theory": p.theory }))
                    .collect();
                Response { data: Some(Value::Array(data)), ..Response::ok(req.session_id.clone()) }
            }
            _ => self.on_session(req),
        }
    }

    fn start(&self, req: &Request) -> Response {
        let p: StartPayload = match payload(&req.payload) {
            Ok(p) => p,
            Err(e) => return Response::error(None, e),
        };
        match start_example(&self.store, &p.example_id, p.settings.over(self.defaults)) {
            Ok(s) => {
                let resp = Response::ok(None).with_state(&self.store, &s);
                let id = self.register(s);
                Response { session_id: Some(id), ..resp }
            }
            Err(e) => Response::error(None, e.to_string()),
        }
    }

    fn cas(&self, req: &Request) -> Response {
        let p: CasPayload = match payload(&req.payload) {
            Ok(p) => p,
            Err(e) => return Response::error(None, e),
        };
        match cas_command(&self.store, &p.command) {
            Ok(s) => {
                let mut resp = Response::ok(None).with_state(&self.store, &s);
                resp.trail = s.last_refine.as_ref().map(trail_lines);
                resp.data = s.handoff.as_ref().map(|h| serde_json::to_value(h).expect("hand-off serializes"));
                let id = self.register(s);
                Response { session_id: Some(id), ..resp }
            }
            Err(e) => Response::error(None, e.to_string()),
        }
    }

    fn on_session(&self, req: &Request) -> Response {
        let sid = req.session_id.clone();
        let Some(slot) = sid.as_deref().and_then(|id| self.sessions.read().get(id).cloned()) else {
            return Response::error(sid, "no such session");
        };
        let mut s = slot.lock();
        match self.command(req, &mut s) {
            Ok(resp) => Response { session_id: sid, ..resp }.with_state(&self.store, &s),
            Err(msg) => {
                let mut resp = Response::ok(sid).with_state(&self.store, &s);
                resp.status = Status::Error;
                resp.message = Some(msg);
                resp
            }
        }
    }

    /// Runs a session command; on error the session is left as it was.
    fn command(&self, req: &Request, s: &mut SpecSession) -> Result<Response, String> {
        let apply = |s: &mut SpecSession, t: TacticInput| -> Result<(), String> {
            *s = apply_tactic(&self.store, s, t).map_err(|e| e.to_string())?;
            Ok(())
        };
        let ok = Response::ok(None);
        Ok(match req.command.as_str() {
            "status" => ok,
            "input" => {
                let p: InputPayload = payload(&req.payload)?;
                apply(s, TacticInput::add(field(&p.field)?, p.text, p.pos.unwrap_or(SrcPos::START)))?;
                ok
            }
            "delete" => {
                let p: DeletePayload = payload(&req.payload)?;
                apply(s, TacticInput::DeleteItem { field: field(&p.field)?, text: p.text })?;
                ok
            }
            "specify" => {
                let p: SpecifyPayload = payload(&req.payload)?;
                let t = match p.kind.as_str() {
                    "theory" => TacticInput::SpecifyTheory { id: p.id },
                    "problem" => TacticInput::SpecifyProblem { id: p.id },
                    "method" => TacticInput::SpecifyMethod { id: p.id },
                    k => return Err(format!("unknown reference kind '{k}'")),
                };
                apply(s, t)?;
                ok
            }
            "toggle" => {
                apply(s, TacticInput::ToggleView)?;
                ok
            }
            "complete" => {
                apply(s, TacticInput::CompleteSpec)?;
                ok
            }
            "finish" => {
                apply(s, TacticInput::FinishSpecify)?;
                let handoff = s.handoff.as_ref().map(|h| serde_json::to_value(h).expect("hand-off serializes"));
                Response { data: handoff, ..ok }
            }
            "refine" => {
                let p: RefinePayload = payload(&req.payload)?;
                let id = p.problem_id.unwrap_or_else(|| s.refs.problem.id.clone());
                apply(s, TacticInput::RefineProblem { id })?;
                let trail = match s.history.last().map(|h| &h.outcome) {
                    Some(Outcome::Refined { result }) => Some(trail_lines(result)),
                    _ => None,
                };
                Response { trail, ..ok }
            }
            "next_step" => {
                let p: NextPayload = payload(&req.payload)?;
                let t = propose_next(&self.store, s).map_err(|e| e.to_string())?;
                if p.apply {
                    apply(s, t.clone())?;
                }
                Response { proposals: Some(vec![Proposal { text: t.to_string(), tactic: t }]), ..ok }
            }
            c => return Err(format!("unknown command '{c}'")),
        })
    }
}

fn serve_connection(service: &Service, stream: TcpStream) -> io::Result<()> {
    let mut out = stream.try_clone()?;
    for line in BufReader::new(stream).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut resp = service.handle_line(&line);
        resp.push('\n');
        out.write_all(resp.as_bytes())?;
        out.flush()?;
    }
    Ok(())
}

/// Accepts connections on `addr`, one thread per connection, JSON lines
/// in both directions. Returns only if binding fails.
pub fn serve(addr: impl ToSocketAddrs, service: Arc<Service>) -> io::Result<()> {
    let listener = TcpListener::bind(addr)?;
    serve_on(listener, service)
}

pub fn serve_on(listener: TcpListener, service: Arc<Service>) -> io::Result<()> {
    for stream in listener.incoming() {
        let stream = match stream {
            Ok(s) => s,
            Err(_) => continue,
        };
        let service = Arc::clone(&service);
        thread::spawn(move || {
            let _ = serve_connection(&service, stream);
        });
    }
    Ok(())
}
