//! HTTP transport for debug sessions: `POST /api` with one JSON request
//! per call. Sessions are independent; only the loaded artifact is shared.

use std::collections::HashMap;
use std::io::Read;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;

use serde_json::{json, Value};
use tiny_http::{Header, Method, Response, Server};

use revgram::artifact::Artifact;
use revgram::debug::{Session, PROTOCOL_VERSION};

const WORKERS: usize = 4;
const MAX_BODY: u64 = 4 << 20;

pub struct Registry {
    artifact: Arc<Artifact>,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
    next: AtomicU64,
}

impl Registry {
    pub fn new(artifact: Artifact) -> Registry {
        Registry {
            artifact: Arc::new(artifact),
            sessions: Mutex::new(HashMap::new()),
            next: AtomicU64::new(1),
        }
    }

    pub fn handle(&self, req: &Value) -> Value {
        let id = req.get("id").cloned().unwrap_or(Value::Null);
        let err = |msg: String| json!({"v": PROTOCOL_VERSION, "id": id, "ok": false, "error": msg});
        match req.get("cmd").and_then(Value::as_str) {
            Some("open") => {
                let s = format!("s{}", self.next.fetch_add(1, Ordering::Relaxed));
                let session = Session::new(self.artifact.clone());
                self.sessions.lock().unwrap().insert(s.clone(), Arc::new(Mutex::new(session)));
                return json!({"v": PROTOCOL_VERSION, "id": id, "ok": true, "session": s,
                    "stats": self.artifact.stats()});
            }
            Some("close") => {
                let s = req.get("session").and_then(Value::as_str).unwrap_or("");
                let gone = self.sessions.lock().unwrap().remove(s).is_some();
                return if gone {
                    json!({"v": PROTOCOL_VERSION, "id": id, "ok": true})
                } else {
                    err(format!("unknown session `{s}`"))
                };
            }
            _ => {}
        }
        let Some(s) = req.get("session").and_then(Value::as_str) else {
            return err("request has no `session`".into());
        };
        let Some(session) = self.sessions.lock().unwrap().get(s).cloned() else {
            return err(format!("unknown session `{s}`"));
        };
        let mut out = session.lock().unwrap().handle(req);
        out["session"] = json!(s);
        out
    }
}

fn respond(req: tiny_http::Request, status: u16, body: String) {
    let ct = Header::from_bytes("Content-Type", "application/json").unwrap();
    let cors = Header::from_bytes("Access-Control-Allow-Origin", "*").unwrap();
    let _ = req.respond(Response::from_string(body).with_status_code(status).with_header(ct).with_header(cors));
}

pub fn serve(artifact: Artifact, host: &str, port: u16) -> Result<(), String> {
    let server = Server::http((host, port)).map_err(|e| format!("cannot bind {host}:{port}: {e}"))?;
    println!("listening on http://{}", server.server_addr());
    let server = Arc::new(server);
    let reg = Arc::new(Registry::new(artifact));
    let workers: Vec<_> = (0..WORKERS)
        .map(|_| {
            let (server, reg) = (server.clone(), reg.clone());
            thread::spawn(move || {
                for mut req in server.incoming_requests() {
                    match (req.method(), req.url()) {
                        (Method::Post, "/api") => {
                            let mut body = String::new();
                            if req.as_reader().take(MAX_BODY).read_to_string(&mut body).is_err() {
                                respond(req, 400, json!({"ok": false, "error": "unreadable body"}).to_string());
                                continue;
                            }
                            let out = match serde_json::from_str::<Value>(&body) {
                                Ok(v) => reg.handle(&v),
                                Err(e) => json!({"v": PROTOCOL_VERSION, "ok": false, "error": format!("bad JSON: {e}")}),
                            };
                            respond(req, 200, out.to_string());
                        }
                        (Method::Get, "/api") => {
                            respond(req, 200, json!({"v": PROTOCOL_VERSION, "ok": true}).to_string());
                        }
                        (Method::Options, _) => {
                            let h = Header::from_bytes("Access-Control-Allow-Headers", "Content-Type").unwrap();
                            let cors = Header::from_bytes("Access-Control-Allow-Origin", "*").unwrap();
                            let _ = req.respond(Response::empty(204).with_header(h).with_header(cors));
                        }
                        _ => respond(req, 404, json!({"ok": false, "error": "not found"}).to_string()),
                    }
                }
            })
        })
        .collect();
    for w in workers {
        let _ = w.join();
    }
    Ok(())
}
