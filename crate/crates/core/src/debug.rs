//! Debug protocol sessions. A session owns one chart run over an artifact
//! and answers JSON requests; transports (HTTP, wasm) only move JSON.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::artifact::{Artifact, CompileOptions};
use crate::chart::{Advance, Chart, ChartOptions, TRACE_VERSION};
use crate::frontend::{infer_and_expand, parse_desc};
use crate::fs::{from_json, print::to_json_value, Cell, CellRef, FeatureStructure, FsView};
use crate::inversion::{init_generate, InversionConfig};
use crate::machine::Program;
use crate::signature::Signature;

pub const PROTOCOL_VERSION: u32 = 1;

/// Most instructions a single `run` request executes.
const RUN_BUDGET: u64 = 10_000_000;

struct Run {
    chart: Chart,
    generation: bool,
    trace_sent: usize,
}

pub struct Session {
    artifact: Arc<Artifact>,
    run: Option<Run>,
    breakpoints: BTreeSet<usize>,
    options: ChartOptions,
}

type Reply = Result<Value, String>;

fn words_of(v: &Value) -> Result<Vec<String>, String> {
    match v {
        Value::String(s) => Ok(s.split_whitespace().map(String::from).collect()),
        Value::Array(a) => a
            .iter()
            .map(|w| w.as_str().map(String::from).ok_or_else(|| "words must be strings".to_string()))
            .collect(),
        _ => Err("`words` must be a string or an array of strings".into()),
    }
}

/// Reads a semantic input given as description text or JSON.
pub fn read_sem(sig: &Signature, v: &Value) -> Result<FeatureStructure, String> {
    match v {
        Value::String(s) => {
            let d = parse_desc(s).map_err(|e| e.to_string())?;
            infer_and_expand(sig, &d).map_err(|e| e.to_string())
        }
        Value::Object(_) => from_json(sig, v).map_err(|e| e.to_string()),
        _ => Err("`sem` must be description text or a JSON structure".into()),
    }
}

impl Session {
    pub fn new(artifact: Arc<Artifact>) -> Session {
        Session {
            artifact,
            run: None,
            breakpoints: BTreeSet::new(),
            options: ChartOptions {
                trace: true,
                ..Default::default()
            },
        }
    }

    fn program(&self) -> Option<(&Program, &Signature)> {
        let run = self.run.as_ref()?;
        if run.generation {
            let (inv, p) = self.artifact.inverted.as_ref()?;
            Some((p, inv.signature()))
        } else {
            Some((&self.artifact.program, &self.artifact.grammar.signature))
        }
    }

    /// Handles one request object and returns the response object.
    pub fn handle(&mut self, req: &Value) -> Value {
        let id = req.get("id").cloned().unwrap_or(Value::Null);
        if let Some(v) = req.get("v").and_then(Value::as_u64) {
            if v != PROTOCOL_VERSION as u64 {
                return json!({"v": PROTOCOL_VERSION, "id": id, "ok": false,
                    "error": format!("protocol version {v} not supported")});
            }
        }
        let cmd = req.get("cmd").and_then(Value::as_str).unwrap_or("");
        let reply = match cmd {
            "load" => self.load(req),
            "init_parse" => self.init_parse(req),
            "init_generate" => self.init_generate(req),
            "step" => self.step(req),
            "run" => self.run_cmd(),
            "break" => self.set_break(req),
            "inspect" => self.inspect(req),
            "state" => Ok(json!({})),
            _ => Err(format!("unknown command `{cmd}`")),
        };
        match reply {
            Ok(mut v) => {
                let obj = v.as_object_mut().unwrap();
                obj.insert("v".into(), json!(PROTOCOL_VERSION));
                obj.insert("id".into(), id);
                obj.insert("ok".into(), json!(true));
                obj.insert("state".into(), self.state());
                obj.insert("events".into(), self.drain_events());
                v
            }
            Err(e) => json!({"v": PROTOCOL_VERSION, "id": id, "ok": false, "error": e, "state": self.state()}),
        }
    }

    fn load(&mut self, req: &Value) -> Reply {
        if let Some(src) = req.get("source").and_then(Value::as_str) {
            let invert = req.get("invert").and_then(Value::as_bool).unwrap_or(false);
            let opts = CompileOptions {
                invert: invert.then(InversionConfig::default),
                ..Default::default()
            };
            let a = Artifact::compile(src, &opts).map_err(|e| e.to_string())?;
            self.artifact = Arc::new(a);
        }
        self.run = None;
        self.breakpoints.clear();
        Ok(json!({"stats": self.artifact.stats()}))
    }

    fn start(&mut self, chart: Chart, generation: bool) -> Reply {
        let diagonal: Vec<Value> = (0..chart.complete.len()).map(|i| json!(i)).collect();
        self.run = Some(Run {
            chart,
            generation,
            trace_sent: 0,
        });
        Ok(json!({"diagonal": diagonal}))
    }

    fn init_parse(&mut self, req: &Value) -> Reply {
        let words = words_of(req.get("words").unwrap_or(&Value::Null))?;
        let w: Vec<&str> = words.iter().map(String::as_str).collect();
        let chart = Chart::init_parse(&self.artifact.grammar, &w, self.options.clone()).map_err(|e| e.to_string())?;
        self.start(chart, false)
    }

    fn init_generate(&mut self, req: &Value) -> Reply {
        let (inv, _) = self
            .artifact
            .inverted
            .as_ref()
            .ok_or("the artifact was compiled without inversion")?;
        let sem = read_sem(inv.signature(), req.get("sem").unwrap_or(&Value::Null))?;
        let chart = init_generate(inv, &sem, self.options.clone()).map_err(|e| e.to_string())?;
        self.start(chart, true)
    }

    /// Advances until one instruction ran (or the run finished).
    fn one(&mut self) -> Result<Option<usize>, String> {
        let art = self.artifact.clone();
        let generation = self.run.as_ref().ok_or("no run initialized")?.generation;
        let (p, sig) = if generation {
            let (inv, p) = art.inverted.as_ref().unwrap();
            (p, inv.signature())
        } else {
            (&art.program, &art.grammar.signature)
        };
        let chart = &mut self.run.as_mut().unwrap().chart;
        loop {
            match chart.advance(p, sig).map_err(|e| e.to_string())? {
                Advance::Executed { pc } => return Ok(Some(pc)),
                Advance::Scheduled => {}
                Advance::Finished => return Ok(None),
            }
        }
    }

    /// Instruction about to execute, scheduling work as needed.
    fn next_pc(&mut self) -> Result<Option<usize>, String> {
        let art = self.artifact.clone();
        let generation = self.run.as_ref().ok_or("no run initialized")?.generation;
        let (p, sig) = if generation {
            let (inv, p) = art.inverted.as_ref().unwrap();
            (p, inv.signature())
        } else {
            (&art.program, &art.grammar.signature)
        };
        let chart = &mut self.run.as_mut().unwrap().chart;
        while chart.pc().is_none() {
            if chart.advance(p, sig).map_err(|e| e.to_string())? == Advance::Finished {
                return Ok(None);
            }
        }
        Ok(chart.pc())
    }

    fn step(&mut self, req: &Value) -> Reply {
        let count = req.get("count").and_then(Value::as_u64).unwrap_or(1);
        let mut executed = 0;
        while executed < count {
            match self.one()? {
                Some(_) => executed += 1,
                None => break,
            }
        }
        self.next_pc()?;
        Ok(json!({"executed": executed}))
    }

    fn run_cmd(&mut self) -> Reply {
        let mut executed = 0u64;
        let mut halted = "finished";
        loop {
            if self.one()?.is_none() {
                break;
            }
            executed += 1;
            match self.next_pc()? {
                None => break,
                Some(pc) if self.breakpoints.contains(&pc) => {
                    halted = "breakpoint";
                    break;
                }
                Some(_) if executed >= RUN_BUDGET => {
                    halted = "budget";
                    break;
                }
                Some(_) => {}
            }
        }
        Ok(json!({"executed": executed, "halted": halted}))
    }

    fn set_break(&mut self, req: &Value) -> Reply {
        if req.get("clear").and_then(Value::as_bool) == Some(true) {
            self.breakpoints.clear();
        }
        let art = self.artifact.clone();
        let program = match (&self.run, &art.inverted) {
            (Some(r), Some((_, p))) if r.generation => p,
            _ => &art.program,
        };
        if let Some(o) = req.get("offset").and_then(Value::as_u64) {
            if o as usize >= program.instrs.len() {
                return Err(format!("offset {o} is outside the program"));
            }
            self.breakpoints.insert(o as usize);
        }
        if let Some(r) = req.get("rule").and_then(Value::as_u64) {
            let e = program.rules.get(r as usize).ok_or(format!("no rule {r}"))?.entry;
            self.breakpoints.insert(e);
        }
        if let Some(op) = req.get("opcode").and_then(Value::as_str) {
            let pcs: Vec<usize> = (0..program.instrs.len())
                .filter(|&i| program.instrs[i].opcode().name() == op)
                .collect();
            if pcs.is_empty() {
                return Err(format!("no `{op}` instruction in the program"));
            }
            self.breakpoints.extend(pcs);
        }
        Ok(json!({"breakpoints": self.breakpoints.iter().collect::<Vec<_>>()}))
    }

    fn inspect(&mut self, req: &Value) -> Reply {
        let what = req.get("what").and_then(Value::as_str).unwrap_or("");
        if what == "disasm" {
            let (p, sig) = self
                .program()
                .unwrap_or((&self.artifact.program, &self.artifact.grammar.signature));
            let lines: Vec<Value> = p
                .instrs
                .iter()
                .enumerate()
                .map(|(pc, i)| json!({"pc": pc, "text": i.render(sig)}))
                .collect();
            let rules: Vec<Value> = p
                .rules
                .iter()
                .map(|r| json!({"name": r.name, "entry": r.entry, "end": r.end, "arity": r.arity}))
                .collect();
            return Ok(json!({"disasm": lines, "rules": rules}));
        }
        let (_, sig) = self.program().ok_or("no run initialized")?;
        let run = self.run.as_ref().unwrap();
        let chart = &run.chart;
        let fs_json = |r: CellRef| to_json_value(sig, FsView::new(&chart.heap, r));
        match what {
            "registers" => {
                let regs: Vec<Value> = match &chart.current {
                    Some(c) => c
                        .attempt
                        .regs
                        .iter()
                        .enumerate()
                        .map(|(i, r)| match r {
                            Some(r) => json!({"reg": format!("X{i}"), "cell": chart.heap.resolve(*r).0, "fs": fs_json(*r)}),
                            None => json!({"reg": format!("X{i}"), "cell": null}),
                        })
                        .collect(),
                    None => Vec::new(),
                };
                Ok(json!({"registers": regs}))
            }
            "heap" => {
                let from = req.get("from").and_then(Value::as_u64).unwrap_or(0) as usize;
                let to = req
                    .get("to")
                    .and_then(Value::as_u64)
                    .map_or(chart.heap.len(), |t| t as usize)
                    .min(chart.heap.len())
                    .min(from + 10_000);
                let cells: Vec<Value> = (from.min(to)..to)
                    .map(|i| {
                        let r = CellRef(i as u32);
                        let frozen = i < chart.heap.frozen_len();
                        match chart.heap.cell(r) {
                            Cell::Node { ty, .. } => {
                                let arcs: Vec<Value> = sig
                                    .features_of(ty)
                                    .iter()
                                    .zip(chart.heap.arcs_of(r))
                                    .map(|(&(f, _), a)| json!([sig.feat_name(f), a.0]))
                                    .collect();
                                json!({"i": i, "kind": "node", "type": sig.type_name(ty), "arcs": arcs, "frozen": frozen})
                            }
                            Cell::Unexpanded(ty) => {
                                json!({"i": i, "kind": "lazy", "type": sig.type_name(ty), "frozen": frozen})
                            }
                            Cell::Ref(t) => json!({"i": i, "kind": "ref", "to": t.0, "frozen": frozen}),
                        }
                    })
                    .collect();
                Ok(json!({"heap": cells, "len": chart.heap.len(), "frozen": chart.heap.frozen_len()}))
            }
            "chart" => {
                let complete: Vec<Value> = chart
                    .complete
                    .iter()
                    .enumerate()
                    .map(|(i, e)| {
                        json!({"id": i, "span": [e.span.0, e.span.1], "rule": e.rule,
                            "initial": e.initial, "children": e.children})
                    })
                    .collect();
                let active: Vec<Value> = chart
                    .active
                    .iter()
                    .enumerate()
                    .map(|(i, a)| {
                        let p = self.program().unwrap().0;
                        json!({"id": i, "span": [a.span.0, a.span.1], "rule": a.rule,
                            "dot": a.matched.len(), "needed": p.rules[a.rule].arity - a.matched.len()})
                    })
                    .collect();
                Ok(json!({"n": chart.n, "complete": complete, "active": active, "results": chart.spanning()}))
            }
            "edge" => {
                let id = req.get("edge").and_then(Value::as_u64).ok_or("`edge` id missing")? as usize;
                let e = chart.complete.get(id).ok_or(format!("no edge {id}"))?;
                let fs = FeatureStructure::extract(&chart.heap, e.root);
                Ok(json!({"edge": id, "fs": fs.to_json(sig), "text": fs.to_text(sig)}))
            }
            _ => Err(format!("cannot inspect `{what}`")),
        }
    }

    fn state(&self) -> Value {
        let Some(run) = &self.run else {
            return json!({"initialized": false});
        };
        let c = &run.chart;
        let (p, _) = self.program().unwrap();
        let cur = c.current.as_ref().map(|cur| {
            let r = &p.rules[cur.attempt.rule];
            json!({"pc": cur.attempt.pc, "rule": cur.attempt.rule, "rule_name": r.name,
                "dot": cur.attempt.dot(), "span": [cur.span.0, cur.span.1]})
        });
        json!({
            "initialized": true,
            "task": if run.generation { "generate" } else { "parse" },
            "current": cur,
            "finished": c.is_finished(),
            "counters": c.counters,
            "complete": c.complete.len(),
            "active": c.active.len(),
            "results": c.spanning().len(),
        })
    }

    fn drain_events(&mut self) -> Value {
        let Some(run) = &mut self.run else {
            return json!([]);
        };
        let ev = &run.chart.trace[run.trace_sent..];
        let out = serde_json::to_value(ev).unwrap();
        run.trace_sent = run.chart.trace.len();
        json!({"trace_version": TRACE_VERSION, "items": out})
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn session() -> Session {
        let opts = CompileOptions {
            invert: Some(InversionConfig::default()),
            ..Default::default()
        };
        Session::new(Arc::new(Artifact::compile(include_str!("../grammars/tiny.gr"), &opts).unwrap()))
    }

    #[test]
    fn step_to_first_suspension() {
        let mut s = session();
        let r = s.handle(&json!({"v": 1, "cmd": "init_parse", "words": "every boy sleeps"}));
        assert_eq!(r["ok"], true, "{r}");
        assert_eq!(r["diagonal"].as_array().unwrap().len(), 3);
        let mut dot = 0;
        for _ in 0..100 {
            let r = s.handle(&json!({"cmd": "step"}));
            let items = r["events"]["items"].as_array().unwrap();
            if items.iter().any(|e| e["ev"] == "edge" && e["kind"] == "active") {
                dot = items.iter().find(|e| e["kind"] == "active").unwrap()["dot"].as_u64().unwrap();
                break;
            }
        }
        assert_eq!(dot, 1);
    }

    #[test]
    fn breakpoint_halts_run() {
        let mut s = session();
        s.handle(&json!({"cmd": "init_parse", "words": ["every", "boy", "sleeps"]}));
        let entry = s.artifact.program.rules[1].entry;
        let r = s.handle(&json!({"cmd": "break", "rule": 1}));
        assert_eq!(r["breakpoints"], json!([entry]));
        let r = s.handle(&json!({"cmd": "run"}));
        assert_eq!(r["halted"], "breakpoint");
        assert_eq!(r["state"]["current"]["pc"], json!(entry));
        let regs = s.handle(&json!({"cmd": "inspect", "what": "registers"}));
        assert!(!regs["registers"].as_array().unwrap().is_empty());
        s.handle(&json!({"cmd": "break", "clear": true}));
        let r = s.handle(&json!({"cmd": "run"}));
        assert_eq!(r["halted"], "finished");
        assert_eq!(r["state"]["results"], 1);
    }

    #[test]
    fn generation_session() {
        let mut s = session();
        let sem = "(arg_2, prd:(forall, var:X, form:(conn:if, wff1:(B, prd:boy, a1:X), wff2:(S, prd:sleep, a1:X))), a1:B, a2:S)";
        let r = s.handle(&json!({"cmd": "init_generate", "sem": sem}));
        assert_eq!(r["diagonal"].as_array().unwrap().len(), 3, "{r}");
        let r = s.handle(&json!({"cmd": "run"}));
        assert_eq!(r["state"]["task"], "generate");
        assert!(r["state"]["results"].as_u64().unwrap() >= 1);
        let c = s.handle(&json!({"cmd": "inspect", "what": "chart"}));
        let id = c["results"][0].as_u64().unwrap();
        let e = s.handle(&json!({"cmd": "inspect", "what": "edge", "edge": id}));
        assert!(e["text"].as_str().unwrap().contains("str"));
    }

    #[test]
    fn errors_are_reported() {
        let mut s = session();
        assert_eq!(s.handle(&json!({"cmd": "step"}))["ok"], false);
        assert_eq!(s.handle(&json!({"cmd": "frobnicate"}))["ok"], false);
        assert_eq!(s.handle(&json!({"v": 9, "cmd": "state"}))["ok"], false);
        let r = s.handle(&json!({"cmd": "init_parse", "words": "every girl"}));
        assert!(r["error"].as_str().unwrap().contains("girl"));
    }
}
