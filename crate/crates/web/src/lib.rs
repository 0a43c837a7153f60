//! Browser demo: parse, generate and step through the machine on a grammar
//! typed into the page. Every export takes and returns JSON text.

use std::sync::Arc;

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use revgram::artifact::{Artifact, CompileOptions};
use revgram::chart::ChartOptions;
use revgram::debug::{read_sem, Session};
use revgram::inversion::InversionConfig;

#[wasm_bindgen]
pub struct Demo {
    artifact: Arc<Artifact>,
    session: Session,
}

fn compile(src: &str) -> Result<Artifact, String> {
    let inverted = CompileOptions {
        invert: Some(InversionConfig::default()),
        ..Default::default()
    };
    // Grammars that cannot be inverted are still good for parsing.
    Artifact::compile(src, &inverted)
        .or_else(|_| Artifact::compile(src, &CompileOptions::default()))
        .map_err(|e| e.to_string())
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(grammar: &str) -> Result<Demo, JsValue> {
        let a = Arc::new(compile(grammar).map_err(|e| JsValue::from_str(&e))?);
        Ok(Demo {
            session: Session::new(a.clone()),
            artifact: a,
        })
    }

    pub fn stats(&self) -> String {
        json!({"stats": self.artifact.stats(), "invertible": self.artifact.inverted.is_some()}).to_string()
    }

    pub fn parse(&self, sentence: &str) -> String {
        self.parse_value(sentence).to_string()
    }

    pub fn generate(&self, sem: &str) -> String {
        self.generate_value(sem).to_string()
    }

    /// One debug-protocol request (without a session id).
    pub fn debug(&mut self, request: &str) -> String {
        match serde_json::from_str::<Value>(request) {
            Ok(v) => self.session.handle(&v).to_string(),
            Err(e) => json!({"ok": false, "error": format!("bad JSON: {e}")}).to_string(),
        }
    }
}

impl Demo {
    pub fn parse_value(&self, sentence: &str) -> Value {
        let words: Vec<&str> = sentence.split_whitespace().collect();
        let sig = &self.artifact.grammar.signature;
        match self.artifact.parse(&words, ChartOptions::default()) {
            Ok((c, res)) => json!({
                "ok": true,
                "results": res.iter().map(|&id| c.edge_fs(id).to_text(sig)).collect::<Vec<_>>(),
                "edges": c.complete.len(),
                "steps": c.counters.steps,
            }),
            Err(e) => json!({"ok": false, "error": e.to_string()}),
        }
    }

    pub fn generate_value(&self, sem: &str) -> Value {
        let Some((inv, _)) = &self.artifact.inverted else {
            return json!({"ok": false, "error": "this grammar could not be inverted"});
        };
        let text = sem.trim();
        let v = if text.starts_with('{') {
            match serde_json::from_str(text) {
                Ok(v) => v,
                Err(e) => return json!({"ok": false, "error": e.to_string()}),
            }
        } else {
            Value::String(text.to_string())
        };
        let sem = match read_sem(inv.signature(), &v) {
            Ok(s) => s,
            Err(e) => return json!({"ok": false, "error": e}),
        };
        match self.artifact.generate(&sem, ChartOptions::default()).unwrap() {
            Ok(g) => json!({
                "ok": true,
                "strings": g.strings.iter().map(|s| s.join(" ")).collect::<Vec<_>>(),
                "diagnostics": g.diagnostics,
                "edges": g.chart.complete.len(),
            }),
            Err(e) => json!({"ok": false, "error": e.to_string()}),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = include_str!("../../core/grammars/tiny.gr");

    #[test]
    fn parse_generate_debug() {
        let mut d = Demo::new(TINY).ok().unwrap();
        let p = d.parse_value("every boy sleeps");
        assert_eq!(p["results"].as_array().unwrap().len(), 1);
        let g = d.generate_value(
            "(arg_2, prd:(forall, var:X, form:(conn:if, wff1:(B, prd:boy, a1:X), wff2:(S, prd:sleep, a1:X))), a1:B, a2:S)",
        );
        assert_eq!(g["strings"], json!(["every boy sleeps"]));
        let r: Value = serde_json::from_str(&d.debug(r#"{"cmd":"init_parse","words":"every boy sleeps"}"#)).unwrap();
        assert_eq!(r["ok"], true);
        let r: Value = serde_json::from_str(&d.debug(r#"{"cmd":"run"}"#)).unwrap();
        assert_eq!(r["state"]["results"], 1);
        assert_eq!(d.parse_value("every dog")["ok"], false);
    }
}
