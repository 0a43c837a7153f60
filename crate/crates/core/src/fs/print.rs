//! Rendering feature structures as description text and as JSON.
//!
//! Text output is itself a valid description: reentrant nodes are written
//! as variables `X1`, `X2`, ... numbered by first occurrence, so printing
//! and re-reading a structure gives back an equivalent one.

use std::collections::HashMap;

use serde_json::{json, Map, Value};
use thiserror::Error;

use super::{Cell, CellRef, FeatureStructure, FsView, Heap};
use crate::signature::{Signature, E_LIST, HD, NE_LIST, TL};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrintStyle {
    /// Indented description text.
    Text,
    /// Single-line description text.
    Compact,
    Json,
}

pub fn print_fs(sig: &Signature, fs: FsView<'_>, style: PrintStyle) -> String {
    match style {
        PrintStyle::Json => to_json_value(sig, fs).to_string(),
        PrintStyle::Text | PrintStyle::Compact => {
            let mut p = Printer::new(sig, fs.heap, &[fs.root], style == PrintStyle::Text);
            let mut out = String::new();
            p.text(fs.root, 0, &mut out);
            out
        }
    }
}

/// Prints several roots sharing one tag numbering.
pub(crate) fn print_many(sig: &Signature, heap: &Heap, roots: &[CellRef], pretty: bool) -> Vec<String> {
    let mut p = Printer::new(sig, heap, roots, pretty);
    roots
        .iter()
        .map(|&r| {
            let mut out = String::new();
            p.text(r, 0, &mut out);
            out
        })
        .collect()
}

struct Printer<'a> {
    sig: &'a Signature,
    heap: &'a Heap,
    shared: HashMap<CellRef, usize>,
    tags: HashMap<CellRef, usize>,
    next_tag: usize,
    pretty: bool,
    list: Option<(crate::signature::TypeId, crate::signature::TypeId, usize, usize)>,
}

impl<'a> Printer<'a> {
    fn new(sig: &'a Signature, heap: &'a Heap, roots: &[CellRef], pretty: bool) -> Self {
        let mut counts: HashMap<CellRef, usize> = HashMap::new();
        let mut stack: Vec<CellRef> = roots.iter().map(|r| heap.resolve(*r)).collect();
        while let Some(r) = stack.pop() {
            let c = counts.entry(r).or_insert(0);
            *c += 1;
            if *c == 1 {
                stack.extend(heap.arcs_of(r).iter().rev().map(|a| heap.resolve(*a)));
            }
        }
        counts.retain(|_, c| *c > 1);
        let list = match (
            sig.type_id(NE_LIST),
            sig.type_id(E_LIST),
            sig.feat_id(HD),
            sig.feat_id(TL),
        ) {
            (Some(ne), Some(e), Some(hd), Some(tl)) => match (sig.slot(ne, hd), sig.slot(ne, tl)) {
                (Some(h), Some(t)) => Some((ne, e, h, t)),
                _ => None,
            },
            _ => None,
        };
        Printer {
            sig,
            heap,
            shared: counts,
            tags: HashMap::new(),
            next_tag: 1,
            pretty,
            list,
        }
    }

    fn sep(&self, indent: usize, out: &mut String) {
        if self.pretty {
            out.push('\n');
            out.push_str(&" ".repeat(indent));
        } else {
            out.push(' ');
        }
    }

    fn text(&mut self, r: CellRef, indent: usize, out: &mut String) {
        let r = self.heap.resolve(r);
        if let Some(t) = self.tags.get(&r) {
            out.push_str(&format!("X{t}"));
            return;
        }
        let tag = if self.shared.contains_key(&r) {
            let t = self.next_tag;
            self.next_tag += 1;
            self.tags.insert(r, t);
            Some(t)
        } else {
            None
        };
        let cell = self.heap.cell(r);
        if tag.is_none() && self.try_list(r, indent, out) {
            return;
        }
        let (ty, arcs) = match cell {
            Cell::Node { ty, .. } => (ty, self.heap.arcs_of(r).to_vec()),
            Cell::Unexpanded(ty) => (ty, Vec::new()),
            Cell::Ref(_) => unreachable!(),
        };
        let name = self.sig.type_name(ty);
        if arcs.is_empty() {
            match tag {
                Some(t) => out.push_str(&format!("(X{t}, {name})")),
                None => out.push_str(name),
            }
            return;
        }
        out.push('(');
        if let Some(t) = tag {
            out.push_str(&format!("X{t}, "));
        }
        out.push_str(name);
        for (i, &(f, _)) in self.sig.features_of(ty).iter().enumerate() {
            out.push(',');
            self.sep(indent + 1, out);
            let fname = self.sig.feat_name(f);
            out.push_str(fname);
            out.push(':');
            self.text(arcs[i], indent + 2 + fname.len(), out);
        }
        out.push(')');
    }

    /// `[a, b | T]` for untagged list spines.
    fn try_list(&mut self, r: CellRef, indent: usize, out: &mut String) -> bool {
        let Some((ne, e, hd, tl)) = self.list else {
            return false;
        };
        match self.heap.cell(r) {
            Cell::Node { ty, .. } | Cell::Unexpanded(ty) if ty == e => {
                out.push_str("[]");
                true
            }
            Cell::Node { ty, .. } if ty == ne => {
                out.push('[');
                let mut cur = r;
                let mut first = true;
                loop {
                    let arcs = self.heap.arcs_of(cur).to_vec();
                    if !first {
                        out.push_str(", ");
                    }
                    first = false;
                    self.text(arcs[hd], indent + 1, out);
                    let next = self.heap.resolve(arcs[tl]);
                    let untagged = !self.shared.contains_key(&next);
                    match self.heap.cell(next) {
                        Cell::Node { ty, .. } if ty == ne && untagged => cur = next,
                        Cell::Node { ty, .. } | Cell::Unexpanded(ty) if ty == e && untagged => {
                            out.push(']');
                            return true;
                        }
                        _ => {
                            out.push_str(" | ");
                            self.text(next, indent + 1, out);
                            out.push(']');
                            return true;
                        }
                    }
                }
            }
            _ => false,
        }
    }
}

pub(crate) fn to_json_value(sig: &Signature, fs: FsView<'_>) -> Value {
    let p = Printer::new(sig, fs.heap, &[fs.root], false);
    let mut tags: HashMap<CellRef, usize> = HashMap::new();
    let mut next = 1;
    json_node(sig, fs.heap, fs.root, &p.shared, &mut tags, &mut next)
}

fn json_node(
    sig: &Signature,
    heap: &Heap,
    r: CellRef,
    shared: &HashMap<CellRef, usize>,
    tags: &mut HashMap<CellRef, usize>,
    next: &mut usize,
) -> Value {
    let r = heap.resolve(r);
    if let Some(t) = tags.get(&r) {
        return json!({ "ref": t });
    }
    let mut obj = Map::new();
    if shared.contains_key(&r) {
        tags.insert(r, *next);
        obj.insert("tag".into(), json!(*next));
        *next += 1;
    }
    let ty = heap.type_of(r);
    obj.insert("type".into(), json!(sig.type_name(ty)));
    let mut feats = Map::new();
    let lazy = matches!(heap.cell(r), Cell::Unexpanded(_));
    if !lazy {
        for (i, &(f, _)) in sig.features_of(ty).iter().enumerate() {
            let child = heap.arcs_of(r)[i];
            feats.insert(
                sig.feat_name(f).to_string(),
                json_node(sig, heap, child, shared, tags, next),
            );
        }
    }
    obj.insert("feats".into(), Value::Object(feats));
    if lazy {
        obj.insert("lazy".into(), json!(true));
    }
    Value::Object(obj)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JsonError {
    #[error("malformed structure JSON: {0}")]
    Malformed(String),
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("reference to undefined tag {0}")]
    UndefinedTag(u64),
    #[error("inconsistent structure: {0}")]
    Inconsistent(String),
}

/// Reads the JSON rendering back into a structure. Features left out are
/// most general.
pub fn from_json(sig: &Signature, v: &Value) -> Result<FeatureStructure, JsonError> {
    let mut heap = Heap::new();
    let mut tags = HashMap::new();
    let root = json_build(sig, &mut heap, v, &mut tags)?;
    let root = heap.freeze(&[root])[0];
    Ok(FeatureStructure::from_parts(heap, root))
}

fn json_build(
    sig: &Signature,
    heap: &mut Heap,
    v: &Value,
    tags: &mut HashMap<u64, CellRef>,
) -> Result<CellRef, JsonError> {
    let obj = v
        .as_object()
        .ok_or_else(|| JsonError::Malformed(format!("expected object, got {v}")))?;
    if let Some(r) = obj.get("ref") {
        let n = r
            .as_u64()
            .ok_or_else(|| JsonError::Malformed("`ref` must be a number".into()))?;
        return tags.get(&n).copied().ok_or(JsonError::UndefinedTag(n));
    }
    let tyname = obj
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| JsonError::Malformed("missing `type`".into()))?;
    let ty = sig
        .type_id(tyname)
        .ok_or_else(|| JsonError::UnknownType(tyname.into()))?;
    let node = heap.alloc_unexpanded(ty);
    if let Some(t) = obj.get("tag").and_then(Value::as_u64) {
        tags.insert(t, node);
    }
    if let Some(feats) = obj.get("feats").and_then(Value::as_object) {
        for (fname, child) in feats {
            let f = sig
                .feat_id(fname)
                .ok_or_else(|| JsonError::UnknownFeature(fname.clone()))?;
            let c = json_build(sig, heap, child, tags)?;
            let slot = heap
                .get_arc(sig, node, f)
                .map_err(|e| JsonError::Inconsistent(e.describe(sig)))?;
            heap.unify(sig, slot, c)
                .map_err(|e| JsonError::Inconsistent(e.describe(sig)))?;
        }
    }
    Ok(node)
}
