use std::collections::HashMap;

use super::ast::{Desc, RuleDecl};
use super::FrontendError;
use crate::fs::{equivalent_many, print_many, Clash, CellRef, FeatureStructure, Heap};
use crate::signature::{Signature, BOT, E_LIST, HD, NE_LIST, TL};

/// Builds the most general structure satisfying `d` in the working region
/// of `heap`. Variables already bound in `env` are shared.
pub fn expand_desc(
    sig: &Signature,
    heap: &mut Heap,
    d: &Desc,
    env: &mut HashMap<String, CellRef>,
    line: usize,
) -> Result<CellRef, FrontendError> {
    let root = heap.alloc_unexpanded(BOT);
    let mut path = Vec::new();
    add(sig, heap, root, d, env, &mut path, line)?;
    Ok(heap.deref(root))
}

/// Expands a closed description into a standalone structure.
pub fn infer_and_expand(sig: &Signature, d: &Desc) -> Result<FeatureStructure, FrontendError> {
    let mut heap = Heap::new();
    let r = expand_desc(sig, &mut heap, d, &mut HashMap::new(), 0)?;
    let r = heap.freeze(&[r])[0];
    Ok(FeatureStructure::from_parts(heap, r))
}

fn clash_error(sig: &Signature, path: &[String], c: Clash, line: usize) -> FrontendError {
    let mut full: Vec<&str> = path.iter().map(|s| s.as_str()).collect();
    full.extend(c.path.iter().map(|f| sig.feat_name(*f)));
    FrontendError::InconsistentDescription {
        path: if full.is_empty() {
            "the root".into()
        } else {
            full.join(":")
        },
        left: sig.type_name(c.left).into(),
        right: sig.type_name(c.right).into(),
        line,
    }
}

fn add(
    sig: &Signature,
    heap: &mut Heap,
    node: CellRef,
    d: &Desc,
    env: &mut HashMap<String, CellRef>,
    path: &mut Vec<String>,
    line: usize,
) -> Result<(), FrontendError> {
    match d {
        Desc::Type(t) => {
            let tid = sig.type_id(t).ok_or_else(|| FrontendError::UnknownType {
                name: t.clone(),
                line,
            })?;
            heap.coerce(sig, node, tid)
                .map_err(|c| clash_error(sig, path, c, line))?;
        }
        Desc::Var(v) => match env.get(v) {
            Some(&other) => {
                heap.unify(sig, other, node)
                    .map_err(|c| clash_error(sig, path, c, line))?;
            }
            None => {
                env.insert(v.clone(), node);
            }
        },
        Desc::Feat(f, sub) => {
            let fid = sig.feat_id(f).ok_or_else(|| FrontendError::UnknownFeature {
                name: f.clone(),
                line,
            })?;
            let child = heap
                .get_arc(sig, node, fid)
                .map_err(|c| clash_error(sig, path, c, line))?;
            path.push(f.clone());
            add(sig, heap, child, sub, env, path, line)?;
            path.pop();
        }
        Desc::And(ds) => {
            for x in ds {
                add(sig, heap, node, x, env, path, line)?;
            }
        }
        Desc::List { items, tail } => {
            let lookup_t = |n: &str| {
                sig.type_id(n).ok_or_else(|| FrontendError::UnknownType {
                    name: n.into(),
                    line,
                })
            };
            let lookup_f = |n: &str| {
                sig.feat_id(n).ok_or_else(|| FrontendError::UnknownFeature {
                    name: n.into(),
                    line,
                })
            };
            let (ne, e, hd, tl) = (lookup_t(NE_LIST)?, lookup_t(E_LIST)?, lookup_f(HD)?, lookup_f(TL)?);
            let mut cur = node;
            let depth = path.len();
            for item in items {
                heap.coerce(sig, cur, ne)
                    .map_err(|c| clash_error(sig, path, c, line))?;
                let h = heap.get_arc(sig, cur, hd).map_err(|c| clash_error(sig, path, c, line))?;
                path.push(HD.into());
                add(sig, heap, h, item, env, path, line)?;
                path.pop();
                cur = heap.get_arc(sig, cur, tl).map_err(|c| clash_error(sig, path, c, line))?;
                path.push(TL.into());
            }
            match tail {
                Some(t) => add(sig, heap, cur, t, env, path, line)?,
                None => heap
                    .coerce(sig, cur, e)
                    .map_err(|c| clash_error(sig, path, c, line))?,
            }
            path.truncate(depth);
        }
        Desc::Macro { name, .. } => {
            return Err(FrontendError::UnknownMacro {
                name: name.clone(),
                line,
            })
        }
    }
    Ok(())
}

/// Variables that occur exactly once across `descs` (and so express no
/// sharing). Names starting with `_` are exempt.
pub fn unused_variables(descs: &[&Desc]) -> Vec<String> {
    let mut counts: Vec<(String, usize)> = Vec::new();
    for d in descs {
        d.for_each_var(&mut |v| match counts.iter_mut().find(|(n, _)| n == v) {
            Some((_, c)) => *c += 1,
            None => counts.push((v.to_string(), 1)),
        });
    }
    counts
        .into_iter()
        .filter(|(n, c)| *c == 1 && !n.starts_with('_'))
        .map(|(n, _)| n)
        .collect()
}

/// An expanded rule: head and body templates on one frozen heap, sharing
/// nodes wherever the source rule shares variables.
#[derive(Clone, Debug)]
pub struct RuleTemplate {
    pub name: String,
    pub heap: Heap,
    pub head: CellRef,
    pub body: Vec<CellRef>,
    /// Per body position: matches only edges placed at initialization.
    pub initial_only: Vec<bool>,
    pub line: usize,
}

impl RuleTemplate {
    pub fn from_decl(sig: &Signature, r: &RuleDecl, index: usize) -> Result<Self, FrontendError> {
        let mut heap = Heap::new();
        let mut env = HashMap::new();
        let head = expand_desc(sig, &mut heap, &r.head, &mut env, r.line)?;
        let mut body = Vec::new();
        for item in &r.body {
            body.push(expand_desc(sig, &mut heap, &item.desc, &mut env, r.line)?);
        }
        let mut roots = vec![head];
        roots.extend(&body);
        Ok(RuleTemplate::from_roots(
            r.name.clone().unwrap_or_else(|| format!("rule{}", index + 1)),
            heap,
            &roots,
            r.body.iter().map(|b| b.initial_only).collect(),
            r.line,
        ))
    }

    /// Freezes `roots` (head first) out of a working heap.
    pub fn from_roots(name: String, heap: Heap, roots: &[CellRef], initial_only: Vec<bool>, line: usize) -> Self {
        let mut fresh = Heap::new();
        let roots = fresh.import(&heap, roots);
        let roots = fresh.freeze(&roots);
        RuleTemplate {
            name,
            heap: fresh,
            head: roots[0],
            body: roots[1..].to_vec(),
            initial_only,
            line,
        }
    }

    pub fn arity(&self) -> usize {
        self.body.len()
    }

    /// Head followed by body roots.
    pub fn roots(&self) -> Vec<CellRef> {
        let mut r = vec![self.head];
        r.extend(&self.body);
        r
    }

    /// Equivalence of the whole (head, body...) tuple, sharing included.
    pub fn equivalent(&self, other: &RuleTemplate, sig: &Signature) -> bool {
        self.initial_only == other.initial_only
            && equivalent_many(sig, &self.heap, &self.roots(), &other.heap, &other.roots())
    }

    /// Source text of the rule in grammar syntax.
    pub fn to_source(&self, sig: &Signature) -> String {
        let texts = print_many(sig, &self.heap, &self.roots(), false);
        let mut out = format!("{} rule\n{}\n===>\n", super::ast::quote_atom(&self.name), texts[0]);
        for (i, t) in texts[1..].iter().enumerate() {
            if i > 0 {
                out.push_str(",\n");
            }
            out.push_str(if self.initial_only[i] { "init> " } else { "cat> " });
            out.push_str(t);
        }
        out.push_str(".\n");
        out
    }

    pub fn head_fs(&self) -> FeatureStructure {
        FeatureStructure::extract(&self.heap, self.head)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_desc, parse_grammar};
    use crate::signature::compile_signature;

    fn sig() -> Signature {
        let g = parse_grammar(
            "bot sub [a, b, np, vp, list].\n\
             a sub [] intro [f:bot, h:bot].\n\
             b sub [] intro [g:bot].\n\
             list sub [e_list, ne_list].\n\
             ne_list intro [hd:bot, tl:list].",
        )
        .unwrap();
        compile_signature(&g.signature).unwrap()
    }

    fn exp(s: &Signature, d: &str) -> Result<FeatureStructure, FrontendError> {
        infer_and_expand(s, &parse_desc(d).unwrap())
    }

    #[test]
    fn bot_is_most_general() {
        let s = sig();
        let fs = exp(&s, "bot").unwrap();
        assert!(fs.equivalent(&FeatureStructure::bot(), &s));
    }

    #[test]
    fn shared_variable_becomes_reentrancy() {
        let s = sig();
        let fs = exp(&s, "(a, f:(b, g:X), h:X)").unwrap();
        let v = fs.view();
        assert!(v.path(&s, "f:g").unwrap().same(&v.path(&s, "h").unwrap()));
        assert_eq!(fs.to_text(&s).matches("X1").count(), 2);
    }

    #[test]
    fn feature_promotes_to_introducer() {
        let s = sig();
        let fs = exp(&s, "g:np").unwrap();
        assert_eq!(s.type_name(fs.ty()), "b");
    }

    #[test]
    fn clash_is_reported_with_path() {
        let s = sig();
        match exp(&s, "f:(np, vp)") {
            Err(FrontendError::InconsistentDescription { path, left, right, .. }) => {
                assert_eq!(path, "f");
                assert_eq!((left.as_str(), right.as_str()), ("np", "vp"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(exp(&s, "(np, f:a)"), Err(FrontendError::InconsistentDescription { .. })));
        assert!(matches!(exp(&s, "zzz"), Err(FrontendError::UnknownType { .. })));
        assert!(matches!(exp(&s, "zzz:a"), Err(FrontendError::UnknownFeature { .. })));
    }

    #[test]
    fn lists_desugar() {
        let s = sig();
        let fs = exp(&s, "[np, X | X]").unwrap();
        assert_eq!(fs.to_text(&s), "[np, (X1, list) | X1]");
        let e = exp(&s, "[]").unwrap();
        assert_eq!(s.type_name(e.ty()), "e_list");
    }

    #[test]
    fn single_occurrence_lint() {
        let a = parse_desc("(f:X, g:Y, h:X, _Z)").unwrap();
        assert_eq!(unused_variables(&[&a]), vec!["Y"]);
    }
}
