//! Compile-time grammar inversion.
//!
//! Each phrase rule is restructured around its semantic head: the body
//! constituent whose λ-structure, applied to the other constituents'
//! semantics, gives the mother's semantics. Functor heads are unfolded
//! through rules down to lexical entries; the inverted rule then consumes
//! the argument constituents followed by the lexical head's semantics, and
//! threads a `str` list recording the words in phrase order. The lexicon is
//! inverted into unary rules from semantic elements to words, and a
//! knowledge base maps semantic primitives back to word forms.

mod linearize;
mod realize;

use std::collections::HashSet;

use thiserror::Error;

use crate::frontend::ast::KbRecord;
use crate::frontend::RuleTemplate;
use crate::fs::{transfer_many, CellRef, FeatureStructure, Heap};
use crate::grammar::Grammar;
use crate::signature::{compile_signature, FeatId, Signature, SignatureError, TypeDecl, TypeId, E_LIST, HD, LIST, NE_LIST, TL};

pub use linearize::linearize_semantics;
pub use realize::{generate, init_generate, realize_strings, GenerateError, Generation};

/// Names of the semantics-bearing features.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct InversionConfig {
    pub sem: String,
    pub var: String,
    pub rst: String,
    pub prd: String,
    /// Argument features in order.
    pub args: Vec<String>,
    /// Checked for existence when set.
    pub form: Option<String>,
    pub conn: Option<String>,
    /// Feature injected to carry the generated words.
    pub str_feat: String,
    /// Tail of the `str` difference list.
    pub str_end: String,
    /// Depth limit when unfolding a semantic head through rules.
    pub max_unfold: usize,
}

impl Default for InversionConfig {
    fn default() -> Self {
        InversionConfig {
            sem: "sem".into(),
            var: "var".into(),
            rst: "rst".into(),
            prd: "prd".into(),
            args: ["a1", "a2", "a3", "a4"].map(String::from).to_vec(),
            form: Some("form".into()),
            conn: Some("conn".into()),
            str_feat: "str".into(),
            str_end: "str_end".into(),
            max_unfold: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Rule name, `word` for a lexical entry, or `signature`.
    pub subject: String,
    pub reason: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.subject, self.reason)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InversionError {
    #[error("grammar is not invertible:\n{}", .0.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n"))]
    NotInvertible(Vec<Violation>),
    #[error("feature `{0}` already exists; choose another name for the string feature")]
    FeatureCollision(String),
    #[error("no single type subsumes all rule heads and lexical entries to carry `{0}`")]
    NoStringCarrier(String),
    #[error("rule `{rule}`: {reason}")]
    Failure { rule: String, reason: String },
    #[error("malformed semantics at {0}")]
    MalformedSemantics(String),
    #[error("signature: {0}")]
    Signature(#[from] SignatureError),
}

/// Resolved semantic feature ids.
#[derive(Clone, Debug)]
pub(crate) struct SemFeats {
    pub sem: FeatId,
    pub var: FeatId,
    pub rst: FeatId,
    pub prd: FeatId,
    pub args: Vec<FeatId>,
}

impl SemFeats {
    fn resolve(sig: &Signature, cfg: &InversionConfig) -> Result<SemFeats, Vec<Violation>> {
        let mut missing = Vec::new();
        let mut get = |n: &str| {
            let f = sig.feat_id(n);
            if f.is_none() {
                missing.push(Violation {
                    subject: "signature".into(),
                    reason: format!("feature `{n}` is not declared"),
                });
            }
            f
        };
        let sem = get(&cfg.sem);
        let var = get(&cfg.var);
        let rst = get(&cfg.rst);
        let prd = get(&cfg.prd);
        let first = cfg.args.first().map(|a| get(a));
        for n in cfg.form.iter().chain(&cfg.conn) {
            get(n);
        }
        if cfg.args.is_empty() {
            missing.push(Violation {
                subject: "signature".into(),
                reason: "no argument features configured".into(),
            });
        }
        if !missing.is_empty() || first.is_none() {
            return Err(missing);
        }
        Ok(SemFeats {
            sem: sem.unwrap(),
            var: var.unwrap(),
            rst: rst.unwrap(),
            prd: prd.unwrap(),
            args: cfg.args.iter().filter_map(|a| sig.feat_id(a)).collect(),
        })
    }

    fn carries(&self, sig: &Signature, heap: &Heap, r: CellRef, f: FeatId) -> bool {
        sig.slot(heap.type_of(r), f).is_some()
    }

    pub fn is_pred(&self, sig: &Signature, heap: &Heap, r: CellRef) -> bool {
        self.carries(sig, heap, r, self.prd)
    }

    /// The predicate-argument node below a λ-chain.
    pub fn atom(&self, sig: &Signature, heap: &Heap, r: CellRef) -> Option<CellRef> {
        let mut cur = heap.resolve(r);
        for _ in 0..64 {
            if self.is_pred(sig, heap, cur) {
                return Some(cur);
            }
            cur = heap.arc(sig, cur, self.rst)?;
        }
        None
    }

    /// Argument values present on an atom, in argument order.
    pub fn arg_values(&self, sig: &Signature, heap: &Heap, atom: CellRef) -> Vec<(FeatId, CellRef)> {
        self.args
            .iter()
            .filter_map(|&f| heap.arc(sig, atom, f).map(|v| (f, v)))
            .collect()
    }

    /// Number of argument features appropriate for `ty`.
    pub fn arity(&self, sig: &Signature, ty: TypeId) -> usize {
        self.args.iter().filter(|&&f| sig.slot(ty, f).is_some()).count()
    }

    /// Knowledge-base key of an atom: predicate type name and arity.
    pub fn key(&self, sig: &Signature, heap: &Heap, atom: CellRef) -> (String, usize) {
        let p = heap.arc(sig, atom, self.prd).map_or(sig.type_id("bot").unwrap(), |v| heap.type_of(v));
        (sig.type_name(p).to_string(), self.arity(sig, heap.type_of(atom)))
    }

    fn sem_of(&self, sig: &Signature, heap: &Heap, r: CellRef) -> Option<CellRef> {
        heap.arc(sig, r, self.sem)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum HeadKind {
    /// The head's semantics is the constituent's `rst`.
    Functor,
    /// The head's semantics is the constituent's semantics.
    Identity,
}

fn semantic_head(
    sig: &Signature,
    sf: &SemFeats,
    heap: &Heap,
    head: CellRef,
    body: &[CellRef],
) -> Result<(usize, HeadKind), String> {
    let hs = sf
        .sem_of(sig, heap, head)
        .ok_or_else(|| "the head has no semantics".to_string())?;
    let mut found = Vec::new();
    for (k, &b) in body.iter().enumerate() {
        let Some(bs) = sf.sem_of(sig, heap, b) else { continue };
        if bs == hs {
            found.push((k, HeadKind::Identity));
        } else if heap.arc(sig, bs, sf.rst) == Some(hs) {
            found.push((k, HeadKind::Functor));
        }
    }
    match found.len() {
        1 => Ok(found[0]),
        0 => Err("no semantic head: the head's semantics is not built from any constituent".into()),
        _ => Err(format!(
            "{} candidate semantic heads (constituents {})",
            found.len(),
            found.iter().map(|(k, _)| (k + 1).to_string()).collect::<Vec<_>>().join(", ")
        )),
    }
}

/// Checks the requirements for inversion; an empty list means invertible.
pub fn check_invertibility(g: &Grammar, cfg: &InversionConfig) -> Vec<Violation> {
    let sig = &g.signature;
    let sf = match SemFeats::resolve(sig, cfg) {
        Ok(sf) => sf,
        Err(v) => return v,
    };
    let mut out = Vec::new();
    for r in &g.rules {
        let h = &r.heap;
        let Some(hs) = sf.sem_of(sig, h, r.head) else {
            out.push(Violation {
                subject: r.name.clone(),
                reason: "the head has no semantics".into(),
            });
            continue;
        };
        let reachable = r.body.iter().any(|&b| {
            let mut cur = sf.sem_of(sig, h, b);
            for _ in 0..64 {
                match cur {
                    Some(c) if c == hs => return true,
                    Some(c) => cur = h.arc(sig, c, sf.rst),
                    None => return false,
                }
            }
            false
        });
        if !reachable {
            out.push(Violation {
                subject: r.name.clone(),
                reason: "disconnected semantics: the head's sem is not reachable from any constituent's sem through rst"
                    .into(),
            });
        }
    }
    for e in &g.lexicon {
        let h = e.fs.heap();
        let atom = sf.sem_of(sig, h, e.fs.root()).and_then(|s| sf.atom(sig, h, s));
        if atom.is_none() {
            out.push(Violation {
                subject: format!("`{}` (line {})", e.word, e.line),
                reason: "no predicate-argument structure: sem does not reach a node carrying prd".into(),
            });
        }
    }
    out
}

/// The generation grammar: inverted rules (phrase rules and the inverted
/// lexicon) over the signature extended with the string features, and the
/// knowledge base.
#[derive(Clone, Debug)]
pub struct InvertedGrammar {
    pub grammar: Grammar,
    pub config: InversionConfig,
    /// Indices into `grammar.rules` of the inverted lexicon.
    pub lexical_rules: Vec<usize>,
    /// Innermost atom of each inverted-lexicon rule.
    pub lexical_atoms: Vec<FeatureStructure>,
    pub(crate) feats: SemFeats,
}

impl InvertedGrammar {
    /// Wraps an already inverted grammar, e.g. one read back from source.
    pub fn from_grammar(grammar: Grammar, config: InversionConfig) -> Result<InvertedGrammar, InversionError> {
        let sig = &grammar.signature;
        let feats = SemFeats::resolve(sig, &config).map_err(InversionError::NotInvertible)?;
        for n in [&config.str_feat, &config.str_end] {
            if sig.feat_id(n).is_none() {
                return Err(InversionError::NotInvertible(vec![Violation {
                    subject: "signature".into(),
                    reason: format!("feature `{n}` is missing; the grammar is not an inverted grammar"),
                }]));
            }
        }
        let mut lexical_rules = Vec::new();
        let mut lexical_atoms = Vec::new();
        for (i, r) in grammar.rules.iter().enumerate() {
            if r.arity() != 1 || !r.initial_only[0] {
                continue;
            }
            let h = &r.heap;
            if feats.sem_of(sig, h, r.head) != Some(h.resolve(r.body[0])) {
                continue;
            }
            if let Some(a) = feats.atom(sig, h, r.body[0]) {
                lexical_rules.push(i);
                lexical_atoms.push(FeatureStructure::extract(h, a));
            }
        }
        Ok(InvertedGrammar {
            grammar,
            config,
            lexical_rules,
            lexical_atoms,
            feats,
        })
    }

    pub fn signature(&self) -> &Signature {
        &self.grammar.signature
    }

    /// Words recorded for a primitive.
    pub fn kb_words(&self, predicate: &str, arity: usize) -> Vec<&str> {
        self.grammar
            .kb
            .iter()
            .filter(|k| k.predicate == predicate && k.arity == arity)
            .map(|k| k.word.as_str())
            .collect()
    }

    pub fn to_source(&self) -> String {
        self.grammar.to_source()
    }
}

/// The most specific type subsuming all of `tys`, if unique.
fn common_supertype(sig: &Signature, tys: &[TypeId]) -> Option<TypeId> {
    let cands: Vec<TypeId> = sig.types().filter(|&t| tys.iter().all(|&u| sig.subsumes(t, u))).collect();
    cands.iter().copied().find(|&c| cands.iter().all(|&o| sig.subsumes(o, c)))
}

/// Extends the signature with the list-valued string features.
fn extend_signature(g: &Grammar, cfg: &InversionConfig) -> Result<Signature, InversionError> {
    let sig = &g.signature;
    for n in [&cfg.str_feat, &cfg.str_end] {
        if sig.feat_id(n).is_some() {
            return Err(InversionError::FeatureCollision(n.clone()));
        }
    }
    let mut tys: Vec<TypeId> = g.rules.iter().map(|r| r.heap.type_of(r.head)).collect();
    tys.extend(g.lexicon.iter().map(|e| e.fs.ty()));
    let carrier = common_supertype(sig, &tys).ok_or_else(|| InversionError::NoStringCarrier(cfg.str_feat.clone()))?;
    let name = sig.type_name(carrier).to_string();
    let mut decls: Vec<TypeDecl> = sig.decls().to_vec();
    let feats = [(cfg.str_feat.clone(), LIST.to_string()), (cfg.str_end.clone(), LIST.to_string())];
    match decls.iter_mut().find(|d| d.name == name) {
        Some(d) => d.intro.extend(feats),
        None => {
            let mut d = TypeDecl::new(&name, &[], &[]);
            d.intro.extend(feats);
            decls.push(d);
        }
    }
    Ok(compile_signature(&decls)?)
}

fn transfer_rule(r: &RuleTemplate, from: &Signature, to: &Signature) -> RuleTemplate {
    let (heap, roots) = transfer_many(&r.heap, &r.roots(), from, to).expect("extended signature keeps all names");
    RuleTemplate::from_roots(r.name.clone(), heap, &roots, r.initial_only.clone(), r.line)
}

/// Raises featureless predicate symbols to their class, e.g. a `boy`
/// predicate to `noun`, so entries of one class share an inverted rule.
fn generalize(sig: &Signature, sf: &SemFeats, fs: &FeatureStructure) -> FeatureStructure {
    let mut h = Heap::new();
    let root = h.import(fs.heap(), &[fs.root()])[0];
    let mut seen = HashSet::new();
    let mut stack = vec![root];
    while let Some(r) = stack.pop() {
        let r = h.resolve(r);
        if !seen.insert(r) {
            continue;
        }
        if let Some(v) = h.arc(sig, r, sf.prd) {
            let t = h.type_of(v);
            let restr = sig.restriction(h.type_of(r), sf.prd).unwrap();
            if let [p] = sig.parents(t) {
                if sig.arity(t) == 0 && *p != restr && sig.subsumes(restr, *p) {
                    h.retype_leaf(sig, v, *p);
                }
            }
        }
        stack.extend_from_slice(h.arcs_of(r));
    }
    let root = h.freeze(&[root])[0];
    FeatureStructure::extract(&h, root)
}

/// A rule being restructured: roots on a private working heap and the
/// index of the semantic head in the body.
#[derive(Clone)]
struct Work {
    heap: Heap,
    head: CellRef,
    body: Vec<CellRef>,
    init: Vec<bool>,
    h: usize,
}

impl Work {
    fn from_rule(r: &RuleTemplate, h: usize) -> Work {
        let mut heap = Heap::new();
        let roots = heap.import(&r.heap, &r.roots());
        Work {
            heap,
            head: roots[0],
            body: roots[1..].to_vec(),
            init: r.initial_only.clone(),
            h,
        }
    }
}

struct Ctx<'a> {
    sig: &'a Signature,
    sf: &'a SemFeats,
    str_f: FeatId,
    str_end: FeatId,
    ne_list: TypeId,
    rules: &'a [RuleTemplate],
    heads: Vec<Option<(usize, HeadKind)>>,
    entries: &'a [(String, FeatureStructure)],
    max_unfold: usize,
}

type Clashable<T> = Result<T, crate::fs::Clash>;

impl Ctx<'_> {
    /// Appends `x` to the open list `cur` and returns the new tail.
    fn cons(&self, heap: &mut Heap, cur: CellRef, x: CellRef) -> Clashable<CellRef> {
        let sig = self.sig;
        heap.coerce(sig, cur, self.ne_list)?;
        let hd = heap.get_arc(sig, cur, sig.feat_id(HD).unwrap())?;
        heap.unify(sig, hd, x)?;
        heap.get_arc(sig, cur, sig.feat_id(TL).unwrap())
    }

    /// Threads `str` from the head through the constituents in `order`;
    /// `None` stands for the lexical head's atom.
    fn thread(&self, heap: &mut Heap, head: CellRef, order: &[Result<CellRef, CellRef>]) -> Clashable<()> {
        let sig = self.sig;
        let mut cur = heap.get_arc(sig, head, self.str_f)?;
        for item in order {
            match *item {
                Err(atom) => cur = self.cons(heap, cur, atom)?,
                Ok(c) => {
                    let s = heap.get_arc(sig, c, self.str_f)?;
                    heap.unify(sig, cur, s)?;
                    cur = heap.get_arc(sig, c, self.str_end)?;
                }
            }
        }
        let end = heap.get_arc(sig, head, self.str_end)?;
        heap.unify(sig, cur, end)?;
        Ok(())
    }

    /// All inverted rules obtained by unfolding the functor head of `w`
    /// down to lexical entries.
    fn unfold(&self, w: &Work, name: &str, line: usize, depth: usize, out: &mut Vec<RuleTemplate>) {
        let sig = self.sig;
        for (word, e) in self.entries {
            let mut w2 = w.clone();
            let er = w2.heap.import(e.heap(), &[e.root()])[0];
            if w2.heap.unify(sig, w2.body[w2.h], er).is_err() {
                continue;
            }
            if let Some(r) = self.functor_rule(w2, &format!("{name}_{word}"), line) {
                out.push(r);
            }
        }
        if depth >= self.max_unfold {
            return;
        }
        for (q, rule) in self.rules.iter().enumerate() {
            let Some((qh, _)) = self.heads[q] else { continue };
            let mut w2 = w.clone();
            let roots = w2.heap.import(&rule.heap, &rule.roots());
            if w2.heap.unify(sig, w2.body[w2.h], roots[0]).is_err() {
                continue;
            }
            let h = w2.h;
            w2.body.splice(h..h + 1, roots[1..].iter().copied());
            w2.init.splice(h..h + 1, rule.initial_only.iter().copied());
            w2.h = h + qh;
            self.unfold(&w2, name, line, depth + 1, out);
        }
    }

    fn functor_rule(&self, mut w: Work, name: &str, line: usize) -> Option<RuleTemplate> {
        let (sig, sf) = (self.sig, self.sf);
        let hs = sf.sem_of(sig, &w.heap, w.body[w.h])?;
        let atom = sf.atom(sig, &w.heap, hs)?;
        let args: Vec<CellRef> = sf.arg_values(sig, &w.heap, atom).into_iter().map(|(_, v)| v).collect();
        let mut others: Vec<usize> = (0..w.body.len()).filter(|&i| i != w.h).collect();
        others.sort_by_key(|&o| {
            let key = sf
                .sem_of(sig, &w.heap, w.body[o])
                .map(|s| w.heap.arc(sig, s, sf.rst).unwrap_or(s));
            let pos = key.and_then(|k| args.iter().position(|&a| a == k));
            (pos.unwrap_or(usize::MAX), o)
        });
        let order: Vec<Result<CellRef, CellRef>> = (0..w.body.len())
            .map(|i| if i == w.h { Err(atom) } else { Ok(w.body[i]) })
            .collect();
        self.thread(&mut w.heap, w.head, &order).ok()?;
        let mut roots = vec![w.head];
        roots.extend(others.iter().map(|&o| w.body[o]));
        roots.push(hs);
        let mut init: Vec<bool> = others.iter().map(|&o| w.init[o]).collect();
        init.push(true);
        Some(RuleTemplate::from_roots(name.to_string(), w.heap, &roots, init, line))
    }

    fn identity_rule(&self, mut w: Work, name: &str, line: usize) -> Option<RuleTemplate> {
        let order: Vec<Result<CellRef, CellRef>> = w.body.iter().map(|&b| Ok(b)).collect();
        self.thread(&mut w.heap, w.head, &order).ok()?;
        let others: Vec<usize> = (0..w.body.len()).filter(|&i| i != w.h).collect();
        let mut roots = vec![w.head];
        roots.extend(others.iter().map(|&o| w.body[o]));
        roots.push(w.body[w.h]);
        let mut init: Vec<bool> = others.iter().map(|&o| w.init[o]).collect();
        init.push(false);
        Some(RuleTemplate::from_roots(name.to_string(), w.heap, &roots, init, line))
    }

    fn lexical_rule(&self, word: &str, e: &FeatureStructure) -> Option<RuleTemplate> {
        let (sig, sf) = (self.sig, self.sf);
        let mut heap = Heap::new();
        let root = heap.import(e.heap(), &[e.root()])[0];
        let hs = sf.sem_of(sig, &heap, root)?;
        let atom = sf.atom(sig, &heap, hs)?;
        self.thread(&mut heap, root, &[Err(atom)]).ok()?;
        Some(RuleTemplate::from_roots(format!("lex_{word}"), heap, &[root, hs], vec![true], 0))
    }
}

/// Inverts a parsing grammar for generation.
pub fn invert(g: &Grammar, cfg: &InversionConfig) -> Result<InvertedGrammar, InversionError> {
    let violations = check_invertibility(g, cfg);
    if !violations.is_empty() {
        return Err(InversionError::NotInvertible(violations));
    }
    let old = &g.signature;
    let sig = extend_signature(g, cfg)?;
    let sf = SemFeats::resolve(&sig, cfg).map_err(InversionError::NotInvertible)?;
    let rules: Vec<RuleTemplate> = g.rules.iter().map(|r| transfer_rule(r, old, &sig)).collect();
    let entries: Vec<(String, FeatureStructure)> = g
        .lexicon
        .iter()
        .map(|e| {
            let fs = e.fs.transfer(old, &sig).expect("extended signature keeps all names");
            (e.word.clone(), generalize(&sig, &sf, &fs))
        })
        .collect();
    let heads: Vec<Option<(usize, HeadKind)>> = rules
        .iter()
        .map(|r| semantic_head(&sig, &sf, &r.heap, r.head, &r.body).ok())
        .collect();
    let ctx = Ctx {
        sig: &sig,
        sf: &sf,
        str_f: sig.feat_id(&cfg.str_feat).unwrap(),
        str_end: sig.feat_id(&cfg.str_end).unwrap(),
        ne_list: sig.type_id(NE_LIST).unwrap(),
        rules: &rules,
        heads,
        entries: &entries,
        max_unfold: cfg.max_unfold,
    };

    let mut out: Vec<RuleTemplate> = Vec::new();
    let mut warnings = Vec::new();
    let push = |out: &mut Vec<RuleTemplate>, r: RuleTemplate| {
        if !out.iter().any(|o| o.equivalent(&r, &sig)) {
            out.push(r);
        }
    };
    for r in &rules {
        let (h, kind) = semantic_head(&sig, &sf, &r.heap, r.head, &r.body).map_err(|reason| InversionError::Failure {
            rule: r.name.clone(),
            reason,
        })?;
        let w = Work::from_rule(r, h);
        match kind {
            HeadKind::Identity => {
                let inv = ctx.identity_rule(w, &r.name, r.line).ok_or_else(|| InversionError::Failure {
                    rule: r.name.clone(),
                    reason: format!("constituents cannot carry `{}`", cfg.str_feat),
                })?;
                push(&mut out, inv);
            }
            HeadKind::Functor => {
                let mut found = Vec::new();
                ctx.unfold(&w, &r.name, r.line, 0, &mut found);
                if found.is_empty() {
                    warnings.push(format!(
                        "rule `{}`: no lexical entry heads it; no inverted rule produced",
                        r.name
                    ));
                }
                for inv in found {
                    push(&mut out, inv);
                }
            }
        }
    }
    for (word, e) in &entries {
        if let Some(r) = ctx.lexical_rule(word, e) {
            push(&mut out, r);
        }
    }

    let mut kb: Vec<KbRecord> = g.kb.clone();
    let sf_old = SemFeats::resolve(old, cfg).map_err(InversionError::NotInvertible)?;
    for e in &g.lexicon {
        let h = e.fs.heap();
        let Some(atom) = sf_old.sem_of(old, h, e.fs.root()).and_then(|s| sf_old.atom(old, h, s)) else {
            continue;
        };
        let (predicate, arity) = sf_old.key(old, h, atom);
        let rec = KbRecord {
            predicate,
            arity,
            word: e.word.clone(),
        };
        if !kb.contains(&rec) {
            kb.push(rec);
        }
    }

    let grammar = Grammar {
        signature: sig,
        rules: out,
        lexicon: Vec::new(),
        empties: Vec::new(),
        kb,
        warnings,
        budget_exceeded: false,
    };
    InvertedGrammar::from_grammar(grammar, cfg.clone())
}

/// `e_list` of a signature.
pub(crate) fn e_list(sig: &Signature) -> TypeId {
    sig.type_id(E_LIST).expect("list types are always declared")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::ChartOptions;
    use crate::frontend::{infer_and_expand, parse_desc};
    use crate::grammar::GrammarOptions;
    use crate::machine::{compile_program, DEFAULT_REGISTER_CAP};

    const TINY: &str = include_str!("../../grammars/tiny.gr");

    fn tiny() -> Grammar {
        Grammar::from_source(TINY, &GrammarOptions::default()).unwrap()
    }

    fn gen_strings(inv: &InvertedGrammar, sem: &str) -> Vec<Vec<String>> {
        let sig = inv.signature();
        let p = compile_program(sig, &inv.grammar.rules, DEFAULT_REGISTER_CAP).unwrap();
        let sem = infer_and_expand(sig, &parse_desc(sem).unwrap()).unwrap();
        generate(inv, &p, &sem, ChartOptions::default()).unwrap().strings
    }

    const EVERY: &str = "(arg_2, prd:(forall, var:X, form:(conn:if, wff1:(B, prd:boy, a1:X), wff2:(S, prd:sleep, a1:X))), a1:B, a2:S)";

    #[test]
    fn tiny_inverts_and_generates() {
        let inv = invert(&tiny(), &InversionConfig::default()).unwrap();
        assert_eq!(inv.lexical_rules.len(), 3);
        assert_eq!(inv.grammar.kb.len(), 3);
        assert_eq!(gen_strings(&inv, EVERY), vec![vec!["every", "boy", "sleeps"]]);
        assert!(gen_strings(&inv, "(arg_1, prd:sleep, a1:sem)").is_empty());
    }

    #[test]
    fn inverted_source_reloads() {
        let inv = invert(&tiny(), &InversionConfig::default()).unwrap();
        let g = Grammar::from_source(&inv.to_source(), &GrammarOptions::default()).unwrap();
        let again = InvertedGrammar::from_grammar(g, InversionConfig::default()).unwrap();
        assert_eq!(again.lexical_rules, inv.lexical_rules);
        assert_eq!(again.grammar.kb, inv.grammar.kb);
        assert_eq!(gen_strings(&again, EVERY), vec![vec!["every", "boy", "sleeps"]]);
    }

    #[test]
    fn str_collision_is_an_error() {
        let cfg = InversionConfig {
            str_feat: "syn".into(),
            ..Default::default()
        };
        assert_eq!(invert(&tiny(), &cfg).unwrap_err(), InversionError::FeatureCollision("syn".into()));
    }

    #[test]
    fn violations_are_reported() {
        let src = TINY.replace(
            "(phrase, syn:(syn, cat:s), sem:(R6, sem))",
            "(phrase, syn:(syn, cat:s), sem:sem)",
        ) + "\nthing ---> (word, syn:(syn, cat:n), sem:sem).\n";
        let g = Grammar::from_source(&src, &GrammarOptions::default()).unwrap();
        let v = check_invertibility(&g, &InversionConfig::default());
        assert_eq!(v.len(), 2, "{v:?}");
        assert!(v[0].reason.contains("disconnected"));
        assert!(v[1].reason.contains("predicate-argument"));
        let anbn = Grammar::from_source(include_str!("../../grammars/anbn.gr"), &GrammarOptions::default()).unwrap();
        assert!(!check_invertibility(&anbn, &InversionConfig::default()).is_empty());
    }

    #[test]
    fn identity_rule_threads_str() {
        let src = TINY.to_string() + "\n(phrase, syn:(syn, cat:s), sem:X) ===> cat> (phrase, syn:(syn, cat:vp), sem:(X, lambda)).\n";
        let g = Grammar::from_source(&src, &GrammarOptions::default()).unwrap();
        let inv = invert(&g, &InversionConfig::default()).unwrap();
        let r = inv.grammar.rules.iter().find(|r| r.name == "rule3").unwrap();
        assert_eq!(r.arity(), 1);
        assert!(!r.initial_only[0]);
        let sig = inv.signature();
        let h = &r.heap;
        let (s, e) = (sig.feat_id("str").unwrap(), sig.feat_id("str_end").unwrap());
        assert_eq!(h.arc(sig, r.head, s), h.arc(sig, r.body[0], s));
        assert_eq!(h.arc(sig, r.head, e), h.arc(sig, r.body[0], e));
    }

    #[test]
    fn linearize_orders_arguments_first() {
        let inv = invert(&tiny(), &InversionConfig::default()).unwrap();
        let sig = inv.signature();
        let sem = infer_and_expand(sig, &parse_desc(EVERY).unwrap()).unwrap();
        let items = linearize_semantics(sig, &inv.config, &sem).unwrap();
        let prd = |fs: &FeatureStructure| {
            let mut cur = fs.clone();
            while let Some(r) = cur.at(sig, "rst") {
                cur = r;
            }
            sig.type_name(cur.at(sig, "prd").unwrap().ty()).to_string()
        };
        assert_eq!(items.iter().map(prd).collect::<Vec<_>>(), ["boy", "sleep", "forall"]);
        let bad = |d: &str| {
            let fs = infer_and_expand(sig, &parse_desc(d).unwrap()).unwrap();
            linearize_semantics(sig, &inv.config, &fs).unwrap_err()
        };
        assert_eq!(bad("(lambda, rst:(arg_1, prd:boy))"), InversionError::MalformedSemantics("the root".into()));
        assert_eq!(
            bad("(arg_2, prd:forall, a1:(arg_1, prd:boy), a2:(lambda, rst:arg_1))"),
            InversionError::MalformedSemantics("a2".into())
        );
    }
}
