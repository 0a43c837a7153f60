//! Type hierarchy and appropriateness.
//!
//! A [`Signature`] is compiled once from the `sub`/`intro` clauses of a
//! grammar and is immutable afterwards. Every table the unifier touches on
//! its hot path (subsumption, least upper bounds, arc layouts) is
//! precomputed densely here.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Dense index of a type. `TypeId(0)` is always `bot`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeId(pub u32);

/// Dense index of a feature name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeatId(pub u32);

pub const BOT: TypeId = TypeId(0);
pub const BOT_NAME: &str = "bot";

/// Types and features behind list notation (`[]`, `[H|T]`).
pub const LIST: &str = "list";
pub const E_LIST: &str = "e_list";
pub const NE_LIST: &str = "ne_list";
pub const HD: &str = "hd";
pub const TL: &str = "tl";

impl TypeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl FeatId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// One `name sub [..] intro [..].` clause, as written.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    pub subs: Vec<String>,
    pub intro: Vec<(String, String)>,
    pub line: usize,
}

impl TypeDecl {
    pub fn new(name: &str, subs: &[&str], intro: &[(&str, &str)]) -> Self {
        TypeDecl {
            name: name.to_string(),
            subs: subs.iter().map(|s| s.to_string()).collect(),
            intro: intro
                .iter()
                .map(|(f, t)| (f.to_string(), t.to_string()))
                .collect(),
            line: 0,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SignatureError {
    #[error("no signature declarations")]
    Empty,
    #[error("type `bot` must be declared as the most general type")]
    MissingBot,
    #[error("`bot` cannot have a supertype")]
    BotHasSupertype,
    #[error("subtype declarations form a cycle: {}", .0.join(" < "))]
    SubtypeCycle(Vec<String>),
    #[error("types `{0}` and `{1}` have no least upper bound (minimal upper bounds: {bounds})", bounds = .2.join(", "))]
    NotBoundedComplete(String, String, Vec<String>),
    #[error("feature `{feature}` has no unique introducing type (declared at: {})", .declared_at.join(", "))]
    FeatureIntroductionViolation {
        feature: String,
        declared_at: Vec<String>,
    },
    #[error("inconsistent value restrictions for feature `{feature}` at type `{ty}`")]
    AppropriatenessNonMonotone { ty: String, feature: String },
    #[error("unknown type `{0}` (line {1})")]
    UnknownType(String, usize),
    #[error("type `{0}` is not below `bot`")]
    UnrootedType(String),
    #[error("feature `{feature}` declared twice at type `{ty}`")]
    DuplicateFeature { ty: String, feature: String },
}

/// Fixed-width bit set over type ids.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64).max(1)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn union_with(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= *b;
        }
    }
    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }
    fn is_subset(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &bits)| {
            (0..64).filter(move |b| bits & (1 << b) != 0).map(move |b| w * 64 + b)
        })
    }
    fn first(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }
}

const NO_LUB: u32 = u32::MAX;
const NO_SLOT: u16 = u16::MAX;

/// A compiled type hierarchy with appropriateness conditions.
#[derive(Clone, Debug)]
pub struct Signature {
    type_names: Vec<String>,
    type_index: HashMap<String, TypeId>,
    parents: Vec<Vec<TypeId>>,
    children: Vec<Vec<TypeId>>,
    /// `subsumes[a * n + b]` iff `a` is at least as general as `b`.
    subsumes: Vec<bool>,
    lub: Vec<u32>,
    feat_names: Vec<String>,
    feat_index: HashMap<String, FeatId>,
    introducer: Vec<TypeId>,
    approp: Vec<Vec<(FeatId, TypeId)>>,
    /// `slots[t * nfeats + f]` = arc position of `f` at `t`.
    slots: Vec<u16>,
    loops: Vec<bool>,
    decls: Vec<TypeDecl>,
}

impl PartialEq for Signature {
    fn eq(&self, other: &Self) -> bool {
        self.type_names == other.type_names
            && self.feat_names == other.feat_names
            && self.parents == other.parents
            && self.approp == other.approp
    }
}

/// Compiles signature clauses. Clauses naming the same type are merged.
pub fn compile_signature(decls: &[TypeDecl]) -> Result<Signature, SignatureError> {
    if decls.is_empty() {
        return Err(SignatureError::Empty);
    }
    if !decls.iter().any(|d| d.name == BOT_NAME) {
        return Err(SignatureError::MissingBot);
    }

    // Names in order of first appearance.
    let mut order: Vec<String> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut note = |name: &str, order: &mut Vec<String>| {
        if !seen.contains_key(name) {
            seen.insert(name.to_string(), order.len());
            order.push(name.to_string());
        }
    };
    note(BOT_NAME, &mut order);
    for d in decls {
        note(&d.name, &mut order);
    }
    for d in decls {
        for s in &d.subs {
            note(s, &mut order);
        }
    }
    let mut pos: HashMap<&str, usize> = HashMap::new();
    for (i, n) in order.iter().enumerate() {
        pos.insert(n.as_str(), i);
    }
    let m = order.len();

    let mut sub_edges: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut sup_edges: Vec<Vec<usize>> = vec![Vec::new(); m];
    for d in decls {
        let p = pos[d.name.as_str()];
        for s in &d.subs {
            let c = pos[s.as_str()];
            if !sub_edges[p].contains(&c) {
                sub_edges[p].push(c);
                sup_edges[c].push(p);
            }
        }
    }
    if !sup_edges[0].is_empty() {
        if let Some(cycle) = find_cycle(&sub_edges, &order) {
            return Err(SignatureError::SubtypeCycle(cycle));
        }
        return Err(SignatureError::BotHasSupertype);
    }
    if let Some(cycle) = find_cycle(&sub_edges, &order) {
        return Err(SignatureError::SubtypeCycle(cycle));
    }
    for (i, sups) in sup_edges.iter().enumerate().skip(1) {
        if sups.is_empty() {
            return Err(SignatureError::UnrootedType(order[i].clone()));
        }
    }

    // Kahn's algorithm, ties broken by first appearance: parents get lower ids.
    let mut indeg: Vec<usize> = sup_edges.iter().map(|s| s.len()).collect();
    let mut ready: std::collections::BTreeSet<usize> = [0].into_iter().collect();
    let mut topo = Vec::with_capacity(m);
    while let Some(&next) = ready.iter().next() {
        ready.remove(&next);
        topo.push(next);
        for &c in &sub_edges[next] {
            indeg[c] -= 1;
            if indeg[c] == 0 {
                ready.insert(c);
            }
        }
    }
    debug_assert_eq!(topo.len(), m);
    let mut id_of = vec![0usize; m];
    for (id, &p) in topo.iter().enumerate() {
        id_of[p] = id;
    }
    let n = m;
    let type_names: Vec<String> = topo.iter().map(|&p| order[p].clone()).collect();
    let type_index: HashMap<String, TypeId> = type_names
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), TypeId(i as u32)))
        .collect();
    let mut parents = vec![Vec::new(); n];
    let mut children = vec![Vec::new(); n];
    for p in 0..m {
        for &c in &sub_edges[p] {
            parents[id_of[c]].push(TypeId(id_of[p] as u32));
            children[id_of[p]].push(TypeId(id_of[c] as u32));
        }
    }

    // up[t]: all types at least as general as t. down[t]: all at least as specific.
    let mut up: Vec<Bits> = Vec::with_capacity(n);
    for t in 0..n {
        let mut b = Bits::new(n);
        b.set(t);
        for p in &parents[t] {
            let pu = up[p.index()].clone();
            b.union_with(&pu);
        }
        up.push(b);
    }
    let mut down: Vec<Bits> = (0..n).map(|_| Bits::new(n)).collect();
    for (t, u) in up.iter().enumerate() {
        for a in u.iter() {
            down[a].set(t);
        }
    }
    let mut subsumes = vec![false; n * n];
    for (a, d) in down.iter().enumerate() {
        for b in d.iter() {
            subsumes[a * n + b] = true;
        }
    }

    let mut lub = vec![NO_LUB; n * n];
    for a in 0..n {
        for b in a..n {
            let common = down[a].and(&down[b]);
            let result = match common.first() {
                None => NO_LUB,
                Some(cand) => {
                    if common.is_subset(&down[cand]) {
                        cand as u32
                    } else {
                        let minimal: Vec<String> = common
                            .iter()
                            .filter(|&t| up[t].and(&common).iter().count() == 1)
                            .map(|t| type_names[t].clone())
                            .collect();
                        return Err(SignatureError::NotBoundedComplete(
                            type_names[a].clone(),
                            type_names[b].clone(),
                            minimal,
                        ));
                    }
                }
            };
            lub[a * n + b] = result;
            lub[b * n + a] = result;
        }
    }

    // Features.
    let mut feat_names: Vec<String> = Vec::new();
    let mut feat_index: HashMap<String, FeatId> = HashMap::new();
    // per feature: (declaring type, restriction)
    let mut feat_decls: Vec<Vec<(TypeId, TypeId)>> = Vec::new();
    for d in decls {
        let t = type_index[&d.name];
        for (f, r) in &d.intro {
            let rt = *type_index
                .get(r)
                .ok_or_else(|| SignatureError::UnknownType(r.clone(), d.line))?;
            let fid = *feat_index.entry(f.clone()).or_insert_with(|| {
                feat_names.push(f.clone());
                feat_decls.push(Vec::new());
                FeatId(feat_names.len() as u32 - 1)
            });
            if feat_decls[fid.index()].iter().any(|(dt, _)| *dt == t) {
                return Err(SignatureError::DuplicateFeature {
                    ty: d.name.clone(),
                    feature: f.clone(),
                });
            }
            feat_decls[fid.index()].push((t, rt));
        }
    }
    let nf = feat_names.len();
    let mut introducer = Vec::with_capacity(nf);
    for (f, ds) in feat_decls.iter().enumerate() {
        let intro = ds
            .iter()
            .map(|(t, _)| *t)
            .find(|&cand| ds.iter().all(|(t, _)| subsumes[cand.index() * n + t.index()]));
        match intro {
            Some(t) => introducer.push(t),
            None => {
                return Err(SignatureError::FeatureIntroductionViolation {
                    feature: feat_names[f].clone(),
                    declared_at: ds.iter().map(|(t, _)| type_names[t.index()].clone()).collect(),
                })
            }
        }
    }
    // Renumber features by (introducer, first appearance) so that ids do
    // not depend on where in the text a feature is first mentioned.
    let mut perm: Vec<usize> = (0..nf).collect();
    perm.sort_by_key(|&f| (introducer[f], f));
    let feat_names: Vec<String> = perm.iter().map(|&f| feat_names[f].clone()).collect();
    let feat_decls: Vec<Vec<(TypeId, TypeId)>> = perm.iter().map(|&f| feat_decls[f].clone()).collect();
    let introducer: Vec<TypeId> = perm.iter().map(|&f| introducer[f]).collect();
    let feat_index: HashMap<String, FeatId> = feat_names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), FeatId(i as u32)))
        .collect();

    let mut approp: Vec<Vec<(FeatId, TypeId)>> = vec![Vec::new(); n];
    let mut slots = vec![NO_SLOT; n * nf];
    for t in 0..n {
        let mut feats: Vec<(FeatId, TypeId)> = Vec::new();
        for f in 0..nf {
            if !subsumes[introducer[f].index() * n + t] {
                continue;
            }
            let mut restr = BOT.0;
            for (dt, r) in &feat_decls[f] {
                if subsumes[dt.index() * n + t] {
                    restr = lub[restr as usize * n + r.index()];
                    if restr == NO_LUB {
                        return Err(SignatureError::AppropriatenessNonMonotone {
                            ty: type_names[t].clone(),
                            feature: feat_names[f].clone(),
                        });
                    }
                }
            }
            feats.push((FeatId(f as u32), TypeId(restr)));
        }
        feats.sort_by_key(|(f, _)| (introducer[f.index()], *f));
        for (slot, (f, _)) in feats.iter().enumerate() {
            slots[t * nf + f.index()] = slot as u16;
        }
        approp[t] = feats;
    }

    let loops = (0..n).map(|t| reaches_itself(t, &approp)).collect();

    Ok(Signature {
        type_names,
        type_index,
        parents,
        children,
        subsumes,
        lub,
        feat_names,
        feat_index,
        introducer,
        approp,
        slots,
        loops,
        decls: decls.to_vec(),
    })
}

fn reaches_itself(start: usize, approp: &[Vec<(FeatId, TypeId)>]) -> bool {
    let mut seen = vec![false; approp.len()];
    let mut stack: Vec<usize> = approp[start].iter().map(|(_, r)| r.index()).collect();
    while let Some(t) = stack.pop() {
        if t == start {
            return true;
        }
        if !std::mem::replace(&mut seen[t], true) {
            stack.extend(approp[t].iter().map(|(_, r)| r.index()));
        }
    }
    false
}

fn find_cycle(edges: &[Vec<usize>], names: &[String]) -> Option<Vec<String>> {
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; edges.len()];
    let mut path = Vec::new();
    fn dfs(
        v: usize,
        edges: &[Vec<usize>],
        state: &mut [u8],
        path: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        state[v] = 1;
        path.push(v);
        for &w in &edges[v] {
            if state[w] == 1 {
                let start = path.iter().position(|&x| x == w).unwrap();
                let mut cyc = path[start..].to_vec();
                cyc.push(w);
                return Some(cyc);
            }
            if state[w] == 0 {
                if let Some(c) = dfs(w, edges, state, path) {
                    return Some(c);
                }
            }
        }
        path.pop();
        state[v] = 2;
        None
    }
    for v in 0..edges.len() {
        if state[v] == 0 {
            if let Some(c) = dfs(v, edges, &mut state, &mut path) {
                return Some(c.into_iter().map(|i| names[i].clone()).collect());
            }
        }
    }
    None
}

impl Signature {
    pub fn type_count(&self) -> usize {
        self.type_names.len()
    }

    pub fn feature_count(&self) -> usize {
        self.feat_names.len()
    }

    pub fn types(&self) -> impl Iterator<Item = TypeId> {
        (0..self.type_names.len() as u32).map(TypeId)
    }

    pub fn type_name(&self, t: TypeId) -> &str {
        &self.type_names[t.index()]
    }

    pub fn feat_name(&self, f: FeatId) -> &str {
        &self.feat_names[f.index()]
    }

    pub fn type_id(&self, name: &str) -> Option<TypeId> {
        self.type_index.get(name).copied()
    }

    pub fn feat_id(&self, name: &str) -> Option<FeatId> {
        self.feat_index.get(name).copied()
    }

    /// Immediate supertypes as declared.
    pub fn parents(&self, t: TypeId) -> &[TypeId] {
        &self.parents[t.index()]
    }

    /// Immediate subtypes as declared.
    pub fn children(&self, t: TypeId) -> &[TypeId] {
        &self.children[t.index()]
    }

    /// `true` iff `general` is at least as general as `specific`.
    #[inline]
    pub fn subsumes(&self, general: TypeId, specific: TypeId) -> bool {
        self.subsumes[general.index() * self.type_names.len() + specific.index()]
    }

    /// Least upper bound (unification of types); `None` when inconsistent.
    #[inline]
    pub fn lub(&self, a: TypeId, b: TypeId) -> Option<TypeId> {
        let v = self.lub[a.index() * self.type_names.len() + b.index()];
        (v != NO_LUB).then_some(TypeId(v))
    }

    /// All features appropriate for `t` with their value restrictions, in arc order.
    pub fn features_of(&self, t: TypeId) -> &[(FeatId, TypeId)] {
        &self.approp[t.index()]
    }

    pub fn arity(&self, t: TypeId) -> usize {
        self.approp[t.index()].len()
    }

    /// Arc position of `f` in nodes of type `t`.
    #[inline]
    pub fn slot(&self, t: TypeId, f: FeatId) -> Option<usize> {
        let s = self.slots[t.index() * self.feat_names.len() + f.index()];
        (s != NO_SLOT).then_some(s as usize)
    }

    pub fn restriction(&self, t: TypeId, f: FeatId) -> Option<TypeId> {
        self.slot(t, f).map(|s| self.approp[t.index()][s].1)
    }

    pub fn introducer(&self, f: FeatId) -> TypeId {
        self.introducer[f.index()]
    }

    /// Whether `t` lies on an appropriateness loop.
    pub fn has_loop(&self, t: TypeId) -> bool {
        self.loops[t.index()]
    }

    pub fn decls(&self) -> &[TypeDecl] {
        &self.decls
    }

    /// Renders the signature back to clause syntax, one clause per type.
    pub fn to_source(&self) -> String {
        let mut out = String::new();
        for t in self.types() {
            let subs: Vec<&str> = self.children(t).iter().map(|c| self.type_name(*c)).collect();
            let intro: Vec<String> = self
                .features_of(t)
                .iter()
                .filter(|(f, r)| {
                    self.introducer(*f) == t
                        || self
                            .parents(t)
                            .iter()
                            .all(|p| self.restriction(*p, *f) != Some(*r))
                })
                .map(|(f, r)| format!("{}:{}", self.feat_name(*f), self.type_name(*r)))
                .collect();
            out.push_str(self.type_name(t));
            out.push_str(" sub [");
            out.push_str(&subs.join(", "));
            out.push(']');
            if !intro.is_empty() {
                out.push_str(" intro [");
                out.push_str(&intro.join(", "));
                out.push(']');
            }
            out.push_str(".\n");
        }
        out
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_source())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(decls: &[TypeDecl]) -> Result<Signature, SignatureError> {
        compile_signature(decls)
    }

    #[test]
    fn incomparable_leaves_have_no_lub() {
        let s = sig(&[TypeDecl::new("bot", &["a", "b"], &[])]).unwrap();
        let (a, b) = (s.type_id("a").unwrap(), s.type_id("b").unwrap());
        assert_eq!(s.lub(a, b), None);
        assert_eq!(s.lub(BOT, a), Some(a));
        assert_eq!(s.lub(a, a), Some(a));
    }

    #[test]
    fn diamond_without_join_is_rejected() {
        let err = sig(&[
            TypeDecl::new("bot", &["a", "b"], &[]),
            TypeDecl::new("a", &["c", "d"], &[]),
            TypeDecl::new("b", &["c", "d"], &[]),
        ])
        .unwrap_err();
        match err {
            SignatureError::NotBoundedComplete(x, y, mut bounds) => {
                assert_eq!((x.as_str(), y.as_str()), ("a", "b"));
                bounds.sort();
                assert_eq!(bounds, vec!["c", "d"]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_bot() {
        assert_eq!(
            sig(&[TypeDecl::new("a", &["b"], &[])]).unwrap_err(),
            SignatureError::MissingBot
        );
    }

    #[test]
    fn subtype_cycle() {
        let err = sig(&[
            TypeDecl::new("bot", &["a"], &[]),
            TypeDecl::new("a", &["b"], &[]),
            TypeDecl::new("b", &["a"], &[]),
        ])
        .unwrap_err();
        assert!(matches!(err, SignatureError::SubtypeCycle(_)), "{err:?}");
    }

    #[test]
    fn feature_needs_unique_introducer() {
        let err = sig(&[
            TypeDecl::new("bot", &["a", "b"], &[]),
            TypeDecl::new("a", &[], &[("f", "bot")]),
            TypeDecl::new("b", &[], &[("f", "bot")]),
        ])
        .unwrap_err();
        assert!(matches!(err, SignatureError::FeatureIntroductionViolation { .. }));
    }

    #[test]
    fn inconsistent_restrictions_rejected() {
        let err = sig(&[
            TypeDecl::new("bot", &["t", "x", "y"], &[]),
            TypeDecl::new("t", &["u"], &[("f", "x")]),
            TypeDecl::new("u", &[], &[("f", "y")]),
        ])
        .unwrap_err();
        assert_eq!(
            err,
            SignatureError::AppropriatenessNonMonotone {
                ty: "u".into(),
                feature: "f".into()
            }
        );
    }

    #[test]
    fn features_accumulate_down_the_hierarchy() {
        let s = sig(&[
            TypeDecl::new("bot", &["t", "a", "b"], &[]),
            TypeDecl::new("t", &["t2"], &[("f", "a")]),
            TypeDecl::new("t2", &[], &[("g", "b")]),
        ])
        .unwrap();
        let id = |n| s.type_id(n).unwrap();
        let fid = |n| s.feat_id(n).unwrap();
        assert!(s.features_of(BOT).is_empty());
        assert_eq!(
            s.features_of(id("t2")),
            &[(fid("f"), id("a")), (fid("g"), id("b"))]
        );
        assert_eq!(s.slot(id("t2"), fid("g")), Some(1));
        assert_eq!(s.slot(id("t"), fid("g")), None);
    }

    #[test]
    fn middle_type_tightens_restriction() {
        let s = sig(&[
            TypeDecl::new("bot", &["top", "v"], &[]),
            TypeDecl::new("v", &["w"], &[]),
            TypeDecl::new("w", &["x"], &[]),
            TypeDecl::new("top", &["mid"], &[("f", "v")]),
            TypeDecl::new("mid", &["leaf"], &[("f", "w")]),
        ])
        .unwrap();
        let id = |n| s.type_id(n).unwrap();
        let f = s.feat_id("f").unwrap();
        assert_eq!(s.restriction(id("leaf"), f), Some(id("w")));
        assert_eq!(s.restriction(id("top"), f), Some(id("v")));
        assert_eq!(s.introducer(f), id("top"));
    }

    #[test]
    fn self_restricted_feature_is_a_loop() {
        let s = sig(&[
            TypeDecl::new("bot", &["t", "u"], &[]),
            TypeDecl::new("t", &[], &[("f", "t")]),
            TypeDecl::new("u", &[], &[("g", "bot")]),
        ])
        .unwrap();
        assert!(s.has_loop(s.type_id("t").unwrap()));
        assert!(!s.has_loop(s.type_id("u").unwrap()));
        assert!(!s.has_loop(BOT));
    }

    #[test]
    fn bot_is_index_zero_and_parents_precede_children() {
        let s = sig(&[
            TypeDecl::new("a", &["c"], &[]),
            TypeDecl::new("bot", &["b", "a"], &[]),
        ])
        .unwrap();
        assert_eq!(s.type_name(BOT), "bot");
        for t in s.types() {
            for p in s.parents(t) {
                assert!(p.0 < t.0);
            }
        }
    }

    #[test]
    fn unrooted_type() {
        let err = sig(&[TypeDecl::new("bot", &["a"], &[]), TypeDecl::new("z", &[], &[])]).unwrap_err();
        assert_eq!(err, SignatureError::UnrootedType("z".into()));
    }

    #[test]
    fn source_rendering_recompiles_identically() {
        let s = sig(&[
            TypeDecl::new("bot", &["t", "a"], &[]),
            TypeDecl::new("t", &["t2"], &[("f", "a")]),
            TypeDecl::new("t2", &[], &[("g", "t")]),
        ])
        .unwrap();
        let text = s.to_source();
        let again = crate::frontend::parse_grammar(&text).unwrap();
        let s2 = compile_signature(&again.signature).unwrap();
        assert_eq!(s, s2);
    }
}
