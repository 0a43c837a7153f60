//! Reference implementations used as test oracles. They favor being
//! obviously right over being fast.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;

use revgram::frontend::RuleTemplate;
use revgram::fs::{Cell, CellRef, FeatureStructure, Heap};
use revgram::signature::{compile_signature, FeatId, Signature, SignatureError, TypeDecl, TypeId};

// ---------------------------------------------------------------- BCPOs

/// A random partial order: `parents[i]` are the immediate supertypes of
/// type `i` (type 0 is `bot`); optionally features introduced per type.
#[derive(Clone, Debug)]
pub struct RandomOrder {
    pub parents: Vec<Vec<usize>>,
    pub intro: Vec<Vec<(String, usize)>>,
}

pub fn type_name(i: usize) -> String {
    if i == 0 {
        "bot".into()
    } else {
        format!("t{i}")
    }
}

pub fn random_order(rng: &mut impl Rng, n: usize, extra_parent: f64) -> RandomOrder {
    let mut parents = vec![Vec::new()];
    for i in 1..n {
        let mut ps = vec![rng.gen_range(0..i)];
        while rng.gen_bool(extra_parent) {
            let p = rng.gen_range(0..i);
            if !ps.contains(&p) {
                ps.push(p);
            }
            if ps.len() >= 3 {
                break;
            }
        }
        parents.push(ps);
    }
    RandomOrder {
        intro: vec![Vec::new(); n],
        parents,
    }
}

impl RandomOrder {
    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn decls(&self) -> Vec<TypeDecl> {
        let n = self.len();
        (0..n)
            .map(|t| {
                let subs: Vec<String> = (0..n).filter(|&c| self.parents[c].contains(&t)).map(type_name).collect();
                let subs: Vec<&str> = subs.iter().map(String::as_str).collect();
                let intro: Vec<(String, String)> = self.intro[t].iter().map(|(f, r)| (f.clone(), type_name(*r))).collect();
                let intro: Vec<(&str, &str)> = intro.iter().map(|(f, r)| (f.as_str(), r.as_str())).collect();
                TypeDecl::new(&type_name(t), &subs, &intro)
            })
            .collect()
    }

    pub fn compile(&self) -> Result<Signature, SignatureError> {
        compile_signature(&self.decls())
    }

    /// `below[a][b]`: b is at least as specific as a.
    pub fn closure(&self) -> Vec<Vec<bool>> {
        let n = self.len();
        let mut below = vec![vec![false; n]; n];
        for (t, row) in below.iter_mut().enumerate() {
            row[t] = true;
        }
        // Parents have smaller indices, so one pass in index order suffices.
        for t in 0..n {
            for &p in &self.parents[t] {
                for a in 0..n {
                    if below[a][p] {
                        below[a][t] = true;
                    }
                }
            }
        }
        below
    }

    /// Least upper bound of every pair by enumeration. `Err` names a pair
    /// with several minimal upper bounds.
    pub fn brute_lub(&self) -> Result<Vec<Vec<Option<usize>>>, (usize, usize)> {
        let n = self.len();
        let below = self.closure();
        let mut out = vec![vec![None; n]; n];
        for a in 0..n {
            for b in 0..n {
                let ub: Vec<usize> = (0..n).filter(|&t| below[a][t] && below[b][t]).collect();
                let least: Vec<usize> = ub.iter().copied().filter(|&l| ub.iter().all(|&u| below[l][u])).collect();
                match least.len() {
                    1 => out[a][b] = Some(least[0]),
                    0 if ub.is_empty() => {}
                    _ => return Err((a, b)),
                }
            }
        }
        Ok(out)
    }

    /// Introduces `k` features at random types with random restrictions.
    pub fn add_features(&mut self, rng: &mut impl Rng, k: usize) {
        for i in 0..k {
            let at = rng.gen_range(0..self.len());
            let r = rng.gen_range(0..self.len());
            self.intro[at].push((format!("f{i}"), r));
        }
    }
}

// ------------------------------------------------------ naive structures

/// A feature graph with explicit nodes; a missing arc stands for the most
/// general structure of the feature's value restriction.
#[derive(Clone, Debug)]
pub struct Graph {
    pub nodes: Vec<(TypeId, BTreeMap<FeatId, usize>)>,
    pub root: usize,
}

pub fn to_graph(fs: &FeatureStructure, sig: &Signature) -> Graph {
    let h = fs.heap();
    let mut ids: HashMap<CellRef, usize> = HashMap::new();
    let mut nodes = Vec::new();
    fn go(
        h: &Heap,
        sig: &Signature,
        r: CellRef,
        ids: &mut HashMap<CellRef, usize>,
        nodes: &mut Vec<(TypeId, BTreeMap<FeatId, usize>)>,
    ) -> usize {
        let r = h.resolve(r);
        if let Some(&i) = ids.get(&r) {
            return i;
        }
        let i = nodes.len();
        ids.insert(r, i);
        nodes.push((h.type_of(r), BTreeMap::new()));
        if let Cell::Node { ty, .. } = h.cell(r) {
            let arcs: Vec<CellRef> = h.arcs_of(r).to_vec();
            for (k, &(f, _)) in sig.features_of(ty).iter().enumerate() {
                let c = go(h, sig, arcs[k], ids, nodes);
                nodes[i].1.insert(f, c);
            }
        }
        i
    }
    let root = go(h, sig, fs.root(), &mut ids, &mut nodes);
    Graph { nodes, root }
}

/// Unification by congruence closure over an explicit partition, then
/// type inference to a fixpoint.
pub fn naive_unify(sig: &Signature, a: &Graph, b: &Graph) -> Option<Graph> {
    let off = a.nodes.len();
    let mut nodes = a.nodes.clone();
    for (t, arcs) in &b.nodes {
        nodes.push((*t, arcs.iter().map(|(f, c)| (*f, c + off)).collect()));
    }
    naive_close(sig, nodes, &[(a.root, b.root + off)], a.root)
}

/// Identifies the given pairs of nodes and closes under congruence.
pub fn naive_close(
    sig: &Signature,
    nodes: Vec<(TypeId, BTreeMap<FeatId, usize>)>,
    pairs: &[(usize, usize)],
    root: usize,
) -> Option<Graph> {
    let n = nodes.len();
    let mut class: Vec<usize> = (0..n).collect();
    let relabel = |class: &mut Vec<usize>, x: usize, y: usize| {
        let (cx, cy) = (class[x], class[y]);
        if cx != cy {
            for c in class.iter_mut() {
                if *c == cy {
                    *c = cx;
                }
            }
        }
    };
    for &(x, y) in pairs {
        relabel(&mut class, x, y);
    }
    loop {
        let mut changed = false;
        for x in 0..n {
            for y in x + 1..n {
                if class[x] != class[y] {
                    continue;
                }
                for (f, &cx) in &nodes[x].1 {
                    if let Some(&cy) = nodes[y].1.get(f) {
                        if class[cx] != class[cy] {
                            relabel(&mut class, cx, cy);
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    // One node per class.
    let mut reps: Vec<usize> = class.clone();
    reps.sort();
    reps.dedup();
    let idx: HashMap<usize, usize> = reps.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut out: Vec<(TypeId, BTreeMap<FeatId, usize>)> = vec![(revgram::signature::BOT, BTreeMap::new()); reps.len()];
    for x in 0..n {
        let i = idx[&class[x]];
        out[i].0 = sig.lub(out[i].0, nodes[x].0)?;
        for (f, &c) in &nodes[x].1 {
            out[i].1.insert(*f, idx[&class[c]]);
        }
    }
    // A node carrying a feature is at least the feature's introducer, and
    // every value meets its restriction.
    loop {
        let mut changed = false;
        for i in 0..out.len() {
            let feats: Vec<(FeatId, usize)> = out[i].1.iter().map(|(f, c)| (*f, *c)).collect();
            for (f, c) in feats {
                let t = sig.lub(out[i].0, sig.introducer(f))?;
                if t != out[i].0 {
                    out[i].0 = t;
                    changed = true;
                }
                let r = sig.restriction(out[i].0, f)?;
                let ct = sig.lub(out[c].0, r)?;
                if ct != out[c].0 {
                    out[c].0 = ct;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    Some(Graph {
        nodes: out,
        root: idx[&class[root]],
    })
}

/// Node of a graph, or the most general structure of a type reached by a
/// missing arc (identified by where it hangs so it is never shared).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Pos {
    Node(usize),
    Virtual(usize, FeatId, u32),
}

/// `general` subsumes `specific`, treating missing arcs as most general
/// values.
pub fn naive_subsumes(sig: &Signature, general: &Graph, specific: &Graph) -> bool {
    let mut map: HashMap<Pos, Pos> = HashMap::new();
    let mut stack = vec![(Pos::Node(general.root), Pos::Node(specific.root))];
    let mut svt: HashMap<Pos, TypeId> = HashMap::new();
    let mut fresh = 0u32;
    while let Some((g, s)) = stack.pop() {
        if let Some(&m) = map.get(&g) {
            if m != s {
                return false;
            }
            continue;
        }
        map.insert(g, s);
        let Pos::Node(gi) = g else { unreachable!() };
        let gt = general.nodes[gi].0;
        let st = match s {
            Pos::Node(si) => specific.nodes[si].0,
            v => svt[&v],
        };
        if !sig.subsumes(gt, st) {
            return false;
        }
        for (&f, &gc) in &general.nodes[gi].1 {
            let sc = match s {
                Pos::Node(si) => match specific.nodes[si].1.get(&f) {
                    Some(&c) => Pos::Node(c),
                    None => {
                        fresh += 1;
                        let v = Pos::Virtual(si, f, fresh);
                        svt.insert(v, sig.restriction(st, f).unwrap());
                        v
                    }
                },
                Pos::Virtual(..) => {
                    fresh += 1;
                    let v = Pos::Virtual(usize::MAX, f, fresh);
                    svt.insert(v, sig.restriction(st, f).unwrap());
                    v
                }
            };
            stack.push((Pos::Node(gc), sc));
        }
    }
    true
}

pub fn naive_equivalent(sig: &Signature, a: &Graph, b: &Graph) -> bool {
    naive_subsumes(sig, a, b) && naive_subsumes(sig, b, a)
}

// ------------------------------------------------------- random structures

/// Types at least as specific as `t`.
pub fn subtypes(sig: &Signature, t: TypeId) -> Vec<TypeId> {
    sig.types().filter(|&u| sig.subsumes(t, u)).collect()
}

/// A random totally well-typed structure of a type below `ty`, with some
/// reentrancy.
pub fn random_fs_in(rng: &mut impl Rng, sig: &Signature, heap: &mut Heap, ty: TypeId, depth: usize, pool: &mut Vec<CellRef>) -> CellRef {
    if rng.gen_bool(0.25) {
        let ok: Vec<CellRef> = pool
            .iter()
            .copied()
            .filter(|&r| sig.subsumes(ty, heap.type_of(r)))
            .collect();
        if let Some(&r) = ok.choose(rng) {
            return r;
        }
    }
    let t = *subtypes(sig, ty).choose(rng).unwrap();
    if depth == 0 || rng.gen_bool(0.2) {
        let r = heap.alloc_unexpanded(t);
        pool.push(r);
        return r;
    }
    let r = heap.alloc_node(sig, t);
    pool.push(r);
    for &(f, restr) in sig.features_of(t) {
        let c = random_fs_in(rng, sig, heap, restr, depth - 1, pool);
        heap.set_arc(sig, r, f, c);
    }
    r
}

pub fn random_fs(rng: &mut impl Rng, sig: &Signature, depth: usize) -> FeatureStructure {
    let mut heap = Heap::new();
    let root_ty = *sig.types().collect::<Vec<_>>().choose(rng).unwrap();
    let r = random_fs_in(rng, sig, &mut heap, root_ty, depth, &mut Vec::new());
    FeatureStructure::extract(&heap, r)
}

/// A random signature with features that compiles, by rejection.
pub fn random_signature(rng: &mut impl Rng, n: usize, feats: usize) -> Signature {
    loop {
        let mut o = random_order(rng, n, 0.15);
        o.add_features(rng, feats);
        if let Ok(s) = o.compile() {
            return s;
        }
    }
}

/// A random rule over `sig`: head and body structures share nodes.
pub fn random_rule(rng: &mut impl Rng, sig: &Signature, arity: usize, depth: usize) -> RuleTemplate {
    let mut heap = Heap::new();
    let mut pool = Vec::new();
    let types: Vec<TypeId> = sig.types().collect();
    let body: Vec<CellRef> = (0..arity)
        .map(|_| {
            let t = *types.choose(rng).unwrap();
            random_fs_in(rng, sig, &mut heap, t, depth, &mut pool)
        })
        .collect();
    let t = *types.choose(rng).unwrap();
    let head = random_fs_in(rng, sig, &mut heap, t, depth, &mut pool);
    RuleTemplate {
        name: "r".into(),
        heap,
        head,
        body,
        initial_only: vec![false; arity],
        line: 0,
    }
}

/// Constituents for `rule`: a mix of random structures and copies of the
/// rule's own body elements, so that some applications succeed.
pub fn constituents(rng: &mut impl Rng, sig: &Signature, rule: &RuleTemplate) -> Vec<FeatureStructure> {
    rule.body
        .iter()
        .map(|&b| {
            if rng.gen_bool(0.6) {
                FeatureStructure::extract(&rule.heap, b)
            } else {
                random_fs(rng, sig, 2)
            }
        })
        .collect()
}

/// Reference rule application: one graph holding the template and the
/// constituents, body roots identified with constituent roots.
pub fn naive_apply(sig: &Signature, rule: &RuleTemplate, constituents: &[FeatureStructure]) -> Option<Graph> {
    let tpl = to_graph_roots(&rule.heap, sig, &rule.body.iter().chain([&rule.head]).copied().collect::<Vec<_>>());
    let mut nodes = tpl.0;
    let mut pairs = Vec::new();
    for (i, c) in constituents.iter().enumerate() {
        let g = to_graph(c, sig);
        let off = nodes.len();
        for (t, arcs) in g.nodes {
            nodes.push((t, arcs.into_iter().map(|(f, x)| (f, x + off)).collect()));
        }
        pairs.push((tpl.1[i], g.root + off));
    }
    let head = tpl.1[rule.body.len()];
    naive_close(sig, nodes, &pairs, head)
}

/// Graph of everything reachable from `roots` in `h`.
pub fn to_graph_roots(h: &Heap, sig: &Signature, roots: &[CellRef]) -> (Vec<(TypeId, BTreeMap<FeatId, usize>)>, Vec<usize>) {
    let mut ids: HashMap<CellRef, usize> = HashMap::new();
    let mut nodes: Vec<(TypeId, BTreeMap<FeatId, usize>)> = Vec::new();
    let mut out = Vec::new();
    for &root in roots {
        let mut stack = vec![h.resolve(root)];
        while let Some(r) = stack.pop() {
            if ids.contains_key(&r) {
                continue;
            }
            ids.insert(r, nodes.len());
            nodes.push((h.type_of(r), BTreeMap::new()));
            stack.extend(h.arcs_of(r).iter().map(|&a| h.resolve(a)));
        }
        out.push(ids[&h.resolve(root)]);
    }
    for (&r, &i) in &ids {
        if let Cell::Node { ty, .. } = h.cell(r) {
            for (k, &(f, _)) in sig.features_of(ty).iter().enumerate() {
                nodes[i].1.insert(f, ids[&h.resolve(h.arcs_of(r)[k])]);
            }
        }
    }
    (nodes, out)
}

// -------------------------------------------------------------- CKY

/// A grammar over atomic categories `c0..ck` and words `w0..wm`:
/// binary rules, unary rules `A -> B` only with `A < B` (no cycles) and a
/// lexicon.
#[derive(Clone, Debug)]
pub struct Cfg {
    pub cats: usize,
    pub words: usize,
    pub binary: Vec<(usize, usize, usize)>,
    pub unary: Vec<(usize, usize)>,
    pub lexicon: Vec<(usize, usize)>,
}

pub fn random_cfg(rng: &mut impl Rng) -> Cfg {
    let words = rng.gen_range(2..=3);
    random_cfg_with(rng, words)
}

pub fn random_cfg_with(rng: &mut impl Rng, words: usize) -> Cfg {
    let cats = rng.gen_range(2..=5);
    let binary = (0..rng.gen_range(1..=5))
        .map(|_| (rng.gen_range(0..cats), rng.gen_range(0..cats), rng.gen_range(0..cats)))
        .collect();
    let unary = (0..rng.gen_range(0..=2))
        .filter_map(|_| {
            let a = rng.gen_range(0..cats);
            let b = rng.gen_range(0..cats);
            (a < b).then_some((a, b))
        })
        .collect();
    let mut lexicon: Vec<(usize, usize)> = (0..words).map(|w| (w, rng.gen_range(0..cats))).collect();
    if rng.gen_bool(0.5) {
        lexicon.push((rng.gen_range(0..words), rng.gen_range(0..cats)));
    }
    lexicon.sort();
    lexicon.dedup();
    Cfg {
        cats,
        words,
        binary,
        unary,
        lexicon,
    }
}

impl Cfg {
    pub fn source(&self) -> String {
        let cats: Vec<String> = (0..self.cats).map(|c| format!("c{c}")).collect();
        let mut s = format!("bot sub [{}].\n", cats.join(", "));
        for &(a, b, c) in &self.binary {
            s += &format!("c{a} ===> cat> c{b}, cat> c{c}.\n");
        }
        for &(a, b) in &self.unary {
            s += &format!("c{a} ===> cat> c{b}.\n");
        }
        for &(w, c) in &self.lexicon {
            s += &format!("w{w} ---> c{c}.\n");
        }
        s
    }

    /// Number of derivations of each category over the whole input.
    pub fn cky(&self, input: &[usize]) -> Vec<u64> {
        let n = input.len();
        let k = self.cats;
        if n == 0 {
            return vec![0; k];
        }
        let mut t = vec![vec![vec![0u64; k]; n + 1]; n + 1];
        let close = |cell: &mut Vec<u64>| {
            for b in (0..k).rev() {
                for &(a, bb) in &self.unary {
                    if bb == b {
                        cell[a] += cell[b];
                    }
                }
            }
        };
        for (i, &w) in input.iter().enumerate() {
            for &(lw, c) in &self.lexicon {
                if lw == w {
                    t[i][i + 1][c] += 1;
                }
            }
            close(&mut t[i][i + 1]);
        }
        for len in 2..=n {
            for i in 0..=n - len {
                let j = i + len;
                let mut cell = vec![0u64; k];
                for m in i + 1..j {
                    for &(a, b, c) in &self.binary {
                        cell[a] += t[i][m][b] * t[m][j][c];
                    }
                }
                close(&mut cell);
                t[i][j] = cell;
            }
        }
        t[0][n].clone()
    }
}
