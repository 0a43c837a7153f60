//! Feature structures stored as tagged cells on a heap.
//!
//! A [`Heap`] is split into a frozen prefix and a working suffix. Frozen
//! cells are never written; unification, type coercion and lazy expansion
//! only touch working cells. A failed attempt is rolled back by truncating
//! the working region, a successful one is compacted onto the frozen
//! prefix with [`Heap::freeze`].

pub(crate) mod print;
mod subsume;

use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use thiserror::Error;

use crate::signature::{FeatId, Signature, TypeId, BOT};

pub use print::{from_json, print_fs, JsonError, PrintStyle};
pub(crate) use print::print_many;
pub use subsume::{equivalent, equivalent_many, subsumes, subsumes_many};

/// Index of a cell on a [`Heap`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellRef(pub u32);

impl CellRef {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cell {
    /// A node of type `ty` whose `len` arcs live at `arcs..arcs + len` in the
    /// arc store, positionally aligned with `Signature::features_of(ty)`.
    Node { ty: TypeId, arcs: u32, len: u32 },
    Ref(CellRef),
    /// The most general totally well-typed structure of this type.
    Unexpanded(TypeId),
}

/// A unification failure: the two types met at `path` have no join.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("type clash at path {path:?}")]
pub struct Clash {
    pub path: Vec<FeatId>,
    pub left: TypeId,
    pub right: TypeId,
}

impl Clash {
    fn new(left: TypeId, right: TypeId) -> Self {
        Clash {
            path: Vec::new(),
            left,
            right,
        }
    }

    fn under(mut self, f: FeatId) -> Self {
        self.path.insert(0, f);
        self
    }

    pub fn describe(&self, sig: &Signature) -> String {
        let path: Vec<&str> = self.path.iter().map(|f| sig.feat_name(*f)).collect();
        format!(
            "`{}` and `{}` do not unify at {}",
            sig.type_name(self.left),
            sig.type_name(self.right),
            if path.is_empty() {
                "the root".to_string()
            } else {
                path.join(":")
            }
        )
    }
}

#[derive(Clone, Debug, Default)]
pub struct Heap {
    cells: Vec<Cell>,
    arcs: Vec<CellRef>,
    frozen_cells: usize,
    frozen_arcs: usize,
    expansions: u64,
}

/// A compacted copy of part of a working region, relocatable onto any heap
/// whose working region is empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snapshot {
    base_cells: usize,
    base_arcs: usize,
    cells: Vec<Cell>,
    arcs: Vec<CellRef>,
    pub regs: Vec<Option<CellRef>>,
}

impl Snapshot {
    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }
}

impl Heap {
    pub fn new() -> Self {
        Heap::default()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn frozen_len(&self) -> usize {
        self.frozen_cells
    }

    pub fn working_len(&self) -> usize {
        self.cells.len() - self.frozen_cells
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn arc_store(&self) -> &[CellRef] {
        &self.arcs
    }

    /// Number of lazy expansions performed so far.
    pub fn expansions(&self) -> u64 {
        self.expansions
    }

    #[inline]
    pub fn cell(&self, r: CellRef) -> Cell {
        self.cells[r.index()]
    }

    fn push(&mut self, c: Cell) -> CellRef {
        let r = CellRef(self.cells.len() as u32);
        self.cells.push(c);
        r
    }

    pub fn alloc_unexpanded(&mut self, ty: TypeId) -> CellRef {
        self.push(Cell::Unexpanded(ty))
    }

    /// A node of type `ty` whose arcs are fresh placeholders.
    pub fn alloc_node(&mut self, sig: &Signature, ty: TypeId) -> CellRef {
        let feats = sig.features_of(ty);
        let start = self.arcs.len();
        for &(_, restr) in feats {
            let v = self.alloc_unexpanded(restr);
            self.arcs.push(v);
        }
        self.push(Cell::Node {
            ty,
            arcs: start as u32,
            len: feats.len() as u32,
        })
    }

    /// Follows `Ref` links without modifying the heap.
    #[inline]
    pub fn resolve(&self, mut r: CellRef) -> CellRef {
        while let Cell::Ref(next) = self.cells[r.index()] {
            r = next;
        }
        r
    }

    /// Follows `Ref` links, halving paths through working cells.
    #[inline]
    pub fn deref(&mut self, mut r: CellRef) -> CellRef {
        loop {
            match self.cells[r.index()] {
                Cell::Ref(next) => {
                    if let Cell::Ref(next2) = self.cells[next.index()] {
                        if r.index() >= self.frozen_cells {
                            self.cells[r.index()] = Cell::Ref(next2);
                        }
                        r = next2;
                    } else {
                        r = next;
                    }
                }
                _ => return r,
            }
        }
    }

    /// Type of the structure rooted at `r`.
    pub fn type_of(&self, r: CellRef) -> TypeId {
        match self.cells[self.resolve(r).index()] {
            Cell::Node { ty, .. } | Cell::Unexpanded(ty) => ty,
            Cell::Ref(_) => unreachable!(),
        }
    }

    /// Arc targets of a node (empty for placeholders).
    pub fn arcs_of(&self, r: CellRef) -> &[CellRef] {
        match self.cells[self.resolve(r).index()] {
            Cell::Node { arcs, len, .. } => &self.arcs[arcs as usize..(arcs + len) as usize],
            _ => &[],
        }
    }

    /// Value of feature `f` below `r` if `r` is an expanded node carrying it.
    pub fn arc(&self, sig: &Signature, r: CellRef, f: FeatId) -> Option<CellRef> {
        let r = self.resolve(r);
        match self.cells[r.index()] {
            Cell::Node { ty, arcs, .. } => sig
                .slot(ty, f)
                .map(|s| self.resolve(self.arcs[arcs as usize + s])),
            _ => None,
        }
    }

    fn assert_working(&self, r: CellRef) {
        debug_assert!(
            r.index() >= self.frozen_cells,
            "attempt to mutate frozen cell {}",
            r.0
        );
    }

    /// Materializes one level of a placeholder in place. Expanded nodes are
    /// returned unchanged.
    pub fn expand(&mut self, sig: &Signature, r: CellRef) -> CellRef {
        let r = self.deref(r);
        if let Cell::Unexpanded(ty) = self.cells[r.index()] {
            self.assert_working(r);
            self.expansions += 1;
            let feats = sig.features_of(ty);
            let start = self.arcs.len();
            for &(_, restr) in feats {
                let v = self.alloc_unexpanded(restr);
                self.arcs.push(v);
            }
            self.cells[r.index()] = Cell::Node {
                ty,
                arcs: start as u32,
                len: feats.len() as u32,
            };
        }
        r
    }

    /// Loads the value of `f` below `r`, expanding `r` and raising its type
    /// to the introducer of `f` when needed.
    pub fn get_arc(&mut self, sig: &Signature, r: CellRef, f: FeatId) -> Result<CellRef, Clash> {
        let r = self.deref(r);
        if sig.slot(self.type_of(r), f).is_none() {
            self.coerce(sig, r, sig.introducer(f))?;
        }
        let r = self.expand(sig, r);
        match self.cells[r.index()] {
            Cell::Node { ty, arcs, .. } => {
                let slot = sig.slot(ty, f).expect("feature appropriate after coercion");
                Ok(self.arcs[arcs as usize + slot])
            }
            _ => unreachable!(),
        }
    }

    /// Replaces the arc for `f` below `r` by `val`. `r` must be an expanded
    /// working node carrying `f`.
    pub fn set_arc(&mut self, sig: &Signature, r: CellRef, f: FeatId, val: CellRef) -> bool {
        let r = self.deref(r);
        match self.cells[r.index()] {
            Cell::Node { ty, arcs, .. } => match sig.slot(ty, f) {
                Some(s) => {
                    self.arcs[arcs as usize + s] = val;
                    true
                }
                None => false,
            },
            _ => false,
        }
    }

    /// Raises the type of `r` to at least `t`, keeping total well-typing.
    pub fn coerce(&mut self, sig: &Signature, r: CellRef, t: TypeId) -> Result<(), Clash> {
        let r = self.deref(r);
        match self.cells[r.index()] {
            Cell::Unexpanded(t0) => {
                let u = sig.lub(t0, t).ok_or_else(|| Clash::new(t0, t))?;
                if u != t0 {
                    self.assert_working(r);
                    self.cells[r.index()] = Cell::Unexpanded(u);
                }
                Ok(())
            }
            Cell::Node { ty: t0, arcs, len: _ } => {
                let u = sig.lub(t0, t).ok_or_else(|| Clash::new(t0, t))?;
                if u == t0 {
                    return Ok(());
                }
                self.assert_working(r);
                let feats = sig.features_of(u);
                let start = self.arcs.len();
                for &(f, restr) in feats {
                    let v = match sig.slot(t0, f) {
                        Some(s) => self.arcs[arcs as usize + s],
                        None => self.alloc_unexpanded(restr),
                    };
                    self.arcs.push(v);
                }
                self.cells[r.index()] = Cell::Node {
                    ty: u,
                    arcs: start as u32,
                    len: feats.len() as u32,
                };
                for (i, &(f, restr)) in feats.iter().enumerate() {
                    if let Some(old) = sig.restriction(t0, f) {
                        if old != restr {
                            let v = self.arcs[start + i];
                            self.coerce(sig, v, restr).map_err(|c| c.under(f))?;
                        }
                    }
                }
                Ok(())
            }
            Cell::Ref(_) => unreachable!(),
        }
    }

    /// Destructive unification of two working structures.
    pub fn unify(&mut self, sig: &Signature, a: CellRef, b: CellRef) -> Result<CellRef, Clash> {
        let a = self.deref(a);
        let b = self.deref(b);
        if a == b {
            return Ok(a);
        }
        match (self.cells[a.index()], self.cells[b.index()]) {
            (Cell::Unexpanded(ta), _) => {
                self.assert_working(a);
                self.cells[a.index()] = Cell::Ref(b);
                self.coerce(sig, b, ta)?;
                Ok(self.deref(b))
            }
            (_, Cell::Unexpanded(tb)) => {
                self.assert_working(b);
                self.cells[b.index()] = Cell::Ref(a);
                self.coerce(sig, a, tb)?;
                Ok(self.deref(a))
            }
            (
                Cell::Node {
                    ty: ta,
                    arcs: aa,
                    len: la,
                },
                Cell::Node { ty: tb, .. },
            ) => {
                if sig.lub(ta, tb).is_none() {
                    return Err(Clash::new(ta, tb));
                }
                self.assert_working(a);
                self.cells[a.index()] = Cell::Ref(b);
                self.coerce(sig, b, ta)?;
                for i in 0..la as usize {
                    let f = sig.features_of(ta)[i].0;
                    let av = self.arcs[aa as usize + i];
                    let bn = self.deref(b);
                    let bv = match self.cells[bn.index()] {
                        Cell::Node { ty, arcs, .. } => {
                            self.arcs[arcs as usize + sig.slot(ty, f).expect("raised type carries f")]
                        }
                        _ => unreachable!(),
                    };
                    self.unify(sig, av, bv).map_err(|c| c.under(f))?;
                }
                Ok(self.deref(b))
            }
            _ => unreachable!(),
        }
    }

    /// Drops the working region.
    pub fn discard(&mut self) {
        self.cells.truncate(self.frozen_cells);
        self.arcs.truncate(self.frozen_arcs);
    }

    /// Copies everything reachable from `roots` (skipping frozen cells) into
    /// fresh arrays whose indices start at the given bases.
    fn compact(
        &self,
        roots: &[CellRef],
        base_cells: usize,
        base_arcs: usize,
    ) -> (Vec<Cell>, Vec<CellRef>, Vec<CellRef>) {
        let keep = self.frozen_cells;
        let mut map: HashMap<CellRef, CellRef> = HashMap::new();
        let mut cells = Vec::new();
        let mut arcs = Vec::new();
        let mut pending: Vec<CellRef> = Vec::new();
        let visit = |r: CellRef,
                         cells: &mut Vec<Cell>,
                         pending: &mut Vec<CellRef>,
                         map: &mut HashMap<CellRef, CellRef>|
         -> CellRef {
            let r = self.resolve(r);
            if r.index() < keep {
                return r;
            }
            *map.entry(r).or_insert_with(|| {
                let new = CellRef((base_cells + cells.len()) as u32);
                cells.push(self.cells[r.index()]);
                pending.push(r);
                new
            })
        };
        let new_roots: Vec<CellRef> = roots
            .iter()
            .map(|&r| visit(r, &mut cells, &mut pending, &mut map))
            .collect();
        while let Some(old) = pending.pop() {
            let new = map[&old];
            if let Cell::Node { ty, arcs: a0, len } = self.cells[old.index()] {
                let start = base_arcs + arcs.len();
                arcs.extend(std::iter::repeat_n(CellRef(0), len as usize));
                for i in 0..len as usize {
                    let t = visit(self.arcs[a0 as usize + i], &mut cells, &mut pending, &mut map);
                    arcs[start - base_arcs + i] = t;
                }
                cells[new.index() - base_cells] = Cell::Node {
                    ty,
                    arcs: start as u32,
                    len,
                };
            }
        }
        (cells, arcs, new_roots)
    }

    /// Compacts the structures reachable from `roots` onto the frozen
    /// region and drops the rest of the working region.
    pub fn freeze(&mut self, roots: &[CellRef]) -> Vec<CellRef> {
        let (cells, arcs, new_roots) = self.compact(roots, self.frozen_cells, self.frozen_arcs);
        self.discard();
        self.cells.extend(cells);
        self.arcs.extend(arcs);
        self.frozen_cells = self.cells.len();
        self.frozen_arcs = self.arcs.len();
        new_roots
    }

    /// Freezes everything currently on the heap as is.
    pub fn freeze_all(&mut self) {
        self.frozen_cells = self.cells.len();
        self.frozen_arcs = self.arcs.len();
    }

    /// Compact copy of the working structures reachable from `regs`.
    pub fn snapshot(&self, regs: &[Option<CellRef>]) -> Snapshot {
        let live: Vec<CellRef> = regs.iter().flatten().copied().collect();
        let (cells, arcs, roots) = self.compact(&live, self.frozen_cells, self.frozen_arcs);
        let mut it = roots.into_iter();
        let regs = regs.iter().map(|r| r.map(|_| it.next().unwrap())).collect();
        Snapshot {
            base_cells: self.frozen_cells,
            base_arcs: self.frozen_arcs,
            cells,
            arcs,
            regs,
        }
    }

    /// Reloads a snapshot into the (empty) working region and returns the
    /// relocated register contents.
    pub fn restore(&mut self, snap: &Snapshot) -> Vec<Option<CellRef>> {
        debug_assert_eq!(self.working_len(), 0);
        let cell_base = self.cells.len();
        let arc_base = self.arcs.len();
        let reloc = |r: CellRef| {
            if r.index() >= snap.base_cells {
                CellRef((r.index() - snap.base_cells + cell_base) as u32)
            } else {
                r
            }
        };
        for c in &snap.cells {
            self.cells.push(match *c {
                Cell::Node { ty, arcs, len } => Cell::Node {
                    ty,
                    arcs: (arcs as usize - snap.base_arcs + arc_base) as u32,
                    len,
                },
                Cell::Ref(r) => Cell::Ref(reloc(r)),
                other => other,
            });
        }
        self.arcs.extend(snap.arcs.iter().map(|&r| reloc(r)));
        snap.regs.iter().map(|r| r.map(reloc)).collect()
    }

    /// Copies structures from another heap (or a frozen part of this one)
    /// into the working region, preserving sharing among `roots`.
    pub fn import(&mut self, src: &Heap, roots: &[CellRef]) -> Vec<CellRef> {
        let mut map: HashMap<CellRef, CellRef> = HashMap::new();
        let mut pending: Vec<(CellRef, CellRef)> = Vec::new();
        let mut out = Vec::with_capacity(roots.len());
        for &r in roots {
            let nr = self.import_one(src, r, &mut map, &mut pending);
            out.push(nr);
        }
        while let Some((old, new)) = pending.pop() {
            if let Cell::Node { ty, arcs, len } = src.cells[old.index()] {
                let start = self.arcs.len();
                self.arcs.extend(std::iter::repeat_n(CellRef(0), len as usize));
                for i in 0..len as usize {
                    let t = self.import_one(src, src.arcs[arcs as usize + i], &mut map, &mut pending);
                    self.arcs[start + i] = t;
                }
                self.cells[new.index()] = Cell::Node {
                    ty,
                    arcs: start as u32,
                    len,
                };
            }
        }
        out
    }

    fn import_one(
        &mut self,
        src: &Heap,
        r: CellRef,
        map: &mut HashMap<CellRef, CellRef>,
        pending: &mut Vec<(CellRef, CellRef)>,
    ) -> CellRef {
        let r = src.resolve(r);
        if let Some(&n) = map.get(&r) {
            return n;
        }
        let n = self.push(src.cells[r.index()]);
        map.insert(r, n);
        pending.push((r, n));
        n
    }

    /// Changes the type of a featureless working cell to another featureless
    /// type. Used to generalize structures, which unification never does.
    pub fn retype_leaf(&mut self, sig: &Signature, r: CellRef, ty: TypeId) -> bool {
        let r = self.deref(r);
        if r.index() < self.frozen_cells || sig.arity(ty) != 0 || sig.arity(self.type_of(r)) != 0 {
            return false;
        }
        self.cells[r.index()] = Cell::Unexpanded(ty);
        true
    }

    /// Copies structures already on this heap (typically frozen ones) into
    /// the working region, preserving sharing among `roots`.
    pub fn copy_to_working(&mut self, roots: &[CellRef]) -> Vec<CellRef> {
        let mut map: HashMap<CellRef, CellRef> = HashMap::new();
        let mut pending: Vec<(CellRef, CellRef)> = Vec::new();
        let mut fetch = |h: &mut Heap, r: CellRef, pending: &mut Vec<(CellRef, CellRef)>| {
            let r = h.resolve(r);
            *map.entry(r).or_insert_with(|| {
                let n = h.push(h.cells[r.index()]);
                pending.push((r, n));
                n
            })
        };
        let out: Vec<CellRef> = roots.iter().map(|&r| fetch(self, r, &mut pending)).collect();
        while let Some((old, new)) = pending.pop() {
            if let Cell::Node { ty, arcs, len } = self.cells[old.index()] {
                let start = self.arcs.len();
                self.arcs.extend(std::iter::repeat_n(CellRef(0), len as usize));
                for i in 0..len as usize {
                    let t = fetch(self, self.arcs[arcs as usize + i], &mut pending);
                    self.arcs[start + i] = t;
                }
                self.cells[new.index()] = Cell::Node {
                    ty,
                    arcs: start as u32,
                    len,
                };
            }
        }
        out
    }

    /// Expands placeholders breadth-first down to `depth` arcs below `root`.
    pub fn force_expand(&mut self, sig: &Signature, root: CellRef, depth: usize) {
        let mut frontier = vec![root];
        let mut seen = std::collections::HashSet::new();
        for _ in 0..=depth {
            let mut next = Vec::new();
            for r in frontier {
                let r = self.deref(r);
                if !seen.insert(r) {
                    continue;
                }
                if r.index() >= self.frozen_cells {
                    self.expand(sig, r);
                }
                next.extend_from_slice(self.arcs_of(r));
            }
            frontier = next;
        }
    }

    /// Hash of the frozen region, for immutability checks.
    pub fn frozen_fingerprint(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.cells[..self.frozen_cells].hash(&mut h);
        self.arcs[..self.frozen_arcs].hash(&mut h);
        h.finish()
    }
}

/// A borrowed view of one structure on some heap.
#[derive(Clone, Copy, Debug)]
pub struct FsView<'a> {
    pub heap: &'a Heap,
    pub root: CellRef,
}

impl<'a> FsView<'a> {
    pub fn new(heap: &'a Heap, root: CellRef) -> Self {
        FsView {
            heap,
            root: heap.resolve(root),
        }
    }

    pub fn ty(&self) -> TypeId {
        self.heap.type_of(self.root)
    }

    pub fn is_expanded(&self) -> bool {
        matches!(self.heap.cell(self.root), Cell::Node { .. })
    }

    pub fn get(&self, sig: &Signature, feat: &str) -> Option<FsView<'a>> {
        let f = sig.feat_id(feat)?;
        self.heap.arc(sig, self.root, f).map(|r| FsView::new(self.heap, r))
    }

    /// Follows a `:`-separated feature path.
    pub fn path(&self, sig: &Signature, path: &str) -> Option<FsView<'a>> {
        let mut cur = *self;
        for f in path.split(':').filter(|s| !s.is_empty()) {
            cur = cur.get(sig, f)?;
        }
        Some(cur)
    }

    /// Token identity.
    pub fn same(&self, other: &FsView<'_>) -> bool {
        std::ptr::eq(self.heap, other.heap) && self.root == other.root
    }

    pub fn to_owned(&self) -> FeatureStructure {
        FeatureStructure::extract(self.heap, self.root)
    }
}

/// A self-contained, immutable feature structure.
#[derive(Clone, Debug)]
pub struct FeatureStructure {
    heap: Heap,
    root: CellRef,
}

impl FeatureStructure {
    /// Copies the structure at `root` out of `src`.
    pub fn extract(src: &Heap, root: CellRef) -> Self {
        let mut heap = Heap::new();
        let r = heap.import(src, &[root])[0];
        heap.freeze_all();
        FeatureStructure { heap, root: r }
    }

    /// The most general structure of type `ty` (a single placeholder).
    pub fn most_general(ty: TypeId) -> Self {
        let mut heap = Heap::new();
        let root = heap.alloc_unexpanded(ty);
        heap.freeze_all();
        FeatureStructure { heap, root }
    }

    pub fn bot() -> Self {
        Self::most_general(BOT)
    }

    pub(crate) fn from_parts(mut heap: Heap, root: CellRef) -> Self {
        heap.freeze_all();
        FeatureStructure { heap, root }
    }

    pub fn heap(&self) -> &Heap {
        &self.heap
    }

    pub fn root(&self) -> CellRef {
        self.root
    }

    pub fn view(&self) -> FsView<'_> {
        FsView::new(&self.heap, self.root)
    }

    pub fn ty(&self) -> TypeId {
        self.heap.type_of(self.root)
    }

    /// Non-destructive unification of two owned structures.
    pub fn unify(&self, other: &FeatureStructure, sig: &Signature) -> Result<FeatureStructure, Clash> {
        let mut heap = Heap::new();
        let a = heap.import(&self.heap, &[self.root])[0];
        let b = heap.import(&other.heap, &[other.root])[0];
        let r = heap.unify(sig, a, b)?;
        let root = heap.freeze(&[r])[0];
        Ok(FeatureStructure { heap, root })
    }

    pub fn subsumes(&self, other: &FeatureStructure, sig: &Signature) -> bool {
        subsumes(sig, self.view(), other.view())
    }

    pub fn equivalent(&self, other: &FeatureStructure, sig: &Signature) -> bool {
        equivalent(sig, self.view(), other.view())
    }

    /// Structure rooted at a `:`-separated path.
    pub fn at(&self, sig: &Signature, path: &str) -> Option<FeatureStructure> {
        self.view().path(sig, path).map(|v| v.to_owned())
    }

    /// Same structure with placeholders materialized down to `depth`.
    pub fn expanded(&self, sig: &Signature, depth: usize) -> FeatureStructure {
        let mut heap = Heap::new();
        let r = heap.import(&self.heap, &[self.root])[0];
        heap.force_expand(sig, r, depth);
        let root = heap.freeze(&[r])[0];
        FeatureStructure { heap, root }
    }

    /// Number of distinct nodes.
    pub fn node_count(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.heap.resolve(self.root)];
        while let Some(r) = stack.pop() {
            if seen.insert(r) {
                stack.extend(self.heap.arcs_of(r).iter().map(|a| self.heap.resolve(*a)));
            }
        }
        seen.len()
    }

    pub fn to_text(&self, sig: &Signature) -> String {
        print_fs(sig, self.view(), PrintStyle::Text)
    }

    pub fn to_json(&self, sig: &Signature) -> serde_json::Value {
        print::to_json_value(sig, self.view())
    }

    /// Moves the structure onto another signature with the same type and
    /// feature names. Features unknown to `to` are dropped; features new in
    /// `to` are left most general.
    pub fn transfer(&self, from: &Signature, to: &Signature) -> Option<FeatureStructure> {
        let mut heap = Heap::new();
        let mut map: HashMap<CellRef, CellRef> = HashMap::new();
        let root = transfer_rec(self.heap(), self.root, from, to, &mut heap, &mut map)?;
        heap.freeze_all();
        Some(FeatureStructure { heap, root })
    }
}

/// Rebuilds `roots` under another signature with the same type and feature
/// names; features missing from `to` are dropped, new ones become
/// placeholders. The result lives in the working region of a fresh heap.
pub fn transfer_many(src: &Heap, roots: &[CellRef], from: &Signature, to: &Signature) -> Option<(Heap, Vec<CellRef>)> {
    let mut heap = Heap::new();
    let mut map = HashMap::new();
    let out = roots
        .iter()
        .map(|&r| transfer_rec(src, r, from, to, &mut heap, &mut map))
        .collect::<Option<Vec<_>>>()?;
    Some((heap, out))
}

fn transfer_rec(
    src: &Heap,
    r: CellRef,
    from: &Signature,
    to: &Signature,
    dst: &mut Heap,
    map: &mut HashMap<CellRef, CellRef>,
) -> Option<CellRef> {
    let r = src.resolve(r);
    if let Some(&n) = map.get(&r) {
        return Some(n);
    }
    let ty = to.type_id(from.type_name(src.type_of(r)))?;
    match src.cell(r) {
        Cell::Unexpanded(_) => {
            let n = dst.alloc_unexpanded(ty);
            map.insert(r, n);
            Some(n)
        }
        Cell::Node { ty: old_ty, .. } => {
            let n = dst.alloc_node(to, ty);
            map.insert(r, n);
            for (i, &(f, _)) in from.features_of(old_ty).iter().enumerate() {
                let child = src.arcs_of(r)[i];
                let Some(nf) = to.feat_id(from.feat_name(f)) else {
                    continue;
                };
                let c = transfer_rec(src, child, from, to, dst, map)?;
                dst.set_arc(to, n, nf, c);
            }
            Some(n)
        }
        Cell::Ref(_) => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::{compile_signature, TypeDecl};

    fn sig() -> Signature {
        compile_signature(&[
            TypeDecl::new("bot", &["t", "a", "np", "vp"], &[]),
            TypeDecl::new("t", &["t2"], &[("f", "t"), ("g", "a")]),
            TypeDecl::new("a", &["b"], &[]),
            TypeDecl::new("t2", &[], &[("h", "bot")]),
        ])
        .unwrap()
    }

    fn ty(s: &Signature, n: &str) -> TypeId {
        s.type_id(n).unwrap()
    }

    #[test]
    fn unify_with_self_is_identity() {
        let s = sig();
        let mut h = Heap::new();
        let x = h.alloc_node(&s, ty(&s, "t"));
        let before = h.cells().to_vec();
        assert_eq!(h.unify(&s, x, x).unwrap(), x);
        assert_eq!(h.cells(), &before[..]);
    }

    #[test]
    fn clash_reports_path() {
        let s = sig();
        let mut h = Heap::new();
        let x = h.alloc_node(&s, ty(&s, "t"));
        let y = h.alloc_node(&s, ty(&s, "t"));
        let f = s.feat_id("f").unwrap();
        let fx = h.get_arc(&s, x, f).unwrap();
        let fy = h.get_arc(&s, y, f).unwrap();
        let gx = h.get_arc(&s, fx, s.feat_id("g").unwrap()).unwrap();
        h.coerce(&s, gx, ty(&s, "b")).unwrap();
        let gy = h.get_arc(&s, fy, s.feat_id("g").unwrap()).unwrap();
        // `g` is restricted to `a`, so pushing `np` in fails.
        assert!(h.coerce(&s, gy, ty(&s, "np")).is_err());
        let np = h.alloc_unexpanded(ty(&s, "np"));
        let vp = h.alloc_unexpanded(ty(&s, "vp"));
        let err = h.unify(&s, np, vp).unwrap_err();
        assert!(err.path.is_empty());
        let z = h.alloc_node(&s, ty(&s, "t"));
        let fz = h.get_arc(&s, z, f).unwrap();
        h.coerce(&s, fz, ty(&s, "t2")).unwrap();
        let hz = h.get_arc(&s, fz, s.feat_id("h").unwrap()).unwrap();
        h.coerce(&s, hz, ty(&s, "np")).unwrap();
        let w = h.alloc_node(&s, ty(&s, "t"));
        let fw = h.get_arc(&s, w, f).unwrap();
        let hw = h.get_arc(&s, fw, s.feat_id("h").unwrap()).unwrap();
        h.coerce(&s, hw, ty(&s, "vp")).unwrap();
        let err = h.unify(&s, z, w).unwrap_err();
        assert_eq!(err.path, vec![f, s.feat_id("h").unwrap()]);
    }

    #[test]
    fn cyclic_structures_unify_and_copy() {
        let s = sig();
        let mut h = Heap::new();
        let t = ty(&s, "t");
        let f = s.feat_id("f").unwrap();
        let x = h.alloc_node(&s, t);
        assert!(h.set_arc(&s, x, f, x));
        let fs = FeatureStructure::extract(&h, x);
        assert_eq!(fs.node_count(), 2); // self-loop node + g placeholder
        let v = fs.view();
        assert!(v.get(&s, "f").unwrap().same(&v));
        let y = h.alloc_node(&s, t);
        let r = h.unify(&s, x, y).unwrap();
        let out = FeatureStructure::extract(&h, r);
        assert!(out.equivalent(&fs, &s));
    }

    #[test]
    fn expanding_a_featureless_type() {
        let s = sig();
        let mut h = Heap::new();
        let r = h.alloc_unexpanded(ty(&s, "a"));
        let r = h.expand(&s, r);
        assert_eq!(
            h.cell(r),
            Cell::Node {
                ty: ty(&s, "a"),
                arcs: 0,
                len: 0
            }
        );
    }

    #[test]
    fn forced_expansion_under_a_loop_is_caller_driven() {
        let s = sig();
        let t = ty(&s, "t");
        let f = s.feat_id("f").unwrap();
        let mut h = Heap::new();
        let root = h.alloc_unexpanded(t);
        let mut cur = root;
        for _ in 0..3 {
            cur = h.expand(&s, cur);
            cur = h.arc(&s, cur, f).unwrap();
        }
        assert_eq!(h.cell(cur), Cell::Unexpanded(t));
        assert_eq!(h.expansions(), 3);
    }

    #[test]
    fn unifying_placeholder_with_node_does_not_expand() {
        let s = sig();
        let mut h = Heap::new();
        let p = h.alloc_unexpanded(ty(&s, "t"));
        let n = h.alloc_node(&s, ty(&s, "t2"));
        let r = h.unify(&s, p, n).unwrap();
        assert_eq!(h.expansions(), 0);
        assert_eq!(h.type_of(r), ty(&s, "t2"));
    }

    #[test]
    fn type_raise_adds_arcs() {
        let s = sig();
        let mut h = Heap::new();
        let a = h.alloc_node(&s, ty(&s, "t"));
        let b = h.alloc_node(&s, ty(&s, "t2"));
        let r = h.unify(&s, a, b).unwrap();
        assert_eq!(h.arcs_of(r).len(), 3);
    }

    #[test]
    fn failed_attempt_leaves_frozen_region_intact() {
        let s = sig();
        let mut h = Heap::new();
        let x = h.alloc_node(&s, ty(&s, "t"));
        let x = h.freeze(&[x])[0];
        let fp = h.frozen_fingerprint();
        for _ in 0..5 {
            let c = h.import(&FeatureStructure::extract(&h, x).heap, &[CellRef(0)]);
            let np = h.alloc_unexpanded(ty(&s, "np"));
            assert!(h.unify(&s, c[0], np).is_err());
            h.discard();
        }
        assert_eq!(h.frozen_fingerprint(), fp);
    }

    #[test]
    fn snapshot_round_trip() {
        let s = sig();
        let mut h = Heap::new();
        let x = h.alloc_node(&s, ty(&s, "t"));
        let g = h.get_arc(&s, x, s.feat_id("g").unwrap()).unwrap();
        let snap = h.snapshot(&[Some(x), None, Some(g)]);
        let before = FeatureStructure::extract(&h, x);
        h.discard();
        let other = h.alloc_node(&s, ty(&s, "a"));
        h.freeze(&[other]);
        let regs = h.restore(&snap);
        let after = FeatureStructure::extract(&h, regs[0].unwrap());
        assert!(after.equivalent(&before, &s));
        assert_eq!(h.arc(&s, regs[0].unwrap(), s.feat_id("g").unwrap()), Some(regs[2].unwrap()));
        assert_eq!(regs[1], None);
    }
}
