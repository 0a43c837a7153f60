use std::collections::HashMap;

use super::{Cell, CellRef, FsView, Heap};
use crate::signature::{Signature, TypeId};

/// Node on the more specific side of a subsumption check. A placeholder
/// there stands for an infinite unshared tree, so nodes below it are
/// virtual and never token-identical to anything else.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Target {
    Real(CellRef),
    Virtual(TypeId),
}

/// `true` iff `general` subsumes `specific`.
pub fn subsumes(sig: &Signature, general: FsView<'_>, specific: FsView<'_>) -> bool {
    subsumes_many(sig, general.heap, &[general.root], specific.heap, &[specific.root])
}

/// Subsumption of root tuples under one shared node mapping, so
/// reentrancies between different roots count.
pub fn subsumes_many(
    sig: &Signature,
    gheap: &Heap,
    groots: &[CellRef],
    sheap: &Heap,
    sroots: &[CellRef],
) -> bool {
    if groots.len() != sroots.len() {
        return false;
    }
    let mut map: HashMap<CellRef, Target> = HashMap::new();
    let mut stack: Vec<(CellRef, Target)> = groots
        .iter()
        .zip(sroots)
        .map(|(&g, &s)| (g, Target::Real(sheap.resolve(s))))
        .collect();
    while let Some((g, s)) = stack.pop() {
        let g = gheap.resolve(g);
        if let Some(prev) = map.get(&g) {
            match (prev, s) {
                (Target::Real(a), Target::Real(b)) if *a == b => continue,
                _ => return false,
            }
        }
        map.insert(g, s);
        let sty = match s {
            Target::Real(r) => sheap.type_of(r),
            Target::Virtual(t) => t,
        };
        match gheap.cell(g) {
            Cell::Unexpanded(gt) => {
                if !sig.subsumes(gt, sty) {
                    return false;
                }
            }
            Cell::Node { ty: gt, .. } => {
                if !sig.subsumes(gt, sty) {
                    return false;
                }
                let garcs = gheap.arcs_of(g);
                for (i, &(f, _)) in sig.features_of(gt).iter().enumerate() {
                    let child = match s {
                        Target::Real(r) => match sheap.cell(r) {
                            Cell::Node { .. } => {
                                let slot = sig.slot(sty, f).expect("subtype carries feature");
                                Target::Real(sheap.resolve(sheap.arcs_of(r)[slot]))
                            }
                            _ => Target::Virtual(sig.restriction(sty, f).unwrap()),
                        },
                        Target::Virtual(t) => Target::Virtual(sig.restriction(t, f).unwrap()),
                    };
                    stack.push((garcs[i], child));
                }
            }
            Cell::Ref(_) => unreachable!(),
        }
    }
    true
}

/// Mutual subsumption: isomorphism up to placeholder expansion.
pub fn equivalent(sig: &Signature, a: FsView<'_>, b: FsView<'_>) -> bool {
    subsumes(sig, a, b) && subsumes(sig, b, a)
}

pub fn equivalent_many(
    sig: &Signature,
    aheap: &Heap,
    aroots: &[CellRef],
    bheap: &Heap,
    broots: &[CellRef],
) -> bool {
    subsumes_many(sig, aheap, aroots, bheap, broots) && subsumes_many(sig, bheap, broots, aheap, aroots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fs::FeatureStructure;
    use crate::signature::{compile_signature, TypeDecl, BOT};

    fn sig() -> Signature {
        compile_signature(&[
            TypeDecl::new("bot", &["t", "a"], &[]),
            TypeDecl::new("t", &[], &[("f", "a"), ("g", "a")]),
        ])
        .unwrap()
    }

    /// t with f and g either shared or pointing at two distinct `a` nodes.
    fn pair(s: &Signature, shared: bool) -> FeatureStructure {
        let mut h = Heap::new();
        let t = s.type_id("t").unwrap();
        let a = s.type_id("a").unwrap();
        let root = h.alloc_node(s, t);
        let x = h.alloc_node(s, a);
        let y = if shared { x } else { h.alloc_node(s, a) };
        h.set_arc(s, root, s.feat_id("f").unwrap(), x);
        h.set_arc(s, root, s.feat_id("g").unwrap(), y);
        FeatureStructure::extract(&h, root)
    }

    #[test]
    fn reentrancy_is_more_specific() {
        let s = sig();
        let shared = pair(&s, true);
        let split = pair(&s, false);
        assert!(!shared.subsumes(&split, &s));
        assert!(split.subsumes(&shared, &s));
    }

    #[test]
    fn bot_subsumes_everything_and_self() {
        let s = sig();
        let x = pair(&s, true);
        assert!(FeatureStructure::most_general(BOT).subsumes(&x, &s));
        assert!(x.subsumes(&x, &s));
        assert!(!x.subsumes(&FeatureStructure::bot(), &s));
    }

    #[test]
    fn placeholder_equals_generic_node() {
        let s = sig();
        let t = s.type_id("t").unwrap();
        let lazy = FeatureStructure::most_general(t);
        let mut h = Heap::new();
        let n = h.alloc_node(&s, t);
        let eager = FeatureStructure::extract(&h, n);
        assert!(lazy.equivalent(&eager, &s));
        // sharing below a placeholder is not generic
        assert!(!pair(&s, true).subsumes(&lazy, &s));
        assert!(lazy.subsumes(&pair(&s, true), &s));
    }
}
