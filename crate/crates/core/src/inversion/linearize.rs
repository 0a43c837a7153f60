use std::collections::HashMap;

use super::{InversionConfig, InversionError, SemFeats};
use crate::fs::{CellRef, FeatureStructure, Heap};
use crate::signature::Signature;

struct Lin<'a> {
    sig: &'a Signature,
    sf: SemFeats,
    src: &'a Heap,
    out: Vec<FeatureStructure>,
}

impl Lin<'_> {
    fn path_name(&self, path: &[&str]) -> String {
        if path.is_empty() {
            "the root".into()
        } else {
            path.join(":")
        }
    }

    fn visit(&mut self, node: CellRef, path: &mut Vec<String>) -> Result<(), InversionError> {
        let node = self.src.resolve(node);
        if !self.sf.is_pred(self.sig, self.src, node) {
            let p: Vec<&str> = path.iter().map(String::as_str).collect();
            return Err(InversionError::MalformedSemantics(self.path_name(&p)));
        }
        if path.len() > 64 {
            return Err(InversionError::MalformedSemantics(format!("{} (too deep)", path.join(":"))));
        }
        for (f, v) in self.sf.arg_values(self.sig, self.src, node) {
            let open = self.sig.slot(self.src.type_of(v), self.sf.rst).is_some();
            if self.sf.is_pred(self.sig, self.src, v) || open {
                path.push(self.sig.feat_name(f).to_string());
                self.visit(v, path)?;
                path.pop();
            }
        }
        let e = self.element(node);
        self.out.push(e);
        Ok(())
    }

    /// Copy of `src` below `r`, reusing `map` so shared nodes stay shared.
    fn copy(&self, dst: &mut Heap, r: CellRef, map: &mut HashMap<CellRef, CellRef>) -> CellRef {
        let r = self.src.resolve(r);
        if let Some(&n) = map.get(&r) {
            return n;
        }
        let ty = self.src.type_of(r);
        if self.src.arcs_of(r).is_empty() && self.sig.arity(ty) > 0 {
            let n = dst.alloc_unexpanded(ty);
            map.insert(r, n);
            return n;
        }
        let n = dst.alloc_node(self.sig, ty);
        map.insert(r, n);
        for (i, &(f, _)) in self.sig.features_of(ty).iter().enumerate() {
            let c = self.copy(dst, self.src.arcs_of(r)[i], map);
            dst.set_arc(self.sig, n, f, c);
        }
        n
    }

    /// The atom at `node` with its predicate arguments abstracted, wrapped in
    /// one λ per argument.
    fn element(&self, node: CellRef) -> FeatureStructure {
        let (sig, sf, src) = (self.sig, &self.sf, self.src);
        let mut dst = Heap::new();
        let mut map = HashMap::new();
        let args = sf.arg_values(sig, src, node);
        let preds: Vec<CellRef> = args
            .iter()
            .map(|&(_, v)| v)
            .filter(|&v| sf.is_pred(sig, src, v))
            .collect();
        for &p in &preds {
            // Same type, open predicate, shared variables, fresh nested
            // predicates.
            let pat = dst.alloc_node(sig, src.type_of(p));
            map.insert(p, pat);
            for (f, v) in sf.arg_values(sig, src, p) {
                if !sf.is_pred(sig, src, v) {
                    let c = self.copy(&mut dst, v, &mut map);
                    dst.set_arc(sig, pat, f, c);
                }
            }
        }
        let mut inner = self.copy(&mut dst, node, &mut map);
        let spine: Vec<CellRef> = if preds.is_empty() {
            args.iter().map(|&(_, v)| v).collect()
        } else {
            preds
        };
        let lambda = sig.introducer(sf.rst);
        for &v in spine.iter().rev() {
            let l = dst.alloc_node(sig, lambda);
            let var = self.copy(&mut dst, v, &mut map);
            dst.set_arc(sig, l, sf.var, var);
            dst.set_arc(sig, l, sf.rst, inner);
            inner = l;
        }
        let root = dst.freeze(&[inner])[0];
        FeatureStructure::extract(&dst, root)
    }
}

/// Semantic elements of `sem` in the order the inverted grammar consumes
/// them: arguments (recursively) before their predicate.
pub fn linearize_semantics(
    sig: &Signature,
    cfg: &InversionConfig,
    sem: &FeatureStructure,
) -> Result<Vec<FeatureStructure>, InversionError> {
    let sf = SemFeats::resolve(sig, cfg).map_err(InversionError::NotInvertible)?;
    let lambda = sig.introducer(sf.rst);
    if sig.slot(lambda, sf.var).is_none() {
        return Err(InversionError::NotInvertible(vec![super::Violation {
            subject: "signature".into(),
            reason: format!(
                "`{}` (introducing `{}`) does not carry `{}`",
                sig.type_name(lambda),
                cfg.rst,
                cfg.var
            ),
        }]));
    }
    let mut lin = Lin {
        sig,
        sf,
        src: sem.heap(),
        out: Vec::new(),
    };
    lin.visit(sem.root(), &mut Vec::new())?;
    Ok(lin.out)
}
