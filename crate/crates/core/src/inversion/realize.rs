use thiserror::Error;

use super::{e_list, linearize_semantics, InversionError, InvertedGrammar};
use crate::chart::{Chart, ChartError, ChartOptions};
use crate::fs::{FeatureStructure, Heap};
use crate::machine::Program;
use crate::signature::{HD, NE_LIST, TL};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenerateError {
    #[error(transparent)]
    Inversion(#[from] InversionError),
    #[error(transparent)]
    Chart(#[from] ChartError),
}

/// A chart whose diagonal holds the linearized elements of `sem`. `sem`
/// must be built over the inverted grammar's signature.
pub fn init_generate(inv: &InvertedGrammar, sem: &FeatureStructure, options: ChartOptions) -> Result<Chart, InversionError> {
    let items = linearize_semantics(inv.signature(), &inv.config, sem)?;
    let cells: Vec<Vec<FeatureStructure>> = items.into_iter().map(|e| vec![e]).collect();
    Ok(Chart::from_items(&cells, options))
}

/// Word sequences for a generation result, from its `str` list and the
/// knowledge base. Diagnostics explain an empty outcome.
pub fn realize_strings(inv: &InvertedGrammar, result: &FeatureStructure) -> (Vec<Vec<String>>, Vec<String>) {
    let sig = inv.signature();
    let sf = &inv.feats;
    let mut diags = Vec::new();
    let (Some(str_f), Some(end_f)) = (sig.feat_id(&inv.config.str_feat), sig.feat_id(&inv.config.str_end)) else {
        return (Vec::new(), vec!["signature has no string features".into()]);
    };
    let mut h = Heap::new();
    let root = h.import(result.heap(), &[result.root()])[0];
    let closed = h.get_arc(sig, root, end_f).and_then(|end| {
        let nil = h.alloc_unexpanded(e_list(sig));
        h.unify(sig, end, nil)
    });
    if closed.is_err() {
        return (Vec::new(), vec![format!("`{}` cannot be closed", inv.config.str_end)]);
    }
    let Ok(mut cur) = h.get_arc(sig, root, str_f) else {
        return (Vec::new(), vec![format!("result carries no `{}`", inv.config.str_feat)]);
    };
    let (hd, tl) = (sig.feat_id(HD).unwrap(), sig.feat_id(TL).unwrap());
    let ne = sig.type_id(NE_LIST).unwrap();
    let mut elems = Vec::new();
    loop {
        cur = h.resolve(cur);
        let t = h.type_of(cur);
        if t == e_list(sig) {
            break;
        }
        if t != ne {
            return (Vec::new(), vec![format!("`{}` is not a closed list", inv.config.str_feat)]);
        }
        elems.push(h.arc(sig, cur, hd).unwrap());
        cur = h.arc(sig, cur, tl).unwrap();
        if elems.len() > 10_000 {
            return (Vec::new(), vec![format!("`{}` is cyclic", inv.config.str_feat)]);
        }
    }
    let mut choices: Vec<Vec<String>> = Vec::new();
    for (i, &e) in elems.iter().enumerate() {
        let fs = FeatureStructure::extract(&h, e);
        if !inv.lexical_atoms.iter().any(|a| a.subsumes(&fs, sig)) {
            diags.push(format!("element {} matches no inverted lexical entry", i + 1));
            return (Vec::new(), diags);
        }
        let Some(atom) = sf.atom(sig, &h, e) else {
            diags.push(format!("element {} is not a predicate-argument structure", i + 1));
            return (Vec::new(), diags);
        };
        let (p, n) = sf.key(sig, &h, atom);
        let words: Vec<String> = inv.kb_words(&p, n).into_iter().map(String::from).collect();
        if words.is_empty() {
            diags.push(format!("no word for {p}/{n} (element {})", i + 1));
            return (Vec::new(), diags);
        }
        choices.push(words);
    }
    let mut out: Vec<Vec<String>> = vec![Vec::new()];
    for ws in &choices {
        out = out
            .iter()
            .flat_map(|pre| {
                ws.iter().map(move |w| {
                    let mut v = pre.clone();
                    v.push(w.clone());
                    v
                })
            })
            .collect();
    }
    (out, diags)
}

#[derive(Debug)]
pub struct Generation {
    pub chart: Chart,
    /// Spanning complete edges whose semantics the input subsumes.
    pub results: Vec<usize>,
    pub strings: Vec<Vec<String>>,
    pub diagnostics: Vec<String>,
}

/// Runs `prog` (compiled from `inv`) on the linearized `sem`.
pub fn generate(
    inv: &InvertedGrammar,
    prog: &Program,
    sem: &FeatureStructure,
    options: ChartOptions,
) -> Result<Generation, GenerateError> {
    let sig = inv.signature();
    let mut chart = init_generate(inv, sem, options)?;
    let spanning = chart.run(prog, sig)?;
    let mut results = Vec::new();
    let mut strings: Vec<Vec<String>> = Vec::new();
    let mut diagnostics = Vec::new();
    for id in spanning {
        let fs = chart.edge_fs(id);
        let ok = fs.at(sig, &inv.config.sem).is_some_and(|s| sem.subsumes(&s, sig))
            && fs.at(sig, &inv.config.str_feat).is_some();
        if !ok {
            continue;
        }
        results.push(id);
        let (ss, d) = realize_strings(inv, &fs);
        diagnostics.extend(d);
        for s in ss {
            if !strings.contains(&s) {
                strings.push(s);
            }
        }
    }
    Ok(Generation {
        chart,
        results,
        strings,
        diagnostics,
    })
}
