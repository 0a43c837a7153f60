use super::expand::RuleTemplate;
use crate::fs::{FeatureStructure, Heap};
use crate::signature::Signature;

#[derive(Clone, Debug)]
pub struct EmptyExpansion {
    pub rules: Vec<RuleTemplate>,
    pub warnings: Vec<String>,
    /// Set when further rules could still be derived after the last round;
    /// the grammar may then differ from the source grammar.
    pub budget_exceeded: bool,
}

/// Removes body element `k` of `r` after unifying it with `empty`.
fn fold(sig: &Signature, r: &RuleTemplate, k: usize, empty: &FeatureStructure) -> Option<(Heap, Vec<usize>, Vec<crate::fs::CellRef>)> {
    let mut heap = Heap::new();
    let roots = heap.import(&r.heap, &r.roots());
    let e = heap.import(empty.heap(), &[empty.root()])[0];
    heap.unify(sig, roots[1 + k], e).ok()?;
    let keep: Vec<usize> = (0..r.arity()).filter(|&i| i != k).collect();
    let mut out = vec![roots[0]];
    out.extend(keep.iter().map(|&i| roots[1 + i]));
    Some((heap, keep, out))
}

/// Whether folding some empty category into `r` yields a rule not yet in `all`.
fn derives_new(sig: &Signature, r: &RuleTemplate, empties: &[FeatureStructure], all: &[RuleTemplate]) -> bool {
    (0..r.arity()).any(|k| {
        empties.iter().any(|e| match fold(sig, r, k, e) {
            Some((heap, keep, roots)) if !keep.is_empty() => {
                let cand = RuleTemplate::from_roots(
                    String::new(),
                    heap,
                    &roots,
                    keep.iter().map(|&i| r.initial_only[i]).collect(),
                    r.line,
                );
                !all.iter().any(|o| o.equivalent(&cand, sig))
            }
            _ => false,
        })
    })
}

/// Adds, for every rule and body position unifying with an empty category,
/// a copy of the rule with that position removed. New rules are matched
/// again for up to `max_rounds` rounds.
pub fn expand_empty_categories(
    rules: Vec<RuleTemplate>,
    empties: &[FeatureStructure],
    sig: &Signature,
    max_rounds: usize,
) -> EmptyExpansion {
    let mut warnings = Vec::new();
    if empties.is_empty() {
        return EmptyExpansion {
            rules,
            warnings,
            budget_exceeded: false,
        };
    }
    let mut all = rules;
    let mut frontier: Vec<usize> = (0..all.len()).collect();
    for _ in 0..max_rounds {
        let mut next = Vec::new();
        for &ri in &frontier {
            for k in 0..all[ri].arity() {
                for (ei, e) in empties.iter().enumerate() {
                    let r = &all[ri];
                    let Some((heap, keep, roots)) = fold(sig, r, k, e) else {
                        continue;
                    };
                    if keep.is_empty() {
                        warnings.push(format!(
                            "rule `{}`: empty category {} fills the whole body; derived rule dropped",
                            r.name,
                            ei + 1
                        ));
                        continue;
                    }
                    let cand = RuleTemplate::from_roots(
                        format!("{}_e{}", r.name, k + 1),
                        heap,
                        &roots,
                        keep.iter().map(|&i| r.initial_only[i]).collect(),
                        r.line,
                    );
                    if !all.iter().any(|o| o.equivalent(&cand, sig)) {
                        all.push(cand);
                        next.push(all.len() - 1);
                    }
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    let budget_exceeded = frontier.iter().any(|&ri| derives_new(sig, &all[ri], empties, &all));
    if budget_exceeded {
        warnings.push(format!(
            "empty-category expansion stopped after {max_rounds} round(s); the rule set may not be equivalent to the source grammar"
        ));
    }
    EmptyExpansion {
        rules: all,
        warnings,
        budget_exceeded,
    }
}
