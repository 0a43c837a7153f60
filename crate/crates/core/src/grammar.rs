//! A grammar after the front end: compiled signature, expanded rules with
//! empty categories folded in, and prebuilt lexical structures.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::frontend::ast::{quote_atom, GrammarAst, KbRecord};
use crate::frontend::{
    expand_desc, expand_empty_categories, expand_macros, parse_grammar, unused_variables, FrontendError,
    RuleTemplate,
};
use crate::fs::{print_fs, FeatureStructure, Heap, PrintStyle};
use crate::signature::{compile_signature, Signature, TypeDecl, BOT_NAME, E_LIST, HD, LIST, NE_LIST, TL};

#[derive(Clone, Debug)]
pub struct GrammarOptions {
    /// Rounds of empty-category folding.
    pub max_ec_rounds: usize,
}

impl Default for GrammarOptions {
    fn default() -> Self {
        GrammarOptions { max_ec_rounds: 2 }
    }
}

#[derive(Clone, Debug)]
pub struct LexicalEntry {
    pub word: String,
    pub fs: FeatureStructure,
    pub line: usize,
}

#[derive(Clone, Debug)]
pub struct Grammar {
    pub signature: Signature,
    pub rules: Vec<RuleTemplate>,
    pub lexicon: Vec<LexicalEntry>,
    pub empties: Vec<FeatureStructure>,
    pub kb: Vec<KbRecord>,
    pub warnings: Vec<String>,
    /// Empty-category folding hit its round limit.
    pub budget_exceeded: bool,
}

/// Adds `list`, `e_list` and `ne_list` (with `hd` and `tl`) below `bot`
/// when the signature mentions none of them.
pub fn inject_list_types(decls: &mut Vec<TypeDecl>) {
    let mentions = |n: &str| decls.iter().any(|d| d.name == n || d.subs.iter().any(|s| s == n));
    if mentions(LIST) || mentions(E_LIST) || mentions(NE_LIST) {
        return;
    }
    if decls.iter().any(|d| d.intro.iter().any(|(f, _)| f == HD || f == TL)) {
        return;
    }
    let Some(bot) = decls.iter_mut().find(|d| d.name == BOT_NAME) else {
        return;
    };
    bot.subs.push(LIST.into());
    decls.push(TypeDecl::new(LIST, &[E_LIST, NE_LIST], &[]));
    decls.push(TypeDecl::new(NE_LIST, &[], &[(HD, BOT_NAME), (TL, LIST)]));
}

impl Grammar {
    pub fn from_source(src: &str, opts: &GrammarOptions) -> Result<Grammar, FrontendError> {
        Grammar::from_ast(&parse_grammar(src)?, opts)
    }

    pub fn from_ast(ast: &GrammarAst, opts: &GrammarOptions) -> Result<Grammar, FrontendError> {
        let ast = expand_macros(ast)?;
        let mut decls = ast.signature.clone();
        inject_list_types(&mut decls);
        let signature = compile_signature(&decls)?;
        let mut warnings = Vec::new();

        let mut rules = Vec::new();
        for (i, r) in ast.rules.iter().enumerate() {
            let mut descs = vec![&r.head];
            descs.extend(r.body.iter().map(|b| &b.desc));
            for v in unused_variables(&descs) {
                warnings.push(format!("line {}: variable `{v}` occurs only once", r.line));
            }
            rules.push(RuleTemplate::from_decl(&signature, r, i)?);
        }

        let mut lexicon = Vec::new();
        for l in &ast.lexicon {
            for d in &l.descs {
                for v in unused_variables(&[d]) {
                    warnings.push(format!("line {}: variable `{v}` occurs only once", l.line));
                }
                lexicon.push(LexicalEntry {
                    word: l.word.clone(),
                    fs: build(&signature, d, l.line)?,
                    line: l.line,
                });
            }
        }

        let mut empties = Vec::new();
        for e in &ast.empties {
            empties.push(build(&signature, &e.desc, e.line)?);
        }
        let ec = expand_empty_categories(rules, &empties, &signature, opts.max_ec_rounds);
        warnings.extend(ec.warnings);

        Ok(Grammar {
            signature,
            rules: ec.rules,
            lexicon,
            empties,
            kb: ast.kb.clone(),
            warnings,
            budget_exceeded: ec.budget_exceeded,
        })
    }

    /// Lexical structures for `word`, in source order.
    pub fn lookup<'a>(&'a self, word: &'a str) -> impl Iterator<Item = &'a LexicalEntry> + 'a {
        self.lexicon.iter().filter(move |e| e.word == word)
    }

    /// Words grouped in first-appearance order.
    pub fn words(&self) -> Vec<&str> {
        let mut seen = HashMap::new();
        let mut out = Vec::new();
        for e in &self.lexicon {
            if seen.insert(e.word.as_str(), ()).is_none() {
                out.push(e.word.as_str());
            }
        }
        out
    }

    /// The grammar as source text. Reading it back gives an equivalent
    /// grammar.
    pub fn to_source(&self) -> String {
        let sig = &self.signature;
        let mut out = self.signature.to_source();
        out.push('\n');
        for e in &self.empties {
            let _ = writeln!(out, "empty {}.", print_fs(sig, e.view(), PrintStyle::Compact));
        }
        for r in &self.rules {
            out.push_str(&r.to_source(sig));
            out.push('\n');
        }
        for e in &self.lexicon {
            let _ = writeln!(
                out,
                "{} ---> {}.",
                quote_atom(&e.word),
                print_fs(sig, e.fs.view(), PrintStyle::Compact)
            );
        }
        if !self.kb.is_empty() {
            out.push_str("\n#kb\n");
            for k in &self.kb {
                let _ = writeln!(
                    out,
                    "{}/{} -> {}.",
                    quote_atom(&k.predicate),
                    k.arity,
                    serde_json::to_string(&k.word).unwrap()
                );
            }
        }
        out
    }
}

fn build(sig: &Signature, d: &crate::frontend::ast::Desc, line: usize) -> Result<FeatureStructure, FrontendError> {
    let mut heap = Heap::new();
    let r = expand_desc(sig, &mut heap, d, &mut HashMap::new(), line)?;
    let r = heap.freeze(&[r])[0];
    Ok(FeatureStructure::from_parts(heap, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    const ANBN: &str = include_str!("../grammars/anbn.gr");

    #[test]
    fn list_types_are_injected_once() {
        let g = Grammar::from_source(ANBN, &GrammarOptions::default()).unwrap();
        assert!(g.signature.type_id("ne_list").is_some());
        let again = Grammar::from_source(&g.to_source(), &GrammarOptions::default()).unwrap();
        assert_eq!(again.signature.type_count(), g.signature.type_count());
    }

    #[test]
    fn source_round_trip_preserves_rules() {
        let g = Grammar::from_source(include_str!("../grammars/tiny.gr"), &GrammarOptions::default()).unwrap();
        let again = Grammar::from_source(&g.to_source(), &GrammarOptions::default()).unwrap();
        assert_eq!(again.rules.len(), g.rules.len());
        for (a, b) in g.rules.iter().zip(&again.rules) {
            assert!(a.equivalent(b, &g.signature));
        }
        for (a, b) in g.lexicon.iter().zip(&again.lexicon) {
            assert_eq!(a.word, b.word);
            assert!(a.fs.equivalent(&b.fs, &g.signature));
        }
    }
}
