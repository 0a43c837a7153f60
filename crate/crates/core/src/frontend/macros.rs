use std::collections::HashMap;

use super::ast::*;
use super::FrontendError;

struct Macros<'a> {
    defs: HashMap<&'a str, &'a MacroDecl>,
    fresh: usize,
}

/// Inlines every macro call. Variables local to a macro body are renamed
/// apart on each call; parameters are replaced by the call's arguments.
pub fn expand_macros(g: &GrammarAst) -> Result<GrammarAst, FrontendError> {
    let mut defs = HashMap::new();
    for m in &g.macros {
        if defs.insert(m.name.as_str(), m).is_some() {
            return Err(FrontendError::DuplicateMacro(m.name.clone()));
        }
    }
    let mut mx = Macros { defs, fresh: 0 };
    let mut out = g.clone();
    out.macros.clear();
    for r in &mut out.rules {
        r.head = mx.expand(&r.head, r.line, &mut Vec::new())?;
        for item in &mut r.body {
            item.desc = mx.expand(&item.desc, r.line, &mut Vec::new())?;
        }
    }
    for l in &mut out.lexicon {
        for d in &mut l.descs {
            *d = mx.expand(d, l.line, &mut Vec::new())?;
        }
    }
    for e in &mut out.empties {
        e.desc = mx.expand(&e.desc, e.line, &mut Vec::new())?;
    }
    // Bodies of unused macros are checked too.
    for m in &g.macros {
        let call = Desc::Macro {
            name: m.name.clone(),
            args: m.params.iter().map(|p| Desc::Var(p.clone())).collect(),
        };
        mx.expand(&call, m.line, &mut Vec::new())?;
    }
    Ok(out)
}

impl<'a> Macros<'a> {
    fn expand(&mut self, d: &Desc, line: usize, stack: &mut Vec<String>) -> Result<Desc, FrontendError> {
        Ok(match d {
            Desc::Type(_) | Desc::Var(_) => d.clone(),
            Desc::Feat(f, sub) => Desc::Feat(f.clone(), Box::new(self.expand(sub, line, stack)?)),
            Desc::And(ds) => Desc::And(
                ds.iter()
                    .map(|x| self.expand(x, line, stack))
                    .collect::<Result<_, _>>()?,
            ),
            Desc::List { items, tail } => Desc::List {
                items: items
                    .iter()
                    .map(|x| self.expand(x, line, stack))
                    .collect::<Result<_, _>>()?,
                tail: match tail {
                    Some(t) => Some(Box::new(self.expand(t, line, stack)?)),
                    None => None,
                },
            },
            Desc::Macro { name, args } => {
                let def = *self.defs.get(name.as_str()).ok_or_else(|| FrontendError::UnknownMacro {
                    name: name.clone(),
                    line,
                })?;
                if def.params.len() != args.len() {
                    return Err(FrontendError::ArityMismatch {
                        name: name.clone(),
                        expected: def.params.len(),
                        found: args.len(),
                        line,
                    });
                }
                if let Some(pos) = stack.iter().position(|n| n == name) {
                    let mut cycle = stack[pos..].to_vec();
                    cycle.push(name.clone());
                    return Err(FrontendError::RecursiveMacro(cycle));
                }
                let args: Vec<Desc> = args
                    .iter()
                    .map(|a| self.expand(a, line, stack))
                    .collect::<Result<_, _>>()?;
                self.fresh += 1;
                let tag = self.fresh;
                let subst: HashMap<&str, &Desc> =
                    def.params.iter().map(|p| p.as_str()).zip(args.iter()).collect();
                let body = substitute(&def.body, &subst, &format!("_M{tag}_"));
                stack.push(name.clone());
                let r = self.expand(&body, line, stack);
                stack.pop();
                r?
            }
        })
    }
}

fn substitute(d: &Desc, subst: &HashMap<&str, &Desc>, prefix: &str) -> Desc {
    match d {
        Desc::Var(v) => match subst.get(v.as_str()) {
            Some(a) => (*a).clone(),
            None => Desc::Var(format!("{prefix}{v}")),
        },
        Desc::Type(_) => d.clone(),
        Desc::Feat(f, sub) => Desc::Feat(f.clone(), Box::new(substitute(sub, subst, prefix))),
        Desc::And(ds) => Desc::And(ds.iter().map(|x| substitute(x, subst, prefix)).collect()),
        Desc::List { items, tail } => Desc::List {
            items: items.iter().map(|x| substitute(x, subst, prefix)).collect(),
            tail: tail.as_ref().map(|t| Box::new(substitute(t, subst, prefix))),
        },
        Desc::Macro { name, args } => Desc::Macro {
            name: name.clone(),
            args: args.iter().map(|x| substitute(x, subst, prefix)).collect(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_desc, parse_grammar};

    fn expand_one(src: &str, desc: &str) -> Result<Desc, FrontendError> {
        let mut g = parse_grammar(src).unwrap();
        g.lexicon.push(LexEntry {
            word: "w".into(),
            descs: vec![parse_desc(desc).unwrap()],
            line: 1,
        });
        expand_macros(&g).map(|g| g.lexicon[0].descs[0].clone())
    }

    #[test]
    fn parameter_is_inlined() {
        let d = expand_one("np(X) macro (syn:cat:np, sem:X).", "@np(R1)").unwrap();
        assert_eq!(d, parse_desc("(syn:cat:np, sem:R1)").unwrap());
    }

    #[test]
    fn nested_macros_expand_transitively() {
        let src = "np macro syn:cat:np.\nsubj(X) macro (@np, sem:X).";
        let d = expand_one(src, "@subj(Y)").unwrap();
        assert_eq!(d, parse_desc("(syn:cat:np, sem:Y)").unwrap());
    }

    #[test]
    fn locals_are_renamed_per_call() {
        let d = expand_one("pair macro (f:L, g:L).", "(a:@pair, b:@pair)").unwrap();
        let mut vars = Vec::new();
        d.for_each_var(&mut |v| vars.push(v.to_string()));
        assert_eq!(vars.len(), 4);
        assert_eq!(vars[0], vars[1]);
        assert_eq!(vars[2], vars[3]);
        assert_ne!(vars[0], vars[2]);
    }

    #[test]
    fn recursion_is_rejected() {
        let g = parse_grammar("a macro (f:@b).\nb macro (g:@a).").unwrap();
        match expand_macros(&g) {
            Err(FrontendError::RecursiveMacro(c)) => assert_eq!(c, vec!["a", "b", "a"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_and_arity_errors() {
        assert!(matches!(expand_one("", "@nope"), Err(FrontendError::UnknownMacro { .. })));
        assert!(matches!(
            expand_one("m(X) macro X.", "@m"),
            Err(FrontendError::ArityMismatch { expected: 1, found: 0, .. })
        ));
    }
}
