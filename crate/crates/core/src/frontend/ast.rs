use std::fmt;

use crate::signature::TypeDecl;

/// A partial description of a feature structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Desc {
    Type(String),
    Var(String),
    Feat(String, Box<Desc>),
    And(Vec<Desc>),
    List {
        items: Vec<Desc>,
        tail: Option<Box<Desc>>,
    },
    Macro {
        name: String,
        args: Vec<Desc>,
    },
}

impl Desc {
    pub fn ty(name: &str) -> Desc {
        Desc::Type(name.to_string())
    }

    pub fn var(name: &str) -> Desc {
        Desc::Var(name.to_string())
    }

    pub fn feat(name: &str, d: Desc) -> Desc {
        Desc::Feat(name.to_string(), Box::new(d))
    }

    /// Visits every variable occurrence.
    pub fn for_each_var(&self, f: &mut impl FnMut(&str)) {
        match self {
            Desc::Var(v) => f(v),
            Desc::Type(_) => {}
            Desc::Feat(_, d) => d.for_each_var(f),
            Desc::And(ds) => ds.iter().for_each(|d| d.for_each_var(f)),
            Desc::List { items, tail } => {
                items.iter().for_each(|d| d.for_each_var(f));
                if let Some(t) = tail {
                    t.for_each_var(f);
                }
            }
            Desc::Macro { args, .. } => args.iter().for_each(|d| d.for_each_var(f)),
        }
    }

    fn is_conj(&self) -> bool {
        matches!(self, Desc::And(ds) if ds.len() > 1)
    }
}

/// Writes a description so that it parses back to the same tree. Nested
/// conjunctions are always parenthesized.
impl fmt::Display for Desc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Desc::Type(t) => write!(f, "{}", quote_atom(t)),
            Desc::Var(v) => write!(f, "{v}"),
            Desc::Feat(name, d) => {
                if d.is_conj() {
                    write!(f, "{name}:({d})")
                } else {
                    write!(f, "{name}:{d}")
                }
            }
            Desc::And(ds) => {
                for (i, d) in ds.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    if d.is_conj() {
                        write!(f, "({d})")?;
                    } else {
                        write!(f, "{d}")?;
                    }
                }
                Ok(())
            }
            Desc::List { items, tail } => {
                f.write_str("[")?;
                for (i, d) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write_term(f, d)?;
                }
                if let Some(t) = tail {
                    f.write_str("|")?;
                    write_term(f, t)?;
                }
                f.write_str("]")
            }
            Desc::Macro { name, args } => {
                write!(f, "@{name}")?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, d) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write_term(f, d)?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

/// A description in a position where top-level commas separate items.
pub(crate) fn write_term(f: &mut fmt::Formatter<'_>, d: &Desc) -> fmt::Result {
    if d.is_conj() {
        write!(f, "({d})")
    } else {
        write!(f, "{d}")
    }
}

pub(crate) fn quote_atom(s: &str) -> String {
    let plain = s
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_lowercase() || c.is_ascii_digit())
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if plain && !super::lexer::is_reserved(s) {
        s.to_string()
    } else {
        format!("'{}'", s.replace('\\', "\\\\").replace('\'', "\\'"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BodyItem {
    pub desc: Desc,
    /// `init>`: matches only edges placed on the chart at initialization.
    pub initial_only: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleDecl {
    pub name: Option<String>,
    pub head: Desc,
    pub body: Vec<BodyItem>,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexEntry {
    pub word: String,
    pub descs: Vec<Desc>,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmptyDecl {
    pub desc: Desc,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MacroDecl {
    pub name: String,
    pub params: Vec<String>,
    pub body: Desc,
    pub line: usize,
}

/// `pred/arity -> "word".` in a `#kb` section.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct KbRecord {
    pub predicate: String,
    pub arity: usize,
    pub word: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GrammarAst {
    pub signature: Vec<TypeDecl>,
    pub rules: Vec<RuleDecl>,
    pub lexicon: Vec<LexEntry>,
    pub empties: Vec<EmptyDecl>,
    pub macros: Vec<MacroDecl>,
    pub kb: Vec<KbRecord>,
}

impl fmt::Display for GrammarAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.signature {
            write!(f, "{} sub [", quote_atom(&d.name))?;
            let subs: Vec<String> = d.subs.iter().map(|s| quote_atom(s)).collect();
            f.write_str(&subs.join(", "))?;
            f.write_str("]")?;
            if !d.intro.is_empty() {
                let intro: Vec<String> = d
                    .intro
                    .iter()
                    .map(|(a, b)| format!("{}:{}", quote_atom(a), quote_atom(b)))
                    .collect();
                write!(f, " intro [{}]", intro.join(", "))?;
            }
            f.write_str(".\n")?;
        }
        for m in &self.macros {
            f.write_str(&quote_atom(&m.name))?;
            if !m.params.is_empty() {
                write!(f, "({})", m.params.join(", "))?;
            }
            writeln!(f, " macro {}.", m.body)?;
        }
        for e in &self.empties {
            writeln!(f, "empty {}.", e.desc)?;
        }
        for r in &self.rules {
            if let Some(n) = &r.name {
                write!(f, "{} rule ", quote_atom(n))?;
            }
            write!(f, "{}\n===>\n", r.head)?;
            for (i, item) in r.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(",\n")?;
                }
                f.write_str(if item.initial_only { "init> " } else { "cat> " })?;
                write_term(f, &item.desc)?;
            }
            f.write_str(".\n")?;
        }
        for l in &self.lexicon {
            write!(f, "{} --->", quote_atom(&l.word))?;
            for (i, d) in l.descs.iter().enumerate() {
                if i > 0 {
                    f.write_str(";")?;
                }
                write!(f, " {d}")?;
            }
            f.write_str(".\n")?;
        }
        if !self.kb.is_empty() {
            f.write_str("#kb\n")?;
            for k in &self.kb {
                writeln!(
                    f,
                    "{}/{} -> {}.",
                    quote_atom(&k.predicate),
                    k.arity,
                    serde_json::to_string(&k.word).unwrap()
                )?;
            }
        }
        Ok(())
    }
}
