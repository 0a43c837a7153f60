use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::{FrontendError, SyntaxError};
use crate::signature::TypeDecl;

/// Parses grammar source text into an AST.
pub fn parse_grammar(src: &str) -> Result<GrammarAst, FrontendError> {
    let toks = lex(src)?;
    let mut g = GrammarAst::default();
    let mut p = Parser { toks: &toks, pos: 0 };
    let mut in_kb = false;
    while !p.at_end() {
        if p.peek() == Some(&Tok::KbSection) {
            p.pos += 1;
            in_kb = true;
            continue;
        }
        let clause_end = p.clause_end();
        p.reject_unsupported(clause_end)?;
        if in_kb {
            g.kb.push(p.kb_record()?);
        } else {
            p.clause(&mut g)?;
        }
    }
    Ok(g)
}

/// Parses a single description (as written after `--->`).
pub fn parse_desc(src: &str) -> Result<Desc, FrontendError> {
    let toks = lex(src)?;
    let mut p = Parser { toks: &toks, pos: 0 };
    let end = toks.len();
    p.reject_unsupported(end)?;
    let d = p.conj()?;
    if p.peek() == Some(&Tok::Dot) {
        p.pos += 1;
    }
    if !p.at_end() {
        return Err(p.expected("end of description"));
    }
    Ok(d)
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map_or(1, |t| t.line)
    }

    fn expected(&self, what: &str) -> FrontendError {
        let (line, col, found) = match self.toks.get(self.pos) {
            Some(t) => (t.line, t.col, describe(&t.tok)),
            None => (
                self.toks.last().map_or(1, |t| t.line),
                self.toks.last().map_or(1, |t| t.col),
                "end of input".to_string(),
            ),
        };
        FrontendError::Syntax(SyntaxError {
            line,
            col,
            expected: what.to_string(),
            found,
        })
    }

    fn eat(&mut self, t: &Tok, what: &str) -> Result<(), FrontendError> {
        if self.peek() == Some(t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.expected(what))
        }
    }

    fn atom(&mut self, what: &str) -> Result<String, FrontendError> {
        match self.peek() {
            Some(Tok::Atom(a)) => {
                let a = a.clone();
                self.pos += 1;
                Ok(a)
            }
            _ => Err(self.expected(what)),
        }
    }

    /// Index of the `.` ending the clause starting at `pos`, ignoring dots
    /// nested in brackets.
    fn clause_end(&self) -> usize {
        let mut depth = 0i32;
        for (k, t) in self.toks.iter().enumerate().skip(self.pos) {
            match t.tok {
                Tok::LParen | Tok::LBrack => depth += 1,
                Tok::RParen | Tok::RBrack => depth -= 1,
                Tok::Dot if depth <= 0 => return k,
                _ => {}
            }
        }
        self.toks.len()
    }

    fn reject_unsupported(&self, end: usize) -> Result<(), FrontendError> {
        let unsupported = |construct: &str, t: &Token| {
            Err(FrontendError::Unsupported {
                construct: construct.to_string(),
                line: t.line,
            })
        };
        for k in self.pos..end.min(self.toks.len()) {
            let t = &self.toks[k];
            let next = self.toks.get(k + 1).map(|t| &t.tok);
            match &t.tok {
                Tok::Neck => return unsupported("definite clause (`:-`)", t),
                Tok::Ineq => return unsupported("inequation (`=\\=`)", t),
                Tok::LBrace => return unsupported("set value", t),
                Tok::Atom(a) if a == "cats" && next == Some(&Tok::Gt) => {
                    return unsupported("`cats>` category list", t)
                }
                Tok::Atom(a) if a == "goal" && next == Some(&Tok::Gt) => {
                    return unsupported("`goal>` procedural attachment", t)
                }
                Tok::Atom(a) if a == "lex_rule" || a == "morphs" => {
                    return unsupported("lexical rule", t)
                }
                Tok::Atom(a) if a == "cons" && k == self.pos + 1 => {
                    return unsupported("type constraint (`cons`)", t)
                }
                Tok::Atom(a)
                    if (a == "ext" || a == "intensional")
                        && next == Some(&Tok::LParen)
                        && k == self.pos =>
                {
                    return unsupported("extensional/intensional type declaration", t)
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn clause(&mut self, g: &mut GrammarAst) -> Result<(), FrontendError> {
        let line = self.line();
        match (self.peek(), self.peek_at(1)) {
            (Some(Tok::Atom(_)), Some(Tok::Atom(kw))) if kw == "sub" || kw == "intro" => {
                g.signature.push(self.type_decl()?);
            }
            (Some(Tok::Atom(e)), _) if e == "empty" && self.peek_at(1) != Some(&Tok::LexArrow) => {
                self.pos += 1;
                let desc = self.conj()?;
                self.eat(&Tok::Dot, "`.` after empty category")?;
                g.empties.push(EmptyDecl { desc, line });
            }
            (Some(Tok::Atom(_)), Some(Tok::Atom(kw))) if kw == "rule" => {
                let name = self.atom("rule name")?;
                self.pos += 1;
                let mut r = self.rule(line)?;
                r.name = Some(name);
                g.rules.push(r);
            }
            (Some(Tok::Atom(_)), Some(Tok::LexArrow)) => {
                let word = self.atom("word")?;
                self.pos += 1;
                let mut descs = vec![self.conj()?];
                while self.peek() == Some(&Tok::Semi) {
                    self.pos += 1;
                    descs.push(self.conj()?);
                }
                self.eat(&Tok::Dot, "`;` or `.` after lexical entry")?;
                g.lexicon.push(LexEntry { word, descs, line });
            }
            (Some(Tok::Atom(_)), Some(Tok::LParen | Tok::Atom(_))) if self.is_macro_head() => {
                g.macros.push(self.macro_decl(line)?);
            }
            _ => {
                let r = self.rule(line)?;
                g.rules.push(r);
            }
        }
        Ok(())
    }

    fn is_macro_head(&self) -> bool {
        match self.peek_at(1) {
            Some(Tok::Atom(kw)) => kw == "macro",
            Some(Tok::LParen) => {
                let mut k = self.pos + 2;
                while let Some(t) = self.toks.get(k) {
                    if t.tok == Tok::RParen {
                        return matches!(self.toks.get(k + 1).map(|t| &t.tok), Some(Tok::Atom(kw)) if kw == "macro");
                    }
                    k += 1;
                }
                false
            }
            _ => false,
        }
    }

    fn macro_decl(&mut self, line: usize) -> Result<MacroDecl, FrontendError> {
        let name = self.atom("macro name")?;
        let mut params = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            loop {
                match self.peek() {
                    Some(Tok::Var(v)) => {
                        params.push(v.clone());
                        self.pos += 1;
                    }
                    _ => return Err(self.expected("macro parameter variable")),
                }
                match self.peek() {
                    Some(Tok::Comma) => self.pos += 1,
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.expected("`,` or `)`")),
                }
            }
        }
        self.pos += 1; // `macro`
        let body = self.conj()?;
        self.eat(&Tok::Dot, "`.` after macro")?;
        Ok(MacroDecl {
            name,
            params,
            body,
            line,
        })
    }

    fn type_decl(&mut self) -> Result<TypeDecl, FrontendError> {
        let line = self.line();
        let name = self.atom("type name")?;
        let mut subs = Vec::new();
        let mut intro = Vec::new();
        if matches!(self.peek(), Some(Tok::Atom(k)) if k == "sub") {
            self.pos += 1;
            self.eat(&Tok::LBrack, "`[` after `sub`")?;
            while self.peek() != Some(&Tok::RBrack) {
                subs.push(self.atom("subtype name")?);
                if self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                } else if self.peek() != Some(&Tok::RBrack) {
                    return Err(self.expected("`,` or `]`"));
                }
            }
            self.pos += 1;
        }
        if matches!(self.peek(), Some(Tok::Atom(k)) if k == "intro") {
            self.pos += 1;
            self.eat(&Tok::LBrack, "`[` after `intro`")?;
            while self.peek() != Some(&Tok::RBrack) {
                let f = self.atom("feature name")?;
                self.eat(&Tok::Colon, "`:` in feature declaration")?;
                let t = self.atom("value restriction type")?;
                intro.push((f, t));
                if self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                } else if self.peek() != Some(&Tok::RBrack) {
                    return Err(self.expected("`,` or `]`"));
                }
            }
            self.pos += 1;
        }
        self.eat(&Tok::Dot, "`.` after type declaration")?;
        Ok(TypeDecl {
            name,
            subs,
            intro,
            line,
        })
    }

    fn rule(&mut self, line: usize) -> Result<RuleDecl, FrontendError> {
        let head = self.conj()?;
        self.eat(&Tok::RuleArrow, "`===>`")?;
        let mut body = Vec::new();
        loop {
            let mut initial_only = false;
            if let (Some(Tok::Atom(m)), Some(Tok::Gt)) = (self.peek(), self.peek_at(1)) {
                match m.as_str() {
                    "cat" => {}
                    "init" => initial_only = true,
                    _ => return Err(self.expected("`cat>` or `init>`")),
                }
                self.pos += 2;
            }
            body.push(BodyItem {
                desc: self.term()?,
                initial_only,
            });
            match self.peek() {
                Some(Tok::Comma) => self.pos += 1,
                Some(Tok::Dot) => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(self.expected("`,` or `.` in rule body")),
            }
        }
        Ok(RuleDecl {
            name: None,
            head,
            body,
            line,
        })
    }

    fn kb_record(&mut self) -> Result<KbRecord, FrontendError> {
        let predicate = self.atom("predicate name")?;
        self.eat(&Tok::Slash, "`/`")?;
        let arity = match self.peek() {
            Some(Tok::Atom(n)) => n.parse().map_err(|_| self.expected("arity"))?,
            _ => return Err(self.expected("arity")),
        };
        self.pos += 1;
        self.eat(&Tok::KbArrow, "`->`")?;
        let word = match self.peek() {
            Some(Tok::Str(s)) | Some(Tok::Atom(s)) => s.clone(),
            _ => return Err(self.expected("quoted word")),
        };
        self.pos += 1;
        self.eat(&Tok::Dot, "`.` after knowledge-base record")?;
        Ok(KbRecord {
            predicate,
            arity,
            word,
        })
    }

    /// `term (, term)*`
    fn conj(&mut self) -> Result<Desc, FrontendError> {
        let mut items = vec![self.term()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            items.push(self.term()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Desc::And(items)
        })
    }

    /// `feat:term | primary`
    fn term(&mut self) -> Result<Desc, FrontendError> {
        if let (Some(Tok::Atom(f)), Some(Tok::Colon)) = (self.peek(), self.peek_at(1)) {
            let f = f.clone();
            self.pos += 2;
            let d = self.term()?;
            return Ok(Desc::Feat(f, Box::new(d)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Desc, FrontendError> {
        let line = self.line();
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let d = self.conj()?;
                if self.peek() == Some(&Tok::Semi) {
                    return Err(FrontendError::Unsupported {
                        construct: "disjunction inside a description".into(),
                        line,
                    });
                }
                self.eat(&Tok::RParen, "`)`")?;
                Ok(d)
            }
            Some(Tok::Atom(a)) => {
                self.pos += 1;
                Ok(Desc::Type(a))
            }
            Some(Tok::Var(v)) => {
                self.pos += 1;
                Ok(Desc::Var(v))
            }
            Some(Tok::LBrack) => {
                self.pos += 1;
                let mut items = Vec::new();
                let mut tail = None;
                if self.peek() == Some(&Tok::RBrack) {
                    self.pos += 1;
                    return Ok(Desc::List { items, tail });
                }
                loop {
                    items.push(self.term()?);
                    match self.peek() {
                        Some(Tok::Comma) => self.pos += 1,
                        Some(Tok::Bar) => {
                            self.pos += 1;
                            tail = Some(Box::new(self.term()?));
                            self.eat(&Tok::RBrack, "`]`")?;
                            break;
                        }
                        Some(Tok::RBrack) => {
                            self.pos += 1;
                            break;
                        }
                        _ => return Err(self.expected("`,`, `|` or `]` in list")),
                    }
                }
                Ok(Desc::List { items, tail })
            }
            Some(Tok::At) => {
                self.pos += 1;
                let name = self.atom("macro name")?;
                let mut args = Vec::new();
                if self.peek() == Some(&Tok::LParen) {
                    self.pos += 1;
                    loop {
                        args.push(self.term()?);
                        match self.peek() {
                            Some(Tok::Comma) => self.pos += 1,
                            Some(Tok::RParen) => {
                                self.pos += 1;
                                break;
                            }
                            _ => return Err(self.expected("`,` or `)` in macro call")),
                        }
                    }
                }
                Ok(Desc::Macro { name, args })
            }
            _ => Err(self.expected("a description")),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Atom(a) => format!("`{a}`"),
        Tok::Var(v) => format!("variable `{v}`"),
        Tok::Str(s) => format!("string {s:?}"),
        other => format!("{other:?}"),
    }
}
