use super::SyntaxError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// Lowercase-initial atom, digit string, or quoted atom.
    Atom(String),
    Var(String),
    Str(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    Comma,
    Colon,
    Semi,
    Dot,
    Bar,
    At,
    Gt,
    Slash,
    /// `--->`
    LexArrow,
    /// `===>`
    RuleArrow,
    /// `->`
    KbArrow,
    /// `:-`
    Neck,
    /// `=\=`
    Ineq,
    /// `#kb`
    KbSection,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub(crate) fn is_reserved(s: &str) -> bool {
    matches!(s, "sub" | "intro" | "macro" | "rule" | "empty")
}

pub fn lex(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: &str| SyntaxError {
        line,
        col,
        expected: msg.to_string(),
        found: String::new(),
    };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            i += 2;
            col += 2;
            while i < chars.len() && !(chars[i] == '*' && chars.get(i + 1) == Some(&'/')) {
                if chars[i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                i += 1;
            }
            if i >= chars.len() {
                return Err(err(tl, tc, "end of block comment"));
            }
            i += 2;
            col += 2;
            continue;
        }
        let starts = |s: &str| {
            s.chars()
                .enumerate()
                .all(|(k, ch)| chars.get(i + k) == Some(&ch))
        };
        let fixed = [
            ("--->", Tok::LexArrow),
            ("===>", Tok::RuleArrow),
            ("=\\=", Tok::Ineq),
            ("->", Tok::KbArrow),
            (":-", Tok::Neck),
            ("#kb", Tok::KbSection),
        ];
        if let Some((s, t)) = fixed.iter().find(|(s, _)| starts(s)) {
            out.push(Token {
                tok: t.clone(),
                line: tl,
                col: tc,
            });
            advance(s.chars().count(), &mut i, &mut col);
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            '{' => Some(Tok::LBrace),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            ';' => Some(Tok::Semi),
            '.' => Some(Tok::Dot),
            '|' => Some(Tok::Bar),
            '@' => Some(Tok::At),
            '>' => Some(Tok::Gt),
            '/' => Some(Tok::Slash),
            _ => None,
        };
        if let Some(t) = single {
            out.push(Token {
                tok: t,
                line: tl,
                col: tc,
            });
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '\'' || c == '"' {
            let quote = c;
            let mut s = String::new();
            let mut j = i + 1;
            loop {
                match chars.get(j) {
                    None | Some('\n') => return Err(err(tl, tc, "closing quote")),
                    Some('\\') => {
                        match chars.get(j + 1) {
                            Some(&e) => s.push(e),
                            None => return Err(err(tl, tc, "closing quote")),
                        }
                        j += 2;
                    }
                    Some(&ch) if ch == quote => break,
                    Some(&ch) => {
                        s.push(ch);
                        j += 1;
                    }
                }
            }
            let n = j + 1 - i;
            out.push(Token {
                tok: if quote == '"' { Tok::Str(s) } else { Tok::Atom(s) },
                line: tl,
                col: tc,
            });
            advance(n, &mut i, &mut col);
            continue;
        }
        if c.is_alphanumeric() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            let tok = if c.is_uppercase() || c == '_' {
                Tok::Var(word)
            } else {
                Tok::Atom(word)
            };
            out.push(Token {
                tok,
                line: tl,
                col: tc,
            });
            advance(j - i, &mut i, &mut col);
            continue;
        }
        return Err(SyntaxError {
            line: tl,
            col: tc,
            expected: "a token".into(),
            found: c.to_string(),
        });
    }
    Ok(out)
}
