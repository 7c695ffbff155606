//! Outer syntax of knowledge files: declarations with named fields whose
//! values are quoted term strings.

use crate::terms::SrcPos;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RawStr {
    pub text: String,
    /// Position of the first character inside the quotes.
    pub pos: SrcPos,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RawField {
    pub name: String,
    pub pos: SrcPos,
    pub variants: Option<Vec<u32>>,
    pub values: Vec<RawStr>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum RawDecl {
    Theory { name: RawStr, imports: Option<RawStr>, fields: Vec<RawField> },
    Problem { guh: Option<String>, id: RawStr, rls: Option<(String, SrcPos)>, fields: Vec<RawField> },
    Method { id: RawStr, fields: Vec<RawField> },
    Example { id: RawStr, fields: Vec<RawField> },
    Descriptor { name: RawStr, shape: (String, SrcPos), typ: Option<(String, SrcPos)> },
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Str(String),
    Num(u32),
    Colon,
    Eq,
    LBrace,
    RBrace,
    Comma,
    Eof,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: SrcPos,
}

const KEYWORDS: [&str; 5] = ["theory", "problem", "method", "example", "descriptor"];

pub(crate) fn lex(src: &str) -> Result<Vec<Token>, (SrcPos, String)> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let start = SrcPos::new(line, col, 1);
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, c);
            continue;
        }
        if c == '(' && chars.get(i + 1) == Some(&'*') {
            let mut depth = 0usize;
            loop {
                match (chars.get(i), chars.get(i + 1)) {
                    (Some('('), Some('*')) => {
                        depth += 1;
                        advance(&mut i, &mut line, &mut col, '(');
                        advance(&mut i, &mut line, &mut col, '*');
                    }
                    (Some('*'), Some(')')) => {
                        depth -= 1;
                        advance(&mut i, &mut line, &mut col, '*');
                        advance(&mut i, &mut line, &mut col, ')');
                        if depth == 0 {
                            break;
                        }
                    }
                    (Some(&c), _) => advance(&mut i, &mut line, &mut col, c),
                    (None, _) => return Err((start, "unterminated comment".into())),
                }
            }
            continue;
        }
        if c == '"' {
            advance(&mut i, &mut line, &mut col, c);
            let content = SrcPos::new(line, col, 0);
            let mut text = String::new();
            loop {
                match chars.get(i) {
                    None => return Err((start, "unterminated string".into())),
                    Some('"') => {
                        advance(&mut i, &mut line, &mut col, '"');
                        break;
                    }
                    Some('\\') if chars.get(i + 1) == Some(&'"') => {
                        text.push('"');
                        advance(&mut i, &mut line, &mut col, '\\');
                        advance(&mut i, &mut line, &mut col, '"');
                    }
                    Some(&c) => {
                        text.push(c);
                        advance(&mut i, &mut line, &mut col, c);
                    }
                }
            }
            let len = text.chars().count();
            out.push(Token { tok: Tok::Str(text), pos: SrcPos { len, ..content } });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut name = String::new();
            while let Some(&c) = chars.get(i).filter(|c| c.is_alphanumeric() || **c == '_' || **c == '\'') {
                name.push(c);
                advance(&mut i, &mut line, &mut col, c);
            }
            let len = name.chars().count();
            out.push(Token { tok: Tok::Ident(name), pos: SrcPos { len, ..start } });
            continue;
        }
        if c.is_ascii_digit() {
            let mut digits = String::new();
            while let Some(&d) = chars.get(i).filter(|c| c.is_ascii_digit()) {
                digits.push(d);
                advance(&mut i, &mut line, &mut col, d);
            }
            let n = digits.parse().map_err(|_| (start, format!("number too large: {digits}")))?;
            out.push(Token { tok: Tok::Num(n), pos: start });
            continue;
        }
        let tok = match c {
            ':' => Tok::Colon,
            '=' => Tok::Eq,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            ',' => Tok::Comma,
            _ => return Err((start, format!("unexpected character '{c}'"))),
        };
        advance(&mut i, &mut line, &mut col, c);
        out.push(Token { tok, pos: start });
    }
    out.push(Token { tok: Tok::Eof, pos: SrcPos::new(line, col, 0) });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
}

type PResult<T> = Result<T, (SrcPos, String)>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> SrcPos {
        self.toks[self.at].pos
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> PResult<()> {
        if *self.peek() == want {
            self.next();
            Ok(())
        } else {
            Err((self.pos(), format!("expected {what}")))
        }
    }

    fn string(&mut self, what: &str) -> PResult<RawStr> {
        match self.peek().clone() {
            Tok::Str(text) => {
                let pos = self.next().pos;
                Ok(RawStr { text, pos })
            }
            _ => Err((self.pos(), format!("expected {what} in quotes"))),
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, SrcPos)> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let pos = self.next().pos;
                Ok((name, pos))
            }
            _ => Err((self.pos(), format!("expected {what}"))),
        }
    }

    fn at_decl_end(&self) -> bool {
        match self.peek() {
            Tok::Eof => true,
            Tok::Ident(k) => KEYWORDS.contains(&k.as_str()),
            _ => false,
        }
    }

    fn variants(&mut self) -> PResult<Vec<u32>> {
        self.expect(Tok::LBrace, "'{'")?;
        let mut out = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::Num(n) if n > 0 => {
                    self.next();
                    out.push(n);
                }
                _ => return Err((self.pos(), "expected a positive variant number".into())),
            }
            match self.peek() {
                Tok::Comma => {
                    self.next();
                }
                Tok::RBrace => {
                    self.next();
                    return Ok(out);
                }
                _ => return Err((self.pos(), "expected ',' or '}'".into())),
            }
        }
    }

    /// `Name [{1, 2}] : "v" "v" ...`
    fn field(&mut self) -> PResult<RawField> {
        let (name, pos) = self.ident("a field name")?;
        let variants = if *self.peek() == Tok::LBrace { Some(self.variants()?) } else { None };
        self.expect(Tok::Colon, &format!("':' after '{name}'"))?;
        let mut values = Vec::new();
        while let Tok::Str(_) = self.peek() {
            values.push(self.string("a value")?);
        }
        if values.is_empty() {
            return Err((self.pos(), format!("field '{name}' needs at least one quoted value")));
        }
        Ok(RawField { name, pos, variants, values })
    }

    fn fields(&mut self) -> PResult<Vec<RawField>> {
        let mut out = Vec::new();
        while !self.at_decl_end() {
            out.push(self.field()?);
        }
        Ok(out)
    }

    fn decl(&mut self) -> PResult<RawDecl> {
        let (kw, pos) = self.ident("a declaration")?;
        match kw.as_str() {
            "theory" => {
                let name = self.string("a theory name")?;
                let imports = if *self.peek() == Tok::Ident("imports".into()) {
                    self.next();
                    Some(self.string("an imported theory")?)
                } else {
                    None
                };
                Ok(RawDecl::Theory { name, imports, fields: self.fields()? })
            }
            "problem" => {
                let guh = match self.peek() {
                    Tok::Ident(_) => {
                        let (g, _) = self.ident("a guh")?;
                        self.expect(Tok::Colon, "':' after the guh")?;
                        Some(g)
                    }
                    _ => None,
                };
                let id = self.string("a problem id")?;
                self.expect(Tok::Eq, "'='")?;
                let mut rls = None;
                let mut fields = Vec::new();
                while !self.at_decl_end() {
                    let bare =
                        matches!(self.peek(), Tok::Ident(_)) && !matches!(self.peek2(), Tok::Colon | Tok::LBrace);
                    if bare {
                        if rls.is_some() {
                            return Err((self.pos(), "a problem names one rule set".into()));
                        }
                        rls = Some(self.ident("a rule set")?);
                    } else {
                        fields.push(self.field()?);
                    }
                }
                Ok(RawDecl::Problem { guh, id, rls, fields })
            }
            "method" => {
                let id = self.string("a method id")?;
                self.expect(Tok::Eq, "'='")?;
                Ok(RawDecl::Method { id, fields: self.fields()? })
            }
            "example" => {
                let id = self.string("an example id")?;
                self.expect(Tok::Eq, "'='")?;
                Ok(RawDecl::Example { id, fields: self.fields()? })
            }
            "descriptor" => {
                let name = self.string("a descriptor name")?;
                self.expect(Tok::Colon, "':'")?;
                let shape = self.ident("an argument shape")?;
                let typ = match (self.peek(), self.at_decl_end()) {
                    (Tok::Ident(_), false) => Some(self.ident("a type")?),
                    _ => None,
                };
                Ok(RawDecl::Descriptor { name, shape, typ })
            }
            _ => Err((pos, format!("unknown declaration '{kw}'"))),
        }
    }
}

pub(crate) fn parse_file(src: &str) -> Result<Vec<RawDecl>, (SrcPos, String)> {
    let mut p = Parser { toks: lex(src)?, at: 0 };
    let mut out = Vec::new();
    while *p.peek() != Tok::Eof {
        out.push(p.decl()?);
    }
    Ok(out)
}
