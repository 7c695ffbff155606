use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::pow;

use super::{greek_from_ascii, SrcPos};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Num(BigRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Eq,
    Lt,
    Le,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    ColonColon,
    OpenInterval,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Num(n) => format!("number {n}"),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::Eq => "'='".into(),
            Tok::Lt => "'<'".into(),
            Tok::Le => "'<='".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::Comma => "','".into(),
            Tok::ColonColon => "'::'".into(),
            Tok::OpenInterval => "'<..<'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: SrcPos,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LexError {
    pub pos: SrcPos,
    pub msg: String,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn here(&self) -> (usize, usize) {
        (self.line, self.col)
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || (!c.is_ascii() && c.is_alphabetic())
}

fn is_ident_continue(c: char) -> bool {
    is_ident_start(c) || c.is_ascii_digit() || c == '\''
}

/// Splits `src` into tokens. The trailing `Eof` sits right after the last
/// token, so truncated input is reported where the text stops.
pub(crate) fn lex(src: &str) -> Result<Vec<Token>, LexError> {
    let mut cur = Cursor { chars: src.chars().peekable(), line: 1, col: 1 };
    let mut out: Vec<Token> = Vec::new();
    let mut end = SrcPos::START;

    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        let (line, col) = cur.here();
        let tok = if c.is_ascii_digit() {
            lex_number(&mut cur)
        } else if is_ident_start(c) {
            let mut name = String::new();
            while let Some(c) = cur.peek().filter(|c| is_ident_continue(*c)) {
                name.push(c);
                cur.bump();
            }
            match greek_from_ascii(&name) {
                Some(g) => Tok::Ident(g.to_string()),
                None => Tok::Ident(name),
            }
        } else if c == '\\' {
            lex_escape(&mut cur, line, col)?
        } else {
            cur.bump();
            match c {
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                '=' => Tok::Eq,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ',' => Tok::Comma,
                ':' if cur.peek() == Some(':') => {
                    cur.bump();
                    Tok::ColonColon
                }
                '<' => match cur.peek() {
                    Some('=') => {
                        cur.bump();
                        Tok::Le
                    }
                    Some('.') => {
                        for expected in ['.', '.', '<'] {
                            if cur.peek() != Some(expected) {
                                let (l, c) = cur.here();
                                return Err(LexError {
                                    pos: SrcPos::new(l, c, 1),
                                    msg: "malformed interval operator, expected '<..<'".into(),
                                });
                            }
                            cur.bump();
                        }
                        Tok::OpenInterval
                    }
                    _ => Tok::Lt,
                },
                _ => {
                    return Err(LexError { pos: SrcPos::new(line, col, 1), msg: format!("unexpected character '{c}'") })
                }
            }
        };
        let len = if cur.line == line { cur.col - col } else { 1 };
        let pos = SrcPos::new(line, col, len);
        end = SrcPos::new(line, col + len, 0);
        out.push(Token { tok, pos });
    }
    out.push(Token { tok: Tok::Eof, pos: end });
    Ok(out)
}

fn lex_number(cur: &mut Cursor<'_>) -> Tok {
    let mut int = String::new();
    while let Some(d) = cur.peek().filter(char::is_ascii_digit) {
        int.push(d);
        cur.bump();
    }
    let mut frac = String::new();
    if cur.peek() == Some('.') {
        // only consume the dot when a digit follows
        let mut look = cur.chars.clone();
        look.next();
        if look.peek().is_some_and(char::is_ascii_digit) {
            cur.bump();
            while let Some(d) = cur.peek().filter(char::is_ascii_digit) {
                frac.push(d);
                cur.bump();
            }
        }
    }
    let digits: BigInt = format!("{int}{frac}").parse().expect("ascii digits");
    let scale: BigInt = pow(BigInt::from(10), frac.len());
    Tok::Num(BigRational::new(digits, scale))
}

fn lex_escape(cur: &mut Cursor<'_>, line: usize, col: usize) -> Result<Tok, LexError> {
    cur.bump();
    let bad = |msg: &str| LexError { pos: SrcPos::new(line, col, 1), msg: msg.to_string() };
    if cur.bump() != Some('<') {
        return Err(bad("expected '<' after '\\'"));
    }
    let mut name = String::new();
    loop {
        match cur.bump() {
            Some('>') => break,
            Some(c) if c.is_ascii_alphanumeric() => name.push(c),
            _ => return Err(bad("unterminated symbol escape")),
        }
    }
    match name.as_str() {
        "up" => Ok(Tok::Caret),
        "le" => Ok(Tok::Le),
        other => greek_from_ascii(other)
            .map(|g| Tok::Ident(g.to_string()))
            .ok_or_else(|| bad(&format!("unknown symbol \\<{other}>"))),
    }
}

/// Position of the first occurrence of identifier `name` in `src`.
pub fn locate_ident(src: &str, name: &str) -> Option<SrcPos> {
    lex(src).ok()?.into_iter().find_map(|t| match t.tok {
        Tok::Ident(ref n) if n == name => Some(t.pos),
        _ => None,
    })
}
