//! Tokenizer for `.stt` source. Unicode symbols and ASCII spellings map to
//! the same token kinds.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    /// 1-based line.
    pub line: usize,
    /// 1-based column, counted in characters.
    pub col: usize,
    /// Byte offsets into the source, `start..end`.
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Num(String),
    /// `#check`, `#normalize`, `#entails` (without the `#`).
    Directive(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBrack,
    RBrack,
    Lt,
    Gt,
    Comma,
    Colon,
    ColonEq,
    Star,
    Arrow,
    MapsTo,
    Bar,
    Turnstile,
    Subset,
    Squiggle,
    Lambda,
    EqEq,
    Leq,
    And,
    Or,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenKind::Ident(x) => return write!(f, "identifier `{x}`"),
            TokenKind::Num(n) => return write!(f, "`{n}`"),
            TokenKind::Directive(d) => return write!(f, "`#{d}`"),
            TokenKind::LParen => "`(`",
            TokenKind::RParen => "`)`",
            TokenKind::LBrace => "`{`",
            TokenKind::RBrace => "`}`",
            TokenKind::LBrack => "`[`",
            TokenKind::RBrack => "`]`",
            TokenKind::Lt => "`<`",
            TokenKind::Gt => "`>`",
            TokenKind::Comma => "`,`",
            TokenKind::Colon => "`:`",
            TokenKind::ColonEq => "`:=`",
            TokenKind::Star => "`*`",
            TokenKind::Arrow => "`->`",
            TokenKind::MapsTo => "`|->`",
            TokenKind::Bar => "`|`",
            TokenKind::Turnstile => "`|-`",
            TokenKind::Subset => "`<:`",
            TokenKind::Squiggle => "`~>`",
            TokenKind::Lambda => "`\\`",
            TokenKind::EqEq => "`===`",
            TokenKind::Leq => "`<=`",
            TokenKind::And => "`/\\`",
            TokenKind::Or => "`\\/`",
            TokenKind::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: Span,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{line}:{col}: unexpected character `{ch}`")]
pub struct LexError {
    pub ch: char,
    pub line: usize,
    pub col: usize,
    pub span: Span,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// ASCII operators, longest first so that prefixes do not shadow them.
const OPERATORS: &[(&str, TokenKind)] = &[
    ("===", TokenKind::EqEq),
    ("|->", TokenKind::MapsTo),
    ("|-", TokenKind::Turnstile),
    ("->", TokenKind::Arrow),
    (":=", TokenKind::ColonEq),
    ("<=", TokenKind::Leq),
    ("<:", TokenKind::Subset),
    ("~>", TokenKind::Squiggle),
    ("/\\", TokenKind::And),
    ("\\/", TokenKind::Or),
    ("(", TokenKind::LParen),
    (")", TokenKind::RParen),
    ("{", TokenKind::LBrace),
    ("}", TokenKind::RBrace),
    ("[", TokenKind::LBrack),
    ("]", TokenKind::RBrack),
    ("<", TokenKind::Lt),
    (">", TokenKind::Gt),
    (",", TokenKind::Comma),
    (":", TokenKind::Colon),
    ("*", TokenKind::Star),
    ("|", TokenKind::Bar),
    ("\\", TokenKind::Lambda),
];

fn unicode_symbol(c: char) -> Option<TokenKind> {
    Some(match c {
        '≤' => TokenKind::Leq,
        '≡' => TokenKind::EqEq,
        '∧' => TokenKind::And,
        '∨' => TokenKind::Or,
        '→' => TokenKind::Arrow,
        '↦' => TokenKind::MapsTo,
        '⊢' => TokenKind::Turnstile,
        '⊆' => TokenKind::Subset,
        '⟨' => TokenKind::Lt,
        '⟩' => TokenKind::Gt,
        '×' => TokenKind::Star,
        'λ' => TokenKind::Lambda,
        '⊤' => TokenKind::Ident("TOP".into()),
        '⊥' => TokenKind::Ident("BOT".into()),
        'Σ' => TokenKind::Ident("Sigma".into()),
        _ => return None,
    })
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut pos = 0;
    let bytes = src.as_bytes();

    while pos < src.len() {
        let rest = &src[pos..];
        let c = rest.chars().next().expect("nonempty");
        if c == '\n' {
            pos += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            pos += c.len_utf8();
            col += 1;
            continue;
        }
        if rest.starts_with("--") {
            while pos < src.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }

        let start = pos;
        let (kind, len) = if is_ident_start(c) {
            let len = rest.find(|ch: char| !is_ident_char(ch)).unwrap_or(rest.len());
            (TokenKind::Ident(rest[..len].to_string()), len)
        } else if c.is_ascii_digit() {
            let len = rest.find(|ch: char| !ch.is_ascii_digit()).unwrap_or(rest.len());
            (TokenKind::Num(rest[..len].to_string()), len)
        } else if c == '#' && rest[1..].starts_with(is_ident_start) {
            let len = 1 + rest[1..].find(|ch: char| !is_ident_char(ch)).unwrap_or(rest.len() - 1);
            (TokenKind::Directive(rest[1..len].to_string()), len)
        } else if let Some((op, kind)) = OPERATORS.iter().find(|(op, _)| rest.starts_with(op)) {
            (kind.clone(), op.len())
        } else if let Some(kind) = unicode_symbol(c) {
            (kind, c.len_utf8())
        } else {
            let span = Span { line, col, start, end: start + c.len_utf8() };
            return Err(LexError { ch: c, line, col, span });
        };

        let lexeme = &rest[..len];
        out.push(Token {
            kind,
            lexeme: lexeme.to_string(),
            span: Span { line, col, start, end: start + len },
        });
        pos += len;
        col += lexeme.chars().count();
    }

    out.push(Token {
        kind: TokenKind::Eof,
        lexeme: String::new(),
        span: Span { line, col, start: src.len(), end: src.len() },
    });
    Ok(out)
}
