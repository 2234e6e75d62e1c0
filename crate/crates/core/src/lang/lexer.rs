//! Tokenizer. Newlines are whitespace; `#` comments run to end of line.

use alloc::string::String;
use alloc::vec::Vec;

use super::parser::Diagnostic;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Number(f64),
    Ident(String),
    If,
    Elif,
    Else,
    Return,
    Let,
    And,
    Or,
    Not,
    Abs,
    Min,
    Max,
    Plus,
    Minus,
    Star,
    Slash,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    Assign,
    Colon,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> &'static str {
        match self {
            Tok::Number(_) => "number",
            Tok::Ident(_) => "identifier",
            Tok::If => "`if`",
            Tok::Elif => "`elif`",
            Tok::Else => "`else`",
            Tok::Return => "`return`",
            Tok::Let => "`let`",
            Tok::And => "`and`",
            Tok::Or => "`or`",
            Tok::Not => "`not`",
            Tok::Abs => "`abs`",
            Tok::Min => "`min`",
            Tok::Max => "`max`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Star => "`*`",
            Tok::Slash => "`/`",
            Tok::Lt => "`<`",
            Tok::Le => "`<=`",
            Tok::Gt => "`>`",
            Tok::Ge => "`>=`",
            Tok::EqEq => "`==`",
            Tok::Ne => "`!=`",
            Tok::Assign => "`=`",
            Tok::Colon => "`:`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::Comma => "`,`",
            Tok::Eof => "end of input",
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

pub(crate) fn lex(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut tokens = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! push {
        ($tok:expr, $l:expr, $c:expr) => {
            tokens.push(Token { tok: $tok, line: $l, col: $c })
        };
    }

    while i < bytes.len() {
        let b = bytes[i];
        let (tl, tc) = (line, col);
        match b {
            b'\n' => {
                line += 1;
                col = 1;
                i += 1;
            }
            b' ' | b'\t' | b'\r' => {
                col += 1;
                i += 1;
            }
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                    col += 1;
                }
            }
            b'+' => {
                push!(Tok::Plus, tl, tc);
                i += 1;
                col += 1;
            }
            b'-' => {
                push!(Tok::Minus, tl, tc);
                i += 1;
                col += 1;
            }
            b'*' => {
                push!(Tok::Star, tl, tc);
                i += 1;
                col += 1;
            }
            b'/' => {
                push!(Tok::Slash, tl, tc);
                i += 1;
                col += 1;
            }
            b':' => {
                push!(Tok::Colon, tl, tc);
                i += 1;
                col += 1;
            }
            b'{' => {
                push!(Tok::LBrace, tl, tc);
                i += 1;
                col += 1;
            }
            b'}' => {
                push!(Tok::RBrace, tl, tc);
                i += 1;
                col += 1;
            }
            b'(' => {
                push!(Tok::LParen, tl, tc);
                i += 1;
                col += 1;
            }
            b')' => {
                push!(Tok::RParen, tl, tc);
                i += 1;
                col += 1;
            }
            b',' => {
                push!(Tok::Comma, tl, tc);
                i += 1;
                col += 1;
            }
            b'<' => {
                if i + 1 < bytes.len() && bytes[i + 1] == b'=' {
                    push!(Tok::Le, tl, tc);
                    i += 2;
                    col += 2;
                } else {
                    push!(Tok::Lt, tl, tc);
                    i += 1;
                    col += 1;
                }
            }
            b'>' => {
                if i + 1 < bytes.len() && bytes[i + 1] == b'=' {
                    push!(Tok::Ge, tl, tc);
                    i += 2;
                    col += 2;
                } else {
                    push!(Tok::Gt, tl, tc);
                    i += 1;
                    col += 1;
                }
            }
            b'=' => {
                if i + 1 < bytes.len() && bytes[i + 1] == b'=' {
                    push!(Tok::EqEq, tl, tc);
                    i += 2;
                    col += 2;
                } else {
                    push!(Tok::Assign, tl, tc);
                    i += 1;
                    col += 1;
                }
            }
            b'!' => {
                if i + 1 < bytes.len() && bytes[i + 1] == b'=' {
                    push!(Tok::Ne, tl, tc);
                    i += 2;
                    col += 2;
                } else {
                    return Err(Diagnostic::syntax(tl, tc, "unexpected `!` (did you mean `!=`?)"));
                }
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    if i + 1 >= bytes.len() || !bytes[i + 1].is_ascii_digit() {
                        return Err(Diagnostic::syntax(
                            tl,
                            tc + (i - start) as u32,
                            "digit expected after decimal point",
                        ));
                    }
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let slice = &text[start..i];
                let value: f64 = slice.parse().map_err(|_| {
                    Diagnostic::syntax(tl, tc, alloc::format!("invalid number `{slice}`"))
                })?;
                if !value.is_finite() {
                    return Err(Diagnostic::syntax(
                        tl,
                        tc,
                        alloc::format!("number `{slice}` overflows"),
                    ));
                }
                col += (i - start) as u32;
                push!(Tok::Number(value), tl, tc);
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let word = &text[start..i];
                col += (i - start) as u32;
                let tok = match word {
                    "if" => Tok::If,
                    "elif" => Tok::Elif,
                    "else" => Tok::Else,
                    "return" => Tok::Return,
                    "let" => Tok::Let,
                    "and" => Tok::And,
                    "or" => Tok::Or,
                    "not" => Tok::Not,
                    "abs" => Tok::Abs,
                    "min" => Tok::Min,
                    "max" => Tok::Max,
                    _ => Tok::Ident(String::from(word)),
                };
                push!(tok, tl, tc);
            }
            _ => {
                return Err(Diagnostic::syntax(
                    tl,
                    tc,
                    alloc::format!("unexpected character `{}`", char_at(text, i)),
                ));
            }
        }
    }
    tokens.push(Token { tok: Tok::Eof, line, col });
    Ok(tokens)
}

fn char_at(text: &str, byte_index: usize) -> char {
    text[byte_index..].chars().next().unwrap_or('\u{fffd}')
}
