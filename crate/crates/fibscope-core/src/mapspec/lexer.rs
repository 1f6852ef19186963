//! Line lexer for the mapping-spec grammar.

use super::SpecError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
    Comma,
    Eq,
    Semi,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub col: usize,
    pub width: usize,
}

/// Lexes one physical line. Comments (`#` to end of line) and the
/// trailing `\r` of CRLF input are dropped.
pub fn lex_line(raw: &str, line: usize) -> Result<Vec<Token>, SpecError> {
    let text = raw.strip_suffix('\r').unwrap_or(raw);
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            '#' => break,
            c if c.is_whitespace() => {
                i += 1;
            }
            '+' => {
                out.push(Token { tok: Tok::Plus, col, width: 1 });
                i += 1;
            }
            '-' | '\u{2212}' => {
                out.push(Token { tok: Tok::Minus, col, width: 1 });
                i += 1;
            }
            '*' => {
                out.push(Token { tok: Tok::Star, col, width: 1 });
                i += 1;
            }
            '^' => {
                out.push(Token { tok: Tok::Caret, col, width: 1 });
                i += 1;
            }
            '/' => {
                out.push(Token { tok: Tok::Slash, col, width: 1 });
                i += 1;
            }
            '(' => {
                out.push(Token { tok: Tok::LParen, col, width: 1 });
                i += 1;
            }
            ')' => {
                out.push(Token { tok: Tok::RParen, col, width: 1 });
                i += 1;
            }
            ',' => {
                out.push(Token { tok: Tok::Comma, col, width: 1 });
                i += 1;
            }
            '=' => {
                out.push(Token { tok: Tok::Eq, col, width: 1 });
                i += 1;
            }
            ';' => {
                out.push(Token { tok: Tok::Semi, col, width: 1 });
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i - start > 64 {
                    return Err(SpecError::Syntax {
                        line,
                        col,
                        msg: "integer literal too long".into(),
                    });
                }
                out.push(Token {
                    tok: Tok::Int(chars[start..i].iter().collect()),
                    col,
                    width: i - start,
                });
            }
            '\u{3b6}' => {
                // Greek zeta, accepted as an alias identifier.
                out.push(Token {
                    tok: Tok::Ident("zeta".into()),
                    col,
                    width: 1,
                });
                i += 1;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_')
                {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    col,
                    width: i - start,
                });
            }
            other => {
                return Err(SpecError::Syntax {
                    line,
                    col,
                    msg: format!("unexpected character '{other}'"),
                });
            }
        }
    }
    Ok(out)
}
