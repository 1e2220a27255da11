use num_bigint::BigInt;

use super::{ErrorKind, ParseError, Pos};
use crate::formula::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Token {
    LParen,
    RParen,
    Symbol(String),
    Keyword(String),
    Numeral(BigInt),
    Decimal(Rational),
    Str(String),
}

pub fn tokenize(text: &str) -> Result<Vec<(Token, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let mut pos = Pos { line: 1, col: 1 };
    let advance = |c: char, pos: &mut Pos| {
        if c == '\n' {
            pos.line += 1;
            pos.col = 1;
        } else {
            pos.col += 1;
        }
    };
    while let Some(&c) = chars.peek() {
        let start = pos;
        match c {
            _ if c.is_whitespace() => {
                chars.next();
                advance(c, &mut pos);
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    advance(c, &mut pos);
                }
            }
            '(' | ')' => {
                chars.next();
                advance(c, &mut pos);
                out.push((if c == '(' { Token::LParen } else { Token::RParen }, start));
            }
            '|' => {
                chars.next();
                advance(c, &mut pos);
                let mut s = String::new();
                loop {
                    match chars.next() {
                        None => return Err(ParseError::new(start, ErrorKind::Lexical("unterminated quoted symbol".into()))),
                        Some('|') => {
                            advance('|', &mut pos);
                            break;
                        }
                        Some(c) => {
                            advance(c, &mut pos);
                            s.push(c);
                        }
                    }
                }
                out.push((Token::Symbol(s), start));
            }
            '"' => {
                chars.next();
                advance(c, &mut pos);
                let mut s = String::new();
                loop {
                    match chars.next() {
                        None => return Err(ParseError::new(start, ErrorKind::Lexical("unterminated string".into()))),
                        Some('"') => {
                            advance('"', &mut pos);
                            // "" is an escaped quote.
                            if chars.peek() == Some(&'"') {
                                chars.next();
                                advance('"', &mut pos);
                                s.push('"');
                            } else {
                                break;
                            }
                        }
                        Some(c) => {
                            advance(c, &mut pos);
                            s.push(c);
                        }
                    }
                }
                out.push((Token::Str(s), start));
            }
            _ => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || matches!(c, '(' | ')' | ';' | '|' | '"') {
                        break;
                    }
                    chars.next();
                    advance(c, &mut pos);
                    word.push(c);
                }
                out.push((classify(&word, start)?, start));
            }
        }
    }
    Ok(out)
}

fn classify(word: &str, pos: Pos) -> Result<Token, ParseError> {
    if let Some(k) = word.strip_prefix(':') {
        return Ok(Token::Keyword(k.to_string()));
    }
    if word.starts_with(|c: char| c.is_ascii_digit()) {
        if word.bytes().all(|b| b.is_ascii_digit()) {
            return Ok(Token::Numeral(word.parse().unwrap()));
        }
        if let Some((int_part, frac)) = word.split_once('.') {
            if !int_part.is_empty()
                && !frac.is_empty()
                && int_part.bytes().all(|b| b.is_ascii_digit())
                && frac.bytes().all(|b| b.is_ascii_digit())
            {
                let num: BigInt = format!("{int_part}{frac}").parse().unwrap();
                let den = BigInt::from(10u32).pow(frac.len() as u32);
                return Ok(Token::Decimal(Rational::new(num, den)));
            }
        }
        return Err(ParseError::new(pos, ErrorKind::Lexical(format!("malformed number `{word}`"))));
    }
    Ok(Token::Symbol(word.to_string()))
}
