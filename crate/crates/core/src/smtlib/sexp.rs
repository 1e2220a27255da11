use super::lexer::Token;
use super::{ErrorKind, ParseError, Pos};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Atom(Token, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }

    pub fn symbol(&self) -> Option<&str> {
        match self {
            Sexp::Atom(Token::Symbol(s), _) => Some(s),
            _ => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items, _) => Some(items),
            _ => None,
        }
    }

    /// Head symbol of a non-empty list.
    pub fn head(&self) -> Option<&str> {
        self.list().and_then(|l| l.first()).and_then(Sexp::symbol)
    }
}

pub fn parse_sexps(tokens: Vec<(Token, Pos)>) -> Result<Vec<Sexp>, ParseError> {
    let mut stack: Vec<(Vec<Sexp>, Pos)> = Vec::new();
    let mut top = Vec::new();
    for (tok, pos) in tokens {
        match tok {
            Token::LParen => stack.push((Vec::new(), pos)),
            Token::RParen => {
                let (items, open) = stack
                    .pop()
                    .ok_or_else(|| ParseError::new(pos, ErrorKind::Syntax("unexpected `)`".into())))?;
                let list = Sexp::List(items, open);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(list),
                    None => top.push(list),
                }
            }
            tok => {
                let atom = Sexp::Atom(tok, pos);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(atom),
                    None => top.push(atom),
                }
            }
        }
    }
    if let Some((_, open)) = stack.pop() {
        return Err(ParseError::new(open, ErrorKind::Syntax("unclosed `(`".into())));
    }
    Ok(top)
}
