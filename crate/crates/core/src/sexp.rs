//! Just enough S-expression reading for SMT solver responses.

use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SexpError {
    #[error("unbalanced parentheses")]
    Unbalanced,
    #[error("unterminated string literal")]
    UnterminatedString,
}

impl Sexp {
    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a) => Some(a),
            Sexp::List(_) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(l) => Some(l),
            Sexp::Atom(_) => None,
        }
    }

    /// Reads an integer literal, `(- n)` included.
    pub fn as_int(&self) -> Option<i128> {
        match self {
            Sexp::Atom(a) => a.parse().ok(),
            Sexp::List(l) => match l.as_slice() {
                [Sexp::Atom(op), inner] if op == "-" => inner.as_int().map(|v| -v),
                _ => None,
            },
        }
    }
}

/// Parses every top-level expression in `text`.
pub fn parse_all(text: &str) -> Result<Vec<Sexp>, SexpError> {
    let mut stack: Vec<Vec<Sexp>> = alloc::vec![Vec::new()];
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '(' => stack.push(Vec::new()),
            ')' => {
                let done = stack.pop().ok_or(SexpError::Unbalanced)?;
                stack.last_mut().ok_or(SexpError::Unbalanced)?.push(Sexp::List(done));
            }
            ';' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            '"' => {
                let mut s = String::from("\"");
                loop {
                    match chars.next() {
                        None => return Err(SexpError::UnterminatedString),
                        Some('"') if chars.peek() == Some(&'"') => {
                            chars.next();
                            s.push_str("\"\"");
                        }
                        Some('"') => break,
                        Some(ch) => s.push(ch),
                    }
                }
                s.push('"');
                stack.last_mut().unwrap().push(Sexp::Atom(s));
            }
            '|' => {
                let mut s = String::new();
                loop {
                    match chars.next() {
                        None => return Err(SexpError::UnterminatedString),
                        Some('|') => break,
                        Some(ch) => s.push(ch),
                    }
                }
                stack.last_mut().unwrap().push(Sexp::Atom(s));
            }
            c if c.is_whitespace() => {}
            c => {
                let mut s = String::new();
                s.push(c);
                while let Some(&n) = chars.peek() {
                    if n.is_whitespace() || n == '(' || n == ')' || n == ';' || n == '"' {
                        break;
                    }
                    s.push(n);
                    chars.next();
                }
                stack.last_mut().unwrap().push(Sexp::Atom(s));
            }
        }
        if stack.is_empty() {
            return Err(SexpError::Unbalanced);
        }
    }
    if stack.len() != 1 {
        return Err(SexpError::Unbalanced);
    }
    Ok(stack.pop().unwrap())
}
