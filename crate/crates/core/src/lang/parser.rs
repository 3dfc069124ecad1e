use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{BinOp, CmpOp, Cond, Expr, LoopId, Program, Stmt, VarId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: duplicate variable `{name}`")]
    DuplicateVariable { name: String, line: usize, col: usize },
    #[error("{line}:{col}: undeclared variable `{name}`")]
    UndeclaredVariable { name: String, line: usize, col: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Fn,
    Var,
    While,
    If,
    Else,
    Skip,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Assign,
    Plus,
    Minus,
    Star,
    Incr,
    Decr,
    Cmp(CmpOp),
    AndAnd,
    OrOr,
    Bang,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Fn => "fn",
            Tok::Var => "var",
            Tok::While => "while",
            Tok::If => "if",
            Tok::Else => "else",
            Tok::Skip => "skip",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Assign => "=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Incr => "++",
            Tok::Decr => "--",
            Tok::Cmp(op) => op.symbol(),
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Bang => "!",
            Tok::Ident(_) | Tok::Int(_) | Tok::Eof => "",
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = match word.as_str() {
                "fn" => Tok::Fn,
                "var" => Tok::Var,
                "while" => Tok::While,
                "if" => Tok::If,
                "else" => Tok::Else,
                "skip" => Tok::Skip,
                _ => Tok::Ident(word),
            };
            out.push(Token { tok, line: tl, col: tc });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            col += i - start;
            let v = digits.parse::<i64>().map_err(|_| ParseError::Syntax {
                line: tl,
                col: tc,
                msg: format!("integer literal `{digits}` out of range"),
            })?;
            out.push(Token { tok: Tok::Int(v), line: tl, col: tc });
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            ('+', Some('+')) => (Tok::Incr, 2),
            ('-', Some('-')) => (Tok::Decr, 2),
            ('<', Some('=')) => (Tok::Cmp(CmpOp::Le), 2),
            ('>', Some('=')) => (Tok::Cmp(CmpOp::Ge), 2),
            ('=', Some('=')) => (Tok::Cmp(CmpOp::Eq), 2),
            ('!', Some('=')) => (Tok::Cmp(CmpOp::Ne), 2),
            ('&', Some('&')) => (Tok::AndAnd, 2),
            ('|', Some('|')) => (Tok::OrOr, 2),
            ('<', _) => (Tok::Cmp(CmpOp::Lt), 1),
            ('>', _) => (Tok::Cmp(CmpOp::Gt), 1),
            ('=', _) => (Tok::Assign, 1),
            ('!', _) => (Tok::Bang, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            (',', _) => (Tok::Comma, 1),
            (';', _) => (Tok::Semi, 1),
            _ => return Err(ParseError::Syntax { line: tl, col: tc, msg: format!("unexpected character `{c}`") }),
        };
        i += len;
        col += len;
        out.push(Token { tok, line: tl, col: tc });
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    params: Vec<String>,
    locals: Vec<String>,
    next_loop: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, msg: String) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError::Syntax { line: t.line, col: t.col, msg }
    }

    fn expect(&mut self, want: Tok) -> PResult<Token> {
        if *self.peek() == want {
            Ok(self.bump())
        } else {
            Err(self.error_here(format!("expected {}, found {}", want.describe(), self.peek().describe())))
        }
    }

    fn ident(&mut self) -> PResult<(String, usize, usize)> {
        let t = self.bump();
        match t.tok {
            Tok::Ident(name) => Ok((name, t.line, t.col)),
            other => {
                self.pos -= 1;
                Err(ParseError::Syntax {
                    line: t.line,
                    col: t.col,
                    msg: format!("expected identifier, found {}", other.describe()),
                })
            }
        }
    }

    fn declare(&mut self, name: String, line: usize, col: usize, param: bool) -> PResult<()> {
        if self.params.contains(&name) || self.locals.contains(&name) {
            return Err(ParseError::DuplicateVariable { name, line, col });
        }
        if param {
            self.params.push(name);
        } else {
            self.locals.push(name);
        }
        Ok(())
    }

    fn resolve(&self, name: &str, line: usize, col: usize) -> PResult<VarId> {
        self.params
            .iter()
            .chain(self.locals.iter())
            .position(|n| n == name)
            .map(VarId)
            .ok_or_else(|| ParseError::UndeclaredVariable { name: name.to_string(), line, col })
    }

    fn program(&mut self) -> PResult<Program> {
        self.expect(Tok::Fn)?;
        let (name, ..) = self.ident()?;
        self.expect(Tok::LParen)?;
        if *self.peek() != Tok::RParen {
            loop {
                let (p, l, c) = self.ident()?;
                self.declare(p, l, c, true)?;
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        let body = self.block()?;
        if *self.peek() != Tok::Eof {
            return Err(
                self.error_here(format!("expected end of input after function body, found {}", self.peek().describe()))
            );
        }
        Ok(Program { name, params: core::mem::take(&mut self.params), locals: core::mem::take(&mut self.locals), body })
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        while *self.peek() != Tok::RBrace {
            if *self.peek() == Tok::Eof {
                return Err(self.error_here("unterminated block, expected `}`".to_string()));
            }
            self.stmt(&mut out)?;
        }
        self.bump();
        Ok(out)
    }

    fn stmt(&mut self, out: &mut Vec<Stmt>) -> PResult<()> {
        match self.peek().clone() {
            Tok::Var => {
                self.bump();
                loop {
                    let (name, l, c) = self.ident()?;
                    self.declare(name, l, c, false)?;
                    if *self.peek() == Tok::Assign {
                        self.bump();
                        let e = self.expr()?;
                        out.push(Stmt::Assign(VarId(self.params.len() + self.locals.len() - 1), e));
                    }
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
                self.expect(Tok::Semi)?;
            }
            Tok::While => {
                self.bump();
                let id = LoopId(self.next_loop);
                self.next_loop += 1;
                self.expect(Tok::LParen)?;
                let cond = self.cond()?;
                self.expect(Tok::RParen)?;
                let body = self.block()?;
                out.push(Stmt::While { id, cond, body });
            }
            Tok::If => out.push(self.if_stmt()?),
            // `skip` is a no-op and is not kept in statement sequences.
            Tok::Skip => {
                self.bump();
                self.expect(Tok::Semi)?;
            }
            Tok::Ident(_) => {
                let (name, l, c) = self.ident()?;
                let v = self.resolve(&name, l, c)?;
                let rhs = match self.peek() {
                    Tok::Assign => {
                        self.bump();
                        self.expr()?
                    }
                    Tok::Incr => {
                        self.bump();
                        Expr::bin(BinOp::Add, Expr::Var(v), Expr::Const(1))
                    }
                    Tok::Decr => {
                        self.bump();
                        Expr::bin(BinOp::Sub, Expr::Var(v), Expr::Const(1))
                    }
                    other => {
                        return Err(self.error_here(format!("expected `=`, `++` or `--`, found {}", other.describe())))
                    }
                };
                self.expect(Tok::Semi)?;
                out.push(Stmt::Assign(v, rhs));
            }
            other => return Err(self.error_here(format!("expected statement, found {}", other.describe()))),
        }
        Ok(())
    }

    fn if_stmt(&mut self) -> PResult<Stmt> {
        self.expect(Tok::If)?;
        self.expect(Tok::LParen)?;
        let cond = self.cond()?;
        self.expect(Tok::RParen)?;
        let then_branch = self.block()?;
        let else_branch = if *self.peek() == Tok::Else {
            self.bump();
            if *self.peek() == Tok::If {
                alloc::vec![self.if_stmt()?]
            } else {
                self.block()?
            }
        } else {
            Vec::new()
        };
        Ok(Stmt::If { cond, then_branch, else_branch })
    }

    fn cond(&mut self) -> PResult<Cond> {
        let mut lhs = self.cond_and()?;
        while *self.peek() == Tok::OrOr {
            self.bump();
            let rhs = self.cond_and()?;
            lhs = Cond::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn cond_and(&mut self) -> PResult<Cond> {
        let mut lhs = self.cond_atom()?;
        while *self.peek() == Tok::AndAnd {
            self.bump();
            let rhs = self.cond_atom()?;
            lhs = Cond::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn cond_atom(&mut self) -> PResult<Cond> {
        if *self.peek() == Tok::Bang {
            self.bump();
            return Ok(Cond::negate(self.cond_atom()?));
        }
        if *self.peek() == Tok::LParen {
            // `(` opens either a parenthesised condition or an arithmetic
            // operand of a comparison; try the former first.
            let save = self.pos;
            self.bump();
            if let Ok(c) = self.cond() {
                if *self.peek() == Tok::RParen {
                    self.bump();
                    let continues_expr = matches!(self.peek(), Tok::Cmp(_) | Tok::Plus | Tok::Minus | Tok::Star);
                    if !continues_expr {
                        return Ok(c);
                    }
                }
            }
            self.pos = save;
        }
        let lhs = self.expr()?;
        let op = match self.peek() {
            Tok::Cmp(op) => *op,
            other => return Err(self.error_here(format!("expected comparison operator, found {}", other.describe()))),
        };
        self.bump();
        let rhs = self.expr()?;
        Ok(Cond::Cmp(op, lhs, rhs))
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Star {
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::bin(BinOp::Mul, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            if let Tok::Int(v) = *self.peek() {
                self.bump();
                return Ok(Expr::Const(-v));
            }
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let t = self.bump();
        match t.tok {
            Tok::Int(v) => Ok(Expr::Const(v)),
            Tok::Ident(name) => Ok(Expr::Var(self.resolve(&name, t.line, t.col)?)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            other => {
                self.pos -= 1;
                Err(self.error_here(format!("expected expression, found {}", other.describe())))
            }
        }
    }
}

/// Parses one `.nt` function.
pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, params: Vec::new(), locals: Vec::new(), next_loop: 0 };
    p.program()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_countdown() {
        let p = parse_program("fn f(x){ while (x > 0) { x = x - 1; } }").unwrap();
        assert_eq!(p.params, ["x"]);
        assert!(p.locals.is_empty());
        assert_eq!(p.loop_count(), 1);
        match &p.body[0] {
            Stmt::While { id, cond, body } => {
                assert_eq!(*id, LoopId(0));
                assert_eq!(*cond, Cond::Cmp(CmpOp::Gt, Expr::Var(VarId(0)), Expr::Const(0)));
                assert_eq!(body.len(), 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn disjunctive_guard_with_else_if() {
        let src = "fn sor(x, y, z) {
            while (x > z || y > z) {
                if (x > z) { x--; } else if (y > z) { y--; }
            }
        }";
        let p = parse_program(src).unwrap();
        let Stmt::While { cond, body, .. } = &p.body[0] else { panic!() };
        assert!(matches!(cond, Cond::Or(..)));
        let Stmt::If { else_branch, .. } = &body[0] else { panic!() };
        assert!(matches!(else_branch.as_slice(), [Stmt::If { .. }]));
    }

    #[test]
    fn condition_without_comparison_is_rejected() {
        let err = parse_program("fn f(x){ while x { } }").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 1, col: 16, .. }), "{err}");
    }

    #[test]
    fn bare_variable_guard_is_rejected() {
        let err = parse_program("fn f(x){ while (x) { } }").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }), "{err}");
    }

    #[test]
    fn duplicate_and_undeclared() {
        let err = parse_program("fn f(x, x){ }").unwrap_err();
        assert!(matches!(err, ParseError::DuplicateVariable { ref name, .. } if name == "x"));
        let err = parse_program("fn f(x){ var x; }").unwrap_err();
        assert!(matches!(err, ParseError::DuplicateVariable { .. }));
        let err = parse_program("fn f(x){\n  y = 1;\n}").unwrap_err();
        assert_eq!(err, ParseError::UndeclaredVariable { name: "y".into(), line: 2, col: 3 });
    }

    #[test]
    fn use_before_declaration_is_undeclared() {
        let err = parse_program("fn f(){ j = 1; var j; }").unwrap_err();
        assert!(matches!(err, ParseError::UndeclaredVariable { .. }));
    }

    #[test]
    fn var_initializer_becomes_assignment() {
        let p = parse_program("fn f(i){ var j = i, t; }").unwrap();
        assert_eq!(p.locals, ["j", "t"]);
        assert_eq!(p.body, [Stmt::Assign(VarId(1), Expr::Var(VarId(0)))]);
    }

    #[test]
    fn negative_literals_and_precedence() {
        let p = parse_program("fn f(x){ x = -2 * x + 10; }").unwrap();
        let want = Expr::bin(BinOp::Add, Expr::bin(BinOp::Mul, Expr::Const(-2), Expr::Var(VarId(0))), Expr::Const(10));
        assert_eq!(p.body, [Stmt::Assign(VarId(0), want)]);
    }

    #[test]
    fn parenthesised_arithmetic_in_condition() {
        let p = parse_program("fn f(x, y){ while ((x + y) * 2 > 0 && !(x == y)) { x--; } }").unwrap();
        let Stmt::While { cond, .. } = &p.body[0] else { panic!() };
        let Cond::And(lhs, rhs) = cond else { panic!("{cond:?}") };
        assert!(matches!(**lhs, Cond::Cmp(CmpOp::Gt, Expr::Bin(BinOp::Mul, ..), _)));
        assert!(matches!(**rhs, Cond::Not(..)));
    }

    #[test]
    fn comments_and_skip() {
        let p = parse_program("// header\nfn f(x){ skip; // nothing\n }").unwrap();
        assert!(p.body.is_empty());
    }

    #[test]
    fn trailing_garbage() {
        assert!(parse_program("fn f(){ } }").is_err());
        assert!(parse_program("fn f(){ ").is_err());
        assert!(parse_program("fn f(){ x @ 1; }").is_err());
    }
}
