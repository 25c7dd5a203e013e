//! Tokenizer and recursive-descent parser.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          right-associative
//! primary := number | ident | ident '(' args ')' | '(' expr ')'
//! ```
//!
//! `^` binds tighter than unary minus, so `-y1^2` is `-(y1^2)`, while the
//! exponent itself may carry a sign (`y1^-1`).

use crate::error::{ParseError, ParseErrorKind};

use super::{BinOp, Expr, Func, Node, Var};

// Bounds both parenthesis nesting and operator chains, which become
// left-nested trees.
const MAX_DEPTH: usize = 512;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let mut line = 1;
    let mut col = 1;
    for (i, c) in src.char_indices() {
        if i >= offset {
            break;
        }
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

fn error(src: &str, offset: usize, kind: ParseErrorKind) -> ParseError {
    let (line, column) = line_col(src, offset);
    ParseError { kind, offset, line, column }
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                match text.parse::<f64>() {
                    Ok(v) if v.is_finite() => out.push((Tok::Num(v), start)),
                    _ => {
                        return Err(error(src, start, ParseErrorKind::InvalidNumber(text.into())))
                    }
                }
                continue;
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('\u{fffd}');
                return Err(error(src, start, ParseErrorKind::UnexpectedChar(ch)));
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
    n: usize,
    depth: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail(&self, kind: ParseErrorKind) -> ParseError {
        error(self.src, self.offset(), kind)
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        self.fail(ParseErrorKind::UnexpectedToken { found: self.peek().describe(), expected })
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.fail(ParseErrorKind::TooDeep));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let entry = self.depth;
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.enter()?;
            let (_, at) = self.bump();
            let rhs = self.term()?;
            lhs = Expr::new(Node::Binary(op, Box::new(lhs), Box::new(rhs)), at);
        }
        self.depth = entry;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let entry = self.depth;
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.enter()?;
            let (_, at) = self.bump();
            let rhs = self.unary()?;
            lhs = Expr::new(Node::Binary(op, Box::new(lhs), Box::new(rhs)), at);
        }
        self.depth = entry;
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.enter()?;
            let (_, at) = self.bump();
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::new(Node::Neg(Box::new(inner)), at));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Caret {
            self.enter()?;
            let (_, at) = self.bump();
            let exponent = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::new(Node::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)), at));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::new(Node::Num(v), at))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.unexpected("')'"));
                }
                self.bump();
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    self.call(name, at)
                } else {
                    self.variable(&name, at)
                }
            }
            _ => Err(self.unexpected("a number, identifier or '('")),
        }
    }

    fn call(&mut self, name: String, at: usize) -> Result<Expr, ParseError> {
        let func = Func::from_name(&name)
            .ok_or_else(|| error(self.src, at, ParseErrorKind::UnknownFunction(name.clone())))?;
        self.bump(); // '('
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                args.push(self.expr()?);
                match self.peek() {
                    Tok::Comma => {
                        self.bump();
                    }
                    Tok::RParen => break,
                    _ => return Err(self.unexpected("',' or ')'")),
                }
            }
        }
        self.bump(); // ')'
        if args.len() != func.arity() {
            return Err(error(
                self.src,
                at,
                ParseErrorKind::Arity { function: name, expected: func.arity(), found: args.len() },
            ));
        }
        Ok(Expr::new(Node::Call(func, args), at))
    }

    fn variable(&self, name: &str, at: usize) -> Result<Expr, ParseError> {
        if name == "pi" {
            return Ok(Expr::new(Node::Num(std::f64::consts::PI), at));
        }
        let unknown = || error(self.src, at, ParseErrorKind::UnknownIdentifier(name.to_string()));
        let (kind, digits) = name.split_at(1);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
            return Err(unknown());
        }
        let index: usize = digits.parse().map_err(|_| unknown())?;
        if index == 0 || index > self.n {
            return Err(unknown());
        }
        let var = match kind {
            "x" => Var::Base(index - 1),
            "y" => Var::Fiber(index - 1),
            _ => return Err(unknown()),
        };
        Ok(Expr::new(Node::Var(var), at))
    }
}

pub(super) fn parse(src: &str, n: usize) -> Result<Expr, ParseError> {
    let toks = tokenize(src)?;
    if toks.len() == 1 {
        return Err(error(src, 0, ParseErrorKind::EmptySource));
    }
    let mut p = Parser { src, toks, pos: 0, n, depth: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(e)
}
