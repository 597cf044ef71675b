//! Small arithmetic expression language for analytic test functions.
//!
//! Grammar: numbers, the coordinates `x`, `y`, `r`, the constants `pi` and `e`,
//! binary `+ - * / ^` (`^` is right associative), unary minus, parentheses and the
//! functions `exp log sqrt abs sin cos` (one argument) and `min max` (two arguments).

use std::fmt;

use crate::error::{Error, Result};

/// A point of a model space as seen by expressions.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    /// Distance to the origin.
    pub r: f64,
}

impl Point {
    pub fn line(x: f64) -> Self {
        Self { x, y: 0.0, r: x.abs() }
    }

    pub fn plane(x: f64, y: f64) -> Self {
        Self { x, y, r: x.hypot(y) }
    }

    pub fn radial(r: f64) -> Self {
        Self { x: r, y: 0.0, r }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Var {
    X,
    Y,
    R,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Exp,
    Log,
    Sqrt,
    Abs,
    Sin,
    Cos,
    Min,
    Max,
}

impl Func {
    fn lookup(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Self::Exp,
            "log" => Self::Log,
            "sqrt" => Self::Sqrt,
            "abs" => Self::Abs,
            "sin" => Self::Sin,
            "cos" => Self::Cos,
            "min" => Self::Min,
            "max" => Self::Max,
            _ => return None,
        })
    }

    fn arity(self) -> usize {
        match self {
            Self::Min | Self::Max => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

impl Node {
    fn eval(&self, p: &Point) -> f64 {
        match self {
            Node::Num(v) => *v,
            Node::Var(Var::X) => p.x,
            Node::Var(Var::Y) => p.y,
            Node::Var(Var::R) => p.r,
            Node::Neg(a) => -a.eval(p),
            Node::Add(a, b) => a.eval(p) + b.eval(p),
            Node::Sub(a, b) => a.eval(p) - b.eval(p),
            Node::Mul(a, b) => a.eval(p) * b.eval(p),
            Node::Div(a, b) => a.eval(p) / b.eval(p),
            Node::Pow(a, b) => a.eval(p).powf(b.eval(p)),
            Node::Call(f, args) => {
                let a = args[0].eval(p);
                match f {
                    Func::Exp => a.exp(),
                    Func::Log => a.ln(),
                    Func::Sqrt => a.sqrt(),
                    Func::Abs => a.abs(),
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Min => a.min(args[1].eval(p)),
                    Func::Max => a.max(args[1].eval(p)),
                }
            }
        }
    }
}

/// A parsed expression together with its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self> {
        let tokens = tokenize(src)?;
        let mut parser = Parser { tokens: &tokens, pos: 0, len: src.len() };
        let root = parser.expr()?;
        if let Some(t) = parser.peek() {
            return Err(Error::Parse { column: t.col, message: format!("unexpected {:?}", t.kind) });
        }
        Ok(Self { source: src.to_string(), root })
    }

    pub fn eval(&self, p: &Point) -> f64 {
        self.root.eval(p)
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone)]
struct Token {
    kind: Tok,
    col: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| Error::Parse { column: col, message: format!("bad number `{text}`") })?;
            out.push(Token { kind: Tok::Num(v), col });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token { kind: Tok::Ident(chars[start..i].iter().collect()), col });
        } else {
            let kind = match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                _ => return Err(Error::Parse { column: col, message: format!("unexpected character `{c}`") }),
            };
            out.push(Token { kind, col });
            i += 1;
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    len: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eof_col(&self) -> usize {
        self.len + 1
    }

    fn expect(&mut self, kind: Tok) -> Result<()> {
        match self.peek() {
            Some(t) if t.kind == kind => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(Error::Parse { column: t.col, message: format!("expected {kind:?}, found {:?}", t.kind) }),
            None => Err(Error::Parse { column: self.eof_col(), message: format!("expected {kind:?}, found end of input") }),
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(Token { kind: Tok::Op(op @ ('+' | '-')), .. }) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' { Node::Add(lhs.into(), rhs.into()) } else { Node::Sub(lhs.into(), rhs.into()) };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(Token { kind: Tok::Op(op @ ('*' | '/')), .. }) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' { Node::Mul(lhs.into(), rhs.into()) } else { Node::Div(lhs.into(), rhs.into()) };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        if let Some(Token { kind: Tok::Op('-'), .. }) = self.peek() {
            self.pos += 1;
            return Ok(Node::Neg(self.unary()?.into()));
        }
        if let Some(Token { kind: Tok::Op('+'), .. }) = self.peek() {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if let Some(Token { kind: Tok::Op('^'), .. }) = self.peek() {
            self.pos += 1;
            // right associative, binds tighter than unary minus on the left
            let exp = self.unary()?;
            return Ok(Node::Pow(base.into(), exp.into()));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let tok = match self.peek() {
            Some(t) => t.clone(),
            None => return Err(Error::Parse { column: self.eof_col(), message: "unexpected end of input".into() }),
        };
        self.pos += 1;
        match tok.kind {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => match name.as_str() {
                "x" => Ok(Node::Var(Var::X)),
                "y" => Ok(Node::Var(Var::Y)),
                "r" => Ok(Node::Var(Var::R)),
                "pi" => Ok(Node::Num(std::f64::consts::PI)),
                "e" => Ok(Node::Num(std::f64::consts::E)),
                _ => {
                    let func = Func::lookup(&name).ok_or_else(|| Error::Parse {
                        column: tok.col,
                        message: format!("unknown identifier `{name}`"),
                    })?;
                    self.expect(Tok::LParen)?;
                    let mut args = vec![self.expr()?];
                    while let Some(Token { kind: Tok::Comma, .. }) = self.peek() {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen)?;
                    if args.len() != func.arity() {
                        return Err(Error::Parse {
                            column: tok.col,
                            message: format!("`{name}` takes {} argument(s), got {}", func.arity(), args.len()),
                        });
                    }
                    Ok(Node::Call(func, args))
                }
            },
            other => Err(Error::Parse { column: tok.col, message: format!("unexpected {other:?}") }),
        }
    }
}
