//! Tiny arithmetic expression language for data fields in configuration
//! files.
//!
//! Grammar (usual precedence: `^` binds tighter than unary minus and
//! associates right, so `-x^2` is `-(x^2)` and `2^3^2` is `2^(3^2)`):
//!
//! ```text
//! expr   := term  (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 'x' | 'y' | 't' | ('sin'|'cos'|'exp') '(' expr ')' | '(' expr ')'
//! ```
//!
//! Numbers are ordinary decimal literals with optional exponent. Parse errors
//! carry a **column** (1-based byte offset into the expression source); the
//! configuration layer adds the line number.

use thiserror::Error;

/// Expression parse error with a 1-based column.
#[derive(Debug, Error, PartialEq)]
#[error("column {col}: {msg}")]
pub struct ExprError {
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    X,
    Y,
    T,
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Neg(Box<Node>),
    Sin(Box<Node>),
    Cos(Box<Node>),
    Exp(Box<Node>),
}

/// A compiled expression in the variables `x`, `y`, `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    src: String,
}

impl Expr {
    /// Parses `src`; the whole input must be consumed.
    pub fn parse(src: &str) -> Result<Expr, ExprError> {
        let mut p = Parser {
            bytes: src.as_bytes(),
            pos: 0,
        };
        p.skip_ws();
        let root = p.expr()?;
        p.skip_ws();
        if p.pos != p.bytes.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(Expr {
            root,
            src: src.to_string(),
        })
    }

    /// The constant `0`.
    pub fn zero() -> Expr {
        Expr {
            root: Node::Num(0.0),
            src: "0".into(),
        }
    }

    /// A constant expression.
    pub fn constant(v: f64) -> Expr {
        Expr {
            root: Node::Num(v),
            src: format!("{v}"),
        }
    }

    /// Original source text.
    pub fn src(&self) -> &str {
        &self.src
    }

    /// Evaluates at `(x, y, t)`.
    pub fn eval(&self, x: f64, y: f64, t: f64) -> f64 {
        eval_node(&self.root, x, y, t)
    }
}

fn eval_node(n: &Node, x: f64, y: f64, t: f64) -> f64 {
    match n {
        Node::Num(v) => *v,
        Node::X => x,
        Node::Y => y,
        Node::T => t,
        Node::Add(a, b) => eval_node(a, x, y, t) + eval_node(b, x, y, t),
        Node::Sub(a, b) => eval_node(a, x, y, t) - eval_node(b, x, y, t),
        Node::Mul(a, b) => eval_node(a, x, y, t) * eval_node(b, x, y, t),
        Node::Div(a, b) => eval_node(a, x, y, t) / eval_node(b, x, y, t),
        Node::Pow(a, b) => eval_node(a, x, y, t).powf(eval_node(b, x, y, t)),
        Node::Neg(a) => -eval_node(a, x, y, t),
        Node::Sin(a) => eval_node(a, x, y, t).sin(),
        Node::Cos(a) => eval_node(a, x, y, t).cos(),
        Node::Exp(a) => eval_node(a, x, y, t).exp(),
    }
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> ExprError {
        ExprError {
            col: self.pos + 1,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && (self.bytes[self.pos] as char).is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            self.skip_ws();
            if self.eat(b'+') {
                let rhs = self.term()?;
                lhs = Node::Add(Box::new(lhs), Box::new(rhs));
            } else if self.eat(b'-') {
                let rhs = self.term()?;
                lhs = Node::Sub(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            self.skip_ws();
            if self.eat(b'*') {
                let rhs = self.unary()?;
                lhs = Node::Mul(Box::new(lhs), Box::new(rhs));
            } else if self.eat(b'/') {
                let rhs = self.unary()?;
                lhs = Node::Div(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        self.skip_ws();
        if self.eat(b'-') {
            Ok(Node::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        self.skip_ws();
        if self.eat(b'^') {
            // Right-associative; a unary exponent allows `2^-3`.
            let exp = self.unary()?;
            Ok(Node::Pow(Box::new(base), Box::new(exp)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.err("unexpected end of expression")),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.skip_ws();
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self
                    .peek()
                    .map(|c| c.is_ascii_alphanumeric() || c == b'_')
                    .unwrap_or(false)
                {
                    self.pos += 1;
                }
                let ident = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
                match ident {
                    "x" => Ok(Node::X),
                    "y" => Ok(Node::Y),
                    "t" => Ok(Node::T),
                    "sin" | "cos" | "exp" => {
                        self.skip_ws();
                        if !self.eat(b'(') {
                            return Err(self.err(&format!("expected '(' after '{ident}'")));
                        }
                        let inner = self.expr()?;
                        self.skip_ws();
                        if !self.eat(b')') {
                            return Err(self.err("expected ')'"));
                        }
                        let b = Box::new(inner);
                        Ok(match ident {
                            "sin" => Node::Sin(b),
                            "cos" => Node::Cos(b),
                            _ => Node::Exp(b),
                        })
                    }
                    other => {
                        self.pos = start;
                        Err(self.err(&format!(
                            "unknown identifier '{other}' (variables: x y t; functions: sin cos exp)"
                        )))
                    }
                }
            }
            Some(c) => Err(self.err(&format!("unexpected character '{}'", c as char))),
        }
    }

    fn number(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        while self
            .peek()
            .map(|c| c.is_ascii_digit() || c == b'.')
            .unwrap_or(false)
        {
            self.pos += 1;
        }
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
                while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
                    self.pos += 1;
                }
            } else {
                self.pos = mark; // not an exponent after all
            }
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        text.parse::<f64>().map(Node::Num).map_err(|_| ExprError {
            col: start + 1,
            msg: format!("invalid number '{text}'"),
        })
    }
}
