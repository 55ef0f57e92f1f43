//! Scalar math expression parser and evaluator.
//!
//! Expressions define the problem data supplied in configuration text: the
//! nonlinearity `f(t, y, d)`, custom `phi(t)` / `phi'(t)` pairs, and
//! stability weights `chi(t)`. The grammar is standard infix with `^`
//! right-associative and binding tightest, `* /` over `+ -`, unary minus,
//! parentheses, the functions `sin cos tan exp log sqrt abs`, the
//! two-argument `mlf(mu, z)` (one-parameter Mittag-Leffler), and the
//! constants `pi` and `e`. `log` is the natural logarithm.
//!
//! Parsed expressions are immutable and freely shareable across threads.
//! Evaluation is deterministic IEEE double arithmetic; division by zero,
//! `log` of a non-positive value, `sqrt` of a negative value and any
//! non-finite intermediate are reported as errors, never as silent NaN.

use std::fmt;

use thiserror::Error;

use crate::special::{self, MlfParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("missing binding for variable `{0}`")]
    MissingBinding(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Mlf,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "mlf" => Func::Mlf,
            _ => return None,
        })
    }

    fn name(&self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Mlf => "mlf",
        }
    }

    fn arity(&self) -> usize {
        match self {
            Func::Mlf => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Num(f64),
    Var { name: String, index: usize },
    Const(Constant),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// A parsed expression together with the variable names it was parsed
/// against. Positional evaluation expects values in that same order.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    vars: Vec<String>,
}

impl Expr {
    /// Parses `source` allowing only the given variable names.
    pub fn parse(source: &str, allowed_vars: &[&str]) -> Result<Expr, ExprError> {
        let tokens = lex(source)?;
        let mut parser = Parser {
            tokens: &tokens,
            pos: 0,
            vars: allowed_vars,
            source_len: source.len(),
        };
        let root = parser.expression()?;
        match parser.peek() {
            None => Ok(Expr {
                root,
                vars: allowed_vars.iter().map(|s| s.to_string()).collect(),
            }),
            Some((tok, offset)) => Err(ExprError::Syntax {
                offset: *offset,
                message: format!("unexpected {}", tok.describe()),
            }),
        }
    }

    /// Variable names this expression was parsed against, in positional order.
    pub fn var_names(&self) -> &[String] {
        &self.vars
    }

    /// Evaluates with positional values matching the parse-time variable list.
    pub fn eval_at(&self, values: &[f64]) -> Result<f64, ExprError> {
        eval_node(&self.root, values)
    }

    /// Evaluates with name/value bindings; every free variable must be bound.
    pub fn eval_named(&self, bindings: &[(&str, f64)]) -> Result<f64, ExprError> {
        let mut values = Vec::with_capacity(self.vars.len());
        for name in &self.vars {
            match bindings.iter().find(|(n, _)| n == name) {
                Some((_, v)) => values.push(*v),
                None => {
                    if self.references(name) {
                        return Err(ExprError::MissingBinding(name.clone()));
                    }
                    values.push(f64::NAN);
                }
            }
        }
        self.eval_at(&values)
    }

    /// True if the expression mentions the named variable.
    pub fn references(&self, name: &str) -> bool {
        fn walk(node: &Node, name: &str) -> bool {
            match node {
                Node::Var { name: n, .. } => n == name,
                Node::Num(_) | Node::Const(_) => false,
                Node::Neg(x) => walk(x, name),
                Node::Bin(_, l, r) => walk(l, name) || walk(r, name),
                Node::Call(_, args) => args.iter().any(|a| walk(a, name)),
            }
        }
        walk(&self.root, name)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.root)
    }
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, PartialEq)]
enum Token {
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
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Num(v) => format!("number `{v}`"),
            Token::Ident(s) => format!("identifier `{s}`"),
            Token::Plus => "`+`".into(),
            Token::Minus => "`-`".into(),
            Token::Star => "`*`".into(),
            Token::Slash => "`/`".into(),
            Token::Caret => "`^`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::Comma => "`,`".into(),
        }
    }
}

fn lex(source: &str) -> Result<Vec<(Token, usize)>, ExprError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'+' => {
                tokens.push((Token::Plus, i));
                i += 1;
            }
            b'-' => {
                tokens.push((Token::Minus, i));
                i += 1;
            }
            b'*' => {
                tokens.push((Token::Star, i));
                i += 1;
            }
            b'/' => {
                tokens.push((Token::Slash, i));
                i += 1;
            }
            b'^' => {
                tokens.push((Token::Caret, i));
                i += 1;
            }
            b'(' => {
                tokens.push((Token::LParen, i));
                i += 1;
            }
            b')' => {
                tokens.push((Token::RParen, i));
                i += 1;
            }
            b',' => {
                tokens.push((Token::Comma, i));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mark = i;
                    i += 1;
                    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                        i += 1;
                    }
                    if i < bytes.len() && bytes[i].is_ascii_digit() {
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    } else {
                        // not an exponent, e.g. `2*e` lexed as `2` `*` `e`: back off
                        i = mark;
                    }
                }
                let text = &source[start..i];
                let value: f64 = text.parse().map_err(|_| ExprError::Syntax {
                    offset: start,
                    message: format!("invalid number literal `{text}`"),
                })?;
                tokens.push((Token::Num(value), start));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                tokens.push((Token::Ident(source[start..i].to_string()), start));
            }
            _ => {
                return Err(ExprError::Syntax {
                    offset: i,
                    message: format!(
                        "unexpected character `{}`",
                        source[i..].chars().next().unwrap()
                    ),
                })
            }
        }
    }
    Ok(tokens)
}

// ---------------------------------------------------------------------------
// Parser: expression := term (('+'|'-') term)*
//         term       := factor (('*'|'/') factor)*
//         factor     := '-' factor | power
//         power      := atom ('^' factor)?        (right-associative)
//         atom       := number | ident | ident '(' args ')' | '(' expression ')'

struct Parser<'a> {
    tokens: &'a [(Token, usize)],
    pos: usize,
    vars: &'a [&'a str],
    source_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&(Token, usize)> {
        self.tokens.get(self.pos)
    }

    fn advance(&mut self) -> Option<&(Token, usize)> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn end_offset(&self) -> usize {
        self.source_len
    }

    fn expression(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some((Token::Plus, _)) => BinOp::Add,
                Some((Token::Minus, _)) => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some((Token::Star, _)) => BinOp::Mul,
                Some((Token::Slash, _)) => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Node, ExprError> {
        if matches!(self.peek(), Some((Token::Minus, _))) {
            self.pos += 1;
            let inner = self.factor()?;
            return Ok(Node::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if matches!(self.peek(), Some((Token::Caret, _))) {
            self.pos += 1;
            let exponent = self.factor()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        let (token, offset) = match self.advance() {
            Some(t) => (t.0.clone(), t.1),
            None => {
                return Err(ExprError::Syntax {
                    offset: self.end_offset(),
                    message: "unexpected end of input".into(),
                })
            }
        };
        match token {
            Token::Num(v) => Ok(Node::Num(v)),
            Token::LParen => {
                let inner = self.expression()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Token::Ident(name) => {
                if matches!(self.peek(), Some((Token::LParen, _))) {
                    let func =
                        Func::from_name(&name).ok_or_else(|| ExprError::UnknownIdentifier {
                            name: name.clone(),
                            offset,
                        })?;
                    self.pos += 1; // consume '('
                    let mut args = vec![self.expression()?];
                    while matches!(self.peek(), Some((Token::Comma, _))) {
                        self.pos += 1;
                        args.push(self.expression()?);
                    }
                    self.expect_rparen()?;
                    if args.len() != func.arity() {
                        return Err(ExprError::Syntax {
                            offset,
                            message: format!(
                                "`{}` takes {} argument(s), got {}",
                                func.name(),
                                func.arity(),
                                args.len()
                            ),
                        });
                    }
                    return Ok(Node::Call(func, args));
                }
                match name.as_str() {
                    "pi" => Ok(Node::Const(Constant::Pi)),
                    "e" => Ok(Node::Const(Constant::E)),
                    _ => {
                        if let Some(index) = self.vars.iter().position(|v| *v == name) {
                            Ok(Node::Var { name, index })
                        } else {
                            Err(ExprError::UnknownIdentifier { name, offset })
                        }
                    }
                }
            }
            other => Err(ExprError::Syntax {
                offset,
                message: format!("unexpected {}", other.describe()),
            }),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ExprError> {
        match self.advance() {
            Some((Token::RParen, _)) => Ok(()),
            Some((tok, offset)) => Err(ExprError::Syntax {
                offset: *offset,
                message: format!("expected `)`, found {}", tok.describe()),
            }),
            None => Err(ExprError::Syntax {
                offset: self.end_offset(),
                message: "expected `)`, found end of input".into(),
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// Evaluation

fn ensure_finite(value: f64, what: &str) -> Result<f64, ExprError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ExprError::Domain(format!("{what} produced {value}")))
    }
}

fn eval_node(node: &Node, values: &[f64]) -> Result<f64, ExprError> {
    match node {
        Node::Num(v) => Ok(*v),
        Node::Const(Constant::Pi) => Ok(std::f64::consts::PI),
        Node::Const(Constant::E) => Ok(std::f64::consts::E),
        Node::Var { name, index } => values
            .get(*index)
            .copied()
            .filter(|v| !v.is_nan())
            .ok_or_else(|| ExprError::MissingBinding(name.clone())),
        Node::Neg(inner) => Ok(-eval_node(inner, values)?),
        Node::Bin(op, lhs, rhs) => {
            let l = eval_node(lhs, values)?;
            let r = eval_node(rhs, values)?;
            let out = match op {
                BinOp::Add => l + r,
                BinOp::Sub => l - r,
                BinOp::Mul => l * r,
                BinOp::Div => {
                    if r == 0.0 {
                        return Err(ExprError::Domain(format!("division by zero ({l} / 0)")));
                    }
                    l / r
                }
                BinOp::Pow => l.powf(r),
            };
            ensure_finite(out, "arithmetic")
        }
        Node::Call(func, args) => {
            let a0 = eval_node(&args[0], values)?;
            let out = match func {
                Func::Sin => a0.sin(),
                Func::Cos => a0.cos(),
                Func::Tan => a0.tan(),
                Func::Exp => a0.exp(),
                Func::Log => {
                    if a0 <= 0.0 {
                        return Err(ExprError::Domain(format!("log of non-positive value {a0}")));
                    }
                    a0.ln()
                }
                Func::Sqrt => {
                    if a0 < 0.0 {
                        return Err(ExprError::Domain(format!("sqrt of negative value {a0}")));
                    }
                    a0.sqrt()
                }
                Func::Abs => a0.abs(),
                Func::Mlf => {
                    let z = eval_node(&args[1], values)?;
                    let params =
                        MlfParams::new(a0).map_err(|e| ExprError::Domain(format!("mlf: {e}")))?;
                    special::mittag_leffler(&params, z)
                        .map_err(|e| ExprError::Domain(format!("mlf: {e}")))?
                }
            };
            ensure_finite(out, func.name())
        }
    }
}

// ---------------------------------------------------------------------------
// Pretty printing: minimal parentheses such that reparsing reproduces the
// tree structurally.

fn prec(node: &Node) -> u8 {
    match node {
        Node::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Node::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Node::Neg(_) => 3,
        Node::Bin(BinOp::Pow, ..) => 4,
        Node::Num(_) | Node::Var { .. } | Node::Const(_) | Node::Call(..) => 5,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Node, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "(")?;
        write_node(f, child)?;
        write!(f, ")")
    } else {
        write_node(f, child)
    }
}

fn write_node(f: &mut fmt::Formatter<'_>, node: &Node) -> fmt::Result {
    match node {
        Node::Num(v) => write!(f, "{v}"),
        Node::Var { name, .. } => write!(f, "{name}"),
        Node::Const(Constant::Pi) => write!(f, "pi"),
        Node::Const(Constant::E) => write!(f, "e"),
        Node::Neg(inner) => {
            write!(f, "-")?;
            write_child(f, inner, prec(inner) < 3)
        }
        Node::Bin(op, lhs, rhs) => match op {
            BinOp::Add | BinOp::Sub => {
                write_child(f, lhs, false)?;
                write!(f, "{}", if *op == BinOp::Add { " + " } else { " - " })?;
                write_child(f, rhs, prec(rhs) <= 1)
            }
            BinOp::Mul | BinOp::Div => {
                write_child(f, lhs, prec(lhs) < 2)?;
                write!(f, "{}", if *op == BinOp::Mul { "*" } else { "/" })?;
                write_child(f, rhs, prec(rhs) <= 2)
            }
            BinOp::Pow => {
                write_child(f, lhs, prec(lhs) <= 4)?;
                write!(f, "^")?;
                write_child(f, rhs, prec(rhs) < 3)
            }
        },
        Node::Call(func, args) => {
            write!(f, "{}(", func.name())?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write_node(f, a)?;
            }
            write!(f, ")")
        }
    }
}
