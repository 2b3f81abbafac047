//! Closed-form expressions in `x`, `theta` and `tau` for user-supplied lifts.
//!
//! Grammar: numbers, the variables above, the constants `pi` and `e`,
//! `+ - * / ^`, unary minus, parentheses and the functions
//! `sin cos tan asin acos atan exp ln log sqrt abs floor`.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    X,
    Theta,
    Tau,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Asin,
    Acos,
    Atan,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Floor,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.expr(0)?;
        if p.pos != p.tokens.len() {
            return Err(Error::Expression(format!(
                "unexpected trailing input at token {}",
                p.pos
            )));
        }
        Ok(e)
    }

    pub fn eval(&self, x: f64, theta: f64, tau: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::X) => x,
            Expr::Var(Var::Theta) => theta,
            Expr::Var(Var::Tau) => tau,
            Expr::Neg(a) => -a.eval(x, theta, tau),
            Expr::Bin(op, a, b) => {
                let a = a.eval(x, theta, tau);
                let b = b.eval(x, theta, tau);
                match op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    Op::Div => a / b,
                    Op::Pow => a.powf(b),
                }
            }
            Expr::Call(f, a) => {
                let a = a.eval(x, theta, tau);
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Tan => a.tan(),
                    Func::Asin => a.asin(),
                    Func::Acos => a.acos(),
                    Func::Atan => a.atan(),
                    Func::Exp => a.exp(),
                    Func::Ln => a.ln(),
                    Func::Sqrt => a.sqrt(),
                    Func::Abs => a.abs(),
                    Func::Floor => a.floor(),
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let save = i;
                i += 1;
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    i += 1;
                }
                if i < chars.len() && chars[i].is_ascii_digit() {
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                } else {
                    i = save;
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v = s
                .parse::<f64>()
                .map_err(|_| Error::Expression(format!("bad number '{s}'")))?;
            out.push(Tok::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(Error::Expression(format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, c: char) -> Result<()> {
        match self.next() {
            Some(Tok::Sym(s)) if s == c => Ok(()),
            other => Err(Error::Expression(format!("expected '{c}', found {other:?}"))),
        }
    }

    // precedence climbing; `^` is right associative and binds tighter than unary minus
    fn expr(&mut self, min_prec: u8) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let (op, prec, right_assoc) = match self.peek() {
                Some(Tok::Sym('+')) => (Op::Add, 1, false),
                Some(Tok::Sym('-')) => (Op::Sub, 1, false),
                Some(Tok::Sym('*')) => (Op::Mul, 2, false),
                Some(Tok::Sym('/')) => (Op::Div, 2, false),
                Some(Tok::Sym('^')) => (Op::Pow, 4, true),
                _ => break,
            };
            if prec < min_prec {
                break;
            }
            self.pos += 1;
            let next_min = if right_assoc { prec } else { prec + 1 };
            let rhs = if op == Op::Pow {
                self.pow_rhs()?
            } else {
                self.expr(next_min)?
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn pow_rhs(&mut self) -> Result<Expr> {
        if let Some(Tok::Sym('-')) = self.peek() {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.pow_rhs()?)));
        }
        let base = self.atom()?;
        if let Some(Tok::Sym('^')) = self.peek() {
            self.pos += 1;
            let e = self.pow_rhs()?;
            return Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(e)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Tok::Sym('-')) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.expr(3)?)))
            }
            Some(Tok::Sym('+')) => {
                self.pos += 1;
                self.expr(3)
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Tok::Num(v)) => Ok(Expr::Num(v)),
            Some(Tok::Sym('(')) => {
                let e = self.expr(0)?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                let var = match name.as_str() {
                    "x" => Some(Expr::Var(Var::X)),
                    "theta" => Some(Expr::Var(Var::Theta)),
                    "tau" => Some(Expr::Var(Var::Tau)),
                    "pi" => Some(Expr::Num(std::f64::consts::PI)),
                    "e" => Some(Expr::Num(std::f64::consts::E)),
                    _ => None,
                };
                if let Some(v) = var {
                    return Ok(v);
                }
                let func = match name.as_str() {
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "tan" => Func::Tan,
                    "asin" => Func::Asin,
                    "acos" => Func::Acos,
                    "atan" | "arctan" => Func::Atan,
                    "exp" => Func::Exp,
                    "ln" | "log" => Func::Ln,
                    "sqrt" => Func::Sqrt,
                    "abs" => Func::Abs,
                    "floor" => Func::Floor,
                    _ => return Err(Error::Expression(format!("unknown identifier '{name}'"))),
                };
                self.expect('(')?;
                let arg = self.expr(0)?;
                self.expect(')')?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            other => Err(Error::Expression(format!("unexpected token {other:?}"))),
        }
    }
}
