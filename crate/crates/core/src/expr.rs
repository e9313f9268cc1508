//! A small arithmetic expression language for chart maps and fields.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' unary)?            right associative
//! atom   := number | name | name '(' expr ')' | '(' expr ')'
//! ```
//!
//! Names are either variables bound at compile time, the constants `pi`
//! and `e`, or one of the functions `sin cos tan exp ln sqrt sinh cosh tanh abs`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("unexpected character {ch:?} at offset {pos}")]
    UnexpectedChar { ch: char, pos: usize },
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected token {found} at offset {pos}")]
    UnexpectedToken { found: String, pos: usize },
    #[error("unknown name {0:?}")]
    UnknownName(String),
    #[error("unknown function {0:?}")]
    UnknownFunction(String),
    #[error("malformed number {0:?}")]
    BadNumber(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
    Abs,
}

impl Func {
    fn lookup(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Exp => v.exp(),
            Func::Ln => v.ln(),
            Func::Sqrt => v.sqrt(),
            Func::Sinh => v.sinh(),
            Func::Cosh => v.cosh(),
            Func::Tanh => v.tanh(),
            Func::Abs => v.abs(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Compiled expression; variables are indices into the evaluation slice.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Parse `src`, resolving each name in `vars` to its position.
    pub fn parse(src: &str, vars: &[&str]) -> Result<Expr, ExprError> {
        let tokens = lex(src)?;
        let mut p = Parser {
            tokens: &tokens,
            pos: 0,
            vars,
        };
        let e = p.expr()?;
        match p.tokens.get(p.pos) {
            None => Ok(e),
            Some((tok, at)) => Err(ExprError::UnexpectedToken {
                found: tok.to_string(),
                pos: *at,
            }),
        }
    }

    /// # Panics
    /// If a variable index is out of range for `vars`.
    pub fn eval(&self, vars: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => vars[*i],
            Expr::Neg(e) => -e.eval(vars),
            Expr::Call(f, e) => f.apply(e.eval(vars)),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(vars), b.eval(vars));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => pow(a, b),
                }
            }
        }
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(e) | Expr::Call(_, e) => e.max_var(),
            Expr::Bin(_, a, b) => a.max_var().max(b.max_var()),
        }
    }
}

fn pow(a: f64, b: f64) -> f64 {
    if b.fract() == 0.0 && b.abs() <= i32::MAX as f64 {
        a.powi(b as i32)
    } else {
        a.powf(b)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(i) => write!(f, "${i}"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Bin(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {sym} {b})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Name(String),
    Sym(char),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(v) => write!(f, "{v}"),
            Token::Name(s) => write!(f, "{s:?}"),
            Token::Sym(c) => write!(f, "'{c}'"),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Token, usize)>, ExprError> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, ch) = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_ascii_digit() || chars[i].1 == '.') {
                i += 1;
            }
            // exponent part: e/E followed by optional sign and digits
            if i < chars.len() && matches!(chars[i].1, 'e' | 'E') {
                let mut j = i + 1;
                if j < chars.len() && matches!(chars[j].1, '+' | '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].1.is_ascii_digit() {
                    while j < chars.len() && chars[j].1.is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text: String = chars[start..i].iter().map(|(_, c)| *c).collect();
            let v = text.parse::<f64>().map_err(|_| ExprError::BadNumber(text.clone()))?;
            out.push((Token::Num(v), pos));
        } else if ch.is_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_alphanumeric() || chars[i].1 == '_') {
                i += 1;
            }
            out.push((Token::Name(chars[start..i].iter().map(|(_, c)| *c).collect()), pos));
        } else if "+-*/^()".contains(ch) {
            out.push((Token::Sym(ch), pos));
            i += 1;
        } else if ch == '×' {
            out.push((Token::Sym('*'), pos));
            i += 1;
        } else if ch == '÷' {
            out.push((Token::Sym('/'), pos));
            i += 1;
        } else if ch == '−' {
            out.push((Token::Sym('-'), pos));
            i += 1;
        } else {
            return Err(ExprError::UnexpectedChar { ch, pos });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [(Token, usize)],
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn peek_sym(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some((Token::Sym(c), _)) => Some(*c),
            _ => None,
        }
    }

    fn expect(&mut self, sym: char) -> Result<(), ExprError> {
        match self.tokens.get(self.pos) {
            Some((Token::Sym(c), _)) if *c == sym => {
                self.pos += 1;
                Ok(())
            }
            Some((tok, at)) => Err(ExprError::UnexpectedToken {
                found: tok.to_string(),
                pos: *at,
            }),
            None => Err(ExprError::UnexpectedEnd),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek_sym() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek_sym() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        match self.peek_sym() {
            Some('-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.peek_sym() == Some('^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let Some((tok, at)) = self.tokens.get(self.pos) else {
            return Err(ExprError::UnexpectedEnd);
        };
        self.pos += 1;
        match tok {
            Token::Num(v) => Ok(Expr::Const(*v)),
            Token::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Token::Name(name) => {
                if self.peek_sym() == Some('(') {
                    let func = Func::lookup(name).ok_or_else(|| ExprError::UnknownFunction(name.clone()))?;
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                if let Some(i) = self.vars.iter().position(|v| v == name) {
                    return Ok(Expr::Var(i));
                }
                match name.as_str() {
                    "pi" => Ok(Expr::Const(std::f64::consts::PI)),
                    "e" => Ok(Expr::Const(std::f64::consts::E)),
                    _ => Err(ExprError::UnknownName(name.clone())),
                }
            }
            Token::Sym(_) => Err(ExprError::UnexpectedToken {
                found: tok.to_string(),
                pos: *at,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(src: &str, vars: &[&str], vals: &[f64]) -> f64 {
        Expr::parse(src, vars).unwrap().eval(vals)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", &[], &[]), 7.0);
        assert_eq!(ev("(1 + 2) * 3", &[], &[]), 9.0);
        assert_eq!(ev("8 / 4 / 2", &[], &[]), 1.0);
        assert_eq!(ev("2 ^ 3 ^ 2", &[], &[]), 512.0);
        assert_eq!(ev("-2 ^ 2", &[], &[]), -4.0);
        assert_eq!(ev("2 ^ -1", &[], &[]), 0.5);
        assert_eq!(ev("10 - 4 - 3", &[], &[]), 3.0);
        assert_eq!(ev("3 × 4 ÷ 6 − 1", &[], &[]), 1.0);
    }

    #[test]
    fn variables_functions_constants() {
        let v = ev("sin(t)^2 + cos(t)^2", &["t"], &[0.37]);
        assert!((v - 1.0).abs() < 1e-15);
        assert_eq!(ev("u*v - v", &["u", "v"], &[3.0, 2.0]), 4.0);
        assert!((ev("exp(ln(x))", &["x"], &[2.5]) - 2.5).abs() < 1e-15);
        assert_eq!(ev("pi", &[], &[]), std::f64::consts::PI);
        assert_eq!(ev("e", &[], &[]), std::f64::consts::E);
        assert_eq!(ev("1.5e-3 * 2E2", &[], &[]), 0.3);
        assert_eq!(ev("sqrt(abs(-16))", &[], &[]), 4.0);
    }

    #[test]
    fn variables_shadow_constants() {
        assert_eq!(ev("e + 1", &["e"], &[1.0]), 2.0);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(Expr::parse("1 +", &[]), Err(ExprError::UnexpectedEnd));
        assert_eq!(Expr::parse("x", &[]), Err(ExprError::UnknownName("x".into())));
        assert_eq!(Expr::parse("foo(1)", &[]), Err(ExprError::UnknownFunction("foo".into())));
        assert_eq!(Expr::parse("1 # 2", &[]), Err(ExprError::UnexpectedChar { ch: '#', pos: 2 }));
        assert!(matches!(Expr::parse("(1 + 2", &[]), Err(ExprError::UnexpectedEnd)));
        assert!(matches!(Expr::parse("1 2", &[]), Err(ExprError::UnexpectedToken { pos: 2, .. })));
        assert!(matches!(Expr::parse("1..2", &[]), Err(ExprError::BadNumber(_))));
    }

    #[test]
    fn max_var_tracks_references() {
        assert_eq!(Expr::parse("1 + 2", &["a"]).unwrap().max_var(), None);
        assert_eq!(Expr::parse("a * sin(c)", &["a", "b", "c"]).unwrap().max_var(), Some(2));
    }

    proptest! {
        #[test]
        fn polynomial_matches_native(x in -3.0f64..3.0, y in -3.0f64..3.0) {
            let v = ev("x^3 - 2*x*y + y^2/4 - 7", &["x", "y"], &[x, y]);
            let native = x.powi(3) - 2.0 * x * y + y * y / 4.0 - 7.0;
            prop_assert!((v - native).abs() <= 1e-12 * (1.0 + native.abs()));
        }
    }
}
