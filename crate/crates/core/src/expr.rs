//! A small arithmetic expression grammar for problem data given in config
//! files: `+ - * / ^`, `sin cos exp log abs sqrt min max`, numeric literals,
//! the constant `pi`, and the variables `t`, `x1`..`xN`, plus `s` for radial
//! profiles.
//!
//! Grammar (precedence climbing):
//!   expr    := term (('+' | '-') term)*
//!   term    := factor (('*' | '/') factor)*
//!   factor  := '-' factor | primary ('^' factor)?   -- right-assoc power,
//!                                                      -s^2 reads -(s^2)
//!   primary := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'

use crate::error::{Error, Result};

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
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let mut toks = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                toks.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                toks.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                toks.push(Tok::Star);
                i += 1;
            }
            '/' => {
                toks.push(Tok::Slash);
                i += 1;
            }
            '^' => {
                toks.push(Tok::Caret);
                i += 1;
            }
            '(' => {
                toks.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                toks.push(Tok::RParen);
                i += 1;
            }
            ',' => {
                toks.push(Tok::Comma);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_digit()
                        || chars[i] == '.'
                        || chars[i] == 'e'
                        || chars[i] == 'E'
                        || ((chars[i] == '+' || chars[i] == '-')
                            && i > start
                            && (chars[i - 1] == 'e' || chars[i - 1] == 'E')))
                {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let v = text
                    .parse::<f64>()
                    .map_err(|_| Error::Expr(format!("bad number literal '{text}'")))?;
                toks.push(Tok::Num(v));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                toks.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(Error::Expr(format!("unexpected character '{other}'"))),
        }
    }
    Ok(toks)
}

#[derive(Debug, Clone)]
enum Node {
    Num(f64),
    Var(usize), // index into the variable table
    Unary(fn(f64) -> f64, Box<Node>),
    Binary(fn(f64, f64) -> f64, Box<Node>, Box<Node>),
}

/// A compiled expression over a fixed variable list.
#[derive(Debug, Clone)]
pub struct Expr {
    root: Node,
    vars: Vec<String>,
}

struct Parser<'a> {
    toks: &'a [Tok],
    pos: usize,
    vars: &'a [String],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        match self.bump() {
            Some(got) if got == t => Ok(()),
            got => Err(Error::Expr(format!("expected {t:?}, got {got:?}"))),
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Node::Binary(|a, b| a + b, Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Node::Binary(|a, b| a - b, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = Node::Binary(|a, b| a * b, Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Slash) => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = Node::Binary(|a, b| a / b, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Node> {
        // unary minus binds weaker than '^', so -s^2 means -(s^2)
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            let inner = self.factor()?;
            return Ok(Node::Unary(|a| -a, Box::new(inner)));
        }
        let base = self.primary()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            let exp = self.factor()?; // right-associative
            return Ok(Node::Binary(f64::powf, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node> {
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Node::Num(v)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                if matches!(self.peek(), Some(Tok::LParen)) {
                    self.bump();
                    let mut args = vec![self.expr()?];
                    while matches!(self.peek(), Some(Tok::Comma)) {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen)?;
                    self.call(&name, args)
                } else {
                    self.atom(&name)
                }
            }
            got => Err(Error::Expr(format!("unexpected token {got:?}"))),
        }
    }

    fn atom(&self, name: &str) -> Result<Node> {
        if name == "pi" {
            return Ok(Node::Num(std::f64::consts::PI));
        }
        if name == "e" {
            return Ok(Node::Num(std::f64::consts::E));
        }
        match self.vars.iter().position(|v| v == name) {
            Some(i) => Ok(Node::Var(i)),
            None => Err(Error::Expr(format!(
                "unknown variable '{name}' (available: {:?})",
                self.vars
            ))),
        }
    }

    fn call(&self, name: &str, mut args: Vec<Node>) -> Result<Node> {
        let unary = |f: fn(f64) -> f64, mut args: Vec<Node>| -> Result<Node> {
            if args.len() != 1 {
                return Err(Error::Expr("function takes one argument".into()));
            }
            Ok(Node::Unary(f, Box::new(args.remove(0))))
        };
        match name {
            "sin" => unary(f64::sin, args),
            "cos" => unary(f64::cos, args),
            "exp" => unary(f64::exp, args),
            "log" => unary(f64::ln, args),
            "abs" => unary(f64::abs, args),
            "sqrt" => unary(f64::sqrt, args),
            "min" | "max" => {
                if args.len() != 2 {
                    return Err(Error::Expr(format!("{name} takes two arguments")));
                }
                let b = args.remove(1);
                let a = args.remove(0);
                let f = if name == "min" { f64::min } else { f64::max };
                Ok(Node::Binary(f, Box::new(a), Box::new(b)))
            }
            other => Err(Error::Expr(format!("unknown function '{other}'"))),
        }
    }
}

fn eval_node(n: &Node, vals: &[f64]) -> f64 {
    match n {
        Node::Num(v) => *v,
        Node::Var(i) => vals[*i],
        Node::Unary(f, a) => f(eval_node(a, vals)),
        Node::Binary(f, a, b) => f(eval_node(a, vals), eval_node(b, vals)),
    }
}

impl Expr {
    /// Parses `src` against an explicit variable list, e.g. `["t", "x1", "x2"]`.
    pub fn parse(src: &str, vars: &[&str]) -> Result<Self> {
        let vars: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        let toks = lex(src)?;
        let mut p = Parser { toks: &toks, pos: 0, vars: &vars };
        let root = p.expr()?;
        if p.pos != toks.len() {
            return Err(Error::Expr(format!("trailing tokens after position {}", p.pos)));
        }
        Ok(Self { root, vars })
    }

    /// Parses a space-time expression in `t, x1..xN`.
    pub fn parse_spacetime(src: &str, dim: usize) -> Result<Self> {
        let mut names = vec!["t".to_string()];
        for a in 1..=dim {
            names.push(format!("x{a}"));
        }
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        Self::parse(src, &refs)
    }

    /// Parses a radial profile in the single variable `s`.
    pub fn parse_profile(src: &str) -> Result<Self> {
        Self::parse(src, &["s"])
    }

    pub fn eval(&self, vals: &[f64]) -> f64 {
        debug_assert_eq!(vals.len(), self.vars.len());
        eval_node(&self.root, vals)
    }

    /// Evaluates a space-time expression at (t, x).
    pub fn eval_spacetime(&self, t: f64, x: &[f64]) -> f64 {
        let mut vals = Vec::with_capacity(1 + x.len());
        vals.push(t);
        vals.extend_from_slice(x);
        // Expressions may omit trailing coordinates; pad defensively.
        while vals.len() < self.vars.len() {
            vals.push(0.0);
        }
        eval_node(&self.root, &vals[..self.vars.len()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_precedence() {
        let e = Expr::parse("1 + 2*3^2", &[]).unwrap();
        assert_eq!(e.eval(&[]), 19.0);
        let e = Expr::parse("(1+2)*3", &[]).unwrap();
        assert_eq!(e.eval(&[]), 9.0);
        let e = Expr::parse("2^3^2", &[]).unwrap(); // right-assoc: 2^9
        assert_eq!(e.eval(&[]), 512.0);
    }

    #[test]
    fn variables_and_functions() {
        let e = Expr::parse_spacetime("sin(pi*x1)*exp(-t)", 2).unwrap();
        let v = e.eval_spacetime(0.0, &[0.5, 0.0]);
        assert!((v - 1.0).abs() < 1e-15);
        let e = Expr::parse_spacetime("max(x1, x2) + min(x1, 0)", 2).unwrap();
        assert_eq!(e.eval_spacetime(0.0, &[-1.0, 2.0]), 2.0 + (-1.0));
    }

    #[test]
    fn unary_minus_and_profile() {
        let e = Expr::parse_profile("-s^2 + s").unwrap();
        assert_eq!(e.eval(&[3.0]), -9.0 + 3.0);
        let e = Expr::parse_profile("abs(-s)").unwrap();
        assert_eq!(e.eval(&[2.0]), 2.0);
    }

    #[test]
    fn errors_are_reported() {
        assert!(Expr::parse("1 +", &[]).is_err());
        assert!(Expr::parse("foo(1)", &[]).is_err());
        assert!(Expr::parse("y + 1", &["x"]).is_err());
        assert!(Expr::parse("1 2", &[]).is_err());
    }
}
