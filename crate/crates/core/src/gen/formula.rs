//! Column formulas: arithmetic over named columns plus a few functions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | atom
//! atom   := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Functions: `sqrt(x)`, `abs(x)`, `ln(x)`, and `centroid_distance(a, b, ...)`,
//! the distance from each record to the nearest class centroid in the
//! space of its arguments, with centroids fitted on a seeded half of the
//! records.

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Col(String),
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Abs,
    Ln,
    CentroidDistance,
}

impl Func {
    fn parse(name: &str) -> Option<Func> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "ln" => Func::Ln,
            "centroid_distance" => Func::CentroidDistance,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Name(String),
    Sym(char),
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
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
            // exponent
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                i += 1;
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v = s
                .parse()
                .map_err(|_| Error::Formula(format!("bad number \"{s}\" in \"{src}\"")))?;
            out.push(Tok::Num(v));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Name(chars[start..i].iter().collect()));
        } else if "+-*/(),".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(Error::Formula(format!("unexpected '{c}' in \"{src}\"")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn fail<T>(&self, what: &str) -> Result<T> {
        Err(Error::Formula(format!("{what} in \"{}\"", self.src)))
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                Op::Add
            } else if self.eat('-') {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                Op::Mul
            } else if self.eat('/') {
                Op::Div
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::Name(name)) => {
                self.pos += 1;
                if !self.eat('(') {
                    return Ok(Expr::Col(name));
                }
                let Some(func) = Func::parse(&name) else {
                    return self.fail(&format!("unknown function \"{name}\""));
                };
                let mut args = vec![self.expr()?];
                while self.eat(',') {
                    args.push(self.expr()?);
                }
                if !self.eat(')') {
                    return self.fail("missing ')'");
                }
                let ok = match func {
                    Func::CentroidDistance => !args.is_empty(),
                    _ => args.len() == 1,
                };
                if !ok {
                    return self.fail(&format!("wrong argument count for \"{name}\""));
                }
                Ok(Expr::Call(func, args))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.fail("missing ')'");
                }
                Ok(e)
            }
            _ => self.fail("expected a number, name or '('"),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        src,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.fail("trailing input");
    }
    Ok(e)
}

impl Expr {
    /// Column names referenced, in first-appearance order.
    pub fn columns(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Num(_) => {}
            Expr::Col(c) => {
                if !out.contains(&c.as_str()) {
                    out.push(c);
                }
            }
            Expr::Neg(e) => e.collect(out),
            Expr::Bin(_, a, b) => {
                a.collect(out);
                b.collect(out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.collect(out)),
        }
    }
}

/// What formula evaluation needs beyond the referenced columns.
pub struct EvalContext<'a> {
    pub records: usize,
    pub column: &'a dyn Fn(&str) -> Option<&'a [f64]>,
    /// Class index per record, for `centroid_distance`.
    pub classes: &'a [usize],
    /// Records used to fit centroids.
    pub fit_records: &'a [usize],
}

pub fn eval(expr: &Expr, ctx: &EvalContext<'_>) -> Result<Vec<f64>> {
    Ok(match expr {
        Expr::Num(v) => vec![*v; ctx.records],
        Expr::Col(c) => (ctx.column)(c)
            .ok_or_else(|| Error::Formula(format!("unknown column \"{c}\"")))?
            .to_vec(),
        Expr::Neg(e) => eval(e, ctx)?.into_iter().map(|x| -x).collect(),
        Expr::Bin(op, a, b) => {
            let (a, b) = (eval(a, ctx)?, eval(b, ctx)?);
            a.iter()
                .zip(&b)
                .map(|(&x, &y)| match op {
                    Op::Add => x + y,
                    Op::Sub => x - y,
                    Op::Mul => x * y,
                    Op::Div => x / y,
                })
                .collect()
        }
        Expr::Call(Func::CentroidDistance, args) => {
            let cols = args
                .iter()
                .map(|a| eval(a, ctx))
                .collect::<Result<Vec<_>>>()?;
            centroid_distance(&cols, ctx.classes, ctx.fit_records)?
        }
        Expr::Call(f, args) => {
            let x = eval(&args[0], ctx)?;
            x.into_iter()
                .map(|v| match f {
                    Func::Sqrt => v.sqrt(),
                    Func::Abs => v.abs(),
                    Func::Ln => v.ln(),
                    Func::CentroidDistance => unreachable!(),
                })
                .collect()
        }
    })
}

fn centroid_distance(cols: &[Vec<f64>], classes: &[usize], fit: &[usize]) -> Result<Vec<f64>> {
    let k = classes.iter().max().map_or(0, |m| m + 1);
    let d = cols.len();
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for &r in fit {
        counts[classes[r]] += 1;
        for (s, col) in sums[classes[r]].iter_mut().zip(cols) {
            *s += col[r];
        }
    }
    let centroids: Vec<Vec<f64>> = sums
        .into_iter()
        .zip(&counts)
        .filter(|(_, &n)| n > 0)
        .map(|(s, &n)| s.into_iter().map(|x| x / n as f64).collect())
        .collect();
    if centroids.is_empty() {
        return Err(Error::Formula(
            "centroid_distance has no records to fit centroids on".into(),
        ));
    }
    Ok((0..classes.len())
        .map(|r| {
            centroids
                .iter()
                .map(|c| {
                    c.iter()
                        .zip(cols)
                        .map(|(m, col)| (col[r] - m).powi(2))
                        .sum::<f64>()
                        .sqrt()
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_columns() {
        let e = parse("a + b * -c / (2 - a)").unwrap();
        assert_eq!(e.columns(), vec!["a", "b", "c"]);
        let a = [1.0, 3.0];
        let b = [2.0, 2.0];
        let c = [4.0, 1.0];
        let lookup = |n: &str| -> Option<&[f64]> {
            match n {
                "a" => Some(&a[..]),
                "b" => Some(&b[..]),
                "c" => Some(&c[..]),
                _ => None,
            }
        };
        let ctx = EvalContext {
            records: 2,
            column: &lookup,
            classes: &[0, 0],
            fit_records: &[],
        };
        let v = eval(&e, &ctx).unwrap();
        assert_eq!(v, vec![1.0 + 2.0 * -4.0 / 1.0, 3.0 + -2.0 / -1.0]);
    }

    #[test]
    fn parse_errors() {
        for bad in [
            "",
            "a +",
            "(a",
            "a b",
            "foo(a)",
            "sqrt(a, b)",
            "a $ b",
            "1.2.3",
        ] {
            assert!(matches!(parse(bad), Err(Error::Formula(_))), "{bad}");
        }
        assert!(parse("1e-3 * x").is_ok());
    }

    #[test]
    fn centroid_distance_uses_fit_records_only() {
        let x = [0.0, 2.0, 10.0, 100.0];
        let lookup = |_: &str| -> Option<&[f64]> { Some(&x[..]) };
        let ctx = EvalContext {
            records: 4,
            column: &lookup,
            classes: &[0, 0, 1, 1],
            fit_records: &[0, 1, 2],
        };
        let v = eval(&parse("centroid_distance(x)").unwrap(), &ctx).unwrap();
        // centroids 1 and 10; record 3 is not used for fitting
        assert_eq!(v, vec![1.0, 1.0, 0.0, 90.0]);
    }
}
