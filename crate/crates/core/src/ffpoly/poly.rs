//! Multivariate integer polynomials: parsing, printing and evaluation.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::field::FieldElement;
use crate::error::{Error, Result};

/// A polynomial with integer coefficients in named variables.
///
/// Coefficients are reduced modulo `p` only when evaluated, so one value can
/// serve every characteristic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    vars: Vec<String>,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl MultiPoly {
    pub fn zero(vars: &[String]) -> Self {
        MultiPoly {
            vars: vars.to_vec(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &[String], c: BigInt) -> Self {
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(vec![0; vars.len()], c);
        }
        p
    }

    pub fn variable(vars: &[String], i: usize) -> Self {
        let mut p = Self::zero(vars);
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        p.terms.insert(e, BigInt::one());
        p
    }

    pub fn from_terms(vars: &[String], terms: impl IntoIterator<Item = (Vec<u32>, BigInt)>) -> Self {
        let mut p = Self::zero(vars);
        for (e, c) in terms {
            assert_eq!(e.len(), vars.len(), "exponent vector length");
            p.add_term(e, c);
        }
        p
    }

    /// Formal partial derivative in variable `i`.
    pub fn derivative(&self, i: usize) -> Self {
        Self::from_terms(
            &self.vars,
            self.terms.iter().filter(|(e, _)| e[i] > 0).map(|(e, c)| {
                let mut e = e.clone();
                let k = e[i];
                e[i] -= 1;
                (e, c * BigInt::from(k))
            }),
        )
    }

    fn add_term(&mut self, e: Vec<u32>, c: BigInt) {
        let entry = self.terms.entry(e.clone()).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, BigInt> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|x| x == d),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(&self.vars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(&self.vars, BigInt::one());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Re-express in a larger variable list (every current variable must
    /// appear in `vars`).
    pub fn with_vars(&self, vars: &[String]) -> Result<Self> {
        let map: Vec<usize> = self
            .vars
            .iter()
            .map(|v| {
                vars.iter()
                    .position(|w| w == v)
                    .ok_or_else(|| Error::input(format!("variable {v} missing from {vars:?}")))
            })
            .collect::<Result<_>>()?;
        let terms = self.terms.iter().map(|(e, c)| {
            let mut ne = vec![0; vars.len()];
            for (i, &x) in e.iter().enumerate() {
                ne[map[i]] = x;
            }
            (ne, c.clone())
        });
        Ok(Self::from_terms(vars, terms))
    }

    /// Evaluates at a point over a finite field, reducing coefficients mod p.
    pub fn evaluate(&self, point: &[FieldElement]) -> Result<FieldElement> {
        evaluate_polynomial(self, point)
    }
}

/// Standard evaluation with coefficients reduced into the point's field.
pub fn evaluate_polynomial(f: &MultiPoly, point: &[FieldElement]) -> Result<FieldElement> {
    if point.len() != f.vars.len() {
        return Err(Error::input(format!(
            "arity mismatch: polynomial in {} variables evaluated at {} coordinates",
            f.vars.len(),
            point.len()
        )));
    }
    let field = match point.first() {
        Some(x) => x.field().clone(),
        None => {
            return Err(Error::input("cannot infer field from an empty point"));
        }
    };
    let p = BigInt::from(field.p());
    let mut acc = field.zero();
    for (e, c) in &f.terms {
        let cm = ((c % &p) + &p) % &p;
        let mut term = field.from_int(cm.to_i64().unwrap());
        for (x, &k) in point.iter().zip(e) {
            if k > 0 {
                term = term.mul(&x.pow(k as u128));
            }
        }
        acc = acc.add(&term);
    }
    Ok(acc)
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let mut factors: Vec<String> = Vec::new();
            let monomial = e.iter().any(|&k| k > 0);
            if !mag.is_one() || !monomial {
                factors.push(mag.to_string());
            }
            for (v, &k) in self.vars.iter().zip(e) {
                match k {
                    0 => {}
                    1 => factors.push(v.clone()),
                    _ => factors.push(format!("{v}^{k}")),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Op(char),
}

fn tokenize(text: &str, line: usize) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push((Tok::Int(s.parse().unwrap()), col));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else if "+-*^()".contains(c) {
            out.push((Tok::Op(c), col));
            i += 1;
        } else {
            return Err(Error::parse(line, col, format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: &'a [String],
    line: usize,
    end_col: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end_col)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, self.col(), msg)
    }

    fn expr(&mut self) -> Result<MultiPoly> {
        let mut acc = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let c = *c;
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == '+' { acc.add(&rhs) } else { acc.add(&rhs.neg()) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<MultiPoly> {
        let mut acc = self.unary()?;
        while let Some(Tok::Op('*')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = acc.mul(&rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<MultiPoly> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<MultiPoly> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            match self.peek().cloned() {
                Some(Tok::Int(n)) => {
                    let k = n
                        .to_u32()
                        .filter(|&k| k <= 4096)
                        .ok_or_else(|| self.err("exponent too large"))?;
                    self.pos += 1;
                    let out = base.pow(k);
                    self.no_juxtaposition()?;
                    Ok(out)
                }
                _ => Err(self.err("expected non-negative integer exponent after '^'")),
            }
        } else {
            Ok(base)
        }
    }

    fn no_juxtaposition(&self) -> Result<()> {
        match self.peek() {
            Some(Tok::Int(_)) | Some(Tok::Ident(_)) | Some(Tok::Op('(')) => {
                Err(self.err("implicit multiplication is not allowed; use '*'"))
            }
            Some(Tok::Op('^')) => Err(self.err("chained '^' is not allowed; use parentheses")),
            _ => Ok(()),
        }
    }

    fn atom(&mut self) -> Result<MultiPoly> {
        let out = match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                MultiPoly::constant(self.vars, n)
            }
            Some(Tok::Ident(name)) => {
                let i = self
                    .vars
                    .iter()
                    .position(|v| *v == name)
                    .ok_or_else(|| self.err(format!("unknown variable '{name}'")))?;
                self.pos += 1;
                MultiPoly::variable(self.vars, i)
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(Tok::Op(')')) => self.pos += 1,
                    _ => return Err(self.err("expected ')'")),
                }
                inner
            }
            Some(t) => return Err(self.err(format!("unexpected token {t:?}"))),
            None => return Err(self.err("unexpected end of expression")),
        };
        if !matches!(self.peek(), Some(Tok::Op('^'))) {
            self.no_juxtaposition()?;
        }
        Ok(out)
    }
}

/// Parses `text` as a polynomial in `vars`; errors carry line 1.
pub fn parse_polynomial(text: &str, vars: &[String]) -> Result<MultiPoly> {
    parse_polynomial_at(text, vars, 1)
}

/// As [`parse_polynomial`], attributing errors to the given line number.
pub fn parse_polynomial_at(text: &str, vars: &[String], line: usize) -> Result<MultiPoly> {
    for v in vars {
        let ok = v.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
            && v.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !ok {
            return Err(Error::parse(line, 1, format!("invalid variable name '{v}'")));
        }
    }
    let toks = tokenize(text, line)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        vars,
        line,
        end_col: text.chars().count() + 1,
    };
    let poly = parser.expr()?;
    if parser.pos != parser.toks.len() {
        return Err(parser.err("trailing input"));
    }
    Ok(poly)
}

pub fn var_list(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}
