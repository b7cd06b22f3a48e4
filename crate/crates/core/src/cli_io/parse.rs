//! Reading a cubic pencil from text such as
//!
//! ```text
//! A(t) = 93273t^4 + 58840t^3 + 102618t^2 + 35680t + 14485
//! B = ...
//! X³ + 4A(t)X²Z + 512B(t)XZ² − Y²Z
//! ```
//!
//! Statements end at a newline or `;` unless a parenthesis is open, the line ends with an
//! operator or with `\`. Every statement but the last is a definition `NAME = expr` (or
//! `NAME(t) = expr`); the last one is the pencil. `#` starts a comment.

use std::collections::{BTreeMap, HashMap};

use rug::{Integer, Rational};
use thiserror::Error;

use crate::griffiths_dwork::{CubicPencil, PencilError};
use crate::poly::QPoly;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("no pencil expression found")]
    Empty,
    #[error(transparent)]
    Pencil(#[from] PencilError),
}

/// Polynomial in `X, Y, Z` with coefficients in `Q[t]`.
#[derive(Debug, Clone, PartialEq, Default)]
struct Poly(BTreeMap<[u32; 3], QPoly>);

impl Poly {
    fn constant(c: QPoly) -> Poly {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert([0, 0, 0], c);
        }
        Poly(m)
    }

    fn var(i: usize) -> Poly {
        let mut e = [0; 3];
        e[i] = 1;
        Poly(BTreeMap::from([(e, QPoly::from_i64(&[1]))]))
    }

    fn add(&self, o: &Poly) -> Poly {
        let mut m = self.0.clone();
        for (e, c) in &o.0 {
            let s = m.get(e).map_or_else(|| c.clone(), |x| x.add(c));
            if s.is_zero() {
                m.remove(e);
            } else {
                m.insert(*e, s);
            }
        }
        Poly(m)
    }

    fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|(e, c)| (*e, c.neg())).collect())
    }

    fn mul(&self, o: &Poly) -> Poly {
        let mut out = Poly::default();
        for (e1, c1) in &self.0 {
            for (e2, c2) in &o.0 {
                let e = [e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2]];
                out = out.add(&Poly(BTreeMap::from([(e, c1.mul(c2))])));
            }
        }
        out
    }

    fn pow(&self, n: u32) -> Poly {
        (0..n).fold(Poly::constant(QPoly::from_i64(&[1])), |acc, _| acc.mul(self))
    }

    /// The rational number this is, if it is one.
    fn as_rational(&self) -> Option<Rational> {
        match self.0.len() {
            0 => Some(Rational::new()),
            1 => {
                let c = self.0.get(&[0, 0, 0])?;
                (c.degree() == 0).then(|| c.coeff(0))
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Op(char),
    Sup(u32),
    LParen,
    RParen,
}

fn superscript(c: char) -> Option<u32> {
    "⁰¹²³⁴⁵⁶⁷⁸⁹".chars().position(|s| s == c).map(|p| p as u32)
}

fn lex(s: &str, line: usize) -> Result<Vec<Tok>, ParseError> {
    let err = |m: String| ParseError::Syntax { line, message: m };
    let cs: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && cs.get(i + 1).is_some_and(char::is_ascii_digit)) {
            let st = i;
            while i < cs.len() && (cs[i].is_ascii_digit() || cs[i] == '.') {
                i += 1;
            }
            let text: String = cs[st..i].iter().collect();
            out.push(Tok::Num(decimal(&text).ok_or_else(|| err(format!("bad number {text}")))?));
        } else if c.is_alphabetic() || c == '_' {
            let st = i;
            while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_') && superscript(cs[i]).is_none() {
                i += 1;
            }
            out.push(Tok::Ident(cs[st..i].iter().collect()));
        } else if superscript(c).is_some() {
            let mut e = 0u32;
            while let Some(d) = cs.get(i).and_then(|&c| superscript(c)) {
                e = e.checked_mul(10).and_then(|e| e.checked_add(d)).ok_or_else(|| err("exponent too large".into()))?;
                i += 1;
            }
            out.push(Tok::Sup(e));
        } else {
            i += 1;
            out.push(match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '+' | '=' | '/' | '^' => Tok::Op(c),
                '-' | '−' | '–' => Tok::Op('-'),
                '*' if cs.get(i) == Some(&'*') => {
                    i += 1;
                    Tok::Op('^')
                }
                '*' | '·' | '×' => Tok::Op('*'),
                _ => return Err(err(format!("unexpected character {c:?}"))),
            });
        }
    }
    Ok(out)
}

fn decimal(s: &str) -> Option<Rational> {
    match s.split_once('.') {
        None => s.parse::<Integer>().ok().map(Rational::from),
        Some((a, b)) if !b.contains('.') => {
            let digits = format!("{a}{b}");
            let n = if digits.is_empty() { Integer::new() } else { digits.parse::<Integer>().ok()? };
            Some(Rational::from((n, Integer::from(Integer::u_pow_u(10, b.len() as u32)))))
        }
        _ => None,
    }
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    line: usize,
    defs: &'a HashMap<String, Poly>,
}

impl Parser<'_> {
    fn err<T>(&self, m: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax { line: self.line, message: m.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn expr(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let t = self.term()?;
            acc = if c == '+' { acc.add(&t) } else { acc.add(&t.neg()) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Op('*')) => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                Some(Tok::Op('/')) => {
                    self.pos += 1;
                    let d = self.unary()?;
                    match d.as_rational() {
                        Some(q) if q != 0 => acc = acc.mul(&Poly::constant(QPoly::constant(q.recip()))),
                        _ => return self.err("division by a non-constant or by zero"),
                    }
                }
                Some(Tok::Num(_) | Tok::Ident(_) | Tok::LParen) => acc = acc.mul(&self.power()?),
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Poly, ParseError> {
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

    fn exponent(&mut self) -> Result<u32, ParseError> {
        let e = self.unary()?;
        match e.as_rational() {
            Some(q) if q >= 0 && *q.denom() == 1 && *q.numer() <= 64 => Ok(q.numer().to_u32().expect("small")),
            _ => self.err("exponents must be integers between 0 and 64"),
        }
    }

    fn power(&mut self) -> Result<Poly, ParseError> {
        let base = self.atom()?;
        match self.peek() {
            Some(Tok::Op('^')) => {
                self.pos += 1;
                let n = self.exponent()?;
                Ok(base.pow(n))
            }
            Some(Tok::Sup(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(base.pow(n))
            }
            _ => Ok(base),
        }
    }

    fn atom(&mut self) -> Result<Poly, ParseError> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(q)) => {
                self.pos += 1;
                Ok(Poly::constant(QPoly::constant(q)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.err("missing ')'");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if !is_known(&name, self.defs) {
                    return self.err(format!("unknown name {name:?}"));
                }
                // `A(t)` for a defined `A` is `A`, not `A * t`.
                if self.defs.contains_key(&name) && self.toks[self.pos..].starts_with(&[Tok::LParen, Tok::Ident("t".into()), Tok::RParen]) {
                    self.pos += 3;
                }
                Ok(self.lookup(&name))
            }
            Some(t) => self.err(format!("unexpected {t:?}")),
            None => self.err("unexpected end of expression"),
        }
    }

    fn lookup(&self, name: &str) -> Poly {
        match name {
            "t" => Poly::constant(QPoly::t()),
            "X" => Poly::var(0),
            "Y" => Poly::var(1),
            "Z" => Poly::var(2),
            n => self.defs[n].clone(),
        }
    }
}

fn is_known(s: &str, defs: &HashMap<String, Poly>) -> bool {
    matches!(s, "t" | "X" | "Y" | "Z") || defs.contains_key(s)
}

/// Split juxtaposed names, longest match first, so an exponent binds to the last one:
/// `XZ²` is `X Z^2`.
fn split_for_power(toks: Vec<Tok>, defs: &HashMap<String, Poly>) -> Vec<Tok> {
    let known = |s: &str| is_known(s, defs);
    let mut out = Vec::new();
    for t in toks {
        match t {
            Tok::Ident(s) if !known(&s) => {
                // Greedy split; leave unknown remainders for the parser to report.
                let mut rest = s.as_str();
                let mut parts = Vec::new();
                'outer: while !rest.is_empty() {
                    let ends: Vec<usize> = rest.char_indices().map(|(i, c)| i + c.len_utf8()).rev().collect();
                    for e in ends {
                        if known(&rest[..e]) {
                            parts.push(rest[..e].to_string());
                            rest = &rest[e..];
                            continue 'outer;
                        }
                    }
                    parts.push(rest.to_string());
                    break;
                }
                out.extend(parts.into_iter().map(Tok::Ident));
            }
            t => out.push(t),
        }
    }
    out
}

/// Split text into statements with their starting line numbers.
fn statements(text: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut start = 1;
    let mut depth = 0i64;
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        for piece in line.split_inclusive(';') {
            let (body, ends) = match piece.strip_suffix(';') {
                Some(b) => (b, true),
                None => (piece, false),
            };
            if cur.trim().is_empty() {
                start = ln + 1;
            }
            let body = body.trim_end();
            let (body, backslash) = match body.strip_suffix('\\') {
                Some(b) => (b, true),
                None => (body, false),
            };
            depth += body.chars().filter(|&c| c == '(').count() as i64 - body.chars().filter(|&c| c == ')').count() as i64;
            cur.push_str(body);
            cur.push(' ');
            let trailing_op = body.trim_end().ends_with(['+', '-', '−', '*', '/', '^', '=', '·', '×']);
            if ends || (depth <= 0 && !backslash && !trailing_op) {
                if !cur.trim().is_empty() {
                    out.push((start, std::mem::take(&mut cur)));
                }
                cur.clear();
                depth = 0;
            }
        }
    }
    if !cur.trim().is_empty() {
        out.push((start, cur));
    }
    out
}

/// Parse pencil text into a validated `CubicPencil`.
pub fn parse_pencil(text: &str) -> Result<CubicPencil, ParseError> {
    let mut defs: HashMap<String, Poly> = HashMap::new();
    let stmts = statements(text);
    let mut last = None;
    for (k, (line, s)) in stmts.iter().enumerate() {
        let toks = lex(s, *line)?;
        let (name, body) = match definition_head(&toks) {
            Some((name, skip)) => (Some(name), &toks[skip..]),
            None => (None, &toks[..]),
        };
        if name.is_none() && k + 1 != stmts.len() {
            return Err(ParseError::Syntax { line: *line, message: "only the last statement may be an expression; use NAME = ... for definitions".into() });
        }
        if let Some(n) = &name {
            if matches!(n.as_str(), "t" | "X" | "Y" | "Z") {
                return Err(ParseError::Syntax { line: *line, message: format!("cannot redefine {n}") });
            }
        }
        let toks = split_for_power(body.to_vec(), &defs);
        let mut p = Parser { toks, pos: 0, line: *line, defs: &defs };
        let v = p.expr()?;
        if p.pos != p.toks.len() {
            return p.err(format!("unexpected {:?}", p.toks[p.pos]));
        }
        if let Some(n) = name {
            defs.insert(n, v.clone());
        }
        last = Some(v);
    }
    let p = last.ok_or(ParseError::Empty)?;
    let terms: Vec<([u32; 3], QPoly)> = p.0.into_iter().collect();
    Ok(CubicPencil::from_terms(&terms)?)
}

/// `NAME =` or `NAME(t) =` at the start of a statement: the name and tokens to skip.
fn definition_head(toks: &[Tok]) -> Option<(String, usize)> {
    match toks {
        [Tok::Ident(n), Tok::Op('='), ..] => Some((n.clone(), 2)),
        [Tok::Ident(n), Tok::LParen, Tok::Ident(v), Tok::RParen, Tok::Op('='), ..] if v == "t" => Some((n.clone(), 5)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_the_legendre_family() {
        let p = parse_pencil("Y^2 Z - X (X - Z) (X - t Z)").unwrap();
        assert_eq!(p.coeff([1, 1, 1]).is_zero(), true);
        assert_eq!(*p.coeff([2, 0, 1]), QPoly::from_i64(&[1, 1]));
        assert_eq!(*p.coeff([1, 0, 2]), QPoly::from_i64(&[0, -1]));
        assert_eq!(*p.coeff([3, 0, 0]), QPoly::from_i64(&[-1]));
    }

    #[test]
    fn unicode_and_definitions() {
        let text = "A(t) = 2t + 1\nB = t² -\n 3/2\nX³ + 4A(t)X²Z + 512B(t)XZ² − Y²Z";
        let p = parse_pencil(text).unwrap();
        assert_eq!(*p.coeff([2, 0, 1]), QPoly::from_i64(&[4, 8]));
        assert_eq!(*p.coeff([1, 0, 2]), QPoly::from_i64(&[-768, 0, 512]));
        assert_eq!(*p.coeff([0, 2, 1]), QPoly::from_i64(&[-1]));
    }

    #[test]
    fn rejections() {
        assert_eq!(parse_pencil("X³ + Y³ + Z³ − tXYZ"), Err(ParseError::Pencil(PencilError::NoZeroSection)));
        assert_eq!(parse_pencil("X⁴ − Y²Z²"), Err(ParseError::Pencil(PencilError::NotHomogeneousDegree3)));
        assert!(matches!(parse_pencil("X^3 + W"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_pencil("(X^3"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_pencil("X^3 / Y"), Err(ParseError::Syntax { .. })));
        assert_eq!(parse_pencil("# nothing\n"), Err(ParseError::Empty));
    }

    #[test]
    fn powers_and_decimals() {
        let p = parse_pencil("X**3 + 0.5*t^2*X^2*Z - Y^2*Z").unwrap();
        assert_eq!(*p.coeff([2, 0, 1]), QPoly::new(vec![Rational::new(), Rational::new(), Rational::from((1, 2))]));
    }
}
