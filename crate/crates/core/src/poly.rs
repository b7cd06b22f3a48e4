//! Dense univariate polynomials over Q, coefficients stored low degree first.

use std::fmt;

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

#[derive(Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct QPoly {
    coeffs: Vec<Rational>,
}

impl fmt::Debug for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if *c == 0 {
                continue;
            }
            let s = match k {
                0 => format!("{c}"),
                1 => format!("({c})*t"),
                _ => format!("({c})*t^{k}"),
            };
            parts.push(s);
        }
        write!(f, "{}", parts.join(" + "))
    }
}

impl QPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        QPoly::new(c.iter().map(|&x| Rational::from(x)).collect())
    }

    pub fn from_integers(c: &[Integer]) -> Self {
        QPoly::new(c.iter().map(Rational::from).collect())
    }

    pub fn zero() -> Self {
        QPoly { coeffs: vec![] }
    }

    pub fn constant(c: Rational) -> Self {
        QPoly::new(vec![c])
    }

    /// The polynomial `t`.
    pub fn t() -> Self {
        QPoly::from_i64(&[0, 1])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `-1` for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn lead(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn add(&self, o: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        QPoly::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }

    pub fn sub(&self, o: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        QPoly::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }

    pub fn neg(&self) -> QPoly {
        QPoly { coeffs: self.coeffs.iter().map(|c| Rational::from(-c)).collect() }
    }

    pub fn scale(&self, s: &Rational) -> QPoly {
        QPoly::new(self.coeffs.iter().map(|c| Rational::from(c * s)).collect())
    }

    pub fn mul(&self, o: &QPoly) -> QPoly {
        if self.is_zero() || o.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![Rational::new(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += Rational::from(a * b);
            }
        }
        QPoly::new(out)
    }

    pub fn pow(&self, n: u32) -> QPoly {
        (0..n).fold(QPoly::constant(Rational::from(1)), |acc, _| acc.mul(self))
    }

    pub fn derivative(&self) -> QPoly {
        QPoly::new(self.coeffs.iter().enumerate().skip(1).map(|(k, c)| Rational::from(c * k as u32)).collect())
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    /// Quotient and remainder.
    pub fn div_rem(&self, d: &QPoly) -> (QPoly, QPoly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let mut r = self.coeffs.clone();
        let dd = d.coeffs.len() - 1;
        if r.len() <= dd {
            return (QPoly::zero(), self.clone());
        }
        let inv = Rational::from(1) / d.lead();
        let mut q = vec![Rational::new(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = Rational::from(&r[k + dd] * &inv);
            if c != 0 {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    r[k + j] -= Rational::from(&c * dc);
                }
            }
            q[k] = c;
        }
        r.truncate(dd);
        (QPoly::new(q), QPoly::new(r))
    }

    pub fn monic(&self) -> QPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&(Rational::from(1) / self.lead()))
    }

    /// Monic gcd.
    pub fn gcd(&self, o: &QPoly) -> QPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.primitive_rational();
        }
        a.monic()
    }

    /// Scale to keep coefficients small (content removed, sign kept); used inside gcd.
    fn primitive_rational(&self) -> QPoly {
        if self.is_zero() {
            return self.clone();
        }
        let z = self.to_primitive_integer();
        QPoly::from_integers(&z)
    }

    /// Primitive integer multiple with positive leading coefficient.
    pub fn to_primitive_integer(&self) -> Vec<Integer> {
        let mut l = Integer::from(1);
        for c in &self.coeffs {
            l.lcm_mut(c.denom());
        }
        let mut v: Vec<Integer> = self.coeffs.iter().map(|c| Integer::from(c.numer() * Integer::from(&l / c.denom()))).collect();
        let mut g = Integer::new();
        for x in &v {
            g.gcd_mut(x);
        }
        if g != 0 {
            for x in &mut v {
                x.div_exact_mut(&g);
            }
        }
        if v.last().is_some_and(|x| *x < 0) {
            for x in &mut v {
                *x = Integer::from(-&*x);
            }
        }
        v
    }

    pub fn squarefree_part(&self) -> QPoly {
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0.monic()
    }

    /// Yun's algorithm: monic `(factor, multiplicity)` with squarefree coprime factors.
    pub fn squarefree_decomposition(&self) -> Vec<(QPoly, u32)> {
        let mut out = Vec::new();
        if self.degree() < 1 {
            return out;
        }
        let f = self.monic();
        let fp = f.derivative();
        let a0 = f.gcd(&fp);
        let mut b = f.div_rem(&a0).0;
        let mut c = fp.div_rem(&a0).0;
        let mut d = c.sub(&b.derivative());
        let mut i = 1;
        loop {
            let a = b.gcd(&d);
            if a.degree() > 0 {
                out.push((a.clone(), i));
            }
            b = b.div_rem(&a).0;
            if b.degree() < 1 {
                break;
            }
            c = d.div_rem(&a).0;
            d = c.sub(&b.derivative());
            i += 1;
        }
        out
    }

    /// Newton interpolation through `(x_i, y_i)`.
    pub fn interpolate(xs: &[Rational], ys: &[Rational]) -> QPoly {
        let n = xs.len();
        let mut dd: Vec<Rational> = ys.to_vec();
        for j in 1..n {
            for i in (j..n).rev() {
                let num = Rational::from(&dd[i] - &dd[i - 1]);
                let den = Rational::from(&xs[i] - &xs[i - j]);
                dd[i] = num / den;
            }
        }
        let mut p = QPoly::zero();
        for i in (0..n).rev() {
            p = p.mul(&QPoly::new(vec![Rational::from(-&xs[i]), Rational::from(1)])).add(&QPoly::constant(dd[i].clone()));
        }
        p
    }

    /// Multiplicity of `x` as a root.
    pub fn root_multiplicity(&self, x: &Rational) -> u32 {
        let mut p = self.clone();
        let lin = QPoly::new(vec![Rational::from(-x), Rational::from(1)]);
        let mut m = 0;
        while !p.is_zero() && p.eval(x) == 0 {
            p = p.div_rem(&lin).0;
            m += 1;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squarefree_of_legendre_discriminant() {
        // 16 t^2 (t - 1)^2
        let t = QPoly::t();
        let tm1 = QPoly::from_i64(&[-1, 1]);
        let d = t.pow(2).mul(&tm1.pow(2)).scale(&Rational::from(16));
        assert_eq!(d.squarefree_part(), QPoly::from_i64(&[0, -1, 1]));
        let dec = d.squarefree_decomposition();
        assert_eq!(dec.len(), 1);
        assert_eq!(dec[0].1, 2);
    }

    #[test]
    fn yun_separates_multiplicities() {
        let t = QPoly::t();
        let a = QPoly::from_i64(&[1, 1]);
        let p = t.mul(&a.pow(3));
        let dec = p.squarefree_decomposition();
        assert_eq!(dec, vec![(t.clone(), 1), (a.clone(), 3)]);
    }

    #[test]
    fn interpolation_roundtrip() {
        let p = QPoly::from_i64(&[3, -1, 0, 2]);
        let xs: Vec<Rational> = (0..4).map(Rational::from).collect();
        let ys: Vec<Rational> = xs.iter().map(|x| p.eval(x)).collect();
        assert_eq!(QPoly::interpolate(&xs, &ys), p);
    }
}
