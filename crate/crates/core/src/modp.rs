//! Word-size prime fields, dense linear algebra over them, and Chinese remaindering.

use rug::{Integer, Rational};

/// Arithmetic modulo a prime `p < 2^63`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Zp {
    pub p: u64,
}

impl Zp {
    pub fn new(p: u64) -> Self {
        Zp { p }
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p { s - self.p } else { s }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b { a - b } else { a + self.p - b }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 { 0 } else { self.p - a }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1 % self.p;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        (a != 0).then(|| self.pow(a, self.p - 2))
    }

    pub fn from_i64(&self, a: i64) -> u64 {
        let r = a.rem_euclid(self.p as i64);
        r as u64
    }

    pub fn from_integer(&self, a: &Integer) -> u64 {
        let m = Integer::from(self.p);
        let v = <(Integer, Integer)>::from(a.div_rem_euc_ref(&m)).1;
        v.to_u64().expect("residue fits")
    }

    /// `None` when the denominator vanishes mod p.
    pub fn from_rational(&self, q: &Rational) -> Option<u64> {
        let n = self.from_integer(q.numer());
        let d = self.inv(self.from_integer(q.denom()))?;
        Some(self.mul(n, d))
    }

    /// Evaluate a polynomial (low degree first).
    pub fn eval(&self, c: &[u64], x: u64) -> u64 {
        c.iter().rev().fold(0, |acc, &a| self.add(self.mul(acc, x), a))
    }

    /// Bring `a` to reduced row echelon form in place; returns pivot columns.
    pub fn rref(&self, a: &mut [Vec<u64>]) -> Vec<usize> {
        let nrows = a.len();
        let ncols = a.first().map_or(0, |r| r.len());
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..ncols {
            if r == nrows {
                break;
            }
            let Some(pr) = (r..nrows).find(|&i| a[i][c] != 0) else {
                continue;
            };
            a.swap(r, pr);
            let inv = self.inv(a[r][c]).expect("nonzero pivot");
            for x in a[r].iter_mut() {
                *x = self.mul(*x, inv);
            }
            let pivot_row = a[r].clone();
            for (i, row) in a.iter_mut().enumerate() {
                if i == r || row[c] == 0 {
                    continue;
                }
                let f = row[c];
                for (x, &y) in row.iter_mut().zip(&pivot_row).skip(c) {
                    *x = self.sub(*x, self.mul(f, y));
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self, a: &[Vec<u64>]) -> usize {
        let mut b = a.to_vec();
        self.rref(&mut b).len()
    }

    /// One solution of `a x = b` (free variables set to zero), if consistent.
    pub fn solve(&self, a: &[Vec<u64>], b: &[u64]) -> Option<Vec<u64>> {
        let n = a.first().map_or(0, |r| r.len());
        let mut aug: Vec<Vec<u64>> = a.iter().zip(b).map(|(r, &bi)| r.iter().copied().chain([bi]).collect()).collect();
        let piv = self.rref(&mut aug);
        if piv.last() == Some(&n) {
            return None;
        }
        let mut x = vec![0u64; n];
        for (r, &c) in piv.iter().enumerate() {
            x[c] = aug[r][n];
        }
        Some(x)
    }

    /// Basis of the right kernel.
    pub fn nullspace(&self, a: &[Vec<u64>], ncols: usize) -> Vec<Vec<u64>> {
        let mut b = a.to_vec();
        let piv = self.rref(&mut b);
        let mut out = Vec::new();
        for f in (0..ncols).filter(|c| !piv.contains(c)) {
            let mut v = vec![0u64; ncols];
            v[f] = 1;
            for (r, &c) in piv.iter().enumerate() {
                v[c] = self.neg(b[r][f]);
            }
            out.push(v);
        }
        out
    }

    pub fn det(&self, a: &[Vec<u64>]) -> u64 {
        let n = a.len();
        let mut m = a.to_vec();
        let mut det = 1u64;
        for c in 0..n {
            let Some(pr) = (c..n).find(|&i| m[i][c] != 0) else {
                return 0;
            };
            if pr != c {
                m.swap(pr, c);
                det = self.neg(det);
            }
            det = self.mul(det, m[c][c]);
            let inv = self.inv(m[c][c]).expect("nonzero pivot");
            for i in c + 1..n {
                if m[i][c] == 0 {
                    continue;
                }
                let f = self.mul(m[i][c], inv);
                for j in c..n {
                    let v = self.mul(f, m[c][j]);
                    m[i][j] = self.sub(m[i][j], v);
                }
            }
        }
        det
    }

    /// Coefficients of the interpolating polynomial through distinct nodes.
    pub fn interpolate(&self, xs: &[u64], ys: &[u64]) -> Vec<u64> {
        let n = xs.len();
        let mut dd = ys.to_vec();
        for j in 1..n {
            for i in (j..n).rev() {
                let den = self.inv(self.sub(xs[i], xs[i - j])).expect("distinct nodes");
                dd[i] = self.mul(self.sub(dd[i], dd[i - 1]), den);
            }
        }
        let mut p: Vec<u64> = Vec::new();
        for i in (0..n).rev() {
            // p = p * (t - x_i) + dd[i]
            let mut q = vec![0u64; p.len() + 1];
            for (k, &c) in p.iter().enumerate() {
                q[k + 1] = self.add(q[k + 1], c);
                q[k] = self.sub(q[k], self.mul(c, xs[i]));
            }
            q[0] = self.add(q[0], dd[i]);
            p = q;
        }
        while p.last() == Some(&0) {
            p.pop();
        }
        p
    }
}

/// Deterministic primality test for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let f = Zp::new(n);
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &BASES {
        let mut x = f.pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = f.mul(x, x);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Primes just below `2^62`, in decreasing order.
pub fn large_primes() -> impl Iterator<Item = u64> {
    let mut n = (1u64 << 62) - 1;
    std::iter::from_fn(move || {
        while !is_prime_u64(n) {
            n -= 2;
        }
        let p = n;
        n -= 2;
        Some(p)
    })
}

/// Accumulated residues of a vector of rationals across several primes.
#[derive(Debug, Clone)]
pub struct CrtVector {
    pub modulus: Integer,
    pub residues: Vec<Integer>,
}

impl CrtVector {
    pub fn new(len: usize) -> Self {
        CrtVector { modulus: Integer::from(1), residues: vec![Integer::new(); len] }
    }

    pub fn push(&mut self, p: u64, v: &[u64]) {
        assert_eq!(v.len(), self.residues.len());
        let pi = Integer::from(p);
        // x = r + m * ((v - r) * m^{-1} mod p)
        let minv = Integer::from(&self.modulus % &pi).invert(&pi).expect("coprime moduli");
        for (r, &vi) in self.residues.iter_mut().zip(v) {
            let diff = Integer::from(vi) - &*r;
            let k = <(Integer, Integer)>::from((diff * &minv).div_rem_euc_ref(&pi)).1;
            *r += k * &self.modulus;
        }
        self.modulus *= pi;
    }

    /// Rational reconstruction of every entry.
    pub fn reconstruct(&self) -> Option<Vec<Rational>> {
        self.residues.iter().map(|r| rational_reconstruct(r, &self.modulus)).collect()
    }
}

/// Find `n/d` with `n = a d mod m` and `|n|, d <= sqrt(m/2)`.
pub fn rational_reconstruct(a: &Integer, m: &Integer) -> Option<Rational> {
    let bound = Integer::from(m / 2u32).sqrt();
    let (mut r0, mut r1) = (m.clone(), <(Integer, Integer)>::from(a.div_rem_euc_ref(m)).1);
    let (mut s0, mut s1) = (Integer::new(), Integer::from(1));
    while r1 > bound {
        let (q, r2) = <(Integer, Integer)>::from(r0.div_rem_floor_ref(&r1));
        let s2 = Integer::from(&s0 - Integer::from(&q * &s1));
        r0 = std::mem::replace(&mut r1, r2);
        s0 = std::mem::replace(&mut s1, s2);
    }
    if s1 == 0 || s1.clone().abs() > bound {
        return None;
    }
    let q = Rational::from((r1, s1));
    // Check the reconstruction really lifts the residue.
    let back = <(Integer, Integer)>::from((Integer::from(q.numer() - a * Integer::from(q.denom()))).div_rem_euc_ref(m)).1;
    (back == 0).then_some(q)
}
