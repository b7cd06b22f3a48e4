//! Cubic pencils: discriminant, critical values and the Picard-Fuchs operator of `Res(1/P_t)`.
//!
//! Everything is computed modulo word-size primes at sample points and lifted back by
//! Chinese remaindering plus rational reconstruction, stopping once two consecutive
//! lifts agree and a fresh prime confirms the result.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::modp::{large_primes, CrtVector, Zp};
use crate::poly::QPoly;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PencilError {
    #[error("polynomial is not homogeneous of degree 3 in X, Y, Z")]
    NotHomogeneousDegree3,
    #[error("[0:1:0] is not a smooth point of every fibre; supply a model with the zero section at [0:1:0]")]
    NoZeroSection,
    #[error("discriminant vanishes identically or has no finite root")]
    DegeneratePencil,
    #[error("periods satisfy a first order equation (isotrivial family)")]
    Isotrivial,
    #[error("Jacobian ideal reduction failed at every sample point")]
    SingularReduction,
    #[error("modular reconstruction did not stabilise")]
    ReconstructionFailed,
}

/// Exponent vectors of the monomials of degree `d` in X, Y, Z, ordered
/// `X^d, X^{d-1}Y, X^{d-1}Z, .., Z^d`.
pub fn monomials(d: u32) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for a in (0..=d).rev() {
        for b in (0..=d - a).rev() {
            out.push([a, b, d - a - b]);
        }
    }
    out
}

#[inline]
fn mono_index(e: [u32; 3]) -> usize {
    let d = e[0] + e[1] + e[2];
    let k = (d - e[0]) as usize;
    k * (k + 1) / 2 + e[2] as usize
}

fn n_monomials(d: u32) -> usize {
    ((d + 1) * (d + 2) / 2) as usize
}

/// `P_t = sum_m c_m(t) m` for the ten cubic monomials.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubicPencil {
    coeffs: Vec<QPoly>,
}

impl CubicPencil {
    /// Build from `(exponents, coefficient)` terms; repeated monomials are summed.
    pub fn from_terms(terms: &[([u32; 3], QPoly)]) -> Result<Self, PencilError> {
        let mut coeffs = vec![QPoly::zero(); 10];
        for (e, c) in terms {
            if c.is_zero() {
                continue;
            }
            if e.iter().sum::<u32>() != 3 {
                return Err(PencilError::NotHomogeneousDegree3);
            }
            let i = mono_index(*e);
            coeffs[i] = coeffs[i].add(c);
        }
        let p = CubicPencil { coeffs };
        if p.coeffs.iter().all(QPoly::is_zero) {
            return Err(PencilError::NotHomogeneousDegree3);
        }
        // P(0,1,0) = 0 and the point is smooth: dP/dX or dP/dZ nonzero there.
        if !p.coeff([0, 3, 0]).is_zero() || (p.coeff([1, 2, 0]).is_zero() && p.coeff([0, 2, 1]).is_zero()) {
            return Err(PencilError::NoZeroSection);
        }
        Ok(p)
    }

    pub fn coeff(&self, e: [u32; 3]) -> &QPoly {
        &self.coeffs[mono_index(e)]
    }

    /// Largest degree in `t` among the coefficients.
    pub fn t_degree(&self) -> usize {
        self.coeffs.iter().map(|c| c.degree().max(0) as usize).max().unwrap_or(0)
    }

    /// Multiply every coefficient by a nonzero rational.
    pub fn scaled(&self, s: &Rational) -> CubicPencil {
        CubicPencil { coeffs: self.coeffs.iter().map(|c| c.scale(s)).collect() }
    }

    fn reduce(&self, f: &Zp) -> Option<ModPencil> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.coeffs().iter().map(|q| f.from_rational(q)).collect::<Option<Vec<u64>>>())
            .collect::<Option<Vec<_>>>()?;
        Some(ModPencil { f: *f, coeffs })
    }

    /// The discriminant in `t`: it vanishes exactly where the fibre is singular.
    pub fn discriminant(&self) -> Result<QPoly, PencilError> {
        let bound = 12 * self.t_degree();
        let nodes: Vec<u64> = (0..=bound as u64).collect();
        let v = reconstruct_stable(bound + 1, |f| {
            let mp = self.reduce(&f)?;
            let ys: Vec<u64> = nodes.iter().map(|&x| mp.discriminant_at(x)).collect();
            let mut c = f.interpolate(&nodes, &ys);
            c.resize(bound + 1, 0);
            Some(c)
        })
        .ok_or(PencilError::ReconstructionFailed)?;
        let d = QPoly::new(v);
        if d.is_zero() {
            return Err(PencilError::DegeneratePencil);
        }
        Ok(d)
    }

    /// Squarefree polynomial whose roots are the finite critical values.
    pub fn critical_value_polynomial(&self) -> Result<QPoly, PencilError> {
        let d = self.discriminant()?;
        if d.degree() < 1 {
            return Err(PencilError::DegeneratePencil);
        }
        Ok(QPoly::from_integers(&d.squarefree_part().to_primitive_integer()))
    }

    /// Minimal operator `a y'' + b y' + c y = 0` satisfied by the periods of `Res(1/P_t)`.
    pub fn picard_fuchs(&self) -> Result<DiffOperator, PencilError> {
        let mut primes = large_primes();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        // Find the degree bound with the first usable prime.
        let (deg, norm_index) = loop {
            let p = primes.next().expect("infinite");
            let f = Zp::new(p);
            let Some(mp) = self.reduce(&f) else { continue };
            let mut samples = SampleCache::default();
            // Isotriviality: omega' is a multiple of omega at every point.
            samples.fill(&mp, &mut rng, 12)?;
            if samples.rows.iter().all(|s| s.w1[1] == 0) {
                return Err(PencilError::Isotrivial);
            }
            let mut found = None;
            for d in 0..=MAX_OPERATOR_DEGREE {
                let ns = samples.nullspace(&mp, &mut rng, d)?;
                if ns.len() == 1 {
                    let v = &ns[0];
                    // Normalise on the leading coefficient of a.
                    let idx = (0..=d).rev().find(|&k| v[k] != 0).ok_or(PencilError::ReconstructionFailed)?;
                    found = Some((d, idx));
                    break;
                }
                if ns.len() > 1 {
                    return Err(PencilError::ReconstructionFailed);
                }
            }
            break found.ok_or(PencilError::ReconstructionFailed)?;
        };
        let len = 3 * (deg + 1);
        let v = reconstruct_stable_from(primes, len, |f| {
            let mp = self.reduce(&f)?;
            let mut samples = SampleCache::default();
            let ns = samples.nullspace(&mp, &mut rng, deg).ok()?;
            if ns.len() != 1 || ns[0][norm_index] == 0 {
                return None;
            }
            let s = f.inv(ns[0][norm_index])?;
            Some(ns[0].iter().map(|&x| f.mul(x, s)).collect())
        })
        .ok_or(PencilError::ReconstructionFailed)?;
        let split = |k: usize| QPoly::new(v[k * (deg + 1)..(k + 1) * (deg + 1)].to_vec());
        Ok(DiffOperator::from_rational(&[split(2), split(1), split(0)]))
    }
}

const MAX_OPERATOR_DEGREE: usize = 400;

/// Pencil with coefficients reduced mod p.
struct ModPencil {
    f: Zp,
    coeffs: Vec<Vec<u64>>,
}

impl ModPencil {
    /// `(P, dP/dt, d^2P/dt^2)` at `t0` as cubic forms.
    fn at(&self, t0: u64) -> [Vec<u64>; 3] {
        let f = &self.f;
        let mut out = [vec![0; 10], vec![0; 10], vec![0; 10]];
        for (m, c) in self.coeffs.iter().enumerate() {
            // Horner on value, first and second derivative together.
            let (mut v, mut d1, mut d2) = (0u64, 0u64, 0u64);
            for &a in c.iter().rev() {
                d2 = f.add(f.mul(d2, t0), d1);
                d1 = f.add(f.mul(d1, t0), v);
                v = f.add(f.mul(v, t0), a);
            }
            out[0][m] = v;
            out[1][m] = d1;
            out[2][m] = f.add(d2, d2);
        }
        out
    }

    fn discriminant_at(&self, t0: u64) -> u64 {
        let [p, _, _] = self.at(t0);
        let f = &self.f;
        let grad: Vec<Vec<u64>> = (0..3).map(|i| deriv(f, &p, 3, i)).collect();
        let hess: Vec<Vec<Vec<u64>>> = grad.iter().map(|g| (0..3).map(|j| deriv(f, g, 2, j)).collect()).collect();
        let mut h = vec![0u64; 10];
        for (perm, sign) in [([0, 1, 2], false), ([1, 2, 0], false), ([2, 0, 1], false), ([0, 2, 1], true), ([2, 1, 0], true), ([1, 0, 2], true)] {
            let term = mul(f, &mul(f, &hess[0][perm[0]], 1, &hess[1][perm[1]], 1), 2, &hess[2][perm[2]], 1);
            for (x, y) in h.iter_mut().zip(&term) {
                *x = if sign { f.sub(*x, *y) } else { f.add(*x, *y) };
            }
        }
        let mut rows = grad;
        rows.extend((0..3).map(|i| deriv(f, &h, 3, i)));
        f.det(&rows)
    }
}

fn deriv(f: &Zp, a: &[u64], d: u32, var: usize) -> Vec<u64> {
    let mut out = vec![0u64; n_monomials(d - 1)];
    for (e, &c) in monomials(d).iter().zip(a) {
        if e[var] == 0 || c == 0 {
            continue;
        }
        let mut e2 = *e;
        e2[var] -= 1;
        out[mono_index(e2)] = f.add(out[mono_index(e2)], f.mul(c, e[var] as u64));
    }
    out
}

fn mul(f: &Zp, a: &[u64], da: u32, b: &[u64], db: u32) -> Vec<u64> {
    let mut out = vec![0u64; n_monomials(da + db)];
    let (ma, mb) = (monomials(da), monomials(db));
    for (ea, &x) in ma.iter().zip(a) {
        if x == 0 {
            continue;
        }
        for (eb, &y) in mb.iter().zip(b) {
            if y == 0 {
                continue;
            }
            let k = mono_index([ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]]);
            out[k] = f.add(out[k], f.mul(x, y));
        }
    }
    out
}

/// Jacobian-ideal reduction at one smooth fibre.
struct Reducer {
    f: Zp,
    /// Columns `m * dP/dx_i` for linear `m`, then the complement monomial `Q`.
    level1: Vec<Vec<u64>>,
    /// Columns `m * dP/dx_i` for quartic `m`.
    level2: Vec<Vec<u64>>,
}

impl Reducer {
    fn new(f: Zp, p: &[u64]) -> Option<Self> {
        let grad: Vec<Vec<u64>> = (0..3).map(|i| deriv(&f, p, 3, i)).collect();
        let columns = |deg: u32| -> Vec<Vec<u64>> {
            let ms = monomials(deg);
            let mut cols = Vec::new();
            for g in &grad {
                for m in &ms {
                    let mut unit = vec![0u64; ms.len()];
                    unit[mono_index(*m)] = 1;
                    cols.push(mul(&f, &unit, deg, g, 2));
                }
            }
            cols
        };
        let mut c1 = columns(1);
        let base_rank = f.rank(&transpose(&c1, 10));
        if base_rank != 9 {
            return None;
        }
        let q = (0..10).find(|&q| {
            let mut e = vec![0u64; 10];
            e[q] = 1;
            let mut c = c1.clone();
            c.push(e);
            f.rank(&transpose(&c, 10)) == 10
        })?;
        let mut e = vec![0u64; 10];
        e[q] = 1;
        c1.push(e);
        let level1 = transpose(&c1, 10);
        let level2 = transpose(&columns(4), 28);
        if f.rank(&level2) != 28 {
            return None;
        }
        Some(Reducer { f, level1, level2 })
    }

    /// `A/P^2 = c/P + lambda Q/P^2` in cohomology, for cubic `A`.
    fn reduce1(&self, a: &[u64]) -> Option<[u64; 2]> {
        let f = &self.f;
        let x = f.solve(&self.level1, a)?;
        // B_i = sum_m x_{i,m} m with m linear; div B = sum_i coefficient of x_i in B_i.
        let mut div = 0;
        for i in 0..3 {
            let mut e = [0u32; 3];
            e[i] = 1;
            div = f.add(div, x[3 * i + mono_index(e)]);
        }
        Some([div, x[9]])
    }

    /// `A/P^3 = C/P^2` for sextic `A`; returns cubic `C`.
    fn reduce2(&self, a: &[u64]) -> Option<Vec<u64>> {
        let f = &self.f;
        let x = f.solve(&self.level2, a)?;
        let mut div = vec![0u64; 10];
        for i in 0..3 {
            let b = &x[15 * i..15 * (i + 1)];
            for (acc, v) in div.iter_mut().zip(deriv(f, b, 4, i)) {
                *acc = f.add(*acc, v);
            }
        }
        let half = f.inv(2)?;
        Some(div.iter().map(|&v| f.mul(v, half)).collect())
    }
}

fn transpose(cols: &[Vec<u64>], nrows: usize) -> Vec<Vec<u64>> {
    (0..nrows).map(|r| cols.iter().map(|c| c[r]).collect()).collect()
}

/// Reduced classes of `omega'` and `omega''` at a sample point, in the basis `{1/P, Q/P^2}`.
struct Sample {
    t0: u64,
    w1: [u64; 2],
    w2: [u64; 2],
}

#[derive(Default)]
struct SampleCache {
    rows: Vec<Sample>,
}

impl SampleCache {
    fn fill(&mut self, mp: &ModPencil, rng: &mut ChaCha8Rng, count: usize) -> Result<(), PencilError> {
        let f = &mp.f;
        let mut failures = 0;
        while self.rows.len() < count {
            let t0 = rng.gen_range(1..f.p);
            match sample(mp, t0) {
                Some(s) => self.rows.push(s),
                None => {
                    failures += 1;
                    if failures > 20 + count {
                        return Err(PencilError::SingularReduction);
                    }
                }
            }
        }
        Ok(())
    }

    /// Kernel of the relation system `a w2 + b w1 + c w0 = 0` with `deg a, b, c <= d`.
    fn nullspace(&mut self, mp: &ModPencil, rng: &mut ChaCha8Rng, d: usize) -> Result<Vec<Vec<u64>>, PencilError> {
        let f = &mp.f;
        let n = 3 * (d + 1);
        self.fill(mp, rng, n / 2 + 4)?;
        let mut rows = Vec::new();
        for s in &self.rows {
            let mut pw = vec![1u64; d + 1];
            for k in 1..=d {
                pw[k] = f.mul(pw[k - 1], s.t0);
            }
            let mut r0 = vec![0u64; n];
            let mut r1 = vec![0u64; n];
            for k in 0..=d {
                r0[k] = f.mul(pw[k], s.w2[0]);
                r0[d + 1 + k] = f.mul(pw[k], s.w1[0]);
                r0[2 * (d + 1) + k] = pw[k];
                r1[k] = f.mul(pw[k], s.w2[1]);
                r1[d + 1 + k] = f.mul(pw[k], s.w1[1]);
            }
            rows.push(r0);
            rows.push(r1);
        }
        Ok(f.nullspace(&rows, n))
    }
}

fn sample(mp: &ModPencil, t0: u64) -> Option<Sample> {
    let f = &mp.f;
    let [p, pt, ptt] = mp.at(t0);
    let red = Reducer::new(*f, &p)?;
    // omega = 1/P, omega' = -P_t/P^2, omega'' = 2 P_t^2/P^3 - P_tt/P^2.
    let minus_pt: Vec<u64> = pt.iter().map(|&x| f.neg(x)).collect();
    let w1 = red.reduce1(&minus_pt)?;
    let sq = mul(f, &pt, 3, &pt, 3);
    let two_sq: Vec<u64> = sq.iter().map(|&x| f.add(x, x)).collect();
    let c = red.reduce2(&two_sq)?;
    let a2: Vec<u64> = c.iter().zip(&ptt).map(|(&x, &y)| f.sub(x, y)).collect();
    let w2 = red.reduce1(&a2)?;
    Some(Sample { t0, w1, w2 })
}

fn reconstruct_stable(len: usize, compute: impl FnMut(Zp) -> Option<Vec<u64>>) -> Option<Vec<Rational>> {
    reconstruct_stable_from(large_primes(), len, compute)
}

/// Lift modular images until two successive reconstructions agree and a fresh prime confirms.
fn reconstruct_stable_from(
    primes: impl Iterator<Item = u64>,
    len: usize,
    mut compute: impl FnMut(Zp) -> Option<Vec<u64>>,
) -> Option<Vec<Rational>> {
    const MAX_PRIMES: usize = 400;
    let mut acc = CrtVector::new(len);
    let mut previous: Option<Vec<Rational>> = None;
    let mut used = 0;
    for p in primes {
        if used >= MAX_PRIMES {
            return None;
        }
        let f = Zp::new(p);
        let Some(v) = compute(f) else { continue };
        used += 1;
        if let Some(prev) = &previous {
            // Confirm the previous lift against the new image before merging it.
            let agrees = prev.iter().zip(&v).all(|(q, &r)| f.from_rational(q) == Some(r));
            if agrees {
                return previous;
            }
        }
        acc.push(p, &v);
        previous = acc.reconstruct();
    }
    None
}

/// `sum_k a_k(t) d^k/dt^k` with primitive integer coefficients and positive leading
/// coefficient of the top-order term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffOperator {
    /// `coeffs[k]` multiplies the k-th derivative; low degree first.
    #[serde(with = "crate::serde_util::int_poly_vec")]
    pub coeffs: Vec<Vec<Integer>>,
}

impl DiffOperator {
    /// Clear denominators and content jointly; `ops[k]` multiplies the k-th derivative.
    pub fn from_rational(ops: &[QPoly]) -> Self {
        let mut l = Integer::from(1);
        for c in ops.iter().flat_map(|p| p.coeffs()) {
            l.lcm_mut(c.denom());
        }
        let mut coeffs: Vec<Vec<Integer>> = ops
            .iter()
            .map(|p| p.coeffs().iter().map(|c| Integer::from(c.numer() * Integer::from(&l / c.denom()))).collect())
            .collect();
        let mut g = Integer::new();
        for x in coeffs.iter().flatten() {
            g.gcd_mut(x);
        }
        let top_negative = coeffs.iter().rev().find(|c| !c.is_empty()).and_then(|c| c.last()).is_some_and(|x| *x < 0);
        if top_negative {
            g = -g;
        }
        if g != 0 {
            for x in coeffs.iter_mut().flatten() {
                x.div_exact_mut(&g);
            }
        }
        while coeffs.last().is_some_and(|c| c.is_empty()) {
            coeffs.pop();
        }
        DiffOperator { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coefficient(&self, k: usize) -> QPoly {
        self.coeffs.get(k).map(|c| QPoly::from_integers(c)).unwrap_or_default()
    }

    /// Leading coefficient `a(t)`.
    pub fn leading(&self) -> QPoly {
        self.coefficient(self.order())
    }

    /// Largest degree among the coefficients.
    pub fn degree(&self) -> usize {
        self.coeffs.iter().map(|c| c.len().saturating_sub(1)).max().unwrap_or(0)
    }

    /// Apply to a truncated power series in `t` (low order first), keeping `n` terms.
    pub fn apply_series(&self, y: &[Rational], n: usize) -> Vec<Rational> {
        let mut out = vec![Rational::new(); n];
        let mut dy: Vec<Rational> = y.to_vec();
        for c in &self.coeffs {
            for (i, ci) in c.iter().enumerate() {
                for (j, yj) in dy.iter().enumerate() {
                    if i + j < n {
                        out[i + j] += Rational::from(ci * yj);
                    }
                }
            }
            dy = QPoly::new(dy).derivative().coeffs().to_vec();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn legendre() -> CubicPencil {
        // Y^2 Z - X (X - Z)(X - t Z) = Y^2Z - X^3 + (1+t) X^2 Z - t X Z^2
        CubicPencil::from_terms(&[
            ([0, 2, 1], QPoly::from_i64(&[1])),
            ([3, 0, 0], QPoly::from_i64(&[-1])),
            ([2, 0, 1], QPoly::from_i64(&[1, 1])),
            ([1, 0, 2], QPoly::from_i64(&[0, -1])),
        ])
        .unwrap()
    }

    #[test]
    fn monomial_indexing() {
        for d in 0..6 {
            for (i, e) in monomials(d).iter().enumerate() {
                assert_eq!(mono_index(*e), i);
            }
        }
    }

    #[test]
    fn legendre_critical_values() {
        let p = legendre();
        let d = p.discriminant().unwrap();
        assert_eq!(d.degree(), 4);
        assert_eq!(p.critical_value_polynomial().unwrap(), QPoly::from_i64(&[0, -1, 1]));
    }

    #[test]
    fn legendre_operator_is_hypergeometric() {
        let op = legendre().picard_fuchs().unwrap();
        let expect = vec![
            vec![Integer::from(1)],
            vec![Integer::from(-4), Integer::from(8)],
            vec![Integer::from(0), Integer::from(-4), Integer::from(4)],
        ];
        assert_eq!(op.coeffs, expect);
    }

    #[test]
    fn fermat_pencil_has_no_zero_section() {
        let r = CubicPencil::from_terms(&[
            ([3, 0, 0], QPoly::from_i64(&[1])),
            ([0, 3, 0], QPoly::from_i64(&[1])),
            ([0, 0, 3], QPoly::from_i64(&[1])),
            ([1, 1, 1], QPoly::from_i64(&[0, -1])),
        ]);
        assert_eq!(r.unwrap_err(), PencilError::NoZeroSection);
    }

    #[test]
    fn j_zero_family_is_isotrivial() {
        // Y^2 Z - X^3 - t Z^3
        let p = CubicPencil::from_terms(&[
            ([0, 2, 1], QPoly::from_i64(&[1])),
            ([3, 0, 0], QPoly::from_i64(&[-1])),
            ([0, 0, 3], QPoly::from_i64(&[0, -1])),
        ])
        .unwrap();
        assert_eq!(p.picard_fuchs().unwrap_err(), PencilError::Isotrivial);
    }
}
