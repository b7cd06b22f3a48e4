//! Recover the integral symplectic lattice from numeric monodromy matrices.

use log::{debug, warn};
use rug::{Complex, Float, Integer, Rational};

use super::taylor::{mat2_distance, mat2_identity, mat2_inverse, mat2_mul, Mat2C};
use super::ContinuationError;
use crate::sl2z::{kodaira_classify, ordered_product, KodairaType, Mat2Z};
use crate::zlattice::{lattice_hnf, RatMatrix};

/// Largest index searched between the closure of the seed lattice and the true lattice.
pub const MAX_SUPERLATTICE_INDEX: u32 = 144;
const MAX_DENOMINATOR: u64 = 1_000_000;

#[derive(Debug, Clone)]
pub struct IntegralStructure {
    /// Columns: states `(y, y')` at the basepoint of the periods of the symplectic basis
    /// cycles, up to one common complex factor.
    pub basis: Mat2C,
    /// Integer monodromy of each finite loop in that basis.
    pub matrices: Vec<Mat2Z>,
    /// Monodromy around infinity, `(M_r .. M_1)^-1`.
    pub infinity: Mat2Z,
    /// Kodaira types of the finite loops.
    pub types: Vec<KodairaType>,
    /// log2 of the largest deviation between `basis * M * basis^-1` and the numeric matrices.
    pub residual_log2: f64,
    /// Number of lattices that passed every filter (1 when unambiguous).
    pub candidates: usize,
    /// Whether the discriminant orders were used to pick between isogenous lattices.
    pub used_euler_filter: bool,
}

fn cabs(z: &Complex) -> Float {
    Float::with_val(z.prec().0, z.abs_ref())
}

/// Continued-fraction approximation of `x` with denominator at most `max_den` within `tol`.
pub fn recover_rational(x: &Float, max_den: u64, tol: &Float) -> Option<Rational> {
    let prec = x.prec();
    let mut rest = x.to_rational()?;
    let (mut p0, mut q0, mut p1, mut q1) = (Integer::from(0), Integer::from(1), Integer::from(1), Integer::from(0));
    for _ in 0..200 {
        let a = rest.clone().floor().numer().clone();
        let p2 = Integer::from(&a * &p1) + &p0;
        let q2 = Integer::from(&a * &q1) + &q0;
        if q2 > max_den {
            return None;
        }
        let cand = Rational::from((p2.clone(), q2.clone()));
        let err = Float::with_val(prec, x - &cand).abs();
        if err < *tol {
            return Some(cand);
        }
        let frac = rest - Rational::from(a);
        if frac == 0 {
            return None;
        }
        rest = frac.recip();
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    None
}

fn to_rational_matrix(m: &Mat2C, tol: &Float) -> Option<RatMatrix> {
    let mut rows = Vec::new();
    for row in m {
        let mut r = Vec::new();
        for z in row {
            if Float::with_val(z.prec().0, z.imag().abs_ref()) > *tol {
                return None;
            }
            r.push(recover_rational(z.real(), MAX_DENOMINATOR, tol)?);
        }
        rows.push(r);
    }
    Some(RatMatrix::from_rows(rows))
}

fn rat_to_mat2z(m: &RatMatrix) -> Option<Mat2Z> {
    let i = m.to_integer()?;
    Some(Mat2Z::new(i[(0, 0)].to_i64()?, i[(0, 1)].to_i64()?, i[(1, 0)].to_i64()?, i[(1, 1)].to_i64()?))
}

/// Lattice basis (columns) of the span of rational column vectors in Q^2.
fn span_basis(vectors: &[Vec<Rational>]) -> RatMatrix {
    let mut den = Integer::from(1);
    for v in vectors {
        for x in v {
            den.lcm_mut(x.denom());
        }
    }
    let ints: Vec<Vec<Integer>> = vectors.iter().map(|v| v.iter().map(|x| (x * Rational::from(&den)).numer().clone()).collect()).collect();
    let h = lattice_hnf(&ints, 2);
    let d = Rational::from(den);
    RatMatrix::from_fn(2, h.nrows(), |i, j| Rational::from(&h[(j, i)]) / &d)
}

/// Smallest lattice containing the columns of `b` and stable under `gens`.
fn stable_closure(b: &RatMatrix, gens: &[RatMatrix]) -> RatMatrix {
    let mut cur = span_basis(&b.cols_vec());
    loop {
        let mut vs = cur.cols_vec();
        for g in gens {
            vs.extend(g.mul(&cur).cols_vec());
        }
        let next = span_basis(&vs);
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

fn find_parabolic(ms: &[Mat2C], tol: &Float) -> Option<(usize, Complex, Complex)> {
    let prec = ms[0][0][0].prec().0;
    let small = Float::with_val(prec, tol.clone().sqrt());
    for (k, m) in ms.iter().enumerate() {
        let tr = Complex::with_val(prec, &m[0][0] + &m[1][1]);
        for sign in [1i32, -1] {
            if cabs(&Complex::with_val(prec, &tr - 2 * sign)) > *tol {
                continue;
            }
            let shifted = [
                [Complex::with_val(prec, &m[0][0] - sign), m[0][1].clone()],
                [m[1][0].clone(), Complex::with_val(prec, &m[1][1] - sign)],
            ];
            // The column of larger norm spans the fixed line; skip plus or minus the identity.
            let n0 = cabs(&shifted[0][0]) + cabs(&shifted[1][0]);
            let n1 = cabs(&shifted[0][1]) + cabs(&shifted[1][1]);
            if n0 < small && n1 < small {
                continue;
            }
            let col = if n0 >= n1 { 0 } else { 1 };
            return Some((k, shifted[0][col].clone(), shifted[1][col].clone()));
        }
    }
    None
}

/// Find `P` with every `P^-1 T_k P` in `SL_2(Z)`, classifiable, and (when given) with
/// Euler numbers matching `expected_euler`.
pub fn integral_structure(
    numeric: &[Mat2C],
    expected_euler: Option<&[u32]>,
    target_bits: u32,
) -> Result<IntegralStructure, ContinuationError> {
    if numeric.is_empty() {
        return Err(ContinuationError::LatticeRecoveryFailure("no loops".into()));
    }
    let prec = numeric[0][0][0].prec().0;
    let tol = Float::with_val(prec, Float::i_exp(1, -((target_bits / 2) as i32)));
    let mut total = mat2_identity(prec);
    for m in numeric {
        total = mat2_mul(m, &total);
    }
    let mut all: Vec<Mat2C> = numeric.to_vec();
    all.push(mat2_inverse(&total));
    let (k0, v0, v1) = find_parabolic(&all, &tol).ok_or_else(|| ContinuationError::LatticeRecoveryFailure("no parabolic loop".into()))?;
    debug!("seed vanishing direction from loop {k0}");
    // Second generator: image of v under a loop that moves it the most.
    let mut best: Option<(Float, Complex, Complex)> = None;
    let vnorm = cabs(&v0) + cabs(&v1);
    for m in &all {
        let w0 = Complex::with_val(prec, &m[0][0] * &v0) + Complex::with_val(prec, &m[0][1] * &v1) - &v0;
        let w1 = Complex::with_val(prec, &m[1][0] * &v0) + Complex::with_val(prec, &m[1][1] * &v1) - &v1;
        let det = Complex::with_val(prec, &v0 * &w1) - Complex::with_val(prec, &v1 * &w0);
        let wn = cabs(&w0) + cabs(&w1);
        if wn.is_zero() {
            continue;
        }
        let ratio = cabs(&det) / Float::with_val(prec, vnorm.square_ref());
        if best.as_ref().is_none_or(|b| ratio > b.0) {
            best = Some((ratio, w0, w1));
        }
    }
    let (ratio, w0, w1) = best.ok_or(ContinuationError::ProportionalVanishingCycles)?;
    if ratio < tol {
        return Err(ContinuationError::ProportionalVanishingCycles);
    }
    let s: Mat2C = [[v0, w0], [v1, w1]];
    let sinv = mat2_inverse(&s);
    let mut rats = Vec::new();
    for (k, m) in numeric.iter().enumerate() {
        let r = mat2_mul(&sinv, &mat2_mul(m, &s));
        let q = to_rational_matrix(&r, &tol).ok_or_else(|| ContinuationError::LatticeRecoveryFailure(format!("loop {k} is not rational in the seed basis")))?;
        if q.det() != 1 {
            return Err(ContinuationError::LatticeRecoveryFailure(format!("loop {k} has determinant {}", q.det())));
        }
        rats.push(q);
    }
    let mut gens = rats.clone();
    gens.extend(rats.iter().map(|r| r.inverse().expect("det 1")));
    let lmin = stable_closure(&RatMatrix::identity(2), &gens);
    let e1 = [Rational::from(1), Rational::new()];
    let swap = RatMatrix::from_rows(vec![vec![Rational::new(), Rational::from(1)], vec![Rational::from(1), Rational::new()]]);

    let search = |use_euler: bool| -> Vec<(RatMatrix, Vec<Mat2Z>, Vec<KodairaType>, Mat2Z)> {
        let mut found = Vec::new();
        for n in 1..=MAX_SUPERLATTICE_INDEX {
            for a in (1..=n).filter(|a| n % a == 0) {
                let d = n / a;
                for b in 0..d {
                    let h = RatMatrix::from_rows(vec![vec![Rational::from(a), Rational::from(b)], vec![Rational::new(), Rational::from(d)]]);
                    let bp = lmin.mul(&h.inverse().expect("nonsingular"));
                    let bpinv = bp.inverse().expect("nonsingular");
                    let vc = bpinv.mul_vec(&e1);
                    if vc.iter().any(|x| *x.denom() != 1) {
                        continue;
                    }
                    let g = Integer::from(vc[0].numer().gcd_ref(vc[1].numer()));
                    if g != 1 {
                        continue;
                    }
                    for orient in [RatMatrix::identity(2), swap.clone()] {
                        let basis = bp.mul(&orient);
                        let binv = basis.inverse().expect("nonsingular");
                        let Some(ms) = rats.iter().map(|r| rat_to_mat2z(&binv.mul(r).mul(&basis))).collect::<Option<Vec<_>>>() else {
                            break;
                        };
                        let Some(types) = ms.iter().map(|m| kodaira_classify(m).ok().map(|w| w.kodaira)).collect::<Option<Vec<_>>>() else {
                            continue;
                        };
                        let inf = ordered_product(&ms).inverse();
                        let inf_euler = if inf.is_identity() {
                            0
                        } else {
                            match kodaira_classify(&inf) {
                                Ok(w) => w.kodaira.euler_number(),
                                Err(_) => continue,
                            }
                        };
                        let euler: u32 = types.iter().map(|t| t.euler_number()).sum::<u32>() + inf_euler;
                        if euler % 12 != 0 {
                            continue;
                        }
                        if use_euler {
                            if let Some(exp) = expected_euler {
                                if types.iter().zip(exp).any(|(t, e)| t.euler_number() != *e) {
                                    continue;
                                }
                            }
                        }
                        found.push((basis, ms, types, inf));
                    }
                }
            }
        }
        found
    };
    let mut used_euler = expected_euler.is_some();
    let mut found = search(true);
    if found.is_empty() && used_euler {
        warn!("no lattice matches the discriminant orders; retrying without that filter");
        used_euler = false;
        found = search(false);
    }
    let candidates = found.len();
    let (basis, matrices, types, infinity) = found.into_iter().next().ok_or_else(|| ContinuationError::LatticeRecoveryFailure("no integral lattice found".into()))?;
    if candidates > 1 {
        warn!("{candidates} lattices pass all filters; keeping the one of smallest index");
    }
    // P = S * basis.
    let bc: Mat2C = std::array::from_fn(|i| std::array::from_fn(|j| Complex::with_val(prec, &basis[(i, j)])));
    let p = mat2_mul(&s, &bc);
    let pinv = mat2_inverse(&p);
    let mut worst = f64::NEG_INFINITY;
    for (m, t) in matrices.iter().zip(numeric) {
        let mc: Mat2C = std::array::from_fn(|i| std::array::from_fn(|j| Complex::with_val(prec, m.rows()[i][j])));
        let back = mat2_mul(&p, &mat2_mul(&mc, &pinv));
        let d = mat2_distance(&back, t);
        let l = if d.is_zero() { f64::NEG_INFINITY } else { d.get_exp().map_or(f64::NEG_INFINITY, |e| e as f64) };
        worst = worst.max(l);
    }
    Ok(IntegralStructure { basis: p, matrices, infinity, types, residual_log2: worst, candidates, used_euler_filter: used_euler })
}
