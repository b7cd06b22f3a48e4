//! Neron-Severi lattice as the integer kernel of the holomorphic period map (found by LLL,
//! hence heuristic), the trivial lattice, and the Mordell-Weil group and lattice.

use rug::{Complex, Float, Integer, Rational};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::homology::SurfaceHomology;
use crate::periods::PeriodMatrix;
use crate::zlattice::{lattice_hnf, lll_reduce_rows, quotient, saturate, signature, GramLattice, IntMatrix, LatticeError, RatMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NeronSeveriError {
    #[error("the trivial lattice is not contained in the Neron-Severi lattice")]
    TrivNotInNS,
    #[error("the Mordell-Weil height pairing is not positive definite (signature {0:?})")]
    IndefiniteMWGram((usize, usize)),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Thresholds for accepting an LLL vector as a relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// LLL parameter, in `(1/4, 1)`.
    pub delta: f64,
    /// Accept residuals below `10^-(digits * residual_fraction)`.
    pub residual_fraction: f64,
    /// Accept coefficient norms below `10^(digits * norm_fraction)`.
    pub norm_fraction: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams { delta: 0.99, residual_fraction: 0.5, norm_fraction: 0.25 }
    }
}

/// The three numbers qualifying a heuristic kernel: either the lattice is right, or it misses
/// generators of squared norm above `B`, or there is a fake relation of norm at most `N`
/// with residual at most `eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reliability {
    /// log10 of `B`; `None` when nothing was left out (every class is a relation).
    pub search_bound_log10: Option<f64>,
    /// Largest Euclidean norm of an accepted relation.
    pub max_norm: f64,
    /// log10 of the largest residual of an accepted relation; `None` if all are exact.
    pub max_residual_log10: Option<f64>,
    /// True when no numerics were involved (no holomorphic forms).
    pub exact: bool,
}

impl Reliability {
    /// `N` as an integer bound.
    pub fn norm_bound(&self) -> u64 {
        self.max_norm.ceil() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NSReport {
    /// Saturated basis (columns) in homology coordinates.
    pub ns_basis: IntMatrix,
    pub rho: usize,
    pub reliability: Reliability,
    pub digits: u32,
}

fn residual(periods: &[Vec<Complex>], alpha: &[Integer], prec: u32) -> Float {
    let mut total = Float::new(prec);
    for row in periods {
        let mut s = Complex::new(prec);
        for (p, a) in row.iter().zip(alpha) {
            if *a != 0 {
                s += Complex::with_val(prec, p * a);
            }
        }
        total += Float::with_val(prec, s.norm_ref());
    }
    total.sqrt()
}

fn norm(alpha: &[Integer]) -> f64 {
    alpha.iter().map(|a| a.to_f64().powi(2)).sum::<f64>().sqrt()
}

fn log10_of(x: &Float) -> Option<f64> {
    if x.is_zero() {
        return None;
    }
    Some(Float::with_val(64, x.log10_ref()).to_f64())
}

/// Squared Gram-Schmidt norms of `rows` in order.
fn gram_schmidt_norms(rows: &[Vec<Integer>], prec: u32) -> Vec<Float> {
    let mut ortho: Vec<Vec<Float>> = Vec::new();
    let mut out = Vec::new();
    for r in rows {
        let mut v: Vec<Float> = r.iter().map(|x| Float::with_val(prec, x)).collect();
        for (u, un) in ortho.iter().zip(&out) {
            let dot = v.iter().zip(u).fold(Float::new(prec), |acc, (a, b)| acc + Float::with_val(prec, a * b));
            let mu = dot / un;
            for (a, b) in v.iter_mut().zip(u) {
                *a -= Float::with_val(prec, &mu * b);
            }
        }
        let n2 = v.iter().fold(Float::new(prec), |acc, a| acc + Float::with_val(prec, a.square_ref()));
        ortho.push(v);
        out.push(n2);
    }
    out
}

/// Integer relations among the columns of the period matrix, saturated.
pub fn find_integer_kernel(periods: &PeriodMatrix, n: usize, digits: u32, params: &KernelParams) -> NSReport {
    if periods.rows() == 0 {
        return NSReport {
            ns_basis: IntMatrix::identity(n),
            rho: n,
            reliability: Reliability { search_bound_log10: None, max_norm: 0.0, max_residual_log10: None, exact: true },
            digits,
        };
    }
    let prec = periods.values[0][0].prec().0;
    // Normalise each form so its largest period has modulus one; the kernel does not change.
    let normalised: Vec<Vec<Complex>> = periods
        .values
        .iter()
        .map(|row| {
            let m = row.iter().map(|z| Float::with_val(prec, z.abs_ref())).fold(Float::new(prec), |a, b| a.max(&b));
            if m.is_zero() {
                row.clone()
            } else {
                row.iter().map(|z| Complex::with_val(prec, z / &m)).collect()
            }
        })
        .collect();
    let scale = Float::with_val(prec, Float::u_pow_u(10, digits));
    let round = |x: &Float| Float::with_val(prec, x * &scale).round().to_integer().expect("finite period");
    let rows: Vec<Vec<Integer>> = (0..n)
        .map(|i| {
            let mut r: Vec<Integer> = (0..n).map(|j| Integer::from(u32::from(i == j))).collect();
            for row in &normalised {
                r.push(round(row[i].real()));
                r.push(round(row[i].imag()));
            }
            r
        })
        .collect();
    let delta_den = 1_000_000u32;
    let delta_num = (params.delta * delta_den as f64).round() as u32;
    let (reduced, _) = lll_reduce_rows(&rows, (delta_num, delta_den));
    let max_res = Float::with_val(prec, Float::i_exp(1, 0)) / Float::with_val(prec, Float::u_pow_u(10, (digits as f64 * params.residual_fraction) as u32));
    let max_norm = 10f64.powf(digits as f64 * params.norm_fraction);
    let mut accepted: Vec<Vec<Integer>> = Vec::new();
    let mut rejected: Vec<Vec<Integer>> = Vec::new();
    for v in reduced {
        let alpha = &v[..n];
        if norm(alpha) < max_norm && residual(&normalised, alpha, prec) < max_res {
            accepted.push(alpha.to_vec());
        } else {
            rejected.push(v);
        }
    }
    let mut worst_res = Float::new(prec);
    let mut worst_norm = 0.0f64;
    let ns_basis = if accepted.is_empty() {
        IntMatrix::zeros(n, 0)
    } else {
        for a in &accepted {
            worst_norm = worst_norm.max(norm(a));
            worst_res = worst_res.max(&residual(&normalised, a, prec));
        }
        let gens = IntMatrix::from_cols(n, &accepted);
        let sat = saturate(&gens);
        for j in 0..sat.ncols() {
            worst_res = worst_res.max(&residual(&normalised, &sat.col(j), prec));
        }
        sat
    };
    // A relation of norm^2 <= B outside the accepted span would give a lattice vector shorter
    // than the smallest remaining Gram-Schmidt vector; its tail adds at most a factor 1 + n s / 2.
    let search_bound_log10 = if rejected.is_empty() {
        None
    } else {
        let mut order: Vec<Vec<Integer>> = Vec::new();
        for a in &accepted {
            let mut full = a.clone();
            full.extend(rows_tail(&rows, a));
            order.push(full);
        }
        let k = order.len();
        order.extend(rejected.iter().cloned());
        let gs = gram_schmidt_norms(&order, prec.max(64) * 2);
        let min = gs[k..].iter().fold(None::<Float>, |m, x| Some(m.map_or(x.clone(), |m| m.min(x))));
        let slack = 1.0 + (n * periods.rows()) as f64 / 2.0;
        min.and_then(|m| log10_of(&m)).map(|l| l - slack.log10())
    };
    NSReport {
        rho: ns_basis.ncols(),
        ns_basis,
        reliability: Reliability { search_bound_log10, max_norm: worst_norm, max_residual_log10: log10_of(&worst_res), exact: false },
        digits,
    }
}

/// The period part of the lattice vector with coefficients `alpha`.
fn rows_tail(rows: &[Vec<Integer>], alpha: &[Integer]) -> Vec<Integer> {
    let n = alpha.len();
    let width = rows[0].len() - n;
    (0..width)
        .map(|c| alpha.iter().zip(rows).fold(Integer::new(), |acc, (a, r)| acc + Integer::from(a * &r[n + c])))
        .collect()
}

/// Same lattice (as subgroups of `Z^n`)?
pub fn same_lattice(a: &IntMatrix, b: &IntMatrix) -> bool {
    let n = a.nrows();
    lattice_hnf(&a.cols_vec(), n) == lattice_hnf(&b.cols_vec(), n)
}

/// Basis (columns) of the span of the zero section, the fibre and all fibre components.
/// Not saturated: the saturation defect inside NS is the Mordell-Weil torsion.
pub fn trivial_lattice(h: &SurfaceHomology) -> IntMatrix {
    let mut cols = vec![h.section_class(), h.fibre_class()];
    cols.extend(h.theta_classes());
    lattice_hnf(&cols, h.rank()).transpose()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MWReport {
    pub rank: usize,
    /// Invariant factors of the torsion subgroup.
    pub torsion: Vec<Integer>,
    /// Height pairing on the free generators: the negated pairing of their projections to
    /// the orthogonal complement of the trivial lattice.
    pub gram: RatMatrix,
    /// Free generators followed by torsion generators, in Neron-Severi coordinates.
    pub generators: Vec<Vec<Integer>>,
}

/// Mordell-Weil group `NS / Triv` and its lattice.
pub fn mordell_weil(ns: &IntMatrix, triv: &IntMatrix, lattice: &GramLattice) -> Result<MWReport, NeronSeveriError> {
    let q = quotient(ns, triv).map_err(|e| match e {
        LatticeError::NotSubgroup => NeronSeveriError::TrivNotInNS,
        e => NeronSeveriError::Lattice(e),
    })?;
    let g = &lattice.gram;
    let t = triv.to_rational();
    let gt = t.transpose().mul(g).mul(&t);
    let gt_inv = gt.inverse().ok_or(LatticeError::Degenerate)?;
    // x -> x - T G_T^-1 T^t G x
    let proj = RatMatrix::identity(g.nrows()).sub(&t.mul(&gt_inv).mul(&t.transpose()).mul(g));
    let reps = &q.free_representatives;
    let p: Vec<Vec<Rational>> = reps.iter().map(|x| proj.mul_vec(&x.iter().map(Rational::from).collect::<Vec<_>>())).collect();
    let r = reps.len();
    let gram = RatMatrix::from_fn(r, r, |i, j| -g.bilinear(&p[i], &p[j]));
    let sig = signature(&gram);
    if sig != (r, 0) {
        return Err(NeronSeveriError::IndefiniteMWGram(sig));
    }
    let generators = reps
        .iter()
        .chain(&q.torsion_representatives)
        .map(|x| q.lift_coordinates(x).expect("representative lies in NS"))
        .collect();
    Ok(MWReport { rank: q.group.free_rank, torsion: q.group.torsion.clone(), gram, generators })
}

/// Rank of MW computed from the quotient agrees with `rho - 2 - sum(m_v - 1)`.
pub fn shioda_tate_check(rho: usize, component_correction: usize, mw_rank: usize) -> bool {
    rho as i64 - 2 - component_correction as i64 == mw_rank as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::homology_from_monodromy;
    use crate::morsification::{morsify, MonodromyRep};
    use crate::sl2z::{Mat2Z, U, V};

    #[test]
    fn legendre_mordell_weil() {
        let rep = MonodromyRep::from_matrices(&[Mat2Z::new(1, 2, 0, 1), Mat2Z::new(1, 0, -2, 1), Mat2Z::new(-3, -2, 2, 1)]);
        let h = homology_from_monodromy(&morsify(&rep).unwrap()).unwrap();
        let ns = find_integer_kernel(&PeriodMatrix { values: vec![], error_log2: vec![] }, h.rank(), 50, &KernelParams::default());
        assert_eq!(ns.rho, 10);
        let triv = trivial_lattice(&h);
        assert_eq!(triv.ncols(), 2 + 1 + 1 + 6);
        let mw = mordell_weil(&ns.ns_basis, &triv, &h.lattice).unwrap();
        assert_eq!(mw.rank, 0);
        assert_eq!(mw.torsion, vec![Integer::from(2), Integer::from(2)]);
        assert!(shioda_tate_check(ns.rho, h.component_correction(), mw.rank));
    }

    #[test]
    fn generic_rational_surface_has_e8() {
        let mats: Vec<Mat2Z> = (0..6).flat_map(|_| [U, V]).collect();
        let h = homology_from_monodromy(&morsify(&MonodromyRep::from_matrices(&mats)).unwrap()).unwrap();
        let triv = trivial_lattice(&h);
        assert_eq!(triv.ncols(), 2);
        let mw = mordell_weil(&IntMatrix::identity(10), &triv, &h.lattice).unwrap();
        assert_eq!(mw.rank, 8);
        assert!(mw.torsion.is_empty());
        // E8 with the height pairing: determinant 1.
        assert_eq!(mw.gram.det(), 1);
        assert!(shioda_tate_check(10, 0, 8));
    }

    #[test]
    fn recovers_planted_relations() {
        // Periods of a rank-4 lattice with a two-dimensional kernel spanned by (1,1,0,-1), (0,2,-1,1).
        let prec = 400;
        let x = Complex::with_val(prec, (Float::with_val(prec, 2).sqrt(), Float::with_val(prec, 3).sqrt()));
        let y = Complex::with_val(prec, (Float::with_val(prec, 5).sqrt(), Float::with_val(prec, 7).ln()));
        // pi_3 = 2 pi_1 - ... solve: pick pi_0 = x, pi_1 = y, then pi_3 = pi_0 + pi_1, pi_2 = 2 pi_1 + pi_3.
        let p3 = Complex::with_val(prec, &x + &y);
        let p2 = Complex::with_val(prec, &y * 2u32) + &p3;
        let pm = PeriodMatrix { values: vec![vec![x, y, p2, p3]], error_log2: vec![vec![-300.0; 4]] };
        let ns = find_integer_kernel(&pm, 4, 60, &KernelParams::default());
        assert_eq!(ns.rho, 2);
        let expect = IntMatrix::from_i64(&[vec![1, 0], vec![1, 2], vec![0, -1], vec![-1, 1]]);
        assert!(same_lattice(&ns.ns_basis, &expect));
        assert!(ns.reliability.max_residual_log10.is_none_or(|e| e < -30.0));
        assert!(ns.reliability.search_bound_log10.unwrap() > 20.0);
    }
}
