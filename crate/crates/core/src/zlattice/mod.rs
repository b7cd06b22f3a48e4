//! Exact integer lattice algebra: normal forms, quotients, LLL, Gram lattices.

mod lll;
mod matrix;
mod normal_form;

pub use lll::lll_reduce_rows;
pub use matrix::{dot_int, primitive_integer, IntMatrix, Matrix, RatMatrix};
pub use normal_form::{hermite_normal_form, kernel_basis, lattice_hnf, smith_normal_form};

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("generators do not lie in the ambient lattice")]
    NotSubgroup,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("Gram matrix is degenerate")]
    Degenerate,
}

/// A finitely generated abelian group `Z^r + sum Z/d_i`, with `d_1 | d_2 | ..` and `d_i > 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FgAbelianGroup {
    pub free_rank: usize,
    pub torsion: Vec<Integer>,
}

impl FgAbelianGroup {
    pub fn is_free(&self) -> bool {
        self.torsion.is_empty()
    }

    pub fn torsion_order(&self) -> Integer {
        self.torsion.iter().fold(Integer::from(1), |acc, d| acc * d)
    }
}

impl std::fmt::Display for FgAbelianGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        if self.free_rank > 0 {
            parts.push(format!("Z^{}", self.free_rank));
        }
        parts.extend(self.torsion.iter().map(|d| format!("Z/{d}")));
        if parts.is_empty() {
            parts.push("0".into());
        }
        write!(f, "{}", parts.join(" x "))
    }
}

/// The quotient `L1 / L2` of two lattices in a common `Z^n` together with coordinates.
#[derive(Debug, Clone)]
pub struct Quotient {
    pub group: FgAbelianGroup,
    /// Basis of `L1` (columns).
    k: IntMatrix,
    /// Left inverse of `k` over Q.
    k_pinv: RatMatrix,
    /// Unimodular change of coordinates on `L1`: new = u * old.
    u: IntMatrix,
    /// Invariant factors of the relation module (length = rank of `L1`; zero means free).
    invariants: Vec<Integer>,
    /// Ambient representatives for the torsion generators, then the free generators.
    pub torsion_representatives: Vec<Vec<Integer>>,
    pub free_representatives: Vec<Vec<Integer>>,
}

impl Quotient {
    /// Coordinates of an ambient vector of `L1` in `L1`'s basis.
    pub fn lift_coordinates(&self, x: &[Integer]) -> Option<Vec<Integer>> {
        let xr: Vec<Rational> = x.iter().map(Rational::from).collect();
        let c = self.k_pinv.mul_vec(&xr);
        if c.iter().any(|q| *q.denom() != 1) {
            return None;
        }
        let ci: Vec<Integer> = c.iter().map(|q| q.numer().clone()).collect();
        (self.k.mul_vec(&ci) == x).then_some(ci)
    }

    /// Image of `x` in the quotient: (torsion residues, free coordinates).
    pub fn project(&self, x: &[Integer]) -> Option<(Vec<Integer>, Vec<Integer>)> {
        let c = self.lift_coordinates(x)?;
        let y = self.u.mul_vec(&c);
        let mut tors = Vec::new();
        let mut free = Vec::new();
        for (yi, di) in y.iter().zip(&self.invariants) {
            if *di == 0 {
                free.push(yi.clone());
            } else if *di > 1 {
                tors.push(<(Integer, Integer)>::from(yi.div_rem_euc_ref(di)).1);
            }
        }
        Some((tors, free))
    }
}

/// Compute `L1 / L2` where `l1` (columns, a basis) and `l2` (columns, generators) live in `Z^n`.
pub fn quotient(l1: &IntMatrix, l2: &IntMatrix) -> Result<Quotient, LatticeError> {
    let n = l1.nrows();
    if l2.nrows() != n {
        return Err(LatticeError::Dimension(format!("{} vs {}", n, l2.nrows())));
    }
    let k = l1.clone();
    let kr = k.to_rational();
    let gram = kr.transpose().mul(&kr);
    let k_pinv = gram.inverse().ok_or(LatticeError::Degenerate)?.mul(&kr.transpose());
    // Relation matrix: l2 = k * x.
    let x_rat = k_pinv.mul(&l2.to_rational());
    let x = x_rat.to_integer().ok_or(LatticeError::NotSubgroup)?;
    if k.mul(&x) != *l2 {
        return Err(LatticeError::NotSubgroup);
    }
    let (u, dmat, _) = smith_normal_form(&x);
    let rank_k = k.ncols();
    let invariants: Vec<Integer> = (0..rank_k)
        .map(|i| if i < dmat.ncols() { dmat[(i, i)].clone() } else { Integer::new() })
        .collect();
    let uinv = u.to_rational().inverse().expect("unimodular").to_integer().expect("unimodular");
    let rep = |i: usize| k.mul_vec(&uinv.col(i));
    let mut torsion = Vec::new();
    let mut torsion_representatives = Vec::new();
    let mut free_representatives = Vec::new();
    for (i, d) in invariants.iter().enumerate() {
        if *d == 0 {
            free_representatives.push(rep(i));
        } else if *d > 1 {
            torsion.push(d.clone());
            torsion_representatives.push(rep(i));
        }
    }
    let group = FgAbelianGroup { free_rank: free_representatives.len(), torsion };
    Ok(Quotient { group, k, k_pinv, u, invariants, torsion_representatives, free_representatives })
}

/// `(L (x) Q) cap Z^n` for a lattice given by generator columns; returns a basis (columns).
pub fn saturate(gens: &IntMatrix) -> IntMatrix {
    let n = gens.nrows();
    // The saturation is the kernel of the kernel of the transpose.
    let perp = kernel_basis(&gens.transpose());
    if perp.ncols() == 0 {
        return IntMatrix::identity(n);
    }
    kernel_basis(&perp.transpose())
}

/// A lattice with an exact symmetric bilinear form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GramLattice {
    pub gram: RatMatrix,
}

impl GramLattice {
    pub fn new(gram: RatMatrix) -> Result<Self, LatticeError> {
        if !gram.is_symmetric() {
            return Err(LatticeError::Dimension("Gram matrix is not symmetric".into()));
        }
        Ok(GramLattice { gram })
    }

    pub fn from_int(gram: &IntMatrix) -> Self {
        GramLattice { gram: gram.to_rational() }
    }

    pub fn rank(&self) -> usize {
        self.gram.nrows()
    }

    pub fn det(&self) -> Rational {
        self.gram.det()
    }

    pub fn pair(&self, x: &[Integer], y: &[Integer]) -> Rational {
        let xr: Vec<Rational> = x.iter().map(Rational::from).collect();
        let yr: Vec<Rational> = y.iter().map(Rational::from).collect();
        self.gram.bilinear(&xr, &yr)
    }

    /// Even iff the form is integral with even diagonal.
    pub fn is_even(&self) -> bool {
        let n = self.rank();
        (0..n).all(|i| {
            let d = &self.gram[(i, i)];
            *d.denom() == 1 && d.numer().is_even() && (0..n).all(|j| *self.gram[(i, j)].denom() == 1)
        })
    }

    pub fn is_unimodular(&self) -> bool {
        let d = self.det();
        d == 1 || d == -1
    }

    /// `(n_plus, n_minus)` by exact congruence diagonalisation.
    pub fn signature(&self) -> (usize, usize) {
        signature(&self.gram)
    }

    /// Sublattice spanned by the given column vectors (in the current coordinates).
    pub fn restrict(&self, basis: &IntMatrix) -> GramLattice {
        let b = basis.to_rational();
        GramLattice { gram: b.transpose().mul(&self.gram).mul(&b) }
    }

    /// Saturated basis of `{x : <x, s> = 0 for all s in S}`.
    pub fn orthogonal_complement(&self, s: &IntMatrix) -> IntMatrix {
        let m = s.to_rational().transpose().mul(&self.gram);
        // Clear denominators row by row.
        let rows: Vec<Vec<Integer>> = m.rows_vec().iter().map(|r| primitive_integer(r)).collect();
        kernel_basis(&IntMatrix::from_rows(rows))
    }
}

/// Signature of a symmetric rational matrix.
pub fn signature(g: &RatMatrix) -> (usize, usize) {
    let n = g.nrows();
    let mut a = g.clone();
    let (mut pos, mut neg) = (0, 0);
    let mut t = 0;
    while t < n {
        let piv = (t..n).find(|&i| a[(i, i)] != 0);
        let p = match piv {
            Some(p) => p,
            None => {
                // All diagonal entries vanish: use e_i + e_j with a_ij != 0.
                let Some((i, j)) = (t..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).find(|&(i, j)| a[(i, j)] != 0) else {
                    break;
                };
                for c in 0..n {
                    let v = a[(j, c)].clone();
                    a[(i, c)] += v;
                }
                for r in 0..n {
                    let v = a[(r, j)].clone();
                    a[(r, i)] += v;
                }
                i
            }
        };
        a.swap_rows(t, p);
        a.swap_cols(t, p);
        let pv = a[(t, t)].clone();
        if pv > 0 {
            pos += 1;
        } else {
            neg += 1;
        }
        for i in t + 1..n {
            if a[(i, t)] == 0 {
                continue;
            }
            let f = Rational::from(&a[(i, t)] / &pv);
            for c in t..n {
                let v = Rational::from(&f * &a[(t, c)]);
                a[(i, c)] -= v;
            }
            for r in t..n {
                let v = Rational::from(&f * &a[(r, t)]);
                a[(r, i)] -= v;
            }
        }
        t += 1;
    }
    (pos, neg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quotient_of_index_two() {
        let l1 = IntMatrix::identity(2);
        let l2 = IntMatrix::from_i64(&[vec![2, 0], vec![0, 1]]);
        let q = quotient(&l1, &l2).unwrap();
        assert_eq!(q.group, FgAbelianGroup { free_rank: 0, torsion: vec![Integer::from(2)] });
        let (t, f) = q.project(&[Integer::from(1), Integer::from(0)]).unwrap();
        assert_eq!(t, vec![Integer::from(1)]);
        assert!(f.is_empty());
    }

    #[test]
    fn quotient_rejects_non_subgroup() {
        let l1 = IntMatrix::from_i64(&[vec![2, 0], vec![0, 1]]);
        let l2 = IntMatrix::identity(2);
        assert_eq!(quotient(&l1, &l2).unwrap_err(), LatticeError::NotSubgroup);
    }

    #[test]
    fn signature_of_hyperbolic_plane() {
        let h = IntMatrix::from_i64(&[vec![0, 1], vec![1, 0]]).to_rational();
        assert_eq!(signature(&h), (1, 1));
        let e = IntMatrix::from_i64(&[vec![-2, 1], vec![1, -2]]).to_rational();
        assert_eq!(signature(&e), (0, 2));
    }

    #[test]
    fn saturation_recovers_primitive_span() {
        let g = IntMatrix::from_i64(&[vec![2], vec![4]]);
        let s = saturate(&g);
        assert_eq!(s.ncols(), 1);
        let c = s.col(0);
        assert_eq!(c[0].clone().abs(), 1);
        assert_eq!(c[1].clone().abs(), 2);
    }
}
