//! Integral second homology of the elliptic surface from morsified monodromy.
//!
//! Closed classes are thimble combinations `x` with `sum x_i d_i = 0`, modulo the image of
//! the loop around infinity. The fibre `F` and zero section `O` are adjoined by hand.

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::morsification::{extension_to_thimbles, fibre_component_vectors, Letter, MorsificationError, MorsifiedRep};
use crate::sl2z::{det2, KodairaType, Mat2Z};
use crate::zlattice::{kernel_basis, quotient, GramLattice, IntMatrix, LatticeError, Quotient};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomologyError {
    #[error("factor {0} is not conjugate to U")]
    NotLefschetzInput(usize),
    #[error("Euler number {0} is not a positive multiple of 12")]
    EulerNot12Multiple(usize),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("extension cycles up to word length {0} do not span the homology")]
    SpanFailure(usize),
    #[error(transparent)]
    Morsification(#[from] MorsificationError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// One extension cycle `tau_w(gamma)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionCycle {
    pub word: Vec<Letter>,
    pub gamma: [i64; 2],
    pub thimbles: Vec<i64>,
    /// Coordinates in the homology basis (F and O coefficients zero).
    pub coords: Vec<Integer>,
}

/// Classes of the non-identity components of one singular fibre.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FibreComponents {
    pub fibre: usize,
    pub kodaira: KodairaType,
    pub thimbles: Vec<Vec<i64>>,
    pub classes: Vec<Vec<Integer>>,
}

/// The basis `B' = (Gamma_1.., Theta.., F, O)` and its matrix in the homology basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimaryBasis {
    pub extensions: Vec<ExtensionCycle>,
    /// Columns are the elements of `B'` written in the homology basis.
    pub change_of_basis: IntMatrix,
    pub max_word_length: usize,
}

#[derive(Debug, Clone)]
pub struct SurfaceHomology {
    /// Number of morsified thimbles, equal to the Euler number.
    pub euler: usize,
    /// Gram matrix in the basis `(eta_1 .. eta_{e-4}, F, O)`.
    pub lattice: GramLattice,
    /// Thimble representatives of `eta_j`.
    pub basis_thimbles: Vec<Vec<Integer>>,
    pub fibre_index: usize,
    pub section_index: usize,
    pub components: Vec<FibreComponents>,
    pub primary: PrimaryBasis,
    quotient: Quotient,
    form: IntMatrix,
}

/// The (non-symmetric) thimble form; symmetric on closed classes.
fn thimble_form(m: &MorsifiedRep) -> IntMatrix {
    let n = m.len();
    IntMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Integer::from(-1)
        } else if i < j {
            Integer::from(-det2(m.transvections[i].d, m.transvections[j].d))
        } else {
            Integer::new()
        }
    })
}

/// Rows `m_i M_{i-1} .. M_1` of the boundary map of the loop around infinity.
fn infinity_boundary(m: &MorsifiedRep) -> IntMatrix {
    let n = m.len();
    let mut t = IntMatrix::zeros(n, 2);
    // Running product kept with big integers.
    let mut p = IntMatrix::identity(2);
    for i in 0..n {
        let mi = m.transvections[i].m;
        for c in 0..2 {
            t[(i, c)] = Integer::from(mi[0]) * &p[(0, c)] + Integer::from(mi[1]) * &p[(1, c)];
        }
        let mm = IntMatrix::from_i64(&[vec![m.matrices[i].a, m.matrices[i].b], vec![m.matrices[i].c, m.matrices[i].d]]);
        p = mm.mul(&p);
    }
    t
}

pub fn homology_from_monodromy(m: &MorsifiedRep) -> Result<SurfaceHomology, HomologyError> {
    let n = m.len();
    if let Some(i) = m.transvections.iter().position(|t| !t.is_simple()) {
        return Err(HomologyError::NotLefschetzInput(i));
    }
    if n == 0 || n % 12 != 0 {
        return Err(HomologyError::EulerNot12Multiple(n));
    }
    let b = IntMatrix::from_i64(&[
        m.transvections.iter().map(|t| t.d[0]).collect(),
        m.transvections.iter().map(|t| t.d[1]).collect(),
    ]);
    let tinf = infinity_boundary(m);
    if !b.mul(&tinf).is_zero() {
        return Err(HomologyError::InternalInconsistency(
            "image of the loop at infinity is not closed; the total monodromy is not the identity".into(),
        ));
    }
    let k = kernel_basis(&b);
    let q = quotient(&k, &tinf)?;
    if !q.group.is_free() || q.group.free_rank != n - 4 {
        return Err(HomologyError::InternalInconsistency(format!("ker B / im T has shape {}", q.group)));
    }
    let form = thimble_form(m);
    // The form must descend: classes at infinity pair trivially with closed classes.
    let kt = k.transpose();
    if !kt.mul(&form).mul(&tinf).is_zero() || !tinf.transpose().mul(&form).mul(&k).is_zero() {
        return Err(HomologyError::InternalInconsistency("intersection form does not descend".into()));
    }
    let etas = q.free_representatives.clone();
    let r = n - 2;
    let mut gram = IntMatrix::zeros(r, r);
    for a in 0..n - 4 {
        for c in 0..n - 4 {
            gram[(a, c)] = form.bilinear(&etas[a], &etas[c]);
        }
    }
    let (fi, oi) = (n - 4, n - 3);
    gram[(fi, oi)] = Integer::from(1);
    gram[(oi, fi)] = Integer::from(1);
    gram[(oi, oi)] = Integer::from(-((n / 12) as i64));
    if !gram.is_symmetric() {
        return Err(HomologyError::InternalInconsistency("Gram matrix is not symmetric".into()));
    }
    let lattice = GramLattice::from_int(&gram);
    if !lattice.is_unimodular() {
        return Err(HomologyError::InternalInconsistency(format!("Gram determinant {}", lattice.det())));
    }
    let mut h = SurfaceHomology {
        euler: n,
        lattice,
        basis_thimbles: etas,
        fibre_index: fi,
        section_index: oi,
        components: Vec::new(),
        primary: PrimaryBasis { extensions: vec![], change_of_basis: IntMatrix::zeros(0, 0), max_word_length: 0 },
        quotient: q,
        form,
    };
    for v in 0..m.fibres.len() {
        let thimbles = fibre_component_vectors(m, v)?;
        let classes = thimbles
            .iter()
            .map(|x| h.project_i64(x).ok_or_else(|| HomologyError::InternalInconsistency(format!("component of fibre {v} is not closed"))))
            .collect::<Result<Vec<_>, _>>()?;
        h.components.push(FibreComponents { fibre: v, kodaira: m.fibres[v].kodaira, thimbles, classes });
    }
    h.primary = primary_basis(&h, m, 4)?;
    Ok(h)
}

impl SurfaceHomology {
    pub fn rank(&self) -> usize {
        self.lattice.rank()
    }

    pub fn gram(&self) -> &GramLattice {
        &self.lattice
    }

    /// Homology coordinates (length `e - 2`) of a closed thimble combination.
    pub fn project(&self, x: &[Integer]) -> Option<Vec<Integer>> {
        let (tors, mut free) = self.quotient.project(x)?;
        debug_assert!(tors.is_empty());
        free.push(Integer::new());
        free.push(Integer::new());
        Some(free)
    }

    pub fn project_i64(&self, x: &[i64]) -> Option<Vec<Integer>> {
        let v: Vec<Integer> = x.iter().map(|&a| Integer::from(a)).collect();
        self.project(&v)
    }

    /// Intersection number of two closed thimble combinations, computed upstairs.
    pub fn thimble_pairing(&self, x: &[Integer], y: &[Integer]) -> Integer {
        self.form.bilinear(x, y)
    }

    /// Thimble change of a relative class dragged once around morsified loop `i`:
    /// `x -> x + tau_i(boundary x)`. Closed classes are fixed.
    pub fn transport_around(&self, m: &MorsifiedRep, i: usize, x: &[i64]) -> Vec<i64> {
        let g = m.boundary(x);
        let mut out = x.to_vec();
        out[i] += m.transvections[i].pair(g);
        out
    }

    /// All component classes, fibre by fibre.
    pub fn theta_classes(&self) -> Vec<Vec<Integer>> {
        self.components.iter().flat_map(|c| c.classes.iter().cloned()).collect()
    }

    pub fn fibre_class(&self) -> Vec<Integer> {
        unit(self.rank(), self.fibre_index)
    }

    pub fn section_class(&self) -> Vec<Integer> {
        unit(self.rank(), self.section_index)
    }

    /// Sum of `m_v - 1` over the singular fibres.
    pub fn component_correction(&self) -> usize {
        self.components.iter().map(|c| c.classes.len()).sum()
    }
}

fn unit(n: usize, i: usize) -> Vec<Integer> {
    (0..n).map(|j| Integer::from(u32::from(i == j))).collect()
}

/// Incremental rank tracker over Q.
struct Echelon {
    rows: Vec<(usize, Vec<Rational>)>,
}

impl Echelon {
    fn new() -> Self {
        Echelon { rows: Vec::new() }
    }

    fn reduce(&self, v: &[Integer]) -> Vec<Rational> {
        let mut w: Vec<Rational> = v.iter().map(Rational::from).collect();
        for (p, row) in &self.rows {
            if w[*p] != 0 {
                let f = w[*p].clone();
                for (x, y) in w.iter_mut().zip(row) {
                    *x -= Rational::from(&f * y);
                }
            }
        }
        w
    }

    /// Insert if independent; returns whether the rank grew.
    fn insert(&mut self, v: &[Integer]) -> bool {
        let mut w = self.reduce(v);
        let Some(p) = w.iter().position(|x| *x != 0) else { return false };
        let inv = Rational::from(1) / &w[p];
        for x in w.iter_mut() {
            *x *= &inv;
        }
        self.rows.push((p, w));
        true
    }
}

/// Words over the original loops in order of length, skipping `l l^-1` cancellations.
fn words(r: usize, len: usize) -> Vec<Vec<Letter>> {
    let letters: Vec<Letter> = (0..r).flat_map(|i| [Letter::fwd(i), Letter::inv(i)]).collect();
    let mut out: Vec<Vec<Letter>> = vec![vec![]];
    for _ in 0..len {
        let mut next = Vec::new();
        for w in &out {
            for l in &letters {
                if let Some(last) = w.last() {
                    if last.index == l.index && last.inverse != l.inverse {
                        continue;
                    }
                }
                let mut w2 = w.clone();
                w2.push(*l);
                next.push(w2);
            }
        }
        out = next;
    }
    out
}

/// Primitive integer basis of `ker(M - I)`.
fn fixed_vectors(m: &Mat2Z) -> Vec<[i64; 2]> {
    if m.is_identity() {
        return vec![[1, 0], [0, 1]];
    }
    let n = Mat2Z::new(m.a - 1, m.b, m.c, m.d - 1);
    if n.det() != 0 {
        return vec![];
    }
    // A kernel vector of a rank-one matrix.
    let (r0, r1) = ([n.a, n.b], [n.c, n.d]);
    let row = if r0 != [0, 0] { r0 } else { r1 };
    let g = crate::sl2z::gcd(row[0], row[1]);
    vec![[-row[1] / g, row[0] / g]]
}

/// Search words of length `1..=max_len` for extension cycles completing the components,
/// `F` and `O` to a basis of `H_2 (x) Q`.
pub fn primary_basis(h: &SurfaceHomology, m: &MorsifiedRep, max_len: usize) -> Result<PrimaryBasis, HomologyError> {
    let rank = h.rank();
    let target = rank;
    let mut ech = Echelon::new();
    let mut cols: Vec<Vec<Integer>> = Vec::new();
    for c in h.theta_classes() {
        if !ech.insert(&c) {
            return Err(HomologyError::InternalInconsistency("fibre components are dependent".into()));
        }
        cols.push(c);
    }
    for c in [h.fibre_class(), h.section_class()] {
        ech.insert(&c);
        cols.push(c);
    }
    let mut extensions = Vec::new();
    let mut used = 0;
    'outer: for len in 1..=max_len {
        used = len;
        for w in words(m.fibres.len(), len) {
            if ech.rows.len() == target {
                break 'outer;
            }
            for g in fixed_vectors(&m.word_matrix(&w)) {
                let x = extension_to_thimbles(m, &w, g)?;
                if x.iter().all(|&a| a == 0) {
                    continue;
                }
                let coords = h.project_i64(&x).ok_or_else(|| HomologyError::InternalInconsistency("extension cycle is not closed".into()))?;
                if ech.insert(&coords) {
                    extensions.push(ExtensionCycle { word: w.clone(), gamma: g, thimbles: x, coords });
                }
            }
        }
    }
    if ech.rows.len() < target {
        return Err(HomologyError::SpanFailure(max_len));
    }
    let mut all: Vec<Vec<Integer>> = extensions.iter().map(|e| e.coords.clone()).collect();
    all.extend(cols);
    let change_of_basis = IntMatrix::from_cols(rank, &all);
    debug_assert!(change_of_basis.det() != 0);
    Ok(PrimaryBasis { extensions, change_of_basis, max_word_length: used })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morsification::{morsify, MonodromyRep};
    use crate::sl2z::{U, V};

    fn k3() -> MorsifiedRep {
        let m1 = Mat2Z::new(7, 9, -4, -5);
        let m4 = Mat2Z::new(3, 1, -4, -1);
        let m5 = Mat2Z::new(3, 2, -2, -1);
        morsify(&MonodromyRep::from_matrices(&[m1, U, U, m4, m5, m5, m5, m5, m4, m5, m4, m4, m5, m5, U, m5])).unwrap()
    }

    #[test]
    fn k3_lattice_invariants() {
        let h = homology_from_monodromy(&k3()).unwrap();
        assert_eq!(h.rank(), 22);
        assert_eq!(h.lattice.det().clone().abs(), 1);
        assert!(h.lattice.is_even());
        assert_eq!(h.lattice.signature(), (3, 19));
        assert_eq!(h.primary.change_of_basis.ncols(), 22);
    }

    #[test]
    fn rational_surface_lattice() {
        let mats: Vec<Mat2Z> = (0..6).flat_map(|_| [U, V]).collect();
        let m = morsify(&MonodromyRep::from_matrices(&mats)).unwrap();
        let h = homology_from_monodromy(&m).unwrap();
        assert_eq!(h.rank(), 10);
        assert_eq!(h.lattice.signature(), (1, 9));
    }

    #[test]
    fn rejects_bad_euler_number() {
        let m = morsify(&MonodromyRep::from_matrices(&[U, V, U, V, U, V])).unwrap();
        assert!(matches!(homology_from_monodromy(&m), Err(HomologyError::EulerNot12Multiple(6))));
    }
}
