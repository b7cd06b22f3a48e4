//! Splitting singular fibres into `I1` fibres, and transport of extension cycles to thimbles.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sl2z::{self, kodaira_classify, minimal_factorisation, ordered_product, KodairaType, Mat2Z, Sl2zError, Transvection};
use crate::zlattice::{kernel_basis, IntMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MorsificationError {
    #[error("loop {index}: {source}")]
    Classification { index: usize, source: Sl2zError },
    #[error("loop index {0} out of range")]
    BadLoop(usize),
    #[error("factor product does not reproduce loop {0}")]
    ProductMismatch(usize),
}

/// Where a loop goes around: a finite critical value (decimal strings) or infinity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticalValue {
    Finite { re: String, im: String },
    Infinity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonodromyLoop {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<CriticalValue>,
    pub matrix: Mat2Z,
}

/// Monodromy matrices of a distinguished basis of loops, in composition order: the
/// product `M_r .. M_1` is the monodromy of a loop around all critical values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonodromyRep {
    pub loops: Vec<MonodromyLoop>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basepoint: Option<[String; 2]>,
}

impl MonodromyRep {
    pub fn from_matrices(ms: &[Mat2Z]) -> Self {
        MonodromyRep {
            loops: ms.iter().map(|&matrix| MonodromyLoop { value: None, matrix }).collect(),
            basepoint: None,
        }
    }

    pub fn matrices(&self) -> Vec<Mat2Z> {
        self.loops.iter().map(|l| l.matrix).collect()
    }

    pub fn total(&self) -> Mat2Z {
        ordered_product(&self.matrices())
    }
}

/// Provenance of one original fibre inside the morsified list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FibreProvenance {
    pub original_index: usize,
    /// Half-open range of morsified indices.
    pub start: usize,
    pub end: usize,
    pub kodaira: KodairaType,
    pub conjugator: Mat2Z,
}

impl FibreProvenance {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorsifiedRep {
    pub matrices: Vec<Mat2Z>,
    pub transvections: Vec<Transvection>,
    pub fibres: Vec<FibreProvenance>,
}

/// A letter of a word in the original loops: traverse loop `index`, backwards if `inverse`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub index: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn fwd(index: usize) -> Self {
        Letter { index, inverse: false }
    }

    pub fn inv(index: usize) -> Self {
        Letter { index, inverse: true }
    }
}

/// Replace each fibre by conjugated normal-form factors.
pub fn morsify(rep: &MonodromyRep) -> Result<MorsifiedRep, MorsificationError> {
    let mut matrices = Vec::new();
    let mut fibres = Vec::new();
    for (index, lp) in rep.loops.iter().enumerate() {
        let w = kodaira_classify(&lp.matrix).map_err(|source| MorsificationError::Classification { index, source })?;
        let start = matrices.len();
        let a = w.conjugator;
        let factors: Vec<Mat2Z> = minimal_factorisation(w.kodaira).iter().map(|g| a.conjugate(g)).collect();
        if ordered_product(&factors) != lp.matrix {
            return Err(MorsificationError::ProductMismatch(index));
        }
        matrices.extend(factors);
        fibres.push(FibreProvenance { original_index: index, start, end: matrices.len(), kodaira: w.kodaira, conjugator: a });
    }
    let transvections = matrices
        .iter()
        .enumerate()
        .map(|(i, m)| sl2z::pl_decompose(m).map_err(|source| MorsificationError::Classification { index: i, source }))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MorsifiedRep { matrices, transvections, fibres })
}

impl MorsifiedRep {
    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    /// `sum x_i d_i`.
    pub fn boundary(&self, x: &[i64]) -> [i64; 2] {
        let mut b = [0i64; 2];
        for (xi, t) in x.iter().zip(&self.transvections) {
            b[0] += xi * t.d[0];
            b[1] += xi * t.d[1];
        }
        b
    }

    /// Monodromy of an original loop.
    pub fn loop_matrix(&self, index: usize) -> Mat2Z {
        let f = &self.fibres[index];
        ordered_product(&self.matrices[f.start..f.end])
    }

    pub fn word_matrix(&self, word: &[Letter]) -> Mat2Z {
        word.iter().fold(Mat2Z::IDENTITY, |acc, l| {
            let m = self.loop_matrix(l.index);
            (if l.inverse { m.inverse() } else { m }) * acc
        })
    }

    /// Thimble coordinates of `tau_l(gamma)` for one forward traversal of an original loop;
    /// returns the transported cycle as well.
    fn extend_forward(&self, index: usize, gamma: [i64; 2], out: &mut [i64], sign: i64) -> [i64; 2] {
        let f = &self.fibres[index];
        let mut g = gamma;
        for i in f.start..f.end {
            out[i] += sign * self.transvections[i].pair(g);
            g = self.matrices[i].apply(g);
        }
        g
    }
}

/// Thimble vector of the extension `tau_w(gamma)`; `word` lists letters in traversal order.
pub fn extension_to_thimbles(m: &MorsifiedRep, word: &[Letter], gamma: [i64; 2]) -> Result<Vec<i64>, MorsificationError> {
    let mut out = vec![0i64; m.len()];
    let mut g = gamma;
    for l in word {
        if l.index >= m.fibres.len() {
            return Err(MorsificationError::BadLoop(l.index));
        }
        if l.inverse {
            // tau_{l^-1}(g) = -tau_l(l^{-1}_* g)
            let back = m.loop_matrix(l.index).inverse().apply(g);
            m.extend_forward(l.index, back, &mut out, -1);
            g = back;
        } else {
            g = m.extend_forward(l.index, g, &mut out, 1);
        }
    }
    Ok(out)
}

/// Thimble vectors spanning the non-identity components of fibre `v`.
pub fn fibre_component_vectors(m: &MorsifiedRep, v: usize) -> Result<Vec<Vec<i64>>, MorsificationError> {
    let f = m.fibres.get(v).ok_or(MorsificationError::BadLoop(v))?;
    let n = m.len();
    let r = f.len();
    let mut out = Vec::new();
    if let KodairaType::In(_) = f.kodaira {
        // All vanishing cycles coincide: the chain e_i - e_{i+1}.
        for i in f.start..f.end - 1 {
            let mut x = vec![0i64; n];
            x[i] = 1;
            x[i + 1] = -1;
            out.push(x);
        }
        return Ok(out);
    }
    let b = IntMatrix::from_i64(&[
        m.transvections[f.start..f.end].iter().map(|t| t.d[0]).collect(),
        m.transvections[f.start..f.end].iter().map(|t| t.d[1]).collect(),
    ]);
    let k = kernel_basis(&b);
    debug_assert_eq!(k.ncols(), r - 2);
    for j in 0..k.ncols() {
        let mut x = vec![0i64; n];
        for i in 0..r {
            x[f.start + i] = k[(i, j)].to_i64().expect("small kernel entry");
        }
        out.push(x);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn k3_example() -> MonodromyRep {
        let m1 = Mat2Z::new(7, 9, -4, -5);
        let m4 = Mat2Z::new(3, 1, -4, -1);
        let m5 = Mat2Z::new(3, 2, -2, -1);
        let u = sl2z::U;
        let ms = [m1, u, u, m4, m5, m5, m5, m5, m4, m5, m4, m4, m5, m5, u, m5];
        MonodromyRep::from_matrices(&ms)
    }

    #[test]
    fn k3_morsification_has_24_factors() {
        let rep = k3_example();
        assert!(rep.total().is_identity());
        let m = morsify(&rep).unwrap();
        assert_eq!(m.len(), 24);
        assert!(ordered_product(&m.matrices).is_identity());
        assert!(m.transvections.iter().all(|t| t.is_simple()));
    }

    #[test]
    fn worked_extension_example() {
        let m = morsify(&k3_example()).unwrap();
        // Loop 5 forward, then loop 6 backwards (1-based 5 and 6).
        let x = extension_to_thimbles(&m, &[Letter::fwd(4), Letter::inv(5)], [0, 1]).unwrap();
        let mut expect = vec![0i64; 24];
        expect[4] = 1;
        expect[5] = 1;
        expect[6] = -1;
        expect[7] = -1;
        assert_eq!(x, expect);
        assert_eq!(m.boundary(&x), [0, 0]);
    }

    #[test]
    fn legendre_i2_star_split() {
        let rep = MonodromyRep::from_matrices(&[Mat2Z::new(1, 2, 0, 1), Mat2Z::new(1, 0, -2, 1), Mat2Z::new(-3, -2, 2, 1)]);
        assert!(rep.total().is_identity());
        let m = morsify(&rep).unwrap();
        assert_eq!(m.fibres[2].kodaira, KodairaType::InStar(2));
        assert_eq!(m.len(), 12);
        assert_eq!(fibre_component_vectors(&m, 2).unwrap().len(), 6);
    }
}
