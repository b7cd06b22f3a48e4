//! Fixtures shared by the benchmarks.

use ellsurf_core::morsification::MonodromyRep;
use ellsurf_core::{CubicPencil, Mat2Z, QPoly};

pub fn legendre_pencil() -> CubicPencil {
    CubicPencil::from_terms(&[
        ([0, 2, 1], QPoly::from_i64(&[1])),
        ([3, 0, 0], QPoly::from_i64(&[-1])),
        ([2, 0, 1], QPoly::from_i64(&[1, 1])),
        ([1, 0, 2], QPoly::from_i64(&[0, -1])),
    ])
    .expect("valid pencil")
}

pub fn k3_pencil() -> CubicPencil {
    let a = QPoly::from_i64(&[14485, 35680, 102618, 58840, 93273]);
    let b = QPoly::from_i64(&[-2083725, 15406335, 16161642, -127136490, -19459741, 241822775, 17011856, -78412620, -8590032]);
    CubicPencil::from_terms(&[
        ([3, 0, 0], QPoly::from_i64(&[1])),
        ([2, 0, 1], a.scale(&4.into())),
        ([1, 0, 2], b.scale(&512.into())),
        ([0, 2, 1], QPoly::from_i64(&[-1])),
    ])
    .expect("valid pencil")
}

/// Sixteen loops of the K3 example, closing up to the identity.
pub fn k3_monodromy() -> MonodromyRep {
    let m1 = Mat2Z::new(7, 9, -4, -5);
    let m4 = Mat2Z::new(3, 1, -4, -1);
    let m5 = Mat2Z::new(3, 2, -2, -1);
    let u = Mat2Z::new(1, 1, 0, 1);
    MonodromyRep::from_matrices(&[m1, u, u, m4, m5, m5, m5, m5, m4, m5, m4, m4, m5, m5, u, m5])
}
