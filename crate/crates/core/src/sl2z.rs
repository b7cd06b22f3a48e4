//! Integer 2x2 matrices of determinant one and Kodaira types of their conjugacy classes.
//!
//! Matrices act on column vectors. A factor list `[G1, .., Gr]` always means the product
//! `Gr * .. * G1`, i.e. `G1` is applied first.

use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Sl2zError {
    #[error("matrix {0} does not have determinant 1")]
    NotSl2z(Mat2Z),
    #[error("the identity matrix is not a singular fibre")]
    Identity,
    #[error("matrix {0} is not conjugate to any Kodaira normal form")]
    NotKodaira(Mat2Z),
    #[error("matrix {0} is not a Picard-Lefschetz transvection")]
    NotTransvection(Mat2Z),
    #[error("integer overflow in 2x2 arithmetic")]
    Overflow,
}

/// A 2x2 integer matrix `[[a, b], [c, d]]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mat2Z {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl fmt::Debug for Mat2Z {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

impl fmt::Display for Mat2Z {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for Mat2Z {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [[self.a, self.b], [self.c, self.d]].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mat2Z {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [[a, b], [c, d]] = <[[i64; 2]; 2]>::deserialize(d)?;
        Ok(Mat2Z { a, b, c, d })
    }
}

/// `U = [[1, 1], [0, 1]]`.
pub const U: Mat2Z = Mat2Z { a: 1, b: 1, c: 0, d: 1 };
/// `V = [[1, 0], [-1, 1]]`.
pub const V: Mat2Z = Mat2Z { a: 1, b: 0, c: -1, d: 1 };
/// The symplectic form `J = [[0, 1], [-1, 0]]`; `det(x, y) = x^T J y`.
pub const J: Mat2Z = Mat2Z { a: 0, b: 1, c: -1, d: 0 };

impl Mat2Z {
    pub const IDENTITY: Mat2Z = Mat2Z { a: 1, b: 0, c: 0, d: 1 };

    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        Mat2Z { a, b, c, d }
    }

    pub fn from_rows(rows: [[i64; 2]; 2]) -> Self {
        Mat2Z::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    pub fn rows(&self) -> [[i64; 2]; 2] {
        [[self.a, self.b], [self.c, self.d]]
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> i64 {
        self.a + self.d
    }

    pub fn is_identity(&self) -> bool {
        *self == Mat2Z::IDENTITY
    }

    pub fn neg(&self) -> Mat2Z {
        Mat2Z::new(-self.a, -self.b, -self.c, -self.d)
    }

    /// Inverse, valid for determinant one.
    pub fn inverse(&self) -> Mat2Z {
        debug_assert_eq!(self.det(), 1);
        Mat2Z::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn transpose(&self) -> Mat2Z {
        Mat2Z::new(self.a, self.c, self.b, self.d)
    }

    pub fn checked_mul(&self, o: &Mat2Z) -> Option<Mat2Z> {
        let e = |x: i64, y: i64, z: i64, w: i64| x.checked_mul(y)?.checked_add(z.checked_mul(w)?);
        Some(Mat2Z {
            a: e(self.a, o.a, self.b, o.c)?,
            b: e(self.a, o.b, self.b, o.d)?,
            c: e(self.c, o.a, self.d, o.c)?,
            d: e(self.c, o.b, self.d, o.d)?,
        })
    }

    pub fn apply(&self, v: [i64; 2]) -> [i64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    pub fn pow(&self, n: u32) -> Mat2Z {
        (0..n).fold(Mat2Z::IDENTITY, |acc, _| acc * *self)
    }

    /// `self * m * self^{-1}`.
    pub fn conjugate(&self, m: &Mat2Z) -> Mat2Z {
        *self * *m * self.inverse()
    }
}

impl Mul for Mat2Z {
    type Output = Mat2Z;
    fn mul(self, o: Mat2Z) -> Mat2Z {
        self.checked_mul(&o).expect("Mat2Z product overflows i64")
    }
}

/// Product `list[r-1] * .. * list[0]`.
pub fn ordered_product(list: &[Mat2Z]) -> Mat2Z {
    list.iter().fold(Mat2Z::IDENTITY, |acc, m| *m * acc)
}

/// `det(x, y) = x^T J y`.
pub fn det2(x: [i64; 2], y: [i64; 2]) -> i64 {
    x[0] * y[1] - x[1] * y[0]
}

/// Kodaira fibre types with non-trivial monodromy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KodairaType {
    In(u32),
    II,
    III,
    IV,
    InStar(u32),
    IIStar,
    IIIStar,
    IVStar,
}

impl fmt::Display for KodairaType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KodairaType::In(n) => write!(f, "I{n}"),
            KodairaType::II => write!(f, "II"),
            KodairaType::III => write!(f, "III"),
            KodairaType::IV => write!(f, "IV"),
            KodairaType::InStar(n) => write!(f, "I{n}*"),
            KodairaType::IIStar => write!(f, "II*"),
            KodairaType::IIIStar => write!(f, "III*"),
            KodairaType::IVStar => write!(f, "IV*"),
        }
    }
}

impl KodairaType {
    /// Normal form monodromy `M_T`.
    pub fn normal_form(&self) -> Mat2Z {
        match *self {
            KodairaType::In(n) => Mat2Z::new(1, n as i64, 0, 1),
            KodairaType::II => Mat2Z::new(1, 1, -1, 0),
            KodairaType::III => Mat2Z::new(0, 1, -1, 0),
            KodairaType::IV => Mat2Z::new(0, 1, -1, -1),
            KodairaType::InStar(n) => Mat2Z::new(-1, -(n as i64), 0, -1),
            KodairaType::IIStar => Mat2Z::new(0, -1, 1, 1),
            KodairaType::IIIStar => Mat2Z::new(0, -1, 1, 0),
            KodairaType::IVStar => Mat2Z::new(-1, -1, 1, 0),
        }
    }

    /// The factorisation of `M_T` into `U`, `V` as written left to right.
    pub fn word(&self) -> String {
        let vu = |k: u32| "VU".repeat(k as usize);
        match *self {
            KodairaType::In(n) => "U".repeat(n as usize),
            KodairaType::II => vu(1),
            KodairaType::III => "VUV".into(),
            KodairaType::IV => vu(2),
            KodairaType::InStar(n) => "U".repeat(n as usize) + &vu(3),
            KodairaType::IIStar => vu(5),
            KodairaType::IIIStar => "VUV".to_string() + &vu(3),
            KodairaType::IVStar => vu(4),
        }
    }

    /// Euler number of the fibre; also the number of `I1` factors after morsification.
    pub fn euler_number(&self) -> u32 {
        match *self {
            KodairaType::In(n) => n,
            KodairaType::II => 2,
            KodairaType::III => 3,
            KodairaType::IV => 4,
            KodairaType::InStar(n) => n + 6,
            KodairaType::IIStar => 10,
            KodairaType::IIIStar => 9,
            KodairaType::IVStar => 8,
        }
    }

    /// Number of irreducible components `m_v`.
    pub fn components(&self) -> u32 {
        match *self {
            KodairaType::In(n) => n,
            other => other.euler_number() - 1,
        }
    }

    /// Every type with `I_n`, `I_n*` parameters up to `max_n`.
    pub fn all_up_to(max_n: u32) -> Vec<KodairaType> {
        let mut v: Vec<KodairaType> = (1..=max_n).map(KodairaType::In).collect();
        v.extend([KodairaType::II, KodairaType::III, KodairaType::IV]);
        v.extend((0..=max_n).map(KodairaType::InStar));
        v.extend([KodairaType::IIStar, KodairaType::IIIStar, KodairaType::IVStar]);
        v
    }
}

/// A Kodaira type with `M = conjugator * M_T * conjugator^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjugacyWitness {
    pub kodaira: KodairaType,
    pub conjugator: Mat2Z,
}

/// Primitive integer vector with the sign fixed so that the first non-zero entry is positive.
fn primitive(v: [i64; 2]) -> ([i64; 2], i64) {
    let g = gcd(v[0], v[1]);
    let mut p = [v[0] / g, v[1] / g];
    let mut s = g;
    if p[0] < 0 || (p[0] == 0 && p[1] < 0) {
        p = [-p[0], -p[1]];
        s = -s;
    }
    (p, s)
}

pub(crate) fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `(g, x, y)` with `a x + b y = g = gcd(a, b) >= 0`.
fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i64, 0i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// A matrix in SL2(Z) whose first column is the primitive vector `d`.
fn complete_column(d: [i64; 2]) -> Mat2Z {
    let (g, x, y) = ext_gcd(d[0], d[1]);
    debug_assert_eq!(g, 1);
    // det [[p, r], [q, s]] = p s - q r = 1 with s = x, r = -y.
    Mat2Z::new(d[0], -y, d[1], x)
}

/// For `M != I` with `(M - I)^2 = 0` returns `(d, lambda)` with `M = I + lambda d d^T J`
/// and `d` primitive with positive first non-zero entry.
fn transvection_data(m: &Mat2Z) -> Option<([i64; 2], i64)> {
    let n = Mat2Z::new(m.a - 1, m.b, m.c, m.d - 1);
    if n == Mat2Z::new(0, 0, 0, 0) || m.det() != 1 || m.trace() != 2 {
        return None;
    }
    // The image of N is the line spanned by d; pick the longer column.
    let col = if n.a != 0 || n.c != 0 { [n.a, n.c] } else { [n.b, n.d] };
    let (d, _) = primitive(col);
    // N = lambda d (d^T J) = lambda d (-d1, d0) as a row.
    let row = [-d[1], d[0]];
    let k = if d[0] != 0 { 0 } else { 1 };
    let lambda = if row[0] != 0 { [n.a, n.c][k] / (d[k] * row[0]) } else { [n.b, n.d][k] / (d[k] * row[1]) };
    let check = Mat2Z::new(
        1 + lambda * d[0] * row[0],
        lambda * d[0] * row[1],
        lambda * d[1] * row[0],
        1 + lambda * d[1] * row[1],
    );
    (check == *m).then_some((d, lambda))
}

/// Identify the Kodaira type of a monodromy matrix together with a conjugator.
pub fn kodaira_classify(m: &Mat2Z) -> Result<ConjugacyWitness, Sl2zError> {
    if m.det() != 1 {
        return Err(Sl2zError::NotSl2z(*m));
    }
    if m.is_identity() {
        return Err(Sl2zError::Identity);
    }
    let w = match m.trace() {
        2 => {
            let (d, lambda) = transvection_data(m).ok_or(Sl2zError::NotKodaira(*m))?;
            if lambda <= 0 {
                return Err(Sl2zError::NotKodaira(*m));
            }
            ConjugacyWitness { kodaira: KodairaType::In(lambda as u32), conjugator: complete_column(d) }
        }
        -2 => {
            let p = m.neg();
            if p.is_identity() {
                ConjugacyWitness { kodaira: KodairaType::InStar(0), conjugator: Mat2Z::IDENTITY }
            } else {
                let (d, lambda) = transvection_data(&p).ok_or(Sl2zError::NotKodaira(*m))?;
                if lambda <= 0 {
                    return Err(Sl2zError::NotKodaira(*m));
                }
                ConjugacyWitness { kodaira: KodairaType::InStar(lambda as u32), conjugator: complete_column(d) }
            }
        }
        -1..=1 => classify_elliptic(m)?,
        _ => return Err(Sl2zError::NotKodaira(*m)),
    };
    debug_assert_eq!(w.conjugator.conjugate(&w.kodaira.normal_form()), *m);
    Ok(w)
}

/// Reduce the upper half-plane fixed point of an elliptic matrix to `i` or `rho`.
fn classify_elliptic(m: &Mat2Z) -> Result<ConjugacyWitness, Sl2zError> {
    // g accumulates the conjugation: cur = g m g^{-1}.
    let mut g = Mat2Z::IDENTITY;
    let mut cur = *m;
    let s = Mat2Z::new(0, -1, 1, 0);
    for _ in 0..10_000 {
        // Fixed point z = (a - d)/(2c) + i sqrt(4 - t^2)/(2|c|), |z|^2 = -b/c.
        debug_assert!(cur.c != 0);
        let two_c = 2 * cur.c;
        let num = cur.a - cur.d;
        let n = round_div(num, two_c);
        if n != 0 {
            let t = Mat2Z::new(1, -n, 0, 1);
            g = t * g;
            cur = t.conjugate(&cur);
            continue;
        }
        // |z|^2 < 1 <=> -b/c < 1.
        let below = if cur.c > 0 { -cur.b < cur.c } else { -cur.b > cur.c };
        if below {
            g = s * g;
            cur = s.conjugate(&cur);
            continue;
        }
        break;
    }
    // On the boundary the fixed point is rho + 1 when Re z = 1/2.
    if cur.a - cur.d == cur.c {
        let t = Mat2Z::new(1, -1, 0, 1);
        g = t * g;
        cur = t.conjugate(&cur);
    }
    let kodaira = [
        KodairaType::II,
        KodairaType::III,
        KodairaType::IV,
        KodairaType::IIStar,
        KodairaType::IIIStar,
        KodairaType::IVStar,
    ]
    .into_iter()
    .find(|k| k.normal_form() == cur)
    .ok_or(Sl2zError::NotKodaira(*m))?;
    Ok(ConjugacyWitness { kodaira, conjugator: g.inverse() })
}

/// Nearest integer to `p/q`, ties towards negative infinity.
fn round_div(p: i64, q: i64) -> i64 {
    let (p, q) = if q < 0 { (-p, -q) } else { (p, q) };
    (2 * p + q - 1).div_euclid(2 * q)
}

/// The normal-form factorisation `[G1, .., Gr]` with `Gr .. G1 = M_T`.
pub fn minimal_factorisation(t: KodairaType) -> Vec<Mat2Z> {
    t.word()
        .chars()
        .rev()
        .map(|ch| if ch == 'U' { U } else { V })
        .collect()
}

/// Picard-Lefschetz data `M = I + d m` with `d` primitive (first non-zero entry positive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transvection {
    pub d: [i64; 2],
    pub m: [i64; 2],
}

impl Transvection {
    /// `m . v`.
    pub fn pair(&self, v: [i64; 2]) -> i64 {
        self.m[0] * v[0] + self.m[1] * v[1]
    }

    /// True when `m = d^T J`, i.e. the matrix is conjugate to `U`.
    pub fn is_simple(&self) -> bool {
        self.m == [-self.d[1], self.d[0]]
    }
}

/// Decompose a unipotent matrix `M != I` as `I + d m`.
pub fn pl_decompose(m: &Mat2Z) -> Result<Transvection, Sl2zError> {
    let (d, lambda) = transvection_data(m).ok_or(Sl2zError::NotTransvection(*m))?;
    Ok(Transvection { d, m: [-lambda * d[1], lambda * d[0]] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_forms_match_words() {
        for t in KodairaType::all_up_to(6) {
            assert_eq!(ordered_product(&minimal_factorisation(t)), t.normal_form(), "{t}");
            let len = minimal_factorisation(t).len() as u32;
            assert_eq!(len, t.euler_number(), "{t}");
        }
    }

    #[test]
    fn factor_order_for_type_two() {
        assert_eq!(minimal_factorisation(KodairaType::II), vec![U, V]);
    }

    #[test]
    fn classify_k3_example_matrices() {
        let m1 = Mat2Z::new(7, 9, -4, -5);
        let w = kodaira_classify(&m1).unwrap();
        assert_eq!(w.kodaira, KodairaType::In(1));
        let m4 = Mat2Z::new(3, 1, -4, -1);
        assert_eq!(kodaira_classify(&m4).unwrap().kodaira, KodairaType::In(1));
        let m5 = Mat2Z::new(3, 2, -2, -1);
        let w5 = kodaira_classify(&m5).unwrap();
        assert_eq!(w5.kodaira, KodairaType::In(2));
        assert_eq!(w5.conjugator.conjugate(&KodairaType::In(2).normal_form()), m5);
    }

    #[test]
    fn minus_identity_is_i0_star() {
        let w = kodaira_classify(&Mat2Z::IDENTITY.neg()).unwrap();
        assert_eq!(w.kodaira, KodairaType::InStar(0));
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(kodaira_classify(&Mat2Z::IDENTITY), Err(Sl2zError::Identity));
        assert!(matches!(kodaira_classify(&Mat2Z::new(2, 0, 0, 1)), Err(Sl2zError::NotSl2z(_))));
        assert!(matches!(kodaira_classify(&Mat2Z::new(2, 1, 1, 1)), Err(Sl2zError::NotKodaira(_))));
        assert!(matches!(kodaira_classify(&Mat2Z::new(1, -1, 0, 1)), Err(Sl2zError::NotKodaira(_))));
    }

    #[test]
    fn elliptic_types_up_to_conjugacy() {
        let b = Mat2Z::new(5, 3, 3, 2);
        for t in [KodairaType::II, KodairaType::III, KodairaType::IV, KodairaType::IIStar, KodairaType::IIIStar, KodairaType::IVStar] {
            let m = b.conjugate(&t.normal_form());
            let w = kodaira_classify(&m).unwrap();
            assert_eq!(w.kodaira, t);
            assert_eq!(w.conjugator.conjugate(&t.normal_form()), m);
        }
    }

    #[test]
    fn pl_decomposition_example() {
        let t = pl_decompose(&Mat2Z::new(7, 9, -4, -5)).unwrap();
        assert_eq!(t.d, [3, -2]);
        assert_eq!(t.m, [2, 3]);
        assert!(t.is_simple());
    }
}
