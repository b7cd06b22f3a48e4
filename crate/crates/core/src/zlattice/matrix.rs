//! Dense row-major matrices over `Integer` and `Rational`.

use std::fmt;
use std::ops::{Index, IndexMut};

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type IntMatrix = Matrix<Integer>;
pub type RatMatrix = Matrix<Rational>;

impl<T: fmt::Display> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}x{}]", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.data[i * self.cols + j].to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Clone + Default> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::default(); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    /// Build from column vectors of equal length `rows`.
    pub fn from_cols(rows: usize, cols: &[Vec<T>]) -> Self {
        Matrix::from_fn(rows, cols.len(), |i, j| cols[j][i].clone())
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn rows_vec(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn cols_vec(&self) -> Vec<Vec<T>> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// Columns `range` as a new matrix.
    pub fn select_cols(&self, idx: &[usize]) -> Self {
        Matrix::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])].clone())
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Matrix::from_fn(idx.len(), self.cols, |i, j| self[(idx[i], j)].clone())
    }

    /// `[self | other]`.
    pub fn hcat(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        Matrix::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                other[(i, j - self.cols)].clone()
            }
        })
    }

    /// `[self; other]`.
    pub fn vcat(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Matrix { rows: self.rows + other.rows, cols: self.cols, data }
    }

    pub fn map<S>(&self, f: impl Fn(&T) -> S) -> Matrix<S> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
}

macro_rules! ring_ops {
    ($t:ty) => {
        impl Matrix<$t> {
            pub fn identity(n: usize) -> Self {
                Matrix::from_fn(n, n, |i, j| <$t>::from(u32::from(i == j)))
            }

            pub fn mul(&self, o: &Self) -> Self {
                assert_eq!(self.cols, o.rows, "dimension mismatch in product");
                let mut out = Matrix::zeros(self.rows, o.cols);
                for i in 0..self.rows {
                    for k in 0..self.cols {
                        let x = &self[(i, k)];
                        if *x == 0 {
                            continue;
                        }
                        for j in 0..o.cols {
                            let p = <$t>::from(x * &o[(k, j)]);
                            out[(i, j)] += p;
                        }
                    }
                }
                out
            }

            pub fn mul_vec(&self, v: &[$t]) -> Vec<$t> {
                assert_eq!(self.cols, v.len());
                (0..self.rows)
                    .map(|i| {
                        let mut acc = <$t>::new();
                        for (a, b) in self.row(i).iter().zip(v) {
                            acc += <$t>::from(a * b);
                        }
                        acc
                    })
                    .collect()
            }

            pub fn add(&self, o: &Self) -> Self {
                assert!(self.rows == o.rows && self.cols == o.cols);
                Matrix::from_fn(self.rows, self.cols, |i, j| <$t>::from(&self[(i, j)] + &o[(i, j)]))
            }

            pub fn sub(&self, o: &Self) -> Self {
                assert!(self.rows == o.rows && self.cols == o.cols);
                Matrix::from_fn(self.rows, self.cols, |i, j| <$t>::from(&self[(i, j)] - &o[(i, j)]))
            }

            pub fn neg(&self) -> Self {
                self.map(|x| <$t>::from(-x))
            }

            pub fn is_zero(&self) -> bool {
                self.data.iter().all(|x| *x == 0)
            }

            pub fn is_symmetric(&self) -> bool {
                self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
            }

            /// `x^T self y`.
            pub fn bilinear(&self, x: &[$t], y: &[$t]) -> $t {
                let sy = self.mul_vec(y);
                let mut acc = <$t>::new();
                for (a, b) in x.iter().zip(&sy) {
                    acc += <$t>::from(a * b);
                }
                acc
            }
        }
    };
}

ring_ops!(Integer);
ring_ops!(Rational);

pub fn dot_int(a: &[Integer], b: &[Integer]) -> Integer {
    let mut acc = Integer::new();
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

impl IntMatrix {
    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| Integer::from(x)).collect()).collect())
    }

    pub fn to_rational(&self) -> RatMatrix {
        self.map(|x| Rational::from(x))
    }

    /// Determinant by fraction-free Bareiss elimination.
    pub fn det(&self) -> Integer {
        assert!(self.is_square());
        let n = self.rows;
        if n == 0 {
            return Integer::from(1);
        }
        let mut a = self.clone();
        let mut sign = 1;
        let mut prev = Integer::from(1);
        for k in 0..n - 1 {
            if a[(k, k)] == 0 {
                match (k + 1..n).find(|&i| a[(i, k)] != 0) {
                    Some(i) => {
                        a.swap_rows(i, k);
                        sign = -sign;
                    }
                    None => return Integer::new(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = Integer::from(&a[(i, j)] * &a[(k, k)]) - Integer::from(&a[(i, k)] * &a[(k, j)]);
                    a[(i, j)] = v.div_exact(&prev);
                }
            }
            prev = a[(k, k)].clone();
        }
        let d = a[(n - 1, n - 1)].clone();
        if sign < 0 {
            -d
        } else {
            d
        }
    }

    pub fn rank(&self) -> usize {
        self.to_rational().rank()
    }
}

impl RatMatrix {
    /// Reduced row echelon form; returns pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self[(i, c)] != 0) else { continue };
            self.swap_rows(p, r);
            let inv = Rational::from(1) / &self[(r, c)];
            for j in c..self.cols {
                self[(r, j)] *= &inv;
            }
            for i in 0..self.rows {
                if i != r && self[(i, c)] != 0 {
                    let f = self[(i, c)].clone();
                    for j in c..self.cols {
                        let t = Rational::from(&f * &self[(r, j)]);
                        self[(i, j)] -= t;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    pub fn det(&self) -> Rational {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Rational::from(1);
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| a[(i, c)] != 0) else { return Rational::new() };
            if p != c {
                a.swap_rows(p, c);
                det = -det;
            }
            det *= &a[(c, c)];
            let inv = Rational::from(1) / &a[(c, c)];
            for i in c + 1..n {
                if a[(i, c)] == 0 {
                    continue;
                }
                let f = Rational::from(&a[(i, c)] * &inv);
                for j in c..n {
                    let t = Rational::from(&f * &a[(c, j)]);
                    a[(i, j)] -= t;
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<RatMatrix> {
        assert!(self.is_square());
        let n = self.rows;
        let mut aug = self.hcat(&RatMatrix::identity(n));
        let piv = aug.rref();
        if piv.len() < n || piv[n - 1] != n - 1 {
            return None;
        }
        Some(Matrix::from_fn(n, n, |i, j| aug[(i, j + n)].clone()))
    }

    /// Some solution `x` of `self x = b`, or `None` when inconsistent.
    pub fn solve(&self, b: &[Rational]) -> Option<Vec<Rational>> {
        let bcol = Matrix::from_cols(self.rows, &[b.to_vec()]);
        let mut aug = self.hcat(&bcol);
        let piv = aug.rref();
        if piv.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Rational::new(); self.cols];
        for (r, &c) in piv.iter().enumerate() {
            x[c] = aug[(r, self.cols)].clone();
        }
        Some(x)
    }

    /// Rational basis of the right kernel.
    pub fn kernel(&self) -> Vec<Vec<Rational>> {
        let mut a = self.clone();
        let piv = a.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !piv.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Rational::new(); self.cols];
                v[f] = Rational::from(1);
                for (r, &c) in piv.iter().enumerate() {
                    v[c] = -a[(r, f)].clone();
                }
                v
            })
            .collect()
    }

    /// The integer matrix if every entry is integral.
    pub fn to_integer(&self) -> Option<IntMatrix> {
        if self.data.iter().all(|x| *x.denom() == 1) {
            Some(self.map(|x| x.numer().clone()))
        } else {
            None
        }
    }
}

/// Scale a rational vector to a primitive integer vector (same direction).
pub fn primitive_integer(v: &[Rational]) -> Vec<Integer> {
    let mut l = Integer::from(1);
    for x in v {
        l.lcm_mut(x.denom());
    }
    let mut out: Vec<Integer> = v.iter().map(|x| Integer::from(x.numer() * Integer::from(&l / x.denom()))).collect();
    let mut g = Integer::new();
    for x in &out {
        g.gcd_mut(x);
    }
    if g > 1 {
        for x in &mut out {
            x.div_exact_mut(&g);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bareiss_matches_rational() {
        let m = IntMatrix::from_i64(&[vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]]);
        assert_eq!(m.det(), 4);
        assert_eq!(m.to_rational().det(), 4);
        let s = IntMatrix::from_i64(&[vec![0, 1], vec![1, 0]]);
        assert_eq!(s.det(), -1);
    }

    #[test]
    fn inverse_and_solve() {
        let m = IntMatrix::from_i64(&[vec![2, 1], vec![1, 1]]).to_rational();
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), RatMatrix::identity(2));
        let x = m.solve(&[Rational::from(3), Rational::from(2)]).unwrap();
        assert_eq!(x, vec![Rational::from(1), Rational::from(1)]);
        let k = IntMatrix::from_i64(&[vec![1, 2, 3]]).to_rational().kernel();
        assert_eq!(k.len(), 2);
    }
}
