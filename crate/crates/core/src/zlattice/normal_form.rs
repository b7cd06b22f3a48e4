//! Hermite and Smith normal forms with unimodular transforms.

use rug::Integer;

use super::lll::lll_reduce_rows;
use super::matrix::IntMatrix;

/// Row operations shared by the echelon and Smith routines; keeps `u` in sync.
struct RowOps<'a> {
    a: &'a mut IntMatrix,
    u: &'a mut IntMatrix,
}

impl RowOps<'_> {
    fn swap(&mut self, i: usize, j: usize) {
        self.a.swap_rows(i, j);
        self.u.swap_rows(i, j);
    }

    /// row_i -= q row_j
    fn axpy(&mut self, i: usize, j: usize, q: &Integer) {
        for m in [&mut *self.a, &mut *self.u] {
            for c in 0..m.ncols() {
                let t = Integer::from(q * &m[(j, c)]);
                m[(i, c)] -= t;
            }
        }
    }

    fn negate(&mut self, i: usize) {
        for m in [&mut *self.a, &mut *self.u] {
            for c in 0..m.ncols() {
                let v = std::mem::take(&mut m[(i, c)]);
                m[(i, c)] = -v;
            }
        }
    }
}

/// Hermite normal form by rows: returns `(H, U, rank)` with `U A = H`, `U` unimodular,
/// `H` in reduced row echelon form with positive pivots and zero rows last.
pub fn hermite_normal_form(a: &IntMatrix) -> (IntMatrix, IntMatrix, usize) {
    let mut h = a.clone();
    let mut u = IntMatrix::identity(a.nrows());
    let mut pivots = Vec::new();
    {
        let mut ops = RowOps { a: &mut h, u: &mut u };
        let mut r = 0;
        for c in 0..ops.a.ncols() {
            if r == ops.a.nrows() {
                break;
            }
            loop {
                // Smallest non-zero entry in column c at or below row r.
                let best = (r..ops.a.nrows())
                    .filter(|&i| ops.a[(i, c)] != 0)
                    .min_by(|&i, &j| ops.a[(i, c)].cmp_abs(&ops.a[(j, c)]));
                let Some(p) = best else { break };
                ops.swap(r, p);
                let mut done = true;
                for i in r + 1..ops.a.nrows() {
                    if ops.a[(i, c)] != 0 {
                        let q = floor_div(&ops.a[(i, c)], &ops.a[(r, c)]);
                        ops.axpy(i, r, &q);
                        if ops.a[(i, c)] != 0 {
                            done = false;
                        }
                    }
                }
                if done {
                    break;
                }
            }
            if ops.a[(r, c)] == 0 {
                continue;
            }
            if ops.a[(r, c)] < 0 {
                ops.negate(r);
            }
            for i in 0..r {
                let q = floor_div(&ops.a[(i, c)], &ops.a[(r, c)]);
                if q != 0 {
                    ops.axpy(i, r, &q);
                }
            }
            pivots.push(c);
            r += 1;
        }
    }
    let rank = pivots.len();
    (h, u, rank)
}

fn floor_div(a: &Integer, b: &Integer) -> Integer {
    let (q, _) = a.div_rem_floor_ref(b).into();
    q
}

/// Saturated basis of the right kernel `{x : A x = 0}` as columns, LLL-reduced.
pub fn kernel_basis(a: &IntMatrix) -> IntMatrix {
    let n = a.ncols();
    let (_, u, rank) = hermite_normal_form(&a.transpose());
    let rows: Vec<Vec<Integer>> = (rank..n).map(|i| u.row(i).to_vec()).collect();
    if rows.is_empty() {
        return IntMatrix::zeros(n, 0);
    }
    let (red, _) = lll_reduce_rows(&rows, (99, 100));
    IntMatrix::from_cols(n, &red)
}

/// Canonical basis (HNF rows, zero rows dropped) of the lattice spanned by `vectors`.
pub fn lattice_hnf(vectors: &[Vec<Integer>], dim: usize) -> IntMatrix {
    if vectors.is_empty() {
        return IntMatrix::zeros(0, dim);
    }
    let (h, _, rank) = hermite_normal_form(&IntMatrix::from_rows(vectors.to_vec()));
    h.select_rows(&(0..rank).collect::<Vec<_>>())
}

/// Smith normal form: `(U, D, V)` with `U A V = D` diagonal, `d_1 | d_2 | ..`, `d_i >= 0`.
pub fn smith_normal_form(a: &IntMatrix) -> (IntMatrix, IntMatrix, IntMatrix) {
    let (m, n) = (a.nrows(), a.ncols());
    let mut d = a.clone();
    let mut u = IntMatrix::identity(m);
    let mut v = IntMatrix::identity(n);
    for t in 0..m.min(n) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    if d[(i, j)] != 0 && best.map_or(true, |(bi, bj)| d[(i, j)].cmp_abs(&d[(bi, bj)]).is_lt()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else { break };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);
            let mut clean = true;
            for i in t + 1..m {
                if d[(i, t)] != 0 {
                    let q = floor_div(&d[(i, t)], &d[(t, t)]);
                    RowOps { a: &mut d, u: &mut u }.axpy(i, t, &q);
                    clean &= d[(i, t)] == 0;
                }
            }
            for j in t + 1..n {
                if d[(t, j)] != 0 {
                    let q = floor_div(&d[(t, j)], &d[(t, t)]);
                    col_axpy(&mut d, &mut v, j, t, &q);
                    clean &= d[(t, j)] == 0;
                }
            }
            if !clean {
                continue;
            }
            // Divisibility: fold an offending row into row t and repeat.
            let bad = (t + 1..m).find(|&i| (t + 1..n).any(|j| !d[(i, j)].is_divisible(&d[(t, t)])));
            match bad {
                Some(i) => {
                    let one = Integer::from(-1);
                    RowOps { a: &mut d, u: &mut u }.axpy(t, i, &one);
                }
                None => break,
            }
        }
        if d[(t, t)] < 0 {
            RowOps { a: &mut d, u: &mut u }.negate(t);
        }
    }
    (u, d, v)
}

/// col_j -= q col_t on both `a` and `v`.
fn col_axpy(a: &mut IntMatrix, v: &mut IntMatrix, j: usize, t: usize, q: &Integer) {
    for m in [a, v] {
        for r in 0..m.nrows() {
            let s = Integer::from(q * &m[(r, t)]);
            m[(r, j)] -= s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_i64(rows)
    }

    #[test]
    fn snf_of_small_matrix() {
        let a = m(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        let (u, d, v) = smith_normal_form(&a);
        assert_eq!(u.mul(&a).mul(&v), d);
        let diag: Vec<Integer> = (0..3).map(|i| d[(i, i)].clone()).collect();
        assert_eq!(diag, vec![Integer::from(2), Integer::from(6), Integer::from(12)]);
        assert_eq!(u.det().abs(), 1);
        assert_eq!(v.det().abs(), 1);
    }

    #[test]
    fn hnf_transform_and_kernel() {
        let a = m(&[vec![3, 6, 9, 2], vec![1, 2, 3, 4]]);
        let (h, u, rank) = hermite_normal_form(&a);
        assert_eq!(rank, 2);
        assert_eq!(u.mul(&a), h);
        let k = kernel_basis(&a);
        assert_eq!(k.ncols(), 2);
        assert!(a.mul(&k).is_zero());
    }
}
