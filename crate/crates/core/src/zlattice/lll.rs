//! Exact integral LLL (all Gram-Schmidt data kept as integers, no rounding error).

use rug::Integer;

use super::matrix::dot_int;

/// LLL-reduce linearly independent row vectors with parameter `delta = num/den`.
/// Returns the reduced rows and the unimodular transform `T` (as rows) with
/// `reduced = T * input`.
pub fn lll_reduce_rows(rows: &[Vec<Integer>], delta: (u32, u32)) -> (Vec<Vec<Integer>>, Vec<Vec<Integer>>) {
    let n = rows.len();
    let mut b: Vec<Vec<Integer>> = rows.to_vec();
    let mut t: Vec<Vec<Integer>> = (0..n)
        .map(|i| (0..n).map(|j| Integer::from(u32::from(i == j))).collect())
        .collect();
    if n == 0 {
        return (b, t);
    }
    let (dn, dd) = (Integer::from(delta.0), Integer::from(delta.1));
    // d[i] = Gram determinant of the first i vectors; lam[k][j] = d[j+1] mu_{k,j}.
    let mut d = vec![Integer::from(1); n + 1];
    let mut lam = vec![vec![Integer::new(); n]; n];
    d[1] = dot_int(&b[0], &b[0]);
    assert!(d[1] != 0, "LLL input contains a zero vector");
    let mut k = 1usize;
    let mut kmax = 0usize;
    while k < n {
        if k > kmax {
            kmax = k;
            for j in 0..=k {
                let mut u = dot_int(&b[k], &b[j]);
                for i in 0..j {
                    u = (Integer::from(&d[i + 1] * &u) - Integer::from(&lam[k][i] * &lam[j][i])).div_exact(&d[i]);
                }
                if j < k {
                    lam[k][j] = u;
                } else {
                    assert!(u != 0, "LLL input vectors are linearly dependent");
                    d[k + 1] = u;
                }
            }
        }
        loop {
            reduce(k, k - 1, &mut b, &mut t, &mut lam, &d);
            // Swap when dd * d_k * d_{k-2} < dn * d_{k-1}^2 - dd * lam^2 (1-based indices).
            let lhs = Integer::from(&dd * &d[k + 1]) * &d[k - 1];
            let rhs = Integer::from(&dn * &d[k]) * &d[k] - Integer::from(&dd * &lam[k][k - 1]) * &lam[k][k - 1];
            if lhs < rhs {
                swap(k, kmax, &mut b, &mut t, &mut lam, &mut d);
                if k > 1 {
                    k -= 1;
                }
            } else {
                for l in (0..k - 1).rev() {
                    reduce(k, l, &mut b, &mut t, &mut lam, &d);
                }
                k += 1;
                break;
            }
        }
    }
    (b, t)
}

fn reduce(k: usize, l: usize, b: &mut [Vec<Integer>], t: &mut [Vec<Integer>], lam: &mut [Vec<Integer>], d: &[Integer]) {
    let two_lam = Integer::from(&lam[k][l] * 2u32);
    if two_lam.cmp_abs(&d[l + 1]).is_gt() {
        // q = round(lam / d_l)
        let num = Integer::from(&two_lam + &d[l + 1]);
        let den = Integer::from(&d[l + 1] * 2u32);
        let (q, _) = num.div_rem_floor(den);
        for (bk, bl) in pair_mut(b, k, l) {
            *bk -= Integer::from(&q * &*bl);
        }
        for (tk, tl) in pair_mut(t, k, l) {
            *tk -= Integer::from(&q * &*tl);
        }
        lam[k][l] -= Integer::from(&q * &d[l + 1]);
        for i in 0..l {
            let s = Integer::from(&q * &lam[l][i]);
            lam[k][i] -= s;
        }
    }
}

fn pair_mut(v: &mut [Vec<Integer>], k: usize, l: usize) -> impl Iterator<Item = (&mut Integer, &Integer)> {
    debug_assert!(l < k);
    let (lo, hi) = v.split_at_mut(k);
    hi[0].iter_mut().zip(lo[l].iter())
}

fn swap(k: usize, kmax: usize, b: &mut [Vec<Integer>], t: &mut [Vec<Integer>], lam: &mut [Vec<Integer>], d: &mut [Integer]) {
    b.swap(k, k - 1);
    t.swap(k, k - 1);
    for j in 0..k - 1 {
        let tmp = std::mem::take(&mut lam[k][j]);
        lam[k][j] = std::mem::replace(&mut lam[k - 1][j], tmp);
    }
    let l = lam[k][k - 1].clone();
    let bb = (Integer::from(&d[k - 1] * &d[k + 1]) + Integer::from(&l * &l)).div_exact(&d[k]);
    for i in k + 1..=kmax {
        let ti = lam[i][k].clone();
        lam[i][k] = (Integer::from(&d[k + 1] * &lam[i][k - 1]) - Integer::from(&l * &ti)).div_exact(&d[k]);
        lam[i][k - 1] = (Integer::from(&bb * &ti) + Integer::from(&l * &lam[i][k])).div_exact(&d[k + 1]);
    }
    d[k] = bb;
}
