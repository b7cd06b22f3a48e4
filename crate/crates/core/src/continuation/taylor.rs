//! Taylor-series transport of solutions of `a y'' + b y' + c y = 0` along polylines.

use rug::ops::Pow;
use rug::{Assign, Complex, Float};

use super::paths::Pt;
use super::ContinuationError;
use crate::griffiths_dwork::DiffOperator;

/// A 2x2 complex matrix, row major.
pub type Mat2C = [[Complex; 2]; 2];

pub fn mat2_identity(prec: u32) -> Mat2C {
    [[Complex::with_val(prec, 1), Complex::new(prec)], [Complex::new(prec), Complex::with_val(prec, 1)]]
}

pub fn mat2_mul(a: &Mat2C, b: &Mat2C) -> Mat2C {
    let prec = a[0][0].prec().0;
    let e = |i: usize, j: usize| Complex::with_val(prec, &a[i][0] * &b[0][j]) + Complex::with_val(prec, &a[i][1] * &b[1][j]);
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

pub fn mat2_det(a: &Mat2C) -> Complex {
    let prec = a[0][0].prec().0;
    Complex::with_val(prec, &a[0][0] * &a[1][1]) - Complex::with_val(prec, &a[0][1] * &a[1][0])
}

pub fn mat2_inverse(a: &Mat2C) -> Mat2C {
    let prec = a[0][0].prec().0;
    let d = mat2_det(a);
    let q = |z: &Complex| Complex::with_val(prec, z / &d);
    [[q(&a[1][1]), -q(&a[0][1])], [-q(&a[1][0]), q(&a[0][0])]]
}

/// Largest entry modulus of `a - b`.
pub fn mat2_distance(a: &Mat2C, b: &Mat2C) -> Float {
    let prec = a[0][0].prec().0;
    let mut m = Float::new(prec);
    for i in 0..2 {
        for j in 0..2 {
            let d = Float::with_val(prec, Complex::with_val(prec, &a[i][j] - &b[i][j]).abs_ref());
            if d > m {
                m = d;
            }
        }
    }
    m
}

/// `scale * prod (t - z_j)^{e_j}`: the rational functions multiplying `Res(1/P_t)` in
/// holomorphic 2-forms.
#[derive(Debug, Clone)]
pub struct FactoredFunction {
    pub scale: Complex,
    pub factors: Vec<(Complex, i64)>,
}

impl FactoredFunction {
    pub fn eval(&self, z: &Complex) -> Complex {
        let prec = z.prec().0;
        let mut v = Complex::with_val(prec, &self.scale);
        for (p, e) in &self.factors {
            let d = Complex::with_val(prec, z - p);
            v *= d.pow(*e as i32);
        }
        v
    }

    /// Points where the function may be singular.
    pub fn poles(&self) -> impl Iterator<Item = &Complex> {
        self.factors.iter().filter(|(_, e)| *e < 0).map(|(p, _)| p)
    }

    /// `f(z0 + h) = N(h) / D(h)` with `D` collecting the negative powers.
    fn local_fraction(&self, z0: &Complex) -> (Vec<Complex>, Vec<Complex>) {
        let prec = z0.prec().0;
        let mut num = vec![Complex::with_val(prec, &self.scale)];
        let mut den = vec![Complex::with_val(prec, 1)];
        for (p, e) in &self.factors {
            let d = Complex::with_val(prec, z0 - p);
            let target = if *e > 0 { &mut num } else { &mut den };
            for _ in 0..e.unsigned_abs() {
                *target = mul_linear(target, &d);
            }
        }
        (num, den)
    }
}

/// `p(h) * (d + h)`.
fn mul_linear(p: &[Complex], d: &Complex) -> Vec<Complex> {
    let prec = d.prec().0;
    let mut out = vec![Complex::new(prec); p.len() + 1];
    for (k, c) in p.iter().enumerate() {
        out[k] += Complex::with_val(prec, c * d);
        out[k + 1] += c;
    }
    out
}

/// Taylor coefficients of `p(z0 + h)`.
pub(crate) fn taylor_shift(p: &[Complex], z0: &Complex) -> Vec<Complex> {
    let mut q = p.to_vec();
    let n = q.len();
    for i in 0..n.saturating_sub(1) {
        for j in (i..n - 1).rev() {
            let t = Complex::with_val(z0.prec().0, z0 * &q[j + 1]);
            q[j] += t;
        }
    }
    q
}

fn log2_abs(z: &Complex) -> f64 {
    let e = |x: &Float| if x.is_zero() { f64::NEG_INFINITY } else { x.get_exp().map_or(f64::NEG_INFINITY, |e| e as f64) };
    e(z.real()).max(e(z.imag()))
}

/// Numerical form of an order-2 operator together with the points it must avoid.
#[derive(Debug, Clone)]
pub struct NumOperator {
    /// Working precision in bits.
    pub prec: u32,
    /// Requested accuracy in bits.
    pub target: u32,
    coeffs: [Vec<Complex>; 3],
    pub obstacles: Vec<Pt>,
    /// Step length as a fraction of the distance to the nearest obstacle.
    pub sigma: f64,
    /// Refuse to step closer than this to an obstacle.
    pub min_clearance: f64,
}

/// Transport data along a path: state transition and accumulated integrals.
#[derive(Debug, Clone)]
pub struct Transport {
    pub matrix: Mat2C,
    /// `integrals[f][k] = int f(t) y_k(t) dt` where `y_k` starts with state `e_k`.
    pub integrals: Vec<[Complex; 2]>,
}

impl NumOperator {
    pub fn new(op: &DiffOperator, obstacles: Vec<Pt>, target: u32) -> Result<Self, ContinuationError> {
        if op.order() != 2 {
            return Err(ContinuationError::Order(op.order()));
        }
        let prec = target + super::guard_bits(target);
        let poly = |k: usize| op.coeffs[k].iter().map(|c| Complex::with_val(prec, c)).collect::<Vec<_>>();
        Ok(NumOperator { prec, target, coeffs: [poly(0), poly(1), poly(2)], obstacles, sigma: 0.5, min_clearance: 0.0 })
    }

    fn nearest(&self, z: Pt) -> f64 {
        self.obstacles.iter().map(|o| o.dist(z)).fold(f64::INFINITY, f64::min)
    }

    /// Local series at `z0` for the two unit initial states, evaluated at `h`; with the
    /// integrals of each form against each local solution over `[z0, z0 + h]`.
    fn step(&self, z0: &Complex, h: &Complex, forms: &[FactoredFunction]) -> Result<(Mat2C, Vec<[Complex; 2]>), ContinuationError> {
        let prec = self.prec;
        let sh: Vec<Vec<Complex>> = self.coeffs.iter().map(|p| taylor_shift(p, z0)).collect();
        let (c, b, a) = (&sh[0], &sh[1], &sh[2]);
        if a[0].is_zero() {
            return Err(ContinuationError::StepTooClose);
        }
        let a0inv = Complex::with_val(prec, a[0].recip_ref());
        let lh = Float::with_val(64, h.abs_ref()).to_f64().log2();
        let cap = 1_000_000;
        // y, Y1 = m y_m, Y2 = m (m-1) y_m for both solutions.
        let mut y: [Vec<Complex>; 2] = [vec![Complex::with_val(prec, 1), Complex::new(prec)], vec![Complex::new(prec), Complex::with_val(prec, 1)]];
        let mut y1: [Vec<Complex>; 2] = [vec![Complex::new(prec), Complex::new(prec)], vec![Complex::new(prec), Complex::with_val(prec, 1)]];
        let mut y2: [Vec<Complex>; 2] = [vec![Complex::new(prec), Complex::new(prec)], vec![Complex::new(prec), Complex::new(prec)]];
        // Integrals u = int f y: with f = N/D, D u' = N y; du[m] is the h^m coefficient of u'.
        let fractions: Vec<(Vec<Complex>, Vec<Complex>, Complex)> = forms
            .iter()
            .map(|f| {
                let (num, den) = f.local_fraction(z0);
                let d0inv = Complex::with_val(prec, den[0].recip_ref());
                (num, den, d0inv)
            })
            .collect();
        let mut du: Vec<[Vec<Complex>; 2]> = forms.iter().map(|_| [Vec::new(), Vec::new()]).collect();
        let mut acc = Complex::new(prec);
        let extend_integrals = |y: &[Vec<Complex>; 2], du: &mut Vec<[Vec<Complex>; 2]>, acc: &mut Complex| {
            for ((num, den, d0inv), d) in fractions.iter().zip(du.iter_mut()) {
                for s in 0..2 {
                    while d[s].len() < y[s].len() {
                        let m = d[s].len();
                        acc.assign(0);
                        for k in 0..num.len().min(m + 1) {
                            *acc += &num[k] * &y[s][m - k];
                        }
                        for k in 1..den.len().min(m + 1) {
                            *acc -= &den[k] * &d[s][m - k];
                        }
                        *acc *= d0inv;
                        d[s].push(acc.clone());
                    }
                }
            }
        };
        extend_integrals(&y, &mut du, &mut acc);
        let mut peak = [0.0f64, lh];
        let mut ipeak = vec![f64::NEG_INFINITY; forms.len()];
        let mut small_run = 0;
        let mut j = 0usize;
        loop {
            // Coefficient of h^j gives y_{j+2}.
            for s in 0..2 {
                acc.assign(0);
                for k in 1..a.len().min(j + 3) {
                    acc += &a[k] * &y2[s][j + 2 - k];
                }
                for k in 0..b.len().min(j + 2) {
                    acc += &b[k] * &y1[s][j + 1 - k];
                }
                for k in 0..c.len().min(j + 1) {
                    acc += &c[k] * &y[s][j - k];
                }
                acc *= &a0inv;
                let m = (j + 2) as u64;
                let v2 = Complex::with_val(prec, -&acc);
                let v = Complex::with_val(prec, &v2 / (m * (m - 1)));
                y1[s].push(Complex::with_val(prec, &v * m));
                y2[s].push(v2);
                y[s].push(v);
            }
            extend_integrals(&y, &mut du, &mut acc);
            let m = j + 2;
            let mut all_small = true;
            for s in 0..2 {
                let l = log2_abs(&y[s][m]) + m as f64 * lh;
                peak[s] = peak[s].max(l);
                if l > peak[s] - self.prec as f64 - 4.0 {
                    all_small = false;
                }
            }
            for (d, p) in du.iter().zip(ipeak.iter_mut()) {
                for dd in d {
                    let l = log2_abs(&dd[m]) + (m + 1) as f64 * lh;
                    *p = p.max(l);
                    if l > *p - self.prec as f64 - 4.0 {
                        all_small = false;
                    }
                }
            }
            small_run = if all_small { small_run + 1 } else { 0 };
            j += 1;
            if (small_run >= 3 && m >= 8) || m > cap {
                break;
            }
        }
        let n = y[0].len();
        // Values and derivatives at h by Horner.
        let mut t: Mat2C = mat2_identity(prec);
        for s in 0..2 {
            let mut v = Complex::new(prec);
            let mut dv = Complex::new(prec);
            for m in (0..n).rev() {
                v *= h;
                v += &y[s][m];
                if m >= 1 {
                    dv *= h;
                    dv += &y1[s][m];
                }
            }
            t[0][s] = v;
            t[1][s] = dv;
        }
        let ints = du
            .iter()
            .map(|d| {
                std::array::from_fn(|s| {
                    let mut total = Complex::new(prec);
                    for m in (0..n).rev() {
                        total *= h;
                        total += Complex::with_val(prec, &d[s][m] / (m as u32 + 1));
                    }
                    total * h
                })
            })
            .collect();
        Ok((t, ints))
    }

    /// Transport along a polyline, with integrals of `forms` against the transported solutions.
    pub fn transport(&self, path: &[Pt], forms: &[FactoredFunction]) -> Result<Transport, ContinuationError> {
        let prec = self.prec;
        let mut m = mat2_identity(prec);
        let mut integrals: Vec<[Complex; 2]> = forms.iter().map(|_| [Complex::new(prec), Complex::new(prec)]).collect();
        for w in path.windows(2) {
            let (p0, p1) = (w[0], w[1]);
            let len = p0.dist(p1);
            if len == 0.0 {
                continue;
            }
            let mut z = p0;
            loop {
                let r = self.nearest(z);
                if r <= self.min_clearance || r == 0.0 {
                    return Err(ContinuationError::StepTooClose);
                }
                let rem = z.dist(p1);
                let stepmax = self.sigma * r;
                let next = if rem <= stepmax { p1 } else { z.add(p1.sub(z).scale(stepmax / rem)) };
                let z0 = z.to_complex(prec);
                let h = Complex::with_val(prec, &next.to_complex(prec) - &z0);
                let (t, ints) = self.step(&z0, &h, forms)?;
                for (acc, loc) in integrals.iter_mut().zip(&ints) {
                    // Current solutions are y_k = sum_i m[i][k] (local solution i).
                    for k in 0..2 {
                        let add = Complex::with_val(prec, &loc[0] * &m[0][k]) + Complex::with_val(prec, &loc[1] * &m[1][k]);
                        acc[k] += add;
                    }
                }
                m = mat2_mul(&t, &m);
                z = next;
                if next == p1 {
                    break;
                }
            }
        }
        Ok(Transport { matrix: m, integrals })
    }

    pub fn transition_matrix(&self, path: &[Pt]) -> Result<Mat2C, ContinuationError> {
        Ok(self.transport(path, &[])?.matrix)
    }

    /// `a y'' + b y' + c y` for a state `(y, y')` and a supplied second derivative.
    pub fn residual(&self, z: &Complex, y: &Complex, dy: &Complex, ddy: &Complex) -> Complex {
        let prec = self.prec;
        let ev = |p: &[Complex]| p.iter().rev().fold(Complex::new(prec), |acc, c| Complex::with_val(prec, &acc * z) + c);
        Complex::with_val(prec, &ev(&self.coeffs[2]) * ddy) + Complex::with_val(prec, &ev(&self.coeffs[1]) * dy) + Complex::with_val(prec, &ev(&self.coeffs[0]) * y)
    }

    /// Second derivative forced by the equation.
    pub fn second_derivative(&self, z: &Complex, y: &Complex, dy: &Complex) -> Complex {
        let prec = self.prec;
        let ev = |p: &[Complex]| p.iter().rev().fold(Complex::new(prec), |acc, c| Complex::with_val(prec, &acc * z) + c);
        let num = Complex::with_val(prec, &ev(&self.coeffs[1]) * dy) + Complex::with_val(prec, &ev(&self.coeffs[0]) * y);
        -(num / ev(&self.coeffs[2]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::QPoly;

    #[test]
    fn quadrature_against_closed_form() {
        // y'' = 0 has solutions 1 and t; integrate them against 1/(t - 2) over [0, 1].
        let op = DiffOperator::from_rational(&[QPoly::zero(), QPoly::zero(), QPoly::from_i64(&[1])]);
        let num = NumOperator::new(&op, vec![Pt::new(2.0, 0.0)], 120).unwrap();
        let prec = num.prec;
        let f = FactoredFunction { scale: Complex::with_val(prec, 1), factors: vec![(Complex::with_val(prec, 2), -1)] };
        let tr = num.transport(&[Pt::new(0.0, 0.0), Pt::new(1.0, 0.0)], &[f]).unwrap();
        let ln2 = Float::with_val(prec, rug::float::Constant::Log2);
        let i1 = Float::with_val(prec, 1 - Float::with_val(prec, &ln2 * 2u32));
        let tol = Float::with_val(prec, Float::i_exp(1, -110));
        assert!(Float::with_val(prec, tr.integrals[0][0].real() + &ln2).abs() < tol);
        assert!(Float::with_val(prec, tr.integrals[0][1].real() - &i1).abs() < tol, "{}", tr.integrals[0][1]);
        // Transition matrix of y'' = 0 over a unit step.
        assert!(Float::with_val(prec, tr.matrix[0][1].real() - 1u32).abs() < tol);
    }

    #[test]
    fn reverse_path_cancels() {
        let op = DiffOperator::from_rational(&[QPoly::from_i64(&[1]), QPoly::from_i64(&[-4, 8]), QPoly::from_i64(&[0, -4, 4])]);
        let obstacles = vec![Pt::new(0.0, 0.0), Pt::new(1.0, 0.0)];
        let num = NumOperator::new(&op, obstacles, 100).unwrap();
        let prec = num.prec;
        let f = FactoredFunction { scale: Complex::with_val(prec, 1), factors: vec![(Complex::with_val(prec, 0), -1)] };
        let path = [Pt::new(0.5, -0.5), Pt::new(0.5, 0.5), Pt::new(-0.25, 0.25)];
        let rev: Vec<Pt> = path.iter().rev().copied().collect();
        let a = num.transport(&path, std::slice::from_ref(&f)).unwrap();
        let b = num.transport(&rev, &[f]).unwrap();
        let id = mat2_mul(&b.matrix, &a.matrix);
        assert!(mat2_distance(&id, &mat2_identity(prec)).get_exp().unwrap() < -90);
        // int over the reverse path of the continued solutions cancels the forward integral.
        for k in 0..2 {
            let back = Complex::with_val(prec, &b.integrals[0][0] * &a.matrix[0][k]) + Complex::with_val(prec, &b.integrals[0][1] * &a.matrix[1][k]);
            let s = Complex::with_val(prec, &a.integrals[0][k] + &back);
            assert!(Float::with_val(prec, s.abs_ref()).get_exp().unwrap_or(-1000) < -90);
        }
    }
}
