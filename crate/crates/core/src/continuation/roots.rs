//! All complex roots of a squarefree rational polynomial.

use rug::{Complex, Float};

use super::ContinuationError;
use crate::poly::QPoly;

const ABERTH_PREC: u32 = 192;

/// Horner evaluation of `p` and `p'` at `z`.
pub fn eval_with_derivative(coeffs: &[Complex], z: &Complex) -> (Complex, Complex) {
    let prec = z.prec();
    let mut p = Complex::new(prec);
    let mut dp = Complex::new(prec);
    for c in coeffs.iter().rev() {
        dp *= z;
        dp += &p;
        p *= z;
        p += c;
    }
    (p, dp)
}

pub fn complex_coeffs(p: &QPoly, prec: u32) -> Vec<Complex> {
    p.coeffs().iter().map(|c| Complex::with_val(prec, c)).collect()
}

fn abs_f64(z: &Complex) -> f64 {
    z.clone().abs().real().to_f64()
}

/// Roots to `prec` bits, sorted by real part then imaginary part.
pub fn numeric_roots(p: &QPoly, prec: u32) -> Result<Vec<Complex>, ContinuationError> {
    let n = p.degree();
    if n < 1 {
        return Ok(Vec::new());
    }
    let n = n as usize;
    if p.gcd(&p.derivative()).degree() > 0 {
        return Err(ContinuationError::NotSquarefree);
    }
    let lo = ABERTH_PREC.max(64);
    let c = complex_coeffs(p, lo);
    // Fujiwara-style radius for the initial circle.
    let lead = abs_f64(&c[n]);
    let radius = (0..n)
        .map(|i| {
            let a = abs_f64(&c[i]) / lead;
            if a == 0.0 { 0.0 } else { a.powf(1.0 / (n - i) as f64) }
        })
        .fold(0.0f64, f64::max)
        .max(1e-3)
        * 2.0;
    let mut z: Vec<Complex> = (0..n)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex::with_val(lo, (radius * th.cos(), radius * th.sin()))
        })
        .collect();
    let tol = Float::with_val(lo, Float::i_exp(1, -(lo as i32) + 16));
    let mut converged = false;
    for _ in 0..2000 {
        let mut worst = Float::new(lo);
        for k in 0..n {
            let (pv, dpv) = eval_with_derivative(&c, &z[k]);
            if pv.is_zero() {
                continue;
            }
            let w = Complex::with_val(lo, &pv / &dpv);
            let mut s = Complex::new(lo);
            for j in 0..n {
                if j != k {
                    let d = Complex::with_val(lo, &z[k] - &z[j]);
                    s += d.recip();
                }
            }
            let denom = Complex::with_val(lo, 1) - Complex::with_val(lo, &w * &s);
            let step = Complex::with_val(lo, &w / &denom);
            let scale = Float::with_val(lo, z[k].abs_ref()).max(&Float::with_val(lo, 1));
            let rel = Float::with_val(lo, step.abs_ref()) / scale;
            if rel > worst {
                worst = rel;
            }
            z[k] -= step;
        }
        if worst < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(ContinuationError::RootsFailed);
    }
    let full = complex_coeffs(p, prec + 32);
    let mut out: Vec<Complex> = z.iter().map(|zk| newton_polish(&full, zk, prec)).collect::<Result<_, _>>()?;
    out.sort_by(|a, b| {
        a.real()
            .partial_cmp(b.real())
            .unwrap()
            .then(a.imag().partial_cmp(b.imag()).unwrap())
    });
    for w in out.windows(2) {
        if Complex::with_val(prec, &w[0] - &w[1]).abs().real().is_zero() {
            return Err(ContinuationError::NotSquarefree);
        }
    }
    Ok(out.into_iter().map(|z| Complex::with_val(prec, z)).collect())
}

/// Newton iteration at `prec + 32` bits until the correction is below `2^-prec` relative.
pub fn newton_polish(coeffs: &[Complex], z0: &Complex, prec: u32) -> Result<Complex, ContinuationError> {
    let wp = prec + 32;
    let mut z = Complex::with_val(wp, z0);
    let tol = Float::with_val(wp, Float::i_exp(1, -(prec as i32)));
    for _ in 0..200 {
        let (pv, dpv) = eval_with_derivative(coeffs, &z);
        if pv.is_zero() {
            return Ok(z);
        }
        if dpv.is_zero() {
            return Err(ContinuationError::NotSquarefree);
        }
        let step = Complex::with_val(wp, &pv / &dpv);
        z -= &step;
        let scale = Float::with_val(wp, z.abs_ref()).max(&Float::with_val(wp, 1));
        if (Float::with_val(wp, step.abs_ref()) / scale) < tol {
            return Ok(z);
        }
    }
    Err(ContinuationError::RootsFailed)
}

/// Multiplicity of `z` as a root of `p`, given `p`'s squarefree decomposition: the
/// factor that is smallest at `z` relative to its size.
pub fn multiplicity_at(decomposition: &[(QPoly, u32)], z: &Complex) -> u32 {
    let prec = z.prec().0;
    let mut best = (f64::INFINITY, 0);
    for (f, m) in decomposition {
        let c = complex_coeffs(f, prec);
        let (v, dv) = eval_with_derivative(&c, z);
        // Newton step length estimates the distance to the nearest root of this factor.
        let d = if dv.is_zero() { f64::INFINITY } else { Complex::with_val(prec, &v / &dv).abs().real().to_f64() };
        if d < best.0 {
            best = (d, *m);
        }
    }
    best.1
}
