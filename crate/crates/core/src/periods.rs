//! Holomorphic 2-forms `f(t) omega_t ^ dt` read off the Picard-Fuchs operator, and their
//! periods on the homology basis.
//!
//! A form is `Z / W` with `W` the Wronskian and `Z` in the linear system of the divisor
//! built from the larger local exponent at each singular point.

use rug::{Complex, Float, Rational};
use thiserror::Error;

use crate::continuation::roots::{complex_coeffs, numeric_roots};
use crate::continuation::taylor::taylor_shift;
use crate::continuation::{ContinuationError, FactoredFunction, Mat2C, Transport};
use crate::griffiths_dwork::{CubicPencil, DiffOperator};
use crate::homology::{ExtensionCycle, SurfaceHomology};

/// Local exponents are rationals with denominator at most this.
pub const MAX_EXPONENT_DENOMINATOR: u32 = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PeriodsError {
    #[error("operator has order {0}, expected 2")]
    Order(usize),
    #[error("the Wronskian is not a rational function: {0}")]
    NonRationalWronskian(String),
    #[error("singular point {0} is irregular")]
    IrregularSingularity(String),
    #[error("local exponents at {point} are not rationals with denominator <= 12 (got {value})")]
    ExponentRecoveryFailure { point: String, value: String },
    #[error("local exponents at {point} disagree with the local monodromy of trace {trace}")]
    ExponentMonodromyMismatch { point: String, trace: i64 },
    #[error("found {found} holomorphic forms, but e/12 - 1 = {expected}")]
    GenusMismatch { found: usize, expected: i64 },
    #[error("fibre cycle does not return to itself along extension {0}")]
    OpenExtension(usize),
    #[error("loop index {0} out of range")]
    BadLoop(usize),
    #[error("change of basis matrix is singular")]
    SingularChangeOfBasis,
    #[error(transparent)]
    Continuation(#[from] ContinuationError),
}

/// Roots of the leading coefficient `a(t)`, sorted by real then imaginary part.
#[derive(Debug, Clone)]
pub struct SingularPoints {
    pub values: Vec<Complex>,
    pub multiplicities: Vec<u32>,
}

pub fn singular_points(op: &DiffOperator, prec: u32) -> Result<SingularPoints, PeriodsError> {
    let mut pts: Vec<(Complex, u32)> = Vec::new();
    for (f, m) in op.leading().squarefree_decomposition() {
        for r in numeric_roots(&f, prec)? {
            pts.push((r, m));
        }
    }
    pts.sort_by(|x, y| x.0.real().total_cmp(y.0.real()).then(x.0.imag().total_cmp(y.0.imag())));
    let (values, multiplicities) = pts.into_iter().unzip();
    Ok(SingularPoints { values, multiplicities })
}

fn describe(p: Option<&Complex>) -> String {
    p.map_or_else(|| "infinity".to_string(), |z| format!("{:.12}", z))
}

fn cabs(z: &Complex) -> Float {
    Float::with_val(z.prec().0, z.abs_ref())
}

/// Coefficients `(A, B, C)` of the indicial polynomial `A r^2 + B r + C`.
fn indicial(op: &DiffOperator, point: Option<&Complex>, multiplicity: u32, prec: u32, tol: &Float) -> Result<[Complex; 3], PeriodsError> {
    if op.order() != 2 {
        return Err(PeriodsError::Order(op.order()));
    }
    let coeff = |k: usize| complex_coeffs(&op.coefficient(k), prec);
    let (c, b, a) = (coeff(0), coeff(1), coeff(2));
    let get = |v: &[Complex], k: i64| if k < 0 { Complex::new(prec) } else { v.get(k as usize).cloned().unwrap_or_else(|| Complex::new(prec)) };
    match point {
        None => {
            let n = a.len() as i64 - 1;
            if b.len() as i64 - 1 > n - 1 || c.len() as i64 - 1 > n - 2 {
                return Err(PeriodsError::IrregularSingularity(describe(None)));
            }
            // y = t^-r: a_n r (r + 1) - b_{n-1} r + c_{n-2}.
            let an = get(&a, n);
            let bn = get(&b, n - 1);
            Ok([an.clone(), Complex::with_val(prec, &an - &bn), get(&c, n - 2)])
        }
        Some(p) => {
            let (a, b, c) = (taylor_shift(&a, p), taylor_shift(&b, p), taylor_shift(&c, p));
            let m = multiplicity as i64;
            let scale = a.iter().chain(&b).chain(&c).map(cabs).fold(Float::with_val(prec, 1), |x, y| x.max(&y));
            let small = |z: &Complex| cabs(z) <= Float::with_val(prec, &scale * tol);
            let regular = (0..m - 1).all(|k| small(&get(&b, k))) && (0..m - 2).all(|k| small(&get(&c, k)));
            if !regular {
                return Err(PeriodsError::IrregularSingularity(describe(Some(p))));
            }
            // y = (t - p)^r: alpha r (r - 1) + beta r + gamma.
            let alpha = get(&a, m);
            let beta = get(&b, m - 1);
            Ok([alpha.clone(), Complex::with_val(prec, &beta - &alpha), get(&c, m - 2)])
        }
    }
}

/// Nearest rational with denominator at most `MAX_EXPONENT_DENOMINATOR`.
fn nearest_small_rational(x: &Float) -> Rational {
    let mut best: Option<(Float, Rational)> = None;
    for q in 1..=MAX_EXPONENT_DENOMINATOR {
        let p = Float::with_val(x.prec(), x * q).round().to_integer().expect("finite exponent");
        let r = Rational::from((p, q));
        let err = Float::with_val(x.prec(), x - &r).abs();
        if best.as_ref().is_none_or(|b| err < b.0) {
            best = Some((err, r));
        }
    }
    best.expect("nonempty").1
}

/// The two local exponents `r <= s` at a root of `a(t)` (given with its multiplicity) or
/// at infinity (`point = None`), as exact rationals.
pub fn local_exponents(op: &DiffOperator, point: Option<&Complex>, multiplicity: u32, prec: u32, tol: &Float) -> Result<(Rational, Rational), PeriodsError> {
    let [qa, qb, qc] = indicial(op, point, multiplicity, prec, tol)?;
    if cabs(&qa) <= *tol {
        return Err(PeriodsError::IrregularSingularity(describe(point)));
    }
    let sum = -Complex::with_val(prec, &qb / &qa);
    let prod = Complex::with_val(prec, &qc / &qa);
    let disc = Complex::with_val(prec, sum.square_ref()) - Complex::with_val(prec, &prod * 4u32);
    let sq = disc.sqrt();
    let r1 = Complex::with_val(prec, &sum + &sq) / 2u32;
    let r2 = Complex::with_val(prec, &sum - &sq) / 2u32;
    let (e1, e2) = (nearest_small_rational(r1.real()), nearest_small_rational(r2.real()));
    // The rounded pair must reproduce the symmetric functions, which are well conditioned.
    let ok = cabs(&Complex::with_val(prec, &sum - Rational::from(&e1 + &e2))) <= *tol
        && cabs(&Complex::with_val(prec, &prod - Rational::from(&e1 * &e2))) <= *tol;
    if !ok {
        return Err(PeriodsError::ExponentRecoveryFailure { point: describe(point), value: format!("{:.20}, {:.20}", r1, r2) });
    }
    Ok(if e1 <= e2 { (e1, e2) } else { (e2, e1) })
}

/// Exponents of `W = prod (t - p)^{w_p}` with `W'/W = -b/a`, one per singular point.
pub fn wronskian(op: &DiffOperator, points: &SingularPoints, prec: u32, tol: &Float) -> Result<Vec<i64>, PeriodsError> {
    let (a, b) = (op.coefficient(2), op.coefficient(1));
    if !b.is_zero() && b.degree() >= a.degree() {
        return Err(PeriodsError::NonRationalWronskian("-b/a has a polynomial part".into()));
    }
    let mut out = Vec::new();
    for (p, &m) in points.values.iter().zip(&points.multiplicities) {
        let [alpha, shifted, _] = indicial(op, Some(p), m, prec, tol)?;
        // Residue of -b/a is -beta/alpha, and shifted = beta - alpha.
        let res = -(Complex::with_val(prec, &shifted / &alpha) + 1u32);
        let r = Float::with_val(prec, res.real().round_ref());
        let err = cabs(&Complex::with_val(prec, &res - &r));
        if err > *tol {
            return Err(PeriodsError::NonRationalWronskian(format!("residue {:.20} at {}", res, describe(Some(p)))));
        }
        out.push(r.to_integer().and_then(|i| i.to_i64()).expect("small residue"));
    }
    Ok(out)
}

fn check_monodromy(e: &(Rational, Rational), trace: Option<i64>, point: Option<&Complex>) -> Result<(), PeriodsError> {
    let angle = |q: &Rational| 2.0 * std::f64::consts::PI * q.to_f64();
    match trace {
        Some(tr) => {
            let re = angle(&e.0).cos() + angle(&e.1).cos();
            let im = angle(&e.0).sin() + angle(&e.1).sin();
            if (re - tr as f64).abs() > 1e-9 || im.abs() > 1e-9 {
                return Err(PeriodsError::ExponentMonodromyMismatch { point: describe(point), trace: tr });
            }
        }
        None => {
            // Smooth fibre: trivial monodromy forces integral exponents.
            if *e.0.denom() != 1 || *e.1.denom() != 1 {
                return Err(PeriodsError::ExponentMonodromyMismatch { point: describe(point), trace: 2 });
            }
        }
    }
    Ok(())
}

/// Basis `f_k = t^k Z_0 / W` of the holomorphic forms, with the data it was built from.
#[derive(Debug, Clone)]
pub struct HolomorphicFormBasis {
    pub points: SingularPoints,
    pub exponents: Vec<(Rational, Rational)>,
    pub infinity_exponents: (Rational, Rational),
    pub wronskian: Vec<i64>,
    /// Order of the divisor at each singular point.
    pub divisor: Vec<i64>,
    pub divisor_infinity: i64,
    pub forms: Vec<FactoredFunction>,
}

/// Divisor orders `(finite, infinity)` from the larger local exponent `s`.
pub fn stiller_divisor(exponents: &[(Rational, Rational)], infinity: &(Rational, Rational)) -> (Vec<i64>, i64) {
    let fl = |q: &Rational| q.clone().floor().numer().to_i64().expect("small exponent");
    (exponents.iter().map(|e| 1 - fl(&e.1)).collect(), -fl(&infinity.1) - 3)
}

/// Polynomial degrees `k` with `t^k Z_0` spanning the linear system, where
/// `Z_0 = prod (t - p)^{-ord_p}`: everything of degree at most `deg(divisor)`.
pub fn linear_system_basis(divisor: &[i64], divisor_infinity: i64) -> Vec<u32> {
    let deg: i64 = divisor.iter().sum::<i64>() + divisor_infinity;
    (0..=deg).map(|k| k as u32).collect()
}

impl HolomorphicFormBasis {
    pub fn compute(op: &DiffOperator, points: SingularPoints, prec: u32, target_bits: u32) -> Result<Self, PeriodsError> {
        let tol = Float::with_val(prec, Float::i_exp(1, -((target_bits / 2) as i32)));
        let wronskian = wronskian(op, &points, prec, &tol)?;
        let mut exponents = Vec::new();
        for (p, &m) in points.values.iter().zip(&points.multiplicities) {
            exponents.push(local_exponents(op, Some(p), m, prec, &tol)?);
        }
        let infinity_exponents = local_exponents(op, None, 0, prec, &tol)?;
        let (divisor, divisor_infinity) = stiller_divisor(&exponents, &infinity_exponents);
        let forms = linear_system_basis(&divisor, divisor_infinity)
            .into_iter()
            .map(|k| {
                let mut factors: Vec<(Complex, i64)> = points
                    .values
                    .iter()
                    .zip(divisor.iter().zip(&wronskian))
                    .map(|(p, (o, w))| (p.clone(), -o - w))
                    .filter(|(_, e)| *e != 0)
                    .collect();
                if k > 0 {
                    factors.push((Complex::new(prec), k as i64));
                }
                FactoredFunction { scale: Complex::with_val(prec, 1), factors }
            })
            .collect();
        Ok(HolomorphicFormBasis { points, exponents, infinity_exponents, wronskian, divisor, divisor_infinity, forms })
    }

    /// Compare exponents with the integral monodromy: `traces[i]` is the trace of the local
    /// monodromy at singular point `i`, `None` when the fibre there is smooth.
    pub fn check_monodromy(&self, traces: &[Option<i64>], infinity_trace: Option<i64>) -> Result<(), PeriodsError> {
        for (i, (e, p)) in self.exponents.iter().zip(&self.points.values).enumerate() {
            check_monodromy(e, traces.get(i).copied().flatten(), Some(p))?;
        }
        check_monodromy(&self.infinity_exponents, infinity_trace, None)
    }

    pub fn dimension(&self) -> usize {
        self.forms.len()
    }

    /// The number of forms must be the geometric genus `e/12 - 1`.
    pub fn verify_genus(&self, euler: usize) -> Result<(), PeriodsError> {
        let expected = euler as i64 / 12 - 1;
        if self.dimension() as i64 != expected {
            return Err(PeriodsError::GenusMismatch { found: self.dimension(), expected });
        }
        Ok(())
    }
}

/// Holomorphic periods, rows indexed by forms and columns by homology classes.
#[derive(Debug, Clone)]
pub struct PeriodMatrix {
    pub values: Vec<Vec<Complex>>,
    /// Heuristic log2 of the absolute error of each entry.
    pub error_log2: Vec<Vec<f64>>,
}

impl PeriodMatrix {
    pub fn rows(&self) -> usize {
        self.values.len()
    }

    pub fn cols(&self) -> usize {
        self.values.first().map_or(0, |r| r.len())
    }

    /// Decimal digits believed correct, from the worst entry.
    pub fn digits(&self) -> u32 {
        let worst = self.error_log2.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
        if worst == f64::NEG_INFINITY {
            return u32::MAX;
        }
        (-worst / std::f64::consts::LOG2_10).max(0.0).floor() as u32
    }
}

fn log2_of(x: &Float) -> f64 {
    if x.is_zero() {
        f64::NEG_INFINITY
    } else {
        x.get_exp().map_or(f64::NEG_INFINITY, |e| e as f64)
    }
}

fn apply(m: &Mat2C, x: &[Complex; 2]) -> [Complex; 2] {
    let prec = x[0].prec().0;
    std::array::from_fn(|i| Complex::with_val(prec, &m[i][0] * &x[0]) + Complex::with_val(prec, &m[i][1] * &x[1]))
}

/// Walks fibre states along loop words, accumulating `int f y dt` for every form.
struct Walker<'a> {
    transports: &'a [Transport],
    inverses: Vec<Mat2C>,
    state: [Complex; 2],
    totals: Vec<Complex>,
}

impl Walker<'_> {
    fn pair(&self, k: usize, f: usize, x: &[Complex; 2]) -> Complex {
        let i = &self.transports[k].integrals[f];
        let prec = x[0].prec().0;
        Complex::with_val(prec, &i[0] * &x[0]) + Complex::with_val(prec, &i[1] * &x[1])
    }

    fn forward(&mut self, k: usize) {
        for f in 0..self.totals.len() {
            let v = self.pair(k, f, &self.state);
            self.totals[f] += v;
        }
        self.state = apply(&self.transports[k].matrix, &self.state);
    }

    fn backward(&mut self, k: usize) {
        self.state = apply(&self.inverses[k], &self.state);
        for f in 0..self.totals.len() {
            let v = self.pair(k, f, &self.state);
            self.totals[f] -= v;
        }
    }

    /// Loop `r` (one past the finite loops) is the loop around infinity,
    /// `l_inf = (l_r .. l_1)^-1`.
    fn letter(&mut self, index: usize, inverse: bool) -> Result<(), PeriodsError> {
        let r = self.transports.len();
        match (index.cmp(&r), inverse) {
            (std::cmp::Ordering::Less, false) => self.forward(index),
            (std::cmp::Ordering::Less, true) => self.backward(index),
            (std::cmp::Ordering::Equal, false) => (0..r).rev().for_each(|k| self.backward(k)),
            (std::cmp::Ordering::Equal, true) => (0..r).for_each(|k| self.forward(k)),
            (std::cmp::Ordering::Greater, _) => return Err(PeriodsError::BadLoop(index)),
        }
        Ok(())
    }
}

/// Periods `int_{tau_w(gamma)} f omega` of extension cycles: `[form][extension]`, with error
/// estimates. `basis` holds the fibre states of the symplectic basis at the basepoint.
pub fn extension_periods(
    transports: &[Transport],
    basis: &Mat2C,
    extensions: &[ExtensionCycle],
    nforms: usize,
    target_bits: u32,
) -> Result<(Vec<Vec<Complex>>, Vec<Vec<f64>>), PeriodsError> {
    let prec = basis[0][0].prec().0;
    let inverses: Vec<Mat2C> = transports.iter().map(|t| crate::continuation::taylor::mat2_inverse(&t.matrix)).collect();
    let mut values = vec![Vec::new(); nforms];
    let mut errors = vec![Vec::new(); nforms];
    for (e, ext) in extensions.iter().enumerate() {
        let g = [Complex::with_val(prec, ext.gamma[0]), Complex::with_val(prec, ext.gamma[1])];
        let start = apply(basis, &g);
        let mut w = Walker { transports, inverses: inverses.clone(), state: start.clone(), totals: vec![Complex::new(prec); nforms] };
        for l in &ext.word {
            w.letter(l.index, l.inverse)?;
        }
        // Closed cycles come back to the same fibre class.
        let gap = cabs(&Complex::with_val(prec, &w.state[0] - &start[0])) + cabs(&Complex::with_val(prec, &w.state[1] - &start[1]));
        let size = cabs(&start[0]) + cabs(&start[1]);
        let rel = log2_of(&gap) - log2_of(&size);
        if rel > -((target_bits / 2) as f64) {
            return Err(PeriodsError::OpenExtension(e));
        }
        let rel = rel.max(-(target_bits as f64));
        for (f, v) in w.totals.into_iter().enumerate() {
            errors[f].push(rel + log2_of(&cabs(&v)).max(-(target_bits as f64)));
            values[f].push(v);
        }
    }
    Ok((values, errors))
}

/// Periods on the homology basis from the periods of the extension cycles, the other
/// primary classes (fibre components, fibre, section) having period zero.
pub fn full_period_map(h: &SurfaceHomology, extension_values: &[Vec<Complex>], extension_errors: &[Vec<f64>]) -> Result<PeriodMatrix, PeriodsError> {
    let c = &h.primary.change_of_basis;
    let n = c.nrows();
    let cinv_t = c.transpose().to_rational().inverse().ok_or(PeriodsError::SingularChangeOfBasis)?;
    let next = h.primary.extensions.len();
    let mut values = Vec::new();
    let mut error_log2 = Vec::new();
    for (vals, errs) in extension_values.iter().zip(extension_errors) {
        let prec = vals.first().map_or(64, |v| v.prec().0);
        let worst = errs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut row = Vec::with_capacity(n);
        let mut erow = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = Complex::new(prec);
            let mut weight = 0.0f64;
            for j in 0..next {
                let q = &cinv_t[(i, j)];
                if *q != 0 {
                    acc += Complex::with_val(prec, &vals[j] * q);
                    weight += q.to_f64().abs();
                }
            }
            row.push(acc);
            erow.push(if weight == 0.0 { f64::NEG_INFINITY } else { worst + weight.log2() });
        }
        values.push(row);
        error_log2.push(erow);
    }
    Ok(PeriodMatrix { values, error_log2 })
}

fn cmod(z: &Complex) -> Float {
    Float::with_val(z.prec().0, z.abs_ref())
}

/// Roots of `c[0] + c[1] x + c[2] x^2 + c[3] x^3` by simultaneous Newton (Weierstrass) steps.
fn cubic_roots(c: &[Complex; 4]) -> Option<[Complex; 3]> {
    let prec = c[0].prec().0;
    let monic: Vec<Complex> = c.iter().map(|x| Complex::with_val(prec, x / &c[3])).collect();
    let eval = |z: &Complex| monic.iter().rev().fold(Complex::new(prec), |acc, k| acc * z + k);
    let seed = Complex::with_val(prec, (0.4, 0.9));
    let mut z: [Complex; 3] = [Complex::with_val(prec, 1), seed.clone(), Complex::with_val(prec, seed.square_ref())];
    let tol = Float::with_val(prec, Float::i_exp(1, 12 - prec as i32));
    for _ in 0..10 * prec {
        let mut moved = Float::new(prec);
        for i in 0..3 {
            let mut den = Complex::with_val(prec, 1);
            for j in 0..3 {
                if i != j {
                    den *= Complex::with_val(prec, &z[i] - &z[j]);
                }
            }
            let d = eval(&z[i]) / den;
            moved = moved.max(&(cmod(&d) / (cmod(&z[i]) + 1u32)));
            z[i] -= d;
        }
        if moved < tol {
            return Some(z);
        }
    }
    None
}

/// Arithmetic-geometric mean with the square root closest to the arithmetic mean.
fn agm(a: &Complex, b: &Complex) -> Complex {
    let prec = a.prec().0;
    let tol = Float::with_val(prec, Float::i_exp(1, 8 - prec as i32));
    let (mut a, mut b) = (a.clone(), b.clone());
    for _ in 0..4 * prec {
        let a1 = Complex::with_val(prec, &a + &b) / 2u32;
        let mut b1 = Complex::with_val(prec, &a * &b).sqrt();
        if cmod(&Complex::with_val(prec, &a1 - &b1)) > cmod(&Complex::with_val(prec, &a1 + &b1)) {
            b1 = -b1;
        }
        let done = cmod(&Complex::with_val(prec, &a1 - &b1)) <= Float::with_val(prec, &tol * cmod(&a1));
        a = a1;
        b = b1;
        if done {
            break;
        }
    }
    a
}

/// Square root of `x` with the sign making `|s - a| <= |s + a|`.
fn aligned_sqrt(x: Complex, a: &Complex) -> Complex {
    let s = x.sqrt();
    let prec = s.prec().0;
    if cmod(&Complex::with_val(prec, &s - a)) > cmod(&Complex::with_val(prec, &s + a)) {
        -s
    } else {
        s
    }
}

/// A basis of the periods of `dx / y` on `y^2 = (x - e1)(x - e2)(x - e3)`.
pub fn cubic_period_basis(e: &[Complex; 3]) -> [Complex; 2] {
    let prec = e[0].prec().0;
    let a = Complex::with_val(prec, &e[0] - &e[2]).sqrt();
    let b = aligned_sqrt(Complex::with_val(prec, &e[0] - &e[1]), &a);
    let c = aligned_sqrt(Complex::with_val(prec, &e[1] - &e[2]), &a);
    let two_pi = Float::with_val(prec, rug::float::Constant::Pi) * 2u32;
    let w1 = Complex::with_val(prec, &two_pi) / agm(&a, &b);
    let w2 = Complex::with_val(prec, (Float::new(prec), &two_pi)) / agm(&a, &c);
    [w1, w2]
}

/// Move `(w1, w2)` by `GL_2(Z)` so that `w2 / w1` lies in the standard fundamental domain.
fn reduce_basis(mut w: [Complex; 2]) -> [Complex; 2] {
    let prec = w[0].prec().0;
    for _ in 0..10_000 {
        let tau = Complex::with_val(prec, &w[1] / &w[0]);
        if tau.imag().is_sign_negative() {
            w[1] = -w[1].clone();
            continue;
        }
        let n = Float::with_val(prec, tau.real().round_ref());
        if !n.is_zero() {
            w[1] -= Complex::with_val(prec, &w[0] * &n);
            continue;
        }
        if cmod(&tau) < 1u32 {
            let w0 = w[0].clone();
            w[0] = w[1].clone();
            w[1] = -w0;
            continue;
        }
        break;
    }
    w
}

fn covolume(w: &[Complex; 2]) -> Float {
    let prec = w[0].prec().0;
    let z = Complex::with_val(prec, w[0].conj_ref()) * &w[1];
    Float::with_val(prec, z.imag().abs_ref())
}

/// Whether the lattices spanned by `a` and `b` are homothetic.
pub fn same_shape(a: &[Complex; 2], b: &[Complex; 2], tol: &Float) -> bool {
    let prec = a[0].prec().0;
    let ta = {
        let r = reduce_basis(a.clone());
        Complex::with_val(prec, &r[1] / &r[0])
    };
    let tb = {
        let r = reduce_basis(b.clone());
        Complex::with_val(prec, &r[1] / &r[0])
    };
    // Points on the boundary of the fundamental domain are identified in pairs, and an
    // orientation flip reflects in the imaginary axis.
    let mut candidates = vec![tb.clone(), Complex::with_val(prec, -tb.clone().conj())];
    for t in candidates.clone() {
        candidates.push(Complex::with_val(prec, &t + 1u32));
        candidates.push(Complex::with_val(prec, &t - 1u32));
        candidates.push(-Complex::with_val(prec, t.recip_ref()));
    }
    candidates.iter().any(|t| cmod(&Complex::with_val(prec, &ta - t)) <= *tol)
}

/// `|mu|` such that `mu * basis[0]` are the fibre periods of `Res(1/P_b)` on the symplectic
/// basis, for pencils `k(t) Y^2 Z = g(X, Z)` with an `X^3` term. `None` for other shapes,
/// or when the lattice found from the cubic does not have the shape of the computed one.
pub fn fibre_period_scale(pencil: &CubicPencil, basepoint: &Complex, basis: &Mat2C, target_bits: u32) -> Option<Float> {
    let prec = basis[0][0].prec().0;
    let at = |e: [u32; 3]| {
        let c = complex_coeffs(pencil.coeff(e), prec);
        c.iter().rev().fold(Complex::new(prec), |acc, k| acc * basepoint + k)
    };
    let only_y2z = [[2, 1, 0], [1, 2, 0], [1, 1, 1], [0, 2, 1], [0, 1, 2], [0, 3, 0]].iter().all(|e| *e == [0, 2, 1] || pencil.coeff(*e).is_zero());
    if !only_y2z {
        return None;
    }
    let k = at([0, 2, 1]);
    // k y^2 = -(g3 x^3 + g2 x^2 + g1 x + g0) on Z = 1.
    let g: [Complex; 4] = [at([0, 0, 3]), at([1, 0, 2]), at([2, 0, 1]), at([3, 0, 0])].map(|z| -z);
    if k.is_zero() || g[3].is_zero() {
        return None;
    }
    let e = cubic_roots(&g)?;
    let w = cubic_period_basis(&e);
    let q = [basis[0][0].clone(), basis[0][1].clone()];
    let tol = Float::with_val(prec, Float::i_exp(1, -((target_bits / 2) as i32)));
    if !same_shape(&w, &q, &tol) {
        return None;
    }
    // Res(1/P) = dx / (dP/dy) = dx / (2 k y), and k y^2 = -g3 prod (x - e_i).
    let factor = Float::with_val(prec, Complex::with_val(prec, &k * &g[3]).abs_ref()).sqrt() * 2u32;
    let ratio = covolume(&w) / covolume(&q);
    Some(ratio.sqrt() / factor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::QPoly;

    fn legendre() -> DiffOperator {
        DiffOperator::from_rational(&[QPoly::from_i64(&[1]), QPoly::from_i64(&[-4, 8]), QPoly::from_i64(&[0, -4, 4])])
    }

    #[test]
    fn legendre_local_data() {
        let op = legendre();
        let prec = 200;
        let tol = Float::with_val(prec, Float::i_exp(1, -80));
        let pts = singular_points(&op, prec).unwrap();
        assert_eq!(wronskian(&op, &pts, prec, &tol).unwrap(), vec![-1, -1]);
        for p in &pts.values {
            assert_eq!(local_exponents(&op, Some(p), 1, prec, &tol).unwrap(), (Rational::new(), Rational::new()));
        }
        let half = Rational::from((1, 2));
        assert_eq!(local_exponents(&op, None, 0, prec, &tol).unwrap(), (half.clone(), half));
        let b = HolomorphicFormBasis::compute(&op, pts, prec, 160).unwrap();
        b.check_monodromy(&[Some(2), Some(2)], Some(-2)).unwrap();
        assert!(b.check_monodromy(&[Some(2), Some(2)], Some(2)).is_err());
        assert_eq!(b.divisor, vec![1, 1]);
        assert_eq!(b.divisor_infinity, -3);
        assert_eq!(b.dimension(), 0);
        b.verify_genus(12).unwrap();
    }

    #[test]
    fn regular_point_exponents() {
        let op = legendre();
        let prec = 128;
        let tol = Float::with_val(prec, Float::i_exp(1, -60));
        let p = Complex::with_val(prec, (0.5, 0.25));
        assert_eq!(local_exponents(&op, Some(&p), 0, prec, &tol).unwrap(), (Rational::new(), Rational::from(1)));
    }

    #[test]
    fn trivial_operator_has_constant_wronskian() {
        let op = DiffOperator::from_rational(&[QPoly::zero(), QPoly::zero(), QPoly::from_i64(&[1])]);
        let pts = singular_points(&op, 64).unwrap();
        assert!(pts.values.is_empty());
        assert!(wronskian(&op, &pts, 64, &Float::with_val(64, 1e-10)).unwrap().is_empty());
    }

    #[test]
    fn legendre_fibre_lattice() {
        // For 0 < t < 1 the periods of dx/y on y^2 = x(x-1)(x-t) are spanned by 2 pi F(t)
        // and 2 pi i F(1-t), F = 2F1(1/2, 1/2; 1; .).
        let prec = 200;
        let f = |t: Float| {
            let mut term = Float::with_val(prec, 1);
            let mut sum = Float::with_val(prec, 1);
            for n in 1..2000u32 {
                let r = Float::with_val(prec, Rational::from((2 * n - 1, 2 * n)));
                term *= Float::with_val(prec, r.square_ref()) * &t;
                sum += &term;
            }
            sum
        };
        let t = Float::with_val(prec, Rational::from((3, 10)));
        let e = [Complex::with_val(prec, 1), Complex::with_val(prec, &t), Complex::with_val(prec, 0)];
        let w = cubic_period_basis(&e);
        let two_pi = Float::with_val(prec, rug::float::Constant::Pi) * 2u32;
        let expect = [Complex::with_val(prec, Float::with_val(prec, &two_pi * f(t.clone()))), Complex::with_val(prec, (Float::new(prec), Float::with_val(prec, &two_pi * f(Float::with_val(prec, 1 - &t)))))];
        let tol = Float::with_val(prec, 1e-40);
        assert!(same_shape(&w, &expect, &tol));
        let rel = Float::with_val(prec, covolume(&w) / covolume(&expect)) - 1u32;
        assert!(rel.clone().abs() < 1e-40, "{rel}");
        let roots = cubic_roots(&[Complex::with_val(prec, -6), Complex::with_val(prec, 11), Complex::with_val(prec, -6), Complex::with_val(prec, 1)]).unwrap();
        for r in &roots {
            let d = [1, 2, 3].iter().map(|k| Float::with_val(prec, Complex::with_val(prec, r - *k).abs_ref()).to_f64()).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-50);
        }
    }

    #[test]
    fn linear_systems() {
        assert_eq!(linear_system_basis(&[], 0), vec![0]);
        assert_eq!(linear_system_basis(&[2], 0), vec![0, 1, 2]);
        assert!(linear_system_basis(&[1, 1], -3).is_empty());
    }
}
