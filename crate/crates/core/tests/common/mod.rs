#![allow(dead_code)]

use ellsurf_core::morsification::MonodromyRep;
use ellsurf_core::{CubicPencil, Mat2Z, QPoly};

pub fn k3_pencil() -> CubicPencil {
    let a = QPoly::from_i64(&[14485, 35680, 102618, 58840, 93273]);
    let b = QPoly::from_i64(&[-2083725, 15406335, 16161642, -127136490, -19459741, 241822775, 17011856, -78412620, -8590032]);
    CubicPencil::from_terms(&[
        ([3, 0, 0], QPoly::from_i64(&[1])),
        ([2, 0, 1], a.scale(&4.into())),
        ([1, 0, 2], b.scale(&512.into())),
        ([0, 2, 1], QPoly::from_i64(&[-1])),
    ])
    .unwrap()
}

pub fn legendre_pencil() -> CubicPencil {
    CubicPencil::from_terms(&[
        ([0, 2, 1], QPoly::from_i64(&[1])),
        ([3, 0, 0], QPoly::from_i64(&[-1])),
        ([2, 0, 1], QPoly::from_i64(&[1, 1])),
        ([1, 0, 2], QPoly::from_i64(&[0, -1])),
    ])
    .unwrap()
}

/// The sixteen loop matrices of the K3 example.
pub fn k3_monodromy() -> MonodromyRep {
    let m1 = Mat2Z::new(7, 9, -4, -5);
    let m4 = Mat2Z::new(3, 1, -4, -1);
    let m5 = Mat2Z::new(3, 2, -2, -1);
    let u = Mat2Z::new(1, 1, 0, 1);
    MonodromyRep::from_matrices(&[m1, u, u, m4, m5, m5, m5, m5, m4, m5, m4, m4, m5, m5, u, m5])
}

pub mod props {
    use ellsurf_core::continuation::{self, FactoredFunction, Mat2C, NumOperator, Pt};
    use ellsurf_core::morsification::{extension_to_thimbles, morsify, Letter, MonodromyRep};
    use ellsurf_core::sl2z::ordered_product;
    use ellsurf_core::{DiffOperator, KodairaType, Mat2Z, QPoly};
    use proptest::prelude::*;
    use rug::{Complex, Float, Rational};

    pub fn sl2z_word() -> impl Strategy<Value = Mat2Z> {
        let gens = [Mat2Z::new(1, 1, 0, 1), Mat2Z::new(1, -1, 0, 1), Mat2Z::new(1, 0, -1, 1), Mat2Z::new(1, 0, 1, 1)];
        proptest::collection::vec(0..4usize, 0..4).prop_map(move |w| w.iter().fold(Mat2Z::IDENTITY, |a, &g| gens[g] * a))
    }

    pub fn kodaira_type(max_n: u32) -> impl Strategy<Value = KodairaType> {
        proptest::sample::select(KodairaType::all_up_to(max_n))
    }

    /// A representation whose loops are conjugated Kodaira normal forms.
    pub fn kodaira_rep() -> impl Strategy<Value = MonodromyRep> {
        proptest::collection::vec((kodaira_type(4), sl2z_word()), 1..5)
            .prop_map(|v| MonodromyRep::from_matrices(&v.iter().map(|(t, a)| a.conjugate(&t.normal_form())).collect::<Vec<_>>()))
    }

    pub fn boundary_case() -> impl Strategy<Value = (MonodromyRep, Vec<(usize, bool)>, [i64; 2])> {
        kodaira_rep().prop_flat_map(|rep| {
            let n = rep.loops.len();
            (Just(rep), proptest::collection::vec((0..n, any::<bool>()), 0..7), [-3i64..=3, -3i64..=3])
        })
    }

    /// The boundary of the thimble vector of an extension is `w_* gamma - gamma`.
    pub fn check_boundary(rep: &MonodromyRep, word: &[(usize, bool)], gamma: [i64; 2]) -> Result<(), TestCaseError> {
        let m = morsify(rep).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(ordered_product(&m.matrices), rep.total());
        let word: Vec<Letter> = word.iter().map(|&(i, inv)| if inv { Letter::inv(i) } else { Letter::fwd(i) }).collect();
        let x = extension_to_thimbles(&m, &word, gamma).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let moved = m.word_matrix(&word).apply(gamma);
        prop_assert_eq!(m.boundary(&x), [moved[0] - gamma[0], moved[1] - gamma[1]]);
        Ok(())
    }

    /// `4t(1-t) y'' + 4(1-2t) y' - y`, annihilating `2F1(1/2, 1/2; 1; t)`.
    pub fn legendre_operator() -> DiffOperator {
        DiffOperator::from_rational(&[QPoly::from_i64(&[-1]), QPoly::from_i64(&[4, -8]), QPoly::from_i64(&[0, 4, -4])])
    }

    pub fn legendre_numeric(bits: u32) -> NumOperator {
        NumOperator::new(&legendre_operator(), vec![Pt::new(0.0, 0.0), Pt::new(1.0, 0.0)], bits).unwrap()
    }

    pub fn distance(a: &Mat2C, b: &Mat2C) -> Float {
        continuation::taylor::mat2_distance(a, b)
    }

    pub fn tolerance(op: &NumOperator) -> Float {
        Float::with_val(op.prec, Float::i_exp(1, -((op.target / 2) as i32)))
    }

    /// Points in `[-2, 2]^2` at least 0.2 from 0 and 1.
    pub fn free_point() -> impl Strategy<Value = Pt> {
        (-2.0f64..2.0, -2.0f64..2.0)
            .prop_map(|(x, y)| Pt::new(x, y))
            .prop_filter("near a singular point", |p| p.dist(Pt::new(0.0, 0.0)) > 0.2 && p.dist(Pt::new(1.0, 0.0)) > 0.2)
    }

    fn clear(a: Pt, b: Pt) -> bool {
        [Pt::new(0.0, 0.0), Pt::new(1.0, 0.0)].iter().all(|&o| continuation::paths::segment_distance(o, a, b) > 0.1)
    }

    pub fn free_triangle() -> impl Strategy<Value = (Pt, Pt, Pt)> {
        (free_point(), free_point(), free_point()).prop_filter("segment too close", |&(a, b, c)| clear(a, b) && clear(b, c) && clear(a, c))
    }

    /// Composition, inversion and homotopy invariance of transition matrices.
    pub fn check_groupoid(op: &NumOperator, a: Pt, b: Pt, c: Pt) -> Result<(), TestCaseError> {
        let tol = tolerance(op);
        let t_ab = op.transition_matrix(&[a, b]).unwrap();
        let t_bc = op.transition_matrix(&[b, c]).unwrap();
        let t_ba = op.transition_matrix(&[b, a]).unwrap();
        let t_abc = op.transition_matrix(&[a, b, c]).unwrap();
        prop_assert!(distance(&t_abc, &continuation::taylor::mat2_mul(&t_bc, &t_ab)) < tol);
        prop_assert!(distance(&continuation::taylor::mat2_mul(&t_ba, &t_ab), &continuation::taylor::mat2_identity(op.prec)) < tol);
        let closed = [a, b, c, a];
        if [Pt::new(0.0, 0.0), Pt::new(1.0, 0.0)].iter().all(|&o| continuation::paths::winding_number(&closed, o) == 0) {
            let t_ac = op.transition_matrix(&[a, c]).unwrap();
            prop_assert!(distance(&t_abc, &t_ac) < tol);
        }
        Ok(())
    }

    /// Integrating along a path and back gives zero for every transported solution.
    pub fn check_reverse_quadrature(op: &NumOperator, a: Pt, b: Pt) -> Result<(), TestCaseError> {
        let prec = op.prec;
        let form = FactoredFunction { scale: Complex::with_val(prec, 1), factors: vec![(Complex::with_val(prec, 5), -1)] };
        let there = op.transport(&[a, b], std::slice::from_ref(&form)).unwrap();
        let back = op.transport(&[b, a], std::slice::from_ref(&form)).unwrap();
        let tol = tolerance(op);
        for k in 0..2 {
            let mut total = there.integrals[0][k].clone();
            for i in 0..2 {
                total += Complex::with_val(prec, &back.integrals[0][i] * &there.matrix[i][k]);
            }
            prop_assert!(Float::with_val(prec, total.abs_ref()) < tol);
        }
        Ok(())
    }

    /// `(F(t), F'(t))` for `F = 2F1(1/2, 1/2; 1; t)`, summed directly for `|t| <= 1/2`.
    pub fn hypergeometric_state(t: &Complex, prec: u32) -> [Complex; 2] {
        let mut term = Complex::with_val(prec, 1);
        let mut y = Complex::with_val(prec, 0);
        let mut dy = Complex::with_val(prec, 0);
        let terms = 2 * prec as usize;
        for n in 0..terms {
            y += &term;
            // d/dt of c_n t^n, with the running term holding c_n t^n.
            if n > 0 {
                dy += Complex::with_val(prec, &term * n as u32) / t;
            }
            let half = Rational::from((2 * n as i64 + 1, 2));
            let ratio = Rational::from(&half * &half) / Rational::from((n as i64 + 1) * (n as i64 + 1));
            term *= Float::with_val(prec, &ratio);
            term *= t;
        }
        [y, dy]
    }

    /// Error of continuing the hypergeometric state from 0.3 to -0.3 + 0.4i above 0.
    pub fn hypergeometric_error(digits: u32) -> Float {
        let bits = continuation::digits_to_bits(digits);
        let op = legendre_numeric(bits);
        let prec = op.prec;
        let (a, m, b) = (Pt::new(0.3, 0.0), Pt::new(0.3, 0.45), Pt::new(-0.3, 0.4));
        let s0 = hypergeometric_state(&a.to_complex(prec), prec);
        let s1 = hypergeometric_state(&b.to_complex(prec), prec);
        let t = op.transition_matrix(&[a, m, b]).unwrap();
        let mut err = Float::with_val(prec, 0);
        for i in 0..2 {
            let z = Complex::with_val(prec, &t[i][0] * &s0[0]) + Complex::with_val(prec, &t[i][1] * &s0[1]) - &s1[i];
            err = err.max(&Float::with_val(prec, z.abs_ref()));
        }
        err
    }
}
