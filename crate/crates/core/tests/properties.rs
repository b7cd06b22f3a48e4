mod common;

use common::props::*;
use ellsurf_core::continuation::{self, integral_structure, Mat2C};
use ellsurf_core::sl2z::{kodaira_classify, minimal_factorisation, ordered_product};
use ellsurf_core::Mat2Z;
use proptest::prelude::*;
use rug::{Complex, Float};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn boundary_of_extension((rep, word, gamma) in boundary_case()) {
        check_boundary(&rep, &word, gamma)?;
    }

    #[test]
    fn classification_is_conjugation_invariant(t in kodaira_type(10), a in sl2z_word()) {
        let w = kodaira_classify(&a.conjugate(&t.normal_form())).unwrap();
        prop_assert_eq!(w.kodaira, t);
        prop_assert_eq!(ordered_product(&minimal_factorisation(t)), t.normal_form());
    }
}

fn to_complex(m: &Mat2Z, prec: u32) -> Mat2C {
    let r = m.rows();
    [[Complex::with_val(prec, r[0][0]), Complex::with_val(prec, r[0][1])], [Complex::with_val(prec, r[1][0]), Complex::with_val(prec, r[1][1])]]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Hiding the K3 monodromy behind a complex change of basis, the lattice comes back
    /// up to a scalar and an element of SL_2(Z).
    #[test]
    fn integral_structure_round_trip(p in proptest::array::uniform4((-2.0f64..2.0, -2.0f64..2.0))) {
        let bits = 200;
        let prec = bits + 64;
        let c = |(x, y): (f64, f64)| Complex::with_val(prec, (x, y));
        let pm: Mat2C = [[c(p[0]), c(p[1])], [c(p[2]), c(p[3])]];
        let det = Float::with_val(prec, continuation::taylor::mat2_det(&pm).abs_ref());
        prop_assume!(det > 0.5);
        let pinv = continuation::taylor::mat2_inverse(&pm);
        let rep = common::k3_monodromy();
        let numeric: Vec<Mat2C> = rep.matrices().iter().map(|m| continuation::taylor::mat2_mul(&continuation::taylor::mat2_mul(&pm, &to_complex(m, prec)), &pinv)).collect();
        let euler: Vec<u32> = rep.matrices().iter().map(|m| kodaira_classify(m).unwrap().kodaira.euler_number()).collect();
        let is = integral_structure(&numeric, Some(&euler), bits).unwrap();
        prop_assert!(is.infinity.is_identity());
        prop_assert!(is.residual_log2 < -(bits as f64) / 2.0);
        // G = P^-1 B intertwines the two integer representations.
        let g = continuation::taylor::mat2_mul(&pinv, &is.basis);
        let scale = Complex::with_val(prec, continuation::taylor::mat2_det(&g).sqrt_ref());
        let tol = Float::with_val(prec, Float::i_exp(1, -((bits / 2) as i32)));
        let mut entries = [[0i64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let z = Complex::with_val(prec, &g[i][j] / &scale);
                let n = Float::with_val(prec, z.real().round_ref());
                prop_assert!(Float::with_val(prec, Complex::with_val(prec, &z - &n).abs_ref()) < tol);
                entries[i][j] = n.to_f64() as i64;
            }
        }
        let g = Mat2Z::from_rows(entries);
        prop_assert_eq!(g.det(), 1);
        for (m, r) in rep.matrices().iter().zip(&is.matrices) {
            prop_assert_eq!(*m * g, g * *r);
        }
    }

    #[test]
    fn transition_groupoid((a, b, c) in free_triangle()) {
        check_groupoid(&legendre_numeric(128), a, b, c)?;
    }

    #[test]
    fn reverse_path_quadrature_cancels((a, b, _) in free_triangle()) {
        check_reverse_quadrature(&legendre_numeric(128), a, b)?;
    }
}

#[test]
fn hypergeometric_digits_double() {
    let e25 = hypergeometric_error(25).to_f64().log10();
    let e50 = hypergeometric_error(50).to_f64().log10();
    assert!(e25 < -25.0, "{e25}");
    assert!(e50 < -50.0, "{e50}");
}
