mod common;

use ellsurf_core::continuation::{self, build_distinguished_loops, integral_structure, numeric_monodromy, numeric_roots, NumOperator, Pt};
use ellsurf_core::KodairaType;

fn monodromy_types(p: &ellsurf_core::CubicPencil, digits: u32) -> (Vec<KodairaType>, ellsurf_core::Mat2Z, f64) {
    let op = p.picard_fuchs().unwrap();
    let bits = continuation::digits_to_bits(digits);
    let crit = p.critical_value_polynomial().unwrap();
    let sing = op.leading().squarefree_part();
    let croots = numeric_roots(&crit, bits + 64).unwrap();
    let sroots = numeric_roots(&sing, bits + 64).unwrap();
    let cpts: Vec<Pt> = croots.iter().map(Pt::from_complex).collect();
    let spts: Vec<Pt> = sroots.iter().map(Pt::from_complex).collect();
    let plan = build_distinguished_loops(&cpts, &spts, None, 0.25);
    let nop = NumOperator::new(&op, plan.obstacles.clone(), bits).unwrap();
    let ms = numeric_monodromy(&nop, &plan).unwrap();
    let dec = p.discriminant().unwrap().squarefree_decomposition();
    let orders: Vec<u32> = plan.order.iter().map(|&i| continuation::roots::multiplicity_at(&dec, &croots[i])).collect();
    let is = integral_structure(&ms, Some(&orders), bits).unwrap();
    (is.types, is.infinity, is.residual_log2)
}

#[test]
fn legendre_monodromy() {
    let (types, inf, res) = monodromy_types(&common::legendre_pencil(), 30);
    assert_eq!(types, vec![KodairaType::In(2), KodairaType::In(2)]);
    assert_eq!(ellsurf_core::sl2z::kodaira_classify(&inf).unwrap().kodaira, KodairaType::InStar(2));
    assert!(res < -40.0);
}

#[test]
fn k3_euler_number() {
    let (types, inf, _) = monodromy_types(&common::k3_pencil(), 30);
    let at_infinity = ellsurf_core::sl2z::kodaira_classify(&inf).map_or(0, |w| w.kodaira.euler_number());
    assert_eq!(types.iter().map(|t| t.euler_number()).sum::<u32>() + at_infinity, 24);
}
