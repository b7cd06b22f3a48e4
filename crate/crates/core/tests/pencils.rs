mod common;

#[test]
fn k3_discriminant_and_operator() {
    let p = common::k3_pencil();
    let d = p.discriminant().unwrap();
    assert_eq!(d.degree(), 24);
    assert_eq!(p.critical_value_polynomial().unwrap().degree(), 16);
    let op = p.picard_fuchs().unwrap();
    assert_eq!(op.order(), 2);
    assert_eq!(op.degree(), 26);
}
