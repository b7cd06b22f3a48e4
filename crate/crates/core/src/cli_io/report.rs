//! The JSON report. Exact integers and rationals are strings; nothing depends on the clock.

use rug::{Integer, Rational};
use serde_json::{json, Value};

use super::{Analysis, PipelineConfig, PipelineInput};
use crate::sl2z::kodaira_classify;
use crate::zlattice::{IntMatrix, RatMatrix};

pub const SCHEMA_VERSION: u32 = 1;

fn int_rows(m: &IntMatrix) -> Value {
    Value::from((0..m.nrows()).map(|i| m.row(i).iter().map(Integer::to_string).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn int_cols(m: &IntMatrix) -> Value {
    Value::from(m.cols_vec().iter().map(|c| c.iter().map(Integer::to_string).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn rat_rows(m: &RatMatrix) -> Value {
    Value::from((0..m.nrows()).map(|i| m.row(i).iter().map(Rational::to_string).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn ints(v: &[Integer]) -> Value {
    Value::from(v.iter().map(Integer::to_string).collect::<Vec<_>>())
}

fn conventions(a: &Analysis) -> Value {
    let basepoint = a.monodromy.as_ref().and_then(|m| m.basepoint.clone());
    json!({
        "U": [[1, 1], [0, 1]],
        "V": [[1, 0], [-1, 1]],
        "J": [[0, 1], [-1, 0]],
        "loop_order": "loops are listed in the order of a distinguished basis; M_r ... M_1 is the monodromy around all finite critical values, and a final loop around infinity closes the product to the identity",
        "matrix_action": "column vectors in the symplectic basis of the fibre at the basepoint",
        "picard_lefschetz": "M = I + d (d^T J) for vanishing cycle d",
        "thimble_pairing": "Q_ii = -1, Q_ij = -det(d_i, d_j) for i < j, 0 for i > j",
        "homology_basis": "closed thimble combinations eta_1 .. eta_{e-4}, then the fibre F, then the zero section O",
        "basepoint": basepoint,
    })
}

fn pencil(a: &Analysis) -> Value {
    let Some(p) = &a.pencil else { return Value::Null };
    let op = &p.operator;
    json!({
        "picard_fuchs": {
            "order": op.order(),
            "degree": op.degree(),
            "coefficients": op.coeffs.iter().map(|c| c.iter().map(Integer::to_string).collect::<Vec<_>>()).collect::<Vec<_>>(),
        },
        "critical_polynomial_degree": p.critical_polynomial.degree(),
        "discriminant_factors": p.discriminant.iter().map(|(f, m)| json!({"degree": f.degree(), "multiplicity": m})).collect::<Vec<_>>(),
    })
}

fn monodromy(a: &Analysis) -> Value {
    let Some(rep) = &a.monodromy else { return Value::Null };
    let loops: Vec<Value> = rep
        .loops
        .iter()
        .map(|l| {
            let kodaira = kodaira_classify(&l.matrix).ok().map(|w| w.kodaira.to_string());
            json!({"value": l.value, "matrix": l.matrix, "kodaira": kodaira})
        })
        .collect();
    let mut out = json!({"source": if a.monodromy_supplied { "input" } else { "continuation" }, "loops": loops});
    if let Some(c) = &a.continuation {
        out["recovery"] = json!({
            "residual_log2": c.structure.residual_log2,
            "candidate_lattices": c.structure.candidates,
            "used_discriminant_orders": c.structure.used_euler_filter,
            "discriminant_orders": c.discriminant_orders,
        });
        out["holomorphic_forms"] = json!({
            "count": c.forms.dimension(),
            "wronskian_exponents": c.forms.wronskian,
            "divisor": c.forms.divisor,
            "divisor_at_infinity": c.forms.divisor_infinity,
            "infinity_exponents": [c.forms.infinity_exponents.0.to_string(), c.forms.infinity_exponents.1.to_string()],
        });
    }
    out
}

fn homology(a: &Analysis) -> Value {
    let Some(h) = &a.homology else { return Value::Null };
    let (pos, neg) = h.lattice.signature();
    let fibres: Vec<Value> = h
        .components
        .iter()
        .map(|c| json!({"loop": c.fibre, "kodaira": c.kodaira.to_string(), "euler": c.kodaira.euler_number(), "components": c.kodaira.components(), "theta": c.classes.iter().map(|v| ints(v)).collect::<Vec<_>>()}))
        .collect();
    json!({
        "euler": h.euler,
        "rank": h.rank(),
        "geometric_genus": h.euler / 12 - 1,
        "signature": [pos, neg],
        "determinant": h.lattice.det().to_string(),
        "even": h.lattice.is_even(),
        "fibre_index": h.fibre_index,
        "section_index": h.section_index,
        "gram": rat_rows(&h.lattice.gram),
        "fibres": fibres,
        "primary": {
            "extensions": h.primary.extensions.len(),
            "max_word_length": h.primary.max_word_length,
            "change_of_basis": int_rows(&h.primary.change_of_basis),
        },
    })
}

fn periods(a: &Analysis) -> Value {
    let Some(p) = &a.periods else { return Value::Null };
    let digits = p.digits().min(a.config_digits());
    let show = (digits as usize + 5).max(10);
    json!({
        "forms": p.rows(),
        "absolute_scale": a.period_scale.as_ref().map(|s| s.to_string_radix(10, Some(show))),
        "digits": digits,
        "values": p.values.iter().map(|r| r.iter().map(|z| [z.real().to_string_radix(10, Some(show)), z.imag().to_string_radix(10, Some(show))]).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

fn neron_severi(a: &Analysis) -> Value {
    let Some(s) = &a.neron_severi else { return Value::Null };
    let r = &s.ns.reliability;
    let log = |x: Option<f64>| x.map(|v| format!("1e{:.1}", v));
    json!({
        "rho": s.ns.rho,
        "ns_basis": int_cols(&s.ns.ns_basis),
        "signature": [s.ns_signature.0, s.ns_signature.1],
        "digits": s.ns.digits,
        "triv_rank": s.triv.ncols(),
        "mw": {
            "rank": s.mw.rank,
            "torsion": ints(&s.mw.torsion),
            "gram": rat_rows(&s.mw.gram),
            "generators": s.mw.generators.iter().map(|g| ints(g)).collect::<Vec<_>>(),
        },
        "shioda_tate": true,
        "reliability": {
            "exact": r.exact,
            "B": log(r.search_bound_log10),
            "N": r.norm_bound(),
            "eps": log(r.max_residual_log10),
            "meaning": "either the lattice is right, or it misses a relation of squared norm above B, or an accepted relation of norm at most N is fake with residual at most eps",
        },
        "stability": s.stability.map(|(d, ok)| json!({"coarse_digits": d, "agrees": ok})),
    })
}

impl Analysis {
    fn config_digits(&self) -> u32 {
        self.neron_severi.as_ref().map_or(u32::MAX, |s| s.ns.digits)
    }

    pub fn report(&self, config: &PipelineConfig, input: &PipelineInput) -> Value {
        let source = match (&input.pencil_text, &input.monodromy) {
            (Some(_), Some(_)) => "pencil+monodromy",
            (Some(_), None) => "pencil",
            _ => "monodromy",
        };
        let hash = super::cache::content_hash(&[
            input.pencil_text.as_deref().unwrap_or("").as_bytes(),
            input.monodromy.as_ref().map(|m| serde_json::to_string(m).expect("monodromy serialises")).unwrap_or_default().as_bytes(),
        ]);
        json!({
            "schema": SCHEMA_VERSION,
            "input": {"kind": source, "sha256": hash},
            "config": {"digits": config.digits, "lll_delta": config.lll_delta, "path_margin": config.path_margin, "stage": config.stage},
            "conventions": conventions(self),
            "pencil": pencil(self),
            "monodromy": monodromy(self),
            "homology": homology(self),
            "periods": periods(self),
            "neron_severi": neron_severi(self),
            "skipped": self.skipped.iter().map(|(s, why)| json!({"stage": s, "reason": why})).collect::<Vec<_>>(),
        })
    }
}
