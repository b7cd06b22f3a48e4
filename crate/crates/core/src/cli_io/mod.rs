//! Input parsing, the staged pipeline from a pencil to the Mordell-Weil group, caching,
//! and the JSON report.

pub mod cache;
pub mod parse;
pub mod report;

use std::path::PathBuf;

use log::info;
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::continuation::{
    self, build_distinguished_loops, integral_structure, loop_transports, roots::multiplicity_at, ContinuationError, IntegralStructure, NumOperator, PathPlan,
    Pt, Transport,
};
use crate::griffiths_dwork::{CubicPencil, DiffOperator, PencilError};
use crate::homology::{homology_from_monodromy, HomologyError, SurfaceHomology};
use crate::morsification::{morsify, CriticalValue, MonodromyLoop, MonodromyRep, MorsificationError, MorsifiedRep};
use crate::neron_severi::{find_integer_kernel, mordell_weil, same_lattice, shioda_tate_check, trivial_lattice, KernelParams, MWReport, NSReport, NeronSeveriError};
use crate::periods::{extension_periods, fibre_period_scale, full_period_map, singular_points, HolomorphicFormBasis, PeriodMatrix, PeriodsError};
use crate::poly::QPoly;
use crate::sl2z::{KodairaType, Mat2Z};
use crate::zlattice::IntMatrix;
use cache::{content_hash, Cache, ComplexText};
pub use parse::{parse_pencil, ParseError};

/// Pipeline stages in order; a run stops after the selected one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Pencil,
    Monodromy,
    Homology,
    Periods,
    NeronSeveri,
}

impl std::str::FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "pencil" | "1" => Stage::Pencil,
            "monodromy" | "continuation" | "2" => Stage::Monodromy,
            "homology" | "3" => Stage::Homology,
            "periods" | "4" => Stage::Periods,
            "neron-severi" | "ns" | "mw" | "all" | "5" => Stage::NeronSeveri,
            _ => return Err(format!("unknown stage {s:?}; expected pencil, monodromy, homology, periods or ns")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Decimal digits requested for the periods.
    pub digits: u32,
    pub lll_delta: f64,
    /// Fraction of the smallest gap between singular points kept between a spoke and the
    /// singular points it does not go around.
    pub path_margin: f64,
    pub stage: Stage,
    #[serde(skip)]
    pub cache_dir: Option<PathBuf>,
    /// Compare the lattice found at half the digits with the full one.
    pub stability_check: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig { digits: 100, lll_delta: 0.99, path_margin: 0.25, stage: Stage::NeronSeveri, cache_dir: None, stability_check: true }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.digits < 30 {
            return Err(PipelineError::Input(format!("digits must be at least 30, got {}", self.digits)));
        }
        if !(self.lll_delta > 0.25 && self.lll_delta < 1.0) {
            return Err(PipelineError::Input(format!("LLL delta must lie in (1/4, 1), got {}", self.lll_delta)));
        }
        if !(self.path_margin > 0.0 && self.path_margin < 1.0) {
            return Err(PipelineError::Input(format!("path margin must lie in (0, 1), got {}", self.path_margin)));
        }
        Ok(())
    }

    fn target_bits(&self) -> u32 {
        continuation::digits_to_bits(self.digits)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("input error: {0}")]
    Input(String),
    #[error("{stage}: numeric failure: {message} (retry with more digits)")]
    Numeric { stage: Stage, message: String },
    #[error("{stage}: internal invariant violated: {message}")]
    Internal { stage: Stage, message: String },
}

impl PipelineError {
    /// Process exit status for the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Input(_) => 2,
            PipelineError::Numeric { .. } => 3,
            PipelineError::Internal { .. } => 4,
        }
    }

    fn numeric(stage: Stage, e: impl ToString) -> Self {
        PipelineError::Numeric { stage, message: e.to_string() }
    }

    fn internal(stage: Stage, e: impl ToString) -> Self {
        PipelineError::Internal { stage, message: e.to_string() }
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Pencil => "pencil",
            Stage::Monodromy => "monodromy",
            Stage::Homology => "homology",
            Stage::Periods => "periods",
            Stage::NeronSeveri => "neron-severi",
        })
    }
}

fn pencil_error(e: PencilError) -> PipelineError {
    match e {
        PencilError::NotHomogeneousDegree3 | PencilError::NoZeroSection | PencilError::DegeneratePencil | PencilError::Isotrivial => PipelineError::Input(e.to_string()),
        PencilError::SingularReduction | PencilError::ReconstructionFailed => PipelineError::internal(Stage::Pencil, e),
    }
}

fn continuation_error(e: ContinuationError) -> PipelineError {
    match e {
        ContinuationError::Order(_) | ContinuationError::NotSquarefree => PipelineError::internal(Stage::Monodromy, e),
        _ => PipelineError::numeric(Stage::Monodromy, e),
    }
}

fn periods_error(e: PeriodsError) -> PipelineError {
    match e {
        PeriodsError::Order(_) | PeriodsError::IrregularSingularity(_) | PeriodsError::GenusMismatch { .. } | PeriodsError::SingularChangeOfBasis | PeriodsError::BadLoop(_) => {
            PipelineError::internal(Stage::Periods, e)
        }
        _ => PipelineError::numeric(Stage::Periods, e),
    }
}

/// What the user handed in: a pencil, a monodromy representation, or both (the monodromy
/// then replaces the continuation stage).
#[derive(Debug, Clone, Default)]
pub struct PipelineInput {
    pub pencil_text: Option<String>,
    pub monodromy: Option<MonodromyRep>,
}

impl PipelineInput {
    /// Monodromy JSON if the text is a JSON object, a pencil otherwise.
    pub fn from_text(text: &str) -> Result<Self, PipelineError> {
        if text.trim_start().starts_with('{') {
            Ok(PipelineInput { pencil_text: None, monodromy: Some(parse_monodromy(text)?) })
        } else {
            Ok(PipelineInput { pencil_text: Some(text.to_string()), monodromy: None })
        }
    }
}

pub fn parse_monodromy(text: &str) -> Result<MonodromyRep, PipelineError> {
    serde_json::from_str(text).map_err(|e| PipelineError::Input(format!("monodromy JSON: {e}")))
}

/// Stage 1 output.
#[derive(Debug, Clone)]
pub struct PencilStage {
    pub pencil: CubicPencil,
    pub operator: DiffOperator,
    pub critical_polynomial: QPoly,
    /// Squarefree factors of the discriminant with their multiplicities.
    pub discriminant: Vec<(QPoly, u32)>,
}

/// Stage 2 output.
#[derive(Debug, Clone)]
pub struct ContinuationStage {
    pub plan: PathPlan,
    /// High precision critical values in loop order.
    pub critical_values: Vec<Complex>,
    /// Order of the discriminant at each critical value, in loop order.
    pub discriminant_orders: Vec<u32>,
    pub structure: IntegralStructure,
    pub transports: Vec<Transport>,
    pub forms: HolomorphicFormBasis,
}

#[derive(Debug, Clone)]
pub struct NeronSeveriStage {
    pub ns: NSReport,
    pub triv: IntMatrix,
    pub mw: MWReport,
    /// Digits of the second, coarser kernel search and whether it agreed.
    pub stability: Option<(u32, bool)>,
    pub ns_signature: (usize, usize),
}

/// Everything computed by one run.
#[derive(Debug, Clone, Default)]
pub struct Analysis {
    pub pencil: Option<PencilStage>,
    pub continuation: Option<ContinuationStage>,
    pub monodromy: Option<MonodromyRep>,
    /// True when the monodromy was supplied rather than computed.
    pub monodromy_supplied: bool,
    pub morsified: Option<MorsifiedRep>,
    pub homology: Option<SurfaceHomology>,
    pub periods: Option<PeriodMatrix>,
    /// `|mu|` with `mu * periods` the periods of `Res(1/P_t) dt`, when the pencil has a shape
    /// where the fibre lattice can be computed directly.
    pub period_scale: Option<Float>,
    pub neron_severi: Option<NeronSeveriStage>,
    /// Stages that were requested but could not run, with the reason.
    pub skipped: Vec<(Stage, String)>,
}

const PENCIL_CACHE_VERSION: &[u8] = b"pencil-1";
const CONTINUATION_CACHE_VERSION: &[u8] = b"continuation-1";

fn pencil_stage(text: &str, cache: &Cache) -> Result<(PencilStage, String), PipelineError> {
    let pencil = parse_pencil(text).map_err(|e| match e {
        ParseError::Pencil(p) => pencil_error(p),
        e => PipelineError::Input(e.to_string()),
    })?;
    let key = content_hash(&[PENCIL_CACHE_VERSION, serde_json::to_string(&pencil).expect("pencil serialises").as_bytes()]);
    let operator = match cache.get::<DiffOperator>("pencil", &key) {
        Some(op) => op,
        None => {
            info!("computing the Picard-Fuchs operator");
            let op = pencil.picard_fuchs().map_err(pencil_error)?;
            cache.put("pencil", &key, &op).map_err(|e| PipelineError::Input(format!("cache: {e}")))?;
            op
        }
    };
    if operator.order() != 2 {
        return Err(PipelineError::internal(Stage::Pencil, format!("Picard-Fuchs operator has order {}", operator.order())));
    }
    let critical_polynomial = pencil.critical_value_polynomial().map_err(pencil_error)?;
    let discriminant = pencil.discriminant().map_err(pencil_error)?.squarefree_decomposition();
    Ok((PencilStage { pencil, operator, critical_polynomial, discriminant }, key))
}

#[derive(Serialize, Deserialize)]
struct CachedTransport {
    matrix: [[ComplexText; 2]; 2],
    integrals: Vec<[ComplexText; 2]>,
}

#[derive(Serialize, Deserialize)]
struct CachedContinuation {
    prec: u32,
    basis: [[ComplexText; 2]; 2],
    matrices: Vec<Mat2Z>,
    infinity: Mat2Z,
    types: Vec<KodairaType>,
    residual_log2: f64,
    candidates: usize,
    used_euler_filter: bool,
    transports: Vec<CachedTransport>,
}

fn mat_text(m: &[[Complex; 2]; 2]) -> [[ComplexText; 2]; 2] {
    std::array::from_fn(|i| std::array::from_fn(|j| ComplexText::new(&m[i][j])))
}

fn mat_from_text(m: &[[ComplexText; 2]; 2], prec: u32) -> Option<[[Complex; 2]; 2]> {
    let mut out: [[Complex; 2]; 2] = std::array::from_fn(|_| std::array::from_fn(|_| Complex::new(prec)));
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = m[i][j].to_complex(prec)?;
        }
    }
    Some(out)
}

impl CachedContinuation {
    fn new(s: &IntegralStructure, transports: &[Transport]) -> Self {
        CachedContinuation {
            prec: s.basis[0][0].prec().0,
            basis: mat_text(&s.basis),
            matrices: s.matrices.clone(),
            infinity: s.infinity,
            types: s.types.clone(),
            residual_log2: s.residual_log2.max(-1e9),
            candidates: s.candidates,
            used_euler_filter: s.used_euler_filter,
            transports: transports
                .iter()
                .map(|t| CachedTransport { matrix: mat_text(&t.matrix), integrals: t.integrals.iter().map(|v| [ComplexText::new(&v[0]), ComplexText::new(&v[1])]).collect() })
                .collect(),
        }
    }

    fn restore(&self) -> Option<(IntegralStructure, Vec<Transport>)> {
        let p = self.prec;
        let s = IntegralStructure {
            basis: mat_from_text(&self.basis, p)?,
            matrices: self.matrices.clone(),
            infinity: self.infinity,
            types: self.types.clone(),
            residual_log2: self.residual_log2,
            candidates: self.candidates,
            used_euler_filter: self.used_euler_filter,
        };
        let mut ts = Vec::new();
        for t in &self.transports {
            let mut integrals = Vec::new();
            for v in &t.integrals {
                integrals.push([v[0].to_complex(p)?, v[1].to_complex(p)?]);
            }
            ts.push(Transport { matrix: mat_from_text(&t.matrix, p)?, integrals });
        }
        Some((s, ts))
    }
}

fn same_point(a: &Complex, b: &Complex) -> bool {
    let (a, b) = (Pt::from_complex(a), Pt::from_complex(b));
    a.dist(b) <= 1e-12 * a.norm().max(b.norm()).max(1.0)
}

fn continuation_stage(p: &PencilStage, pencil_key: &str, config: &PipelineConfig, cache: &Cache) -> Result<ContinuationStage, PipelineError> {
    let bits = config.target_bits();
    let prec = bits + continuation::guard_bits(bits) + 32;
    let critical_values = continuation::numeric_roots(&p.critical_polynomial, prec).map_err(continuation_error)?;
    let points = singular_points(&p.operator, prec).map_err(periods_error)?;
    let forms = HolomorphicFormBasis::compute(&p.operator, points, prec, bits).map_err(periods_error)?;
    let cpts: Vec<Pt> = critical_values.iter().map(Pt::from_complex).collect();
    let spts: Vec<Pt> = forms.points.values.iter().map(Pt::from_complex).collect();
    let plan = build_distinguished_loops(&cpts, &spts, None, config.path_margin);
    let discriminant_orders: Vec<u32> = plan.order.iter().map(|&i| multiplicity_at(&p.discriminant, &critical_values[i])).collect();
    let key = content_hash(&[
        CONTINUATION_CACHE_VERSION,
        pencil_key.as_bytes(),
        &config.digits.to_le_bytes(),
        &config.path_margin.to_le_bytes(),
    ]);
    let cached = cache.get::<CachedContinuation>("continuation", &key).and_then(|c| c.restore());
    let (structure, transports) = match cached {
        Some(c) => c,
        None => {
            info!("continuing along {} loops at {} bits", plan.loops.len(), bits);
            let nop = NumOperator::new(&p.operator, plan.obstacles.clone(), bits).map_err(continuation_error)?;
            let transports = loop_transports(&nop, &plan, &forms.forms).map_err(continuation_error)?;
            let numeric: Vec<_> = transports.iter().map(|t| t.matrix.clone()).collect();
            let structure = integral_structure(&numeric, Some(&discriminant_orders), bits).map_err(continuation_error)?;
            cache
                .put("continuation", &key, &CachedContinuation::new(&structure, &transports))
                .map_err(|e| PipelineError::Input(format!("cache: {e}")))?;
            (structure, transports)
        }
    };
    info!("monodromy types {:?}, infinity {:?}", structure.types, structure.infinity);
    let critical_values: Vec<Complex> = plan.order.iter().map(|&i| critical_values[i].clone()).collect();
    // Exponents of the operator must match the recovered local monodromy; points that are not
    // critical values carry smooth fibres.
    let traces: Vec<Option<i64>> = forms
        .points
        .values
        .iter()
        .map(|s| critical_values.iter().position(|c| same_point(c, s)).map(|j| structure.matrices[j].trace()))
        .collect();
    forms.check_monodromy(&traces, Some(structure.infinity.trace())).map_err(periods_error)?;
    Ok(ContinuationStage { plan, critical_values, discriminant_orders, structure, transports, forms })
}

/// Real or imaginary part for display, with round-off below `2^-bits` relative shown as 0.
fn decimal(x: &Float, size: &Float, bits: u32) -> String {
    let cut = Float::with_val(x.prec(), size * Float::with_val(x.prec(), Float::i_exp(1, -(bits as i32))));
    if Float::with_val(x.prec(), x.abs_ref()) <= cut {
        "0".into()
    } else {
        x.to_string_radix(10, Some(30))
    }
}

/// Loops in plan order, then the loop around infinity when its monodromy is not trivial.
fn monodromy_from_continuation(c: &ContinuationStage) -> MonodromyRep {
    let mut loops: Vec<MonodromyLoop> = c
        .critical_values
        .iter()
        .zip(&c.structure.matrices)
        .map(|(v, &matrix)| {
            let size = Float::with_val(v.prec().0, v.abs_ref()).max(&Float::with_val(v.prec().0, 1));
            let bits = c.structure.basis[0][0].prec().0 / 2;
            MonodromyLoop { value: Some(CriticalValue::Finite { re: decimal(v.real(), &size, bits), im: decimal(v.imag(), &size, bits) }), matrix }
        })
        .collect();
    if c.structure.infinity != Mat2Z::IDENTITY {
        loops.push(MonodromyLoop { value: Some(CriticalValue::Infinity), matrix: c.structure.infinity });
    }
    let b = c.plan.basepoint;
    MonodromyRep { loops, basepoint: Some([format!("{}", b.re), format!("{}", b.im)]) }
}

fn homology_stage(rep: &MonodromyRep, supplied: bool) -> Result<(MorsifiedRep, SurfaceHomology), PipelineError> {
    let st = Stage::Homology;
    if supplied {
        if rep.loops.is_empty() {
            return Err(PipelineError::Input("monodromy has no loops".into()));
        }
        if let Some((i, l)) = rep.loops.iter().enumerate().find(|(_, l)| l.matrix.det() != 1) {
            return Err(PipelineError::Input(format!("loop {i} matrix {} does not have determinant 1", l.matrix)));
        }
        if rep.total() != Mat2Z::IDENTITY {
            return Err(PipelineError::Input(format!("the product of the loop matrices is {}, not the identity; include the loop around infinity", rep.total())));
        }
    }
    let m = morsify(rep).map_err(|e| match e {
        MorsificationError::Classification { .. } if supplied => PipelineError::Input(e.to_string()),
        MorsificationError::Classification { .. } => PipelineError::numeric(st, e),
        e => PipelineError::internal(st, e),
    })?;
    let h = homology_from_monodromy(&m).map_err(|e| match e {
        HomologyError::EulerNot12Multiple(_) | HomologyError::NotLefschetzInput(_) if supplied => PipelineError::Input(e.to_string()),
        HomologyError::EulerNot12Multiple(_) | HomologyError::NotLefschetzInput(_) => PipelineError::numeric(st, e),
        e => PipelineError::internal(st, e),
    })?;
    info!("H2 rank {}, signature {:?}", h.rank(), h.lattice.signature());
    Ok((m, h))
}

fn periods_stage(c: &ContinuationStage, h: &SurfaceHomology, bits: u32) -> Result<PeriodMatrix, PipelineError> {
    c.forms.verify_genus(h.euler).map_err(periods_error)?;
    let (values, errors) = extension_periods(&c.transports, &c.structure.basis, &h.primary.extensions, c.forms.dimension(), bits).map_err(periods_error)?;
    let pm = full_period_map(h, &values, &errors).map_err(periods_error)?;
    info!("{} period rows, about {} digits", pm.rows(), pm.digits());
    Ok(pm)
}

fn neron_severi_stage(h: &SurfaceHomology, periods: &PeriodMatrix, config: &PipelineConfig) -> Result<NeronSeveriStage, PipelineError> {
    let st = Stage::NeronSeveri;
    let params = KernelParams { delta: config.lll_delta, ..KernelParams::default() };
    let digits = config.digits.min(periods.digits());
    let n = h.rank();
    let ns = find_integer_kernel(periods, n, digits, &params);
    info!("rho = {} at {} digits", ns.rho, digits);
    let stability = if periods.rows() > 0 && config.stability_check {
        let coarse = find_integer_kernel(periods, n, digits / 2, &params);
        let stable = same_lattice(&coarse.ns_basis, &ns.ns_basis);
        if !stable {
            return Err(PipelineError::numeric(
                st,
                format!("the lattice found at {} digits (rank {}) differs from the one at {} digits (rank {})", digits / 2, coarse.rho, digits, ns.rho),
            ));
        }
        Some((digits / 2, stable))
    } else {
        None
    };
    let b = ns.ns_basis.to_rational();
    let ns_gram = b.transpose().mul(&h.lattice.gram).mul(&b);
    let ns_signature = crate::zlattice::signature(&ns_gram);
    if ns.rho > 0 && ns_signature != (1, ns.rho - 1) {
        return Err(PipelineError::numeric(st, format!("candidate Neron-Severi lattice has signature {ns_signature:?}, expected (1, {})", ns.rho - 1)));
    }
    let triv = trivial_lattice(h);
    let mw = mordell_weil(&ns.ns_basis, &triv, &h.lattice).map_err(|e| match e {
        NeronSeveriError::Lattice(_) => PipelineError::internal(st, e),
        e => PipelineError::numeric(st, e),
    })?;
    if !shioda_tate_check(ns.rho, h.component_correction(), mw.rank) {
        return Err(PipelineError::internal(
            st,
            format!("Shioda-Tate: rho - 2 - {} = {} but the quotient has rank {}", h.component_correction(), ns.rho as i64 - 2 - h.component_correction() as i64, mw.rank),
        ));
    }
    Ok(NeronSeveriStage { ns, triv, mw, stability, ns_signature })
}

/// Run every stage up to `config.stage`.
pub fn run_pipeline(config: &PipelineConfig, input: &PipelineInput) -> Result<Analysis, PipelineError> {
    config.validate()?;
    let cache = Cache::new(config.cache_dir.as_deref());
    let mut a = Analysis::default();
    let mut pencil_key = String::new();
    if let Some(text) = &input.pencil_text {
        let (p, key) = pencil_stage(text, &cache)?;
        a.pencil = Some(p);
        pencil_key = key;
    } else if input.monodromy.is_none() {
        return Err(PipelineError::Input("nothing to analyse".into()));
    }
    if config.stage == Stage::Pencil && a.pencil.is_some() {
        return Ok(a);
    }
    match (&input.monodromy, &a.pencil) {
        (Some(rep), _) => {
            a.monodromy = Some(rep.clone());
            a.monodromy_supplied = true;
        }
        (None, Some(p)) => {
            let c = continuation_stage(p, &pencil_key, config, &cache)?;
            a.monodromy = Some(monodromy_from_continuation(&c));
            a.continuation = Some(c);
        }
        (None, None) => unreachable!("checked above"),
    }
    if config.stage <= Stage::Monodromy {
        return Ok(a);
    }
    let (m, h) = homology_stage(a.monodromy.as_ref().expect("set above"), a.monodromy_supplied)?;
    a.morsified = Some(m);
    let euler = h.euler;
    a.homology = Some(h);
    if config.stage <= Stage::Homology {
        return Ok(a);
    }
    let h = a.homology.as_ref().expect("set above");
    let periods = match &a.continuation {
        Some(c) => periods_stage(c, h, config.target_bits())?,
        None if euler == 12 => PeriodMatrix { values: vec![], error_log2: vec![] },
        None => {
            a.skipped.push((Stage::Periods, "periods need the continuation of a pencil; only monodromy was given".into()));
            a.skipped.push((Stage::NeronSeveri, "no periods".into()));
            return Ok(a);
        }
    };
    a.periods = Some(periods);
    if let (Some(p), Some(c)) = (&a.pencil, &a.continuation) {
        let b = c.plan.basepoint.to_complex(c.structure.basis[0][0].prec().0);
        a.period_scale = fibre_period_scale(&p.pencil, &b, &c.structure.basis, config.target_bits());
    }
    if config.stage <= Stage::Periods {
        return Ok(a);
    }
    a.neron_severi = Some(neron_severi_stage(h, a.periods.as_ref().expect("set above"), config)?);
    Ok(a)
}
