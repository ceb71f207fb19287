//! Steering and Bell-locality criteria on two- and three-qubit states.

use serde::{Deserialize, Serialize};

use crate::bloch::{
    decompose, diagonalize_correlation, dot3, mat3_vec, norm3, reconstruct, scale3, svd3,
    transpose3, BlochForm, Mat3, Vec3,
};
use crate::error::{Error, Result};
use crate::netswap::reduced_pairs;
use crate::optimize::{max_unit_sphere, max_orthonormal_triads, multi_start, sphere_point, triad_from_euler, OptConfig, OptResult};
use crate::qmat::{kron, partial_trace, psd_power, ComplexMatrix, DensityMatrix};

/// Decision margin on every threshold.
pub const DELTA: f64 = 1e-6;

/// Eigenvalue floor for the marginal inverted by the canonical map.
pub const MARGINAL_EPS: f64 = 1e-12;

const TRIAD_ORTHO_TOL: f64 = 1e-10;
const TRIAD_NORM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// `value < threshold − δ`: the inequality holds.
    Satisfied,
    /// `value > threshold + δ`: the inequality is violated.
    Violated,
    Boundary,
}

impl Verdict {
    pub fn classify(value: f64, threshold: f64) -> Self {
        if (value - threshold).abs() <= DELTA {
            Verdict::Boundary
        } else if value < threshold {
            Verdict::Satisfied
        } else {
            Verdict::Violated
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementTriad {
    pub dirs: [Vec3; 3],
}

impl MeasurementTriad {
    pub fn new(dirs: [Vec3; 3]) -> Result<Self> {
        let t = MeasurementTriad { dirs };
        for i in 0..3 {
            if (norm3(dirs[i]) - 1.0).abs() > TRIAD_NORM_TOL {
                return Err(Error::Argument(format!("direction {i} is not a unit vector")));
            }
            for j in i + 1..3 {
                if dot3(dirs[i], dirs[j]).abs() > TRIAD_ORTHO_TOL {
                    return Err(Error::Argument(format!("directions {i} and {j} not orthogonal")));
                }
            }
        }
        Ok(t)
    }

    pub(crate) fn from_columns_unchecked(dirs: [Vec3; 3]) -> Self {
        MeasurementTriad { dirs }
    }

    /// `(x, y, z)`.
    pub fn standard() -> Self {
        MeasurementTriad { dirs: crate::bloch::IDENTITY3 }
    }

    /// Largest deviation from orthonormality.
    pub fn defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot3(self.dirs[i], self.dirs[j]) - expect).abs());
            }
        }
        worst
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Witness {
    /// Alice's directions followed by Bob's.
    Directions { alice: Vec<Vec3>, bob: Vec<Vec3> },
    Triads { alice: MeasurementTriad, bob: MeasurementTriad },
    /// Unit vector attaining a sphere maximum.
    Direction { x: Vec3 },
    /// One-based party indices of a reduced pair.
    Pair { parties: [usize; 2] },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimizerSummary {
    pub restarts: usize,
    pub converged_restarts: usize,
}

impl From<&OptResult> for OptimizerSummary {
    fn from(r: &OptResult) -> Self {
        OptimizerSummary { restarts: r.restarts, converged_restarts: r.converged_restarts }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub criterion: String,
    pub value: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    /// Human-readable reading of the verdict, e.g. `steerable`.
    pub conclusion: String,
    /// `threshold − value`.
    pub margin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerSummary>,
    /// Closed-form value when one is known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<CriterionReport>,
}

impl CriterionReport {
    fn new(criterion: &str, value: f64, threshold: f64, conclusion: impl Fn(Verdict) -> &'static str) -> Self {
        let verdict = Verdict::classify(value, threshold);
        CriterionReport {
            criterion: criterion.to_string(),
            value,
            threshold,
            verdict,
            conclusion: conclusion(verdict).to_string(),
            margin: threshold - value,
            witness: None,
            optimizer: None,
            closed_form: None,
            components: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

fn steering_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Violated => "steerable",
        Verdict::Satisfied => "not-steerable",
        Verdict::Boundary => "boundary",
    }
}

fn locality_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Violated => "nonlocal",
        Verdict::Satisfied => "local",
        Verdict::Boundary => "boundary",
    }
}

fn unsteerability_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Violated => "undecided",
        _ => "certified-unsteerable",
    }
}

/// `Tr(WᵀW)`.
pub fn f3_value(b: &BlochForm) -> f64 {
    b.correlation_weight()
}

pub fn f3_report(rho: &DensityMatrix) -> Result<CriterionReport> {
    let b = decompose(rho)?;
    Ok(CriterionReport::new("f3", f3_value(&b), 1.0, steering_word))
}

/// `(1/√3)|Σᵢ aᵢᵀ W cᵢ|`.
pub fn cjwr_value(rho: &DensityMatrix, ta: &MeasurementTriad, tc: &MeasurementTriad) -> Result<f64> {
    Ok(cjwr_from_w(&decompose(rho)?.w, ta, tc))
}

fn cjwr_from_w(w: &Mat3, ta: &MeasurementTriad, tc: &MeasurementTriad) -> f64 {
    let s: f64 = (0..3).map(|i| dot3(ta.dirs[i], mat3_vec(w, tc.dirs[i]))).sum();
    s.abs() / 3f64.sqrt()
}

/// Maximum of the three-setting CJWR value over pairs of orthonormal triads.
///
/// The optimum is the nuclear norm of `W` over `√3`, reported as `closed_form`.
pub fn cjwr_max(rho: &DensityMatrix, cfg: &OptConfig) -> Result<CriterionReport> {
    let w = decompose(rho)?.w;
    let res = max_orthonormal_triads(|a, c| cjwr_from_w(&w, a, c), cfg)?;
    let x = &res.argmax;
    let mut report = CriterionReport::new("cjwr", res.value, 1.0, steering_word);
    report.witness = Some(Witness::Triads {
        alice: triad_from_euler(x[0], x[1], x[2]),
        bob: triad_from_euler(x[3], x[4], x[5]),
    });
    report.optimizer = Some((&res).into());
    let (sigma, _, _) = svd3(&w);
    report.closed_form = Some(sigma.iter().map(|s| s.abs()).sum::<f64>() / 3f64.sqrt());
    Ok(report)
}

fn p_one(n: Vec3, u: Vec3) -> f64 {
    0.5 * (1.0 + dot3(n, u))
}

fn p_both(a: Vec3, b: Vec3, bl: &BlochForm) -> f64 {
    0.25 * (1.0 + dot3(a, bl.u) + dot3(b, bl.v) + dot3(a, mat3_vec(&bl.w, b)))
}

/// `-(P_A1 + P_B1 + P_A2B2) + P_A1B1 + P_A1B2 + P_A2B1`.
pub fn chsh_expression(bl: &BlochForm, a: [Vec3; 2], b: [Vec3; 2]) -> f64 {
    -(p_one(a[0], bl.u) + p_one(b[0], bl.v) + p_both(a[1], b[1], bl))
        + p_both(a[0], b[0], bl)
        + p_both(a[0], b[1], bl)
        + p_both(a[1], b[0], bl)
}

/// The (3,3,2,2) facet expression inequivalent to CHSH.
pub fn i3322_expression(bl: &BlochForm, a: [Vec3; 3], b: [Vec3; 3]) -> f64 {
    let pb = |x: Vec3| p_one(x, bl.v);
    let pab = |i: usize, j: usize| p_both(a[i], b[j], bl);
    -2.0 * pb(b[0]) - pb(b[1]) - p_one(a[0], bl.u)
        + pab(0, 0) + pab(0, 1) + pab(0, 2)
        + pab(1, 0) + pab(1, 1) - pab(1, 2)
        + pab(2, 0) - pab(2, 1)
}

fn unit_or_z(c: Vec3) -> Vec3 {
    let n = norm3(c);
    if n > 1e-300 {
        scale3(c, 1.0 / n)
    } else {
        [0.0, 0.0, 1.0]
    }
}

fn add3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Bob's optimal CHSH directions for fixed Alice directions.
fn chsh_best_bob(bl: &BlochForm, a: [Vec3; 2]) -> [Vec3; 2] {
    let wt = transpose3(&bl.w);
    [
        unit_or_z(mat3_vec(&wt, add3(a[0], a[1]))),
        unit_or_z(mat3_vec(&wt, sub3(a[0], a[1]))),
    ]
}

/// Bob's optimal I3322 directions: each term is affine in `b_j`.
fn i3322_best_bob(bl: &BlochForm, a: [Vec3; 3]) -> [Vec3; 3] {
    let wt = transpose3(&bl.w);
    [
        unit_or_z(sub3(mat3_vec(&wt, add3(add3(a[0], a[1]), a[2])), bl.v)),
        unit_or_z(sub3(mat3_vec(&wt, sub3(add3(a[0], a[1]), a[2])), bl.v)),
        unit_or_z(mat3_vec(&wt, sub3(a[0], a[1]))),
    ]
}

fn alice_dirs<const N: usize>(x: &[f64]) -> [Vec3; N] {
    std::array::from_fn(|k| sphere_point(x[2 * k], x[2 * k + 1]))
}

fn random_angles(n: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<f64> {
    use rand::Rng;
    (0..n)
        .map(|k| if k % 2 == 0 { rng.random_range(0.0..std::f64::consts::PI) } else { rng.random_range(0.0..std::f64::consts::TAU) })
        .collect()
}

/// Largest CHSH expression value over projective measurements; `≤ 0` is local.
pub fn chsh_max(rho: &DensityMatrix, cfg: &OptConfig) -> Result<CriterionReport> {
    let bl = decompose(rho)?;
    let obj = |x: &[f64]| {
        let a = alice_dirs::<2>(x);
        chsh_expression(&bl, a, chsh_best_bob(&bl, a))
    };
    let res = multi_start(&obj, |_, rng| random_angles(4, rng), 0.5, cfg)?;
    let a = alice_dirs::<2>(&res.argmax);
    let b = chsh_best_bob(&bl, a);
    let mut report = CriterionReport::new("chsh", chsh_expression(&bl, a, b), 0.0, locality_word);
    report.witness = Some(Witness::Directions { alice: a.to_vec(), bob: b.to_vec() });
    report.optimizer = Some((&res).into());
    report.closed_form = Some((horodecki_parameter(&bl.w).sqrt() - 1.0) / 2.0);
    Ok(report)
}

/// Sum of the two largest eigenvalues of `WᵀW`.
pub fn horodecki_parameter(w: &Mat3) -> f64 {
    let (s, _, _) = svd3(w);
    let mut sq = s.map(|x| x * x);
    sq.sort_by(|a, b| b.total_cmp(a));
    sq[0] + sq[1]
}

/// Largest I3322 expression value over projective measurements; `≤ 0` is local.
pub fn i3322_max(rho: &DensityMatrix, cfg: &OptConfig) -> Result<CriterionReport> {
    let bl = decompose(rho)?;
    let obj = |x: &[f64]| {
        let a = alice_dirs::<3>(x);
        i3322_expression(&bl, a, i3322_best_bob(&bl, a))
    };
    let res = multi_start(&obj, |_, rng| random_angles(6, rng), 0.5, cfg)?;
    let a = alice_dirs::<3>(&res.argmax);
    let b = i3322_best_bob(&bl, a);
    let mut report = CriterionReport::new("i3322", i3322_expression(&bl, a, b), 0.0, locality_word);
    report.witness = Some(Witness::Directions { alice: a.to_vec(), bob: b.to_vec() });
    report.optimizer = Some((&res).into());
    Ok(report)
}

/// Local in the (3,3,2,2) scenario iff both CHSH and I3322 stay within `δ` of 0.
pub fn bell_local_3322(rho: &DensityMatrix, cfg: &OptConfig) -> Result<CriterionReport> {
    let chsh = chsh_max(rho, cfg)?;
    let i3322 = i3322_max(rho, cfg)?;
    let value = chsh.value.max(i3322.value);
    let mut report = CriterionReport::new("bell-local", value, 0.0, |v| match v {
        Verdict::Violated => "nonlocal",
        _ => "bell-local",
    });
    report.components = vec![chsh, i3322];
    Ok(report)
}

/// Exponent applied to the second-party marginal by the flattening map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MarginalMap {
    /// `ρ_B^(−1/2)` on both sides; yields `ρ_B = I/2`.
    #[default]
    InverseSqrt,
    /// `ρ_B^(−1)` on both sides.
    Literal,
}

/// `(I ⊗ M) ρ (I ⊗ M)` renormalized, with `M` a power of `ρ_B`.
pub fn lambda_map(rho: &DensityMatrix, map: MarginalMap) -> Result<DensityMatrix> {
    if rho.qubits() != 2 {
        return Err(Error::State("the marginal map needs a two-qubit state".into()));
    }
    let rho_b = partial_trace(rho, &[1])?;
    let exponent = match map {
        MarginalMap::InverseSqrt => -0.5,
        MarginalMap::Literal => -1.0,
    };
    let m = psd_power(rho_b.matrix(), exponent, MARGINAL_EPS)?;
    let k = kron(&ComplexMatrix::identity(2)?, &m)?;
    DensityMatrix::from_unnormalized(&(&(&k * rho.matrix()) * &k))
}

/// First-party Bloch vector and diagonal correlations with a null second-party vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub a: Vec3,
    pub w: Vec3,
}

impl CanonicalForm {
    pub fn bloch(&self) -> BlochForm {
        BlochForm::diagonal(self.a, [0.0; 3], self.w)
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::with_tolerance(reconstruct(&self.bloch()), 1e-9)
    }
}

pub fn canonical_form(rho: &DensityMatrix) -> Result<CanonicalForm> {
    let flat = decompose(&lambda_map(rho, MarginalMap::InverseSqrt)?)?;
    let d = diagonalize_correlation(&flat);
    Ok(CanonicalForm { a: d.base.u, w: d.base.w_diagonal() })
}

/// `max_x (a·x)² + 2‖diag(w) x‖`.
pub fn bowles_value(c: &CanonicalForm, cfg: &OptConfig) -> Result<OptResult> {
    let (a, w) = (c.a, c.w);
    max_unit_sphere(
        |x| {
            let ax = dot3(a, x);
            let n = ((w[0] * x[0]).powi(2) + (w[1] * x[1]).powi(2) + (w[2] * x[2]).powi(2)).sqrt();
            ax * ax + 2.0 * n
        },
        cfg,
    )
}

/// Sufficient unsteerability test; `≤ 1` certifies, otherwise undecided.
pub fn bowles_unsteerable(c: &CanonicalForm, cfg: &OptConfig) -> Result<CriterionReport> {
    let res = bowles_value(c, cfg)?;
    let mut report = CriterionReport::new("unsteerable", res.value, 1.0, unsteerability_word);
    report.witness = Some(Witness::Direction { x: [res.argmax[0], res.argmax[1], res.argmax[2]] });
    report.optimizer = Some((&res).into());
    if norm3(c.a) <= 1e-10 {
        report.closed_form = Some(2.0 * c.w.iter().fold(0.0f64, |m, x| m.max(x.abs())));
    }
    Ok(report)
}

/// Canonical form of `rho` followed by [`bowles_unsteerable`].
pub fn bowles_for_state(rho: &DensityMatrix, cfg: &OptConfig) -> Result<CriterionReport> {
    bowles_unsteerable(&canonical_form(rho)?, cfg)
}

/// `2 max_j |w_j|` for a canonical form with null Bloch vector.
pub fn closed_form_unsteerable(c: &CanonicalForm) -> Result<CriterionReport> {
    if norm3(c.a) > 1e-10 {
        return Err(Error::Precondition(format!(
            "closed form needs a null Bloch vector, got |a| = {:e}",
            norm3(c.a)
        )));
    }
    let value = 2.0 * c.w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(CriterionReport::new("unsteerable-closed-form", value, 1.0, unsteerability_word))
}

const PAIRS: [[usize; 2]; 3] = [[1, 2], [1, 3], [2, 3]];

/// Largest pairwise `Tr(WᵀW)` of a three-qubit state.
pub fn reduced_steering(rho3: &DensityMatrix) -> Result<CriterionReport> {
    let pairs = reduced_pairs(rho3)?;
    let mut best = (f64::NEG_INFINITY, 0);
    for (k, pair) in pairs.iter().enumerate() {
        let s = f3_value(&decompose(pair)?);
        if s > best.0 {
            best = (s, k);
        }
    }
    let mut report = CriterionReport::new("reduced-steering", best.0, 1.0, steering_word);
    report.witness = Some(Witness::Pair { parties: PAIRS[best.1] });
    Ok(report)
}

/// Pairwise `Tr(WᵀW)` values of a three-qubit state, pairs `(1,2)`, `(1,3)`, `(2,3)`.
pub fn reduced_f3_values(rho3: &DensityMatrix) -> Result<[f64; 3]> {
    let pairs = reduced_pairs(rho3)?;
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(&pairs) {
        *o = f3_value(&decompose(p)?);
    }
    Ok(out)
}
