//! Grid scans over family parameters with per-outcome activation flags.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::decompose;
use crate::criteria::{
    bowles_unsteerable, canonical_form, chsh_max, f3_value, i3322_max, reduced_steering, DELTA,
};
use crate::error::{Error, Result};
use crate::families::{make_state, omega_unsteerable, FamilySpec};
use crate::netswap::{bsm_swap, star_swap, MeasurementBasis, SwapOutcome, DEGENERATE_PROB};
use crate::optimize::OptConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    /// Number of grid points, endpoints included.
    pub steps: usize,
}

impl Axis {
    pub fn new(name: &str, lo: f64, hi: f64, steps: usize) -> Self {
        Axis { name: name.to_string(), lo, hi, steps }
    }

    pub fn point(&self, k: usize) -> f64 {
        if k + 1 == self.steps {
            return self.hi;
        }
        self.lo + (self.hi - self.lo) * k as f64 / (self.steps - 1) as f64
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.steps - 1) as f64
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axes: Vec<Axis>,
    pub fixed: BTreeMap<String, f64>,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Self {
        GridSpec { axes, fixed: BTreeMap::new() }
    }

    pub fn fix(mut self, name: &str, value: f64) -> Self {
        self.fixed.insert(name.to_string(), value);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for a in &self.axes {
            if a.steps < 2 || !(a.lo < a.hi) {
                return Err(Error::Argument(format!(
                    "axis {} needs lo < hi and at least 2 steps",
                    a.name
                )));
            }
            if self.fixed.contains_key(&a.name) {
                return Err(Error::Argument(format!("{} is both an axis and fixed", a.name)));
            }
        }
        for (i, a) in self.axes.iter().enumerate() {
            if self.axes[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::Argument(format!("duplicate axis {}", a.name)));
            }
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.axes.iter().map(|a| a.steps).product()
    }

    /// Coordinates of cell `index`; the last axis varies fastest.
    pub fn coordinates(&self, mut index: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        for (k, a) in self.axes.iter().enumerate().rev() {
            out[k] = a.point(index % a.steps);
            index /= a.steps;
        }
        out
    }

    fn params(&self, coords: &[f64]) -> BTreeMap<String, f64> {
        let mut m = self.fixed.clone();
        for (a, &x) in self.axes.iter().zip(coords) {
            m.insert(a.name.clone(), x);
        }
        m
    }

    fn check_names(&self, allowed: &[&str]) -> Result<()> {
        for name in self.axes.iter().map(|a| &a.name).chain(self.fixed.keys()) {
            if !allowed.contains(&name.as_str()) {
                return Err(Error::Argument(format!(
                    "unknown parameter {name}; expected one of {allowed:?}"
                )));
            }
        }
        Ok(())
    }
}

fn param(m: &BTreeMap<String, f64>, name: &str) -> Result<f64> {
    m.get(name)
        .copied()
        .ok_or_else(|| Error::Argument(format!("parameter {name} is neither an axis nor fixed")))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    /// Run CHSH and I3322 maximizations on activated outcomes.
    pub audit_bell: bool,
    /// Require the optimizer-based unsteerability certificate of genuine-scan inputs.
    pub certify_inputs: bool,
    pub opt: OptConfig,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { audit_bell: false, certify_inputs: true, opt: OptConfig::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellAudit {
    pub chsh: f64,
    pub i3322: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub coords: Vec<f64>,
    /// Criterion values of the inputs.
    pub inputs: Vec<f64>,
    pub inputs_ok: bool,
    pub probabilities: Vec<f64>,
    /// Steering value of each conditional (pairwise maximum for star outcomes).
    pub values: Vec<f64>,
    pub activated: Vec<bool>,
    pub boundary: Vec<bool>,
    pub degenerate: Vec<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<Vec<Option<BellAudit>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub kind: String,
    pub input_criterion: String,
    pub output_criterion: String,
    pub delta: f64,
    pub seed: u64,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub grid: GridSpec,
    pub labels: Vec<String>,
    pub cells: Vec<SweepCell>,
    pub metadata: SweepMetadata,
}

fn activation(inputs_ok: bool, o: &SwapOutcome, value: f64) -> bool {
    inputs_ok && !o.degenerate && o.probability >= DEGENERATE_PROB && value > 1.0 + DELTA
}

fn finish_cell(
    coords: Vec<f64>,
    inputs: Vec<f64>,
    inputs_ok: bool,
    outcomes: &[SwapOutcome],
    values: Vec<f64>,
    opts: &ScanOptions,
) -> Result<SweepCell> {
    let activated: Vec<bool> = outcomes
        .iter()
        .zip(&values)
        .map(|(o, &v)| activation(inputs_ok, o, v))
        .collect();
    let audit = if opts.audit_bell && activated.iter().any(|&a| a) {
        let mut rows = Vec::with_capacity(outcomes.len());
        for (o, &act) in outcomes.iter().zip(&activated) {
            rows.push(if act {
                Some(BellAudit {
                    chsh: chsh_max(&o.conditional, &opts.opt)?.value,
                    i3322: i3322_max(&o.conditional, &opts.opt)?.value,
                })
            } else {
                None
            });
        }
        Some(rows)
    } else {
        None
    };
    Ok(SweepCell {
        coords,
        inputs,
        inputs_ok,
        probabilities: outcomes.iter().map(|o| o.probability).collect(),
        boundary: values.iter().map(|v| (v - 1.0).abs() <= DELTA).collect(),
        degenerate: outcomes.iter().map(|o| o.degenerate).collect(),
        values,
        activated,
        audit,
        note: None,
    })
}

fn run_cells<F>(grid: &GridSpec, cell: F) -> Result<Vec<SweepCell>>
where
    F: Fn(Vec<f64>, &BTreeMap<String, f64>) -> Result<SweepCell> + Sync,
{
    grid.validate()?;
    (0..grid.cell_count())
        .into_par_iter()
        .map(|i| {
            let coords = grid.coordinates(i);
            let params = grid.params(&coords);
            cell(coords, &params)
        })
        .collect()
}

fn metadata(kind: &str, input: &str, output: &str, opts: &ScanOptions) -> SweepMetadata {
    SweepMetadata {
        kind: kind.to_string(),
        input_criterion: input.to_string(),
        output_criterion: output.to_string(),
        delta: DELTA,
        seed: opts.opt.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

/// `γ₁(p, α)` swapped with `γ₂(p, α)` through the Bell measurement.
///
/// Inputs must both have `Tr(WᵀW) ≤ 1 − δ`.
pub fn scan_linear(grid: &GridSpec, opts: &ScanOptions) -> Result<SweepResult> {
    grid.check_names(&["p", "alpha"])?;
    let cells = run_cells(grid, |coords, m| {
        let (p, alpha) = (param(m, "p")?, param(m, "alpha")?);
        let g1 = make_state(&FamilySpec::Gamma1 { p, alpha })?;
        let g2 = make_state(&FamilySpec::Gamma2 { p, alpha })?;
        let inputs = vec![f3_value(&decompose(&g1)?), f3_value(&decompose(&g2)?)];
        let ok = inputs.iter().all(|&s| s <= 1.0 - DELTA);
        let outcomes = bsm_swap(&g1, &g2)?;
        let values = outcomes
            .iter()
            .map(|o| decompose(&o.conditional).map(|b| f3_value(&b)))
            .collect::<Result<Vec<_>>>()?;
        finish_cell(coords, inputs, ok, &outcomes, values, opts)
    })?;
    Ok(SweepResult {
        grid: grid.clone(),
        labels: MeasurementBasis::bell().labels().to_vec(),
        cells,
        metadata: metadata("linear", "f3", "f3", opts),
    })
}

/// Three `γ₁(pᵢ, α)` links measured by the star basis; outputs scored by reduced steering.
pub fn scan_star(grid: &GridSpec, opts: &ScanOptions) -> Result<SweepResult> {
    grid.check_names(&["alpha", "p1", "p2", "p3"])?;
    let cells = run_cells(grid, |coords, m| {
        let alpha = param(m, "alpha")?;
        let mut links = Vec::with_capacity(3);
        for name in ["p1", "p2", "p3"] {
            links.push(make_state(&FamilySpec::Gamma1 { p: param(m, name)?, alpha })?);
        }
        let inputs = links
            .iter()
            .map(|r| decompose(r).map(|b| f3_value(&b)))
            .collect::<Result<Vec<_>>>()?;
        let ok = inputs.iter().all(|&s| s <= 1.0 - DELTA);
        let outcomes = star_swap(&links[0], &links[1], &links[2])?;
        let values = outcomes
            .iter()
            .map(|o| reduced_steering(&o.conditional).map(|r| r.value))
            .collect::<Result<Vec<_>>>()?;
        finish_cell(coords, inputs, ok, &outcomes, values, opts)
    })?;
    Ok(SweepResult {
        grid: grid.clone(),
        labels: MeasurementBasis::star().labels().to_vec(),
        cells,
        metadata: metadata("star", "f3", "reduced-steering", opts),
    })
}

/// `Ω(β₁, s₁)` and `Ω(β₂, s₂)` in canonical form swapped through the Bell measurement.
///
/// Missing `beta2`/`s2` copy `beta1`/`s1`, giving identical links. Inputs must
/// satisfy the closed-form Ω condition and, with `certify_inputs`, have an
/// unsteerability value `≤ 1 − δ`.
pub fn scan_genuine(grid: &GridSpec, opts: &ScanOptions) -> Result<SweepResult> {
    grid.check_names(&["beta1", "s1", "beta2", "s2"])?;
    let cells = run_cells(grid, |coords, m| {
        let beta1 = param(m, "beta1")?;
        let s1 = param(m, "s1")?;
        let beta2 = param(m, "beta2").unwrap_or(beta1);
        let s2 = param(m, "s2").unwrap_or(s1);
        let specs = [FamilySpec::Omega { beta: beta1, s: s1 }, FamilySpec::Omega { beta: beta2, s: s2 }];
        let mut canon = Vec::with_capacity(2);
        let mut inputs = Vec::with_capacity(2);
        let mut ok = omega_unsteerable(beta1, s1) && omega_unsteerable(beta2, s2);
        for spec in &specs {
            let c = match canonical_form(&make_state(spec)?) {
                Ok(c) => c,
                Err(e @ Error::SingularMarginal { .. }) => {
                    return Ok(singular_cell(coords, e));
                }
                Err(e) => return Err(e),
            };
            let v = bowles_unsteerable(&c, &opts.opt)?.value;
            if opts.certify_inputs {
                ok &= v <= 1.0 - DELTA;
            }
            inputs.push(v);
            canon.push(c.to_density()?);
        }
        let outcomes = bsm_swap(&canon[0], &canon[1])?;
        let values = outcomes
            .iter()
            .map(|o| decompose(&o.conditional).map(|b| f3_value(&b)))
            .collect::<Result<Vec<_>>>()?;
        finish_cell(coords, inputs, ok, &outcomes, values, opts)
    })?;
    Ok(SweepResult {
        grid: grid.clone(),
        labels: MeasurementBasis::bell().labels().to_vec(),
        cells,
        metadata: metadata("genuine", "omega-closed-form+unsteerable", "f3", opts),
    })
}

fn singular_cell(coords: Vec<f64>, e: Error) -> SweepCell {
    SweepCell {
        coords,
        inputs: Vec::new(),
        inputs_ok: false,
        probabilities: vec![0.0; 4],
        values: vec![0.0; 4],
        activated: vec![false; 4],
        boundary: vec![false; 4],
        degenerate: vec![true; 4],
        audit: None,
        note: Some(e.to_string()),
    }
}

/// Closed run of consecutive activated cells along a one-axis scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    /// First activated grid point.
    pub lo: f64,
    /// Last activated grid point.
    pub hi: f64,
}

/// Maximal runs of activated cells for `outcome` in a one-axis scan.
pub fn activation_intervals(result: &SweepResult, outcome: usize) -> Result<Vec<Interval>> {
    if result.grid.axes.len() != 1 {
        return Err(Error::Argument("intervals need a one-axis scan".into()));
    }
    let mut out = Vec::new();
    let mut open: Option<Interval> = None;
    for cell in &result.cells {
        let x = cell.coords[0];
        if cell.activated[outcome] {
            open = Some(match open {
                Some(iv) => Interval { hi: x, ..iv },
                None => Interval { lo: x, hi: x },
            });
        } else if let Some(iv) = open.take() {
            out.push(iv);
        }
    }
    out.extend(open);
    Ok(out)
}

/// Header: axes, `s_<label>`, `act_<label>`, `bnd_<label>`, `inputs_ok`.
pub fn to_csv(result: &SweepResult) -> String {
    let mut out = String::new();
    let mut header: Vec<String> = result.grid.axes.iter().map(|a| a.name.clone()).collect();
    for prefix in ["s", "act", "bnd"] {
        header.extend(result.labels.iter().map(|l| format!("{prefix}_{l}")));
    }
    header.push("inputs_ok".into());
    out.push_str(&header.join(","));
    out.push('\n');
    for cell in &result.cells {
        let mut row: Vec<String> = cell.coords.iter().map(|x| format!("{x:.16e}")).collect();
        row.extend(cell.values.iter().map(|x| format!("{x:.16e}")));
        row.extend(cell.activated.iter().map(|&b| (b as u8).to_string()));
        row.extend(cell.boundary.iter().map(|&b| (b as u8).to_string()));
        row.push((cell.inputs_ok as u8).to_string());
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

pub fn to_json(result: &SweepResult) -> String {
    serde_json::to_string_pretty(result).expect("sweep result serializes")
}
