//! Command-line front end. [`run`] parses arguments and returns the exit code.
//!
//! Exit codes: 0 success, 1 reproduction mismatch, 2 input error, 3 I/O error.

use std::f64::consts::FRAC_PI_4;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::bloch::{decompose, BlochForm};
use crate::criteria::{
    bell_local_3322, bowles_for_state, canonical_form, chsh_max, cjwr_max, f3_report, i3322_max,
    reduced_f3_values, CriterionReport, DELTA,
};
use crate::error::Error;
use crate::families::{make_state, FamilySpec};
use crate::netswap::{bsm_swap, star_swap, SwapOutcome};
use crate::optimize::{appendix_c_max, appendix_c_objective, OptConfig};
use crate::qmat::{validate_density, DensityMatrix};
use crate::sweep::{
    activation_intervals, scan_genuine, scan_linear, scan_star, to_csv, to_json, Axis, GridSpec,
    Interval, ScanOptions, SweepResult,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "steernet", version, about = "Steering activation in entanglement-swapping networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validation report, Bloch form and steering value of a state.
    Inspect { state: String },
    /// Evaluate one criterion on a state and print the report.
    Check {
        criterion: CheckKind,
        state: String,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Swap two states (Bell measurement) or three (star measurement).
    Swap {
        left: String,
        right: String,
        /// Third link; switches to the star measurement.
        #[arg(long)]
        star: Option<String>,
        /// Replace each input by its canonical form first.
        #[arg(long)]
        canonical: bool,
    },
    /// Grid scan writing CSV or JSON.
    Scan {
        #[command(subcommand)]
        kind: ScanKind,
    },
    /// Run a built-in configuration and compare with the published values.
    Reproduce {
        target: Target,
        #[command(flatten)]
        opt: OptArgs,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    F3,
    Cjwr,
    Chsh,
    I3322,
    BellLocal,
    Unsteerable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Fig2,
    StarTable,
    GenuineTable,
    #[value(name = "appendixC")]
    AppendixC,
    #[value(name = "appendixD")]
    AppendixD,
}

#[derive(Args, Debug, Clone)]
pub struct OptArgs {
    #[arg(long, default_value_t = OptConfig::default().seed)]
    pub seed: u64,
    #[arg(long, default_value_t = OptConfig::default().restarts)]
    pub restarts: usize,
}

impl OptArgs {
    fn config(&self) -> OptConfig {
        OptConfig { seed: self.seed, restarts: self.restarts, ..OptConfig::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, default_value_t = OptConfig::default().seed)]
    pub seed: u64,
    #[arg(long, default_value_t = OptConfig::default().restarts)]
    pub restarts: usize,
    /// Run CHSH and I3322 maximizations on activated outcomes.
    #[arg(long)]
    pub audit_bell: bool,
}

#[derive(Subcommand, Debug)]
pub enum ScanKind {
    /// γ₁(p, α) with γ₂(p, α) through the Bell measurement.
    Linear {
        #[arg(long, default_value = "0:1:200")]
        p: Range,
        #[arg(long, conflicts_with = "alpha_fixed")]
        alpha: Option<Range>,
        #[arg(long)]
        alpha_fixed: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Three γ₁(pᵢ, α) links through the star measurement.
    Star {
        #[arg(long, default_value_t = 0.2)]
        alpha: f64,
        #[arg(long, default_value = "0:1:64")]
        p1: Range,
        #[arg(long, default_value = "0:1:64")]
        p2: Range,
        #[arg(long, default_value = "0:1:64")]
        p3: Range,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Ω(β₁, s₁) with Ω(β₂, s₂) in canonical form; β₂, s₂ default to β₁, s₁.
    Genuine {
        #[arg(long)]
        beta1: Range,
        #[arg(long)]
        s1: Range,
        #[arg(long)]
        beta2: Option<Range>,
        #[arg(long)]
        s2: Option<Range>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// A single value or `lo:hi:steps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Range {
    Value(f64),
    Grid { lo: f64, hi: f64, steps: usize },
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}"));
        match parts.as_slice() {
            [v] => Ok(Range::Value(num(v)?)),
            [lo, hi, steps] => Ok(Range::Grid {
                lo: num(lo)?,
                hi: num(hi)?,
                steps: steps.trim().parse().map_err(|e| format!("bad step count {steps:?}: {e}"))?,
            }),
            _ => Err(format!("expected a value or lo:hi:steps, got {s:?}")),
        }
    }
}

fn build_grid(params: &[(&str, Range)]) -> GridSpec {
    let mut grid = GridSpec::default();
    for &(name, r) in params {
        match r {
            Range::Value(v) => grid = grid.fix(name, v),
            Range::Grid { lo, hi, steps } => grid.axes.push(Axis::new(name, lo, hi, steps)),
        }
    }
    grid
}

enum Failure {
    Input(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn parse_state(text: &str) -> Result<DensityMatrix, Failure> {
    Ok(make_state(&FamilySpec::from_json(text)?)?)
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("output serializes")
}

fn bloch_json(b: &BlochForm) -> serde_json::Value {
    json!({ "u": b.u, "v": b.v, "w": b.w })
}

fn inspect(text: &str) -> Result<String, Failure> {
    let spec = FamilySpec::from_json(text)?;
    let rho = make_state(&spec)?;
    let b = decompose(&rho)?;
    let canonical = canonical_form(&rho).ok();
    Ok(pretty(&json!({
        "state": spec,
        "validation": validate_density(rho.matrix(), crate::qmat::DENSITY_TOL),
        "bloch": bloch_json(&b),
        "f3": b.correlation_weight(),
        "canonical": canonical,
    })))
}

fn check(kind: CheckKind, text: &str, cfg: &OptConfig) -> Result<String, Failure> {
    let rho = parse_state(text)?;
    let report: CriterionReport = match kind {
        CheckKind::F3 => f3_report(&rho)?,
        CheckKind::Cjwr => cjwr_max(&rho, cfg)?,
        CheckKind::Chsh => chsh_max(&rho, cfg)?,
        CheckKind::I3322 => i3322_max(&rho, cfg)?,
        CheckKind::BellLocal => bell_local_3322(&rho, cfg)?,
        CheckKind::Unsteerable => bowles_for_state(&rho, cfg)?,
    };
    Ok(pretty(&report))
}

fn outcome_json(o: &SwapOutcome, star: bool) -> Result<serde_json::Value, Failure> {
    let mut v = json!({
        "label": o.label,
        "probability": o.probability,
        "degenerate": o.degenerate,
    });
    if star {
        let pairs = reduced_f3_values(&o.conditional)?;
        v["reduced_f3"] = json!(pairs);
        v["reduced_steerable"] = json!(pairs.iter().any(|&s| s > 1.0 + DELTA));
    } else {
        let b = decompose(&o.conditional)?;
        v["bloch"] = bloch_json(&b);
        v["f3"] = json!(b.correlation_weight());
    }
    Ok(v)
}

fn swap(left: &str, right: &str, third: Option<&str>, canonical: bool) -> Result<String, Failure> {
    let mut states = vec![parse_state(left)?, parse_state(right)?];
    if let Some(t) = third {
        states.push(parse_state(t)?);
    }
    if canonical {
        states = states
            .iter()
            .map(|r| canonical_form(r).and_then(|c| c.to_density()))
            .collect::<Result<_, _>>()?;
    }
    let outcomes = match states.as_slice() {
        [a, b] => bsm_swap(a, b)?,
        [a, b, c] => star_swap(a, b, c)?,
        _ => unreachable!(),
    };
    let star = third.is_some();
    let rows = outcomes
        .iter()
        .map(|o| outcome_json(o, star))
        .collect::<Result<Vec<_>, _>>()?;
    let total: f64 = outcomes.iter().map(|o| o.probability).sum();
    Ok(pretty(&json!({ "outcomes": rows, "probability_sum": total })))
}

fn scan(kind: &ScanKind) -> Result<(), Failure> {
    let (result, output) = match kind {
        ScanKind::Linear { p, alpha, alpha_fixed, output } => {
            let alpha = match (alpha, alpha_fixed) {
                (_, Some(v)) => Range::Value(*v),
                (Some(r), None) => *r,
                (None, None) => Range::Grid { lo: 0.0, hi: FRAC_PI_4, steps: 200 },
            };
            let grid = build_grid(&[("p", *p), ("alpha", alpha)]);
            (scan_linear(&grid, &scan_options(output))?, output)
        }
        ScanKind::Star { alpha, p1, p2, p3, output } => {
            let grid = build_grid(&[("alpha", Range::Value(*alpha)), ("p1", *p1), ("p2", *p2), ("p3", *p3)]);
            (scan_star(&grid, &scan_options(output))?, output)
        }
        ScanKind::Genuine { beta1, s1, beta2, s2, output } => {
            let mut params = vec![("beta1", *beta1), ("s1", *s1)];
            params.extend(beta2.map(|r| ("beta2", r)));
            params.extend(s2.map(|r| ("s2", r)));
            (scan_genuine(&build_grid(&params), &scan_options(output))?, output)
        }
    };
    let body = match output.format {
        Format::Csv => to_csv(&result),
        Format::Json => to_json(&result),
    };
    match &output.out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| Failure::Io(e.to_string())),
    }
}

fn scan_options(o: &OutputArgs) -> ScanOptions {
    ScanOptions {
        audit_bell: o.audit_bell,
        opt: OptConfig { seed: o.seed, restarts: o.restarts, ..OptConfig::default() },
        ..ScanOptions::default()
    }
}

/// One compared quantity of a reproduction target.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub got: String,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, expected: impl Into<String>, got: impl Into<String>, pass: bool) -> Self {
        Check { name: name.into(), expected: expected.into(), got: got.into(), pass }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: expected {}, got {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.expected,
            self.got
        )
    }
}

fn show_intervals(iv: &[Interval]) -> String {
    if iv.is_empty() {
        return "none".into();
    }
    iv.iter()
        .map(|i| format!("[{:.4}, {:.4}]", i.lo, i.hi))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Single activation run whose ends sit within one grid step of `(lo, hi)`.
pub fn interval_matches(iv: &[Interval], lo: f64, hi: f64, step: f64) -> bool {
    let tol = step * (1.0 + 1e-9);
    iv.len() == 1 && (iv[0].lo - lo).abs() <= tol && (iv[0].hi - hi).abs() <= tol
}

fn interval_check(result: &SweepResult, outcome: usize, name: String, expected: (f64, f64), shown: &str) -> Result<Check, Error> {
    let iv = activation_intervals(result, outcome)?;
    let step = result.grid.axes[0].step();
    let pass = interval_matches(&iv, expected.0, expected.1, step);
    Ok(Check::new(name, format!("{shown} ± {step:.4}"), show_intervals(&iv), pass))
}

fn none_check(result: &SweepResult, outcome: usize, name: String) -> Result<Check, Error> {
    let iv = activation_intervals(result, outcome)?;
    Ok(Check::new(name, "none", show_intervals(&iv), iv.is_empty()))
}

/// Grid of the one-axis table reproductions.
pub const TABLE_STEPS: usize = 500;

pub fn reproduce(target: Target, cfg: &OptConfig) -> Result<Vec<Check>, Error> {
    let opts = ScanOptions { opt: *cfg, ..ScanOptions::default() };
    let mut checks = Vec::new();
    match target {
        Target::Fig2 => {
            let grid = GridSpec::new(vec![Axis::new("p", 0.0, 1.0, TABLE_STEPS)]).fix("alpha", 0.1);
            let r = scan_linear(&grid, &opts)?;
            for (k, label) in [(0, "00"), (1, "01")] {
                checks.push(interval_check(&r, k, format!("alpha=0.1 outcome {label}"), (0.001, 0.331), "(0.001, 0.331)")?);
            }
            for (k, label) in [(2, "10"), (3, "11")] {
                checks.push(none_check(&r, k, format!("alpha=0.1 outcome {label}"))?);
            }
            let cell = scan_linear(&GridSpec::default().fix("p", 0.6).fix("alpha", 0.6), &opts)?;
            let c = &cell.cells[0];
            checks.push(Check::new(
                "(p, alpha) = (0.6, 0.6)",
                "inputs unsteerable, no activation",
                format!("inputs {:.5}/{:.5}, activated {:?}", c.inputs[0], c.inputs[1], c.activated),
                c.inputs_ok && c.activated.iter().all(|&a| !a),
            ));
            checks.push(bell_audit(cfg)?);
        }
        Target::StarTable => {
            let grid = GridSpec::new(vec![Axis::new("p3", 0.0, 1.0, TABLE_STEPS)])
                .fix("alpha", 0.2)
                .fix("p1", 0.08)
                .fix("p2", 0.075);
            let r = scan_star(&grid, &opts)?;
            for (k, lo, hi, shown) in STAR_ROWS {
                checks.push(interval_check(&r, k - 1, format!("star outcome {k}"), (lo, hi), shown)?);
            }
            for k in 2..=5 {
                checks.push(none_check(&r, k - 1, format!("star outcome {k}"))?);
            }
        }
        Target::GenuineTable => {
            for (k, b1, b2, s1, lo) in GENUINE_ROWS {
                let grid = GridSpec::new(vec![Axis::new("s2", 0.0, 1.0, TABLE_STEPS)])
                    .fix("beta1", b1)
                    .fix("beta2", b2)
                    .fix("s1", s1);
                let r = scan_genuine(&grid, &opts)?;
                let label = &r.labels[k];
                checks.push(interval_check(
                    &r,
                    k,
                    format!("outcome {label} at (beta1, beta2, s1) = ({b1}, {b2}, {s1})"),
                    (lo, 1.0),
                    &format!("[{lo}, 1]"),
                )?);
            }
            let grid = GridSpec::new(vec![Axis::new("s1", 0.0, 1.0, TABLE_STEPS)]).fix("beta1", 0.7);
            let r = scan_genuine(&grid, &opts)?;
            for k in 0..4 {
                let label = r.labels[k].clone();
                checks.push(interval_check(&r, k, format!("identical beta=0.7 outcome {label}"), (0.77, 1.0), "(0.77, 1]")?);
            }
        }
        Target::AppendixC => {
            let res = appendix_c_max(cfg)?;
            checks.push(Check::new("optimum", "0.75 ± 1e-3", format!("{:.6}", res.value), (res.value - 0.75).abs() <= 1e-3));
            let listed = appendix_c_objective([1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, 0.0, 0.0], [-1.0, 0.0, 0.0]);
            checks.push(Check::new("listed maximizer", "0.75", format!("{listed}"), listed == 0.75));
        }
        Target::AppendixD => {
            let outcomes = appendix_d_outcomes()?;
            for (o, (u3, t)) in outcomes.iter().zip(APPENDIX_D) {
                let b = decompose(&o.conditional)?;
                let got_t = [b.w[0][0], b.w[1][1], b.w[2][2]];
                let mut dev = (b.u[2] - u3).abs().max(b.u[0].abs()).max(b.u[1].abs());
                for j in 0..3 {
                    dev = dev.max(b.v[j].abs()).max((got_t[j] - t[j]).abs());
                    for k in 0..3 {
                        if j != k {
                            dev = dev.max(b.w[j][k].abs());
                        }
                    }
                }
                checks.push(Check::new(
                    format!("conditional {} Bloch data", o.label),
                    format!("U = (0, 0, {u3}), V = 0, T = diag{t:?} to 1e-5"),
                    format!("U3 = {:.7}, T = diag({:.7}, {:.7}, {:.7}), max dev {dev:.1e}", b.u[2], got_t[0], got_t[1], got_t[2]),
                    dev <= 1e-5,
                ));
                let bw = bowles_for_state(&o.conditional, cfg)?;
                checks.push(Check::new(
                    format!("conditional {} unsteerable", o.label),
                    "value ≤ 1",
                    format!("{:.6}", bw.value),
                    bw.value <= 1.0 - DELTA,
                ));
            }
        }
    }
    Ok(checks)
}

/// `(outcome, lo, hi, printed range)` of the star table slice.
pub const STAR_ROWS: [(usize, f64, f64, &str); 4] = [
    (1, 0.2, 1.0, "(0.2, 1]"),
    (6, 0.071, 0.467, "(0.071, 0.467]"),
    (7, 0.071, 0.465, "(0.071, 0.465]"),
    (8, 0.2, 1.0, "(0.2, 1)"),
];

/// `(outcome index, β₁, β₂, s₁, lower end of the s₂ range)`.
pub const GENUINE_ROWS: [(usize, f64, f64, f64, f64); 4] = [
    (0, 0.75, 0.76, 0.99, 0.58),
    (1, 0.65, 0.6, 0.97, 0.78),
    (2, 0.55, 0.55, 0.9, 0.88),
    (3, 0.6, 0.55, 0.8, 0.98),
];

/// `(U₃, diag T)` for outcomes 00, 01, 10, 11 of the Ω₃/Ω₄ negative control.
pub const APPENDIX_D: [(f64, [f64; 3]); 4] = [
    (0.98107, [0.0729052, -0.0729052, 0.0128697]),
    (0.98107, [-0.0729052, 0.0729052, 0.0128697]),
    (0.907448, [0.0729052, 0.0729052, -0.0128697]),
    (0.907448, [-0.0729052, -0.0729052, -0.0128697]),
];

/// Swap outcomes of Ω(0.1, 0.7) and Ω(0.3, 0.59) in canonical form.
pub fn appendix_d_outcomes() -> Result<Vec<SwapOutcome>, Error> {
    let canon = |beta, s| {
        make_state(&FamilySpec::Omega { beta, s })
            .and_then(|r| canonical_form(&r))
            .and_then(|c| c.to_density())
    };
    bsm_swap(&canon(0.1, 0.7)?, &canon(0.3, 0.59)?)
}

/// CHSH and I3322 on 20 activated cells spread over the linear-network region.
fn bell_audit(cfg: &OptConfig) -> Result<Check, Error> {
    let grid = GridSpec::new(vec![Axis::new("p", 0.0, 1.0, 40), Axis::new("alpha", 0.0, FRAC_PI_4, 40)]);
    let r = scan_linear(&grid, &ScanOptions { opt: *cfg, ..ScanOptions::default() })?;
    let active: Vec<_> = r.cells.iter().filter(|c| c.activated.iter().any(|&a| a)).collect();
    let n = active.len().min(20);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..n {
        let cell = active[k * active.len() / n];
        let (p, alpha) = (cell.coords[0], cell.coords[1]);
        let g1 = make_state(&FamilySpec::Gamma1 { p, alpha })?;
        let g2 = make_state(&FamilySpec::Gamma2 { p, alpha })?;
        for (o, &act) in bsm_swap(&g1, &g2)?.iter().zip(&cell.activated) {
            if act {
                worst = worst.max(chsh_max(&o.conditional, cfg)?.value);
                worst = worst.max(i3322_max(&o.conditional, cfg)?.value);
            }
        }
    }
    Ok(Check::new(
        format!("Bell locality of {n} activated cells"),
        "CHSH, I3322 ≤ 1e-6",
        format!("max {worst:.6}"),
        n == 20 && worst <= DELTA,
    ))
}

/// Parses `args` (program name first), runs the command, writes to the given streams.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result: Result<Option<String>, Failure> = match &cli.command {
        Command::Inspect { state } => inspect(state).map(Some),
        Command::Check { criterion, state, opt } => check(*criterion, state, &opt.config()).map(Some),
        Command::Swap { left, right, star, canonical } => swap(left, right, star.as_deref(), *canonical).map(Some),
        Command::Scan { kind } => scan(kind).map(|_| None),
        Command::Reproduce { target, opt } => match reproduce(*target, &opt.config()) {
            Ok(checks) => {
                let mut text = String::new();
                for c in &checks {
                    text.push_str(&c.line());
                    text.push('\n');
                }
                let _ = out.write_all(text.as_bytes());
                return if checks.iter().all(|c| c.pass) { EXIT_OK } else { EXIT_MISMATCH };
            }
            Err(e) => Err(e.into()),
        },
    };
    match result {
        Ok(Some(text)) => {
            if writeln!(out, "{text}").is_err() {
                return EXIT_IO;
            }
            EXIT_OK
        }
        Ok(None) => EXIT_OK,
        Err(Failure::Input(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_INPUT
        }
        Err(Failure::Io(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_IO
        }
    }
}
