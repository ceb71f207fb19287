//! Acceptance suite: one PASS/FAIL line per criterion, detail lines below it.

mod common;

use std::f64::consts::FRAC_PI_4;
use std::process::ExitCode;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use steernet::bloch::{decompose, BlochForm};
use steernet::criteria::{
    bowles_for_state, bowles_unsteerable, canonical_form, chsh_max, cjwr_max, cjwr_value,
    closed_form_unsteerable, f3_value, horodecki_parameter, i3322_max, CanonicalForm, MeasurementTriad, DELTA,
};
use steernet::families::{eq13_value, eq14_value, make_state, FamilySpec};
use steernet::netswap::{bsm_swap, star_swap, MeasurementBasis};
use steernet::optimize::{appendix_c_max, appendix_c_objective, OptConfig};
use steernet::qmat::DensityMatrix;
use steernet::sweep::{scan_genuine, scan_linear, scan_star, Axis, GridSpec, ScanOptions, SweepResult};

const GRID: usize = 500;
const TRIALS: u64 = 1000;

struct Report {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

impl Report {
    fn new(summary: impl Into<String>) -> Self {
        Report { pass: true, summary: summary.into(), details: Vec::new() }
    }

    fn item(&mut self, name: &str, pass: bool, detail: String) {
        self.pass &= pass;
        self.details.push(format!("{} {name}: {detail}", if pass { "pass" } else { "fail" }));
    }
}

fn gamma(p: f64, alpha: f64) -> (DensityMatrix, DensityMatrix) {
    (
        make_state(&FamilySpec::Gamma1 { p, alpha }).unwrap(),
        make_state(&FamilySpec::Gamma2 { p, alpha }).unwrap(),
    )
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Maximal runs of consecutive activated grid points of one outcome.
fn runs(result: &SweepResult, outcome: usize) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut open = false;
    for cell in &result.cells {
        let x = cell.coords[0];
        if cell.activated[outcome] {
            match (open, out.last_mut()) {
                (true, Some(last)) => last.1 = x,
                _ => out.push((x, x)),
            }
        }
        open = cell.activated[outcome];
    }
    out
}

fn show(runs: &[(f64, f64)]) -> String {
    if runs.is_empty() {
        return "none".into();
    }
    runs.iter().map(|(a, b)| format!("[{a:.4}, {b:.4}]")).collect::<Vec<_>>().join(" ")
}

fn matches(runs: &[(f64, f64)], lo: f64, hi: f64) -> bool {
    let tol = 1.0 / GRID as f64 * (1.0 + 1e-9);
    runs.len() == 1 && (runs[0].0 - lo).abs() <= tol && (runs[0].1 - hi).abs() <= tol
}

fn max_dev(got: &BlochForm, u: [f64; 3], v: [f64; 3], t: [f64; 3]) -> f64 {
    let mut dev = 0.0f64;
    for j in 0..3 {
        dev = dev.max((got.u[j] - u[j]).abs()).max((got.v[j] - v[j]).abs());
        for k in 0..3 {
            let want = if j == k { t[j] } else { 0.0 };
            dev = dev.max((got.w[j][k] - want).abs());
        }
    }
    dev
}

fn criterion_1() -> Report {
    let mut r = Report::new("Bloch data of the gamma pair at (0.6, 0.6) to 1e-5");
    let (g1, g2) = gamma(0.6, 0.6);
    let t = [0.372816, 0.372816, 0.2];
    let b1 = decompose(&g1).unwrap();
    let d1 = max_dev(&b1, [0.0, 0.0, 0.455057], [0.0, 0.0, 0.744943], t);
    r.item("gamma1", d1 <= 1e-5, format!("u3 = {:.6}, v3 = {:.6}, max dev {d1:.1e}", b1.u[2], b1.v[2]));
    let b2 = decompose(&g2).unwrap();
    let d2 = max_dev(&b2, [0.0, 0.0, -0.744943], [0.0, 0.0, -0.455057], t);
    r.item("gamma2", d2 <= 1e-5, format!("u3 = {:.6}, v3 = {:.6}, max dev {d2:.1e}", b2.u[2], b2.v[2]));
    r
}

fn criterion_2() -> Report {
    let mut r = Report::new("closed-form conditional values equal the swap pipeline on 500 random points to 1e-9");
    let mut g = rng(2);
    let points: Vec<(f64, f64)> = (0..500).map(|_| (g.random_range(0.0..1.0), g.random_range(0.0..FRAC_PI_4))).collect();
    let worst = points
        .par_iter()
        .map(|&(p, alpha)| {
            let (g1, g2) = gamma(p, alpha);
            let outcomes = bsm_swap(&g1, &g2).unwrap();
            let expect = [eq13_value(p, alpha).unwrap(), eq14_value(p, alpha).unwrap()];
            // dense oracle: joint state, Bell projector, partial trace
            let joint = kron(&dense(g1.matrix()), &dense(g2.matrix()));
            let bell = MeasurementBasis::bell();
            (0..4)
                .map(|k| {
                    let proj = kron(&kron(&identity(2), &outer(&bell.vectors()[k])), &identity(2));
                    let post = matmul(&matmul(&proj, &joint), &proj);
                    let cond = scale(&ptrace(&post, 4, &[0, 3]), 1.0 / trace(&post).re);
                    let oracle = DensityMatrix::new(steernet::qmat::ComplexMatrix::from_rows(&cond).unwrap()).unwrap();
                    let s_oracle = f3_value(&decompose(&oracle).unwrap());
                    let s_pipe = f3_value(&decompose(&outcomes[k].conditional).unwrap());
                    let e = expect[k / 2];
                    (s_pipe - e).abs().max((s_oracle - e).abs())
                })
                .fold(0.0f64, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    r.item("max deviation", worst <= 1e-9, format!("{worst:.2e}"));
    r
}

fn criterion_3() -> Report {
    let mut r = Report::new("alpha = 0.1 activation window (0.001, 0.331) for 00/01, none for 10/11, grid 500");
    let grid = GridSpec::new(vec![Axis::new("p", 0.0, 1.0, GRID)]).fix("alpha", 0.1);
    let res = scan_linear(&grid, &ScanOptions::default()).unwrap();
    for (k, label) in ["00", "01"].iter().enumerate() {
        let got = runs(&res, k);
        r.item(&format!("outcome {label}"), matches(&got, 0.001, 0.331), format!("expected (0.001, 0.331) ± 0.002, got {}", show(&got)));
    }
    for (k, label) in [(2, "10"), (3, "11")] {
        let got = runs(&res, k);
        r.item(&format!("outcome {label}"), got.is_empty(), format!("expected none, got {}", show(&got)));
    }
    r
}

fn criterion_4() -> Report {
    let mut r = Report::new("explicit settings at (0.214, 0.267) violate the three-setting inequality on outcome 00");
    let (g1, g2) = gamma(0.214, 0.267);
    let s1 = f3_value(&decompose(&g1).unwrap());
    let s2 = f3_value(&decompose(&g2).unwrap());
    r.item("inputs", s1 <= 1.0 && s2 <= 1.0, format!("f3 = {s1:.6}, {s2:.6} (≤ 1)"));
    let alice = MeasurementTriad::new([[0.0, 0.0, 1.0], [0.0, -1.0, 0.0], [-1.0, 0.0, 0.0]]).unwrap();
    let charlie = MeasurementTriad::new([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]]).unwrap();
    let cond = &bsm_swap(&g1, &g2).unwrap()[0].conditional;
    let v = cjwr_value(cond, &alice, &charlie).unwrap();
    r.item("outcome 00", v > 1.0, format!("value {v:.6} (> 1)"));
    r
}

fn criterion_5() -> Report {
    let mut r = Report::new("20 activated linear-network cells are CHSH- and I3322-local to 1e-6");
    let grid = GridSpec::new(vec![Axis::new("p", 0.0, 1.0, 40), Axis::new("alpha", 0.0, FRAC_PI_4, 40)]);
    let res = scan_linear(&grid, &ScanOptions::default()).unwrap();
    let active: Vec<_> = res.cells.iter().filter(|c| c.activated.iter().any(|&a| a)).collect();
    r.item("activated cells", active.len() >= 20, format!("{} on a 40×40 grid", active.len()));
    let n = active.len().min(20);
    let cfg = OptConfig::default();
    let rows: Vec<(f64, f64, f64, f64, f64)> = (0..n)
        .into_par_iter()
        .map(|k| {
            let cell = active[k * active.len() / n];
            let (p, alpha) = (cell.coords[0], cell.coords[1]);
            let (g1, g2) = gamma(p, alpha);
            let mut worst = (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
            for (o, &act) in bsm_swap(&g1, &g2).unwrap().iter().zip(&cell.activated) {
                if act {
                    let m = horodecki_parameter(&decompose(&o.conditional).unwrap().w);
                    worst.0 = worst.0.max(chsh_max(&o.conditional, &cfg).unwrap().value);
                    worst.1 = worst.1.max(i3322_max(&o.conditional, &cfg).unwrap().value);
                    worst.2 = worst.2.max((m.sqrt() - 1.0) / 2.0);
                }
            }
            (p, alpha, worst.0, worst.1, worst.2)
        })
        .collect();
    let mut bad = 0;
    for (p, alpha, chsh, i3322, oracle) in &rows {
        let ok = *chsh <= DELTA && *i3322 <= DELTA;
        bad += !ok as usize;
        r.details.push(format!(
            "  (p, alpha) = ({p:.4}, {alpha:.4}): chsh {chsh:.6} (closed form {oracle:.6}), i3322 {i3322:.6}{}",
            if ok { "" } else { " nonlocal" }
        ));
    }
    r.item("sampled cells", bad == 0 && n == 20, format!("{bad} of {n} nonlocal"));
    r
}

fn criterion_6() -> Report {
    let mut r = Report::new("star table slice alpha = 0.2, (p1, p2) = (0.08, 0.075), grid 500");
    let grid = GridSpec::new(vec![Axis::new("p3", 0.0, 1.0, GRID)]).fix("alpha", 0.2).fix("p1", 0.08).fix("p2", 0.075);
    let res = scan_star(&grid, &ScanOptions::default()).unwrap();
    for (k, lo, hi, shown) in [
        (1, 0.2, 1.0, "(0.2, 1]"),
        (6, 0.071, 0.467, "(0.071, 0.467]"),
        (7, 0.071, 0.465, "(0.071, 0.465]"),
        (8, 0.2, 1.0, "(0.2, 1)"),
    ] {
        let got = runs(&res, k - 1);
        r.item(&format!("outcome {k}"), matches(&got, lo, hi), format!("expected {shown} ± 0.002, got {}", show(&got)));
    }
    for k in 2..=5 {
        let got = runs(&res, k - 1);
        r.item(&format!("outcome {k}"), got.is_empty(), format!("expected none, got {}", show(&got)));
    }
    r
}

fn criterion_7() -> Report {
    let mut r = Report::new("genuine activation s2 ranges of the four table rows, grid 500");
    for (k, b1, b2, s1, lo) in [
        (0, 0.75, 0.76, 0.99, 0.58),
        (1, 0.65, 0.6, 0.97, 0.78),
        (2, 0.55, 0.55, 0.9, 0.88),
        (3, 0.6, 0.55, 0.8, 0.98),
    ] {
        let grid = GridSpec::new(vec![Axis::new("s2", 0.0, 1.0, GRID)]).fix("beta1", b1).fix("beta2", b2).fix("s1", s1);
        let res = scan_genuine(&grid, &ScanOptions::default()).unwrap();
        let got = runs(&res, k);
        r.item(
            &format!("({b1}, {b2}, {s1}) outcome {}", res.labels[k]),
            matches(&got, lo, 1.0),
            format!("expected [{lo}, 1] ± 0.002, got {}", show(&got)),
        );
    }
    r
}

fn criterion_8() -> Report {
    let mut r = Report::new("identical beta = 0.7 pair activates all outcomes on (0.77, 1], grid 500");
    let grid = GridSpec::new(vec![Axis::new("s1", 0.0, 1.0, GRID)]).fix("beta1", 0.7);
    let res = scan_genuine(&grid, &ScanOptions::default()).unwrap();
    for k in 0..4 {
        let got = runs(&res, k);
        r.item(&format!("outcome {}", res.labels[k]), matches(&got, 0.77, 1.0), format!("expected (0.77, 1] ± 0.002, got {}", show(&got)));
    }
    r
}

fn criterion_9() -> Report {
    let mut r = Report::new("negative control conditionals match the tabulated Bloch data to 1e-5 and stay unsteerable");
    let canon = |beta, s| canonical_form(&make_state(&FamilySpec::Omega { beta, s }).unwrap()).unwrap().to_density().unwrap();
    let outcomes = bsm_swap(&canon(0.1, 0.7), &canon(0.3, 0.59)).unwrap();
    let table = [
        (0.98107, [0.0729052, -0.0729052, 0.0128697]),
        (0.98107, [-0.0729052, 0.0729052, 0.0128697]),
        (0.907448, [0.0729052, 0.0729052, -0.0128697]),
        (0.907448, [-0.0729052, -0.0729052, -0.0128697]),
    ];
    let cfg = OptConfig::default();
    for (o, (u3, t)) in outcomes.iter().zip(table) {
        let b = decompose(&o.conditional).unwrap();
        let dev = max_dev(&b, [0.0, 0.0, u3], [0.0; 3], t);
        r.item(&format!("outcome {} data", o.label), dev <= 1e-5, format!("max dev {dev:.1e}"));
        let v = bowles_for_state(&o.conditional, &cfg).unwrap().value;
        r.item(&format!("outcome {} unsteerable", o.label), v <= 1.0 - DELTA, format!("value {v:.6} (≤ 1)"));
    }
    r
}

fn criterion_10() -> Report {
    let mut r = Report::new("constrained optimum 0.75 ± 1e-3 and the listed maximizer");
    let res = appendix_c_max(&OptConfig::default()).unwrap();
    r.item("optimum", (res.value - 0.75).abs() <= 1e-3, format!("{:.6}", res.value));
    let listed = appendix_c_objective([1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, 0.0, 0.0], [-1.0, 0.0, 0.0]);
    r.item("listed maximizer", listed == 0.75, format!("{listed}"));
    r
}

fn random_null_state(g: &mut ChaCha8Rng, bound: f64) -> DensityMatrix {
    loop {
        let t = random_unsteerable_triple(g);
        if t.iter().all(|x| x.abs() <= bound) {
            let (r1, r2) = (random_rotation(g), random_rotation(g));
            if let Some(s) = null_vector_state(t, &r1, &r2) {
                return s;
            }
        }
    }
}

fn criterion_11() -> Report {
    let mut r = Report::new("property suites, 1000 randomized trials each");
    let small = OptConfig { restarts: 16, ..OptConfig::default() };

    let worst = (0..TRIALS)
        .into_par_iter()
        .map(|i| {
            let mut g = rng(1100 + i);
            let (a, b) = (random_null_state(&mut g, 1.0), random_null_state(&mut g, 1.0));
            bsm_swap(&a, &b).unwrap().iter().map(|o| f3_value(&decompose(&o.conditional).unwrap())).fold(f64::MIN, f64::max)
        })
        .reduce(|| f64::MIN, f64::max);
    r.item("null-vector unsteerable inputs never activate", worst <= 1.0 + 1e-9, format!("max conditional f3 {worst:.9}"));

    let worst = (0..TRIALS)
        .into_par_iter()
        .map(|i| {
            let mut g = rng(2200 + i);
            let (a, b) = (random_null_state(&mut g, 0.5), random_null_state(&mut g, 0.5));
            bsm_swap(&a, &b)
                .unwrap()
                .iter()
                .map(|o| bowles_for_state(&o.conditional, &small).unwrap().value)
                .fold(f64::MIN, f64::max)
        })
        .reduce(|| f64::MIN, f64::max);
    r.item("certified null-vector inputs give conditional value ≤ 1/2", worst <= 0.5 + 1e-6, format!("max {worst:.9}"));

    let worst = (0..TRIALS)
        .into_par_iter()
        .map(|i| {
            let rho = random_density(&mut rng(3300 + i), 2);
            let s = f3_value(&decompose(&rho).unwrap());
            (cjwr_max(&rho, &small).unwrap().value - s.sqrt()).abs()
        })
        .reduce(|| 0.0, f64::max);
    r.item("three-setting maximum equals sqrt of the correlation weight", worst <= 1e-6, format!("max deviation {worst:.3e}"));

    let worst = (0..TRIALS)
        .into_par_iter()
        .map(|i| {
            let mut g = rng(4400 + i);
            let c = CanonicalForm { a: [0.0; 3], w: [g.random_range(-1.0..1.0), g.random_range(-1.0..1.0), g.random_range(-1.0..1.0)] };
            (closed_form_unsteerable(&c).unwrap().value - bowles_unsteerable(&c, &small).unwrap().value).abs()
        })
        .reduce(|| 0.0, f64::max);
    r.item("closed form equals sphere optimization", worst <= 1e-7, format!("max deviation {worst:.3e}"));

    let worst = (0..TRIALS)
        .into_par_iter()
        .map(|i| {
            let mut g = rng(5500 + i);
            let l: Vec<_> = (0..3).map(|_| random_density(&mut g, 2)).collect();
            let bsm: f64 = bsm_swap(&l[0], &l[1]).unwrap().iter().map(|o| o.probability).sum();
            let star: f64 = star_swap(&l[0], &l[1], &l[2]).unwrap().iter().map(|o| o.probability).sum();
            (bsm - 1.0).abs().max((star - 1.0).abs())
        })
        .reduce(|| 0.0, f64::max);
    r.item("outcome probabilities sum to one", worst <= 1e-10, format!("max deviation {worst:.2e}"));

    let basis = MeasurementBasis::star();
    let vs = basis.vectors();
    let mut ortho = 0.0f64;
    for (i, x) in vs.iter().enumerate() {
        for (j, y) in vs.iter().enumerate() {
            let ip: num_complex::Complex64 = x.iter().zip(y).map(|(a, b)| a.conj() * b).sum();
            ortho = ortho.max((ip - c(if i == j { 1.0 } else { 0.0 })).norm());
        }
    }
    let mut sum = zeros(8);
    for v in vs {
        let o = outer(v);
        for i in 0..8 {
            for j in 0..8 {
                sum[i][j] += o[i][j];
            }
        }
    }
    let complete = max_diff(&sum, &identity(8));
    r.item("star basis orthonormal and complete", ortho <= 1e-12 && complete <= 1e-12, format!("defects {ortho:.1e}, {complete:.1e}"));
    r
}

fn main() -> ExitCode {
    let criteria: [fn() -> Report; 11] = [
        criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
        criterion_7, criterion_8, criterion_9, criterion_10, criterion_11,
    ];
    let mut failed = 0;
    for (n, f) in criteria.iter().enumerate() {
        let r = f();
        failed += !r.pass as usize;
        println!("{} criterion {}: {}", if r.pass { "PASS" } else { "FAIL" }, n + 1, r.summary);
        for d in &r.details {
            println!("    {d}");
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
