//! Deterministic multi-start Nelder–Mead maximization.
//!
//! Restart `i` always starts from the same point for a given seed, so adding
//! restarts can only raise the reported maximum.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::Vec3;
use crate::criteria::MeasurementTriad;
use crate::error::{Error, Result};

const PENALTY: f64 = 1e6;
const FEASIBILITY_TOL: f64 = 1e-4;
const POLISH_ROUNDS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptConfig {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for OptConfig {
    fn default() -> Self {
        OptConfig { restarts: 64, max_iter: 2000, tol: 1e-10, seed: 0x5eed }
    }
}

impl OptConfig {
    pub fn with_seed(seed: u64) -> Self {
        OptConfig { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iter == 0 || !(self.tol > 0.0) {
            return Err(Error::Argument(format!(
                "optimizer config must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub value: f64,
    pub argmax: Vec<f64>,
    pub converged_restarts: usize,
    pub restarts: usize,
}

struct Run {
    value: f64,
    point: Vec<f64>,
    converged: bool,
}

fn eval(f: &impl Fn(&[f64]) -> f64, x: &[f64]) -> Result<f64> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::NonFinite(x.to_vec()))
    }
}

/// Maximizes `f` from `x0`; stops when the simplex values spread by at most `tol`.
fn nelder_mead(
    f: &impl Fn(&[f64]) -> f64,
    x0: Vec<f64>,
    step: f64,
    max_iter: usize,
    tol: f64,
) -> Result<Run> {
    let n = x0.len();
    // minimize g = -f
    let g = |x: &[f64]| eval(f, x).map(|y| -y);
    let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n + 1);
    simplex.push((g(&x0)?, x0.clone()));
    for i in 0..n {
        let mut x = x0.clone();
        x[i] += step;
        simplex.push((g(&x)?, x));
    }
    let mut converged = false;
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
        if simplex[n].0 - simplex[0].0 <= tol {
            converged = true;
            break;
        }
        let mut centroid = vec![0.0; n];
        for (_, x) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].1)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let xr = along(1.0);
        let fr = g(&xr)?;
        if fr < simplex[0].0 {
            let xe = along(2.0);
            let fe = g(&xe)?;
            simplex[n] = if fe < fr { (fe, xe) } else { (fr, xr) };
        } else if fr < simplex[n - 1].0 {
            simplex[n] = (fr, xr);
        } else {
            let (xc, fc) = if fr < simplex[n].0 {
                let xc = along(0.5);
                let fc = g(&xc)?;
                (xc, fc)
            } else {
                let xc = along(-0.5);
                let fc = g(&xc)?;
                (xc, fc)
            };
            if fc < fr.min(simplex[n].0) {
                simplex[n] = (fc, xc);
            } else {
                let best = simplex[0].1.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = best
                        .iter()
                        .zip(&entry.1)
                        .map(|(b, xi)| b + 0.5 * (xi - b))
                        .collect();
                    *entry = (g(&x)?, x);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (v, point) = simplex.swap_remove(0);
    Ok(Run { value: -v, point, converged })
}

fn restart_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Runs one Nelder–Mead per restart in parallel and keeps the best (first on ties).
pub fn multi_start<F, S>(f: &F, start: S, step: f64, cfg: &OptConfig) -> Result<OptResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
    S: Fn(usize, &mut ChaCha8Rng) -> Vec<f64> + Sync,
{
    cfg.validate()?;
    let runs: Vec<Result<Run>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = restart_rng(cfg.seed, i);
            let mut run = nelder_mead(f, start(i, &mut rng), step, cfg.max_iter, cfg.tol)?;
            // a collapsed simplex can stall away from the optimum; rebuild it at the best point
            for _ in 0..POLISH_ROUNDS {
                let next = nelder_mead(f, run.point.clone(), step * 0.25, cfg.max_iter, cfg.tol)?;
                let gain = next.value - run.value;
                let converged = next.converged;
                if gain > 0.0 {
                    run = next;
                }
                run.converged = converged;
                if gain <= cfg.tol {
                    break;
                }
            }
            Ok(run)
        })
        .collect();
    let mut best: Option<Run> = None;
    let mut converged_restarts = 0;
    for run in runs {
        let run = run?;
        converged_restarts += run.converged as usize;
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    let best = best.ok_or_else(|| Error::Internal("no restarts ran".into()))?;
    Ok(OptResult {
        value: best.value,
        argmax: best.point,
        converged_restarts,
        restarts: cfg.restarts,
    })
}

pub fn sphere_point(theta: f64, phi: f64) -> Vec3 {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

/// Golden-ratio spiral on the sphere, `(θ, φ)` of point `i`.
fn golden_sphere(i: usize) -> (f64, f64) {
    let golden = 0.5 * (1.0 + 5f64.sqrt());
    let z = 1.0 - 2.0 * (0.5 + i as f64 / golden).fract();
    let phi = 2.0 * PI * (i as f64 / (golden * golden)).fract();
    (z.clamp(-1.0, 1.0).acos(), phi)
}

/// Maximizes `f` over unit vectors. `argmax` holds the maximizing unit vector.
pub fn max_unit_sphere<F>(f: F, cfg: &OptConfig) -> Result<OptResult>
where
    F: Fn(Vec3) -> f64 + Sync,
{
    let obj = |x: &[f64]| f(sphere_point(x[0], x[1]));
    let mut res = multi_start(
        &obj,
        |i, rng| {
            let (t, p) = golden_sphere(i);
            vec![t + rng.random_range(-0.05..0.05), p + rng.random_range(-0.05..0.05)]
        },
        0.4,
        cfg,
    )?;
    let x = sphere_point(res.argmax[0], res.argmax[1]);
    res.value = f(x);
    res.argmax = x.to_vec();
    Ok(res)
}

/// Orthonormal triad given by the columns of `Rz(a) Ry(b) Rz(c)`.
pub fn triad_from_euler(a: f64, b: f64, c: f64) -> MeasurementTriad {
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    let (sc, cc) = c.sin_cos();
    let r = [
        [ca * cb * cc - sa * sc, -ca * cb * sc - sa * cc, ca * sb],
        [sa * cb * cc + ca * sc, -sa * cb * sc + ca * cc, sa * sb],
        [-sb * cc, sb * sc, cb],
    ];
    MeasurementTriad::from_columns_unchecked([
        [r[0][0], r[1][0], r[2][0]],
        [r[0][1], r[1][1], r[2][1]],
        [r[0][2], r[1][2], r[2][2]],
    ])
}

/// Maximizes `f` over pairs of right-handed orthonormal triads. `argmax` holds six Euler angles.
pub fn max_orthonormal_triads<F>(f: F, cfg: &OptConfig) -> Result<OptResult>
where
    F: Fn(&MeasurementTriad, &MeasurementTriad) -> f64 + Sync,
{
    let obj = |x: &[f64]| {
        f(
            &triad_from_euler(x[0], x[1], x[2]),
            &triad_from_euler(x[3], x[4], x[5]),
        )
    };
    let mut res = multi_start(
        &obj,
        |_, rng| {
            (0..6)
                .map(|k| {
                    let hi = if k % 3 == 1 { PI } else { 2.0 * PI };
                    rng.random_range(0.0..hi)
                })
                .collect()
        },
        0.5,
        cfg,
    )?;
    res.value = obj(&res.argmax);
    Ok(res)
}

/// `(x₁u₁w₁₁ − x₂u₂w₁₂ + x₃u₃w₁₃)² + √Σ(x_j w₁_j w₂_j)²`.
pub fn appendix_c_objective(x: Vec3, u2: Vec3, w1: Vec3, w2: Vec3) -> f64 {
    let lin = x[0] * u2[0] * w1[0] - x[1] * u2[1] * w1[1] + x[2] * u2[2] * w1[2];
    let quad: f64 = (0..3).map(|j| (x[j] * w1[j] * w2[j]).powi(2)).sum();
    lin * lin + quad.sqrt()
}

/// Total squared constraint violation: `|w₁_j| ≤ ½`, `‖u₂‖ ≤ 1`, `Σ w₂_j² ≤ 1`.
pub fn appendix_c_violation(u2: Vec3, w1: Vec3, w2: Vec3) -> f64 {
    let box_v: f64 = w1.iter().map(|w| (w.abs() - 0.5).max(0.0).powi(2)).sum();
    let uu: f64 = u2.iter().map(|x| x * x).sum::<f64>().sqrt();
    let ww: f64 = w2.iter().map(|x| x * x).sum();
    box_v + (uu - 1.0).max(0.0).powi(2) + (ww - 1.0).max(0.0).powi(2)
}

fn split_c(p: &[f64], second_zero: bool) -> (Vec3, Vec3, Vec3, Vec3) {
    let x = sphere_point(p[0], p[1]);
    let w1 = [p[2], p[3], p[4]];
    if second_zero {
        return (x, [0.0; 3], w1, [0.0; 3]);
    }
    (x, [p[5], p[6], p[7]], w1, [p[8], p[9], p[10]])
}

fn project_c(u2: Vec3, w1: Vec3, w2: Vec3) -> (Vec3, Vec3, Vec3) {
    let ball = |v: Vec3| {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1.0 {
            [v[0] / n, v[1] / n, v[2] / n]
        } else {
            v
        }
    };
    (ball(u2), w1.map(|w| w.clamp(-0.5, 0.5)), ball(w2))
}

/// The constrained problem bounding the swapped Bowles value; optimum 0.75.
///
/// `argmax` is `[x(3), u₂(3), w₁(3), w₂(3)]` after projection onto the feasible set.
pub fn appendix_c_max(cfg: &OptConfig) -> Result<OptResult> {
    appendix_c_max_with(cfg, false)
}

/// With `second_zero` the second state's Bloch vector and correlations are pinned to zero.
pub fn appendix_c_max_with(cfg: &OptConfig, second_zero: bool) -> Result<OptResult> {
    let dim = if second_zero { 5 } else { 11 };
    let obj = |p: &[f64]| {
        let (x, u2, w1, w2) = split_c(p, second_zero);
        appendix_c_objective(x, u2, w1, w2) - PENALTY * appendix_c_violation(u2, w1, w2)
    };
    let res = multi_start(
        &obj,
        |i, rng| {
            let (t, ph) = golden_sphere(i);
            let mut p = vec![t, ph];
            p.extend((0..dim - 2).map(|k| {
                let r = if k < 3 { 0.5 } else { 0.6 };
                rng.random_range(-r..r)
            }));
            p
        },
        0.2,
        cfg,
    )?;
    let (x, u2, w1, w2) = split_c(&res.argmax, second_zero);
    let violation = appendix_c_violation(u2, w1, w2).sqrt();
    if violation > FEASIBILITY_TOL {
        return Err(Error::Internal(format!(
            "constrained optimum violates constraints by {violation:e}"
        )));
    }
    let (u2, w1, w2) = project_c(u2, w1, w2);
    let mut argmax = Vec::with_capacity(12);
    for v in [x, u2, w1, w2] {
        argmax.extend_from_slice(&v);
    }
    Ok(OptResult { value: appendix_c_objective(x, u2, w1, w2), argmax, ..res })
}
