#![allow(dead_code)]

use nalgebra::{Matrix3, DMatrix};
use num_complex::Complex64;
use rand::Rng;
use steernet::bloch::{reconstruct, BlochForm, Mat3, Vec3};
use steernet::qmat::{ComplexMatrix, DensityMatrix};

pub type Dense = Vec<Vec<Complex64>>;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn dense(m: &ComplexMatrix) -> Dense {
    m.rows()
}

pub fn zeros(n: usize) -> Dense {
    vec![vec![c(0.0); n]; n]
}

pub fn kron(a: &Dense, b: &Dense) -> Dense {
    let (n, m) = (a.len(), b.len());
    let mut out = zeros(n * m);
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    out[i * m + k][j * m + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut out = zeros(n);
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == c(0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn outer(v: &[Complex64]) -> Dense {
    v.iter().map(|x| v.iter().map(|y| x * y.conj()).collect()).collect()
}

pub fn identity(n: usize) -> Dense {
    let mut m = zeros(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = c(1.0);
    }
    m
}

pub fn trace(a: &Dense) -> Complex64 {
    (0..a.len()).map(|i| a[i][i]).sum()
}

/// Traces out every qubit not in `keep` by explicit index contraction.
pub fn ptrace(a: &Dense, qubits: usize, keep: &[usize]) -> Dense {
    let traced: Vec<usize> = (0..qubits).filter(|q| !keep.contains(q)).collect();
    let k = keep.len();
    let mut out = zeros(1 << k);
    let bit = |x: usize, q: usize| (x >> (qubits - 1 - q)) & 1;
    for i in 0..a.len() {
        for j in 0..a.len() {
            if traced.iter().any(|&q| bit(i, q) != bit(j, q)) {
                continue;
            }
            let ri = keep.iter().fold(0, |acc, &q| acc * 2 + bit(i, q));
            let rj = keep.iter().fold(0, |acc, &q| acc * 2 + bit(j, q));
            out[ri][rj] += a[i][j];
        }
    }
    out
}

pub fn max_diff(a: &Dense, b: &Dense) -> f64 {
    let mut worst = 0.0f64;
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            worst = worst.max((x - y).norm());
        }
    }
    worst
}

pub fn scale(a: &Dense, k: f64) -> Dense {
    a.iter().map(|r| r.iter().map(|x| x * k).collect()).collect()
}

/// Ginibre-distributed random density matrix of full rank.
pub fn random_density<R: Rng>(rng: &mut R, qubits: usize) -> DensityMatrix {
    let n = 1 << qubits;
    let g: Vec<Complex64> = (0..n * n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let m = ComplexMatrix::from_fn(n, |i, j| {
        (0..n).map(|k| g[i * n + k] * g[j * n + k].conj()).sum()
    })
    .unwrap();
    DensityMatrix::from_unnormalized(&m).unwrap()
}

pub fn random_pure<R: Rng>(rng: &mut R, qubits: usize) -> DensityMatrix {
    let n = 1 << qubits;
    let v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    DensityMatrix::pure(&v.iter().map(|x| x / norm).collect::<Vec<_>>()).unwrap()
}

pub fn random_rotation<R: Rng>(rng: &mut R) -> Mat3 {
    // QR of a Gaussian-ish matrix via nalgebra, fixed to det +1
    let m = Matrix3::from_fn(|_, _| rng.random_range(-1.0..1.0));
    let q = m.qr().q();
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = q[(i, j)];
        }
    }
    if q.determinant() < 0.0 {
        for row in r.iter_mut() {
            row[0] = -row[0];
        }
    }
    r
}

pub fn singular_values(w: &Mat3) -> [f64; 3] {
    let m = Matrix3::from_fn(|i, j| w[i][j]);
    let mut s: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    [s[0], s[1], s[2]]
}

pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.dim();
    let a = DMatrix::from_fn(n, n, |i, j| m.get(i, j));
    let mut v: Vec<f64> = a.symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn mat3_from(f: impl Fn(usize, usize) -> f64) -> Mat3 {
    let mut m = [[0.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = f(i, j);
        }
    }
    m
}

pub fn rotate_w(r1: &Mat3, d: Vec3, r2: &Mat3) -> Mat3 {
    // r1ᵀ diag(d) r2
    mat3_from(|i, j| (0..3).map(|k| r1[k][i] * d[k] * r2[k][j]).sum())
}

/// Two-qubit state with null Bloch vectors and correlation `R₁ᵀ diag(t) R₂`, if PSD.
pub fn null_vector_state(t: Vec3, r1: &Mat3, r2: &Mat3) -> Option<DensityMatrix> {
    let b = BlochForm { u: [0.0; 3], v: [0.0; 3], w: rotate_w(r1, t, r2) };
    DensityMatrix::new(reconstruct(&b)).ok()
}

/// Correlation triple of a valid null-vector state with `Σ t² ≤ 1` (rejection sampling).
pub fn random_unsteerable_triple<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let t = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let s: f64 = t.iter().map(|x| x * x).sum();
        // Bell-diagonal weights must be non-negative
        let psd = 1.0 + t[0] - t[1] + t[2] >= 0.0
            && 1.0 - t[0] + t[1] + t[2] >= 0.0
            && 1.0 + t[0] + t[1] - t[2] >= 0.0
            && 1.0 - t[0] - t[1] - t[2] >= 0.0;
        if s <= 1.0 && psd {
            return t;
        }
    }
}
