//! Dense complex matrices for registers of up to four qubits.
//!
//! Qubit 0 is the leftmost tensor factor: the basis ket `|b₀b₁…b_{n−1}⟩`
//! sits at row `Σ bᵢ·2^(n−1−i)`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 16;

/// Tolerance used by [`DensityMatrix::new`].
pub const DENSITY_TOL: f64 = 1e-10;

const JACOBI_OFF_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix, row-major, dimension 2, 4, 8 or 16.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim > MAX_DIM {
        return Err(Error::Size(dim));
    }
    if !matches!(dim, 2 | 4 | 8 | 16) {
        return Err(Error::Argument(format!(
            "matrix dimension {dim} is not one of 2, 4, 8, 16"
        )));
    }
    Ok(())
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            dim,
            data: vec![ZERO; dim * dim],
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        Ok(m)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        check_dim(dim)?;
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self::from_vec(dim, data)
    }

    /// Builds a matrix from row-major entries. Entries must be finite.
    pub fn from_vec(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        check_dim(dim)?;
        if data.len() != dim * dim {
            return Err(Error::Argument(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NumericIntegrity("non-finite matrix entry".into()));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Argument("matrix rows must form a square".into()));
        }
        Self::from_vec(dim, rows.iter().flatten().copied().collect())
    }

    pub fn diag_real(values: &[f64]) -> Result<Self> {
        let dim = values.len();
        Self::from_fn(dim, |i, j| {
            if i == j {
                Complex64::new(values[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// `|ψ⟩⟨ψ|` for an (unnormalized) state vector.
    pub fn outer(ket: &[Complex64]) -> Result<Self> {
        Self::from_fn(ket.len(), |i, j| ket[i] * ket[j].conj())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, z: Complex64) {
        self.data[i * self.dim + j] = z;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut data = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        Self { dim: n, data }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * k).collect(),
        }
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `‖M − M†‖∞` (entrywise maximum).
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let n = self.dim;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] = (self.get(i, j) + self.get(j, i).conj()) * 0.5;
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for row in self.data.chunks(self.dim) {
            let cells: Vec<String> = row
                .iter()
                .map(|z| format!("{:+.6}{:+.6}i", z.re, z.im))
                .collect();
            writeln!(f, "  {}", cells.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut data = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        ComplexMatrix { dim: n, data }
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (na, nb) = (a.dim, b.dim);
    let n = na * nb;
    if n > MAX_DIM {
        return Err(Error::Size(n));
    }
    let mut data = vec![ZERO; n * n];
    for i in 0..na {
        for j in 0..na {
            let aij = a.data[i * na + j];
            for k in 0..nb {
                for l in 0..nb {
                    data[(i * nb + k) * n + j * nb + l] = aij * b.data[k * nb + l];
                }
            }
        }
    }
    Ok(ComplexMatrix { dim: n, data })
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = ComplexMatrix::diag_real(&self.values).expect("same dimension");
        &(&self.vectors * &d) * &self.vectors.adjoint()
    }

    /// `V f(Λ) V†`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let mapped: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let d = ComplexMatrix::diag_real(&mapped).expect("same dimension");
        &(&self.vectors * &d) * &self.vectors.adjoint()
    }
}

/// Cyclic complex Jacobi on a row-major `n×n` Hermitian buffer.
///
/// Returns ascending eigenvalues and the row-major eigenvector matrix
/// (eigenvectors in columns). Only the Hermitian part of `a` is used.
pub(crate) fn jacobi_hermitian(a: &[Complex64], n: usize) -> (Vec<f64>, Vec<Complex64>) {
    let mut m: Vec<Complex64> = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = (a[i * n + j] + a[j * n + i].conj()) * 0.5;
        }
    }
    let mut v = vec![ZERO; n * n];
    for i in 0..n {
        v[i * n + i] = ONE;
    }

    let scale = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off < JACOBI_OFF_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                let r = apq.norm();
                if r < 1e-300 {
                    continue;
                }
                let phase = apq / r;
                let app = m[p * n + p].re;
                let aqq = m[q * n + q].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // U = diag(1, conj(phase)) · [[c, s], [−s, c]] on the (p, q) plane.
                let upp = Complex64::new(c, 0.0);
                let upq = Complex64::new(s, 0.0);
                let uqp = phase.conj() * (-s);
                let uqq = phase.conj() * c;

                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = mkp * upp + mkq * uqp;
                    m[k * n + q] = mkp * upq + mkq * uqq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = upp.conj() * mpk + uqp.conj() * mqk;
                    m[q * n + k] = upq.conj() * mpk + uqq.conj() * mqk;
                }
                m[p * n + q] = ZERO;
                m[q * n + p] = ZERO;
                m[p * n + p] = Complex64::new(m[p * n + p].re, 0.0);
                m[q * n + q] = Complex64::new(m[q * n + q].re, 0.0);

                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * upp + vkq * uqp;
                    v[k * n + q] = vkp * upq + vkq * uqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].re.total_cmp(&m[j * n + j].re));
    let values = order.iter().map(|&i| m[i * n + i].re).collect();
    let mut vectors = vec![ZERO; n * n];
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[row * n + col] = v[row * n + src];
        }
    }
    (values, vectors)
}

/// Eigen-decomposition of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &ComplexMatrix) -> HermitianEigen {
    let (values, vectors) = jacobi_hermitian(&m.data, m.dim);
    HermitianEigen {
        values,
        vectors: ComplexMatrix {
            dim: m.dim,
            data: vectors,
        },
    }
}

/// `m^(−1/2)` for a Hermitian positive-definite `m`.
pub fn inv_sqrt_psd(m: &ComplexMatrix, eps: f64) -> Result<ComplexMatrix> {
    psd_power(m, -0.5, eps)
}

/// `m^exponent` for a Hermitian positive-definite `m`; every eigenvalue must be at least `eps`.
pub fn psd_power(m: &ComplexMatrix, exponent: f64, eps: f64) -> Result<ComplexMatrix> {
    let defect = m.hermiticity_defect();
    if defect > 1e-8 {
        return Err(Error::NumericIntegrity(format!(
            "matrix is not Hermitian (defect {defect:e})"
        )));
    }
    let eig = hermitian_eigen(m);
    let min_eig = eig.values[0];
    if min_eig < eps {
        return Err(Error::SingularMarginal { min_eig, eps });
    }
    Ok(eig.map_values(|x| x.powf(exponent)).hermitian_part())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub hermitian: bool,
    pub trace_dev: f64,
    pub min_eig: f64,
    pub ok: bool,
}

pub fn validate_density(m: &ComplexMatrix, tol: f64) -> ValidationReport {
    let hermitian = m.hermiticity_defect() <= tol;
    let tr = m.trace();
    let trace_dev = (tr - ONE).norm();
    let min_eig = hermitian_eigen(m).values[0];
    ValidationReport {
        hermitian,
        trace_dev,
        min_eig,
        ok: hermitian && trace_dev <= tol && min_eig >= -tol,
    }
}

/// Validated density matrix on `qubits()` qubits.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(mat, DENSITY_TOL)
    }

    pub fn with_tolerance(mat: ComplexMatrix, tol: f64) -> Result<Self> {
        let report = validate_density(&mat, tol);
        if !report.ok {
            return Err(Error::State(format!(
                "not a density matrix (hermitian: {}, trace deviation {:e}, min eigenvalue {:e})",
                report.hermitian, report.trace_dev, report.min_eig
            )));
        }
        Ok(Self { mat })
    }

    /// Normalizes a positive operator to unit trace, symmetrizes it and clamps
    /// eigenvalues in `[−1e-10, 0)` to zero.
    pub fn from_unnormalized(mat: &ComplexMatrix) -> Result<Self> {
        let tr = mat.trace().re;
        if !(tr > 0.0) {
            return Err(Error::State(format!("trace {tr:e} is not positive")));
        }
        let mut m = mat.scale(1.0 / tr).hermitian_part();
        let eig = hermitian_eigen(&m);
        if eig.values[0] < 0.0 && eig.values[0] >= -DENSITY_TOL {
            m = eig.map_values(|x| x.max(0.0)).hermitian_part();
            let tr = m.trace().re;
            m = m.scale(1.0 / tr);
        }
        Self::with_tolerance(m, 1e-9)
    }

    pub fn pure(ket: &[Complex64]) -> Result<Self> {
        let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum();
        if !(norm > 0.0) {
            return Err(Error::Argument("zero state vector".into()));
        }
        Self::new(ComplexMatrix::outer(ket)?.scale(1.0 / norm))
    }

    pub fn maximally_mixed(qubits: usize) -> Result<Self> {
        let dim = 1usize << qubits;
        Ok(Self {
            mat: ComplexMatrix::identity(dim)?.scale(1.0 / dim as f64),
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn qubits(&self) -> usize {
        self.mat.qubits()
    }

    pub fn dim(&self) -> usize {
        self.mat.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.mat.get(i, j)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(DensityMatrix {
            mat: kron(&self.mat, &other.mat)?,
        })
    }
}

/// Reduced state on the qubits listed in `keep` (kept in ascending order).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.qubits();
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() || keep.len() >= n {
        return Err(Error::Argument(format!(
            "keep-set must be a non-empty proper subset of {n} qubits"
        )));
    }
    if let Some(&q) = keep.iter().find(|&&q| q >= n) {
        return Err(Error::Argument(format!("qubit index {q} out of range")));
    }
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let k = keep.len();
    let dk = 1usize << k;
    let dt = 1usize << traced.len();

    let embed = |kept_bits: usize, traced_bits: usize| -> usize {
        let mut idx = 0usize;
        for (pos, &q) in keep.iter().enumerate() {
            let bit = (kept_bits >> (k - 1 - pos)) & 1;
            idx |= bit << (n - 1 - q);
        }
        for (pos, &q) in traced.iter().enumerate() {
            let bit = (traced_bits >> (traced.len() - 1 - pos)) & 1;
            idx |= bit << (n - 1 - q);
        }
        idx
    };

    let out = ComplexMatrix::from_fn(dk, |r, c| {
        (0..dt)
            .map(|t| rho.mat.get(embed(r, t), embed(c, t)))
            .sum()
    })?;
    Ok(DensityMatrix { mat: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn bell_phi_plus() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::pure(&[c(s), ZERO, ZERO, c(s)]).unwrap()
    }

    fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::diag_real(&[1.0, -1.0]).unwrap()
    }

    #[test]
    fn kron_identities() {
        let i2 = ComplexMatrix::identity(2).unwrap();
        assert_eq!(kron(&i2, &i2).unwrap(), ComplexMatrix::identity(4).unwrap());
        let zz = kron(&pauli_z(), &pauli_z()).unwrap();
        assert_eq!(zz, ComplexMatrix::diag_real(&[1.0, -1.0, -1.0, 1.0]).unwrap());
        let p0 = ComplexMatrix::diag_real(&[1.0, 0.0]).unwrap();
        let p1 = ComplexMatrix::diag_real(&[0.0, 1.0]).unwrap();
        assert_eq!(
            kron(&p0, &p1).unwrap(),
            ComplexMatrix::diag_real(&[0.0, 1.0, 0.0, 0.0]).unwrap()
        );
    }

    #[test]
    fn kron_rejects_oversize() {
        let a = ComplexMatrix::identity(8).unwrap();
        let b = ComplexMatrix::identity(4).unwrap();
        assert_eq!(kron(&a, &b), Err(Error::Size(32)));
    }

    #[test]
    fn bad_dimensions() {
        assert!(matches!(ComplexMatrix::zeros(3), Err(Error::Argument(_))));
        assert!(matches!(ComplexMatrix::zeros(32), Err(Error::Size(32))));
        let nan = vec![Complex64::new(f64::NAN, 0.0); 4];
        assert!(matches!(
            ComplexMatrix::from_vec(2, nan),
            Err(Error::NumericIntegrity(_))
        ));
    }

    #[test]
    fn trace_out_bell_partner() {
        let r = partial_trace(&bell_phi_plus(), &[0]).unwrap();
        let half = ComplexMatrix::identity(2).unwrap().scale(0.5);
        assert!(r.matrix().max_abs_diff(&half) < 1e-15);
    }

    #[test]
    fn trace_out_middle_qubit() {
        // |0⟩⟨0| ⊗ |φ⁺⟩⟨φ⁺| with the middle qubit traced out.
        let zero = DensityMatrix::pure(&[ONE, ZERO]).unwrap();
        let rho = zero.tensor(&bell_phi_plus()).unwrap();
        let r = partial_trace(&rho, &[0, 2]).unwrap();
        let expect = ComplexMatrix::diag_real(&[0.5, 0.5, 0.0, 0.0]).unwrap();
        assert!(r.matrix().max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_keep_sets() {
        let rho = bell_phi_plus();
        assert!(matches!(partial_trace(&rho, &[]), Err(Error::Argument(_))));
        assert!(matches!(partial_trace(&rho, &[0, 1]), Err(Error::Argument(_))));
        assert!(matches!(partial_trace(&rho, &[2]), Err(Error::Argument(_))));
    }

    #[test]
    fn inv_sqrt_examples() {
        let i2 = ComplexMatrix::identity(2).unwrap();
        assert!(inv_sqrt_psd(&i2, 1e-12).unwrap().max_abs_diff(&i2) < 1e-14);
        let m = ComplexMatrix::diag_real(&[4.0, 1.0]).unwrap();
        let expect = ComplexMatrix::diag_real(&[0.5, 1.0]).unwrap();
        assert!(inv_sqrt_psd(&m, 1e-12).unwrap().max_abs_diff(&expect) < 1e-14);
        let singular = ComplexMatrix::diag_real(&[1.0, 0.0]).unwrap();
        assert!(matches!(
            inv_sqrt_psd(&singular, 1e-12),
            Err(Error::SingularMarginal { .. })
        ));
    }

    #[test]
    fn validation_examples() {
        assert!(validate_density(bell_phi_plus().matrix(), 1e-10).ok);

        let scaled = ComplexMatrix::identity(4).unwrap().scale(0.9 / 4.0);
        let r = validate_density(&scaled, 1e-10);
        assert!(!r.ok);
        assert!((r.trace_dev - 0.1).abs() < 1e-12);

        let mut skew = ComplexMatrix::identity(2).unwrap().scale(0.5);
        skew.set(0, 1, ONE);
        let r = validate_density(&skew, 1e-10);
        assert!(!r.hermitian && !r.ok);
    }

    #[test]
    fn eigen_of_complex_hermitian() {
        // σ_y has eigenvalues ±1.
        let sy = ComplexMatrix::from_vec(
            2,
            vec![ZERO, Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), ZERO],
        )
        .unwrap();
        let e = hermitian_eigen(&sy);
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        assert!(e.reconstruct().max_abs_diff(&sy) < 1e-14);
    }

    #[test]
    fn unnormalized_clamps_tiny_negative_eigenvalues() {
        let m = ComplexMatrix::diag_real(&[2.0, -1e-11]).unwrap();
        let rho = DensityMatrix::from_unnormalized(&m).unwrap();
        assert!(hermitian_eigen(rho.matrix()).values[0] >= 0.0);
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-15);
    }
}
