//! Two-qubit states in Bloch form:
//! `ρ = ¼(I⊗I + u·σ⊗I + I⊗v·σ + Σ W_jk σ_j⊗σ_k)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{jacobi_hermitian, kron, ComplexMatrix, DensityMatrix, ZERO};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub const IDENTITY3: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

const IMAG_TOL: f64 = 1e-8;
const DIAGONAL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochForm {
    /// First-party Bloch vector.
    pub u: Vec3,
    /// Second-party Bloch vector.
    pub v: Vec3,
    /// Correlation tensor, `w[j][k] = Tr[ρ σ_j⊗σ_k]`.
    pub w: Mat3,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalizedForm {
    pub base: BlochForm,
    pub rot1: Mat3,
    pub rot2: Mat3,
}

/// Pauli matrices `σ_x, σ_y, σ_z`.
pub fn paulis() -> [ComplexMatrix; 3] {
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    [
        ComplexMatrix::from_vec(2, vec![ZERO, one, one, ZERO]).unwrap(),
        ComplexMatrix::from_vec(2, vec![ZERO, -i, i, ZERO]).unwrap(),
        ComplexMatrix::from_vec(2, vec![one, ZERO, ZERO, -one]).unwrap(),
    ]
}

/// `Tr[m · op]`.
pub(crate) fn expectation(m: &ComplexMatrix, op: &ComplexMatrix) -> Complex64 {
    let n = m.dim();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += m.get(i, j) * op.get(j, i);
        }
    }
    acc
}

impl BlochForm {
    pub fn zero() -> Self {
        Self {
            u: [0.0; 3],
            v: [0.0; 3],
            w: [[0.0; 3]; 3],
        }
    }

    pub fn diagonal(u: Vec3, v: Vec3, w: Vec3) -> Self {
        Self {
            u,
            v,
            w: diag3(w),
        }
    }

    pub fn w_diagonal(&self) -> Vec3 {
        [self.w[0][0], self.w[1][1], self.w[2][2]]
    }

    /// `Tr(WᵀW)`.
    pub fn correlation_weight(&self) -> f64 {
        self.w.iter().flatten().map(|x| x * x).sum()
    }

    /// Checks the norm bounds a physical two-qubit state obeys (not positivity).
    pub fn check_bounds(&self) -> Result<()> {
        let tol = 1e-9;
        if norm3(self.u) > 1.0 + tol || norm3(self.v) > 1.0 + tol {
            return Err(Error::State("local Bloch vector longer than 1".into()));
        }
        if self.w.iter().flatten().any(|x| x.abs() > 1.0 + tol) {
            return Err(Error::State("correlation entry outside [-1, 1]".into()));
        }
        Ok(())
    }
}

pub fn decompose(rho: &DensityMatrix) -> Result<BlochForm> {
    if rho.qubits() != 2 {
        return Err(Error::Argument(format!(
            "Bloch form needs a two-qubit state, got {} qubits",
            rho.qubits()
        )));
    }
    let m = rho.matrix();
    let s = paulis();
    let id = ComplexMatrix::identity(2)?;
    let real = |z: Complex64, what: &str| -> Result<f64> {
        if z.im.abs() > IMAG_TOL {
            return Err(Error::NumericIntegrity(format!(
                "{what} has imaginary residue {:e}",
                z.im
            )));
        }
        Ok(z.re)
    };
    let mut b = BlochForm::zero();
    for j in 0..3 {
        b.u[j] = real(expectation(m, &kron(&s[j], &id)?), "local vector")?;
        b.v[j] = real(expectation(m, &kron(&id, &s[j])?), "local vector")?;
        for k in 0..3 {
            b.w[j][k] = real(expectation(m, &kron(&s[j], &s[k])?), "correlator")?;
        }
    }
    Ok(b)
}

/// Linear inverse of [`decompose`]; positivity is not enforced.
pub fn reconstruct(b: &BlochForm) -> ComplexMatrix {
    let s = paulis();
    let id = ComplexMatrix::identity(2).unwrap();
    let mut acc = ComplexMatrix::identity(4).unwrap();
    let mut add = |op: ComplexMatrix, k: f64| {
        if k != 0.0 {
            acc = &acc + &op.scale(k);
        }
    };
    for j in 0..3 {
        add(kron(&s[j], &id).unwrap(), b.u[j]);
        add(kron(&id, &s[j]).unwrap(), b.v[j]);
        for k in 0..3 {
            add(kron(&s[j], &s[k]).unwrap(), b.w[j][k]);
        }
    }
    acc.scale(0.25)
}

/// Rotates the frames of both parties so the correlation tensor becomes diagonal.
///
/// Rotations are proper; the sign of the last singular value absorbs any
/// reflection. A tensor that is already diagonal is left in its own axes.
pub fn diagonalize_correlation(b: &BlochForm) -> DiagonalizedForm {
    let off = (0..3)
        .flat_map(|j| (0..3).filter(move |&k| k != j).map(move |k| (j, k)))
        .map(|(j, k)| b.w[j][k].abs())
        .fold(0.0, f64::max);
    if off <= DIAGONAL_TOL {
        let mut base = *b;
        for (j, row) in base.w.iter_mut().enumerate() {
            for (k, x) in row.iter_mut().enumerate() {
                if j != k {
                    *x = 0.0;
                }
            }
        }
        return DiagonalizedForm {
            base,
            rot1: IDENTITY3,
            rot2: IDENTITY3,
        };
    }

    let (sigma, left, right) = svd3(&b.w);
    // W = L Σ Rᵀ, so Lᵀ W R = Σ.
    let rot1 = transpose3(&left);
    let rot2 = transpose3(&right);
    let w = diag3(sigma);
    DiagonalizedForm {
        base: BlochForm {
            u: mat3_vec(&rot1, b.u),
            v: mat3_vec(&rot2, b.v),
            w,
        },
        rot1,
        rot2,
    }
}

/// Signed SVD `W = L·diag(σ)·Rᵀ` with `det L = det R = +1`.
///
/// `|σ|` is descending; only `σ[2]` may be negative.
pub fn svd3(w: &Mat3) -> (Vec3, Mat3, Mat3) {
    let wtw = mat3_mul(&transpose3(w), w);
    let buf: Vec<Complex64> = wtw
        .iter()
        .flatten()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    let (vals, vecs) = jacobi_hermitian(&buf, 3);

    let mut cols: Vec<(f64, Vec3)> = (0..3)
        .map(|k| {
            let mut e = [vecs[k].re, vecs[3 + k].re, vecs[6 + k].re];
            // Sign fix: first significant component positive.
            if let Some(&x) = e.iter().find(|x| x.abs() > 1e-12) {
                if x < 0.0 {
                    e = scale3(e, -1.0);
                }
            }
            (vals[k].max(0.0), e)
        })
        .collect();
    cols.sort_by(|a, b| {
        b.0.total_cmp(&a.0).then_with(|| {
            a.1.iter()
                .zip(&b.1)
                .map(|(x, y)| y.total_cmp(x))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });

    let mut right = [[0.0; 3]; 3];
    for (k, (_, e)) in cols.iter().enumerate() {
        for r in 0..3 {
            right[r][k] = e[r];
        }
    }
    if det3(&right) < 0.0 {
        for row in right.iter_mut() {
            row[2] = -row[2];
        }
    }

    let scale = cols[0].0.sqrt().max(1.0);
    let mut sigma = [0.0; 3];
    let mut lcols: Vec<Option<Vec3>> = vec![None; 3];
    for k in 0..3 {
        let rk = [right[0][k], right[1][k], right[2][k]];
        let wr = mat3_vec(w, rk);
        let s = norm3(wr);
        sigma[k] = s;
        if s > 1e-10 * scale {
            lcols[k] = Some(scale3(wr, 1.0 / s));
        } else {
            sigma[k] = 0.0;
        }
    }
    // Complete the left frame where singular values vanish.
    let l0 = lcols[0].unwrap_or([1.0, 0.0, 0.0]);
    let l1 = lcols[1].unwrap_or_else(|| orthogonal_to(l0));
    let l2 = lcols[2].unwrap_or_else(|| cross3(l0, l1));
    let mut left = [[0.0; 3]; 3];
    for r in 0..3 {
        left[r] = [l0[r], l1[r], l2[r]];
    }
    if det3(&left) < 0.0 {
        for row in left.iter_mut() {
            row[2] = -row[2];
        }
        sigma[2] = -sigma[2];
    }
    (sigma, left, right)
}

fn orthogonal_to(a: Vec3) -> Vec3 {
    let trial = if a[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let c = cross3(a, trial);
    scale3(c, 1.0 / norm3(c))
}

pub fn diag3(d: Vec3) -> Mat3 {
    [[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]]
}

pub fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm3(a: Vec3) -> f64 {
    dot3(a, a).sqrt()
}

pub fn scale3(a: Vec3, k: f64) -> Vec3 {
    [a[0] * k, a[1] * k, a[2] * k]
}

pub fn cross3(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn mat3_vec(m: &Mat3, x: Vec3) -> Vec3 {
    [dot3(m[0], x), dot3(m[1], x), dot3(m[2], x)]
}

pub fn mat3_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn transpose3(a: &Mat3) -> Mat3 {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = a[j][i];
        }
    }
    t
}

pub fn det3(m: &Mat3) -> f64 {
    dot3(m[0], cross3(m[1], m[2]))
}
