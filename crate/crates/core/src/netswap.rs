//! Entanglement swapping: Bell-basis measurement on a linear chain and
//! the eight-element basis on a three-link star.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{partial_trace, ComplexMatrix, DensityMatrix, ZERO};

/// Outcomes with probability below this are flagged degenerate.
pub const DEGENERATE_PROB: f64 = 1e-12;

const BASIS_TOL: f64 = 1e-12;

/// Which qubit of each two-qubit link the measuring party holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CentralQubit {
    First,
    #[default]
    Second,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementBasis {
    labels: Vec<String>,
    vectors: Vec<Vec<Complex64>>,
}

impl MeasurementBasis {
    /// Builds a basis after checking orthonormality and completeness.
    pub fn new(labels: Vec<String>, vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = vectors.len();
        if labels.len() != n || n == 0 || vectors.iter().any(|v| v.len() != n) {
            return Err(Error::Argument(
                "basis needs as many vectors as the space dimension".into(),
            ));
        }
        for i in 0..n {
            for j in 0..n {
                let ip: Complex64 = vectors[i]
                    .iter()
                    .zip(&vectors[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                if (ip - expect).norm() > BASIS_TOL {
                    return Err(Error::Argument(format!(
                        "basis vectors {i} and {j} have overlap {ip}"
                    )));
                }
            }
        }
        let basis = MeasurementBasis { labels, vectors };
        let defect = basis.completeness_defect();
        if defect > BASIS_TOL {
            return Err(Error::Argument(format!("basis incomplete: defect {defect:e}")));
        }
        Ok(basis)
    }

    /// `φ⁺, φ⁻, ψ⁺, ψ⁻` labelled `00, 01, 10, 11`.
    pub fn bell() -> Self {
        let h = FRAC_1_SQRT_2;
        let v = |a: [f64; 4]| a.iter().map(|&x| Complex64::new(x * h, 0.0)).collect();
        MeasurementBasis::new(
            ["00", "01", "10", "11"].iter().map(|s| s.to_string()).collect(),
            vec![
                v([1.0, 0.0, 0.0, 1.0]),
                v([1.0, 0.0, 0.0, -1.0]),
                v([0.0, 1.0, 1.0, 0.0]),
                v([0.0, 1.0, -1.0, 0.0]),
            ],
        )
        .expect("Bell basis is orthonormal")
    }

    /// The eight three-qubit vectors `δ₁ … δ₈`, labelled `1 … 8`.
    pub fn star() -> Self {
        const TERMS: [[(usize, f64); 3]; 8] = [
            [(0b001, 1.0), (0b100, 1.0), (0b010, 1.0)],
            [(0b010, 1.0), (0b100, -1.0), (0b000, 1.0)],
            [(0b010, -1.0), (0b001, 1.0), (0b000, 1.0)],
            [(0b100, 1.0), (0b000, 1.0), (0b001, -1.0)],
            [(0b101, 1.0), (0b110, 1.0), (0b011, 1.0)],
            [(0b110, 1.0), (0b101, -1.0), (0b111, 1.0)],
            [(0b110, -1.0), (0b111, 1.0), (0b011, 1.0)],
            [(0b111, 1.0), (0b101, 1.0), (0b011, -1.0)],
        ];
        let k = 1.0 / 3f64.sqrt();
        let vectors = TERMS
            .iter()
            .map(|terms| {
                let mut v = vec![ZERO; 8];
                for &(i, c) in terms {
                    v[i] += Complex64::new(c * k, 0.0);
                }
                v
            })
            .collect();
        MeasurementBasis::new((1..=8).map(|j| j.to_string()).collect(), vectors)
            .expect("star basis is orthonormal")
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    /// Max orthonormality defect over all pairs.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let ip: Complex64 = self.vectors[i]
                    .iter()
                    .zip(&self.vectors[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((ip - expect).norm());
            }
        }
        worst
    }

    /// `max |Σ|δ⟩⟨δ| − I|`.
    pub fn completeness_defect(&self) -> f64 {
        let n = self.len();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                let s: Complex64 = self.vectors.iter().map(|v| v[r] * v[c].conj()).sum();
                let expect = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((s - expect).norm());
            }
        }
        worst
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SwapOutcome {
    pub label: String,
    pub probability: f64,
    /// Normalized post-measurement state of the outer parties; `I/d` when degenerate.
    pub conditional: DensityMatrix,
    pub degenerate: bool,
}

/// Projects the central qubits of `links` onto each vector of `basis`.
///
/// Link `i` contributes outer qubit `i` of the conditional state. `central[i]`
/// says which qubit of link `i` is measured; basis vectors are indexed with the
/// first link's central qubit as the most significant bit.
pub fn swap_links(
    links: &[&DensityMatrix],
    central: &[CentralQubit],
    basis: &MeasurementBasis,
) -> Result<Vec<SwapOutcome>> {
    let n = links.len();
    if n == 0 || central.len() != n || basis.len() != 1 << n {
        return Err(Error::Argument(format!(
            "{n} links need a basis of size {} and one central flag each",
            1usize << n
        )));
    }
    if let Some(bad) = links.iter().find(|r| r.qubits() != 2) {
        return Err(Error::State(format!(
            "each link must be a two-qubit state, got {} qubits",
            bad.qubits()
        )));
    }
    let d = 1usize << n;
    let bit = |x: usize, i: usize| (x >> (n - 1 - i)) & 1;
    let local = |i: usize, a: usize, b: usize| match central[i] {
        CentralQubit::First => 2 * b + a,
        CentralQubit::Second => 2 * a + b,
    };

    // joint[(A, B), (A', B')] with outer index A and central index B
    let mut joint = vec![ZERO; d * d * d * d];
    let stride = d * d;
    for oa in 0..d {
        for ob in 0..d {
            for oa2 in 0..d {
                for ob2 in 0..d {
                    let mut z = Complex64::new(1.0, 0.0);
                    for (i, rho) in links.iter().enumerate() {
                        z *= rho.get(
                            local(i, bit(oa, i), bit(ob, i)),
                            local(i, bit(oa2, i), bit(ob2, i)),
                        );
                    }
                    joint[(oa * d + ob) * stride + oa2 * d + ob2] = z;
                }
            }
        }
    }

    basis
        .vectors()
        .iter()
        .zip(basis.labels())
        .map(|(delta, label)| {
            let cond = ComplexMatrix::from_fn(d, |a, a2| {
                let mut acc = ZERO;
                for b in 0..d {
                    let cb = delta[b].conj();
                    if cb == ZERO {
                        continue;
                    }
                    for b2 in 0..d {
                        if delta[b2] != ZERO {
                            acc += cb * delta[b2] * joint[(a * d + b) * stride + a2 * d + b2];
                        }
                    }
                }
                acc
            })?;
            let probability = cond.trace().re;
            if probability < DEGENERATE_PROB {
                return Ok(SwapOutcome {
                    label: label.clone(),
                    probability: probability.max(0.0),
                    conditional: DensityMatrix::maximally_mixed(n)?,
                    degenerate: true,
                });
            }
            Ok(SwapOutcome {
                label: label.clone(),
                probability,
                conditional: DensityMatrix::from_unnormalized(&cond)?,
                degenerate: false,
            })
        })
        .collect()
}

/// Bell measurement on `(B₁, B₂)` of `ρ_AB ⊗ ρ_BC` with joint order `(A, B₁, B₂, C)`.
/// Conditionals live on `(A, C)`.
pub fn bsm_swap(rho_ab: &DensityMatrix, rho_bc: &DensityMatrix) -> Result<Vec<SwapOutcome>> {
    swap_links(
        &[rho_ab, rho_bc],
        &[CentralQubit::Second, CentralQubit::First],
        &MeasurementBasis::bell(),
    )
}

/// Star measurement with the centre holding the second qubit of every link.
pub fn star_swap(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    rho3: &DensityMatrix,
) -> Result<Vec<SwapOutcome>> {
    star_swap_with(rho1, rho2, rho3, CentralQubit::Second)
}

pub fn star_swap_with(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    rho3: &DensityMatrix,
    central: CentralQubit,
) -> Result<Vec<SwapOutcome>> {
    swap_links(&[rho1, rho2, rho3], &[central; 3], &MeasurementBasis::star())
}

/// Two-party marginals of a three-qubit state, pairs `(1,2)`, `(1,3)`, `(2,3)`.
pub fn reduced_pairs(rho3: &DensityMatrix) -> Result<[DensityMatrix; 3]> {
    if rho3.qubits() != 3 {
        return Err(Error::State(format!(
            "expected a three-qubit state, got {} qubits",
            rho3.qubits()
        )));
    }
    Ok([
        partial_trace(rho3, &[0, 1])?,
        partial_trace(rho3, &[0, 2])?,
        partial_trace(rho3, &[1, 2])?,
    ])
}
