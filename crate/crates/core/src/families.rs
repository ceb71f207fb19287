//! Parametric two-qubit state families and their closed-form conditions.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{ComplexMatrix, DensityMatrix, ZERO};

const DENOM_EPS: f64 = 1e-12;

/// A member of one of the supported families, or a raw matrix.
///
/// Serialized as a JSON object tagged by `"family"`, e.g.
/// `{"family":"gamma1","p":0.6,"alpha":0.6}`. Raw matrices are rows of
/// `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum FamilySpec {
    /// `(1−p)|φ⟩⟨φ| + p|00⟩⟨00|`, `|φ⟩ = sinα|01⟩ + cosα|10⟩`.
    Gamma1 { p: f64, alpha: f64 },
    /// `(1−p)|φ⟩⟨φ| + p|11⟩⟨11|`.
    Gamma2 { p: f64, alpha: f64 },
    /// `s|χ⟩⟨χ| + (1−s) Ω¹⊗I/2`, `|χ⟩ = cosβ|00⟩ + sinβ|11⟩`.
    Omega { beta: f64, s: f64 },
    /// `p|φ⁺⟩⟨φ⁺| + (1−p) I/4`.
    Werner { p: f64 },
    Raw { matrix: Vec<Vec<[f64; 2]>> },
}

fn in_range(name: &str, x: f64, lo: f64, hi: f64) -> Result<()> {
    if !(x >= lo && x <= hi) {
        return Err(Error::Argument(format!(
            "{name} = {x} outside [{lo}, {hi}]"
        )));
    }
    Ok(())
}

impl FamilySpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FamilySpec::Gamma1 { p, alpha } | FamilySpec::Gamma2 { p, alpha } => {
                in_range("p", p, 0.0, 1.0)?;
                in_range("alpha", alpha, 0.0, FRAC_PI_4)
            }
            FamilySpec::Omega { beta, s } => {
                if !(beta > 0.0 && beta < std::f64::consts::FRAC_PI_2) {
                    return Err(Error::Argument(format!("beta = {beta} outside (0, pi/2)")));
                }
                in_range("s", s, 0.0, 1.0)
            }
            FamilySpec::Werner { p } => in_range("p", p, 0.0, 1.0),
            FamilySpec::Raw { ref matrix } => {
                if matrix.len() != 4 || matrix.iter().any(|r| r.len() != 4) {
                    return Err(Error::Argument("raw matrix must be 4x4".into()));
                }
                Ok(())
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Gamma1 { .. } => "gamma1",
            FamilySpec::Gamma2 { .. } => "gamma2",
            FamilySpec::Omega { .. } => "omega",
            FamilySpec::Werner { .. } => "werner",
            FamilySpec::Raw { .. } => "raw",
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: FamilySpec = serde_json::from_str(text)
            .map_err(|e| Error::Argument(format!("bad state spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }
}

fn ket(amps: &[(usize, f64)]) -> Vec<Complex64> {
    let mut v = vec![ZERO; 4];
    for &(i, a) in amps {
        v[i] = Complex64::new(a, 0.0);
    }
    v
}

fn mix(terms: &[(f64, ComplexMatrix)]) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(4).unwrap();
    for (w, m) in terms {
        acc = &acc + &m.scale(*w);
    }
    acc
}

pub fn make_state(spec: &FamilySpec) -> Result<DensityMatrix> {
    spec.validate()?;
    let m = match *spec {
        FamilySpec::Gamma1 { p, alpha } | FamilySpec::Gamma2 { p, alpha } => {
            let phi = ComplexMatrix::outer(&ket(&[(1, alpha.sin()), (2, alpha.cos())]))?;
            let corner = if matches!(spec, FamilySpec::Gamma1 { .. }) { 0 } else { 3 };
            let pure = ComplexMatrix::outer(&ket(&[(corner, 1.0)]))?;
            mix(&[(1.0 - p, phi), (p, pure)])
        }
        FamilySpec::Omega { beta, s } => {
            let chi = ComplexMatrix::outer(&ket(&[(0, beta.cos()), (3, beta.sin())]))?;
            let (c2, s2) = (beta.cos().powi(2), beta.sin().powi(2));
            let noise = ComplexMatrix::diag_real(&[c2 / 2.0, c2 / 2.0, s2 / 2.0, s2 / 2.0])?;
            mix(&[(s, chi), (1.0 - s, noise)])
        }
        FamilySpec::Werner { p } => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let bell = ComplexMatrix::outer(&ket(&[(0, h), (3, h)]))?;
            mix(&[(p, bell), ((1.0 - p) / 4.0, ComplexMatrix::identity(4)?)])
        }
        FamilySpec::Raw { ref matrix } => {
            let rows: Vec<Vec<Complex64>> = matrix
                .iter()
                .map(|r| r.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
                .collect();
            ComplexMatrix::from_rows(&rows)?
        }
    };
    DensityMatrix::new(m)
}

/// `2((1−p) sin2α)² + (2p−1)² ≤ 1`.
pub fn gamma_f3_unsteerable(p: f64, alpha: f64) -> bool {
    gamma_f3_value(p, alpha) <= 1.0
}

/// `Tr(WᵀW)` shared by both γ families.
pub fn gamma_f3_value(p: f64, alpha: f64) -> f64 {
    2.0 * ((1.0 - p) * (2.0 * alpha).sin()).powi(2) + (2.0 * p - 1.0).powi(2)
}

/// Closed-form `Tr(WᵀW)` of the swap conditionals 00 and 01 for
/// `ρ_AB = γ₁(p, α)`, `ρ_BC = γ₂(p, α)`.
pub fn eq13_value(p: f64, alpha: f64) -> Result<f64> {
    let c2 = (2.0 * alpha).cos();
    let c4 = (4.0 * alpha).cos();
    let n1 = 2.0 * (-1.0 - p + (p - 1.0) * c2).powi(2);
    if n1 < DENOM_EPS {
        return Err(Error::DegenerateDenominator(n1));
    }
    let num = 9.0 - 26.0 * p + 25.0 * p * p
        + 4.0 * (3.0 - 8.0 * p + 5.0 * p * p) * c2
        + 3.0 * (1.0 - p).powi(2) * c4;
    Ok(num / n1)
}

/// Closed-form `Tr(WᵀW)` of the swap conditionals 10 and 11 (same pairing as [`eq13_value`]).
pub fn eq14_value(p: f64, alpha: f64) -> Result<f64> {
    let c2 = (2.0 * alpha).cos();
    let c4 = (4.0 * alpha).cos();
    let q = (p - 1.0).powi(2);
    let n2 = (3.0 - 2.0 * p + 3.0 * p * p - 4.0 * (p - 1.0) * p * c2 + q * c4).powi(2);
    if n2 < DENOM_EPS {
        return Err(Error::DegenerateDenominator(n2));
    }
    let n3 = (3.0 - 10.0 * p + 11.0 * p * p + 4.0 * (p - 1.0) * p * c2 + q * c4).powi(2);
    Ok((8.0 * q * q * (2.0 * alpha).sin().powi(4) + n3) / n2)
}

/// `cos²(2β) ≥ (2s−1)/((2−s)s³)`; vacuously true at `s = 0`.
pub fn omega_unsteerable(beta: f64, s: f64) -> bool {
    if s <= 0.0 {
        return true;
    }
    (2.0 * beta).cos().powi(2) >= (2.0 * s - 1.0) / ((2.0 - s) * s.powi(3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::decompose;

    #[test]
    fn gamma_edge_members() {
        let rho = make_state(&FamilySpec::Gamma1 { p: 0.0, alpha: FRAC_PI_4 }).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi_plus = DensityMatrix::pure(&ket(&[(1, h), (2, h)])).unwrap();
        assert!(rho.matrix().max_abs_diff(psi_plus.matrix()) < 1e-15);

        let rho = make_state(&FamilySpec::Gamma1 { p: 1.0, alpha: 0.3 }).unwrap();
        let zz = DensityMatrix::pure(&ket(&[(0, 1.0)])).unwrap();
        assert!(rho.matrix().max_abs_diff(zz.matrix()) < 1e-15);
    }

    #[test]
    fn parameter_ranges_are_enforced() {
        for bad in [
            FamilySpec::Gamma1 { p: 1.2, alpha: 0.1 },
            FamilySpec::Gamma2 { p: 0.2, alpha: 1.0 },
            FamilySpec::Omega { beta: 0.0, s: 0.4 },
            FamilySpec::Omega { beta: 0.3, s: -0.1 },
            FamilySpec::Werner { p: f64::NAN },
        ] {
            assert!(matches!(make_state(&bad), Err(Error::Argument(_))), "{bad:?}");
        }
    }

    #[test]
    fn unsteerability_flag_examples() {
        assert!(gamma_f3_unsteerable(0.6, 0.6));
        assert!((gamma_f3_value(0.6, 0.6) - 0.31798).abs() < 1e-5);
        assert!(!gamma_f3_unsteerable(0.0, FRAC_PI_4));
        assert!((gamma_f3_value(0.0, FRAC_PI_4) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn eq13_window_at_alpha_tenth() {
        assert!(eq13_value(0.1, 0.1).unwrap() > 1.0);
        assert!(eq13_value(0.5, 0.1).unwrap() <= 1.0);
        assert!(eq14_value(0.1, 0.1).unwrap() <= 1.0);
        assert!(eq14_value(1.0, 0.2).unwrap() <= 1.0);
    }

    #[test]
    fn omega_flag_examples() {
        assert!(omega_unsteerable(0.1, 0.7));
        assert!(!omega_unsteerable(FRAC_PI_4, 1.0));
        assert!(omega_unsteerable(0.4, 0.0));
    }

    #[test]
    fn omega_first_party_vector() {
        for (beta, s) in [(0.1, 0.7), (0.3, 0.59), (1.2, 0.2)] {
            let b = decompose(&make_state(&FamilySpec::Omega { beta, s }).unwrap()).unwrap();
            assert!((b.u[2] - (2.0 * beta).cos()).abs() < 1e-14);
            assert!(b.u[0].abs() < 1e-15 && b.u[1].abs() < 1e-15);
        }
    }

    #[test]
    fn json_round_trip_and_errors() {
        let spec = FamilySpec::from_json(r#"{"family":"gamma1","p":0.6,"alpha":0.6}"#).unwrap();
        assert_eq!(spec, FamilySpec::Gamma1 { p: 0.6, alpha: 0.6 });
        assert_eq!(FamilySpec::from_json(&spec.to_json()).unwrap(), spec);
        assert!(FamilySpec::from_json(r#"{"family":"qutrit"}"#).is_err());
        assert!(FamilySpec::from_json(r#"{"family":"werner","p":2}"#).is_err());
        let raw = r#"{"family":"raw","matrix":[[[0.25,0],[0,0],[0,0],[0,0]],[[0,0],[0.25,0],[0,0],[0,0]],[[0,0],[0,0],[0.25,0],[0,0]],[[0,0],[0,0],[0,0],[0.25,0]]]}"#;
        let rho = make_state(&FamilySpec::from_json(raw).unwrap()).unwrap();
        assert!((rho.get(2, 2).re - 0.25).abs() < 1e-16);
    }

    #[test]
    fn raw_matrix_must_be_a_state() {
        let mut rows = vec![vec![[0.0, 0.0]; 4]; 4];
        rows[0][0] = [1.5, 0.0];
        rows[1][1] = [-0.5, 0.0];
        assert!(matches!(
            make_state(&FamilySpec::Raw { matrix: rows }),
            Err(Error::State(_))
        ));
    }
}
