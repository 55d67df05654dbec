//! Two-level density matrices in the (H, V) polarization basis.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Tolerance used when validating hermiticity, trace and positivity.
pub const STATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    matrix: Matrix2<Complex64>,
}

/// The phase-shift unitary `exp(-i θ Z / 2)`.
pub fn phase_unitary(theta: f64) -> Matrix2<Complex64> {
    Matrix2::new(
        Complex64::from_polar(1.0, -theta / 2.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::from_polar(1.0, theta / 2.0),
    )
}

impl QubitState {
    /// Validates `matrix` as a density matrix with tolerance [`STATE_TOL`].
    pub fn new(matrix: Matrix2<Complex64>) -> Result<Self> {
        Self::with_tolerance(matrix, STATE_TOL)
    }

    pub fn with_tolerance(matrix: Matrix2<Complex64>, tol: f64) -> Result<Self> {
        let state = Self { matrix };
        state.check(tol)?;
        Ok(state)
    }

    /// Wraps a matrix without validation. Callers own the invariants.
    pub(crate) fn from_matrix_unchecked(matrix: Matrix2<Complex64>) -> Self {
        Self { matrix }
    }

    /// Pure state `α|H⟩ + β|V⟩`, normalized.
    pub fn pure(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::invalid(
                "pure state amplitudes must be finite and nonzero",
            ));
        }
        let (a, b) = (alpha / norm, beta / norm);
        Ok(Self {
            matrix: Matrix2::new(a * a.conj(), a * b.conj(), b * a.conj(), b * b.conj()),
        })
    }

    /// State with Bloch vector `(x, y, z)`, `|r| ≤ 1`.
    ///
    /// `z = +1` is `|H⟩`, `x = +1` is `|+⟩`, `y = +1` is `|+i⟩`.
    pub fn from_bloch(x: f64, y: f64, z: f64) -> Result<Self> {
        let r2 = x * x + y * y + z * z;
        if !(r2 <= 1.0 + STATE_TOL) {
            return Err(Error::invalid(format!(
                "Bloch vector length {} exceeds 1",
                r2.sqrt()
            )));
        }
        Ok(Self {
            matrix: Matrix2::new(
                Complex64::new((1.0 + z) / 2.0, 0.0),
                Complex64::new(x / 2.0, -y / 2.0),
                Complex64::new(x / 2.0, y / 2.0),
                Complex64::new((1.0 - z) / 2.0, 0.0),
            ),
        })
    }

    pub fn horizontal() -> Self {
        Self::from_bloch(0.0, 0.0, 1.0).unwrap()
    }

    pub fn vertical() -> Self {
        Self::from_bloch(0.0, 0.0, -1.0).unwrap()
    }

    pub fn plus() -> Self {
        Self::from_bloch(1.0, 0.0, 0.0).unwrap()
    }

    pub fn plus_i() -> Self {
        Self::from_bloch(0.0, 1.0, 0.0).unwrap()
    }

    pub fn maximally_mixed() -> Self {
        Self::from_bloch(0.0, 0.0, 0.0).unwrap()
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.matrix
    }

    pub fn hh(&self) -> f64 {
        self.matrix[(0, 0)].re
    }

    pub fn vv(&self) -> f64 {
        self.matrix[(1, 1)].re
    }

    /// The coherence `⟨H|ρ|V⟩`.
    pub fn hv(&self) -> Complex64 {
        self.matrix[(0, 1)]
    }

    /// Returns the state with its coherence multiplied by `factor`; populations unchanged.
    pub fn scale_coherence(&self, factor: Complex64) -> Self {
        let mut m = self.matrix;
        m[(0, 1)] *= factor;
        m[(1, 0)] *= factor.conj();
        Self { matrix: m }
    }

    /// `U_θ ρ U_θ†`.
    pub fn rotated(&self, theta: f64) -> Self {
        self.scale_coherence(Complex64::from_polar(1.0, -theta))
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let a = self.matrix[(0, 0)].re;
        let d = self.matrix[(1, 1)].re;
        let b = (self.matrix[(0, 1)] + self.matrix[(1, 0)].conj()) / 2.0;
        (a + d) / 2.0 - (((a - d) / 2.0).powi(2) + b.norm_sqr()).sqrt()
    }

    pub fn purity(&self) -> f64 {
        (self.matrix * self.matrix).trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        let m = &self.matrix;
        (m - m.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Checks hermiticity, unit trace and positivity to `tol`.
    pub fn check(&self, tol: f64) -> Result<()> {
        if self
            .matrix
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::invalid("density matrix has non-finite entries"));
        }
        let herm = self.hermiticity_error();
        if herm > tol {
            return Err(Error::invalid(format!(
                "density matrix not Hermitian (error {herm:.3e})"
            )));
        }
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::invalid(format!(
                "density matrix trace is {tr}, expected 1"
            )));
        }
        let min = self.min_eigenvalue();
        if min < -tol {
            return Err(Error::invalid(format!(
                "density matrix has negative eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &QubitState) -> f64 {
        (self.matrix - other.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

impl Serialize for QubitState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let m = &self.matrix;
        let rows: [[f64; 2]; 4] = [
            [m[(0, 0)].re, m[(0, 0)].im],
            [m[(0, 1)].re, m[(0, 1)].im],
            [m[(1, 0)].re, m[(1, 0)].im],
            [m[(1, 1)].re, m[(1, 1)].im],
        ];
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QubitState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let e = <[[f64; 2]; 4]>::deserialize(deserializer)?;
        let c = |i: usize| Complex64::new(e[i][0], e[i][1]);
        QubitState::new(Matrix2::new(c(0), c(1), c(2), c(3))).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_states_are_valid() {
        for s in [
            QubitState::horizontal(),
            QubitState::vertical(),
            QubitState::plus(),
            QubitState::plus_i(),
            QubitState::maximally_mixed(),
        ] {
            s.check(STATE_TOL).unwrap();
        }
        assert!((QubitState::plus().hv().re - 0.5).abs() < 1e-15);
        assert!((QubitState::plus_i().hv() - Complex64::new(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn rotation_matches_unitary_conjugation() {
        let rho = QubitState::from_bloch(0.3, -0.4, 0.5).unwrap();
        let u = phase_unitary(0.7);
        let expected = u * rho.matrix() * u.adjoint();
        let got = rho.rotated(0.7);
        assert!((got.matrix() - expected).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn rejects_invalid_matrices() {
        let bad_trace = Matrix2::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.5, 0.0),
        );
        assert!(QubitState::new(bad_trace).is_err());
        let not_psd = Matrix2::new(
            Complex64::new(0.5, 0.0),
            Complex64::new(0.9, 0.0),
            Complex64::new(0.9, 0.0),
            Complex64::new(0.5, 0.0),
        );
        assert!(QubitState::new(not_psd).is_err());
        assert!(QubitState::from_bloch(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn serializes_as_row_major_complex_pairs() {
        let rho = QubitState::plus_i();
        let json = serde_json::to_string(&rho).unwrap();
        assert_eq!(json, "[[0.5,0.0],[0.0,-0.5],[0.0,0.5],[0.5,0.0]]");
        let back: QubitState = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rho);
        assert!(serde_json::from_str::<QubitState>("[[2.0,0.0],[0,0],[0,0],[0,0]]").is_err());
    }
}
