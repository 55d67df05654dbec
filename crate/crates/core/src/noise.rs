//! Discrete phase-noise distributions and the quantities derived from their
//! Fourier coefficients.
//!
//! A distribution `p(δ)` over phase kicks enters every channel only through
//! `f(k) = Σ_j w_j exp(-i k δ_j / 2)`. The first two coefficients decide
//! whether the incoherent part of the superposed-path output is itself a
//! phase shift (the restoration condition `|f(2) - f(1)²| = 1 - |f(1)|²`),
//! and fix the offsets `θ₀` and `θ₁` that the conditional corrections undo.

use std::f64::consts::{PI, TAU};

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute tolerance for the restoration condition.
pub const CONDITION_TOL: f64 = 1e-9;

const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Below this `1 - |f(1)|²` is treated as noiseless.
const NOISELESS_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution", into = "RawDistribution")]
pub struct NoiseDistribution {
    atoms: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct RawDistribution {
    atoms: Vec<(f64, f64)>,
}

impl TryFrom<RawDistribution> for NoiseDistribution {
    type Error = Error;

    fn try_from(raw: RawDistribution) -> Result<Self> {
        NoiseDistribution::new(raw.atoms)
    }
}

impl From<NoiseDistribution> for RawDistribution {
    fn from(d: NoiseDistribution) -> Self {
        RawDistribution { atoms: d.atoms }
    }
}

/// Fourier data and offsets of a distribution, computed once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseProfile {
    pub f1: Complex64,
    pub f2: Complex64,
    pub theta0: f64,
    /// `None` when the restoration condition fails at the tolerance used.
    pub theta1: Option<f64>,
    pub condition_residual: f64,
}

/// Reduces an angle to `(-π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

impl NoiseDistribution {
    /// Builds a distribution from `(delta, weight)` atoms.
    ///
    /// Deltas must lie in `[0, 2π)` and be distinct; weights must be
    /// nonnegative and sum to one within `1e-12`.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("noise distribution needs at least one atom"));
        }
        let mut total = 0.0;
        for &(delta, weight) in &atoms {
            if !(0.0..TAU).contains(&delta) {
                return Err(Error::invalid(format!(
                    "atom delta {delta} outside [0, 2π)"
                )));
            }
            if !(weight >= 0.0) || !weight.is_finite() {
                return Err(Error::invalid(format!(
                    "atom weight {weight} is not a probability"
                )));
            }
            total += weight;
        }
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::invalid(format!(
                "atom weights sum to {total}, expected 1"
            )));
        }
        let mut deltas: Vec<f64> = atoms.iter().map(|a| a.0).collect();
        deltas.sort_by(f64::total_cmp);
        if deltas.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("atom deltas must be distinct"));
        }
        Ok(Self { atoms })
    }

    /// Random phase kick: no extra phase with probability `p`, offset
    /// `delta0` with probability `1 - p`.
    pub fn phase_kick(p: f64, delta0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!(
                "kick probability {p} outside [0, 1]"
            )));
        }
        if !(0.0..TAU).contains(&delta0) {
            return Err(Error::invalid(format!(
                "kick offset {delta0} outside [0, 2π)"
            )));
        }
        if p == 1.0 || delta0 == 0.0 {
            Self::new(vec![(0.0, 1.0)])
        } else if p == 0.0 {
            Self::new(vec![(delta0, 1.0)])
        } else {
            Self::new(vec![(0.0, p), (delta0, 1.0 - p)])
        }
    }

    /// Gaussian of width `sigma` centred at `mean`, sampled on `points`
    /// equally spaced atoms spanning `mean ± 4σ` and renormalized.
    ///
    /// The whole grid must fit inside `[0, 2π)`.
    pub fn discretized_gaussian(mean: f64, sigma: f64, points: usize) -> Result<Self> {
        if !(sigma > 0.0) || points < 2 {
            return Err(Error::invalid(
                "gaussian needs sigma > 0 and at least two points",
            ));
        }
        let half = 4.0 * sigma;
        if mean - half < 0.0 || mean + half >= TAU {
            return Err(Error::invalid("gaussian grid does not fit inside [0, 2π)"));
        }
        let step = 2.0 * half / (points - 1) as f64;
        let raw: Vec<(f64, f64)> = (0..points)
            .map(|j| {
                let delta = mean - half + step * j as f64;
                let z = (delta - mean) / sigma;
                (delta, (-0.5 * z * z).exp())
            })
            .collect();
        let total: f64 = raw.iter().map(|a| a.1).sum();
        Self::new(raw.into_iter().map(|(d, w)| (d, w / total)).collect())
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `f(k) = Σ_j w_j exp(-i k δ_j / 2)`.
    pub fn fourier_coefficient(&self, k: u32) -> Complex64 {
        if k == 0 {
            return Complex64::new(1.0, 0.0);
        }
        let k = f64::from(k);
        self.atoms
            .iter()
            .map(|&(delta, w)| Complex64::from_polar(w, -k * delta / 2.0))
            .sum()
    }

    /// Returns `(satisfied, residual)` for the restoration condition.
    pub fn check_condition(&self, tol: f64) -> (bool, f64) {
        let residual = condition_residual(self.fourier_coefficient(1), self.fourier_coefficient(2));
        (residual <= tol, residual)
    }

    /// Offset with `F_θ = |f(1)| U_{θ+θ₀}` exactly, so `e^{iθ₀/2} f(1)` is real and positive.
    ///
    /// Lies in `[0, 2π]`: `f(1)` is always in the closed lower half plane.
    pub fn offset_theta0(&self) -> Result<f64> {
        theta0_from(self.fourier_coefficient(1))
    }

    /// Offset with `C₀(ρ) - F₀ρF₀† = (1 - |f(1)|²) U_{θ₁} ρ U_{θ₁}†`.
    ///
    /// Noiseless distributions (`|f(1)| = 1`) return 0: that branch carries no weight.
    pub fn offset_theta1(&self) -> Result<f64> {
        self.offset_theta1_with_tol(CONDITION_TOL)
    }

    pub fn offset_theta1_with_tol(&self, tol: f64) -> Result<f64> {
        let f1 = self.fourier_coefficient(1);
        let f2 = self.fourier_coefficient(2);
        let residual = condition_residual(f1, f2);
        if residual > tol {
            return Err(Error::ConditionViolation { residual });
        }
        Ok(theta1_from(f1, f2))
    }

    /// The 2×2 matrix whose rank decides the restoration condition.
    pub fn decomposition_matrix(&self) -> Matrix2<Complex64> {
        let f1 = self.fourier_coefficient(1);
        let f2 = self.fourier_coefficient(2);
        let a00 = (1.0 + f2.re - 2.0 * f1.re * f1.re) / 2.0;
        let a11 = (1.0 - f2.re - 2.0 * f1.im * f1.im) / 2.0;
        let a01 = Complex64::new(0.0, (f2.im - 2.0 * f1.re * f1.im) / 2.0);
        Matrix2::new(
            Complex64::new(a00, 0.0),
            a01,
            -a01,
            Complex64::new(a11, 0.0),
        )
    }

    pub fn profile(&self, tol: f64) -> Result<NoiseProfile> {
        let f1 = self.fourier_coefficient(1);
        let f2 = self.fourier_coefficient(2);
        let residual = condition_residual(f1, f2);
        Ok(NoiseProfile {
            f1,
            f2,
            theta0: theta0_from(f1)?,
            theta1: (residual <= tol).then(|| theta1_from(f1, f2)),
            condition_residual: residual,
        })
    }
}

fn condition_residual(f1: Complex64, f2: Complex64) -> f64 {
    ((f2 - f1 * f1).norm() - (1.0 - f1.norm_sqr())).abs()
}

fn theta0_from(f1: Complex64) -> Result<f64> {
    if f1.norm() == 0.0 {
        return Err(Error::DegenerateNoise(
            "f(1) = 0, the coherent offset is undefined".into(),
        ));
    }
    Ok(-2.0 * f1.im.atan2(f1.re))
}

fn theta1_from(f1: Complex64, f2: Complex64) -> f64 {
    if 1.0 - f1.norm_sqr() <= NOISELESS_TOL {
        return 0.0;
    }
    // off-diagonal of C₀(ρ) - F₀ρF₀† is (f(2) - f(1)²) ρ_HV = (1 - |f(1)|²) e^{-iθ₁} ρ_HV
    let z = f2 - f1 * f1;
    wrap_angle(-z.im.atan2(z.re))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::{phase_unitary, QubitState};
    use std::f64::consts::FRAC_PI_2;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn phase_kick_shapes() {
        assert_eq!(
            NoiseDistribution::phase_kick(1.0, 2.0).unwrap().atoms(),
            &[(0.0, 1.0)]
        );
        assert_eq!(
            NoiseDistribution::phase_kick(0.5, PI).unwrap().atoms(),
            &[(0.0, 0.5), (PI, 0.5)]
        );
        let d = NoiseDistribution::phase_kick(0.3, FRAC_PI_2).unwrap();
        assert_eq!(d.len(), 2);
        assert!((d.atoms()[0].1 - 0.3).abs() < 1e-15 && (d.atoms()[1].1 - 0.7).abs() < 1e-15);
        assert_eq!(NoiseDistribution::phase_kick(0.4, 0.0).unwrap().len(), 1);
        assert_eq!(
            NoiseDistribution::phase_kick(0.0, 1.0).unwrap().atoms(),
            &[(1.0, 1.0)]
        );
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(NoiseDistribution::phase_kick(1.1, 0.5).is_err());
        assert!(NoiseDistribution::phase_kick(-0.1, 0.5).is_err());
        assert!(NoiseDistribution::phase_kick(0.5, TAU).is_err());
        assert!(NoiseDistribution::new(vec![(0.1, 0.5), (0.1, 0.5)]).is_err());
        assert!(NoiseDistribution::new(vec![(0.1, 0.5), (0.2, 0.4)]).is_err());
        assert!(NoiseDistribution::new(vec![(0.1, -0.5), (0.2, 1.5)]).is_err());
        assert!(NoiseDistribution::new(vec![]).is_err());
    }

    #[test]
    fn fourier_coefficients_of_half_pi_kick() {
        let d = NoiseDistribution::phase_kick(0.5, PI).unwrap();
        assert_eq!(d.fourier_coefficient(0), Complex64::new(1.0, 0.0));
        assert!(close(
            d.fourier_coefficient(1),
            Complex64::new(0.5, -0.5),
            1e-15
        ));
        assert!(d.fourier_coefficient(2).norm() < 1e-15);
    }

    #[test]
    fn condition_holds_for_kicks_and_fails_for_gaussian() {
        let (ok, r) = NoiseDistribution::phase_kick(0.5, PI)
            .unwrap()
            .check_condition(CONDITION_TOL);
        assert!(ok && r < 1e-15);
        let (ok, r) = NoiseDistribution::phase_kick(1.0, 1.0)
            .unwrap()
            .check_condition(CONDITION_TOL);
        assert!(ok && r == 0.0);
        let g = NoiseDistribution::discretized_gaussian(PI, 0.5, 101).unwrap();
        let (ok, r) = g.check_condition(CONDITION_TOL);
        assert!(!ok && r > 10.0 * CONDITION_TOL);
        // continuum value: (1 - e^{-x}) - (e^{-x} - e^{-2x}) at x = σ²/4
        let x: f64 = 0.0625;
        let continuum = (1.0 - (-x).exp()) - ((-x).exp() - (-2.0 * x).exp());
        assert!((r - continuum).abs() < 1e-4, "{r} vs {continuum}");
    }

    #[test]
    fn theta0_values() {
        assert_eq!(
            NoiseDistribution::phase_kick(1.0, 3.0)
                .unwrap()
                .offset_theta0()
                .unwrap(),
            0.0
        );
        let t = NoiseDistribution::phase_kick(0.5, PI)
            .unwrap()
            .offset_theta0()
            .unwrap();
        assert!((t - FRAC_PI_2).abs() < 1e-15);
        let t = NoiseDistribution::phase_kick(0.5, FRAC_PI_2)
            .unwrap()
            .offset_theta0()
            .unwrap();
        assert!((t - PI / 4.0).abs() < 1e-15);
        // Re f(1) < 0: the positive branch sits above π
        let d = NoiseDistribution::new(vec![(0.0, 0.2), (3.0 * FRAC_PI_2, 0.8)]).unwrap();
        let t = d.offset_theta0().unwrap();
        assert!(t > PI && t <= 2.0 * PI);
        let rotated = Complex64::from_polar(1.0, t / 2.0) * d.fourier_coefficient(1);
        assert!(rotated.im.abs() < 1e-15 && rotated.re > 0.0);
    }

    #[test]
    fn theta0_undefined_when_first_coefficient_vanishes() {
        // every atom in [0, 2π) puts e^{-iδ/2} in the closed lower half plane, so f(1) = 0
        // cannot come from a valid distribution; the guard is exercised directly
        assert!(matches!(
            theta0_from(Complex64::new(0.0, 0.0)),
            Err(Error::DegenerateNoise(_))
        ));
    }

    #[test]
    fn theta1_values() {
        let t = NoiseDistribution::phase_kick(0.5, PI)
            .unwrap()
            .offset_theta1()
            .unwrap();
        assert!((t + FRAC_PI_2).abs() < 1e-15);
        assert_eq!(
            NoiseDistribution::phase_kick(1.0, 2.0)
                .unwrap()
                .offset_theta1()
                .unwrap(),
            0.0
        );
        let g = NoiseDistribution::discretized_gaussian(PI, 0.5, 101).unwrap();
        assert!(matches!(
            g.offset_theta1(),
            Err(Error::ConditionViolation { .. })
        ));
    }

    /// Direct evaluation of C₀(ρ) - F₀ρF₀† from the atoms, independent of the f(k) shortcut.
    fn incoherent_part(d: &NoiseDistribution, rho: &QubitState) -> Matrix2<Complex64> {
        let mut c = Matrix2::zeros();
        let mut f = Matrix2::zeros();
        for &(delta, w) in d.atoms() {
            let u = phase_unitary(delta);
            c += u * rho.matrix() * u.adjoint() * Complex64::new(w, 0.0);
            f += u * Complex64::new(w, 0.0);
        }
        c - f * rho.matrix() * f.adjoint()
    }

    #[test]
    fn theta1_identity_on_basis_states() {
        for (p, delta0) in [(0.3, PI), (0.5, PI), (0.7, 1.0), (0.2, 5.5), (0.9, 0.3)] {
            let d = NoiseDistribution::phase_kick(p, delta0).unwrap();
            let theta1 = d.offset_theta1().unwrap();
            let scale = 1.0 - d.fourier_coefficient(1).norm_sqr();
            let u = phase_unitary(theta1);
            for rho in [
                QubitState::horizontal(),
                QubitState::vertical(),
                QubitState::plus(),
                QubitState::plus_i(),
            ] {
                let lhs = incoherent_part(&d, &rho);
                let rhs = u * rho.matrix() * u.adjoint() * Complex64::new(scale, 0.0);
                let diff = (lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);
                assert!(diff < 1e-10, "p={p} δ₀={delta0}: {diff}");
            }
        }
    }

    #[test]
    fn decomposition_matrix_cases() {
        let a = NoiseDistribution::phase_kick(1.0, 1.0)
            .unwrap()
            .decomposition_matrix();
        assert!(a.iter().all(|z| z.norm() < 1e-15));
        let a = NoiseDistribution::phase_kick(0.5, PI)
            .unwrap()
            .decomposition_matrix();
        assert!(a.determinant().norm() < 1e-15);
        let g = NoiseDistribution::discretized_gaussian(PI, 0.5, 101).unwrap();
        let a = g.decomposition_matrix();
        assert!(a.determinant().re > 0.0);
        // closed form of the determinant
        let f1 = g.fourier_coefficient(1);
        let f2 = g.fourier_coefficient(2);
        let closed = ((1.0 - f1.norm_sqr()).powi(2) - (f1 * f1 - f2).norm_sqr()) / 4.0;
        assert!((a.determinant().re - closed).abs() < 1e-14);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let d = NoiseDistribution::phase_kick(0.25, 1.5).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"atoms":[[0.0,0.25],[1.5,0.75]]}"#);
        assert_eq!(serde_json::from_str::<NoiseDistribution>(&s).unwrap(), d);
        assert!(serde_json::from_str::<NoiseDistribution>(r#"{"atoms":[[0.0,0.3]]}"#).is_err());
    }

    #[test]
    fn profile_collects_everything() {
        let p = NoiseDistribution::phase_kick(0.5, PI)
            .unwrap()
            .profile(CONDITION_TOL)
            .unwrap();
        assert!((p.theta0 - FRAC_PI_2).abs() < 1e-15);
        assert!((p.theta1.unwrap() + FRAC_PI_2).abs() < 1e-15);
        let g = NoiseDistribution::discretized_gaussian(PI, 0.5, 101).unwrap();
        assert!(g.profile(CONDITION_TOL).unwrap().theta1.is_none());
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + FRAC_PI_2).abs() < 1e-15);
    }
}
