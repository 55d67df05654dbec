//! One probing round with a photon routed through `M` paths.
//!
//! Each path applies an independent copy of the dephasing channel to the
//! polarization. A Fourier measurement on the path degree of freedom then
//! separates the coherent branch (`m = 0`) from the `M - 1` incoherent ones,
//! and conditional phase corrections (`-θ₀` and `-θ₁`) turn the whole round
//! into a single dephasing channel with coherence factor `λ` and offset `θ₂`.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{wrap_angle, NoiseDistribution, CONDITION_TOL};
use crate::qubit::{phase_unitary, QubitState};

/// Branches lighter than this carry no state.
pub const ZERO_WEIGHT: f64 = 1e-14;

/// `C_θ(ρ) = Σ_j w_j U_{θ+δ_j} ρ U_{θ+δ_j}†`.
pub fn apply_dephasing(dist: &NoiseDistribution, theta: f64, rho: &QubitState) -> QubitState {
    let mut out = Matrix2::zeros();
    for &(delta, w) in dist.atoms() {
        let u = phase_unitary(theta + delta);
        out += u * rho.matrix() * u.adjoint() * Complex64::new(w, 0.0);
    }
    QubitState::from_matrix_unchecked(out)
}

/// `F_θ = Σ_j w_j U_{θ+δ_j}`.
fn averaged_unitary(dist: &NoiseDistribution, theta: f64) -> Matrix2<Complex64> {
    dist.atoms()
        .iter()
        .map(|&(delta, w)| phase_unitary(theta + delta) * Complex64::new(w, 0.0))
        .sum()
}

/// Path-measurement statistics of one superposed round.
///
/// Branches `m = 1..M-1` all leave the polarization in the same state, so a
/// single representative is stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuperposedOutput {
    pub paths: usize,
    pub branch0_weight: f64,
    pub branch0_state: Option<QubitState>,
    pub branch_other_weight_each: f64,
    pub branch_other_state: Option<QubitState>,
}

impl SuperposedOutput {
    pub fn total_weight(&self) -> f64 {
        self.branch0_weight + (self.paths - 1) as f64 * self.branch_other_weight_each
    }
}

fn normalized(block: Matrix2<Complex64>) -> (f64, Option<QubitState>) {
    let weight = block.trace().re;
    if weight < ZERO_WEIGHT {
        (weight.max(0.0), None)
    } else {
        let state = block / Complex64::new(weight, 0.0);
        (weight, Some(QubitState::from_matrix_unchecked(state)))
    }
}

pub fn superposed_output(
    dist: &NoiseDistribution,
    theta: f64,
    paths: usize,
    rho: &QubitState,
) -> Result<SuperposedOutput> {
    if paths == 0 {
        return Err(Error::invalid("path count must be at least 1"));
    }
    let m = paths as f64;
    let c = *apply_dephasing(dist, theta, rho).matrix();
    let f = averaged_unitary(dist, theta);
    let frf = f * rho.matrix() * f.adjoint();
    let scale = Complex64::new(1.0 / m, 0.0);
    let (branch0_weight, branch0_state) =
        normalized((c + frf * Complex64::new(m - 1.0, 0.0)) * scale);
    let (branch_other_weight_each, branch_other_state) = if paths == 1 {
        (0.0, None)
    } else {
        normalized((c - frf) * scale)
    };
    Ok(SuperposedOutput {
        paths,
        branch0_weight,
        branch0_state,
        branch_other_weight_each,
        branch_other_state,
    })
}

/// Parameters of the corrected single-round channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveChannelParams {
    pub lambda: f64,
    pub theta2: f64,
    pub paths: usize,
    pub theta0: f64,
    pub theta1: f64,
}

impl EffectiveChannelParams {
    /// Assembles parameters directly, e.g. to study a given `λ`.
    pub fn from_parts(
        lambda: f64,
        theta2: f64,
        paths: usize,
        theta0: f64,
        theta1: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::invalid(format!("lambda {lambda} outside [0, 1]")));
        }
        if paths == 0 {
            return Err(Error::invalid("path count must be at least 1"));
        }
        Ok(Self {
            lambda,
            theta2,
            paths,
            theta0,
            theta1,
        })
    }

    /// `λ e^{-iθ₂}`.
    pub fn coherence_factor(&self) -> Complex64 {
        Complex64::from_polar(self.lambda, -self.theta2)
    }
}

pub fn effective_channel_params(
    dist: &NoiseDistribution,
    paths: usize,
) -> Result<EffectiveChannelParams> {
    if paths == 0 {
        return Err(Error::invalid("path count must be at least 1"));
    }
    let (ok, residual) = dist.check_condition(CONDITION_TOL);
    if !ok {
        return Err(Error::ConditionViolation { residual });
    }
    let theta0 = dist.offset_theta0()?;
    let theta1 = dist.offset_theta1()?;
    let m = paths as f64;
    let z = Complex64::from_polar(1.0, theta0) * dist.fourier_coefficient(2) / m + (m - 1.0) / m;
    // triangle inequality bounds |z| by 1; clamp rounding
    let lambda = z.norm().min(1.0);
    let theta2 = if lambda == 0.0 {
        0.0
    } else {
        wrap_angle(-z.arg())
    };
    Ok(EffectiveChannelParams {
        lambda,
        theta2,
        paths,
        theta0,
        theta1,
    })
}

/// `ρ_HV ↦ λ e^{-i(θ+θ₂)} ρ_HV`, populations unchanged.
pub fn apply_effective_channel(
    params: &EffectiveChannelParams,
    theta: f64,
    rho: &QubitState,
) -> QubitState {
    rho.scale_coherence(Complex64::from_polar(
        params.lambda,
        -(theta + params.theta2),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn kick(p: f64, d: f64) -> NoiseDistribution {
        NoiseDistribution::phase_kick(p, d).unwrap()
    }

    #[test]
    fn dephasing_examples() {
        let rho = QubitState::from_bloch(0.2, 0.5, -0.3).unwrap();
        assert!(apply_dephasing(&kick(1.0, 1.0), 0.0, &rho).max_abs_diff(&rho) < 1e-15);

        let out = apply_dephasing(&kick(0.5, PI), 0.0, &QubitState::plus());
        assert!(out.max_abs_diff(&QubitState::maximally_mixed()) < 1e-15);

        let out = apply_dephasing(&kick(0.5, FRAC_PI_2), 0.0, &QubitState::plus());
        assert!((out.hv() - Complex64::new(0.25, -0.25)).norm() < 1e-15);
    }

    #[test]
    fn dephasing_is_coherence_times_f2() {
        let d = kick(0.35, 2.2);
        let rho = QubitState::from_bloch(-0.4, 0.1, 0.6).unwrap();
        let theta = 0.9;
        let out = apply_dephasing(&d, theta, &rho);
        let expected = d.fourier_coefficient(2) * Complex64::from_polar(1.0, -theta) * rho.hv();
        assert!((out.hv() - expected).norm() < 1e-15);
        assert!((out.hh() - rho.hh()).abs() < 1e-15);
    }

    #[test]
    fn superposed_branch_weights() {
        let d = kick(0.3, 1.0);
        let rho = QubitState::from_bloch(0.1, 0.2, 0.3).unwrap();
        let single = superposed_output(&d, 0.4, 1, &rho).unwrap();
        assert_eq!(single.branch0_weight, 1.0);
        assert_eq!(single.branch_other_weight_each, 0.0);
        assert!(single.branch_other_state.is_none());
        assert!(
            single
                .branch0_state
                .unwrap()
                .max_abs_diff(&apply_dephasing(&d, 0.4, &rho))
                < 1e-15
        );

        let d = kick(0.5, PI);
        let out = superposed_output(&d, 0.0, 2, &QubitState::plus()).unwrap();
        assert!((out.branch0_weight - 0.75).abs() < 1e-15);
        assert!((out.branch_other_weight_each - 0.25).abs() < 1e-15);
        let out = superposed_output(&d, 0.0, 8, &QubitState::plus()).unwrap();
        assert!((out.branch0_weight - 0.5625).abs() < 1e-15);
        assert!((out.total_weight() - 1.0).abs() < 1e-15);
        assert!(superposed_output(&d, 0.0, 0, &QubitState::plus()).is_err());
    }

    #[test]
    fn noiseless_incoherent_branch_is_sentinel() {
        let out = superposed_output(&kick(1.0, 0.0), 0.3, 4, &QubitState::plus()).unwrap();
        assert!(out.branch_other_state.is_none());
        assert!(out.branch_other_weight_each.abs() < ZERO_WEIGHT);
    }

    #[test]
    fn effective_params_examples() {
        for m in [1, 2, 7] {
            let p = effective_channel_params(&kick(1.0, 2.0), m).unwrap();
            assert_eq!((p.lambda, p.theta2), (1.0, 0.0));
        }
        let p = effective_channel_params(&kick(0.5, PI), 2).unwrap();
        assert!((p.lambda - 0.5).abs() < 1e-15 && p.theta2.abs() < 1e-15);
        let p = effective_channel_params(&kick(0.5, FRAC_PI_2), 2).unwrap();
        assert!((p.lambda - (0.5 + 2f64.sqrt() / 4.0)).abs() < 1e-15);
        assert!((p.lambda - 0.85355).abs() < 1e-5);
        assert!(p.theta2.abs() < 1e-15);
        let g = NoiseDistribution::discretized_gaussian(PI, 0.5, 101).unwrap();
        assert!(matches!(
            effective_channel_params(&g, 4),
            Err(Error::ConditionViolation { .. })
        ));
    }

    #[test]
    fn coherence_factor_identity() {
        let d = kick(0.3, 2.5);
        for m in 1..10 {
            let p = effective_channel_params(&d, m).unwrap();
            let mf = m as f64;
            let z = Complex64::from_polar(1.0, p.theta0) * d.fourier_coefficient(2) / mf
                + (mf - 1.0) / mf;
            assert!((p.coherence_factor() - z).norm() < 1e-12);
        }
    }

    #[test]
    fn effective_channel_examples() {
        let rho = QubitState::from_bloch(0.3, 0.3, 0.3).unwrap();
        let unit = EffectiveChannelParams::from_parts(1.0, 0.0, 1, 0.0, 0.0).unwrap();
        assert!(apply_effective_channel(&unit, 0.8, &rho).max_abs_diff(&rho.rotated(0.8)) < 1e-15);
        let dead = EffectiveChannelParams::from_parts(0.0, 0.0, 1, 0.0, 0.0).unwrap();
        assert_eq!(apply_effective_channel(&dead, 0.8, &rho).hv().norm(), 0.0);

        let p = effective_channel_params(&kick(0.5, PI), 2).unwrap();
        let out = apply_effective_channel(&p, 0.3, &QubitState::plus());
        assert!((out.hv() - Complex64::from_polar(0.25, -0.3)).norm() < 1e-15);
        assert!(EffectiveChannelParams::from_parts(1.2, 0.0, 1, 0.0, 0.0).is_err());
    }

    #[test]
    fn effective_channel_as_two_unitary_mixture() {
        let p = effective_channel_params(&kick(0.4, 2.0), 5).unwrap();
        let rho = QubitState::from_bloch(0.5, -0.2, 0.1).unwrap();
        let theta = 1.1;
        let a = rho.rotated(theta + p.theta2);
        let b = rho.rotated(theta + p.theta2 + PI);
        let mix = a.matrix() * Complex64::new((1.0 + p.lambda) / 2.0, 0.0)
            + b.matrix() * Complex64::new((1.0 - p.lambda) / 2.0, 0.0);
        let out = apply_effective_channel(&p, theta, &rho);
        assert!((out.matrix() - mix).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn effective_channel_rebuilt_from_branches() {
        for (p, delta0) in [(0.5, PI), (0.3, 1.3), (0.8, 4.0)] {
            let d = kick(p, delta0);
            for m in 1..=8 {
                let params = effective_channel_params(&d, m).unwrap();
                let rho = QubitState::from_bloch(0.4, -0.5, 0.2).unwrap();
                let theta = 0.77;
                let out = superposed_output(&d, theta, m, &rho).unwrap();
                let mut rebuilt = Matrix2::zeros();
                if let Some(s) = out.branch0_state {
                    rebuilt += s.rotated(-params.theta0).matrix()
                        * Complex64::new(out.branch0_weight, 0.0);
                }
                if let Some(s) = out.branch_other_state {
                    let w = (m - 1) as f64 * out.branch_other_weight_each;
                    rebuilt += s.rotated(-params.theta1).matrix() * Complex64::new(w, 0.0);
                }
                let direct = apply_effective_channel(&params, theta, &rho);
                let diff = (direct.matrix() - rebuilt)
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                assert!(diff < 1e-10, "p={p} M={m}: {diff}");
            }
        }
    }

    #[test]
    fn lambda_grows_with_paths() {
        let d = kick(0.5, PI);
        let mut last = 0.0;
        for m in 1..200 {
            let l = effective_channel_params(&d, m).unwrap().lambda;
            assert!(l >= last - 1e-15);
            last = l;
        }
        assert!(last > 0.99);
    }

    #[test]
    fn dephasing_commutes_with_phase_shifts() {
        let d = kick(0.6, 3.3);
        let rho = QubitState::from_bloch(-0.3, 0.6, 0.2).unwrap();
        let shifted = apply_dephasing(&d, 1.4, &rho);
        let later = apply_dephasing(&d, 0.0, &rho).rotated(1.4);
        assert!(shifted.max_abs_diff(&later) < 1e-12);
    }
}
