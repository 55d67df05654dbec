//! Frequency estimation under continuous Markovian dephasing with fast path
//! control.
//!
//! Free evolution for an interval `t` under the Lindblad generator
//! `-i(ω/2)[Z, ρ] + (γ/2)(ZρZ - ρ)` is interleaved with Fourier measurements
//! on `M` paths and a `-θ₁` correction on the incoherent outcomes. Each step
//! multiplies the coherence by `λ_t e^{-iωt}`; after `N = round(T/t)` steps
//! the fringe visibility is `|λ_t|^N`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qubit::QubitState;

/// Polarization-or-vacuum index of one path mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldLevel {
    H = 0,
    V = 1,
    Vacuum = 2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuousModel {
    pub omega: f64,
    pub gamma: f64,
    /// Control interval `t`.
    pub interval: f64,
    /// Total probing time `T`.
    pub total_time: f64,
    pub paths: usize,
    pub theta1: f64,
}

impl ContinuousModel {
    pub fn new(
        omega: f64,
        gamma: f64,
        interval: f64,
        total_time: f64,
        paths: usize,
        theta1: f64,
    ) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::invalid(format!(
                "dephasing rate {gamma} must be nonnegative"
            )));
        }
        if !(interval > 0.0) || !(interval <= total_time) || !total_time.is_finite() {
            return Err(Error::invalid(format!(
                "need 0 < t <= T, got t = {interval}, T = {total_time}"
            )));
        }
        if paths == 0 {
            return Err(Error::invalid("path count must be at least 1"));
        }
        Ok(Self {
            omega,
            gamma,
            interval,
            total_time,
            paths,
            theta1,
        })
    }

    /// `N = round(T / t)`.
    pub fn steps(&self) -> usize {
        (self.total_time / self.interval).round() as usize
    }

    pub fn lambda_t(&self) -> Complex64 {
        lambda_t(self.gamma, self.interval, self.paths, self.theta1)
    }

    /// Same model with `θ₁` replaced by the maximizer of `|λ_t|`.
    pub fn with_optimal_theta1(&self) -> Self {
        Self {
            theta1: optimal_theta1(self.gamma, self.interval, self.paths).theta1,
            ..*self
        }
    }

    /// `|λ_t|^N`.
    pub fn visibility(&self) -> f64 {
        self.lambda_t().norm().powi(self.steps() as i32)
    }

    /// `T² |λ_t|^{2N} / 2`, the phase-independent part of `F_ω`.
    pub fn envelope(&self) -> f64 {
        self.total_time.powi(2) * self.visibility().powi(2) / 2.0
    }
}

/// `(1 + e^{-γt})/2 · U_{ωt}ρU† + (1 - e^{-γt})/2 · U_{ωt+π}ρU†`.
pub fn qubit_solution(omega: f64, gamma: f64, t: f64, rho: &QubitState) -> QubitState {
    debug_assert!(t >= 0.0);
    let keep = (1.0 + (-gamma * t).exp()) / 2.0;
    let a = rho.rotated(omega * t);
    let b = rho.rotated(omega * t + std::f64::consts::PI);
    let m = a.matrix() * Complex64::new(keep, 0.0) + b.matrix() * Complex64::new(1.0 - keep, 0.0);
    QubitState::from_matrix_unchecked(m)
}

/// Entrywise decay factors on the `{H, V, vac}` sector of one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementwiseFactors {
    pub factors: [[Complex64; 3]; 3],
}

impl ElementwiseFactors {
    pub fn get(&self, row: FieldLevel, col: FieldLevel) -> Complex64 {
        self.factors[row as usize][col as usize]
    }
}

pub fn elementwise_factors(omega: f64, gamma: f64, t: f64) -> ElementwiseFactors {
    let one = Complex64::new(1.0, 0.0);
    let hv = Complex64::new(-gamma * t, -omega * t).exp();
    let hvac = Complex64::new(-gamma * t / 2.0, -gamma * t / 2.0 - omega * t / 2.0).exp();
    let vvac = Complex64::new(-gamma * t / 2.0, gamma * t / 2.0 + omega * t / 2.0).exp();
    ElementwiseFactors {
        factors: [
            [one, hv, hvac],
            [hv.conj(), one, vvac],
            [hvac.conj(), vvac.conj(), one],
        ],
    }
}

/// Coherence factor of one controlled step, without the `e^{-iωt}` rotation.
pub fn lambda_t(gamma: f64, t: f64, paths: usize, theta1: f64) -> Complex64 {
    let (coherent, incoherent) = lambda_t_parts(gamma, t, paths);
    coherent + Complex64::from_polar(1.0, theta1) * incoherent
}

/// `λ_t = A + e^{iθ₁} B`; returns `(A, B)`.
fn lambda_t_parts(gamma: f64, t: f64, paths: usize) -> (Complex64, Complex64) {
    let m = paths as f64;
    let damp = Complex64::new((-gamma * t).exp(), 0.0);
    let twisted = Complex64::new(-gamma * t, -gamma * t).exp();
    let a = damp / m + twisted * ((m - 1.0) / m);
    let b = (damp - twisted) * ((m - 1.0) / m);
    (a, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalTheta1 {
    pub theta1: f64,
    /// Set when no correction branch exists (`M = 1`) or it carries no weight (`t = 0`).
    pub degenerate: bool,
}

pub fn optimal_theta1(gamma: f64, t: f64, paths: usize) -> OptimalTheta1 {
    let (a, b) = lambda_t_parts(gamma, t, paths);
    if paths < 2 || b.norm() == 0.0 || a.norm() == 0.0 {
        return OptimalTheta1 {
            theta1: 0.0,
            degenerate: true,
        };
    }
    OptimalTheta1 {
        theta1: (a / b).arg(),
        degenerate: false,
    }
}

/// Fisher information about `ω` after `N = round(T/t)` controlled steps.
///
/// The fringe phase is `ωT - N arg λ_t`, the phase of the final coherence
/// `λ_t^N e^{-iωT}`.
pub fn fisher_omega(model: &ContinuousModel, use_optimal_theta1: bool) -> f64 {
    let model = if use_optimal_theta1 {
        model.with_optimal_theta1()
    } else {
        *model
    };
    let lambda = model.lambda_t();
    let n = model.steps();
    let t_sq = model.total_time.powi(2);
    let a2 = lambda.norm().powi(2 * n as i32);
    if a2 >= 1.0 - 1e-12 {
        return t_sq;
    }
    let phase = model.omega * model.total_time - n as f64 * lambda.arg();
    let s2 = (2.0 * phase).sin().powi(2);
    let extra = (a2 * s2 / 2.0) * (1.0 - a2 / 2.0) / (1.0 - a2 + a2 * a2 * s2 / 4.0);
    t_sq * a2 / 2.0 * (1.0 + extra)
}

/// One row of the fast-control sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub t: f64,
    pub total_time: f64,
    pub m: usize,
    pub abs_lambda_t: f64,
    pub theta_t: f64,
    pub fisher_omega: f64,
    pub envelope: f64,
    pub bound_half_t_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedRow {
    pub t: f64,
    pub total_time: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    pub skipped: Vec<SkippedRow>,
}

/// Evaluates `F_ω` on the `(t, T)` grid with `M = round(T/t)` and optimal `θ₁`.
///
/// Rows are ordered by `t` then `T`, as given.
pub fn figure3_sweep(gamma: f64, omega: f64, t_values: &[f64], total_times: &[f64]) -> Sweep {
    let cells: Vec<(f64, f64)> = t_values
        .iter()
        .flat_map(|&t| total_times.iter().map(move |&big_t| (t, big_t)))
        .collect();
    let results: Vec<std::result::Result<SweepRow, SkippedRow>> = cells
        .par_iter()
        .map(|&(t, big_t)| sweep_cell(gamma, omega, t, big_t))
        .collect();
    let mut sweep = Sweep::default();
    for r in results {
        match r {
            Ok(row) => sweep.rows.push(row),
            Err(skip) => sweep.skipped.push(skip),
        }
    }
    sweep
}

fn sweep_cell(
    gamma: f64,
    omega: f64,
    t: f64,
    big_t: f64,
) -> std::result::Result<SweepRow, SkippedRow> {
    let skip = |reason: String| SkippedRow {
        t,
        total_time: big_t,
        reason,
    };
    if !(t > 0.0) || big_t / t < 1.0 {
        return Err(skip(format!("T/t = {} < 1", big_t / t)));
    }
    let paths = (big_t / t).round() as usize;
    let model = ContinuousModel::new(omega, gamma, t, big_t, paths, 0.0)
        .map_err(|e| skip(e.to_string()))?
        .with_optimal_theta1();
    let lambda = model.lambda_t();
    Ok(SweepRow {
        t,
        total_time: big_t,
        m: paths,
        abs_lambda_t: lambda.norm(),
        theta_t: lambda.arg(),
        fisher_omega: fisher_omega(&model, false),
        envelope: model.envelope(),
        bound_half_t_sq: big_t * big_t / 2.0,
    })
}
