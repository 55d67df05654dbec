//! Closed-form statistics of the GHZ (parallel) and repeated-round
//! (sequential) estimation protocols.
//!
//! Both protocols only ever populate a two-dimensional coherence subspace,
//! so nothing here grows with the probe count: the output is described by
//! the single coefficient `λ^N e^{-iN(θ+θ₂)}`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{effective_channel_params, EffectiveChannelParams};
use crate::error::{Error, Result};
use crate::noise::NoiseDistribution;

/// `λ` at or above this is treated as noiseless in the Fisher formula.
pub const NOISELESS_LAMBDA: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `N` entangled probes, one round each.
    Parallel,
    /// One probe, `N` rounds.
    Sequential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub params: EffectiveChannelParams,
    pub probes: usize,
    pub mode: Mode,
}

impl ProtocolSpec {
    pub fn new(params: EffectiveChannelParams, probes: usize, mode: Mode) -> Result<Self> {
        if probes == 0 {
            return Err(Error::invalid("probe/step count must be at least 1"));
        }
        Ok(Self {
            params,
            probes,
            mode,
        })
    }

    /// Builds the spec for noise `dist` with `paths` paths per probe.
    pub fn from_noise(
        dist: &NoiseDistribution,
        paths: usize,
        probes: usize,
        mode: Mode,
    ) -> Result<Self> {
        Self::new(effective_channel_params(dist, paths)?, probes, mode)
    }

    /// `λ^N`, the visibility of the final fringe.
    pub fn visibility(&self) -> f64 {
        self.params.lambda.powi(self.probes as i32)
    }

    /// The phase `N(θ + θ₂)` read out by the final measurement.
    pub fn fringe_phase(&self, theta: f64) -> f64 {
        self.probes as f64 * (theta + self.params.theta2)
    }

    /// A phase where `sin(2N(θ+θ₂)) = 0`, so the exact Fisher information equals the bound.
    pub fn sin_term_zero_theta(&self) -> f64 {
        -self.params.theta2
    }
}

/// Probabilities of the four outcomes `P±`, `Q±`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutcomeDistribution {
    pub p_plus: f64,
    pub p_minus: f64,
    pub q_plus: f64,
    pub q_minus: f64,
}

impl OutcomeDistribution {
    /// In the order `P+, P-, Q+, Q-`.
    pub fn as_array(&self) -> [f64; 4] {
        [self.p_plus, self.p_minus, self.q_plus, self.q_minus]
    }

    pub fn expected_counts(&self, nu: f64) -> [f64; 4] {
        self.as_array().map(|p| p * nu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FisherReport {
    pub theta: f64,
    pub exact: f64,
    pub bound: f64,
}

/// Off-diagonal coefficient of the protocol output. Identical in both modes.
pub fn ghz_coherence(spec: &ProtocolSpec, theta: f64) -> Complex64 {
    Complex64::from_polar(spec.visibility(), -spec.fringe_phase(theta))
}

pub fn outcome_probabilities(spec: &ProtocolSpec, theta: f64) -> OutcomeDistribution {
    let v = spec.visibility();
    let (s, c) = spec.fringe_phase(theta).sin_cos();
    OutcomeDistribution {
        p_plus: (1.0 + v * c) / 4.0,
        p_minus: (1.0 - v * c) / 4.0,
        q_plus: (1.0 + v * s) / 4.0,
        q_minus: (1.0 - v * s) / 4.0,
    }
}

/// `N² λ^{2N} / 2`, the phase-independent lower bound.
pub fn fisher_bound(spec: &ProtocolSpec) -> f64 {
    let n = spec.probes as f64;
    n * n * spec.visibility().powi(2) / 2.0
}

/// Classical Fisher information of the four-outcome measurement.
pub fn fisher_exact(spec: &ProtocolSpec, theta: f64) -> FisherReport {
    let n = spec.probes as f64;
    let bound = fisher_bound(spec);
    let exact = if spec.params.lambda >= NOISELESS_LAMBDA {
        n * n
    } else {
        let a2 = spec.visibility().powi(2);
        let s2 = (2.0 * spec.fringe_phase(theta)).sin().powi(2);
        let extra = (a2 * s2 / 2.0) * (1.0 - a2 / 2.0) / (1.0 - a2 + a2 * a2 * s2 / 4.0);
        n * n * a2 / 2.0 * (1.0 + extra)
    };
    FisherReport {
        theta,
        exact,
        bound,
    }
}

/// How the path count follows the probe count in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathRule {
    Fixed(usize),
    /// `M = max(1, round(coefficient · N))`.
    Proportional(f64),
}

impl PathRule {
    pub fn paths_for(&self, probes: usize) -> usize {
        match *self {
            PathRule::Fixed(m) => m,
            PathRule::Proportional(c) => ((c * probes as f64).round() as usize).max(1),
        }
    }
}

impl Default for PathRule {
    fn default() -> Self {
        PathRule::Proportional(1.0)
    }
}

/// One line of a Fisher sweep, `N, M, theta, lambda, fisher_exact, fisher_bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FisherRow {
    pub n: usize,
    pub m: usize,
    pub theta: f64,
    pub lambda: f64,
    pub fisher_exact: f64,
    pub fisher_bound: f64,
}

/// Evaluates every `(N, θ)` pair; rows come back in input order.
pub fn fisher_sweep(
    dist: &NoiseDistribution,
    probes: &[usize],
    rule: PathRule,
    thetas: &[f64],
    mode: Mode,
) -> Result<Vec<FisherRow>> {
    let specs = probes
        .iter()
        .map(|&n| ProtocolSpec::from_noise(dist, rule.paths_for(n), n, mode))
        .collect::<Result<Vec<_>>>()?;
    Ok(specs
        .par_iter()
        .flat_map_iter(|spec| {
            thetas.iter().map(move |&theta| {
                let report = fisher_exact(spec, theta);
                FisherRow {
                    n: spec.probes,
                    m: spec.params.paths,
                    theta,
                    lambda: spec.params.lambda,
                    fisher_exact: report.exact,
                    fisher_bound: report.bound,
                }
            })
        })
        .collect())
}
