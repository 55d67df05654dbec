//! Simulated measurement records and maximum-likelihood phase estimation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::protocol::{fisher_exact, outcome_probabilities, ProtocolSpec};

/// Coarse grid size for the likelihood search.
pub const MLE_GRID_POINTS: usize = 512;
/// Golden-section stopping width, relative to the window.
pub const MLE_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub low: f64,
    pub high: f64,
}

impl Window {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !(high > low) || !low.is_finite() || !high.is_finite() {
            return Err(Error::invalid(format!(
                "empty estimation window [{low}, {high})"
            )));
        }
        Ok(Self { low, high })
    }

    /// `[centre - π/(2N), centre + π/(2N))`.
    pub fn centred(centre: f64, probes: usize) -> Self {
        let half = TAU / (4.0 * probes as f64);
        Self {
            low: centre - half,
            high: centre + half,
        }
    }

    pub fn width(&self) -> f64 {
        self.high - self.low
    }

    pub fn contains(&self, theta: f64) -> bool {
        theta >= self.low && theta <= self.high
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub spec: ProtocolSpec,
    pub theta_true: f64,
    pub nu: u64,
    pub seed: u64,
    pub window: Window,
}

impl ExperimentConfig {
    pub fn new(
        spec: ProtocolSpec,
        theta_true: f64,
        nu: u64,
        seed: u64,
        window: Window,
    ) -> Result<Self> {
        if nu == 0 {
            return Err(Error::invalid("repetition count must be at least 1"));
        }
        if window.width() > TAU / spec.probes as f64 + 1e-12 {
            return Err(Error::invalid(format!(
                "window width {} exceeds 2π/N = {}; the phase is not identifiable",
                window.width(),
                TAU / spec.probes as f64
            )));
        }
        if !window.contains(theta_true) {
            return Err(Error::invalid(format!(
                "true phase {theta_true} outside the window"
            )));
        }
        Ok(Self {
            spec,
            theta_true,
            nu,
            seed,
            window,
        })
    }
}

/// Outcome tallies in the order `P+, P-, Q+, Q-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct OutcomeCounts {
    pub p_plus: u64,
    pub p_minus: u64,
    pub q_plus: u64,
    pub q_minus: u64,
}

impl OutcomeCounts {
    pub fn total(&self) -> u64 {
        self.p_plus + self.p_minus + self.q_plus + self.q_minus
    }

    pub fn as_weights(&self) -> [f64; 4] {
        [self.p_plus, self.p_minus, self.q_plus, self.q_minus].map(|c| c as f64)
    }
}

/// Draws `nu` outcomes at `theta_true` from a ChaCha8 stream seeded with `seed`.
pub fn sample_outcomes(spec: &ProtocolSpec, theta_true: f64, nu: u64, seed: u64) -> OutcomeCounts {
    sample_categorical(
        &outcome_probabilities(spec, theta_true).as_array(),
        nu,
        seed,
    )
}

/// Draws `nu` categorical samples from `probs` (ordered `P+, P-, Q+, Q-`).
pub fn sample_categorical(probs: &[f64; 4], nu: u64, seed: u64) -> OutcomeCounts {
    let cdf = [
        probs[0],
        probs[0] + probs[1],
        probs[0] + probs[1] + probs[2],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = [0u64; 4];
    for _ in 0..nu {
        let u: f64 = rng.random();
        let k = cdf.iter().position(|&c| u < c).unwrap_or(3);
        counts[k] += 1;
    }
    OutcomeCounts {
        p_plus: counts[0],
        p_minus: counts[1],
        q_plus: counts[2],
        q_minus: counts[3],
    }
}

/// `Σ_x n_x ln p(x|θ)`; `-∞` when an observed outcome has zero probability.
///
/// `counts` may be real-valued (expected counts).
pub fn log_likelihood(counts: &[f64; 4], spec: &ProtocolSpec, theta: f64) -> f64 {
    let probs = outcome_probabilities(spec, theta).as_array();
    let mut total = 0.0;
    for (&n, &p) in counts.iter().zip(&probs) {
        if n == 0.0 {
            continue;
        }
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        total += n * p.ln();
    }
    total
}

/// Maximizes the log-likelihood over `window` by a coarse grid followed by golden-section search.
pub fn mle_estimate(counts: &[f64; 4], spec: &ProtocolSpec, window: &Window) -> Result<f64> {
    if !(window.high > window.low) {
        return Err(Error::invalid("empty estimation window"));
    }
    let ll = |theta: f64| log_likelihood(counts, spec, theta);
    let step = window.width() / MLE_GRID_POINTS as f64;
    let mut best = 0;
    let mut best_value = ll(window.low);
    for i in 1..=MLE_GRID_POINTS {
        let v = ll(window.low + step * i as f64);
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    let lo = window.low + step * best.saturating_sub(1) as f64;
    let hi = (window.low + step * (best + 1) as f64).min(window.high);
    let refined = golden_section_max(&ll, lo, hi, MLE_REL_TOL * window.width());
    // the grid point wins ties and guards against a flat or -∞ bracket
    let grid_theta = window.low + step * best as f64;
    let theta = if ll(refined) > best_value {
        refined
    } else {
        grid_theta
    };
    Ok(theta.clamp(window.low, window.high))
}

fn golden_section_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub theta_hat: f64,
    pub log_likelihood: f64,
    pub counts: OutcomeCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimationResult {
    /// Mean estimate over trials.
    pub theta_hat: f64,
    /// Mean of the per-trial maximized log-likelihoods.
    pub log_likelihood_at_hat: f64,
    pub rmse: f64,
    /// `1 / sqrt(ν F(θ_true))`.
    pub cramer_rao: f64,
    pub trials: usize,
    pub records: Vec<TrialRecord>,
}

impl EstimationResult {
    pub fn efficiency_ratio(&self) -> f64 {
        self.rmse / self.cramer_rao
    }
}

/// Runs `trials` independent sample-and-estimate cycles; trial `i` uses seed `seed + i`.
pub fn rmse_trials(config: &ExperimentConfig, trials: usize) -> Result<EstimationResult> {
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let records = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let seed = config.seed.wrapping_add(i);
            let counts = sample_outcomes(&config.spec, config.theta_true, config.nu, seed);
            let w = counts.as_weights();
            let theta_hat = mle_estimate(&w, &config.spec, &config.window)?;
            Ok(TrialRecord {
                seed,
                theta_hat,
                log_likelihood: log_likelihood(&w, &config.spec, theta_hat),
                counts,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = trials as f64;
    let mse = records
        .iter()
        .map(|r| (r.theta_hat - config.theta_true).powi(2))
        .sum::<f64>()
        / n;
    let fisher = fisher_exact(&config.spec, config.theta_true).exact;
    Ok(EstimationResult {
        theta_hat: records.iter().map(|r| r.theta_hat).sum::<f64>() / n,
        log_likelihood_at_hat: records.iter().map(|r| r.log_likelihood).sum::<f64>() / n,
        rmse: mse.sqrt(),
        cramer_rao: 1.0 / (config.nu as f64 * fisher).sqrt(),
        trials,
        records,
    })
}
