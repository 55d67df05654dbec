//! Brute-force reference simulation on the single-photon polarization ⊗ path space.
//!
//! The discrete model enumerates every assignment of phase kicks to the `M`
//! paths. The continuous model applies the per-path `{H, V, vac}` decay
//! factors entrywise: a coherence between the photon on path `j` and on path
//! `k ≠ j` sees path `j` as `(pol, vac)` and path `k` as `(vac, pol')`.
//! Neither route uses the closed forms it is compared against.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channel::{
    apply_effective_channel, effective_channel_params, superposed_output, SuperposedOutput,
    ZERO_WEIGHT,
};
use crate::continuous::{elementwise_factors, lambda_t, optimal_theta1, FieldLevel};
use crate::error::{Error, Result};
use crate::noise::NoiseDistribution;
use crate::protocol::{ghz_coherence, Mode, ProtocolSpec};
use crate::qubit::QubitState;

/// Largest number of noise realizations the discrete oracle will sum.
pub const ENUMERATION_BUDGET: u128 = 10_000_000;

/// Density matrix on `span{|pol⟩ ⊗ |j⟩}`, index `pol · M + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPathState {
    paths: usize,
    matrix: DMatrix<Complex64>,
}

impl MultiPathState {
    pub fn paths(&self) -> usize {
        self.paths
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    fn index(&self, pol: usize, path: usize) -> usize {
        pol * self.paths + path
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Hermitian, unit trace, PSD to `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        let herm = (&self.matrix - self.matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        herm <= tol && (self.trace() - 1.0).norm() <= tol && self.min_eigenvalue() >= -tol
    }

    pub fn max_abs_diff(&self, other: &MultiPathState) -> f64 {
        (&self.matrix - &other.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// `ρ_pol ⊗ |e₀⟩⟨e₀|` with `|e₀⟩ = Σ_j |j⟩ / √M`.
pub fn prepare_superposed(rho_pol: &QubitState, paths: usize) -> Result<MultiPathState> {
    if paths == 0 {
        return Err(Error::invalid("path count must be at least 1"));
    }
    let dim = 2 * paths;
    let scale = 1.0 / paths as f64;
    let m = DMatrix::from_fn(dim, dim, |a, b| {
        rho_pol.matrix()[(a / paths, b / paths)] * scale
    });
    Ok(MultiPathState { paths, matrix: m })
}

/// Averages `V(δ⃗) ρ V(δ⃗)†` over all `K^M` kick assignments.
pub fn oracle_apply_discrete(
    dist: &NoiseDistribution,
    theta: f64,
    state: &MultiPathState,
) -> Result<MultiPathState> {
    let paths = state.paths;
    let k = dist.len() as u128;
    let terms = (0..paths).try_fold(1u128, |acc, _| {
        acc.checked_mul(k).filter(|&t| t <= ENUMERATION_BUDGET)
    });
    let terms = terms.ok_or(Error::ResourceLimit {
        terms: k.checked_pow(paths as u32).unwrap_or(u128::MAX),
        budget: ENUMERATION_BUDGET,
    })?;

    let dim = 2 * paths;
    let atoms = dist.atoms();
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);
    let mut digits = vec![0usize; paths];
    let mut phases = vec![Complex64::new(0.0, 0.0); dim];
    for _ in 0..terms {
        let mut weight = 1.0;
        for (j, &d) in digits.iter().enumerate() {
            let (delta, w) = atoms[d];
            weight *= w;
            // H picks up e^{-i(θ+δ)/2}, V picks up e^{+i(θ+δ)/2}
            phases[j] = Complex64::from_polar(1.0, -(theta + delta) / 2.0);
            phases[paths + j] = Complex64::from_polar(1.0, (theta + delta) / 2.0);
        }
        if weight > 0.0 {
            for b in 0..dim {
                let vb = phases[b].conj() * weight;
                for a in 0..dim {
                    out[(a, b)] += phases[a] * vb * state.matrix[(a, b)];
                }
            }
        }
        for d in digits.iter_mut() {
            *d += 1;
            if *d < atoms.len() {
                break;
            }
            *d = 0;
        }
    }
    Ok(MultiPathState { paths, matrix: out })
}

fn fourier_vector(paths: usize, m: usize) -> Vec<Complex64> {
    let norm = 1.0 / (paths as f64).sqrt();
    (0..paths)
        .map(|j| Complex64::from_polar(norm, TAU * (j * m) as f64 / paths as f64))
        .collect()
}

/// Unnormalized polarization block `⟨e_m| ρ |e_m⟩`.
fn fourier_block(state: &MultiPathState, m: usize) -> Matrix2<Complex64> {
    let e = fourier_vector(state.paths, m);
    let mut block = Matrix2::zeros();
    for p in 0..2 {
        for q in 0..2 {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, ej) in e.iter().enumerate() {
                for (k, ek) in e.iter().enumerate() {
                    acc += ej.conj() * state.matrix[(state.index(p, j), state.index(q, k))] * ek;
                }
            }
            block[(p, q)] = acc;
        }
    }
    block
}

/// Probability of Fourier outcome `m` and the conditional polarization state.
pub fn fourier_branch(state: &MultiPathState, m: usize) -> Result<(f64, Option<QubitState>)> {
    if m >= state.paths {
        return Err(Error::invalid(format!(
            "Fourier outcome {m} out of range for {} paths",
            state.paths
        )));
    }
    let block = fourier_block(state, m);
    let prob = block.trace().re;
    if prob < ZERO_WEIGHT {
        return Ok((prob.max(0.0), None));
    }
    Ok((
        prob,
        Some(QubitState::from_matrix_unchecked(
            block / Complex64::new(prob, 0.0),
        )),
    ))
}

/// Mixes the Fourier branches after correcting outcome 0 by `correction0` and the rest by `correction_other`.
fn corrected_mixture(
    state: &MultiPathState,
    correction0: f64,
    correction_other: f64,
) -> QubitState {
    let mut out = Matrix2::zeros();
    for m in 0..state.paths {
        let block = QubitState::from_matrix_unchecked(fourier_block(state, m));
        let shift = if m == 0 {
            correction0
        } else {
            correction_other
        };
        out += block.rotated(shift).matrix();
    }
    QubitState::from_matrix_unchecked(out)
}

/// One full discrete round: prepare, kick every path, measure paths, correct, forget the outcome.
pub fn oracle_effective_round(
    dist: &NoiseDistribution,
    theta: f64,
    paths: usize,
    rho: &QubitState,
) -> Result<QubitState> {
    let theta0 = dist.offset_theta0()?;
    let theta1 = dist.offset_theta1()?;
    let state = oracle_apply_discrete(dist, theta, &prepare_superposed(rho, paths)?)?;
    Ok(corrected_mixture(&state, -theta0, -theta1))
}

pub fn oracle_apply_continuous(
    omega: f64,
    gamma: f64,
    t: f64,
    state: &MultiPathState,
) -> MultiPathState {
    let f = elementwise_factors(omega, gamma, t);
    let level = |pol: usize| {
        if pol == 0 {
            FieldLevel::H
        } else {
            FieldLevel::V
        }
    };
    let paths = state.paths;
    let dim = 2 * paths;
    let m = DMatrix::from_fn(dim, dim, |a, b| {
        let (p, j) = (a / paths, a % paths);
        let (q, k) = (b / paths, b % paths);
        let factor = if j == k {
            f.get(level(p), level(q))
        } else {
            f.get(level(p), FieldLevel::Vacuum) * f.get(FieldLevel::Vacuum, level(q))
        };
        state.matrix[(a, b)] * factor
    });
    MultiPathState { paths, matrix: m }
}

/// One controlled step of the continuous protocol: no correction on outcome 0, `-θ₁` otherwise.
pub fn oracle_continuous_round(
    omega: f64,
    gamma: f64,
    t: f64,
    paths: usize,
    theta1: f64,
    rho: &QubitState,
) -> Result<QubitState> {
    let state = oracle_apply_continuous(omega, gamma, t, &prepare_superposed(rho, paths)?);
    Ok(corrected_mixture(&state, 0.0, -theta1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleComparison {
    pub max_abs_entry_diff: f64,
    pub branch_weight_diff: f64,
    pub passed: bool,
}

pub fn compare(analytic: &QubitState, oracle: &QubitState, tol: f64) -> OracleComparison {
    let diff = analytic.max_abs_diff(oracle);
    OracleComparison {
        max_abs_entry_diff: diff,
        branch_weight_diff: 0.0,
        passed: diff <= tol,
    }
}

/// Rebuilds `Σ_m block_m ⊗ |e_m⟩⟨e_m|` from the closed-form branches.
pub fn superposed_to_multipath(out: &SuperposedOutput) -> MultiPathState {
    let paths = out.paths;
    let mut matrix = DMatrix::<Complex64>::zeros(2 * paths, 2 * paths);
    for m in 0..paths {
        let (w, state) = if m == 0 {
            (out.branch0_weight, out.branch0_state)
        } else {
            (out.branch_other_weight_each, out.branch_other_state)
        };
        let Some(state) = state else { continue };
        let e = fourier_vector(paths, m);
        for a in 0..2 * paths {
            for b in 0..2 * paths {
                matrix[(a, b)] +=
                    state.matrix()[(a / paths, b / paths)] * w * e[a % paths] * e[b % paths].conj();
            }
        }
    }
    MultiPathState { paths, matrix }
}

/// Compares a closed-form superposed output against the enumerated state.
pub fn compare_superposed(
    analytic: &SuperposedOutput,
    oracle: &MultiPathState,
    tol: f64,
) -> Result<OracleComparison> {
    let entry = superposed_to_multipath(analytic).max_abs_diff(oracle);
    let mut weight = 0.0f64;
    for m in 0..oracle.paths {
        let (p, _) = fourier_branch(oracle, m)?;
        let expected = if m == 0 {
            analytic.branch0_weight
        } else {
            analytic.branch_other_weight_each
        };
        weight = weight.max((p - expected).abs());
    }
    Ok(OracleComparison {
        max_abs_entry_diff: entry,
        branch_weight_diff: weight,
        passed: entry <= tol && weight <= tol,
    })
}

/// Uniform random state in the Bloch ball.
pub fn random_state(rng: &mut impl Rng) -> QubitState {
    loop {
        let (x, y, z): (f64, f64, f64) = (
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if x * x + y * y + z * z <= 1.0 {
            return QubitState::from_bloch(x, y, z).expect("inside the Bloch ball");
        }
    }
}

/// Worst-case discrepancies for one path count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuiteRow {
    pub paths: usize,
    pub samples: usize,
    pub superposed_entry_diff: f64,
    pub branch_weight_diff: f64,
    pub effective_diff: f64,
    /// Max over `N ≤ steps` of `|oracle coherence - λ^N e^{-iN(θ+θ₂)}/2|`.
    pub sequential_diff: f64,
    /// Same comparison against the `λ^{2N}` alternative.
    pub sequential_diff_lambda_2n: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteSettings {
    pub max_paths: usize,
    pub samples: usize,
    pub max_steps: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for SuiteSettings {
    fn default() -> Self {
        Self {
            max_paths: 8,
            samples: 20,
            max_steps: 6,
            seed: 7,
            tol: 1e-10,
        }
    }
}

/// Checks every closed form against the oracle for `M = 1..=max_paths`.
pub fn discrete_suite(dist: &NoiseDistribution, settings: &SuiteSettings) -> Result<Vec<SuiteRow>> {
    let mut rows = Vec::with_capacity(settings.max_paths);
    for paths in 1..=settings.max_paths {
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed.wrapping_add(paths as u64));
        let params = effective_channel_params(dist, paths)?;
        let mut row = SuiteRow {
            paths,
            samples: settings.samples,
            superposed_entry_diff: 0.0,
            branch_weight_diff: 0.0,
            effective_diff: 0.0,
            sequential_diff: 0.0,
            sequential_diff_lambda_2n: 0.0,
            passed: false,
        };
        for _ in 0..settings.samples {
            let theta = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            let rho = random_state(&mut rng);
            let analytic = superposed_output(dist, theta, paths, &rho)?;
            let oracle = oracle_apply_discrete(dist, theta, &prepare_superposed(&rho, paths)?)?;
            let cmp = compare_superposed(&analytic, &oracle, settings.tol)?;
            row.superposed_entry_diff = row.superposed_entry_diff.max(cmp.max_abs_entry_diff);
            row.branch_weight_diff = row.branch_weight_diff.max(cmp.branch_weight_diff);
            let eff = compare(
                &apply_effective_channel(&params, theta, &rho),
                &oracle_effective_round(dist, theta, paths, &rho)?,
                settings.tol,
            );
            row.effective_diff = row.effective_diff.max(eff.max_abs_entry_diff);
        }
        let theta = rng.random_range(-1.0..1.0);
        let mut state = QubitState::plus();
        for steps in 1..=settings.max_steps {
            state = oracle_effective_round(dist, theta, paths, &state)?;
            let spec = ProtocolSpec::new(params, steps, Mode::Sequential)?;
            let closed = ghz_coherence(&spec, theta) / 2.0;
            let alt = Complex64::from_polar(
                params.lambda.powi(2 * steps as i32),
                -spec.fringe_phase(theta),
            ) / 2.0;
            row.sequential_diff = row.sequential_diff.max((state.hv() - closed).norm());
            row.sequential_diff_lambda_2n =
                row.sequential_diff_lambda_2n.max((state.hv() - alt).norm());
        }
        row.passed = row.superposed_entry_diff <= settings.tol
            && row.branch_weight_diff <= settings.tol
            && row.effective_diff <= settings.tol
            && row.sequential_diff <= settings.tol;
        rows.push(row);
    }
    Ok(rows)
}

/// One path count of the continuous-model check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuousSuiteRow {
    pub paths: usize,
    pub steps: usize,
    /// Max entry difference of a single round against `λ_t e^{-iωt}` scaling.
    pub step_diff: f64,
    /// Max over `N ≤ steps` of `|oracle coherence - (λ_t e^{-iωt})^N / 2|`.
    pub composed_diff: f64,
    pub passed: bool,
}

/// Runs `N ≤ max_steps` oracle rounds from `|+⟩` for each `M ≤ max_paths`,
/// with the optimal `θ₁` for that `M`, and compares to the closed form.
pub fn continuous_suite(
    omega: f64,
    gamma: f64,
    t: f64,
    max_paths: usize,
    max_steps: usize,
    tol: f64,
) -> Result<Vec<ContinuousSuiteRow>> {
    let mut rows = Vec::with_capacity(max_paths);
    for paths in 1..=max_paths {
        let theta1 = optimal_theta1(gamma, t, paths).theta1;
        let per_step = lambda_t(gamma, t, paths, theta1) * Complex64::from_polar(1.0, -omega * t);
        let mut step_diff: f64 = 0.0;
        let mut composed_diff: f64 = 0.0;
        let mut state = QubitState::plus();
        for steps in 1..=max_steps {
            let next = oracle_continuous_round(omega, gamma, t, paths, theta1, &state)?;
            let expected = state.scale_coherence(per_step);
            step_diff = step_diff.max(next.max_abs_diff(&expected));
            state = next;
            let closed = per_step.powu(steps as u32) / 2.0;
            composed_diff = composed_diff.max((state.hv() - closed).norm());
        }
        rows.push(ContinuousSuiteRow {
            paths,
            steps: max_steps,
            step_diff,
            composed_diff,
            passed: step_diff <= tol && composed_diff <= tol,
        });
    }
    Ok(rows)
}
