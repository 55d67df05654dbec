use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use pathmetro::channel::ZERO_WEIGHT;
use pathmetro::continuous::{lambda_t, optimal_theta1, qubit_solution};
use pathmetro::estimation::{mle_estimate, Window};
use pathmetro::noise::wrap_angle;
use pathmetro::oracle::oracle_effective_round;
use pathmetro::protocol::{fisher_bound, fisher_exact, outcome_probabilities};
use pathmetro::qubit::phase_unitary;
use pathmetro::{
    apply_dephasing, apply_effective_channel, effective_channel_params, superposed_output, Mode,
    NoiseDistribution, ProtocolSpec, QubitState,
};
use proptest::prelude::*;

const TOL: f64 = 1e-10;

fn state() -> impl Strategy<Value = QubitState> {
    (0.0..=1.0f64, 0.0..PI, 0.0..TAU).prop_map(|(r, polar, az)| {
        QubitState::from_bloch(
            r * polar.sin() * az.cos(),
            r * polar.sin() * az.sin(),
            r * polar.cos(),
        )
        .unwrap()
    })
}

fn kick() -> impl Strategy<Value = NoiseDistribution> {
    (0.0..=1.0f64, 0.0..TAU).prop_map(|(p, d)| NoiseDistribution::phase_kick(p, d).unwrap())
}

fn distribution() -> impl Strategy<Value = NoiseDistribution> {
    prop::collection::vec((0.0..TAU, 0.01..1.0f64), 1..6).prop_filter_map(
        "distinct offsets",
        |raw| {
            let total: f64 = raw.iter().map(|a| a.1).sum();
            NoiseDistribution::new(raw.into_iter().map(|(d, w)| (d, w / total)).collect()).ok()
        },
    )
}

fn assert_physical(s: &QubitState) -> Result<(), TestCaseError> {
    assert_physical_within(s, TOL)
}

fn assert_physical_within(s: &QubitState, tol: f64) -> Result<(), TestCaseError> {
    let trace_err = (s.trace() - Complex64::new(1.0, 0.0)).norm();
    prop_assert!(trace_err < tol, "trace {}", s.trace());
    prop_assert!(s.hermiticity_error() < tol);
    prop_assert!(
        s.min_eigenvalue() > -tol,
        "min eigenvalue {}",
        s.min_eigenvalue()
    );
    Ok(())
}

proptest! {
    #[test]
    fn dephasing_stays_physical(dist in distribution(), theta in -PI..PI, rho in state()) {
        assert_physical(&apply_dephasing(&dist, theta, &rho))?;
    }

    #[test]
    fn effective_channel_stays_physical(dist in kick(), m in 1usize..40, theta in -PI..PI, rho in state()) {
        let params = effective_channel_params(&dist, m).unwrap();
        prop_assert!((0.0..=1.0).contains(&params.lambda));
        let out = apply_effective_channel(&params, theta, &rho);
        assert_physical(&out)?;
        prop_assert!((out.hh() - rho.hh()).abs() < TOL);
    }

    #[test]
    fn superposed_branches_are_physical(dist in distribution(), m in 1usize..10, theta in -PI..PI, rho in state()) {
        let out = superposed_output(&dist, theta, m, &rho).unwrap();
        prop_assert!((out.total_weight() - 1.0).abs() < TOL);
        // normalizing a light branch magnifies rounding by 1/weight
        let branches = [(out.branch0_weight, &out.branch0_state), (out.branch_other_weight_each, &out.branch_other_state)];
        for (w, s) in branches {
            if let Some(s) = s {
                assert_physical_within(s, TOL.max(1e-15 / w))?;
            }
        }
        if out.branch_other_weight_each > ZERO_WEIGHT {
            prop_assert!(out.branch_other_state.is_some());
        }
    }

    #[test]
    fn lambda_grows_with_paths(dist in kick(), m in 1usize..60) {
        let a = effective_channel_params(&dist, m).unwrap().lambda;
        let b = effective_channel_params(&dist, m + 1).unwrap().lambda;
        prop_assert!(a <= 1.0 && b <= 1.0);
        // λ(M) = |1 - c/M| with c = 1 - e^{iθ₀} f(2); it rises once M ≥ |c|²/Re c,
        // which covers every M when |f(1)|² ≥ 1/2.
        let theta0 = dist.offset_theta0().unwrap();
        let c = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, theta0) * dist.fourier_coefficient(2);
        let rising_from = if c.re > 0.0 { c.norm_sqr() / c.re } else { f64::INFINITY };
        if m as f64 >= rising_from - 1e-9 || dist.fourier_coefficient(1).norm_sqr() >= 0.5 {
            prop_assert!(b >= a - 1e-12, "λ({})={} λ({})={}", m, a, m + 1, b);
        }
        prop_assert!(effective_channel_params(&dist, 100_000).unwrap().lambda >= 1.0 - 2.1e-5);
    }

    #[test]
    fn oracle_agrees_with_effective_channel(dist in kick(), m in 1usize..5, theta in -PI..PI, rho in state()) {
        let analytic = apply_effective_channel(&effective_channel_params(&dist, m).unwrap(), theta, &rho);
        let brute = oracle_effective_round(&dist, theta, m, &rho).unwrap();
        prop_assert!(analytic.max_abs_diff(&brute) < TOL);
    }

    #[test]
    fn phase_kicks_satisfy_condition(dist in kick()) {
        let (ok, residual) = dist.check_condition(1e-12);
        prop_assert!(ok, "residual {}", residual);
    }

    #[test]
    fn decomposition_determinant_tracks_condition(dist in distribution()) {
        let f1 = dist.fourier_coefficient(1);
        let f2 = dist.fourier_coefficient(2);
        let det = dist.decomposition_matrix().determinant();
        let expected = ((1.0 - f1.norm_sqr()).powi(2) - (f1 * f1 - f2).norm_sqr()) / 4.0;
        prop_assert!((det - Complex64::new(expected, 0.0)).norm() < 1e-12);
        let (ok, _) = dist.check_condition(1e-9);
        if ok {
            prop_assert!(det.norm() < 1e-8);
        }
    }

    #[test]
    fn theta0_gives_the_averaged_unitary(dist in distribution(), theta in -PI..PI) {
        let avg: nalgebra::Matrix2<Complex64> = dist
            .atoms()
            .iter()
            .map(|&(d, w)| phase_unitary(theta + d) * Complex64::new(w, 0.0))
            .sum();
        let theta0 = dist.offset_theta0().unwrap();
        let rotated = Complex64::from_polar(1.0, theta0 / 2.0) * dist.fourier_coefficient(1);
        prop_assert!(rotated.im.abs() < 1e-12 && rotated.re >= 0.0);
        let target = phase_unitary(theta + theta0) * Complex64::new(dist.fourier_coefficient(1).norm(), 0.0);
        prop_assert!((avg - target).norm() < 1e-12, "diff {}", (avg - target).norm());
    }

    #[test]
    fn channel_commutes_with_phase(dist in kick(), m in 1usize..10, theta in -PI..PI, phi in -PI..PI, rho in state()) {
        let params = effective_channel_params(&dist, m).unwrap();
        let a = apply_effective_channel(&params, theta, &rho.rotated(phi));
        let b = apply_effective_channel(&params, theta, &rho).rotated(phi);
        prop_assert!(a.max_abs_diff(&b) < TOL);
    }

    #[test]
    fn fisher_between_bound_and_heisenberg(
        dist in kick(), n in 1usize..64, m in 1usize..64, theta in -PI..PI, seq in any::<bool>()
    ) {
        let mode = if seq { Mode::Sequential } else { Mode::Parallel };
        let spec = ProtocolSpec::from_noise(&dist, m, n, mode).unwrap();
        let report = fisher_exact(&spec, theta);
        let n2 = (n * n) as f64;
        prop_assert!(report.exact >= fisher_bound(&spec) * (1.0 - 1e-9) - 1e-300);
        prop_assert!(report.exact <= n2 * (1.0 + 1e-9));
        let p = outcome_probabilities(&spec, theta).as_array();
        prop_assert!(p.iter().all(|&x| x >= -1e-15));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mle_stays_in_window(
        counts in prop::array::uniform4(0u32..500), n in 1usize..20, centre in -PI..PI
    ) {
        let dist = NoiseDistribution::phase_kick(0.5, PI).unwrap();
        let spec = ProtocolSpec::from_noise(&dist, n, n, Mode::Parallel).unwrap();
        let window = Window::centred(centre, n);
        let w = counts.map(f64::from);
        let est = mle_estimate(&w, &spec, &window).unwrap();
        prop_assert!(window.contains(est));
    }

    #[test]
    fn lindblad_semigroup(w in -3.0..3.0f64, g in 0.0..3.0f64, s in 0.0..2.0f64, t in 0.0..2.0f64, rho in state()) {
        let once = qubit_solution(w, g, s + t, &rho);
        let twice = qubit_solution(w, g, t, &qubit_solution(w, g, s, &rho));
        prop_assert!(once.max_abs_diff(&twice) < 1e-12);
        assert_physical(&once)?;
    }

    #[test]
    fn optimal_theta1_maximizes_lambda_t(g in 0.01..3.0f64, t in 0.001..1.0f64, m in 1usize..50, probe in -PI..PI) {
        let best = optimal_theta1(g, t, m).theta1;
        let top = lambda_t(g, t, m, best).norm();
        prop_assert!(top <= 1.0 + 1e-12);
        prop_assert!(top >= lambda_t(g, t, m, wrap_angle(probe)).norm() - 1e-12);
    }
}
