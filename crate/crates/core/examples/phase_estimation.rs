// Seeded Monte Carlo phase estimation with the maximum-likelihood estimator.
//
// ```bash
// cargo run --release --example phase_estimation
// ```

use std::f64::consts::PI;

use pathmetro::estimation::{rmse_trials, sample_outcomes, ExperimentConfig, Window};
use pathmetro::{Mode, NoiseDistribution, ProtocolSpec};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dist = NoiseDistribution::phase_kick(0.5, PI)?;
    let (nu, trials, seed) = (2_000, 60, 11);

    let spec = ProtocolSpec::from_noise(&dist, 8, 8, Mode::Parallel)?;
    let theta = spec.sin_term_zero_theta();
    let counts = sample_outcomes(&spec, theta, nu, seed);
    println!("one draw at N=8: {counts:?}");

    println!(
        "{:>4} {:>12} {:>12} {:>8}",
        "N", "rmse", "cramer-rao", "ratio"
    );
    for n in [4, 8, 16] {
        let spec = ProtocolSpec::from_noise(&dist, n, n, Mode::Parallel)?;
        let theta = spec.sin_term_zero_theta();
        let cfg = ExperimentConfig::new(spec, theta, nu, seed, Window::centred(theta, n))?;
        let res = rmse_trials(&cfg, trials)?;
        println!(
            "{n:>4} {:>12.4e} {:>12.4e} {:>8.3}",
            res.rmse,
            res.cramer_rao,
            res.efficiency_ratio()
        );
        assert!(res.efficiency_ratio() < 2.0);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
