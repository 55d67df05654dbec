// One probe sent through M noisy paths at once, then measured in the Fourier basis.
//
// Prints the branch weights and the coherence left in the effective channel
// as the number of paths grows.
//
// ```bash
// cargo run --example superposed_channel
// ```

use std::f64::consts::PI;

use pathmetro::{
    apply_dephasing, apply_effective_channel, effective_channel_params, superposed_output,
    NoiseDistribution, QubitState,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dist = NoiseDistribution::phase_kick(0.5, PI)?;
    let theta = 0.3;
    let rho = QubitState::plus();

    let plain = apply_dephasing(&dist, theta, &rho);
    println!("single path: |rho_HV| = {:.6}", plain.hv().norm());

    let out = superposed_output(&dist, theta, 4, &rho)?;
    println!(
        "M=4 branches: m=0 weight {:.4}, each m!=0 weight {:.4}, total {:.12}",
        out.branch0_weight,
        out.branch_other_weight_each,
        out.total_weight()
    );

    println!(
        "{:>4} {:>10} {:>10} {:>14}",
        "M", "lambda", "theta2", "|rho_HV| out"
    );
    let mut last = 0.0;
    for m in [1, 2, 4, 8, 16, 32] {
        let params = effective_channel_params(&dist, m)?;
        let corrected = apply_effective_channel(&params, theta, &rho);
        println!(
            "{m:>4} {:>10.6} {:>10.6} {:>14.6}",
            params.lambda,
            params.theta2,
            corrected.hv().norm()
        );
        assert!(params.lambda >= last - 1e-12);
        last = params.lambda;
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
