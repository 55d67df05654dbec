// Closed forms against brute-force enumeration on the polarization ⊗ path space.
//
// ```bash
// cargo run --release --example oracle_check
// ```

use std::f64::consts::PI;

use pathmetro::oracle::{continuous_suite, discrete_suite, SuiteSettings};
use pathmetro::NoiseDistribution;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dist = NoiseDistribution::phase_kick(0.3, 2.0)?;
    let settings = SuiteSettings {
        max_paths: 5,
        samples: 5,
        max_steps: 4,
        seed: 3,
        tol: 1e-10,
    };
    println!(
        "{:>3} {:>12} {:>12} {:>12} {:>14}",
        "M", "superposed", "effective", "lambda^N", "lambda^2N alt"
    );
    for r in discrete_suite(&dist, &settings)? {
        println!(
            "{:>3} {:>12.2e} {:>12.2e} {:>12.2e} {:>14.2e}",
            r.paths,
            r.superposed_entry_diff,
            r.effective_diff,
            r.sequential_diff,
            r.sequential_diff_lambda_2n
        );
        assert!(r.passed);
    }

    println!("continuous model, t = 0.1:");
    for r in continuous_suite(PI / 3.0, 1.0, 0.1, 4, 4, 1e-9)? {
        println!(
            "{:>3} step {:.2e} composed {:.2e}",
            r.paths, r.step_diff, r.composed_diff
        );
        assert!(r.passed);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
