// Fisher information of the GHZ protocol when the path count grows with N.
//
// ```bash
// cargo run --example heisenberg_scaling
// ```

use std::f64::consts::PI;

use pathmetro::experiment::log_log_slope;
use pathmetro::protocol::{fisher_bound, fisher_exact};
use pathmetro::{Mode, NoiseDistribution, ProtocolSpec};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dist = NoiseDistribution::phase_kick(0.5, PI)?;
    let ns = [2usize, 4, 8, 16, 32, 64];
    let mut with_paths = Vec::new();
    let mut single_path = Vec::new();

    println!(
        "{:>4} {:>10} {:>12} {:>12} {:>12}",
        "N", "N^2", "M=N", "bound", "M=1"
    );
    for &n in &ns {
        let spec = ProtocolSpec::from_noise(&dist, n, n, Mode::Parallel)?;
        let f = fisher_exact(&spec, spec.sin_term_zero_theta()).exact;
        let one = ProtocolSpec::from_noise(&dist, 1, n, Mode::Parallel)?;
        let f1 = fisher_exact(&one, 0.1).exact;
        println!(
            "{n:>4} {:>10} {f:>12.4} {:>12.4} {f1:>12.3e}",
            n * n,
            fisher_bound(&spec)
        );
        with_paths.push(f);
        single_path.push(f1);
    }
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let slope = log_log_slope(&xs[2..], &with_paths[2..]).ok_or("slope")?;
    println!("log-log slope for N >= 8 with M = N: {slope:.4}");
    assert!((1.9..=2.1).contains(&slope));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
