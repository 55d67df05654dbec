// Which dephasing noise can a superposition of paths undo?
//
// ```bash
// cargo run --example restoration_condition
// ```

use std::f64::consts::PI;

use pathmetro::noise::CONDITION_TOL;
use pathmetro::NoiseDistribution;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cases = [
        ("kick p=0.5 d=pi", NoiseDistribution::phase_kick(0.5, PI)?),
        ("kick p=0.9 d=1.0", NoiseDistribution::phase_kick(0.9, 1.0)?),
        (
            "three atoms",
            NoiseDistribution::new(vec![(0.0, 0.5), (1.0, 0.3), (2.5, 0.2)])?,
        ),
        (
            "gaussian s=0.5",
            NoiseDistribution::discretized_gaussian(PI, 0.5, 101)?,
        ),
    ];
    println!(
        "{:<18} {:>10} {:>12} {:>10} {:>10}",
        "noise", "|f(1)|", "residual", "theta0", "theta1"
    );
    for (name, dist) in &cases {
        let p = dist.profile(CONDITION_TOL)?;
        let theta1 = p.theta1.map_or("-".to_string(), |t| format!("{t:.4}"));
        println!(
            "{name:<18} {:>10.6} {:>12.3e} {:>10.4} {:>10}",
            p.f1.norm(),
            p.condition_residual,
            p.theta0,
            theta1
        );
    }

    let kick = &cases[0].1;
    let (ok, _) = kick.check_condition(1e-12);
    assert!(ok);
    assert!((kick.offset_theta0()? - PI / 2.0).abs() < 1e-12);
    let (ok, residual) = cases[3].1.check_condition(1e-12);
    assert!(!ok && residual > 1e-3);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
