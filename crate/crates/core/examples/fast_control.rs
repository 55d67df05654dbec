// Continuous Lindblad dephasing with frequent path measurements.
//
// Shrinking the control interval t pushes the frequency Fisher information
// towards T²/2.
//
// ```bash
// cargo run --example fast_control
// ```

use std::f64::consts::PI;

use pathmetro::continuous::{figure3_sweep, fisher_omega, ContinuousModel};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (gamma, omega) = (1.0, PI / 3.0);

    println!("T = 1, halving t:");
    let mut prev = 0.0;
    for t in [0.4f64, 0.2, 0.1, 0.05, 0.025, 1e-3] {
        let m = (1.0 / t).round() as usize;
        let model = ContinuousModel::new(omega, gamma, t, 1.0, m, 0.0)?;
        let f = fisher_omega(&model, true);
        println!(
            "  t={t:<6} M={m:<5} F_w={f:.5}  envelope={:.5}",
            model.with_optimal_theta1().envelope()
        );
        assert!(f >= prev);
        prev = f;
    }

    let totals: Vec<f64> = (1..=6).map(|k| 0.5 * k as f64).collect();
    let sweep = figure3_sweep(gamma, omega, &[0.05, 0.2, 0.5], &totals);
    println!(
        "{:>6} {:>5} {:>5} {:>10} {:>10} {:>10}",
        "t", "T", "M", "F_w", "envelope", "T^2/2"
    );
    for r in &sweep.rows {
        println!(
            "{:>6} {:>5} {:>5} {:>10.5} {:>10.5} {:>10.5}",
            r.t, r.total_time, r.m, r.fisher_omega, r.envelope, r.bound_half_t_sq
        );
        assert!(r.envelope <= r.bound_half_t_sq + 1e-12);
    }
    for s in &sweep.skipped {
        println!("skipped t={} T={}: {}", s.t, s.total_time, s.reason);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
