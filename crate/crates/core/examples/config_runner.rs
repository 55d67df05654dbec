// Drive the experiment runner from code instead of the `pathmetro` binary.
//
// ```bash
// cargo run --example config_runner
// ```

use pathmetro::experiment::{execute, prepare, Invocation};

const CONFIG: &str = r#"{
    "command": "fisher-sweep",
    "noise": {"phase_kick": {"p": 0.5, "delta0": 1.0}},
    "pi_units": true,
    "protocol": {"ns": [2, 4, 8], "m_coefficient": 1.0, "theta_grid": {"start": 0.0, "stop": 0.25, "count": 3}}
}"#;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("pathmetro-example-{}", std::process::id()));
    let inv = Invocation {
        config_text: CONFIG.into(),
        out: Some(dir.join("fisher.csv")),
        overrides: vec!["protocol.mode=sequential".into()],
        ..Default::default()
    };
    let run = prepare(&inv)?;
    let report = execute(&run)?;
    print!("{}", std::fs::read_to_string(&report.out)?);
    println!("sha256 {}", report.manifest.outputs[0].sha256);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
