//! Command dispatch.

use serde_json::{json, Map, Value};

use super::config::{Command, RunConfig};
use super::output::{Cell, Output, Table};
use super::RunError;
use crate::channel::effective_channel_params;
use crate::continuous::figure3_sweep;
use crate::estimation::{rmse_trials, EstimationResult, ExperimentConfig, Window};
use crate::noise::{wrap_angle, NoiseDistribution};
use crate::oracle::{continuous_suite, discrete_suite, SuiteSettings, ENUMERATION_BUDGET};
use crate::protocol::{fisher_exact, fisher_sweep, PathRule, ProtocolSpec};

/// Residual threshold reported by `condition`.
pub const CONDITION_REPORT_TOL: f64 = 1e-12;

/// Runs the command on the current rayon pool. `config` must already be validated and in radians.
pub fn dispatch(config: &RunConfig) -> Result<Output, RunError> {
    let out = match config.command {
        Command::Condition => condition(config)?,
        Command::Channel => channel(config)?,
        Command::FisherSweep => fisher(config)?,
        Command::Scaling => scaling(config)?,
        Command::Continuous => continuous(config)?,
        Command::OracleCheck => oracle_check(config)?,
        Command::Estimate => estimate(config)?,
    };
    Ok(out)
}

fn noise(config: &RunConfig) -> Result<NoiseDistribution, RunError> {
    let cfg = config
        .noise
        .as_ref()
        .ok_or_else(|| RunError::missing("noise"))?;
    Ok(cfg.build()?)
}

fn condition(config: &RunConfig) -> Result<Output, RunError> {
    let dist = noise(config)?;
    let profile = dist.profile(CONDITION_REPORT_TOL)?;
    let det = dist.decomposition_matrix().determinant();
    let satisfied = profile.theta1.is_some();
    let mut table = Table::new(&[
        "satisfied",
        "residual",
        "f1_re",
        "f1_im",
        "f2_re",
        "f2_im",
        "theta0",
        "theta1",
        "det_a",
    ]);
    table.push(vec![
        satisfied.into(),
        profile.condition_residual.into(),
        profile.f1.re.into(),
        profile.f1.im.into(),
        profile.f2.re.into(),
        profile.f2.im.into(),
        profile.theta0.into(),
        profile.theta1.into(),
        det.re.into(),
    ]);
    let mut out = Output {
        table,
        passed: true,
        ..Default::default()
    };
    let verdict = if satisfied {
        format!(
            "satisfied, residual {:.3e} <= {:.0e}",
            profile.condition_residual, CONDITION_REPORT_TOL
        )
    } else {
        format!(
            "violated, residual {:.3e} > {:.0e}",
            profile.condition_residual, CONDITION_REPORT_TOL
        )
    };
    out.summary.insert("verdict".into(), json!(verdict));
    out.summary
        .insert("residual".into(), json!(profile.condition_residual));
    Ok(out)
}

fn channel(config: &RunConfig) -> Result<Output, RunError> {
    let dist = noise(config)?;
    let ms = config
        .protocol
        .as_ref()
        .and_then(|p| p.ms.clone())
        .unwrap_or_default();
    let mut table = Table::new(&["M", "lambda", "theta2", "theta0", "theta1"]);
    for m in ms {
        let p = effective_channel_params(&dist, m)?;
        table.push(vec![
            m.into(),
            p.lambda.into(),
            p.theta2.into(),
            p.theta0.into(),
            p.theta1.into(),
        ]);
    }
    Ok(Output {
        table,
        passed: true,
        ..Default::default()
    })
}

fn fisher(config: &RunConfig) -> Result<Output, RunError> {
    let dist = noise(config)?;
    let p = config
        .protocol
        .as_ref()
        .ok_or_else(|| RunError::missing("protocol"))?;
    let ns = p.ns.clone().unwrap_or_default();
    let thetas = p.theta_values().unwrap_or_default();
    let rows = fisher_sweep(&dist, &ns, p.path_rule(), &thetas, p.mode)?;
    let mut table = Table::new(&["N", "M", "theta", "lambda", "fisher_exact", "fisher_bound"]);
    for r in rows {
        table.push(vec![
            r.n.into(),
            r.m.into(),
            r.theta.into(),
            r.lambda.into(),
            r.fisher_exact.into(),
            r.fisher_bound.into(),
        ]);
    }
    Ok(Output {
        table,
        passed: true,
        ..Default::default()
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn estimation_setup(
    config: &RunConfig,
    spec: ProtocolSpec,
) -> Result<Option<(ExperimentConfig, usize)>, RunError> {
    let Some(e) = &config.estimation else {
        return Ok(None);
    };
    let theta = truth(config, &spec);
    let window = match e.window {
        Some([lo, hi]) => Window::new(lo, hi)?,
        None => Window::centred(theta, spec.probes),
    };
    Ok(Some((
        ExperimentConfig::new(spec, theta, e.nu, config.seed, window)?,
        e.trials,
    )))
}

fn truth(config: &RunConfig, spec: &ProtocolSpec) -> f64 {
    config
        .estimation
        .as_ref()
        .and_then(|e| e.theta_true)
        .or(config.protocol.as_ref().and_then(|p| p.theta))
        .unwrap_or_else(|| wrap_angle(spec.sin_term_zero_theta()))
}

fn scaling(config: &RunConfig) -> Result<Output, RunError> {
    let dist = noise(config)?;
    let p = config
        .protocol
        .as_ref()
        .ok_or_else(|| RunError::missing("protocol"))?;
    let rule = match (p.m, p.m_coefficient) {
        (None, None) => PathRule::Proportional(1.0),
        _ => p.path_rule(),
    };
    let mut table = Table::new(&[
        "N",
        "M",
        "lambda",
        "theta",
        "fisher_exact",
        "fisher_bound",
        "heisenberg",
        "nu",
        "trials",
        "rmse",
        "cramer_rao",
        "efficiency",
    ]);
    let mut fisher_values = Vec::new();
    let mut rmse_values = Vec::new();
    let ns = p.ns.clone().unwrap_or_default();
    for &n in &ns {
        let spec = ProtocolSpec::from_noise(&dist, rule.paths_for(n), n, p.mode)?;
        let theta = truth(config, &spec);
        let report = fisher_exact(&spec, theta);
        fisher_values.push(report.exact);
        let mut row: Vec<Cell> = vec![
            n.into(),
            spec.params.paths.into(),
            spec.params.lambda.into(),
            theta.into(),
            report.exact.into(),
            report.bound.into(),
            ((n * n) as f64).into(),
        ];
        match estimation_setup(config, spec)? {
            Some((exp, trials)) => {
                let res = rmse_trials(&exp, trials)?;
                rmse_values.push(res.rmse);
                row.extend([
                    exp.nu.into(),
                    trials.into(),
                    res.rmse.into(),
                    res.cramer_rao.into(),
                    res.efficiency_ratio().into(),
                ]);
            }
            None => row.extend([
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
            ]),
        }
        table.push(row);
    }
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let mut out = Output {
        table,
        passed: true,
        ..Default::default()
    };
    if let Some(s) = log_log_slope(&xs, &fisher_values) {
        out.summary.insert("fisher_slope".into(), json!(s));
    }
    if let Some(s) = log_log_slope(&xs, &rmse_values) {
        out.summary.insert("rmse_slope".into(), json!(s));
    }
    Ok(out)
}

fn continuous(config: &RunConfig) -> Result<Output, RunError> {
    let c = config
        .continuous
        .as_ref()
        .ok_or_else(|| RunError::missing("continuous"))?;
    let sweep = figure3_sweep(c.gamma, c.omega, &c.t_values, &c.total_time_values());
    let mut table = Table::new(&[
        "t",
        "T",
        "M",
        "abs_lambda_t",
        "theta_t",
        "fisher_omega",
        "envelope",
        "bound_half_T_sq",
    ]);
    for r in &sweep.rows {
        table.push(vec![
            r.t.into(),
            r.total_time.into(),
            r.m.into(),
            r.abs_lambda_t.into(),
            r.theta_t.into(),
            r.fisher_omega.into(),
            r.envelope.into(),
            r.bound_half_t_sq.into(),
        ]);
    }
    let notes = sweep
        .skipped
        .iter()
        .map(|s| format!("skipped t={} T={}: {}", s.t, s.total_time, s.reason))
        .collect();
    Ok(Output {
        table,
        notes,
        passed: true,
        ..Default::default()
    })
}

fn oracle_check(config: &RunConfig) -> Result<Output, RunError> {
    let dist = noise(config)?;
    let o = config
        .oracle
        .as_ref()
        .ok_or_else(|| RunError::missing("oracle"))?;
    let terms = (dist.len() as u128)
        .checked_pow(o.max_paths as u32)
        .unwrap_or(u128::MAX);
    if terms > ENUMERATION_BUDGET {
        return Err(crate::Error::ResourceLimit {
            terms,
            budget: ENUMERATION_BUDGET,
        }
        .into());
    }
    let settings = SuiteSettings {
        max_paths: o.max_paths,
        samples: o.samples,
        max_steps: o.max_steps,
        seed: config.seed,
        tol: o.tol,
    };
    let mut table = Table::new(&[
        "kind",
        "M",
        "samples",
        "steps",
        "superposed_entry_diff",
        "branch_weight_diff",
        "effective_diff",
        "sequential_diff",
        "sequential_diff_lambda_2n",
        "passed",
    ]);
    let mut passed = true;
    for r in discrete_suite(&dist, &settings)? {
        passed &= r.passed;
        table.push(vec![
            "discrete".into(),
            r.paths.into(),
            r.samples.into(),
            o.max_steps.into(),
            r.superposed_entry_diff.into(),
            r.branch_weight_diff.into(),
            r.effective_diff.into(),
            r.sequential_diff.into(),
            r.sequential_diff_lambda_2n.into(),
            r.passed.into(),
        ]);
    }
    if let Some(c) = &o.continuous {
        for r in continuous_suite(c.omega, c.gamma, c.t, c.max_paths, c.max_steps, c.tol)? {
            passed &= r.passed;
            table.push(vec![
                "continuous".into(),
                r.paths.into(),
                Cell::Empty,
                r.steps.into(),
                Cell::Empty,
                Cell::Empty,
                r.step_diff.into(),
                r.composed_diff.into(),
                Cell::Empty,
                r.passed.into(),
            ]);
        }
    }
    let mut out = Output {
        table,
        passed,
        ..Default::default()
    };
    out.summary.insert("passed".into(), json!(passed));
    Ok(out)
}

fn estimate(config: &RunConfig) -> Result<Output, RunError> {
    let dist = noise(config)?;
    let p = config
        .protocol
        .as_ref()
        .ok_or_else(|| RunError::missing("protocol"))?;
    let n = p.n.ok_or_else(|| RunError::missing("protocol.n"))?;
    let spec = ProtocolSpec::from_noise(&dist, p.path_rule().paths_for(n), n, p.mode)?;
    let (exp, trials) =
        estimation_setup(config, spec)?.ok_or_else(|| RunError::missing("estimation"))?;
    let res = rmse_trials(&exp, trials)?;
    let record_counts = config.estimation.as_ref().is_some_and(|e| e.record_counts);

    let mut table = Table::new(&[
        "trial",
        "seed",
        "theta_hat",
        "log_likelihood",
        "p_plus",
        "p_minus",
        "q_plus",
        "q_minus",
    ]);
    for (i, r) in res.records.iter().enumerate() {
        table.push(vec![
            i.into(),
            r.seed.into(),
            r.theta_hat.into(),
            r.log_likelihood.into(),
            r.counts.p_plus.into(),
            r.counts.p_minus.into(),
            r.counts.q_plus.into(),
            r.counts.q_minus.into(),
        ]);
    }
    let document = estimate_document(&exp, &res, record_counts);
    let mut out = Output {
        table,
        document: Some(document),
        passed: true,
        ..Default::default()
    };
    out.summary.insert("rmse".into(), json!(res.rmse));
    out.summary
        .insert("cramer_rao".into(), json!(res.cramer_rao));
    Ok(out)
}

fn estimate_document(exp: &ExperimentConfig, res: &EstimationResult, record_counts: bool) -> Value {
    let trials: Vec<Value> = res
        .records
        .iter()
        .map(|r| {
            let mut m = Map::new();
            m.insert("seed".into(), json!(r.seed));
            m.insert("theta_hat".into(), json!(r.theta_hat));
            m.insert("log_likelihood".into(), json!(r.log_likelihood));
            if record_counts {
                m.insert("counts".into(), json!(r.counts));
            }
            Value::Object(m)
        })
        .collect();
    json!({
        "probes": exp.spec.probes,
        "paths": exp.spec.params.paths,
        "mode": exp.spec.mode,
        "lambda": exp.spec.params.lambda,
        "theta2": exp.spec.params.theta2,
        "theta_true": exp.theta_true,
        "nu": exp.nu,
        "window": [exp.window.low, exp.window.high],
        "theta_hat": res.theta_hat,
        "log_likelihood_at_hat": res.log_likelihood_at_hat,
        "rmse": res.rmse,
        "cramer_rao": res.cramer_rao,
        "efficiency_ratio": res.efficiency_ratio(),
        "trials": trials,
    })
}
