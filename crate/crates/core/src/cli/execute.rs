//! Dispatch of a resolved config to the simulators and estimators.

use super::config::{Command, ExperimentConfig};
use super::output::{SummaryRow, Table};
use super::validate::run_suite;
use crate::analysis::{
    classify, estimate_growth_slope, estimate_h0_scaling, estimate_nk, estimate_series_sum,
    estimate_stationary_departure_rate, estimate_survival, lambda_star, nk_drift_check, short, Network,
    ScalingTable, ThresholdModel, DEFAULT_K, DEFAULT_MAX_STEPS,
};
use crate::error::{Error, Result};
use crate::kernel::{replicate_map, EstimateSummary, StoppingRule};
use crate::processes::{ProcessSpec, YuleParams};

/// What a command produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    /// Lines for standard output; the last one is the summary.
    pub lines: Vec<String>,
    pub table: Table,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(line: String, table: Table) -> Self {
        Outcome {
            lines: vec![line],
            table,
            exit_code: 0,
        }
    }
}

fn pm(s: &EstimateSummary) -> String {
    format!("{} ± {}", short(s.mean), short(s.ci_half_width))
}

/// Runs the command of a resolved config.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome> {
    let cmd = cfg
        .command
        .ok_or_else(|| Error::param("command", "missing"))?;
    let (seed, reps, horizon) = (cfg.seed(), cfg.reps(), cfg.horizon());
    match cmd {
        Command::Simulate => {
            let spec = cfg.process()?;
            let stop = StoppingRule::horizon(horizon);
            let paths = replicate_map(reps, seed, |rng| spec.sample_path(&stop, rng))?;
            let dim = spec.dim();
            let means: Vec<String> = (0..dim)
                .map(|c| short(paths.iter().map(|p| p.final_state()[c] as f64).sum::<f64>() / reps as f64))
                .collect();
            let line = format!(
                "simulated {reps} {} paths to t={}; mean final state [{}]",
                spec.name(),
                short(horizon),
                means.join(", ")
            );
            Ok(Outcome::ok(line, Table::Trajectories(paths)))
        }
        Command::Classify => {
            let network = match cfg.model_name() {
                "single_chunk" => Network::SingleChunk(cfg.single_chunk()?),
                _ => Network::TwoChunk(cfg.two_chunk()?),
            };
            let mut rows = Vec::new();
            let lambda_s = match &network {
                Network::TwoChunk(p) if p.mu2 - p.nu > p.mu1 && p.mu2 > p.nu => {
                    let spec = ProcessSpec::Saturated {
                        params: p.saturated(),
                        z0: [1, 0],
                    };
                    let (est, diag) = estimate_stationary_departure_rate(&spec, horizon, cfg.burn_in, reps, seed)?;
                    rows.push(SummaryRow::from_estimate("lambda_s", &est));
                    rows.push(SummaryRow::exact("max_to_sum_ratio", diag.max_to_sum_ratio, seed));
                    rows.push(SummaryRow::exact("stabilized", f64::from(u8::from(diag.stabilized)), seed));
                    Some((est, diag))
                }
                _ => None,
            };
            let v = classify(&network, lambda_s.as_ref().map(|(e, d)| (e, d)));
            if let Some(t) = v.threshold {
                rows.insert(0, SummaryRow::exact("threshold", t, seed));
            }
            Ok(Outcome::ok(v.to_string(), Table::Summary(rows)))
        }
        Command::LambdaStar => {
            let model = cfg.threshold_model()?;
            let mu = match (model, cfg.model_name()) {
                (ThresholdModel::TwoChunk, _) if cfg.params.contains_key("mu2") => cfg.rate("mu2")?,
                _ => cfg.rate("mu")?,
            };
            let value = lambda_star(model, mu, cfg.rate("nu")?, cfg.opt("delta", 1.0))?;
            let line = if value.is_finite() {
                format!("{value:?}")
            } else {
                format!("{value:?} (second coordinate transient)")
            };
            Ok(Outcome::ok(line, Table::Summary(vec![SummaryRow::exact("lambda_star", value, seed)])))
        }
        Command::Survival => {
            let w0 = cfg.count("w0", 1)?;
            let (alive, mw) = estimate_survival(
                YuleParams::new(cfg.rate("mu")?)?.mu,
                w0,
                &cfg.kill_schedule()?,
                horizon,
                reps,
                seed,
            )?;
            let line = format!("survival_prob={}; mw_mean={}", pm(&alive), pm(&mw));
            Ok(Outcome::ok(
                line,
                Table::Summary(vec![
                    SummaryRow::from_estimate("survival_prob", &alive),
                    SummaryRow::from_estimate("mw_mean", &mw),
                ]),
            ))
        }
        Command::Series => {
            let (est, diag) =
                estimate_series_sum(cfg.rate("gamma")?, &cfg.rbh()?, cfg.count("z0", 0)?, horizon, reps, seed)?;
            let line = format!("series_sum={} (stabilized={})", pm(&est), diag.stabilized);
            Ok(Outcome::ok(
                line,
                Table::Summary(vec![
                    SummaryRow::from_estimate("series_sum", &est),
                    SummaryRow::exact("max_to_sum_ratio", diag.max_to_sum_ratio, seed),
                    SummaryRow::exact("stabilized", f64::from(u8::from(diag.stabilized)), seed),
                ]),
            ))
        }
        Command::H0Scaling => {
            let grid = cfg.grid.clone().unwrap_or_else(|| vec![1, 10, 100, 1000]);
            let table = estimate_h0_scaling(cfg.rate("mu_w")?, &cfg.rbh()?, &grid, reps, seed, horizon)?;
            Ok(scaling_outcome("h0", "w0", &table, seed, Vec::new()))
        }
        Command::Vchain => {
            let params = cfg.v_chain()?;
            let k = cfg.count("K", DEFAULT_K)?;
            let grid = cfg.grid.clone().unwrap_or_else(|| vec![10, 100, 1000, 10_000]);
            let table = estimate_nk(&params, k, &grid, reps, seed, DEFAULT_MAX_STEPS)?;
            let drift = nk_drift_check(&params, k, reps, seed)?;
            Ok(scaling_outcome(
                "nk",
                "v",
                &table,
                seed,
                vec![SummaryRow::from_estimate("drift_at_K", &drift)],
            ))
        }
        Command::LambdaS => {
            let spec = cfg.process()?;
            let (est, diag) = estimate_stationary_departure_rate(&spec, horizon, cfg.burn_in, reps, seed)?;
            let line = format!(
                "λ^S={} (stabilized={}, max/sum={})",
                pm(&est),
                diag.stabilized,
                short(diag.max_to_sum_ratio)
            );
            Ok(Outcome::ok(
                line,
                Table::Summary(vec![
                    SummaryRow::from_estimate("lambda_s", &est),
                    SummaryRow::exact("max_to_sum_ratio", diag.max_to_sum_ratio, seed),
                    SummaryRow::exact("stabilized", f64::from(u8::from(diag.stabilized)), seed),
                ]),
            ))
        }
        Command::Drift => {
            let spec = cfg.process()?;
            let est = estimate_growth_slope(&spec, cfg.coordinate, horizon, cfg.slope_method()?, reps, seed)?;
            let line = format!("slope={}", pm(&est));
            Ok(Outcome::ok(line, Table::Summary(vec![SummaryRow::from_estimate("slope", &est)])))
        }
        Command::Validate => {
            let checks = run_suite(seed)?;
            let failed = checks.iter().filter(|c| !c.passed).count();
            let mut lines: Vec<String> = checks
                .iter()
                .map(|c| format!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail))
                .collect();
            lines.push(format!("validate: {}/{} checks passed", checks.len() - failed, checks.len()));
            let rows = checks
                .iter()
                .map(|c| SummaryRow::exact(c.name, f64::from(u8::from(c.passed)), seed))
                .collect();
            Ok(Outcome {
                lines,
                table: Table::Summary(rows),
                exit_code: if failed == 0 { 0 } else { 3 },
            })
        }
    }
}

fn scaling_outcome(metric: &str, var: &str, table: &ScalingTable, seed: u64, extra: Vec<SummaryRow>) -> Outcome {
    let mut rows = Vec::new();
    for r in &table.rows {
        rows.push(SummaryRow::from_estimate(format!("{metric}[{var}={}]", r.x), &r.estimate));
        rows.push(SummaryRow::exact(format!("excluded[{var}={}]", r.x), r.excluded as f64, seed));
    }
    rows.push(SummaryRow::exact("fit_slope", table.fit.slope, seed));
    rows.push(SummaryRow::exact("fit_intercept", table.fit.intercept, seed));
    rows.push(SummaryRow::exact("fit_max_relative_residual", table.fit.max_relative_residual, seed));
    rows.extend(extra);
    let flagged = table.rows.iter().filter(|r| r.flagged).count();
    let mut line = format!(
        "{metric} fit against log: slope={}, intercept={}, max relative residual={}",
        short(table.fit.slope),
        short(table.fit.intercept),
        short(table.fit.max_relative_residual)
    );
    if flagged > 0 {
        line.push_str(&format!("; {flagged} grid point(s) flagged for exclusions"));
    }
    Outcome::ok(line, Table::Summary(rows))
}
