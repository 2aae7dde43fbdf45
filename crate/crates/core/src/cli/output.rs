//! CSV and JSON-lines writers.

use std::io::{self, Write};

use serde_json::{json, Value};

use super::config::{ExperimentConfig, Format};
use crate::kernel::{EstimateSummary, Trajectory};

/// One row of a summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub metric: String,
    pub mean: f64,
    pub ci_half_width: f64,
    pub std_error: f64,
    pub reps: usize,
    pub seed: u64,
}

impl SummaryRow {
    pub fn from_estimate(metric: impl Into<String>, s: &EstimateSummary) -> Self {
        SummaryRow {
            metric: metric.into(),
            mean: s.mean,
            ci_half_width: s.ci_half_width,
            std_error: s.std_error,
            reps: s.replications,
            seed: s.base_seed,
        }
    }

    /// A deterministic value with no sampling error.
    pub fn exact(metric: impl Into<String>, value: f64, seed: u64) -> Self {
        SummaryRow {
            metric: metric.into(),
            mean: value,
            ci_half_width: 0.0,
            std_error: 0.0,
            reps: 0,
            seed,
        }
    }
}

/// Results of one command.
#[derive(Debug, Clone)]
pub enum Table {
    Trajectories(Vec<Trajectory>),
    Summary(Vec<SummaryRow>),
}

/// Shortest decimal that reads back to the same `f64`.
fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

fn json_num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(|| Value::String(num(x)), Value::Number)
}

/// Writes the header comment, the column names and the rows.
pub fn write_table(out: &mut impl Write, cfg: &ExperimentConfig, table: &Table) -> io::Result<()> {
    let header = serde_json::to_string(cfg).map_err(io::Error::other)?;
    writeln!(out, "# {header}")?;
    match (cfg.format(), table) {
        (Format::Csv, Table::Trajectories(paths)) => {
            let dim = paths.first().map_or(0, Trajectory::dim);
            write!(out, "rep,t")?;
            for c in 0..dim {
                write!(out, ",coord{c}")?;
            }
            writeln!(out)?;
            for (rep, path) in paths.iter().enumerate() {
                for (t, s) in path.iter() {
                    write!(out, "{rep},{}", num(t))?;
                    for x in s {
                        write!(out, ",{x}")?;
                    }
                    writeln!(out)?;
                }
                // Closing row at the end of the observation window.
                if path.end_time() > *path.times().last().unwrap() {
                    write!(out, "{rep},{}", num(path.end_time()))?;
                    for x in path.final_state() {
                        write!(out, ",{x}")?;
                    }
                    writeln!(out)?;
                }
            }
        }
        (Format::Csv, Table::Summary(rows)) => {
            writeln!(out, "metric,mean,ci_half_width,std_error,reps,seed")?;
            for r in rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.metric,
                    num(r.mean),
                    num(r.ci_half_width),
                    num(r.std_error),
                    r.reps,
                    r.seed
                )?;
            }
        }
        (Format::JsonLines, Table::Trajectories(paths)) => {
            for (rep, path) in paths.iter().enumerate() {
                let mut rows: Vec<(f64, &[i64])> = path.iter().collect();
                if path.end_time() > *path.times().last().unwrap() {
                    rows.push((path.end_time(), path.final_state()));
                }
                for (t, s) in rows {
                    writeln!(out, "{}", json!({ "rep": rep, "t": json_num(t), "state": s }))?;
                }
            }
        }
        (Format::JsonLines, Table::Summary(rows)) => {
            for r in rows {
                let v = json!({
                    "metric": r.metric,
                    "mean": json_num(r.mean),
                    "ci_half_width": json_num(r.ci_half_width),
                    "std_error": json_num(r.std_error),
                    "reps": r.reps,
                    "seed": r.seed,
                });
                writeln!(out, "{v}")?;
            }
        }
    }
    Ok(())
}
