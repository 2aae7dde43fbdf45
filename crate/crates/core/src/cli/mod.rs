//! Batch command-line front end.
//!
//! ```text
//! swarm-stability <command> [--config <path>] [--seed N] [--reps N]
//!                 [--horizon T] [--out <path>] [--format csv|json-lines]
//! ```
//!
//! Exit codes: 0 success, 1 usage or config error, 2 numerical or
//! simulation failure, 3 validation-suite failure.

mod config;
mod execute;
mod output;
pub mod validate;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::Parser;

pub use config::{parse_config, Command, ExperimentConfig, Format, Overrides, DEFAULT_HORIZON, DEFAULT_REPS, DEFAULT_SEED};
pub use execute::{execute, Outcome};
pub use output::{write_table, SummaryRow, Table};

use crate::error::Error;

#[derive(Debug, Parser)]
#[command(name = "swarm-stability", version, about = "Stability experiments for chunk-based file-sharing swarms")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    /// Output file.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter { .. } | Error::Config(_) => 1,
        _ => 2,
    }
}

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                1
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    let fail = |stderr: &mut dyn Write, e: &Error| {
        let _ = writeln!(stderr, "error: {e}");
        exit_code(e)
    };

    let file_cfg = match &args.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => match parse_config(&text) {
                Ok(c) => c,
                Err(e) => return fail(stderr, &e),
            },
            Err(e) => return fail(stderr, &Error::Config(format!("cannot read {}: {e}", path.display()))),
        },
        None => ExperimentConfig::default(),
    };
    let overrides = Overrides {
        seed: args.seed,
        reps: args.reps,
        horizon: args.horizon,
        output: args.out,
        format: args.format,
    };
    let cfg = match file_cfg.resolve(args.command, &overrides) {
        Ok(c) => c,
        Err(e) => return fail(stderr, &e),
    };
    let outcome = match execute(&cfg) {
        Ok(o) => o,
        Err(e) => return fail(stderr, &e),
    };
    if let Some(path) = &cfg.output {
        let written = File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            write_table(&mut w, &cfg, &outcome.table)?;
            w.flush()
        });
        if let Err(e) = written {
            return fail(stderr, &Error::Config(format!("cannot write {}: {e}", path.display())));
        }
    }
    for line in &outcome.lines {
        let _ = writeln!(stdout, "{line}");
    }
    outcome.exit_code
}
