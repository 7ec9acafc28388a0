//! `ohmtrace`: run one experiment and write its CSV report.
//!
//! Exit codes: 0 success, 2 a checked identity or inequality failed,
//! 3 bad configuration, 4 a soft target was missed (the report is still
//! written), 1 any other error.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use ohmtrace::experiments::{run, ExperimentConfig, ExperimentError, ExperimentKind};
use ohmtrace::Execution;

#[derive(Parser, Debug)]
#[command(name = "ohmtrace", version, about = "Random walk trace and electrical network experiments")]
struct Cli {
    /// crossing-identity, superlevel-bound, level-cut-trend, ball-witness,
    /// trace-recurrence or rn-growth
    experiment: String,
    /// lattice, tree, wedge or birth-death
    #[arg(long)]
    family: Option<String>,
    /// Family or experiment parameter, `key=value` (repeatable)
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Collapse depths, e.g. `4,8,12` or `4..16`
    #[arg(long)]
    depths: Option<String>,
    /// Voltage thresholds in (0, 1), e.g. `0.2,0.5,0.8`
    #[arg(long)]
    tgrid: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output CSV (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Settings file with one `key = value` per line; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run every work item on the calling thread
    #[arg(long)]
    sequential: bool,
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, ExperimentError> {
    let kind: ExperimentKind = cli.experiment.parse()?;
    let mut config = ExperimentConfig::new(kind);
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::Config(format!("cannot read {}: {e}", path.display())))?;
        config.apply_file_text(&text)?;
    }
    let flags = [
        ("family", cli.family.as_deref()),
        ("depths", cli.depths.as_deref()),
        ("tgrid", cli.tgrid.as_deref()),
        ("trials", cli.trials.as_deref()),
        ("seed", cli.seed.as_deref()),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            config.set(key, v)?;
        }
    }
    for p in &cli.params {
        config.set("param", p)?;
    }
    if let Some(out) = &cli.out {
        config.out = Some(out.clone());
    }
    if cli.sequential {
        config.execution = Execution::Sequential;
    }
    config.validate()?;
    Ok(config)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let config = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("ohmtrace: {e}");
            return ExitCode::from(3);
        }
    };
    match execute(&config) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("ohmtrace: {e:#}");
            let config_error =
                e.downcast_ref::<ExperimentError>().is_some_and(|e| matches!(e, ExperimentError::Config(_)));
            ExitCode::from(if config_error { 3 } else { 1 })
        }
    }
}

fn execute(config: &ExperimentConfig) -> anyhow::Result<u8> {
    let report = run(config)?;
    match &config.out {
        Some(path) => {
            report.write_to(path).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("{}: {} rows written to {}", config.kind, report.rows.len(), path.display());
        }
        None => print!("{}", report.to_csv()),
    }
    let code = report.outcome.exit_code();
    if code != 0 {
        eprintln!("{}: {:?}", config.kind, report.outcome);
    }
    Ok(code as u8)
}
