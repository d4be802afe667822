use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use phdetect::cli::{cmd_orders, cmd_phdist, cmd_simulate, cmd_solve, cmd_spsa, cmd_sweep, ExperimentConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Solve,
    Spsa,
    Orders,
    Sweep,
    Simulate,
    Phdist,
}

/// Change detection experiments driven by a JSON config.
#[derive(Debug, Parser)]
#[command(name = "phdetect", version)]
struct Args {
    command: Command,
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for CSVs and reports.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn run(args: &Args) -> phdetect::Result<()> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let out = Some(args.out.as_path());
    let report = match args.command {
        Command::Solve => serde_json::to_string_pretty(&cmd_solve(&cfg, out)?.report)?,
        Command::Spsa => serde_json::to_string_pretty(&cmd_spsa(&cfg, out)?.0)?,
        Command::Orders => {
            let r = cmd_orders(&cfg, out)?;
            let mut s = format!("{:<20} {:<6} {:>14}\n", "assumption", "result", "slack");
            for c in &r.checks {
                let verdict = if c.passed { "pass" } else { "FAIL" };
                s.push_str(&format!("{:<20} {:<6} {:>14.6e}", c.name, verdict, c.slack));
                if let Some(w) = &c.witness {
                    s.push_str(&format!("  {w}"));
                }
                s.push('\n');
            }
            s.trim_end().to_string()
        }
        Command::Sweep => serde_json::to_string_pretty(&cmd_sweep(&cfg, out)?)?,
        Command::Simulate => serde_json::to_string_pretty(&cmd_simulate(&cfg, out)?)?,
        Command::Phdist => serde_json::to_string_pretty(&cmd_phdist(&cfg, out)?)?,
    };
    println!("{report}");
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
