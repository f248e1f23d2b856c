//! `kamtree`: command-line front end for the Lindstedt and tree engines.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;

use commands::{Context, Failure, Outcome, Report};

#[derive(Parser)]
#[command(
    name = "kamtree",
    version,
    about = "Perturbative invariant tori of weakly coupled rotators"
)]
struct Cli {
    /// JSON config file; unset keys take the built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for reports.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Override a config key, e.g. `--set k=6` or `--set weights.half=2`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE", value_parser = config::parse_override)]
    overrides: Vec<(String, Value)>,
    /// Highest Lindstedt order.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Perturbation strength; repeat for several.
    #[arg(long = "epsilon", global = true)]
    epsilons: Vec<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    m_max: Option<u32>,
    #[arg(long, global = true)]
    engine: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// β(m) with witnesses and the scale ladder.
    Betaseq,
    /// Partial Bryuno sum up to m_max.
    Bryuno,
    /// Diophantine check of ω up to dioph_n.
    Dioph,
    /// Monte-Carlo Diophantine fraction of the frequency ball.
    Measure,
    /// Lindstedt coefficients from the Fourier recursion.
    Expand,
    /// Tree-sum coefficients, their agreement with the recursion, and the counting bound.
    Trees {
        /// Also write every labelled tree of order dump_k.
        #[arg(long)]
        dump: bool,
    },
    /// Self-energy cancellation table.
    Cancel,
    /// Synthesized tori with norms, radius estimate and thresholds.
    Synthesize,
    /// Leapfrog validation of the synthesized tori.
    Validate,
    /// Threshold constants C₀, C₀′, ε̄₁, ε̄₂.
    Thresholds,
    /// Every command followed by the acceptance checks.
    All,
}

fn overrides(cli: &Cli) -> Vec<(String, Value)> {
    let mut out = cli.overrides.clone();
    if let Some(k) = cli.k {
        out.push(("k".into(), k.into()));
    }
    if !cli.epsilons.is_empty() {
        out.push(("epsilons".into(), cli.epsilons.clone().into()));
    }
    if let Some(s) = cli.seed {
        out.push(("seed".into(), s.into()));
    }
    if let Some(m) = cli.m_max {
        out.push(("m_max".into(), m.into()));
    }
    if let Some(e) = &cli.engine {
        out.push(("engine".into(), e.clone().into()));
    }
    out
}

fn run(cli: &Cli) -> Outcome<Vec<Report>> {
    let cfg = config::load(cli.config.as_deref(), &overrides(cli)).map_err(Failure::Config)?;
    let ctx = Context::new(cfg)?;
    match &cli.command {
        Command::Betaseq => commands::betaseq(&ctx),
        Command::Bryuno => commands::bryuno(&ctx),
        Command::Dioph => commands::dioph(&ctx),
        Command::Measure => commands::measure(&ctx),
        Command::Expand => commands::expand(&ctx),
        Command::Trees { dump } => commands::trees(&ctx, *dump),
        Command::Cancel => commands::cancel(&ctx),
        Command::Synthesize => commands::synthesize_cmd(&ctx),
        Command::Validate => commands::validate(&ctx),
        Command::Thresholds => commands::thresholds(&ctx),
        Command::All => {
            let (reports, checks) = commands::all(&ctx)?;
            for c in &checks {
                println!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            let failed: Vec<String> = checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| c.name.to_string())
                .collect();
            write_reports(&cli.out, &reports).map_err(Failure::Config)?;
            if failed.is_empty() {
                Ok(Vec::new())
            } else {
                Err(Failure::Acceptance(failed))
            }
        }
    }
}

fn write_reports(dir: &std::path::Path, reports: &[Report]) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    for r in reports {
        let path = dir.join(&r.name);
        std::fs::write(&path, &r.body)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|reports| {
        write_reports(&cli.out, &reports).map_err(Failure::Config)?;
        for r in &reports {
            println!("wrote {}", cli.out.join(&r.name).display());
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("kamtree: {}", f.message());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
