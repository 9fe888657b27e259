use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use shrdlurn::{SessionConfig, SessionLog, Variant};
use shrdlurn_eval::{replay, run_synthetic, Report, SynthConfig};

#[derive(Parser)]
#[command(
    name = "shrdlurn-eval",
    about = "Replay session logs and run synthetic-teacher experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a session log through one model setting.
    Replay {
        #[arg(long)]
        log: PathBuf,
        #[arg(long, default_value = "full")]
        variant: Variant,
        #[arg(long)]
        prag: bool,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Play synthetic-teacher games over a grid of settings.
    Synth {
        /// Probability of a predicate's preferred word, in [0, 1].
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        /// Number of seeds, numbered from 1.
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        /// Labeled interactions per run.
        #[arg(long, default_value_t = 200)]
        interactions: usize,
        /// `all`, or a comma-separated list of variants.
        #[arg(long, default_value = "all")]
        grid: String,
        #[command(flatten)]
        model: ModelArgs,
    },
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Beam width per cell; 0 keeps every form.
    #[arg(long)]
    beam: Option<usize>,
    #[arg(long)]
    max_size: Option<usize>,
    /// Emit only the JSON lines.
    #[arg(long)]
    json: bool,
}

impl ModelArgs {
    fn apply(&self, mut c: SessionConfig) -> anyhow::Result<SessionConfig> {
        if self.eta.is_some() {
            c.eta = self.eta;
        }
        c.beta = self.beta.unwrap_or(c.beta);
        c.alpha = self.alpha.unwrap_or(c.alpha);
        c.epsilon = self.epsilon.unwrap_or(c.epsilon);
        if let Some(b) = self.beam {
            c.beam_width = (b > 0).then_some(b);
        }
        c.max_size = self.max_size.unwrap_or(c.max_size);
        c.validate()?;
        Ok(c)
    }

    fn print(&self, report: &Report) {
        if !self.json {
            println!("{}", report.to_table());
        }
        print!("{}", report.to_jsonl());
    }
}

fn parse_grid(grid: &str) -> anyhow::Result<Vec<Variant>> {
    if grid == "all" {
        return Ok(Variant::ALL.to_vec());
    }
    grid.split(',')
        .map(|v| {
            v.trim()
                .parse::<Variant>()
                .map_err(|e| anyhow::anyhow!("{e}"))
        })
        .collect()
}

/// Failures caused by bad input rather than by the tool.
#[derive(Debug, thiserror::Error)]
#[error("{0:#}")]
struct BadInput(anyhow::Error);

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Replay {
            log,
            variant,
            prag,
            model,
        } => {
            let text = std::fs::read_to_string(&log)
                .with_context(|| format!("reading {}", log.display()))
                .map_err(BadInput)?;
            let parsed = SessionLog::parse(&text)
                .with_context(|| format!("parsing {}", log.display()))
                .map_err(BadInput)?;
            // the logged step size belongs to the logged variant
            let eta = if variant == parsed.config.variant {
                parsed.config.eta
            } else {
                None
            };
            let base = SessionConfig {
                variant,
                pragmatics: prag,
                eta,
                ..parsed.config.clone()
            };
            let config = model.apply(base).map_err(BadInput)?;
            let r = replay(&parsed, &config);
            model.print(&Report { rows: vec![r.row] });
        }
        Command::Synth {
            rho,
            seeds,
            interactions,
            grid,
            model,
        } => {
            if !(0.0..=1.0).contains(&rho) {
                return Err(BadInput(anyhow::anyhow!("--rho must lie in [0, 1]")).into());
            }
            let config = SynthConfig {
                rho,
                seeds: (1..=seeds).collect(),
                interactions,
                variants: parse_grid(&grid).map_err(BadInput)?,
                pragmatics: vec![false, true],
                base: model.apply(SessionConfig::default()).map_err(BadInput)?,
            };
            let (report, _) = run_synthetic(&config)?;
            model.print(&report);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<BadInput>() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
