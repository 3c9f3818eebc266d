use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use optimice_bench::campaign::{
    run_campaign, run_tune, CampaignConfig, OptimizerSettings, TuneGrid,
};
use optimice_bench::functions::registry;
use optimice_bench::metrics::SummaryRow;

#[derive(Parser)]
#[command(
    name = "optimice",
    about = "Batch surrogate-based global optimization benchmarks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a campaign described by a JSON config file.
    Run {
        /// Path to a CampaignConfig JSON file.
        #[arg(long)]
        config: PathBuf,
    },
    /// Shortcut: run one function with default settings.
    Bench {
        /// Function label (E1) or name (Branin).
        #[arg(long)]
        function: String,
        /// Exploration variant: mice or alm.
        #[arg(long, default_value = "mice")]
        variant: String,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Output directory for trials.csv, summary.csv, regret.csv and
        /// manifest.json.
        #[arg(long, default_value = "optimice-out")]
        output: PathBuf,
    },
    /// List the benchmark functions with domains, optima and targets.
    ListFunctions,
    /// Sweep optimizer settings (and scaled function versions) from a grid
    /// file over one function.
    Tune {
        #[arg(long)]
        function: String,
        /// Path to a TuneGrid JSON file (scenarios + optional scalings).
        #[arg(long)]
        grid: PathBuf,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = "optimice-tune")]
        output: PathBuf,
    },
}

fn print_summary(rows: &[SummaryRow]) {
    println!(
        "{:<10} {:<10} {:>7} {:>9} {:>9} {:>12} {:>12} {:>12} {:>12} {:>10}",
        "function",
        "variant",
        "trials",
        "succ_1pct",
        "succ_5pct",
        "evals_1pct",
        "evals_5pct",
        "best",
        "mean_best",
        "sd_best"
    );
    for r in rows {
        println!(
            "{:<10} {:<10} {:>7} {:>9} {:>9} {:>12} {:>12} {:>12.6} {:>12.6} {:>10.4}",
            r.function,
            r.variant,
            r.n_trials,
            r.success_1pct,
            r.success_5pct,
            r.mean_evals_1pct.to_string(),
            r.mean_evals_5pct.to_string(),
            r.best,
            r.mean_best,
            r.sd_best
        );
    }
}

fn campaign_command(config: CampaignConfig) -> anyhow::Result<ExitCode> {
    let outcome = run_campaign(&config)?;
    print_summary(&outcome.summary);
    println!();
    println!("trials:   {}", outcome.trials_csv.display());
    println!("summary:  {}", outcome.summary_csv.display());
    println!("regret:   {}", outcome.regret_csv.display());
    println!("manifest: {}", outcome.manifest_path.display());
    if outcome.aborted.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("{} trial(s) aborted; see the manifest", outcome.aborted.len());
        Ok(ExitCode::from(2))
    }
}

fn run() -> anyhow::Result<ExitCode> {
    match Cli::parse().command {
        Command::Run { config } => {
            let raw = fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let config: CampaignConfig =
                serde_json::from_str(&raw).context("parsing campaign config")?;
            campaign_command(config)
        }
        Command::Bench { function, variant, trials, seed, output } => {
            let mut settings = OptimizerSettings::mice();
            settings.variant = variant;
            campaign_command(CampaignConfig {
                functions: vec![function],
                optimizers: vec![settings],
                n_trials: trials,
                seed_base: seed,
                output_dir: output,
            })
        }
        Command::ListFunctions => {
            println!(
                "{:<5} {:<16} {:>3}  {:<24} {:>12} {:>12} {:>12}",
                "label", "name", "dim", "domain", "optimum", "target_1pct", "target_5pct"
            );
            for f in registry() {
                let lower = f.domain().lower();
                let upper = f.domain().upper();
                let isotropic = lower.iter().all(|l| l == &lower[0])
                    && upper.iter().all(|u| u == &upper[0]);
                let domain = if isotropic {
                    format!("[{}, {}]^{}", lower[0], upper[0], f.dim())
                } else {
                    lower
                        .iter()
                        .zip(upper)
                        .map(|(l, u)| format!("[{l}, {u}]"))
                        .collect::<Vec<_>>()
                        .join("x")
                };
                let (t1, t5) = f.targets();
                println!(
                    "{:<5} {:<16} {:>3}  {:<24} {:>12} {:>12} {:>12}",
                    f.label(),
                    f.name(),
                    f.dim(),
                    domain,
                    f.global_optimum(),
                    t1,
                    t5
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Tune { function, grid, trials, seed, output } => {
            let raw = fs::read_to_string(&grid)
                .with_context(|| format!("reading {}", grid.display()))?;
            let grid: TuneGrid = serde_json::from_str(&raw).context("parsing tune grid")?;
            let rows = run_tune(&function, &grid, trials, seed, &output)?;
            print_summary(&rows.iter().map(|r| r.summary.clone()).collect::<Vec<_>>());
            println!();
            println!("sweep: {}", output.join("tune.csv").display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
