use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use fl_auction::auction::PaymentRule;
use fl_auction_harness::checks;
use fl_auction_harness::generate::{generate_instance, Scenario};
use fl_auction_harness::io::{read_config, read_instance, run_auction, write_json};
use fl_auction_harness::summary::{summarize, write_summary};
use fl_auction_harness::sweep::{read_csv, run_sweep, write_csv};

#[derive(Parser)]
#[command(
    name = "flauction",
    version,
    about = "Federated-learning resource auction simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    DisplacedLoser,
    ExactCritical,
}

impl From<RuleArg> for PaymentRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::DisplacedLoser => PaymentRule::DisplacedLoser,
            RuleArg::ExactCritical => PaymentRule::ExactCritical,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate one instance at the config's first sweep point.
    Gen {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Allocate and price an instance file.
    Auction {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "exact-critical")]
        payment_rule: RuleArg,
    },
    /// Run every sweep point and repetition, one CSV row per scheme.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Truthfulness, rationality, dual-feasibility and sandwich suites.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        trials: usize,
    },
    /// Average sweep rows over seeds.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn status(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn verify(config: PathBuf, trials: usize) -> anyhow::Result<bool> {
    anyhow::ensure!(trials >= 1, "need at least one trial");
    let config = read_config(&config)?;

    let truth = checks::check_truthfulness(&config, trials)?;
    println!(
        "{} truthfulness: {} trials, {} profitable, max advantage {:.3e}",
        status(truth.passed()),
        truth.trials,
        truth.profitable.len(),
        truth.max_advantage
    );
    for d in &truth.profitable {
        println!(
            "     seed {} user {} bid {} factor {:.4}: {:.6e} -> {:.6e}",
            d.seed, d.user, d.bid, d.factor, d.truthful_utility, d.misreport_utility
        );
    }

    let ir = checks::check_individual_rationality(&config, trials)?;
    println!(
        "{} individual rationality: {} winners, min utility {:.3e}, paid losers {}",
        status(ir.passed()),
        ir.winners,
        ir.min_utility,
        ir.paid_losers
    );

    let sandwich = checks::check_sandwich(&config, trials)?;
    println!(
        "{} sandwich: {} instances, {} failures, worst lpr/greedy {:.4}",
        status(sandwich.passed()),
        sandwich.instances,
        sandwich.failures.len(),
        sandwich.worst_ratio
    );
    for s in &sandwich.failures {
        println!("     seed {} N {}: {:?}", s.seed, s.users, s);
    }

    let mut audit = checks::check_dual_feasibility(&config, trials)?;
    for other in [&truth.audit, &ir.audit, &sandwich.audit] {
        audit.merge(other);
    }
    println!(
        "{} dual feasibility: {} allocations, {} infeasible, worst violation {:.3e}",
        status(audit.passed()),
        audit.allocations,
        audit.infeasible,
        audit.worst_violation
    );

    Ok(truth.passed() && ir.passed() && sandwich.passed() && audit.passed())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Gen { config, seed, out } => {
            let config = read_config(&config)?;
            let instance = generate_instance(&config, &Scenario::first_of(&config), seed)?;
            write_json(&out, &instance)?;
        }
        Command::Auction {
            instance,
            out,
            payment_rule,
        } => {
            let instance = read_instance(&instance)?;
            write_json(&out, &run_auction(&instance, payment_rule.into()))?;
        }
        Command::Sweep { config, out } => {
            let config = read_config(&config)?;
            let out = out
                .or_else(|| config.output.clone())
                .context("no --out given and the config has no output path")?;
            let rows = run_sweep(&config)?;
            let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            write_csv(&rows, BufWriter::new(file))?;
        }
        Command::Verify { config, trials } => return verify(config, trials),
        Command::Summarize { input, out } => {
            let file =
                File::open(&input).with_context(|| format!("opening {}", input.display()))?;
            let rows = read_csv(file)?;
            let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            write_summary(&summarize(&rows), BufWriter::new(file))?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
