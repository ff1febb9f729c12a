mod model;

use std::path::PathBuf;
use std::process::ExitCode;

use adaptive_smc::exact;
use adaptive_smc::monitor::DEFAULT_CHECK_BOUND;
use adaptive_smc::reach::goal_mask;
use adaptive_smc::report::SCHEMA_VERSION;
use adaptive_smc::runner::DEFAULT_MAX_STEPS;
use adaptive_smc::{
    estimate_mp, verify_ltl, Decision, verify_reach, HypothesisSpec, MarkovChain, RunConfig, SampleCount, SmcError,
    VerificationReport,
};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use model::ModelArgs;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Diverged(String),
}

impl From<SmcError> for CliError {
    fn from(e: SmcError) -> Self {
        match e {
            SmcError::Diverged { .. } => CliError::Diverged(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "adaptive-smc", version, about = "Statistical model checking of Markov chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test whether the probability of reaching a label is above p.
    CheckReach {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        goal: String,
        #[command(flatten)]
        test: TestArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Test whether the probability of a Rabin-automaton property is above p.
    CheckLtl {
        #[command(flatten)]
        model: ModelArgs,
        /// Deterministic Rabin automaton in HOA format.
        #[arg(long)]
        hoa: PathBuf,
        #[command(flatten)]
        test: TestArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Confidence interval for the mean payoff.
    EstimateMp {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Per-path precision of each mean-payoff sample.
        #[arg(long, default_value_t = 0.08)]
        mperr: f64,
        /// Per-path error probability.
        #[arg(long, default_value_t = 0.011)]
        delta: f64,
        #[arg(long, conflicts_with = "interval_size")]
        n_samples: Option<u64>,
        /// Total interval width to aim for (used unless --n-samples is given).
        #[arg(long, default_value_t = 0.22)]
        interval_size: f64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Numerical ground truth for explicitly given chains.
    Exact {
        #[command(subcommand)]
        query: ExactQuery,
    },
    /// Write a generated chain as .tra/.lab/.rew/.init files.
    Gen {
        /// fig1:M, fig3:N, fig4:N,M, random:N,D,SEED or ergodic:N,FLOOR,SEED
        family: String,
        /// Output path prefix.
        #[arg(long)]
        out: PathBuf,
    },
    /// Reachability estimate with per-step termination probability p-term.
    Baseline {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        goal: String,
        #[arg(long)]
        p_term: f64,
        #[arg(long, default_value_t = 1000)]
        n_samples: u64,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Debug, Subcommand)]
enum ExactQuery {
    Reach {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        goal: String,
    },
    Mp {
        #[command(flatten)]
        model: ModelArgs,
    },
    Ltl {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        hoa: PathBuf,
    },
    /// Number of BSCCs and the size of the largest.
    Bsccs {
        #[command(flatten)]
        model: ModelArgs,
    },
}

#[derive(Debug, Args)]
struct TestArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    beta: f64,
    /// Per-path error bound (default: epsilon / 2).
    #[arg(long)]
    delta: Option<f64>,
}

impl TestArgs {
    fn spec(&self) -> Result<HypothesisSpec, CliError> {
        let delta = self.delta.unwrap_or(self.epsilon / 2.0);
        Ok(HypothesisSpec::new(self.p, self.epsilon, self.alpha, self.beta, delta)?)
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Steps between candidate recomputations.
    #[arg(long, default_value_t = DEFAULT_CHECK_BOUND)]
    check_bound: u64,
    /// Per-path step cap; hitting it aborts with exit code 2.
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: u64,
    /// Lower bound on the smallest transition probability (default: the
    /// chain's actual minimum; larger values are refused).
    #[arg(long)]
    pmin: Option<f64>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, CliError> {
        if self.threads == 0 || self.check_bound == 0 || self.max_steps == 0 {
            return Err(CliError::Input("--threads, --check-bound and --max-steps must be positive".into()));
        }
        Ok(RunConfig {
            master_seed: self.seed,
            threads: self.threads,
            check_bound: self.check_bound,
            max_steps: self.max_steps,
        })
    }

    /// Declares `--pmin` on the chain, refusing overestimates.
    fn pmin(&self, chain: MarkovChain) -> Result<(MarkovChain, f64), CliError> {
        match self.pmin {
            None => {
                let p = chain.actual_pmin();
                Ok((chain, p))
            }
            Some(p) => {
                let chain = chain
                    .with_declared_pmin(p)
                    .map_err(|e| CliError::Input(format!("--pmin: {e}")))?;
                Ok((chain, p))
            }
        }
    }
}

fn emit(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json"));
}

fn emit_report(report: &VerificationReport) {
    emit(&serde_json::to_value(report).expect("json"));
    let what = match (report.decision, report.estimate, report.interval) {
        (Some(Decision::AcceptH0), _, _) => "decision H0".into(),
        (Some(Decision::AcceptH1), _, _) => "decision H1".into(),
        (_, _, Some(i)) => format!("interval [{:.4}, {:.4}] (size {:.4})", i.lo, i.hi, i.size()),
        (_, Some(e), _) => format!("estimate {e:.4}"),
        _ => "no result".into(),
    };
    eprintln!(
        "{:?}: {what} from {} paths, mean length {:.1}, max length {}",
        report.property, report.n_samples, report.mean_path_length, report.max_path_length
    );
}

fn goal(chain: &MarkovChain, label: &str) -> Result<Vec<bool>, CliError> {
    Ok(goal_mask(chain, label)?)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::CheckReach { model, goal: label, test, run } => {
            let (chain, pmin) = run.pmin(model.load()?)?;
            let g = goal(&chain, &label)?;
            let report = verify_reach(&chain, &g, &test.spec()?, pmin, &run.config()?)?;
            emit_report(&report);
        }
        Command::CheckLtl { model, hoa, test, run } => {
            let (chain, pmin) = run.pmin(model.load()?)?;
            let dra = model::load_hoa(&hoa)?;
            let report = verify_ltl(&chain, &dra, &test.spec()?, pmin, &run.config()?)?;
            emit_report(&report);
        }
        Command::EstimateMp {
            model,
            alpha,
            mperr,
            delta,
            n_samples,
            interval_size,
            run,
        } => {
            let (chain, pmin) = run.pmin(model.load()?)?;
            let count = n_samples.map_or(SampleCount::TargetSize(interval_size), SampleCount::Fixed);
            let report = estimate_mp(&chain, alpha, mperr, delta, pmin, count, &run.config()?)?;
            emit_report(&report);
        }
        Command::Exact { query } => exact_query(query)?,
        Command::Gen { family, out } => {
            let chain = adaptive_smc::generators::from_spec(&family)?;
            let files = model::write_chain(&chain, &out)?;
            let names: Vec<String> = files.iter().map(|p| p.display().to_string()).collect();
            emit(&json!({
                "schema_version": SCHEMA_VERSION,
                "family": family,
                "n_states": chain.n_states(),
                "n_transitions": chain.n_transitions(),
                "files": names,
            }));
            eprintln!("{family}: {} states, {} transitions", chain.n_states(), chain.n_transitions());
        }
        Command::Baseline {
            model,
            goal: label,
            p_term,
            n_samples,
            run,
        } => {
            let chain = model.load()?;
            let report = exact::baseline_estimate(&chain, &label, p_term, n_samples, &run.config()?)?;
            emit_report(&report);
        }
    }
    Ok(())
}

fn exact_query(query: ExactQuery) -> Result<(), CliError> {
    let out = match query {
        ExactQuery::Reach { model, goal: label } => {
            let chain = model.load()?;
            let p = exact::exact_reachability(&chain, &goal(&chain, &label)?)?;
            eprintln!("P[reach {label}] = {p}");
            json!({ "schema_version": SCHEMA_VERSION, "query": "reach", "probability": p })
        }
        ExactQuery::Mp { model } => {
            let v = exact::exact_mp(&model.load()?)?;
            eprintln!("mean payoff = {v}");
            json!({ "schema_version": SCHEMA_VERSION, "query": "mp", "mean_payoff": v })
        }
        ExactQuery::Ltl { model, hoa } => {
            let chain = model.load()?;
            let p = exact::exact_ltl(&chain, &model::load_hoa(&hoa)?)?;
            eprintln!("P[property] = {p}");
            json!({ "schema_version": SCHEMA_VERSION, "query": "ltl", "probability": p })
        }
        ExactQuery::Bsccs { model } => {
            let chain = model.load()?;
            let inv = exact::bscc_inventory(&chain);
            eprintln!("BSCCs (count, max size): {inv}");
            json!({
                "schema_version": SCHEMA_VERSION,
                "query": "bsccs",
                "n_states": chain.n_states(),
                "count": inv.count,
                "max_size": inv.max_size,
                "summary": inv.to_string(),
            })
        }
    };
    emit(&out);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Diverged(msg)) => {
            eprintln!("diverged: {msg}");
            ExitCode::from(2)
        }
    }
}
