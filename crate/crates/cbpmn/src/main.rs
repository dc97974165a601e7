use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cbpmn::commands::{self, CostOverrides, VerifyOptions};
use cbpmn::{BundlePaths, CliError};

/// Context-aware business process models: validate, run, verify, measure
/// and query.
#[derive(Debug, Parser)]
#[command(name = "cbpmn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct BundleArgs {
    /// Directory holding model.toml, graph.toml, fragments.toml, rules.toml
    /// and scenario.toml.
    #[arg(long, short, default_value = ".")]
    bundle: PathBuf,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    fragments: Option<PathBuf>,
    #[arg(long)]
    rules: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<PathBuf>,
}

impl BundleArgs {
    fn paths(&self) -> BundlePaths {
        let mut p = BundlePaths::in_dir(&self.bundle);
        let pick = |slot: &mut PathBuf, o: &Option<PathBuf>| {
            if let Some(o) = o {
                *slot = o.clone();
            }
        };
        pick(&mut p.model, &self.model);
        pick(&mut p.graph, &self.graph);
        pick(&mut p.fragments, &self.fragments);
        pick(&mut p.rules, &self.rules);
        pick(&mut p.scenario, &self.scenario);
        p
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse every document and run all validators.
    Validate(BundleArgs),
    /// Run the scenario; writes trace.log and summary.json.
    Run {
        #[command(flatten)]
        bundle: BundleArgs,
        /// Output directory.
        #[arg(long, short, default_value = "cbpmn-out")]
        out: PathBuf,
    },
    /// Translate the model into a net and explore its state space.
    Verify {
        #[command(flatten)]
        bundle: BundleArgs,
        /// Run the scenario first and verify the adapted chain.
        #[arg(long)]
        adapted: bool,
        /// Maximum number of markings to explore.
        #[arg(long, default_value_t = 100_000)]
        limit: usize,
        /// Tasks generated per activity.
        #[arg(long, default_value_t = cbpmn_core::verify::DEFAULT_TASKS)]
        tasks: usize,
        /// Write the report document (JSON) here.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Write the state space as an edge list here.
        #[arg(long)]
        edges: Option<PathBuf>,
    },
    /// Execution-time estimate and complexity measures.
    Metrics {
        #[command(flatten)]
        bundle: BundleArgs,
        /// Measure the chain the scenario adapts to.
        #[arg(long)]
        adapted: bool,
        /// Activity count n; defaults to the chain length.
        #[arg(long)]
        activities: Option<u64>,
        #[arg(long)]
        t_activity: Option<f64>,
        #[arg(long)]
        t_fragment: Option<f64>,
        #[arg(long)]
        t_context_model: Option<f64>,
        #[arg(long)]
        t_throw: Option<f64>,
        #[arg(long)]
        t_catch: Option<f64>,
        /// Write the report document (JSON) here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Evaluate a predicate query over a contextual situation.
    Query {
        /// Scenario-format file; its snapshots are folded into one situation.
        #[arg(long)]
        cs: PathBuf,
        query: String,
    },
}

fn dispatch(cmd: Command) -> Result<String, CliError> {
    match cmd {
        Command::Validate(b) => commands::validate(&b.paths()),
        Command::Run { bundle, out } => commands::run(&bundle.paths(), &out),
        Command::Verify {
            bundle,
            adapted,
            limit,
            tasks,
            json,
            edges,
        } => commands::verify(
            &bundle.paths(),
            &VerifyOptions {
                adapted,
                limit,
                tasks,
                json,
                edges,
            },
        ),
        Command::Metrics {
            bundle,
            adapted,
            activities,
            t_activity,
            t_fragment,
            t_context_model,
            t_throw,
            t_catch,
            json,
        } => commands::metrics(
            &bundle.paths(),
            adapted,
            &CostOverrides {
                activities,
                activity: t_activity,
                fragment: t_fragment,
                context_model: t_context_model,
                throw_activity: t_throw,
                catch_context: t_catch,
            },
            json.as_deref(),
        ),
        Command::Query { cs, query } => commands::query(&cs, &query),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            for d in e.details() {
                eprintln!("  {d}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
