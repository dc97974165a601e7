//! The subcommands as library functions. Each returns the text meant for
//! standard output; files are written only on success of the step that
//! produces them.

use std::fs;
use std::path::{Path, PathBuf};

use cbpmn_core::graph::ValidationReport;
use cbpmn_core::metrics::{
    execution_time, halstead, halstead_counts, structural_metrics, Baseline, CostParams,
    MetricsError,
};
use cbpmn_core::reasoning::{evaluate, parse_query, ParseError, ReasoningError};
use cbpmn_core::verify::{explore, translate_with, VerifyError};
use cbpmn_core::{run_instance, AdaptationTrace, CbpmnModel, ContextualSituation, EngineError};
use thiserror::Error;

use crate::bundle::{self, Bundle, BundlePaths};
use crate::format::{self, LoadError};
use crate::report::{edge_list, trace_log, MetricsReport, Summary, VerifyReport};

pub const TRACE_LOG: &str = "trace.log";
pub const SUMMARY_JSON: &str = "summary.json";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("{} finding(s)", .0.findings.len())]
    Invalid(ValidationReport),
    #[error("query: {0}")]
    Query(#[from] ParseError),
    #[error("invalid cost parameters: {0}")]
    Costs(#[from] MetricsError),
    #[error("run: {0}")]
    Engine(#[from] EngineError),
    #[error("verify: {0}")]
    Verify(#[from] VerifyError),
    #[error("query: {0}")]
    Reasoning(ReasoningError),
    #[error("{}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    /// A verification property does not hold; carries the report text.
    #[error("verification failed\n{0}")]
    Property(String),
}

impl CliError {
    /// 1 validation, 2 runtime, 3 verification property.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Load(_) | CliError::Invalid(_) | CliError::Query(_) | CliError::Costs(_) => 1,
            CliError::Engine(_)
            | CliError::Verify(_)
            | CliError::Reasoning(_)
            | CliError::Write { .. } => 2,
            CliError::Property(_) => 3,
        }
    }

    /// Detail lines printed after the headline.
    pub fn details(&self) -> Vec<String> {
        match self {
            CliError::Invalid(r) => r.findings.iter().map(|f| f.to_string()).collect(),
            _ => Vec::new(),
        }
    }
}

impl From<ReasoningError> for CliError {
    fn from(e: ReasoningError) -> Self {
        match e {
            ReasoningError::Parse(p) => CliError::Query(p),
            other => CliError::Reasoning(other),
        }
    }
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    let wrap = |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(wrap)?;
    }
    fs::write(path, text).map_err(wrap)
}

fn checked(model: &CbpmnModel) -> Result<(), CliError> {
    let report = model.validate();
    if report.is_empty() {
        Ok(())
    } else {
        Err(CliError::Invalid(report))
    }
}

/// Loads every document and runs all validators.
pub fn validate(paths: &BundlePaths) -> Result<String, CliError> {
    let b = bundle::load(paths)?;
    checked(&b.model)?;
    Ok(format!(
        "{}: valid ({} activities, {} rules, {} snapshots)\n",
        b.name,
        b.model.chain.len(),
        b.model.rules.len(),
        b.scenario.vectors().len()
    ))
}

/// Loads and validates a bundle, then runs its scenario.
pub fn execute(paths: &BundlePaths) -> Result<(Bundle, AdaptationTrace), CliError> {
    let b = bundle::load(paths)?;
    checked(&b.model)?;
    let trace = run_instance(&b.model, &b.scenario)?;
    Ok((b, trace))
}

/// Runs the scenario and writes `trace.log` and `summary.json` into `out`.
pub fn run(paths: &BundlePaths, out: &Path) -> Result<String, CliError> {
    let (b, trace) = execute(paths)?;
    let summary = Summary::new(&b.name, &trace);
    write(&out.join(TRACE_LOG), &trace_log(&trace))?;
    write(&out.join(SUMMARY_JSON), &summary.to_json())?;
    Ok(summary.to_text())
}

/// The declared model, or the adapted one when `adapted` is set.
fn subject_model(paths: &BundlePaths, adapted: bool) -> Result<CbpmnModel, CliError> {
    if adapted {
        let (b, trace) = execute(paths)?;
        Ok(b.model.adapted(&trace))
    } else {
        let (_, model) = bundle::load_model(paths)?;
        checked(&model)?;
        Ok(model)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyOptions {
    pub adapted: bool,
    pub limit: usize,
    pub tasks: usize,
    pub json: Option<PathBuf>,
    pub edges: Option<PathBuf>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            adapted: false,
            limit: 100_000,
            tasks: cbpmn_core::verify::DEFAULT_TASKS,
            json: None,
            edges: None,
        }
    }
}

pub fn verify(paths: &BundlePaths, opts: &VerifyOptions) -> Result<String, CliError> {
    let model = subject_model(paths, opts.adapted)?;
    let net = translate_with(&model, opts.tasks)?;
    let space = explore(&net, &net.initial, opts.limit)?;
    let report = VerifyReport::new(&net, &space);
    if let Some(p) = &opts.json {
        write(p, &report.to_json())?;
    }
    if let Some(p) = &opts.edges {
        write(p, &edge_list(&net, &space))?;
    }
    let text = report.to_text();
    if report.passed() {
        Ok(text)
    } else {
        Err(CliError::Property(text))
    }
}

/// Cost flags; unset ones default to one unit, and the activity count to
/// the measured chain's length.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostOverrides {
    pub activities: Option<u64>,
    pub activity: Option<f64>,
    pub fragment: Option<f64>,
    pub context_model: Option<f64>,
    pub throw_activity: Option<f64>,
    pub catch_context: Option<f64>,
}

impl CostOverrides {
    pub fn resolve(&self, chain_len: usize) -> CostParams {
        let mut p = CostParams::unit(self.activities.unwrap_or(chain_len as u64));
        p.activity = self.activity.unwrap_or(p.activity);
        p.fragment = self.fragment.unwrap_or(p.fragment);
        p.context_model = self.context_model.unwrap_or(p.context_model);
        p.throw_activity = self.throw_activity.unwrap_or(p.throw_activity);
        p.catch_context = self.catch_context.unwrap_or(p.catch_context);
        p
    }
}

pub fn metrics_report(
    model: &CbpmnModel,
    baseline: Baseline,
    costs: &CostOverrides,
) -> Result<MetricsReport, CliError> {
    let costs = costs.resolve(model.chain.len());
    let counts = halstead_counts(model);
    Ok(MetricsReport {
        format: "cbpmn-metrics",
        version: format::VERSION,
        execution_time: execution_time(&costs)?,
        costs,
        structure: structural_metrics(model, baseline),
        halstead_counts: counts,
        halstead: halstead(&counts)?,
    })
}

pub fn metrics(
    paths: &BundlePaths,
    adapted: bool,
    costs: &CostOverrides,
    json: Option<&Path>,
) -> Result<String, CliError> {
    let (_, declared) = bundle::load_model(paths)?;
    checked(&declared)?;
    let baseline = Baseline::of(&declared);
    let model = subject_model(paths, adapted)?;
    let report = metrics_report(&model, baseline, costs)?;
    if let Some(p) = json {
        write(p, &report.to_json())?;
    }
    Ok(report.to_text())
}

/// Folds every snapshot of a scenario-format file into one situation.
pub fn load_situation(path: &Path) -> Result<ContextualSituation, CliError> {
    let scenario = format::load_scenario(path)?;
    let mut cs = ContextualSituation::empty();
    for v in scenario.vectors() {
        cs = cs
            .advance(v)
            .map_err(|e| CliError::Engine(EngineError::Scenario(e)))?;
    }
    Ok(cs)
}

pub fn query(cs_file: &Path, query: &str) -> Result<String, CliError> {
    let q = parse_query(query)?;
    let cs = load_situation(cs_file)?;
    let result = evaluate(&q, &cs)?;
    Ok(format!("{result}\n"))
}
