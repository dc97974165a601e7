//! A project bundle: the five input documents of one model.

use std::path::{Path, PathBuf};

use cbpmn_core::{CbpmnModel, Scenario};

use crate::format::{self, LoadError};

/// Paths of the input documents. [`BundlePaths::in_dir`] uses the
/// conventional file names; each path can be overridden on its own.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundlePaths {
    pub model: PathBuf,
    pub graph: PathBuf,
    pub fragments: PathBuf,
    pub rules: PathBuf,
    pub scenario: PathBuf,
}

impl BundlePaths {
    pub const MODEL: &'static str = "model.toml";
    pub const GRAPH: &'static str = "graph.toml";
    pub const FRAGMENTS: &'static str = "fragments.toml";
    pub const RULES: &'static str = "rules.toml";
    pub const SCENARIO: &'static str = "scenario.toml";

    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        BundlePaths {
            model: dir.join(Self::MODEL),
            graph: dir.join(Self::GRAPH),
            fragments: dir.join(Self::FRAGMENTS),
            rules: dir.join(Self::RULES),
            scenario: dir.join(Self::SCENARIO),
        }
    }
}

/// Model name and the assembled model, without the scenario.
pub fn load_model(paths: &BundlePaths) -> Result<(String, CbpmnModel), LoadError> {
    let decl = format::load_model(&paths.model)?;
    let graph = format::load_graph(&paths.graph)?;
    let repository = format::load_repository(&paths.fragments)?;
    let rules = format::load_rules(&paths.rules)?;
    let model = CbpmnModel {
        graph,
        chain: decl.chain,
        repository,
        rules,
        ideal: decl.ideal,
        gateway_branches: decl.gateway_branches,
    };
    Ok((decl.name, model))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub name: String,
    pub model: CbpmnModel,
    pub scenario: Scenario,
}

/// Reads and parses every document; nothing runs before all succeed.
pub fn load(paths: &BundlePaths) -> Result<Bundle, LoadError> {
    let (name, model) = load_model(paths)?;
    let scenario = format::load_scenario(&paths.scenario)?;
    Ok(Bundle {
        name,
        model,
        scenario,
    })
}
