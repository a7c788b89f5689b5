//! Engine configuration file (TOML).
//!
//! ```toml
//! include_query_elements = true
//!
//! [stats]
//! count = "all"            # or "kpi"
//!
//! [weights]
//! industry = 0.24
//! goal = 0.06
//! target_group = 0.10
//! elements = 0.60
//!
//! [cbr]
//! top_n = 2
//!
//! [graph]
//! teleport = 0.3
//! tolerance = 1e-8
//! max_iterations = 100
//! industry_in_prior = true
//!
//! [cf]
//! k = 10
//! variant = "userknn"
//!
//! [hybrid]
//! beta = 0.3
//! # verbosity_threshold = 14.0   # derived from the training case base when absent
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::case::CountMode;
use crate::cf::CfVariant;
use crate::error::ConfigError;
use crate::graph::PageRankConfig;
use crate::recommend::QueryElementPolicy;
use crate::similarity::AttributeWeights;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsSection {
    pub count: CountMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CbrSection {
    pub top_n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphSection {
    pub teleport: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub industry_in_prior: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CfSection {
    pub k: usize,
    pub variant: CfVariant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HybridSection {
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verbosity_threshold: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub include_query_elements: bool,
    pub stats: StatsSection,
    pub weights: AttributeWeights,
    pub cbr: CbrSection,
    pub graph: GraphSection,
    pub cf: CfSection,
    pub hybrid: HybridSection,
}

impl Default for EngineConfig {
    fn default() -> Self {
        let pr = PageRankConfig::default();
        Self {
            include_query_elements: true,
            stats: StatsSection { count: CountMode::All },
            weights: AttributeWeights::default(),
            cbr: CbrSection { top_n: 2 },
            graph: GraphSection {
                teleport: pr.teleport,
                tolerance: pr.tolerance,
                max_iterations: pr.max_iterations,
                industry_in_prior: true,
            },
            cf: CfSection { k: 10, variant: CfVariant::UserKnn },
            hybrid: HybridSection { beta: 0.3, verbosity_threshold: None },
        }
    }
}

macro_rules! section_defaults {
    ($($ty:ident => $field:ident),*) => {
        $(impl Default for $ty {
            fn default() -> Self {
                EngineConfig::default().$field
            }
        })*
    };
}

section_defaults!(StatsSection => stats, CbrSection => cbr, GraphSection => graph, CfSection => cf, HybridSection => hybrid);

impl EngineConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: EngineConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn policy(&self) -> QueryElementPolicy {
        QueryElementPolicy::from_include_flag(self.include_query_elements)
    }

    pub fn pagerank(&self) -> PageRankConfig {
        PageRankConfig {
            teleport: self.graph.teleport,
            tolerance: self.graph.tolerance,
            max_iterations: self.graph.max_iterations,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.weights.validate()?;
        if self.cbr.top_n == 0 {
            return Err(ConfigError::invalid("cbr.top_n", "must be at least 1"));
        }
        if !(self.graph.teleport > 0.0 && self.graph.teleport <= 1.0) {
            return Err(ConfigError::invalid("graph.teleport", "must be in (0, 1]"));
        }
        if !(self.graph.tolerance > 0.0) {
            return Err(ConfigError::invalid("graph.tolerance", "must be positive"));
        }
        if self.graph.max_iterations == 0 {
            return Err(ConfigError::invalid("graph.max_iterations", "must be at least 1"));
        }
        if self.cf.k == 0 {
            return Err(ConfigError::invalid("cf.k", "must be at least 1"));
        }
        if !(self.hybrid.beta > 0.0 && self.hybrid.beta < 1.0) {
            return Err(ConfigError::invalid("hybrid.beta", "must be in (0, 1)"));
        }
        if let Some(t) = self.hybrid.verbosity_threshold {
            if !(t > 0.0 && t.is_finite()) {
                return Err(ConfigError::invalid("hybrid.verbosity_threshold", "must be positive"));
            }
        }
        Ok(())
    }
}
