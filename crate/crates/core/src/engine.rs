//! Engine specs (`cbr:2`, `graph`, `hybrid:0.3`, `cf:userknn:10`) and the
//! training structures they are built from.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::case::{compute_stats, CaseBase, CaseBaseStats};
use crate::cbr::{CbrConfig, CbrRecommender};
use crate::cf::{build_matrix, CfRecommender, CfVariant, InteractionMatrix};
use crate::config::EngineConfig;
use crate::error::{CaseBaseError, ConfigError, RecommendError};
use crate::graph::{build_process_graphs, GraphConfig, GraphRecommender, ProcessGraphs};
use crate::hybrid::{HybridConfig, HybridRecommender};
use crate::recommend::Recommender;
use crate::similarity::SimilarityContext;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EngineSpec {
    Cbr { top_n: Option<usize> },
    Graph,
    Hybrid { beta: Option<f64> },
    Cf { variant: CfVariant, k: Option<usize> },
}

impl EngineSpec {
    /// Parses a comma-separated list of engine specs.
    pub fn parse_list(list: &str) -> Result<Vec<EngineSpec>, ConfigError> {
        list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect()
    }

    /// Label with every parameter resolved against `config`.
    pub fn label(&self, config: &EngineConfig) -> String {
        match *self {
            EngineSpec::Cbr { top_n } => format!("cbr:{}", top_n.unwrap_or(config.cbr.top_n)),
            EngineSpec::Graph => "graph".into(),
            EngineSpec::Hybrid { beta } => format!("hybrid:{}", beta.unwrap_or(config.hybrid.beta)),
            EngineSpec::Cf { variant, k } => format!("cf:{variant}:{}", k.unwrap_or(config.cf.k)),
        }
    }

    /// Whether queries of this verbosity are outside the engine's domain.
    pub fn supports_verbosity(&self, verbosity: usize) -> bool {
        !matches!(self, EngineSpec::Cf { .. }) || verbosity > 0
    }

    pub fn build(&self, training: &TrainingStructures, config: &EngineConfig) -> Result<Box<dyn Recommender>, RecommendError> {
        Ok(match *self {
            EngineSpec::Cbr { top_n } => Box::new(training.cbr(config, top_n.unwrap_or(config.cbr.top_n))?),
            EngineSpec::Graph => Box::new(training.graph(config)?),
            EngineSpec::Hybrid { beta } => Box::new(training.hybrid(config, beta.unwrap_or(config.hybrid.beta))?),
            EngineSpec::Cf { variant, k } => Box::new(CfRecommender::new(
                Arc::clone(&training.matrix),
                variant,
                k.unwrap_or(config.cf.k),
                config.policy(),
            )?),
        })
    }
}

impl FromStr for EngineSpec {
    type Err = ConfigError;

    fn from_str(spec: &str) -> Result<Self, Self::Err> {
        let err = |message: String| ConfigError::EngineSpec { spec: spec.to_string(), message };
        let parts: Vec<&str> = spec.trim().split(':').collect();
        match parts.as_slice() {
            ["cbr"] => Ok(EngineSpec::Cbr { top_n: None }),
            ["cbr", n] => {
                let n: usize = n.parse().map_err(|e| err(format!("bad top_n: {e}")))?;
                if n == 0 {
                    return Err(err("top_n must be at least 1".into()));
                }
                Ok(EngineSpec::Cbr { top_n: Some(n) })
            }
            ["graph"] => Ok(EngineSpec::Graph),
            ["hybrid"] => Ok(EngineSpec::Hybrid { beta: None }),
            ["hybrid", b] => {
                let beta: f64 = b.parse().map_err(|e| err(format!("bad beta: {e}")))?;
                if !(beta > 0.0 && beta < 1.0) {
                    return Err(err("beta must be in (0, 1)".into()));
                }
                Ok(EngineSpec::Hybrid { beta: Some(beta) })
            }
            ["cf"] => Ok(EngineSpec::Cf { variant: CfVariant::UserKnn, k: None }),
            ["cf", v] => Ok(EngineSpec::Cf { variant: v.parse().map_err(err)?, k: None }),
            ["cf", v, k] => {
                let k: usize = k.parse().map_err(|e| err(format!("bad k: {e}")))?;
                if k == 0 {
                    return Err(err("k must be at least 1".into()));
                }
                Ok(EngineSpec::Cf { variant: v.parse().map_err(err)?, k: Some(k) })
            }
            _ => Err(err("expected cbr[:N], graph, hybrid[:beta] or cf[:userknn|itemknn[:k]]".into())),
        }
    }
}

impl fmt::Display for EngineSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineSpec::Cbr { top_n: Some(n) } => write!(f, "cbr:{n}"),
            EngineSpec::Cbr { top_n: None } => write!(f, "cbr"),
            EngineSpec::Graph => write!(f, "graph"),
            EngineSpec::Hybrid { beta: Some(b) } => write!(f, "hybrid:{b}"),
            EngineSpec::Hybrid { beta: None } => write!(f, "hybrid"),
            EngineSpec::Cf { variant, k: Some(k) } => write!(f, "cf:{variant}:{k}"),
            EngineSpec::Cf { variant, k: None } => write!(f, "cf:{variant}"),
        }
    }
}

/// Everything the engines learn from a training case base. Built once per
/// training set and shared by all engines evaluated on it.
#[derive(Debug, Clone)]
pub struct TrainingStructures {
    pub cases: CaseBase,
    pub stats: CaseBaseStats,
    pub similarity: Arc<SimilarityContext>,
    pub graphs: Arc<ProcessGraphs>,
    pub matrix: Arc<InteractionMatrix>,
}

#[derive(Serialize)]
struct Fingerprint<'a> {
    cases: crate::case::CaseBaseDocument,
    stats: &'a CaseBaseStats,
    goal_corpus: &'a crate::similarity::CorpusStats,
    element_corpus: &'a crate::similarity::CorpusStats,
    graphs: &'a ProcessGraphs,
    matrix: &'a InteractionMatrix,
}

impl TrainingStructures {
    pub fn build(cases: CaseBase, config: &EngineConfig) -> Result<Self, CaseBaseError> {
        let stats = compute_stats(&cases, config.stats.count)?;
        let similarity = Arc::new(SimilarityContext::build(&cases));
        let graphs = Arc::new(build_process_graphs(&cases));
        let matrix = Arc::new(build_matrix(&cases));
        Ok(Self { cases, stats, similarity, graphs, matrix })
    }

    /// SHA-256 over a canonical serialization of every training structure.
    pub fn fingerprint(&self) -> String {
        let fp = Fingerprint {
            cases: self.cases.to_document(),
            stats: &self.stats,
            goal_corpus: &self.similarity.goal_stats,
            element_corpus: &self.similarity.element_stats,
            graphs: &self.graphs,
            matrix: &self.matrix,
        };
        let bytes = serde_json::to_vec(&fp).expect("fingerprint serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn verbosity_threshold(&self, config: &EngineConfig) -> f64 {
        config.hybrid.verbosity_threshold.unwrap_or(self.stats.verbosity_threshold)
    }

    pub fn cbr(&self, config: &EngineConfig, top_n: usize) -> Result<CbrRecommender, RecommendError> {
        CbrRecommender::with_context(
            self.cases.clone(),
            Arc::clone(&self.similarity),
            CbrConfig { top_n, weights: config.weights, policy: config.policy() },
        )
    }

    pub fn graph(&self, config: &EngineConfig) -> Result<GraphRecommender, RecommendError> {
        GraphRecommender::with_graphs(
            Arc::clone(&self.graphs),
            GraphConfig {
                pagerank: config.pagerank(),
                industry_in_prior: config.graph.industry_in_prior,
                policy: config.policy(),
            },
        )
    }

    pub fn hybrid(&self, config: &EngineConfig, beta: f64) -> Result<HybridRecommender, RecommendError> {
        let hybrid = HybridConfig::new(beta, self.verbosity_threshold(config))?;
        Ok(HybridRecommender::new(self.cbr(config, config.cbr.top_n)?, self.graph(config)?, hybrid, config.policy()))
    }
}
