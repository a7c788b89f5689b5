//! Leave-one-case-out evaluation: hold out each case, train every engine on
//! the rest, query with the held-out demographics plus a growing random
//! sample of its KPIs, and score the rankings by average precision against
//! the held-out case's elements.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::case::{compute_stats, Case, CaseBase, CaseBaseStats, ElementKind};
use crate::config::EngineConfig;
use crate::engine::{EngineSpec, TrainingStructures};
use crate::error::{EvalError, RecommendError};
use crate::recommend::{Query, QueryElementPolicy, Ranking};

pub const DEFAULT_VERBOSITY_LEVELS: [usize; 8] = [0, 5, 10, 15, 20, 30, 40, 100];

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub verbosity_levels: Vec<usize>,
    pub seed: u64,
    pub engines: Vec<EngineSpec>,
    pub engine_config: EngineConfig,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl EvalConfig {
    pub fn new(engines: Vec<EngineSpec>, seed: u64) -> Self {
        Self {
            verbosity_levels: DEFAULT_VERBOSITY_LEVELS.to_vec(),
            seed,
            engines,
            engine_config: EngineConfig::default(),
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        if self.engines.is_empty() {
            return Err(EvalError::NoEngines);
        }
        if self.verbosity_levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(EvalError::UnorderedLevels);
        }
        self.engine_config.validate()?;
        Ok(())
    }

    pub fn engine_labels(&self) -> Vec<String> {
        self.engines.iter().map(|e| e.label(&self.engine_config)).collect()
    }

    /// SHA-256 of the canonical run configuration.
    pub fn config_hash(&self) -> String {
        #[derive(Serialize)]
        struct Canonical<'a> {
            levels: &'a [usize],
            seed: u64,
            engines: Vec<String>,
            config: &'a EngineConfig,
        }
        let c = Canonical {
            levels: &self.verbosity_levels,
            seed: self.seed,
            engines: self.engine_labels(),
            config: &self.engine_config,
        };
        hex::encode(Sha256::digest(serde_json::to_vec(&c).expect("config serializes")))
    }
}

/// Random generator for the queries built from the case at `case_index`.
pub fn query_rng(seed: u64, case_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(case_index as u64);
    rng
}

/// The case's demographics plus up to `verbosity` of its KPIs, sampled without
/// replacement. With the same generator state, a larger verbosity yields a
/// superset of the smaller one's elements.
pub fn make_query(case: &Case, verbosity: usize, rng: &mut ChaCha8Rng) -> Query {
    let mut query = Query::from_case_demographics(case);
    if verbosity == 0 {
        return query;
    }
    let mut kpis: Vec<_> = case.elements.iter().filter(|e| e.kind == ElementKind::Kpi).cloned().collect();
    kpis.shuffle(rng);
    for e in kpis.into_iter().take(verbosity) {
        query.add_element(e);
    }
    query
}

/// Mean of precision@k over the ranks k that hold a relevant element,
/// divided by the number of relevant elements. `None` for an empty relevant set.
pub fn average_precision(ranking: &Ranking, relevant: &BTreeSet<String>) -> Option<f64> {
    if relevant.is_empty() {
        return None;
    }
    let mut hits = 0usize;
    let mut total = 0.0;
    for (rank, name) in ranking.names().enumerate() {
        if relevant.contains(name) {
            hits += 1;
            total += hits as f64 / (rank + 1) as f64;
        }
    }
    Some(total / relevant.len() as f64)
}

/// One (case, verbosity, engine) outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cell {
    Ap(f64),
    /// The engine cannot answer this query (e.g. CF without query elements).
    Absent,
    /// Nothing left to retrieve: the relevant set is empty.
    Skipped,
}

impl Cell {
    pub fn ap(self) -> Option<f64> {
        match self {
            Cell::Ap(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub case_id: String,
    /// `[level][engine]`
    pub cells: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub seed: u64,
    pub config_hash: String,
    pub relevance_mode: QueryElementPolicy,
    pub case_count: usize,
    pub avg_case_size: f64,
    pub verbosity_threshold: f64,
    pub process_counts: BTreeMap<String, usize>,
    /// `[level]`: cases skipped because their relevant set was empty.
    pub skipped: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub engines: Vec<String>,
    pub levels: Vec<usize>,
    /// `[level][engine]`; `None` where no case produced an AP value.
    pub map: Vec<Vec<Option<f64>>>,
    pub cases: Vec<CaseResult>,
    pub metadata: ReportMetadata,
}

impl EvalReport {
    pub fn engine_index(&self, label: &str) -> Option<usize> {
        self.engines.iter().position(|e| e == label)
    }

    pub fn level_index(&self, level: usize) -> Option<usize> {
        self.levels.iter().position(|&l| l == level)
    }

    pub fn map_at(&self, engine: &str, level: usize) -> Option<f64> {
        self.map[self.level_index(level)?][self.engine_index(engine)?]
    }

    /// MAP series of one engine across levels.
    pub fn map_series(&self, engine: &str) -> Vec<Option<f64>> {
        match self.engine_index(engine) {
            Some(e) => self.map.iter().map(|row| row[e]).collect(),
            None => Vec::new(),
        }
    }

    fn metadata_lines(&self) -> Vec<String> {
        let m = &self.metadata;
        vec![
            format!("seed: {}", m.seed),
            format!("config_hash: {}", m.config_hash),
            format!(
                "relevance_mode: {}",
                match m.relevance_mode {
                    QueryElementPolicy::Include => "all",
                    QueryElementPolicy::Exclude => "exclude-query",
                }
            ),
            format!("cases: {}", m.case_count),
            format!("avg_case_size: {:.6}", m.avg_case_size),
            format!("verbosity_threshold: {:.6}", m.verbosity_threshold),
            format!(
                "processes: {}",
                m.process_counts.iter().map(|(p, n)| format!("{p}={n}")).collect::<Vec<_>>().join(" ")
            ),
            format!("skipped: {}", m.skipped.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")),
        ]
    }

    fn format_cell(v: Option<f64>) -> String {
        v.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"))
    }

    /// Comma-separated table (rows = verbosity, columns = engines) preceded by
    /// `#`-prefixed metadata lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for line in self.metadata_lines() {
            let _ = writeln!(out, "# {line}");
        }
        let _ = writeln!(out, "verbosity,{}", self.engines.join(","));
        for (level, row) in self.levels.iter().zip(&self.map) {
            let cells: Vec<String> = row.iter().map(|&v| Self::format_cell(v)).collect();
            let _ = writeln!(out, "{level},{}", cells.join(","));
        }
        out
    }

    /// Fixed-width table followed by the metadata block.
    pub fn to_pretty(&self) -> String {
        let header: Vec<String> = std::iter::once("verbosity".to_string()).chain(self.engines.iter().cloned()).collect();
        let rows: Vec<Vec<String>> = self
            .levels
            .iter()
            .zip(&self.map)
            .map(|(level, row)| std::iter::once(level.to_string()).chain(row.iter().map(|&v| Self::format_cell(v))).collect())
            .collect();
        let widths: Vec<usize> = (0..header.len())
            .map(|c| rows.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
            .collect();
        let fmt_row = |r: &[String]| -> String {
            r.iter().zip(&widths).map(|(cell, w)| format!("{cell:>w$}")).collect::<Vec<_>>().join("  ")
        };
        let mut out = String::new();
        let _ = writeln!(out, "{}", fmt_row(&header));
        let _ = writeln!(out, "{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "));
        for r in &rows {
            let _ = writeln!(out, "{}", fmt_row(r));
        }
        out.push('\n');
        for line in self.metadata_lines() {
            let _ = writeln!(out, "{line}");
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Training structures for the run that holds out `held_out`.
pub fn training_for_holdout(cb: &CaseBase, held_out: usize, config: &EngineConfig) -> Result<TrainingStructures, EvalError> {
    let training = cb.without(held_out).ok_or(EvalError::TooFewCases(cb.len()))?;
    Ok(TrainingStructures::build(training, config)?)
}

fn relevant_set(case: &Case, query: &Query, policy: QueryElementPolicy) -> BTreeSet<String> {
    case.elements
        .names()
        .filter(|n| policy == QueryElementPolicy::Include || !query.chosen_elements.contains(n))
        .map(str::to_string)
        .collect()
}

fn evaluate_case(cb: &CaseBase, index: usize, cfg: &EvalConfig) -> Result<CaseResult, EvalError> {
    let case = &cb.cases()[index];
    let training = training_for_holdout(cb, index, &cfg.engine_config)?;
    let engines: Vec<Option<Box<dyn crate::recommend::Recommender>>> = cfg
        .engines
        .iter()
        .map(|spec| match spec.build(&training, &cfg.engine_config) {
            Ok(e) => Some(e),
            Err(err) => {
                log::warn!("engine {spec} unavailable for hold-out {:?}: {err}", case.id);
                None
            }
        })
        .collect();
    let policy = cfg.engine_config.policy();
    let base_rng = query_rng(cfg.seed, index);
    let mut cells = Vec::with_capacity(cfg.verbosity_levels.len());
    for &level in &cfg.verbosity_levels {
        let query = make_query(case, level, &mut base_rng.clone());
        let relevant = relevant_set(case, &query, policy);
        let row = cfg
            .engines
            .iter()
            .zip(&engines)
            .map(|(spec, engine)| {
                let Some(engine) = engine.as_ref().filter(|_| spec.supports_verbosity(query.verbosity())) else {
                    return Cell::Absent;
                };
                if relevant.is_empty() {
                    return Cell::Skipped;
                }
                match engine.recommend(&query) {
                    Ok(ranking) => Cell::Ap(average_precision(&ranking, &relevant).expect("relevant set is non-empty")),
                    Err(RecommendError::UnsupportedQuery(_)) => Cell::Absent,
                    Err(err) => {
                        log::warn!("{} failed on hold-out {:?} at verbosity {level}: {err}", spec, case.id);
                        Cell::Absent
                    }
                }
            })
            .collect();
        cells.push(row);
    }
    Ok(CaseResult { case_id: case.id.clone(), cells })
}

#[cfg(feature = "parallel")]
fn evaluate_all(cb: &CaseBase, cfg: &EvalConfig) -> Result<Vec<CaseResult>, EvalError> {
    use rayon::prelude::*;
    let run = || (0..cb.len()).into_par_iter().map(|i| evaluate_case(cb, i, cfg)).collect::<Result<Vec<_>, _>>();
    match cfg.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(err) => {
                log::warn!("could not build a {n}-thread pool ({err}); using the global pool");
                run()
            }
        },
        None => run(),
    }
}

#[cfg(not(feature = "parallel"))]
fn evaluate_all(cb: &CaseBase, cfg: &EvalConfig) -> Result<Vec<CaseResult>, EvalError> {
    (0..cb.len()).map(|i| evaluate_case(cb, i, cfg)).collect()
}

pub fn leave_one_out(cb: &CaseBase, cfg: &EvalConfig) -> Result<EvalReport, EvalError> {
    if cb.len() < 2 {
        return Err(EvalError::TooFewCases(cb.len()));
    }
    cfg.validate()?;
    let cases = evaluate_all(cb, cfg)?;
    let n_levels = cfg.verbosity_levels.len();
    let n_engines = cfg.engines.len();
    let mut map = vec![vec![None; n_engines]; n_levels];
    let mut skipped = vec![0; n_levels];
    for l in 0..n_levels {
        if cases.iter().any(|c| c.cells[l].contains(&Cell::Skipped)) {
            skipped[l] = cases.iter().filter(|c| c.cells[l].contains(&Cell::Skipped)).count();
        }
        for (e, slot) in map[l].iter_mut().enumerate() {
            let values: Vec<f64> = cases.iter().filter_map(|c| c.cells[l][e].ap()).collect();
            if !values.is_empty() {
                *slot = Some(values.iter().sum::<f64>() / values.len() as f64);
            }
        }
    }
    let stats: CaseBaseStats = compute_stats(cb, cfg.engine_config.stats.count)?;
    Ok(EvalReport {
        engines: cfg.engine_labels(),
        levels: cfg.verbosity_levels.clone(),
        map,
        cases,
        metadata: ReportMetadata {
            seed: cfg.seed,
            config_hash: cfg.config_hash(),
            relevance_mode: cfg.engine_config.policy(),
            case_count: cb.len(),
            avg_case_size: stats.avg_case_size,
            verbosity_threshold: cfg.engine_config.hybrid.verbosity_threshold.unwrap_or(stats.verbosity_threshold),
            process_counts: stats.process_counts,
            skipped,
        },
    })
}
