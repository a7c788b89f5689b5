//! Local similarity measures and their weighted global combination.
//!
//! | attribute     | measure                        | default weight |
//! |---------------|--------------------------------|----------------|
//! | industry      | taxonomy depth ratio           | 0.24           |
//! | goal          | TF-IDF cosine                  | 0.06           |
//! | target groups | Jaccard                        | 0.10           |
//! | elements      | TF-IDF cosine over name tokens | 0.60           |

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::case::{Case, CaseBase, IndustryTaxonomy};
use crate::error::{ConfigError, RecommendError};
use crate::recommend::Query;

pub const TOKENIZER_VERSION: &str = "casefold-alnum-min2/v1";

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeWeights {
    pub industry: f64,
    pub goal: f64,
    pub target_group: f64,
    pub elements: f64,
}

impl Default for AttributeWeights {
    fn default() -> Self {
        Self { industry: 0.24, goal: 0.06, target_group: 0.10, elements: 0.60 }
    }
}

impl AttributeWeights {
    pub fn new(industry: f64, goal: f64, target_group: f64, elements: f64) -> Result<Self, ConfigError> {
        let w = Self { industry, goal, target_group, elements };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (key, value) in [
            ("weights.industry", self.industry),
            ("weights.goal", self.goal),
            ("weights.target_group", self.target_group),
            ("weights.elements", self.elements),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ConfigError::invalid(key, format!("{value} is outside [0, 1]")));
            }
        }
        let sum = self.industry + self.goal + self.target_group + self.elements;
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(ConfigError::invalid("weights", format!("weights sum to {sum}, expected 1")));
        }
        Ok(())
    }

    /// Weighted sum of local similarities.
    pub fn combine(&self, local: &LocalSimilarities) -> f64 {
        self.industry * local.industry
            + self.goal * local.goal
            + self.target_group * local.target_group
            + self.elements * local.elements
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LocalSimilarities {
    pub industry: f64,
    pub goal: f64,
    pub target_group: f64,
    pub elements: f64,
}

/// Case-fold, split on non-alphanumerics, keep tokens of two or more chars.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2)
        .map(str::to_lowercase)
        .collect()
}

/// depth(lca) / max(depth(a), depth(b)); 1 when both are the same node.
pub fn taxonomy_similarity(a: &str, b: &str, taxonomy: &IndustryTaxonomy) -> Result<f64, RecommendError> {
    let da = taxonomy.depth(a).ok_or_else(|| RecommendError::UnknownIndustry(a.to_string()))?;
    let db = taxonomy.depth(b).ok_or_else(|| RecommendError::UnknownIndustry(b.to_string()))?;
    if a == b {
        return Ok(1.0);
    }
    let lca = taxonomy.lowest_common_ancestor(a, b).expect("resolved nodes share the root");
    let depth_lca = taxonomy.depth(lca).expect("lca resolves");
    Ok(depth_lca as f64 / da.max(db) as f64)
}

/// |a ∩ b| / |a ∪ b|, with two empty sets counting as identical.
pub fn jaccard_similarity<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusField {
    Goal,
    Elements,
}

/// Document frequencies over one field of a case base, one document per case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub document_frequency: BTreeMap<String, usize>,
    pub document_count: usize,
    pub tokenizer: String,
}

impl CorpusStats {
    pub fn df(&self, token: &str) -> usize {
        self.document_frequency.get(token).copied().unwrap_or(0)
    }

    pub fn idf(&self, token: &str) -> f64 {
        let n = self.document_count as f64;
        ((1.0 + n) / (1.0 + self.df(token) as f64)).ln() + 1.0
    }
}

/// Token sequence of a case field as used for TF-IDF.
pub fn field_tokens(case: &Case, field: CorpusField) -> Vec<String> {
    match field {
        CorpusField::Goal => tokenize(&case.goal),
        CorpusField::Elements => case.elements.names().flat_map(tokenize).collect(),
    }
}

pub fn build_corpus_stats(cb: &CaseBase, field: CorpusField) -> CorpusStats {
    let mut document_frequency = BTreeMap::new();
    for case in cb.cases() {
        let distinct: BTreeSet<String> = field_tokens(case, field).into_iter().collect();
        for token in distinct {
            *document_frequency.entry(token).or_insert(0) += 1;
        }
    }
    CorpusStats { document_frequency, document_count: cb.len(), tokenizer: TOKENIZER_VERSION.to_string() }
}

/// Sparse TF-IDF vector with its Euclidean norm.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TfIdfVector {
    weights: BTreeMap<String, f64>,
    norm: f64,
}

impl TfIdfVector {
    pub fn new<S: AsRef<str>>(tokens: &[S], stats: &CorpusStats) -> Self {
        let mut tf: BTreeMap<String, usize> = BTreeMap::new();
        for t in tokens {
            *tf.entry(t.as_ref().to_string()).or_insert(0) += 1;
        }
        let weights: BTreeMap<String, f64> =
            tf.into_iter().map(|(t, count)| { let w = count as f64 * stats.idf(&t); (t, w) }).collect();
        let norm = weights.values().map(|w| w * w).sum::<f64>().sqrt();
        Self { weights, norm }
    }

    pub fn is_zero(&self) -> bool {
        self.norm == 0.0
    }

    pub fn cosine(&self, other: &TfIdfVector) -> f64 {
        if self.is_zero() || other.is_zero() {
            return 0.0;
        }
        let (small, large) = if self.weights.len() <= other.weights.len() { (self, other) } else { (other, self) };
        let dot: f64 = small.weights.iter().filter_map(|(t, w)| large.weights.get(t).map(|v| w * v)).sum();
        (dot / (self.norm * other.norm)).clamp(0.0, 1.0)
    }
}

/// Cosine of raw-count TF × smoothed IDF vectors.
pub fn tfidf_similarity<S: AsRef<str>>(a: &[S], b: &[S], stats: &CorpusStats) -> f64 {
    TfIdfVector::new(a, stats).cosine(&TfIdfVector::new(b, stats))
}

/// Everything global similarity needs from the training case base.
#[derive(Debug, Clone)]
pub struct SimilarityContext {
    pub goal_stats: CorpusStats,
    pub element_stats: CorpusStats,
}

impl SimilarityContext {
    pub fn build(cb: &CaseBase) -> Self {
        Self {
            goal_stats: build_corpus_stats(cb, CorpusField::Goal),
            element_stats: build_corpus_stats(cb, CorpusField::Elements),
        }
    }
}

/// Per-attribute similarities between a query and a case of the same process.
pub fn local_similarities(
    query: &Query,
    case: &Case,
    ctx: &SimilarityContext,
    taxonomy: &IndustryTaxonomy,
) -> Result<LocalSimilarities, RecommendError> {
    if query.business_process != case.business_process {
        return Err(RecommendError::ProcessMismatch {
            query: query.business_process.clone(),
            case: case.business_process.clone(),
        });
    }
    let query_element_tokens: Vec<String> = query.chosen_elements.names().flat_map(tokenize).collect();
    Ok(LocalSimilarities {
        industry: taxonomy_similarity(&query.industry, &case.industry, taxonomy)?,
        goal: tfidf_similarity(&tokenize(&query.goal), &field_tokens(case, CorpusField::Goal), &ctx.goal_stats),
        target_group: jaccard_similarity(&query.target_groups, &case.target_groups),
        elements: tfidf_similarity(
            &query_element_tokens,
            &field_tokens(case, CorpusField::Elements),
            &ctx.element_stats,
        ),
    })
}

pub fn global_similarity(
    query: &Query,
    case: &Case,
    weights: &AttributeWeights,
    ctx: &SimilarityContext,
    taxonomy: &IndustryTaxonomy,
) -> Result<f64, RecommendError> {
    Ok(weights.combine(&local_similarities(query, case, ctx, taxonomy)?))
}

/// Precomputed TF-IDF vectors of a case base, for repeated retrieval.
#[derive(Debug, Clone)]
pub struct CaseVectors {
    pub goal: Vec<TfIdfVector>,
    pub elements: Vec<TfIdfVector>,
}

impl CaseVectors {
    pub fn build(cb: &CaseBase, ctx: &SimilarityContext) -> Self {
        let goal = cb.cases().iter().map(|c| TfIdfVector::new(&field_tokens(c, CorpusField::Goal), &ctx.goal_stats)).collect();
        let elements = cb
            .cases()
            .iter()
            .map(|c| TfIdfVector::new(&field_tokens(c, CorpusField::Elements), &ctx.element_stats))
            .collect();
        Self { goal, elements }
    }
}

/// Query-side vectors, computed once per query.
#[derive(Debug, Clone)]
pub struct QueryVectors {
    pub goal: TfIdfVector,
    pub elements: TfIdfVector,
}

impl QueryVectors {
    pub fn build(query: &Query, ctx: &SimilarityContext) -> Self {
        let element_tokens: Vec<String> = query.chosen_elements.names().flat_map(tokenize).collect();
        Self {
            goal: TfIdfVector::new(&tokenize(&query.goal), &ctx.goal_stats),
            elements: TfIdfVector::new(&element_tokens, &ctx.element_stats),
        }
    }
}
