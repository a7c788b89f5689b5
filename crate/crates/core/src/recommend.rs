//! Types shared by every recommender: the query, the ranking and the
//! [`Recommender`] contract.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::case::{Case, ElementSet, SolutionElement, TargetGroup};
use crate::error::RecommendError;

/// A (partial) case used as a probe. Its verbosity is the number of chosen
/// elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub industry: String,
    pub business_process: String,
    #[serde(default)]
    pub goal: String,
    #[serde(default)]
    pub target_groups: BTreeSet<TargetGroup>,
    #[serde(default)]
    pub chosen_elements: ElementSet,
}

impl Query {
    pub fn new(industry: impl Into<String>, business_process: impl Into<String>) -> Self {
        Self {
            industry: industry.into(),
            business_process: business_process.into(),
            goal: String::new(),
            target_groups: BTreeSet::new(),
            chosen_elements: ElementSet::new(),
        }
    }

    /// The demographics of `case` with no chosen elements.
    pub fn from_case_demographics(case: &Case) -> Self {
        Self {
            industry: case.industry.clone(),
            business_process: case.business_process.clone(),
            goal: case.goal.clone(),
            target_groups: case.target_groups.clone(),
            chosen_elements: ElementSet::new(),
        }
    }

    pub fn with_goal(mut self, goal: impl Into<String>) -> Self {
        self.goal = goal.into();
        self
    }

    pub fn with_target_groups(mut self, groups: impl IntoIterator<Item = TargetGroup>) -> Self {
        self.target_groups = groups.into_iter().collect();
        self
    }

    pub fn with_elements(mut self, elements: impl IntoIterator<Item = SolutionElement>) -> Self {
        for e in elements {
            self.chosen_elements.insert(e);
        }
        self
    }

    pub fn verbosity(&self) -> usize {
        self.chosen_elements.len()
    }

    pub fn add_element(&mut self, element: SolutionElement) -> bool {
        self.chosen_elements.insert(element)
    }
}

/// Whether elements already in the query may appear in a ranking.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryElementPolicy {
    #[default]
    Include,
    Exclude,
}

impl QueryElementPolicy {
    pub fn from_include_flag(include: bool) -> Self {
        if include {
            Self::Include
        } else {
            Self::Exclude
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredElement {
    pub element: String,
    pub score: f64,
}

fn rank_order(a: &ScoredElement, b: &ScoredElement) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.element.cmp(&b.element))
}

/// Elements sorted by descending score, ties broken by ascending name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ranking(Vec<ScoredElement>);

impl Ranking {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Builds a ranking from per-element scores. Non-finite scores are dropped.
    pub fn from_scores<I, S>(scores: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut merged: BTreeMap<String, f64> = BTreeMap::new();
        for (name, score) in scores {
            let name = name.into();
            if !score.is_finite() {
                log::warn!("dropping non-finite score for {name:?}");
                continue;
            }
            merged.insert(name, score);
        }
        let mut entries: Vec<ScoredElement> =
            merged.into_iter().map(|(element, score)| ScoredElement { element, score }).collect();
        entries.sort_by(rank_order);
        Self(entries)
    }

    pub fn entries(&self) -> &[ScoredElement] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ScoredElement> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|e| e.element.as_str())
    }

    pub fn score_of(&self, name: &str) -> Option<f64> {
        self.0.iter().find(|e| e.element == name).map(|e| e.score)
    }

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        self.0.iter().map(|e| (e.element.clone(), e.score)).collect()
    }

    pub fn truncated(mut self, limit: usize) -> Self {
        self.0.truncate(limit);
        self
    }

    pub fn retain(mut self, mut keep: impl FnMut(&ScoredElement) -> bool) -> Self {
        self.0.retain(|e| keep(e));
        self
    }

    pub fn without_query_elements(self, query: &Query) -> Self {
        self.retain(|e| !query.chosen_elements.contains(&e.element))
    }

    /// Applies the query-element policy.
    pub fn apply_policy(self, query: &Query, policy: QueryElementPolicy) -> Self {
        match policy {
            QueryElementPolicy::Include => self,
            QueryElementPolicy::Exclude => self.without_query_elements(query),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("ranking serializes")
    }
}

impl<'a> IntoIterator for &'a Ranking {
    type Item = &'a ScoredElement;
    type IntoIter = std::slice::Iter<'a, ScoredElement>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// A recommender trained on a fixed case base. Implementations are pure with
/// respect to the query: identical inputs give identical rankings.
pub trait Recommender: Send + Sync {
    fn name(&self) -> String;

    fn recommend(&self, query: &Query) -> Result<Ranking, RecommendError>;
}
