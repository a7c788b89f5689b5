//! Session state and the recommender it is served by, independent of HTTP.

use std::collections::{BTreeMap, BTreeSet};

use bizrec_core::case::{canonicalize_name, ElementKind, TaxonomyNode};
use bizrec_core::hybrid::HybridRecommender;
use bizrec_core::{CaseBase, EngineConfig, Query, Recommender, SolutionElement, TargetGroup, TrainingStructures};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreateSession {
    pub industry: String,
    pub business_process: String,
    #[serde(default)]
    pub goal: String,
    #[serde(default)]
    pub target_groups: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionItem {
    pub name: String,
    #[serde(default)]
    pub kind: Option<ElementKind>,
    /// Allows names that no case of the loaded case base contains.
    #[serde(default)]
    pub custom: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectRequest {
    pub elements: Vec<SelectionItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectedElement {
    pub name: String,
    pub kind: ElementKind,
    pub custom: bool,
    pub selected_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendedItem {
    pub element: String,
    pub kind: ElementKind,
    pub score: f64,
}

/// Mixing state of the hybrid for a query of the given verbosity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HybridState {
    pub verbosity: usize,
    pub alpha: f64,
    pub beta: f64,
    pub verbosity_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationPage {
    pub session_id: String,
    #[serde(flatten)]
    pub hybrid: HybridState,
    pub items: Vec<RecommendedItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub session_id: String,
    pub elements: Vec<SelectedElement>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub industry: String,
    pub business_process: String,
    pub goal: String,
    pub target_groups: BTreeSet<TargetGroup>,
    #[serde(flatten)]
    pub hybrid: HybridState,
    pub selection: Vec<SelectedElement>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub id: String,
    pub query: Query,
    pub selection: Vec<SelectedElement>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

impl Session {
    pub fn new(id: String, query: Query, at: DateTime<Utc>) -> Self {
        Self { id, query, selection: Vec::new(), created_at: at, updated_at: at }
    }

    /// Appends the elements not yet selected and returns them.
    pub fn select(&mut self, elements: Vec<(SolutionElement, bool)>, at: DateTime<Utc>) -> Vec<SelectedElement> {
        let mut added = Vec::new();
        for (element, custom) in elements {
            if !self.query.add_element(element.clone()) {
                continue;
            }
            added.push(SelectedElement { name: element.name, kind: element.kind, custom, selected_at: at });
        }
        if !added.is_empty() {
            self.selection.extend(added.iter().cloned());
            self.updated_at = at;
        }
        added
    }

    /// Replays an already validated selection.
    pub fn restore(&mut self, elements: &[SelectedElement]) {
        for e in elements {
            if self.query.add_element(SolutionElement { name: e.name.clone(), kind: e.kind }) {
                self.selection.push(e.clone());
                self.updated_at = e.selected_at;
            }
        }
    }

    pub fn solution(&self) -> Solution {
        Solution { session_id: self.id.clone(), elements: self.selection.clone() }
    }
}

/// The loaded case base and the hybrid recommender trained on all of it.
pub struct Engine {
    cases: CaseBase,
    hybrid: HybridRecommender,
    kinds: BTreeMap<String, ElementKind>,
}

impl Engine {
    pub fn new(cases: CaseBase, config: &EngineConfig) -> Result<Self, Box<dyn std::error::Error + Send + Sync>> {
        config.validate()?;
        let training = TrainingStructures::build(cases.clone(), config)?;
        let hybrid = training.hybrid(config, config.hybrid.beta)?;
        let kinds = cases.element_kinds();
        Ok(Self { cases, hybrid, kinds })
    }

    pub fn cases(&self) -> &CaseBase {
        &self.cases
    }

    pub fn taxonomy(&self) -> &TaxonomyNode {
        self.cases.taxonomy().root()
    }

    pub fn process_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for case in self.cases.cases() {
            *counts.entry(case.business_process.clone()).or_insert(0) += 1;
        }
        counts
    }

    pub fn hybrid_state(&self, verbosity: usize) -> HybridState {
        let config = self.hybrid.config();
        HybridState {
            verbosity,
            alpha: config.alpha(verbosity),
            beta: config.beta,
            verbosity_threshold: config.verbosity_threshold,
        }
    }

    pub fn view(&self, session: &Session) -> SessionView {
        let q = &session.query;
        SessionView {
            id: session.id.clone(),
            industry: q.industry.clone(),
            business_process: q.business_process.clone(),
            goal: q.goal.clone(),
            target_groups: q.target_groups.clone(),
            hybrid: self.hybrid_state(q.verbosity()),
            selection: session.selection.clone(),
            created_at: session.created_at,
            updated_at: session.updated_at,
        }
    }

    pub fn initial_query(&self, req: &CreateSession) -> Result<Query, ApiError> {
        if !self.cases.taxonomy().contains(&req.industry) {
            return Err(ApiError::invalid_field(
                "unknown_industry",
                "industry",
                format!("industry {:?} is not a taxonomy path", req.industry),
            ));
        }
        if !self.cases.processes().contains(req.business_process.as_str()) {
            return Err(ApiError::invalid_field(
                "unknown_process",
                "business_process",
                format!("no case has business process {:?}", req.business_process),
            ));
        }
        let mut groups = BTreeSet::new();
        for (i, raw) in req.target_groups.iter().enumerate() {
            let group = TargetGroup::parse(raw).ok_or_else(|| {
                ApiError::invalid_field(
                    "unknown_target_group",
                    format!("target_groups[{i}]"),
                    format!("{raw:?} is not one of employees, middle management, top management"),
                )
            })?;
            groups.insert(group);
        }
        Ok(Query::new(req.industry.clone(), req.business_process.clone())
            .with_goal(req.goal.clone())
            .with_target_groups(groups))
    }

    /// Canonicalises the requested elements, rejecting the request as a whole
    /// if any item is invalid.
    pub fn resolve_selection(&self, items: &[SelectionItem]) -> Result<Vec<(SolutionElement, bool)>, ApiError> {
        let mut resolved = Vec::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            let name = canonicalize_name(&item.name);
            if name.is_empty() {
                return Err(ApiError::invalid_field("empty_element", format!("elements[{i}].name"), "element name is empty"));
            }
            let kind = match (self.kinds.get(&name), item.kind) {
                (Some(&known), Some(given)) if known != given => {
                    return Err(ApiError::invalid_field(
                        "kind_conflict",
                        format!("elements[{i}].kind"),
                        format!("{name:?} is a {known} in the case base, not a {given}"),
                    ));
                }
                (Some(&known), _) => known,
                (None, _) if !item.custom => {
                    return Err(ApiError::invalid_field(
                        "unknown_element",
                        format!("elements[{i}].name"),
                        format!("{name:?} is not in the case-base vocabulary; set custom: true to add it anyway"),
                    ));
                }
                (None, Some(given)) => given,
                (None, None) => {
                    return Err(ApiError::invalid_field(
                        "missing_kind",
                        format!("elements[{i}].kind"),
                        "custom elements need a kind",
                    ));
                }
            };
            let custom = !self.kinds.contains_key(&name);
            resolved.push((SolutionElement { name, kind }, custom));
        }
        Ok(resolved)
    }

    /// Hybrid ranking for the session's query without the selected elements.
    pub fn recommend(&self, session: &Session, limit: usize) -> Result<RecommendationPage, ApiError> {
        let query = &session.query;
        let ranking = self
            .hybrid
            .recommend(query)
            .map_err(|e| ApiError::internal(e.to_string()))?
            .without_query_elements(query)
            .truncated(limit);
        let items = ranking
            .iter()
            .map(|s| RecommendedItem {
                element: s.element.clone(),
                kind: self.kinds.get(&s.element).copied().unwrap_or(ElementKind::Kpi),
                score: s.score,
            })
            .collect();
        Ok(RecommendationPage { session_id: session.id.clone(), hybrid: self.hybrid_state(query.verbosity()), items })
    }
}
