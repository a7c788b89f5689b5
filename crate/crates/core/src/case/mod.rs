//! Consultancy case model: solution elements, cases, the industry taxonomy and
//! the case base that ties them together.

mod document;
mod stats;
mod taxonomy;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::CaseBaseError;

pub use document::{
    load_case_base, parse_case_base, parse_case_base_with_warnings, CaseBaseDocument, CaseDocument,
    ElementDocument,
};
pub use stats::{compute_stats, CaseBaseStats, CountMode};
pub use taxonomy::{IndustryTaxonomy, TaxonomyNode, PATH_SEPARATOR};

/// Canonical identity of an element name: trimmed, case-folded, with internal
/// whitespace runs collapsed to a single space.
pub fn canonicalize_name(raw: &str) -> String {
    raw.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Kpi,
    Dimension,
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ElementKind::Kpi => "kpi",
            ElementKind::Dimension => "dimension",
        })
    }
}

/// A KPI or dimension. Identity is the canonical name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SolutionElement {
    pub name: String,
    pub kind: ElementKind,
}

impl SolutionElement {
    pub fn new(name: &str, kind: ElementKind) -> Self {
        Self { name: canonicalize_name(name), kind }
    }

    pub fn kpi(name: &str) -> Self {
        Self::new(name, ElementKind::Kpi)
    }

    pub fn dimension(name: &str) -> Self {
        Self::new(name, ElementKind::Dimension)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TargetGroup {
    #[serde(rename = "employees")]
    Employees,
    #[serde(rename = "middle management")]
    MiddleManagement,
    #[serde(rename = "top management")]
    TopManagement,
}

impl TargetGroup {
    pub const ALL: [TargetGroup; 3] = [TargetGroup::Employees, TargetGroup::MiddleManagement, TargetGroup::TopManagement];

    pub fn as_str(self) -> &'static str {
        match self {
            TargetGroup::Employees => "employees",
            TargetGroup::MiddleManagement => "middle management",
            TargetGroup::TopManagement => "top management",
        }
    }

    pub fn parse(raw: &str) -> Option<Self> {
        let canonical = canonicalize_name(raw);
        Self::ALL.into_iter().find(|g| g.as_str() == canonical)
    }
}

impl fmt::Display for TargetGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Sorted, name-unique list of elements.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<SolutionElement>")]
pub struct ElementSet(Vec<SolutionElement>);

impl From<Vec<SolutionElement>> for ElementSet {
    fn from(elements: Vec<SolutionElement>) -> Self {
        elements.into_iter().map(|e| SolutionElement::new(&e.name, e.kind)).collect()
    }
}

impl ElementSet {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    /// Inserts by canonical name; returns false if the name is already present.
    pub fn insert(&mut self, element: SolutionElement) -> bool {
        match self.0.binary_search_by(|e| e.name.cmp(&element.name)) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, element);
                true
            }
        }
    }

    pub fn get(&self, name: &str) -> Option<&SolutionElement> {
        self.0.binary_search_by(|e| e.name.as_str().cmp(name)).ok().map(|i| &self.0[i])
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, SolutionElement> {
        self.0.iter()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|e| e.name.as_str())
    }

    pub fn name_set(&self) -> BTreeSet<&str> {
        self.names().collect()
    }

    pub fn count_kind(&self, kind: ElementKind) -> usize {
        self.0.iter().filter(|e| e.kind == kind).count()
    }
}

impl FromIterator<SolutionElement> for ElementSet {
    fn from_iter<I: IntoIterator<Item = SolutionElement>>(iter: I) -> Self {
        let mut set = ElementSet::new();
        for e in iter {
            set.insert(e);
        }
        set
    }
}

impl<'a> IntoIterator for &'a ElementSet {
    type Item = &'a SolutionElement;
    type IntoIter = std::slice::Iter<'a, SolutionElement>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// One customer × business-process consultancy record.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Case {
    pub id: String,
    pub industry: String,
    pub business_process: String,
    pub goal: String,
    pub target_groups: BTreeSet<TargetGroup>,
    pub elements: ElementSet,
}

/// A validated, immutable collection of cases sharing one taxonomy.
#[derive(Debug, Clone)]
pub struct CaseBase {
    cases: Vec<Case>,
    taxonomy: Arc<IndustryTaxonomy>,
}

impl CaseBase {
    /// Validates cases against the taxonomy and the case-base invariants.
    pub fn new(cases: Vec<Case>, taxonomy: Arc<IndustryTaxonomy>) -> Result<Self, CaseBaseError> {
        if cases.is_empty() {
            return Err(CaseBaseError::Empty);
        }
        let mut ids = BTreeSet::new();
        let mut kinds: BTreeMap<&str, (ElementKind, &str)> = BTreeMap::new();
        for case in &cases {
            if case.id.trim().is_empty() {
                return Err(CaseBaseError::validation(&case.id, "id", "empty case id"));
            }
            if !ids.insert(case.id.as_str()) {
                return Err(CaseBaseError::validation(&case.id, "id", "duplicate case id"));
            }
            if !taxonomy.contains(&case.industry) {
                return Err(CaseBaseError::validation(
                    &case.id,
                    "industry",
                    format!("industry path {:?} is not in the taxonomy", case.industry),
                ));
            }
            if case.elements.is_empty() {
                return Err(CaseBaseError::validation(&case.id, "elements", "case has no solution elements"));
            }
            for element in &case.elements {
                if element.name.is_empty() {
                    return Err(CaseBaseError::validation(&case.id, "elements", "empty element name"));
                }
                match kinds.get(element.name.as_str()) {
                    Some(&(kind, first_case)) if kind != element.kind => {
                        return Err(CaseBaseError::KindConflict {
                            name: element.name.clone(),
                            first: kind.to_string(),
                            first_case: first_case.to_string(),
                            second: element.kind.to_string(),
                            second_case: case.id.clone(),
                        })
                    }
                    Some(_) => {}
                    None => {
                        kinds.insert(element.name.as_str(), (element.kind, case.id.as_str()));
                    }
                }
            }
        }
        Ok(Self { cases, taxonomy })
    }

    pub fn cases(&self) -> &[Case] {
        &self.cases
    }

    pub fn taxonomy(&self) -> &IndustryTaxonomy {
        &self.taxonomy
    }

    pub fn shared_taxonomy(&self) -> Arc<IndustryTaxonomy> {
        Arc::clone(&self.taxonomy)
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Case> {
        self.cases.iter().find(|c| c.id == id)
    }

    /// The case base with the case at `index` removed; `None` if that would
    /// leave it empty.
    pub fn without(&self, index: usize) -> Option<CaseBase> {
        if self.cases.len() <= 1 || index >= self.cases.len() {
            return None;
        }
        let cases = self.cases.iter().enumerate().filter(|(i, _)| *i != index).map(|(_, c)| c.clone()).collect();
        Some(CaseBase { cases, taxonomy: Arc::clone(&self.taxonomy) })
    }

    /// Canonical name → kind for every element in the case base.
    pub fn element_kinds(&self) -> BTreeMap<String, ElementKind> {
        self.cases.iter().flat_map(|c| c.elements.iter()).map(|e| (e.name.clone(), e.kind)).collect()
    }

    pub fn processes(&self) -> BTreeSet<&str> {
        self.cases.iter().map(|c| c.business_process.as_str()).collect()
    }

    /// Splits the case base by business-process label. Empty labels form
    /// their own part and are logged.
    pub fn partition_by_process(&self) -> BTreeMap<String, CaseBase> {
        let mut parts: BTreeMap<String, Vec<Case>> = BTreeMap::new();
        for case in &self.cases {
            parts.entry(case.business_process.clone()).or_default().push(case.clone());
        }
        if parts.contains_key("") {
            log::warn!("case base contains cases with an empty business-process label");
        }
        parts
            .into_iter()
            .map(|(process, cases)| (process, CaseBase { cases, taxonomy: Arc::clone(&self.taxonomy) }))
            .collect()
    }
}

/// Free-function form of [`CaseBase::partition_by_process`].
pub fn partition_by_process(cb: &CaseBase) -> BTreeMap<String, CaseBase> {
    cb.partition_by_process()
}
