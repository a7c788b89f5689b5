//! JSON case-base document: `{ "taxonomy": {...}, "cases": [...] }`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{canonicalize_name, Case, CaseBase, ElementKind, ElementSet, IndustryTaxonomy, SolutionElement, TargetGroup, TaxonomyNode};
use crate::error::CaseBaseError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseBaseDocument {
    pub taxonomy: TaxonomyNode,
    pub cases: Vec<CaseDocument>,
    #[serde(flatten, skip_serializing)]
    pub unknown: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseDocument {
    pub id: String,
    pub industry: String,
    #[serde(default)]
    pub business_process: String,
    #[serde(default)]
    pub goal: String,
    #[serde(default)]
    pub target_groups: Vec<String>,
    pub elements: Vec<ElementDocument>,
    #[serde(flatten, skip_serializing)]
    pub unknown: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementDocument {
    pub name: String,
    pub kind: ElementKind,
    #[serde(flatten, skip_serializing)]
    pub unknown: BTreeMap<String, Value>,
}

impl CaseBaseDocument {
    /// Validates the document into a case base, collecting non-fatal warnings.
    pub fn into_case_base(self, warnings: &mut Vec<String>) -> Result<CaseBase, CaseBaseError> {
        for key in self.unknown.keys() {
            warnings.push(format!("ignoring unknown top-level field `{key}`"));
        }
        let taxonomy = Arc::new(IndustryTaxonomy::new(self.taxonomy)?);
        let mut cases = Vec::with_capacity(self.cases.len());
        for doc in self.cases {
            cases.push(doc.into_case(warnings)?);
        }
        CaseBase::new(cases, taxonomy)
    }

    pub fn from_case_base(cb: &CaseBase) -> Self {
        let cases = cb
            .cases()
            .iter()
            .map(|c| CaseDocument {
                id: c.id.clone(),
                industry: c.industry.clone(),
                business_process: c.business_process.clone(),
                goal: c.goal.clone(),
                target_groups: c.target_groups.iter().map(|g| g.as_str().to_string()).collect(),
                elements: c
                    .elements
                    .iter()
                    .map(|e| ElementDocument { name: e.name.clone(), kind: e.kind, unknown: BTreeMap::new() })
                    .collect(),
                unknown: BTreeMap::new(),
            })
            .collect();
        Self { taxonomy: cb.taxonomy().root().clone(), cases, unknown: BTreeMap::new() }
    }
}

impl CaseDocument {
    fn into_case(self, warnings: &mut Vec<String>) -> Result<Case, CaseBaseError> {
        let id = self.id.trim().to_string();
        for key in self.unknown.keys() {
            warnings.push(format!("case {id:?}: ignoring unknown field `{key}`"));
        }
        if self.business_process.trim().is_empty() {
            warnings.push(format!("case {id:?}: empty business process label"));
        }
        let mut target_groups = BTreeSet::new();
        for raw in &self.target_groups {
            let group = TargetGroup::parse(raw).ok_or_else(|| {
                CaseBaseError::validation(&id, "target_groups", format!("illegal target group {raw:?}"))
            })?;
            target_groups.insert(group);
        }
        let mut elements = ElementSet::new();
        for element in self.elements {
            for key in element.unknown.keys() {
                warnings.push(format!("case {id:?}: ignoring unknown element field `{key}`"));
            }
            let name = canonicalize_name(&element.name);
            if name.is_empty() {
                return Err(CaseBaseError::validation(&id, "elements", "empty element name"));
            }
            if let Some(existing) = elements.get(&name) {
                if existing.kind != element.kind {
                    return Err(CaseBaseError::validation(
                        &id,
                        "elements",
                        format!("element {name:?} declared both as {} and {}", existing.kind, element.kind),
                    ));
                }
            }
            elements.insert(SolutionElement { name, kind: element.kind });
        }
        Ok(Case {
            id,
            industry: self.industry.trim().to_string(),
            business_process: self.business_process.trim().to_string(),
            goal: self.goal,
            target_groups,
            elements,
        })
    }
}

impl CaseBase {
    pub fn to_document(&self) -> CaseBaseDocument {
        CaseBaseDocument::from_case_base(self)
    }

    /// Pretty-printed JSON document; stable for a given case base.
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(&self.to_document()).expect("case base serializes");
        out.push('\n');
        out
    }
}

pub fn parse_case_base_with_warnings(text: &str) -> Result<(CaseBase, Vec<String>), CaseBaseError> {
    let doc: CaseBaseDocument = serde_json::from_str(text)?;
    let mut warnings = Vec::new();
    let cb = doc.into_case_base(&mut warnings)?;
    Ok((cb, warnings))
}

/// Parses and validates a case-base document, logging warnings.
pub fn parse_case_base(text: &str) -> Result<CaseBase, CaseBaseError> {
    let (cb, warnings) = parse_case_base_with_warnings(text)?;
    for w in warnings {
        log::warn!("{w}");
    }
    Ok(cb)
}

pub fn load_case_base(path: impl AsRef<Path>) -> Result<CaseBase, CaseBaseError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| CaseBaseError::Io { path: path.display().to_string(), source })?;
    parse_case_base(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_CASES: &str = r#"{
        "taxonomy": {"name": "all", "children": [{"name": "retail", "children": [{"name": "food"}]}, {"name": "banking"}]},
        "cases": [
            {"id": "c1", "industry": "all/retail/food", "business_process": "sales", "goal": "grow sales",
             "target_groups": ["employees", "Top Management"],
             "elements": [{"name": "Sales Revenue", "kind": "kpi"}, {"name": "product", "kind": "dimension"}]},
            {"id": "c2", "industry": "all/banking", "business_process": "sales", "goal": "",
             "target_groups": [], "elements": [{"name": "number of  accounts", "kind": "kpi"}]}
        ]
    }"#;

    #[test]
    fn loads_valid_document() {
        let (cb, warnings) = parse_case_base_with_warnings(TWO_CASES).unwrap();
        assert_eq!(cb.len(), 2);
        assert!(warnings.is_empty());
        let c1 = cb.get("c1").unwrap();
        assert!(c1.elements.contains("sales revenue"));
        assert_eq!(c1.target_groups.len(), 2);
        assert!(cb.get("c2").unwrap().elements.contains("number of accounts"));
    }

    #[test]
    fn round_trip_is_semantically_equal() {
        let cb = parse_case_base(TWO_CASES).unwrap();
        let again = parse_case_base(&cb.to_json()).unwrap();
        assert_eq!(cb.cases(), again.cases());
        assert_eq!(cb.taxonomy(), again.taxonomy());
    }

    #[test]
    fn merges_surface_forms() {
        let text = TWO_CASES.replace(
            r#"{"name": "product", "kind": "dimension"}"#,
            r#"{"name": "sales revenue", "kind": "kpi"}"#,
        );
        let cb = parse_case_base(&text).unwrap();
        assert_eq!(cb.get("c1").unwrap().elements.len(), 1);
    }

    #[test]
    fn unknown_industry_names_case() {
        let text = TWO_CASES.replace("all/banking", "all/insurance");
        let err = parse_case_base(&text).unwrap_err();
        match err {
            CaseBaseError::Validation { case_id, field, .. } => {
                assert_eq!(case_id, "c2");
                assert_eq!(field, "industry");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn duplicate_id_rejected() {
        let text = TWO_CASES.replace(r#""id": "c2""#, r#""id": "c1""#);
        assert!(matches!(parse_case_base(&text), Err(CaseBaseError::Validation { field: "id", .. })));
    }

    #[test]
    fn empty_elements_rejected() {
        let text = TWO_CASES.replace(r#"[{"name": "number of  accounts", "kind": "kpi"}]"#, "[]");
        let err = parse_case_base(&text).unwrap_err();
        assert!(matches!(err, CaseBaseError::Validation { ref case_id, field: "elements", .. } if case_id == "c2"));
    }

    #[test]
    fn illegal_target_group_rejected() {
        let text = TWO_CASES.replace("\"employees\"", "\"interns\"");
        let err = parse_case_base(&text).unwrap_err();
        assert!(matches!(err, CaseBaseError::Validation { ref case_id, field: "target_groups", .. } if case_id == "c1"));
    }

    #[test]
    fn unknown_fields_and_empty_process_warn() {
        let text = TWO_CASES
            .replace(r#""goal": "","#, r#""goal": "", "owner": "x","#)
            .replace(r#""business_process": "sales", "goal": """#, r#""business_process": " ", "goal": """#);
        let (cb, warnings) = parse_case_base_with_warnings(&text).unwrap();
        assert_eq!(cb.get("c2").unwrap().business_process, "");
        assert_eq!(warnings.len(), 2, "{warnings:?}");
    }

    #[test]
    fn parse_failure() {
        assert!(matches!(parse_case_base("{not json"), Err(CaseBaseError::Parse(_))));
    }
}
