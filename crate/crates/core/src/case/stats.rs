use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{CaseBase, ElementKind};
use crate::error::CaseBaseError;

/// Which elements count towards the case size behind the verbosity threshold.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMode {
    #[default]
    All,
    Kpi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseBaseStats {
    pub case_count: usize,
    pub avg_case_size: f64,
    /// Half the mean case size.
    pub verbosity_threshold: f64,
    pub element_vocabulary: BTreeSet<String>,
    pub process_counts: BTreeMap<String, usize>,
}

pub fn compute_stats(cb: &CaseBase, mode: CountMode) -> Result<CaseBaseStats, CaseBaseError> {
    if cb.is_empty() {
        return Err(CaseBaseError::Empty);
    }
    let total: usize = cb
        .cases()
        .iter()
        .map(|c| match mode {
            CountMode::All => c.elements.len(),
            CountMode::Kpi => c.elements.count_kind(ElementKind::Kpi),
        })
        .sum();
    if total == 0 {
        return Err(CaseBaseError::ZeroThreshold("kpi"));
    }
    let avg_case_size = total as f64 / cb.len() as f64;
    let mut process_counts = BTreeMap::new();
    for case in cb.cases() {
        *process_counts.entry(case.business_process.clone()).or_insert(0) += 1;
    }
    Ok(CaseBaseStats {
        case_count: cb.len(),
        avg_case_size,
        verbosity_threshold: avg_case_size / 2.0,
        element_vocabulary: cb.cases().iter().flat_map(|c| c.elements.names().map(str::to_string)).collect(),
        process_counts,
    })
}
