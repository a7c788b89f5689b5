//! Implicit-feedback collaborative filtering: user-based and item-based kNN
//! over a binary case × element matrix. Demographics are not used.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::case::CaseBase;
use crate::error::RecommendError;
use crate::recommend::{Query, QueryElementPolicy, Ranking, Recommender};

/// Binary case × element matrix stored sparsely in both orientations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteractionMatrix {
    case_ids: Vec<String>,
    elements: Vec<String>,
    /// Sorted column indices per row.
    rows: Vec<Vec<usize>>,
    /// Sorted row indices per column.
    columns: Vec<Vec<usize>>,
}

pub fn build_matrix(cb: &CaseBase) -> InteractionMatrix {
    let elements: Vec<String> = cb
        .cases()
        .iter()
        .flat_map(|c| c.elements.names().map(str::to_string))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let column_of: BTreeMap<&str, usize> = elements.iter().enumerate().map(|(i, e)| (e.as_str(), i)).collect();
    let mut columns = vec![Vec::new(); elements.len()];
    let rows: Vec<Vec<usize>> = cb
        .cases()
        .iter()
        .enumerate()
        .map(|(r, case)| {
            let mut row: Vec<usize> = case.elements.names().map(|n| column_of[n]).collect();
            row.sort_unstable();
            for &c in &row {
                columns[c].push(r);
            }
            row
        })
        .collect();
    let case_ids = cb.cases().iter().map(|c| c.id.clone()).collect();
    InteractionMatrix { case_ids, elements, rows, columns }
}

impl InteractionMatrix {
    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn column_count(&self) -> usize {
        self.elements.len()
    }

    pub fn case_ids(&self) -> &[String] {
        &self.case_ids
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn column_index(&self, element: &str) -> Option<usize> {
        self.elements.binary_search_by(|e| e.as_str().cmp(element)).ok()
    }

    pub fn row(&self, r: usize) -> &[usize] {
        &self.rows[r]
    }

    pub fn column(&self, c: usize) -> &[usize] {
        &self.columns[c]
    }

    pub fn entry(&self, case_id: &str, element: &str) -> Option<bool> {
        let r = self.case_ids.iter().position(|id| id == case_id)?;
        let c = self.column_index(element)?;
        Some(self.rows[r].binary_search(&c).is_ok())
    }

    /// Dense 0/1 row, mostly for inspection and tests.
    pub fn dense_row(&self, r: usize) -> Vec<u8> {
        let mut dense = vec![0; self.elements.len()];
        for &c in &self.rows[r] {
            dense[c] = 1;
        }
        dense
    }

    /// Query elements present in the vocabulary, as sorted column indices.
    fn query_columns(&self, query: &Query) -> Vec<usize> {
        let mut cols: Vec<usize> = query.chosen_elements.names().filter_map(|n| self.column_index(n)).collect();
        cols.sort_unstable();
        cols
    }
}

fn sorted_intersection(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Cosine of two binary vectors given as sorted index lists.
pub fn binary_cosine(a: &[usize], b: &[usize]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    sorted_intersection(a, b) as f64 / ((a.len() * b.len()) as f64).sqrt()
}

fn require_elements(query: &Query) -> Result<(), RecommendError> {
    if query.verbosity() == 0 {
        return Err(RecommendError::UnsupportedQuery("collaborative filtering needs at least one query element".into()));
    }
    Ok(())
}

/// User-based kNN: neighbours are the `k` cases whose rows are most cosine
/// similar to the query row; an element scores the summed neighbour similarity.
pub fn userknn_recommend(query: &Query, m: &InteractionMatrix, k: usize) -> Result<Ranking, RecommendError> {
    require_elements(query)?;
    if k == 0 {
        return Err(RecommendError::InvalidParameter("cf.k must be at least 1".into()));
    }
    let q = m.query_columns(query);
    let mut neighbors: Vec<(f64, &str, usize)> = (0..m.row_count())
        .map(|r| (binary_cosine(&q, m.row(r)), m.case_ids[r].as_str(), r))
        .filter(|(s, _, _)| *s > 0.0)
        .collect();
    neighbors.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    neighbors.truncate(k);
    let mut scores: BTreeMap<&str, f64> = BTreeMap::new();
    for (sim, _, r) in neighbors {
        for &c in m.row(r) {
            *scores.entry(m.elements[c].as_str()).or_insert(0.0) += sim;
        }
    }
    Ok(Ranking::from_scores(scores))
}

/// Item-based kNN: each query element contributes its cosine to each of its
/// `k` most similar other columns.
pub fn itemknn_recommend(query: &Query, m: &InteractionMatrix, k: usize) -> Result<Ranking, RecommendError> {
    require_elements(query)?;
    if k == 0 {
        return Err(RecommendError::InvalidParameter("cf.k must be at least 1".into()));
    }
    let mut scores: BTreeMap<&str, f64> = BTreeMap::new();
    for x in m.query_columns(query) {
        let mut similar: Vec<(f64, usize)> = (0..m.column_count())
            .filter(|&e| e != x)
            .map(|e| (binary_cosine(m.column(x), m.column(e)), e))
            .filter(|(s, _)| *s > 0.0)
            .collect();
        similar.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| m.elements[a.1].cmp(&m.elements[b.1])));
        similar.truncate(k);
        for (sim, e) in similar {
            *scores.entry(m.elements[e].as_str()).or_insert(0.0) += sim;
        }
    }
    Ok(Ranking::from_scores(scores))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CfVariant {
    UserKnn,
    ItemKnn,
}

impl fmt::Display for CfVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CfVariant::UserKnn => "userknn",
            CfVariant::ItemKnn => "itemknn",
        })
    }
}

impl FromStr for CfVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "userknn" => Ok(Self::UserKnn),
            "itemknn" => Ok(Self::ItemKnn),
            other => Err(format!("unknown cf variant {other:?} (expected userknn or itemknn)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CfRecommender {
    matrix: Arc<InteractionMatrix>,
    variant: CfVariant,
    k: usize,
    policy: QueryElementPolicy,
}

impl CfRecommender {
    pub fn new(matrix: Arc<InteractionMatrix>, variant: CfVariant, k: usize, policy: QueryElementPolicy) -> Result<Self, RecommendError> {
        if k == 0 {
            return Err(RecommendError::InvalidParameter("cf.k must be at least 1".into()));
        }
        Ok(Self { matrix, variant, k, policy })
    }
}

impl Recommender for CfRecommender {
    fn name(&self) -> String {
        format!("cf:{}:{}", self.variant, self.k)
    }

    fn recommend(&self, query: &Query) -> Result<Ranking, RecommendError> {
        let ranking = match self.variant {
            CfVariant::UserKnn => userknn_recommend(query, &self.matrix, self.k)?,
            CfVariant::ItemKnn => itemknn_recommend(query, &self.matrix, self.k)?,
        };
        Ok(ranking.apply_policy(query, self.policy))
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;
    use std::sync::Arc;

    use proptest::prelude::*;

    use super::*;
    use crate::case::{Case, IndustryTaxonomy, SolutionElement, TaxonomyNode};

    fn cb(rows: &[(&str, &[&str])]) -> CaseBase {
        let cases = rows
            .iter()
            .map(|(id, els)| Case {
                id: id.to_string(),
                industry: "root".into(),
                business_process: "sales".into(),
                goal: String::new(),
                target_groups: BTreeSet::new(),
                elements: els.iter().map(|e| SolutionElement::kpi(e)).collect(),
            })
            .collect();
        CaseBase::new(cases, Arc::new(IndustryTaxonomy::new(TaxonomyNode::leaf("root")).unwrap())).unwrap()
    }

    fn q(elements: &[&str]) -> Query {
        Query::new("root", "sales").with_elements(elements.iter().map(|e| SolutionElement::kpi(e)))
    }

    #[test]
    fn matrix_cells() {
        let m = build_matrix(&cb(&[("c1", &["a", "b"]), ("c2", &["c"]), ("c3", &["a", "c"])]));
        assert_eq!(m.elements(), ["a", "b", "c"]);
        assert_eq!(m.dense_row(0), vec![1, 1, 0]);
        assert_eq!(m.dense_row(1), vec![0, 0, 1]);
        assert_eq!(m.dense_row(2), vec![1, 0, 1]);
        assert_eq!(m.entry("c3", "b"), Some(false));
        assert_eq!(m.entry("c3", "c"), Some(true));
        assert_eq!(m.column(0), [0, 2]);
        assert_eq!(binary_cosine(m.row(0), m.row(1)), 0.0);
    }

    #[test]
    fn verbosity_zero_is_unsupported() {
        let m = build_matrix(&cb(&[("c1", &["a"])]));
        assert!(matches!(userknn_recommend(&q(&[]), &m, 5), Err(RecommendError::UnsupportedQuery(_))));
        assert!(matches!(itemknn_recommend(&q(&[]), &m, 5), Err(RecommendError::UnsupportedQuery(_))));
    }

    #[test]
    fn userknn_identical_row_scores_one() {
        let m = build_matrix(&cb(&[("c1", &["a", "b"]), ("c2", &["c", "d"])]));
        let r = userknn_recommend(&q(&["a", "b"]), &m, 1).unwrap();
        assert_eq!(r.names().collect::<Vec<_>>(), vec!["a", "b"]);
        assert!(r.iter().all(|e| (e.score - 1.0).abs() < 1e-12));
    }

    #[test]
    fn userknn_orthogonal_query_is_empty() {
        let m = build_matrix(&cb(&[("c1", &["a", "b"]), ("c2", &["c"])]));
        assert!(userknn_recommend(&q(&["z"]), &m, 3).unwrap().is_empty());
    }

    #[test]
    fn userknn_k2_hand_computed() {
        // q = {a, b}; c1 = {a, b, c}: 2/√6; c2 = {a, d}: 1/2; c3 = {d}: 0.
        let m = build_matrix(&cb(&[("c1", &["a", "b", "c"]), ("c2", &["a", "d"]), ("c3", &["d"])]));
        let r = userknn_recommend(&q(&["a", "b"]), &m, 2).unwrap();
        let s1 = 2.0 / 6f64.sqrt();
        assert!((r.score_of("a").unwrap() - (s1 + 0.5)).abs() < 1e-12);
        assert!((r.score_of("b").unwrap() - s1).abs() < 1e-12);
        assert!((r.score_of("c").unwrap() - s1).abs() < 1e-12);
        assert!((r.score_of("d").unwrap() - 0.5).abs() < 1e-12);
        let r1 = userknn_recommend(&q(&["a", "b"]), &m, 1).unwrap();
        assert_eq!(r1.score_of("d"), None);
    }

    #[test]
    fn itemknn_toy_matrix() {
        // Columns over cases c1..c4: a={1,2,3}, b={1,2,3}, c={3,4}, d={4}.
        let m = build_matrix(&cb(&[("c1", &["a", "b"]), ("c2", &["a", "b"]), ("c3", &["a", "b", "c"]), ("c4", &["c", "d"])]));
        let r = itemknn_recommend(&q(&["a"]), &m, 10).unwrap();
        assert!((r.score_of("b").unwrap() - 1.0).abs() < 1e-12);
        assert!((r.score_of("c").unwrap() - 1.0 / 6f64.sqrt()).abs() < 1e-12);
        assert_eq!(r.score_of("d"), None);
        assert_eq!(r.score_of("a"), None, "an item is not its own neighbour");
        let top1 = itemknn_recommend(&q(&["a"]), &m, 1).unwrap();
        assert_eq!(top1.names().collect::<Vec<_>>(), vec!["b"]);
        // Two query elements: contributions add.
        let r2 = itemknn_recommend(&q(&["a", "c"]), &m, 10).unwrap();
        let cd = 1.0 / 2f64.sqrt();
        assert!((r2.score_of("d").unwrap() - cd).abs() < 1e-12);
        assert!((r2.score_of("b").unwrap() - (1.0 + 1.0 / 6f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn cf_ignores_demographics() {
        let m = Arc::new(build_matrix(&cb(&[("c1", &["a", "b"]), ("c2", &["a", "c"])])));
        let engine = CfRecommender::new(m, CfVariant::UserKnn, 10, QueryElementPolicy::Include).unwrap();
        let mut other = q(&["a"]);
        other.industry = "elsewhere".into();
        other.business_process = "hr".into();
        other.goal = "anything".into();
        assert_eq!(engine.recommend(&q(&["a"])).unwrap(), engine.recommend(&other).unwrap());
    }

    proptest! {
        #[test]
        fn binary_cosine_bounded_symmetric(
            a in prop::collection::btree_set(0usize..12, 0..8),
            b in prop::collection::btree_set(0usize..12, 0..8),
        ) {
            let a: Vec<usize> = a.into_iter().collect();
            let b: Vec<usize> = b.into_iter().collect();
            let s = binary_cosine(&a, &b);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&s));
            prop_assert_eq!(s, binary_cosine(&b, &a));
        }

        #[test]
        fn userknn_large_k_uses_all_rows(rows in prop::collection::vec(prop::collection::btree_set(0u8..6, 1..4), 1..6)) {
            let names: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|i| format!("e{i}")).collect()).collect();
            let ids: Vec<String> = (0..rows.len()).map(|i| format!("c{i}")).collect();
            let spec: Vec<(&str, Vec<&str>)> = ids.iter().zip(&names).map(|(id, n)| (id.as_str(), n.iter().map(String::as_str).collect())).collect();
            let spec_refs: Vec<(&str, &[&str])> = spec.iter().map(|(id, n)| (*id, n.as_slice())).collect();
            let m = build_matrix(&cb(&spec_refs));
            let query = q(&["e0", "e1"]);
            let all = userknn_recommend(&query, &m, rows.len()).unwrap();
            let more = userknn_recommend(&query, &m, rows.len() + 10).unwrap();
            prop_assert_eq!(all, more);
        }
    }
}
