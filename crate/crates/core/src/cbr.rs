//! Case-based recommender: retrieve the `n` most similar cases of the query's
//! business process and score each element by the summed similarity of the
//! retrieved cases that contain it.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::case::{Case, CaseBase};
use crate::error::RecommendError;
use crate::recommend::{Query, QueryElementPolicy, Ranking, Recommender};
use crate::similarity::{
    jaccard_similarity, taxonomy_similarity, AttributeWeights, CaseVectors, LocalSimilarities, QueryVectors,
    SimilarityContext,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetrievedCase<'a> {
    pub case: &'a Case,
    pub similarity: f64,
}

/// Retrieved cases, sorted by similarity descending then case id ascending.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RetrievedCaseSet<'a> {
    pub cases: Vec<RetrievedCase<'a>>,
}

impl<'a> RetrievedCaseSet<'a> {
    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn ids(&self) -> Vec<&'a str> {
        self.cases.iter().map(|r| r.case.id.as_str()).collect()
    }

    fn sort_and_truncate(&mut self, n: usize) {
        self.cases
            .sort_by(|a, b| b.similarity.total_cmp(&a.similarity).then_with(|| a.case.id.cmp(&b.case.id)));
        self.cases.truncate(n);
    }
}

/// Sums retrieved-case similarities per element.
pub fn score_elements(retrieved: &RetrievedCaseSet<'_>, query: &Query, policy: QueryElementPolicy) -> Ranking {
    let mut scores: BTreeMap<&str, f64> = BTreeMap::new();
    for r in &retrieved.cases {
        for name in r.case.elements.names() {
            *scores.entry(name).or_insert(0.0) += r.similarity;
        }
    }
    Ranking::from_scores(scores).apply_policy(query, policy)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbrConfig {
    pub top_n: usize,
    pub weights: AttributeWeights,
    pub policy: QueryElementPolicy,
}

impl Default for CbrConfig {
    fn default() -> Self {
        Self { top_n: 2, weights: AttributeWeights::default(), policy: QueryElementPolicy::Include }
    }
}

/// CBR engine over an immutable training case base.
#[derive(Debug, Clone)]
pub struct CbrRecommender {
    cases: CaseBase,
    context: Arc<SimilarityContext>,
    vectors: CaseVectors,
    config: CbrConfig,
}

impl CbrRecommender {
    pub fn new(cases: CaseBase, config: CbrConfig) -> Result<Self, RecommendError> {
        let context = Arc::new(SimilarityContext::build(&cases));
        Self::with_context(cases, context, config)
    }

    /// Reuses corpora already built from `cases`.
    pub fn with_context(cases: CaseBase, context: Arc<SimilarityContext>, config: CbrConfig) -> Result<Self, RecommendError> {
        if config.top_n == 0 {
            return Err(RecommendError::InvalidParameter("cbr.top_n must be at least 1".into()));
        }
        config.weights.validate().map_err(|e| RecommendError::InvalidParameter(e.to_string()))?;
        let vectors = CaseVectors::build(&cases, &context);
        Ok(Self { cases, context, vectors, config })
    }

    pub fn config(&self) -> &CbrConfig {
        &self.config
    }

    pub fn case_base(&self) -> &CaseBase {
        &self.cases
    }

    /// Local similarities of the query against every case of its process.
    fn scored_candidates(&self, query: &Query) -> Result<Vec<(usize, LocalSimilarities)>, RecommendError> {
        let qv = QueryVectors::build(query, &self.context);
        let taxonomy = self.cases.taxonomy();
        self.cases
            .cases()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.business_process == query.business_process)
            .map(|(i, c)| {
                Ok((
                    i,
                    LocalSimilarities {
                        industry: taxonomy_similarity(&query.industry, &c.industry, taxonomy)?,
                        goal: qv.goal.cosine(&self.vectors.goal[i]),
                        target_group: jaccard_similarity(&query.target_groups, &c.target_groups),
                        elements: qv.elements.cosine(&self.vectors.elements[i]),
                    },
                ))
            })
            .collect()
    }

    /// The `n` cases of the query's process most similar to it.
    pub fn retrieve(&self, query: &Query, n: usize) -> Result<RetrievedCaseSet<'_>, RecommendError> {
        let mut set = RetrievedCaseSet {
            cases: self
                .scored_candidates(query)?
                .into_iter()
                .map(|(i, local)| RetrievedCase { case: &self.cases.cases()[i], similarity: self.config.weights.combine(&local) })
                .collect(),
        };
        set.sort_and_truncate(n);
        Ok(set)
    }
}

impl Recommender for CbrRecommender {
    fn name(&self) -> String {
        format!("cbr:{}", self.config.top_n)
    }

    fn recommend(&self, query: &Query) -> Result<Ranking, RecommendError> {
        let retrieved = self.retrieve(query, self.config.top_n)?;
        if retrieved.is_empty() {
            log::debug!("no training case for process {:?}", query.business_process);
        }
        Ok(score_elements(&retrieved, query, self.config.policy))
    }
}

/// Retrieval over an arbitrary case base without precomputed vectors.
pub fn retrieve<'a>(
    query: &Query,
    cb: &'a CaseBase,
    ctx: &SimilarityContext,
    n: usize,
    weights: &AttributeWeights,
) -> Result<RetrievedCaseSet<'a>, RecommendError> {
    if n == 0 {
        return Err(RecommendError::InvalidParameter("n must be at least 1".into()));
    }
    let mut set = RetrievedCaseSet::default();
    for case in cb.cases().iter().filter(|c| c.business_process == query.business_process) {
        let similarity = crate::similarity::global_similarity(query, case, weights, ctx, cb.taxonomy())?;
        set.cases.push(RetrievedCase { case, similarity });
    }
    set.sort_and_truncate(n);
    Ok(set)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use proptest::prelude::*;

    use super::*;
    use crate::case::{IndustryTaxonomy, SolutionElement, TaxonomyNode};

    fn taxonomy() -> Arc<IndustryTaxonomy> {
        Arc::new(
            IndustryTaxonomy::new(TaxonomyNode::with_children(
                "all",
                vec![
                    TaxonomyNode::with_children("retail", vec![TaxonomyNode::leaf("food"), TaxonomyNode::leaf("fashion")]),
                    TaxonomyNode::leaf("banking"),
                ],
            ))
            .unwrap(),
        )
    }

    fn case(id: &str, industry: &str, process: &str, elements: &[&str]) -> Case {
        Case {
            id: id.into(),
            industry: industry.into(),
            business_process: process.into(),
            goal: String::new(),
            target_groups: BTreeSet::new(),
            elements: elements.iter().map(|e| SolutionElement::kpi(e)).collect(),
        }
    }

    fn three_cases() -> CaseBase {
        CaseBase::new(
            vec![
                case("c1", "all/retail/food", "sales", &["revenue", "margin"]),
                case("c2", "all/retail/fashion", "sales", &["revenue", "returns"]),
                case("c3", "all/banking", "sales", &["accounts"]),
            ],
            taxonomy(),
        )
        .unwrap()
    }

    #[test]
    fn identical_case_retrieved_with_similarity_one() {
        let mut c = case("c1", "all/retail/food", "sales", &["revenue"]);
        c.goal = "grow basket size".into();
        c.target_groups.insert(crate::case::TargetGroup::TopManagement);
        let cb = CaseBase::new(vec![c], taxonomy()).unwrap();
        let q = Query::from_case_demographics(&cb.cases()[0]).with_elements(cb.cases()[0].elements.iter().cloned());
        let engine = CbrRecommender::new(cb, CbrConfig { top_n: 1, ..Default::default() }).unwrap();
        let r = engine.retrieve(&q, 1).unwrap();
        assert_eq!(r.ids(), vec!["c1"]);
        assert!((r.cases[0].similarity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn other_process_yields_empty() {
        let engine = CbrRecommender::new(three_cases(), CbrConfig::default()).unwrap();
        let q = Query::new("all/retail/food", "hr");
        assert!(engine.retrieve(&q, 2).unwrap().is_empty());
        assert!(engine.recommend(&q).unwrap().is_empty());
    }

    #[test]
    fn top_two_matches_brute_force() {
        let cb = three_cases();
        let ctx = SimilarityContext::build(&cb);
        let w = AttributeWeights::default();
        let q = Query::new("all/retail/food", "sales").with_elements([SolutionElement::kpi("revenue")]);
        let mut brute: Vec<(f64, &str)> = cb
            .cases()
            .iter()
            .map(|c| (crate::similarity::global_similarity(&q, c, &w, &ctx, cb.taxonomy()).unwrap(), c.id.as_str()))
            .collect();
        brute.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
        let engine = CbrRecommender::with_context(cb.clone(), Arc::new(ctx.clone()), CbrConfig::default()).unwrap();
        let fast = engine.retrieve(&q, 2).unwrap();
        assert_eq!(fast.ids(), vec![brute[0].1, brute[1].1]);
        assert_eq!(fast.ids(), vec!["c1", "c2"]);
        let slow = retrieve(&q, &cb, &ctx, 2, &w).unwrap();
        for (a, b) in fast.cases.iter().zip(&slow.cases) {
            assert!((a.similarity - b.similarity).abs() < 1e-12);
        }
    }

    #[test]
    fn eq1_examples() {
        let cb = three_cases();
        let q = Query::new("all/retail/food", "sales");
        let single = RetrievedCaseSet { cases: vec![RetrievedCase { case: &cb.cases()[0], similarity: 0.8 }] };
        let r = score_elements(&single, &q, QueryElementPolicy::Include);
        assert!(r.iter().all(|e| e.score == 0.8));
        assert_eq!(r.len(), 2);

        let two = RetrievedCaseSet {
            cases: vec![
                RetrievedCase { case: &cb.cases()[0], similarity: 0.8 },
                RetrievedCase { case: &cb.cases()[1], similarity: 0.5 },
            ],
        };
        let r = score_elements(&two, &q, QueryElementPolicy::Include);
        assert!((r.score_of("revenue").unwrap() - 1.3).abs() < 1e-12);
        assert_eq!(r.score_of("margin"), Some(0.8));
        assert_eq!(r.score_of("accounts"), None);
        assert_eq!(r.names().next(), Some("revenue"));
    }

    #[test]
    fn rejects_zero_top_n() {
        assert!(CbrRecommender::new(three_cases(), CbrConfig { top_n: 0, ..Default::default() }).is_err());
    }

    proptest! {
        #[test]
        fn smaller_n_is_prefix(n in 1usize..4, extra in 0usize..3, pick in prop::collection::vec(0usize..4, 0..4)) {
            let cb = three_cases();
            let names = ["revenue", "margin", "returns", "accounts"];
            let q = Query::new("all/retail/fashion", "sales").with_elements(pick.iter().map(|&i| SolutionElement::kpi(names[i])));
            let engine = CbrRecommender::new(cb, CbrConfig::default()).unwrap();
            let small = engine.retrieve(&q, n).unwrap().ids();
            let large = engine.retrieve(&q, n + extra).unwrap().ids();
            prop_assert_eq!(&large[..small.len()], &small[..]);
            let r = engine.recommend(&q).unwrap();
            let total: f64 = engine.retrieve(&q, 2).unwrap().cases.iter().map(|c| c.similarity).sum();
            for e in &r {
                prop_assert!(e.score > 0.0 || total == 0.0);
                prop_assert!(e.score <= total + 1e-12);
            }
        }
    }
}
