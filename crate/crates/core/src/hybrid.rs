//! Weighted hybrid of the CBR and graph recommenders.
//!
//! Both score lists are min-max normalised over the union of their candidates
//! and mixed as `α·cbr + (1−α)·graph`. The mixture weight starts at 1 for an
//! empty query and falls linearly with query verbosity until it reaches the
//! floor `β` at the verbosity threshold `c̄` (half the mean case size).

use std::collections::BTreeMap;

use crate::cbr::CbrRecommender;
use crate::error::RecommendError;
use crate::graph::GraphRecommender;
use crate::recommend::{Query, QueryElementPolicy, Ranking, Recommender};

/// CBR weight for a query of `verbosity` elements.
pub fn alpha(verbosity: usize, c_bar: f64, beta: f64) -> f64 {
    let q = verbosity as f64;
    if q <= c_bar {
        1.0 - (1.0 - beta) * q / c_bar
    } else {
        beta
    }
}

/// Maps scores affinely onto [0, 1]; a constant map goes to all zeros.
pub fn minmax_normalize<K: Ord + Clone>(scores: &BTreeMap<K, f64>) -> BTreeMap<K, f64> {
    let min = scores.values().copied().fold(f64::INFINITY, f64::min);
    let max = scores.values().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    scores
        .iter()
        .map(|(k, &v)| (k.clone(), if range > 0.0 { ((v - min) / range).clamp(0.0, 1.0) } else { 0.0 }))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridConfig {
    pub beta: f64,
    pub verbosity_threshold: f64,
}

impl HybridConfig {
    pub fn new(beta: f64, verbosity_threshold: f64) -> Result<Self, RecommendError> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(RecommendError::InvalidParameter(format!("hybrid.beta {beta} not in (0, 1)")));
        }
        if !(verbosity_threshold > 0.0 && verbosity_threshold.is_finite()) {
            return Err(RecommendError::InvalidParameter(format!(
                "verbosity threshold {verbosity_threshold} must be positive"
            )));
        }
        Ok(Self { beta, verbosity_threshold })
    }

    pub fn alpha(&self, verbosity: usize) -> f64 {
        alpha(verbosity, self.verbosity_threshold, self.beta)
    }
}

/// Mixes two rankings with a fixed CBR weight. Candidates missing from one
/// engine get score 0 there before normalisation.
pub fn combine_with_alpha(cbr: &Ranking, graph: &Ranking, alpha: f64) -> Ranking {
    if cbr.is_empty() && graph.is_empty() {
        return Ranking::empty();
    }
    let mut cbr_scores = cbr.to_map();
    let mut graph_scores = graph.to_map();
    for name in cbr.names() {
        graph_scores.entry(name.to_string()).or_insert(0.0);
    }
    for name in graph.names() {
        cbr_scores.entry(name.to_string()).or_insert(0.0);
    }
    let cbr_norm = minmax_normalize(&cbr_scores);
    let graph_norm = minmax_normalize(&graph_scores);
    Ranking::from_scores(
        cbr_norm.into_iter().map(|(name, c)| {
            let g = graph_norm[&name];
            (name, alpha * c + (1.0 - alpha) * g)
        }),
    )
}

/// Combines the two engines' rankings for `query` with α from its verbosity.
pub fn hybrid_recommend(query: &Query, cbr: &Ranking, graph: &Ranking, config: &HybridConfig) -> Ranking {
    combine_with_alpha(cbr, graph, config.alpha(query.verbosity()))
}

#[derive(Debug, Clone)]
pub struct HybridRecommender {
    cbr: CbrRecommender,
    graph: GraphRecommender,
    config: HybridConfig,
    policy: QueryElementPolicy,
}

impl HybridRecommender {
    pub fn new(cbr: CbrRecommender, graph: GraphRecommender, config: HybridConfig, policy: QueryElementPolicy) -> Self {
        Self { cbr, graph, config, policy }
    }

    pub fn config(&self) -> &HybridConfig {
        &self.config
    }

    pub fn cbr(&self) -> &CbrRecommender {
        &self.cbr
    }

    pub fn graph(&self) -> &GraphRecommender {
        &self.graph
    }

    /// The hybrid ranking together with the two inputs it was built from.
    pub fn recommend_parts(&self, query: &Query) -> Result<HybridParts, RecommendError> {
        let cbr = self.cbr.recommend(query)?.apply_policy(query, self.policy);
        let graph = self.graph.recommend(query)?.apply_policy(query, self.policy);
        let alpha = self.config.alpha(query.verbosity());
        let hybrid = combine_with_alpha(&cbr, &graph, alpha);
        Ok(HybridParts { alpha, cbr, graph, hybrid })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridParts {
    pub alpha: f64,
    pub cbr: Ranking,
    pub graph: Ranking,
    pub hybrid: Ranking,
}

impl Recommender for HybridRecommender {
    fn name(&self) -> String {
        format!("hybrid:{}", self.config.beta)
    }

    fn recommend(&self, query: &Query) -> Result<Ranking, RecommendError> {
        Ok(self.recommend_parts(query)?.hybrid)
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha(0, 14.0, 0.3), 1.0);
        assert!((alpha(14, 14.0, 0.3) - 0.3).abs() < 1e-12);
        assert_eq!(alpha(20, 14.0, 0.3), 0.3);
        assert!((alpha(7, 14.0, 0.3) - 0.65).abs() < 1e-12);
        assert!((1.0 - alpha(1, 14.0, 0.3) - 0.7 / 14.0).abs() < 1e-12);
    }

    #[test]
    fn config_rejects_out_of_range_beta() {
        assert!(HybridConfig::new(0.0, 14.0).is_err());
        assert!(HybridConfig::new(1.0, 14.0).is_err());
        assert!(HybridConfig::new(0.3, 0.0).is_err());
        assert!(HybridConfig::new(0.3, 14.0).is_ok());
    }

    #[test]
    fn minmax_examples() {
        let m: BTreeMap<&str, f64> = [("a", 2.0), ("b", 4.0), ("c", 6.0)].into();
        assert_eq!(minmax_normalize(&m), [("a", 0.0), ("b", 0.5), ("c", 1.0)].into());
        let flat: BTreeMap<&str, f64> = [("a", 3.0), ("b", 3.0)].into();
        assert_eq!(minmax_normalize(&flat), [("a", 0.0), ("b", 0.0)].into());
        let m: BTreeMap<&str, f64> = [("a", 0.0), ("b", 1.3), ("c", 0.8)].into();
        let n = minmax_normalize(&m);
        assert_eq!(n["a"], 0.0);
        assert_eq!(n["b"], 1.0);
        assert!((n["c"] - 0.8 / 1.3).abs() < 1e-15);
        assert!((n["c"] - 0.615_384_615_384_615_4).abs() < 1e-12);
    }

    #[test]
    fn alpha_one_keeps_cbr_order() {
        let cbr = Ranking::from_scores([("a", 1.3), ("b", 0.8), ("c", 0.2)]);
        let graph = Ranking::from_scores([("c", 0.5), ("d", 0.4)]);
        let h = combine_with_alpha(&cbr, &graph, 1.0);
        assert_eq!(h.names().take(3).collect::<Vec<_>>(), vec!["a", "b", "c"]);
    }

    #[test]
    fn half_alpha_example() {
        let cbr = Ranking::from_scores([("a", 2.0), ("b", 1.0)]);
        let graph = Ranking::from_scores([("b", 0.6), ("a", 0.1)]);
        let h = combine_with_alpha(&cbr, &graph, 0.5);
        assert!((h.score_of("a").unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn graph_only_item_can_outrank() {
        let cbr = Ranking::from_scores([("a", 1.0), ("b", 0.5), ("c", 0.2)]);
        let graph = Ranking::from_scores([("z", 0.4), ("a", 0.1)]);
        let h = combine_with_alpha(&cbr, &graph, 0.3);
        assert!((h.score_of("z").unwrap() - 0.7).abs() < 1e-12);
        let b = h.score_of("b").unwrap();
        assert!(h.score_of("z").unwrap() > b);
    }

    #[test]
    fn both_empty() {
        assert!(combine_with_alpha(&Ranking::empty(), &Ranking::empty(), 0.5).is_empty());
    }

    proptest! {
        #[test]
        fn alpha_piecewise_linear(beta in 0.01f64..0.99, c_bar in 0.5f64..50.0, q in 0usize..120) {
            let a = alpha(q, c_bar, beta);
            prop_assert!(a >= beta - 1e-12 && a <= 1.0);
            prop_assert!(alpha(q + 1, c_bar, beta) <= a + 1e-12);
        }

        #[test]
        fn hybrid_scores_bounded_and_superset(
            cbr in prop::collection::btree_map(0u8..10, 0.0f64..3.0, 0..8),
            graph in prop::collection::btree_map(0u8..10, 0.0f64..1.0, 0..8),
            alpha in 0.0f64..=1.0,
        ) {
            let c = Ranking::from_scores(cbr.iter().map(|(k, v)| (format!("e{k}"), *v)));
            let g = Ranking::from_scores(graph.iter().map(|(k, v)| (format!("e{k}"), *v)));
            let h = combine_with_alpha(&c, &g, alpha);
            for e in &h {
                prop_assert!((0.0..=1.0 + 1e-12).contains(&e.score));
            }
            for name in c.names() {
                prop_assert!(h.score_of(name).is_some());
            }
        }
    }
}
