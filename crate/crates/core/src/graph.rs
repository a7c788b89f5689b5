//! Case graph per business process and PageRank with Priors over it.
//!
//! Each case becomes a node linked to its industry node and to one node per
//! solution element; element nodes are shared between cases. Target groups
//! and goals are not represented.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::case::{Case, CaseBase};
use crate::error::RecommendError;
use crate::recommend::{Query, QueryElementPolicy, Ranking, Recommender};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    Case(String),
    Industry(String),
    Element(String),
}

/// Undirected, unweighted case graph with sorted adjacency lists.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CaseGraph {
    nodes: Vec<NodeKind>,
    adjacency: Vec<Vec<usize>>,
    #[serde(skip)]
    index: HashMap<NodeKind, usize>,
}

impl CaseGraph {
    /// Builds an undirected graph from an edge list; duplicate edges collapse.
    pub fn from_edges(nodes: Vec<NodeKind>, edges: &[(usize, usize)]) -> Self {
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for &(a, b) in edges {
            if a == b {
                continue;
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        let index = nodes.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();
        Self { nodes, adjacency, index }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn nodes(&self) -> &[NodeKind] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &NodeKind {
        &self.nodes[i]
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn find(&self, kind: &NodeKind) -> Option<usize> {
        self.index.get(kind).copied()
    }

    pub fn element_node(&self, name: &str) -> Option<usize> {
        self.find(&NodeKind::Element(name.to_string()))
    }

    pub fn industry_node(&self, path: &str) -> Option<usize> {
        self.find(&NodeKind::Industry(path.to_string()))
    }

    /// Number of connected components (isolated nodes count as one each).
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.nodes.len()];
        let mut components = 0;
        for start in 0..self.nodes.len() {
            if seen[start] {
                continue;
            }
            components += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(n) = stack.pop() {
                for &m in &self.adjacency[n] {
                    if !seen[m] {
                        seen[m] = true;
                        stack.push(m);
                    }
                }
            }
        }
        components
    }
}

/// Builds the graph for cases that share one business process.
pub fn build_case_graph(cases: &[Case]) -> Result<CaseGraph, RecommendError> {
    if let Some(first) = cases.first() {
        if let Some(other) = cases.iter().find(|c| c.business_process != first.business_process) {
            return Err(RecommendError::ProcessMismatch {
                query: first.business_process.clone(),
                case: other.business_process.clone(),
            });
        }
    }
    let mut nodes = Vec::new();
    let mut index: HashMap<NodeKind, usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut intern = |kind: NodeKind, nodes: &mut Vec<NodeKind>| -> usize {
        *index.entry(kind.clone()).or_insert_with(|| {
            nodes.push(kind);
            nodes.len() - 1
        })
    };
    for case in cases {
        let c = intern(NodeKind::Case(case.id.clone()), &mut nodes);
        let i = intern(NodeKind::Industry(case.industry.clone()), &mut nodes);
        edges.push((c, i));
        for name in case.elements.names() {
            let e = intern(NodeKind::Element(name.to_string()), &mut nodes);
            edges.push((c, e));
        }
    }
    Ok(CaseGraph::from_edges(nodes, &edges))
}

const PRIOR_SUM_TOLERANCE: f64 = 1e-12;

/// Probability distribution over graph nodes to which the walk restarts.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorVector {
    mass: Vec<f64>,
}

impl PriorVector {
    pub fn new(mass: Vec<f64>) -> Result<Self, RecommendError> {
        if mass.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(RecommendError::InvalidParameter("prior mass must be finite and non-negative".into()));
        }
        let sum: f64 = mass.iter().sum();
        if (sum - 1.0).abs() > PRIOR_SUM_TOLERANCE {
            return Err(RecommendError::InvalidParameter(format!("prior sums to {sum}, expected 1")));
        }
        Ok(Self { mass })
    }

    /// Uniform mass over `support`; duplicates count once.
    pub fn uniform(node_count: usize, support: &[usize]) -> Result<Self, RecommendError> {
        let mut support = support.to_vec();
        support.sort_unstable();
        support.dedup();
        if support.is_empty() {
            return Err(RecommendError::InvalidParameter("prior support is empty".into()));
        }
        if support.iter().any(|&s| s >= node_count) {
            return Err(RecommendError::InvalidParameter("prior support outside the graph".into()));
        }
        let mut mass = vec![0.0; node_count];
        let share = 1.0 / support.len() as f64;
        for s in support {
            mass[s] = share;
        }
        Ok(Self { mass })
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageRankConfig {
    /// Restart probability in (0, 1].
    pub teleport: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        Self { teleport: 0.3, tolerance: 1e-8, max_iterations: 100 }
    }
}

impl PageRankConfig {
    pub fn validate(&self) -> Result<(), RecommendError> {
        if !(self.teleport > 0.0 && self.teleport <= 1.0) {
            return Err(RecommendError::InvalidParameter(format!("teleport {} not in (0, 1]", self.teleport)));
        }
        if !(self.tolerance > 0.0) {
            return Err(RecommendError::InvalidParameter("tolerance must be > 0".into()));
        }
        if self.max_iterations == 0 {
            return Err(RecommendError::InvalidParameter("max_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageRankRun {
    pub scores: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration of `p ← t·prior + (1−t)·Wᵀp`, with `W` uniform over
/// neighbours and the mass of isolated nodes returned to the prior.
pub fn pagerank_with_priors(
    graph: &CaseGraph,
    prior: &PriorVector,
    config: &PageRankConfig,
) -> Result<PageRankRun, RecommendError> {
    config.validate()?;
    let n = graph.node_count();
    if prior.len() != n {
        return Err(RecommendError::InvalidParameter(format!(
            "prior has {} entries for a graph of {n} nodes",
            prior.len()
        )));
    }
    let prior = prior.mass();
    let walk = 1.0 - config.teleport;
    let mut current = prior.to_vec();
    let mut next = vec![0.0; n];
    for iteration in 1..=config.max_iterations {
        let mut dangling = 0.0;
        next.iter_mut().for_each(|x| *x = 0.0);
        for (i, &p) in current.iter().enumerate() {
            let neighbors = graph.neighbors(i);
            if neighbors.is_empty() {
                dangling += p;
                continue;
            }
            let share = p / neighbors.len() as f64;
            for &j in neighbors {
                next[j] += share;
            }
        }
        for (x, &pr) in next.iter_mut().zip(prior) {
            *x = config.teleport * pr + walk * (*x + dangling * pr);
        }
        let delta: f64 = next.iter().zip(&current).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut current, &mut next);
        if delta < config.tolerance {
            return Ok(PageRankRun { scores: current, iterations: iteration, converged: true });
        }
    }
    log::debug!("pagerank did not converge within {} iterations", config.max_iterations);
    Ok(PageRankRun { scores: current, iterations: config.max_iterations, converged: false })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphConfig {
    pub pagerank: PageRankConfig,
    /// Include the industry node in the prior at every verbosity, not only at 0.
    pub industry_in_prior: bool,
    pub policy: QueryElementPolicy,
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self { pagerank: PageRankConfig::default(), industry_in_prior: true, policy: QueryElementPolicy::Include }
    }
}

/// One case graph per business process.
pub type ProcessGraphs = BTreeMap<String, CaseGraph>;

pub fn build_process_graphs(cb: &CaseBase) -> ProcessGraphs {
    cb.partition_by_process()
        .into_iter()
        .map(|(process, part)| {
            let graph = build_case_graph(part.cases()).expect("partition parts share one process");
            (process, graph)
        })
        .collect()
}

/// Prior support for a query: in-graph query elements plus (optionally) the
/// industry node; the industry node alone at verbosity 0.
pub fn query_prior_support(query: &Query, graph: &CaseGraph, industry_in_prior: bool) -> Vec<usize> {
    let industry = graph.industry_node(&query.industry);
    if query.verbosity() == 0 {
        return industry.into_iter().collect();
    }
    let mut support: Vec<usize> = Vec::new();
    for name in query.chosen_elements.names() {
        match graph.element_node(name) {
            Some(i) => support.push(i),
            None => log::debug!("query element {name:?} not in graph, dropped from prior"),
        }
    }
    if industry_in_prior {
        support.extend(industry);
    }
    support
}

/// Ranks element nodes of `graph` by PageRank-with-Priors score for `query`.
pub fn graph_recommend(query: &Query, graph: &CaseGraph, config: &GraphConfig) -> Result<Ranking, RecommendError> {
    let support = query_prior_support(query, graph, config.industry_in_prior);
    if support.is_empty() {
        log::debug!("no prior node of the query is present in the graph");
        return Ok(Ranking::empty());
    }
    let prior = PriorVector::uniform(graph.node_count(), &support)?;
    let run = pagerank_with_priors(graph, &prior, &config.pagerank)?;
    let scores = graph.nodes().iter().zip(&run.scores).filter_map(|(node, &s)| match node {
        NodeKind::Element(name) if s > 0.0 => Some((name.clone(), s)),
        _ => None,
    });
    Ok(Ranking::from_scores(scores).apply_policy(query, config.policy))
}

#[derive(Debug, Clone)]
pub struct GraphRecommender {
    graphs: Arc<ProcessGraphs>,
    config: GraphConfig,
}

impl GraphRecommender {
    pub fn new(cb: &CaseBase, config: GraphConfig) -> Result<Self, RecommendError> {
        Self::with_graphs(Arc::new(build_process_graphs(cb)), config)
    }

    pub fn with_graphs(graphs: Arc<ProcessGraphs>, config: GraphConfig) -> Result<Self, RecommendError> {
        config.pagerank.validate()?;
        Ok(Self { graphs, config })
    }

    pub fn graph(&self, process: &str) -> Option<&CaseGraph> {
        self.graphs.get(process)
    }

    pub fn config(&self) -> &GraphConfig {
        &self.config
    }
}

impl Recommender for GraphRecommender {
    fn name(&self) -> String {
        "graph".into()
    }

    fn recommend(&self, query: &Query) -> Result<Ranking, RecommendError> {
        match self.graphs.get(&query.business_process) {
            Some(graph) => graph_recommend(query, graph, &self.config),
            None => {
                log::debug!("no graph for process {:?}", query.business_process);
                Ok(Ranking::empty())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::case::SolutionElement;

    fn case(id: &str, industry: &str, elements: &[&str]) -> Case {
        Case {
            id: id.into(),
            industry: industry.into(),
            business_process: "sales".into(),
            goal: String::new(),
            target_groups: BTreeSet::new(),
            elements: elements.iter().map(|e| SolutionElement::kpi(e)).collect(),
        }
    }

    #[test]
    fn single_case_graph_counts() {
        let g = build_case_graph(&[case("c", "all/a", &["x", "y", "z"])]).unwrap();
        assert_eq!(g.node_count(), 5);
        assert_eq!(g.edge_count(), 4);
        let c = g.find(&NodeKind::Case("c".into())).unwrap();
        assert_eq!(g.degree(c), 4);
    }

    #[test]
    fn shared_elements_have_degree_two() {
        let g = build_case_graph(&[case("c1", "all/a", &["x", "y"]), case("c2", "all/a", &["x", "y"])]).unwrap();
        assert_eq!(g.degree(g.element_node("x").unwrap()), 2);
        assert_eq!(g.degree(g.element_node("y").unwrap()), 2);
        assert_eq!(g.degree(g.industry_node("all/a").unwrap()), 2);
    }

    #[test]
    fn disjoint_cases_give_two_components() {
        let g = build_case_graph(&[case("c1", "all/a", &["x"]), case("c2", "all/b", &["y"])]).unwrap();
        assert_eq!(g.component_count(), 2);
    }

    #[test]
    fn empty_and_mixed_inputs() {
        assert_eq!(build_case_graph(&[]).unwrap().node_count(), 0);
        let mut other = case("c2", "all/a", &["x"]);
        other.business_process = "hr".into();
        assert!(build_case_graph(&[case("c1", "all/a", &["x"]), other]).is_err());
    }

    #[test]
    fn full_teleport_returns_prior() {
        let g = build_case_graph(&[case("c1", "all/a", &["x", "y"])]).unwrap();
        let prior = PriorVector::uniform(g.node_count(), &[0, 2]).unwrap();
        let run = pagerank_with_priors(&g, &prior, &PageRankConfig { teleport: 1.0, ..Default::default() }).unwrap();
        assert_eq!(run.scores, prior.mass());
    }

    #[test]
    fn symmetric_orbits_score_equally() {
        // A 4-cycle with uniform prior: every node is in one orbit.
        let nodes = (0..4).map(|i| NodeKind::Element(format!("n{i}"))).collect();
        let g = CaseGraph::from_edges(nodes, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let prior = PriorVector::uniform(4, &[0, 1, 2, 3]).unwrap();
        let run = pagerank_with_priors(&g, &prior, &PageRankConfig::default()).unwrap();
        for s in &run.scores {
            assert!((s - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn path_graph_matches_closed_form() {
        // A–B–C, prior on A, t = 0.3. Solving p = t·e_A + (1−t)·Wᵀp by hand:
        // pA = 0.3 + 0.35·pB, pB = 0.7·(pA + pC), pC = 0.35·pB
        // ⇒ pB = 0.7·(0.3 + 0.7·pB) ⇒ pB = 0.21/0.51, pA = 0.3 + 0.35·pB, pC = 0.35·pB.
        let nodes = ["a", "b", "c"].iter().map(|n| NodeKind::Element(n.to_string())).collect();
        let g = CaseGraph::from_edges(nodes, &[(0, 1), (1, 2)]);
        let prior = PriorVector::new(vec![1.0, 0.0, 0.0]).unwrap();
        let cfg = PageRankConfig { teleport: 0.3, tolerance: 1e-14, max_iterations: 10_000 };
        let run = pagerank_with_priors(&g, &prior, &cfg).unwrap();
        let pb = 0.21 / 0.51;
        let expected = [0.3 + 0.35 * pb, pb, 0.35 * pb];
        assert!(run.converged);
        for (s, e) in run.scores.iter().zip(expected) {
            assert!((s - e).abs() < 1e-10, "{s} vs {e}");
        }
        assert!((run.scores.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_convergence_is_flagged() {
        let nodes = ["a", "b", "c"].iter().map(|n| NodeKind::Element(n.to_string())).collect();
        let g = CaseGraph::from_edges(nodes, &[(0, 1), (1, 2)]);
        let prior = PriorVector::new(vec![1.0, 0.0, 0.0]).unwrap();
        let cfg = PageRankConfig { teleport: 0.1, tolerance: 1e-15, max_iterations: 3 };
        let run = pagerank_with_priors(&g, &prior, &cfg).unwrap();
        assert!(!run.converged);
        assert_eq!(run.iterations, 3);
    }

    #[test]
    fn invalid_parameters() {
        let g = build_case_graph(&[case("c1", "all/a", &["x"])]).unwrap();
        let prior = PriorVector::uniform(g.node_count(), &[0]).unwrap();
        assert!(pagerank_with_priors(&g, &prior, &PageRankConfig { teleport: 0.0, ..Default::default() }).is_err());
        assert!(pagerank_with_priors(&g, &prior, &PageRankConfig { tolerance: 0.0, ..Default::default() }).is_err());
        assert!(PriorVector::new(vec![0.5, 0.4]).is_err());
        assert!(PriorVector::new(vec![1.5, -0.5]).is_err());
        assert!(PriorVector::uniform(3, &[]).is_err());
    }

    #[test]
    fn verbosity_zero_prior_is_industry() {
        let g = build_case_graph(&[case("c1", "all/a", &["x", "y"])]).unwrap();
        let q = Query::new("all/a", "sales");
        assert_eq!(query_prior_support(&q, &g, true), vec![g.industry_node("all/a").unwrap()]);
        assert_eq!(query_prior_support(&q, &g, false), vec![g.industry_node("all/a").unwrap()]);
    }

    #[test]
    fn two_elements_plus_industry_share_thirds() {
        let g = build_case_graph(&[case("c1", "all/a", &["x", "y", "z"])]).unwrap();
        let q = Query::new("all/a", "sales").with_elements([SolutionElement::kpi("x"), SolutionElement::kpi("y"), SolutionElement::kpi("unseen")]);
        let support = query_prior_support(&q, &g, true);
        let prior = PriorVector::uniform(g.node_count(), &support).unwrap();
        let nonzero: Vec<f64> = prior.mass().iter().copied().filter(|&m| m > 0.0).collect();
        assert_eq!(nonzero.len(), 3);
        assert!(nonzero.iter().all(|m| (m - 1.0 / 3.0).abs() < 1e-15));
        assert_eq!(query_prior_support(&q, &g, false).len(), 2);
    }

    #[test]
    fn absent_prior_gives_empty_ranking() {
        let g = build_case_graph(&[case("c1", "all/a", &["x"])]).unwrap();
        let q = Query::new("all/b", "sales").with_elements([SolutionElement::kpi("nope")]);
        assert!(graph_recommend(&q, &g, &GraphConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn ranking_contains_only_elements() {
        let cb_cases = [case("c1", "all/a", &["x", "y"]), case("c2", "all/a", &["y", "z"]), case("c3", "all/b", &["w"])];
        let g = build_case_graph(&cb_cases).unwrap();
        let q = Query::new("all/a", "sales").with_elements([SolutionElement::kpi("x")]);
        let r = graph_recommend(&q, &g, &GraphConfig::default()).unwrap();
        let names: Vec<&str> = r.names().collect();
        assert_eq!(names.len(), 3, "{names:?}");
        assert!(!names.contains(&"w"), "unreachable element must score 0 and be left out");
        let excl = graph_recommend(&q, &g, &GraphConfig { policy: QueryElementPolicy::Exclude, ..Default::default() }).unwrap();
        assert!(excl.score_of("x").is_none());
    }
}
