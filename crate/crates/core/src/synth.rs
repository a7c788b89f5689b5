//! Seeded synthetic case bases.
//!
//! The generator builds a regular industry taxonomy and gives every non-root
//! industry node a KPI pool: leaves get `kpi_pool_size` specific KPIs, inner
//! nodes get `shared_kpi_pool_size` KPIs common to everything below them.
//! Each top-level sector has one dimension pool per business process.
//!
//! Industries with the same parent form a group. A group has a few goal
//! topics, each with its own vocabulary and usual target groups, and every
//! (group, process, topic) cluster has a template solution. Template KPIs
//! come from the group's pools and are shared by the topic's clusters across
//! processes unless `process_specific_kpis` is set; template dimensions come
//! from the process's pool. Cases are spread evenly over the clusters.
//!
//! A case phrases its goal in the topic's words, keeps each template element
//! with probability `template_keep`, and replaces the dropped ones with fresh
//! draws. Any KPI draw comes from a sibling industry (at any level of the
//! taxonomy) with probability `overlap_ratio`. Fresh KPIs otherwise come from
//! an inner ancestor with probability `shared_share` and from the case's own
//! leaf industry the rest of the time. Popularity within a pool is
//! Zipf-shaped.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::case::{Case, CaseBase, ElementKind, ElementSet, IndustryTaxonomy, SolutionElement, TargetGroup, TaxonomyNode};
use crate::error::GenerateError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub cases: usize,
    pub taxonomy_branching: usize,
    pub taxonomy_depth: usize,
    /// KPIs specific to each leaf industry.
    pub kpi_pool_size: usize,
    /// KPIs of each inner industry node, shared by its descendants.
    pub shared_kpi_pool_size: usize,
    /// Dimensions available to each (top-level sector, process) pair.
    pub dimension_pool_size: usize,
    /// Probability that a KPI comes from the pool of a sibling industry at
    /// some level of the taxonomy.
    pub overlap_ratio: f64,
    /// Probability that a fresh KPI comes from an inner ancestor's pool.
    pub shared_share: f64,
    /// Probability that a template element is kept in a case.
    pub template_keep: f64,
    pub processes: Vec<String>,
    pub mean_case_size: f64,
    pub case_size_sd: f64,
    /// Fraction of a case's elements that are KPIs.
    pub kpi_share: f64,
    /// Whether KPI templates and KPI popularity differ between processes.
    /// Dimensions always do.
    pub process_specific_kpis: bool,
    /// Zipf exponent of element popularity within a pool.
    pub popularity_exponent: f64,
    /// Goal topics per industry group.
    pub goal_topics: usize,
    pub goal_topic_words: usize,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            cases: 82,
            taxonomy_branching: 3,
            taxonomy_depth: 2,
            kpi_pool_size: 30,
            shared_kpi_pool_size: 40,
            dimension_pool_size: 24,
            overlap_ratio: 0.15,
            shared_share: 0.3,
            template_keep: 0.9,
            processes: vec!["sales".into(), "finance".into(), "operations".into()],
            mean_case_size: 28.0,
            case_size_sd: 5.0,
            kpi_share: 0.5,
            process_specific_kpis: false,
            popularity_exponent: 1.0,
            goal_topics: 3,
            goal_topic_words: 5,
            seed: 42,
        }
    }
}

const KPI_PREFIXES: [&str; 6] = ["number of", "average", "total", "share of", "cost per", "growth"];
const GOAL_VERBS: [&str; 6] = ["increase", "reduce", "monitor", "optimise", "understand", "improve"];
const SYLLABLES: [&str; 24] = [
    "ka", "lo", "mi", "ta", "ren", "sa", "vo", "qui", "dor", "pel", "ny", "bri", "gos", "tem", "fa", "lu", "zer", "hal",
    "cor", "mun", "ves", "tri", "pra", "dex",
];

impl GenConfig {
    fn max_case_size(&self) -> usize {
        (self.mean_case_size + 3.0 * self.case_size_sd).round().max(2.0) as usize
    }

    fn kpi_count(&self, size: usize) -> usize {
        ((size as f64 * self.kpi_share).round() as usize).clamp(1, size)
    }

    pub fn validate(&self) -> Result<(), GenerateError> {
        let infeasible = |m: String| Err(GenerateError::Infeasible(m));
        if self.cases == 0 || self.taxonomy_branching == 0 || self.kpi_pool_size == 0 || self.goal_topics == 0 || self.goal_topic_words == 0
        {
            return infeasible("counts must be positive".into());
        }
        if self.processes.is_empty() {
            return infeasible("at least one business process is required".into());
        }
        if !(0.0..=1.0).contains(&self.overlap_ratio) {
            return infeasible(format!("overlap ratio {} outside [0, 1]", self.overlap_ratio));
        }
        if !(0.0..=1.0).contains(&self.shared_share) || self.overlap_ratio + self.shared_share > 1.0 {
            return infeasible(format!("shared share {} outside [0, 1 - overlap ratio]", self.shared_share));
        }
        if !(0.0..=1.0).contains(&self.template_keep) {
            return infeasible(format!("template keep {} outside [0, 1]", self.template_keep));
        }
        if !(self.kpi_share > 0.0 && self.kpi_share <= 1.0) {
            return infeasible(format!("kpi share {} outside (0, 1]", self.kpi_share));
        }
        if !(self.mean_case_size >= 1.0) || !(self.case_size_sd >= 0.0) {
            return infeasible("case size distribution must have mean >= 1 and sd >= 0".into());
        }
        if !(self.popularity_exponent >= 0.0 && self.popularity_exponent.is_finite()) {
            return infeasible("popularity exponent must be non-negative".into());
        }
        let max_size = self.max_case_size();
        let kpis = self.kpi_count(max_size);
        if kpis > self.kpi_pool_size {
            return infeasible(format!("KPI pool of {} is smaller than the {kpis} KPIs a case may need", self.kpi_pool_size));
        }
        if max_size - kpis > self.dimension_pool_size {
            return infeasible(format!(
                "dimension pool of {} is smaller than the {} dimensions a case may need",
                self.dimension_pool_size,
                max_size - kpis
            ));
        }
        let nodes: usize = (1..=self.taxonomy_depth as u32).map(|d| self.taxonomy_branching.saturating_pow(d)).sum();
        if nodes.saturating_mul(self.kpi_pool_size.max(self.shared_kpi_pool_size) + 1) > 200_000 {
            return infeasible("vocabulary too large".into());
        }
        Ok(())
    }
}

/// A named pool with per-process popularity weights.
struct Pool {
    names: Vec<String>,
    weights: Vec<Vec<f64>>,
}

impl Pool {
    /// `orders` distinct popularity orders are cycled over the processes.
    fn new(names: Vec<String>, processes: usize, orders: usize, exponent: f64, rng: &mut ChaCha8Rng) -> Self {
        let distinct: Vec<Vec<f64>> = (0..orders.clamp(1, processes))
            .map(|_| {
                let mut order: Vec<usize> = (0..names.len()).collect();
                order.shuffle(rng);
                zipf_weights(names.len(), exponent, &order)
            })
            .collect();
        let weights = (0..processes).map(|p| distinct[p % distinct.len()].clone()).collect();
        Self { names, weights }
    }

    /// Draws one name not yet in `taken`, by popularity.
    fn draw(&self, process: usize, taken: &ElementSet, rng: &mut ChaCha8Rng) -> Option<String> {
        let free: Vec<usize> = (0..self.names.len()).filter(|&i| !taken.contains(&self.names[i])).collect();
        let weights: Vec<f64> = free.iter().map(|&i| self.weights[process][i]).collect();
        weighted_sample(rng, &weights, 1).first().map(|&j| self.names[free[j]].clone())
    }
}

struct WordMint {
    used: BTreeSet<String>,
}

impl WordMint {
    fn fresh(&mut self, rng: &mut ChaCha8Rng) -> String {
        loop {
            let n = rng.random_range(2..=3);
            let word: String = (0..n).map(|_| SYLLABLES[rng.random_range(0..SYLLABLES.len())]).collect();
            if self.used.insert(word.clone()) {
                return word;
            }
        }
    }
}

/// Weighted sampling without replacement (exponential-key method).
fn weighted_sample(rng: &mut ChaCha8Rng, weights: &[f64], amount: usize) -> Vec<usize> {
    let mut keys: Vec<(f64, usize)> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
            (-u.ln() / w, i)
        })
        .collect();
    keys.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    keys.into_iter().take(amount).map(|(_, i)| i).collect()
}

/// Every other KPI carries a generic prefix such as "number of".
fn kpi_name(i: usize, stem: String) -> String {
    if i % 2 == 0 {
        stem
    } else {
        format!("{} {stem}", KPI_PREFIXES[(i / 2) % KPI_PREFIXES.len()])
    }
}

fn zipf_weights(len: usize, exponent: f64, order: &[usize]) -> Vec<f64> {
    let mut w = vec![0.0; len];
    for (rank, &item) in order.iter().enumerate() {
        w[item] = 1.0 / ((rank + 1) as f64).powf(exponent);
    }
    w
}

fn build_taxonomy(cfg: &GenConfig) -> TaxonomyNode {
    fn grow(name: String, depth: usize, cfg: &GenConfig) -> TaxonomyNode {
        if depth == cfg.taxonomy_depth {
            return TaxonomyNode::leaf(name);
        }
        let children = (0..cfg.taxonomy_branching).map(|i| grow(format!("{name}-{}", i + 1), depth + 1, cfg)).collect();
        TaxonomyNode::with_children(name, children)
    }
    if cfg.taxonomy_depth == 0 {
        return TaxonomyNode::leaf("industry");
    }
    let sectors = (0..cfg.taxonomy_branching).map(|i| grow(format!("sector{}", i + 1), 1, cfg)).collect();
    TaxonomyNode::with_children("industry", sectors)
}

struct Leaf {
    path: String,
    /// Inner non-root ancestors, nearest first.
    ancestors: Vec<String>,
    siblings: Vec<String>,
    sector: String,
    /// Leaves sharing this key share templates and topics.
    template_key: String,
}

struct Topic {
    words: Vec<String>,
    target_groups: BTreeSet<TargetGroup>,
}

struct World {
    leaves: Vec<Leaf>,
    kpis: BTreeMap<String, Pool>,
    /// Keyed by (sector, process).
    dimensions: BTreeMap<(String, usize), Pool>,
    shared_topic: Vec<String>,
    topics: BTreeMap<String, Vec<Topic>>,
}

impl World {
    fn build(cfg: &GenConfig, taxonomy: &IndustryTaxonomy, rng: &mut ChaCha8Rng) -> Self {
        let mut mint = WordMint { used: BTreeSet::new() };
        let np = cfg.processes.len();
        let e = cfg.popularity_exponent;
        let kpi_orders = if cfg.process_specific_kpis { np } else { 1 };
        let root = taxonomy.root_path().to_string();
        let mut kpis = BTreeMap::new();
        let mut dimensions = BTreeMap::new();
        for path in taxonomy.paths() {
            if path == root {
                continue;
            }
            let leaf = taxonomy.children(path).is_empty();
            let size = if leaf { cfg.kpi_pool_size } else { cfg.shared_kpi_pool_size };
            let names = (0..size).map(|i| kpi_name(i, mint.fresh(rng))).collect();
            kpis.insert(path.to_string(), Pool::new(names, np, kpi_orders, e, rng));
            if taxonomy.parent(path) == Some(root.as_str()) {
                for proc in 0..np {
                    let names = (0..cfg.dimension_pool_size).map(|_| mint.fresh(rng)).collect();
                    dimensions.insert((path.to_string(), proc), Pool::new(names, np, np, e, rng));
                }
            }
        }
        if taxonomy.depth(&root) == Some(0) && taxonomy.children(&root).is_empty() {
            // A single-node taxonomy: the root is the only industry.
            let names = (0..cfg.kpi_pool_size).map(|i| kpi_name(i, mint.fresh(rng))).collect();
            kpis.insert(root.clone(), Pool::new(names, np, kpi_orders, e, rng));
            for proc in 0..np {
                let names = (0..cfg.dimension_pool_size).map(|_| mint.fresh(rng)).collect();
                dimensions.insert((root.clone(), proc), Pool::new(names, np, np, e, rng));
            }
        }
        let leaves = taxonomy
            .leaves()
            .map(|path| {
                let mut ancestors = Vec::new();
                let mut cur = taxonomy.parent(path);
                while let Some(p) = cur {
                    if p == root {
                        break;
                    }
                    ancestors.push(p.to_string());
                    cur = taxonomy.parent(p);
                }
                let sector = ancestors.last().cloned().unwrap_or_else(|| path.to_string());
                // Siblings at every level: of the leaf, of its parent, and so on.
                let mut siblings = Vec::new();
                for node in std::iter::once(path).chain(ancestors.iter().map(String::as_str)) {
                    if let Some(p) = taxonomy.parent(node) {
                        siblings.extend(taxonomy.children(p).into_iter().filter(|c| *c != node).map(str::to_string));
                    }
                }
                let template_key = ancestors.first().cloned().unwrap_or_else(|| path.to_string());
                Leaf { path: path.to_string(), ancestors, siblings, sector, template_key }
            })
            .collect();
        let shared_topic = (0..cfg.goal_topic_words).map(|_| mint.fresh(rng)).collect();
        let mut world = Self { leaves, kpis, dimensions, shared_topic, topics: BTreeMap::new() };
        for i in 0..world.leaves.len() {
            let key = world.leaves[i].template_key.clone();
            if world.topics.contains_key(&key) {
                continue;
            }
            let topics = (0..cfg.goal_topics)
                .map(|_| {
                    let words = (0..cfg.goal_topic_words).map(|_| mint.fresh(rng)).collect();
                    Topic { words, target_groups: random_target_groups(rng) }
                })
                .collect();
            world.topics.insert(key, topics);
        }
        world
    }

    fn template_kpi(&self, cfg: &GenConfig, leaf: &Leaf, proc: usize, taken: &ElementSet, rng: &mut ChaCha8Rng) -> Option<String> {
        if !leaf.siblings.is_empty() && rng.random::<f64>() < cfg.overlap_ratio {
            let s = &leaf.siblings[rng.random_range(0..leaf.siblings.len())];
            if let Some(name) = self.kpis[s].draw(proc, taken, rng) {
                return Some(name);
            }
        }
        if leaf.ancestors.is_empty() {
            return self.kpis[&leaf.path].draw(proc, taken, rng);
        }
        let pool = &leaf.ancestors[rng.random_range(0..leaf.ancestors.len())];
        self.kpis[pool].draw(proc, taken, rng).or_else(|| leaf.ancestors.iter().find_map(|a| self.kpis[a].draw(proc, taken, rng)))
    }

    fn fresh_kpi(&self, cfg: &GenConfig, leaf: &Leaf, proc: usize, taken: &ElementSet, rng: &mut ChaCha8Rng) -> Option<String> {
        let r: f64 = rng.random();
        let pick = |list: &[String], rng: &mut ChaCha8Rng| list[rng.random_range(0..list.len())].clone();
        let first = if r < cfg.overlap_ratio && !leaf.siblings.is_empty() {
            let s = pick(&leaf.siblings, rng);
            self.kpis[&s].draw(proc, taken, rng)
        } else if r < cfg.overlap_ratio + cfg.shared_share && !leaf.ancestors.is_empty() {
            let a = pick(&leaf.ancestors, rng);
            self.kpis[&a].draw(proc, taken, rng)
        } else {
            None
        };
        first.or_else(|| self.kpis[&leaf.path].draw(proc, taken, rng))
    }

    fn dimension(&self, leaf: &Leaf, proc: usize, taken: &ElementSet, rng: &mut ChaCha8Rng) -> Option<String> {
        self.dimensions[&(leaf.sector.clone(), proc)].draw(proc, taken, rng)
    }
}

fn random_target_groups(rng: &mut ChaCha8Rng) -> BTreeSet<TargetGroup> {
    let mut groups = BTreeSet::new();
    while groups.is_empty() {
        for g in TargetGroup::ALL {
            if rng.random::<f64>() < 0.5 {
                groups.insert(g);
            }
        }
    }
    groups
}

pub fn generate(cfg: &GenConfig) -> Result<CaseBase, GenerateError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let taxonomy = Arc::new(IndustryTaxonomy::new(build_taxonomy(cfg))?);
    let world = World::build(cfg, &taxonomy, &mut rng);
    let size_dist = Normal::new(cfg.mean_case_size, cfg.case_size_sd)
        .map_err(|e| GenerateError::Infeasible(format!("case size distribution: {e}")))?;
    let max_size = cfg.max_case_size();
    let draw_size = |rng: &mut ChaCha8Rng| (size_dist.sample(rng).round() as i64).clamp(2, max_size as i64) as usize;
    let split = |size: usize| {
        let k = cfg.kpi_count(size);
        (k, (size - k).min(cfg.dimension_pool_size))
    };

    let np = cfg.processes.len();
    // KPI templates are keyed by process only when KPIs are process specific;
    // dimension templates always are.
    let mut kpi_templates: BTreeMap<(String, usize, usize), ElementSet> = BTreeMap::new();
    let mut templates: BTreeMap<(String, usize, usize), ElementSet> = BTreeMap::new();
    for leaf in &world.leaves {
        for (proc, topic) in (0..np).flat_map(|p| (0..cfg.goal_topics).map(move |t| (p, t))) {
            let key = (leaf.template_key.clone(), proc, topic);
            if templates.contains_key(&key) {
                continue;
            }
            let (k, d) = split(draw_size(&mut rng));
            let kpi_key = (leaf.template_key.clone(), if cfg.process_specific_kpis { proc } else { 0 }, topic);
            let mut t = kpi_templates
                .entry(kpi_key)
                .or_insert_with(|| {
                    let mut t = ElementSet::new();
                    while t.count_kind(ElementKind::Kpi) < k {
                        let Some(name) = world.template_kpi(cfg, leaf, proc, &t, &mut rng) else { break };
                        t.insert(SolutionElement::kpi(&name));
                    }
                    t
                })
                .clone();
            while t.count_kind(ElementKind::Dimension) < d {
                let Some(name) = world.dimension(leaf, proc, &t, &mut rng) else { break };
                t.insert(SolutionElement::dimension(&name));
            }
            templates.insert(key, t);
        }
    }

    // Cases are spread evenly over (group, process, topic) clusters.
    let mut groups: BTreeMap<&str, Vec<&Leaf>> = BTreeMap::new();
    for leaf in &world.leaves {
        groups.entry(leaf.template_key.as_str()).or_default().push(leaf);
    }
    let clusters: Vec<(&str, usize, usize)> = groups
        .keys()
        .flat_map(|&g| (0..np).flat_map(move |p| (0..cfg.goal_topics).map(move |t| (g, p, t))))
        .collect();
    let mut allocation: Vec<(&str, usize, usize)> = Vec::with_capacity(cfg.cases + clusters.len());
    while allocation.len() < cfg.cases {
        let mut round = clusters.clone();
        round.shuffle(&mut rng);
        allocation.extend(round);
    }
    allocation.truncate(cfg.cases);
    allocation.shuffle(&mut rng);

    let width = cfg.cases.to_string().len().max(3);
    let mut cases = Vec::with_capacity(cfg.cases);
    for (n, &(group, proc, t)) in allocation.iter().enumerate() {
        let members = &groups[group];
        let leaf = members[rng.random_range(0..members.len())];
        let topic = &world.topics[group][t];
        // Dropped template elements are replaced by fresh ones of the same
        // kind, so a case is as large as its template.
        let template = &templates[&(group.to_string(), proc, t)];
        let (k, d) = (template.count_kind(ElementKind::Kpi), template.count_kind(ElementKind::Dimension));
        let mut elements: ElementSet =
            template.iter().filter(|_| rng.random::<f64>() < cfg.template_keep).cloned().collect();
        while elements.count_kind(ElementKind::Kpi) < k {
            let name = world.fresh_kpi(cfg, leaf, proc, &elements, &mut rng).expect("leaf pool covers the largest case");
            elements.insert(SolutionElement::kpi(&name));
        }
        while elements.count_kind(ElementKind::Dimension) < d {
            let name = world.dimension(leaf, proc, &elements, &mut rng).expect("dimension pool covers the largest case");
            elements.insert(SolutionElement::dimension(&name));
        }

        let mut words = vec![GOAL_VERBS[rng.random_range(0..GOAL_VERBS.len())].to_string()];
        for _ in 0..rng.random_range(2..=4) {
            let vocab = if rng.random::<f64>() < 0.8 { &topic.words } else { &world.shared_topic };
            words.push(vocab[rng.random_range(0..vocab.len())].clone());
        }
        let mut target_groups = topic.target_groups.clone();
        if rng.random::<f64>() < 0.2 {
            let g = TargetGroup::ALL[rng.random_range(0..TargetGroup::ALL.len())];
            if !target_groups.remove(&g) {
                target_groups.insert(g);
            }
            if target_groups.is_empty() {
                target_groups.insert(g);
            }
        }
        cases.push(Case {
            id: format!("case-{:0width$}", n + 1),
            industry: leaf.path.clone(),
            business_process: cfg.processes[proc].clone(),
            goal: words.join(" "),
            target_groups,
            elements,
        });
    }
    // Round-trip through the document form so generated data passes the
    // same validation as loaded data.
    let cb = CaseBase::new(cases, taxonomy)?;
    let mut warnings = Vec::new();
    Ok(cb.to_document().into_case_base(&mut warnings)?)
}
