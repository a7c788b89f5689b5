//! Leave-one-out MAP recomputed by a deliberately naive implementation of the
//! CBR, graph and hybrid engines, compared against the harness.

use std::collections::{BTreeMap, BTreeSet};

use bizrec_core::case::ElementKind;
use bizrec_core::{generate, leave_one_out, Case, CaseBase, EngineSpec, EvalConfig, GenConfig};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const LEVELS: [usize; 5] = [0, 3, 8, 15, 40];
const SEED: u64 = 7;

struct Probe {
    industry: String,
    process: String,
    goal: String,
    groups: BTreeSet<String>,
    chosen: Vec<String>,
}

fn tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    for ch in text.chars().chain(std::iter::once(' ')) {
        if ch.is_alphanumeric() {
            current.push(ch);
        } else {
            if current.chars().count() >= 2 {
                out.push(current.to_lowercase());
            }
            current.clear();
        }
    }
    out
}

fn element_tokens<'a>(names: impl Iterator<Item = &'a str>) -> Vec<String> {
    names.flat_map(tokens).collect()
}

fn tfidf_cosine(a: &[String], b: &[String], docs: &[Vec<String>]) -> f64 {
    let idf = |t: &str| {
        let df = docs.iter().filter(|d| d.iter().any(|x| x == t)).count() as f64;
        ((1.0 + docs.len() as f64) / (1.0 + df)).ln() + 1.0
    };
    let vector = |toks: &[String]| {
        let mut v: BTreeMap<String, f64> = BTreeMap::new();
        for t in toks {
            *v.entry(t.clone()).or_default() += 1.0;
        }
        for (t, w) in v.iter_mut() {
            *w *= idf(t);
        }
        v
    };
    let (va, vb) = (vector(a), vector(b));
    let norm = |v: &BTreeMap<String, f64>| v.values().map(|w| w * w).sum::<f64>().sqrt();
    let (na, nb) = (norm(&va), norm(&vb));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let dot: f64 = va.iter().map(|(t, w)| w * vb.get(t).unwrap_or(&0.0)).sum();
    (dot / (na * nb)).min(1.0)
}

fn taxonomy_sim(a: &str, b: &str) -> f64 {
    if a == b {
        return 1.0;
    }
    let (pa, pb): (Vec<&str>, Vec<&str>) = (a.split('/').collect(), b.split('/').collect());
    let common = pa.iter().zip(&pb).take_while(|(x, y)| x == y).count();
    (common - 1) as f64 / (pa.len().max(pb.len()) - 1) as f64
}

fn sorted_desc(scores: BTreeMap<String, f64>) -> Vec<String> {
    let mut v: Vec<(String, f64)> = scores.into_iter().collect();
    v.sort_by(|a, b| {
        if (a.1 - b.1).abs() < 1e-12 {
            a.0.cmp(&b.0)
        } else {
            b.1.partial_cmp(&a.1).unwrap()
        }
    });
    v.into_iter().map(|(n, _)| n).collect()
}

fn cbr_scores(probe: &Probe, training: &[&Case], top_n: usize) -> BTreeMap<String, f64> {
    let goal_docs: Vec<Vec<String>> = training.iter().map(|c| tokens(&c.goal)).collect();
    let element_docs: Vec<Vec<String>> = training.iter().map(|c| element_tokens(c.elements.names())).collect();
    let query_elements = element_tokens(probe.chosen.iter().map(String::as_str));
    let mut sims: Vec<(f64, &Case)> = Vec::new();
    for (i, case) in training.iter().enumerate() {
        if case.business_process != probe.process {
            continue;
        }
        let groups: BTreeSet<String> = case.target_groups.iter().map(|g| g.as_str().to_string()).collect();
        let jaccard = if groups.is_empty() && probe.groups.is_empty() {
            1.0
        } else {
            groups.intersection(&probe.groups).count() as f64 / groups.union(&probe.groups).count() as f64
        };
        let s = 0.24 * taxonomy_sim(&probe.industry, &case.industry)
            + 0.06 * tfidf_cosine(&tokens(&probe.goal), &goal_docs[i], &goal_docs)
            + 0.10 * jaccard
            + 0.60 * tfidf_cosine(&query_elements, &element_docs[i], &element_docs);
        sims.push((s, case));
    }
    sims.sort_by(|a, b| if (a.0 - b.0).abs() < 1e-12 { a.1.id.cmp(&b.1.id) } else { b.0.partial_cmp(&a.0).unwrap() });
    let mut scores = BTreeMap::new();
    for (s, case) in sims.into_iter().take(top_n) {
        for e in case.elements.names() {
            *scores.entry(e.to_string()).or_insert(0.0) += s;
        }
    }
    scores
}

fn graph_scores(probe: &Probe, training: &[&Case]) -> BTreeMap<String, f64> {
    let mut ids: Vec<String> = Vec::new();
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    let id_of = |key: String, ids: &mut Vec<String>| match ids.iter().position(|k| *k == key) {
        Some(i) => i,
        None => {
            ids.push(key);
            ids.len() - 1
        }
    };
    for case in training.iter().filter(|c| c.business_process == probe.process) {
        let c = id_of(format!("case:{}", case.id), &mut ids);
        let i = id_of(format!("industry:{}", case.industry), &mut ids);
        edges.insert((c.min(i), c.max(i)));
        for e in case.elements.names() {
            let e = id_of(format!("element:{e}"), &mut ids);
            edges.insert((c.min(e), c.max(e)));
        }
    }
    let n = ids.len();
    let mut adj = vec![vec![false; n]; n];
    for &(a, b) in &edges {
        adj[a][b] = true;
        adj[b][a] = true;
    }
    let mut support: Vec<usize> = Vec::new();
    let industry = ids.iter().position(|k| *k == format!("industry:{}", probe.industry));
    if probe.chosen.is_empty() {
        support.extend(industry);
    } else {
        for e in &probe.chosen {
            support.extend(ids.iter().position(|k| *k == format!("element:{e}")));
        }
        support.extend(industry);
        support.sort_unstable();
        support.dedup();
    }
    if support.is_empty() {
        return BTreeMap::new();
    }
    let prior: Vec<f64> = (0..n).map(|i| if support.contains(&i) { 1.0 / support.len() as f64 } else { 0.0 }).collect();
    let mut p = prior.clone();
    for _ in 0..100 {
        let mut next = vec![0.0; n];
        let mut dangling = 0.0;
        for j in 0..n {
            let degree = adj[j].iter().filter(|x| **x).count();
            if degree == 0 {
                dangling += p[j];
            } else {
                for i in 0..n {
                    if adj[j][i] {
                        next[i] += p[j] / degree as f64;
                    }
                }
            }
        }
        for i in 0..n {
            next[i] = 0.3 * prior[i] + 0.7 * (next[i] + dangling * prior[i]);
        }
        let delta: f64 = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
        p = next;
        if delta < 1e-8 {
            break;
        }
    }
    ids.iter()
        .zip(&p)
        .filter_map(|(k, &s)| k.strip_prefix("element:").filter(|_| s > 0.0).map(|e| (e.to_string(), s)))
        .collect()
}

fn hybrid_scores(cbr: &BTreeMap<String, f64>, graph: &BTreeMap<String, f64>, alpha: f64) -> BTreeMap<String, f64> {
    let union: BTreeSet<&String> = cbr.keys().chain(graph.keys()).collect();
    let normalise = |m: &BTreeMap<String, f64>| {
        let values: Vec<f64> = union.iter().map(|k| *m.get(*k).unwrap_or(&0.0)).collect();
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        values.into_iter().map(|v| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 }).collect::<Vec<f64>>()
    };
    let (c, g) = (normalise(cbr), normalise(graph));
    union.into_iter().enumerate().map(|(i, k)| (k.clone(), alpha * c[i] + (1.0 - alpha) * g[i])).collect()
}

fn naive_ap(order: &[String], relevant: &BTreeSet<String>) -> f64 {
    let mut sum = 0.0;
    for k in 0..order.len() {
        if relevant.contains(&order[k]) {
            sum += order[..=k].iter().filter(|e| relevant.contains(*e)).count() as f64 / (k + 1) as f64;
        }
    }
    sum / relevant.len() as f64
}

/// `[level][engine]` MAP for cbr:2, graph and hybrid:0.3.
fn naive_map(cb: &CaseBase, exclude_query: bool) -> Vec<[f64; 3]> {
    let cases = cb.cases();
    let mut sums = vec![[0.0; 3]; LEVELS.len()];
    let mut counts = vec![0usize; LEVELS.len()];
    for (h, held) in cases.iter().enumerate() {
        let training: Vec<&Case> = cases.iter().enumerate().filter(|(i, _)| *i != h).map(|(_, c)| c).collect();
        let c_bar = training.iter().map(|c| c.elements.len()).sum::<usize>() as f64 / training.len() as f64 / 2.0;
        let mut kpis: Vec<String> =
            held.elements.iter().filter(|e| e.kind == ElementKind::Kpi).map(|e| e.name.clone()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        rng.set_stream(h as u64);
        kpis.shuffle(&mut rng);
        for (l, &level) in LEVELS.iter().enumerate() {
            let probe = Probe {
                industry: held.industry.clone(),
                process: held.business_process.clone(),
                goal: held.goal.clone(),
                groups: held.target_groups.iter().map(|g| g.as_str().to_string()).collect(),
                chosen: kpis.iter().take(level).cloned().collect(),
            };
            let relevant: BTreeSet<String> = held
                .elements
                .names()
                .filter(|e| !exclude_query || !probe.chosen.iter().any(|c| c == e))
                .map(str::to_string)
                .collect();
            if relevant.is_empty() {
                continue;
            }
            let q = probe.chosen.len() as f64;
            let alpha = if q <= c_bar { 1.0 - 0.7 * q / c_bar } else { 0.3 };
            let cbr = cbr_scores(&probe, &training, 2);
            let graph = graph_scores(&probe, &training);
            let hybrid = hybrid_scores(&cbr, &graph, alpha);
            for (e, scores) in [cbr, graph, hybrid].into_iter().enumerate() {
                let order: Vec<String> =
                    sorted_desc(scores).into_iter().filter(|n| !exclude_query || !probe.chosen.contains(n)).collect();
                sums[l][e] += naive_ap(&order, &relevant);
            }
            counts[l] += 1;
        }
    }
    sums.iter().zip(&counts).map(|(s, &n)| s.map(|v| v / n as f64)).collect()
}

fn harness_map(cb: &CaseBase, exclude_query: bool) -> Vec<[f64; 3]> {
    let mut cfg = EvalConfig::new(EngineSpec::parse_list("cbr:2,graph,hybrid:0.3").unwrap(), SEED);
    cfg.verbosity_levels = LEVELS.to_vec();
    cfg.engine_config.include_query_elements = !exclude_query;
    let report = leave_one_out(cb, &cfg).unwrap();
    report.map.iter().map(|row| [row[0].unwrap(), row[1].unwrap(), row[2].unwrap()]).collect()
}

fn base() -> CaseBase {
    generate(&GenConfig { cases: 10, seed: SEED, ..GenConfig::default() }).unwrap()
}

#[test]
fn harness_matches_naive_reimplementation() {
    let cb = base();
    for exclude in [false, true] {
        let (naive, harness) = (naive_map(&cb, exclude), harness_map(&cb, exclude));
        for (l, level) in LEVELS.iter().enumerate() {
            for e in 0..3 {
                assert!(
                    (naive[l][e] - harness[l][e]).abs() < 1e-9,
                    "exclude={exclude} verbosity {level} engine {e}: naive {} harness {}",
                    naive[l][e],
                    harness[l][e]
                );
            }
        }
    }
}

#[test]
fn excluding_query_elements_changes_the_score() {
    let cb = base();
    assert_ne!(harness_map(&cb, false)[2], harness_map(&cb, true)[2]);
}
