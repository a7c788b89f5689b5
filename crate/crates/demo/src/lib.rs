//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Everything runs client side on a generated case base: the mixing curve
//! of the hybrid, an interactive select-and-rerank session, and a small
//! leave-one-out evaluation.

use bizrec_core::case::ElementKind;
use bizrec_core::hybrid::{alpha, HybridRecommender};
use bizrec_core::{
    generate, leave_one_out, CaseBase, EngineConfig, EngineSpec, EvalConfig, GenConfig, Query, TrainingStructures,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// α for every verbosity in `0..=max_verbosity`.
#[wasm_bindgen]
pub fn alpha_curve(beta: f64, verbosity_threshold: f64, max_verbosity: usize) -> Vec<f64> {
    (0..=max_verbosity).map(|q| alpha(q, verbosity_threshold, beta)).collect()
}

#[derive(Serialize)]
struct Item<'a> {
    element: &'a str,
    kind: ElementKind,
    score: f64,
}

#[derive(Serialize)]
struct Page<'a> {
    verbosity: usize,
    alpha: f64,
    beta: f64,
    verbosity_threshold: f64,
    items: Vec<Item<'a>>,
    selection: Vec<&'a str>,
}

#[derive(Serialize)]
struct Profile<'a> {
    industry: &'a str,
    business_process: &'a str,
    goal: &'a str,
}

fn generated(cases: usize, seed: u64) -> Result<CaseBase, String> {
    generate(&GenConfig { cases, seed, ..GenConfig::default() }).map_err(|e| e.to_string())
}

/// One consultancy session against a generated case base.
#[wasm_bindgen]
pub struct DemoSession {
    cases: CaseBase,
    hybrid: HybridRecommender,
    query: Query,
    selection: Vec<String>,
}

impl DemoSession {
    pub fn create(cases: usize, seed: u64) -> Result<DemoSession, String> {
        let cb = generated(cases, seed)?;
        let config = EngineConfig::default();
        let training = TrainingStructures::build(cb.clone(), &config).map_err(|e| e.to_string())?;
        let hybrid = training.hybrid(&config, config.hybrid.beta).map_err(|e| e.to_string())?;
        let query = Query::from_case_demographics(&cb.cases()[0]);
        Ok(Self { cases: cb, hybrid, query, selection: Vec::new() })
    }

    pub fn choose_profile(&mut self, index: usize) -> Result<(), String> {
        let case = self.cases.cases().get(index).ok_or_else(|| format!("no profile {index}"))?;
        self.query = Query::from_case_demographics(case);
        self.selection.clear();
        Ok(())
    }

    pub fn select_element(&mut self, name: &str) -> Result<bool, String> {
        let kinds = self.cases.element_kinds();
        let kind = *kinds.get(name).ok_or_else(|| format!("unknown element {name:?}"))?;
        let added = self.query.add_element(bizrec_core::SolutionElement { name: name.to_string(), kind });
        if added {
            self.selection.push(name.to_string());
        }
        Ok(added)
    }

    pub fn page_json(&self, limit: usize) -> Result<String, String> {
        use bizrec_core::Recommender;
        let ranking =
            self.hybrid.recommend(&self.query).map_err(|e| e.to_string())?.without_query_elements(&self.query).truncated(limit);
        let kinds = self.cases.element_kinds();
        let config = self.hybrid.config();
        let page = Page {
            verbosity: self.query.verbosity(),
            alpha: config.alpha(self.query.verbosity()),
            beta: config.beta,
            verbosity_threshold: config.verbosity_threshold,
            items: ranking
                .iter()
                .map(|s| Item { element: &s.element, kind: kinds[&s.element], score: s.score })
                .collect(),
            selection: self.selection.iter().map(String::as_str).collect(),
        };
        Ok(serde_json::to_string(&page).expect("page serializes"))
    }
}

#[wasm_bindgen]
impl DemoSession {
    #[wasm_bindgen(constructor)]
    pub fn new(cases: usize, seed: u32) -> Result<DemoSession, JsError> {
        Self::create(cases, seed.into()).map_err(|e| JsError::new(&e))
    }

    /// Demographics of every generated case, usable as starting profiles.
    pub fn profiles(&self) -> String {
        let profiles: Vec<Profile> = self
            .cases
            .cases()
            .iter()
            .map(|c| Profile { industry: &c.industry, business_process: &c.business_process, goal: &c.goal })
            .collect();
        serde_json::to_string(&profiles).expect("profiles serialize")
    }

    /// Restarts the session from the demographics of case `index`.
    pub fn start(&mut self, index: usize) -> Result<(), JsError> {
        self.choose_profile(index).map_err(|e| JsError::new(&e))
    }

    /// Adds an element to the query; false if it was already selected.
    pub fn select(&mut self, name: &str) -> Result<bool, JsError> {
        self.select_element(name).map_err(|e| JsError::new(&e))
    }

    /// Current recommendations and hybrid state as JSON.
    pub fn recommend(&self, limit: usize) -> Result<String, JsError> {
        self.page_json(limit).map_err(|e| JsError::new(&e))
    }
}

pub fn evaluate_json(cases: usize, seed: u64, levels: &[usize]) -> Result<String, String> {
    let cb = generated(cases, seed)?;
    let engines = EngineSpec::parse_list("cbr:2,graph,hybrid:0.3").map_err(|e| e.to_string())?;
    let mut cfg = EvalConfig::new(engines, seed);
    cfg.verbosity_levels = levels.to_vec();
    let report = leave_one_out(&cb, &cfg).map_err(|e| e.to_string())?;
    #[derive(Serialize)]
    struct Summary<'a> {
        engines: &'a [String],
        levels: &'a [usize],
        map: &'a [Vec<Option<f64>>],
    }
    Ok(serde_json::to_string(&Summary { engines: &report.engines, levels: &report.levels, map: &report.map })
        .expect("summary serializes"))
}

/// Leave-one-out MAP of cbr:2, graph and hybrid:0.3 on a generated case base.
#[wasm_bindgen]
pub fn evaluate(cases: usize, seed: u32, levels: Vec<usize>) -> Result<String, JsError> {
    evaluate_json(cases, seed.into(), &levels).map_err(|e| JsError::new(&e))
}
