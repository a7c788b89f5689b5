//! Hybrid recommendation of KPIs and dimensions for BI solution design.
//!
//! A consultant describes a project (industry, business process, goal, target
//! groups) and optionally picks some elements. Three engines rank further
//! elements from a base of past projects:
//!
//! * [`cbr`] retrieves the most similar past cases and votes their elements,
//! * [`graph`] runs PageRank with priors over a case/industry/element graph,
//! * [`cf`] is a case-element kNN baseline.
//!
//! [`hybrid`] blends the first two with a weight that shifts from CBR to the
//! graph as the query grows. [`eval`] measures all of them with a
//! leave-one-out protocol and [`synth`] generates case bases to run it on.

pub mod case;
pub mod cbr;
pub mod cf;
pub mod config;
pub mod engine;
pub mod error;
pub mod eval;
pub mod graph;
pub mod hybrid;
pub mod recommend;
pub mod similarity;
pub mod synth;

pub use case::{load_case_base, parse_case_base, Case, CaseBase, ElementKind, SolutionElement, TargetGroup};
pub use config::EngineConfig;
pub use engine::{EngineSpec, TrainingStructures};
pub use error::{CaseBaseError, ConfigError, EvalError, GenerateError, RecommendError};
pub use eval::{leave_one_out, EvalConfig, EvalReport};
pub use recommend::{Query, QueryElementPolicy, Ranking, Recommender, ScoredElement};
pub use synth::{generate, GenConfig};
