use thiserror::Error;

/// Errors raised while loading, validating or summarising a case base.
#[derive(Debug, Error)]
pub enum CaseBaseError {
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("case-base document does not parse: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid taxonomy: {0}")]
    Taxonomy(String),
    #[error("case {case_id:?}, field `{field}`: {message}")]
    Validation { case_id: String, field: &'static str, message: String },
    #[error("element {name:?} is declared as {first} in case {first_case:?} and as {second} in case {second_case:?}")]
    KindConflict { name: String, first: String, first_case: String, second: String, second_case: String },
    #[error("case base is empty")]
    Empty,
    #[error("verbosity threshold is zero: no {0} elements in the case base")]
    ZeroThreshold(&'static str),
}

impl CaseBaseError {
    pub(crate) fn validation(case_id: &str, field: &'static str, message: impl Into<String>) -> Self {
        Self::Validation { case_id: case_id.to_string(), field, message: message.into() }
    }
}

/// Errors raised by recommenders for a particular query.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecommendError {
    #[error("unsupported query: {0}")]
    UnsupportedQuery(String),
    #[error("query business process {query:?} does not match case process {case:?}")]
    ProcessMismatch { query: String, case: String },
    #[error("unknown industry {0:?}")]
    UnknownIndustry(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Configuration parsing and validation errors.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config does not parse: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config value `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("invalid engine spec {spec:?}: {message}")]
    EngineSpec { spec: String, message: String },
}

impl ConfigError {
    pub(crate) fn invalid(key: &str, message: impl Into<String>) -> Self {
        Self::Invalid { key: key.to_string(), message: message.into() }
    }
}

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("infeasible generator config: {0}")]
    Infeasible(String),
    #[error(transparent)]
    CaseBase(#[from] CaseBaseError),
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("leave-one-out needs at least 2 cases, got {0}")]
    TooFewCases(usize),
    #[error("verbosity levels must be strictly increasing")]
    UnorderedLevels,
    #[error("no engines configured")]
    NoEngines,
    #[error(transparent)]
    CaseBase(#[from] CaseBaseError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}
