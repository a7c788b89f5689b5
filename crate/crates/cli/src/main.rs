//! `bizrec`: generate case bases, run leave-one-out evaluations, issue
//! one-shot recommendations and serve the session API.

use std::fs;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bizrec_core::case::TargetGroup;
use bizrec_core::eval::DEFAULT_VERBOSITY_LEVELS;
use bizrec_core::{
    generate, leave_one_out, load_case_base, CaseBase, EngineConfig, EngineSpec, EvalConfig, GenConfig, Query,
    SolutionElement, TrainingStructures,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Parser)]
#[command(name = "bizrec", version, about = "Hybrid recommender for BI solution elements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic case base.
    Gen(GenArgs),
    /// Leave-one-out MAP of one or more engines over verbosity levels.
    Eval(EvalArgs),
    /// Rank elements for a query file.
    Recommend(RecommendArgs),
    /// Serve the session API.
    Serve(ServeArgs),
}

#[derive(Parser)]
struct GenArgs {
    #[arg(long)]
    cases: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Generator settings (TOML); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RelevanceMode {
    All,
    ExcludeQuery,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Pretty,
    Csv,
    Json,
}

#[derive(Parser)]
struct EvalArgs {
    #[arg(long)]
    case_base: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "cbr:2,graph,hybrid:0.3")]
    engines: String,
    /// Comma-separated, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<usize>>,
    /// Engine settings (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum)]
    relevance_mode: Option<RelevanceMode>,
    #[arg(long, value_enum, default_value = "pretty")]
    format: ReportFormat,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RankingFormat {
    Pretty,
    Json,
}

#[derive(Parser)]
struct RecommendArgs {
    #[arg(long)]
    case_base: PathBuf,
    /// JSON file with industry, business_process, goal, target_groups and elements.
    #[arg(long)]
    query: PathBuf,
    #[arg(long, default_value = "hybrid")]
    engine: String,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    limit: usize,
    #[arg(long, value_enum)]
    relevance_mode: Option<RelevanceMode>,
    #[arg(long, value_enum, default_value = "pretty")]
    format: RankingFormat,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Parser)]
struct ServeArgs {
    #[arg(long)]
    case_base: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
    /// Append session events to this file and restore them on start.
    #[arg(long)]
    journal: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QueryFile {
    industry: String,
    business_process: String,
    #[serde(default)]
    goal: String,
    #[serde(default)]
    target_groups: Vec<String>,
    #[serde(default)]
    elements: Vec<SolutionElement>,
}

impl QueryFile {
    fn into_query(self) -> Result<Query> {
        let groups = self
            .target_groups
            .iter()
            .map(|g| TargetGroup::parse(g).with_context(|| format!("unknown target group {g:?}")))
            .collect::<Result<Vec<_>>>()?;
        Ok(Query::new(self.industry, self.business_process)
            .with_goal(self.goal)
            .with_target_groups(groups)
            .with_elements(self.elements.into_iter().map(|e| SolutionElement::new(&e.name, e.kind))))
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn engine_config(path: Option<&Path>, mode: Option<RelevanceMode>) -> Result<EngineConfig> {
    let mut config = match path {
        Some(p) => EngineConfig::load(p)?,
        None => EngineConfig::default(),
    };
    if let Some(mode) = mode {
        config.include_query_elements = matches!(mode, RelevanceMode::All);
    }
    Ok(config)
}

fn case_base(path: &Path) -> Result<CaseBase> {
    load_case_base(path).with_context(|| format!("loading case base {}", path.display()))
}

fn run_gen(args: GenArgs) -> Result<()> {
    let mut cfg: GenConfig = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => GenConfig::default(),
    };
    if let Some(cases) = args.cases {
        cfg.cases = cases;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let cb = generate(&cfg)?;
    write_output(args.out.as_deref(), &cb.to_json())
}

fn run_eval(args: EvalArgs) -> Result<()> {
    let cb = case_base(&args.case_base)?;
    let mut cfg = EvalConfig::new(EngineSpec::parse_list(&args.engines)?, args.seed);
    cfg.verbosity_levels = args.levels.unwrap_or_else(|| DEFAULT_VERBOSITY_LEVELS.to_vec());
    cfg.engine_config = engine_config(args.config.as_deref(), args.relevance_mode)?;
    cfg.threads = args.threads;
    let report = leave_one_out(&cb, &cfg)?;
    let text = match args.format {
        ReportFormat::Pretty => report.to_pretty(),
        ReportFormat::Csv => report.to_csv(),
        ReportFormat::Json => report.to_json(),
    };
    write_output(args.out.as_deref(), &text)
}

fn run_recommend(args: RecommendArgs) -> Result<()> {
    let cb = case_base(&args.case_base)?;
    let spec: EngineSpec = args.engine.parse()?;
    let config = engine_config(args.config.as_deref(), args.relevance_mode)?;
    let text = fs::read_to_string(&args.query).with_context(|| format!("reading {}", args.query.display()))?;
    let query = serde_json::from_str::<QueryFile>(&text)
        .with_context(|| format!("parsing query {}", args.query.display()))?
        .into_query()?;
    if !cb.taxonomy().contains(&query.industry) {
        bail!("industry {:?} is not in the case-base taxonomy", query.industry);
    }
    if !spec.supports_verbosity(query.verbosity()) {
        bail!("{spec} needs at least one chosen element in the query");
    }
    let kinds = cb.element_kinds();
    let training = TrainingStructures::build(cb, &config)?;
    let ranking = spec.build(&training, &config)?.recommend(&query)?.truncated(args.limit);
    let text = match args.format {
        RankingFormat::Json => ranking.to_json(),
        RankingFormat::Pretty => {
            let mut s = format!("{:>4}  {:>10}  {:<9}  element\n", "rank", "score", "kind");
            for (i, e) in ranking.iter().enumerate() {
                let kind = kinds.get(&e.element).map(|k| k.to_string()).unwrap_or_default();
                s.push_str(&format!("{:>4}  {:>10.6}  {:<9}  {}\n", i + 1, e.score, kind, e.element));
            }
            s
        }
    };
    write_output(args.out.as_deref(), &text)
}

fn run_serve(args: ServeArgs) -> Result<()> {
    let cb = case_base(&args.case_base)?;
    let config = engine_config(args.config.as_deref(), None)?;
    let engine = bizrec_service::session::Engine::new(cb, &config).map_err(|e| anyhow::anyhow!(e))?;
    let state = match &args.journal {
        Some(path) => bizrec_service::AppState::with_journal(engine, bizrec_service::journal::Journal::open(path)?)?,
        None => bizrec_service::AppState::new(engine),
    };
    let addr = SocketAddr::new(args.host, args.port);
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(bizrec_service::serve(state, addr)).with_context(|| format!("serving on {addr}"))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => run_gen(a),
        Command::Eval(a) => run_eval(a),
        Command::Recommend(a) => run_recommend(a),
        Command::Serve(a) => run_serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
