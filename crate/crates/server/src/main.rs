use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context};
use clap::{ArgAction, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use polyseek::eval::{run_scenarios, LocalEngine, ScenarioScript};
use polyseek::features::audio::AudioQueryCategory;
use polyseek::ingest::ingest_paths;
use polyseek::media::MediaType;
use polyseek::retrieval::{
    ComponentSpec, PathPolicy, QueryOutcome, QuerySpec, ReferenceKind, Retriever, TermSpec, TermType, WeightedCategory,
};
use polyseek::store::Store;
use polyseek::EngineConfig;
use polyseek_server::remote::RemoteEngine;
use polyseek_server::{serve, AppState, Engine};

#[derive(Parser)]
#[command(name = "polyseek", version, about = "Content-based retrieval over images, audio, video and 3D meshes")]
struct Cli {
    /// Engine configuration file (TOML); built-in defaults when omitted.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Overrides the configured data directory.
    #[arg(long, global = true, value_name = "DIR")]
    data_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decode, segment and extract features for files or directories.
    Ingest {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Manage the VA and LSH indexes.
    Index {
        #[command(subcommand)]
        action: IndexAction,
    },
    /// Run a query and print the fused ranking.
    Query(QueryArgs),
    /// Run a scenario script and report p@k, MRR, MAP, NDCG and success rate.
    Eval {
        #[arg(long, value_name = "FILE")]
        scenarios: PathBuf,
        /// Server root URL; the local data directory is used when omitted.
        #[arg(long, value_name = "URL")]
        endpoint: Option<String>,
        /// Token for the server; defaults to the configured one.
        #[arg(long)]
        token: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Start the REST and WebSocket API.
    Serve {
        #[arg(long)]
        port: Option<u16>,
    },
}

#[derive(Subcommand)]
enum IndexAction {
    /// Rebuild every index from the stored vectors.
    Build {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct QueryArgs {
    /// `TYPE=FILE[#category=weight,...]` with TYPE one of image, audio, mesh,
    /// silhouette. Terms between `--component` separators are ANDed.
    #[arg(long = "term", required = true, value_name = "TYPE=FILE")]
    terms: Vec<String>,
    /// Starts a new OR component for the terms that follow.
    #[arg(long, action = ArgAction::Count)]
    component: u8,
    /// Audio query category applied to every audio term.
    #[arg(long, value_enum)]
    audio_category: Option<AudioCategoryArg>,
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated media types to keep (IMAGE, AUDIO, VIDEO, MODEL_3D).
    #[arg(long, value_delimiter = ',')]
    media_filter: Vec<String>,
    /// Print the outcome document instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum AudioCategoryArg {
    Fingerprint,
    Matching,
    VersionId,
}

impl From<AudioCategoryArg> for AudioQueryCategory {
    fn from(a: AudioCategoryArg) -> Self {
        match a {
            AudioCategoryArg::Fingerprint => AudioQueryCategory::Fingerprint,
            AudioCategoryArg::Matching => AudioQueryCategory::Matching,
            AudioCategoryArg::VersionId => AudioQueryCategory::VersionId,
        }
    }
}

fn load_config(cli: &Cli) -> anyhow::Result<EngineConfig> {
    let mut config = match &cli.config {
        Some(path) => EngineConfig::load(path).with_context(|| format!("reading {}", path.display()))?,
        None => EngineConfig::default(),
    };
    if let Some(dir) = &cli.data_dir {
        config.data_dir = dir.clone();
    }
    Ok(config)
}

/// Parses `TYPE=FILE[#category=weight,...]`.
fn parse_term(text: &str, audio: Option<AudioQueryCategory>) -> anyhow::Result<TermSpec> {
    let (kind, rest) = text.split_once('=').ok_or_else(|| anyhow!("term `{text}` is not TYPE=FILE"))?;
    let (term_type, kind) = match kind.to_ascii_lowercase().as_str() {
        "image" => (TermType::Image, ReferenceKind::Image),
        "audio" => (TermType::Audio, ReferenceKind::Audio),
        "mesh" => (TermType::Model3d, ReferenceKind::Mesh),
        "silhouette" => (TermType::Model3d, ReferenceKind::Silhouette),
        other => bail!("unknown term type `{other}`; expected image, audio, mesh or silhouette"),
    };
    let (path, weights) = match rest.rsplit_once('#') {
        Some((p, w)) if w.contains('=') => (p, Some(w)),
        _ => (rest, None),
    };
    let mut categories = Vec::new();
    for pair in weights.into_iter().flat_map(|w| w.split(',')) {
        let (category, weight) = pair.split_once('=').ok_or_else(|| anyhow!("category weight `{pair}` is not NAME=W"))?;
        let weight = weight.parse().with_context(|| format!("weight of `{category}`"))?;
        categories.push(WeightedCategory { category: category.to_string(), weight });
    }
    Ok(TermSpec {
        term_type,
        kind: Some(kind),
        data: None,
        path: Some(PathBuf::from(path)),
        categories,
        audio_category: (term_type == TermType::Audio).then_some(audio).flatten(),
    })
}

/// Groups terms into components by where `--component` appeared among them.
fn query_spec(args: &QueryArgs, matches: &clap::ArgMatches, default_k: usize) -> anyhow::Result<QuerySpec> {
    let term_at: Vec<usize> = matches.indices_of("terms").map(|i| i.collect()).unwrap_or_default();
    let breaks: Vec<usize> = matches.indices_of("component").map(|i| i.collect()).unwrap_or_default();
    let audio = args.audio_category.map(Into::into);
    let mut components: Vec<ComponentSpec> = Vec::new();
    let mut last_group = None;
    for (text, at) in args.terms.iter().zip(term_at) {
        let group = breaks.iter().filter(|&&b| b < at).count();
        if last_group != Some(group) {
            components.push(ComponentSpec { terms: Vec::new() });
            last_group = Some(group);
        }
        components.last_mut().expect("pushed above").terms.push(parse_term(text, audio)?);
    }
    let media_filter = if args.media_filter.is_empty() {
        None
    } else {
        let types = args
            .media_filter
            .iter()
            .map(|m| MediaType::parse(m).ok_or_else(|| anyhow!("unknown media type `{m}`")))
            .collect::<anyhow::Result<_>>()?;
        Some(types)
    };
    Ok(QuerySpec { components, k: args.k.unwrap_or(default_k), media_filter })
}

fn print_outcome(outcome: &QueryOutcome, store: &Store) {
    println!("session {}", outcome.session_id);
    println!("{:>4}  {:>8}  {:<8}  {:<36}  name", "rank", "score", "media", "segment");
    for (i, r) in outcome.results.iter().enumerate() {
        let object = store.catalog().object(&r.object_id);
        println!(
            "{:>4}  {:>8.6}  {:<8}  {:<36}  {}",
            i + 1,
            r.score,
            object.map_or("?", |o| o.media_type.as_str()),
            r.segment_id,
            object.map_or("", |o| o.name.as_str())
        );
    }
}

fn run(cli: Cli, matches: &clap::ArgMatches) -> anyhow::Result<ExitCode> {
    let config = load_config(&cli)?;
    match cli.command {
        Command::Ingest { paths, json } => {
            let mut store = Store::open(&config.data_dir)?;
            let report = ingest_paths(&mut store, &config, &paths)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                for o in &report.objects {
                    println!(
                        "{:<9} {:<8} {}  {}  segments={} vectors={}",
                        format!("{:?}", o.status).to_lowercase(),
                        o.media_type,
                        o.object_id,
                        o.name,
                        o.segments,
                        o.vectors
                    );
                }
                println!("{} objects", report.objects.len());
                for f in &report.failures {
                    eprintln!("failed: {}: {}", f.path.display(), f.error);
                }
            }
            if !report.failures.is_empty() {
                eprintln!("{} of {} files failed", report.failures.len(), report.failures.len() + report.objects.len());
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Index { action: IndexAction::Build { json } } => {
            let mut store = Store::open(&config.data_dir)?;
            let status = store.build_indexes(config.index.va_bits, config.lsh_params())?;
            if json {
                println!("{}", serde_json::to_string_pretty(&status)?);
            } else {
                for s in &status {
                    println!("{:<22} rows={:<7} dim={:<5} va={:?} lsh={:?}", s.category, s.rows, s.dim, s.va, s.lsh);
                }
            }
        }
        Command::Query(args) => {
            let sub = matches.subcommand_matches("query").expect("query subcommand");
            let spec = query_spec(&args, sub, config.retrieval.default_k)?;
            let cwd = std::env::current_dir()?;
            let query = spec.decode(PathPolicy::Allow(&cwd))?;
            let store = Store::open(&config.data_dir)?;
            let outcome = Retriever::new(&config).execute(&store, &query, |_| {})?;
            if args.json {
                println!("{}", serde_json::to_string_pretty(&outcome)?);
            } else {
                print_outcome(&outcome, &store);
            }
        }
        Command::Eval { scenarios, endpoint, token, json } => {
            let script = ScenarioScript::load(&scenarios)?;
            let base = scenarios.parent().unwrap_or(Path::new("."));
            let report = match endpoint {
                Some(url) => {
                    let token = token.or_else(|| config.server.token.clone());
                    let timeout = Duration::from_secs(config.server.timeout_secs);
                    run_scenarios(&script, base, &mut RemoteEngine::new(&url, token, timeout)?)?
                }
                None => {
                    let store = Store::open(&config.data_dir)?;
                    let retriever = Retriever::new(&config);
                    run_scenarios(&script, base, &mut LocalEngine { store: &store, retriever: &retriever })?
                }
            };
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", report.table());
                for s in report.scenarios.iter().filter(|s| s.error.is_some()) {
                    eprintln!("scenario {} failed: {}", s.id, s.error.as_deref().unwrap_or_default());
                }
            }
        }
        Command::Serve { port } => {
            tracing_subscriber::fmt().with_env_filter(env_filter()).init();
            let port = port.unwrap_or(config.server.port);
            let state = AppState::new(Engine::open(config)?);
            let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
            runtime.block_on(serve(state, port))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn env_filter() -> tracing_subscriber::EnvFilter {
    tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into())
}

fn main() -> ExitCode {
    let matches = Cli::command().get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli, &matches) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
