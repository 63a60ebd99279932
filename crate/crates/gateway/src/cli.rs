//! Command-line front ends. `fedfeed` mirrors the HTTP endpoints; the
//! `fedsim`, `persona`, `socialrank`, `feed` and `vidquery` binaries expose
//! single modules.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fedfeed_core::corpus::{load_corpus, Corpus, InteractionKind, Timestamp};
use fedfeed_core::fedsim::{run_federated, FedRunConfig};
use fedfeed_core::persona::{build_profile, ScoringWeights};
use fedfeed_core::socialrank::{rank_friends, FriendWeights};
use fedfeed_core::vidquery::{answer_query, HashedEmbedder, NodeStore, StubGenerator};
use fedfeed_core::EngineConfig;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::service::{FeedbackRequest, InteractionRequest, Service};

pub const CONFIG_ENV: &str = "FEDFEED_CONFIG";

/// Explicit path, else `$FEDFEED_CONFIG`, else built-in defaults.
pub fn load_config(explicit: Option<&Path>) -> Result<EngineConfig> {
    let path = match explicit {
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os(CONFIG_ENV).map(PathBuf::from),
    };
    match path {
        Some(p) => EngineConfig::load(&p).with_context(|| format!("loading {}", p.display())),
        None => Ok(EngineConfig::default()),
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    use std::io::Write;
    let text = serde_json::to_string_pretty(value)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn corpus(path: &Path) -> Result<Corpus> {
    load_corpus(path).with_context(|| format!("loading corpus {}", path.display()))
}

#[derive(Args, Debug, Clone)]
pub struct ServiceArgs {
    /// Corpus file (line-delimited JSON).
    #[arg(long)]
    pub corpus: PathBuf,
    /// Engine config (JSON). Falls back to $FEDFEED_CONFIG.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Event log to replay and append to. In-memory when omitted.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

impl ServiceArgs {
    pub fn open(&self) -> Result<Service> {
        let config = load_config(self.config.as_deref())?;
        let corpus = corpus(&self.corpus)?;
        let svc = match &self.log {
            Some(path) => Service::open(corpus, config, path)?,
            None => Service::new(corpus, config)?,
        };
        Ok(svc)
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "fedfeed",
    version,
    about = "Personalized feed service and tools"
)]
pub struct FedfeedCli {
    #[command(subcommand)]
    pub command: FedfeedCommand,
}

#[derive(Subcommand, Debug)]
pub enum FedfeedCommand {
    /// Serve the HTTP API.
    Serve {
        #[command(flatten)]
        service: ServiceArgs,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
    /// Print a user's ranked feed.
    Feed {
        #[command(flatten)]
        service: ServiceArgs,
        #[arg(long)]
        user: String,
        #[arg(long, default_value_t = crate::http::DEFAULT_LIMIT)]
        limit: usize,
        /// Clock in unix seconds.
        #[arg(long)]
        now: Option<Timestamp>,
    },
    /// Record a like or dislike and print the new affinities.
    Feedback {
        #[command(flatten)]
        service: ServiceArgs,
        #[arg(long)]
        user: String,
        #[arg(long)]
        post: String,
        #[arg(long)]
        verdict: String,
        #[arg(long)]
        now: Option<Timestamp>,
    },
    /// Record an interaction event.
    Event {
        #[command(flatten)]
        service: ServiceArgs,
        #[arg(long)]
        actor: String,
        #[arg(long)]
        post: String,
        #[arg(long, value_parser = parse_kind)]
        kind: InteractionKind,
        #[arg(long)]
        now: Option<Timestamp>,
    },
    /// Print a user's persona profile.
    Persona {
        #[command(flatten)]
        service: ServiceArgs,
        #[arg(long)]
        user: String,
    },
    /// Print a user's friend ranking.
    Friends {
        #[command(flatten)]
        service: ServiceArgs,
        #[arg(long)]
        user: String,
    },
    /// Ask a question about a video.
    Query {
        #[command(flatten)]
        service: ServiceArgs,
        #[arg(long)]
        video: String,
        #[arg(long)]
        question: String,
    },
    /// Run federated training and install the classifier.
    FedRun {
        #[command(flatten)]
        service: ServiceArgs,
        /// Training config (JSON).
        #[arg(long = "run")]
        run: PathBuf,
    },
}

fn parse_kind(s: &str) -> Result<InteractionKind, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("kind must be like, comment or share, got {s:?}"))
}

pub async fn serve(svc: Service, host: &str, port: u16) -> Result<()> {
    let listener = tokio::net::TcpListener::bind((host, port))
        .await
        .with_context(|| format!("binding {host}:{port}"))?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, crate::http::router(Arc::new(svc)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

pub fn run_fedfeed(cli: FedfeedCli) -> Result<()> {
    match cli.command {
        FedfeedCommand::Serve {
            service,
            host,
            port,
        } => {
            let svc = service.open()?;
            tokio::runtime::Runtime::new()?.block_on(serve(svc, &host, port))
        }
        FedfeedCommand::Feed {
            service,
            user,
            limit,
            now,
        } => print_json(&service.open()?.feed(&user, limit, now)?),
        FedfeedCommand::Feedback {
            service,
            user,
            post,
            verdict,
            now,
        } => print_json(&service.open()?.feedback(
            &FeedbackRequest {
                user_id: user,
                post_id: post,
                verdict,
            },
            now,
        )?),
        FedfeedCommand::Event {
            service,
            actor,
            post,
            kind,
            now,
        } => print_json(&service.open()?.record_interaction(
            &InteractionRequest {
                actor_id: actor,
                target_post_id: post,
                kind,
                category: None,
                occurred_at: None,
            },
            now,
        )?),
        FedfeedCommand::Persona { service, user } => print_json(&service.open()?.persona(&user)?),
        FedfeedCommand::Friends { service, user } => print_json(&service.open()?.friends(&user)?),
        FedfeedCommand::Query {
            service,
            video,
            question,
        } => print_json(&service.open()?.query_video(&video, &question)?),
        FedfeedCommand::FedRun { service, run } => {
            let cfg: FedRunConfig = read_json(&run)?;
            print_json(&service.open()?.run_federated(&cfg)?)
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "fedsim", about = "Federated training simulator")]
pub struct FedsimCli {
    #[command(subcommand)]
    pub command: FedsimCommand,
}

#[derive(Subcommand, Debug)]
pub enum FedsimCommand {
    /// Train and write one JSON record per round.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Corpus to shard by author when the config has no source.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
}

pub fn run_fedsim(cli: FedsimCli) -> Result<()> {
    let FedsimCommand::Run {
        config,
        out,
        corpus: corpus_path,
    } = cli.command;
    let cfg: FedRunConfig = read_json(&config)?;
    let corpus = corpus_path.as_deref().map(corpus).transpose()?;
    let outcome = run_federated(&cfg, corpus.as_ref())?;
    if let Some(out) = out {
        std::fs::write(&out, outcome.trace.to_jsonl())
            .with_context(|| format!("writing {}", out.display()))?;
    }
    print_json(&outcome.summary)
}

#[derive(Parser, Debug)]
#[command(name = "persona", about = "Per-category persona profiles")]
pub struct PersonaCli {
    #[command(subcommand)]
    pub command: PersonaCommand,
}

#[derive(Subcommand, Debug)]
pub enum PersonaCommand {
    Build {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        user: String,
        /// Scoring weights (JSON); defaults when omitted.
        #[arg(long)]
        weights: Option<PathBuf>,
    },
}

pub fn run_persona(cli: PersonaCli) -> Result<()> {
    let PersonaCommand::Build {
        corpus: path,
        user,
        weights,
    } = cli.command;
    let weights: ScoringWeights = match weights {
        Some(p) => read_json(&p)?,
        None => ScoringWeights::default(),
    };
    let corpus = corpus(&path)?;
    let rubric = EngineConfig::default().rubric;
    print_json(&build_profile(&user, &corpus, &weights, &rubric)?)
}

#[derive(Parser, Debug)]
#[command(name = "socialrank", about = "Friend engagement ranking")]
pub struct SocialrankCli {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub user: String,
    /// Friend weights (JSON); defaults when omitted.
    #[arg(long)]
    pub weights: Option<PathBuf>,
}

pub fn run_socialrank(cli: SocialrankCli) -> Result<()> {
    let weights: FriendWeights = match cli.weights {
        Some(p) => read_json(&p)?,
        None => FriendWeights::default(),
    };
    let corpus = corpus(&cli.corpus)?;
    print_json(&rank_friends(&cli.user, &corpus, &weights)?)
}

#[derive(Parser, Debug)]
#[command(name = "feed", about = "Ranked friend feed")]
pub struct FeedCli {
    #[command(subcommand)]
    pub command: FeedCommand,
}

#[derive(Subcommand, Debug)]
pub enum FeedCommand {
    Build {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        user: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        now: Option<Timestamp>,
    },
}

pub fn run_feed(cli: FeedCli) -> Result<()> {
    let FeedCommand::Build {
        corpus,
        user,
        config,
        now,
    } = cli.command;
    let service = ServiceArgs {
        corpus,
        config,
        log: None,
    }
    .open()?;
    print_json(&service.feed(&user, usize::MAX, now)?.items)
}

#[derive(Parser, Debug)]
#[command(name = "vidquery", about = "Video question answering")]
pub struct VidqueryCli {
    #[command(subcommand)]
    pub command: VidqueryCommand,
}

#[derive(Subcommand, Debug)]
pub enum VidqueryCommand {
    /// Add or replace video nodes in a store file.
    Index {
        #[arg(long)]
        store: PathBuf,
        /// Index every video post in this corpus.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, requires = "description")]
        video: Option<String>,
        #[arg(long)]
        description: Option<String>,
        #[arg(long, default_value_t = fedfeed_core::vidquery::DEFAULT_DIM)]
        dim: usize,
    },
    /// Answer a question about an indexed video.
    Ask {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        video: String,
        #[arg(long)]
        question: String,
        #[arg(long, default_value_t = fedfeed_core::vidquery::DEFAULT_DIM)]
        dim: usize,
    },
}

pub fn run_vidquery(cli: VidqueryCli) -> Result<()> {
    match cli.command {
        VidqueryCommand::Index {
            store: path,
            corpus: corpus_path,
            video,
            description,
            dim,
        } => {
            let embedder = HashedEmbedder::new(dim);
            let mut store = if path.exists() {
                NodeStore::load(&path, dim)?
            } else {
                NodeStore::new(dim)
            };
            let mut indexed = Vec::new();
            if let Some(cp) = corpus_path {
                for post in corpus(&cp)?.video_posts() {
                    indexed.push(store.index_video(&embedder, &post.id, &post.full_text())?);
                }
            }
            if let (Some(video), Some(description)) = (video, description) {
                indexed.push(store.index_video(&embedder, &video, &description)?);
            }
            if indexed.is_empty() {
                bail!("nothing to index: pass --corpus or --video with --description");
            }
            store.save(&path)?;
            print_json(&serde_json::json!({ "indexed": indexed, "size": store.len() }))
        }
        VidqueryCommand::Ask {
            store,
            video,
            question,
            dim,
        } => {
            let store = NodeStore::load(&store, dim)?;
            let embedder = HashedEmbedder::new(dim);
            print_json(&answer_query(
                &store,
                &embedder,
                &video,
                &question,
                &StubGenerator,
            )?)
        }
    }
}
