//! Service state behind the HTTP API and the CLI.
//!
//! Every mutation (interaction, feedback, model install) is validated, then
//! appended to the event log, then applied, all under the state write lock.
//! Replaying the log over the same corpus rebuilds the same state.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::{Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use fedfeed_core::corpus::{
    Corpus, CorpusError, CorpusEvent, EventLog, FeedbackEvent, InteractionEvent, InteractionKind,
    LiveState, LogRecord, Timestamp, Verdict,
};
use fedfeed_core::fedsim::{
    run_federated, BowClassifier, Classification, FedError, FedRunConfig, FedSummary,
};
use fedfeed_core::feedfilter::{apply_feedback, build_feed, FeedCandidate};
use fedfeed_core::persona::{build_profile, PersonaProfile};
use fedfeed_core::socialrank::{rank_friends, FriendEngagement};
use fedfeed_core::vidquery::{
    answer_query, Embedder, HashedEmbedder, NodeStore, QueryAnswer, StubGenerator, VidError,
};
use fedfeed_core::{Category, EngineConfig, ScoringError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServiceEvent {
    Interaction(InteractionEvent),
    Feedback(FeedbackEvent),
    /// A training run whose classifier was installed. Replay retrains.
    ModelInstalled(FedRunConfig),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ErrorKind {
    BadRequest,
    NotFound,
    Conflict,
    Unprocessable,
    Internal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub kind: ErrorKind,
    pub message: String,
}

impl ApiError {
    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError {
            kind: ErrorKind::BadRequest,
            message: message.into(),
        }
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        ApiError {
            kind: ErrorKind::NotFound,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        ApiError {
            kind: ErrorKind::Internal,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for ApiError {}

impl From<ScoringError> for ApiError {
    fn from(e: ScoringError) -> Self {
        match e {
            ScoringError::UnknownUser(_) | ScoringError::UnknownPost(_) => {
                ApiError::not_found(e.to_string())
            }
            other => ApiError::bad_request(other.to_string()),
        }
    }
}

impl From<CorpusError> for ApiError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::UnknownPost { .. } | CorpusError::UnknownUser { .. } => {
                ApiError::not_found(e.to_string())
            }
            CorpusError::CategoryMismatch { .. } => ApiError::bad_request(e.to_string()),
            other => ApiError::internal(other.to_string()),
        }
    }
}

impl From<VidError> for ApiError {
    fn from(e: VidError) -> Self {
        match e {
            VidError::UnknownVideo(_) => ApiError::not_found(e.to_string()),
            VidError::EmptyQuestion | VidError::EmptyDescription => {
                ApiError::bad_request(e.to_string())
            }
            other => ApiError::internal(other.to_string()),
        }
    }
}

impl From<FedError> for ApiError {
    fn from(e: FedError) -> Self {
        match e {
            FedError::Diverged { .. } => ApiError {
                kind: ErrorKind::Unprocessable,
                message: e.to_string(),
            },
            FedError::Untrained => ApiError {
                kind: ErrorKind::Conflict,
                message: e.to_string(),
            },
            other => ApiError::bad_request(other.to_string()),
        }
    }
}

pub type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedPage {
    pub user_id: String,
    pub now: Timestamp,
    pub total: usize,
    pub items: Vec<FeedCandidate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackRequest {
    pub user_id: String,
    pub post_id: String,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackResponse {
    pub seq: u64,
    pub user_id: String,
    pub post_id: String,
    pub verdict: Verdict,
    pub category: Category,
    pub affinities: BTreeMap<Category, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionRequest {
    pub actor_id: String,
    pub target_post_id: String,
    pub kind: InteractionKind,
    #[serde(default)]
    pub category: Option<Category>,
    #[serde(default)]
    pub occurred_at: Option<Timestamp>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventAck {
    pub seq: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FedRunResponse {
    pub seq: Option<u64>,
    pub installed: bool,
    pub summary: FedSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostClassification {
    pub post_id: String,
    pub labeled: Category,
    #[serde(flatten)]
    pub predicted: Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub users: usize,
    pub posts: usize,
    pub videos: usize,
    pub events: usize,
    pub model_installed: bool,
}

struct ServiceState {
    live: LiveState,
    store: NodeStore,
    classifier: Option<BowClassifier>,
    profiles: Mutex<HashMap<String, PersonaProfile>>,
    rankings: Mutex<HashMap<String, Vec<FriendEngagement>>>,
}

impl ServiceState {
    fn invalidate(&self) {
        self.profiles.lock().unwrap().clear();
        self.rankings.lock().unwrap().clear();
    }
}

pub struct Service {
    config: EngineConfig,
    embedder: HashedEmbedder,
    log: EventLog<ServiceEvent>,
    state: RwLock<ServiceState>,
}

fn build_store(corpus: &Corpus, embedder: &HashedEmbedder) -> ApiResult<NodeStore> {
    let mut store = NodeStore::new(embedder.dim());
    for post in corpus.video_posts() {
        store.index_video(embedder, &post.id, &post.full_text())?;
    }
    Ok(store)
}

fn train(cfg: &FedRunConfig, corpus: &Corpus) -> ApiResult<(FedSummary, Option<BowClassifier>)> {
    let out = run_federated(cfg, Some(corpus))?;
    Ok((out.summary, out.classifier))
}

impl Service {
    pub fn new(corpus: Corpus, config: EngineConfig) -> ApiResult<Self> {
        Self::with_log(corpus, config, EventLog::in_memory())
    }

    /// Opens (or creates) the log at `path` and replays it over `corpus`.
    pub fn open(corpus: Corpus, config: EngineConfig, path: &Path) -> ApiResult<Self> {
        Self::with_log(corpus, config, EventLog::open(path)?)
    }

    /// A service whose in-memory log starts with `records`.
    pub fn from_records(
        corpus: Corpus,
        config: EngineConfig,
        records: &[LogRecord<ServiceEvent>],
    ) -> ApiResult<Self> {
        let log = EventLog::in_memory();
        for r in records {
            log.append(r.event.clone())?;
        }
        Self::with_log(corpus, config, log)
    }

    fn with_log(
        corpus: Corpus,
        config: EngineConfig,
        log: EventLog<ServiceEvent>,
    ) -> ApiResult<Self> {
        config.validate()?;
        let embedder = HashedEmbedder::new(config.video.dim);
        let store = build_store(&corpus, &embedder)?;
        let mut state = ServiceState {
            live: LiveState::new(corpus),
            store,
            classifier: None,
            profiles: Mutex::new(HashMap::new()),
            rankings: Mutex::new(HashMap::new()),
        };
        for record in log.snapshot() {
            match record.event {
                ServiceEvent::Interaction(e) => state.live.apply(CorpusEvent::Interaction(e))?,
                ServiceEvent::Feedback(f) => state.live.apply(CorpusEvent::Feedback(f))?,
                ServiceEvent::ModelInstalled(cfg) => {
                    state.classifier = train(&cfg, state.live.corpus())?.1;
                }
            }
        }
        Ok(Service {
            config,
            embedder,
            log,
            state: RwLock::new(state),
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn log_records(&self) -> Vec<LogRecord<ServiceEvent>> {
        self.log.snapshot()
    }

    /// The request's clock: explicit value, then the configured one, then
    /// the system clock.
    pub fn resolve_now(&self, explicit: Option<Timestamp>) -> Timestamp {
        explicit.or(self.config.now).unwrap_or_else(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs() as Timestamp)
                .unwrap_or(0)
        })
    }

    fn profile_in(&self, state: &ServiceState, user_id: &str) -> ApiResult<PersonaProfile> {
        if let Some(p) = state.profiles.lock().unwrap().get(user_id) {
            return Ok(p.clone());
        }
        let corpus = state.live.corpus();
        let mut profile =
            build_profile(user_id, corpus, &self.config.persona, &self.config.rubric)?;
        for f in state.live.feedback_for(user_id) {
            profile = apply_feedback(&profile, f, corpus, self.config.feed.beta)?;
        }
        state
            .profiles
            .lock()
            .unwrap()
            .insert(user_id.to_string(), profile.clone());
        Ok(profile)
    }

    fn ranking_in(&self, state: &ServiceState, user_id: &str) -> ApiResult<Vec<FriendEngagement>> {
        if let Some(r) = state.rankings.lock().unwrap().get(user_id) {
            return Ok(r.clone());
        }
        let ranking = rank_friends(user_id, state.live.corpus(), &self.config.social)?;
        state
            .rankings
            .lock()
            .unwrap()
            .insert(user_id.to_string(), ranking.clone());
        Ok(ranking)
    }

    pub fn persona(&self, user_id: &str) -> ApiResult<PersonaProfile> {
        let state = self.state.read().unwrap();
        self.profile_in(&state, user_id)
    }

    pub fn friends(&self, user_id: &str) -> ApiResult<Vec<FriendEngagement>> {
        let state = self.state.read().unwrap();
        self.ranking_in(&state, user_id)
    }

    pub fn feed(&self, user_id: &str, limit: usize, now: Option<Timestamp>) -> ApiResult<FeedPage> {
        let now = self.resolve_now(now);
        let state = self.state.read().unwrap();
        let corpus = state.live.corpus();
        if !corpus.has_user(user_id) {
            return Err(ScoringError::UnknownUser(user_id.to_string()).into());
        }
        let profile = self.profile_in(&state, user_id)?;
        let ranks = self.ranking_in(&state, user_id)?;
        let mut items = build_feed(user_id, corpus, &profile, &ranks, &self.config.feed, now)?;
        let total = items.len();
        items.truncate(limit);
        Ok(FeedPage {
            user_id: user_id.to_string(),
            now,
            total,
            items,
        })
    }

    pub fn feedback(
        &self,
        req: &FeedbackRequest,
        now: Option<Timestamp>,
    ) -> ApiResult<FeedbackResponse> {
        let verdict: Verdict = req.verdict.parse().map_err(ApiError::bad_request)?;
        let now = self.resolve_now(now);
        let mut state = self.state.write().unwrap();
        let corpus = state.live.corpus();
        if !corpus.has_user(&req.user_id) {
            return Err(ScoringError::UnknownUser(req.user_id.clone()).into());
        }
        let category = corpus
            .post(&req.post_id)
            .ok_or_else(|| ScoringError::UnknownPost(req.post_id.clone()))?
            .category
            .clone();
        let event = FeedbackEvent {
            user_id: req.user_id.clone(),
            post_id: req.post_id.clone(),
            verdict,
            occurred_at: now,
        };
        let seq = self.commit(&mut state, ServiceEvent::Feedback(event))?;
        let profile = self.profile_in(&state, &req.user_id)?;
        Ok(FeedbackResponse {
            seq,
            user_id: req.user_id.clone(),
            post_id: req.post_id.clone(),
            verdict,
            category,
            affinities: profile.affinities(),
        })
    }

    pub fn record_interaction(
        &self,
        req: &InteractionRequest,
        now: Option<Timestamp>,
    ) -> ApiResult<EventAck> {
        let now = self.resolve_now(now);
        let mut state = self.state.write().unwrap();
        let corpus = state.live.corpus();
        let post = corpus
            .post(&req.target_post_id)
            .ok_or_else(|| ScoringError::UnknownPost(req.target_post_id.clone()))?;
        let event = InteractionEvent {
            actor_id: req.actor_id.clone(),
            target_post_id: req.target_post_id.clone(),
            kind: req.kind,
            category: req
                .category
                .clone()
                .unwrap_or_else(|| post.category.clone()),
            occurred_at: req.occurred_at.unwrap_or(now),
        };
        let seq = self.commit(&mut state, ServiceEvent::Interaction(event))?;
        Ok(EventAck { seq })
    }

    /// Validate, append, apply. Caller holds the write lock.
    fn commit(&self, state: &mut ServiceState, event: ServiceEvent) -> ApiResult<u64> {
        let corpus_event = match &event {
            ServiceEvent::Interaction(e) => Some(CorpusEvent::Interaction(e.clone())),
            ServiceEvent::Feedback(f) => Some(CorpusEvent::Feedback(f.clone())),
            ServiceEvent::ModelInstalled(_) => None,
        };
        if let Some(ce) = &corpus_event {
            state.live.validate(ce)?;
        }
        let seq = self.log.append(event)?;
        if let Some(ce) = corpus_event {
            state.live.apply(ce)?;
        }
        state.invalidate();
        Ok(seq)
    }

    pub fn query_video(&self, video_id: &str, question: &str) -> ApiResult<QueryAnswer> {
        let state = self.state.read().unwrap();
        Ok(answer_query(
            &state.store,
            &self.embedder,
            video_id,
            question,
            &StubGenerator,
        )?)
    }

    /// Trains outside the lock, then logs and installs the classifier if
    /// the run produced one.
    pub fn run_federated(&self, cfg: &FedRunConfig) -> ApiResult<FedRunResponse> {
        let corpus = self.state.read().unwrap().live.corpus().clone();
        let (summary, classifier) = train(cfg, &corpus)?;
        let Some(classifier) = classifier else {
            return Ok(FedRunResponse {
                seq: None,
                installed: false,
                summary,
            });
        };
        let mut state = self.state.write().unwrap();
        // retrain if the corpus moved while training ran unlocked
        let classifier = if state.live.corpus() == &corpus {
            classifier
        } else {
            train(cfg, state.live.corpus())?
                .1
                .expect("document shards yield a classifier")
        };
        let seq = self.commit(&mut state, ServiceEvent::ModelInstalled(cfg.clone()))?;
        state.classifier = Some(classifier);
        Ok(FedRunResponse {
            seq: Some(seq),
            installed: true,
            summary,
        })
    }

    pub fn classify_post(&self, post_id: &str) -> ApiResult<PostClassification> {
        let state = self.state.read().unwrap();
        let post = state
            .live
            .corpus()
            .post(post_id)
            .ok_or_else(|| ScoringError::UnknownPost(post_id.to_string()))?;
        let classifier = state.classifier.as_ref().ok_or(FedError::Untrained)?;
        Ok(PostClassification {
            post_id: post_id.to_string(),
            labeled: post.category.clone(),
            predicted: classifier.classify_post(post)?,
        })
    }

    pub fn health(&self) -> Health {
        let state = self.state.read().unwrap();
        let corpus = state.live.corpus();
        Health {
            status: "ok".into(),
            users: corpus.users.len(),
            posts: corpus.posts.len(),
            videos: state.store.len(),
            events: self.log.len(),
            model_installed: state.classifier.is_some(),
        }
    }
}
