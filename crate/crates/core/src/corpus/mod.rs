//! Domain types for the social corpus, ingestion from line-delimited JSON
//! and the append-only event log.

mod generate;
mod load;
mod log;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generate::{random_corpus, CorpusShape};
pub use load::{load_corpus, parse_corpus};
pub use log::{append_event, replay, Ack, CorpusEvent, EventLog, LiveState, LogRecord};

/// UTC seconds since the epoch.
pub type Timestamp = i64;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("duplicate {kind} id {id:?}")]
    DuplicateId { kind: &'static str, id: String },
    #[error("{record} references unknown post {post_id:?}")]
    UnknownPost { record: String, post_id: String },
    #[error("{record} references unknown user {user_id:?}")]
    UnknownUser { record: String, user_id: String },
    #[error("video post {post_id:?} has no transcript")]
    MissingTranscript { post_id: String },
    #[error("{record} carries category {given:?} but post {post_id:?} is {actual:?}")]
    CategoryMismatch {
        record: String,
        post_id: String,
        given: String,
        actual: String,
    },
    #[error("event log: {0}")]
    Log(String),
}

pub type Result<T, E = CorpusError> = std::result::Result<T, E>;

/// Content category label, stored lowercase.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub struct Category(String);

impl Category {
    pub const GENERAL: &'static str = "general";

    pub fn new(label: &str) -> Self {
        Category(label.trim().to_lowercase())
    }

    pub fn general() -> Self {
        Category(Self::GENERAL.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<String> for Category {
    fn from(s: String) -> Self {
        Category::new(&s)
    }
}

impl From<&str> for Category {
    fn from(s: &str) -> Self {
        Category::new(s)
    }
}

impl From<Category> for String {
    fn from(c: Category) -> Self {
        c.0
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MediaKind {
    #[default]
    Text,
    Video,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentimentLabel {
    Positive,
    Negative,
    Neutral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comment {
    pub author_id: String,
    pub text: String,
    pub sentiment_label: SentimentLabel,
    pub created_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    pub author_id: String,
    pub category: Category,
    pub body: String,
    pub media_kind: MediaKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<String>,
    pub published_at: Timestamp,
    pub likes: u64,
    pub shares: u64,
    pub comments: Vec<Comment>,
}

impl Post {
    /// Body followed by the transcript for videos.
    pub fn full_text(&self) -> String {
        match &self.transcript {
            Some(t) if !t.is_empty() => format!("{} {}", self.body, t),
            _ => self.body.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionKind {
    Like,
    Comment,
    Share,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionEvent {
    pub actor_id: String,
    pub target_post_id: String,
    pub kind: InteractionKind,
    pub category: Category,
    pub occurred_at: Timestamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Like,
    Dislike,
}

impl std::str::FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "like" => Ok(Verdict::Like),
            "dislike" => Ok(Verdict::Dislike),
            other => Err(format!("verdict must be \"like\" or \"dislike\", got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackEvent {
    pub user_id: String,
    pub post_id: String,
    pub verdict: Verdict,
    pub occurred_at: Timestamp,
}

/// A validated, immutable snapshot of users, friendships, posts and
/// interaction events. Events are kept sorted by `occurred_at` (stable with
/// respect to input order).
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Corpus {
    pub users: Vec<String>,
    pub friendships: BTreeMap<String, Vec<String>>,
    pub posts: Vec<Post>,
    pub events: Vec<InteractionEvent>,
    #[serde(skip)]
    post_index: HashMap<String, usize>,
}

impl Corpus {
    pub(crate) fn from_parts(
        users: Vec<String>,
        friendships: BTreeMap<String, Vec<String>>,
        posts: Vec<Post>,
        mut events: Vec<InteractionEvent>,
    ) -> Self {
        events.sort_by_key(|e| e.occurred_at);
        let post_index = posts
            .iter()
            .enumerate()
            .map(|(i, p)| (p.id.clone(), i))
            .collect();
        Corpus {
            users,
            friendships,
            posts,
            events,
            post_index,
        }
    }

    pub fn has_user(&self, user_id: &str) -> bool {
        self.users.iter().any(|u| u == user_id)
    }

    pub fn post(&self, post_id: &str) -> Option<&Post> {
        self.post_index.get(post_id).map(|&i| &self.posts[i])
    }

    pub fn friends(&self, user_id: &str) -> &[String] {
        self.friendships
            .get(user_id)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn posts_by<'a>(&'a self, author_id: &'a str) -> impl Iterator<Item = &'a Post> + 'a {
        self.posts.iter().filter(move |p| p.author_id == author_id)
    }

    pub fn events_by<'a>(
        &'a self,
        actor_id: &'a str,
    ) -> impl Iterator<Item = &'a InteractionEvent> + 'a {
        self.events.iter().filter(move |e| e.actor_id == actor_id)
    }

    pub fn video_posts(&self) -> impl Iterator<Item = &Post> {
        self.posts
            .iter()
            .filter(|p| p.media_kind == MediaKind::Video)
    }

    pub fn validate_interaction(&self, event: &InteractionEvent) -> Result<()> {
        let record = "interaction event".to_string();
        if !self.has_user(&event.actor_id) {
            return Err(CorpusError::UnknownUser {
                record,
                user_id: event.actor_id.clone(),
            });
        }
        let post = self
            .post(&event.target_post_id)
            .ok_or_else(|| CorpusError::UnknownPost {
                record: record.clone(),
                post_id: event.target_post_id.clone(),
            })?;
        if post.category != event.category {
            return Err(CorpusError::CategoryMismatch {
                record,
                post_id: post.id.clone(),
                given: event.category.to_string(),
                actual: post.category.to_string(),
            });
        }
        Ok(())
    }

    pub fn validate_feedback(&self, event: &FeedbackEvent) -> Result<()> {
        let record = "feedback event".to_string();
        if !self.has_user(&event.user_id) {
            return Err(CorpusError::UnknownUser {
                record,
                user_id: event.user_id.clone(),
            });
        }
        if self.post(&event.post_id).is_none() {
            return Err(CorpusError::UnknownPost {
                record,
                post_id: event.post_id.clone(),
            });
        }
        Ok(())
    }

    /// Inserts after any events with the same timestamp, keeping the sort
    /// stable.
    pub(crate) fn insert_event(&mut self, event: InteractionEvent) {
        let at = self
            .events
            .partition_point(|e| e.occurred_at <= event.occurred_at);
        self.events.insert(at, event);
    }
}
