use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::Deserialize;

use super::{
    Category, Comment, Corpus, CorpusError, InteractionEvent, InteractionKind, MediaKind, Post,
    Result, SentimentLabel, Timestamp,
};
use crate::lexicon;

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Record {
    User(UserRecord),
    Post(PostRecord),
    Event(EventRecord),
}

#[derive(Deserialize)]
struct UserRecord {
    id: String,
    #[serde(default)]
    friends: Vec<String>,
}

#[derive(Deserialize)]
struct PostRecord {
    id: String,
    author_id: String,
    category: Category,
    body: String,
    #[serde(default)]
    media_kind: MediaKind,
    #[serde(default)]
    transcript: Option<String>,
    published_at: Timestamp,
    #[serde(default)]
    likes: u64,
    #[serde(default)]
    shares: u64,
    #[serde(default)]
    comments: Vec<CommentRecord>,
}

#[derive(Deserialize)]
struct CommentRecord {
    author_id: String,
    text: String,
    /// Unlabeled comments go through the keyword annotator.
    #[serde(default)]
    sentiment_label: Option<SentimentLabel>,
    created_at: Timestamp,
}

#[derive(Deserialize)]
struct EventRecord {
    actor_id: String,
    target_post_id: String,
    kind: InteractionKind,
    /// Denormalized from the post when absent.
    #[serde(default)]
    category: Option<Category>,
    occurred_at: Timestamp,
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_corpus(&text)
}

impl Corpus {
    /// Serializes back to the line format read by [`parse_corpus`]: users,
    /// then posts, then events.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |mut v: serde_json::Value, kind: &str| {
            v["type"] = kind.into();
            out += &v.to_string();
            out.push('\n');
        };
        for u in &self.users {
            push(serde_json::json!({"id": u, "friends": self.friends(u)}), "user");
        }
        for p in &self.posts {
            push(serde_json::to_value(p).expect("post serializes"), "post");
        }
        for e in &self.events {
            push(serde_json::to_value(e).expect("event serializes"), "event");
        }
        out
    }
}

/// Parses and validates a corpus. A pure function of the input text.
pub fn parse_corpus(text: &str) -> Result<Corpus> {
    let mut users: Vec<(usize, UserRecord)> = Vec::new();
    let mut posts: Vec<PostRecord> = Vec::new();
    let mut events: Vec<(usize, EventRecord)> = Vec::new();

    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(line).map_err(|source| CorpusError::Parse {
            line: line_no,
            source,
        })?;
        match record {
            Record::User(u) => users.push((line_no, u)),
            Record::Post(p) => posts.push(p),
            Record::Event(e) => events.push((line_no, e)),
        }
    }

    let mut user_ids = HashSet::new();
    for (_, u) in &users {
        if !user_ids.insert(u.id.as_str()) {
            return Err(CorpusError::DuplicateId {
                kind: "user",
                id: u.id.clone(),
            });
        }
    }
    let mut friendships = BTreeMap::new();
    for (line, u) in &users {
        for f in &u.friends {
            if !user_ids.contains(f.as_str()) {
                return Err(CorpusError::UnknownUser {
                    record: format!("user {:?} (line {line})", u.id),
                    user_id: f.clone(),
                });
            }
        }
        friendships.insert(u.id.clone(), u.friends.clone());
    }

    let mut post_ids = HashSet::new();
    let mut validated_posts = Vec::with_capacity(posts.len());
    for p in posts {
        if !post_ids.insert(p.id.clone()) {
            return Err(CorpusError::DuplicateId {
                kind: "post",
                id: p.id,
            });
        }
        if !user_ids.contains(p.author_id.as_str()) {
            return Err(CorpusError::UnknownUser {
                record: format!("post {:?}", p.id),
                user_id: p.author_id,
            });
        }
        if p.media_kind == MediaKind::Video && p.transcript.as_deref().is_none_or(str::is_empty) {
            return Err(CorpusError::MissingTranscript { post_id: p.id });
        }
        let comments = p
            .comments
            .into_iter()
            .map(|c| Comment {
                sentiment_label: c
                    .sentiment_label
                    .unwrap_or_else(|| lexicon::annotate_sentiment(&c.text)),
                author_id: c.author_id,
                text: c.text,
                created_at: c.created_at,
            })
            .collect();
        validated_posts.push(Post {
            id: p.id,
            author_id: p.author_id,
            category: p.category,
            body: p.body,
            media_kind: p.media_kind,
            transcript: p.transcript,
            published_at: p.published_at,
            likes: p.likes,
            shares: p.shares,
            comments,
        });
    }

    let categories: BTreeMap<&str, &Category> = validated_posts
        .iter()
        .map(|p| (p.id.as_str(), &p.category))
        .collect();
    let mut validated_events = Vec::with_capacity(events.len());
    for (line, e) in events {
        let record = format!("event at line {line}");
        let Some(&post_category) = categories.get(e.target_post_id.as_str()) else {
            return Err(CorpusError::UnknownPost {
                record,
                post_id: e.target_post_id,
            });
        };
        if !user_ids.contains(e.actor_id.as_str()) {
            return Err(CorpusError::UnknownUser {
                record,
                user_id: e.actor_id,
            });
        }
        let category = match e.category {
            Some(c) if &c != post_category => {
                return Err(CorpusError::CategoryMismatch {
                    record,
                    post_id: e.target_post_id,
                    given: c.to_string(),
                    actual: post_category.to_string(),
                })
            }
            Some(c) => c,
            None => post_category.clone(),
        };
        validated_events.push(InteractionEvent {
            actor_id: e.actor_id,
            target_post_id: e.target_post_id,
            kind: e.kind,
            category,
            occurred_at: e.occurred_at,
        });
    }

    let users = users.into_iter().map(|(_, u)| u.id).collect();
    Ok(Corpus::from_parts(
        users,
        friendships,
        validated_posts,
        validated_events,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = r#"{"type":"user","id":"u1","friends":["u2","u3"]}
{"type":"user","id":"u2","friends":["u1"]}
{"type":"user","id":"u3"}
{"type":"post","id":"p1","author_id":"u2","category":"sports","body":"Great match today.","published_at":1000,"likes":10,"shares":2,"comments":[{"author_id":"u1","text":"what a win","sentiment_label":"positive","created_at":1100}]}
{"type":"post","id":"p2","author_id":"u2","category":"politics","body":"Vote tomorrow.","published_at":2000,"likes":3,"shares":1}
{"type":"post","id":"p3","author_id":"u3","category":"sports","body":"Training clip","media_kind":"video","transcript":"a dog catches a frisbee","published_at":3000,"likes":7,"shares":0}
{"type":"post","id":"p4","author_id":"u3","category":"science","body":"New telescope images.","published_at":4000,"likes":1,"shares":1}
{"type":"post","id":"p5","author_id":"u1","category":"general","body":"Hello all.","published_at":5000}
{"type":"event","actor_id":"u1","target_post_id":"p1","kind":"like","occurred_at":1200}
{"type":"event","actor_id":"u1","target_post_id":"p1","kind":"comment","occurred_at":1100}
{"type":"event","actor_id":"u1","target_post_id":"p2","kind":"like","occurred_at":2100}
{"type":"event","actor_id":"u1","target_post_id":"p3","kind":"share","occurred_at":3100}
{"type":"event","actor_id":"u1","target_post_id":"p3","kind":"like","occurred_at":3100}
{"type":"event","actor_id":"u1","target_post_id":"p4","kind":"like","occurred_at":4100}
{"type":"event","actor_id":"u2","target_post_id":"p5","kind":"like","occurred_at":5100}
{"type":"event","actor_id":"u2","target_post_id":"p5","kind":"comment","occurred_at":5200}
{"type":"event","actor_id":"u3","target_post_id":"p1","kind":"like","occurred_at":1300}
{"type":"event","actor_id":"u3","target_post_id":"p2","kind":"share","occurred_at":2200}
{"type":"event","actor_id":"u3","target_post_id":"p5","kind":"like","occurred_at":5300}
{"type":"event","actor_id":"u2","target_post_id":"p4","kind":"share","occurred_at":4200}
"#;

    #[test]
    fn loads_fixture_counts() {
        let corpus = parse_corpus(FIXTURE).unwrap();
        assert_eq!(corpus.users.len(), 3);
        assert_eq!(corpus.posts.len(), 5);
        assert_eq!(corpus.events.len(), 12);
    }

    #[test]
    fn events_sorted_stably() {
        let corpus = parse_corpus(FIXTURE).unwrap();
        let times: Vec<_> = corpus.events.iter().map(|e| e.occurred_at).collect();
        let mut sorted = times.clone();
        sorted.sort();
        assert_eq!(times, sorted);
        // share then like at 3100, in file order
        let at_3100: Vec<_> = corpus
            .events
            .iter()
            .filter(|e| e.occurred_at == 3100)
            .map(|e| e.kind)
            .collect();
        assert_eq!(at_3100, [InteractionKind::Share, InteractionKind::Like]);
    }

    #[test]
    fn category_denormalized_from_post() {
        let corpus = parse_corpus(FIXTURE).unwrap();
        assert!(corpus
            .events
            .iter()
            .all(|e| corpus.post(&e.target_post_id).unwrap().category == e.category));
    }

    #[test]
    fn empty_input_gives_empty_corpus() {
        let corpus = parse_corpus("").unwrap();
        assert!(corpus.users.is_empty());
        assert!(corpus.posts.is_empty());
        assert!(corpus.events.is_empty());
        assert!(corpus.friendships.is_empty());
    }

    #[test]
    fn missing_post_reference_names_the_post() {
        let text = format!(
            "{FIXTURE}{}\n",
            r#"{"type":"event","actor_id":"u1","target_post_id":"p99","kind":"like","occurred_at":1}"#
        );
        let err = parse_corpus(&text).unwrap_err();
        assert!(matches!(&err, CorpusError::UnknownPost { post_id, .. } if post_id == "p99"));
        assert!(err.to_string().contains("p99"));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_corpus("{\"type\":\"user\",\"id\":\"a\"}\n{not json\n").unwrap_err();
        assert!(matches!(err, CorpusError::Parse { line: 2, .. }));
    }

    #[test]
    fn negative_counts_rejected() {
        let line = r#"{"type":"post","id":"p","author_id":"a","category":"x","body":"b","published_at":0,"likes":-1}"#;
        let text = format!("{{\"type\":\"user\",\"id\":\"a\"}}\n{line}\n");
        assert!(matches!(
            parse_corpus(&text),
            Err(CorpusError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn video_requires_transcript() {
        let text = concat!(
            "{\"type\":\"user\",\"id\":\"a\"}\n",
            r#"{"type":"post","id":"v","author_id":"a","category":"x","body":"b","media_kind":"video","published_at":0}"#
        );
        assert!(matches!(
            parse_corpus(text),
            Err(CorpusError::MissingTranscript { .. })
        ));
    }

    #[test]
    fn duplicate_post_rejected() {
        let text = concat!(
            "{\"type\":\"user\",\"id\":\"a\"}\n",
            r#"{"type":"post","id":"p","author_id":"a","category":"x","body":"b","published_at":0}"#,
            "\n",
            r#"{"type":"post","id":"p","author_id":"a","category":"x","body":"c","published_at":0}"#
        );
        assert!(matches!(
            parse_corpus(text),
            Err(CorpusError::DuplicateId { kind: "post", .. })
        ));
    }

    #[test]
    fn unknown_friend_rejected() {
        let text = r#"{"type":"user","id":"a","friends":["ghost"]}"#;
        assert!(matches!(
            parse_corpus(text),
            Err(CorpusError::UnknownUser { user_id, .. }) if user_id == "ghost"
        ));
    }

    #[test]
    fn unlabeled_comment_gets_annotated() {
        let text = concat!(
            "{\"type\":\"user\",\"id\":\"a\"}\n",
            r#"{"type":"post","id":"p","author_id":"a","category":"x","body":"b","published_at":0,"comments":[{"author_id":"z","text":"I love this, great work","created_at":1}]}"#
        );
        let corpus = parse_corpus(text).unwrap();
        assert_eq!(
            corpus.posts[0].comments[0].sentiment_label,
            SentimentLabel::Positive
        );
    }

    #[test]
    fn parsing_is_deterministic() {
        assert_eq!(parse_corpus(FIXTURE).unwrap(), parse_corpus(FIXTURE).unwrap());
    }
}
