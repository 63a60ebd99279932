//! Append-only, line-delimited JSON event log.
//!
//! Each line is `{"seq": n, "event": {...}}` with `seq` starting at 1 and
//! increasing by one per append. One writer appends at a time; readers take
//! snapshots and always see a complete prefix of the log.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{Corpus, CorpusError, FeedbackEvent, InteractionEvent, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord<E> {
    pub seq: u64,
    pub event: E,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ack {
    pub seq: u64,
}

pub struct EventLog<E> {
    sink: Mutex<Option<(PathBuf, File)>>,
    records: RwLock<Vec<LogRecord<E>>>,
}

impl<E> EventLog<E>
where
    E: Serialize + DeserializeOwned + Clone,
{
    pub fn in_memory() -> Self {
        EventLog {
            sink: Mutex::new(None),
            records: RwLock::new(Vec::new()),
        }
    }

    /// Opens (or creates) a log file, loading any records already present.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let io_err = |source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        };
        let file = OpenOptions::new()
            .create(true)
            .read(true)
            .append(true)
            .open(&path)
            .map_err(io_err)?;
        let mut records = Vec::new();
        for (i, line) in BufReader::new(&file).lines().enumerate() {
            let line = line.map_err(io_err)?;
            if line.trim().is_empty() {
                continue;
            }
            let record: LogRecord<E> =
                serde_json::from_str(&line).map_err(|source| CorpusError::Parse {
                    line: i + 1,
                    source,
                })?;
            let expected = records.len() as u64 + 1;
            if record.seq != expected {
                return Err(CorpusError::Log(format!(
                    "line {}: expected seq {expected}, found {}",
                    i + 1,
                    record.seq
                )));
            }
            records.push(record);
        }
        Ok(EventLog {
            sink: Mutex::new(Some((path, file))),
            records: RwLock::new(records),
        })
    }

    /// Durably appends one event and returns its sequence number.
    pub fn append(&self, event: E) -> Result<u64> {
        let mut sink = self.sink.lock().expect("event log writer poisoned");
        let seq = self.len() as u64 + 1;
        let record = LogRecord { seq, event };
        if let Some((path, file)) = sink.as_mut() {
            let mut line = serde_json::to_string(&record)
                .map_err(|e| CorpusError::Log(format!("serializing record {seq}: {e}")))?;
            line.push('\n');
            let io_err = |source| CorpusError::Io {
                path: path.display().to_string(),
                source,
            };
            file.write_all(line.as_bytes()).map_err(io_err)?;
            file.sync_data().map_err(io_err)?;
        }
        self.records
            .write()
            .expect("event log readers poisoned")
            .push(record);
        Ok(seq)
    }

    pub fn len(&self) -> usize {
        self.records.read().expect("event log poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn snapshot(&self) -> Vec<LogRecord<E>> {
        self.records.read().expect("event log poisoned").clone()
    }
}

/// Events that change corpus-derived state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CorpusEvent {
    Interaction(InteractionEvent),
    Feedback(FeedbackEvent),
}

/// The corpus plus everything appended since it was loaded.
#[derive(Debug, Clone, PartialEq)]
pub struct LiveState {
    corpus: Corpus,
    feedback: Vec<FeedbackEvent>,
}

impl LiveState {
    pub fn new(corpus: Corpus) -> Self {
        LiveState {
            corpus,
            feedback: Vec::new(),
        }
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn feedback(&self) -> &[FeedbackEvent] {
        &self.feedback
    }

    pub fn feedback_for<'a>(&'a self, user_id: &'a str) -> impl Iterator<Item = &'a FeedbackEvent> {
        self.feedback.iter().filter(move |f| f.user_id == user_id)
    }

    pub fn validate(&self, event: &CorpusEvent) -> Result<()> {
        match event {
            CorpusEvent::Interaction(e) => self.corpus.validate_interaction(e),
            CorpusEvent::Feedback(f) => self.corpus.validate_feedback(f),
        }
    }

    pub fn apply(&mut self, event: CorpusEvent) -> Result<()> {
        self.validate(&event)?;
        match event {
            CorpusEvent::Interaction(e) => self.corpus.insert_event(e),
            CorpusEvent::Feedback(f) => self.feedback.push(f),
        }
        Ok(())
    }
}

/// Validates, persists, then applies. Nothing is written if validation
/// fails.
pub fn append_event(
    log: &EventLog<CorpusEvent>,
    state: &mut LiveState,
    event: CorpusEvent,
) -> Result<Ack> {
    state.validate(&event)?;
    let seq = log.append(event.clone())?;
    state.apply(event)?;
    Ok(Ack { seq })
}

pub fn replay(corpus: Corpus, records: &[LogRecord<CorpusEvent>]) -> Result<LiveState> {
    let mut state = LiveState::new(corpus);
    for record in records {
        state.apply(record.event.clone())?;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_corpus, InteractionKind, Verdict};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn corpus() -> Corpus {
        parse_corpus(concat!(
            "{\"type\":\"user\",\"id\":\"a\",\"friends\":[\"b\"]}\n",
            "{\"type\":\"user\",\"id\":\"b\"}\n",
            r#"{"type":"post","id":"p1","author_id":"b","category":"sports","body":"x","published_at":0}"#,
            "\n",
            r#"{"type":"post","id":"p2","author_id":"b","category":"politics","body":"y","published_at":0}"#,
        ))
        .unwrap()
    }

    fn like(post: &str, category: &str, at: i64) -> CorpusEvent {
        CorpusEvent::Interaction(InteractionEvent {
            actor_id: "a".into(),
            target_post_id: post.into(),
            kind: InteractionKind::Like,
            category: category.into(),
            occurred_at: at,
        })
    }

    #[test]
    fn append_grows_log_by_one() {
        let log = EventLog::in_memory();
        let mut state = LiveState::new(corpus());
        let ack = append_event(&log, &mut state, like("p1", "sports", 5)).unwrap();
        assert_eq!(ack.seq, 1);
        assert_eq!(log.len(), 1);
        assert_eq!(state.corpus().events.len(), 1);
    }

    #[test]
    fn feedback_on_unknown_post_rejected() {
        let log = EventLog::in_memory();
        let mut state = LiveState::new(corpus());
        let fb = CorpusEvent::Feedback(FeedbackEvent {
            user_id: "a".into(),
            post_id: "nope".into(),
            verdict: Verdict::Like,
            occurred_at: 0,
        });
        assert!(matches!(
            append_event(&log, &mut state, fb),
            Err(CorpusError::UnknownPost { .. })
        ));
        assert!(log.is_empty());
    }

    #[test]
    fn wrong_category_rejected() {
        let log = EventLog::in_memory();
        let mut state = LiveState::new(corpus());
        assert!(append_event(&log, &mut state, like("p1", "politics", 0)).is_err());
    }

    #[test]
    fn replay_after_100_appends_matches_live_state() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        let log = EventLog::open(&path).unwrap();
        let mut live = LiveState::new(corpus());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let event = if rng.gen_bool(0.5) {
                let (p, c) = if rng.gen_bool(0.5) {
                    ("p1", "sports")
                } else {
                    ("p2", "politics")
                };
                like(p, c, rng.gen_range(0..1000))
            } else {
                CorpusEvent::Feedback(FeedbackEvent {
                    user_id: "a".into(),
                    post_id: "p1".into(),
                    verdict: if rng.gen_bool(0.5) {
                        Verdict::Like
                    } else {
                        Verdict::Dislike
                    },
                    occurred_at: rng.gen_range(0..1000),
                })
            };
            append_event(&log, &mut live, event).unwrap();
        }
        drop(log);

        let reopened: EventLog<CorpusEvent> = EventLog::open(&path).unwrap();
        assert_eq!(reopened.len(), 100);
        let replayed = replay(corpus(), &reopened.snapshot()).unwrap();
        assert_eq!(replayed, live);
        // appends continue the sequence
        assert_eq!(reopened.append(like("p1", "sports", 1)).unwrap(), 101);
    }

    #[test]
    fn open_rejects_sequence_gap() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(
            &path,
            "{\"seq\":1,\"event\":{\"type\":\"feedback\",\"user_id\":\"a\",\"post_id\":\"p1\",\"verdict\":\"like\",\"occurred_at\":0}}\n\
             {\"seq\":3,\"event\":{\"type\":\"feedback\",\"user_id\":\"a\",\"post_id\":\"p1\",\"verdict\":\"like\",\"occurred_at\":0}}\n",
        )
        .unwrap();
        assert!(matches!(
            EventLog::<CorpusEvent>::open(&path),
            Err(CorpusError::Log(_))
        ));
    }
}
