//! Feed assembly: post importance, the sentiment/trend gate, Flesch-Kincaid
//! readability and the like/dislike affinity update.
//!
//! A friend's post `i` is scored as
//!
//! ```text
//! P_i   = w_C·comments + w_L·likes + w_S·shares + w_T / max(T, t_min)
//! F_i   = 1 if S_i > 0 and T_i > tau, else 0
//! score = P_i · a_k · (1 + δ_author / (1 + δ_max))
//! ```
//!
//! where `T` is the post's age in hours, `S_i` the raw comment sentiment in
//! `[-1, 1]`, `T_i` the normalized sentiment of the latest `m` comments,
//! `a_k` the user's affinity for the post's category and `δ` the friend
//! engagement of the author.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{Category, Comment, Corpus, FeedbackEvent, Post, Timestamp, Verdict};
use crate::error::{ScoringError, ScoringResult};
use crate::persona::{
    normalize_sentiment, sentiment_score, CategoryPersona, PersonaProfile, SentimentCounts,
};
use crate::socialrank::FriendEngagement;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeedWeights {
    pub w_comments: f64,
    pub w_likes: f64,
    pub w_shares: f64,
    pub w_recency: f64,
    /// Trend threshold `tau` in `[0, 1]`.
    pub tau: f64,
    /// Feedback step in `[0, 1)`.
    pub beta: f64,
    /// Floor on post age, in hours.
    pub t_min_hours: f64,
    /// Grade level that maps to readability 0.
    pub max_r: f64,
    /// Number of most recent comments the trend looks at.
    pub trend_window: usize,
    /// Posts with normalized readability below this are dropped. 0 disables
    /// the gate.
    pub min_readability: f64,
}

impl Default for FeedWeights {
    fn default() -> Self {
        FeedWeights {
            w_comments: 0.3,
            w_likes: 0.2,
            w_shares: 0.3,
            w_recency: 0.2,
            tau: 0.5,
            beta: 0.1,
            t_min_hours: 1.0 / 60.0,
            max_r: 18.0,
            trend_window: 10,
            min_readability: 0.0,
        }
    }
}

impl FeedWeights {
    pub fn validate(&self) -> ScoringResult<()> {
        for (name, w) in [
            ("w_comments", self.w_comments),
            ("w_likes", self.w_likes),
            ("w_shares", self.w_shares),
            ("w_recency", self.w_recency),
        ] {
            if !(w.is_finite() && w >= 0.0) {
                return Err(ScoringError::InvalidWeights(format!(
                    "{name} must be finite and >= 0, got {w}"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(ScoringError::OutOfRange {
                what: "tau",
                value: self.tau,
            });
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(ScoringError::OutOfRange {
                what: "beta",
                value: self.beta,
            });
        }
        if !(self.t_min_hours.is_finite() && self.t_min_hours > 0.0) {
            return Err(ScoringError::OutOfRange {
                what: "t_min_hours",
                value: self.t_min_hours,
            });
        }
        if !(self.max_r.is_finite() && self.max_r > 0.0) {
            return Err(ScoringError::OutOfRange {
                what: "max_r",
                value: self.max_r,
            });
        }
        Ok(())
    }

    /// Scales the four importance weights, leaving thresholds alone.
    pub fn scaled(&self, lambda: f64) -> Self {
        FeedWeights {
            w_comments: self.w_comments * lambda,
            w_likes: self.w_likes * lambda,
            w_shares: self.w_shares * lambda,
            w_recency: self.w_recency * lambda,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PostCounts {
    pub comments: u64,
    pub likes: u64,
    pub shares: u64,
}

/// `P_i`, with the age clamped to `t_min_hours`.
pub fn post_importance(
    counts: &PostCounts,
    age_hours: f64,
    wts: &FeedWeights,
) -> ScoringResult<f64> {
    wts.validate()?;
    if age_hours.is_nan() {
        return Err(ScoringError::OutOfRange {
            what: "age_hours",
            value: age_hours,
        });
    }
    let age = age_hours.max(wts.t_min_hours);
    Ok(wts.w_comments * counts.comments as f64
        + wts.w_likes * counts.likes as f64
        + wts.w_shares * counts.shares as f64
        + wts.w_recency * (1.0 / age))
}

/// Normalized sentiment of the latest `window` comments (by `created_at`,
/// input order among equal timestamps); 0.5 when there are none.
pub fn trend_score(comments: &[Comment], window: usize) -> f64 {
    let mut ordered: Vec<&Comment> = comments.iter().collect();
    ordered.sort_by_key(|c| c.created_at);
    let start = ordered.len().saturating_sub(window);
    let recent = &ordered[start..];
    if recent.is_empty() {
        return 0.5;
    }
    let s = sentiment_score(&SentimentCounts::from_comments(recent.iter().copied()));
    normalize_sentiment(s).expect("sentiment ratio lies in [-1, 1]")
}

/// `F_i`: 1 iff `sentiment > 0` and `trend > tau`, both strict.
pub fn filter_status(sentiment: f64, trend: f64, tau: f64) -> u8 {
    u8::from(sentiment > 0.0 && trend > tau)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TextStats {
    pub words: usize,
    pub sentences: usize,
    pub syllables: usize,
}

/// Vowel groups (a, e, i, o, u, y) in the word's letters. A final lone `e`
/// after a consonant is treated as silent when the word has another group.
/// Every word counts at least one syllable.
pub fn count_syllables(word: &str) -> usize {
    let letters: Vec<char> = word
        .chars()
        .filter(|c| c.is_alphabetic())
        .flat_map(char::to_lowercase)
        .collect();
    let is_vowel = |c: char| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');
    let mut groups = 0;
    let mut prev_vowel = false;
    for &c in &letters {
        let v = is_vowel(c);
        if v && !prev_vowel {
            groups += 1;
        }
        prev_vowel = v;
    }
    let n = letters.len();
    if groups > 1 && n >= 2 && letters[n - 1] == 'e' && !is_vowel(letters[n - 2]) {
        groups -= 1;
    }
    groups.max(1)
}

/// Sentences are `.`/`?`/`!`-separated segments holding at least one
/// alphanumeric character; words are whitespace-separated tokens holding
/// at least one alphanumeric character.
pub fn text_stats(text: &str) -> TextStats {
    let has_alnum = |s: &str| s.chars().any(char::is_alphanumeric);
    let sentences = text
        .split(['.', '?', '!'])
        .filter(|s| has_alnum(s))
        .count();
    let words: Vec<&str> = text.split_whitespace().filter(|w| has_alnum(w)).collect();
    TextStats {
        words: words.len(),
        sentences,
        syllables: words.iter().map(|w| count_syllables(w)).sum(),
    }
}

/// Flesch-Kincaid grade level:
/// `0.39·(words/sentences) + 11.8·(syllables/words) − 15.59`.
pub fn flesch_kincaid_grade(text: &str) -> ScoringResult<f64> {
    let stats = text_stats(text);
    if stats.words == 0 || stats.sentences == 0 {
        return Err(ScoringError::Empty("text"));
    }
    let words = stats.words as f64;
    Ok(0.39 * (words / stats.sentences as f64) + 11.8 * (stats.syllables as f64 / words) - 15.59)
}

/// `1 − FKGL / max_r`, clamped to `[0, 1]`.
pub fn readability_norm(grade: f64, max_r: f64) -> ScoringResult<f64> {
    if !(max_r.is_finite() && max_r > 0.0) {
        return Err(ScoringError::OutOfRange {
            what: "max_r",
            value: max_r,
        });
    }
    Ok((1.0 - grade / max_r).clamp(0.0, 1.0))
}

/// Normalized readability of a post, 0 for text with no words.
pub fn post_readability(post: &Post, max_r: f64) -> ScoringResult<f64> {
    match flesch_kincaid_grade(&post.full_text()) {
        Ok(grade) => readability_norm(grade, max_r),
        Err(ScoringError::Empty(_)) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Multiplies the affinity of the post's category by `1 + beta` (like) or
/// `1 − beta` (dislike) and renormalizes all affinities to sum to 1.
///
/// A category the profile has not seen is added with affinity 0. If every
/// affinity is 0 after the update the mass is spread uniformly.
pub fn apply_feedback(
    profile: &PersonaProfile,
    event: &FeedbackEvent,
    corpus: &Corpus,
    beta: f64,
) -> ScoringResult<PersonaProfile> {
    if !(0.0..1.0).contains(&beta) {
        return Err(ScoringError::OutOfRange {
            what: "beta",
            value: beta,
        });
    }
    if event.user_id != profile.user_id {
        return Err(ScoringError::UnknownUser(event.user_id.clone()));
    }
    let post = corpus
        .post(&event.post_id)
        .ok_or_else(|| ScoringError::UnknownPost(event.post_id.clone()))?;

    let mut next = profile.clone();
    let entry = next
        .categories
        .entry(post.category.clone())
        .or_insert_with(|| CategoryPersona {
            persona_score: 0.0,
            engagement: 0.0,
            readability: 0.0,
            sentiment: 0.0,
            sentiment_normalized: 0.5,
            share: 0.0,
            affinity: 0.0,
            interactions: 0,
        });
    entry.affinity *= match event.verdict {
        Verdict::Like => 1.0 + beta,
        Verdict::Dislike => 1.0 - beta,
    };

    let total: f64 = next.categories.values().map(|c| c.affinity).sum();
    let n = next.categories.len() as f64;
    for c in next.categories.values_mut() {
        c.affinity = if total > 0.0 {
            c.affinity / total
        } else {
            1.0 / n
        };
    }
    Ok(next)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedCandidate {
    pub post_id: String,
    pub author_id: String,
    pub category: Category,
    pub comments: u64,
    pub likes: u64,
    pub shares: u64,
    pub age_hours: f64,
    pub sentiment: f64,
    pub trend: f64,
    pub importance: f64,
    pub filter_status: u8,
    pub readability: f64,
    pub affinity: f64,
    pub friend_delta: f64,
    pub score: f64,
}

fn affinity_for(profile: &PersonaProfile, category: &Category) -> f64 {
    if profile.categories.is_empty() {
        // cold start: no preference yet
        return 1.0;
    }
    profile.affinity(category).unwrap_or(0.0)
}

/// Scores every post written by a ranked friend, without filtering.
pub fn score_candidates(
    corpus: &Corpus,
    profile: &PersonaProfile,
    friend_ranks: &[FriendEngagement],
    wts: &FeedWeights,
    now: Timestamp,
) -> ScoringResult<Vec<FeedCandidate>> {
    wts.validate()?;
    let deltas: HashMap<&str, f64> = friend_ranks
        .iter()
        .map(|f| (f.friend_id.as_str(), f.delta))
        .collect();
    let delta_max = friend_ranks.iter().map(|f| f.delta).fold(0.0, f64::max);

    let mut candidates = Vec::new();
    for post in &corpus.posts {
        let Some(&delta) = deltas.get(post.author_id.as_str()) else {
            continue;
        };
        let counts = PostCounts {
            comments: post.comments.len() as u64,
            likes: post.likes,
            shares: post.shares,
        };
        let age_hours = (now - post.published_at) as f64 / 3600.0;
        let importance = post_importance(&counts, age_hours, wts)?;
        let sentiment = sentiment_score(&SentimentCounts::from_comments(&post.comments));
        let trend = trend_score(&post.comments, wts.trend_window);
        let affinity = affinity_for(profile, &post.category);
        candidates.push(FeedCandidate {
            post_id: post.id.clone(),
            author_id: post.author_id.clone(),
            category: post.category.clone(),
            comments: counts.comments,
            likes: counts.likes,
            shares: counts.shares,
            age_hours: age_hours.max(wts.t_min_hours),
            sentiment,
            trend,
            importance,
            filter_status: filter_status(sentiment, trend, wts.tau),
            readability: post_readability(post, wts.max_r)?,
            affinity,
            friend_delta: delta,
            score: importance * affinity * (1.0 + delta / (1.0 + delta_max)),
        });
    }
    Ok(candidates)
}

/// Descending score, ties by ascending post id.
pub fn sort_feed(feed: &mut [FeedCandidate]) {
    feed.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.post_id.cmp(&b.post_id))
    });
}

/// The ranked feed of friends' posts that pass the sentiment/trend gate
/// (and the readability gate when enabled).
pub fn build_feed(
    user_id: &str,
    corpus: &Corpus,
    profile: &PersonaProfile,
    friend_ranks: &[FriendEngagement],
    wts: &FeedWeights,
    now: Timestamp,
) -> ScoringResult<Vec<FeedCandidate>> {
    if !corpus.has_user(user_id) {
        return Err(ScoringError::UnknownUser(user_id.to_string()));
    }
    let mut feed: Vec<FeedCandidate> = score_candidates(corpus, profile, friend_ranks, wts, now)?
        .into_iter()
        .filter(|c| c.filter_status == 1 && c.readability >= wts.min_readability)
        .collect();
    sort_feed(&mut feed);
    Ok(feed)
}
