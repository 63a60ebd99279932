//! Per-user, per-category persona scoring.
//!
//! For each category a user has interacted with:
//!
//! - `E`: mean normalized engagement of the distinct posts touched, where a
//!   post's engagement is `(w_likes·likes + w_shares·shares +
//!   w_comments·comments) / MaxE` and `MaxE` is the largest raw value in the
//!   corpus.
//! - `S`: `(positive − negative) / total` over those posts' comments,
//!   rescaled to `[0, 1]` as `(S + 1) / 2`.
//! - `R`: mean rubric readability (0, 1 or 2) of those posts.
//! - `C_k = w_E·E + w_R·(R/2) + w_S·S_normalized`, with
//!   `w_E + w_R + w_S = 1`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{Category, Comment, Corpus, InteractionEvent, Post, SentimentLabel};
use crate::error::{ScoringError, ScoringResult};
use crate::lexicon::{common_words, jargon_words};
use crate::text::alpha_words;

/// Allowed deviation of `w_E + w_R + w_S` from 1.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoringWeights {
    pub w_likes: f64,
    pub w_shares: f64,
    pub w_comments: f64,
    pub w_e: f64,
    pub w_r: f64,
    pub w_s: f64,
}

impl Default for ScoringWeights {
    fn default() -> Self {
        ScoringWeights {
            w_likes: 0.2,
            w_shares: 0.5,
            w_comments: 0.3,
            w_e: 0.5,
            w_r: 0.2,
            w_s: 0.3,
        }
    }
}

fn check_non_negative(name: &str, w: f64) -> ScoringResult<()> {
    if !(w.is_finite() && w >= 0.0) {
        return Err(ScoringError::InvalidWeights(format!(
            "{name} must be finite and >= 0, got {w}"
        )));
    }
    Ok(())
}

impl ScoringWeights {
    pub fn validate_engagement(&self) -> ScoringResult<()> {
        check_non_negative("w_likes", self.w_likes)?;
        check_non_negative("w_shares", self.w_shares)?;
        check_non_negative("w_comments", self.w_comments)?;
        if self.w_likes + self.w_shares + self.w_comments == 0.0 {
            return Err(ScoringError::InvalidWeights(
                "engagement weights are all zero".into(),
            ));
        }
        Ok(())
    }

    pub fn validate_persona(&self) -> ScoringResult<()> {
        check_non_negative("w_e", self.w_e)?;
        check_non_negative("w_r", self.w_r)?;
        check_non_negative("w_s", self.w_s)?;
        let sum = self.w_e + self.w_r + self.w_s;
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(ScoringError::InvalidWeights(format!(
                "w_e + w_r + w_s must equal 1, got {sum}"
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> ScoringResult<()> {
        self.validate_engagement()?;
        self.validate_persona()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngagementCounts {
    pub likes: u64,
    pub shares: u64,
    pub comments: u64,
    pub max_e: f64,
}

pub fn raw_engagement(likes: u64, shares: u64, comments: u64, wts: &ScoringWeights) -> f64 {
    wts.w_likes * likes as f64 + wts.w_shares * shares as f64 + wts.w_comments * comments as f64
}

/// `E = raw / MaxE`. Not clamped: `MaxE` is defined to bound every post.
pub fn engagement_score(c: &EngagementCounts, wts: &ScoringWeights) -> ScoringResult<f64> {
    if !(c.max_e.is_finite() && c.max_e > 0.0) {
        return Err(ScoringError::OutOfRange {
            what: "MaxE",
            value: c.max_e,
        });
    }
    Ok(raw_engagement(c.likes, c.shares, c.comments, wts) / c.max_e)
}

/// Largest raw engagement over all posts, or 1 when that is not positive.
pub fn max_engagement(corpus: &Corpus, wts: &ScoringWeights) -> f64 {
    let max = corpus
        .posts
        .iter()
        .map(|p| raw_engagement(p.likes, p.shares, p.comments.len() as u64, wts))
        .fold(0.0, f64::max);
    if max > 0.0 {
        max
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SentimentCounts {
    pub positive: u64,
    pub negative: u64,
    pub neutral: u64,
}

impl SentimentCounts {
    pub fn total(&self) -> u64 {
        self.positive + self.negative + self.neutral
    }

    pub fn from_comments<'a>(comments: impl IntoIterator<Item = &'a Comment>) -> Self {
        comments
            .into_iter()
            .fold(SentimentCounts::default(), |mut acc, c| {
                match c.sentiment_label {
                    SentimentLabel::Positive => acc.positive += 1,
                    SentimentLabel::Negative => acc.negative += 1,
                    SentimentLabel::Neutral => acc.neutral += 1,
                }
                acc
            })
    }
}

/// `(positive − negative) / total`, or 0 when there is nothing to count.
pub fn sentiment_score(c: &SentimentCounts) -> f64 {
    let total = c.total();
    if total == 0 {
        return 0.0;
    }
    (c.positive as f64 - c.negative as f64) / total as f64
}

pub fn normalize_sentiment(s: f64) -> ScoringResult<f64> {
    if !(-1.0..=1.0).contains(&s) {
        return Err(ScoringError::OutOfRange {
            what: "sentiment",
            value: s,
        });
    }
    Ok((s + 1.0) / 2.0)
}

/// Thresholds for the 0/1/2 readability rubric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RubricConfig {
    /// Below this share of recognized words a post is unreadable (0).
    pub dictionary_ratio: f64,
    /// At or above this share of jargon terms a post is professional (2).
    pub jargon_density: f64,
}

impl Default for RubricConfig {
    fn default() -> Self {
        RubricConfig {
            dictionary_ratio: 0.5,
            jargon_density: 0.15,
        }
    }
}

pub fn rate_readability(text: &str, rubric: &RubricConfig) -> u8 {
    let words = alpha_words(text);
    if words.is_empty() {
        return 0;
    }
    let n = words.len() as f64;
    let jargon = words.iter().filter(|w| jargon_words().contains(w)).count();
    let known = words
        .iter()
        .filter(|w| common_words().contains(w) || jargon_words().contains(w))
        .count();
    if (known as f64) / n < rubric.dictionary_ratio {
        0
    } else if (jargon as f64) / n >= rubric.jargon_density {
        2
    } else {
        1
    }
}

pub fn rate_post_readability(post: &Post, rubric: &RubricConfig) -> u8 {
    rate_readability(&post.full_text(), rubric)
}

/// Mean rubric score, in `[0, 2]`.
pub fn category_readability(scores: &[u8]) -> ScoringResult<f64> {
    if scores.is_empty() {
        return Err(ScoringError::Empty("readability scores"));
    }
    Ok(scores.iter().map(|&s| f64::from(s)).sum::<f64>() / scores.len() as f64)
}

fn check_range(what: &'static str, value: f64, hi: f64) -> ScoringResult<()> {
    if !(0.0..=hi).contains(&value) {
        return Err(ScoringError::OutOfRange { what, value });
    }
    Ok(())
}

/// `C_k = w_E·E + w_R·(R/2) + w_S·S_normalized`, in `[0, 1]`.
pub fn persona_score(
    engagement: f64,
    readability: f64,
    sentiment_normalized: f64,
    wts: &ScoringWeights,
) -> ScoringResult<f64> {
    wts.validate_persona()?;
    check_range("engagement", engagement, 1.0)?;
    check_range("readability", readability, 2.0)?;
    check_range("normalized sentiment", sentiment_normalized, 1.0)?;
    Ok(wts.w_e * engagement + wts.w_r * (readability / 2.0) + wts.w_s * sentiment_normalized)
}

/// `N_x / N` per category.
pub fn category_distribution<'a>(
    events: impl IntoIterator<Item = &'a InteractionEvent>,
) -> BTreeMap<Category, f64> {
    let mut counts: BTreeMap<Category, u64> = BTreeMap::new();
    for e in events {
        *counts.entry(e.category.clone()).or_default() += 1;
    }
    let total: u64 = counts.values().sum();
    counts
        .into_iter()
        .map(|(c, n)| (c, n as f64 / total as f64))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryPersona {
    pub persona_score: f64,
    pub engagement: f64,
    pub readability: f64,
    pub sentiment: f64,
    pub sentiment_normalized: f64,
    pub share: f64,
    pub affinity: f64,
    pub interactions: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonaProfile {
    pub user_id: String,
    pub cold_start: bool,
    pub categories: BTreeMap<Category, CategoryPersona>,
}

impl PersonaProfile {
    pub fn affinity(&self, category: &Category) -> Option<f64> {
        self.categories.get(category).map(|c| c.affinity)
    }

    pub fn affinities(&self) -> BTreeMap<Category, f64> {
        self.categories
            .iter()
            .map(|(k, c)| (k.clone(), c.affinity))
            .collect()
    }
}

pub fn build_profile(
    user_id: &str,
    corpus: &Corpus,
    wts: &ScoringWeights,
    rubric: &RubricConfig,
) -> ScoringResult<PersonaProfile> {
    if !corpus.has_user(user_id) {
        return Err(ScoringError::UnknownUser(user_id.to_string()));
    }
    wts.validate()?;
    let events: Vec<&InteractionEvent> = corpus.events_by(user_id).collect();
    let distribution = category_distribution(events.iter().copied());
    let max_e = max_engagement(corpus, wts);

    let mut touched: BTreeMap<&Category, BTreeSet<&str>> = BTreeMap::new();
    let mut interactions: BTreeMap<&Category, u64> = BTreeMap::new();
    for e in &events {
        touched
            .entry(&e.category)
            .or_default()
            .insert(e.target_post_id.as_str());
        *interactions.entry(&e.category).or_default() += 1;
    }

    let mut categories = BTreeMap::new();
    for (category, post_ids) in touched {
        let posts: Vec<&Post> = post_ids
            .iter()
            .map(|id| {
                corpus
                    .post(id)
                    .ok_or_else(|| ScoringError::UnknownPost(id.to_string()))
            })
            .collect::<ScoringResult<_>>()?;
        let mut engagement_sum = 0.0;
        for p in &posts {
            engagement_sum += engagement_score(
                &EngagementCounts {
                    likes: p.likes,
                    shares: p.shares,
                    comments: p.comments.len() as u64,
                    max_e,
                },
                wts,
            )?;
        }
        let engagement = engagement_sum / posts.len() as f64;
        let sentiment = sentiment_score(&SentimentCounts::from_comments(
            posts.iter().flat_map(|p| &p.comments),
        ));
        let sentiment_normalized = normalize_sentiment(sentiment)?;
        let rubric_scores: Vec<u8> = posts
            .iter()
            .map(|p| rate_post_readability(p, rubric))
            .collect();
        let readability = category_readability(&rubric_scores)?;
        let share = distribution[category];
        categories.insert(
            category.clone(),
            CategoryPersona {
                persona_score: persona_score(engagement, readability, sentiment_normalized, wts)?,
                engagement,
                readability,
                sentiment,
                sentiment_normalized,
                share,
                affinity: share,
                interactions: interactions[category],
            },
        );
    }

    Ok(PersonaProfile {
        user_id: user_id.to_string(),
        cold_start: events.is_empty(),
        categories,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_corpus, InteractionKind};

    fn ev(category: &str) -> InteractionEvent {
        InteractionEvent {
            actor_id: "u".into(),
            target_post_id: "p".into(),
            kind: InteractionKind::Like,
            category: category.into(),
            occurred_at: 0,
        }
    }

    #[test]
    fn distribution_is_count_ratio() {
        let events: Vec<_> = std::iter::repeat_n(ev("sports"), 7)
            .chain(std::iter::repeat_n(ev("politics"), 3))
            .collect();
        let d = category_distribution(&events);
        assert_eq!(d[&Category::new("sports")], 0.7);
        assert_eq!(d[&Category::new("politics")], 0.3);
        assert_eq!(category_distribution(&[ev("x")])[&Category::new("x")], 1.0);
        assert!(category_distribution(&[]).is_empty());
    }

    #[test]
    fn engagement_examples() {
        let w = ScoringWeights::default();
        let e = engagement_score(
            &EngagementCounts {
                likes: 10,
                shares: 2,
                comments: 4,
                max_e: 8.4,
            },
            &w,
        )
        .unwrap();
        assert!((e - 0.5).abs() < 1e-15);
        let zero = EngagementCounts {
            likes: 0,
            shares: 0,
            comments: 0,
            max_e: 3.0,
        };
        assert_eq!(engagement_score(&zero, &w).unwrap(), 0.0);
        let raw = raw_engagement(3, 1, 2, &w);
        let at_max = EngagementCounts {
            likes: 3,
            shares: 1,
            comments: 2,
            max_e: raw,
        };
        assert_eq!(engagement_score(&at_max, &w).unwrap(), 1.0);
        assert!(engagement_score(&EngagementCounts { max_e: 0.0, ..zero }, &w).is_err());
    }

    #[test]
    fn sentiment_examples() {
        let s = |p, n, u| {
            sentiment_score(&SentimentCounts {
                positive: p,
                negative: n,
                neutral: u,
            })
        };
        assert_eq!(s(3, 1, 0), 0.5);
        assert_eq!(s(4, 4, 2), 0.0);
        assert_eq!(s(0, 0, 5), 0.0);
        assert_eq!(s(0, 0, 0), 0.0);
        assert_eq!(normalize_sentiment(0.5).unwrap(), 0.75);
        assert_eq!(normalize_sentiment(0.0).unwrap(), 0.5);
        assert_eq!(normalize_sentiment(-1.0).unwrap(), 0.0);
        assert!(normalize_sentiment(1.5).is_err());
        assert!(normalize_sentiment(f64::NAN).is_err());
    }

    #[test]
    fn rubric_examples() {
        let r = RubricConfig::default();
        assert_eq!(rate_readability("The game was fun today.", &r), 1);
        assert_eq!(
            rate_readability(
                "Macroprudential liquidity covenants amplify systemic leverage.",
                &r
            ),
            2
        );
        assert_eq!(rate_readability("asdf qwer zxcv vbnm", &r), 0);
        assert_eq!(rate_readability("", &r), 0);
    }

    #[test]
    fn category_readability_examples() {
        assert_eq!(category_readability(&[1, 2, 0, 1]).unwrap(), 1.0);
        assert_eq!(category_readability(&[2, 2, 2]).unwrap(), 2.0);
        assert_eq!(category_readability(&[0]).unwrap(), 0.0);
        assert!(category_readability(&[]).is_err());
    }

    #[test]
    fn persona_score_examples() {
        let w = ScoringWeights::default();
        assert!((persona_score(0.8, 1.0, 0.75, &w).unwrap() - 0.725).abs() < 1e-15);
        assert_eq!(persona_score(0.0, 0.0, 0.0, &w).unwrap(), 0.0);
        assert!((persona_score(1.0, 2.0, 1.0, &w).unwrap() - 1.0).abs() < 1e-15);
        let bad = ScoringWeights { w_e: 0.6, ..w };
        assert!(matches!(
            persona_score(0.5, 1.0, 0.5, &bad),
            Err(ScoringError::InvalidWeights(_))
        ));
    }

    const FIXTURE: &str = r#"{"type":"user","id":"u1","friends":["u2"]}
{"type":"user","id":"u2"}
{"type":"user","id":"u3"}
{"type":"post","id":"s1","author_id":"u2","category":"sports","body":"The game was fun today.","published_at":0,"likes":10,"shares":2,"comments":[{"author_id":"x","text":"","sentiment_label":"positive","created_at":1},{"author_id":"x","text":"","sentiment_label":"negative","created_at":2}]}
{"type":"post","id":"s2","author_id":"u2","category":"sports","body":"asdf qwer zxcv","published_at":0,"likes":4,"shares":0,"comments":[{"author_id":"x","text":"","sentiment_label":"positive","created_at":1}]}
{"type":"post","id":"g1","author_id":"u2","category":"politics","body":"Legislative filibuster jurisdiction debate today.","published_at":0,"likes":0,"shares":1}
{"type":"event","actor_id":"u1","target_post_id":"s1","kind":"like","occurred_at":1}
{"type":"event","actor_id":"u1","target_post_id":"s1","kind":"comment","occurred_at":2}
{"type":"event","actor_id":"u1","target_post_id":"s2","kind":"like","occurred_at":3}
{"type":"event","actor_id":"u1","target_post_id":"s2","kind":"share","occurred_at":4}
{"type":"event","actor_id":"u1","target_post_id":"s1","kind":"share","occurred_at":5}
{"type":"event","actor_id":"u1","target_post_id":"s2","kind":"like","occurred_at":6}
{"type":"event","actor_id":"u1","target_post_id":"s1","kind":"like","occurred_at":7}
{"type":"event","actor_id":"u1","target_post_id":"g1","kind":"like","occurred_at":8}
{"type":"event","actor_id":"u1","target_post_id":"g1","kind":"comment","occurred_at":9}
{"type":"event","actor_id":"u1","target_post_id":"g1","kind":"share","occurred_at":10}
"#;

    #[test]
    fn profile_composes_component_scores() {
        let corpus = parse_corpus(FIXTURE).unwrap();
        let w = ScoringWeights::default();
        let profile = build_profile("u1", &corpus, &w, &RubricConfig::default()).unwrap();
        assert!(!profile.cold_start);
        assert_eq!(profile.categories.len(), 2);

        // Hand-composed oracle. Raw engagement: s1 = 0.2·10+0.5·2+0.3·2 = 3.6,
        // s2 = 0.2·4+0.3·1 = 1.1, g1 = 0.5. MaxE = 3.6.
        let sports = &profile.categories[&Category::new("sports")];
        assert_eq!(sports.share, 0.7);
        let e = (3.6 / 3.6 + 1.1 / 3.6) / 2.0;
        assert!((sports.engagement - e).abs() < 1e-12);
        // comments: 2 positive, 1 negative
        assert!((sports.sentiment - 1.0 / 3.0).abs() < 1e-15);
        // rubric: s1 = 1, s2 = 0
        assert_eq!(sports.readability, 0.5);
        let c = 0.5 * e + 0.2 * 0.25 + 0.3 * ((1.0 / 3.0 + 1.0) / 2.0);
        assert!((sports.persona_score - c).abs() < 1e-12);
        assert_eq!(sports.affinity, 0.7);

        let politics = &profile.categories[&Category::new("politics")];
        assert_eq!(politics.share, 0.3);
        assert_eq!(politics.readability, 2.0);
        assert_eq!(politics.sentiment_normalized, 0.5);
        let c = 0.5 * (0.5 / 3.6) + 0.2 * 1.0 + 0.3 * 0.5;
        assert!((politics.persona_score - c).abs() < 1e-12);
    }

    #[test]
    fn cold_start_and_unknown_user() {
        let corpus = parse_corpus(FIXTURE).unwrap();
        let w = ScoringWeights::default();
        let r = RubricConfig::default();
        let p = build_profile("u3", &corpus, &w, &r).unwrap();
        assert!(p.cold_start);
        assert!(p.categories.is_empty());
        assert_eq!(
            build_profile("nobody", &corpus, &w, &r),
            Err(ScoringError::UnknownUser("nobody".into()))
        );
    }
}
