//! Friend engagement `δ_i = w_l·L_i + w_c·C_i + w_sh·Sh_i`, where the counts
//! are the focal user's likes, comments and shares on friend `i`'s posts.

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, InteractionKind};
use crate::error::{ScoringError, ScoringResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FriendWeights {
    pub w_l: f64,
    pub w_c: f64,
    pub w_sh: f64,
}

impl Default for FriendWeights {
    fn default() -> Self {
        FriendWeights {
            w_l: 0.2,
            w_c: 0.5,
            w_sh: 0.3,
        }
    }
}

impl FriendWeights {
    pub fn validate(&self) -> ScoringResult<()> {
        for (name, w) in [("w_l", self.w_l), ("w_c", self.w_c), ("w_sh", self.w_sh)] {
            if !(w.is_finite() && w >= 0.0) {
                return Err(ScoringError::InvalidWeights(format!(
                    "{name} must be finite and >= 0, got {w}"
                )));
            }
        }
        Ok(())
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        FriendWeights {
            w_l: self.w_l * lambda,
            w_c: self.w_c * lambda,
            w_sh: self.w_sh * lambda,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct InteractionCounts {
    pub likes: u64,
    pub comments: u64,
    pub shares: u64,
}

pub fn friend_engagement(counts: &InteractionCounts, w: &FriendWeights) -> ScoringResult<f64> {
    w.validate()?;
    Ok(w.w_l * counts.likes as f64 + w.w_c * counts.comments as f64 + w.w_sh * counts.shares as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriendEngagement {
    pub friend_id: String,
    pub likes: u64,
    pub comments: u64,
    pub shares: u64,
    pub delta: f64,
}

/// Counts the user's actions on each friend's posts.
pub fn interaction_counts(user_id: &str, friend_id: &str, corpus: &Corpus) -> InteractionCounts {
    let mut counts = InteractionCounts::default();
    for e in corpus.events_by(user_id) {
        let Some(post) = corpus.post(&e.target_post_id) else {
            continue;
        };
        if post.author_id != friend_id {
            continue;
        }
        match e.kind {
            InteractionKind::Like => counts.likes += 1,
            InteractionKind::Comment => counts.comments += 1,
            InteractionKind::Share => counts.shares += 1,
        }
    }
    counts
}

/// Descending `δ`, ties by ascending friend id. Friends with no
/// interactions are included with `δ = 0`.
pub fn rank_friends(
    user_id: &str,
    corpus: &Corpus,
    w: &FriendWeights,
) -> ScoringResult<Vec<FriendEngagement>> {
    if !corpus.has_user(user_id) {
        return Err(ScoringError::UnknownUser(user_id.to_string()));
    }
    let mut ranking = corpus
        .friends(user_id)
        .iter()
        .map(|friend| {
            let c = interaction_counts(user_id, friend, corpus);
            Ok(FriendEngagement {
                friend_id: friend.clone(),
                likes: c.likes,
                comments: c.comments,
                shares: c.shares,
                delta: friend_engagement(&c, w)?,
            })
        })
        .collect::<ScoringResult<Vec<_>>>()?;
    sort_ranking(&mut ranking);
    ranking.dedup_by(|a, b| a.friend_id == b.friend_id);
    Ok(ranking)
}

pub fn sort_ranking(ranking: &mut [FriendEngagement]) {
    ranking.sort_by(|a, b| {
        b.delta
            .total_cmp(&a.delta)
            .then_with(|| a.friend_id.cmp(&b.friend_id))
    });
}

/// Splits a ranking into close friends (the top `fraction`, rounded up,
/// among friends with `δ > 0`) and everyone else.
pub fn close_friends(ranking: &[FriendEngagement], fraction: f64) -> (Vec<&str>, Vec<&str>) {
    let cut = (ranking.len() as f64 * fraction.clamp(0.0, 1.0)).ceil() as usize;
    let mut close = Vec::new();
    let mut normal = Vec::new();
    for (i, f) in ranking.iter().enumerate() {
        if i < cut && f.delta > 0.0 {
            close.push(f.friend_id.as_str());
        } else {
            normal.push(f.friend_id.as_str());
        }
    }
    (close, normal)
}
