//! Seeded random corpora for property tests and demos.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    Category, Comment, Corpus, InteractionEvent, InteractionKind, MediaKind, Post, SentimentLabel,
};

const WORDS: &[&str] = &[
    "the", "game", "was", "fun", "today", "team", "won", "vote", "policy", "market", "new",
    "music", "show", "great", "bad", "city", "we", "played", "long", "debate", "liquidity",
    "legislative", "jurisdiction", "dog", "frisbee", "catches", "park", "river", "happy",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusShape {
    pub users: usize,
    pub posts: usize,
    pub events: usize,
    pub max_friends: usize,
    pub max_comments: usize,
    pub categories: Vec<Category>,
    /// Posts are published in `[0, horizon)` seconds.
    pub horizon: i64,
}

impl Default for CorpusShape {
    fn default() -> Self {
        CorpusShape {
            users: 8,
            posts: 30,
            events: 60,
            max_friends: 4,
            max_comments: 12,
            categories: ["sports", "politics", "music", "tech"]
                .map(Category::new)
                .to_vec(),
            horizon: 7 * 24 * 3600,
        }
    }
}

fn sentence(rng: &mut ChaCha8Rng, len: usize) -> String {
    let words: Vec<&str> = (0..len).map(|_| *WORDS.choose(rng).unwrap()).collect();
    format!("{}.", words.join(" "))
}

/// A valid corpus drawn from `shape` with a ChaCha8 stream seeded by `seed`.
pub fn random_corpus(shape: &CorpusShape, seed: u64) -> Corpus {
    assert!(shape.users >= 1 && !shape.categories.is_empty());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let users: Vec<String> = (0..shape.users).map(|i| format!("u{i:03}")).collect();

    let mut friendships = BTreeMap::new();
    for u in &users {
        let n = rng.gen_range(0..=shape.max_friends.min(users.len() - 1));
        let mut others: Vec<&String> = users.iter().filter(|o| *o != u).collect();
        others.shuffle(&mut rng);
        let mut friends: Vec<String> = others.into_iter().take(n).cloned().collect();
        friends.sort();
        friendships.insert(u.clone(), friends);
    }

    let labels = [
        SentimentLabel::Positive,
        SentimentLabel::Negative,
        SentimentLabel::Neutral,
    ];
    let posts: Vec<Post> = (0..shape.posts)
        .map(|i| {
            let published_at = rng.gen_range(0..shape.horizon.max(1));
            let comments = (0..rng.gen_range(0..=shape.max_comments))
                .map(|_| Comment {
                    author_id: users.choose(&mut rng).unwrap().clone(),
                    text: sentence(&mut rng, 4),
                    sentiment_label: *labels.choose(&mut rng).unwrap(),
                    created_at: published_at + rng.gen_range(0..3600),
                })
                .collect();
            let video = rng.gen_bool(0.2);
            let len = rng.gen_range(3..=14);
            Post {
                id: format!("p{i:04}"),
                author_id: users.choose(&mut rng).unwrap().clone(),
                category: shape.categories.choose(&mut rng).unwrap().clone(),
                body: sentence(&mut rng, len),
                media_kind: if video { MediaKind::Video } else { MediaKind::Text },
                transcript: video.then(|| sentence(&mut rng, 8)),
                published_at,
                likes: rng.gen_range(0..200),
                shares: rng.gen_range(0..50),
                comments,
            }
        })
        .collect();

    let kinds = [
        InteractionKind::Like,
        InteractionKind::Comment,
        InteractionKind::Share,
    ];
    let events = if posts.is_empty() {
        Vec::new()
    } else {
        (0..shape.events)
            .map(|_| {
                let post = posts.choose(&mut rng).unwrap();
                InteractionEvent {
                    actor_id: users.choose(&mut rng).unwrap().clone(),
                    target_post_id: post.id.clone(),
                    kind: *kinds.choose(&mut rng).unwrap(),
                    category: post.category.clone(),
                    occurred_at: rng.gen_range(0..shape.horizon.max(1)),
                }
            })
            .collect()
    };

    Corpus::from_parts(users, friendships, posts, events)
}
