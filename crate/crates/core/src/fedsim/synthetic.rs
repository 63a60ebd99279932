//! Shard construction: seeded synthetic data and corpus partitioning.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ClientShard, Featurizer, FedError, Result};
use crate::corpus::{Category, Corpus};
use crate::hashing::fnv1a64;

/// `clients` quadratic shards with centers uniform in
/// `[-center_range, center_range]^dim` and sample counts uniform in
/// `1..=max_samples`. Client ids run from 1.
pub fn quadratic_shards(
    clients: usize,
    dim: usize,
    center_range: f64,
    max_samples: u64,
    seed: u64,
) -> Vec<ClientShard> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (1..=clients)
        .map(|id| {
            let center = (0..dim)
                .map(|_| rng.gen_range(-center_range..=center_range))
                .collect();
            let n = rng.gen_range(1..=max_samples.max(1));
            ClientShard::quadratic(id, n, center)
        })
        .collect()
}

const NOISE_VOCAB: usize = 300;

fn marker_token(category: &Category) -> String {
    format!("zz{}marker", category.as_str())
}

/// Labeled documents whose category is decided by a single marker token
/// hidden among shared noise words. Returns one document list per client;
/// labels index into `categories`.
pub fn marker_documents(
    categories: &[Category],
    clients: usize,
    docs_per_client: usize,
    seed: u64,
) -> Vec<Vec<(String, usize)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..clients)
        .map(|_| {
            (0..docs_per_client)
                .map(|_| {
                    let label = rng.gen_range(0..categories.len());
                    let noise = rng.gen_range(4..=10);
                    let mut words: Vec<String> = (0..noise)
                        .map(|_| format!("noise{}", rng.gen_range(0..NOISE_VOCAB)))
                        .collect();
                    words.push(marker_token(&categories[label]));
                    words.shuffle(&mut rng);
                    (words.join(" "), label)
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticClient {
    pub n_samples: u64,
    pub center: Vec<f64>,
}

fn default_center_range() -> f64 {
    5.0
}

fn default_max_samples() -> u64 {
    100
}

/// Where a simulation's client data comes from, as written in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShardSource {
    Quadratic {
        clients: Vec<QuadraticClient>,
    },
    RandomQuadratic {
        clients: usize,
        dim: usize,
        #[serde(default = "default_center_range")]
        center_range: f64,
        #[serde(default = "default_max_samples")]
        max_samples: u64,
    },
    MarkerDocuments {
        clients: usize,
        docs_per_client: usize,
        categories: Vec<Category>,
        #[serde(default)]
        buckets: Option<usize>,
    },
}

impl ShardSource {
    /// Builds the shards and, for document sources, the sorted category
    /// list the classifier's rows correspond to.
    pub fn build(&self, seed: u64) -> Result<(Vec<ClientShard>, Vec<Category>)> {
        match self {
            ShardSource::Quadratic { clients } => Ok((
                clients
                    .iter()
                    .enumerate()
                    .map(|(i, c)| ClientShard::quadratic(i + 1, c.n_samples, c.center.clone()))
                    .collect(),
                Vec::new(),
            )),
            ShardSource::RandomQuadratic {
                clients,
                dim,
                center_range,
                max_samples,
            } => Ok((
                quadratic_shards(*clients, *dim, *center_range, *max_samples, seed),
                Vec::new(),
            )),
            ShardSource::MarkerDocuments {
                clients,
                docs_per_client,
                categories,
                buckets,
            } => {
                let mut categories = categories.clone();
                categories.sort();
                categories.dedup();
                if categories.is_empty() {
                    return Err(FedError::InvalidConfig("no categories".into()));
                }
                let featurizer = buckets.map(Featurizer::new).unwrap_or_default();
                let shards = marker_documents(&categories, *clients, *docs_per_client, seed)
                    .iter()
                    .enumerate()
                    .map(|(i, docs)| {
                        ClientShard::documents(i + 1, categories.len(), featurizer, docs)
                    })
                    .collect();
                Ok((shards, categories))
            }
        }
    }
}

/// Client (1-based) holding an author's posts: `fnv1a64(author_id) mod K + 1`.
pub fn client_for_author(author_id: &str, clients: usize) -> usize {
    (fnv1a64(author_id.as_bytes()) % clients as u64) as usize + 1
}

/// Partitions the corpus posts into `clients` document shards keyed by
/// author. Clients that receive no posts are omitted.
pub fn shards_from_corpus(
    corpus: &Corpus,
    clients: usize,
    featurizer: Featurizer,
) -> Result<(Vec<ClientShard>, Vec<Category>)> {
    if clients == 0 {
        return Err(FedError::InvalidConfig("clients must be >= 1".into()));
    }
    let mut categories: Vec<Category> = corpus.posts.iter().map(|p| p.category.clone()).collect();
    categories.sort();
    categories.dedup();
    let mut buckets: Vec<Vec<(String, usize)>> = vec![Vec::new(); clients];
    for post in &corpus.posts {
        let label = categories
            .binary_search(&post.category)
            .expect("category collected above");
        buckets[client_for_author(&post.author_id, clients) - 1].push((post.full_text(), label));
    }
    let shards: Vec<ClientShard> = buckets
        .iter()
        .enumerate()
        .filter(|(_, docs)| !docs.is_empty())
        .map(|(i, docs)| ClientShard::documents(i + 1, categories.len(), featurizer, docs))
        .collect();
    if shards.is_empty() {
        return Err(FedError::EmptyShards);
    }
    Ok((shards, categories))
}
