//! Video question answering over a flat store of description embeddings.
//!
//! Each indexed video contributes one node holding its description and a
//! unit-norm embedding. A question is embedded with the same embedder,
//! matched to the video's closest node by cosine similarity, and the
//! retrieved description is spliced into a fixed prompt for the answer
//! generator.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hashing::fnv1a64;
use crate::text::tokens;

pub const DEFAULT_DIM: usize = 256;
pub const UNIT_NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum VidError {
    #[error("description is empty")]
    EmptyDescription,
    #[error("question is empty")]
    EmptyQuestion,
    #[error("no node indexed for video {0}")]
    UnknownVideo(String),
    #[error("node store is empty")]
    EmptyStore,
    #[error("k must be at least 1")]
    ZeroK,
    #[error("cosine similarity of a zero vector")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("node {node_id} embedding has norm {norm}, expected 1")]
    NotUnitNorm { node_id: String, norm: f64 },
    #[error("duplicate node id {0}")]
    DuplicateNode(String),
    #[error("io error on {path}: {source}")]
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
}

pub type Result<T, E = VidError> = std::result::Result<T, E>;

pub trait Embedder: Send + Sync {
    fn dim(&self) -> usize;
    /// Unit-norm embedding of `text`.
    fn embed(&self, text: &str) -> Vec<f64>;
}

/// Term frequencies over `dim − 1` FNV buckets, L2-normalized. Text with
/// no tokens maps to the reserved last bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashedEmbedder {
    dim: usize,
}

impl HashedEmbedder {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 2, "embedding dimension must be at least 2");
        HashedEmbedder { dim }
    }
}

impl Default for HashedEmbedder {
    fn default() -> Self {
        HashedEmbedder::new(DEFAULT_DIM)
    }
}

impl Embedder for HashedEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        let buckets = (self.dim - 1) as u64;
        for tok in tokens(text) {
            v[(fnv1a64(tok.as_bytes()) % buckets) as usize] += 1.0;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            v[self.dim - 1] = 1.0;
        } else {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `a·b / (‖a‖‖b‖)`.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(VidError::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(VidError::ZeroVector);
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok(dot / (na * nb))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingNode {
    pub node_id: String,
    pub video_id: String,
    pub description: String,
    pub embedding: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredNode {
    pub node_id: String,
    pub video_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeStore {
    dim: usize,
    nodes: Vec<EmbeddingNode>,
}

pub fn node_id_for_video(video_id: &str) -> String {
    format!("video:{video_id}")
}

impl NodeStore {
    pub fn new(dim: usize) -> Self {
        NodeStore {
            dim,
            nodes: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[EmbeddingNode] {
        &self.nodes
    }

    pub fn node(&self, node_id: &str) -> Option<&EmbeddingNode> {
        self.nodes.iter().find(|n| n.node_id == node_id)
    }

    fn check(&self, node: &EmbeddingNode) -> Result<()> {
        if node.embedding.len() != self.dim {
            return Err(VidError::DimensionMismatch {
                expected: self.dim,
                found: node.embedding.len(),
            });
        }
        let n = norm(&node.embedding);
        if n.is_nan() || (n - 1.0).abs() > UNIT_NORM_TOLERANCE {
            return Err(VidError::NotUnitNorm {
                node_id: node.node_id.clone(),
                norm: n,
            });
        }
        Ok(())
    }

    /// Adds a node; its id must be new and its embedding unit-norm.
    pub fn insert(&mut self, node: EmbeddingNode) -> Result<()> {
        self.check(&node)?;
        if self.node(&node.node_id).is_some() {
            return Err(VidError::DuplicateNode(node.node_id));
        }
        self.nodes.push(node);
        Ok(())
    }

    /// Embeds `description` and stores it as the video's node, replacing
    /// any earlier node for the same video.
    pub fn index_video(
        &mut self,
        embedder: &dyn Embedder,
        video_id: &str,
        description: &str,
    ) -> Result<String> {
        if description.trim().is_empty() {
            return Err(VidError::EmptyDescription);
        }
        let node = EmbeddingNode {
            node_id: node_id_for_video(video_id),
            video_id: video_id.to_string(),
            description: description.to_string(),
            embedding: embedder.embed(description),
        };
        self.check(&node)?;
        let id = node.node_id.clone();
        match self.nodes.iter_mut().find(|n| n.node_id == id) {
            Some(slot) => *slot = node,
            None => self.nodes.push(node),
        }
        Ok(id)
    }

    fn ranked<'a>(
        &self,
        nodes: impl Iterator<Item = &'a EmbeddingNode>,
        query: &[f64],
        k: usize,
    ) -> Result<Vec<ScoredNode>> {
        if k == 0 {
            return Err(VidError::ZeroK);
        }
        let mut scored = nodes
            .map(|n| {
                Ok(ScoredNode {
                    node_id: n.node_id.clone(),
                    video_id: n.video_id.clone(),
                    score: cosine_similarity(query, &n.embedding)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        scored.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| a.node_id.cmp(&b.node_id))
        });
        scored.truncate(k);
        Ok(scored)
    }

    /// Top `k` nodes by cosine similarity to `query`, ties by node id.
    pub fn nearest_node(&self, query: &[f64], k: usize) -> Result<Vec<ScoredNode>> {
        if self.nodes.is_empty() {
            return Err(VidError::EmptyStore);
        }
        self.ranked(self.nodes.iter(), query, k)
    }

    /// Like [`NodeStore::nearest_node`], restricted to one video's nodes.
    pub fn nearest_for_video(
        &self,
        video_id: &str,
        query: &[f64],
        k: usize,
    ) -> Result<Vec<ScoredNode>> {
        if !self.nodes.iter().any(|n| n.video_id == video_id) {
            return Err(VidError::UnknownVideo(video_id.to_string()));
        }
        self.ranked(
            self.nodes.iter().filter(|n| n.video_id == video_id),
            query,
            k,
        )
    }

    /// Writes one JSON node per line.
    pub fn save(&self, path: &Path) -> Result<()> {
        let io_err = |source| VidError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
        for node in &self.nodes {
            let line = serde_json::to_string(node).expect("node serializes");
            writeln!(out, "{line}").map_err(io_err)?;
        }
        out.flush().map_err(io_err)
    }

    pub fn load(path: &Path, dim: usize) -> Result<Self> {
        let io_err = |source| VidError::Io {
            path: path.display().to_string(),
            source,
        };
        let reader = BufReader::new(File::open(path).map_err(io_err)?);
        let mut store = NodeStore::new(dim);
        let mut seen = HashSet::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(io_err)?;
            if line.trim().is_empty() {
                continue;
            }
            let node: EmbeddingNode = serde_json::from_str(&line)
                .map_err(|source| VidError::Parse { line: i + 1, source })?;
            if !seen.insert(node.node_id.clone()) {
                return Err(VidError::DuplicateNode(node.node_id));
            }
            store.check(&node)?;
            store.nodes.push(node);
        }
        Ok(store)
    }
}

pub fn build_prompt(description: &str, question: &str) -> String {
    format!("You are a video assistant. Context: {description}\nQuestion: {question}\nAnswer:")
}

pub trait AnswerGenerator: Send + Sync {
    fn generate(&self, prompt: &str, context: &str) -> String;
}

/// Answers with the retrieved description.
#[derive(Debug, Clone, Copy, Default)]
pub struct StubGenerator;

impl AnswerGenerator for StubGenerator {
    fn generate(&self, _prompt: &str, context: &str) -> String {
        context.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryAnswer {
    pub answer: String,
    pub node_id: String,
    pub video_id: String,
    pub similarity: f64,
    pub description: String,
    pub prompt: String,
}

pub fn answer_query(
    store: &NodeStore,
    embedder: &dyn Embedder,
    video_id: &str,
    question: &str,
    generator: &dyn AnswerGenerator,
) -> Result<QueryAnswer> {
    if question.trim().is_empty() {
        return Err(VidError::EmptyQuestion);
    }
    let query = embedder.embed(question);
    let best = store
        .nearest_for_video(video_id, &query, 1)?
        .into_iter()
        .next()
        .expect("video has at least one node");
    let node = store.node(&best.node_id).expect("ranked node exists");
    let prompt = build_prompt(&node.description, question);
    Ok(QueryAnswer {
        answer: generator.generate(&prompt, &node.description),
        node_id: best.node_id,
        video_id: best.video_id,
        similarity: best.score,
        description: node.description.clone(),
        prompt,
    })
}
