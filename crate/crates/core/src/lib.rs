//! Federated-learning simulator and social-feed personalization engine.
//!
//! The crate is organised as a pipeline:
//!
//! - [`corpus`]: domain types, line-delimited JSON ingestion and the
//!   append-only event log whose replay rebuilds live state.
//! - [`fedsim`]: sample-weighted federated aggregation over K simulated
//!   clients, with a quadratic model (closed-form oracle) and a hashed
//!   bag-of-words softmax classifier used as the post categorizer.
//! - [`persona`]: per-category engagement, sentiment, readability and the
//!   composite persona score.
//! - [`socialrank`]: friend engagement scores and the friend ranking.
//! - [`feedfilter`]: post importance, the sentiment/trend gate,
//!   Flesch-Kincaid readability and the like/dislike affinity update.
//! - [`vidquery`]: cosine-similarity retrieval over description embeddings
//!   and retrieval-augmented prompt assembly.

pub mod config;
pub mod corpus;
pub mod error;
pub mod feedfilter;
pub mod fedsim;
pub mod hashing;
pub mod lexicon;
pub mod persona;
pub mod socialrank;
pub mod text;
pub mod vidquery;

pub use config::EngineConfig;
pub use corpus::{Category, Corpus, Post};
pub use error::{ScoringError, ScoringResult};
