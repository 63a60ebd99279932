//! One federated training run from a config file or request body: build
//! the shards, train, check descent and, for document shards, package the
//! trained classifier.

use serde::{Deserialize, Serialize};

use super::{
    check_descent, run_simulation, shards_from_corpus, BowClassifier, DescentReport, FedConfig,
    FedError, Featurizer, Result, ShardData, ShardSource, TrainingTrace,
};
use crate::corpus::{Category, Corpus};

fn four() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FedRunConfig {
    #[serde(flatten)]
    pub fed: FedConfig,
    /// Synthetic client data. Without it the corpus posts are sharded by
    /// author into `clients` document shards.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<ShardSource>,
    #[serde(default = "four")]
    pub clients: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub buckets: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FedSummary {
    pub clients: usize,
    pub rounds: usize,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub losses: Vec<f64>,
    pub final_weight_hash: String,
    pub descent: DescentReport,
    /// Pooled training accuracy, document shards only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<Category>,
}

#[derive(Debug, Clone)]
pub struct FedOutcome {
    pub summary: FedSummary,
    pub trace: TrainingTrace,
    pub classifier: Option<BowClassifier>,
}

pub fn run_federated(cfg: &FedRunConfig, corpus: Option<&Corpus>) -> Result<FedOutcome> {
    cfg.fed.validate()?;
    let (shards, categories) = match (&cfg.source, corpus) {
        (Some(source), _) => source.build(cfg.fed.seed)?,
        (None, Some(corpus)) => {
            let featurizer = cfg.buckets.map(Featurizer::new).unwrap_or_default();
            shards_from_corpus(corpus, cfg.clients, featurizer)?
        }
        (None, None) => {
            return Err(FedError::InvalidConfig(
                "no shard source and no corpus to shard".into(),
            ))
        }
    };
    let trace = run_simulation(&shards, &cfg.fed)?;
    let descent = check_descent(&trace, &cfg.fed);

    let featurizer = shards.iter().find_map(|s| match &s.data {
        ShardData::Documents { featurizer, .. } => Some(*featurizer),
        ShardData::Quadratic { .. } => None,
    });
    let classifier = match featurizer {
        Some(f) => Some(BowClassifier::new(
            categories.clone(),
            f,
            trace.final_weights.clone(),
        )?),
        None => None,
    };
    let accuracy = classifier.as_ref().map(|c| {
        let docs: Vec<_> = shards
            .iter()
            .flat_map(|s| match &s.data {
                ShardData::Documents { docs, .. } => docs.clone(),
                ShardData::Quadratic { .. } => Vec::new(),
            })
            .collect();
        c.accuracy(&docs)
    });

    let losses = trace.losses();
    let last = trace.records.last().expect("trace holds the initial round");
    let summary = FedSummary {
        clients: shards.len(),
        rounds: cfg.fed.rounds,
        initial_loss: losses[0],
        final_loss: last.loss,
        final_weight_hash: last.weight_hash.clone(),
        losses,
        descent,
        accuracy,
        categories,
    };
    Ok(FedOutcome {
        summary,
        trace,
        classifier,
    })
}
