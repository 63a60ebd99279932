//! Federated simulation: K clients compute local updates against the current
//! global weights and a coordinator folds them in with sample weights
//! `n_k / N`.
//!
//! Two loss models are supported. The quadratic model `½‖w − c_k‖²` has a
//! closed-form optimum and is used to check convergence exactly; the hashed
//! bag-of-words softmax classifier is the post categorizer.

mod classifier;
mod run;
mod synthetic;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hashing::hash_weights;

pub use classifier::{BowClassifier, Classification, EncodedDoc, Featurizer, DEFAULT_BUCKETS};
pub use run::{run_federated, FedOutcome, FedRunConfig, FedSummary};
pub use synthetic::{
    marker_documents, quadratic_shards, shards_from_corpus, QuadraticClient, ShardSource,
};

#[derive(Debug, Error, PartialEq)]
pub enum FedError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("client {client_id} produced a non-finite update")]
    NonFinite { client_id: usize },
    #[error("no client updates to aggregate")]
    EmptyUpdates,
    #[error("no client shards")]
    EmptyShards,
    #[error("client {client_id} has no samples")]
    ZeroSamples { client_id: usize },
    #[error("duplicate client id {0}")]
    DuplicateClient(usize),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("training diverged at round {round}")]
    Diverged { round: usize },
    #[error("operation requires the {0} loss model")]
    WrongModel(&'static str),
    #[error("model is untrained (all-zero weights)")]
    Untrained,
}

pub type Result<T, E = FedError> = std::result::Result<T, E>;

/// Flat parameter vector of the shared model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModelParams(pub Vec<f64>);

impl ModelParams {
    pub fn zeros(dim: usize) -> Self {
        ModelParams(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShardData {
    /// Local loss `½‖w − center‖²`.
    Quadratic { center: Vec<f64> },
    /// Mean softmax cross-entropy over hashed bag-of-words documents.
    Documents {
        num_classes: usize,
        featurizer: Featurizer,
        docs: Vec<EncodedDoc>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClientShard {
    pub client_id: usize,
    pub n_samples: u64,
    pub data: ShardData,
}

impl ClientShard {
    pub fn quadratic(client_id: usize, n_samples: u64, center: Vec<f64>) -> Self {
        ClientShard {
            client_id,
            n_samples,
            data: ShardData::Quadratic { center },
        }
    }

    /// A document shard; `n_samples` is the number of documents.
    pub fn documents(
        client_id: usize,
        num_classes: usize,
        featurizer: Featurizer,
        labeled: &[(String, usize)],
    ) -> Self {
        let docs = labeled
            .iter()
            .map(|(text, label)| featurizer.encode(text, *label))
            .collect::<Vec<_>>();
        ClientShard {
            client_id,
            n_samples: docs.len() as u64,
            data: ShardData::Documents {
                num_classes,
                featurizer,
                docs,
            },
        }
    }

    pub fn model_dim(&self) -> usize {
        match &self.data {
            ShardData::Quadratic { center } => center.len(),
            ShardData::Documents {
                num_classes,
                featurizer,
                ..
            } => num_classes * featurizer.width(),
        }
    }

    fn loss_model(&self) -> LossModel {
        match self.data {
            ShardData::Quadratic { .. } => LossModel::Quadratic,
            ShardData::Documents { .. } => LossModel::BowClassifier,
        }
    }

    /// Local loss `L_k(w)`.
    pub fn loss(&self, w: &ModelParams) -> Result<f64> {
        self.check_dim(w)?;
        Ok(match &self.data {
            ShardData::Quadratic { center } => {
                0.5 * w
                    .0
                    .iter()
                    .zip(center)
                    .map(|(wi, ci)| (wi - ci) * (wi - ci))
                    .sum::<f64>()
            }
            ShardData::Documents {
                num_classes,
                featurizer,
                docs,
            } => classifier::mean_cross_entropy(&w.0, *num_classes, featurizer.width(), docs),
        })
    }

    /// Local gradient `∇L_k(w)`.
    pub fn gradient(&self, w: &ModelParams) -> Result<Vec<f64>> {
        self.check_dim(w)?;
        Ok(match &self.data {
            ShardData::Quadratic { center } => {
                w.0.iter().zip(center).map(|(wi, ci)| wi - ci).collect()
            }
            ShardData::Documents {
                num_classes,
                featurizer,
                docs,
            } => classifier::cross_entropy_gradient(&w.0, *num_classes, featurizer.width(), docs),
        })
    }

    fn check_dim(&self, w: &ModelParams) -> Result<()> {
        let expected = self.model_dim();
        if w.dim() != expected {
            return Err(FedError::DimensionMismatch {
                expected,
                found: w.dim(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateMode {
    /// Clients send `∇L_k(w)`; one gradient per round.
    #[default]
    Gradient,
    /// Clients run `local_epochs` of gradient descent and send `w − w_local`.
    Delta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossModel {
    #[default]
    Quadratic,
    BowClassifier,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FedConfig {
    pub eta: f64,
    pub rounds: usize,
    #[serde(default)]
    pub mode: UpdateMode,
    #[serde(default = "one")]
    pub local_epochs: usize,
    #[serde(default)]
    pub loss_model: LossModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz_l: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl FedConfig {
    pub fn quadratic(eta: f64, rounds: usize) -> Self {
        FedConfig {
            eta,
            rounds,
            mode: UpdateMode::Gradient,
            local_epochs: 1,
            loss_model: LossModel::Quadratic,
            lipschitz_l: None,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(FedError::InvalidConfig(format!(
                "eta must be a positive finite number, got {}",
                self.eta
            )));
        }
        if self.local_epochs == 0 {
            return Err(FedError::InvalidConfig("local_epochs must be >= 1".into()));
        }
        if self.mode == UpdateMode::Gradient && self.local_epochs != 1 {
            return Err(FedError::InvalidConfig(
                "gradient mode uses exactly one local epoch".into(),
            ));
        }
        if let Some(l) = self.lipschitz_l {
            if !(l.is_finite() && l > 0.0) {
                return Err(FedError::InvalidConfig(format!(
                    "lipschitz_l must be positive, got {l}"
                )));
            }
        }
        Ok(())
    }
}

fn check_model(shard: &ClientShard, cfg: &FedConfig) -> Result<()> {
    if shard.loss_model() != cfg.loss_model {
        return Err(FedError::InvalidConfig(format!(
            "client {} data does not match loss model {:?}",
            shard.client_id, cfg.loss_model
        )));
    }
    Ok(())
}

/// The update a client sends to the coordinator.
pub fn local_update(w: &ModelParams, shard: &ClientShard, cfg: &FedConfig) -> Result<Vec<f64>> {
    check_model(shard, cfg)?;
    let delta = match cfg.mode {
        UpdateMode::Gradient => shard.gradient(w)?,
        UpdateMode::Delta => {
            let mut local = w.clone();
            for _ in 0..cfg.local_epochs {
                let grad = shard.gradient(&local)?;
                for (li, gi) in local.0.iter_mut().zip(&grad) {
                    *li -= cfg.eta * gi;
                }
            }
            w.0.iter().zip(&local.0).map(|(a, b)| a - b).collect()
        }
    };
    if delta.iter().any(|x| !x.is_finite()) {
        return Err(FedError::NonFinite {
            client_id: shard.client_id,
        });
    }
    Ok(delta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClientUpdate {
    pub client_id: usize,
    pub n_samples: u64,
    pub delta: Vec<f64>,
}

/// Sample-weighted sum `Σ (n_k/N)·Δ_k`, accumulated left to right in
/// ascending `client_id` so the result is bit-identical for any input order.
pub fn weighted_sum(updates: &[ClientUpdate]) -> Result<Vec<f64>> {
    let first = updates.first().ok_or(FedError::EmptyUpdates)?;
    let dim = first.delta.len();
    let mut ordered: Vec<&ClientUpdate> = updates.iter().collect();
    ordered.sort_by_key(|u| u.client_id);
    let total: u64 = ordered.iter().map(|u| u.n_samples).sum();
    if let Some(u) = ordered.iter().find(|u| u.n_samples == 0) {
        return Err(FedError::ZeroSamples {
            client_id: u.client_id,
        });
    }
    let mut acc = vec![0.0; dim];
    for u in ordered {
        if u.delta.len() != dim {
            return Err(FedError::DimensionMismatch {
                expected: dim,
                found: u.delta.len(),
            });
        }
        let share = u.n_samples as f64 / total as f64;
        for (a, d) in acc.iter_mut().zip(&u.delta) {
            *a += share * d;
        }
    }
    Ok(acc)
}

/// `w − eta · Σ (n_k/N)·Δ_k`.
pub fn aggregate(updates: &[ClientUpdate], w: &ModelParams, eta: f64) -> Result<ModelParams> {
    let sum = weighted_sum(updates)?;
    if sum.len() != w.dim() {
        return Err(FedError::DimensionMismatch {
            expected: w.dim(),
            found: sum.len(),
        });
    }
    Ok(ModelParams(
        w.0.iter().zip(&sum).map(|(wi, si)| wi - eta * si).collect(),
    ))
}

fn ordered_shards(shards: &[ClientShard]) -> Result<Vec<&ClientShard>> {
    if shards.is_empty() {
        return Err(FedError::EmptyShards);
    }
    let mut ordered: Vec<&ClientShard> = shards.iter().collect();
    ordered.sort_by_key(|s| s.client_id);
    for pair in ordered.windows(2) {
        if pair[0].client_id == pair[1].client_id {
            return Err(FedError::DuplicateClient(pair[0].client_id));
        }
    }
    if let Some(s) = ordered.iter().find(|s| s.n_samples == 0) {
        return Err(FedError::ZeroSamples {
            client_id: s.client_id,
        });
    }
    Ok(ordered)
}

/// `L(w) = Σ (n_k/N)·L_k(w)`.
pub fn global_loss(w: &ModelParams, shards: &[ClientShard]) -> Result<f64> {
    let ordered = ordered_shards(shards)?;
    let total: u64 = ordered.iter().map(|s| s.n_samples).sum();
    let mut loss = 0.0;
    for s in ordered {
        loss += (s.n_samples as f64 / total as f64) * s.loss(w)?;
    }
    Ok(loss)
}

/// `∇L(w) = Σ (n_k/N)·∇L_k(w)`.
pub fn global_gradient(w: &ModelParams, shards: &[ClientShard]) -> Result<Vec<f64>> {
    let updates = shards
        .iter()
        .map(|s| {
            Ok(ClientUpdate {
                client_id: s.client_id,
                n_samples: s.n_samples,
                delta: s.gradient(w)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    weighted_sum(&updates)
}

/// Exact minimizer of the weighted quadratic: `w* = Σ (n_k/N)·c_k`.
pub fn closed_form_optimum(shards: &[ClientShard]) -> Result<ModelParams> {
    let ordered = ordered_shards(shards)?;
    let total: u64 = ordered.iter().map(|s| s.n_samples).sum();
    let dim = ordered[0].model_dim();
    let mut w = vec![0.0; dim];
    for s in ordered {
        let ShardData::Quadratic { center } = &s.data else {
            return Err(FedError::WrongModel("quadratic"));
        };
        if center.len() != dim {
            return Err(FedError::DimensionMismatch {
                expected: dim,
                found: center.len(),
            });
        }
        let share = s.n_samples as f64 / total as f64;
        for (wi, ci) in w.iter_mut().zip(center) {
            *wi += share * ci;
        }
    }
    Ok(ModelParams(w))
}

/// Smoothness constant used for the `eta < 2/L` step condition.
///
/// Quadratic: the Hessian of `Σ (n_k/N)·½‖w − c_k‖²` is the identity, so
/// `L = 1`. Classifier: an estimate, `0.25 · max_i ‖x_i‖²` over all
/// documents (bias feature included).
pub fn estimate_lipschitz(shards: &[ClientShard]) -> f64 {
    let mut max_sq: f64 = 0.0;
    for s in shards {
        match &s.data {
            ShardData::Quadratic { .. } => return 1.0,
            ShardData::Documents { docs, .. } => {
                for d in docs {
                    max_sq = max_sq.max(d.squared_norm());
                }
            }
        }
    }
    if max_sq > 0.0 {
        0.25 * max_sq
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub t: usize,
    pub loss: f64,
    pub grad_norm: f64,
    pub weight_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub records: Vec<RoundRecord>,
    pub final_weights: ModelParams,
    pub lipschitz: f64,
}

impl TrainingTrace {
    pub fn losses(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.loss).collect()
    }

    /// One JSON object per line, one line per round.
    pub fn to_jsonl(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("round record serializes") + "\n")
            .collect()
    }
}

fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn record(t: usize, w: &ModelParams, shards: &[ClientShard]) -> Result<RoundRecord> {
    let loss = global_loss(w, shards)?;
    if !loss.is_finite() {
        return Err(FedError::Diverged { round: t });
    }
    let grad_norm = l2_norm(&global_gradient(w, shards)?);
    Ok(RoundRecord {
        t,
        loss,
        grad_norm,
        weight_hash: hash_weights(&w.0),
    })
}

/// Runs `cfg.rounds` rounds from `w⁰ = 0`.
///
/// Clients compute their updates in parallel; aggregation waits for all of
/// them and sums in client order, so the trace is bit-identical across runs.
/// Delta mode aggregates with a server step of 1 (the client deltas already
/// include `eta`).
pub fn run_simulation(shards: &[ClientShard], cfg: &FedConfig) -> Result<TrainingTrace> {
    cfg.validate()?;
    let ordered = ordered_shards(shards)?;
    let dim = ordered[0].model_dim();
    for s in &ordered {
        check_model(s, cfg)?;
        if s.model_dim() != dim {
            return Err(FedError::DimensionMismatch {
                expected: dim,
                found: s.model_dim(),
            });
        }
    }
    let server_step = match cfg.mode {
        UpdateMode::Gradient => cfg.eta,
        UpdateMode::Delta => 1.0,
    };

    let mut w = ModelParams::zeros(dim);
    let mut records = vec![record(0, &w, shards)?];
    for t in 1..=cfg.rounds {
        let updates = ordered
            .par_iter()
            .map(|s| {
                Ok(ClientUpdate {
                    client_id: s.client_id,
                    n_samples: s.n_samples,
                    delta: local_update(&w, s, cfg)?,
                })
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| match e {
                FedError::NonFinite { .. } => FedError::Diverged { round: t },
                other => other,
            })?;
        w = aggregate(&updates, &w, server_step)?;
        if w.0.iter().any(|x| !x.is_finite()) {
            return Err(FedError::Diverged { round: t });
        }
        records.push(record(t, &w, shards)?);
    }
    Ok(TrainingTrace {
        records,
        final_weights: w,
        lipschitz: cfg.lipschitz_l.unwrap_or_else(|| estimate_lipschitz(shards)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescentReport {
    pub lipschitz: f64,
    pub eta: f64,
    /// `2 / L`.
    pub step_bound: f64,
    /// Whether `0 < eta < 2/L`.
    pub step_condition_holds: bool,
    pub rounds_checked: usize,
    /// First `t` with `L(wᵗ) > L(wᵗ⁻¹) + tol`.
    pub first_violation: Option<usize>,
    pub monotone: bool,
}

/// Relative slack allowed when comparing consecutive losses.
pub const DESCENT_TOLERANCE: f64 = 1e-12;

/// Checks `L(wᵗ⁺¹) ≤ L(wᵗ)` (up to rounding) for every round of the trace.
pub fn check_descent(trace: &TrainingTrace, cfg: &FedConfig) -> DescentReport {
    let lipschitz = cfg.lipschitz_l.unwrap_or(trace.lipschitz);
    let step_bound = 2.0 / lipschitz;
    let first_violation = trace.records.windows(2).find_map(|pair| {
        let tol = DESCENT_TOLERANCE * pair[0].loss.abs().max(1.0);
        (pair[1].loss > pair[0].loss + tol).then_some(pair[1].t)
    });
    DescentReport {
        lipschitz,
        eta: cfg.eta,
        step_bound,
        step_condition_holds: cfg.eta > 0.0 && cfg.eta < step_bound,
        rounds_checked: trace.records.len().saturating_sub(1),
        first_violation,
        monotone: first_violation.is_none(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(id: usize, n: u64, c: &[f64]) -> ClientShard {
        ClientShard::quadratic(id, n, c.to_vec())
    }

    fn update(id: usize, n: u64, d: &[f64]) -> ClientUpdate {
        ClientUpdate {
            client_id: id,
            n_samples: n,
            delta: d.to_vec(),
        }
    }

    #[test]
    fn quadratic_gradient_is_offset_from_center() {
        let cfg = FedConfig::quadratic(0.5, 1);
        let d = local_update(&ModelParams(vec![1.0]), &q(1, 1, &[0.0]), &cfg).unwrap();
        assert_eq!(d, [1.0]);
    }

    #[test]
    fn update_vanishes_at_local_optimum() {
        let cfg = FedConfig::quadratic(0.5, 1);
        let d = local_update(&ModelParams(vec![2.0, -3.0]), &q(1, 4, &[2.0, -3.0]), &cfg).unwrap();
        assert_eq!(d, [0.0, 0.0]);
    }

    #[test]
    fn delta_mode_single_epoch_is_scaled_gradient() {
        let shard = q(1, 3, &[0.5, -1.25, 4.0]);
        let w = ModelParams(vec![1.0, 2.0, -3.0]);
        let mut cfg = FedConfig::quadratic(0.3, 1);
        let grad = local_update(&w, &shard, &cfg).unwrap();
        cfg.mode = UpdateMode::Delta;
        let delta = local_update(&w, &shard, &cfg).unwrap();
        for (d, g) in delta.iter().zip(&grad) {
            assert!((d - 0.3 * g).abs() < 1e-15);
        }
    }

    #[test]
    fn local_update_dimension_mismatch() {
        let cfg = FedConfig::quadratic(0.5, 1);
        assert_eq!(
            local_update(&ModelParams(vec![1.0, 2.0]), &q(1, 1, &[0.0]), &cfg),
            Err(FedError::DimensionMismatch {
                expected: 1,
                found: 2
            })
        );
    }

    #[test]
    fn aggregate_weights_by_samples() {
        let w = aggregate(
            &[update(1, 1, &[4.0]), update(2, 3, &[0.0])],
            &ModelParams(vec![0.0]),
            0.1,
        )
        .unwrap();
        assert!((w.0[0] + 0.1).abs() < 1e-15);
    }

    #[test]
    fn aggregate_single_client() {
        let w = aggregate(&[update(1, 7, &[2.0, -1.0])], &ModelParams(vec![1.0, 1.0]), 0.5).unwrap();
        assert_eq!(w.0, [0.0, 1.5]);
    }

    #[test]
    fn aggregate_zero_updates_is_fixed_point() {
        let w0 = ModelParams(vec![3.0, -2.0]);
        let w = aggregate(&[update(1, 2, &[0.0, 0.0]), update(2, 5, &[0.0, 0.0])], &w0, 0.7).unwrap();
        assert_eq!(w, w0);
    }

    #[test]
    fn aggregate_errors() {
        let w = ModelParams(vec![0.0]);
        assert_eq!(aggregate(&[], &w, 0.1), Err(FedError::EmptyUpdates));
        assert!(matches!(
            aggregate(&[update(1, 1, &[1.0]), update(2, 1, &[1.0, 2.0])], &w, 0.1),
            Err(FedError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn aggregate_is_order_independent_bitwise() {
        let a = [
            update(3, 17, &[0.1, 0.7]),
            update(1, 5, &[1e-3, -2.2]),
            update(2, 9, &[3.3, 1e5]),
        ];
        let mut b = a.clone();
        b.reverse();
        let w = ModelParams(vec![0.25, -0.5]);
        assert_eq!(aggregate(&a, &w, 0.3).unwrap(), aggregate(&b, &w, 0.3).unwrap());
    }

    #[test]
    fn global_loss_examples() {
        let shards = [q(1, 5, &[0.0]), q(2, 5, &[2.0])];
        assert_eq!(global_loss(&ModelParams(vec![1.0]), &shards).unwrap(), 0.5);
        assert_eq!(global_loss(&ModelParams(vec![4.0]), &[q(1, 9, &[4.0])]).unwrap(), 0.0);
        // losses (4, 0) with weights (1, 3): ½(w−c)² = 4 at distance √8
        let shards = [q(1, 1, &[8f64.sqrt()]), q(2, 3, &[0.0])];
        let l = global_loss(&ModelParams(vec![0.0]), &shards).unwrap();
        assert!((l - 1.0).abs() < 1e-15);
        assert_eq!(global_loss(&ModelParams(vec![0.0]), &[]), Err(FedError::EmptyShards));
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(
            closed_form_optimum(&[q(1, 2, &[0.0]), q(2, 2, &[2.0])]).unwrap().0,
            [1.0]
        );
        assert_eq!(closed_form_optimum(&[q(1, 3, &[1.5, 2.5])]).unwrap().0, [1.5, 2.5]);
        assert_eq!(
            closed_form_optimum(&[q(1, 1, &[0.0]), q(2, 3, &[4.0])]).unwrap().0,
            [3.0]
        );
    }

    #[test]
    fn simulation_converges_to_weighted_mean() {
        let shards = [q(1, 1, &[0.0]), q(2, 1, &[2.0])];
        let trace = run_simulation(&shards, &FedConfig::quadratic(0.5, 100)).unwrap();
        assert!((trace.final_weights.0[0] - 1.0).abs() <= 1e-9);
        assert_eq!(trace.records.len(), 101);
        let report = check_descent(&trace, &FedConfig::quadratic(0.5, 100));
        assert!(report.step_condition_holds);
        assert!(report.monotone);
    }

    #[test]
    fn zero_rounds_records_initial_state_only() {
        let shards = [q(1, 1, &[3.0])];
        let trace = run_simulation(&shards, &FedConfig::quadratic(0.5, 0)).unwrap();
        assert_eq!(trace.records.len(), 1);
        assert_eq!(trace.records[0].t, 0);
        assert_eq!(trace.records[0].loss, 4.5);
        assert_eq!(trace.final_weights.0, [0.0]);
    }

    #[test]
    fn large_step_diverges() {
        // w_{t+1} - 1 = -9 (w_t - 1): loss overflows after ~160 rounds
        let shards = [q(1, 1, &[0.0]), q(2, 1, &[2.0])];
        let err = run_simulation(&shards, &FedConfig::quadratic(10.0, 1000)).unwrap_err();
        let FedError::Diverged { round } = err else {
            panic!("expected divergence, got {err:?}");
        };
        assert!(round > 100 && round < 400, "round {round}");
    }

    #[test]
    fn oscillating_step_violates_descent() {
        let shards = [q(1, 1, &[0.0]), q(2, 1, &[2.0])];
        let cfg = FedConfig::quadratic(2.5, 20);
        let trace = run_simulation(&shards, &cfg).unwrap();
        let report = check_descent(&trace, &cfg);
        assert!(!report.step_condition_holds);
        assert_eq!(report.first_violation, Some(1));
        assert!(!report.monotone);
    }

    #[test]
    fn constant_trace_passes() {
        let shards = [q(1, 1, &[0.0]), q(2, 3, &[0.0])];
        let cfg = FedConfig::quadratic(0.5, 10);
        let trace = run_simulation(&shards, &cfg).unwrap();
        assert!(trace.losses().iter().all(|&l| l == 0.0));
        assert!(check_descent(&trace, &cfg).monotone);
    }

    #[test]
    fn config_validation() {
        let mut cfg = FedConfig::quadratic(0.0, 1);
        assert!(cfg.validate().is_err());
        cfg.eta = 0.1;
        cfg.local_epochs = 3;
        assert!(cfg.validate().is_err());
        cfg.mode = UpdateMode::Delta;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn config_defaults_from_json() {
        let cfg: FedConfig = serde_json::from_str(r#"{"eta":0.5,"rounds":3}"#).unwrap();
        assert_eq!(cfg, FedConfig::quadratic(0.5, 3));
    }

    #[test]
    fn trace_jsonl_has_one_line_per_round() {
        let trace = run_simulation(&[q(1, 1, &[1.0])], &FedConfig::quadratic(0.5, 4)).unwrap();
        let text = trace.to_jsonl();
        assert_eq!(text.lines().count(), 5);
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        for key in ["t", "loss", "grad_norm", "weight_hash"] {
            assert!(first.get(key).is_some(), "missing {key}");
        }
    }
}
