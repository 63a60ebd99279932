//! Multinomial logistic regression over hashed bag-of-words features.
//!
//! Weights are laid out class-major: row `c` occupies
//! `[c * width, (c + 1) * width)` where `width = buckets + 1` and the last
//! column is the bias.

use serde::{Deserialize, Serialize};

use super::{FedError, ModelParams, Result};
use crate::corpus::{Category, Post};
use crate::hashing::fnv1a64;
use crate::text::tokens;

pub const DEFAULT_BUCKETS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Featurizer {
    pub buckets: usize,
}

impl Default for Featurizer {
    fn default() -> Self {
        Featurizer {
            buckets: DEFAULT_BUCKETS,
        }
    }
}

impl Featurizer {
    pub fn new(buckets: usize) -> Self {
        assert!(buckets > 0, "featurizer needs at least one bucket");
        Featurizer { buckets }
    }

    /// Feature columns per class, bias included.
    pub fn width(&self) -> usize {
        self.buckets + 1
    }

    /// L2-normalized term frequencies plus a constant bias feature. Returns
    /// sparse `(column, value)` pairs sorted by column.
    pub fn features(&self, text: &str) -> Vec<(u32, f64)> {
        let mut counts: Vec<(u32, f64)> = Vec::new();
        for tok in tokens(text) {
            let bucket = (fnv1a64(tok.as_bytes()) % self.buckets as u64) as u32;
            match counts.binary_search_by_key(&bucket, |&(b, _)| b) {
                Ok(i) => counts[i].1 += 1.0,
                Err(i) => counts.insert(i, (bucket, 1.0)),
            }
        }
        let norm = counts.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, v) in counts.iter_mut() {
                *v /= norm;
            }
        }
        counts.push((self.buckets as u32, 1.0));
        counts
    }

    pub fn encode(&self, text: &str, label: usize) -> EncodedDoc {
        EncodedDoc {
            features: self.features(text),
            label,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDoc {
    pub features: Vec<(u32, f64)>,
    pub label: usize,
}

impl EncodedDoc {
    pub fn squared_norm(&self) -> f64 {
        self.features.iter().map(|(_, v)| v * v).sum()
    }
}

fn class_scores(w: &[f64], num_classes: usize, width: usize, features: &[(u32, f64)]) -> Vec<f64> {
    (0..num_classes)
        .map(|c| {
            let row = &w[c * width..(c + 1) * width];
            features.iter().map(|&(j, x)| row[j as usize] * x).sum()
        })
        .collect()
}

fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub(super) fn mean_cross_entropy(
    w: &[f64],
    num_classes: usize,
    width: usize,
    docs: &[EncodedDoc],
) -> f64 {
    if docs.is_empty() {
        return 0.0;
    }
    let total: f64 = docs
        .iter()
        .map(|d| {
            let scores = class_scores(w, num_classes, width, &d.features);
            let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let log_sum = max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
            log_sum - scores[d.label]
        })
        .sum();
    total / docs.len() as f64
}

pub(super) fn cross_entropy_gradient(
    w: &[f64],
    num_classes: usize,
    width: usize,
    docs: &[EncodedDoc],
) -> Vec<f64> {
    let mut grad = vec![0.0; w.len()];
    if docs.is_empty() {
        return grad;
    }
    let scale = 1.0 / docs.len() as f64;
    for d in docs {
        let probs = softmax(&class_scores(w, num_classes, width, &d.features));
        for (c, p) in probs.iter().enumerate() {
            let residual = (p - if c == d.label { 1.0 } else { 0.0 }) * scale;
            let row = &mut grad[c * width..(c + 1) * width];
            for &(j, x) in &d.features {
                row[j as usize] += residual * x;
            }
        }
    }
    grad
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub category: Category,
    pub confidence: f64,
}

/// A trained categorizer. Ties between class scores go to the category that
/// appears first in `categories`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BowClassifier {
    pub categories: Vec<Category>,
    pub featurizer: Featurizer,
    pub weights: ModelParams,
}

impl BowClassifier {
    pub fn new(
        categories: Vec<Category>,
        featurizer: Featurizer,
        weights: ModelParams,
    ) -> Result<Self> {
        let expected = categories.len() * featurizer.width();
        if weights.dim() != expected {
            return Err(FedError::DimensionMismatch {
                expected,
                found: weights.dim(),
            });
        }
        Ok(BowClassifier {
            categories,
            featurizer,
            weights,
        })
    }

    pub fn classify_text(&self, text: &str) -> Result<Classification> {
        if self.weights.0.iter().all(|&x| x == 0.0) {
            return Err(FedError::Untrained);
        }
        if tokens(text).next().is_none() {
            return Ok(Classification {
                category: Category::general(),
                confidence: 0.0,
            });
        }
        let features = self.featurizer.features(text);
        let scores = class_scores(
            &self.weights.0,
            self.categories.len(),
            self.featurizer.width(),
            &features,
        );
        let mut best = 0;
        for (i, s) in scores.iter().enumerate().skip(1) {
            if *s > scores[best] {
                best = i;
            }
        }
        Ok(Classification {
            category: self.categories[best].clone(),
            confidence: softmax(&scores)[best],
        })
    }

    pub fn classify_post(&self, post: &Post) -> Result<Classification> {
        self.classify_text(&post.full_text())
    }

    /// Fraction of documents whose predicted label matches.
    pub fn accuracy(&self, docs: &[EncodedDoc]) -> f64 {
        if docs.is_empty() {
            return 0.0;
        }
        let width = self.featurizer.width();
        let correct = docs
            .iter()
            .filter(|d| {
                let scores = class_scores(&self.weights.0, self.categories.len(), width, &d.features);
                let mut best = 0;
                for (i, s) in scores.iter().enumerate().skip(1) {
                    if *s > scores[best] {
                        best = i;
                    }
                }
                best == d.label
            })
            .count();
        correct as f64 / docs.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cats(labels: &[&str]) -> Vec<Category> {
        labels.iter().map(|&l| Category::new(l)).collect()
    }

    #[test]
    fn features_are_normalized_with_bias() {
        let f = Featurizer::new(64);
        let x = f.features("cat cat dog");
        let (bias_col, bias) = *x.last().unwrap();
        assert_eq!(bias_col, 64);
        assert_eq!(bias, 1.0);
        let tf_norm: f64 = x[..x.len() - 1].iter().map(|(_, v)| v * v).sum();
        assert!((tf_norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let f = Featurizer::new(8);
        let docs = vec![f.encode("alpha beta", 0), f.encode("gamma", 1), f.encode("beta beta delta", 2)];
        let width = f.width();
        let w: Vec<f64> = (0..3 * width).map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.1).collect();
        let g = cross_entropy_gradient(&w, 3, width, &docs);
        let h = 1e-6;
        for i in 0..w.len() {
            let mut plus = w.clone();
            plus[i] += h;
            let mut minus = w.clone();
            minus[i] -= h;
            let fd = (mean_cross_entropy(&plus, 3, width, &docs)
                - mean_cross_entropy(&minus, 3, width, &docs))
                / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-7, "coord {i}: fd {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn untrained_model_is_reported() {
        let f = Featurizer::new(4);
        let clf = BowClassifier::new(cats(&["a", "b"]), f, ModelParams::zeros(2 * f.width())).unwrap();
        assert_eq!(clf.classify_text("anything"), Err(FedError::Untrained));
    }

    #[test]
    fn empty_text_falls_back_to_general() {
        let f = Featurizer::new(4);
        let mut w = ModelParams::zeros(2 * f.width());
        w.0[0] = 1.0;
        let clf = BowClassifier::new(cats(&["a", "b"]), f, w).unwrap();
        let c = clf.classify_text("  ...  ").unwrap();
        assert_eq!(c.category, Category::general());
        assert_eq!(c.confidence, 0.0);
    }

    #[test]
    fn ties_go_to_earlier_category() {
        let f = Featurizer::new(4);
        let width = f.width();
        let mut w = ModelParams::zeros(3 * width);
        // identical rows for classes 1 and 2, class 0 strictly lower
        for c in 1..3 {
            w.0[c * width + 4] = 2.0;
        }
        let clf = BowClassifier::new(cats(&["politics", "science", "sports"]), f, w).unwrap();
        let c = clf.classify_text("hello").unwrap();
        assert_eq!(c.category.as_str(), "science");
    }

    #[test]
    fn dimension_checked() {
        let f = Featurizer::new(4);
        assert!(BowClassifier::new(cats(&["a"]), f, ModelParams::zeros(3)).is_err());
    }
}
