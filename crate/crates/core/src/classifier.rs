//! Binary logistic regression over candidate features, fitted from scratch.
//!
//! Features are standardized with statistics of the training rows, then an
//! L2-regularized logistic loss is minimized by full-batch gradient descent
//! with a backtracking (Armijo) line search. Training data with only one
//! class yields a fallback model that carries no weights.

use thiserror::Error;

use crate::graph::Color;
use crate::observer::{FeatureVector, ObserverState, FEATURE_COUNT};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClassifierError {
    #[error("cannot build a training set before any node is monitored")]
    NoMonitoredNodes,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub rows: Vec<(FeatureVector, Color)>,
    /// Number of monitors placed when the snapshot was taken.
    pub snapshot_step: usize,
}

impl TrainingSet {
    pub fn has_both_classes(&self) -> bool {
        let reds = self.rows.iter().filter(|(_, c)| c.is_red()).count();
        reds > 0 && reds < self.rows.len()
    }

    fn design(&self) -> (Vec<Vec<f64>>, Vec<bool>) {
        self.rows
            .iter()
            .map(|(f, c)| (f.as_slice().to_vec(), c.is_red()))
            .unzip()
    }
}

/// One row per monitored node, with features computed as if that node were
/// still unmonitored, labeled with its true color.
pub fn build_training_set(state: &ObserverState) -> Result<TrainingSet, ClassifierError> {
    if state.monitored_count() == 0 {
        return Err(ClassifierError::NoMonitoredNodes);
    }
    let rows = state
        .monitored_nodes()
        .iter()
        .map(|&m| {
            let f = state.masked_features(m).expect("monitored node");
            (f, state.monitored_color(m).expect("monitored node"))
        })
        .collect();
    Ok(TrainingSet {
        rows,
        snapshot_step: state.monitored_count(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    /// L2 penalty on the weights (the bias is not penalized).
    pub lambda: f64,
    pub max_iterations: usize,
    /// Stop once the largest gradient component falls below this.
    pub tolerance: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            lambda: 1e-3,
            max_iterations: 500,
            tolerance: 1e-6,
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Per-feature `(mean, sd)`; features with zero spread map to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub stats: Vec<(f64, f64)>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let dim = rows.first().map_or(0, Vec::len);
        let n = rows.len() as f64;
        let stats = (0..dim)
            .map(|j| {
                let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
                let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
                (mean, var.sqrt())
            })
            .collect();
        Standardizer { stats }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.stats)
            .map(|(&v, &(mean, sd))| if sd > 1e-12 { (v - mean) / sd } else { 0.0 })
            .collect()
    }
}

/// Regularized mean logistic loss over a fixed design matrix. Parameters are
/// laid out as `[w_0, .., w_{d-1}, bias]`.
#[derive(Debug, Clone)]
pub struct LogisticObjective {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<bool>,
    pub lambda: f64,
}

impl LogisticObjective {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<bool>, lambda: f64) -> Self {
        assert_eq!(x.len(), y.len(), "one label per row");
        LogisticObjective { x, y, lambda }
    }

    pub fn dim(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    fn margin(params: &[f64], row: &[f64]) -> f64 {
        let d = params.len() - 1;
        row.iter().zip(&params[..d]).map(|(a, b)| a * b).sum::<f64>() + params[d]
    }

    pub fn loss(&self, params: &[f64]) -> f64 {
        let d = params.len() - 1;
        let penalty = 0.5 * self.lambda * params[..d].iter().map(|w| w * w).sum::<f64>();
        if self.x.is_empty() {
            return penalty;
        }
        let data: f64 = self
            .x
            .iter()
            .zip(&self.y)
            .map(|(row, &y)| {
                let z = Self::margin(params, row);
                softplus(z) - if y { z } else { 0.0 }
            })
            .sum();
        data / self.x.len() as f64 + penalty
    }

    pub fn gradient(&self, params: &[f64]) -> Vec<f64> {
        let d = params.len() - 1;
        let mut g = vec![0.0; d + 1];
        if !self.x.is_empty() {
            for (row, &y) in self.x.iter().zip(&self.y) {
                let r = sigmoid(Self::margin(params, row)) - if y { 1.0 } else { 0.0 };
                for (gj, xj) in g.iter_mut().zip(row) {
                    *gj += r * xj;
                }
                g[d] += r;
            }
            let n = self.x.len() as f64;
            g.iter_mut().for_each(|v| *v /= n);
        }
        for j in 0..d {
            g[j] += self.lambda * params[j];
        }
        g
    }
}

/// Exact gradient of the regularized logistic loss for a training set,
/// evaluated on raw (unstandardized) features.
pub fn gradient(data: &TrainingSet, params: &[f64], lambda: f64) -> Vec<f64> {
    let (x, y) = data.design();
    LogisticObjective::new(x, y, lambda).gradient(params)
}

/// Outcome of a descent run.
#[derive(Debug, Clone, PartialEq)]
pub struct Descent {
    pub params: Vec<f64>,
    pub iterations: usize,
    /// Loss after each accepted step, starting with the initial loss.
    pub losses: Vec<f64>,
    pub gradient_norm: f64,
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn gradient_descent(objective: &LogisticObjective, config: &FitConfig) -> Descent {
    const ARMIJO: f64 = 1e-4;
    let mut params = vec![0.0; objective.dim() + 1];
    let mut loss = objective.loss(&params);
    let mut losses = vec![loss];
    let mut step: f64 = 1.0;
    let mut grad = objective.gradient(&params);
    let mut iterations = 0;
    while iterations < config.max_iterations && max_norm(&grad) >= config.tolerance {
        let sq: f64 = grad.iter().map(|g| g * g).sum();
        step = (step * 2.0).min(1e6);
        let (next, next_loss) = loop {
            let trial: Vec<f64> = params.iter().zip(&grad).map(|(p, g)| p - step * g).collect();
            let trial_loss = objective.loss(&trial);
            if trial_loss <= loss - ARMIJO * step * sq {
                break (Some(trial), trial_loss);
            }
            step *= 0.5;
            if step < 1e-16 {
                break (None, loss);
            }
        };
        let Some(next) = next else { break };
        params = next;
        loss = next_loss;
        losses.push(loss);
        grad = objective.gradient(&params);
        iterations += 1;
    }
    Descent {
        params,
        iterations,
        losses,
        gradient_norm: max_norm(&grad),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub standardizer: Standardizer,
    /// Set when training data held a single class; the model then has no
    /// usable weights and callers rank candidates some other way.
    pub fallback: bool,
    pub iterations: usize,
    pub final_loss: f64,
}

impl TrainedModel {
    pub fn fallback() -> Self {
        TrainedModel {
            weights: Vec::new(),
            bias: 0.0,
            standardizer: Standardizer { stats: Vec::new() },
            fallback: true,
            iterations: 0,
            final_loss: f64::NAN,
        }
    }

    /// `P(red)` for a raw feature row, or `None` for a fallback model.
    pub fn predict_raw(&self, x: &[f64]) -> Option<f64> {
        if self.fallback {
            return None;
        }
        let z = self
            .standardizer
            .apply(x)
            .iter()
            .zip(&self.weights)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            + self.bias;
        Some(sigmoid(z))
    }

    pub fn predict(&self, x: &FeatureVector) -> Option<f64> {
        self.predict_raw(x.as_slice())
    }
}

/// Fits on an arbitrary design matrix; `labels[i]` is true for red.
pub fn fit_rows(rows: &[Vec<f64>], labels: &[bool], config: &FitConfig) -> TrainedModel {
    let reds = labels.iter().filter(|&&y| y).count();
    if rows.is_empty() || reds == 0 || reds == labels.len() {
        return TrainedModel::fallback();
    }
    let standardizer = Standardizer::fit(rows);
    let x = rows.iter().map(|r| standardizer.apply(r)).collect();
    let objective = LogisticObjective::new(x, labels.to_vec(), config.lambda);
    let descent = gradient_descent(&objective, config);
    let d = objective.dim();
    TrainedModel {
        weights: descent.params[..d].to_vec(),
        bias: descent.params[d],
        standardizer,
        fallback: false,
        iterations: descent.iterations,
        final_loss: *descent.losses.last().expect("initial loss recorded"),
    }
}

pub fn fit(data: &TrainingSet, config: &FitConfig) -> TrainedModel {
    let (x, y) = data.design();
    fit_rows(&x, &y, config)
}

/// A model with the given weights on unit-variance, zero-mean features.
/// Mostly useful for tests and for pinning a ranking by hand.
pub fn model_from_weights(weights: [f64; FEATURE_COUNT], bias: f64) -> TrainedModel {
    TrainedModel {
        weights: weights.to_vec(),
        bias,
        standardizer: Standardizer {
            stats: vec![(0.0, 1.0); FEATURE_COUNT],
        },
        fallback: false,
        iterations: 0,
        final_loss: f64::NAN,
    }
}
