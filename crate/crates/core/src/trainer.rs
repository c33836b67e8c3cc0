//! Full-batch Adam training loop over the concatenated parameters of both
//! sub-domain networks.
//!
//! One epoch is one gradient evaluation over the entire sample set followed
//! by one Adam step. There is no shuffling and no mini-batching, so a fixed
//! seed and configuration reproduce the run bit for bit.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::loss::{
    total_loss_network, total_loss_with_grad, LossBreakdown, LossWeights, SampleSet,
};
use crate::network::{DerivativeMode, PiecewiseNetwork};
use crate::problems::ProblemSpec;
use crate::{Error, Result};

/// First/second-moment accumulators and step counter of the Adam optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(num_params: usize, learning_rate: f64) -> Self {
        Self {
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
            t: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }
}

/// One bias-corrected Adam update in place.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::DimensionMismatch {
            expected: state.m.len(),
            got: grads.len(),
        });
    }
    if grads.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite {
            what: "gradient handed to the optimizer".into(),
            epoch: state.t + 1,
        });
    }
    state.t += 1;
    let m_corr = 1.0 - state.beta1.powi(state.t as i32);
    let v_corr = 1.0 - state.beta2.powi(state.t as i32);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        let m_hat = state.m[i] / m_corr;
        let v_hat = state.v[i] / v_corr;
        params[i] -= state.learning_rate * m_hat / (v_hat.sqrt() + state.epsilon);
    }
    Ok(())
}

/// Training-run parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: u64,
    pub learning_rate: f64,
    pub seed: u64,
    pub log_every: u64,
    pub derivative_mode: DerivativeMode,
    /// Emit a checkpoint to the observer every this many epochs (0 = only at
    /// the end or on abort).
    pub checkpoint_every: u64,
    /// Per-epoch multiplicative learning-rate decay; 1.0 keeps the rate
    /// constant.
    pub lr_decay: f64,
    /// Stop once the logged total loss fails to improve by 0.1% for this
    /// many consecutive log points (0 = never stop early).
    pub early_stop_patience: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200_000,
            learning_rate: 0.001,
            seed: 0,
            log_every: 1000,
            derivative_mode: DerivativeMode::Autodiff,
            checkpoint_every: 0,
            lr_decay: 1.0,
            early_stop_patience: 0,
        }
    }
}

const PLATEAU_IMPROVEMENT: f64 = 1e-3;

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.log_every == 0 {
            return Err(Error::InvalidConfig("log_every must be positive".into()));
        }
        if !self.lr_decay.is_finite() || self.lr_decay <= 0.0 || self.lr_decay > 1.0 {
            return Err(Error::InvalidConfig(format!(
                "lr_decay must lie in (0, 1], got {}",
                self.lr_decay
            )));
        }
        Ok(())
    }
}

/// Loss trajectory entry; the loss is always a fresh evaluation at the
/// parameters held after the step of that epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLogEntry {
    pub epoch: u64,
    pub loss: LossBreakdown,
    pub seconds: f64,
}

/// Recorded loss trajectory of one training run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub entries: Vec<TrainLogEntry>,
}

impl TrainLog {
    pub fn initial_total(&self) -> Option<f64> {
        self.entries.first().map(|e| e.loss.total)
    }

    pub fn final_total(&self) -> Option<f64> {
        self.entries.last().map(|e| e.loss.total)
    }
}

/// Callbacks fired during training; file IO lives behind this in the CLI.
pub trait TrainObserver {
    /// A refinement level is about to train (fired by the adaptive loop).
    fn on_level_start(&mut self, _level: usize) {}
    fn on_log(&mut self, _entry: &TrainLogEntry) {}
    fn on_checkpoint(&mut self, _epoch: u64, _pn: &PiecewiseNetwork, _state: &AdamState) {}
}

impl TrainObserver for () {}

/// Train a piecewise network against the total loss over a fixed sample set.
pub fn train(
    pn: PiecewiseNetwork,
    problem: &ProblemSpec,
    samples: &SampleSet,
    weights: &LossWeights,
    cfg: &TrainConfig,
) -> Result<(PiecewiseNetwork, TrainLog)> {
    train_observed(pn, problem, samples, weights, cfg, &mut ())
}

/// [`train`] with observer callbacks. On a non-finite loss or gradient the
/// last finite parameters are handed to the observer as a checkpoint before
/// the error is returned.
pub fn train_observed(
    mut pn: PiecewiseNetwork,
    problem: &ProblemSpec,
    samples: &SampleSet,
    weights: &LossWeights,
    cfg: &TrainConfig,
    observer: &mut dyn TrainObserver,
) -> Result<(PiecewiseNetwork, TrainLog)> {
    cfg.validate()?;
    let start = Instant::now();
    let mut flat = pn.to_flat();
    let mut state = AdamState::new(flat.len(), cfg.learning_rate);
    let mut log = TrainLog::default();

    let initial = total_loss_network(&pn, problem, samples, weights, cfg.derivative_mode)?;
    let entry = TrainLogEntry {
        epoch: 0,
        loss: initial,
        seconds: start.elapsed().as_secs_f64(),
    };
    observer.on_log(&entry);
    log.entries.push(entry);

    let mut best_total = f64::INFINITY;
    let mut stale_logs = 0u64;
    let mut last_epoch = 0;
    for epoch in 1..=cfg.epochs {
        let (loss, grad) =
            total_loss_with_grad(&pn, problem, samples, weights, cfg.derivative_mode)?;
        if !loss.is_finite() {
            observer.on_checkpoint(epoch - 1, &pn, &state);
            return Err(Error::NonFinite {
                what: "training loss".into(),
                epoch,
            });
        }
        if let Err(e) = grad.check_finite() {
            observer.on_checkpoint(epoch - 1, &pn, &state);
            return Err(e);
        }
        if cfg.lr_decay < 1.0 {
            state.learning_rate = cfg.learning_rate * cfg.lr_decay.powi(epoch as i32 - 1);
        }
        adam_step(&mut flat, &grad.to_flat(), &mut state)?;
        pn.load_flat(&flat)?;
        last_epoch = epoch;

        let mut stop = false;
        if epoch % cfg.log_every == 0 || epoch == cfg.epochs {
            let loss_now = total_loss_network(&pn, problem, samples, weights, cfg.derivative_mode)?;
            let entry = TrainLogEntry {
                epoch,
                loss: loss_now,
                seconds: start.elapsed().as_secs_f64(),
            };
            observer.on_log(&entry);
            log.entries.push(entry);

            if cfg.early_stop_patience > 0 {
                if loss_now.total < best_total * (1.0 - PLATEAU_IMPROVEMENT) {
                    stale_logs = 0;
                } else {
                    stale_logs += 1;
                }
                best_total = best_total.min(loss_now.total);
                stop = stale_logs >= cfg.early_stop_patience;
            }
        }
        if cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0 && epoch != cfg.epochs {
            observer.on_checkpoint(epoch, &pn, &state);
        }
        if stop {
            break;
        }
    }
    observer.on_checkpoint(last_epoch, &pn, &state);
    Ok((pn, log))
}
