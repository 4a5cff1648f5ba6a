use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::eval::evaluate_topk;
use super::inputs::LabeledTensors;
use crate::error::{Error, Result};
use crate::features::InputMode;
use crate::net::{init_weights, record_forward, NetworkSpec, ParamStore};
use crate::ops::Mode;
use crate::optim::sgd_step;
use crate::tape::Tape;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    /// Initial learning rate.
    pub lr: f64,
    /// Multiplier applied to the learning rate after every epoch.
    pub decay: f64,
    pub momentum: f64,
    /// Overrides every dropout layer of the network.
    pub dropout: f32,
    pub seed: u64,
    pub mode: InputMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 64,
            epochs: 20,
            lr: 0.01,
            decay: 0.95,
            momentum: 0.9,
            dropout: 0.5,
            seed: 0,
            mode: InputMode::Original,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be at least 1"));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::invalid(format!("learning rate {} must be finite and >= 0", self.lr)));
        }
        if !(0.0..=1.0).contains(&self.decay) {
            return Err(Error::invalid(format!("decay {} outside [0, 1]", self.decay)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::invalid(format!("momentum {} outside [0, 1)", self.momentum)));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::invalid(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        Ok(())
    }

    /// Learning rate used during `epoch` (0-based).
    pub fn lr_at(&self, epoch: usize) -> f64 {
        self.lr * libm::pow(self.decay, epoch as f64)
    }
}

/// One line of the training log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLog {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    /// Held-out Top-1 in percent, `NaN` when no validation set is given.
    pub val_top1: f64,
}

impl EpochLog {
    /// `epoch\ttrain_loss\tval_top1`
    pub fn line(&self) -> alloc::string::String {
        format!("{}\t{:.6}\t{:.4}", self.epoch, self.train_loss, self.val_top1)
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ParamStore<f32>,
    pub log: Vec<EpochLog>,
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum TrainError {
    #[error(transparent)]
    Invalid(#[from] Error),

    /// The loss became non-finite; `checkpoint` holds the parameters from
    /// the end of the last completed epoch.
    #[error("training diverged in epoch {epoch}")]
    Diverged {
        epoch: usize,
        checkpoint: Box<ParamStore<f32>>,
        log: Vec<EpochLog>,
    },
}

/// Trains from He-initialized weights seeded with `config.seed`.
pub fn train(
    spec: &NetworkSpec,
    train_set: &LabeledTensors,
    val_set: Option<&LabeledTensors>,
    config: &TrainConfig,
    on_epoch: impl FnMut(&EpochLog, &ParamStore<f32>),
) -> core::result::Result<TrainOutcome, TrainError> {
    train_from(spec, init_weights(spec, config.seed), train_set, val_set, config, on_epoch)
}

/// Minibatch momentum SGD over shuffled epochs. Everything random (batch
/// order, dropout masks) is drawn from one stream seeded by `config.seed`,
/// so equal inputs give bit-identical results.
pub fn train_from(
    spec: &NetworkSpec,
    mut params: ParamStore<f32>,
    train_set: &LabeledTensors,
    val_set: Option<&LabeledTensors>,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochLog, &ParamStore<f32>),
) -> core::result::Result<TrainOutcome, TrainError> {
    config.validate()?;
    params.check_layout(spec)?;
    for set in core::iter::once(train_set).chain(val_set) {
        if set.class_count != spec.class_count() {
            return Err(Error::invalid(format!(
                "dataset has {} classes, network has {}",
                set.class_count,
                spec.class_count()
            ))
            .into());
        }
    }
    if train_set.is_empty() {
        return Err(Error::invalid("training set is empty").into());
    }
    let net = spec.with_dropout(config.dropout)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut log = Vec::with_capacity(config.epochs);
    let mut checkpoint = params.weights_only();
    for epoch in 0..config.epochs {
        let lr = config.lr_at(epoch);
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0f64;
        for batch in order.chunks(config.batch_size) {
            let inputs = train_set.gather(batch);
            let labels: Vec<usize> = batch.iter().map(|&i| train_set.labels[i]).collect();
            let (loss, grads) = {
                let mut tape = Tape::new(&params);
                let x = tape.input(inputs);
                let probs = record_forward(&net, &mut tape, x, Mode::Train, &mut rng)?;
                let finite = tape.value(probs).is_finite();
                let (_, loss) = tape.cross_entropy(probs, &labels)?;
                if !finite || !loss.is_finite() {
                    return Err(TrainError::Diverged {
                        epoch: epoch + 1,
                        checkpoint: Box::new(checkpoint),
                        log,
                    });
                }
                (loss, tape.backward(1.0)?)
            };
            sgd_step(&mut params, &grads, lr, config.momentum)?;
            loss_sum += loss as f64 * batch.len() as f64;
        }
        let val_top1 = match val_set {
            Some(v) if !v.is_empty() => evaluate_topk(spec, &params, v)?.top1,
            _ => f64::NAN,
        };
        let entry = EpochLog {
            epoch: epoch + 1,
            train_loss: loss_sum / train_set.len() as f64,
            val_top1,
        };
        log::info!("{}", entry.line());
        on_epoch(&entry, &params);
        log.push(entry);
        checkpoint = params.weights_only();
    }
    Ok(TrainOutcome {
        params: params.weights_only(),
        log,
    })
}
