//! Training, evaluation, ensembling and storage / error-rate arithmetic.

mod accounting;
mod ensemble;
mod eval;
mod inputs;
mod sgd;

pub use accounting::{bytes_to_mib, relative_error_reduction};
pub use ensemble::{ensemble_average, ensemble_predict};
pub use eval::{evaluate_probs, evaluate_topk, predict_batched, rank_of, EvalReport, REPORT_KS};
pub use inputs::{prepare_inputs, LabeledTensors};
pub use sgd::{train, train_from, EpochLog, TrainConfig, TrainError, TrainOutcome};
