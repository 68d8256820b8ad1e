//! Gradient training of small scorers under each criterion.

pub mod data;
pub mod methods;
pub mod model;
pub mod sweep;

use std::fmt::{self, Write as _};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::harness::format::num;

pub use data::{BlobSpec, Dataset, Splits};
pub use methods::{step, tilt_weights, Method, StepState, TrainConfig};
pub use model::{Arch, LossKind, Model, PerExample};

/// Average train loss above which a run is abandoned.
pub const DIVERGENCE_LOSS: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Self::Train => "train",
            Self::Val => "val",
            Self::Test => "test",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainRow {
    pub epoch: usize,
    pub split: Split,
    pub loss: f64,
    pub acc: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainRecord {
    pub rows: Vec<TrainRow>,
}

pub const TRAIN_CSV_HEADER: &str = "epoch,split,loss,acc,norm";

impl TrainRecord {
    pub fn last(&self, split: Split) -> Option<&TrainRow> {
        self.rows.iter().rev().find(|r| r.split == split)
    }

    pub fn series(&self, split: Split) -> impl Iterator<Item = &TrainRow> {
        self.rows.iter().filter(move |r| r.split == split)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{TRAIN_CSV_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.epoch,
                r.split,
                num(r.loss),
                num(r.acc),
                num(r.norm)
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: Model,
    pub record: TrainRecord,
    /// Final threshold for methods that train one.
    pub theta: Option<f64>,
}

/// Initial model for `splits`, drawn from `seed`. Runs that share a seed
/// share their initial weights, whatever the method.
pub fn init_model(arch: Arch, splits: &Splits, seed: u64) -> Result<Model> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Model::init(
        arch,
        splits.train.dim(),
        splits.train.output_dim()?,
        &mut rng,
    )
}

fn push_metrics(
    record: &mut TrainRecord,
    model: &Model,
    splits: &Splits,
    epoch: usize,
    loss: LossKind,
) -> Result<()> {
    let norm = model.param_norm();
    for (split, data) in [
        (Split::Train, &splits.train),
        (Split::Val, &splits.val),
        (Split::Test, &splits.test),
    ] {
        let (l, acc) = model.evaluate(data, loss)?;
        record.rows.push(TrainRow {
            epoch,
            split,
            loss: l,
            acc,
            norm,
        });
    }
    Ok(())
}

/// Trains `model` for `config.epochs` epochs, recording metrics on every
/// split before training (epoch 0) and after each epoch. Shuffling is drawn
/// from `config.seed`.
pub fn train(mut model: Model, splits: &Splits, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    if splits.train.is_empty() {
        return Err(Error::Input("training split is empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let mut state = StepState::new(&model, &config.method);
    let mut record = TrainRecord::default();
    push_metrics(&mut record, &model, splits, 0, config.loss)?;
    let mut order: Vec<usize> = (0..splits.train.len()).collect();
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            step(&mut model, &mut state, &splits.train, batch, config)?;
        }
        push_metrics(&mut record, &model, splits, epoch, config.loss)?;
        let loss = record.last(Split::Train).map_or(f64::NAN, |r| r.loss);
        if loss.is_nan() || loss > DIVERGENCE_LOSS {
            return Err(Error::Diverged {
                epoch,
                loss,
                partial: Box::new(record),
            });
        }
    }
    Ok(TrainOutcome {
        model,
        record,
        theta: state.theta(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Splits {
        BlobSpec::binary().splits([200, 50, 50], 5).unwrap()
    }

    #[test]
    fn record_has_epoch_zero_and_all_splits() {
        let splits = tiny();
        let config = TrainConfig {
            epochs: 3,
            batch_size: 32,
            ..TrainConfig::default()
        };
        let model = init_model(Arch::Linear, &splits, 1).unwrap();
        let out = train(model, &splits, &config).unwrap();
        assert_eq!(out.record.rows.len(), 4 * 3);
        assert_eq!(out.record.rows[0].epoch, 0);
        assert!(out
            .record
            .to_csv()
            .starts_with("epoch,split,loss,acc,norm\n0,train,"));
    }

    #[test]
    fn training_is_deterministic() {
        let splits = tiny();
        let config = TrainConfig {
            method: Method::Cvar { beta: 0.5 },
            epochs: 5,
            ..TrainConfig::default()
        };
        let run = || {
            let model = init_model(Arch::Mlp { hidden: 4 }, &splits, 9).unwrap();
            train(model, &splits, &config).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn divergence_is_reported_with_partial_record() {
        let splits = tiny();
        let config = TrainConfig {
            loss: LossKind::Margin(crate::surrogate::MarginPenalty::Quadratic),
            step_size: 50.0,
            momentum: 0.0,
            epochs: 50,
            batch_size: 200,
            ..TrainConfig::default()
        };
        let model = init_model(Arch::Linear, &splits, 0).unwrap();
        match train(model, &splits, &config) {
            Err(Error::Diverged { epoch, partial, .. }) => {
                assert_eq!(partial.rows.len(), 3 * (epoch + 1));
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
