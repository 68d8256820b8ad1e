//! A small grid search: each method's hyperparameter is picked by
//! validation accuracy, per trial, then summarized across trials.

use critlab::train::sweep::{sweep, Family, Selection, SweepSpec};
use critlab::train::{Arch, BlobSpec, LossKind, TrainConfig};

fn main() -> critlab::Result<()> {
    let splits = BlobSpec::three_class().splits([600, 200, 200], 1)?;
    let spec = SweepSpec {
        arch: Arch::Linear,
        base: TrainConfig {
            loss: LossKind::CrossEntropy,
            epochs: 20,
            ..TrainConfig::default()
        },
        grids: vec![
            (Family::Flooding, vec![0.05, 0.2, 0.5]),
            (Family::Tilted, vec![0.0, 0.5, 1.0]),
            (Family::Cvar, vec![0.0, 0.5]),
        ],
        trials: 3,
        selection: Selection::PerTrial,
    };
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let result = sweep(&splits, &spec, threads)?;
    print!("{}", result.to_csv());
    Ok(())
}
