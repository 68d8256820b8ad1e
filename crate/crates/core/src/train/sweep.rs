//! Hyperparameter sweeps with validation-accuracy selection.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::harness::format::num;
use crate::parallel::parallel_map;
use crate::train::{init_model, train, Arch, Method, Split, Splits, TrainConfig};

/// A method with its hyperparameter left free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Family {
    Erm,
    Cvar,
    Dro,
    Flooding,
    SoftAd,
    Tilted,
}

impl Family {
    pub const SWEPT: [Family; 5] = [
        Self::Cvar,
        Self::Dro,
        Self::Flooding,
        Self::SoftAd,
        Self::Tilted,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Erm => "erm",
            Self::Cvar => "cvar",
            Self::Dro => "dro",
            Self::Flooding => "flooding",
            Self::SoftAd => "softad",
            Self::Tilted => "tilted",
        }
    }

    /// The method at grid value `h`. DRO is indexed by `ε̃ ∈ [0, 1)`, mapped
    /// to `ε = (1/(1-ε̃) - 1)²/2`.
    pub fn method(&self, h: f64) -> Result<Method> {
        let m = match self {
            Self::Erm => Method::Erm,
            Self::Cvar => Method::Cvar { beta: h },
            Self::Dro => {
                if !(0.0..1.0).contains(&h) {
                    return Err(Error::param("eps_tilde", h, "must lie in [0, 1)"));
                }
                Method::Dro {
                    eps: dro_eps_from_tilde(h),
                }
            }
            Self::Flooding => Method::Flooding { theta: h },
            Self::SoftAd => Method::SoftAd { theta: h },
            Self::Tilted => Method::Tilted { gamma: h },
        };
        m.validate()?;
        Ok(m)
    }

    /// Ten-point default grid.
    pub fn default_grid(&self) -> Vec<f64> {
        match self {
            Self::Erm => vec![0.0],
            Self::Cvar | Self::Dro => linspace(0.0, 0.9, 10),
            Self::Flooding => linspace(0.01, 1.0, 10),
            Self::SoftAd => linspace(0.01, 0.75, 10),
            Self::Tilted => linspace(0.0, 2.0, 10),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        [
            Self::Erm,
            Self::Cvar,
            Self::Dro,
            Self::Flooding,
            Self::SoftAd,
            Self::Tilted,
        ]
        .into_iter()
        .find(|f| f.name() == s)
        .ok_or_else(|| Error::Input(format!("unknown method family `{s}`")))
    }
}

pub fn dro_eps_from_tilde(t: f64) -> f64 {
    (1.0 / (1.0 - t) - 1.0).powi(2) / 2.0
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        // Rounded to 12 decimals so grids print as written (0.3, not 0.30000000000000004).
        _ => (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                ((a * (1.0 - t) + b * t) * 1e12).round() / 1e12
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// Select per trial, then summarize the selected values across trials.
    PerTrial,
    /// Average validation accuracy across trials, then select once.
    Averaged,
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Self::PerTrial => "per-trial",
            Self::Averaged => "averaged",
        })
    }
}

impl FromStr for Selection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "per-trial" => Ok(Self::PerTrial),
            "averaged" => Ok(Self::Averaged),
            other => Err(Error::Input(format!("unknown selection mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub arch: Arch,
    /// `seed` is the first trial's seed; trial `t` uses `seed + t`.
    pub base: TrainConfig,
    pub grids: Vec<(Family, Vec<f64>)>,
    pub trials: usize,
    pub selection: Selection,
}

/// Final metrics of one (family, value, trial) run.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub family: Family,
    pub value: f64,
    pub trial: usize,
    pub val_acc: f64,
    pub test_acc: f64,
    pub train_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub family: Family,
    pub selected_mean: f64,
    pub selected_std: f64,
    pub val_acc_mean: f64,
    pub test_acc_mean: f64,
    pub test_acc_std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub cells: Vec<SweepCell>,
}

pub const SWEEP_CSV_HEADER: &str =
    "method,selected_mean,selected_std,val_acc_mean,test_acc_mean,test_acc_std";
pub const CELLS_CSV_HEADER: &str = "method,value,trial,val_acc,test_acc,train_loss";

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{SWEEP_CSV_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.family,
                num(r.selected_mean),
                num(r.selected_std),
                num(r.val_acc_mean),
                num(r.test_acc_mean),
                num(r.test_acc_std)
            );
        }
        out
    }

    pub fn cells_csv(&self) -> String {
        let mut out = format!("{CELLS_CSV_HEADER}\n");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                c.family,
                num(c.value),
                c.trial,
                num(c.val_acc),
                num(c.test_acc),
                num(c.train_loss)
            );
        }
        out
    }

    pub fn row(&self, family: Family) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.family == family)
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Index of the best validation accuracy; ties go to the smaller value.
fn select(candidates: &[(f64, f64)]) -> usize {
    let mut best = 0;
    for (i, &(value, acc)) in candidates.iter().enumerate() {
        let (bv, ba) = candidates[best];
        if acc > ba || (acc == ba && value < bv) {
            best = i;
        }
    }
    best
}

/// Runs every (family, grid value, trial) cell, optionally on `parallel`
/// threads, and selects hyperparameters by validation accuracy.
pub fn sweep(splits: &Splits, spec: &SweepSpec, parallel: usize) -> Result<SweepResult> {
    if spec.trials == 0 {
        return Err(Error::Input("sweep needs at least one trial".into()));
    }
    let mut jobs = Vec::new();
    for (family, grid) in &spec.grids {
        if grid.is_empty() {
            return Err(Error::Input(format!("empty grid for `{family}`")));
        }
        for &value in grid {
            let method = family.method(value)?;
            for trial in 0..spec.trials {
                jobs.push((*family, value, trial, method));
            }
        }
    }
    let run = |i: usize| -> Result<SweepCell> {
        let (family, value, trial, method) = jobs[i];
        let seed = spec.base.seed.wrapping_add(trial as u64);
        let config = TrainConfig {
            method,
            seed,
            ..spec.base.clone()
        };
        let model = init_model(spec.arch, splits, seed)?;
        let out = train(model, splits, &config)?;
        let metric = |s| out.record.last(s).expect("record has rows");
        Ok(SweepCell {
            family,
            value,
            trial,
            val_acc: metric(Split::Val).acc,
            test_acc: metric(Split::Test).acc,
            train_loss: metric(Split::Train).loss,
        })
    };
    let cells = parallel_map(jobs.len(), parallel, run)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let rows = spec
        .grids
        .iter()
        .map(|(family, grid)| summarize(*family, grid, spec.trials, spec.selection, &cells))
        .collect();
    Ok(SweepResult { rows, cells })
}

fn summarize(
    family: Family,
    grid: &[f64],
    trials: usize,
    selection: Selection,
    cells: &[SweepCell],
) -> SweepRow {
    let cell = |value: f64, trial: usize| {
        cells
            .iter()
            .find(|c| c.family == family && c.value == value && c.trial == trial)
            .expect("every grid cell was run")
    };
    match selection {
        Selection::PerTrial => {
            let picks: Vec<&SweepCell> = (0..trials)
                .map(|t| {
                    let cands: Vec<(f64, f64)> =
                        grid.iter().map(|&v| (v, cell(v, t).val_acc)).collect();
                    cell(grid[select(&cands)], t)
                })
                .collect();
            let (selected_mean, selected_std) =
                mean_std(&picks.iter().map(|c| c.value).collect::<Vec<_>>());
            let (val_acc_mean, _) = mean_std(&picks.iter().map(|c| c.val_acc).collect::<Vec<_>>());
            let (test_acc_mean, test_acc_std) =
                mean_std(&picks.iter().map(|c| c.test_acc).collect::<Vec<_>>());
            SweepRow {
                family,
                selected_mean,
                selected_std,
                val_acc_mean,
                test_acc_mean,
                test_acc_std,
            }
        }
        Selection::Averaged => {
            let cands: Vec<(f64, f64)> = grid
                .iter()
                .map(|&v| {
                    (
                        v,
                        mean_std(&(0..trials).map(|t| cell(v, t).val_acc).collect::<Vec<_>>()).0,
                    )
                })
                .collect();
            let best = select(&cands);
            let value = grid[best];
            let (test_acc_mean, test_acc_std) = mean_std(
                &(0..trials)
                    .map(|t| cell(value, t).test_acc)
                    .collect::<Vec<_>>(),
            );
            SweepRow {
                family,
                selected_mean: value,
                selected_std: 0.0,
                val_acc_mean: cands[best].1,
                test_acc_mean,
                test_acc_std,
            }
        }
    }
}
