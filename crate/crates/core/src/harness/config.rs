//! Run configuration: `key = value` lines, `#` comments, dotted keys,
//! comma-separated lists. Unknown keys are errors.

use std::collections::HashSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::collapse::DEFAULT_TIE_TOL;
use crate::criteria::CriterionSpec;
use crate::error::{Error, Result};
use crate::rho::DispersionFunction;
use crate::surrogate::MarginPenalty;
use crate::train::sweep::{Family, Selection};
use crate::train::{Arch, LossKind, Method};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    CollapseCheck,
    SurrogateDemo,
    Train,
    Sweep,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::CollapseCheck => "collapse-check",
            Self::SurrogateDemo => "surrogate-demo",
            Self::Train => "train",
            Self::Sweep => "sweep",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Self::CollapseCheck,
            Self::SurrogateDemo,
            Self::Train,
            Self::Sweep,
        ]
        .into_iter()
        .find(|c| c.name() == s.trim())
        .ok_or_else(|| Error::Input(format!("unknown command `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollapseOptions {
    pub tol: f64,
    pub suite_classes: usize,
    pub suite_max_size: usize,
    /// Criteria checked against their predicted relation on random classes.
    pub suite_criteria: Vec<CriterionSpec>,
    /// Variantile levels whose extremes are checked on random classes.
    pub suite_variantile: Vec<f64>,
    /// Named Bernoulli classes, in file order.
    pub classes: Vec<(String, Vec<f64>)>,
    pub criteria: Vec<CriterionSpec>,
    pub regime_cvar: Vec<f64>,
    pub regime_variantile: Vec<f64>,
    pub regime_fixed_fn: Vec<(f64, f64)>,
}

impl Default for CollapseOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TIE_TOL,
            suite_classes: 200,
            suite_max_size: 50,
            suite_criteria: vec![],
            suite_variantile: vec![],
            classes: vec![],
            criteria: vec![],
            regime_cvar: vec![],
            regime_variantile: vec![],
            regime_fixed_fn: vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateOptions {
    pub a: f64,
    pub p: f64,
    pub criteria: Vec<CriterionSpec>,
    pub witness: bool,
    pub witness_phis: Vec<MarginPenalty>,
    pub witness_rhos: Vec<DispersionFunction>,
}

impl Default for SurrogateOptions {
    fn default() -> Self {
        Self {
            a: 2.0,
            p: 0.9,
            criteria: vec![
                CriterionSpec::Expected,
                CriterionSpec::Tilted { gamma: 3.0 },
                CriterionSpec::Tilted { gamma: -3.0 },
            ],
            witness: false,
            witness_phis: vec![MarginPenalty::Logistic, MarginPenalty::Exponential],
            witness_rhos: vec![DispersionFunction::Abs, DispersionFunction::PseudoHuber],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataKind {
    Blobs2,
    Blobs3,
    File,
}

impl fmt::Display for DataKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Self::Blobs2 => "blobs2",
            Self::Blobs3 => "blobs3",
            Self::File => "file",
        })
    }
}

impl FromStr for DataKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "blobs2" => Ok(Self::Blobs2),
            "blobs3" => Ok(Self::Blobs3),
            "file" => Ok(Self::File),
            other => Err(Error::Input(format!("unknown data kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataOptions {
    pub kind: DataKind,
    pub seed: u64,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub train: Option<PathBuf>,
    pub val: Option<PathBuf>,
    pub test: Option<PathBuf>,
    /// Write generated splits next to the other outputs.
    pub save: bool,
}

impl Default for DataOptions {
    fn default() -> Self {
        Self {
            kind: DataKind::Blobs2,
            seed: 0,
            n_train: 2000,
            n_val: 500,
            n_test: 500,
            train: None,
            val: None,
            test: None,
            save: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    pub arch: Arch,
    pub method: Method,
    /// `None` picks logistic for binary data and cross-entropy otherwise.
    pub loss: Option<LossKind>,
    pub step_size: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub plot: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            arch: Arch::Mlp { hidden: 16 },
            method: Method::Erm,
            loss: None,
            step_size: 0.1,
            momentum: 0.9,
            epochs: 100,
            batch_size: 100,
            plot: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub trials: usize,
    /// Families in run order, each with its resolved grid.
    pub grids: Vec<(Family, Vec<f64>)>,
    pub selection: Selection,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            trials: 5,
            grids: Family::SWEPT
                .iter()
                .map(|f| (*f, f.default_grid()))
                .collect(),
            selection: Selection::PerTrial,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub collapse: CollapseOptions,
    pub surrogate: SurrogateOptions,
    pub data: DataOptions,
    pub train: TrainOptions,
    pub sweep: SweepOptions,
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        Self {
            command,
            seed: 0,
            collapse: CollapseOptions::default(),
            surrogate: SurrogateOptions::default(),
            data: DataOptions::default(),
            train: TrainOptions::default(),
            sweep: SweepOptions::default(),
        }
    }

    /// Parses a config document. `command` (from the CLI) must agree with a
    /// `command` key when both are given.
    pub fn parse(text: &str, command: Option<Command>) -> Result<Self> {
        let entries = parse_document(text)?;
        let declared = entries
            .iter()
            .find(|e| e.key == "command")
            .map(|e| e.value.parse::<Command>().map_err(|err| at(e.line, err)))
            .transpose()?;
        let command = match (command, declared) {
            (Some(c), Some(d)) if c != d => {
                return Err(Error::Config {
                    line: entries
                        .iter()
                        .find(|e| e.key == "command")
                        .map_or(0, |e| e.line),
                    msg: format!("config is for `{d}`, not `{c}`"),
                })
            }
            (Some(c), _) | (None, Some(c)) => c,
            (None, None) => {
                return Err(Error::Config {
                    line: 0,
                    msg: "no `command` key and no subcommand given".into(),
                })
            }
        };
        let mut cfg = Self::defaults(command);
        let mut grid_overrides: Vec<(usize, Family, Vec<f64>)> = Vec::new();
        for e in &entries {
            cfg.apply(e, &mut grid_overrides).map_err(|err| match err {
                err @ Error::Config { .. } => err,
                other => at(e.line, other),
            })?;
        }
        for (line, family, grid) in grid_overrides {
            let slot = cfg
                .sweep
                .grids
                .iter_mut()
                .find(|(f, _)| *f == family)
                .ok_or_else(|| Error::Config {
                    line,
                    msg: format!("grid given for `{family}`, which is not in sweep.methods"),
                })?;
            if grid.is_empty() {
                return Err(Error::Config {
                    line,
                    msg: format!("empty grid for `{family}`"),
                });
            }
            slot.1 = grid;
        }
        Ok(cfg)
    }

    fn apply(
        &mut self,
        e: &Entry,
        grid_overrides: &mut Vec<(usize, Family, Vec<f64>)>,
    ) -> Result<()> {
        let v = e.value.as_str();
        let cmd = self.command;
        let is = |cmds: &[Command]| cmds.contains(&cmd);
        use Command::*;
        match e.key.as_str() {
            "command" => {}
            "seed" => self.seed = scalar(v)?,

            "tol" if is(&[CollapseCheck]) => self.collapse.tol = scalar(v)?,
            "suite.classes" if is(&[CollapseCheck]) => self.collapse.suite_classes = scalar(v)?,
            "suite.max_size" if is(&[CollapseCheck]) => self.collapse.suite_max_size = scalar(v)?,
            "suite.criteria" if is(&[CollapseCheck]) => self.collapse.suite_criteria = list(v)?,
            "suite.variantile" if is(&[CollapseCheck]) => self.collapse.suite_variantile = list(v)?,
            "criteria" if is(&[CollapseCheck]) => self.collapse.criteria = list(v)?,
            "criteria" if is(&[SurrogateDemo]) => self.surrogate.criteria = list(v)?,
            "regime.cvar" if is(&[CollapseCheck]) => self.collapse.regime_cvar = list(v)?,
            "regime.variantile" if is(&[CollapseCheck]) => {
                self.collapse.regime_variantile = list(v)?
            }
            "regime.fixed_fn" if is(&[CollapseCheck]) => {
                self.collapse.regime_fixed_fn = items(v)
                    .map(|pair| {
                        let (f0, f1) = pair
                            .split_once(':')
                            .ok_or_else(|| Error::Input(format!("expected f0:f1, got `{pair}`")))?;
                        Ok((scalar(f0)?, scalar(f1)?))
                    })
                    .collect::<Result<_>>()?
            }
            key if is(&[CollapseCheck]) && key.starts_with("class.") => {
                let name = &key["class.".len()..];
                if name.is_empty() {
                    return Err(Error::Input("class name missing".into()));
                }
                self.collapse.classes.push((name.to_string(), list(v)?));
            }

            "a" if is(&[SurrogateDemo]) => self.surrogate.a = scalar(v)?,
            "p" if is(&[SurrogateDemo]) => self.surrogate.p = scalar(v)?,
            "witness" if is(&[SurrogateDemo]) => self.surrogate.witness = scalar(v)?,
            "witness.phis" if is(&[SurrogateDemo]) => self.surrogate.witness_phis = list(v)?,
            "witness.rhos" if is(&[SurrogateDemo]) => self.surrogate.witness_rhos = list(v)?,

            "data.kind" if is(&[Train, Sweep]) => self.data.kind = scalar(v)?,
            "data.seed" if is(&[Train, Sweep]) => self.data.seed = scalar(v)?,
            "data.n_train" if is(&[Train, Sweep]) => self.data.n_train = scalar(v)?,
            "data.n_val" if is(&[Train, Sweep]) => self.data.n_val = scalar(v)?,
            "data.n_test" if is(&[Train, Sweep]) => self.data.n_test = scalar(v)?,
            "data.train" if is(&[Train, Sweep]) => self.data.train = Some(v.into()),
            "data.val" if is(&[Train, Sweep]) => self.data.val = Some(v.into()),
            "data.test" if is(&[Train, Sweep]) => self.data.test = Some(v.into()),
            "data.save" if is(&[Train, Sweep]) => self.data.save = scalar(v)?,
            "model.arch" if is(&[Train, Sweep]) => self.train.arch = scalar(v)?,
            "train.method" if is(&[Train]) => self.train.method = scalar(v)?,
            "train.loss" if is(&[Train, Sweep]) => {
                self.train.loss = if v == "auto" { None } else { Some(scalar(v)?) }
            }
            "train.step_size" if is(&[Train, Sweep]) => self.train.step_size = scalar(v)?,
            "train.momentum" if is(&[Train, Sweep]) => self.train.momentum = scalar(v)?,
            "train.epochs" if is(&[Train, Sweep]) => self.train.epochs = scalar(v)?,
            "train.batch_size" if is(&[Train, Sweep]) => self.train.batch_size = scalar(v)?,
            "plot" if is(&[Train]) => self.train.plot = scalar(v)?,

            "trials" if is(&[Sweep]) => self.sweep.trials = scalar(v)?,
            "sweep.selection" if is(&[Sweep]) => self.sweep.selection = scalar(v)?,
            "sweep.methods" if is(&[Sweep]) => {
                let families: Vec<Family> = list(v)?;
                if families.is_empty() {
                    return Err(Error::Input("sweep.methods is empty".into()));
                }
                self.sweep.grids = families.iter().map(|f| (*f, f.default_grid())).collect();
            }
            key if is(&[Sweep]) && key.starts_with("sweep.grid.") => {
                let family: Family = key["sweep.grid.".len()..].parse()?;
                grid_overrides.push((e.line, family, list(v)?));
            }

            other => {
                return Err(Error::Config {
                    line: e.line,
                    msg: format!("unknown key `{other}` for `{cmd}`"),
                })
            }
        }
        Ok(())
    }

    /// Fully resolved `(key, value)` pairs; parsing them back yields `self`.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        let mut put = |k: &str, v: String| out.push((k.to_string(), v));
        fn join<T: fmt::Display>(xs: &[T]) -> String {
            xs.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        }
        put("command", self.command.to_string());
        put("seed", self.seed.to_string());
        match self.command {
            Command::CollapseCheck => {
                let c = &self.collapse;
                put("tol", c.tol.to_string());
                put("suite.classes", c.suite_classes.to_string());
                put("suite.max_size", c.suite_max_size.to_string());
                if !c.suite_criteria.is_empty() {
                    put("suite.criteria", join(&c.suite_criteria));
                }
                if !c.suite_variantile.is_empty() {
                    put("suite.variantile", join(&c.suite_variantile));
                }
                for (name, errs) in &c.classes {
                    put(&format!("class.{name}"), join(errs));
                }
                if !c.criteria.is_empty() {
                    put("criteria", join(&c.criteria));
                }
                if !c.regime_cvar.is_empty() {
                    put("regime.cvar", join(&c.regime_cvar));
                }
                if !c.regime_variantile.is_empty() {
                    put("regime.variantile", join(&c.regime_variantile));
                }
                if !c.regime_fixed_fn.is_empty() {
                    let pairs: Vec<String> = c
                        .regime_fixed_fn
                        .iter()
                        .map(|(a, b)| format!("{a}:{b}"))
                        .collect();
                    put("regime.fixed_fn", pairs.join(", "));
                }
            }
            Command::SurrogateDemo => {
                let s = &self.surrogate;
                put("a", s.a.to_string());
                put("p", s.p.to_string());
                // These lists default to non-empty, so an empty one is written out.
                put("criteria", join(&s.criteria));
                put("witness", s.witness.to_string());
                put("witness.phis", join(&s.witness_phis));
                put("witness.rhos", join(&s.witness_rhos));
            }
            Command::Train | Command::Sweep => {
                let d = &self.data;
                put("data.kind", d.kind.to_string());
                put("data.seed", d.seed.to_string());
                put("data.n_train", d.n_train.to_string());
                put("data.n_val", d.n_val.to_string());
                put("data.n_test", d.n_test.to_string());
                for (k, p) in [
                    ("data.train", &d.train),
                    ("data.val", &d.val),
                    ("data.test", &d.test),
                ] {
                    if let Some(p) = p {
                        put(k, p.display().to_string());
                    }
                }
                put("data.save", d.save.to_string());
                let t = &self.train;
                put("model.arch", t.arch.to_string());
                if self.command == Command::Train {
                    put("train.method", t.method.to_string());
                }
                put(
                    "train.loss",
                    t.loss.map_or("auto".to_string(), |l| l.to_string()),
                );
                put("train.step_size", t.step_size.to_string());
                put("train.momentum", t.momentum.to_string());
                put("train.epochs", t.epochs.to_string());
                put("train.batch_size", t.batch_size.to_string());
                if self.command == Command::Train {
                    put("plot", t.plot.to_string());
                } else {
                    let s = &self.sweep;
                    put("trials", s.trials.to_string());
                    let families: Vec<Family> = s.grids.iter().map(|(f, _)| *f).collect();
                    put("sweep.methods", join(&families));
                    for (f, grid) in &s.grids {
                        put(&format!("sweep.grid.{f}"), join(grid));
                    }
                    put("sweep.selection", s.selection.to_string());
                }
            }
        }
        out
    }

    /// `# key = value` lines embedding the resolved config in an output file.
    pub fn header(&self) -> String {
        self.to_pairs()
            .iter()
            .map(|(k, v)| format!("# {k} = {v}\n"))
            .collect()
    }

    /// Recovers the config embedded in an output file's header.
    pub fn from_header(output: &str) -> Result<Self> {
        let body: String = output
            .lines()
            .take_while(|l| l.starts_with('#'))
            .map(|l| format!("{}\n", l.trim_start_matches('#').trim_start()))
            .collect();
        Self::parse(&body, None)
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    line: usize,
    key: String,
    value: String,
}

fn parse_document(text: &str) -> Result<Vec<Entry>> {
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
            line,
            msg: format!("expected `key = value`, got `{content}`"),
        })?;
        let key = key.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(Error::Config {
                line,
                msg: format!("malformed key `{key}`"),
            });
        }
        if !seen.insert(key.to_string()) {
            return Err(Error::Config {
                line,
                msg: format!("duplicate key `{key}`"),
            });
        }
        entries.push(Entry {
            line,
            key: key.to_string(),
            value: value.trim().to_string(),
        });
    }
    Ok(entries)
}

fn at(line: usize, err: Error) -> Error {
    Error::Config {
        line,
        msg: err.to_string(),
    }
}

fn scalar<T: FromStr>(v: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    v.trim()
        .parse::<T>()
        .map_err(|e| Error::Input(format!("`{v}`: {e}")))
}

fn items(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn list<T: FromStr>(v: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    items(v).map(scalar).collect()
}

/// Configs shipped with the crate, addressable by name.
pub const BUNDLED: [(&str, &str); 7] = [
    (
        "prop1_quantiles",
        include_str!("../../configs/prop1_quantiles.conf"),
    ),
    (
        "prop2_monotone",
        include_str!("../../configs/prop2_monotone.conf"),
    ),
    (
        "b2_cvar_regimes",
        include_str!("../../configs/b2_cvar_regimes.conf"),
    ),
    (
        "b3_variantile",
        include_str!("../../configs/b3_variantile.conf"),
    ),
    (
        "surrogate_three_point",
        include_str!("../../configs/surrogate_three_point.conf"),
    ),
    (
        "blobs_flooding",
        include_str!("../../configs/blobs_flooding.conf"),
    ),
    (
        "blobs_sweep",
        include_str!("../../configs/blobs_sweep.conf"),
    ),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    let name = name.strip_suffix(".conf").unwrap_or(name);
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}
