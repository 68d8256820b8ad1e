//! Subcommand execution. Each command renders its outputs in memory, then
//! they are written once to the output directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::collapse::{
    argmin_set, bernoulli_claim, check_collapse, cvar_regime, err_extreme_sets, fixed_fn_extremes,
    run_suite, variantile_extremes, CvarRegime, FiniteHypothesisClass, FixedFnExtreme, RandomSuite,
    VariantileExtreme,
};
use crate::criteria::CriterionSpec;
use crate::error::{Error, Result};
use crate::harness::config::{bundled, Command, DataKind, RunConfig};
use crate::harness::format::num;
use crate::harness::svg::train_plot;
use crate::parallel::parallel_map;
use crate::surrogate::{
    divergence_report, prop4_witness_inner, prop4_witness_outer, DiscreteClassificationProblem,
    ThreePointExample,
};
use crate::train::sweep::{sweep, SweepSpec};
use crate::train::{init_model, train, BlobSpec, Dataset, LossKind, Split, Splits, TrainConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct CliOptions {
    /// Path to a config file, or the name of a bundled config.
    pub config: Option<String>,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub parallel: usize,
    pub plot: bool,
}

impl Default for CliOptions {
    fn default() -> Self {
        Self {
            config: None,
            out: PathBuf::from("out"),
            seed: None,
            parallel: 1,
            plot: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOutcome {
    /// Human-readable report printed by the CLI.
    pub summary: String,
    /// `(file name, contents)` written to the output directory.
    pub files: Vec<(String, String)>,
    /// Refuted assertions; non-empty means exit code 1.
    pub failures: Vec<String>,
}

impl RunOutcome {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.as_str())
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, contents) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

/// Resolves `--config` (a file, else a bundled name) and the CLI overrides.
pub fn load_config(command: Command, opts: &CliOptions) -> Result<RunConfig> {
    let mut cfg = match &opts.config {
        None => RunConfig::defaults(command),
        Some(spec) => {
            let path = Path::new(spec);
            let text = if path.exists() {
                std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?
            } else if let Some(text) = bundled(spec) {
                text.to_string()
            } else {
                return Err(Error::io(
                    path,
                    std::io::Error::new(
                        std::io::ErrorKind::NotFound,
                        "no such file or bundled config",
                    ),
                ));
            };
            RunConfig::parse(&text, Some(command))?
        }
    };
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if opts.plot {
        cfg.train.plot = true;
    }
    Ok(cfg)
}

/// Loads the config, runs the command and writes its files to `opts.out`.
/// Partial training output is still written when a run diverges.
pub fn run(command: Command, opts: &CliOptions) -> Result<RunOutcome> {
    let cfg = load_config(command, opts)?;
    match run_config(&cfg, opts.parallel) {
        Ok(outcome) => {
            outcome.write_to(&opts.out)?;
            Ok(outcome)
        }
        Err(Error::Diverged {
            epoch,
            loss,
            partial,
        }) => {
            let partial_out = RunOutcome {
                files: vec![(
                    "train.csv".into(),
                    format!("{}{}", cfg.header(), partial.to_csv()),
                )],
                ..RunOutcome::default()
            };
            partial_out.write_to(&opts.out)?;
            Err(Error::Diverged {
                epoch,
                loss,
                partial,
            })
        }
        Err(e) => Err(e),
    }
}

/// Runs a resolved config without touching the filesystem (except to read
/// dataset files).
pub fn run_config(cfg: &RunConfig, parallel: usize) -> Result<RunOutcome> {
    match cfg.command {
        Command::CollapseCheck => collapse_check(cfg, parallel),
        Command::SurrogateDemo => surrogate_demo(cfg),
        Command::Train => train_command(cfg),
        Command::Sweep => sweep_command(cfg, parallel),
    }
}

/// 0 success, 1 refuted assertion, 2 usage/config/input, 3 numeric.
pub fn exit_code(result: &Result<RunOutcome>) -> i32 {
    match result {
        Ok(o) if o.failures.is_empty() => 0,
        Ok(_) => 1,
        Err(Error::Numeric(_) | Error::Overflow(_) | Error::Diverged { .. }) => 3,
        Err(_) => 2,
    }
}

fn collapse_check(cfg: &RunConfig, parallel: usize) -> Result<RunOutcome> {
    let c = &cfg.collapse;
    let header = cfg.header();
    let mut out = RunOutcome::default();
    let mut summary = String::new();

    if !c.suite_criteria.is_empty() || !c.suite_variantile.is_empty() {
        let suite = RandomSuite {
            seed: cfg.seed,
            classes: c.suite_classes,
            max_size: c.suite_max_size,
        };
        let claims = c
            .suite_criteria
            .iter()
            .map(|spec| {
                bernoulli_claim(spec)
                    .map(|claim| (spec.clone(), claim))
                    .ok_or_else(|| Error::Input(format!("no predicted relation for `{spec}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        let outcome = run_suite(&suite, &claims, c.tol, parallel)?;
        let mut csv = format!("{header}criterion,claim,classes,violations\n");
        let _ = writeln!(
            summary,
            "random suite: {} classes (size <= {}), seed {}",
            suite.classes, suite.max_size, suite.seed
        );
        for (spec, claim) in &claims {
            let name = spec.to_string();
            let bad = outcome
                .violations
                .iter()
                .filter(|v| v.criterion == name)
                .count();
            let _ = writeln!(csv, "{name},{claim},{},{bad}", suite.classes);
            let _ = writeln!(
                summary,
                "  {name:<24} {claim:<10} violations {bad}/{}",
                suite.classes
            );
            if bad > 0 {
                out.failures
                    .push(format!("{name}: {claim} refuted on {bad} random classes"));
            }
        }
        if !c.suite_variantile.is_empty() {
            let classes = suite.generate()?;
            for &tau in &c.suite_variantile {
                let tags = parallel_map(classes.len(), parallel, |i| {
                    variantile_extremes(&classes[i], tau, c.tol)
                })
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
                let mixed = tags
                    .iter()
                    .filter(|t| **t == VariantileExtreme::Mixed)
                    .count();
                let count = |t| tags.iter().filter(|x| **x == t).count();
                let _ = writeln!(csv, "variantile:{tau},extremes,{},{mixed}", classes.len());
                let _ = writeln!(
                    summary,
                    "  variantile:{tau:<13} extremes   argmin_of_err {} argmax_of_err {} tie {} mixed {mixed}",
                    count(VariantileExtreme::ArgminOfErr),
                    count(VariantileExtreme::ArgmaxOfErr),
                    count(VariantileExtreme::Tie),
                );
                if mixed > 0 {
                    out.failures
                        .push(format!("variantile:{tau}: {mixed} strict mixtures"));
                }
            }
        }
        out.files.push(("suite.csv".into(), csv));
    }

    let classes = c
        .classes
        .iter()
        .map(|(name, errs)| Ok((name.as_str(), FiniteHypothesisClass::from_errs(errs)?)))
        .collect::<Result<Vec<_>>>()?;
    if !classes.is_empty() && !c.criteria.is_empty() {
        let mut csv = format!("{header}class,criterion,id,value,err\n");
        for (name, class) in &classes {
            for spec in &c.criteria {
                let r = check_collapse(spec, class, c.tol)?;
                for e in &r.values {
                    let err = e.err.map(num).unwrap_or_default();
                    let _ = writeln!(
                        csv,
                        "{name},{},{},{},{err}",
                        r.criterion,
                        e.id,
                        num(e.value)
                    );
                }
                let verdict = match r.claim {
                    Some(claim) if r.satisfies(claim) => format!("{claim} holds"),
                    Some(claim) => {
                        out.failures
                            .push(format!("class {name}, {}: {claim} refuted", r.criterion));
                        format!("{claim} REFUTED")
                    }
                    None => "no prediction".into(),
                };
                let _ = writeln!(
                    summary,
                    "class {name} {}: herr {{{}}} argmin {{{}}} spread {} ({verdict})",
                    r.criterion,
                    join_ids(&r.herr_set),
                    join_ids(&r.criterion_argmin),
                    num(r.spread)
                );
            }
        }
        out.files.push(("values.csv".into(), csv));
    }

    let has_regimes = !c.regime_cvar.is_empty()
        || !c.regime_variantile.is_empty()
        || !c.regime_fixed_fn.is_empty();
    if has_regimes {
        if classes.is_empty() {
            return Err(Error::Input(
                "regime checks need at least one `class.<name>`".into(),
            ));
        }
        let mut csv = format!("{header}kind,class,param,verdict,holds\n");
        let mut record = |kind: &str,
                          name: &str,
                          param: String,
                          verdict: String,
                          holds: bool,
                          out: &mut RunOutcome| {
            let _ = writeln!(csv, "{kind},{name},{param},{verdict},{holds}");
            let _ = writeln!(
                summary,
                "{kind} {param} class {name}: {verdict}{}",
                if holds { "" } else { " (REFUTED)" }
            );
            if !holds {
                out.failures
                    .push(format!("{kind} {param} class {name}: {verdict}"));
            }
        };
        for &beta in &c.regime_cvar {
            for (name, class) in &classes {
                let regime = cvar_regime(class, beta)?;
                let report = check_collapse(&CriterionSpec::cvar(beta)?, class, c.tol)?;
                let holds = match regime {
                    CvarRegime::TrivialAllOptimal => report.spread < c.tol,
                    CvarRegime::Coincide => report.equality,
                    CvarRegime::Intermediate => report.inclusion_12a,
                };
                record(
                    "cvar",
                    name,
                    format!("{beta}"),
                    regime.to_string(),
                    holds,
                    &mut out,
                );
            }
        }
        for &tau in &c.regime_variantile {
            for (name, class) in &classes {
                let tag = variantile_extremes(class, tau, c.tol)?;
                record(
                    "variantile",
                    name,
                    format!("{tau}"),
                    tag.to_string(),
                    tag != VariantileExtreme::Mixed,
                    &mut out,
                );
            }
        }
        for &(f0, f1) in &c.regime_fixed_fn {
            for (name, class) in &classes {
                let tag = fixed_fn_extremes(f0, f1);
                let argmin = argmin_set(&CriterionSpec::FixedFn { f0, f1 }, class, c.tol)?;
                let (emin, emax) = err_extreme_sets(class, c.tol)?;
                let holds = match tag {
                    FixedFnExtreme::ErrMinimizers => argmin == emin,
                    FixedFnExtreme::ErrMaximizers => argmin == emax,
                    FixedFnExtreme::Constant => argmin.len() == class.len(),
                };
                record(
                    "fixed-fn",
                    name,
                    format!("{f0}:{f1}"),
                    tag.to_string(),
                    holds,
                    &mut out,
                );
            }
        }
        out.files.push(("regimes.csv".into(), csv));
    }

    if out.files.is_empty() {
        return Err(Error::Input(
            "nothing to check: set suite.criteria, suite.variantile, or class.<name> with criteria/regime keys".into(),
        ));
    }
    let _ = writeln!(
        summary,
        "{}",
        if out.failures.is_empty() {
            "all checks passed"
        } else {
            "SOME CHECKS FAILED"
        }
    );
    out.summary = summary;
    Ok(out)
}

fn join_ids(ids: &std::collections::BTreeSet<String>) -> String {
    ids.iter().cloned().collect::<Vec<_>>().join(",")
}

fn surrogate_demo(cfg: &RunConfig) -> Result<RunOutcome> {
    let s = &cfg.surrogate;
    let header = cfg.header();
    let mut out = RunOutcome::default();
    let ex = ThreePointExample::new(s.a, s.p)?;
    let report = divergence_report(&ex, &s.criteria)?;
    let mut summary = format!("three-point example, a = {}, p = {}\n", s.a, s.p);
    summary.push_str(&report.to_table());
    if !(report.max_loss_s2_below && report.min_loss_s2_below) {
        out.failures.push("loss ordering facts do not hold".into());
    }
    out.files.push((
        "divergence.csv".into(),
        format!("{header}{}", report.to_csv()),
    ));

    if s.witness {
        let problem = DiscreteClassificationProblem::uniform(&[1.0, 0.0])?;
        let mut csv = format!("{header}construction,phi,rho,theta,id,value,err\n");
        summary.push_str("witnesses (two points, labels +1/-1):\n");
        for &phi in &s.witness_phis {
            for rho in &s.witness_rhos {
                for (kind, w) in [
                    ("inner", prop4_witness_inner(&problem, phi, rho)?),
                    ("outer", prop4_witness_outer(&problem, phi, rho)?),
                ] {
                    for e in &w.report.values {
                        let err = e.err.map(num).unwrap_or_default();
                        let _ = writeln!(
                            csv,
                            "{kind},{phi},{rho},{},{},{},{err}",
                            num(w.theta),
                            e.id,
                            num(e.value)
                        );
                    }
                    let mut holds = w.report.disjoint;
                    if kind == "outer" {
                        holds &= w
                            .report
                            .values
                            .iter()
                            .any(|v| v.id == "h_flipped" && v.value == 0.0);
                    }
                    let _ = writeln!(
                        summary,
                        "  {kind:<5} {:<11} {:<12} theta {:<12} herr {{{}}} argmin {{{}}} {}",
                        phi.to_string(),
                        rho.to_string(),
                        num(w.theta),
                        join_ids(&w.report.herr_set),
                        join_ids(&w.report.criterion_argmin),
                        if holds { "disjoint" } else { "NOT DISJOINT" }
                    );
                    if !holds {
                        out.failures
                            .push(format!("{kind} witness for {phi}/{rho} failed"));
                    }
                }
            }
        }
        out.files.push(("witness.csv".into(), csv));
    }
    out.summary = summary;
    Ok(out)
}

/// Splits described by the data options.
pub fn load_splits(cfg: &RunConfig) -> Result<Splits> {
    let d = &cfg.data;
    let sizes = [d.n_train, d.n_val, d.n_test];
    match d.kind {
        DataKind::Blobs2 => BlobSpec::binary().splits(sizes, d.seed),
        DataKind::Blobs3 => BlobSpec::three_class().splits(sizes, d.seed),
        DataKind::File => {
            let path = |p: &Option<PathBuf>, key: &str| {
                p.clone()
                    .ok_or_else(|| Error::Input(format!("data.kind = file needs `{key}`")))
            };
            Ok(Splits {
                train: Dataset::load(&path(&d.train, "data.train")?)?,
                val: Dataset::load(&path(&d.val, "data.val")?)?,
                test: Dataset::load(&path(&d.test, "data.test")?)?,
            })
        }
    }
}

fn resolve_loss(cfg: &RunConfig, splits: &Splits) -> Result<LossKind> {
    Ok(match cfg.train.loss {
        Some(l) => l,
        None if splits.train.output_dim()? == 1 => {
            LossKind::Margin(crate::surrogate::MarginPenalty::Logistic)
        }
        None => LossKind::CrossEntropy,
    })
}

fn base_train_config(cfg: &RunConfig, splits: &Splits) -> Result<TrainConfig> {
    let t = &cfg.train;
    Ok(TrainConfig {
        method: t.method,
        loss: resolve_loss(cfg, splits)?,
        step_size: t.step_size,
        momentum: t.momentum,
        epochs: t.epochs,
        batch_size: t.batch_size,
        seed: cfg.seed,
    })
}

fn data_files(cfg: &RunConfig, splits: &Splits, out: &mut RunOutcome) {
    if cfg.data.save && cfg.data.kind != DataKind::File {
        for (name, d) in [
            ("train.txt", &splits.train),
            ("val.txt", &splits.val),
            ("test.txt", &splits.test),
        ] {
            out.files.push((name.into(), d.to_text()));
        }
    }
}

fn train_command(cfg: &RunConfig) -> Result<RunOutcome> {
    let splits = load_splits(cfg)?;
    let config = base_train_config(cfg, &splits)?;
    let model = init_model(cfg.train.arch, &splits, cfg.seed)?;
    let result = train(model, &splits, &config)?;
    let mut out = RunOutcome::default();
    out.files.push((
        "train.csv".into(),
        format!("{}{}", cfg.header(), result.record.to_csv()),
    ));
    if cfg.train.plot {
        let title = format!(
            "{} on {} ({})",
            config.method, cfg.data.kind, cfg.train.arch
        );
        out.files
            .push(("train.svg".into(), train_plot(&result.record, &title)));
    }
    data_files(cfg, &splits, &mut out);
    let mut summary = format!(
        "{} on {}, {} epochs\n",
        config.method, cfg.data.kind, config.epochs
    );
    for split in [Split::Train, Split::Val, Split::Test] {
        if let Some(r) = result.record.last(split) {
            let _ = writeln!(
                summary,
                "  {split:<5} loss {:<12} acc {}",
                num(r.loss),
                num(r.acc)
            );
        }
    }
    if let Some(theta) = result.theta {
        let _ = writeln!(summary, "  theta {}", num(theta));
    }
    out.summary = summary;
    Ok(out)
}

fn sweep_command(cfg: &RunConfig, parallel: usize) -> Result<RunOutcome> {
    let splits = load_splits(cfg)?;
    let spec = SweepSpec {
        arch: cfg.train.arch,
        base: base_train_config(cfg, &splits)?,
        grids: cfg.sweep.grids.clone(),
        trials: cfg.sweep.trials,
        selection: cfg.sweep.selection,
    };
    let result = sweep(&splits, &spec, parallel)?;
    let header = cfg.header();
    let mut out = RunOutcome::default();
    out.files
        .push(("sweep.csv".into(), format!("{header}{}", result.to_csv())));
    out.files.push((
        "sweep_cells.csv".into(),
        format!("{header}{}", result.cells_csv()),
    ));
    data_files(cfg, &splits, &mut out);
    let mut summary = format!(
        "{:<9} {:>14} {:>14} {:>14}\n",
        "method", "selected", "(std)", "test acc"
    );
    for r in &result.rows {
        let _ = writeln!(
            summary,
            "{:<9} {:>14} {:>14} {:>14}",
            r.family.name(),
            num(r.selected_mean),
            format!("({})", num(r.selected_std)),
            num(r.test_acc_mean)
        );
    }
    out.summary = summary;
    Ok(out)
}
