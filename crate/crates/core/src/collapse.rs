//! Brute-force argmin sets over finite hypothesis classes.
//!
//! A hypothesis is represented only through its loss distribution and, when
//! known, its zero-one error probability. Comparing the criterion argmin with
//! the error argmin tells whether a criterion "collapses" onto plain error
//! minimization, is merely compatible with it, or disagrees with it entirely.

use std::collections::{BTreeSet, HashSet};
use std::fmt::{self, Write as _};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::criteria::{eval_criterion, CriterionSpec};
use crate::dist::{BernoulliSpec, EmpiricalLossDist};
use crate::error::{Error, Result};
use crate::harness::format::num;
use crate::parallel::parallel_map;

pub const DEFAULT_TIE_TOL: f64 = 1e-9;

pub type IdSet = BTreeSet<String>;

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub id: String,
    pub dist: EmpiricalLossDist,
    pub err: Option<f64>,
}

/// How entries relate their loss distribution to their error probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassMode {
    /// Every loss is zero-one: `dist` is Bernoulli(`err`).
    Bernoulli,
    /// `dist` is a surrogate loss distribution; `err` is the accompanying
    /// zero-one error probability.
    Surrogate,
    /// No error probabilities; only criterion argmins can be computed.
    Unlabeled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteHypothesisClass {
    entries: Vec<Hypothesis>,
}

impl FiniteHypothesisClass {
    pub fn new(entries: Vec<Hypothesis>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Input("hypothesis class is empty".into()));
        }
        let mut seen = HashSet::new();
        for h in &entries {
            if !seen.insert(h.id.as_str()) {
                return Err(Error::Input(format!("duplicate hypothesis id `{}`", h.id)));
            }
            if let Some(err) = h.err {
                BernoulliSpec::new(err)?;
            }
        }
        Ok(Self { entries })
    }

    /// Bernoulli class with ids `h1, h2, ...`.
    pub fn from_errs(errs: &[f64]) -> Result<Self> {
        let named: Vec<(String, f64)> = errs
            .iter()
            .enumerate()
            .map(|(i, &e)| (format!("h{}", i + 1), e))
            .collect();
        Self::bernoulli(named)
    }

    pub fn bernoulli(named: impl IntoIterator<Item = (String, f64)>) -> Result<Self> {
        let entries = named
            .into_iter()
            .map(|(id, err)| {
                Ok(Hypothesis {
                    id,
                    dist: BernoulliSpec::new(err)?.to_empirical(),
                    err: Some(err),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    pub fn entries(&self) -> &[Hypothesis] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Fails on classes where only some entries carry an error probability.
    pub fn mode(&self) -> Result<ClassMode> {
        let with_err = self.entries.iter().filter(|h| h.err.is_some()).count();
        if with_err == 0 {
            return Ok(ClassMode::Unlabeled);
        }
        if with_err < self.entries.len() {
            return Err(Error::Input(format!(
                "mixed class: {with_err} of {} entries carry an error probability",
                self.entries.len()
            )));
        }
        let all_bernoulli = self.entries.iter().all(|h| {
            h.err
                .and_then(|e| BernoulliSpec::new(e).ok())
                .is_some_and(|b| b.to_empirical() == h.dist)
        });
        Ok(if all_bernoulli {
            ClassMode::Bernoulli
        } else {
            ClassMode::Surrogate
        })
    }

    fn errs(&self) -> Result<Vec<f64>> {
        self.mode()?;
        self.entries
            .iter()
            .map(|h| {
                h.err
                    .ok_or_else(|| Error::Input("class carries no error probabilities".into()))
            })
            .collect()
    }

    fn require_bernoulli(&self) -> Result<Vec<f64>> {
        match self.mode()? {
            ClassMode::Bernoulli => self.errs(),
            other => Err(Error::Input(format!(
                "operation needs a Bernoulli class, got {other:?}"
            ))),
        }
    }
}

/// Ids whose values are within `tol` of the minimum (absolute).
fn near_min(ids: &[&str], values: &[f64], tol: f64) -> IdSet {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    ids.iter()
        .zip(values)
        .filter(|(_, &v)| v - min <= tol)
        .map(|(id, _)| id.to_string())
        .collect()
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::param("tol", tol, "tie tolerance must be positive"))
    }
}

/// Criterion value of every entry, in class order.
pub fn criterion_values(spec: &CriterionSpec, class: &FiniteHypothesisClass) -> Result<Vec<f64>> {
    class
        .entries
        .iter()
        .map(|h| {
            eval_criterion(spec, &h.dist)
                .map(|r| r.value)
                .map_err(|e| match e {
                    Error::Domain(msg) => Error::Domain(format!("{}: {msg}", h.id)),
                    other => other,
                })
        })
        .collect()
}

pub fn argmin_set(spec: &CriterionSpec, class: &FiniteHypothesisClass, tol: f64) -> Result<IdSet> {
    check_tol(tol)?;
    let values = criterion_values(spec, class)?;
    Ok(near_min(&ids(class), &values, tol))
}

fn ids(class: &FiniteHypothesisClass) -> Vec<&str> {
    class.entries.iter().map(|h| h.id.as_str()).collect()
}

/// The relation between `Herr` and `argmin C` that theory predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollapseClaim {
    /// `Herr ⊆ argmin C`.
    Inclusion,
    /// `Herr = argmin C`.
    Equality,
    /// `Herr ∩ argmin C = ∅`.
    Disjoint,
}

impl fmt::Display for CollapseClaim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Self::Inclusion => "inclusion",
            Self::Equality => "equality",
            Self::Disjoint => "disjoint",
        })
    }
}

/// Prediction for zero-one losses, where every criterion below is a
/// function of the error probability alone.
pub fn bernoulli_claim(spec: &CriterionSpec) -> Option<CollapseClaim> {
    use CollapseClaim::*;
    match spec {
        CriterionSpec::Expected | CriterionSpec::Tilted { .. } | CriterionSpec::Orlicz { .. } => {
            Some(Equality)
        }
        CriterionSpec::Quantile { .. } | CriterionSpec::Cvar { .. } => Some(Inclusion),
        CriterionSpec::Oce { rho } => {
            let flags = rho.flags();
            if flags.increasing {
                Some(Equality)
            } else if flags.nondecreasing {
                Some(Inclusion)
            } else {
                None
            }
        }
        CriterionSpec::CressieReadDro { eps, .. } => {
            Some(if *eps == 0.0 { Equality } else { Inclusion })
        }
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntryValue {
    pub id: String,
    pub value: f64,
    pub err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollapseReport {
    pub criterion: String,
    pub mode: ClassMode,
    pub herr_set: IdSet,
    pub criterion_argmin: IdSet,
    /// `Herr ⊆ argmin C`.
    pub inclusion_12a: bool,
    /// `argmin C ⊆ Herr`.
    pub inclusion_12b: bool,
    pub equality: bool,
    /// `Herr ∩ argmin C = ∅`.
    pub disjoint: bool,
    pub tie_tolerance: f64,
    /// Max minus min criterion value over the class.
    pub spread: f64,
    pub values: Vec<EntryValue>,
    pub claim: Option<CollapseClaim>,
}

impl CollapseReport {
    pub fn satisfies(&self, claim: CollapseClaim) -> bool {
        match claim {
            CollapseClaim::Inclusion => self.inclusion_12a,
            CollapseClaim::Equality => self.equality,
            CollapseClaim::Disjoint => self.disjoint,
        }
    }

    /// Whether the predicted relation holds; `None` when nothing is predicted.
    pub fn claim_holds(&self) -> Option<bool> {
        self.claim.map(|c| self.satisfies(c))
    }

    /// Line-oriented `key: value` summary.
    pub fn to_text(&self) -> String {
        let set = |s: &IdSet| s.iter().cloned().collect::<Vec<_>>().join(",");
        let mut out = String::new();
        let _ = writeln!(out, "criterion: {}", self.criterion);
        let _ = writeln!(out, "mode: {:?}", self.mode);
        let _ = writeln!(out, "herr_set: {}", set(&self.herr_set));
        let _ = writeln!(out, "criterion_argmin: {}", set(&self.criterion_argmin));
        let _ = writeln!(out, "inclusion_12a: {}", self.inclusion_12a);
        let _ = writeln!(out, "inclusion_12b: {}", self.inclusion_12b);
        let _ = writeln!(out, "equality: {}", self.equality);
        let _ = writeln!(out, "disjoint: {}", self.disjoint);
        let _ = writeln!(out, "tie_tolerance: {}", num(self.tie_tolerance));
        let _ = writeln!(out, "spread: {}", num(self.spread));
        match self.claim {
            Some(c) => {
                let _ = writeln!(
                    out,
                    "claim: {c} ({})",
                    if self.satisfies(c) {
                        "holds"
                    } else {
                        "VIOLATED"
                    }
                );
            }
            None => {
                let _ = writeln!(out, "claim: none");
            }
        }
        out
    }

    /// `id,value,err` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,value,err\n");
        for e in &self.values {
            let err = e.err.map(num).unwrap_or_default();
            let _ = writeln!(out, "{},{},{}", e.id, num(e.value), err);
        }
        out
    }
}

/// Compares `argmin C` with the error-optimal set `Herr`.
///
/// In Bernoulli mode the report carries the theoretical prediction for
/// `spec`; surrogate-mode classes only get the raw set relations.
pub fn check_collapse(
    spec: &CriterionSpec,
    class: &FiniteHypothesisClass,
    tol: f64,
) -> Result<CollapseReport> {
    check_tol(tol)?;
    let mode = class.mode()?;
    let errs = class.errs()?;
    let values = criterion_values(spec, class)?;
    let ids = ids(class);
    let herr_set = near_min(&ids, &errs, tol);
    let criterion_argmin = near_min(&ids, &values, tol);
    let inclusion_12a = herr_set.is_subset(&criterion_argmin);
    let inclusion_12b = criterion_argmin.is_subset(&herr_set);
    let disjoint = herr_set.is_disjoint(&criterion_argmin);
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let claim = match mode {
        ClassMode::Bernoulli => bernoulli_claim(spec),
        _ => None,
    };
    Ok(CollapseReport {
        criterion: spec.to_string(),
        mode,
        herr_set,
        criterion_argmin,
        inclusion_12a,
        inclusion_12b,
        equality: inclusion_12a && inclusion_12b,
        disjoint,
        tie_tolerance: tol,
        spread: hi - lo,
        values: class
            .entries
            .iter()
            .zip(&values)
            .map(|(h, &value)| EntryValue {
                id: h.id.clone(),
                value,
                err: h.err,
            })
            .collect(),
        claim,
    })
}

/// `(argmin err, argmax err)` under the tie tolerance.
pub fn err_extreme_sets(class: &FiniteHypothesisClass, tol: f64) -> Result<(IdSet, IdSet)> {
    let errs = class.errs()?;
    let ids = ids(class);
    let neg: Vec<f64> = errs.iter().map(|e| -e).collect();
    Ok((near_min(&ids, &errs, tol), near_min(&ids, &neg, tol)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvarRegime {
    /// `min err > 1 - β`: every hypothesis has CVaR 1.
    TrivialAllOptimal,
    /// `max err <= 1 - β`: CVaR is `err/(1-β)` across the class.
    Coincide,
    Intermediate,
}

impl fmt::Display for CvarRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Self::TrivialAllOptimal => "trivial_all_optimal",
            Self::Coincide => "coincide",
            Self::Intermediate => "intermediate",
        })
    }
}

pub fn cvar_regime(class: &FiniteHypothesisClass, beta: f64) -> Result<CvarRegime> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::param("beta", beta, "must lie in (0, 1)"));
    }
    let errs = class.require_bernoulli()?;
    let min = errs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = errs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(if min > 1.0 - beta {
        CvarRegime::TrivialAllOptimal
    } else if max <= 1.0 - beta {
        CvarRegime::Coincide
    } else {
        CvarRegime::Intermediate
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariantileExtreme {
    ArgminOfErr,
    ArgmaxOfErr,
    /// The variantile argmin is the union of both extreme sets.
    Tie,
    /// Neither extreme set; not expected for zero-one losses.
    Mixed,
}

impl fmt::Display for VariantileExtreme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Self::ArgminOfErr => "argmin_of_err",
            Self::ArgmaxOfErr => "argmax_of_err",
            Self::Tie => "tie",
            Self::Mixed => "mixed",
        })
    }
}

pub fn variantile_extremes(
    class: &FiniteHypothesisClass,
    tau: f64,
    tol: f64,
) -> Result<VariantileExtreme> {
    class.require_bernoulli()?;
    let argmin = argmin_set(&CriterionSpec::variantile(tau)?, class, tol)?;
    let (emin, emax) = err_extreme_sets(class, tol)?;
    let both: IdSet = emin.union(&emax).cloned().collect();
    // Checked first so a class of equal errors reports a tie.
    Ok(if argmin == both {
        VariantileExtreme::Tie
    } else if argmin == emin {
        VariantileExtreme::ArgminOfErr
    } else if argmin == emax {
        VariantileExtreme::ArgmaxOfErr
    } else {
        VariantileExtreme::Mixed
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedFnExtreme {
    ErrMinimizers,
    ErrMaximizers,
    Constant,
}

impl fmt::Display for FixedFnExtreme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Self::ErrMinimizers => "err_minimizers",
            Self::ErrMaximizers => "err_maximizers",
            Self::Constant => "constant",
        })
    }
}

/// `E[f(L)]` is affine in the error probability with slope `f1 - f0`.
pub fn fixed_fn_extremes(f0: f64, f1: f64) -> FixedFnExtreme {
    if f1 > f0 {
        FixedFnExtreme::ErrMinimizers
    } else if f1 < f0 {
        FixedFnExtreme::ErrMaximizers
    } else {
        FixedFnExtreme::Constant
    }
}

/// Seeded generator of random Bernoulli classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomSuite {
    pub seed: u64,
    pub classes: usize,
    pub max_size: usize,
}

impl Default for RandomSuite {
    fn default() -> Self {
        Self {
            seed: 0,
            classes: 200,
            max_size: 50,
        }
    }
}

impl RandomSuite {
    /// Class sizes uniform on `1..=max_size`, errors uniform on `[0, 1)`.
    pub fn generate(&self) -> Result<Vec<FiniteHypothesisClass>> {
        if self.max_size == 0 {
            return Err(Error::Input("random classes need max_size >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.classes)
            .map(|_| {
                let size = rng.random_range(1..=self.max_size);
                let errs: Vec<f64> = (0..size).map(|_| rng.random::<f64>()).collect();
                FiniteHypothesisClass::from_errs(&errs)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteViolation {
    pub class_index: usize,
    pub criterion: String,
    pub claim: CollapseClaim,
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub seed: u64,
    pub checks: usize,
    pub violations: Vec<SuiteViolation>,
}

/// Checks `claim` for every `(class, spec)` pair, spreading classes over
/// `parallel` threads. Results do not depend on the thread count.
pub fn run_suite(
    suite: &RandomSuite,
    specs: &[(CriterionSpec, CollapseClaim)],
    tol: f64,
    parallel: usize,
) -> Result<SuiteOutcome> {
    let classes = suite.generate()?;
    let per_class = |i: usize| -> Result<Vec<SuiteViolation>> {
        let mut found = Vec::new();
        for (spec, claim) in specs {
            let report = check_collapse(spec, &classes[i], tol)?;
            if !report.satisfies(*claim) {
                found.push(SuiteViolation {
                    class_index: i,
                    criterion: report.criterion,
                    claim: *claim,
                    spread: report.spread,
                });
            }
        }
        Ok(found)
    };
    let per_class_results = parallel_map(classes.len(), parallel, per_class);
    let mut violations = Vec::new();
    for r in per_class_results {
        violations.extend(r?);
    }
    Ok(SuiteOutcome {
        seed: suite.seed,
        checks: classes.len() * specs.len(),
        violations,
    })
}
