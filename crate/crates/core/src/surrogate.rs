//! Margin-based surrogate losses and small constructive examples.
//!
//! Everything here reduces a classifier to the distribution of its
//! surrogate loss `φ(Y·s(X))` on a finite input space, so the criteria and
//! collapse machinery can be applied directly.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::collapse::{
    check_collapse, CollapseClaim, CollapseReport, FiniteHypothesisClass, Hypothesis,
};
use crate::criteria::{eval_criterion, CriterionSpec};
use crate::dist::EmpiricalLossDist;
use crate::error::{Error, Result};
use crate::optim::golden_section;
use crate::rho::DispersionFunction;

/// `sign(u)` with `sign(0) = +1`.
pub fn sign(u: f64) -> f64 {
    if u >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MarginFlags {
    pub convex: bool,
    /// `φ'(0) < 0`.
    pub calibrated: bool,
    pub nonincreasing: bool,
    /// Losses grow without bound as the margin goes to `-∞`.
    pub unbounded_above: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginPenalty {
    /// `log(1 + e^{-u})`.
    Logistic,
    /// `e^{-u}`.
    Exponential,
    /// `max(0, 1 - u)`.
    Hinge,
    /// `(1 - u)²`.
    Quadratic,
    /// `|1 - u|⁵`.
    ArcX4,
    /// `1{u < 0}`.
    ZeroOne,
}

impl MarginPenalty {
    pub const ALL: [MarginPenalty; 6] = [
        Self::Logistic,
        Self::Exponential,
        Self::Hinge,
        Self::Quadratic,
        Self::ArcX4,
        Self::ZeroOne,
    ];

    /// Loss at margin `u`; may be `+inf` when the exponential overflows.
    pub fn value(&self, u: f64) -> f64 {
        match self {
            Self::Logistic => {
                if u > 0.0 {
                    (-u).exp().ln_1p()
                } else {
                    -u + u.exp().ln_1p()
                }
            }
            Self::Exponential => (-u).exp(),
            Self::Hinge => (1.0 - u).max(0.0),
            Self::Quadratic => (1.0 - u).powi(2),
            Self::ArcX4 => (1.0 - u).abs().powi(5),
            Self::ZeroOne => {
                if u < 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Derivative in `u`; the hinge kink at `u = 1` picks 0.
    pub fn deriv(&self, u: f64) -> f64 {
        match self {
            Self::Logistic => -1.0 / (1.0 + u.exp()),
            Self::Exponential => -(-u).exp(),
            Self::Hinge => {
                if u < 1.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Self::Quadratic => -2.0 * (1.0 - u),
            Self::ArcX4 => -5.0 * (1.0 - u).abs().powi(4) * sign(1.0 - u),
            Self::ZeroOne => 0.0,
        }
    }

    pub fn flags(&self) -> MarginFlags {
        let calibrated_convex = MarginFlags {
            convex: true,
            calibrated: true,
            nonincreasing: false,
            unbounded_above: true,
        };
        match self {
            Self::Logistic | Self::Exponential | Self::Hinge => MarginFlags {
                nonincreasing: true,
                ..calibrated_convex
            },
            Self::Quadratic | Self::ArcX4 => calibrated_convex,
            Self::ZeroOne => MarginFlags {
                nonincreasing: true,
                ..MarginFlags::default()
            },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Logistic => "logistic",
            Self::Exponential => "exponential",
            Self::Hinge => "hinge",
            Self::Quadratic => "quadratic",
            Self::ArcX4 => "arcx4",
            Self::ZeroOne => "zero-one",
        }
    }
}

impl fmt::Display for MarginPenalty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for MarginPenalty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s || (s == "zero_one" && *p == Self::ZeroOne))
            .ok_or_else(|| Error::Input(format!("unknown margin penalty `{s}`")))
    }
}

/// One of the two linear scorers of the three-point example.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scorer {
    /// `s(v₁, v₂) = v₂ - v₁`.
    S1,
    /// `s(v₁, v₂) = v₁ - v₂`.
    S2,
}

impl Scorer {
    pub fn score(&self, x: (f64, f64)) -> f64 {
        match self {
            Self::S1 => x.1 - x.0,
            Self::S2 => x.0 - x.1,
        }
    }
}

impl fmt::Display for Scorer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Self::S1 => "s1",
            Self::S2 => "s2",
        })
    }
}

/// Two inliers near the origin and one far outlier whose label is flipped
/// relative to the inliers' linear rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreePointExample {
    a: f64,
    p: f64,
}

impl ThreePointExample {
    pub fn new(a: f64, p: f64) -> Result<Self> {
        if !(a > 1.0 && a.is_finite()) {
            return Err(Error::param("a", a, "must be finite and > 1"));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::param("p", p, "must lie in (0, 1)"));
        }
        Ok(Self { a, p })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `(point, probability)` pairs.
    pub fn atoms(&self) -> [((f64, f64), f64); 3] {
        let (a, p) = (self.a, self.p);
        [
            ((-1.0, 1.0), p / 2.0),
            ((1.0, -1.0), p / 2.0),
            ((a, -a), 1.0 - p),
        ]
    }

    /// `sign(√2 - ‖x‖) · sign(v₂ - v₁)`.
    pub fn label(x: (f64, f64)) -> f64 {
        sign(2f64.sqrt() - x.0.hypot(x.1)) * sign(x.1 - x.0)
    }

    pub fn loss_dist(&self, scorer: Scorer, phi: MarginPenalty) -> Result<EmpiricalLossDist> {
        let (values, weights) = self
            .atoms()
            .iter()
            .map(|&(x, w)| (phi.value(Self::label(x) * scorer.score(x)), w))
            .unzip();
        EmpiricalLossDist::new(values, weights)
    }

    /// Logistic-loss distribution of `scorer`.
    pub fn surrogate_dist(&self, scorer: Scorer) -> EmpiricalLossDist {
        self.loss_dist(scorer, MarginPenalty::Logistic)
            .expect("logistic losses of a valid example are finite")
    }

    /// Zero-one error probability of `sign(scorer)`.
    pub fn err(&self, scorer: Scorer) -> f64 {
        self.atoms()
            .iter()
            .filter(|&&(x, _)| sign(scorer.score(x)) != Self::label(x))
            .map(|&(_, w)| w)
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Winner {
    S1,
    S2,
    Tie,
}

impl fmt::Display for Winner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Self::S1 => "s1",
            Self::S2 => "s2",
            Self::Tie => "tie",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceRow {
    pub criterion: String,
    pub s1: f64,
    pub s2: f64,
    pub winner: Winner,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceReport {
    pub example: ThreePointExample,
    pub err_s1: f64,
    pub err_s2: f64,
    /// `max loss(s2) < max loss(s1)`.
    pub max_loss_s2_below: bool,
    /// `min loss(s2) < min loss(s1)`.
    pub min_loss_s2_below: bool,
    pub rows: Vec<DivergenceRow>,
}

/// Values within this distance count as a tie between the two scorers.
pub const WINNER_TOL: f64 = 1e-9;

/// Evaluates each criterion on the logistic losses of both scorers.
pub fn divergence_report(
    ex: &ThreePointExample,
    specs: &[CriterionSpec],
) -> Result<DivergenceReport> {
    if ex.p <= 0.5 {
        return Err(Error::Precondition(format!(
            "divergence report needs p > 1/2, got {}",
            ex.p
        )));
    }
    let d1 = ex.surrogate_dist(Scorer::S1);
    let d2 = ex.surrogate_dist(Scorer::S2);
    let rows = specs
        .iter()
        .map(|spec| {
            let s1 = eval_criterion(spec, &d1)?.value;
            let s2 = eval_criterion(spec, &d2)?.value;
            let winner = if (s1 - s2).abs() <= WINNER_TOL {
                Winner::Tie
            } else if s1 < s2 {
                Winner::S1
            } else {
                Winner::S2
            };
            Ok(DivergenceRow {
                criterion: spec.to_string(),
                s1,
                s2,
                winner,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DivergenceReport {
        example: *ex,
        err_s1: ex.err(Scorer::S1),
        err_s2: ex.err(Scorer::S2),
        max_loss_s2_below: d2.max() < d1.max(),
        min_loss_s2_below: d2.min() < d1.min(),
        rows,
    })
}

impl DivergenceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("criterion,s1,s2,winner\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", r.criterion, r.s1, r.s2, r.winner);
        }
        out
    }

    /// Aligned text table followed by the error probabilities and ordering facts.
    pub fn to_table(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.criterion.len())
            .max()
            .unwrap_or(0)
            .max("criterion".len());
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:>12}  {:>12}  winner",
            "criterion", "s1", "s2"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<width$}  {:>12.6}  {:>12.6}  {}",
                r.criterion, r.s1, r.s2, r.winner
            );
        }
        let _ = writeln!(
            out,
            "err(s1) = {:.6}, err(s2) = {:.6}",
            self.err_s1, self.err_s2
        );
        let _ = writeln!(out, "max loss s2 < s1: {}", self.max_loss_s2_below);
        let _ = writeln!(out, "min loss s2 < s1: {}", self.min_loss_s2_below);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePoint {
    pub id: String,
    pub mass: f64,
    /// `P(Y = 1 | X = x)`.
    pub beta: f64,
}

/// Classification on a finite input space.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteClassificationProblem {
    points: Vec<DiscretePoint>,
}

impl DiscreteClassificationProblem {
    pub fn new(points: Vec<DiscretePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Input("problem has no points".into()));
        }
        for pt in &points {
            if !(pt.mass >= 0.0 && pt.mass.is_finite()) {
                return Err(Error::param("mass", pt.mass, "must be >= 0"));
            }
            if !(0.0..=1.0).contains(&pt.beta) {
                return Err(Error::param("beta", pt.beta, "must lie in [0, 1]"));
            }
        }
        let total: f64 = points.iter().map(|p| p.mass).sum();
        if (total - 1.0).abs() > crate::dist::WEIGHT_SUM_SLACK {
            return Err(Error::Input(format!("point masses sum to {total}, not 1")));
        }
        Ok(Self { points })
    }

    /// Points `x1, x2, ...` with the given masses and conditional probabilities.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .enumerate()
                .map(|(i, &(mass, beta))| DiscretePoint {
                    id: format!("x{}", i + 1),
                    mass,
                    beta,
                })
                .collect(),
        )
    }

    /// Equal masses.
    pub fn uniform(betas: &[f64]) -> Result<Self> {
        let m = 1.0 / betas.len().max(1) as f64;
        Self::from_pairs(&betas.iter().map(|&b| (m, b)).collect::<Vec<_>>())
    }

    pub fn points(&self) -> &[DiscretePoint] {
        &self.points
    }

    pub fn bayes_err(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.mass * p.beta.min(1.0 - p.beta))
            .sum()
    }

    /// Error of the classifier `sign(scores)`.
    pub fn err_of(&self, scores: &[f64]) -> f64 {
        self.points
            .iter()
            .zip(scores)
            .map(|(p, &s)| p.mass * if sign(s) > 0.0 { 1.0 - p.beta } else { p.beta })
            .sum()
    }

    /// Loss distribution of `φ(Y s(X))` for a score vector.
    pub fn loss_dist(&self, scores: &[f64], phi: MarginPenalty) -> Result<EmpiricalLossDist> {
        let mut values = Vec::with_capacity(2 * self.points.len());
        let mut weights = Vec::with_capacity(2 * self.points.len());
        for (p, &s) in self.points.iter().zip(scores) {
            values.extend([phi.value(s), phi.value(-s)]);
            weights.extend([p.mass * p.beta, p.mass * (1.0 - p.beta)]);
        }
        EmpiricalLossDist::new(values, weights)
    }
}

/// Small named problems (at most four points) used to exercise
/// [`oce_bayes_check`]: mixed masses, deterministic labels and near ties.
pub fn desk_problems() -> Vec<(&'static str, DiscreteClassificationProblem)> {
    let table: [(&'static str, &[(f64, f64)]); 6] = [
        ("two_point", &[(0.5, 0.8), (0.5, 0.3)]),
        ("skewed_mass", &[(0.7, 0.6), (0.3, 0.1)]),
        ("three_point", &[(0.2, 0.9), (0.5, 0.45), (0.3, 0.7)]),
        (
            "four_point",
            &[(0.1, 0.05), (0.2, 0.55), (0.3, 0.35), (0.4, 0.95)],
        ),
        ("deterministic", &[(0.25, 1.0), (0.25, 0.0), (0.5, 1.0)]),
        ("near_tie", &[(0.5, 0.52), (0.5, 0.48)]),
    ];
    table
        .iter()
        .map(|(name, pairs)| {
            (
                *name,
                DiscreteClassificationProblem::from_pairs(pairs).expect("valid desk problem"),
            )
        })
        .collect()
}

pub const MAX_BAYES_POINTS: usize = 8;
pub const DEFAULT_SWEEP_BUDGET: usize = 10_000;
const SCORE_RANGE: f64 = 20.0;
const REL_IMPROVEMENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct BayesCheck {
    pub achieved_err: f64,
    pub bayes_err: f64,
    pub scores: Vec<f64>,
    pub theta: f64,
    pub objective: f64,
    pub sweeps: usize,
}

/// Minimizes the OCE of `φ(Y s(X))` over all score vectors and `θ` by
/// coordinate descent, then reports the resulting classifier's error.
pub fn oce_bayes_check(
    problem: &DiscreteClassificationProblem,
    phi: MarginPenalty,
    rho: &DispersionFunction,
    budget: usize,
) -> Result<BayesCheck> {
    let rf = rho.flags();
    if !(rf.increasing && rf.is_oce_admissible()) {
        return Err(Error::Precondition(format!(
            "rho `{rho}` must be increasing"
        )));
    }
    let pf = phi.flags();
    if !(pf.calibrated && pf.convex) {
        return Err(Error::Precondition(format!(
            "phi `{phi}` must be calibrated and convex"
        )));
    }
    let k = problem.points.len();
    if k > MAX_BAYES_POINTS {
        return Err(Error::Precondition(format!(
            "at most {MAX_BAYES_POINTS} points supported, got {k}"
        )));
    }

    let point_term = |p: &DiscretePoint, s: f64, theta: f64| -> Result<f64> {
        let mut t = 0.0;
        for (w, loss) in [(p.beta, phi.value(s)), (1.0 - p.beta, phi.value(-s))] {
            if w > 0.0 {
                t += w * rho.eval_or_inf(loss - theta)?;
            }
        }
        Ok(p.mass * t)
    };
    let objective = |scores: &[f64], theta: f64| -> Result<f64> {
        let mut total = theta;
        for (p, &s) in problem.points.iter().zip(scores) {
            total += point_term(p, s, theta)?;
        }
        Ok(total)
    };

    let mut scores = vec![0.0; k];
    let mut theta = phi.value(0.0);
    let mut current = objective(&scores, theta)?;
    let mut sweeps = 0;
    while sweeps < budget {
        let previous = current;
        for (p, score) in problem.points.iter().zip(scores.iter_mut()) {
            let (s, _) = golden_section(
                |s| point_term(p, s, theta),
                -SCORE_RANGE,
                SCORE_RANGE,
                1e-10,
            )?;
            *score = s;
        }
        let losses: Vec<f64> = scores
            .iter()
            .flat_map(|&s| [phi.value(s), phi.value(-s)])
            .collect();
        let lo = losses.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = losses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (t, value) = golden_section(|t| objective(&scores, t), lo - 1.0, hi + 1.0, 1e-10)?;
        theta = t;
        current = value;
        sweeps += 1;
        if previous - current <= REL_IMPROVEMENT_TOL * previous.abs().max(1.0) {
            break;
        }
    }
    if !current.is_finite() {
        return Err(Error::Numeric(
            "oce objective is not finite at the optimum".into(),
        ));
    }
    Ok(BayesCheck {
        achieved_err: problem.err_of(&scores),
        bayes_err: problem.bayes_err(),
        scores,
        theta,
        objective: current,
        sweeps,
    })
}

/// A two-element surrogate class on which the err-optimal hypothesis loses
/// under a loss-restraining criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Prop4Witness {
    pub theta: f64,
    /// Scale of the err-suboptimal scorer (inner construction only).
    pub b: Option<f64>,
    pub class: FiniteHypothesisClass,
    pub report: CollapseReport,
}

pub const WITNESS_MAX_DOUBLINGS: u32 = 60;

fn check_witness_inputs(
    problem: &DiscreteClassificationProblem,
    phi: MarginPenalty,
    rho_tilde: &DispersionFunction,
) -> Result<()> {
    let pf = phi.flags();
    if !(pf.nonincreasing && pf.unbounded_above) {
        return Err(Error::Precondition(format!(
            "phi `{phi}` must be non-increasing and unbounded above"
        )));
    }
    if !rho_tilde.flags().coercive_nonmonotone {
        return Err(Error::Precondition(format!(
            "rho `{rho_tilde}` must be coercive and non-monotone"
        )));
    }
    if problem
        .points
        .iter()
        .any(|p| p.beta != 0.0 && p.beta != 1.0)
    {
        return Err(Error::Precondition("problem is not realizable".into()));
    }
    let side = |b: f64| problem.points.iter().any(|p| p.beta == b && p.mass > 0.0);
    if !(side(0.0) && side(1.0)) {
        return Err(Error::Precondition(
            "need positive mass on both sides of the Bayes boundary".into(),
        ));
    }
    Ok(())
}

/// Scores of unit magnitude agreeing with the (deterministic) labels.
fn bayes_unit_scores(problem: &DiscreteClassificationProblem) -> Vec<f64> {
    problem
        .points
        .iter()
        .map(|p| if p.beta == 1.0 { 1.0 } else { -1.0 })
        .collect()
}

fn finish_witness(
    problem: &DiscreteClassificationProblem,
    phi: MarginPenalty,
    spec: CriterionSpec,
    theta: f64,
    b: Option<f64>,
    other: (&str, Vec<f64>),
) -> Result<Prop4Witness> {
    let star = bayes_unit_scores(problem);
    let hyp = |id: &str, scores: &[f64]| -> Result<Hypothesis> {
        Ok(Hypothesis {
            id: id.to_string(),
            dist: problem.loss_dist(scores, phi)?,
            err: Some(problem.err_of(scores)),
        })
    };
    let class = FiniteHypothesisClass::new(vec![hyp("h_star", &star)?, hyp(other.0, &other.1)?])?;
    let mut report = check_collapse(&spec, &class, crate::collapse::DEFAULT_TIE_TOL)?;
    report.claim = Some(CollapseClaim::Disjoint);
    Ok(Prop4Witness {
        theta,
        b,
        class,
        report,
    })
}

/// Inner construction: pits the err-optimal scorer against a constant
/// scorer `+b`, with `b` the smallest power of two whose expected loss
/// exceeds `φ(0)`, and places `θ` at that expected loss.
pub fn prop4_witness_inner(
    problem: &DiscreteClassificationProblem,
    phi: MarginPenalty,
    rho_tilde: &DispersionFunction,
) -> Result<Prop4Witness> {
    check_witness_inputs(problem, phi, rho_tilde)?;
    let e: f64 = problem
        .points
        .iter()
        .filter(|p| p.beta == 0.0)
        .map(|p| p.mass)
        .sum();
    let phi0 = phi.value(0.0);
    let mut b = 1.0;
    let mut mean = f64::NAN;
    for k in 0..=WITNESS_MAX_DOUBLINGS {
        b = 2f64.powi(k as i32);
        mean = e * phi.value(-b) + (1.0 - e) * phi.value(b);
        if mean > phi0 {
            break;
        }
    }
    if !(mean > phi0 && mean.is_finite()) {
        return Err(Error::Numeric(format!(
            "no scale b <= 2^{WITNESS_MAX_DOUBLINGS} pushes the expected loss above phi(0)"
        )));
    }
    let theta = mean;
    let spec = CriterionSpec::inner_restrain(rho_tilde.clone(), theta)?;
    let tilde = vec![b; problem.points.len()];
    finish_witness(problem, phi, spec, theta, Some(b), ("h_tilde", tilde))
}

/// Outer construction: the err-optimal scorer flipped in sign, with
/// `θ = φ(-1)` so the flipped scorer's constant loss sits at the threshold.
pub fn prop4_witness_outer(
    problem: &DiscreteClassificationProblem,
    phi: MarginPenalty,
    rho_tilde: &DispersionFunction,
) -> Result<Prop4Witness> {
    check_witness_inputs(problem, phi, rho_tilde)?;
    let theta = phi.value(-1.0);
    let spec = CriterionSpec::outer_restrain(rho_tilde.clone(), theta)?;
    let flipped = bayes_unit_scores(problem).iter().map(|s| -s).collect();
    finish_witness(problem, phi, spec, theta, None, ("h_flipped", flipped))
}
