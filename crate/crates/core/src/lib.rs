//! Learning criteria over loss distributions.
//!
//! The crate evaluates risk-style criteria (expectation, quantiles, CVaR,
//! tilted risk, OCEs, Cressie-Read DRO, Orlicz regret, variantiles and the
//! loss-restraining maps behind Flooding and SoftAD) on finite loss
//! distributions, checks when their argmin sets collapse onto plain error
//! minimization, and trains small scorers with the matching gradient
//! methods. The `critlab` binary exposes the same pieces as four
//! subcommands driven by `key = value` config files.

pub mod collapse;
pub mod criteria;
pub mod dist;
pub mod error;
pub mod harness;
pub mod parallel;
pub mod rho;
pub mod surrogate;
pub mod train;

mod optim;

pub use collapse::{
    argmin_set, bernoulli_claim, check_collapse, CollapseClaim, CollapseReport,
    FiniteHypothesisClass, Hypothesis,
};
pub use criteria::{eval_criterion, CriterionResult, CriterionSpec};
pub use dist::{BernoulliSpec, EmpiricalLossDist};
pub use error::{Error, Result};
pub use rho::DispersionFunction;
pub use surrogate::MarginPenalty;
