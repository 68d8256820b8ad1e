//! Criterion mappings: functions sending a loss distribution to one number.
//!
//! Closed forms are used where they exist (expectation, quantiles, CVaR,
//! tilted risk, the loss-restraining maps). OCE-type criteria without a
//! closed form are minimized over the threshold `θ` by golden-section search;
//! expectiles are found by bisection on their first-order condition.

use std::fmt;
use std::str::FromStr;

use crate::dist::EmpiricalLossDist;
use crate::error::{Error, Result};
use crate::optim::{bisect, golden_section};
use crate::rho::{check_arity, cressie_read_consts, parse_arg, DispersionFunction, MAX_EXP_ARG};

/// Tolerance on `θ` (and `log σ`) for golden-section searches.
pub const THETA_TOL: f64 = 1e-10;
/// Tolerance on the expectile root.
pub const EXPECTILE_TOL: f64 = 1e-12;
/// Search range for the Orlicz scale, as `log σ`.
pub const ORLICZ_LOG_SIGMA_RANGE: (f64, f64) = (-10.0, 10.0);
const MAX_BRACKET_DOUBLINGS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum CriterionSpec {
    /// `E[L]`.
    Expected,
    /// `E[f(L)]` for `L` supported on `{0, 1}`, with `f(0) = f0`, `f(1) = f1`.
    FixedFn { f0: f64, f1: f64 },
    /// Left quantile at level `beta`.
    Quantile { beta: f64 },
    /// `inf_θ θ + E[ρ(L - θ)]` for a normalized, convex, non-decreasing `ρ`.
    Oce { rho: DispersionFunction },
    /// Conditional value-at-risk at level `beta`.
    Cvar { beta: f64 },
    /// `(1/γ) log E[e^{γL}]`.
    Tilted { gamma: f64 },
    /// Cressie-Read DRO in dual form.
    CressieReadDro { c: f64, eps: f64 },
    /// Orlicz-regret criterion with generator `f(u) = u log u - u + 1`.
    Orlicz { eps: f64 },
    /// Minimized asymmetric quadratic dispersion about the expectile.
    Variantile { tau: f64 },
    /// `ρ̃(E[L] - θ)`.
    InnerRestrain { rho: DispersionFunction, theta: f64 },
    /// `E[ρ̃(L - θ)]`.
    OuterRestrain { rho: DispersionFunction, theta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionResult {
    pub value: f64,
    /// Threshold attaining the infimum, for criteria defined through one.
    pub minimizer_theta: Option<f64>,
    /// Scale attaining the infimum (Orlicz only).
    pub minimizer_sigma: Option<f64>,
}

impl CriterionResult {
    fn plain(value: f64) -> Self {
        Self {
            value,
            minimizer_theta: None,
            minimizer_sigma: None,
        }
    }

    fn at(value: f64, theta: f64) -> Self {
        Self {
            value,
            minimizer_theta: Some(theta),
            minimizer_sigma: None,
        }
    }
}

impl CriterionSpec {
    pub fn quantile(beta: f64) -> Result<Self> {
        Self::Quantile { beta }.validated()
    }

    pub fn oce(rho: DispersionFunction) -> Result<Self> {
        Self::Oce { rho }.validated()
    }

    pub fn cvar(beta: f64) -> Result<Self> {
        Self::Cvar { beta }.validated()
    }

    pub fn tilted(gamma: f64) -> Result<Self> {
        Self::Tilted { gamma }.validated()
    }

    pub fn cressie_read_dro(c: f64, eps: f64) -> Result<Self> {
        Self::CressieReadDro { c, eps }.validated()
    }

    pub fn orlicz(eps: f64) -> Result<Self> {
        Self::Orlicz { eps }.validated()
    }

    pub fn variantile(tau: f64) -> Result<Self> {
        Self::Variantile { tau }.validated()
    }

    pub fn inner_restrain(rho: DispersionFunction, theta: f64) -> Result<Self> {
        Self::InnerRestrain { rho, theta }.validated()
    }

    pub fn outer_restrain(rho: DispersionFunction, theta: f64) -> Result<Self> {
        Self::OuterRestrain { rho, theta }.validated()
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Checks hyperparameter ranges and the shape requirements on `ρ`/`ρ̃`.
    pub fn validate(&self) -> Result<()> {
        let open_unit = |name, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::param(name, v, "must lie in (0, 1)"))
            }
        };
        match self {
            Self::Expected => Ok(()),
            Self::FixedFn { f0, f1 } => {
                if f0.is_finite() && f1.is_finite() {
                    Ok(())
                } else {
                    Err(Error::param("f0/f1", f0 + f1, "must be finite"))
                }
            }
            Self::Quantile { beta } | Self::Cvar { beta } => open_unit("beta", *beta),
            Self::Variantile { tau } => open_unit("tau", *tau),
            Self::Tilted { gamma } => {
                if *gamma != 0.0 && gamma.is_finite() {
                    Ok(())
                } else {
                    Err(Error::param("gamma", *gamma, "must be finite and nonzero"))
                }
            }
            Self::CressieReadDro { c, eps } => {
                DispersionFunction::cressie_read(*c, *eps).map(|_| ())
            }
            Self::Orlicz { eps } => {
                if *eps > 0.0 && eps.is_finite() {
                    Ok(())
                } else {
                    Err(Error::param("eps", *eps, "orlicz needs eps > 0"))
                }
            }
            Self::Oce { rho } => {
                if rho.flags().is_oce_admissible() {
                    Ok(())
                } else {
                    Err(Error::Precondition(format!(
                        "oce needs a normalized convex non-decreasing rho, got `{rho}`"
                    )))
                }
            }
            Self::InnerRestrain { rho, theta } | Self::OuterRestrain { rho, theta } => {
                if !theta.is_finite() {
                    return Err(Error::param("theta", *theta, "must be finite"));
                }
                if rho.flags().coercive_nonmonotone {
                    Ok(())
                } else {
                    Err(Error::Precondition(format!(
                        "loss-restraining criteria need a coercive non-monotone rho, got `{rho}`"
                    )))
                }
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Expected => "expected",
            Self::FixedFn { .. } => "fixed-fn",
            Self::Quantile { .. } => "quantile",
            Self::Oce { .. } => "oce",
            Self::Cvar { .. } => "cvar",
            Self::Tilted { .. } => "tilted",
            Self::CressieReadDro { .. } => "dro",
            Self::Orlicz { .. } => "orlicz",
            Self::Variantile { .. } => "variantile",
            Self::InnerRestrain { .. } => "inner",
            Self::OuterRestrain { .. } => "outer",
        }
    }
}

/// Evaluates `spec` on `dist`.
pub fn eval_criterion(spec: &CriterionSpec, dist: &EmpiricalLossDist) -> Result<CriterionResult> {
    spec.validate()?;
    match spec {
        CriterionSpec::Expected => Ok(CriterionResult::plain(dist.mean())),
        CriterionSpec::FixedFn { f0, f1 } => {
            if !dist.is_zero_one() {
                return Err(Error::Domain(
                    "fixed-function criterion needs a distribution supported on {0, 1}".into(),
                ));
            }
            let p = dist.mass_at(1.0);
            Ok(CriterionResult::plain(f0 + p * (f1 - f0)))
        }
        CriterionSpec::Quantile { beta } => Ok(CriterionResult::plain(dist.left_quantile(*beta)?)),
        CriterionSpec::Cvar { beta } => {
            let (value, theta) = cvar_closed_form(dist, *beta)?;
            Ok(CriterionResult::at(value, theta))
        }
        CriterionSpec::Tilted { gamma } => {
            let value = tilted_risk(dist, *gamma)?;
            // For γ > 0 this is the exponential-tilt OCE, whose minimizer is the value itself.
            Ok(if *gamma > 0.0 {
                CriterionResult::at(value, value)
            } else {
                CriterionResult::plain(value)
            })
        }
        CriterionSpec::Oce { rho } => {
            let (theta, value) = minimize_oce(rho, dist)?;
            Ok(CriterionResult::at(value, theta))
        }
        CriterionSpec::CressieReadDro { c, eps } => {
            if *eps == 0.0 {
                // Infimum only approached as θ → -∞; its limit is the mean.
                return Ok(CriterionResult::plain(dist.mean()));
            }
            let (theta, value) = minimize_dro(*c, *eps, dist)?;
            Ok(CriterionResult::at(value, theta))
        }
        CriterionSpec::Orlicz { eps } => minimize_orlicz(*eps, dist),
        CriterionSpec::Variantile { tau } => {
            let theta = expectile(dist, *tau)?;
            Ok(CriterionResult::at(variantile_at(dist, *tau, theta), theta))
        }
        CriterionSpec::InnerRestrain { rho, theta } => {
            Ok(CriterionResult::plain(rho.eval(dist.mean() - theta)?))
        }
        CriterionSpec::OuterRestrain { rho, theta } => {
            let mut total = 0.0;
            for (v, w) in dist.atoms() {
                total += w * rho.eval(v - theta)?;
            }
            Ok(CriterionResult::plain(total))
        }
    }
}

/// The objective whose infimum defines `spec`, evaluated at a given threshold
/// (and scale, for Orlicz). `None` for criteria without such an objective.
pub fn inner_objective(
    spec: &CriterionSpec,
    dist: &EmpiricalLossDist,
    theta: f64,
    sigma: Option<f64>,
) -> Result<Option<f64>> {
    let value = match spec {
        CriterionSpec::Oce { rho } => oce_objective(rho, dist, theta)?,
        CriterionSpec::Cvar { beta } => {
            theta + dist.expect(|v| (v - theta).max(0.0)) / (1.0 - beta)
        }
        CriterionSpec::Tilted { gamma } if *gamma > 0.0 => {
            oce_objective(&DispersionFunction::exp_tilt(*gamma)?, dist, theta)?
        }
        CriterionSpec::CressieReadDro { c, eps } => dro_objective(*c, *eps, dist, theta),
        CriterionSpec::Orlicz { eps } => match sigma {
            Some(sigma) => sigma * (eps + orlicz_inner_objective(dist, sigma, theta)),
            None => return Ok(None),
        },
        CriterionSpec::Variantile { tau } => variantile_at(dist, *tau, theta),
        _ => return Ok(None),
    };
    Ok(Some(value))
}

/// Rockafellar-Uryasev closed form: `θ* = Q_β(L)`, value `θ* + E[(L-θ*)₊]/(1-β)`.
fn cvar_closed_form(dist: &EmpiricalLossDist, beta: f64) -> Result<(f64, f64)> {
    let theta = dist.left_quantile(beta)?;
    let value = theta + dist.expect(|v| (v - theta).max(0.0)) / (1.0 - beta);
    Ok((value, theta))
}

/// `(1/γ) log Σ wᵢ e^{γvᵢ}` with the exponent shifted by its maximum.
fn tilted_risk(dist: &EmpiricalLossDist, gamma: f64) -> Result<f64> {
    let shift = if gamma > 0.0 { dist.max() } else { dist.min() };
    let sum: f64 = dist.expect(|v| (gamma * (v - shift)).exp());
    let value = shift + sum.ln() / gamma;
    if value.is_finite() && (gamma * shift).abs() <= f64::MAX {
        Ok(value)
    } else {
        Err(Error::Overflow(format!("tilted risk with gamma = {gamma}")))
    }
}

fn oce_objective(rho: &DispersionFunction, dist: &EmpiricalLossDist, theta: f64) -> Result<f64> {
    let mut total = theta;
    for (v, w) in dist.atoms() {
        total += w * rho.eval_or_inf(v - theta)?;
    }
    Ok(total)
}

fn minimize_oce(rho: &DispersionFunction, dist: &EmpiricalLossDist) -> Result<(f64, f64)> {
    golden_section(
        |theta| oce_objective(rho, dist, theta),
        dist.min() - 1.0,
        dist.max() + 1.0,
        THETA_TOL,
    )
}

fn dro_objective(c: f64, eps: f64, dist: &EmpiricalLossDist, theta: f64) -> f64 {
    let (scale, cstar) = cressie_read_consts(c, eps);
    let moment = dist.expect(|v| scale * (v - theta).max(0.0).powf(cstar));
    theta + moment.powf(1.0 / cstar)
}

fn minimize_dro(c: f64, eps: f64, dist: &EmpiricalLossDist) -> Result<(f64, f64)> {
    let f = |theta: f64| dro_objective(c, eps, dist, theta);
    let hi = dist.max() + 1.0;
    let mut lo = dist.min() - 1.0;
    let mut doublings = 0;
    // Widen leftward until the (convex) objective is decreasing at `lo`.
    loop {
        let width = hi - lo;
        if f(lo) > f(lo + 0.01 * width) {
            break;
        }
        if doublings == MAX_BRACKET_DOUBLINGS {
            return Err(Error::Numeric(format!(
                "cressie-read dro (c = {c}, eps = {eps}): no bracket after {doublings} doublings"
            )));
        }
        lo = hi - 2.0 * width;
        doublings += 1;
    }
    golden_section(|theta| Ok(f(theta)), lo, hi, THETA_TOL)
}

/// `θ + E[f*(L/σ - θ)]` with `f*(u) = e^u - 1`.
fn orlicz_inner_objective(dist: &EmpiricalLossDist, sigma: f64, theta: f64) -> f64 {
    theta
        + dist.expect(|v| {
            let x = v / sigma - theta;
            if x > MAX_EXP_ARG {
                f64::INFINITY
            } else {
                x.exp_m1()
            }
        })
}

fn minimize_orlicz(eps: f64, dist: &EmpiricalLossDist) -> Result<CriterionResult> {
    let inner = |sigma: f64| -> Result<(f64, f64)> {
        golden_section(
            |theta| Ok(orlicz_inner_objective(dist, sigma, theta)),
            dist.min() / sigma - 1.0,
            dist.max() / sigma + 1.0,
            THETA_TOL,
        )
    };
    let (lo, hi) = ORLICZ_LOG_SIGMA_RANGE;
    let (log_sigma, value) = golden_section(
        |log_sigma| {
            let sigma = log_sigma.exp();
            let (_, m) = inner(sigma)?;
            Ok(sigma * (eps + m))
        },
        lo,
        hi,
        THETA_TOL,
    )?;
    let sigma = log_sigma.exp();
    let (theta, _) = inner(sigma)?;
    Ok(CriterionResult {
        value,
        minimizer_theta: Some(theta),
        minimizer_sigma: Some(sigma),
    })
}

/// The `τ`-expectile: root of `(1-τ) E[(θ-L)₊] = τ E[(L-θ)₊]`.
pub fn expectile(dist: &EmpiricalLossDist, tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::param("tau", tau, "must lie in (0, 1)"));
    }
    if dist.len() == 1 {
        return Ok(dist.min());
    }
    let foc = |theta: f64| {
        (1.0 - tau) * dist.expect(|v| (theta - v).max(0.0))
            - tau * dist.expect(|v| (v - theta).max(0.0))
    };
    Ok(bisect(foc, dist.min(), dist.max(), EXPECTILE_TOL))
}

fn variantile_at(dist: &EmpiricalLossDist, tau: f64, theta: f64) -> f64 {
    2.0 * dist.expect(|v| {
        let below = if v <= theta { 1.0 } else { 0.0 };
        (below - tau).abs() * (v - theta).powi(2)
    })
}

/// Variantile of a Bernoulli(`p`) loss in closed form.
pub fn g_tau(tau: f64, p: f64) -> Result<f64> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::param("tau", tau, "must lie in (0, 1)"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param("p", p, "must lie in [0, 1]"));
    }
    let lower = (1.0 - tau) * (1.0 - p);
    let upper = tau * p;
    let denom = lower + upper;
    Ok(2.0 * (lower * (upper / denom).powi(2) + upper * (lower / denom).powi(2)))
}

impl fmt::Display for CriterionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = self.kind_name();
        match self {
            Self::Expected => f.pad(tag),
            Self::FixedFn { f0, f1 } => write!(f, "{tag}:{f0}:{f1}"),
            Self::Quantile { beta } | Self::Cvar { beta } => write!(f, "{tag}:{beta}"),
            Self::Oce { rho } => write!(f, "{tag}:{rho}"),
            Self::Tilted { gamma } => write!(f, "{tag}:{gamma}"),
            Self::CressieReadDro { c, eps } => write!(f, "{tag}:{c}:{eps}"),
            Self::Orlicz { eps } => write!(f, "{tag}:{eps}"),
            Self::Variantile { tau } => write!(f, "{tag}:{tau}"),
            Self::InnerRestrain { rho, theta } | Self::OuterRestrain { rho, theta } => {
                write!(f, "{tag}:{rho}:{theta}")
            }
        }
    }
}

impl FromStr for CriterionSpec {
    type Err = Error;

    /// Colon-separated: `expected`, `fixed-fn:f0:f1`, `quantile:β`,
    /// `oce:<rho>`, `cvar:β`, `tilted:γ`, `dro:c:ε`, `orlicz:ε`,
    /// `variantile:τ`, `inner:<rho>:θ`, `outer:<rho>:θ`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let arg = |i: usize| parse_arg(s, &parts, i);
        let arity = |n: usize| check_arity(s, &parts, n);
        let spec = match parts[0] {
            "expected" => {
                arity(0)?;
                Self::Expected
            }
            "fixed-fn" => {
                arity(2)?;
                Self::FixedFn {
                    f0: arg(1)?,
                    f1: arg(2)?,
                }
            }
            "quantile" => {
                arity(1)?;
                Self::Quantile { beta: arg(1)? }
            }
            "cvar" => {
                arity(1)?;
                Self::Cvar { beta: arg(1)? }
            }
            "tilted" => {
                arity(1)?;
                Self::Tilted { gamma: arg(1)? }
            }
            "dro" => {
                arity(2)?;
                Self::CressieReadDro {
                    c: arg(1)?,
                    eps: arg(2)?,
                }
            }
            "orlicz" => {
                arity(1)?;
                Self::Orlicz { eps: arg(1)? }
            }
            "variantile" => {
                arity(1)?;
                Self::Variantile { tau: arg(1)? }
            }
            "oce" => {
                if parts.len() < 2 {
                    return Err(Error::Input(format!("`{s}`: oce needs a rho")));
                }
                Self::Oce {
                    rho: parts[1..].join(":").parse()?,
                }
            }
            tag @ ("inner" | "outer") => {
                if parts.len() < 3 {
                    return Err(Error::Input(format!("`{s}`: expected {tag}:<rho>:<theta>")));
                }
                let rho = parts[1..parts.len() - 1].join(":").parse()?;
                let theta = arg(parts.len() - 1)?;
                if tag == "inner" {
                    Self::InnerRestrain { rho, theta }
                } else {
                    Self::OuterRestrain { rho, theta }
                }
            }
            other => return Err(Error::Input(format!("unknown criterion kind `{other}`"))),
        };
        spec.validated()
    }
}
