//! Scalar dispersion functions.
//!
//! Two families live here. Monotone `ρ` (identity, CVaR hinge, exponential
//! tilt, Cressie-Read power) build OCE-type and DRO criteria. Coercive,
//! non-monotone `ρ̃` (absolute value, pseudo-Huber, quadratic) build the
//! loss-restraining criteria behind Flooding and SoftAD.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest argument for which `exp` stays finite.
pub(crate) const MAX_EXP_ARG: f64 = 709.782_712_893_384;

/// Declared shape properties of a dispersion function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ShapeFlags {
    pub nondecreasing: bool,
    pub increasing: bool,
    pub convex: bool,
    /// `ρ(0) = 0` and `1 ∈ ∂ρ(0)`.
    pub normalized: bool,
    /// Coercive with minimum 0 at the origin; valid as `ρ̃`.
    pub coercive_nonmonotone: bool,
}

impl ShapeFlags {
    /// Requirements for the dispersion inside an OCE criterion.
    pub fn is_oce_admissible(&self) -> bool {
        self.nondecreasing && self.convex && self.normalized
    }
}

/// Extension hook for dispersion functions outside the built-in catalog.
pub trait DispersionFn: Send + Sync + fmt::Debug {
    fn name(&self) -> String;
    fn value(&self, u: f64) -> Result<f64>;
    fn deriv(&self, u: f64) -> Result<f64>;
    fn flags(&self) -> ShapeFlags;
}

#[derive(Debug, Clone)]
pub enum DispersionFunction {
    /// `ρ(u) = u`.
    Identity,
    /// `ρ(u) = max(0, u) / (1 - β)`.
    CvarHinge {
        beta: f64,
    },
    /// `ρ(u) = (e^{γu} - 1) / γ`.
    ExpTilt {
        gamma: f64,
    },
    /// `ρ(u) = (1 + c(c-1)ε)^{c*/c} max(0, u)^{c*}`, `c* = c/(c-1)`.
    CressieRead {
        c: f64,
        eps: f64,
    },
    /// `ρ̃(u) = |u|`.
    Abs,
    /// `ρ̃(u) = √(u² + 1) - 1`.
    PseudoHuber,
    /// `ρ̃(u) = u²`.
    Quadratic,
    Custom(Arc<dyn DispersionFn>),
}

impl DispersionFunction {
    pub fn cvar_hinge(beta: f64) -> Result<Self> {
        if beta > 0.0 && beta < 1.0 {
            Ok(Self::CvarHinge { beta })
        } else {
            Err(Error::param("beta", beta, "cvar hinge needs 0 < beta < 1"))
        }
    }

    pub fn exp_tilt(gamma: f64) -> Result<Self> {
        if gamma > 0.0 && gamma.is_finite() {
            Ok(Self::ExpTilt { gamma })
        } else {
            Err(Error::param(
                "gamma",
                gamma,
                "exponential tilt needs gamma > 0",
            ))
        }
    }

    pub fn cressie_read(c: f64, eps: f64) -> Result<Self> {
        if !(c > 1.0 && c.is_finite()) {
            return Err(Error::param("c", c, "cressie-read needs c > 1"));
        }
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::param("eps", eps, "cressie-read needs eps >= 0"));
        }
        Ok(Self::CressieRead { c, eps })
    }

    /// Canonical kind tag used by the config grammar.
    pub fn kind_name(&self) -> String {
        match self {
            Self::Identity => "identity".into(),
            Self::CvarHinge { .. } => "cvar".into(),
            Self::ExpTilt { .. } => "tilt".into(),
            Self::CressieRead { .. } => "cressie-read".into(),
            Self::Abs => "abs".into(),
            Self::PseudoHuber => "pseudo-huber".into(),
            Self::Quadratic => "quadratic".into(),
            Self::Custom(f) => f.name(),
        }
    }

    pub fn flags(&self) -> ShapeFlags {
        let monotone = |increasing, normalized| ShapeFlags {
            nondecreasing: true,
            increasing,
            convex: true,
            normalized,
            coercive_nonmonotone: false,
        };
        let restraining = ShapeFlags {
            convex: true,
            coercive_nonmonotone: true,
            ..ShapeFlags::default()
        };
        match self {
            Self::Identity | Self::ExpTilt { .. } => monotone(true, true),
            Self::CvarHinge { .. } => monotone(false, true),
            Self::CressieRead { .. } => monotone(false, false),
            Self::Abs | Self::PseudoHuber | Self::Quadratic => restraining,
            Self::Custom(f) => f.flags(),
        }
    }

    pub fn eval(&self, u: f64) -> Result<f64> {
        let v = match *self {
            Self::Identity => u,
            Self::CvarHinge { beta } => u.max(0.0) / (1.0 - beta),
            Self::ExpTilt { gamma } => {
                let x = gamma * u;
                if x > MAX_EXP_ARG {
                    return Err(overflow(self, u));
                }
                x.exp_m1() / gamma
            }
            Self::CressieRead { c, eps } => {
                let (scale, cstar) = cressie_read_consts(c, eps);
                scale * u.max(0.0).powf(cstar)
            }
            Self::Abs => u.abs(),
            Self::PseudoHuber => {
                let h = u.hypot(1.0);
                if u.abs() < 1.0 {
                    u * u / (h + 1.0)
                } else {
                    h - 1.0
                }
            }
            Self::Quadratic => u * u,
            Self::Custom(ref f) => return f.value(u),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(overflow(self, u))
        }
    }

    /// Derivative, with fixed subgradient picks at kinks: `0` for the CVaR
    /// hinge and `|·|` at the origin.
    pub fn deriv(&self, u: f64) -> Result<f64> {
        let d = match *self {
            Self::Identity => 1.0,
            Self::CvarHinge { beta } => {
                if u > 0.0 {
                    1.0 / (1.0 - beta)
                } else {
                    0.0
                }
            }
            Self::ExpTilt { gamma } => {
                let x = gamma * u;
                if x > MAX_EXP_ARG {
                    return Err(overflow(self, u));
                }
                x.exp()
            }
            Self::CressieRead { c, eps } => {
                let (scale, cstar) = cressie_read_consts(c, eps);
                scale * cstar * u.max(0.0).powf(cstar - 1.0)
            }
            Self::Abs => {
                if u > 0.0 {
                    1.0
                } else if u < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Self::PseudoHuber => u / u.hypot(1.0),
            Self::Quadratic => 2.0 * u,
            Self::Custom(ref f) => return f.deriv(u),
        };
        if d.is_finite() {
            Ok(d)
        } else {
            Err(overflow(self, u))
        }
    }

    /// Value with overflow mapped to `+inf`, for use inside minimizations.
    pub(crate) fn eval_or_inf(&self, u: f64) -> Result<f64> {
        match self.eval(u) {
            Err(Error::Overflow(_)) => Ok(f64::INFINITY),
            other => other,
        }
    }
}

/// `(scale, c*)` for the Cressie-Read power dispersion.
pub(crate) fn cressie_read_consts(c: f64, eps: f64) -> (f64, f64) {
    let cstar = c / (c - 1.0);
    let scale = (1.0 + c * (c - 1.0) * eps).powf(cstar / c);
    (scale, cstar)
}

fn overflow(f: &DispersionFunction, u: f64) -> Error {
    Error::Overflow(format!("{f} at u = {u}"))
}

impl PartialEq for DispersionFunction {
    fn eq(&self, other: &Self) -> bool {
        use DispersionFunction::*;
        match (self, other) {
            (Identity, Identity) | (Abs, Abs) | (PseudoHuber, PseudoHuber) => true,
            (Quadratic, Quadratic) => true,
            (CvarHinge { beta: a }, CvarHinge { beta: b }) => a == b,
            (ExpTilt { gamma: a }, ExpTilt { gamma: b }) => a == b,
            (CressieRead { c: c1, eps: e1 }, CressieRead { c: c2, eps: e2 }) => {
                c1 == c2 && e1 == e2
            }
            (Custom(a), Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl fmt::Display for DispersionFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::CvarHinge { beta } => write!(f, "cvar:{beta}"),
            Self::ExpTilt { gamma } => write!(f, "tilt:{gamma}"),
            Self::CressieRead { c, eps } => write!(f, "cressie-read:{c}:{eps}"),
            other => f.pad(&other.kind_name()),
        }
    }
}

impl FromStr for DispersionFunction {
    type Err = Error;

    /// Parses `identity`, `cvar:β`, `tilt:γ`, `cressie-read:c:ε`, `abs`,
    /// `pseudo-huber`, `quadratic`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').map(str::trim).collect();
        let arg = |i: usize| -> Result<f64> { parse_arg(s, &parts, i) };
        let arity = |n: usize| -> Result<()> { check_arity(s, &parts, n) };
        match parts[0] {
            "identity" => arity(0).map(|_| Self::Identity),
            "abs" => arity(0).map(|_| Self::Abs),
            "pseudo-huber" => arity(0).map(|_| Self::PseudoHuber),
            "quadratic" => arity(0).map(|_| Self::Quadratic),
            "cvar" => {
                arity(1)?;
                Self::cvar_hinge(arg(1)?)
            }
            "tilt" => {
                arity(1)?;
                Self::exp_tilt(arg(1)?)
            }
            "cressie-read" => {
                arity(2)?;
                Self::cressie_read(arg(1)?, arg(2)?)
            }
            other => Err(Error::Input(format!("unknown dispersion kind `{other}`"))),
        }
    }
}

pub(crate) fn parse_arg(whole: &str, parts: &[&str], i: usize) -> Result<f64> {
    let raw = parts
        .get(i)
        .ok_or_else(|| Error::Input(format!("`{whole}`: missing argument {i}")))?;
    raw.parse::<f64>()
        .map_err(|_| Error::Input(format!("`{whole}`: `{raw}` is not a number")))
}

pub(crate) fn check_arity(whole: &str, parts: &[&str], n: usize) -> Result<()> {
    if parts.len() == n + 1 {
        Ok(())
    } else {
        Err(Error::Input(format!(
            "`{whole}`: expected {n} argument(s), found {}",
            parts.len() - 1
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog() -> Vec<DispersionFunction> {
        vec![
            DispersionFunction::Identity,
            DispersionFunction::cvar_hinge(0.3).unwrap(),
            DispersionFunction::exp_tilt(1.5).unwrap(),
            DispersionFunction::cressie_read(2.0, 0.5).unwrap(),
            DispersionFunction::cressie_read(3.0, 0.1).unwrap(),
            DispersionFunction::Abs,
            DispersionFunction::PseudoHuber,
            DispersionFunction::Quadratic,
        ]
    }

    #[test]
    fn eval_examples() {
        let tilt = DispersionFunction::exp_tilt(1.0).unwrap();
        assert_eq!(tilt.eval(0.0).unwrap(), 0.0);
        let hinge = DispersionFunction::cvar_hinge(0.5).unwrap();
        assert!((hinge.eval(0.2).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(DispersionFunction::PseudoHuber.eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn deriv_examples() {
        assert_eq!(DispersionFunction::PseudoHuber.deriv(0.0).unwrap(), 0.0);
        let tilt = DispersionFunction::exp_tilt(2.0).unwrap();
        assert_eq!(tilt.deriv(0.0).unwrap(), 1.0);
        assert_eq!(DispersionFunction::Abs.deriv(-3.0).unwrap(), -1.0);
        assert_eq!(DispersionFunction::Abs.deriv(0.0).unwrap(), 0.0);
        let hinge = DispersionFunction::cvar_hinge(0.5).unwrap();
        assert_eq!(hinge.deriv(0.0).unwrap(), 0.0);
    }

    #[test]
    fn tilt_overflow_is_reported() {
        let tilt = DispersionFunction::exp_tilt(10.0).unwrap();
        assert!(matches!(tilt.eval(100.0), Err(Error::Overflow(_))));
        assert!(matches!(tilt.deriv(100.0), Err(Error::Overflow(_))));
        assert_eq!(tilt.eval_or_inf(100.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn constructors_reject_bad_parameters() {
        assert!(DispersionFunction::cvar_hinge(0.0).is_err());
        assert!(DispersionFunction::cvar_hinge(1.0).is_err());
        assert!(DispersionFunction::exp_tilt(0.0).is_err());
        assert!(DispersionFunction::exp_tilt(-1.0).is_err());
        assert!(DispersionFunction::cressie_read(1.0, 0.1).is_err());
        assert!(DispersionFunction::cressie_read(2.0, -0.1).is_err());
    }

    #[test]
    fn flags_match_kinds() {
        let f = DispersionFunction::cvar_hinge(0.5).unwrap().flags();
        assert!(f.nondecreasing && !f.increasing && f.convex && f.normalized);
        let f = DispersionFunction::exp_tilt(1.0).unwrap().flags();
        assert!(f.increasing && f.is_oce_admissible());
        let f = DispersionFunction::cressie_read(2.0, 0.1).unwrap().flags();
        assert!(f.nondecreasing && !f.normalized && !f.is_oce_admissible());
        for f in [
            DispersionFunction::Abs,
            DispersionFunction::PseudoHuber,
            DispersionFunction::Quadratic,
        ] {
            let flags = f.flags();
            assert!(flags.coercive_nonmonotone && !flags.nondecreasing);
            assert_eq!(f.eval(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn string_round_trip() {
        for f in catalog() {
            let parsed: DispersionFunction = f.to_string().parse().unwrap();
            assert_eq!(parsed, f);
        }
        assert!("tilt".parse::<DispersionFunction>().is_err());
        assert!("tilt:x".parse::<DispersionFunction>().is_err());
        assert!("huber".parse::<DispersionFunction>().is_err());
        assert!("abs:1".parse::<DispersionFunction>().is_err());
    }

    #[test]
    fn custom_hook_dispatches() {
        #[derive(Debug)]
        struct Softplus;
        impl DispersionFn for Softplus {
            fn name(&self) -> String {
                "softplus".into()
            }
            fn value(&self, u: f64) -> Result<f64> {
                Ok((1.0 + u.exp()).ln())
            }
            fn deriv(&self, u: f64) -> Result<f64> {
                Ok(1.0 / (1.0 + (-u).exp()))
            }
            fn flags(&self) -> ShapeFlags {
                ShapeFlags {
                    nondecreasing: true,
                    increasing: true,
                    convex: true,
                    ..ShapeFlags::default()
                }
            }
        }
        let f = DispersionFunction::Custom(Arc::new(Softplus));
        assert_eq!(f.kind_name(), "softplus");
        assert!((f.eval(0.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(f.deriv(0.0).unwrap(), 0.5);
        assert!(!f.flags().is_oce_admissible());
    }
}
