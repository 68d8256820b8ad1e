//! Update rules: each method turns per-example losses and gradients into a
//! descent direction, and SGD with momentum turns that into a step.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rho::{check_arity, cressie_read_consts, parse_arg, DispersionFunction};
use crate::surrogate::sign;
use crate::train::data::Dataset;
use crate::train::model::{LossKind, Model, PerExample};

/// Floor on the DRO moment before its fractional power.
pub const DRO_MOMENT_FLOOR: f64 = 1e-12;
/// The DRO trainer uses the `c = 2` Cressie-Read family.
pub const DRO_C: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Erm,
    Tilted {
        gamma: f64,
    },
    /// CVaR with `θ` trained jointly.
    Cvar {
        beta: f64,
    },
    /// Cressie-Read DRO (`c = 2`) with `θ` trained jointly.
    Dro {
        eps: f64,
    },
    Flooding {
        theta: f64,
    },
    SoftAd {
        theta: f64,
    },
}

impl Method {
    pub fn validate(&self) -> Result<()> {
        let finite = |name, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, v, "must be finite"))
            }
        };
        match *self {
            Self::Erm => Ok(()),
            Self::Tilted { gamma } => finite("gamma", gamma),
            Self::Cvar { beta } => {
                if (0.0..1.0).contains(&beta) {
                    Ok(())
                } else {
                    Err(Error::param("beta", beta, "must lie in [0, 1)"))
                }
            }
            Self::Dro { eps } => {
                if eps >= 0.0 && eps.is_finite() {
                    Ok(())
                } else {
                    Err(Error::param("eps", eps, "must be >= 0"))
                }
            }
            Self::Flooding { theta } | Self::SoftAd { theta } => finite("theta", theta),
        }
    }

    /// Whether a threshold is trained alongside the parameters.
    pub fn has_joint_theta(&self) -> bool {
        match *self {
            Self::Cvar { .. } => true,
            Self::Dro { eps } => eps > 0.0,
            _ => false,
        }
    }

    /// Descent direction for the parameters and, for joint methods, for `θ`.
    pub fn direction(
        &self,
        batch: &PerExample,
        theta: Option<f64>,
    ) -> Result<(Vec<f64>, Option<f64>)> {
        let n = batch.len() as f64;
        let uniform = vec![1.0 / n; batch.len()];
        let joint_theta =
            || theta.ok_or_else(|| Error::Precondition("joint method without θ".into()));
        Ok(match *self {
            Self::Erm => (batch.weighted_grad(&uniform), None),
            Self::Dro { eps: 0.0 } => (batch.weighted_grad(&uniform), None),
            Self::Tilted { gamma } => (
                batch.weighted_grad(&tilt_weights(&batch.losses, gamma)),
                None,
            ),
            Self::Cvar { beta } => {
                let theta = joint_theta()?;
                let scale = 1.0 / (n * (1.0 - beta));
                let w: Vec<f64> = batch
                    .losses
                    .iter()
                    .map(|&l| if l > theta { scale } else { 0.0 })
                    .collect();
                let above = w.iter().filter(|&&x| x > 0.0).count() as f64;
                (batch.weighted_grad(&w), Some(1.0 - above * scale))
            }
            Self::Dro { eps } => {
                let theta = joint_theta()?;
                let (scale, cstar) = cressie_read_consts(DRO_C, eps);
                let excess: Vec<f64> = batch.losses.iter().map(|&l| (l - theta).max(0.0)).collect();
                let moment = excess.iter().map(|e| scale * e.powf(cstar)).sum::<f64>() / n;
                let outer = moment.max(DRO_MOMENT_FLOOR).powf(1.0 / cstar - 1.0) / cstar;
                let w: Vec<f64> = excess
                    .iter()
                    .map(|e| outer * scale * cstar * e.powf(cstar - 1.0) / n)
                    .collect();
                let theta_dir = 1.0 - w.iter().sum::<f64>();
                (batch.weighted_grad(&w), Some(theta_dir))
            }
            Self::Flooding { theta } => {
                let s = sign(batch.mean_loss() - theta);
                let mut g = batch.weighted_grad(&uniform);
                g.iter_mut().for_each(|v| *v *= s);
                (g, None)
            }
            Self::SoftAd { theta } => {
                let rho = DispersionFunction::PseudoHuber;
                let w = batch
                    .losses
                    .iter()
                    .map(|&l| Ok(rho.deriv(l - theta)? / n))
                    .collect::<Result<Vec<f64>>>()?;
                (batch.weighted_grad(&w), None)
            }
        })
    }

    /// Value of the batch objective whose gradient [`Method::direction`]
    /// returns, for fixed `θ` (Flooding has none: its rule is a sub-gradient
    /// method on `|mean - θ|`, whose value is returned instead).
    pub fn objective(&self, losses: &[f64], theta: Option<f64>) -> f64 {
        let n = losses.len() as f64;
        let mean = losses.iter().sum::<f64>() / n;
        match *self {
            Self::Erm => mean,
            Self::Dro { eps: 0.0 } => mean,
            Self::Tilted { gamma } => {
                if gamma == 0.0 {
                    return mean;
                }
                let m = losses
                    .iter()
                    .map(|l| gamma * l)
                    .fold(f64::NEG_INFINITY, f64::max);
                (m + (losses.iter().map(|l| (gamma * l - m).exp()).sum::<f64>() / n).ln()) / gamma
            }
            Self::Cvar { beta } => {
                let t = theta.unwrap_or(mean);
                t + losses.iter().map(|l| (l - t).max(0.0)).sum::<f64>() / (n * (1.0 - beta))
            }
            Self::Dro { eps } => {
                let t = theta.unwrap_or(mean);
                let (scale, cstar) = cressie_read_consts(DRO_C, eps);
                let m = losses
                    .iter()
                    .map(|l| scale * (l - t).max(0.0).powf(cstar))
                    .sum::<f64>()
                    / n;
                t + m.powf(1.0 / cstar)
            }
            Self::Flooding { theta } => (mean - theta).abs(),
            Self::SoftAd { theta } => {
                let rho = DispersionFunction::PseudoHuber;
                losses
                    .iter()
                    .map(|l| rho.eval(l - theta).unwrap_or(f64::INFINITY))
                    .sum::<f64>()
                    / n
            }
        }
    }
}

/// `softmax(γ L)`; uniform at `γ = 0`.
pub fn tilt_weights(losses: &[f64], gamma: f64) -> Vec<f64> {
    let n = losses.len();
    if gamma == 0.0 {
        return vec![1.0 / n as f64; n];
    }
    let m = losses
        .iter()
        .map(|l| gamma * l)
        .fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = losses.iter().map(|l| (gamma * l - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|v| v / z).collect()
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Erm => f.pad("erm"),
            Self::Tilted { gamma } => write!(f, "tilted:{gamma}"),
            Self::Cvar { beta } => write!(f, "cvar:{beta}"),
            Self::Dro { eps } => write!(f, "dro:{eps}"),
            Self::Flooding { theta } => write!(f, "flooding:{theta}"),
            Self::SoftAd { theta } => write!(f, "softad:{theta}"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    /// `erm`, `tilted:γ`, `cvar:β`, `dro:ε`, `flooding:θ`, `softad:θ`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let arg = || -> Result<f64> {
            check_arity(s, &parts, 1)?;
            parse_arg(s, &parts, 1)
        };
        let m = match parts[0] {
            "erm" => {
                check_arity(s, &parts, 0)?;
                Self::Erm
            }
            "tilted" => Self::Tilted { gamma: arg()? },
            "cvar" => Self::Cvar { beta: arg()? },
            "dro" => Self::Dro { eps: arg()? },
            "flooding" => Self::Flooding { theta: arg()? },
            "softad" => Self::SoftAd { theta: arg()? },
            other => return Err(Error::Input(format!("unknown training method `{other}`"))),
        };
        m.validate()?;
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub method: Method,
    pub loss: LossKind,
    pub step_size: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            method: Method::Erm,
            loss: LossKind::Margin(crate::surrogate::MarginPenalty::Logistic),
            step_size: 0.1,
            momentum: 0.9,
            epochs: 100,
            batch_size: 100,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.method.validate()?;
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::param(
                "step_size",
                self.step_size,
                "must be positive",
            ));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::param(
                "momentum",
                self.momentum,
                "must lie in [0, 1)",
            ));
        }
        if self.batch_size == 0 {
            return Err(Error::Input("batch_size must be positive".into()));
        }
        Ok(())
    }
}

/// Momentum buffer over the joint vector `(params, θ)` and the current `θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepState {
    buf: Vec<f64>,
    theta: Option<f64>,
}

impl StepState {
    pub fn new(model: &Model, method: &Method) -> Self {
        Self {
            buf: vec![0.0; model.n_params() + usize::from(method.has_joint_theta())],
            theta: None,
        }
    }

    pub fn theta(&self) -> Option<f64> {
        self.theta
    }
}

/// One SGD-with-momentum update on a batch. Returns the applied change to
/// the joint vector (params, then `θ` for joint methods).
pub fn step(
    model: &mut Model,
    state: &mut StepState,
    data: &Dataset,
    idx: &[usize],
    config: &TrainConfig,
) -> Result<Vec<f64>> {
    let batch = model.loss_and_grad(data, idx, config.loss)?;
    let method = config.method;
    if method.has_joint_theta() && state.theta.is_none() {
        state.theta = Some(batch.mean_loss());
    }
    let (mut dir, theta_dir) = method.direction(&batch, state.theta)?;
    dir.extend(theta_dir);
    let delta: Vec<f64> = state
        .buf
        .iter_mut()
        .zip(&dir)
        .map(|(b, d)| {
            *b = config.momentum * *b + d;
            -config.step_size * *b
        })
        .collect();
    let p = model.n_params();
    for (w, d) in model.params_mut().iter_mut().zip(&delta[..p]) {
        *w += d;
    }
    if let (Some(t), Some(d)) = (state.theta.as_mut(), delta.get(p)) {
        *t += d;
    }
    Ok(delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tilt_weights_are_a_distribution() {
        for gamma in [-50.0, -1.0, 0.0, 1e-8, 2.0, 700.0] {
            let w = tilt_weights(&[0.1, 3.0, 2.5, 1000.0], gamma);
            assert!(w.iter().all(|&x| x >= 0.0));
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn method_strings_round_trip() {
        for m in [
            Method::Erm,
            Method::Tilted { gamma: 0.5 },
            Method::Cvar { beta: 0.3 },
            Method::Dro { eps: 0.125 },
            Method::Flooding { theta: 0.3 },
            Method::SoftAd { theta: 0.05 },
        ] {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("cvar:1".parse::<Method>().is_err());
        assert!("erm:1".parse::<Method>().is_err());
        assert!("sam:0.1".parse::<Method>().is_err());
    }

    #[test]
    fn dro_with_zero_eps_has_no_threshold() {
        assert!(!Method::Dro { eps: 0.0 }.has_joint_theta());
        assert!(Method::Dro { eps: 0.1 }.has_joint_theta());
        assert!(Method::Cvar { beta: 0.0 }.has_joint_theta());
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = TrainConfig {
            momentum: 1.0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
