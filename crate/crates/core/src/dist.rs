//! Finite loss distributions and their exact summary statistics.
//!
//! Every criterion in the crate is evaluated on an [`EmpiricalLossDist`]: a
//! finite set of real loss atoms with probability weights. Bernoulli (zero-one)
//! losses are the special case with support in `{0, 1}`, described by a
//! [`BernoulliSpec`].

use crate::error::{Error, Result};

/// Weights may sum to 1 within this slack; they are then renormalized.
pub const WEIGHT_SUM_SLACK: f64 = 1e-9;

/// A finite, weighted distribution of real loss values.
///
/// Stored in canonical form: atoms sorted ascending, duplicate values merged,
/// zero-weight atoms dropped. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalLossDist {
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl EmpiricalLossDist {
    /// Builds a distribution from loss values and their probabilities.
    ///
    /// Weights summing to within [`WEIGHT_SUM_SLACK`] of one are renormalized;
    /// anything further off is rejected.
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        if values.len() != weights.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} values but {} weights",
                values.len(),
                weights.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidDistribution(format!("non-finite value {v}")));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidDistribution(format!("bad weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_SLACK {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}, not 1"
            )));
        }

        let mut atoms: Vec<(f64, f64)> = values
            .into_iter()
            .zip(weights)
            .filter(|&(_, w)| w > 0.0)
            .map(|(v, w)| (v, w / total))
            .collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (v, w) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += w,
                _ => merged.push((v, w)),
            }
        }
        let (values, weights) = merged.into_iter().unzip();
        Ok(Self { values, weights })
    }

    /// Equal-weight distribution over `values`.
    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        let w = if n == 0 { 0.0 } else { 1.0 / n as f64 };
        Self::new(values, vec![w; n])
    }

    pub fn point_mass(value: f64) -> Result<Self> {
        Self::new(vec![value], vec![1.0])
    }

    /// Sorted, merged support.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn mean(&self) -> f64 {
        self.atoms().map(|(v, w)| v * w).sum()
    }

    /// Expectation of `f(L)`.
    pub fn expect(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.atoms().map(|(v, w)| w * f(v)).sum()
    }

    /// `P(L <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.atoms()
            .take_while(|&(v, _)| v <= x)
            .fold(0.0, |acc, (_, w)| acc + w)
    }

    /// The distribution of `L + shift`.
    pub fn shifted(&self, shift: f64) -> Result<Self> {
        Self::new(
            self.values.iter().map(|v| v + shift).collect(),
            self.weights.clone(),
        )
    }

    /// Left quantile `min{x : P(L <= x) >= beta}`; `-inf` at `beta = 0`.
    pub fn left_quantile(&self, beta: f64) -> Result<f64> {
        check_level(beta)?;
        if beta == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        let mut cum = 0.0;
        for (v, w) in self.atoms() {
            cum += w;
            if cum >= beta {
                return Ok(v);
            }
        }
        // Accumulated rounding left the total a hair under beta.
        Ok(self.max())
    }

    /// Right quantile `max{x : P(L < x) <= beta}`; `+inf` at `beta = 1`.
    pub fn right_quantile(&self, beta: f64) -> Result<f64> {
        check_level(beta)?;
        if beta == 1.0 {
            return Ok(f64::INFINITY);
        }
        // On (v_k, v_{k+1}] the strict CDF equals the weight accumulated
        // through v_k, so the answer is the atom following the last prefix
        // whose mass is still <= beta.
        let mut cum = 0.0;
        for (v, w) in self.atoms() {
            cum += w;
            if cum > beta {
                return Ok(v);
            }
        }
        Ok(self.max())
    }

    /// True when every atom is exactly 0 or 1.
    pub fn is_zero_one(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Probability of the atom at exactly `value`.
    pub fn mass_at(&self, value: f64) -> f64 {
        self.atoms()
            .filter(|&(v, _)| v == value)
            .map(|(_, w)| w)
            .sum()
    }
}

fn check_level(beta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&beta) {
        Ok(())
    } else {
        Err(Error::param("beta", beta, "must lie in [0, 1]"))
    }
}

/// A zero-one loss distribution identified by its error probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernoulliSpec {
    p: f64,
}

impl BernoulliSpec {
    pub fn new(p: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&p) {
            Ok(Self { p })
        } else {
            Err(Error::param("p", p, "must lie in [0, 1]"))
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Two-point distribution `{0: 1-p, 1: p}`, or a point mass when `p` is 0 or 1.
    pub fn to_empirical(&self) -> EmpiricalLossDist {
        let dist = if self.p == 0.0 {
            EmpiricalLossDist::point_mass(0.0)
        } else if self.p == 1.0 {
            EmpiricalLossDist::point_mass(1.0)
        } else {
            EmpiricalLossDist::new(vec![0.0, 1.0], vec![1.0 - self.p, self.p])
        };
        dist.expect("bernoulli atoms are always valid")
    }
}

impl From<BernoulliSpec> for EmpiricalLossDist {
    fn from(spec: BernoulliSpec) -> Self {
        spec.to_empirical()
    }
}
