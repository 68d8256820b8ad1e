//! Labeled feature datasets, Gaussian-blob generators and the text format.
//!
//! One example per line: features then the integer label, separated by
//! spaces, features in fixed-point with six decimals. Binary tasks use
//! labels `±1`; `K`-class tasks use `0..K`.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    features: Vec<f64>,
    labels: Vec<i32>,
}

impl Dataset {
    pub fn new(dim: usize, features: Vec<f64>, labels: Vec<i32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Input("feature dimension must be positive".into()));
        }
        if features.len() != dim * labels.len() {
            return Err(Error::Input(format!(
                "{} features do not fill {} examples of dimension {dim}",
                features.len(),
                labels.len()
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("non-finite feature".into()));
        }
        let data = Self {
            dim,
            features,
            labels,
        };
        data.classes()?;
        Ok(data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn x(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn y(&self, i: usize) -> i32 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[i32] {
        &self.labels
    }

    /// `1` for a binary `±1` task, otherwise the number of classes.
    pub fn classes(&self) -> Result<usize> {
        if self.labels.iter().all(|&y| y == 1 || y == -1) {
            return Ok(1);
        }
        let min = self.labels.iter().copied().min().unwrap_or(0);
        let max = self.labels.iter().copied().max().unwrap_or(0);
        if min >= 0 && max >= 1 {
            Ok(max as usize + 1)
        } else {
            Err(Error::Input(
                "labels must be all ±1 (binary) or class indices 0..K with K >= 2".into(),
            ))
        }
    }

    /// Model output width for this task: 1 for binary, `K` otherwise.
    pub fn output_dim(&self) -> Result<usize> {
        self.classes()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for i in 0..self.len() {
            for v in self.x(i) {
                let _ = write!(out, "{v:.6} ");
            }
            let _ = writeln!(out, "{}", self.y(i));
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut dim = None;
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = |msg: &str| Error::Input(format!("line {}: {msg}", n + 1));
            if fields.len() < 2 {
                return Err(bad("need at least one feature and a label"));
            }
            let d = fields.len() - 1;
            if *dim.get_or_insert(d) != d {
                return Err(bad("inconsistent number of features"));
            }
            for f in &fields[..d] {
                features.push(f.parse::<f64>().map_err(|_| bad("bad feature"))?);
            }
            labels.push(fields[d].parse::<i32>().map_err(|_| bad("bad label"))?);
        }
        let dim = dim.ok_or_else(|| Error::Input("dataset has no examples".into()))?;
        Self::new(dim, features, labels)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_text(&text).map_err(|e| match e {
            Error::Input(msg) => Error::Input(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Splits {
    pub train: Dataset,
    pub val: Dataset,
    pub test: Dataset,
}

/// Isotropic Gaussian blobs in the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct BlobSpec {
    pub centers: Vec<[f64; 2]>,
    pub std: f64,
}

impl BlobSpec {
    /// Two classes (`-1`, `+1`) centered at `∓(2, 2)`.
    pub fn binary() -> Self {
        Self {
            centers: vec![[-2.0, -2.0], [2.0, 2.0]],
            std: 1.0,
        }
    }

    /// Three classes on a circle of radius 4.
    pub fn three_class() -> Self {
        let centers = (0..3)
            .map(|k| {
                let angle = std::f64::consts::TAU * k as f64 / 3.0;
                [4.0 * angle.cos(), 4.0 * angle.sin()]
            })
            .collect();
        Self { centers, std: 1.0 }
    }

    fn label(&self, class: usize) -> i32 {
        if self.centers.len() == 2 {
            if class == 0 {
                -1
            } else {
                1
            }
        } else {
            class as i32
        }
    }

    /// `n` examples with balanced, shuffled classes. Features are rounded to
    /// six decimals so a saved dataset reloads bit-identically.
    pub fn sample(&self, n: usize, rng: &mut impl Rng) -> Result<Dataset> {
        let k = self.centers.len();
        if k < 2 {
            return Err(Error::Input("blobs need at least two centers".into()));
        }
        let mut features = Vec::with_capacity(2 * n);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let c = i % k;
            for &mu in &self.centers[c] {
                let z: f64 = rng.sample(StandardNormal);
                features.push(round6(mu + self.std * z));
            }
            labels.push(self.label(c));
        }
        // Fisher-Yates over examples so batches mix classes.
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            labels.swap(i, j);
            features.swap(2 * i, 2 * j);
            features.swap(2 * i + 1, 2 * j + 1);
        }
        Dataset::new(2, features, labels)
    }

    pub fn splits(&self, sizes: [usize; 3], seed: u64) -> Result<Splits> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Splits {
            train: self.sample(sizes[0], &mut rng)?,
            val: self.sample(sizes[1], &mut rng)?,
            test: self.sample(sizes[2], &mut rng)?,
        })
    }
}

fn round6(v: f64) -> f64 {
    format!("{v:.6}").parse().expect("formatted float parses")
}
