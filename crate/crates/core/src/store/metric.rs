use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CHI_SQUARED_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Metric {
    L2,
    L1,
    Cosine,
    ChiSquared,
}

impl Metric {
    pub fn code(self) -> u8 {
        match self {
            Metric::L2 => 0,
            Metric::L1 => 1,
            Metric::Cosine => 2,
            Metric::ChiSquared => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Metric::L2),
            1 => Some(Metric::L1),
            2 => Some(Metric::Cosine),
            3 => Some(Metric::ChiSquared),
            _ => None,
        }
    }

    /// Distance between equal-length vectors. Callers validate lengths.
    #[inline]
    pub fn eval<A: Copy + Into<f64>, B: Copy + Into<f64>>(self, a: &[A], b: &[B]) -> f64 {
        let pairs = a.iter().zip(b).map(|(&x, &y)| (x.into(), y.into()));
        match self {
            Metric::L2 => pairs.map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
            Metric::L1 => pairs.map(|(x, y)| (x - y).abs()).sum(),
            Metric::Cosine => {
                let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
                for (x, y) in pairs {
                    dot += x * y;
                    na += x * x;
                    nb += y * y;
                }
                if na == 0.0 || nb == 0.0 {
                    1.0
                } else {
                    (1.0 - dot / (na.sqrt() * nb.sqrt())).max(0.0)
                }
            }
            Metric::ChiSquared => {
                0.5 * pairs
                    .map(|(x, y)| (x - y) * (x - y) / (x + y + CHI_SQUARED_EPS))
                    .sum::<f64>()
            }
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Metric::L2 => "L2",
            Metric::L1 => "L1",
            Metric::Cosine => "COSINE",
            Metric::ChiSquared => "CHISQUARED",
        };
        f.write_str(s)
    }
}

/// Checked distance: lengths must agree and chi-squared inputs must be non-negative.
pub fn distance(metric: Metric, a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), actual: b.len() });
    }
    if metric == Metric::ChiSquared {
        check_non_negative(a)?;
        check_non_negative(b)?;
    }
    Ok(metric.eval(a, b))
}

pub(crate) fn check_non_negative<T: Copy + Into<f64>>(v: &[T]) -> Result<()> {
    match v.iter().position(|&x| x.into() < 0.0) {
        Some(i) => Err(Error::NegativeComponent(i)),
        None => Ok(()),
    }
}
