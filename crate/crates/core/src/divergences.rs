//! Divergences between finite discrete distributions.
//!
//! `+inf` is an ordinary value here: KL and chi-square return it whenever
//! the first argument charges a cell the second one does not.

use crate::{Error, Result};

/// Probability vector, renormalized on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDist {
    probs: Vec<f64>,
}

impl DiscreteDist {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::arg("empty distribution"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::arg("probabilities must be finite and non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::arg("probabilities sum to zero"));
        }
        Ok(Self { probs: weights.into_iter().map(|w| w / total).collect() })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

fn same_support(p: &DiscreteDist, q: &DiscreteDist) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::arg(format!("support sizes differ: {} vs {}", p.len(), q.len())));
    }
    Ok(())
}

/// Half the L1 distance.
pub fn tv_discrete(p: &DiscreteDist, q: &DiscreteDist) -> Result<f64> {
    same_support(p, q)?;
    Ok(0.5 * p.probs.iter().zip(&q.probs).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// `sum p_i log(p_i / q_i)`.
pub fn kl_discrete(p: &DiscreteDist, q: &DiscreteDist) -> Result<f64> {
    same_support(p, q)?;
    let mut s = 0.0;
    for (&a, &b) in p.probs.iter().zip(&q.probs) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Ok(f64::INFINITY);
        }
        s += a * (a / b).ln();
    }
    Ok(s.max(0.0))
}

/// `sum p_i^2 / q_i - 1`.
pub fn chi2_discrete(p: &DiscreteDist, q: &DiscreteDist) -> Result<f64> {
    same_support(p, q)?;
    let mut s = 0.0;
    for (&a, &b) in p.probs.iter().zip(&q.probs) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Ok(f64::INFINITY);
        }
        s += a * a / b;
    }
    Ok((s - 1.0).max(0.0))
}

/// Both sides of `KL(m3|m1) <= 2 KL(m3|m2) + log(1 + chi2(m2|m1))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn check_triangle_lemma(m1: &DiscreteDist, m2: &DiscreteDist, m3: &DiscreteDist) -> Result<TriangleCheck> {
    same_support(m1, m2)?;
    same_support(m1, m3)?;
    let lhs = kl_discrete(m3, m1)?;
    let rhs = 2.0 * kl_discrete(m3, m2)? + chi2_discrete(m2, m1)?.ln_1p();
    let holds = rhs == f64::INFINITY || lhs <= rhs + 1e-12;
    Ok(TriangleCheck { lhs, rhs, holds })
}
