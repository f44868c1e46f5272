//! Target measures `mu(dx) = exp(-V(x)) dx` exposed through a gradient oracle.

use crate::{Error, Result};

/// Declared regularity constants of a target.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TargetMetadata {
    /// Lipschitz constant of the gradient.
    pub lipschitz_l: Option<f64>,
    /// Poincare constant.
    pub poincare_cp: Option<f64>,
    /// Semi-convexity constant: `V + kappa/2 |x|^2` is convex.
    pub semiconvex_kappa: Option<f64>,
    pub log_concave: bool,
}

impl TargetMetadata {
    /// Checks the structural constraints between the declared constants.
    pub fn validate(&self) -> Result<()> {
        if let (Some(l), Some(cp)) = (self.lipschitz_l, self.poincare_cp) {
            if l * cp < 1.0 - 1e-12 {
                return Err(Error::param(format!("L * C_P = {} < 1", l * cp)));
            }
        }
        if self.log_concave && self.semiconvex_kappa.is_some_and(|k| k != 0.0) {
            return Err(Error::param("log-concave target must have kappa = 0"));
        }
        for (name, v) in [
            ("L", self.lipschitz_l),
            ("C_P", self.poincare_cp),
        ] {
            if v.is_some_and(|v| !(v.is_finite() && v > 0.0)) {
                return Err(Error::param(format!("{name} must be positive")));
            }
        }
        if self.semiconvex_kappa.is_some_and(|k| !(k.is_finite() && k >= 0.0)) {
            return Err(Error::param("kappa must be non-negative"));
        }
        Ok(())
    }
}

/// Gradient-oracle interface. Implementations are deterministic and
/// immutable, so a single instance can be shared by all replicas.
pub trait Target: Send + Sync {
    fn dim(&self) -> usize;

    /// `V(x)`, up to an additive constant.
    fn potential(&self, x: &[f64]) -> f64;

    /// Writes `grad V(x)` into `out` (same length as `x`).
    fn gradient_into(&self, x: &[f64], out: &mut [f64]);

    fn metadata(&self) -> TargetMetadata;

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.gradient_into(x, &mut out);
        out
    }

    /// Hessian diagonal and minimizer when the potential is a diagonal quadratic.
    fn as_diagonal_gaussian(&self) -> Option<&DiagonalGaussian> {
        None
    }
}

/// `V(x) = 1/2 sum_i lambda_i (x_i - m_i)^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalGaussian {
    eigenvalues: Vec<f64>,
    mean_shift: Vec<f64>,
}

impl DiagonalGaussian {
    pub fn new(eigenvalues: Vec<f64>, mean_shift: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::arg("diagonal Gaussian needs at least one eigenvalue"));
        }
        if let Some(bad) = eigenvalues.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::arg(format!("eigenvalues must be positive, got {bad}")));
        }
        if mean_shift.len() != eigenvalues.len() {
            return Err(Error::arg(format!(
                "mean shift has length {}, expected {}",
                mean_shift.len(),
                eigenvalues.len()
            )));
        }
        if mean_shift.iter().any(|m| !m.is_finite()) {
            return Err(Error::arg("mean shift must be finite"));
        }
        Ok(Self { eigenvalues, mean_shift })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn mean_shift(&self) -> &[f64] {
        &self.mean_shift
    }
}

impl Target for DiagonalGaussian {
    fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    fn potential(&self, x: &[f64]) -> f64 {
        0.5 * x
            .iter()
            .zip(&self.eigenvalues)
            .zip(&self.mean_shift)
            .map(|((xi, l), m)| l * (xi - m) * (xi - m))
            .sum::<f64>()
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        for (((o, xi), l), m) in out.iter_mut().zip(x).zip(&self.eigenvalues).zip(&self.mean_shift) {
            *o = l * (xi - m);
        }
    }

    fn metadata(&self) -> TargetMetadata {
        let max = self.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
        TargetMetadata {
            lipschitz_l: Some(max),
            // uniformly convex with constant min(lambda): Poincare with 1/min
            poincare_cp: Some(1.0 / min),
            semiconvex_kappa: Some(0.0),
            log_concave: true,
        }
    }

    fn as_diagonal_gaussian(&self) -> Option<&DiagonalGaussian> {
        Some(self)
    }
}

/// The standard Gaussian on `R^n`.
pub fn make_standard_gaussian(n: usize) -> Result<DiagonalGaussian> {
    if n == 0 {
        return Err(Error::arg("dimension must be at least 1"));
    }
    DiagonalGaussian::new(vec![1.0; n], vec![0.0; n])
}

pub fn make_diagonal_gaussian(eigenvalues: Vec<f64>, mean_shift: Vec<f64>) -> Result<DiagonalGaussian> {
    DiagonalGaussian::new(eigenvalues, mean_shift)
}

/// Mixture of unit-covariance Gaussians,
/// `V(x) = -log sum_j w_j exp(-|x - c_j|^2 / 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    centers: Vec<Vec<f64>>,
    log_weights: Vec<f64>,
    metadata: TargetMetadata,
}

impl GaussianMixture {
    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    /// Overrides the Poincare constant when the caller can certify one.
    pub fn with_poincare(mut self, cp: f64) -> Result<Self> {
        self.metadata.poincare_cp = Some(cp);
        self.metadata.validate()?;
        Ok(self)
    }

    /// Log-responsibilities scratch: fills `scores[j] = log w_j - |x - c_j|^2/2`
    /// and returns their maximum.
    fn scores(&self, x: &[f64], scores: &mut [f64]) -> f64 {
        let mut max = f64::NEG_INFINITY;
        for ((s, c), lw) in scores.iter_mut().zip(&self.centers).zip(&self.log_weights) {
            let d2: f64 = x.iter().zip(c).map(|(xi, ci)| (xi - ci) * (xi - ci)).sum();
            *s = lw - 0.5 * d2;
            max = max.max(*s);
        }
        max
    }
}

pub fn make_gaussian_mixture(centers: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<GaussianMixture> {
    if centers.len() < 2 {
        return Err(Error::arg("a mixture needs at least two centers"));
    }
    if weights.len() != centers.len() {
        return Err(Error::arg(format!(
            "{} weights for {} centers",
            weights.len(),
            centers.len()
        )));
    }
    let n = centers[0].len();
    if n == 0 || centers.iter().any(|c| c.len() != n) {
        return Err(Error::arg("mixture centers must share a positive dimension"));
    }
    if centers.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::arg("mixture centers must be finite"));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::arg("mixture weights must be positive"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::arg(format!("mixture weights sum to {total}, expected 1")));
    }
    let mut spread: f64 = 0.0;
    for (j, cj) in centers.iter().enumerate() {
        for ck in &centers[j + 1..] {
            let d2: f64 = cj.iter().zip(ck).map(|(a, b)| (a - b) * (a - b)).sum();
            spread = spread.max(d2 / 4.0);
        }
    }
    // The Hessian is I - Cov_r(c) with r the posterior responsibilities;
    // that covariance is bounded by max |c_j - c_k|^2 / 4.
    let metadata = TargetMetadata {
        lipschitz_l: Some(1.0 + spread),
        poincare_cp: None,
        semiconvex_kappa: Some(spread),
        log_concave: false,
    };
    Ok(GaussianMixture {
        centers,
        log_weights: weights.iter().map(|w| (w / total).ln()).collect(),
        metadata,
    })
}

impl Target for GaussianMixture {
    fn dim(&self) -> usize {
        self.centers[0].len()
    }

    fn potential(&self, x: &[f64]) -> f64 {
        let mut scores = vec![0.0; self.centers.len()];
        let max = self.scores(x, &mut scores);
        let sum: f64 = scores.iter().map(|s| (s - max).exp()).sum();
        -(max + sum.ln())
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        let mut scores = vec![0.0; self.centers.len()];
        let max = self.scores(x, &mut scores);
        let mut norm = 0.0;
        for s in scores.iter_mut() {
            *s = (*s - max).exp();
            norm += *s;
        }
        out.copy_from_slice(x);
        for (r, c) in scores.iter().zip(&self.centers) {
            let w = r / norm;
            for (o, ci) in out.iter_mut().zip(c) {
                *o -= w * ci;
            }
        }
    }

    fn metadata(&self) -> TargetMetadata {
        self.metadata
    }
}
