//! One-step transition kernel of the discretized kinetic Langevin diffusion.
//!
//! Over one step of length `eta` the gradient is frozen at the starting
//! position, so the step is an Ornstein-Uhlenbeck solve and the transition
//! law is Gaussian. With `u = beta * eta`:
//!
//! ```text
//! x' = x + (1 - e^-u)/beta y - (e^-u - 1 + u)/beta^2 grad
//! y' = e^-u y - (1 - e^-u)/beta grad
//! cov = [[a, c], [c, b]] (x) I_n
//! a = (4 e^-u - e^-2u + 2u - 3)/beta^2
//! b = 1 - e^-2u
//! c = (1 - e^-u)^2/beta
//! ```

use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Below this value of `beta * eta` the cancelling coefficients use their
/// Taylor series.
pub const SERIES_THRESHOLD: f64 = 1e-2;

/// Friction and time step of one kernel instantiation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrictionStep {
    beta: f64,
    eta: f64,
}

impl FrictionStep {
    pub fn new(beta: f64, eta: f64) -> Result<Self> {
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::param(format!("friction must be positive and finite, got {beta}")));
        }
        if !eta.is_finite() || eta < 0.0 {
            return Err(Error::param(format!("time step must be non-negative and finite, got {eta}")));
        }
        Ok(Self { beta, eta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// The dimensionless product `beta * eta`.
    pub fn u(&self) -> f64 {
        self.beta * self.eta
    }
}

/// Mean-map coefficients and per-coordinate noise covariance of one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelCoefficients {
    /// `e^{-u}`
    pub vel_decay: f64,
    /// `(1 - e^{-u}) / beta`
    pub pos_vel: f64,
    /// `(e^{-u} - 1 + u) / beta^2`
    pub pos_grad: f64,
    /// `(1 - e^{-u}) / beta`
    pub vel_grad: f64,
    /// Position noise variance.
    pub a: f64,
    /// Velocity noise variance.
    pub b: f64,
    /// Position-velocity noise covariance.
    pub c: f64,
}

/// `e^{-u} - 1 + u` accurate to a few ulps for all `u >= 0`.
fn exp_remainder2(u: f64) -> f64 {
    if u >= 1.0 {
        return (-u).exp_m1() + u;
    }
    // alternating series u^2/2 - u^3/6 + ..., summed smallest term first
    let mut terms = [0.0f64; 32];
    let mut term = 0.5 * u * u;
    let mut len = 0;
    let mut k = 2.0;
    while len < terms.len() {
        terms[len] = term;
        len += 1;
        if term.abs() <= 1e-18 * terms[0] {
            break;
        }
        k += 1.0;
        term = -term * u / k;
    }
    terms[..len].iter().rev().sum()
}

/// Horner evaluation of `sum_k coeffs[k] u^k`.
fn horner(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
}

// e^{-u} - 1 + u through u^8
const POS_GRAD_SERIES: [f64; 9] = [
    0.0,
    0.0,
    1.0 / 2.0,
    -1.0 / 6.0,
    1.0 / 24.0,
    -1.0 / 120.0,
    1.0 / 720.0,
    -1.0 / 5040.0,
    1.0 / 40320.0,
];

// 4e^{-u} - e^{-2u} + 2u - 3 through u^8; the k-th coefficient is
// (-1)^k (4 - 2^k) / k!
const A_SERIES: [f64; 9] = [
    0.0,
    0.0,
    0.0,
    4.0 / 6.0,
    -12.0 / 24.0,
    28.0 / 120.0,
    -60.0 / 720.0,
    124.0 / 5040.0,
    -252.0 / 40320.0,
];

/// Evaluates the kernel coefficients for a friction/step pair.
pub fn compute_coefficients(fs: FrictionStep) -> KernelCoefficients {
    let beta = fs.beta;
    let u = fs.u();
    let beta2 = beta * beta;
    // s = 1 - e^{-u}
    let s = -(-u).exp_m1();
    let (pos_grad_num, a_num) = if u < SERIES_THRESHOLD {
        (horner(&POS_GRAD_SERIES, u), horner(&A_SERIES, u))
    } else {
        let g = exp_remainder2(u);
        // 4e^{-u} - e^{-2u} + 2u - 3 = 2 (e^{-u} - 1 + u) - (1 - e^{-u})^2
        (g, 2.0 * g - s * s)
    };
    KernelCoefficients {
        vel_decay: (-u).exp(),
        pos_vel: s / beta,
        pos_grad: pos_grad_num / beta2,
        vel_grad: s / beta,
        a: a_num / beta2,
        b: -(-2.0 * u).exp_m1(),
        c: s * s / beta,
    }
}

impl KernelCoefficients {
    /// Determinant `a b - c^2` of the 2x2 noise covariance.
    pub fn noise_det(&self) -> f64 {
        self.a * self.b - self.c * self.c
    }

    /// True when every noise entry vanishes (the `eta = 0` kernel).
    pub fn is_degenerate(&self) -> bool {
        self.b == 0.0
    }

    /// Velocity-first Cholesky factor of `[[a, c], [c, b]]`.
    pub fn noise_factor(&self) -> NoiseFactor {
        if self.is_degenerate() {
            return NoiseFactor::default();
        }
        let sqrt_b = self.b.sqrt();
        let mut cond = self.a - self.c * self.c / self.b;
        if cond < 0.0 {
            debug_assert!(cond > -1e-15, "noise covariance not PSD: {cond}");
            cond = 0.0;
        }
        NoiseFactor {
            vel: sqrt_b,
            pos_from_vel: self.c / sqrt_b,
            pos: cond.sqrt(),
        }
    }
}

/// Factorization `xi_y = vel z1`, `xi_x = pos_from_vel z1 + pos z2`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NoiseFactor {
    pub vel: f64,
    pub pos_from_vel: f64,
    pub pos: f64,
}

impl NoiseFactor {
    /// Draws one correlated `(xi_x, xi_y)` pair from two standard normals.
    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        (self.pos_from_vel * z1 + self.pos * z2, self.vel * z1)
    }
}

fn check_dims(x: &[f64], y: &[f64], grad: &[f64]) -> Result<()> {
    if x.is_empty() || x.len() != y.len() || x.len() != grad.len() {
        return Err(Error::arg(format!(
            "dimension mismatch: x={}, y={}, grad={}",
            x.len(),
            y.len(),
            grad.len()
        )));
    }
    Ok(())
}

/// Mean of the transition law started at `(x, y)` with gradient `grad` at `x`.
pub fn step_mean(
    coeffs: &KernelCoefficients,
    x: &[f64],
    y: &[f64],
    grad: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_dims(x, y, grad)?;
    let x_mean = x
        .iter()
        .zip(y)
        .zip(grad)
        .map(|((&xi, &yi), &gi)| xi + coeffs.pos_vel * yi - coeffs.pos_grad * gi)
        .collect();
    let y_mean = y
        .iter()
        .zip(grad)
        .map(|(&yi, &gi)| coeffs.vel_decay * yi - coeffs.vel_grad * gi)
        .collect();
    Ok((x_mean, y_mean))
}

/// Draws `n` independent correlated noise pairs.
///
/// Each coordinate consumes exactly two standard normal draws, velocity
/// first. With `eta = 0` both vectors are zero and no draws are consumed.
pub fn sample_noise<R: Rng + ?Sized>(
    coeffs: &KernelCoefficients,
    n: usize,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    if coeffs.is_degenerate() {
        return (vec![0.0; n], vec![0.0; n]);
    }
    let factor = coeffs.noise_factor();
    (0..n).map(|_| factor.draw(rng)).unzip()
}
