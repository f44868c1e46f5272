//! Explicit convergence bounds and the step schedules derived from them.

use crate::{Error, Result};

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::param(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(Error::param(format!("{name} must be non-negative and finite, got {v}")));
    }
    Ok(())
}

/// Chi-square contraction factor of the continuous kinetic flow after time `t`:
///
/// ```text
/// exp(-beta t / (10 (3 + beta sqrt(C_P) + 2 sqrt(1 + kappa C_P))^2) + 1/60)
/// ```
///
/// so that `chi2(nu P_t | pi) <= factor * chi2(nu | pi)`.
pub fn hypocoercive_factor_explicit(beta: f64, poincare: f64, kappa: f64, t: f64) -> Result<f64> {
    positive("beta", beta)?;
    positive("C_P", poincare)?;
    non_negative("kappa", kappa)?;
    non_negative("t", t)?;
    Ok(log_hypocoercive_factor(beta, poincare, kappa, t).exp())
}

/// Logarithm of [`hypocoercive_factor_explicit`], without input checks.
pub fn log_hypocoercive_factor(beta: f64, poincare: f64, kappa: f64, t: f64) -> f64 {
    let root = 3.0 + beta * poincare.sqrt() + 2.0 * (1.0 + kappa * poincare).sqrt();
    -beta * t / (10.0 * root * root) + 1.0 / 60.0
}

/// Total-variation distance between the discretized and the continuous
/// kinetic flows after time `t`, up to the constant `c_disc`:
///
/// ```text
/// c_disc sqrt(t) L eta / sqrt(beta) (sqrt(n) + sqrt(log(1 + chi2_warm)))
/// ```
///
/// capped at 1. Outside the regime `2 t L^2 eta^2 <= beta` it returns 1.
pub fn discretization_tv_bound(
    t: f64,
    lipschitz: f64,
    eta: f64,
    beta: f64,
    n: usize,
    chi2_warm: f64,
    c_disc: f64,
) -> Result<f64> {
    non_negative("t", t)?;
    positive("L", lipschitz)?;
    non_negative("eta", eta)?;
    positive("beta", beta)?;
    non_negative("chi2_warm", chi2_warm)?;
    positive("C_disc", c_disc)?;
    if n == 0 {
        return Err(Error::param("dimension must be at least 1"));
    }
    if 2.0 * t * lipschitz * lipschitz * eta * eta > beta {
        return Ok(1.0);
    }
    let bound = c_disc * t.sqrt() * lipschitz * eta / beta.sqrt() * warm_start_scale(n, chi2_warm);
    Ok(bound.min(1.0))
}

/// `sqrt(n) + sqrt(log(1 + chi2_warm))`
fn warm_start_scale(n: usize, chi2_warm: f64) -> f64 {
    (n as f64).sqrt() + chi2_warm.ln_1p().sqrt()
}

/// Inputs of the step schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleInput {
    pub epsilon: f64,
    pub n: usize,
    pub lipschitz: f64,
    pub poincare: f64,
    pub kappa: f64,
    /// Chi-square divergence of the initial position law to the target.
    pub chi2_warm: f64,
    pub log_concave: bool,
    /// Step-size constant `c`.
    pub c_const: f64,
    /// Step-count constant `C`.
    pub big_c_const: f64,
    /// Constant of the discretization bound.
    pub c_disc: f64,
}

impl ScheduleInput {
    pub fn new(epsilon: f64, n: usize, lipschitz: f64, poincare: f64, chi2_warm: f64, log_concave: bool) -> Self {
        Self {
            epsilon,
            n,
            lipschitz,
            poincare,
            kappa: if log_concave { 0.0 } else { lipschitz },
            chi2_warm,
            log_concave,
            c_const: 1.0,
            big_c_const: 1.0,
            c_disc: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::param(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if self.n == 0 {
            return Err(Error::param("dimension must be at least 1"));
        }
        positive("L", self.lipschitz)?;
        positive("C_P", self.poincare)?;
        non_negative("kappa", self.kappa)?;
        positive("chi2_warm", self.chi2_warm)?;
        positive("c", self.c_const)?;
        positive("C", self.big_c_const)?;
        positive("C_disc", self.c_disc)?;
        if self.lipschitz * self.poincare < 1.0 - 1e-12 {
            return Err(Error::param(format!(
                "L * C_P = {} is below 1, which no target satisfies",
                self.lipschitz * self.poincare
            )));
        }
        if self.chi2_warm <= self.epsilon {
            return Err(Error::ScheduleUndefined(format!(
                "chi2_warm = {} must exceed epsilon = {}; the warm start is already within tolerance, \
                 or pass a larger upper bound on its chi-square divergence",
                self.chi2_warm, self.epsilon
            )));
        }
        Ok(())
    }
}

/// Friction, step, step count and the accuracy it targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub beta: f64,
    pub eta: f64,
    pub k: u64,
    pub predicted_tv: f64,
}

impl Schedule {
    pub fn total_time(&self) -> f64 {
        self.k as f64 * self.eta
    }
}

/// Step count before rounding up.
pub fn step_count_real(input: &ScheduleInput) -> Result<f64> {
    input.validate()?;
    let lcp = input.lipschitz * input.poincare;
    let log_ratio = (input.chi2_warm / input.epsilon).ln();
    let condition = if input.log_concave { lcp } else { lcp.powf(1.5) };
    Ok(input.big_c_const / input.epsilon
        * condition
        * warm_start_scale(input.n, input.chi2_warm)
        * log_ratio.powf(1.5))
}

/// Friction `sqrt(L)` in general, `C_P^{-1/2}` for log-concave targets, with
/// the matching step size and step count.
pub fn make_schedule(input: &ScheduleInput) -> Result<Schedule> {
    input.validate()?;
    let beta = if input.log_concave {
        1.0 / input.poincare.sqrt()
    } else {
        input.lipschitz.sqrt()
    };
    let log_ratio = (input.chi2_warm / input.epsilon).ln();
    let eta = input.c_const * input.epsilon / input.lipschitz / input.poincare.sqrt()
        / warm_start_scale(input.n, input.chi2_warm)
        / log_ratio.sqrt();
    let k = step_count_real(input)?.ceil().max(1.0) as u64;
    Ok(Schedule { beta, eta, k, predicted_tv: input.epsilon })
}

/// Discretization bound plus the square root of the chi-square decay,
/// capped at 1. In the general case the semi-convexity constant is taken to
/// be `L`.
pub fn total_tv_prediction(input: &ScheduleInput, sched: &Schedule) -> Result<f64> {
    total_tv_prediction_at(input, sched.beta, sched.eta, sched.total_time())
}

/// [`total_tv_prediction`] at an arbitrary horizon `t`.
pub fn total_tv_prediction_at(input: &ScheduleInput, beta: f64, eta: f64, t: f64) -> Result<f64> {
    let disc = discretization_tv_bound(
        t,
        input.lipschitz,
        eta,
        beta,
        input.n,
        input.chi2_warm,
        input.c_disc,
    )?;
    let kappa = if input.log_concave { 0.0 } else { input.lipschitz };
    let mixing = hypocoercive_factor_explicit(beta, input.poincare, kappa, t)?.sqrt() * input.chi2_warm.sqrt();
    Ok((disc + mixing).min(1.0))
}
