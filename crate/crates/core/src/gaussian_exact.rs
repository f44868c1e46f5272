//! Exact law propagation for quadratic potentials with diagonal Hessian.
//!
//! With `grad V(x) = lambda x` per coordinate, both the kinetic diffusion and
//! its discretization are affine-Gaussian, so a product of Gaussian laws
//! stays a product of Gaussian laws: one 2x2 `(position, velocity)` block per
//! eigenvalue. Coordinates are centered at the minimizer of `V`, so the
//! per-mode invariant law is `N(0, diag(1/lambda, 1))`.

use crate::kernel::KernelCoefficients;
use crate::{Error, Result};

/// Row-major 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);
    pub const ZERO: Mat2 = Mat2([[0.0, 0.0], [0.0, 0.0]]);

    pub fn diag(a: f64, b: f64) -> Self {
        Mat2([[a, 0.0], [0.0, b]])
    }

    pub fn sym(a: f64, c: f64, b: f64) -> Self {
        Mat2([[a, c], [c, b]])
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])
    }

    pub fn transpose(&self) -> Mat2 {
        let a = &self.0;
        Mat2([[a[0][0], a[1][0]], [a[0][1], a[1][1]]])
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2([[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]])
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        let a = &self.0;
        Mat2([[s * a[0][0], s * a[0][1]], [s * a[1][0], s * a[1][1]]])
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let a = &self.0;
        [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
    }

    pub fn det(&self) -> f64 {
        let a = &self.0;
        a[0][0] * a[1][1] - a[0][1] * a[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let a = &self.0;
        Some(Mat2([[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]]))
    }

    /// `M X M^T`
    pub fn congruence(&self, x: &Mat2) -> Mat2 {
        self.mul(x).mul(&self.transpose())
    }

    pub fn max_abs_diff(&self, o: &Mat2) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                m = m.max((self.0[i][j] - o.0[i][j]).abs());
            }
        }
        m
    }

    /// Eigenvalues `(min, max)` of the symmetric part.
    pub fn sym_eigenvalues(&self) -> (f64, f64) {
        let a = self.0[0][0];
        let d = self.0[1][1];
        let b = 0.5 * (self.0[0][1] + self.0[1][0]);
        let mid = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        (mid - rad, mid + rad)
    }

    /// Largest eigenvalue modulus of a general 2x2 matrix.
    pub fn spectral_radius(&self) -> f64 {
        let half_tr = 0.5 * self.trace();
        let det = self.det();
        let disc = half_tr * half_tr - det;
        if disc >= 0.0 {
            let r = disc.sqrt();
            (half_tr + r).abs().max((half_tr - r).abs())
        } else {
            det.sqrt()
        }
    }
}

/// `(position, velocity)` Gaussian law of one eigen-mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianLaw2D {
    pub mean: [f64; 2],
    pub cov: Mat2,
}

impl GaussianLaw2D {
    /// Symmetrizes `cov` and clamps eigenvalues in `[-1e-13, 0)` to zero.
    pub fn new(mean: [f64; 2], cov: Mat2) -> Result<Self> {
        let off = 0.5 * (cov.0[0][1] + cov.0[1][0]);
        let mut cov = Mat2::sym(cov.0[0][0], off, cov.0[1][1]);
        let (lo, hi) = cov.sym_eigenvalues();
        if !(lo.is_finite() && hi.is_finite()) || lo < -1e-13 {
            return Err(Error::arg(format!("covariance is not PSD (smallest eigenvalue {lo})")));
        }
        if lo < 0.0 {
            cov = clamp_psd(&cov);
        }
        Ok(Self { mean, cov })
    }

    /// The per-mode invariant law `N(0, diag(1/lambda, 1))`.
    pub fn invariant(lambda: f64) -> Self {
        Self { mean: [0.0, 0.0], cov: Mat2::diag(1.0 / lambda, 1.0) }
    }

    /// Position-mean-shifted start with standard Gaussian velocity.
    pub fn position_start(mean: f64, var: f64) -> Self {
        Self { mean: [mean, 0.0], cov: Mat2::diag(var, 1.0) }
    }
}

fn clamp_psd(m: &Mat2) -> Mat2 {
    let (lo, hi) = m.sym_eigenvalues();
    let (a, b) = (m.0[0][0], m.0[0][1]);
    // unit eigenvector for hi
    let v = if b.abs() > 0.0 {
        let (x, y) = (b, hi - a);
        let n = (x * x + y * y).sqrt();
        [x / n, y / n]
    } else if a >= m.0[1][1] {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    };
    let w = [-v[1], v[0]];
    let lo = lo.max(0.0);
    Mat2::sym(
        hi * v[0] * v[0] + lo * w[0] * w[0],
        hi * v[0] * v[1] + lo * w[0] * w[1],
        hi * v[1] * v[1] + lo * w[1] * w[1],
    )
}

/// Independent modes, one per Hessian eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductGaussianLaw {
    pub modes: Vec<GaussianLaw2D>,
}

impl ProductGaussianLaw {
    pub fn new(modes: Vec<GaussianLaw2D>) -> Self {
        Self { modes }
    }

    pub fn invariant(lambdas: &[f64]) -> Self {
        Self { modes: lambdas.iter().map(|&l| GaussianLaw2D::invariant(l)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.modes.len()
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::arg(format!("eigenvalue must be positive, got {lambda}")));
    }
    Ok(())
}

/// Mean map `A` and noise covariance `S` of one discrete step on mode `lambda`.
pub fn discrete_transition_matrices(lambda: f64, coeffs: &KernelCoefficients) -> Result<(Mat2, Mat2)> {
    check_lambda(lambda)?;
    let a = Mat2([
        [1.0 - coeffs.pos_grad * lambda, coeffs.pos_vel],
        [-coeffs.vel_grad * lambda, coeffs.vel_decay],
    ]);
    let s = Mat2::sym(coeffs.a, coeffs.c, coeffs.b);
    Ok((a, s))
}

/// Affine recursion of a single mode, reusable across many steps.
#[derive(Debug, Clone, Copy)]
pub struct DiscreteMode {
    pub transition: Mat2,
    pub noise: Mat2,
}

impl DiscreteMode {
    pub fn new(lambda: f64, coeffs: &KernelCoefficients) -> Result<Self> {
        let (transition, noise) = discrete_transition_matrices(lambda, coeffs)?;
        Ok(Self { transition, noise })
    }

    pub fn step(&self, law: &GaussianLaw2D) -> GaussianLaw2D {
        let cov = self.transition.congruence(&law.cov).add(&self.noise);
        let off = 0.5 * (cov.0[0][1] + cov.0[1][0]);
        GaussianLaw2D {
            mean: self.transition.apply(law.mean),
            cov: Mat2::sym(cov.0[0][0], off, cov.0[1][1]),
        }
    }
}

/// Exact law after `k` kinetic steps: per mode `m <- A m`, `C <- A C A^T + S`.
pub fn propagate_discrete(
    law: &ProductGaussianLaw,
    lambdas: &[f64],
    coeffs: &KernelCoefficients,
    k: u64,
) -> Result<ProductGaussianLaw> {
    if lambdas.len() != law.dim() {
        return Err(Error::arg(format!("{} eigenvalues for {} modes", lambdas.len(), law.dim())));
    }
    let modes = law
        .modes
        .iter()
        .zip(lambdas)
        .map(|(mode, &l)| {
            let step = DiscreteMode::new(l, coeffs)?;
            Ok((0..k).fold(*mode, |m, _| step.step(&m)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProductGaussianLaw { modes })
}

/// Solves `A x = b` for 3x3 `A` by partial pivoting.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Stationary law of the discrete chain on mode `lambda`, the fixed point of
/// `C = A C A^T + S`.
pub fn discrete_stationary(lambda: f64, coeffs: &KernelCoefficients) -> Result<GaussianLaw2D> {
    let (a, s) = discrete_transition_matrices(lambda, coeffs)?;
    let rho = a.spectral_radius();
    if !(rho < 1.0) {
        return Err(Error::UnstableParameters(format!(
            "spectral radius {rho} >= 1 for lambda = {lambda}"
        )));
    }
    let [[a11, a12], [a21, a22]] = a.0;
    // unknowns (p, r, q) of C = [[p, r], [r, q]]
    let m = [
        [1.0 - a11 * a11, -2.0 * a11 * a12, -a12 * a12],
        [-a11 * a21, 1.0 - (a11 * a22 + a12 * a21), -a12 * a22],
        [-a21 * a21, -2.0 * a21 * a22, 1.0 - a22 * a22],
    ];
    let rhs = [s.0[0][0], s.0[0][1], s.0[1][1]];
    let mut x = solve3(m, rhs)
        .ok_or_else(|| Error::UnstableParameters("singular stationary system".into()))?;
    // one round of iterative refinement
    let residual: Vec<f64> = (0..3)
        .map(|i| rhs[i] - (0..3).map(|j| m[i][j] * x[j]).sum::<f64>())
        .collect();
    if let Some(dx) = solve3(m, [residual[0], residual[1], residual[2]]) {
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
    }
    GaussianLaw2D::new([0.0, 0.0], Mat2::sym(x[0], x[1], x[2]))
}

// 4x4 helpers for the augmented exponential
type Mat4 = [[f64; 4]; 4];

fn mat4_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            for j in 0..4 {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn mat4_norm1(a: &Mat4) -> f64 {
    (0..4).map(|j| (0..4).map(|i| a[i][j].abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Taylor exponential of a matrix with `||x||_1 <= 1/2`.
fn expm_small(x: &Mat4) -> Mat4 {
    let norm = mat4_norm1(x);
    debug_assert!(norm <= 0.5 + 1e-12);
    let mut result = [[0.0; 4]; 4];
    let mut term = [[0.0; 4]; 4];
    for i in 0..4 {
        result[i][i] = 1.0;
        term[i][i] = 1.0;
    }
    let mut term_norm = 1.0;
    let mut k = 1.0;
    loop {
        term = mat4_mul(&term, x);
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v /= k;
            }
        }
        for i in 0..4 {
            for j in 0..4 {
                result[i][j] += term[i][j];
            }
        }
        term_norm *= norm / k;
        // tail after this term is at most term_norm * norm / (k + 1 - norm)
        if term_norm * norm / (k + 1.0 - norm) <= 1e-16 {
            break;
        }
        k += 1.0;
    }
    result
}

/// State transition `e^{F t}` and accumulated noise covariance
/// `int_0^t e^{F s} D e^{F^T s} ds` of one mode of the continuous diffusion,
/// with `F = [[0, 1], [-lambda, -beta]]` and `D = diag(0, 2 beta)`.
///
/// The pair is obtained from the exponential of the 4x4 block
/// `[[F, D], [0, -F^T]] h` on a short interval `h = t / 2^j`, then doubled
/// `j` times with `Q(2h) = Phi(h) Q(h) Phi(h)^T + Q(h)`.
pub fn continuous_flow(lambda: f64, beta: f64, t: f64) -> Result<(Mat2, Mat2)> {
    check_lambda(lambda)?;
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::param(format!("friction must be positive, got {beta}")));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::arg(format!("time must be non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok((Mat2::IDENTITY, Mat2::ZERO));
    }
    let f = [[0.0, 1.0], [-lambda, -beta]];
    let d = [[0.0, 0.0], [0.0, 2.0 * beta]];
    let mut block: Mat4 = [[0.0; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            block[i][j] = f[i][j];
            block[i][j + 2] = d[i][j];
            block[i + 2][j + 2] = -f[j][i];
        }
    }
    let norm = mat4_norm1(&block) * t;
    let mut halvings = 0i32;
    while norm / 2f64.powi(halvings) > 0.5 {
        halvings += 1;
    }
    let h = t / 2f64.powi(halvings);
    for row in block.iter_mut() {
        for v in row.iter_mut() {
            *v *= h;
        }
    }
    let e = expm_small(&block);
    let phi = Mat2([[e[0][0], e[0][1]], [e[1][0], e[1][1]]]);
    let g12 = Mat2([[e[0][2], e[0][3]], [e[1][2], e[1][3]]]);
    let q = g12.mul(&phi.transpose());
    let mut phi = phi;
    let mut q = Mat2::sym(q.0[0][0], 0.5 * (q.0[0][1] + q.0[1][0]), q.0[1][1]);
    for _ in 0..halvings {
        q = phi.congruence(&q).add(&q);
        q = Mat2::sym(q.0[0][0], 0.5 * (q.0[0][1] + q.0[1][0]), q.0[1][1]);
        phi = phi.mul(&phi);
    }
    Ok((phi, q))
}

/// Exact law at time `t` of the continuous kinetic diffusion on one mode.
pub fn propagate_continuous(law: &GaussianLaw2D, lambda: f64, beta: f64, t: f64) -> Result<GaussianLaw2D> {
    let (phi, q) = continuous_flow(lambda, beta, t)?;
    GaussianLaw2D::new(phi.apply(law.mean), phi.congruence(&law.cov).add(&q))
}

fn check_modes(p: &ProductGaussianLaw, q: &ProductGaussianLaw) -> Result<()> {
    if p.dim() != q.dim() {
        return Err(Error::arg(format!("{} modes vs {} modes", p.dim(), q.dim())));
    }
    Ok(())
}

fn is_pd(m: &Mat2) -> bool {
    let (lo, hi) = m.sym_eigenvalues();
    hi > 0.0 && lo > 1e-12 * hi
}

/// `KL(p | q)` of one 2D mode. A singular `p` has infinite divergence.
pub fn kl_mode(p: &GaussianLaw2D, q: &GaussianLaw2D) -> Result<f64> {
    let qi = match q.cov.inverse() {
        Some(qi) if is_pd(&q.cov) => qi,
        _ => return Err(Error::arg("KL reference covariance must be positive definite")),
    };
    if !is_pd(&p.cov) {
        return Ok(f64::INFINITY);
    }
    let d = [p.mean[0] - q.mean[0], p.mean[1] - q.mean[1]];
    let qd = qi.apply(d);
    let maha = d[0] * qd[0] + d[1] * qd[1];
    let tr = qi.mul(&p.cov).trace();
    let log_det_ratio = (q.cov.det() / p.cov.det()).ln();
    Ok((0.5 * (tr - 2.0 + maha + log_det_ratio)).max(0.0))
}

/// `log(1 + chi2(p | q))` of one 2D mode; `+inf` when the divergence is infinite.
///
/// The integral `int p^2 / q` converges iff `2 Sigma_q - Sigma_p` is positive
/// definite, and then equals
/// `det Sq / sqrt(det Sp det(2 Sq - Sp)) * exp(d^T (2 Sq - Sp)^{-1} d)`.
pub fn log1p_chi2_mode(p: &GaussianLaw2D, q: &GaussianLaw2D) -> f64 {
    if !is_pd(&q.cov) || !is_pd(&p.cov) {
        return f64::INFINITY;
    }
    let m = q.cov.scale(2.0).add(&p.cov.scale(-1.0));
    if !is_pd(&m) {
        return f64::INFINITY;
    }
    let mi = match m.inverse() {
        Some(mi) => mi,
        None => return f64::INFINITY,
    };
    let d = [p.mean[0] - q.mean[0], p.mean[1] - q.mean[1]];
    let md = mi.apply(d);
    let quad = d[0] * md[0] + d[1] * md[1];
    let v = q.cov.det().ln() - 0.5 * p.cov.det().ln() - 0.5 * m.det().ln() + quad;
    v.max(0.0)
}

/// Total KL between product laws (sum over modes).
pub fn kl_gaussian(p: &ProductGaussianLaw, q: &ProductGaussianLaw) -> Result<f64> {
    check_modes(p, q)?;
    p.modes.iter().zip(&q.modes).map(|(a, b)| kl_mode(a, b)).sum()
}

/// `log(1 + chi2)` between product laws; the factors multiply.
pub fn log1p_chi2_gaussian(p: &ProductGaussianLaw, q: &ProductGaussianLaw) -> Result<f64> {
    check_modes(p, q)?;
    Ok(p.modes.iter().zip(&q.modes).map(|(a, b)| log1p_chi2_mode(a, b)).sum())
}

/// Chi-square divergence between product laws, `+inf` when not integrable.
pub fn chi2_gaussian(p: &ProductGaussianLaw, q: &ProductGaussianLaw) -> Result<f64> {
    Ok(log1p_chi2_gaussian(p, q)?.exp_m1())
}

/// `KL(N(mp, vp) | N(mq, vq))` in one dimension.
pub fn kl_normal_1d(mp: f64, vp: f64, mq: f64, vq: f64) -> f64 {
    if !(vp > 0.0) {
        return f64::INFINITY;
    }
    let r = vp / vq;
    (0.5 * (r - 1.0 - r.ln() + (mp - mq) * (mp - mq) / vq)).max(0.0)
}

/// `log(1 + chi2(N(mp, vp) | N(mq, vq)))` in one dimension.
pub fn log1p_chi2_normal_1d(mp: f64, vp: f64, mq: f64, vq: f64) -> f64 {
    let m = 2.0 * vq - vp;
    if !(vp > 0.0) || !(m > 1e-12 * vq) {
        return f64::INFINITY;
    }
    let d = mp - mq;
    (vq.ln() - 0.5 * vp.ln() - 0.5 * m.ln() + d * d / m).max(0.0)
}

/// `min(1, sqrt(log(1 + chi2)))`, an upper bound on total variation.
pub fn tv_upper_from_chi2(chi2: f64) -> Result<f64> {
    if chi2.is_nan() || chi2 < 0.0 {
        return Err(Error::arg(format!("chi-square must be non-negative, got {chi2}")));
    }
    Ok(tv_upper_from_log1p_chi2(chi2.ln_1p()))
}

/// Same bound, from `log(1 + chi2)` directly.
pub fn tv_upper_from_log1p_chi2(log1p_chi2: f64) -> f64 {
    log1p_chi2.max(0.0).sqrt().min(1.0)
}

/// Stationary position variance of the overdamped chain on mode `lambda`,
/// `2 eta / (1 - (1 - eta lambda)^2)`.
pub fn overdamped_stationary_var(lambda: f64, eta: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let contraction = 1.0 - eta * lambda;
    if !(eta > 0.0) || contraction.abs() >= 1.0 {
        return Err(Error::UnstableParameters(format!(
            "overdamped step {eta} is unstable for lambda = {lambda}"
        )));
    }
    Ok(2.0 / (lambda * (2.0 - eta * lambda)))
}

/// One exact overdamped step on a 1D Gaussian `(mean, var)`.
pub fn overdamped_step_law(mean: f64, var: f64, lambda: f64, eta: f64) -> (f64, f64) {
    let c = 1.0 - eta * lambda;
    (c * mean, c * c * var + 2.0 * eta)
}
