use super::{build_target, num, read_init, read_recording, require_gaussian, Csv};
use crate::bounds::log_hypocoercive_factor;
use crate::chain::PositionLaw;
use crate::config::Config;
use crate::gaussian_exact::{
    kl_gaussian, log1p_chi2_gaussian, propagate_continuous, DiscreteMode, GaussianLaw2D, ProductGaussianLaw,
};
use crate::kernel::{compute_coefficients, FrictionStep};
use crate::targets::Target;
use crate::Result;

/// `log(1 + factor * chi2_0)` from `log factor` and `chi2_0`, the chi-square
/// decay bound mapped onto the `log(1 + chi2)` scale.
pub(crate) fn log1p_scaled(log_factor: f64, chi2_0: f64) -> f64 {
    if chi2_0 == 0.0 {
        return 0.0;
    }
    let l = log_factor + chi2_0.ln();
    if l > 30.0 {
        l + (-l).exp().ln_1p()
    } else {
        l.exp().ln_1p()
    }
}

/// Exact divergences to the target along the discrete chain or the
/// continuous flow, next to the explicit hypocoercive bound.
pub fn cmd_exact_gaussian(cfg: &Config) -> Result<String> {
    let mut r = Config::new();
    let spec = build_target(cfg, &mut r)?;
    let target = require_gaussian(&spec, "exact-gaussian")?;
    let lambdas = target.eigenvalues().to_vec();
    let n = lambdas.len();
    let meta = target.metadata();
    let poincare = meta.poincare_cp.expect("Gaussian targets declare C_P");
    let kappa = meta.semiconvex_kappa.unwrap_or(0.0);

    let mode = cfg.get_str("exact.mode").unwrap_or("continuous");
    r.set("exact.mode", mode);
    let beta = cfg.f64_or("sampler.beta", 1.0)?;
    r.set("sampler.beta", beta);
    let mut init_cfg = cfg.clone();
    if !cfg.contains("init.kind") {
        init_cfg.set("init.kind", "gaussian");
    }
    let init = read_init(&init_cfg, &mut r, n)?;
    let (mean, var) = match &init.position_law {
        PositionLaw::PointMass(x) => (x.clone(), vec![0.0; n]),
        PositionLaw::Gaussian { mean, var } => (mean.clone(), var.clone()),
    };
    let start = ProductGaussianLaw::new(
        (0..n).map(|i| GaussianLaw2D::position_start(mean[i] - target.mean_shift()[i], var[i])).collect(),
    );
    let pi = ProductGaussianLaw::invariant(&lambdas);
    let chi2_0 = log1p_chi2_gaussian(&start, &pi)?.exp_m1();

    let row_values = |law: &ProductGaussianLaw, t: f64| -> Result<[String; 3]> {
        let bound = log1p_scaled(log_hypocoercive_factor(beta, poincare, kappa, t), chi2_0);
        Ok([num(kl_gaussian(law, &pi)?), num(log1p_chi2_gaussian(law, &pi)?), num(bound)])
    };

    const TAIL: [&str; 3] = ["kl_to_pi", "log1p_chi2_to_pi", "hypocoercive_log_bound"];
    match mode {
        "continuous" => {
            let t_max = cfg.f64_or("exact.t_max", 50.0)?;
            let points = cfg.u64_or("exact.points", 100)?;
            if !(t_max.is_finite() && t_max >= 0.0) {
                return Err(cfg.error_at("exact.t_max", "exact.t_max must be finite and non-negative"));
            }
            if points < 2 {
                return Err(cfg.error_at("exact.points", "exact.points must be at least 2"));
            }
            r.set("exact.t_max", t_max);
            r.set("exact.points", points);
            let mut csv = Csv::new("exact-gaussian", &r, &[&["t"][..], &TAIL[..]].concat());
            csv.note(format!("chi2_0 = {}", num(chi2_0)));
            for i in 0..points {
                let t = t_max * i as f64 / (points - 1) as f64;
                let law = ProductGaussianLaw::new(
                    start
                        .modes
                        .iter()
                        .zip(&lambdas)
                        .map(|(m, &l)| propagate_continuous(m, l, beta, t))
                        .collect::<Result<_>>()?,
                );
                let mut row = vec![num(t)];
                row.extend(row_values(&law, t)?);
                csv.push(row);
            }
            Ok(csv.render())
        }
        "discrete" => {
            let eta = cfg.require_f64("sampler.eta")?;
            let steps = cfg.u64_or("sampler.steps", 1000)?;
            r.set("sampler.eta", eta);
            r.set("sampler.steps", steps);
            let record = read_recording(cfg, &mut r)?;
            let fs = FrictionStep::new(beta, eta).map_err(|e| cfg.error_at("sampler.eta", e.to_string()))?;
            let coeffs = compute_coefficients(fs);
            let modes: Vec<DiscreteMode> =
                lambdas.iter().map(|&l| DiscreteMode::new(l, &coeffs)).collect::<Result<_>>()?;
            let mut csv = Csv::new("exact-gaussian", &r, &[&["step", "t"][..], &TAIL[..]].concat());
            csv.note(format!("chi2_0 = {}", num(chi2_0)));
            let mut law = start;
            let mut k = 0u64;
            for c in record.checkpoints(steps) {
                while k < c {
                    for (m, dm) in law.modes.iter_mut().zip(&modes) {
                        *m = dm.step(m);
                    }
                    k += 1;
                }
                let t = c as f64 * eta;
                let mut row = vec![c.to_string(), num(t)];
                row.extend(row_values(&law, t)?);
                csv.push(row);
            }
            Ok(csv.render())
        }
        other => Err(cfg.error_at("exact.mode", format!("unknown exact.mode '{other}' (continuous, discrete)"))),
    }
}
