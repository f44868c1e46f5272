use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{num, Csv};
use crate::bounds::{make_schedule, ScheduleInput};
use crate::config::{format_list, Config};
use crate::gaussian_exact::{
    discrete_stationary, kl_normal_1d, log1p_chi2_normal_1d, overdamped_stationary_var, overdamped_step_law,
    tv_upper_from_log1p_chi2, DiscreteMode, GaussianLaw2D,
};
use crate::kernel::{compute_coefficients, FrictionStep};
use crate::{Error, Result};

/// Inputs of a dimension sweep on diagonal Gaussian targets.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub dims: Vec<usize>,
    pub epsilon: f64,
    pub chi2_warm: f64,
    pub max_steps: u64,
    /// Eigenvalue pattern repeated cyclically up to each dimension.
    pub eigenvalues: Vec<f64>,
    pub c_const: f64,
    pub big_c_const: f64,
}

impl SweepSettings {
    /// Standard Gaussian targets at the default dimensions 16, 64, 256.
    pub fn standard(epsilon: f64, chi2_warm: f64) -> Self {
        Self {
            dims: vec![16, 64, 256],
            epsilon,
            chi2_warm,
            max_steps: 10_000_000,
            eigenvalues: vec![1.0],
            c_const: 1.0,
            big_c_const: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub steps_kinetic: u64,
    pub steps_overdamped: u64,
    pub eta_kinetic: f64,
    pub eta_overdamped: f64,
    pub beta: f64,
    /// Stationary position-marginal KL to the target, equal for both chains.
    pub bias_kl_kinetic: f64,
    pub bias_kl_overdamped: f64,
    /// False if either chain hit `max_steps` before reaching the accuracy.
    pub reached: bool,
}

impl SweepRow {
    pub fn ratio(&self) -> f64 {
        self.steps_overdamped as f64 / self.steps_kinetic as f64
    }
}

/// Distinct eigenvalues with multiplicities.
fn mode_groups(pattern: &[f64], n: usize) -> Vec<(f64, f64)> {
    let mut groups: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    for i in 0..n {
        let l = pattern[i % pattern.len()];
        groups.entry(l.to_bits()).or_insert((l, 0.0)).1 += 1.0;
    }
    groups.into_values().collect()
}

fn sweep_row(s: &SweepSettings, n: usize) -> Result<SweepRow> {
    let groups = mode_groups(&s.eigenvalues, n);
    let lmax = groups.iter().map(|g| g.0).fold(f64::MIN, f64::max);
    let lmin = groups.iter().map(|g| g.0).fold(f64::MAX, f64::min);
    let mut input = ScheduleInput::new(s.epsilon, n, lmax, 1.0 / lmin, s.chi2_warm, true);
    input.c_const = s.c_const;
    input.big_c_const = s.big_c_const;
    let sched = make_schedule(&input)?;
    let coeffs = compute_coefficients(FrictionStep::new(sched.beta, sched.eta)?);

    let mut bias_kin = 0.0;
    for &(l, count) in &groups {
        let st = discrete_stationary(l, &coeffs)?;
        bias_kin += count * kl_normal_1d(st.mean[0], st.cov.0[0][0], 0.0, 1.0 / l);
    }
    let bias_od = |eta: f64| -> f64 {
        groups
            .iter()
            .map(|&(l, count)| match overdamped_stationary_var(l, eta) {
                Ok(v) => count * kl_normal_1d(0.0, v, 0.0, 1.0 / l),
                Err(_) => f64::INFINITY,
            })
            .sum()
    };
    // bias_od is increasing on (0, 2 / lmax) and unbounded at the right end
    let (mut lo, mut hi) = (0.0, 2.0 / lmax);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if bias_od(mid) < bias_kin {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let eta_od = 0.5 * (lo + hi);

    // position shift with lambda m^2 = log(1 + chi2_warm) / n in every mode
    let shift = |l: f64| ((s.chi2_warm.ln_1p() / n as f64) / l).sqrt();
    let done = |log1p_chi2: f64| tv_upper_from_log1p_chi2(log1p_chi2) <= s.epsilon;

    let modes: Vec<(DiscreteMode, f64, f64)> = groups
        .iter()
        .map(|&(l, c)| Ok((DiscreteMode::new(l, &coeffs)?, l, c)))
        .collect::<Result<_>>()?;
    let mut kin: Vec<GaussianLaw2D> =
        groups.iter().map(|&(l, _)| GaussianLaw2D::position_start(shift(l), 1.0 / l)).collect();
    let mut steps_kin = 0;
    let mut kin_reached = false;
    while steps_kin < s.max_steps {
        steps_kin += 1;
        let mut total = 0.0;
        for (law, (m, l, c)) in kin.iter_mut().zip(&modes) {
            *law = m.step(law);
            total += c * log1p_chi2_normal_1d(law.mean[0], law.cov.0[0][0], 0.0, 1.0 / l);
        }
        if done(total) {
            kin_reached = true;
            break;
        }
    }

    let mut od: Vec<(f64, f64)> = groups.iter().map(|&(l, _)| (shift(l), 1.0 / l)).collect();
    let mut steps_od = 0;
    let mut od_reached = false;
    while steps_od < s.max_steps {
        steps_od += 1;
        let mut total = 0.0;
        for (state, &(l, c)) in od.iter_mut().zip(&groups) {
            *state = overdamped_step_law(state.0, state.1, l, eta_od);
            total += c * log1p_chi2_normal_1d(state.0, state.1, 0.0, 1.0 / l);
        }
        if done(total) {
            od_reached = true;
            break;
        }
    }

    Ok(SweepRow {
        n,
        steps_kinetic: steps_kin,
        steps_overdamped: steps_od,
        eta_kinetic: sched.eta,
        eta_overdamped: eta_od,
        beta: sched.beta,
        bias_kl_kinetic: bias_kin,
        bias_kl_overdamped: bias_od(eta_od),
        reached: kin_reached && od_reached,
    })
}

/// Steps to accuracy for both chains at each dimension, in input order.
///
/// Both chains start from the same warm position law, whose chi-square
/// divergence to the target is exactly `chi2_warm`; the kinetic velocity
/// starts at its stationary law. Accuracy is measured on the position
/// marginal through `min(1, sqrt(log(1 + chi2)))`. The kinetic chain uses the
/// log-concave schedule; the overdamped step is matched so both stationary
/// laws are equally far from the target in KL.
pub fn sweep_rows(s: &SweepSettings) -> Result<Vec<SweepRow>> {
    if s.dims.is_empty() || s.dims.contains(&0) {
        return Err(Error::InvalidParameter("sweep dimensions must be positive".into()));
    }
    if s.eigenvalues.is_empty() || s.eigenvalues.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(Error::InvalidParameter("sweep eigenvalues must be positive".into()));
    }
    if s.max_steps == 0 {
        return Err(Error::InvalidParameter("max_steps must be at least 1".into()));
    }
    s.dims.par_iter().map(|&n| sweep_row(s, n)).collect()
}

/// The matched-bias dimension sweep as CSV.
pub fn cmd_sweep(cfg: &Config) -> Result<String> {
    let mut r = Config::new();
    let kind = cfg.get_str("target.kind").unwrap_or("standard_gaussian");
    let eigenvalues = match kind {
        "standard_gaussian" => vec![1.0],
        "diagonal_gaussian" => cfg
            .get_f64_list("target.eigenvalues")?
            .ok_or_else(|| cfg.error_at("target.kind", "diagonal_gaussian needs target.eigenvalues"))?,
        "gaussian_mixture" => {
            return Err(Error::UnsupportedTarget("sweep needs diagonal Gaussian targets".into()))
        }
        other => return Err(cfg.error_at("target.kind", format!("unknown target kind '{other}'"))),
    };
    r.set("target.kind", kind);
    if kind == "diagonal_gaussian" {
        r.set("target.eigenvalues", format_list(&eigenvalues));
    }
    let mode = cfg.get_str("sweep.mode").unwrap_or("matched_bias");
    if mode != "matched_bias" {
        return Err(cfg.error_at("sweep.mode", format!("unknown sweep.mode '{mode}' (matched_bias)")));
    }
    r.set("sweep.mode", mode);
    let dims = cfg
        .get_u64_list("sweep.dims")?
        .unwrap_or_else(|| vec![16, 64, 256])
        .into_iter()
        .map(|d| d as usize)
        .collect::<Vec<_>>();
    let defaults = SweepSettings::standard(0.1, 10.0);
    let settings = SweepSettings {
        dims,
        epsilon: cfg.f64_or("sweep.epsilon", defaults.epsilon)?,
        chi2_warm: cfg.f64_or("sweep.chi2_warm", defaults.chi2_warm)?,
        max_steps: cfg.u64_or("sweep.max_steps", defaults.max_steps)?,
        eigenvalues,
        c_const: cfg.f64_or("schedule.c", 1.0)?,
        big_c_const: cfg.f64_or("schedule.C", 1.0)?,
    };
    r.set("sweep.dims", settings.dims.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
    r.set("sweep.epsilon", settings.epsilon);
    r.set("sweep.chi2_warm", settings.chi2_warm);
    r.set("sweep.max_steps", settings.max_steps);
    r.set("schedule.c", settings.c_const);
    r.set("schedule.C", settings.big_c_const);

    let rows = sweep_rows(&settings)?;
    let mut csv = Csv::new(
        "sweep",
        &r,
        &[
            "n",
            "steps_kinetic",
            "steps_overdamped",
            "ratio",
            "eta_kinetic",
            "eta_overdamped",
            "beta",
            "bias_kl_kinetic",
            "bias_kl_overdamped",
            "reached",
        ],
    );
    for row in &rows {
        csv.push(vec![
            row.n.to_string(),
            row.steps_kinetic.to_string(),
            row.steps_overdamped.to_string(),
            num(row.ratio()),
            num(row.eta_kinetic),
            num(row.eta_overdamped),
            num(row.beta),
            num(row.bias_kl_kinetic),
            num(row.bias_kl_overdamped),
            row.reached.to_string(),
        ]);
    }
    Ok(csv.render())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimension_loose_accuracy() {
        let mut s = SweepSettings::standard(0.5, 2.0);
        s.dims = vec![1];
        let row = sweep_rows(&s).unwrap()[0];
        assert!(row.reached);
        assert!(row.steps_kinetic >= 1 && row.steps_overdamped >= 1);
        assert!(row.steps_kinetic < 100 && row.steps_overdamped < 100, "{row:?}");
        assert!((row.ratio() - 1.0).abs() < 0.5, "{row:?}");
    }

    #[test]
    fn biases_are_matched() {
        let row = sweep_rows(&SweepSettings::standard(0.1, 10.0)).unwrap()[0];
        assert!((row.bias_kl_overdamped / row.bias_kl_kinetic - 1.0).abs() < 1e-9, "{row:?}");
    }

    #[test]
    fn looser_accuracy_never_needs_more_steps() {
        let mut prev: Option<Vec<SweepRow>> = None;
        for eps in [0.025, 0.05, 0.1, 0.2, 0.4] {
            let rows = sweep_rows(&SweepSettings::standard(eps, 10.0)).unwrap();
            if let Some(p) = &prev {
                for (t, l) in p.iter().zip(&rows) {
                    assert!(l.steps_kinetic <= t.steps_kinetic, "{t:?} {l:?}");
                    assert!(l.steps_overdamped <= t.steps_overdamped, "{t:?} {l:?}");
                }
            }
            prev = Some(rows);
        }
    }

    #[test]
    fn step_cap_flags_row() {
        let mut s = SweepSettings::standard(0.1, 10.0);
        s.dims = vec![4];
        s.max_steps = 3;
        let row = sweep_rows(&s).unwrap()[0];
        assert!(!row.reached);
        assert_eq!(row.steps_kinetic, 3);
    }

    #[test]
    fn mixtures_rejected() {
        let cfg = Config::parse("target.kind = gaussian_mixture\n").unwrap();
        assert!(matches!(cmd_sweep(&cfg), Err(Error::UnsupportedTarget(_))));
    }
}
