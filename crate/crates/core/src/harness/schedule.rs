use super::{build_target, num, Csv};
use crate::bounds::{make_schedule, total_tv_prediction, Schedule, ScheduleInput};
use crate::config::Config;
use crate::{Error, Result};

/// Stdout fragment (a valid config) and the CSV row.
#[derive(Debug, Clone)]
pub struct ScheduleOutput {
    pub schedule: Schedule,
    pub total_tv_prediction: f64,
    pub stdout: String,
    pub csv: String,
}

/// Resolves [`ScheduleInput`] from `schedule.*` keys, falling back on the
/// declared constants of the configured target.
pub(crate) fn read_schedule_input(cfg: &Config, r: &mut Config) -> Result<ScheduleInput> {
    let meta = if cfg.contains("target.kind") {
        let spec = build_target(cfg, r)?;
        Some((spec.as_target().dim(), spec.as_target().metadata()))
    } else {
        None
    };
    let need = |key: &str, fallback: Option<f64>| -> Result<f64> {
        match cfg.get_f64(key)? {
            Some(v) => Ok(v),
            None => fallback.ok_or_else(|| {
                Error::Config { location: "config".into(), message: format!("missing required key '{key}'") }
            }),
        }
    };
    let epsilon = cfg.require_f64("schedule.epsilon")?;
    let n = match cfg.get_u64("schedule.n")? {
        Some(n) => n as usize,
        None => need("schedule.n", meta.map(|(n, _)| n as f64))? as usize,
    };
    let lipschitz = need("schedule.lipschitz", meta.and_then(|(_, m)| m.lipschitz_l))?;
    let poincare = need("schedule.poincare", meta.and_then(|(_, m)| m.poincare_cp))?;
    let log_concave = cfg.bool_or("schedule.log_concave", meta.is_some_and(|(_, m)| m.log_concave))?;
    let chi2_warm = cfg.require_f64("schedule.chi2_warm")?;

    let mut input = ScheduleInput::new(epsilon, n, lipschitz, poincare, chi2_warm, log_concave);
    if let Some(k) = cfg.get_f64("schedule.kappa")? {
        input.kappa = k;
    } else if let Some(k) = meta.and_then(|(_, m)| m.semiconvex_kappa) {
        input.kappa = k;
    }
    input.c_const = cfg.f64_or("schedule.c", input.c_const)?;
    input.big_c_const = cfg.f64_or("schedule.C", input.big_c_const)?;
    input.c_disc = cfg.f64_or("schedule.C_disc", input.c_disc)?;

    r.set("schedule.epsilon", input.epsilon);
    r.set("schedule.n", input.n);
    r.set("schedule.lipschitz", input.lipschitz);
    r.set("schedule.poincare", input.poincare);
    r.set("schedule.kappa", input.kappa);
    r.set("schedule.chi2_warm", input.chi2_warm);
    r.set("schedule.log_concave", input.log_concave);
    r.set("schedule.c", input.c_const);
    r.set("schedule.C", input.big_c_const);
    r.set("schedule.C_disc", input.c_disc);
    Ok(input)
}

/// Friction, step size and step count for a target accuracy.
pub fn cmd_schedule(cfg: &Config) -> Result<ScheduleOutput> {
    let mut r = Config::new();
    let input = read_schedule_input(cfg, &mut r)?;
    let schedule = make_schedule(&input)?;
    let total = total_tv_prediction(&input, &schedule)?;

    let mut fragment = Config::new();
    fragment.set("beta", num(schedule.beta));
    fragment.set("eta", num(schedule.eta));
    fragment.set("k", schedule.k);
    fragment.set("predicted_tv", num(schedule.predicted_tv));
    fragment.set("total_tv_prediction", num(total));

    let mut csv = Csv::new(
        "schedule",
        &r,
        &["epsilon", "n", "lipschitz", "poincare", "log_concave", "chi2_warm", "beta", "eta", "k", "predicted_tv", "total_tv_prediction"],
    );
    csv.push(vec![
        num(input.epsilon),
        input.n.to_string(),
        num(input.lipschitz),
        num(input.poincare),
        input.log_concave.to_string(),
        num(input.chi2_warm),
        num(schedule.beta),
        num(schedule.eta),
        schedule.k.to_string(),
        num(schedule.predicted_tv),
        num(total),
    ]);
    Ok(ScheduleOutput { schedule, total_tv_prediction: total, stdout: fragment.serialize(), csv: csv.render() })
}
