use rand::Rng;
use rand_distr::StandardNormal;

use super::{build_target, num, read_init, read_recording, Csv};
use crate::chain::{replica_rng, run_chain, ChainState, RunSpec, SamplerKind};
use crate::config::Config;
use crate::divergences::{tv_discrete, DiscreteDist};
use crate::kernel::FrictionStep;
use crate::targets::DiagonalGaussian;
use crate::{Error, Result};

/// CSV text plus the divergences it summarizes.
#[derive(Debug, Clone)]
pub struct SampleOutput {
    pub csv: String,
    pub diverged: Vec<Error>,
}

// separates projection streams from replica streams
const PROJECTION_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Runs the chain and tabulates replica moments at each checkpoint.
pub fn cmd_sample(cfg: &Config) -> Result<SampleOutput> {
    let mut r = Config::new();
    let target = build_target(cfg, &mut r)?;
    let n = target.as_target().dim();

    let kind_str = cfg.get_str("sampler.kind").unwrap_or("kinetic");
    let sampler: SamplerKind = kind_str.parse().map_err(|e: Error| cfg.error_at("sampler.kind", e.to_string()))?;
    r.set("sampler.kind", sampler);
    let eta = cfg.require_f64("sampler.eta")?;
    r.set("sampler.eta", eta);
    let beta = match sampler {
        SamplerKind::Kinetic => {
            let b = cfg.f64_or("sampler.beta", 1.0)?;
            r.set("sampler.beta", b);
            b
        }
        SamplerKind::Overdamped => 1.0,
    };
    let friction_step = FrictionStep::new(beta, eta).map_err(|e| cfg.error_at("sampler.eta", e.to_string()))?;
    let steps = cfg.u64_or("sampler.steps", 1000)?;
    let replicas = cfg.u64_or("sampler.replicas", 1000)? as usize;
    if replicas == 0 {
        return Err(cfg.error_at("sampler.replicas", "at least one replica is required"));
    }
    let seed = cfg.u64_or("seed", 0)?;
    r.set("sampler.steps", steps);
    r.set("sampler.replicas", replicas);
    r.set("seed", seed);
    let record = read_recording(cfg, &mut r)?;
    let init = read_init(cfg, &mut r, n)?;

    let sliced = cfg.bool_or("sample.sliced_tv", false)?;
    r.set("sample.sliced_tv", sliced);
    let sliced_setup = if sliced {
        let gaussian = target.gaussian().cloned().ok_or_else(|| {
            Error::UnsupportedTarget("the sliced TV heuristic needs a diagonal Gaussian target".into())
        })?;
        let projections = cfg.u64_or("sample.sliced_projections", 16)? as usize;
        let bins = cfg.u64_or("sample.sliced_bins", 20)? as usize;
        if projections == 0 || bins == 0 {
            return Err(cfg.error_at("sample.sliced_projections", "projections and bins must be positive"));
        }
        r.set("sample.sliced_projections", projections);
        r.set("sample.sliced_bins", bins);
        Some((gaussian, projections, bins))
    } else {
        None
    };

    let spec = RunSpec {
        sampler,
        friction_step,
        init,
        steps,
        replicas,
        seed,
        record,
        keep_snapshots: sliced_setup.is_some(),
    };
    let out = run_chain(target.as_target(), &spec)?;

    let mut header = vec!["step", "t", "mean_abs_x2", "mean_abs_y2", "replica_count"];
    if sliced_setup.is_some() {
        header.push("sliced_tv_heuristic");
    }
    let mut csv = Csv::new("sample", &r, &header);
    if sliced_setup.is_some() {
        csv.note("sliced_tv_heuristic is a biased histogram estimate on random projections, not a bound");
    }
    csv.note(format!("diverged.count = {}", out.diverged.len()));
    for e in &out.diverged {
        if let Error::DivergedChain { replica, step, .. } = e {
            csv.note(format!("diverged.replica.{replica} = step {step}"));
        }
    }

    for (step, report) in &out.reports {
        let mut row = vec![
            step.to_string(),
            num(*step as f64 * eta),
            num(report.second_moment_position),
            num(report.second_moment_velocity),
            report.samples_used.to_string(),
        ];
        if let Some((g, projections, bins)) = &sliced_setup {
            let c = out.checkpoints.iter().position(|s| s == step).expect("report at a checkpoint");
            let snap = &out.snapshots.as_ref().expect("snapshots kept")[c];
            let states: Vec<&ChainState> = snap.iter().flatten().collect();
            row.push(num(sliced_tv(g, &states, *projections, *bins, seed, *step)?));
        }
        csv.push(row);
    }
    Ok(SampleOutput { csv: csv.render(), diverged: out.diverged })
}

/// Mean over random directions of the histogram TV between the projected
/// replicas and an equally sized exact sample of the projected target.
fn sliced_tv(
    target: &DiagonalGaussian,
    states: &[&ChainState],
    projections: usize,
    bins: usize,
    seed: u64,
    step: u64,
) -> Result<f64> {
    let n = target.eigenvalues().len();
    let mut total = 0.0;
    for p in 0..projections {
        let mut dir_rng = replica_rng(seed ^ PROJECTION_SALT, p);
        let mut theta: Vec<f64> = (0..n).map(|_| dir_rng.sample(StandardNormal)).collect();
        let norm = theta.iter().map(|t| t * t).sum::<f64>().sqrt();
        theta.iter_mut().for_each(|t| *t /= norm);

        let mean: f64 = theta.iter().zip(target.mean_shift()).map(|(t, m)| t * m).sum();
        let sd = theta
            .iter()
            .zip(target.eigenvalues())
            .map(|(t, l)| t * t / l)
            .sum::<f64>()
            .sqrt();
        let lo = mean - 4.0 * sd;
        let width = 8.0 * sd / bins as f64;
        let cell = |v: f64| -> usize {
            if v < lo {
                0
            } else {
                (((v - lo) / width) as usize + 1).min(bins + 1)
            }
        };

        let mut emp = vec![0.0; bins + 2];
        for s in states {
            let v: f64 = theta.iter().zip(&s.position).map(|(t, x)| t * x).sum();
            emp[cell(v)] += 1.0;
        }
        let mut ref_rng = replica_rng(seed ^ PROJECTION_SALT.rotate_left(17) ^ step, p);
        let mut reference = vec![0.0; bins + 2];
        for _ in 0..states.len() {
            let z: f64 = ref_rng.sample(StandardNormal);
            reference[cell(mean + sd * z)] += 1.0;
        }
        total += tv_discrete(&DiscreteDist::new(emp)?, &DiscreteDist::new(reference)?)?;
    }
    Ok(total / projections as f64)
}
