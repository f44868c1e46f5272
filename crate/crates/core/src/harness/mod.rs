//! CLI subcommands. Each one reads a [`Config`], records every parameter it
//! resolved (defaults included) in a `#` preamble, and returns CSV text
//! that is a deterministic function of the config.
//!
//! The experiment designs are constructed to exercise verifiable
//! consequences of the convergence theory; there is no reference protocol.

mod exact;
mod sample;
mod schedule;
mod sweep;

pub use exact::cmd_exact_gaussian;
pub use sample::{cmd_sample, SampleOutput};
pub use schedule::{cmd_schedule, ScheduleOutput};
pub use sweep::{cmd_sweep, sweep_rows, SweepRow, SweepSettings};

use crate::chain::{InitDistribution, Recording};
use crate::config::{format_list, Config};
use crate::targets::{
    make_diagonal_gaussian, make_gaussian_mixture, make_standard_gaussian, DiagonalGaussian, GaussianMixture,
    Target,
};
use crate::{Error, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Shortest round-trip decimal.
pub(crate) fn num(x: f64) -> String {
    x.to_string()
}

/// Comma-separated table with a `#` preamble.
#[derive(Debug, Clone)]
pub(crate) struct Csv {
    preamble: Vec<String>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub(crate) fn new(command: &str, resolved: &Config, header: &[&str]) -> Self {
        let mut preamble = vec![format!("tool = kinlangevin {TOOL_VERSION}"), format!("command = {command}")];
        preamble.extend(resolved.serialize().lines().map(str::to_string));
        Self { preamble, header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub(crate) fn note(&mut self, line: impl Into<String>) {
        self.preamble.push(line.into());
    }

    pub(crate) fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub(crate) fn render(&self) -> String {
        let mut out = String::new();
        for line in &self.preamble {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Target built from the `target.*` block.
#[derive(Debug, Clone)]
pub enum TargetSpec {
    Gaussian(DiagonalGaussian),
    Mixture(GaussianMixture),
}

impl TargetSpec {
    pub fn as_target(&self) -> &dyn Target {
        match self {
            TargetSpec::Gaussian(g) => g,
            TargetSpec::Mixture(m) => m,
        }
    }

    pub fn gaussian(&self) -> Option<&DiagonalGaussian> {
        match self {
            TargetSpec::Gaussian(g) => Some(g),
            TargetSpec::Mixture(_) => None,
        }
    }
}

/// Reads a vector of length `n`; a single value is broadcast.
pub(crate) fn vector_or(cfg: &Config, key: &str, n: usize, default: f64) -> Result<Vec<f64>> {
    match cfg.get_f64_list(key)? {
        None => Ok(vec![default; n]),
        Some(v) if v.len() == 1 => Ok(vec![v[0]; n]),
        Some(v) if v.len() == n => Ok(v),
        Some(v) => Err(cfg.error_at(key, format!("'{key}' has {} entries, expected 1 or {n}", v.len()))),
    }
}

/// Builds the target and records the resolved `target.*` keys.
pub fn build_target(cfg: &Config, resolved: &mut Config) -> Result<TargetSpec> {
    let kind = cfg.get_str("target.kind").unwrap_or("standard_gaussian");
    resolved.set("target.kind", kind);
    let spec = match kind {
        "standard_gaussian" => {
            let n = cfg.u64_or("target.dim", 1)? as usize;
            resolved.set("target.dim", n);
            TargetSpec::Gaussian(make_standard_gaussian(n).map_err(|e| cfg.error_at("target.dim", e.to_string()))?)
        }
        "diagonal_gaussian" => {
            let eig = cfg
                .get_f64_list("target.eigenvalues")?
                .ok_or_else(|| cfg.error_at("target.kind", "diagonal_gaussian needs target.eigenvalues"))?;
            let shift = vector_or(cfg, "target.mean_shift", eig.len(), 0.0)?;
            resolved.set("target.eigenvalues", format_list(&eig));
            resolved.set("target.mean_shift", format_list(&shift));
            TargetSpec::Gaussian(
                make_diagonal_gaussian(eig, shift).map_err(|e| cfg.error_at("target.eigenvalues", e.to_string()))?,
            )
        }
        "gaussian_mixture" => {
            let centers = cfg
                .get_vectors("target.centers")?
                .ok_or_else(|| cfg.error_at("target.kind", "gaussian_mixture needs target.centers"))?;
            let weights = match cfg.get_f64_list("target.weights")? {
                Some(w) => w,
                None => vec![1.0 / centers.len() as f64; centers.len()],
            };
            resolved.set(
                "target.centers",
                centers.iter().map(|c| format_list(c)).collect::<Vec<_>>().join(";"),
            );
            resolved.set("target.weights", format_list(&weights));
            let mut m = make_gaussian_mixture(centers, weights)
                .map_err(|e| cfg.error_at("target.centers", e.to_string()))?;
            if let Some(cp) = cfg.get_f64("target.poincare_cp")? {
                resolved.set("target.poincare_cp", cp);
                m = m.with_poincare(cp).map_err(|e| cfg.error_at("target.poincare_cp", e.to_string()))?;
            }
            TargetSpec::Mixture(m)
        }
        other => {
            return Err(cfg.error_at(
                "target.kind",
                format!("unknown target kind '{other}' (standard_gaussian, diagonal_gaussian, gaussian_mixture)"),
            ))
        }
    };
    Ok(spec)
}

/// Requires a diagonal Gaussian target.
pub(crate) fn require_gaussian(spec: &TargetSpec, command: &str) -> Result<DiagonalGaussian> {
    spec.gaussian()
        .cloned()
        .ok_or_else(|| Error::UnsupportedTarget(format!("{command} needs a diagonal Gaussian target")))
}

/// Initial position law from the `init.*` block (default: point mass at 0).
pub(crate) fn read_init(cfg: &Config, resolved: &mut Config, n: usize) -> Result<InitDistribution> {
    let kind = cfg.get_str("init.kind").unwrap_or("point");
    let mean = vector_or(cfg, "init.mean", n, 0.0)?;
    resolved.set("init.kind", kind);
    resolved.set("init.mean", format_list(&mean));
    match kind {
        "point" => Ok(InitDistribution::point(mean)),
        "gaussian" => {
            let var = vector_or(cfg, "init.var", n, 1.0)?;
            if var.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                return Err(cfg.error_at("init.var", "initial variances must be finite and non-negative"));
            }
            resolved.set("init.var", format_list(&var));
            Ok(InitDistribution::gaussian(mean, var))
        }
        other => Err(cfg.error_at("init.kind", format!("unknown init kind '{other}' (point, gaussian)"))),
    }
}

/// Checkpoint schedule from `record.mode` and `record.every`.
pub(crate) fn read_recording(cfg: &Config, resolved: &mut Config) -> Result<Recording> {
    let mode = cfg.get_str("record.mode").unwrap_or("geometric");
    resolved.set("record.mode", mode);
    match mode {
        "geometric" => Ok(Recording::Geometric),
        "linear" => {
            let every = cfg.u64_or("record.every", 1)?;
            if every == 0 {
                return Err(cfg.error_at("record.every", "record.every must be at least 1"));
            }
            resolved.set("record.every", every);
            Ok(Recording::Linear(every))
        }
        "steps" => {
            let steps = cfg
                .get_u64_list("record.steps")?
                .ok_or_else(|| cfg.error_at("record.mode", "record.mode = steps needs record.steps"))?;
            resolved.set("record.steps", steps.iter().map(u64::to_string).collect::<Vec<_>>().join(","));
            Ok(Recording::Steps(steps))
        }
        other => Err(cfg.error_at("record.mode", format!("unknown record mode '{other}' (geometric, linear, steps)"))),
    }
}

/// Exit status of a failed command: 3 for numerical failures, 2 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        3
    } else {
        2
    }
}
