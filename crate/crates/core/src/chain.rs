//! Kinetic Langevin chain, the overdamped baseline, and a seeded
//! multi-replica driver with moment checkpoints.
//!
//! Every replica owns a ChaCha8 stream selected by `(seed, replica index)`,
//! so results do not depend on the replica count or the thread schedule.
//! Moments are reduced in fixed replica blocks, always in index order.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::kernel::{compute_coefficients, FrictionStep, KernelCoefficients, NoiseFactor};
use crate::targets::Target;
use crate::{Error, Result};

/// Position-velocity pair of one replica. Overdamped chains keep the
/// velocity as zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub step_index: u64,
}

impl ChainState {
    pub fn new(position: Vec<f64>, velocity: Vec<f64>) -> Result<Self> {
        if position.len() != velocity.len() || position.is_empty() {
            return Err(Error::arg(format!(
                "position has dimension {}, velocity {}",
                position.len(),
                velocity.len()
            )));
        }
        Ok(Self { position, velocity, step_index: 0 })
    }

    pub fn dim(&self) -> usize {
        self.position.len()
    }

    fn is_finite(&self) -> bool {
        self.position.iter().chain(&self.velocity).all(|v| v.is_finite())
    }

    fn diverged(&self, replica: usize) -> Error {
        Error::DivergedChain {
            replica,
            step: self.step_index,
            position: self.position.clone(),
            velocity: self.velocity.clone(),
        }
    }
}

/// Law of the initial position. The initial velocity is always standard
/// Gaussian and independent of the position.
#[derive(Debug, Clone, PartialEq)]
pub enum PositionLaw {
    PointMass(Vec<f64>),
    /// Independent coordinates with the given means and variances.
    Gaussian { mean: Vec<f64>, var: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitDistribution {
    pub position_law: PositionLaw,
}

impl InitDistribution {
    pub fn point(x0: Vec<f64>) -> Self {
        Self { position_law: PositionLaw::PointMass(x0) }
    }

    pub fn gaussian(mean: Vec<f64>, var: Vec<f64>) -> Self {
        Self { position_law: PositionLaw::Gaussian { mean, var } }
    }

    pub fn dim(&self) -> usize {
        match &self.position_law {
            PositionLaw::PointMass(x) => x.len(),
            PositionLaw::Gaussian { mean, .. } => mean.len(),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.dim() != n {
            return Err(Error::arg(format!(
                "initial law has dimension {}, target {}",
                self.dim(),
                n
            )));
        }
        if let PositionLaw::Gaussian { mean, var } = &self.position_law {
            if var.len() != mean.len() || var.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::arg("initial variances must be non-negative, one per coordinate"));
            }
        }
        Ok(())
    }

    /// Draws `(x0, y0)`; position coordinates first, then velocities.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, kinetic: bool) -> ChainState {
        let position = match &self.position_law {
            PositionLaw::PointMass(x) => x.clone(),
            PositionLaw::Gaussian { mean, var } => mean
                .iter()
                .zip(var)
                .map(|(m, v)| m + v.sqrt() * rng.sample::<f64, _>(StandardNormal))
                .collect(),
        };
        let n = position.len();
        let velocity = if kinetic {
            (0..n).map(|_| rng.sample(StandardNormal)).collect()
        } else {
            vec![0.0; n]
        };
        ChainState { position, velocity, step_index: 0 }
    }
}

/// Running moments over the replicas alive at one checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub mean_position: Vec<f64>,
    /// `E|x|^2`
    pub second_moment_position: f64,
    /// `E|y|^2`
    pub second_moment_velocity: f64,
    pub samples_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    Kinetic,
    Overdamped,
}

impl std::str::FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kinetic" | "underdamped" => Ok(SamplerKind::Kinetic),
            "overdamped" | "ula" => Ok(SamplerKind::Overdamped),
            other => Err(Error::arg(format!("unknown sampler kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SamplerKind::Kinetic => "kinetic",
            SamplerKind::Overdamped => "overdamped",
        })
    }
}

/// Which step indices get a moment report.
#[derive(Debug, Clone, PartialEq)]
pub enum Recording {
    /// 0, 1, 2, 4, 8, ... and the final step.
    Geometric,
    /// Every `n` steps and the final step.
    Linear(u64),
    /// Exactly these steps (clipped to the run length).
    Steps(Vec<u64>),
}

impl Recording {
    pub fn checkpoints(&self, steps: u64) -> Vec<u64> {
        let mut out = match self {
            Recording::Geometric => {
                let mut v = vec![0];
                let mut s = 1u64;
                while s <= steps {
                    v.push(s);
                    s = match s.checked_mul(2) {
                        Some(next) => next,
                        None => break,
                    };
                }
                v
            }
            Recording::Linear(every) => {
                let every = (*every).max(1);
                (0..=steps / every).map(|i| i * every).collect()
            }
            Recording::Steps(list) => list.iter().copied().filter(|&s| s <= steps).collect(),
        };
        if !matches!(self, Recording::Steps(_)) {
            out.push(steps);
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Random stream of one replica.
pub fn replica_rng(seed: u64, replica: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica as u64);
    rng
}

/// Reusable buffers for in-place kinetic steps.
struct KineticStepper {
    coeffs: KernelCoefficients,
    noise: NoiseFactor,
    grad: Vec<f64>,
}

impl KineticStepper {
    fn new(coeffs: KernelCoefficients, n: usize) -> Self {
        Self { coeffs, noise: coeffs.noise_factor(), grad: vec![0.0; n] }
    }

    fn step<R: Rng + ?Sized>(&mut self, state: &mut ChainState, target: &dyn Target, rng: &mut R) -> bool {
        target.gradient_into(&state.position, &mut self.grad);
        if self.grad.iter().any(|g| !g.is_finite()) {
            return false;
        }
        let k = &self.coeffs;
        let noisy = !k.is_degenerate();
        for ((x, y), g) in state.position.iter_mut().zip(state.velocity.iter_mut()).zip(&self.grad) {
            let (nx, ny) = if noisy { self.noise.draw(rng) } else { (0.0, 0.0) };
            let x_new = *x + k.pos_vel * *y - k.pos_grad * g + nx;
            *y = k.vel_decay * *y - k.vel_grad * g + ny;
            *x = x_new;
        }
        state.step_index += 1;
        state.is_finite()
    }
}

struct OverdampedStepper {
    eta: f64,
    noise_scale: f64,
    grad: Vec<f64>,
}

impl OverdampedStepper {
    fn new(eta: f64, n: usize, noise: bool) -> Self {
        Self {
            eta,
            noise_scale: if noise { (2.0 * eta).sqrt() } else { 0.0 },
            grad: vec![0.0; n],
        }
    }

    fn step<R: Rng + ?Sized>(&mut self, state: &mut ChainState, target: &dyn Target, rng: &mut R) -> bool {
        target.gradient_into(&state.position, &mut self.grad);
        if self.grad.iter().any(|g| !g.is_finite()) {
            return false;
        }
        for (x, g) in state.position.iter_mut().zip(&self.grad) {
            let xi: f64 = if self.noise_scale > 0.0 { rng.sample(StandardNormal) } else { 0.0 };
            *x += self.noise_scale * xi - self.eta * g;
        }
        state.step_index += 1;
        state.is_finite()
    }
}

fn check_state(state: &ChainState, target: &dyn Target) -> Result<()> {
    if state.position.len() != target.dim() || state.velocity.len() != target.dim() {
        return Err(Error::arg(format!(
            "state dimension {} does not match target dimension {}",
            state.position.len(),
            target.dim()
        )));
    }
    Ok(())
}

/// One step of the kinetic chain: one gradient query at the current position,
/// then the Gaussian transition.
pub fn kinetic_step<R: Rng + ?Sized>(
    state: &ChainState,
    coeffs: &KernelCoefficients,
    target: &dyn Target,
    rng: &mut R,
) -> Result<ChainState> {
    check_state(state, target)?;
    let mut next = state.clone();
    let mut stepper = KineticStepper::new(*coeffs, state.dim());
    if !stepper.step(&mut next, target, rng) {
        return Err(next.diverged(0));
    }
    Ok(next)
}

/// One unadjusted Langevin step `x + sqrt(2 eta) xi - eta grad V(x)`.
pub fn overdamped_step<R: Rng + ?Sized>(
    state: &ChainState,
    eta: f64,
    target: &dyn Target,
    rng: &mut R,
) -> Result<ChainState> {
    overdamped_step_impl(state, eta, target, rng, true)
}

fn overdamped_step_impl<R: Rng + ?Sized>(
    state: &ChainState,
    eta: f64,
    target: &dyn Target,
    rng: &mut R,
    noise: bool,
) -> Result<ChainState> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::param(format!("overdamped step must be positive, got {eta}")));
    }
    check_state(state, target)?;
    let mut next = state.clone();
    let mut stepper = OverdampedStepper::new(eta, state.dim(), noise);
    if !stepper.step(&mut next, target, rng) {
        return Err(next.diverged(0));
    }
    Ok(next)
}

/// Parameters of a multi-replica run.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub sampler: SamplerKind,
    /// For the overdamped chain only `eta` is used.
    pub friction_step: FrictionStep,
    pub init: InitDistribution,
    pub steps: u64,
    pub replicas: usize,
    pub seed: u64,
    pub record: Recording,
    /// Keep every replica's state at each checkpoint.
    pub keep_snapshots: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub checkpoints: Vec<u64>,
    /// One report per checkpoint with at least one live replica.
    pub reports: Vec<(u64, MomentReport)>,
    /// Final states, `None` for replicas that diverged.
    pub final_states: Vec<Option<ChainState>>,
    /// `DivergedChain` errors, in replica order.
    pub diverged: Vec<Error>,
    /// `snapshots[c][r]`: state of replica `r` at checkpoint `c` (if kept and alive).
    pub snapshots: Option<Vec<Vec<Option<ChainState>>>>,
}

impl RunOutput {
    /// Fails with the first divergence, if any.
    pub fn ok(self) -> Result<Self> {
        match self.diverged.first() {
            Some(e) => Err(e.clone()),
            None => Ok(self),
        }
    }
}

const BLOCK: usize = 64;

#[derive(Clone)]
struct Accum {
    sum_x: Vec<f64>,
    sum_x2: f64,
    sum_y2: f64,
    count: usize,
}

impl Accum {
    fn new(n: usize) -> Self {
        Self { sum_x: vec![0.0; n], sum_x2: 0.0, sum_y2: 0.0, count: 0 }
    }

    fn add_state(&mut self, s: &ChainState) {
        for (a, x) in self.sum_x.iter_mut().zip(&s.position) {
            *a += x;
        }
        self.sum_x2 += s.position.iter().map(|x| x * x).sum::<f64>();
        self.sum_y2 += s.velocity.iter().map(|y| y * y).sum::<f64>();
        self.count += 1;
    }

    fn merge(&mut self, other: &Accum) {
        for (a, b) in self.sum_x.iter_mut().zip(&other.sum_x) {
            *a += b;
        }
        self.sum_x2 += other.sum_x2;
        self.sum_y2 += other.sum_y2;
        self.count += other.count;
    }

    fn report(&self) -> Option<MomentReport> {
        if self.count == 0 {
            return None;
        }
        let c = self.count as f64;
        Some(MomentReport {
            mean_position: self.sum_x.iter().map(|s| s / c).collect(),
            second_moment_position: self.sum_x2 / c,
            second_moment_velocity: self.sum_y2 / c,
            samples_used: self.count,
        })
    }
}

struct ReplicaResult {
    final_state: std::result::Result<ChainState, Error>,
    snapshots: Vec<Option<ChainState>>,
}

fn run_replica(
    spec: &RunSpec,
    coeffs: &KernelCoefficients,
    target: &dyn Target,
    checkpoints: &[u64],
    replica: usize,
    accum: &mut [Accum],
) -> ReplicaResult {
    let mut rng = replica_rng(spec.seed, replica);
    let kinetic = spec.sampler == SamplerKind::Kinetic;
    let mut state = spec.init.draw(&mut rng, kinetic);
    let n = state.dim();
    let mut kin = KineticStepper::new(*coeffs, n);
    let mut od = OverdampedStepper::new(spec.friction_step.eta(), n, true);
    let mut snapshots = Vec::new();
    let mut next_cp = 0;
    loop {
        while next_cp < checkpoints.len() && checkpoints[next_cp] == state.step_index {
            accum[next_cp].add_state(&state);
            if spec.keep_snapshots {
                snapshots.push(Some(state.clone()));
            }
            next_cp += 1;
        }
        if state.step_index >= spec.steps {
            break;
        }
        let ok = if kinetic {
            kin.step(&mut state, target, &mut rng)
        } else {
            od.step(&mut state, target, &mut rng)
        };
        if !ok {
            if spec.keep_snapshots {
                snapshots.resize(checkpoints.len(), None);
            }
            return ReplicaResult { final_state: Err(state.diverged(replica)), snapshots };
        }
    }
    ReplicaResult { final_state: Ok(state), snapshots }
}

/// Runs `replicas` independent chains for `steps` steps.
///
/// Kernel coefficients are computed once. Diverging replicas are dropped
/// from later reports and listed in [`RunOutput::diverged`]; the others
/// continue. Output is a deterministic function of the spec.
pub fn run_chain(target: &dyn Target, spec: &RunSpec) -> Result<RunOutput> {
    if spec.replicas == 0 {
        return Err(Error::arg("at least one replica is required"));
    }
    spec.init.validate(target.dim())?;
    if spec.sampler == SamplerKind::Overdamped && spec.friction_step.eta() <= 0.0 && spec.steps > 0 {
        return Err(Error::param("overdamped step must be positive"));
    }
    let coeffs = compute_coefficients(spec.friction_step);
    let checkpoints = spec.record.checkpoints(spec.steps);
    let n = target.dim();
    let blocks = spec.replicas.div_ceil(BLOCK);

    let block_results: Vec<(Vec<Accum>, Vec<ReplicaResult>)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut accum = vec![Accum::new(n); checkpoints.len()];
            let start = b * BLOCK;
            let end = (start + BLOCK).min(spec.replicas);
            let results = (start..end)
                .map(|r| run_replica(spec, &coeffs, target, &checkpoints, r, &mut accum))
                .collect();
            (accum, results)
        })
        .collect();

    let mut total = vec![Accum::new(n); checkpoints.len()];
    let mut final_states = Vec::with_capacity(spec.replicas);
    let mut diverged = Vec::new();
    let mut snapshots: Option<Vec<Vec<Option<ChainState>>>> = spec
        .keep_snapshots
        .then(|| vec![Vec::with_capacity(spec.replicas); checkpoints.len()]);
    for (accum, results) in block_results {
        for (t, a) in total.iter_mut().zip(&accum) {
            t.merge(a);
        }
        for res in results {
            if let Some(snaps) = snapshots.as_mut() {
                for (c, s) in snaps.iter_mut().zip(res.snapshots) {
                    c.push(s);
                }
            }
            match res.final_state {
                Ok(s) => final_states.push(Some(s)),
                Err(e) => {
                    final_states.push(None);
                    diverged.push(e);
                }
            }
        }
    }
    let reports = checkpoints
        .iter()
        .zip(&total)
        .filter_map(|(&cp, a)| a.report().map(|r| (cp, r)))
        .collect();
    Ok(RunOutput { checkpoints, reports, final_states, diverged, snapshots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets::{make_diagonal_gaussian, make_standard_gaussian, TargetMetadata};
    use std::sync::atomic::{AtomicU64, Ordering};

    struct Counting<T> {
        inner: T,
        calls: AtomicU64,
    }

    impl<T: Target> Target for Counting<T> {
        fn dim(&self) -> usize {
            self.inner.dim()
        }
        fn potential(&self, x: &[f64]) -> f64 {
            self.inner.potential(x)
        }
        fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
            self.calls.fetch_add(1, Ordering::Relaxed);
            self.inner.gradient_into(x, out)
        }
        fn metadata(&self) -> TargetMetadata {
            self.inner.metadata()
        }
    }

    /// Gradient that blows up outside a ball.
    struct Cliff;

    impl Target for Cliff {
        fn dim(&self) -> usize {
            1
        }
        fn potential(&self, x: &[f64]) -> f64 {
            x[0] * x[0]
        }
        fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
            out[0] = if x[0].abs() > 2.0 { f64::NAN } else { x[0] };
        }
        fn metadata(&self) -> TargetMetadata {
            TargetMetadata::default()
        }
    }

    fn spec(sampler: SamplerKind, beta: f64, eta: f64, steps: u64, replicas: usize) -> RunSpec {
        RunSpec {
            sampler,
            friction_step: FrictionStep::new(beta, eta).unwrap(),
            init: InitDistribution::point(vec![0.0]),
            steps,
            replicas,
            seed: 42,
            record: Recording::Geometric,
            keep_snapshots: false,
        }
    }

    #[test]
    fn zero_step_kernel_only_advances_counter() {
        let t = make_standard_gaussian(2).unwrap();
        let k = compute_coefficients(FrictionStep::new(1.0, 0.0).unwrap());
        let s = ChainState::new(vec![1.0, 2.0], vec![-0.5, 0.25]).unwrap();
        let next = kinetic_step(&s, &k, &t, &mut replica_rng(1, 0)).unwrap();
        assert_eq!(next.position, s.position);
        assert_eq!(next.velocity, s.velocity);
        assert_eq!(next.step_index, 1);
    }

    #[test]
    fn kinetic_step_is_mean_plus_noise() {
        let t = make_diagonal_gaussian(vec![2.0, 0.5, 1.0], vec![0.1, 0.0, -0.3]).unwrap();
        let k = compute_coefficients(FrictionStep::new(1.3, 0.2).unwrap());
        let s = ChainState::new(vec![0.4, -1.0, 2.0], vec![1.0, 0.0, -0.2]).unwrap();
        let next = kinetic_step(&s, &k, &t, &mut replica_rng(3, 9)).unwrap();
        let (xm, ym) = crate::kernel::step_mean(&k, &s.position, &s.velocity, &t.gradient(&s.position)).unwrap();
        let (nx, ny) = crate::kernel::sample_noise(&k, 3, &mut replica_rng(3, 9));
        for i in 0..3 {
            assert!((next.position[i] - (xm[i] + nx[i])).abs() < 1e-15);
            assert!((next.velocity[i] - (ym[i] + ny[i])).abs() < 1e-15);
        }
    }

    #[test]
    fn one_step_from_origin_is_centered() {
        let t = make_standard_gaussian(1).unwrap();
        let fs = FrictionStep::new(1.0, 0.5).unwrap();
        let k = compute_coefficients(fs);
        let r = 100_000;
        let mut sum = 0.0;
        for i in 0..r {
            let s = ChainState::new(vec![0.0], vec![0.0]).unwrap();
            sum += kinetic_step(&s, &k, &t, &mut replica_rng(11, i)).unwrap().position[0];
        }
        let mean = sum / r as f64;
        assert!(mean.abs() <= 3.0 * (k.a / r as f64).sqrt(), "{mean}");
    }

    #[test]
    fn overdamped_keeps_zero_velocity_and_contracts_without_noise() {
        let t = make_standard_gaussian(2).unwrap();
        let mut s = ChainState::new(vec![3.0, -2.0], vec![0.0, 0.0]).unwrap();
        let mut rng = replica_rng(0, 0);
        let mut prev = 13.0;
        for _ in 0..50 {
            s = overdamped_step_impl(&s, 0.1, &t, &mut rng, false).unwrap();
            let r2 = s.position.iter().map(|x| x * x).sum::<f64>();
            assert!(r2 < prev);
            prev = r2;
            assert_eq!(s.velocity, vec![0.0, 0.0]);
        }
        assert!((s.position[0] - 3.0 * 0.9f64.powi(50)).abs() < 1e-12);
        assert!(overdamped_step(&s, 0.0, &t, &mut rng).is_err());
    }

    #[test]
    fn overdamped_tiny_step_barely_moves() {
        let t = make_standard_gaussian(1).unwrap();
        let s = ChainState::new(vec![1.0], vec![0.0]).unwrap();
        let next = overdamped_step(&s, 1e-14, &t, &mut replica_rng(5, 0)).unwrap();
        assert!((next.position[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn overdamped_stationary_variance() {
        // x' = (1 - eta) x + sqrt(2 eta) xi has stationary variance 2 / (2 - eta)
        let eta = 0.1;
        let t = make_standard_gaussian(1).unwrap();
        let mut rng = replica_rng(77, 0);
        let mut s = ChainState::new(vec![0.0], vec![0.0]).unwrap();
        for _ in 0..1000 {
            s = overdamped_step(&s, eta, &t, &mut rng).unwrap();
        }
        let steps = 1_000_000;
        let mut acc = 0.0;
        for _ in 0..steps {
            s = overdamped_step(&s, eta, &t, &mut rng).unwrap();
            acc += s.position[0] * s.position[0];
        }
        let var = acc / steps as f64;
        let exact = 2.0 / (2.0 - eta);
        assert!((var / exact - 1.0).abs() < 0.02, "{var} vs {exact}");
    }

    #[test]
    fn non_finite_gradient_reports_divergence() {
        let k = compute_coefficients(FrictionStep::new(1.0, 0.1).unwrap());
        let s = ChainState::new(vec![5.0], vec![0.0]).unwrap();
        let err = kinetic_step(&s, &k, &Cliff, &mut replica_rng(0, 0)).unwrap_err();
        assert!(matches!(err, Error::DivergedChain { .. }));
    }

    #[test]
    fn divergent_replicas_are_dropped_and_reported() {
        let mut sp = spec(SamplerKind::Kinetic, 0.01, 1.0, 200, 32);
        sp.init = InitDistribution::gaussian(vec![0.0], vec![1.0]);
        let out = run_chain(&Cliff, &sp).unwrap();
        assert!(!out.diverged.is_empty());
        let alive = out.final_states.iter().filter(|s| s.is_some()).count();
        assert_eq!(alive + out.diverged.len(), 32);
        for e in &out.diverged {
            match e {
                Error::DivergedChain { replica, step, .. } => {
                    assert!(out.final_states[*replica].is_none());
                    assert!(*step <= 200);
                }
                _ => unreachable!(),
            }
        }
        assert!(out.clone().ok().is_err());
    }

    #[test]
    fn zero_steps_returns_initial_law() {
        let t = make_standard_gaussian(1).unwrap();
        let mut sp = spec(SamplerKind::Kinetic, 1.0, 0.1, 0, 4);
        sp.init = InitDistribution::point(vec![2.5]);
        let out = run_chain(&t, &sp).unwrap();
        assert_eq!(out.checkpoints, vec![0]);
        for s in out.final_states.iter().flatten() {
            assert_eq!(s.position, vec![2.5]);
            assert_eq!(s.step_index, 0);
        }
    }

    #[test]
    fn gradient_queries_equal_steps_times_replicas() {
        let t = Counting { inner: make_standard_gaussian(3).unwrap(), calls: AtomicU64::new(0) };
        let mut sp = spec(SamplerKind::Kinetic, 1.0, 0.1, 37, 70);
        sp.init = InitDistribution::point(vec![0.0; 3]);
        run_chain(&t, &sp).unwrap();
        assert_eq!(t.calls.load(Ordering::Relaxed), 37 * 70);
        t.calls.store(0, Ordering::Relaxed);
        sp.sampler = SamplerKind::Overdamped;
        run_chain(&t, &sp).unwrap();
        assert_eq!(t.calls.load(Ordering::Relaxed), 37 * 70);
    }

    #[test]
    fn reports_independent_of_thread_count() {
        let t = make_diagonal_gaussian(vec![1.0, 4.0], vec![0.0, 1.0]).unwrap();
        let mut sp = spec(SamplerKind::Kinetic, 2.0, 0.05, 100, 300);
        sp.init = InitDistribution::gaussian(vec![1.0, -1.0], vec![0.5, 0.5]);
        let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let wide = rayon::ThreadPoolBuilder::new().num_threads(7).build().unwrap();
        let a = serial.install(|| run_chain(&t, &sp).unwrap());
        let b = wide.install(|| run_chain(&t, &sp).unwrap());
        assert_eq!(a.reports, b.reports);
        assert_eq!(a.final_states, b.final_states);
    }

    #[test]
    fn replica_streams_do_not_depend_on_replica_count() {
        let t = make_standard_gaussian(1).unwrap();
        let a = run_chain(&t, &spec(SamplerKind::Kinetic, 1.0, 0.1, 20, 10)).unwrap();
        let b = run_chain(&t, &spec(SamplerKind::Kinetic, 1.0, 0.1, 20, 100)).unwrap();
        assert_eq!(a.final_states[..], b.final_states[..10]);
    }

    #[test]
    fn checkpoint_schedules() {
        assert_eq!(Recording::Geometric.checkpoints(10), vec![0, 1, 2, 4, 8, 10]);
        assert_eq!(Recording::Geometric.checkpoints(0), vec![0]);
        assert_eq!(Recording::Linear(3).checkpoints(7), vec![0, 3, 6, 7]);
        assert_eq!(Recording::Steps(vec![5, 1, 100]).checkpoints(10), vec![1, 5]);
    }

    #[test]
    fn rejects_mismatched_init() {
        let t = make_standard_gaussian(2).unwrap();
        assert!(run_chain(&t, &spec(SamplerKind::Kinetic, 1.0, 0.1, 5, 1)).is_err());
        let mut sp = spec(SamplerKind::Kinetic, 1.0, 0.1, 5, 0);
        sp.init = InitDistribution::point(vec![0.0; 2]);
        assert!(run_chain(&t, &sp).is_err());
    }
}
