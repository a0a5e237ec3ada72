//! Trajectory ensembles, moment estimates and reference oracles.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::bridge::{
    apply_boundaries, classical_trajectory, evolve, initial_path, BoundarySpec, BridgeGrid,
    InputSampler, NoiseField, NoiseRng, TrajectoryRecord,
};
use crate::phase_model::QuadratureModel;
use crate::{Error, Result};

/// Everything needed to run an ensemble for a given model.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub grid: BridgeGrid,
    pub boundary: BoundarySpec,
    pub inputs: InputSampler,
    pub trajectories: u64,
    pub seed: u64,
    /// Fixed-point iterations of the midpoint step.
    pub iterations: usize,
    /// Set to `false` for noiseless runs.
    pub noise: bool,
}

impl EnsembleConfig {
    pub fn validate<M: QuadratureModel + ?Sized>(&self, model: &M) -> Result<()> {
        self.boundary.validate(model)?;
        self.inputs.validate(model.dim())?;
        if self.trajectories == 0 {
            return Err(Error::Parameter("at least one trajectory is required".into()));
        }
        Ok(())
    }
}

/// Simulates trajectory `id`. Inputs are drawn first from the trajectory's
/// stream, then the SPDE noise.
///
/// Models without diffusion are integrated along the classical trajectory
/// from their pinned initial values, which is the noiseless fixed point the
/// SPDE would relax to; every checkpoint then holds the same path.
pub fn simulate_trajectory<M: QuadratureModel + ?Sized>(
    model: &M,
    config: &EnsembleConfig,
    id: u64,
) -> Result<TrajectoryRecord> {
    let wrap = |e: Error| Error::Trajectory {
        trajectory: id,
        source: Box::new(e),
    };
    let mut rng = NoiseField::new(config.seed).stream(id);
    let mut pinned = vec![0.0; model.dim()];
    config.inputs.sample(id, &mut rng, &mut pinned);

    if model.partition().is_deterministic() {
        let path = classical_trajectory(model, config.grid.path(), &pinned, 1e-3).map_err(wrap)?;
        return Ok(TrajectoryRecord {
            trajectory: id,
            taus: config.grid.checkpoints().to_vec(),
            snapshots: vec![path.into_values(); config.grid.checkpoints().len()],
        });
    }

    let mut path = initial_path(config.grid.path(), &pinned).map_err(wrap)?;
    apply_boundaries(&mut path, &pinned, &config.boundary, model).map_err(wrap)?;
    let rng = config.noise.then_some(&mut rng);
    evolve(
        &path,
        &config.grid,
        &config.boundary,
        model,
        config.iterations,
        rng,
        id,
    )
    .map_err(wrap)
}

/// Runs all trajectories one after another and summarizes them.
pub fn run_ensemble<M: QuadratureModel + ?Sized>(model: &M, config: &EnsembleConfig) -> Result<EnsembleSummary> {
    config.validate(model)?;
    let records = (0..config.trajectories)
        .map(|id| simulate_trajectory(model, config, id))
        .collect::<Result<Vec<_>>>()?;
    EnsembleSummary::from_records(&records, &config.grid.path().times(), model.dim())
}

/// Moment estimates per `(checkpoint, lattice point, component)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    taus: Vec<f64>,
    times: Vec<f64>,
    dim: usize,
    trajectories: usize,
    mean: Vec<f64>,
    variance: Vec<f64>,
    stderr: Vec<f64>,
}

/// Mean, unbiased variance and jackknife standard error of the variance.
///
/// The leave-one-out variances are linear in the squared deviations, so the
/// jackknife error has the closed form
/// `se² = N / ((N−1)(N−2)²) Σ_i (e_i² − mean(e²))²` with `e_i = x_i − x̄`.
pub fn variance_with_stderr(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    if n == 1 {
        return (mean, 0.0, 0.0);
    }
    let sq: f64 = values.iter().map(|x| (x - mean) * (x - mean)).sum();
    let var = sq / (nf - 1.0);
    if n == 2 {
        let se = if var == 0.0 { 0.0 } else { f64::INFINITY };
        return (mean, var, se);
    }
    let e2 = sq / nf;
    let spread: f64 = values
        .iter()
        .map(|x| {
            let d = (x - mean) * (x - mean) - e2;
            d * d
        })
        .sum();
    let se2 = nf / ((nf - 1.0) * (nf - 2.0) * (nf - 2.0)) * spread;
    (mean, var, se2.sqrt())
}

impl EnsembleSummary {
    /// Aggregates records in the given order. Every record must have the
    /// same checkpoints and lattice.
    pub fn from_records(records: &[TrajectoryRecord], times: &[f64], dim: usize) -> Result<Self> {
        let first = records
            .first()
            .ok_or_else(|| Error::Parameter("no trajectories to summarize".into()))?;
        let taus = first.taus.clone();
        let cells = times.len() * dim;
        for r in records {
            if r.taus != taus || r.snapshots.len() != taus.len() || r.snapshots.iter().any(|s| s.len() != cells) {
                return Err(Error::ShapeMismatch(format!(
                    "trajectory {} does not match the checkpoints or lattice",
                    r.trajectory
                )));
            }
        }
        let total = taus.len() * cells;
        let mut mean = Vec::with_capacity(total);
        let mut variance = Vec::with_capacity(total);
        let mut stderr = Vec::with_capacity(total);
        let mut column = vec![0.0; records.len()];
        for ci in 0..taus.len() {
            for cell in 0..cells {
                for (v, r) in column.iter_mut().zip(records) {
                    *v = r.snapshots[ci][cell];
                }
                let (m, v, s) = variance_with_stderr(&column);
                mean.push(m);
                variance.push(v);
                stderr.push(s);
            }
        }
        Ok(Self {
            taus,
            times: times.to_vec(),
            dim,
            trajectories: records.len(),
            mean,
            variance,
            stderr,
        })
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn trajectories(&self) -> usize {
        self.trajectories
    }

    fn index(&self, ci: usize, k: usize, c: usize) -> usize {
        (ci * self.times.len() + k) * self.dim + c
    }

    /// `(mean, variance, stderr)` by index.
    pub fn at(&self, ci: usize, k: usize, c: usize) -> (f64, f64, f64) {
        let i = self.index(ci, k, c);
        (self.mean[i], self.variance[i], self.stderr[i])
    }

    pub fn checkpoint_index(&self, tau: f64) -> Result<usize> {
        self.taus
            .iter()
            .position(|&t| (t - tau).abs() <= 1e-9 * tau.abs().max(1.0))
            .ok_or_else(|| Error::MissingCheckpoint(format!("tau = {tau}")))
    }

    pub fn time_index(&self, t: f64) -> Result<usize> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-9 * t.abs().max(1.0))
            .ok_or_else(|| Error::MissingCheckpoint(format!("t = {t}")))
    }

    /// Index of the lattice point nearest to `t`.
    pub fn nearest_time_index(&self, t: f64) -> usize {
        let mut best = 0;
        for (k, &s) in self.times.iter().enumerate() {
            if (s - t).abs() < (self.times[best] - t).abs() {
                best = k;
            }
        }
        best
    }

    /// Variance profile over the lattice at one checkpoint.
    pub fn variance_profile(&self, ci: usize, c: usize) -> Vec<(f64, f64)> {
        (0..self.times.len())
            .map(|k| {
                let (_, v, s) = self.at(ci, k, c);
                (v, s)
            })
            .collect()
    }
}

/// Stored estimates at checkpoint `tau`, lattice time `t` and component `c`.
pub fn moments(summary: &EnsembleSummary, tau: f64, t: f64, c: usize) -> Result<(f64, f64, f64)> {
    if c >= summary.dim {
        return Err(Error::MissingCheckpoint(format!("component {c}")));
    }
    let ci = summary.checkpoint_index(tau)?;
    let k = summary.time_index(t)?;
    Ok(summary.at(ci, k, c))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Equilibration {
    /// Variances agree between all later successive checkpoints.
    Reached { tau: f64 },
    /// The last pair of checkpoints still differs; `worst` is the largest
    /// `|Δvar| / sqrt(se_i² + se_{i+1}²)` of that pair.
    NotReached { worst: f64 },
}

impl Equilibration {
    pub fn tau(&self) -> Option<f64> {
        match self {
            Equilibration::Reached { tau } => Some(*tau),
            Equilibration::NotReached { .. } => None,
        }
    }
}

/// Smallest checkpoint after which the variance of component `c` changes by
/// at most `sigmas` combined standard errors between every pair of
/// successive checkpoints, at every lattice point.
pub fn equilibration_diagnostic(summary: &EnsembleSummary, c: usize, sigmas: f64) -> Result<Equilibration> {
    let nc = summary.taus.len();
    if nc < 3 {
        return Err(Error::Parameter(format!(
            "equilibration needs at least 3 checkpoints, got {nc}"
        )));
    }
    if c >= summary.dim {
        return Err(Error::MissingCheckpoint(format!("component {c}")));
    }
    let pair_worst = |i: usize| -> f64 {
        (0..summary.times.len())
            .map(|k| {
                let (_, v0, s0) = summary.at(i, k, c);
                let (_, v1, s1) = summary.at(i + 1, k, c);
                let diff = (v1 - v0).abs();
                let se = (s0 * s0 + s1 * s1).sqrt();
                if diff == 0.0 {
                    0.0
                } else {
                    diff / se
                }
            })
            .fold(0.0, f64::max)
    };
    let worst: Vec<f64> = (0..nc - 1).map(pair_worst).collect();
    let mut start = nc - 1;
    while start > 0 && worst[start - 1] <= sigmas {
        start -= 1;
    }
    if start == nc - 1 {
        return Ok(Equilibration::NotReached {
            worst: worst[nc - 2],
        });
    }
    Ok(Equilibration::Reached {
        tau: summary.taus[start],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Relaxation from an initial condition at the anchor time.
    Forward,
    /// Relaxation from a final condition at the anchor time, backwards.
    Backward,
}

/// Closed-form variance of an Ornstein-Uhlenbeck process
/// `dz = −k z ds + dw`, `⟨dw²⟩ = d ds`, started with variance `v0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceCurve {
    pub decay: f64,
    pub diffusion: f64,
    pub start_variance: f64,
    pub direction: Direction,
    pub anchor: f64,
    pub label: String,
}

impl ReferenceCurve {
    /// `v(s) = d/(2k) + (v0 − d/(2k)) e^{−2ks}`, with `s` the elapsed time
    /// from the anchor; `k = 0` gives Brownian growth `v0 + d s`.
    pub fn variance(&self, t: f64) -> f64 {
        let s = match self.direction {
            Direction::Forward => t - self.anchor,
            Direction::Backward => self.anchor - t,
        };
        let k = self.decay;
        if k == 0.0 {
            self.start_variance + self.diffusion * s
        } else {
            let stat = self.diffusion / (2.0 * k);
            stat + (self.start_variance - stat) * (-2.0 * k * s).exp()
        }
    }
}

pub fn ou_oracle(
    decay: f64,
    diffusion: f64,
    start_variance: f64,
    direction: Direction,
    anchor: f64,
) -> Result<ReferenceCurve> {
    if !(decay >= 0.0) || !(diffusion >= 0.0) || !(start_variance >= 0.0) {
        return Err(Error::Parameter(format!(
            "OU reference needs k >= 0, d >= 0 and v0 >= 0, got k = {decay}, d = {diffusion}, v0 = {start_variance}"
        )));
    }
    let label = if decay == 0.0 {
        format!("{start_variance} + {diffusion} s")
    } else {
        let stat = diffusion / (2.0 * decay);
        format!("{stat} + ({start_variance} - {stat}) exp(-{}s)", 2.0 * decay)
    };
    Ok(ReferenceCurve {
        decay,
        diffusion,
        start_variance,
        direction,
        anchor,
        label,
    })
}

fn normalized(diff: f64, se: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else {
        diff / se
    }
}

/// Largest `|var − reference| / stderr` at checkpoint `tau` over the
/// lattice and the listed `(component, curve)` pairs.
pub fn compare_curve(summary: &EnsembleSummary, tau: f64, references: &[(usize, &ReferenceCurve)]) -> Result<f64> {
    let ci = summary.checkpoint_index(tau)?;
    let mut worst: f64 = 0.0;
    for &(c, curve) in references {
        if c >= summary.dim {
            return Err(Error::ShapeMismatch(format!(
                "component {c} is outside a summary of dimension {}",
                summary.dim
            )));
        }
        for (k, &t) in summary.times.iter().enumerate() {
            let (_, v, s) = summary.at(ci, k, c);
            worst = worst.max(normalized((v - curve.variance(t)).abs(), s));
        }
    }
    Ok(worst)
}

/// Largest `|var_a − var_b| / sqrt(se_a² + se_b²)` over the lattice and all
/// components.
pub fn compare_ensembles(a: &EnsembleSummary, tau_a: f64, b: &EnsembleSummary, tau_b: f64) -> Result<f64> {
    if a.dim != b.dim
        || a.times.len() != b.times.len()
        || a.times.iter().zip(&b.times).any(|(x, y)| (x - y).abs() > 1e-12)
    {
        return Err(Error::ShapeMismatch("summaries use different lattices".into()));
    }
    let (ia, ib) = (a.checkpoint_index(tau_a)?, b.checkpoint_index(tau_b)?);
    let mut worst: f64 = 0.0;
    for k in 0..a.times.len() {
        for c in 0..a.dim {
            let (_, va, sa) = a.at(ia, k, c);
            let (_, vb, sb) = b.at(ib, k, c);
            worst = worst.max(normalized((va - vb).abs(), (sa * sa + sb * sb).sqrt()));
        }
    }
    Ok(worst)
}

/// Direct simulation of the decoupled forward-backward SDEs: `x` forward
/// from its `t0` value, `y` backward from its `tf` value, Euler-Maruyama at
/// the lattice step. The result has a single checkpoint at `tau_max`.
pub fn direct_tssde_oracle<M: QuadratureModel + ?Sized>(model: &M, config: &EnsembleConfig) -> Result<EnsembleSummary> {
    config.validate(model)?;
    let n = model.dim();
    let p = model.partition();
    if !p.deterministic.is_empty() {
        return Err(Error::Unsupported("direct oracle needs every variable in x or y".into()));
    }
    let mut jac = vec![0.0; n * n];
    for probe in [0.0, 0.37, -1.3] {
        let phi: Vec<f64> = (0..n).map(|i| probe * (1.0 + i as f64)).collect();
        model.jacobian(&phi, &mut jac);
        let coupled = p.x.iter().any(|&i| p.y.iter().any(|&j| jac[i * n + j] != 0.0 || jac[j * n + i] != 0.0));
        if coupled {
            return Err(Error::Unsupported(
                "direct oracle needs a^x independent of y and a^y independent of x".into(),
            ));
        }
    }

    let grid = config.grid.path();
    let steps = grid.steps();
    let eps = grid.eps();
    let amp = if config.noise { (model.diffusion() * eps).sqrt() } else { 0.0 };
    let noise = NoiseField::new(config.seed);
    let mut records = Vec::with_capacity(config.trajectories as usize);
    let mut a = vec![0.0; n];
    for id in 0..config.trajectories {
        let mut rng: NoiseRng = noise.stream(id);
        let mut pinned = vec![0.0; n];
        config.inputs.sample(id, &mut rng, &mut pinned);
        let mut values = vec![0.0; (steps + 1) * n];
        let mut phi = vec![0.0; n];
        for &i in &p.x {
            phi[i] = pinned[i];
            values[i] = pinned[i];
        }
        for k in 1..=steps {
            model.drift(&phi, &mut a);
            for &i in &p.x {
                let z: f64 = rng.sample(StandardNormal);
                phi[i] += eps * a[i] + amp * z;
                values[k * n + i] = phi[i];
            }
        }
        phi.fill(0.0);
        for &i in &p.y {
            phi[i] = pinned[i];
            values[steps * n + i] = pinned[i];
        }
        for k in (0..steps).rev() {
            model.drift(&phi, &mut a);
            for &i in &p.y {
                let z: f64 = rng.sample(StandardNormal);
                // a^y = −A^y
                phi[i] += -eps * a[i] + amp * z;
                values[k * n + i] = phi[i];
            }
        }
        records.push(TrajectoryRecord {
            trajectory: id,
            taus: vec![config.grid.tau_max()],
            snapshots: vec![values],
        });
    }
    EnsembleSummary::from_records(&records, &grid.times(), n)
}

/// Number expectation from anti-normally ordered quadrature moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumberEstimate {
    pub value: f64,
    /// Set when the estimate is negative, which no quantum state produces.
    pub unphysical: bool,
}

/// `⟨n⟩ = ⟨|α|²⟩ − 1` with `α` built from one pair of quadratures.
pub fn observable_number(mean: [f64; 2], variance: [f64; 2]) -> NumberEstimate {
    let value = mean[0] * mean[0] + variance[0] + mean[1] * mean[1] + variance[1] - 1.0;
    NumberEstimate {
        value,
        unphysical: value < 0.0,
    }
}
