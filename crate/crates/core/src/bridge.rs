//! Extra-dimensional SPDE whose virtual-time equilibrium samples the
//! time-symmetric path distribution:
//!
//! `∂φ/∂τ = φ̈ + C φ̇ + U + ζ(t, τ)`, `⟨ζ^μ ζ^ν⟩ = 2d δ^{μν} δ(t−t′) δ(τ−τ′)`.
//!
//! Each component is pinned (Dirichlet) at one end of the real-time lattice
//! and satisfies the natural boundary condition `φ̇ = A(φ)` at the other,
//! imposed through a ghost point. Virtual time is advanced with a
//! semi-implicit midpoint step.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::action::{PathField, PathGrid};
use crate::linalg::lu_solve;
use crate::phase_model::QuadratureModel;
use crate::{Error, Result};

/// Random number generator used for all noise and input sampling.
pub type NoiseRng = ChaCha8Rng;

/// Real-time lattice plus virtual-time stepping parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeGrid {
    path: PathGrid,
    dtau: f64,
    tau_max: f64,
    checkpoints: Vec<f64>,
}

impl BridgeGrid {
    pub fn new(path: PathGrid, dtau: f64, tau_max: f64, checkpoints: Vec<f64>) -> Result<Self> {
        if !(dtau > 0.0) || !dtau.is_finite() {
            return Err(Error::Parameter(format!("dtau must be positive, got {dtau}")));
        }
        if !(tau_max >= 0.0) || !tau_max.is_finite() {
            return Err(Error::Parameter(format!(
                "tau_max must be non-negative, got {tau_max}"
            )));
        }
        let mut checkpoints = checkpoints;
        if let Some(bad) = checkpoints
            .iter()
            .find(|&&c| !(c >= 0.0 && c <= tau_max * (1.0 + 1e-12)))
        {
            return Err(Error::Parameter(format!(
                "checkpoint {bad} is outside [0, {tau_max}]"
            )));
        }
        checkpoints.sort_by(f64::total_cmp);
        checkpoints.dedup();
        if checkpoints.is_empty() {
            checkpoints.push(tau_max);
        }
        Ok(Self {
            path,
            dtau,
            tau_max,
            checkpoints,
        })
    }

    /// `count` equally spaced checkpoints including `0` and `tau_max`.
    pub fn with_uniform_checkpoints(path: PathGrid, dtau: f64, tau_max: f64, count: usize) -> Result<Self> {
        let checkpoints = match count {
            0 => Vec::new(),
            1 => vec![tau_max],
            _ => (0..count)
                .map(|i| tau_max * i as f64 / (count - 1) as f64)
                .collect(),
        };
        Self::new(path, dtau, tau_max, checkpoints)
    }

    pub fn path(&self) -> &PathGrid {
        &self.path
    }

    pub fn dt(&self) -> f64 {
        self.path.eps()
    }

    pub fn dtau(&self) -> f64 {
        self.dtau
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    pub fn checkpoints(&self) -> &[f64] {
        &self.checkpoints
    }

    /// Number of virtual-time steps to reach `tau_max`.
    pub fn steps(&self) -> usize {
        (self.tau_max / self.dtau).round() as usize
    }

    /// Step index of each checkpoint.
    pub fn checkpoint_steps(&self) -> Vec<usize> {
        self.checkpoints
            .iter()
            .map(|&c| (c / self.dtau).round() as usize)
            .collect()
    }

    /// Message when `Δτ > Δt²/2`, beyond which the fixed-point iteration of
    /// the midpoint step is not contractive.
    pub fn stability_warning(&self) -> Option<String> {
        let limit = 0.5 * self.dt() * self.dt();
        (self.dtau > limit).then(|| {
            format!(
                "dtau = {} exceeds dt^2/2 = {limit:.3e}; the semi-implicit step may be unstable",
                self.dtau
            )
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum End {
    /// Value pinned to the sampled input.
    Dirichlet,
    /// Natural boundary `φ̇ = A(φ)`.
    Open,
}

/// Per-component boundary types at `[t0, tf]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundarySpec {
    ends: Vec<[End; 2]>,
}

impl BoundarySpec {
    pub fn new(ends: Vec<[End; 2]>) -> Self {
        Self { ends }
    }

    /// `x` pinned at `t0` and open at `tf`; `y` open at `t0` and pinned at
    /// `tf`; deterministic variables pinned at `t0`.
    pub fn mixed(partition: &crate::phase_model::Partition) -> Self {
        let ends = (0..partition.dim())
            .map(|i| {
                if partition.y.contains(&i) {
                    [End::Open, End::Dirichlet]
                } else {
                    [End::Dirichlet, End::Open]
                }
            })
            .collect();
        Self { ends }
    }

    pub fn ends(&self) -> &[[End; 2]] {
        &self.ends
    }

    pub fn dim(&self) -> usize {
        self.ends.len()
    }

    /// Lattice index at which component `c` is pinned.
    pub fn pinned_point(&self, c: usize, last: usize) -> usize {
        if self.ends[c][0] == End::Dirichlet {
            0
        } else {
            last
        }
    }

    pub fn validate<M: QuadratureModel + ?Sized>(&self, model: &M) -> Result<()> {
        let p = model.partition();
        if self.ends.len() != model.dim() {
            return Err(Error::Boundary(format!(
                "{} boundary entries for a model of dimension {}",
                self.ends.len(),
                model.dim()
            )));
        }
        for (c, ends) in self.ends.iter().enumerate() {
            let expected = if p.y.contains(&c) {
                [End::Open, End::Dirichlet]
            } else {
                [End::Dirichlet, End::Open]
            };
            if *ends != expected {
                let role = if p.y.contains(&c) { "y" } else { "x" };
                return Err(Error::Boundary(format!(
                    "component {c} ({role}) must be {:?} at t0 and {:?} at tf",
                    expected[0], expected[1]
                )));
            }
        }
        Ok(())
    }
}

/// Distribution of the pinned boundary values `φ_IN = (x(t0), y(tf))`.
///
/// Each variant produces one value per component, in component order.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSampler {
    /// Independent Gaussians.
    Gaussian { mean: Vec<f64>, variance: Vec<f64> },
    /// Joint samples; trajectory `i` uses row `i mod rows`.
    Table(Vec<Vec<f64>>),
    Fixed(Vec<f64>),
}

impl InputSampler {
    pub fn dim(&self) -> usize {
        match self {
            InputSampler::Gaussian { mean, .. } => mean.len(),
            InputSampler::Table(rows) => rows.first().map_or(0, Vec::len),
            InputSampler::Fixed(v) => v.len(),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let ok = match self {
            InputSampler::Gaussian { mean, variance } => {
                mean.len() == dim
                    && variance.len() == dim
                    && variance.iter().all(|v| *v >= 0.0 && v.is_finite())
                    && mean.iter().all(|m| m.is_finite())
            }
            InputSampler::Table(rows) => {
                !rows.is_empty() && rows.iter().all(|r| r.len() == dim && r.iter().all(|v| v.is_finite()))
            }
            InputSampler::Fixed(v) => v.len() == dim && v.iter().all(|v| v.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Boundary(format!(
                "input sampler must give {dim} finite value(s) with non-negative variances"
            )))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, trajectory: u64, rng: &mut R, out: &mut [f64]) {
        match self {
            InputSampler::Gaussian { mean, variance } => {
                for ((o, m), v) in out.iter_mut().zip(mean).zip(variance) {
                    let z: f64 = rng.sample(StandardNormal);
                    *o = m + v.sqrt() * z;
                }
            }
            InputSampler::Table(rows) => {
                out.copy_from_slice(&rows[(trajectory % rows.len() as u64) as usize]);
            }
            InputSampler::Fixed(v) => out.copy_from_slice(v),
        }
    }
}

/// Seeded source of per-trajectory random streams.
///
/// Trajectory `i` uses ChaCha stream `i` of the base seed, so streams never
/// overlap and do not depend on scheduling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseField {
    pub seed: u64,
}

impl NoiseField {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn stream(&self, trajectory: u64) -> NoiseRng {
        let mut rng = NoiseRng::seed_from_u64(self.seed);
        rng.set_stream(trajectory);
        rng
    }

    /// Standard deviation of one increment `ξ` at one lattice component.
    pub fn step_std(d: f64, dt: f64, dtau: f64) -> f64 {
        (2.0 * d * dtau / dt).sqrt()
    }
}

/// Circulation matrix `C^{μν} = ∂_μA^ν − ∂_νA^μ`, row-major.
pub fn circulation<M: QuadratureModel + ?Sized>(model: &M, phi: &[f64]) -> Vec<f64> {
    let n = model.dim();
    let mut j = vec![0.0; n * n];
    model.jacobian(phi, &mut j);
    let mut c = vec![0.0; n * n];
    for mu in 0..n {
        for nu in 0..n {
            c[mu * n + nu] = j[mu * n + nu] - j[nu * n + mu];
        }
    }
    c
}

/// Force `U = ∇(dV − ½|A|²)`.
pub fn force_u<M: QuadratureModel + ?Sized>(model: &M, phi: &[f64]) -> Vec<f64> {
    let n = model.dim();
    let mut out = vec![0.0; n];
    model.extra_force(phi, &vec![0.0; n], &mut out);
    out
}

/// Ghost rows `φ_{−1} = φ_0 − Δt A(φ_0)` and `φ_{n+1} = φ_n + Δt A(φ_n)`.
fn ghosts<M: QuadratureModel + ?Sized>(
    model: &M,
    values: &[f64],
    dim: usize,
    dt: f64,
    left: &mut [f64],
    right: &mut [f64],
) {
    let last = values.len() / dim - 1;
    let first_row = &values[..dim];
    let last_row = &values[last * dim..];
    model.drift(first_row, left);
    for (g, v) in left.iter_mut().zip(first_row) {
        *g = v - dt * *g;
    }
    model.drift(last_row, right);
    for (g, v) in right.iter_mut().zip(last_row) {
        *g = v + dt * *g;
    }
}

/// Reusable buffers for evaluating the SPDE drift on a lattice.
#[derive(Debug, Clone)]
struct Workspace {
    dim: usize,
    points: usize,
    dt: f64,
    left: Vec<f64>,
    right: Vec<f64>,
    dot: Vec<f64>,
    force: Vec<f64>,
    active: Vec<bool>,
}

impl Workspace {
    fn new(dim: usize, points: usize, dt: f64, active: Vec<bool>) -> Self {
        Self {
            dim,
            points,
            dt,
            left: vec![0.0; dim],
            right: vec![0.0; dim],
            dot: vec![0.0; dim],
            force: vec![0.0; dim],
            active,
        }
    }

    /// `𝒜 = φ̈ + Cφ̇ + U` at every active lattice point.
    fn extra_drift<M: QuadratureModel + ?Sized>(&mut self, model: &M, values: &[f64], out: &mut [f64]) {
        let (dim, dt) = (self.dim, self.dt);
        let last = self.points - 1;
        ghosts(model, values, dim, dt, &mut self.left, &mut self.right);
        let inv_dt2 = 1.0 / (dt * dt);
        let inv_2dt = 0.5 / dt;
        for k in 0..self.points {
            if !self.active[k] {
                continue;
            }
            let cur = &values[k * dim..(k + 1) * dim];
            let prev = if k == 0 { &self.left[..] } else { &values[(k - 1) * dim..k * dim] };
            let next = if k == last {
                &self.right[..]
            } else {
                &values[(k + 1) * dim..(k + 2) * dim]
            };
            for c in 0..dim {
                self.dot[c] = (next[c] - prev[c]) * inv_2dt;
            }
            model.extra_force(cur, &self.dot, &mut self.force);
            for c in 0..dim {
                out[k * dim + c] = (next[c] - 2.0 * cur[c] + prev[c]) * inv_dt2 + self.force[c];
            }
        }
    }
}

/// SPDE drift `𝒜 = φ̈ + Cφ̇ + U` on the whole lattice, row-major like the
/// path. End points use the ghost rows of the natural boundary condition.
pub fn extra_drift<M: QuadratureModel + ?Sized>(model: &M, path: &PathField) -> Result<Vec<f64>> {
    let points = path.grid().points();
    if points < 3 {
        return Err(Error::LatticeTooShort(points));
    }
    if path.dim() != model.dim() {
        return Err(Error::ShapeMismatch(format!(
            "path has {} components, model has {}",
            path.dim(),
            model.dim()
        )));
    }
    let mut ws = Workspace::new(model.dim(), points, path.grid().eps(), vec![true; points]);
    let mut out = vec![0.0; path.values().len()];
    ws.extra_drift(model, path.values(), &mut out);
    Ok(out)
}

/// Pins the Dirichlet entries of `path` to `pinned` (one value per
/// component) and returns the ghost rows `(φ_{−1}, φ_{n+1})` that enforce
/// `φ̇ = A(φ)` at the open ends.
pub fn apply_boundaries<M: QuadratureModel + ?Sized>(
    path: &mut PathField,
    pinned: &[f64],
    spec: &BoundarySpec,
    model: &M,
) -> Result<(Vec<f64>, Vec<f64>)> {
    spec.validate(model)?;
    let dim = model.dim();
    if path.dim() != dim || pinned.len() != dim {
        return Err(Error::ShapeMismatch(format!(
            "expected {dim} components in path and pinned values"
        )));
    }
    let grid = *path.grid();
    let last = grid.steps();
    let values = path.values_mut();
    for (c, &v) in pinned.iter().enumerate() {
        values[spec.pinned_point(c, last) * dim + c] = v;
    }
    let mut left = vec![0.0; dim];
    let mut right = vec![0.0; dim];
    ghosts(model, values, dim, grid.eps(), &mut left, &mut right);
    Ok((left, right))
}

/// Largest one-sided mismatch `|Δφ/Δt − A(φ)|` over the open ends.
pub fn boundary_residual<M: QuadratureModel + ?Sized>(
    path: &PathField,
    spec: &BoundarySpec,
    model: &M,
) -> f64 {
    let dim = model.dim();
    let n = path.grid().steps();
    let dt = path.grid().eps();
    let mut a0 = vec![0.0; dim];
    let mut an = vec![0.0; dim];
    model.drift(path.row(0), &mut a0);
    model.drift(path.row(n), &mut an);
    let mut worst: f64 = 0.0;
    for (c, ends) in spec.ends().iter().enumerate() {
        if ends[0] == End::Open {
            let d = (path.row(1)[c] - path.row(0)[c]) / dt;
            worst = worst.max((d - a0[c]).abs());
        }
        if ends[1] == End::Open {
            let d = (path.row(n)[c] - path.row(n - 1)[c]) / dt;
            worst = worst.max((d - an[c]).abs());
        }
    }
    worst
}

/// Flat initial path: every component is constant at its pinned value.
pub fn initial_path(grid: &PathGrid, pinned: &[f64]) -> Result<PathField> {
    PathField::from_fn(*grid, pinned.len(), |_| pinned.to_vec())
}

/// Semi-implicit midpoint integrator for one trajectory.
#[derive(Debug, Clone)]
pub struct Integrator<'m, M: ?Sized> {
    model: &'m M,
    ws: Workspace,
    /// Lattice entries that evolve (not pinned).
    free: Vec<bool>,
    dtau: f64,
    noise_std: f64,
    iterations: usize,
    tau: f64,
    start: Vec<f64>,
    mid: Vec<f64>,
    drift: Vec<f64>,
    noise: Vec<f64>,
    times: Vec<f64>,
}

impl<'m, M: QuadratureModel + ?Sized> Integrator<'m, M> {
    pub fn new(model: &'m M, grid: &BridgeGrid, spec: &BoundarySpec, iterations: usize) -> Result<Self> {
        spec.validate(model)?;
        if !model.partition().deterministic.is_empty() {
            return Err(Error::Unsupported(
                "the SPDE needs every variable to carry diffusion; integrate deterministic models with classical_trajectory".into(),
            ));
        }
        let points = grid.path().points();
        if points < 3 {
            return Err(Error::LatticeTooShort(points));
        }
        if iterations == 0 {
            return Err(Error::Parameter("at least one midpoint iteration is required".into()));
        }
        let dim = model.dim();
        let last = points - 1;
        let mut free = vec![true; points * dim];
        for c in 0..dim {
            free[spec.pinned_point(c, last) * dim + c] = false;
        }
        let active = (0..points)
            .map(|k| free[k * dim..(k + 1) * dim].iter().any(|&f| f))
            .collect();
        let dt = grid.dt();
        Ok(Self {
            model,
            ws: Workspace::new(dim, points, dt, active),
            free,
            dtau: grid.dtau(),
            noise_std: NoiseField::step_std(model.diffusion(), dt, grid.dtau()),
            iterations,
            tau: 0.0,
            start: vec![0.0; points * dim],
            mid: vec![0.0; points * dim],
            drift: vec![0.0; points * dim],
            noise: vec![0.0; points * dim],
            times: grid.path().times(),
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn free_mask(&self) -> &[bool] {
        &self.free
    }

    /// Fills the noise increments for one step; pinned entries get none.
    pub fn draw_noise<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for (x, &f) in self.noise.iter_mut().zip(&self.free) {
            *x = if f {
                let z: f64 = rng.sample(StandardNormal);
                self.noise_std * z
            } else {
                0.0
            };
        }
    }

    pub fn clear_noise(&mut self) {
        self.noise.fill(0.0);
    }

    /// Sets the increments of the next step explicitly.
    pub fn set_noise(&mut self, noise: &[f64]) -> Result<()> {
        if noise.len() != self.noise.len() {
            return Err(Error::ShapeMismatch(format!(
                "noise slice has {} entries, lattice has {}",
                noise.len(),
                self.noise.len()
            )));
        }
        for ((x, &v), &f) in self.noise.iter_mut().zip(noise).zip(&self.free) {
            *x = if f { v } else { 0.0 };
        }
        Ok(())
    }

    /// One virtual-time step with the current noise increments.
    pub fn step(&mut self, values: &mut [f64]) -> Result<()> {
        let half = 0.5 * self.dtau;
        self.start.copy_from_slice(values);
        self.mid.copy_from_slice(values);
        for _ in 0..self.iterations {
            self.ws.extra_drift(self.model, &self.mid, &mut self.drift);
            for i in 0..self.mid.len() {
                if self.free[i] {
                    self.mid[i] = self.start[i] + half * self.drift[i] + 0.5 * self.noise[i];
                }
            }
        }
        self.tau += self.dtau;
        let dim = self.ws.dim;
        for i in 0..values.len() {
            if self.free[i] {
                let v = 2.0 * self.mid[i] - self.start[i];
                if !v.is_finite() {
                    return Err(Error::Divergence {
                        tau: self.tau,
                        t: self.times[i / dim],
                        component: i % dim,
                    });
                }
                values[i] = v;
            }
        }
        Ok(())
    }

    /// Current SPDE drift restricted to the free entries.
    pub fn residual(&mut self, values: &[f64], out: &mut [f64]) {
        self.ws.extra_drift(self.model, values, out);
        for (o, &f) in out.iter_mut().zip(&self.free) {
            if !f {
                *o = 0.0;
            }
        }
    }
}

/// Advances `path` by one virtual-time step of size `grid.dtau()` using the
/// given noise increments (`None` for a noiseless step).
pub fn tau_step<M: QuadratureModel + ?Sized>(
    path: &mut PathField,
    grid: &BridgeGrid,
    noise: Option<&[f64]>,
    model: &M,
    spec: &BoundarySpec,
    iterations: usize,
) -> Result<()> {
    let mut integ = Integrator::new(model, grid, spec, iterations)?;
    match noise {
        Some(n) => integ.set_noise(n)?,
        None => integ.clear_noise(),
    }
    if path.grid() != grid.path() || path.dim() != model.dim() {
        return Err(Error::ShapeMismatch(
            "path does not match the grid or the model".into(),
        ));
    }
    integ.step(path.values_mut())
}

/// Path snapshots of one trajectory at the grid checkpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub trajectory: u64,
    pub taus: Vec<f64>,
    /// One row-major `(n+1) × dim` path per checkpoint.
    pub snapshots: Vec<Vec<f64>>,
}

/// Evolves `initial` to `grid.tau_max()`, recording the path at each
/// checkpoint. With `rng = None` the evolution is noiseless.
pub fn evolve<M, R>(
    initial: &PathField,
    grid: &BridgeGrid,
    spec: &BoundarySpec,
    model: &M,
    iterations: usize,
    mut rng: Option<&mut R>,
    trajectory: u64,
) -> Result<TrajectoryRecord>
where
    M: QuadratureModel + ?Sized,
    R: Rng + ?Sized,
{
    if initial.grid() != grid.path() || initial.dim() != model.dim() {
        return Err(Error::ShapeMismatch(
            "initial path does not match the grid or the model".into(),
        ));
    }
    let mut integ = Integrator::new(model, grid, spec, iterations)?;
    let mut values = initial.values().to_vec();
    let marks = grid.checkpoint_steps();
    let mut snapshots = Vec::with_capacity(marks.len());
    let mut next = 0;
    let total = grid.steps();
    for step in 0..=total {
        while next < marks.len() && marks[next] == step {
            snapshots.push(values.clone());
            next += 1;
        }
        if step == total {
            break;
        }
        match rng.as_deref_mut() {
            Some(r) => integ.draw_noise(r),
            None => integ.clear_noise(),
        }
        integ.step(&mut values)?;
    }
    // Checkpoints rounding past the last step.
    while snapshots.len() < marks.len() {
        snapshots.push(values.clone());
    }
    Ok(TrajectoryRecord {
        trajectory,
        taus: grid.checkpoints().to_vec(),
        snapshots,
    })
}

/// Path with `𝒜 = 0` at every free lattice entry, found by Newton's method.
///
/// This is the noiseless fixed point of the discretized SPDE, the lattice
/// counterpart of the classical trajectory.
pub fn lattice_classical_path<M: QuadratureModel + ?Sized>(
    model: &M,
    grid: &BridgeGrid,
    spec: &BoundarySpec,
    pinned: &[f64],
) -> Result<PathField> {
    let mut path = initial_path(grid.path(), pinned)?;
    apply_boundaries(&mut path, pinned, spec, model)?;
    let mut integ = Integrator::new(model, grid, spec, 1)?;
    let idx: Vec<usize> = (0..integ.free.len()).filter(|&i| integ.free[i]).collect();
    let m = idx.len();
    let mut x = path.values().to_vec();
    let mut f = vec![0.0; x.len()];
    let mut fh = vec![0.0; x.len()];
    let scale = 1.0 / (grid.dt() * grid.dt());
    for _ in 0..50 {
        integ.residual(&x, &mut f);
        let norm = idx.iter().map(|&i| f[i].abs()).fold(0.0, f64::max);
        if norm <= 1e-13 * scale * (1.0 + x.iter().map(|v| v.abs()).fold(0.0, f64::max)) {
            return PathField::new(*grid.path(), model.dim(), x);
        }
        let mut jac = DMatrix::zeros(m, m);
        for (col, &j) in idx.iter().enumerate() {
            let h = 1e-6 * x[j].abs().max(1.0);
            let keep = x[j];
            x[j] = keep + h;
            integ.residual(&x, &mut fh);
            x[j] = keep;
            for (row, &i) in idx.iter().enumerate() {
                jac[(row, col)] = (fh[i] - f[i]) / h;
            }
        }
        let rhs = DVector::from_iterator(m, idx.iter().map(|&i| -f[i]));
        let delta = lu_solve(jac, &rhs)
            .ok_or_else(|| Error::Unsupported("singular lattice jacobian".into()))?;
        for (row, &i) in idx.iter().enumerate() {
            x[i] += delta[row];
        }
    }
    Err(Error::Unsupported(
        "Newton iteration for the lattice classical path did not converge".into(),
    ))
}

/// Classical trajectory `φ̇ = A(φ)` from `phi0` at `t0`, sampled on `grid`,
/// integrated with fourth-order Runge-Kutta at step at most `max_h`.
pub fn classical_trajectory<M: QuadratureModel + ?Sized>(
    model: &M,
    grid: &PathGrid,
    phi0: &[f64],
    max_h: f64,
) -> Result<PathField> {
    let dim = model.dim();
    if phi0.len() != dim {
        return Err(Error::ShapeMismatch(format!(
            "initial state has {} components, model has {dim}",
            phi0.len()
        )));
    }
    if !(max_h > 0.0) {
        return Err(Error::Parameter(format!("step bound must be positive, got {max_h}")));
    }
    let sub = (grid.eps() / max_h).ceil().max(1.0) as usize;
    let h = grid.eps() / sub as f64;
    let mut y = phi0.to_vec();
    let mut values = Vec::with_capacity(grid.points() * dim);
    values.extend_from_slice(&y);
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let mut tmp = vec![0.0; dim];
    for _ in 0..grid.steps() {
        for _ in 0..sub {
            model.drift(&y, &mut k1);
            for i in 0..dim {
                tmp[i] = y[i] + 0.5 * h * k1[i];
            }
            model.drift(&tmp, &mut k2);
            for i in 0..dim {
                tmp[i] = y[i] + 0.5 * h * k2[i];
            }
            model.drift(&tmp, &mut k3);
            for i in 0..dim {
                tmp[i] = y[i] + h * k3[i];
            }
            model.drift(&tmp, &mut k4);
            for i in 0..dim {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        values.extend_from_slice(&y);
    }
    PathField::new(*grid, dim, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_model::{LinearModel, Partition};

    fn squeeze() -> LinearModel {
        LinearModel::new(vec![-1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0], 0.5, Partition::ordered(1, 1, 0))
            .unwrap()
    }

    fn grid(n: usize, dtau: f64, tau_max: f64) -> BridgeGrid {
        BridgeGrid::with_uniform_checkpoints(PathGrid::new(0.0, 1.0, n).unwrap(), dtau, tau_max, 3).unwrap()
    }

    #[test]
    fn squeezing_circulation_and_force() {
        let m = squeeze();
        assert_eq!(circulation(&m, &[0.3, 0.4]), vec![0.0; 4]);
        let u = force_u(&m, &[0.3, 0.4]);
        assert!((u[0] + 0.3).abs() < 1e-15 && (u[1] + 0.4).abs() < 1e-15);
    }

    #[test]
    fn rotation_circulation() {
        let w = 0.8;
        // A = (ωp, −ωq)
        let m = LinearModel::new(vec![0.0, w, -w, 0.0], vec![0.0; 2], 0.0, Partition::ordered(0, 0, 2)).unwrap();
        let c = circulation(&m, &[1.0, 2.0]);
        assert_eq!(c, vec![0.0, -2.0 * w, 2.0 * w, 0.0]);
    }

    #[test]
    fn single_decay_force() {
        let k = 1.3;
        let m = LinearModel::new(vec![-k], vec![0.0], 1.0, Partition::ordered(1, 0, 0)).unwrap();
        let u = force_u(&m, &[0.7]);
        assert!((u[0] + k * k * 0.7).abs() < 1e-15);
    }

    #[test]
    fn quadratic_path_has_unit_curvature() {
        let m = LinearModel::new(vec![0.0], vec![0.0], 1.0, Partition::ordered(1, 0, 0)).unwrap();
        let g = PathGrid::new(0.0, 1.0, 10).unwrap();
        let path = PathField::from_fn(g, 1, |t| vec![t * t]).unwrap();
        let a = extra_drift(&m, &path).unwrap();
        for k in 1..10 {
            assert!((a[k] - 2.0).abs() < 1e-9);
        }
        let short = PathField::from_fn(PathGrid::new(0.0, 1.0, 1).unwrap(), 1, |t| vec![t]).unwrap();
        assert_eq!(extra_drift(&m, &short), Err(Error::LatticeTooShort(2)));
    }

    #[test]
    fn classical_squeezing_path_is_nearly_stationary() {
        let m = squeeze();
        let g = PathGrid::new(0.0, 1.0, 40).unwrap();
        let (x0, yf) = (0.9, -0.6);
        let path = PathField::from_fn(g, 2, |t| vec![x0 * (-t).exp(), yf * (t - 1.0).exp()]).unwrap();
        let a = extra_drift(&m, &path).unwrap();
        for k in 1..40 {
            assert!(a[2 * k].abs() < 1e-3 && a[2 * k + 1].abs() < 1e-3);
        }
    }

    #[test]
    fn boundaries_pin_and_set_ghosts() {
        let m = squeeze();
        let spec = BoundarySpec::mixed(m.partition());
        let g = PathGrid::new(0.0, 1.0, 4).unwrap();
        let mut path = PathField::from_fn(g, 2, |_| vec![1.0, 1.0]).unwrap();
        let (left, right) = apply_boundaries(&mut path, &[0.5, -2.0], &spec, &m).unwrap();
        assert_eq!(path.row(0)[0], 0.5);
        assert_eq!(path.row(4)[1], -2.0);
        let dt = g.eps();
        // ẋ(tf) = −x(tf), ẏ(t0) = y(t0)
        assert!(((right[0] - path.row(4)[0]) / dt + path.row(4)[0]).abs() < 1e-14);
        assert!(((path.row(0)[1] - left[1]) / dt - path.row(0)[1]).abs() < 1e-14);
    }

    #[test]
    fn malformed_boundary_is_rejected() {
        let m = squeeze();
        let spec = BoundarySpec::new(vec![[End::Dirichlet, End::Open], [End::Dirichlet, End::Open]]);
        assert!(matches!(spec.validate(&m), Err(Error::Boundary(_))));
        let short = BoundarySpec::new(vec![[End::Dirichlet, End::Open]]);
        assert!(short.validate(&m).is_err());
    }

    #[test]
    fn noiseless_flat_wiener_path_is_stationary() {
        let m = LinearModel::wiener();
        let spec = BoundarySpec::mixed(m.partition());
        let gr = grid(10, 0.002, 0.1);
        let init = initial_path(gr.path(), &[0.4]).unwrap();
        let rec = evolve(&init, &gr, &spec, &m, 4, None::<&mut NoiseRng>, 0).unwrap();
        for s in &rec.snapshots {
            assert!(s.iter().all(|&v| v == 0.4));
        }
    }

    #[test]
    fn zero_tau_returns_initial_path() {
        let m = squeeze();
        let spec = BoundarySpec::mixed(m.partition());
        let gr = BridgeGrid::new(PathGrid::new(0.0, 1.0, 10).unwrap(), 0.001, 0.0, vec![0.0]).unwrap();
        let init = initial_path(gr.path(), &[0.4, 1.0]).unwrap();
        let mut rng = NoiseField::new(1).stream(0);
        let rec = evolve(&init, &gr, &spec, &m, 4, Some(&mut rng), 0).unwrap();
        assert_eq!(rec.snapshots, vec![init.values().to_vec()]);
    }

    #[test]
    fn lattice_classical_path_is_a_fixed_point() {
        let m = squeeze();
        let spec = BoundarySpec::mixed(m.partition());
        let gr = grid(20, 0.001, 0.2);
        let path = lattice_classical_path(&m, &gr, &spec, &[1.0, 0.5]).unwrap();
        let mut p2 = path.clone();
        tau_step(&mut p2, &gr, None, &m, &spec, 4).unwrap();
        for (a, b) in path.values().iter().zip(p2.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        // close to the continuum classical path
        for k in 0..=20 {
            let t = gr.path().time(k);
            assert!((path.row(k)[0] - (-t).exp()).abs() < 0.02);
            assert!((path.row(k)[1] - 0.5 * (t - 1.0).exp()).abs() < 0.02);
        }
    }

    #[test]
    fn divergence_is_reported() {
        let m = LinearModel::wiener();
        let spec = BoundarySpec::mixed(m.partition());
        let gr = grid(10, 0.01, 0.01);
        let mut path = initial_path(gr.path(), &[0.0]).unwrap();
        let mut noise = vec![0.0; 11];
        noise[5] = f64::INFINITY;
        let err = tau_step(&mut path, &gr, Some(&noise), &m, &spec, 2).unwrap_err();
        assert!(matches!(err, Error::Divergence { component: 0, .. }));
    }

    #[test]
    fn stability_warning() {
        assert!(grid(10, 0.01, 1.0).stability_warning().is_some());
        assert!(grid(10, 0.004, 1.0).stability_warning().is_none());
    }

    #[test]
    fn rk4_matches_exponential() {
        let m = LinearModel::new(vec![-1.0], vec![0.0], 1.0, Partition::ordered(1, 0, 0)).unwrap();
        let g = PathGrid::new(0.0, 1.0, 10).unwrap();
        let p = classical_trajectory(&m, &g, &[2.0], 1e-3).unwrap();
        assert!((p.row(10)[0] - 2.0 * (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn noise_streams_are_reproducible_and_distinct() {
        let f = NoiseField::new(7);
        let a: f64 = f.stream(3).sample(StandardNormal);
        let b: f64 = f.stream(3).sample(StandardNormal);
        let c: f64 = f.stream(4).sample(StandardNormal);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
