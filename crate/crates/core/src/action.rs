//! Discretized time-symmetric stochastic equations and their path actions.
//!
//! A path `φ_0 … φ_n` on the lattice `t_k = t_0 + kε` is scored by
//! `S = Σ_k S_{k−1,k}` with the one-step action
//! `S_{k−1,k} = ε/(2d) (|v^x_k|² + |v^y_k|²) + ½(n_x + n_y) ln(2πεd)`
//! (plus a drift-divergence term for midpoint evaluation), where
//! `v^x_k = (x_k − x_{k−1})/ε − a^x` and `v^y_k = (y_{k−1} − y_k)/ε − a^y`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::phase_model::QuadratureModel;
use crate::{Error, Result};

/// Real-time lattice `t_k = t0 + kε`, `k = 0..=n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGrid {
    t0: f64,
    tf: f64,
    n: usize,
}

impl PathGrid {
    pub fn new(t0: f64, tf: f64, n: usize) -> Result<Self> {
        if n == 0 || !(tf > t0) || !t0.is_finite() || !tf.is_finite() {
            return Err(Error::Parameter(format!(
                "path grid needs n >= 1 and t0 < tf, got n = {n}, [{t0}, {tf}]"
            )));
        }
        Ok(Self { t0, tf, n })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn tf(&self) -> f64 {
        self.tf
    }

    /// Number of steps.
    pub fn steps(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> usize {
        self.n + 1
    }

    pub fn eps(&self) -> f64 {
        (self.tf - self.t0) / self.n as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.n {
            self.tf
        } else {
            self.t0 + k as f64 * self.eps()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n).map(|k| self.time(k)).collect()
    }
}

/// Values `φ_k` on a [`PathGrid`], row-major `(n+1) × dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathField {
    grid: PathGrid,
    dim: usize,
    values: Vec<f64>,
}

impl PathField {
    pub fn new(grid: PathGrid, dim: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.points() * dim {
            return Err(Error::ShapeMismatch(format!(
                "path with {} points of dimension {dim} needs {} values, got {}",
                grid.points(),
                grid.points() * dim,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!(
                "path value at point {}, component {} is not finite",
                i / dim.max(1),
                i % dim.max(1)
            )));
        }
        Ok(Self { grid, dim, values })
    }

    /// Samples `f(t)` on every lattice point.
    pub fn from_fn<F>(grid: PathGrid, dim: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(f64) -> Vec<f64>,
    {
        let mut values = Vec::with_capacity(grid.points() * dim);
        for k in 0..grid.points() {
            let row = f(grid.time(k));
            if row.len() != dim {
                return Err(Error::ShapeMismatch(format!(
                    "path function returned {} components, expected {dim}",
                    row.len()
                )));
            }
            values.extend(row);
        }
        Self::new(grid, dim, values)
    }

    pub fn grid(&self) -> &PathGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable access for in-place evolution; callers keep the entries finite.
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Component `c` along the whole lattice.
    pub fn component(&self, c: usize) -> Vec<f64> {
        self.values.iter().skip(c).step_by(self.dim).copied().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// Drifts at the input ends `(x_{k−1}, y_k)`.
    I,
    /// `a^x` at `φ_{k−1}`, `a^y` at `φ_k`.
    II,
    /// Both drifts at the step midpoint, with the divergence correction.
    III,
}

/// Interpolation of the drift arguments inside one step.
///
/// The drift `a^z` is evaluated at
/// `(s_{z1} x_{k−1} + (1−s_{z1}) x_k, s_{z2} y_{k−1} + (1−s_{z2}) y_k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizationScheme {
    kind: SchemeKind,
    /// `[[s_x1, s_x2], [s_y1, s_y2]]`
    weights: [[f64; 2]; 2],
}

impl DiscretizationScheme {
    pub fn new(kind: SchemeKind) -> Self {
        let weights = match kind {
            SchemeKind::I => [[1.0, 0.0], [1.0, 0.0]],
            SchemeKind::II => [[1.0, 1.0], [0.0, 0.0]],
            SchemeKind::III => [[0.5, 0.5], [0.5, 0.5]],
        };
        Self { kind, weights }
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn weights(&self) -> [[f64; 2]; 2] {
        self.weights
    }

    fn interpolate<M: QuadratureModel + ?Sized>(
        &self,
        model: &M,
        z: usize,
        prev: &[f64],
        next: &[f64],
        out: &mut [f64],
    ) {
        out.copy_from_slice(next);
        let p = model.partition();
        let [s1, s2] = self.weights[z];
        for &i in &p.x {
            out[i] = s1 * prev[i] + (1.0 - s1) * next[i];
        }
        for &i in &p.y {
            out[i] = s2 * prev[i] + (1.0 - s2) * next[i];
        }
    }

    /// Weight of the divergence term from the Jacobian of the step map:
    /// `ε(1 − s_x1) ∇_x·a^x + ε s_y2 ∇_y·a^y`.
    fn divergence_weights(&self) -> (f64, f64) {
        (1.0 - self.weights[0][0], self.weights[1][1])
    }
}

impl From<SchemeKind> for DiscretizationScheme {
    fn from(kind: SchemeKind) -> Self {
        Self::new(kind)
    }
}

/// Total action with its per-step terms.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionValue {
    pub total: f64,
    pub steps: Vec<f64>,
    /// `½(n_x + n_y) ln(2πεd)`, included once in every step term.
    pub log_normalization: f64,
}

impl ActionValue {
    /// Action with the normalization constants removed.
    pub fn reduced(&self) -> f64 {
        self.total - self.steps.len() as f64 * self.log_normalization
    }
}

fn check_path<M: QuadratureModel + ?Sized>(path: &PathField, model: &M) -> Result<()> {
    if path.dim() != model.dim() {
        return Err(Error::ShapeMismatch(format!(
            "path has {} components, model has {}",
            path.dim(),
            model.dim()
        )));
    }
    Ok(())
}

fn check_step(path: &PathField, k: usize) -> Result<()> {
    let n = path.grid().steps();
    if k == 0 || k > n {
        return Err(Error::StepOutOfRange { k, n });
    }
    Ok(())
}

/// Relative velocities `(v^x_k, v^y_k)` of step `k` (`1 ≤ k ≤ n`).
pub fn velocity_fields<M: QuadratureModel + ?Sized>(
    path: &PathField,
    k: usize,
    scheme: DiscretizationScheme,
    model: &M,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_path(path, model)?;
    check_step(path, k)?;
    Ok(velocities(path, k, scheme, model).0)
}

struct StepEval {
    div_x: f64,
    div_y: f64,
}

fn velocities<M: QuadratureModel + ?Sized>(
    path: &PathField,
    k: usize,
    scheme: DiscretizationScheme,
    model: &M,
) -> ((Vec<f64>, Vec<f64>), StepEval) {
    let n = model.dim();
    let eps = path.grid().eps();
    let (prev, next) = (path.row(k - 1), path.row(k));
    let p = model.partition();
    let mut arg = vec![0.0; n];
    let mut a = vec![0.0; n];
    let mut jac = vec![0.0; n * n];

    scheme.interpolate(model, 0, prev, next, &mut arg);
    model.drift(&arg, &mut a);
    model.jacobian(&arg, &mut jac);
    let vx: Vec<f64> = p.x.iter().map(|&i| (next[i] - prev[i]) / eps - a[i]).collect();
    let div_x = p.x.iter().map(|&i| jac[i * n + i]).sum();

    scheme.interpolate(model, 1, prev, next, &mut arg);
    model.drift(&arg, &mut a);
    model.jacobian(&arg, &mut jac);
    // a^y = −A^y
    let vy: Vec<f64> = p.y.iter().map(|&i| (prev[i] - next[i]) / eps + a[i]).collect();
    let div_y = p.y.iter().map(|&i| -jac[i * n + i]).sum();

    ((vx, vy), StepEval { div_x, div_y })
}

fn log_normalization<M: QuadratureModel + ?Sized>(model: &M, eps: f64) -> Result<f64> {
    let d = model.diffusion();
    if d <= 0.0 {
        return Err(Error::DeterministicModel);
    }
    let p = model.partition();
    Ok(0.5 * (p.x.len() + p.y.len()) as f64 * (2.0 * PI * eps * d).ln())
}

/// One-step action `S_{k−1,k}`, normalization included.
pub fn step_action<M: QuadratureModel + ?Sized>(
    path: &PathField,
    k: usize,
    scheme: DiscretizationScheme,
    model: &M,
) -> Result<f64> {
    check_path(path, model)?;
    check_step(path, k)?;
    let eps = path.grid().eps();
    let norm = log_normalization(model, eps)?;
    Ok(step_unchecked(path, k, scheme, model, eps, norm))
}

fn step_unchecked<M: QuadratureModel + ?Sized>(
    path: &PathField,
    k: usize,
    scheme: DiscretizationScheme,
    model: &M,
    eps: f64,
    norm: f64,
) -> f64 {
    let ((vx, vy), ev) = velocities(path, k, scheme, model);
    let d = model.diffusion();
    let kinetic: f64 = vx.iter().chain(&vy).map(|v| v * v).sum();
    let (wx, wy) = scheme.divergence_weights();
    eps / (2.0 * d) * kinetic + eps * (wx * ev.div_x + wy * ev.div_y) + norm
}

/// `S = Σ_k S_{k−1,k}` over all steps of the path.
pub fn path_action<M: QuadratureModel + ?Sized>(
    path: &PathField,
    scheme: DiscretizationScheme,
    model: &M,
) -> Result<ActionValue> {
    check_path(path, model)?;
    let eps = path.grid().eps();
    let norm = log_normalization(model, eps)?;
    let steps: Vec<f64> = (1..=path.grid().steps())
        .map(|k| step_unchecked(path, k, scheme, model, eps, norm))
        .collect();
    Ok(ActionValue {
        total: steps.iter().sum(),
        steps,
        log_normalization: norm,
    })
}

/// Jacobian potential `V = −½(∇_x·a^x + ∇_y·a^y)`.
pub fn potential_v<M: QuadratureModel + ?Sized>(phi: &[f64], model: &M) -> f64 {
    model.potential(phi)
}

/// Continuum Lagrangian `L = Σ_μ (φ̇^μ − A^μ)²/(2d) − V(φ)` over the noisy
/// variables.
pub fn lagrangian<M: QuadratureModel + ?Sized>(phi: &[f64], phi_dot: &[f64], model: &M) -> Result<f64> {
    let d = model.diffusion();
    if d <= 0.0 {
        return Err(Error::DeterministicModel);
    }
    let mut a = vec![0.0; model.dim()];
    model.drift(phi, &mut a);
    let p = model.partition();
    let kinetic: f64 = p
        .x
        .iter()
        .chain(&p.y)
        .map(|&i| (phi_dot[i] - a[i]).powi(2))
        .sum();
    Ok(kinetic / (2.0 * d) - model.potential(phi))
}
