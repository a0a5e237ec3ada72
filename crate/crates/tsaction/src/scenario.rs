//! Turning a [`ScenarioConfig`] into a model, an ensemble configuration and
//! the closed-form references its output is compared against.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use tsaction_core::action::PathGrid;
use tsaction_core::bridge::{BoundarySpec, BridgeGrid, End, InputSampler, TrajectoryRecord};
use tsaction_core::phase_model::{
    expand_liouvillian, to_quadrature_model, validate_couplings, ComplexCoefficients, CouplingTensor, LinearModel,
    Partition, QuadratureModel, RotatedModel,
};
use tsaction_core::sampler::{ou_oracle, Direction, EnsembleConfig, EnsembleSummary, ReferenceCurve};

use crate::config::{EndConfig, InputConfig, Preset, ScenarioConfig};
use crate::{io, runner, Error, Result};

/// Model of a scenario: exact affine form when available.
#[derive(Debug, Clone)]
pub enum ScenarioModel {
    Linear(LinearModel),
    Rotated(Box<RotatedModel<ComplexCoefficients>>),
}

macro_rules! delegate {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            ScenarioModel::Linear($m) => $e,
            ScenarioModel::Rotated($m) => $e,
        }
    };
}

impl QuadratureModel for ScenarioModel {
    fn dim(&self) -> usize {
        delegate!(self, m => m.dim())
    }

    fn partition(&self) -> &Partition {
        delegate!(self, m => m.partition())
    }

    fn diffusion(&self) -> f64 {
        delegate!(self, m => m.diffusion())
    }

    fn drift(&self, phi: &[f64], out: &mut [f64]) {
        delegate!(self, m => m.drift(phi, out))
    }

    fn jacobian(&self, phi: &[f64], out: &mut [f64]) {
        delegate!(self, m => m.jacobian(phi, out))
    }

    fn potential(&self, phi: &[f64]) -> f64 {
        delegate!(self, m => m.potential(phi))
    }

    fn potential_gradient(&self, phi: &[f64], out: &mut [f64]) {
        delegate!(self, m => m.potential_gradient(phi, out))
    }

    fn extra_force(&self, phi: &[f64], phi_dot: &[f64], out: &mut [f64]) {
        delegate!(self, m => m.extra_force(phi, phi_dot, out))
    }
}

/// Exact mean path of a free mode, `α(t) = α₀ e^{−iω(t − t0)}`, in the
/// model's phase-space variables.
#[derive(Debug, Clone)]
pub struct FreeFieldReference {
    pub rotated: RotatedModel<ComplexCoefficients>,
    pub alpha0: Complex64,
    pub omega: f64,
    pub t0: f64,
}

impl FreeFieldReference {
    pub fn alpha(&self, t: f64) -> Complex64 {
        self.alpha0 * Complex64::from_polar(1.0, -self.omega * (t - self.t0))
    }

    pub fn phase(&self, t: f64) -> Vec<f64> {
        self.rotated.to_phase(&[self.alpha(t)])
    }
}

/// Everything needed to run and report one scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub model: ScenarioModel,
    pub ensemble: EnsembleConfig,
    /// Display name per component, e.g. `x` and `y`.
    pub components: Vec<String>,
    /// Closed-form variance curves by component.
    pub references: Vec<(usize, ReferenceCurve)>,
    pub free_field: Option<FreeFieldReference>,
}

/// Completed ensemble with the raw trajectory records.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: EnsembleSummary,
    pub records: Vec<TrajectoryRecord>,
    pub elapsed: Duration,
}

impl Scenario {
    pub fn from_config(config: &ScenarioConfig) -> Result<Self> {
        config.check()?;
        let g = &config.grid;
        let path = PathGrid::new(g.t0, g.tf, g.n)?;
        let grid = match &g.checkpoints {
            Some(cps) => BridgeGrid::new(path, g.dtau, g.tau_max, cps.clone())?,
            None => BridgeGrid::with_uniform_checkpoints(path, g.dtau, g.tau_max, g.checkpoint_count)?,
        };
        let span = g.tf - g.t0;

        let mut references = Vec::new();
        let mut free_field = None;
        let (model, default_inputs) = match config.preset {
            Preset::Wiener => {
                let model = LinearModel::wiener();
                references.push((0, ou_oracle(0.0, model.diffusion(), 1.0, Direction::Forward, g.t0)?));
                let inputs = InputSampler::Gaussian {
                    mean: vec![0.0],
                    variance: vec![1.0],
                };
                (ScenarioModel::Linear(model), inputs)
            }
            Preset::Squeeze => {
                let rate = config.rate.unwrap_or(1.0);
                if !(rate > 0.0) || !rate.is_finite() {
                    return Err(Error::Config(format!("squeezing rate must be positive, got {rate}")));
                }
                let rotated = to_quadrature_model(expand_liouvillian(&CouplingTensor::squeezing(rate)))?;
                let model = rotated.linearize()?;
                let d = model.diffusion();
                let p = model.partition().clone();
                let (x, y) = (p.x[0], p.y[0]);
                let n = model.dim();
                let kx = -model.matrix()[x * n + x];
                let ky = model.matrix()[y * n + y];
                let vacuum = vacuum_variance(&rotated);
                let stat_y = d / (2.0 * ky);
                let yf = stat_y + (vacuum[y] - stat_y) * (2.0 * ky * span).exp();
                references.push((x, ou_oracle(kx, d, vacuum[x], Direction::Forward, g.t0)?));
                references.push((y, ou_oracle(ky, d, yf, Direction::Backward, g.tf)?));
                let mut variance = vec![0.0; n];
                variance[x] = vacuum[x];
                variance[y] = yf;
                let inputs = InputSampler::Gaussian {
                    mean: vec![0.0; n],
                    variance,
                };
                (ScenarioModel::Linear(model), inputs)
            }
            Preset::Freefield => {
                let omega = config.omega.unwrap_or(1.0);
                let [re, im] = config.alpha0.unwrap_or([1.0, 0.5]);
                let tensor = CouplingTensor::free_field(1, &[Complex64::new(omega, 0.0)])?;
                let rotated = to_quadrature_model(expand_liouvillian(&tensor))?;
                let model = rotated.linearize()?;
                let reference = FreeFieldReference {
                    rotated,
                    alpha0: Complex64::new(re, im),
                    omega,
                    t0: g.t0,
                };
                let inputs = InputSampler::Fixed(reference.phase(g.t0));
                free_field = Some(reference);
                (ScenarioModel::Linear(model), inputs)
            }
            Preset::Custom => {
                let path = config.tensor.as_ref().expect("checked above");
                let tensor = io::read_tensor(path)?;
                let report = validate_couplings(&tensor);
                if !report.is_valid() {
                    return Err(Error::InvalidTensor(report));
                }
                let coeffs = expand_liouvillian(&tensor);
                let rotated = to_quadrature_model(coeffs)?;
                let vacuum = vacuum_variance(&rotated);
                let inputs = InputSampler::Gaussian {
                    mean: vec![0.0; vacuum.len()],
                    variance: vacuum,
                };
                let model = match rotated.linearize() {
                    Ok(linear) => ScenarioModel::Linear(linear),
                    Err(_) => ScenarioModel::Rotated(Box::new(rotated)),
                };
                (model, inputs)
            }
        };

        let inputs = match &config.inputs {
            Some(InputConfig::Gaussian { mean, variance }) => InputSampler::Gaussian {
                mean: mean.clone(),
                variance: variance.clone(),
            },
            Some(InputConfig::Table { rows }) => InputSampler::Table(rows.clone()),
            Some(InputConfig::Fixed { values }) => InputSampler::Fixed(values.clone()),
            None => default_inputs,
        };
        let boundary = match &config.boundary {
            Some(ends) => BoundarySpec::new(
                ends.iter()
                    .map(|pair| pair.map(|e| match e {
                        EndConfig::Dirichlet => End::Dirichlet,
                        EndConfig::Open => End::Open,
                    }))
                    .collect(),
            ),
            None => BoundarySpec::mixed(model.partition()),
        };
        let ensemble = EnsembleConfig {
            grid,
            boundary,
            inputs,
            trajectories: config.trajectories,
            seed: config.seed,
            iterations: config.iterations,
            noise: config.noise,
        };
        ensemble.validate(&model)?;
        Ok(Self {
            config: config.clone(),
            components: component_names(model.partition()),
            model,
            ensemble,
            references,
            free_field,
        })
    }

    pub fn preset(&self) -> Preset {
        self.config.preset
    }

    pub fn reference(&self, component: usize) -> Option<&ReferenceCurve> {
        self.references.iter().find(|(c, _)| *c == component).map(|(_, r)| r)
    }

    /// Runs every trajectory in parallel; results do not depend on the
    /// number of threads.
    pub fn run(&self) -> Result<RunOutput> {
        let start = Instant::now();
        let records = runner::run_records(&self.model, &self.ensemble)?;
        let summary = EnsembleSummary::from_records(&records, &self.ensemble.grid.path().times(), self.model.dim())?;
        Ok(RunOutput {
            summary,
            records,
            elapsed: start.elapsed(),
        })
    }
}

/// Variance of each phase-space variable for a vacuum Q-function, where
/// `Re α` and `Im α` each have variance ½.
fn vacuum_variance<S: tsaction_core::phase_model::ComplexDrift>(rotated: &RotatedModel<S>) -> Vec<f64> {
    let m = rotated.modes();
    let mut var = vec![0.0; 2 * m];
    for j in 0..m {
        for unit in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
            let mut alpha = vec![Complex64::new(0.0, 0.0); m];
            alpha[j] = unit;
            for (v, p) in var.iter_mut().zip(rotated.to_phase(&alpha)) {
                *v += 0.5 * p * p;
            }
        }
    }
    var
}

fn component_names(p: &Partition) -> Vec<String> {
    let mut names = vec![String::new(); p.dim()];
    for (set, prefix) in [(&p.x, "x"), (&p.y, "y"), (&p.deterministic, "q")] {
        for (k, &i) in set.iter().enumerate() {
            names[i] = if set.len() == 1 { prefix.to_string() } else { format!("{prefix}{k}") };
        }
    }
    names
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squeeze_preset_references() {
        let s = Scenario::from_config(&ScenarioConfig::preset(Preset::Squeeze)).unwrap();
        assert_eq!(s.components, ["x", "y"]);
        let x = s.reference(0).unwrap();
        let y = s.reference(1).unwrap();
        for t in [0.0, 0.4, 1.0] {
            assert!((x.variance(t) - 0.25 * (1.0 + (-2.0 * t).exp())).abs() < 1e-12);
            assert!((y.variance(t) - 0.25 * (1.0 + (2.0 * t).exp())).abs() < 1e-12);
        }
        match &s.ensemble.inputs {
            InputSampler::Gaussian { variance, .. } => {
                assert!((variance[0] - 0.5).abs() < 1e-12);
                assert!((variance[1] - 0.25 * (1.0 + 2f64.exp())).abs() < 1e-12);
            }
            other => panic!("unexpected inputs {other:?}"),
        }
    }

    #[test]
    fn freefield_is_deterministic() {
        let s = Scenario::from_config(&ScenarioConfig::preset(Preset::Freefield)).unwrap();
        assert!(s.model.partition().is_deterministic());
        let f = s.free_field.as_ref().unwrap();
        let back = f.rotated.to_complex(&f.phase(0.3))[0];
        assert!((back - f.alpha(0.3)).norm() < 1e-14);
    }

    #[test]
    fn wiener_reference_is_linear_growth() {
        let s = Scenario::from_config(&ScenarioConfig::preset(Preset::Wiener)).unwrap();
        assert_eq!(s.reference(0).unwrap().variance(0.5), 1.5);
    }

    #[test]
    fn bad_rate_is_a_config_error() {
        let mut c = ScenarioConfig::preset(Preset::Squeeze);
        c.rate = Some(-1.0);
        assert!(matches!(Scenario::from_config(&c), Err(Error::Config(_))));
    }
}
