//! Scenario configuration: presets, JSON overrides and command-line flags.
//!
//! A scenario starts from its preset defaults. A JSON file may override any
//! subset of the fields (nested objects are merged key by key), and flags
//! override the result. Unknown keys are rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Wiener bridge with unit forward diffusion.
    Wiener,
    /// Single-mode parametric squeezing.
    Squeeze,
    /// Single free mode, integrated deterministically.
    Freefield,
    /// Any constant-diffusion coupling tensor read from a JSON file.
    Custom,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Wiener, Preset::Squeeze, Preset::Freefield, Preset::Custom];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Wiener => "wiener",
            Preset::Squeeze => "squeeze",
            Preset::Freefield => "freefield",
            Preset::Custom => "custom",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown preset `{s}` (expected wiener, squeeze, freefield or custom)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t0: f64,
    pub tf: f64,
    /// Number of real-time steps; the lattice has `n + 1` points.
    pub n: usize,
    pub dtau: f64,
    pub tau_max: f64,
    /// Explicit checkpoints; when absent, `checkpoint_count` equally spaced
    /// values from 0 to `tau_max` are used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<f64>>,
    #[serde(default = "default_checkpoint_count")]
    pub checkpoint_count: usize,
}

fn default_checkpoint_count() -> usize {
    11
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndConfig {
    Dirichlet,
    Open,
}

/// Distribution of the pinned inputs `(x(t0), y(tf))`, one entry per
/// component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InputConfig {
    Gaussian { mean: Vec<f64>, variance: Vec<f64> },
    Table { rows: Vec<Vec<f64>> },
    Fixed { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub preset: Preset,
    /// Coupling-tensor file (custom preset).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tensor: Option<PathBuf>,
    /// Squeezing rate (squeeze preset).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    /// Mode frequency (freefield preset).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    /// Initial amplitude `[re, im]` (freefield preset).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha0: Option<[f64; 2]>,
    pub grid: GridConfig,
    /// Per-component `[t0 end, tf end]`; mixed Dirichlet/open when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Vec<[EndConfig; 2]>>,
    /// Input distribution; the preset's physical default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inputs: Option<InputConfig>,
    pub trajectories: u64,
    pub seed: u64,
    pub iterations: usize,
    #[serde(default = "yes")]
    pub noise: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub snapshots: bool,
}

fn yes() -> bool {
    true
}

/// Flag overrides applied after the configuration file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub preset: Option<Preset>,
    pub tensor: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub trajectories: Option<u64>,
    pub tau_max: Option<f64>,
    pub seed: Option<u64>,
    pub snapshots: bool,
}

impl ScenarioConfig {
    /// Defaults of a preset: a one-unit real-time window with 33 steps,
    /// `Δτ = 2·10⁻⁴`, `τ_max = 5` and 11 checkpoints.
    pub fn preset(preset: Preset) -> Self {
        let grid = GridConfig {
            t0: 0.0,
            tf: 1.0,
            n: 33,
            dtau: 0.0002,
            tau_max: 5.0,
            checkpoints: None,
            checkpoint_count: default_checkpoint_count(),
        };
        let mut config = Self {
            preset,
            tensor: None,
            rate: None,
            omega: None,
            alpha0: None,
            grid,
            boundary: None,
            inputs: None,
            trajectories: 10_000,
            seed: 1234,
            iterations: 4,
            noise: true,
            out: None,
            snapshots: false,
        };
        match preset {
            Preset::Wiener => {}
            Preset::Squeeze => {
                config.rate = Some(1.0);
                config.trajectories = 6400;
            }
            Preset::Freefield => {
                config.omega = Some(1.0);
                config.alpha0 = Some([1.0, 0.5]);
                config.trajectories = 1;
                config.noise = false;
            }
            Preset::Custom => config.trajectories = 1000,
        }
        config
    }

    /// Resolves preset defaults, an optional JSON file and flag overrides.
    pub fn resolve(file: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let patch = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                let value: Value = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
                if !value.is_object() {
                    return Err(Error::Config(format!("{}: expected a JSON object", path.display())));
                }
                Some(value)
            }
            None => None,
        };
        let preset = match (overrides.preset, patch.as_ref().and_then(|v| v.get("preset"))) {
            (Some(p), _) => p,
            (None, Some(v)) => serde_json::from_value(v.clone())
                .map_err(|e| Error::Config(format!("preset: {e}")))?,
            (None, None) => Preset::Wiener,
        };
        let mut config = Self::preset(preset);
        if let Some(mut patch) = patch {
            if let Some(obj) = patch.as_object_mut() {
                obj.remove("preset");
            }
            config = config.merged(patch)?;
        }
        config.apply(overrides);
        config.check()?;
        Ok(config)
    }

    /// Overlays a partial JSON object onto this configuration.
    pub fn merged(&self, patch: Value) -> Result<Self> {
        let mut base = serde_json::to_value(self).map_err(|e| Error::Config(e.to_string()))?;
        merge(&mut base, patch);
        serde_json::from_value(base).map_err(|e| Error::Config(e.to_string()))
    }

    fn apply(&mut self, o: &Overrides) {
        if let Some(t) = &o.tensor {
            self.tensor = Some(t.clone());
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        if let Some(n) = o.trajectories {
            self.trajectories = n;
        }
        if let Some(tau) = o.tau_max {
            self.grid.tau_max = tau;
            if let Some(cps) = &mut self.grid.checkpoints {
                cps.retain(|c| *c <= tau);
            }
        }
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        self.snapshots |= o.snapshots;
    }

    /// Checks fields that belong to a different preset or are out of range.
    pub fn check(&self) -> Result<()> {
        let misplaced = |field: &str, owner: Preset| {
            Error::Config(format!("`{field}` only applies to the {owner} preset"))
        };
        if self.tensor.is_some() && self.preset != Preset::Custom {
            return Err(misplaced("tensor", Preset::Custom));
        }
        if self.preset == Preset::Custom && self.tensor.is_none() {
            return Err(Error::Config("the custom preset needs a coupling-tensor file".into()));
        }
        if self.rate.is_some() && self.preset != Preset::Squeeze {
            return Err(misplaced("rate", Preset::Squeeze));
        }
        if self.preset != Preset::Freefield {
            if self.omega.is_some() {
                return Err(misplaced("omega", Preset::Freefield));
            }
            if self.alpha0.is_some() {
                return Err(misplaced("alpha0", Preset::Freefield));
            }
        }
        if self.trajectories == 0 {
            return Err(Error::Config("trajectories must be at least 1".into()));
        }
        if self.grid.checkpoint_count == 0 {
            return Err(Error::Config("checkpoint_count must be at least 1".into()));
        }
        Ok(())
    }
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}
