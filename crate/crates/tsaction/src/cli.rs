use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use tsaction_core::action::{path_action, DiscretizationScheme, SchemeKind};
use tsaction_core::phase_model::{expand_liouvillian, validate_couplings, QuadratureModel};
use tsaction_core::sampler::{compare_curve, equilibration_diagnostic, Equilibration};

use crate::config::{Overrides, Preset, ScenarioConfig};
use crate::io::{self, EquilibrationEntry, ReferenceEntry, RunMeta};
use crate::scenario::{RunOutput, Scenario};
use crate::{figures, Error, Result};

#[derive(Debug, Parser)]
#[command(name = "tsaction", version, about = "Time-symmetric phase-space simulations via extra-dimensional SPDE sampling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an ensemble and write summary, metadata and figure data.
    Run(RunArgs),
    /// Check a coupling tensor for hermiticity and permutation symmetry.
    Validate {
        tensor: PathBuf,
    },
    /// Evaluate the discretized action of a path.
    Action(ActionArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub preset: Option<Preset>,
    /// JSON file overriding preset defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Coupling-tensor file for the custom preset.
    #[arg(long)]
    pub tensor: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "TSACTION_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub trajectories: Option<u64>,
    #[arg(long)]
    pub tau_max: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write every trajectory's path at every checkpoint.
    #[arg(long)]
    pub snapshots: bool,
    /// Worker threads; all cores by default.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    I,
    Ii,
    Iii,
}

impl From<SchemeArg> for SchemeKind {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::I => SchemeKind::I,
            SchemeArg::Ii => SchemeKind::II,
            SchemeArg::Iii => SchemeKind::III,
        }
    }
}

#[derive(Debug, Args)]
pub struct ActionArgs {
    /// CSV with a `t` column and one column per component.
    pub path: PathBuf,
    #[arg(long, value_enum, default_value = "iii")]
    pub scheme: SchemeArg,
    /// Model the path belongs to.
    #[arg(long, default_value = "squeeze")]
    pub preset: Preset,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub tensor: Option<PathBuf>,
}

/// Parses `args` (program name first), executes, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run(args) => run_command(args),
        Command::Validate { tensor } => validate_command(&tensor),
        Command::Action(args) => action_command(args),
    }
}

fn run_command(args: RunArgs) -> Result<()> {
    let overrides = Overrides {
        preset: args.preset,
        tensor: args.tensor,
        out: args.out,
        trajectories: args.trajectories,
        tau_max: args.tau_max,
        seed: args.seed,
        snapshots: args.snapshots,
    };
    let config = ScenarioConfig::resolve(args.config.as_deref(), &overrides)?;
    let scenario = Scenario::from_config(&config)?;
    let mut warnings = Vec::new();
    if let Some(w) = scenario.ensemble.grid.stability_warning() {
        eprintln!("warning: {w}");
        warnings.push(w);
    }
    let (output, threads) = match args.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            (pool.install(|| scenario.run())?, n)
        }
        None => (scenario.run()?, rayon::current_num_threads()),
    };
    let dir = config.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let files = write_outputs(&scenario, &output, &dir, threads, warnings)?;
    for f in files {
        println!("{}", f.display());
    }
    Ok(())
}

/// Writes the summary, figure data, optional snapshots and the metadata
/// sidecar; returns the paths written.
pub fn write_outputs(
    scenario: &Scenario,
    output: &RunOutput,
    dir: &Path,
    threads: usize,
    warnings: Vec<String>,
) -> Result<Vec<PathBuf>> {
    let preset = scenario.preset().name();
    let summary = &output.summary;
    let mut files = Vec::new();

    let summary_path = dir.join(format!("{preset}_summary.csv"));
    io::write_summary(&summary_path, summary)?;
    files.push(summary_path);
    files.extend(figures::emit_figure_data(scenario, summary, dir)?);
    if scenario.config.snapshots {
        let snap = dir.join(format!("{preset}_snapshots.csv"));
        io::write_snapshots(&snap, &output.records, summary.times(), summary.dim())?;
        files.push(snap);
    }

    let p = scenario.model.partition();
    let equilibration = p
        .x
        .iter()
        .chain(&p.y)
        .map(|&c| {
            let component = scenario.components[c].clone();
            match equilibration_diagnostic(summary, c, 2.0) {
                Ok(Equilibration::Reached { tau }) => EquilibrationEntry {
                    component,
                    tau: Some(tau),
                    note: None,
                },
                Ok(Equilibration::NotReached { worst }) => EquilibrationEntry {
                    component,
                    tau: None,
                    note: Some(format!("last checkpoints differ by {worst:.2} standard errors")),
                },
                Err(e) => EquilibrationEntry {
                    component,
                    tau: None,
                    note: Some(e.to_string()),
                },
            }
        })
        .collect();
    let last_tau = *summary.taus().last().expect("at least one checkpoint");
    let references = scenario
        .references
        .iter()
        .map(|(c, curve)| {
            Ok(ReferenceEntry {
                component: scenario.components[*c].clone(),
                curve: curve.label.clone(),
                max_normalized_deviation: compare_curve(summary, last_tau, &[(*c, curve)])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let meta_path = dir.join(format!("{preset}_meta.json"));
    files.push(meta_path.clone());
    let meta = RunMeta {
        version: format!("tsaction {}", env!("CARGO_PKG_VERSION")),
        config: scenario.config.clone(),
        components: scenario.components.clone(),
        trajectories: scenario.ensemble.trajectories,
        seed: scenario.ensemble.seed,
        elapsed_seconds: output.elapsed.as_secs_f64(),
        threads,
        warnings,
        equilibration,
        references,
        files: files
            .iter()
            .filter_map(|f| f.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect(),
    };
    io::write_json(&meta_path, &meta)?;
    Ok(files)
}

fn validate_command(path: &Path) -> Result<()> {
    let tensor = io::read_tensor(path)?;
    let report = validate_couplings(&tensor);
    if !report.is_valid() {
        return Err(Error::InvalidTensor(report));
    }
    let coeffs = expand_liouvillian(&tensor);
    let diffusion = if coeffs.diffusion_degree() == 0 {
        "constant"
    } else {
        "phase-space dependent"
    };
    println!(
        "valid: {} mode(s), {} nonzero coupling(s), {diffusion} diffusion",
        tensor.modes(),
        tensor.nonzero().count()
    );
    Ok(())
}

#[derive(Serialize)]
struct ActionReport {
    scheme: String,
    steps: usize,
    total: f64,
    reduced: f64,
}

fn action_command(args: ActionArgs) -> Result<()> {
    let overrides = Overrides {
        preset: Some(args.preset),
        tensor: args.tensor,
        ..Overrides::default()
    };
    let config = ScenarioConfig::resolve(args.config.as_deref(), &overrides)?;
    let scenario = Scenario::from_config(&config)?;
    let path = io::read_path(&args.path)?;
    if path.dim() != scenario.model.dim() {
        return Err(Error::Config(format!(
            "path has {} component(s), the {} model has {}",
            path.dim(),
            config.preset,
            scenario.model.dim()
        )));
    }
    let kind = SchemeKind::from(args.scheme);
    let value = path_action(&path, DiscretizationScheme::new(kind), &scenario.model)?;
    let report = ActionReport {
        scheme: format!("{kind:?}"),
        steps: value.steps.len(),
        total: value.total,
        reduced: value.reduced(),
    };
    println!("{}", serde_json::to_string(&report).expect("serializable"));
    Ok(())
}
