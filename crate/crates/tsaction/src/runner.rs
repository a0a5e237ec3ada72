use rayon::prelude::*;
use tsaction_core::bridge::TrajectoryRecord;
use tsaction_core::phase_model::QuadratureModel;
use tsaction_core::sampler::{simulate_trajectory, EnsembleConfig, EnsembleSummary};

use crate::Result;

/// Simulates all trajectories on the rayon pool.
///
/// Each trajectory owns its random stream, and records are returned in
/// trajectory order, so the output is identical to a serial run. When
/// several trajectories fail, the one with the lowest id is reported.
pub fn run_records<M>(model: &M, config: &EnsembleConfig) -> Result<Vec<TrajectoryRecord>>
where
    M: QuadratureModel + Sync + ?Sized,
{
    config.validate(model)?;
    let results: Vec<_> = (0..config.trajectories)
        .into_par_iter()
        .map(|id| simulate_trajectory(model, config, id))
        .collect();
    Ok(results.into_iter().collect::<Result<_, _>>()?)
}

pub fn run_ensemble_parallel<M>(model: &M, config: &EnsembleConfig) -> Result<EnsembleSummary>
where
    M: QuadratureModel + Sync + ?Sized,
{
    let records = run_records(model, config)?;
    Ok(EnsembleSummary::from_records(&records, &config.grid.path().times(), model.dim())?)
}
