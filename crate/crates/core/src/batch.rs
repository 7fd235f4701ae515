//! Multi-trajectory runs over a bounded worker pool.
//!
//! Work is split into units of at most [`LOCKSTEP`] trajectories of one
//! instance. Units are independent and results are gathered in unit order,
//! so outputs do not depend on the number of workers.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instances::CouplingMatrix;
use crate::metrics::Outcome;
use crate::rng::derive_seed;
use crate::sde::NoiseParams;
use crate::solvers::{run_lockstep, Member, RunOptions, SolverParams};

/// Trajectories advanced together by one worker.
pub const LOCKSTEP: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct BatchSpec {
    pub params: SolverParams,
    pub noise: Option<NoiseParams>,
    pub trajectories: usize,
    pub master_seed: u64,
    pub track_energy: bool,
    pub workers: usize,
}

impl BatchSpec {
    pub fn new(params: SolverParams, trajectories: usize, master_seed: u64) -> Self {
        Self { params, noise: None, trajectories, master_seed, track_energy: true, workers: 1 }
    }

    pub fn with_noise(mut self, noise: NoiseParams) -> Self {
        self.noise = Some(noise);
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if let Some(np) = &self.noise {
            np.validate()?;
        }
        if self.trajectories == 0 {
            return Err(Error::InvalidParameter("trajectories must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidParameter("workers must be at least 1".into()));
        }
        Ok(())
    }
}

/// Runs `op` on a pool of `workers` threads.
pub fn with_pool<T: Send>(workers: usize, op: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(op))
}

/// Runs `spec` on each `(instance_id, J)` pair; outcomes are in trajectory order.
pub fn run_instances(instances: &[(u64, &CouplingMatrix)], spec: &BatchSpec) -> Result<Vec<Vec<Outcome>>> {
    spec.validate()?;
    let units: Vec<(usize, usize, usize)> = instances
        .iter()
        .enumerate()
        .flat_map(|(k, _)| {
            (0..spec.trajectories)
                .step_by(LOCKSTEP)
                .map(move |start| (k, start, (start + LOCKSTEP).min(spec.trajectories)))
        })
        .collect();
    let opts = RunOptions { track_energy: spec.track_energy, ..RunOptions::default() };
    let run_unit = |&(k, start, end): &(usize, usize, usize)| -> Result<Vec<Outcome>> {
        let (id, j) = instances[k];
        let members = (start..end)
            .map(|t| Member::seeded(&spec.params, j.n(), derive_seed(spec.master_seed, id, t as u64), spec.noise.as_ref()))
            .collect();
        let runs = run_lockstep(&spec.params, j, members, spec.noise.as_ref(), &opts)?;
        Ok(runs.iter().map(Outcome::from).collect())
    };
    let results: Vec<Result<Vec<Outcome>>> = if spec.workers == 1 {
        units.iter().map(run_unit).collect()
    } else {
        with_pool(spec.workers, || units.par_iter().map(run_unit).collect())?
    };
    let mut out: Vec<Vec<Outcome>> = vec![Vec::with_capacity(spec.trajectories); instances.len()];
    for (unit, r) in units.iter().zip(results) {
        out[unit.0].extend(r?);
    }
    Ok(out)
}

/// Runs `spec` on a single instance.
pub fn run_batch(j: &CouplingMatrix, instance_id: u64, spec: &BatchSpec) -> Result<Vec<Outcome>> {
    Ok(run_instances(&[(instance_id, j)], spec)?.pop().expect("one instance"))
}

/// Lowest best energy across outcome sets (the "best found" target).
pub fn best_energy<'a>(sets: impl IntoIterator<Item = &'a [Outcome]>) -> f64 {
    sets.into_iter()
        .flat_map(|s| s.iter().map(|o| o.best_energy))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::sk_random;
    use crate::presets;

    #[test]
    fn worker_count_does_not_change_results() {
        let j = sk_random(20, 3).unwrap();
        let params = presets::preset("cfc-sk").unwrap().with_steps(60);
        let spec = BatchSpec::new(params, 37, 11);
        let one = run_batch(&j, 0, &spec).unwrap();
        let three = run_batch(&j, 0, &spec.clone().with_workers(3)).unwrap();
        assert_eq!(one, three);
        assert_eq!(one.len(), 37);
    }

    #[test]
    fn trajectories_independent_of_unit_layout() {
        let j = sk_random(12, 5).unwrap();
        let params = presets::preset("sfc-sk").unwrap().with_steps(40);
        let spec = BatchSpec::new(params.clone(), 20, 2);
        let all = run_batch(&j, 4, &spec).unwrap();
        let t = 17u64;
        let single = crate::solvers::run_trajectory(&params, &j, derive_seed(2, 4, t)).unwrap();
        assert_eq!(all[t as usize].best_energy, single.best_energy);
        assert_eq!(all[t as usize].final_energy, single.final_energy);
    }

    #[test]
    fn rejects_zero_trajectories() {
        let j = sk_random(4, 1).unwrap();
        let spec = BatchSpec::new(presets::preset("cac-sk").unwrap(), 0, 0);
        assert!(run_batch(&j, 0, &spec).is_err());
    }
}
