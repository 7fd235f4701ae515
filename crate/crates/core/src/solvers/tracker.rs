use crate::instances::{readout_sign, CouplingMatrix};

/// Incremental bookkeeping of the Ising energy of `sign(x)`.
///
/// Local fields `h = J σ` are updated only for spins that flipped since the
/// previous observation, so a step with few flips costs `O(n · flips)`. When
/// many spins flip at once the fields are recomputed with one product.
#[derive(Debug, Clone)]
pub(crate) struct EnergyTracker {
    sigma: Vec<i8>,
    field: Vec<f64>,
    scratch: Vec<f64>,
    energy: f64,
    symmetric: bool,
    pub best_energy: f64,
    pub best_step: usize,
    pub best_config: Vec<i8>,
}

impl EnergyTracker {
    pub fn new(j: &CouplingMatrix, x: &[f64], step: usize) -> Self {
        let sigma: Vec<i8> = x.iter().map(|v| readout_sign(*v)).collect();
        let mut t = Self {
            field: vec![0.0; sigma.len()],
            scratch: vec![0.0; sigma.len()],
            best_config: sigma.clone(),
            sigma,
            energy: 0.0,
            symmetric: j.is_symmetric(),
            best_energy: f64::INFINITY,
            best_step: step,
        };
        t.recompute(j);
        t.best_energy = t.energy;
        t
    }

    fn recompute(&mut self, j: &CouplingMatrix) {
        for (o, s) in self.scratch.iter_mut().zip(&self.sigma) {
            *o = f64::from(*s);
        }
        j.mul_vec(&self.scratch, &mut self.field);
        let total: f64 = self.scratch.iter().zip(&self.field).map(|(s, h)| s * h).sum();
        self.energy = 0.5 * total;
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Updates the current energy from amplitudes `x` observed at `step` and
    /// returns it.
    pub fn observe(&mut self, j: &CouplingMatrix, x: &[f64], step: usize) -> f64 {
        let flips = x.iter().zip(&self.sigma).filter(|(v, s)| readout_sign(**v) != **s).count();
        // Past this many flips one full product is cheaper than row updates.
        let dirty = flips > 0 && (!self.symmetric || flips * 2 > self.sigma.len());
        for (i, &v) in x.iter().enumerate() {
            let s = readout_sign(v);
            if s == self.sigma[i] {
                continue;
            }
            if !dirty {
                self.energy -= 2.0 * f64::from(self.sigma[i]) * self.field[i];
                self.sigma[i] = s;
                j.add_scaled_row(i, 2.0 * f64::from(s), &mut self.field);
            } else {
                self.sigma[i] = s;
            }
        }
        if dirty {
            self.recompute(j);
        }
        if self.energy < self.best_energy {
            self.best_energy = self.energy;
            self.best_step = step;
            self.best_config.copy_from_slice(&self.sigma);
        }
        self.energy
    }
}
