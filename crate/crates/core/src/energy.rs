//! Optical energy cost to solution.
//!
//! Three subsystems contribute, with `N` spins and `M` matrix-vector
//! multiplications (round trips) to solution:
//!
//! ```text
//! main cavity       2ħω · M · N · Δt / g²
//! error correction  [(N + 1)·E_s + E_h] · N · M
//! pulse factory     (P_comb + k·P_eom)·τ · N · M + P_eom·τ · N² + (E_h + E_s·N) · M · N
//! ```
//!
//! `E_s`/`E_h` are the small-signal and high-gain pump pulse energies and
//! `τ` the pulse period. The defaults reproduce 1.3e-11·N·M and 4e-12·N².

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PLANCK: f64 = 6.626_070_15e-34;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const DEFAULT_WAVELENGTH: f64 = 1.56e-6;

/// Photon energy `hc/λ` in joules.
pub fn photon_energy(wavelength: f64) -> f64 {
    PLANCK * SPEED_OF_LIGHT / wavelength
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnergyParams {
    /// `ħω` in joules.
    pub photon_energy: f64,
    /// Round-trip time in units of the signal lifetime.
    pub roundtrip_dt: f64,
    pub g_sq: f64,
    /// Pump energy per pulse for a ~10 dB amplifier (J).
    pub small_signal_pulse: f64,
    /// Pump energy per pulse for a ~50 dB amplifier (J).
    pub high_gain_pulse: f64,
    /// Soliton comb generator power (W).
    pub comb_power: f64,
    /// Small-signal amplifier power (W).
    pub psa_10db_power: f64,
    /// High-gain amplifier power (W).
    pub psa_50db_power: f64,
    /// Electro-optic modulator power (W).
    pub eom_power: f64,
    /// Modulators driven on every pulse slot in the factory.
    pub always_on_eoms: f64,
    /// Pulse slot duration (s).
    pub pulse_period: f64,
    pub gpu_power: f64,
    /// Measured GPU throughput; `None` leaves the comparison empty.
    pub gpu_seconds_per_mvm: Option<f64>,
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            photon_energy: photon_energy(DEFAULT_WAVELENGTH),
            roundtrip_dt: 0.1,
            g_sq: 1e-4,
            small_signal_pulse: 1e-13,
            high_gain_pulse: 1e-12,
            comb_power: 0.1,
            psa_10db_power: 0.01,
            psa_50db_power: 0.1,
            eom_power: 0.4,
            always_on_eoms: 3.0,
            pulse_period: 1e-11,
            gpu_power: 200.0,
            gpu_seconds_per_mvm: None,
        }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.g_sq > 0.0 && self.g_sq.is_finite()) {
            return Err(Error::InvalidParameter(format!("g_sq must be positive, got {}", self.g_sq)));
        }
        let positive = [
            ("photon_energy", self.photon_energy),
            ("roundtrip_dt", self.roundtrip_dt),
            ("small_signal_pulse", self.small_signal_pulse),
            ("high_gain_pulse", self.high_gain_pulse),
            ("comb_power", self.comb_power),
            ("psa_10db_power", self.psa_10db_power),
            ("psa_50db_power", self.psa_50db_power),
            ("eom_power", self.eom_power),
            ("pulse_period", self.pulse_period),
            ("gpu_power", self.gpu_power),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.always_on_eoms >= 0.0) {
            return Err(Error::InvalidParameter("always_on_eoms must be non-negative".into()));
        }
        if let Some(s) = self.gpu_seconds_per_mvm {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidParameter("gpu_seconds_per_mvm must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub e_main: f64,
    pub e_correction: f64,
    pub e_factory: f64,
    pub e_total: f64,
    /// `1e-13 · N² · M` approximations of the correction and factory terms.
    pub e_correction_approx: f64,
    pub e_factory_approx: f64,
    pub e_gpu: Option<f64>,
}

pub fn e_main(mvm: f64, n: usize, params: &EnergyParams) -> f64 {
    2.0 * params.photon_energy * mvm * n as f64 * params.roundtrip_dt / params.g_sq
}

pub fn energy_report(mvm: f64, n: usize, params: &EnergyParams) -> Result<EnergyReport> {
    params.validate()?;
    if !(mvm >= 0.0) {
        return Err(Error::InvalidParameter(format!("mvm must be non-negative, got {mvm}")));
    }
    if n == 0 {
        return Err(Error::InvalidSize { n, reason: "at least one spin" });
    }
    let nf = n as f64;
    let (es, eh) = (params.small_signal_pulse, params.high_gain_pulse);
    let main = e_main(mvm, n, params);
    let correction = ((nf + 1.0) * es + eh) * nf * mvm;
    let stream_power = params.comb_power + params.always_on_eoms * params.eom_power;
    let factory = stream_power * params.pulse_period * nf * mvm
        + params.eom_power * params.pulse_period * nf * nf
        + (eh + es * nf) * mvm * nf;
    let approx = es * nf * nf * mvm;
    Ok(EnergyReport {
        e_main: main,
        e_correction: correction,
        e_factory: factory,
        e_total: main + correction + factory,
        e_correction_approx: approx,
        e_factory_approx: approx,
        e_gpu: params.gpu_seconds_per_mvm.map(|s| params.gpu_power * mvm * s),
    })
}

/// One point of a `g²` sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GSqPoint {
    pub g_sq: f64,
    pub median_mvm: f64,
    pub median_e_main: f64,
}

/// Grid point minimizing the median main-cavity energy.
///
/// `median_mvm` maps each `g²` to the median MVM-to-solution across the
/// problem batch (typically by running the noisy solver at that `g²`).
pub fn optimal_g_sq(
    g_grid: &[f64],
    n: usize,
    params: &EnergyParams,
    mut median_mvm: impl FnMut(f64) -> Result<f64>,
) -> Result<(GSqPoint, Vec<GSqPoint>)> {
    if g_grid.is_empty() {
        return Err(Error::Empty("g_sq grid"));
    }
    let mut points = Vec::with_capacity(g_grid.len());
    for &g in g_grid {
        let p = EnergyParams { g_sq: g, ..*params };
        p.validate()?;
        let mvm = median_mvm(g)?;
        let e = if mvm.is_finite() { e_main(mvm, n, &p) } else { f64::INFINITY };
        points.push(GSqPoint { g_sq: g, median_mvm: mvm, median_e_main: e });
    }
    let best = points
        .iter()
        .copied()
        .filter(|p| p.median_e_main.is_finite())
        .min_by(|a, b| a.median_e_main.total_cmp(&b.median_e_main))
        .ok_or(Error::Undefined("time to solution is infinite at every grid point"))?;
    Ok((best, points))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn photon_energy_at_telecom_wavelength() {
        assert!((photon_energy(1.56e-6) - 1.2734e-19).abs() < 1e-23);
    }

    #[test]
    fn zero_mvm_leaves_only_setup_cost() {
        let r = energy_report(0.0, 50, &EnergyParams::default()).unwrap();
        assert_eq!(r.e_main, 0.0);
        assert_eq!(r.e_correction, 0.0);
        assert!((r.e_factory - 4e-12 * 2500.0).abs() < 1e-24);
    }

    #[test]
    fn worked_examples() {
        let p = EnergyParams { photon_energy: 1.273e-19, roundtrip_dt: 0.1, g_sq: 1e-3, ..Default::default() };
        let r = energy_report(1e4, 100, &p).unwrap();
        assert!((r.e_main - 2.546e-11).abs() / 2.546e-11 < 1e-12);
        let r = energy_report(2e5, 800, &p).unwrap();
        assert!((r.e_correction - 1.2976e-2).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_g_sq() {
        let p = EnergyParams { g_sq: 0.0, ..Default::default() };
        assert!(energy_report(1.0, 1, &p).is_err());
    }

    #[test]
    fn optimum_with_flat_success_is_largest_g_sq() {
        let (best, pts) = optimal_g_sq(&[1e-6, 1e-4, 1e-2], 100, &EnergyParams::default(), |_| Ok(1e4)).unwrap();
        assert_eq!(best.g_sq, 1e-2);
        assert_eq!(pts.len(), 3);
        let (best, _) = optimal_g_sq(&[3e-4], 100, &EnergyParams::default(), |_| Ok(7.0)).unwrap();
        assert_eq!(best.g_sq, 3e-4);
        assert!(optimal_g_sq(&[1e-4], 10, &EnergyParams::default(), |_| Ok(f64::INFINITY)).is_err());
    }
}
