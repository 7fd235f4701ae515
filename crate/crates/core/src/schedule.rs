//! Linearly modulated parameter schedules.
//!
//! Every modulated scalar ramps linearly from its start to its end value over
//! the first `t_ramp` steps and then stays at the end value for the remaining
//! `t_plateau` steps.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ramp {
    pub start: f64,
    pub end: f64,
}

impl Ramp {
    pub const fn fixed(v: f64) -> Self {
        Self { start: v, end: v }
    }

    pub const fn linear(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    pub fn is_fixed(&self) -> bool {
        self.start == self.end
    }
}

impl fmt::Display for Ramp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_fixed() {
            write!(f, "{}", self.start)
        } else {
            write!(f, "{} -> {}", self.start, self.end)
        }
    }
}

/// Modulated parameter ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    P,
    Alpha,
    Beta,
    C,
    K,
}

impl Param {
    pub const ALL: [Param; 5] = [Param::P, Param::Alpha, Param::Beta, Param::C, Param::K];

    pub fn name(self) -> &'static str {
        match self {
            Param::P => "p",
            Param::Alpha => "alpha",
            Param::Beta => "beta",
            Param::C => "c",
            Param::K => "k",
        }
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p" => Ok(Param::P),
            "alpha" | "α" => Ok(Param::Alpha),
            "beta" | "β" => Ok(Param::Beta),
            "c" => Ok(Param::C),
            "k" => Ok(Param::K),
            other => Err(Error::UnknownParam(other.to_string())),
        }
    }
}

/// Per-step parameter values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    pub k: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub n_steps: usize,
    pub dt: f64,
    pub t_ramp: usize,
    pub t_plateau: usize,
    pub p: Ramp,
    pub alpha: Ramp,
    pub beta: Ramp,
    pub c: Ramp,
    pub k: Ramp,
}

impl Schedule {
    /// A schedule whose ramp spans the whole run (`t_plateau = 0`).
    pub fn full_ramp(n_steps: usize, dt: f64) -> Self {
        Self {
            n_steps,
            dt,
            t_ramp: n_steps,
            t_plateau: 0,
            p: Ramp::fixed(0.0),
            alpha: Ramp::fixed(1.0),
            beta: Ramp::fixed(0.0),
            c: Ramp::fixed(1.0),
            k: Ramp::fixed(0.0),
        }
    }

    pub fn ramp(&self, param: Param) -> Ramp {
        match param {
            Param::P => self.p,
            Param::Alpha => self.alpha,
            Param::Beta => self.beta,
            Param::C => self.c,
            Param::K => self.k,
        }
    }

    pub fn ramp_mut(&mut self, param: Param) -> &mut Ramp {
        match param {
            Param::P => &mut self.p,
            Param::Alpha => &mut self.alpha,
            Param::Beta => &mut self.beta,
            Param::C => &mut self.c,
            Param::K => &mut self.k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if self.t_ramp + self.t_plateau != self.n_steps {
            return Err(Error::InvalidParameter(format!(
                "t_ramp ({}) + t_plateau ({}) must equal n_steps ({})",
                self.t_ramp, self.t_plateau, self.n_steps
            )));
        }
        for param in Param::ALL {
            let r = self.ramp(param);
            if !(r.start.is_finite() && r.end.is_finite()) {
                return Err(Error::InvalidParameter(format!("{} is not finite", param.name())));
            }
        }
        if self.beta.start < 0.0 || self.beta.end < 0.0 {
            return Err(Error::InvalidParameter("beta must be non-negative".into()));
        }
        if self.alpha.start <= 0.0 || self.alpha.end <= 0.0 {
            return Err(Error::InvalidParameter("alpha must be positive".into()));
        }
        if self.k.start < 0.0 || self.k.end < 0.0 {
            return Err(Error::InvalidParameter("k must be non-negative".into()));
        }
        Ok(())
    }

    /// Value of `param` at `step`, checked.
    pub fn value(&self, param: Param, step: usize) -> Result<f64> {
        if step >= self.n_steps {
            return Err(Error::StepOutOfRange { step, n_steps: self.n_steps });
        }
        Ok(self.interpolate(self.ramp(param), step))
    }

    /// Parses the parameter id and returns its value at `step`.
    pub fn value_by_name(&self, name: &str, step: usize) -> Result<f64> {
        self.value(name.parse()?, step)
    }

    #[inline]
    fn interpolate(&self, r: Ramp, step: usize) -> f64 {
        if r.start == r.end || step >= self.t_ramp {
            r.end
        } else {
            r.start + (r.end - r.start) * (step as f64 / self.t_ramp as f64)
        }
    }

    /// All values at `step` (unchecked; steps past the end return end values).
    #[inline]
    pub fn at(&self, step: usize) -> StepParams {
        StepParams {
            p: self.interpolate(self.p, step),
            alpha: self.interpolate(self.alpha, step),
            beta: self.interpolate(self.beta, step),
            c: self.interpolate(self.c, step),
            k: self.interpolate(self.k, step),
            dt: self.dt,
        }
    }

    /// Same schedule shape with `n_steps` steps; ramp and plateau keep their
    /// proportions.
    pub fn scaled_to(&self, n_steps: usize) -> Self {
        let mut s = self.clone();
        s.n_steps = n_steps;
        if self.n_steps == 0 {
            s.t_ramp = n_steps;
            s.t_plateau = 0;
        } else {
            s.t_ramp = ((self.t_ramp as f64) * n_steps as f64 / self.n_steps as f64).round() as usize;
            s.t_ramp = s.t_ramp.min(n_steps);
            s.t_plateau = n_steps - s.t_ramp;
        }
        s
    }

    /// Same total integration time `n_steps * dt` with a different step size.
    pub fn with_dt(&self, dt: f64) -> Self {
        let steps = ((self.n_steps as f64) * self.dt / dt).round() as usize;
        let mut s = self.scaled_to(steps);
        s.dt = dt;
        s
    }

    /// Freezes every parameter at its start value.
    pub fn frozen(&self) -> Self {
        let mut s = self.clone();
        for param in Param::ALL {
            let r = s.ramp_mut(param);
            r.end = r.start;
        }
        s
    }

    /// Freezes every parameter at the value it takes at `step`.
    pub fn frozen_at(&self, step: usize) -> Self {
        let mut s = self.clone();
        for param in Param::ALL {
            let v = self.interpolate(self.ramp(param), step);
            *s.ramp_mut(param) = Ramp::fixed(v);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfc_like() -> Schedule {
        Schedule {
            n_steps: 1000,
            dt: 0.4,
            t_ramp: 900,
            t_plateau: 100,
            p: Ramp::linear(-1.0, 1.0),
            alpha: Ramp::fixed(1.0),
            beta: Ramp::fixed(0.2),
            c: Ramp::fixed(1.0),
            k: Ramp::fixed(0.0),
        }
    }

    #[test]
    fn ramp_start_mid_plateau() {
        let s = cfc_like();
        assert_eq!(s.value(Param::P, 0).unwrap(), -1.0);
        assert_eq!(s.value(Param::P, 450).unwrap(), 0.0);
        assert_eq!(s.value(Param::P, 950).unwrap(), 1.0);
        assert_eq!(s.value(Param::P, 900).unwrap(), 1.0);
        assert_eq!(s.value(Param::Beta, 123).unwrap(), 0.2);
    }

    #[test]
    fn errors() {
        let s = cfc_like();
        assert!(matches!(s.value(Param::P, 1000), Err(Error::StepOutOfRange { .. })));
        assert!(matches!(s.value_by_name("gamma", 0), Err(Error::UnknownParam(_))));
        assert_eq!(s.value_by_name("alpha", 10).unwrap(), 1.0);
    }

    #[test]
    fn validation() {
        let mut s = cfc_like();
        assert!(s.validate().is_ok());
        s.t_plateau = 10;
        assert!(s.validate().is_err());
        let mut s = cfc_like();
        s.dt = 0.0;
        assert!(s.validate().is_err());
        let mut s = cfc_like();
        s.beta = Ramp::fixed(-0.1);
        assert!(s.validate().is_err());
    }

    #[test]
    fn scaling_keeps_proportions() {
        let s = cfc_like().scaled_to(500);
        assert_eq!((s.t_ramp, s.t_plateau), (450, 50));
        assert!(s.validate().is_ok());
        let s = cfc_like().with_dt(0.2);
        assert_eq!(s.n_steps, 2000);
        assert_eq!(s.t_ramp + s.t_plateau, 2000);
    }
}
