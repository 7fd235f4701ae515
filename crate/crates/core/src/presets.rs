//! Shipped parameter sets.

use crate::error::{Error, Result};
use crate::schedule::{Ramp, Schedule};
use crate::solvers::{SolverParams, Variant};

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub params: SolverParams,
}

#[allow(clippy::too_many_arguments)]
fn schedule(n_steps: usize, dt: f64, t_ramp: usize, p: Ramp, alpha: Ramp, beta: Ramp, c: Ramp, k: Ramp) -> Schedule {
    Schedule { n_steps, dt, t_ramp, t_plateau: n_steps - t_ramp, p, alpha, beta, c, k }
}

const fn lin(a: f64, b: f64) -> Ramp {
    Ramp::linear(a, b)
}

const fn fix(v: f64) -> Ramp {
    Ramp::fixed(v)
}

fn cac(n: usize, dt: f64, t_ramp: usize, p: Ramp, alpha: Ramp, beta: f64) -> SolverParams {
    SolverParams::new(Variant::Cac, schedule(n, dt, t_ramp, p, alpha, fix(beta), fix(1.0), fix(0.0)))
}

fn cfc(n: usize, dt: f64, t_ramp: usize, p: Ramp, beta: f64) -> SolverParams {
    SolverParams::new(Variant::Cfc, schedule(n, dt, t_ramp, p, fix(1.0), fix(beta), fix(1.0), fix(0.0)))
}

fn sfc(n: usize, dt: f64, p: Ramp, c: Ramp, beta: Ramp, k: f64) -> SolverParams {
    SolverParams::new(Variant::Sfc, schedule(n, dt, n, p, fix(1.0), beta, c, fix(k)))
}

fn dsbm(n: usize, dt: f64, c: f64) -> SolverParams {
    SolverParams::new(Variant::Dsbm, schedule(n, dt, n, fix(0.0), fix(1.0), fix(0.0), fix(c), fix(0.0)))
}

fn diagnostic(mut p: SolverParams) -> SolverParams {
    p.init_std = 0.25;
    p
}

fn unclamped(mut p: SolverParams) -> SolverParams {
    p.clamp = false;
    p
}

/// Every shipped preset.
pub fn catalog() -> Vec<Preset> {
    let g_cac = |n, dt, tr, p| cac(n, dt, tr, p, lin(1.0, 3.0), 0.3);
    let g_cfc = |n, dt, tr, p| cfc(n, dt, tr, p, 0.15);
    let g_sfc = |n, dt, c, beta, k| sfc(n, dt, lin(-1.0, 1.0), c, beta, k);
    let list = [
        ("cac-sk", "CAC on SK instances", cac(3200, 0.125, 2880, lin(-1.0, 1.0), lin(1.0, 2.5), 0.8)),
        ("cfc-sk", "CFC on SK instances", cfc(1000, 0.4, 900, lin(-1.0, 1.0), 0.2)),
        ("sfc-sk", "SFC on SK instances", sfc(500, 0.4, lin(-1.0, 1.0), lin(1.0, 3.0), lin(0.3, 0.1), 0.2)),
        ("dsbm-sk", "dSBM on SK instances", dsbm(2000, 1.25, 0.5)),
        ("cac-n1200", "CAC on 1200-spin SK instances", cac(8000, 0.125, 7200, lin(-1.0, 1.0), lin(1.0, 2.5), 0.8)),
        ("dsbm-n1200", "dSBM on 1200-spin SK instances", dsbm(4000, 1.25, 0.5)),
        ("sfc-fixed", "SFC with fixed parameters (chaos diagnostics)", diagnostic(sfc(4000, 0.4, fix(-0.5), fix(1.0), fix(0.3), 0.2))),
        ("cfc-fixed", "CFC below threshold with fast error feedback (chaos diagnostics)", diagnostic(cfc(4000, 0.4, 4000, fix(-1.0), 0.8))),
        ("cfc-physical", "CFC without amplitude restriction at dt 0.2 (noisy model)", unclamped(cfc(2000, 0.2, 1800, lin(-1.0, 1.0), 0.2))),
        ("cac-gset-random-800", "CAC, G-set random {+1}, N=800 (G1-G5)", g_cac(6666, 0.075, 6000, lin(-0.5, 1.0))),
        ("cac-gset-random-pm-800", "CAC, G-set random {+1,-1}, N=800 (G6-G10)", g_cac(6666, 0.075, 6000, lin(-0.5, 1.0))),
        ("cac-gset-toroidal-800", "CAC, G-set toroidal {+1,-1}, N=800 (G11-G13)", g_cac(5000, 0.1, 4500, fix(-4.0))),
        ("cac-gset-planar-800", "CAC, G-set planar {+1}, N=800 (G14-G17)", g_cac(20000, 0.05, 18000, fix(-1.0))),
        ("cac-gset-planar-pm-800", "CAC, G-set planar {+1,-1}, N=800 (G18-G21)", g_cac(20000, 0.05, 18000, fix(-1.0))),
        ("cac-gset-random-1000", "CAC, G-set random {+1}, N=1000 (G43-G46)", g_cac(10000, 0.1, 9000, lin(-0.5, 1.0))),
        ("cac-gset-planar-1000", "CAC, G-set planar {+1}, N=1000 (G51-G54)", g_cac(20000, 0.05, 18000, fix(-1.0))),
        ("cac-gset-random-2000", "CAC, G-set random {+1}, N=2000 (G22-G26)", g_cac(20000, 0.1, 19000, lin(-0.5, 1.0))),
        ("cac-gset-random-pm-2000", "CAC, G-set random {+1,-1}, N=2000 (G27-G31)", g_cac(20000, 0.1, 19000, lin(-0.5, 1.0))),
        ("cac-gset-toroidal-2000", "CAC, G-set toroidal {+1,-1}, N=2000 (G32-G34)", g_cac(20000, 0.1, 19000, lin(-4.0, -3.0))),
        ("cac-gset-planar-2000", "CAC, G-set planar, N=2000 (G35-G38)", g_cac(80000, 0.05, 78000, lin(-1.0, -0.5))),
        ("cac-gset-planar-2000b", "CAC, G-set planar, N=2000 (G39-G42)", g_cac(80000, 0.05, 78000, lin(-1.0, -0.5))),
        ("cfc-gset-random-800", "CFC, G-set random {+1}, N=800 (G1-G5)", g_cfc(4000, 0.125, 3600, lin(-1.0, 1.0))),
        ("cfc-gset-random-pm-800", "CFC, G-set random {+1,-1}, N=800 (G6-G10)", g_cfc(2000, 0.25, 1800, lin(-1.0, 1.0))),
        ("cfc-gset-toroidal-800", "CFC, G-set toroidal {+1,-1}, N=800 (G11-G13)", g_cfc(2000, 0.25, 1800, lin(-3.0, -1.0))),
        ("cfc-gset-planar-800", "CFC, G-set planar {+1}, N=800 (G14-G17)", g_cfc(8000, 0.125, 7200, lin(-2.0, 0.0))),
        ("cfc-gset-planar-pm-800", "CFC, G-set planar {+1,-1}, N=800 (G18-G21)", g_cfc(4000, 0.25, 3600, lin(-2.0, 0.0))),
        ("cfc-gset-random-1000", "CFC, G-set random {+1}, N=1000 (G43-G46)", g_cfc(5000, 0.2, 4500, lin(-1.0, 1.0))),
        ("cfc-gset-planar-1000", "CFC, G-set planar {+1}, N=1000 (G51-G54)", g_cfc(16000, 0.125, 15200, lin(-2.0, 0.0))),
        ("cfc-gset-random-2000", "CFC, G-set random {+1}, N=2000 (G22-G26)", g_cfc(10000, 0.2, 9500, lin(-1.0, 1.0))),
        ("cfc-gset-random-pm-2000", "CFC, G-set random {+1,-1}, N=2000 (G27-G31)", g_cfc(10000, 0.2, 9500, lin(-1.0, 1.0))),
        ("cfc-gset-toroidal-2000", "CFC, G-set toroidal {+1,-1}, N=2000 (G32-G34)", g_cfc(40000, 0.1, 39000, lin(-3.0, -1.0))),
        ("cfc-gset-planar-2000", "CFC, G-set planar, N=2000 (G35-G38)", g_cfc(80000, 0.05, 78000, lin(-2.0, 0.0))),
        ("cfc-gset-planar-2000b", "CFC, G-set planar, N=2000 (G39-G42)", g_cfc(40000, 0.1, 39000, lin(-2.0, 0.0))),
        ("sfc-gset-random-800", "SFC, G-set random {+1}, N=800 (G1-G5)", g_sfc(2666, 0.15, lin(1.0, 3.0), lin(0.3, 0.0), 0.2)),
        ("sfc-gset-random-pm-800", "SFC, G-set random {+1,-1}, N=800 (G6-G10)", g_sfc(500, 0.4, lin(1.0, 3.0), lin(0.3, 0.0), 0.2)),
        ("sfc-gset-toroidal-800", "SFC, G-set toroidal {+1,-1}, N=800 (G11-G13)", g_sfc(2500, 0.4, fix(1.4), lin(0.05, 0.0), 0.32)),
        ("sfc-gset-random-1000", "SFC, G-set random {+1}, N=1000 (G43-G46)", g_sfc(5000, 0.2, lin(1.4, 4.2), lin(0.2, 0.0), 0.2)),
    ];
    list.into_iter()
        .map(|(name, description, params)| Preset { name, description, params })
        .collect()
}

pub fn names() -> Vec<&'static str> {
    catalog().into_iter().map(|p| p.name).collect()
}

/// Parameters of the preset called `name`.
pub fn preset(name: &str) -> Result<SolverParams> {
    catalog()
        .into_iter()
        .find(|p| p.name == name)
        .map(|p| p.params)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown preset `{name}`")))
}

/// One-line rendering of a parameter vector.
pub fn describe(params: &SolverParams) -> String {
    let s = &params.schedule;
    let mut out = format!(
        "variant={} n_steps={} dt={} t_ramp={} t_plateau={}",
        params.variant, s.n_steps, s.dt, s.t_ramp, s.t_plateau
    );
    let relevant: &[(&str, Ramp)] = match params.variant {
        crate::solvers::Variant::Cac | crate::solvers::Variant::Cfc => &[("p", s.p), ("alpha", s.alpha), ("beta", s.beta)],
        crate::solvers::Variant::Sfc => &[("p", s.p), ("c", s.c), ("beta", s.beta), ("k", s.k)],
        crate::solvers::Variant::Linear => &[("p", s.p)],
        crate::solvers::Variant::Tanh => &[("p", s.p), ("c", s.c)],
        crate::solvers::Variant::Dsbm => &[("c", s.c)],
    };
    for (name, r) in relevant {
        out.push_str(&format!(" {name}={r}"));
    }
    out.push_str(&format!(" clamp={} init_std={}", params.clamp, params.init_std));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_validate_and_are_unique() {
        let cat = catalog();
        for p in &cat {
            p.params.validate().unwrap_or_else(|e| panic!("{}: {e}", p.name));
        }
        let mut names = names();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), cat.len());
    }

    #[test]
    fn headline_presets() {
        let p = preset("cac-sk").unwrap();
        let s = &p.schedule;
        assert_eq!((s.n_steps, s.dt, s.t_ramp, s.t_plateau), (3200, 0.125, 2880, 320));
        assert_eq!((s.p, s.alpha, s.beta), (lin(-1.0, 1.0), lin(1.0, 2.5), fix(0.8)));
        assert_eq!(p.init_std, 1e-4);

        let s = preset("cfc-sk").unwrap().schedule;
        assert_eq!((s.n_steps, s.dt, s.t_ramp, s.t_plateau), (1000, 0.4, 900, 100));
        assert_eq!((s.p, s.alpha, s.beta), (lin(-1.0, 1.0), fix(1.0), fix(0.2)));

        let p = preset("sfc-sk").unwrap();
        let s = &p.schedule;
        assert_eq!((s.n_steps, s.dt), (500, 0.4));
        assert_eq!((s.p, s.c, s.beta, s.k), (lin(-1.0, 1.0), lin(1.0, 3.0), lin(0.3, 0.1), fix(0.2)));
        assert_eq!(p.variant.initial_error(), 0.0);

        let s = preset("dsbm-sk").unwrap().schedule;
        assert_eq!((s.n_steps, s.dt, s.c), (2000, 1.25, fix(0.5)));

        let s = preset("cac-n1200").unwrap().schedule;
        assert_eq!((s.n_steps, s.dt, s.t_ramp, s.t_plateau), (8000, 0.125, 7200, 800));

        let s = preset("cac-gset-toroidal-800").unwrap().schedule;
        assert_eq!((s.p, s.n_steps, s.dt), (fix(-4.0), 5000, 0.1));
    }

    #[test]
    fn unknown_preset() {
        assert!(preset("nope").is_err());
    }
}
