//! Run configuration: TOML file plus `key=value` overrides.

use std::fmt;
use std::path::{Path, PathBuf};

use cim_core::energy::EnergyParams;
use cim_core::presets;
use cim_core::sde::NoiseParams;
use cim_core::{Ramp, Schedule, SolverParams, Variant};
use serde::Deserialize;

/// Configuration error tied to a dotted field path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl fmt::Display) -> Self {
        Self { path: path.into(), message: message.to_string() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Bench,
    Scale,
    NoiseSweep,
    Chaos,
    Energy,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Bench => "bench",
            Command::Scale => "scale",
            Command::NoiseSweep => "noise-sweep",
            Command::Chaos => "chaos",
            Command::Energy => "energy",
        }
    }
}

/// How the per-instance target energy is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetMode {
    /// Exact ground state when `n` is small enough, otherwise best found.
    #[default]
    Auto,
    BruteForce,
    /// Lowest energy over every trajectory of every solver in the run.
    BestFound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum RampSpec {
    Fixed(f64),
    Linear([f64; 2]),
}

impl From<RampSpec> for Ramp {
    fn from(r: RampSpec) -> Self {
        match r {
            RampSpec::Fixed(v) => Ramp::fixed(v),
            RampSpec::Linear([a, b]) => Ramp::linear(a, b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkSpec {
    pub sizes: Vec<usize>,
    #[serde(default = "one")]
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSource {
    /// G-set files, relative to the config file.
    #[serde(default)]
    pub files: Vec<PathBuf>,
    #[serde(default)]
    pub sk: Option<SkSpec>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub label: Option<String>,
    pub preset: Option<String>,
    pub variant: Option<Variant>,
    pub n_steps: Option<usize>,
    pub dt: Option<f64>,
    pub t_ramp: Option<usize>,
    pub t_plateau: Option<usize>,
    pub p: Option<RampSpec>,
    pub alpha: Option<RampSpec>,
    pub beta: Option<RampSpec>,
    pub c: Option<RampSpec>,
    pub k: Option<RampSpec>,
    pub clamp: Option<bool>,
    pub init_std: Option<f64>,
    pub sbm_coupling_scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub g_sq: OneOrMany,
    pub r_b: f64,
    #[serde(default)]
    pub seed: u64,
    /// Noise sweeps also run the noiseless model as a baseline.
    #[serde(default = "yes")]
    pub include_deterministic: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChaosSpec {
    pub perturb_std: f64,
    pub checkpoints: Vec<usize>,
    pub seeds: usize,
}

impl Default for ChaosSpec {
    fn default() -> Self {
        Self { perturb_std: 0.01, checkpoints: vec![0, 100, 400, 1000, 4000], seeds: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergySpec {
    pub n: Vec<usize>,
    pub mvm: Vec<f64>,
    pub g_sq: Vec<f64>,
    pub params: EnergyParams,
}

impl Default for EnergySpec {
    fn default() -> Self {
        Self { n: vec![100, 800], mvm: vec![1e4, 2e5], g_sq: vec![1e-4], params: EnergyParams::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// `None` or `-` writes to stdout.
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Thread count; never changes the results.
    #[serde(default = "one")]
    pub workers: usize,
    /// Track the best energy at every step (off: final readout only).
    #[serde(default = "yes")]
    pub track_energy: bool,
    #[serde(default)]
    pub target: TargetMode,
    #[serde(default)]
    pub instances: InstanceSource,
    #[serde(default)]
    pub solvers: Vec<SolverSpec>,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub chaos: ChaosSpec,
    #[serde(default)]
    pub energy: EnergySpec,
    #[serde(default)]
    pub output: OutputSpec,
    /// Directory that relative instance paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

fn default_trajectories() -> usize {
    100
}

/// Largest `n` for which `auto` targets use exhaustive search.
pub const BRUTE_FORCE_LIMIT: usize = 20;

impl RunConfig {
    /// Parses TOML text, applies `key=value` overrides and validates.
    pub fn from_toml(text: &str, overrides: &[String], base_dir: &Path) -> Result<Self, ConfigError> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::new("", e.message()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let mut cfg: RunConfig = serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner().to_string();
            let message = inner.lines().next().unwrap_or_default().to_string();
            ConfigError::new(if path == "." { String::new() } else { path }, message)
        })?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new("", format!("{}: {e}", path.display())))?;
        Self::from_toml(&text, overrides, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trajectories == 0 {
            return Err(ConfigError::new("trajectories", "must be at least 1"));
        }
        if self.workers == 0 {
            return Err(ConfigError::new("workers", "must be at least 1"));
        }
        if let Some(sk) = &self.instances.sk {
            if sk.sizes.is_empty() {
                return Err(ConfigError::new("instances.sk.sizes", "must not be empty"));
            }
            if let Some(i) = sk.sizes.iter().position(|&n| n == 0) {
                return Err(ConfigError::new(format!("instances.sk.sizes[{i}]"), "must be at least 1"));
            }
            if sk.count == 0 {
                return Err(ConfigError::new("instances.sk.count", "must be at least 1"));
            }
        }
        if self.command != Command::Energy {
            if self.instances.files.is_empty() && self.instances.sk.is_none() {
                return Err(ConfigError::new("instances", "needs `files` or `sk`"));
            }
            if self.solvers.is_empty() {
                return Err(ConfigError::new("solvers", "at least one solver is required"));
            }
        }
        let solvers = self.resolved_solvers()?;
        if let Some(noise) = &self.noise {
            let g = noise.g_sq.values();
            if g.is_empty() {
                return Err(ConfigError::new("noise.g_sq", "must not be empty"));
            }
            for (i, &v) in g.iter().enumerate() {
                NoiseParams::new(v, noise.r_b, noise.seed).map_err(|e| ConfigError::new(format!("noise.g_sq[{i}]"), e))?;
            }
            if matches!(self.command, Command::Solve | Command::Bench | Command::Scale) && g.len() != 1 {
                return Err(ConfigError::new("noise.g_sq", format!("`{}` takes a single value", self.command.name())));
            }
            for (i, (_, p)) in solvers.iter().enumerate() {
                if !p.variant.has_noisy_model() {
                    return Err(ConfigError::new(format!("solvers[{i}]"), format!("variant `{}` has no noise model", p.variant)));
                }
            }
        } else if self.command == Command::NoiseSweep {
            return Err(ConfigError::new("noise", "noise-sweep needs a [noise] table"));
        }
        if self.command == Command::Chaos {
            let c = &self.chaos;
            if !(c.perturb_std > 0.0 && c.perturb_std.is_finite()) {
                return Err(ConfigError::new("chaos.perturb_std", "must be positive"));
            }
            if c.seeds == 0 {
                return Err(ConfigError::new("chaos.seeds", "must be at least 1"));
            }
            for (i, (_, p)) in solvers.iter().enumerate() {
                if let Some(&cp) = c.checkpoints.iter().find(|&&cp| cp > p.schedule.n_steps) {
                    return Err(ConfigError::new(
                        "chaos.checkpoints",
                        format!("checkpoint {cp} exceeds n_steps {} of solvers[{i}]", p.schedule.n_steps),
                    ));
                }
            }
        }
        if self.command == Command::Energy {
            let e = &self.energy;
            for (name, empty) in [("energy.n", e.n.is_empty()), ("energy.mvm", e.mvm.is_empty()), ("energy.g_sq", e.g_sq.is_empty())] {
                if empty {
                    return Err(ConfigError::new(name, "must not be empty"));
                }
            }
            for (i, &g) in e.g_sq.iter().enumerate() {
                EnergyParams { g_sq: g, ..e.params }
                    .validate()
                    .map_err(|err| ConfigError::new(format!("energy.g_sq[{i}]"), err))?;
            }
            if let Some(i) = e.n.iter().position(|&n| n == 0) {
                return Err(ConfigError::new(format!("energy.n[{i}]"), "must be at least 1"));
            }
            if let Some(i) = e.mvm.iter().position(|&m| !(m >= 0.0 && m.is_finite())) {
                return Err(ConfigError::new(format!("energy.mvm[{i}]"), "must be finite and non-negative"));
            }
        }
        Ok(())
    }

    /// `(label, params)` for every solver entry.
    pub fn resolved_solvers(&self) -> Result<Vec<(String, SolverParams)>, ConfigError> {
        let mut out: Vec<(String, SolverParams)> = Vec::with_capacity(self.solvers.len());
        for (i, s) in self.solvers.iter().enumerate() {
            let resolved = s.resolve(&format!("solvers[{i}]"))?;
            if out.iter().any(|(l, _)| *l == resolved.0) {
                return Err(ConfigError::new(format!("solvers[{i}].label"), format!("duplicate label `{}`", resolved.0)));
            }
            out.push(resolved);
        }
        Ok(out)
    }

    pub fn noise_params(&self) -> Vec<NoiseParams> {
        self.noise
            .as_ref()
            .map(|n| n.g_sq.values().into_iter().map(|g| NoiseParams { g_sq: g, r_b: n.r_b, rng_seed: n.seed }).collect())
            .unwrap_or_default()
    }
}

impl SolverSpec {
    fn resolve(&self, path: &str) -> Result<(String, SolverParams), ConfigError> {
        let at = |field: &str| format!("{path}.{field}");
        let mut params = match (&self.preset, self.variant) {
            (Some(name), variant) => {
                let p = presets::preset(name).map_err(|_| {
                    ConfigError::new(at("preset"), format!("unknown preset `{name}` (see `cim-bench presets`)"))
                })?;
                if let Some(v) = variant {
                    if v != p.variant {
                        return Err(ConfigError::new(at("variant"), format!("preset `{name}` is a {} solver", p.variant)));
                    }
                }
                p
            }
            (None, Some(v)) => {
                let n = self.n_steps.ok_or_else(|| ConfigError::new(at("n_steps"), "required without a preset"))?;
                let dt = self.dt.ok_or_else(|| ConfigError::new(at("dt"), "required without a preset"))?;
                SolverParams::new(v, Schedule::full_ramp(n, dt))
            }
            (None, None) => return Err(ConfigError::new(path, "needs `preset` or `variant`")),
        };
        let s = &mut params.schedule;
        if let Some(n) = self.n_steps {
            *s = s.scaled_to(n);
        }
        if let Some(dt) = self.dt {
            s.dt = dt;
        }
        match (self.t_ramp, self.t_plateau) {
            (Some(r), Some(p)) => {
                if r + p != s.n_steps {
                    return Err(ConfigError::new(at("t_plateau"), format!("t_ramp + t_plateau must equal n_steps ({})", s.n_steps)));
                }
                s.t_ramp = r;
                s.t_plateau = p;
            }
            (Some(r), None) => {
                if r > s.n_steps {
                    return Err(ConfigError::new(at("t_ramp"), format!("exceeds n_steps ({})", s.n_steps)));
                }
                s.t_ramp = r;
                s.t_plateau = s.n_steps - r;
            }
            (None, Some(p)) => {
                if p > s.n_steps {
                    return Err(ConfigError::new(at("t_plateau"), format!("exceeds n_steps ({})", s.n_steps)));
                }
                s.t_plateau = p;
                s.t_ramp = s.n_steps - p;
            }
            (None, None) => {}
        }
        for (field, spec, slot) in [
            ("p", &self.p, &mut s.p),
            ("alpha", &self.alpha, &mut s.alpha),
            ("beta", &self.beta, &mut s.beta),
            ("c", &self.c, &mut s.c),
            ("k", &self.k, &mut s.k),
        ] {
            if let Some(r) = spec {
                let r: Ramp = r.clone().into();
                if !(r.start.is_finite() && r.end.is_finite()) {
                    return Err(ConfigError::new(at(field), "must be finite"));
                }
                *slot = r;
            }
        }
        if let Some(c) = self.clamp {
            params.clamp = c;
        }
        if let Some(v) = self.init_std {
            params.init_std = v;
        }
        if let Some(v) = self.sbm_coupling_scale {
            params.sbm_coupling_scale = v;
        }
        params.validate().map_err(|e| ConfigError::new(path, e))?;
        let label = self
            .label
            .clone()
            .or_else(|| self.preset.clone())
            .unwrap_or_else(|| params.variant.name().to_string());
        Ok((label, params))
    }
}

/// Sets `a.b.0.c = value` in `table`; the value is parsed as TOML and falls
/// back to a plain string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), ConfigError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| ConfigError::new("", format!("override `{assignment}` is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::new(key, "malformed override key"));
    }
    let mut node = table;
    for (depth, part) in parts[..parts.len() - 1].iter().enumerate() {
        let here = parts[..=depth].join(".");
        let next = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = match next {
            toml::Value::Table(t) => t,
            toml::Value::Array(items) => {
                let idx: usize = parts
                    .get(depth + 1)
                    .and_then(|p| p.parse().ok())
                    .ok_or_else(|| ConfigError::new(here.clone(), "array needs a numeric index"))?;
                let rest = parts[depth + 2..].join(".");
                let item = items
                    .get_mut(idx)
                    .ok_or_else(|| ConfigError::new(format!("{here}.{idx}"), "index out of range"))?;
                return match item {
                    toml::Value::Table(t) if !rest.is_empty() => apply_override(t, &format!("{rest}={raw}")),
                    _ if rest.is_empty() => {
                        *item = value;
                        Ok(())
                    }
                    _ => Err(ConfigError::new(format!("{here}.{idx}"), "not a table")),
                };
            }
            _ => return Err(ConfigError::new(here, "not a table")),
        };
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
