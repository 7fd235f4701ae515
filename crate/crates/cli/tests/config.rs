use std::path::Path;

use cim_bench::config::{apply_override, Command, RunConfig};
use cim_bench::ConfigError;

fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg = RunConfig::from_toml(text, &[], Path::new("."))?;
    cfg.validate()?;
    Ok(cfg)
}

fn error_path(text: &str) -> String {
    parse(text).expect_err("config should be rejected").path
}

const MINIMAL: &str = r#"
command = "bench"
instances.sk = { sizes = [20] }
solvers = [{ preset = "cfc-sk" }]
"#;

#[test]
fn minimal_config_uses_defaults() {
    let cfg = parse(MINIMAL).unwrap();
    assert_eq!(cfg.command, Command::Bench);
    assert_eq!((cfg.trajectories, cfg.workers, cfg.master_seed), (100, 1, 0));
    assert!(cfg.track_energy);
    let solvers = cfg.resolved_solvers().unwrap();
    assert_eq!(solvers[0].0, "cfc-sk");
    assert_eq!(solvers[0].1, cim_core::presets::preset("cfc-sk").unwrap());
}

#[test]
fn errors_name_the_offending_field() {
    assert_eq!(error_path(&format!("{MINIMAL}trajectories = 0")), "trajectories");
    assert_eq!(error_path(&format!("{MINIMAL}workers = 0")), "workers");
    assert_eq!(error_path(&MINIMAL.replace("cfc-sk", "nope")), "solvers[0].preset");
    assert_eq!(error_path(&MINIMAL.replace("preset = \"cfc-sk\"", "preset = \"cfc-sk\", bogus = 1")), "solvers[0].bogus");
    assert_eq!(error_path(&MINIMAL.replace("[20]", "[]")), "instances.sk.sizes");
    assert_eq!(error_path(&MINIMAL.replace("\"bench\"", "\"noise-sweep\"")), "noise");
    assert_eq!(error_path(&format!("{MINIMAL}noise = {{ g_sq = [1e-3, -1.0], r_b = 0.1 }}").replace("bench", "noise-sweep")), "noise.g_sq[1]");
    assert_eq!(error_path(&MINIMAL.replace("preset = \"cfc-sk\"", "preset = \"cfc-sk\", dt = -0.1")), "solvers[0]");
    assert_eq!(error_path(&format!("{MINIMAL}noise = {{ g_sq = 1e-3 }}")), "noise");
    assert!(parse(&MINIMAL.replace("\"bench\"", "\"fly\"")).is_err());
}

#[test]
fn duplicate_labels_are_rejected() {
    let text = MINIMAL.replace("solvers = [{ preset = \"cfc-sk\" }]", "solvers = [{ preset = \"cfc-sk\" }, { preset = \"cfc-sk\" }]");
    assert_eq!(error_path(&text), "solvers[1].label");
    let relabelled = text.replace("}]", ", label = \"other\" }]");
    assert_eq!(parse(&relabelled).unwrap().resolved_solvers().unwrap().len(), 2);
}

#[test]
fn overrides_patch_nested_fields() {
    let overrides = ["trajectories=7".to_string(), "solvers.0.n_steps=50".to_string(), "solvers.0.p=[-1.0, 0.5]".to_string()];
    let cfg = RunConfig::from_toml(MINIMAL, &overrides, Path::new(".")).unwrap();
    assert_eq!(cfg.trajectories, 7);
    let (_, p) = &cfg.resolved_solvers().unwrap()[0];
    assert_eq!(p.schedule.n_steps, 50);
    assert_eq!((p.schedule.p.start, p.schedule.p.end), (-1.0, 0.5));

    let mut table: toml::Table = MINIMAL.parse().unwrap();
    assert_eq!(apply_override(&mut table, "solvers.3.dt=0.1").unwrap_err().path, "solvers.3");
    assert!(apply_override(&mut table, "no-equals-sign").is_err());
}

#[test]
fn shortened_preset_keeps_ramp_proportion() {
    let text = MINIMAL.replace("preset = \"cfc-sk\"", "preset = \"cfc-sk\", n_steps = 500");
    let (_, p) = &parse(&text).unwrap().resolved_solvers().unwrap()[0];
    let full = cim_core::presets::preset("cfc-sk").unwrap();
    assert_eq!(p.schedule.n_steps, 500);
    assert_eq!(p.schedule.t_ramp * full.schedule.n_steps, full.schedule.t_ramp * 500);
    assert_eq!(p.schedule.t_ramp + p.schedule.t_plateau, 500);
}

#[test]
fn shipped_configs_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let cfg = RunConfig::from_toml(&text, &[], &dir).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        seen += 1;
    }
    assert!(seen >= 5);
}
