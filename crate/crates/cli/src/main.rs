use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use cim_bench::config::{ConfigError, Format, RunConfig};
use cim_bench::output::{render, Row};
use cim_core::instances::{sk_random, to_gset};
use cim_core::presets::{catalog, describe};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cim-bench", version, about = "Benchmark runner for CIM-style Ising solvers")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the study described by a TOML config.
    Run {
        /// Config file; omit to build the config from `--set` alone.
        config: Option<PathBuf>,
        /// Override a config key, e.g. `--set solvers.0.n_steps=500`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Shorthand for `--set workers=N`.
        #[arg(long)]
        workers: Option<usize>,
        /// Shorthand for `--set output.path=PATH`.
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Shorthand for `--set output.format=FORMAT`.
        #[arg(long, value_parser = ["json", "csv"])]
        format: Option<String>,
    },
    /// List the shipped parameter presets.
    Presets {
        #[arg(long)]
        json: bool,
    },
    /// Write a random ±1 SK instance in G-set format.
    GenSk {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Cmd::Run { config, mut overrides, workers, out, format } => {
            if let Some(w) = workers {
                overrides.push(format!("workers={w}"));
            }
            if let Some(o) = out {
                overrides.push(format!("output.path={}", toml_string(&o.to_string_lossy())));
            }
            if let Some(f) = format {
                overrides.push(format!("output.format=\"{f}\""));
            }
            let cfg = match &config {
                Some(path) => RunConfig::load(path, &overrides)?,
                None => RunConfig::from_toml("", &overrides, Path::new("."))?,
            };
            // Fail on an unwritable destination before doing any work.
            let mut sink = open_output(&cfg)?;
            let rows = cim_bench::run(&cfg)?;
            sink.write_all(render(&rows, cfg.output.format)?.as_bytes())?;
            sink.flush()?;
            Ok(())
        }
        Cmd::Presets { json } => {
            let mut stdout = std::io::stdout().lock();
            for p in catalog() {
                if json {
                    let row = Row::new("preset")
                        .with("name", p.name)
                        .with("description", p.description)
                        .with("params", serde_json::to_value(&p.params)?);
                    stdout.write_all(render(&[row], Format::Json)?.as_bytes())?;
                } else {
                    writeln!(stdout, "{:<26} {}\n{:<26} {}", p.name, p.description, "", describe(&p.params))?;
                }
            }
            Ok(())
        }
        Cmd::GenSk { n, seed, out } => {
            let text = to_gset(&sk_random(n, seed)?)?;
            match out {
                Some(path) => std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => std::io::stdout().write_all(text.as_bytes())?,
            }
            Ok(())
        }
    }
}

fn toml_string(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn open_output(cfg: &RunConfig) -> anyhow::Result<Box<dyn Write>> {
    match &cfg.output.path {
        Some(p) if p.as_os_str() != "-" => {
            let f = std::fs::File::create(p).map_err(|e| ConfigError::new("output.path", format!("{}: {e}", p.display())))?;
            Ok(Box::new(std::io::BufWriter::new(f)))
        }
        _ => Ok(Box::new(std::io::stdout().lock())),
    }
}
