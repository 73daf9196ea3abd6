//! Configuration, dataset ingestion, synthetic data and the command-line
//! front end.
//!
//! Every command writes into one output directory together with a
//! `provenance.json` holding the resolved config, its hash, the master
//! seed and SHA-256 digests of inputs and outputs. `replay` re-runs such a
//! record and checks the outputs bit for bit.

mod commands;
mod config;
mod manifest;
mod provenance;
mod synth;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;
use serde::Serialize;

pub use commands::{execute, replay, Cli, Command};
pub use config::{ClassifyConfig, PreprocessConfig, RunConfig, SimConfig, StatsConfig};
pub use manifest::{load_dataset, read_recording, write_recording, LoadedSubject, Manifest, SubjectRecord};
pub use provenance::{hash_outputs, sha256_file, Provenance, ReplayReport, PROVENANCE_FILE};
pub use synth::{synth_eeg, synth_subject, synth_subjects, GroupProfile, PlantedPeak, SynthProfile};

use crate::error::{Error, Result};

/// Environment variable holding the worker-pool size.
pub const WORKERS_ENV: &str = "NEUROBRIDGE_WORKERS";

/// Sizes the global rayon pool from [`WORKERS_ENV`]. A pool that already
/// exists is kept.
pub fn init_workers() -> Result<()> {
    let Ok(v) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}")))?;
    if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
        log::warn!("worker pool already initialized; {WORKERS_ENV} ignored");
    }
    Ok(())
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    status: &'static str,
    command: &'a str,
    kind: &'static str,
    message: String,
}

#[derive(Serialize)]
struct OkReport<'a> {
    status: &'static str,
    command: &'a str,
    out_dir: PathBuf,
    config_hash: String,
    outputs: usize,
}

/// Process exit status for an error category.
pub fn exit_code(e: &Error) -> i32 {
    match e.kind() {
        "config" | "parameter" => 2,
        "missing_file" | "channel_mismatch" | "non_numeric" | "data" | "csv" | "json" => 3,
        _ => 1,
    }
}

/// Runs the parsed command; returns the output directory and its record.
fn dispatch(cli: Cli) -> Result<(PathBuf, Provenance)> {
    init_workers()?;
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    cfg.validate()?;
    let out = cfg.out_dir.clone();
    match cli.command {
        Command::Replay { provenance } => {
            let rep = replay(&provenance, &out)?;
            if !rep.identical {
                return Err(Error::Data(format!(
                    "replay differs: {} missing, {} extra, {} changed (see {})",
                    rep.missing.len(),
                    rep.extra.len(),
                    rep.differing.len(),
                    out.join("replay_report.json").display()
                )));
            }
            Ok((out, Provenance::read(&provenance)?))
        }
        cmd => {
            let prov = execute(cmd, &cfg, &out)?;
            Ok((out, prov))
        }
    }
}

/// Parses arguments, runs the command and prints a one-line JSON status
/// (stdout on success, stderr on failure). Returns the exit status.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let name = cli.command.name();
    match dispatch(cli) {
        Ok((out_dir, prov)) => {
            let rep = OkReport {
                status: "ok",
                command: name,
                out_dir,
                config_hash: prov.config_hash,
                outputs: prov.outputs.len(),
            };
            println!("{}", serde_json::to_string(&rep).expect("status serializes"));
            0
        }
        Err(e) => {
            let rep = ErrorReport {
                status: "error",
                command: name,
                kind: e.kind(),
                message: e.to_string(),
            };
            eprintln!("{}", serde_json::to_string(&rep).expect("status serializes"));
            exit_code(&e)
        }
    }
}
