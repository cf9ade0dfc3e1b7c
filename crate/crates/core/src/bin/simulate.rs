// Copyright 2026 The noisebath Authors
// SPDX-License-Identifier: Apache-2.0

//! `simulate --config <path> [--preset <name>] [--seed <u64>] [--workers <n>] [--out <dir>]`
//!
//! Exit status: 0 when every check passes, 1 on a tolerance failure, 2 on error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use noisebath::harness::{list_presets, parse_config, run_preset, Relation};

#[derive(Parser, Debug)]
#[command(name = "simulate", about = "Run a noise-model preset against its Lindblad reference")]
struct Args {
    /// JSON config with a `preset` key and optional overrides.
    #[arg(long, required_unless_present = "list")]
    config: Option<PathBuf>,
    /// Replaces the preset named in the config.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory for CSV series and the JSON report.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the available presets and exit.
    #[arg(long)]
    list: bool,
}

fn run(args: Args) -> noisebath::Result<bool> {
    let path = args.config.expect("clap enforces --config");
    let text = std::fs::read_to_string(&path)?;
    let mut cfg = parse_config(&text, args.preset.as_deref())?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    if let Some(out) = args.out {
        cfg.out_dir = out.to_string_lossy().into_owned();
    }
    let out = run_preset(&cfg)?;
    for c in &out.report.checks {
        let op = match c.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        };
        let verdict = if c.pass { "ok" } else { "FAIL" };
        println!("{verdict:>4}  {}: {:.6e} {op} {:.6e}", c.name, c.measured, c.tolerance);
    }
    for n in &out.report.notes {
        println!("note: {n}");
    }
    println!("report: {}", out.report_path.display());
    Ok(out.report.pass)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list {
        for (name, desc) in list_presets() {
            println!("{name:<16}{desc}");
        }
        return ExitCode::SUCCESS;
    }
    match run(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
