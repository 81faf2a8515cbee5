mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use willmore_core::geom::Registry;
use willmore_core::Result;

use config::{RunArgs, RunConfig};
use output::{ensure_dir, Written};

/// Willmore energy, density and topology diagnostics for catalog surfaces and meshes.
#[derive(Debug, Parser)]
#[command(name = "willmore-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Density profile, Willmore energy, total curvature and monotonicity ledgers.
    Analyze(RunArgs),
    /// Inversion antisymmetry, inverted sphere fit and density identities.
    Invert(RunArgs),
    /// Tilt-excess and Reifenberg flatness at the given centers and scales.
    Flatness(RunArgs),
    /// End count, per-end densities and the finite topology verdict.
    Ends(RunArgs),
    /// List the catalog surfaces.
    Surfaces,
}

fn run(name: &str, args: &RunArgs) -> Result<()> {
    let cfg = RunConfig::resolve(name, args)?;
    if let Some(n) = cfg.threads {
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    ensure_dir(cfg.out_dir())?;
    let mut out = Written::default();
    out.text(cfg.out_path("run_config.txt"), &cfg.to_text())?;
    let msg = match name {
        "analyze" => commands::analyze(&cfg, &mut out)?,
        "invert" => commands::invert_cmd(&cfg, &mut out)?,
        "flatness" => commands::flatness_cmd(&cfg, &mut out)?,
        _ => commands::ends_cmd(&cfg, &mut out)?,
    };
    println!("{msg}");
    for p in &out.0 {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Analyze(a) => run("analyze", a),
        Command::Invert(a) => run("invert", a),
        Command::Flatness(a) => run("flatness", a),
        Command::Ends(a) => run("ends", a),
        Command::Surfaces => {
            for name in Registry::builtin().names() {
                println!("{name}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
