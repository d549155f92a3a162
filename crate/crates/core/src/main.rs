use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crystal_current::cli::{load_config, run, Mode, Threads};

#[derive(Parser)]
#[command(name = "crystal-current", version, about = "Current response of periodic crystals to a switched-on electric field")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run(RunArgs),
    /// Chern number and transverse conductivity (`mode = chern`).
    Chern(RunArgs),
    /// Linear-response current from the Kubo sum (`mode = kubo`).
    Kubo(RunArgs),
    /// Closed-form predictors for the detected phase (`mode = predictors`).
    Predict(RunArgs),
    /// Time-averaged conical-point integral (`mode = dirac-check`).
    DiracCheck(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Worker threads for Brillouin-zone sweeps (0 or `auto` for all cores).
    #[arg(long, env = "CRYSTAL_CURRENT_THREADS")]
    threads: Option<String>,
    /// Also write SVG plots.
    #[arg(long)]
    plot: bool,
    /// Output path prefix.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn execute(cli: Cli) -> crystal_current::Result<()> {
    let (args, mode) = match cli.command {
        Command::Run(a) => (a, None),
        Command::Chern(a) => (a, Some(Mode::Chern)),
        Command::Kubo(a) => (a, Some(Mode::Kubo)),
        Command::Predict(a) => (a, Some(Mode::Predictors)),
        Command::DiracCheck(a) => (a, Some(Mode::DiracCheck)),
    };
    let mut cfg = load_config(&args.config)?;
    if let Some(m) = mode {
        cfg.mode = m;
    }
    if let Some(t) = &args.threads {
        cfg.threads = Threads::parse(t).ok_or_else(|| crystal_current::Error::Config {
            field: "threads".into(),
            msg: format!("expected `auto` or a thread count, got `{t}`"),
        })?;
    }
    cfg.plot |= args.plot;
    if let Some(o) = args.out {
        cfg.output = o;
    }
    let summary = run(&cfg)?;
    for (k, v) in &summary.values {
        println!("{k} = {v}");
    }
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            ExitCode::from(if matches!(e.kind(), "config" | "parse") { 2 } else { 1 })
        }
    }
}
