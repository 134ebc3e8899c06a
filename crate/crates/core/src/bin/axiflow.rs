use std::path::PathBuf;
use std::process::ExitCode;

use axiflow::app::{self, EXIT_ACCEPTANCE, EXIT_OK};
use axiflow::config::RunConfig;
use axiflow::error::Result;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "axiflow", version, about = "Axisymmetric ideal flow on warped surfaces of revolution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a preset flow and record diagnostics.
    Simulate(Common),
    /// Scan the linearized flow map for conjugate times.
    Jacobi(Common),
    /// Decide membership of a datum in the orbit of another.
    Orbit(Common),
    /// Run the operator identity battery.
    Check(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Number of field snapshots to write after the initial one.
    #[arg(long)]
    snapshots: Option<usize>,
    /// Only print warnings and errors.
    #[arg(long)]
    quiet: bool,
    /// Override a top-level config field, e.g. `--set nr=96`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Common {
    fn load(&self) -> Result<RunConfig> {
        let mut overrides = self.overrides.clone();
        if let Some(n) = self.snapshots {
            overrides.push(format!("snapshots={n}"));
        }
        RunConfig::load(self.config.as_deref(), &overrides)
    }
}

fn run(command: &Command) -> Result<i32> {
    match command {
        Command::Simulate(c) => {
            let out = app::run_simulate(&c.load()?, &c.out)?;
            log::info!("{} steps of {:.3e}", out.steps, out.dt);
        }
        Command::Jacobi(c) => {
            let s = app::run_jacobi(&c.load()?, &c.out)?;
            log::info!("conjugate times: {:?}", s.conjugate_times);
        }
        Command::Orbit(c) => {
            let v = app::run_orbit(&c.load()?, &c.out)?;
            log::info!("member: {}", v.member);
        }
        Command::Check(c) => {
            c.load()?;
            let report = app::run_check(&c.out)?;
            for r in &report.rows {
                let status = if r.pass { "ok  " } else { "FAIL" };
                log::info!("{status} {} [{}] {:?}", r.identity, r.geometry, r.defects);
            }
            if !report.pass() {
                log::error!("identity battery failed");
                return Ok(EXIT_ACCEPTANCE);
            }
        }
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let quiet = match &cli.command {
        Command::Simulate(c) | Command::Jacobi(c) | Command::Orbit(c) | Command::Check(c) => c.quiet,
    };
    env_logger::Builder::new()
        .filter_level(if quiet { log::LevelFilter::Warn } else { log::LevelFilter::Info })
        .parse_default_env()
        .init();
    let code = match run(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            log::error!("{e}");
            app::exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
