use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::warn;
use mssolve_cli::commands;
use mssolve_cli::scenario::{parse_scenario_with, BackendSpec, Overrides, Scenario};
use mssolve_cli::CliError;

#[derive(Parser)]
#[command(name = "mssolve", version, about = "Two-phase Mullins-Sekerka / Stokes interface solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two-phase Laplace solve for μ driven by h₀.
    SolveElliptic(Common),
    /// Two-phase Stokes solve with the traction induced by h₀.
    SolveStokes(Common),
    /// Fourier symbols of A₀, B₀, B₁ on concentric circles.
    Spectrum(Common),
    /// Time-step the interface equation over [0, T].
    Evolve(Common),
    /// Run the acceptance criteria and write a JSON report.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Reduced problem sizes, no runtime budgets.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Spectral,
    Bie,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            k: self.k,
            dt: self.dt,
            backend: self.backend.map(|b| match b {
                BackendArg::Spectral => BackendSpec::Spectral,
                BackendArg::Bie => BackendSpec::Bie,
            }),
            out: self.out.clone(),
        }
    }

    fn scenario(&self) -> Result<Option<Scenario>, CliError> {
        self.scenario.as_ref().map(|p| parse_scenario_with(p, &self.overrides())).transpose()
    }

    fn required(&self) -> Result<Scenario, CliError> {
        self.scenario()?.ok_or_else(|| CliError::Validation("--scenario is required".into()))
    }

    fn out_dir(&self, s: Option<&Scenario>) -> Result<PathBuf, CliError> {
        let dir = self
            .out
            .clone()
            .or_else(|| s.and_then(|s| s.out.clone()))
            .unwrap_or_else(|| PathBuf::from("mssolve-out"));
        std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(dir)
    }
}

fn limit_threads() {
    let Ok(v) = std::env::var("MSSOLVE_THREADS") else { return };
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                warn!("could not size the thread pool: {e}");
            }
        }
        _ => warn!("ignoring MSSOLVE_THREADS={v:?}"),
    }
}

fn run(cli: Cli) -> Result<String, CliError> {
    type Solve = fn(&Scenario, &std::path::Path) -> Result<String, CliError>;
    let (common, f): (&Common, Solve) = match &cli.command {
        Command::SolveElliptic(c) => (c, commands::solve_elliptic),
        Command::SolveStokes(c) => (c, commands::solve_stokes),
        Command::Spectrum(c) => (c, commands::spectrum),
        Command::Evolve(c) => (c, commands::run_evolve),
        Command::Verify { common, quick } => {
            let s = common.scenario()?;
            let out = common.out_dir(s.as_ref())?;
            return commands::verify(s.as_ref(), *quick, &out);
        }
    };
    let s = common.required()?;
    let out = common.out_dir(Some(&s))?;
    f(&s, &out)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    limit_threads();
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
