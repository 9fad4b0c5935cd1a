use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dswlab::commands::{cmd_asymptotic, cmd_compare, cmd_selftest, cmd_simulate, AsymptoticArgs, MetaOverride};
use dswlab::{CliError, CompareOptions};

#[derive(Parser)]
#[command(name = "dswlab", version, about = "Long-time asymptotics and spectral simulation of the defocusing mKdV step problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the asymptotic profile on a grid and write it as CSV.
    #[command(allow_negative_numbers = true)]
    Asymptotic(AsymptoticFlags),
    /// Run the spectral solver from a JSON config.
    Simulate { config: PathBuf },
    /// Compare two profiles (asymptotic first, simulation second) and emit a JSON report.
    #[command(allow_negative_numbers = true)]
    Compare(CompareFlags),
    /// Run the invariant suites.
    Selftest {
        /// Skip the two desk-scale simulations.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Args)]
struct AsymptoticFlags {
    #[arg(long)]
    ql: f64,
    #[arg(long)]
    qr: f64,
    #[arg(long)]
    t: f64,
    #[arg(long)]
    xmin: f64,
    #[arg(long)]
    xmax: f64,
    #[arg(long, default_value_t = 0.02)]
    dx: f64,
    /// Half-width of the transition collars around the fan edges.
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    #[arg(long, default_value = "asymptotic.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct CompareFlags {
    asym: PathBuf,
    sim: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = CompareOptions::default().dsw_collar)]
    dsw_collar: f64,
    #[arg(long, default_value_t = CompareOptions::default().rpw_collar)]
    rpw_collar: f64,
    /// Step data and time for profiles without a sidecar.
    #[arg(long)]
    ql: Option<f64>,
    #[arg(long)]
    qr: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("DSWLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("DSWLAB_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Input(e.to_string()))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Asymptotic(f) => cmd_asymptotic(&AsymptoticArgs {
            ql: f.ql,
            qr: f.qr,
            t: f.t,
            xmin: f.xmin,
            xmax: f.xmax,
            dx: f.dx,
            eps: f.eps,
            out: f.out,
        }),
        Command::Simulate { config } => {
            for p in cmd_simulate(&config)? {
                eprintln!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::Compare(f) => {
            let opts = CompareOptions { dsw_collar: f.dsw_collar, rpw_collar: f.rpw_collar };
            let ov = MetaOverride { ql: f.ql, qr: f.qr, t: f.t };
            cmd_compare(&f.asym, &f.sim, opts, ov, f.out.as_deref()).map(|_| ())
        }
        Command::Selftest { quick } => {
            let failed = cmd_selftest(quick);
            if failed.is_empty() {
                Ok(())
            } else {
                let names: Vec<String> = failed.iter().map(|c| format!("{} ({})", c.name, c.id)).collect();
                Err(CliError::Selftest(names.join(", ")))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dswlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
