use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use ua_wkb::{
    evolve_observed, sigma_s_norm, wave_conserved_quantities, wkb_conserved_quantities, ConservedReport,
    PeriodicGrid, SchemeKind, SchemeSpec, TimeMarch,
};
use ua_wkb_harness::{load_config, run_convergence_sweep, run_selftest, write_records, InitialData};

#[derive(Parser)]
#[command(name = "ua-wkb", version, about = "Semiclassical WKB splitting solvers and convergence sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence sweep described by a config file and write the CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's `output`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Integrate one trajectory from the built-in data and print conserved quantities.
    Run {
        #[arg(long)]
        scheme: SchemeKind,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        nx: usize,
        #[arg(long)]
        nt: usize,
        #[arg(long)]
        tfinal: f64,
        /// Number of report times (evenly spaced in steps).
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
    /// Run the quick invariant checks.
    Selftest,
}

fn print_report(step: usize, t: f64, r: &ConservedReport<f64>, sigma: Option<f64>) {
    let sigma = sigma.map_or_else(|| "-".to_string(), |s| format!("{s:.10e}"));
    println!(
        "{step:>8} {t:>12.6e} {:>20.12e} {:>20.12e} {:>20.12e} {:>20.12e} {sigma:>18}",
        r.mass, r.energy, r.hamiltonian, r.momentum
    );
}

fn run(scheme: SchemeKind, eps: f64, nx: usize, nt: usize, tfinal: f64, samples: usize) -> anyhow::Result<()> {
    let grid = PeriodicGrid::new(nx)?;
    let data = InitialData::Builtin;
    let potential = data.potential(&grid)?;
    let spec = SchemeSpec::new(scheme, eps, potential.clone())?;
    let march = TimeMarch::new(tfinal, nt)?;
    let every = (nt / samples.max(1)).max(1);
    let due = |i: usize| i % every == 0 || i == nt;
    println!("# {scheme} eps={eps} nx={nx} nt={nt} t_final={tfinal}");
    println!(
        "{:>8} {:>12} {:>20} {:>20} {:>20} {:>20} {:>18}",
        "step", "t", "mass", "energy", "hamiltonian", "momentum", "sigma_2"
    );
    if scheme.is_wkb() {
        let u0 = data.state(&grid)?;
        print_report(0, 0.0, &wkb_conserved_quantities(&u0, eps, &potential)?, Some(sigma_s_norm(&u0, 2.0)?));
        evolve_observed(&u0, &spec, &march, |i, t, u| {
            if due(i) {
                match (wkb_conserved_quantities(u, eps, &potential), sigma_s_norm(u, 2.0)) {
                    (Ok(r), Ok(s)) => print_report(i, t, &r, Some(s)),
                    (Err(e), _) | (_, Err(e)) => eprintln!("step {i}: {e}"),
                }
            }
            None::<()>
        })?;
    } else {
        if eps <= 0.0 {
            bail!("wave schemes need eps > 0");
        }
        let w0 = data.wave(&grid, eps)?;
        print_report(0, 0.0, &wave_conserved_quantities(&w0, &potential)?, None);
        evolve_observed(&w0, &spec, &march, |i, t, w| {
            if due(i) {
                match wave_conserved_quantities(w, &potential) {
                    Ok(r) => print_report(i, t, &r, None),
                    Err(e) => eprintln!("step {i}: {e}"),
                }
            }
            None::<()>
        })?;
    }
    Ok(())
}

fn sweep(config: PathBuf, output: Option<PathBuf>) -> anyhow::Result<()> {
    let cfg = load_config(&config)?;
    let out = output
        .or_else(|| cfg.output.clone())
        .context("no output path: pass --output or set 'output' in the config")?;
    let records = run_convergence_sweep(&cfg)?;
    write_records(&records, &out)?;
    let diverged = records.iter().filter(|r| r.status != ua_wkb_harness::Status::Ok).count();
    eprintln!("wrote {} records ({diverged} diverged) to {}", records.len(), out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep { config, output } => sweep(config, output),
        Command::Run { scheme, eps, nx, nt, tfinal, samples } => run(scheme, eps, nx, nt, tfinal, samples),
        Command::Selftest => {
            let outcomes = run_selftest();
            for o in &outcomes {
                println!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
            }
            if outcomes.iter().all(|o| o.passed) {
                Ok(())
            } else {
                Err(anyhow::anyhow!("selftest failed"))
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
