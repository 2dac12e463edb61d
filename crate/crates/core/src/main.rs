use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fps_tunnel::sweep::{
    emit_wavefunction, load_config, resonance_table, run_sweep, run_verify, write_records,
    write_sweep_csv, Parameterization, SweepConfig, RESONANCE_HEADER, WAVEFUNCTION_HEADER,
};
use fps_tunnel::Result;

#[derive(Parser)]
#[command(
    name = "fps-tunnel",
    version,
    about = "Resonant tunneling times and velocities in finite periodic potentials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Energy or Bloch-wavenumber sweep over one band (CSV).
    Sweep(SweepArgs),
    /// Resonance levels with all time and velocity definitions (CSV).
    Resonances(Common),
    /// Wave function of one resonance (CSV).
    Wavefunction(WaveArgs),
    /// Run the identity battery; exits nonzero on any failure.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// JSON config; the reference superlattice when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of periods.
    #[arg(long)]
    n: Option<usize>,
    /// Band index, counted from 1.
    #[arg(long)]
    band: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    parameterize: Option<Param>,
}

#[derive(Args)]
struct WaveArgs {
    #[command(flatten)]
    common: Common,
    /// Resonance index j.
    #[arg(long)]
    j: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Param {
    Energy,
    Q,
}

impl Common {
    fn config(&self) -> Result<SweepConfig> {
        let mut c = match &self.config {
            Some(p) => load_config(p)?,
            None => SweepConfig::default(),
        };
        if let Some(n) = self.n {
            c.periods = n;
        }
        if let Some(b) = self.band {
            c.band_index = b;
        }
        c.validate()?;
        Ok(c)
    }

    fn sink(&self, fallback: Option<&Path>) -> Result<Box<dyn Write>> {
        Ok(match self.out.as_deref().or(fallback) {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Sweep(a) => {
            let mut c = a.common.config()?;
            if let Some(p) = a.parameterize {
                c.parameterize = match p {
                    Param::Energy => Parameterization::Energy,
                    Param::Q => Parameterization::Q,
                };
            }
            let rows = run_sweep(&c)?;
            write_sweep_csv(&rows, a.common.sink(c.output.sweep_csv.as_deref())?)?;
        }
        Command::Resonances(a) => {
            let c = a.config()?;
            let records = resonance_table(&c)?;
            write_records(
                &RESONANCE_HEADER,
                &records,
                a.sink(c.output.resonances_csv.as_deref())?,
            )?;
        }
        Command::Wavefunction(a) => {
            let c = a.common.config()?;
            let records = emit_wavefunction(&c, a.j)?;
            write_records(
                &WAVEFUNCTION_HEADER,
                &records,
                a.common.sink(c.output.wavefunction_csv.as_deref())?,
            )?;
        }
        Command::Verify(a) => {
            let c = a.config()?;
            let report = run_verify(&c)?;
            let mut out = a.sink(None)?;
            writeln!(out, "{report}")?;
            out.flush()?;
            return Ok(report.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(fps_tunnel::Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(fps_tunnel::Error::Csv(e)) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn is_broken_pipe(e: &csv::Error) -> bool {
    matches!(e.kind(), csv::ErrorKind::Io(io) if io.kind() == io::ErrorKind::BrokenPipe)
}
