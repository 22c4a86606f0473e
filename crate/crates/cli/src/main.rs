// `!(a < b)` is used on purpose: it also rejects NaN inputs.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use clap::{Parser, Subcommand};
use commands::{circuit, lattice, two_qutrit};
use std::process::ExitCode;

/// Fluxonium qutrit arrays: single-atom spectra, effective lattice models,
/// mean-field phase diagrams and exact diagonalization.
///
/// Exit status: 0 success, 2 configuration error, 3 numerical failure.
#[derive(Parser, Debug)]
#[command(name = "qutrit", version, about, long_about = None)]
struct Cli {
    /// More log output (-v info, -vv debug); RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    /// Suppress the list of written files.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fluxonium (or multi-harmonic junction) spectrum and matrix elements.
    Spectrum(circuit::SpectrumArgs),
    /// Qutrit constants at one operating point.
    Qutrit(circuit::QutritArgs),
    /// Dielectric and flux-noise coherence estimates at one operating point.
    Coherence(circuit::QutritArgs),
    /// Descriptor and coherence table over a 2-D circuit-parameter grid.
    Sweep(circuit::SweepArgs),
    /// The four reference qutrit regimes.
    Table1(circuit::Table1Args),
    /// Two coupled qutrits: RWA, second-order corrected and full spectra.
    TwoQutrit(two_qutrit::TwoQutritArgs),
    /// Gutzwiller mean-field phase diagram over two model parameters.
    PhaseDiagram(lattice::PhaseArgs),
    /// Exact ground state and correlators in one particle-number sector.
    EdGround(lattice::GroundArgs),
    /// Exact quench dynamics from a Fock state.
    EdDynamics(lattice::DynamicsArgs),
    /// Check the sublattice gauge maps J → −J and P → −P.
    GaugeCheck(lattice::GaugeArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).format_timestamp(None).init();

    let result = match cli.command {
        Command::Spectrum(a) => circuit::spectrum(a),
        Command::Qutrit(a) => circuit::qutrit(a),
        Command::Coherence(a) => circuit::coherence(a),
        Command::Sweep(a) => circuit::sweep(a),
        Command::Table1(a) => circuit::table1(a),
        Command::TwoQutrit(a) => two_qutrit::run(a),
        Command::PhaseDiagram(a) => lattice::phase_diagram(a),
        Command::EdGround(a) => lattice::ed_ground(a),
        Command::EdDynamics(a) => lattice::ed_dynamics(a),
        Command::GaugeCheck(a) => lattice::gauge_check(a),
    };
    match result {
        Ok(out) => {
            if !cli.quiet {
                for p in out.written() {
                    println!("{}", p.display());
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
