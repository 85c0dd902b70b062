//! Command-line harness for the cloning simulator.
//!
//! Every command reads a [`spec::RunSpec`] assembled from an optional JSON
//! configuration file and command-line flags (flags win) and renders a table
//! as CSV or as a JSON document `{spec, rows}`.

pub mod commands;
pub mod output;
pub mod sampling;
pub mod spec;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use crate::spec::{Format, Grid, Mode, RunSpec, Setup};

#[derive(Debug, Parser)]
#[command(
    name = "asymclone",
    version,
    about = "Simulate asymmetric phase-covariant cloning of polarization qubits"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Optimal phase-covariant and universal fidelity frontiers.
    Frontier,
    /// Filter ratios and plate tilts per asymmetry.
    Filters,
    /// Simulated fidelities over the nine equatorial inputs.
    Clone,
    /// Success probability per asymmetry.
    Psucc,
    /// Poisson-sampled coincidence counts and fidelity estimates.
    SampleCounts,
    /// Two-photon interference dip versus wavepacket overlap.
    Hom,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON run specification; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub setup: Option<Setup>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long, global = true)]
    pub q: Option<f64>,
    /// Inclusive grid `start:end:n`.
    #[arg(long, global = true, value_parser = parse_grid)]
    pub q_grid: Option<Grid>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub r_v: Option<f64>,
    #[arg(long, global = true)]
    pub r_h: Option<f64>,
    /// Fiber-coupler reflectance of the hybrid setup.
    #[arg(long, global = true)]
    pub r_fc: Option<f64>,
    /// Wavepacket overlap amplitude of the two photons.
    #[arg(long, global = true)]
    pub overlap: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub residual_phase: Option<f64>,
    #[arg(long, global = true)]
    pub ancilla_theta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub ancilla_phi: Option<f64>,
    /// Pairs per second for count sampling.
    #[arg(long, global = true)]
    pub pair_rate: Option<f64>,
    /// Seconds per repetition for count sampling.
    #[arg(long, global = true)]
    pub duration: Option<f64>,
    #[arg(long, global = true)]
    pub repetitions: Option<u32>,
    /// Overlap grid for the interference dip.
    #[arg(long, global = true, value_parser = parse_grid)]
    pub s_grid: Option<Grid>,
    /// Coupler reflectance for the interference dip.
    #[arg(long, global = true)]
    pub hom_r: Option<f64>,
    #[arg(long, global = true)]
    pub refractive_index: Option<f64>,
    #[arg(long, global = true)]
    pub plates: Option<u32>,
    #[arg(long, global = true)]
    pub passes: Option<u32>,
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    s.parse().map_err(|e: anyhow::Error| e.to_string())
}

impl Flags {
    /// Loads the configuration file if given, then applies every flag set.
    pub fn resolve(&self) -> Result<RunSpec> {
        let mut spec = match &self.config {
            Some(path) => RunSpec::from_file(path)?,
            None => RunSpec::default(),
        };
        macro_rules! set {
            ($flag:expr => $field:expr) => {
                if let Some(v) = $flag {
                    $field = v;
                }
            };
        }
        set!(self.setup => spec.setup);
        set!(self.mode => spec.mode);
        set!(self.seed => spec.seed);
        set!(self.format => spec.format);
        set!(self.overlap => spec.imperfections.overlap_s);
        set!(self.residual_phase => spec.imperfections.residual_phase);
        set!(self.ancilla_theta => spec.imperfections.ancilla_theta);
        set!(self.ancilla_phi => spec.imperfections.ancilla_phi);
        set!(self.repetitions => spec.sampling.repetitions);
        set!(self.hom_r => spec.hom.reflectance);
        set!(self.refractive_index => spec.plate.refractive_index);
        set!(self.plates => spec.plate.plates_per_filter);
        set!(self.passes => spec.plate.passes_per_plate);
        if self.q.is_some() {
            spec.q = self.q;
            spec.q_grid = None;
        }
        if self.q_grid.is_some() {
            spec.q_grid = self.q_grid;
            spec.q = None;
        }
        for (flag, field) in [
            (self.r_v, &mut spec.r_v),
            (self.r_h, &mut spec.r_h),
            (self.r_fc, &mut spec.r_fc),
            (self.pair_rate, &mut spec.sampling.pair_rate),
            (self.duration, &mut spec.sampling.duration),
        ] {
            if flag.is_some() {
                *field = flag;
            }
        }
        if self.s_grid.is_some() {
            spec.hom.s_grid = self.s_grid;
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Runs `command` and renders its table in the spec's format.
pub fn execute(command: Command, spec: &RunSpec) -> Result<String> {
    use crate::output::render;
    match command {
        Command::Frontier => render(spec, &commands::frontier(spec)?),
        Command::Filters => render(spec, &commands::filters(spec)?),
        Command::Clone => render(spec, &commands::clone(spec)?),
        Command::Psucc => render(spec, &commands::psucc(spec)?),
        Command::SampleCounts => render(spec, &commands::sample_counts(spec)?),
        Command::Hom => render(spec, &commands::hom(spec)?),
    }
}
