//! TOML run configs. Each command reads one file (all keys optional, unknown
//! keys rejected); command-line flags override file values. The resolved
//! config is what gets written next to the results.

use crate::error::{CliError, Result};
use crate::output::Output;
use clap::Args;
use qutrit_core::effective::{Boundary, LatticeModel};
use qutrit_core::{CircuitSpec, LevelPolicy};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Caps the worker pool regardless of config or flags.
pub const WORKERS_ENV: &str = "QUTRIT_WORKERS";

#[derive(Args, Debug, Clone, Default)]
pub struct RunArgs {
    /// TOML config file; flags override its values.
    #[arg(long, short = 'c', value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// File name prefix for all outputs (default: command name).
    #[arg(long)]
    pub prefix: Option<String>,
    /// Worker threads (further capped by QUTRIT_WORKERS).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub out_dir: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prefix: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { out_dir: PathBuf::from("."), prefix: None, workers: None }
    }
}

pub fn load<C: DeserializeOwned + Default>(path: Option<&Path>) -> Result<C> {
    let Some(path) = path else { return Ok(C::default()) };
    let text =
        std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.display().to_string(), source })?;
    toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn set_opt<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

/// Apply the shared flags, size the worker pool and open the output set.
pub fn prepare(args: &RunArgs, run: &mut RunSection, command: &'static str) -> Result<Output> {
    set(&mut run.out_dir, args.out.clone());
    set_opt(&mut run.prefix, args.prefix.clone());
    set_opt(&mut run.workers, args.workers);
    if run.workers == Some(0) {
        return Err(CliError::config("workers must be at least 1"));
    }
    let prefix = run.prefix.get_or_insert_with(|| command.to_string()).clone();
    init_pool(run.workers)?;
    Output::new(&run.out_dir, &prefix, command)
}

fn init_pool(requested: Option<usize>) -> Result<()> {
    let cap = match std::env::var(WORKERS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| CliError::config(format!("{WORKERS_ENV} must be a positive integer, got '{v}'")))?,
        ),
        Err(_) => None,
    };
    let n = match (requested, cap) {
        (Some(r), Some(c)) => Some(r.min(c)),
        (r, c) => r.or(c),
    };
    if let Some(n) = n {
        // a second call within one process (tests) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

// ------------------------------------------------------------------ circuit

#[derive(Args, Debug, Clone, Default)]
pub struct CircuitArgs {
    /// Charging energy E_C (GHz).
    #[arg(long = "ec")]
    pub e_c: Option<f64>,
    /// Josephson energy E_J (GHz).
    #[arg(long = "ej")]
    pub e_j: Option<f64>,
    /// Inductive energy E_L (GHz).
    #[arg(long = "el")]
    pub e_l: Option<f64>,
    /// External flux in units of Φ0.
    #[arg(long)]
    pub flux: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CircuitSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_j: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_l: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flux: Option<f64>,
}

impl CircuitSection {
    pub fn apply(&mut self, a: &CircuitArgs) {
        set_opt(&mut self.e_c, a.e_c);
        set_opt(&mut self.e_j, a.e_j);
        set_opt(&mut self.e_l, a.e_l);
        set_opt(&mut self.flux, a.flux);
    }

    /// Circuit with every energy given; flux defaults to `flux_default`.
    pub fn spec(&self, flux_default: Option<f64>) -> Result<CircuitSpec> {
        let need = |v: Option<f64>, flag: &str, key: &str| {
            v.ok_or_else(|| CliError::config(format!("missing {key} (set --{flag} or [circuit] {key})")))
        };
        let flux = match self.flux.or(flux_default) {
            Some(f) => f,
            None => need(None, "flux", "flux")?,
        };
        let spec = CircuitSpec::new(
            need(self.e_c, "ec", "e_c")?,
            need(self.e_j, "ej", "e_j")?,
            need(self.e_l, "el", "e_l")?,
            flux,
        );
        spec.validate()?;
        Ok(spec)
    }
}

pub fn parse_policy(s: &str) -> Result<LevelPolicy> {
    s.parse::<LevelPolicy>().map_err(|e| CliError::config(e.to_string()))
}

// -------------------------------------------------------------------- model

/// Lattice constants; unset values come from the command's regime preset.
#[derive(Args, Debug, Clone, Default)]
pub struct ModelArgs {
    /// Single-particle hopping J.
    #[arg(long = "j", allow_hyphen_values = true)]
    pub j_hop: Option<f64>,
    /// Correlated-hopping factor α.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Pair hopping P.
    #[arg(long = "p", allow_hyphen_values = true)]
    pub p_hop: Option<f64>,
    /// On-site pair energy Δ.
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    /// Base value W0 of the site weight W(ρ) = W0 + δW_ρ.
    #[arg(long, allow_hyphen_values = true)]
    pub w0: Option<f64>,
    /// Shift δW1 of W for a singly occupied site.
    #[arg(long, allow_hyphen_values = true)]
    pub dw1: Option<f64>,
    /// Shift δW2 of W for a doubly occupied site.
    #[arg(long, allow_hyphen_values = true)]
    pub dw2: Option<f64>,
    /// Sign of the inductive coupling (±1).
    #[arg(long, allow_hyphen_values = true)]
    pub w_sign: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j_hop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_hop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dw1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dw2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_sign: Option<f64>,
}

impl ModelSection {
    pub fn apply(&mut self, a: &ModelArgs) {
        set_opt(&mut self.j_hop, a.j_hop);
        set_opt(&mut self.alpha, a.alpha);
        set_opt(&mut self.p_hop, a.p_hop);
        set_opt(&mut self.delta, a.delta);
        set_opt(&mut self.w0, a.w0);
        set_opt(&mut self.dw1, a.dw1);
        set_opt(&mut self.dw2, a.dw2);
        set_opt(&mut self.w_sign, a.w_sign);
    }

    /// Overlay the explicitly set constants on `base`.
    pub fn over(&self, mut base: LatticeModel) -> Result<LatticeModel> {
        set(&mut base.j_hop, self.j_hop);
        set(&mut base.alpha, self.alpha);
        set(&mut base.p_hop, self.p_hop);
        set(&mut base.delta, self.delta);
        set(&mut base.w0, self.w0);
        set(&mut base.dw1, self.dw1);
        set(&mut base.dw2, self.dw2);
        set(&mut base.w_sign, self.w_sign);
        if base.w_sign.abs() != 1.0 {
            return Err(CliError::config(format!("w_sign must be +1 or -1, got {}", base.w_sign)));
        }
        base.validate()?;
        Ok(base)
    }
}

pub fn parse_boundary(s: &str) -> Result<Boundary> {
    match s.to_ascii_lowercase().as_str() {
        "open" => Ok(Boundary::Open),
        "periodic" | "ring" => Ok(Boundary::Periodic),
        other => Err(CliError::config(format!("unknown boundary '{other}' (expected open or periodic)"))),
    }
}

/// Evenly spaced values; a single point sits at `lo`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Range {
    pub fn validate(&self, what: &str, min_points: usize) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(CliError::config(format!("{what}: bounds must be finite")));
        }
        if self.points < min_points {
            return Err(CliError::config(format!("{what}: need at least {min_points} points, got {}", self.points)));
        }
        if self.points > 1 && !(self.lo < self.hi) {
            return Err(CliError::config(format!("{what}: lo must be below hi")));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        linspace(self.lo, self.hi, self.points)
    }
}

/// "lo:hi:points" on the command line.
pub fn parse_range(s: &str) -> std::result::Result<Range, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected lo:hi:points, got '{s}'"));
    }
    let f = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("'{x}': {e}"));
    let points = parts[2].trim().parse::<usize>().map_err(|e| format!("'{}': {e}", parts[2]))?;
    Ok(Range { lo: f(parts[0])?, hi: f(parts[1])?, points })
}
