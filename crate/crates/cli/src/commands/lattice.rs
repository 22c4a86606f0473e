use crate::config::{load, parse_boundary, parse_range, prepare, ModelArgs, ModelSection, Range, RunArgs, RunSection};
use crate::error::{CliError, Result};
use crate::output::{num, opt, Output};
use clap::Args;
use qutrit_core::ed::{
    build_hamiltonian, correlators, sector_dimension, solve_ground_state, stability_check, sublattice_gauge_check,
    time_evolve, EigenOptions, GaugeReport, PropagationOptions, SectorBasis, SectorState,
};
use qutrit_core::effective::{Boundary, LatticeModel};
use qutrit_core::gutzwiller::{phase_diagram_scan, Amplitudes, Ansatz, ScanAxis, ScanGrid};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

fn parse_axis(s: &str) -> Result<ScanAxis> {
    let key = s.trim().to_ascii_lowercase().replace('_', "-");
    serde_json::from_value(serde_json::Value::String(key.clone())).map_err(|_| {
        CliError::config(format!(
            "unknown axis '{s}' (expected alpha, delta, j-hop, p-hop, p-over-j, delta-over-zj, dw2-sq-over-p, reduced-delta)"
        ))
    })
}

/// Range shown when the config gives none.
fn default_range(axis: ScanAxis) -> (f64, f64) {
    match axis {
        ScanAxis::Alpha => (0.0, 2.0),
        ScanAxis::Delta => (-40.0, 40.0),
        ScanAxis::JHop => (0.0, 2.0),
        ScanAxis::PHop | ScanAxis::POverJ => (0.0, 10.0),
        ScanAxis::DeltaOverZj => (-10.0, 10.0),
        ScanAxis::Dw2SqOverP => (-3.0, 4.0),
        ScanAxis::ReducedDelta => (-1.0, 1.5),
    }
}

/// Named regime and the model change it applies.
type Preset = (&'static str, fn(&mut LatticeModel));

/// Regime presets layered under explicit model values.
fn preset(regime: &str, base: LatticeModel, table: &[Preset]) -> Result<LatticeModel> {
    let mut m = base;
    let (_, f) = table.iter().find(|(k, _)| k.eq_ignore_ascii_case(regime)).ok_or_else(|| {
        let known: Vec<&str> = table.iter().map(|(k, _)| *k).collect();
        CliError::config(format!("unknown regime '{regime}' (expected one of {})", known.join(", ")))
    })?;
    f(&mut m);
    Ok(m)
}

// ------------------------------------------------------------ phase-diagram

#[derive(Args, Debug)]
pub struct PhaseArgs {
    #[command(flatten)]
    run: RunArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Two scan axes, e.g. alpha,delta.
    #[arg(long, value_delimiter = ',')]
    axes: Option<Vec<String>>,
    /// First axis values as lo:hi:points.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    x_range: Option<Range>,
    /// Second axis values as lo:hi:points.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    y_range: Option<Range>,
    /// Points per axis when no range is given.
    #[arg(long)]
    points: Option<usize>,
    /// Filling n.
    #[arg(long)]
    n: Option<f64>,
    /// Coordination number.
    #[arg(long)]
    z: Option<f64>,
    /// uniform or bipartite (default: bipartite for the zero-hopping axes).
    #[arg(long)]
    ansatz: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseConfig {
    pub axes: [String; 2],
    pub points: usize,
    pub n: f64,
    pub z: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ansatz: Option<String>,
    pub run: RunSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Range>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<Range>,
    pub model: ModelSection,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        Self {
            axes: ["alpha".into(), "delta".into()],
            points: 33,
            n: 1.0,
            z: 2.0,
            ansatz: None,
            run: RunSection::default(),
            x: None,
            y: None,
            model: ModelSection::default(),
        }
    }
}

pub fn phase_diagram(a: PhaseArgs) -> Result<Output> {
    let mut cfg: PhaseConfig = load(a.run.config.as_deref())?;
    cfg.model.apply(&a.model);
    if let Some(axes) = &a.axes {
        let [x, y] = axes.as_slice() else {
            return Err(CliError::config("--axes takes exactly two names"));
        };
        cfg.axes = [x.clone(), y.clone()];
    }
    if let Some(p) = a.points {
        cfg.points = p;
    }
    if a.x_range.is_some() {
        cfg.x = a.x_range;
    }
    if a.y_range.is_some() {
        cfg.y = a.y_range;
    }
    if let Some(v) = a.n {
        cfg.n = v;
    }
    if let Some(v) = a.z {
        cfg.z = v;
    }
    if a.ansatz.is_some() {
        cfg.ansatz = a.ansatz.clone();
    }
    let (ax, ay) = (parse_axis(&cfg.axes[0])?, parse_axis(&cfg.axes[1])?);
    let points = cfg.points;
    let fill = |r: &mut Option<Range>, axis| {
        let (lo, hi) = default_range(axis);
        *r.get_or_insert(Range { lo, hi, points })
    };
    let (rx, ry) = (fill(&mut cfg.x, ax), fill(&mut cfg.y, ay));
    let zero_hopping = [ax, ay].iter().any(|a| matches!(a, ScanAxis::Dw2SqOverP | ScanAxis::ReducedDelta));
    let ansatz = match cfg.ansatz.as_deref().map(str::to_ascii_lowercase).as_deref() {
        Some("uniform") => Ansatz::Uniform,
        Some("bipartite") => Ansatz::Bipartite,
        Some(other) => {
            return Err(CliError::config(format!("unknown ansatz '{other}' (expected uniform or bipartite)")))
        }
        None if zero_hopping => Ansatz::Bipartite,
        None => Ansatz::Uniform,
    };
    cfg.ansatz = Some(if ansatz == Ansatz::Uniform { "uniform" } else { "bipartite" }.into());
    let mut base = LatticeModel::chain(2, Boundary::Periodic);
    if zero_hopping {
        // the derived axes are measured in units of P at J = 0
        base.j_hop = 0.0;
        base.p_hop = 1.0;
    }
    let template = cfg.model.over(base)?;
    let (gx, gy) = (ScanGrid { axis: ax, values: rx.values() }, ScanGrid { axis: ay, values: ry.values() });
    rx.validate("x", 1)?;
    ry.validate("y", 1)?;

    let mut out = prepare(&a.run, &mut cfg.run, "phase-diagram")?;
    let scan = phase_diagram_scan(&gx, &gy, cfg.n, cfg.z, &template, ansatz)?;
    out.config(&cfg)?;
    let rows = scan.points.iter().map(|p| {
        let s = p.solution.as_ref();
        let m = s.map(|s| match s.amplitudes {
            Amplitudes::Bipartite { m, .. } => m,
            Amplitudes::Uniform { .. } => 0.0,
        });
        vec![
            p.ix.to_string(),
            p.iy.to_string(),
            num(p.x),
            num(p.y),
            opt(s.map(|s| s.energy_per_site)),
            opt(s.map(|s| s.g1)),
            opt(s.map(|s| s.g1_pair)),
            opt(m),
            opt(s.map(|s| s.stability)),
            p.label.map(|l| l.to_string()).unwrap_or_default(),
            p.unstable.to_string(),
            num(p.coherence_difference),
            p.error.clone().unwrap_or_default(),
        ]
    });
    out.csv(
        ".csv",
        &[
            "ix",
            "iy",
            "x",
            "y",
            "e",
            "g1",
            "g1_pair",
            "m",
            "stability",
            "label",
            "unstable",
            "coherence_difference",
            "error",
        ],
        rows,
    )?;
    Ok(out)
}

// ---------------------------------------------------------------- ed-ground

#[derive(Args, Debug)]
pub struct GroundArgs {
    #[command(flatten)]
    run: RunArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Number of sites.
    #[arg(long = "L", alias = "sites")]
    n_sites: Option<usize>,
    /// Number of particles.
    #[arg(long = "N", alias = "particles")]
    n_particles: Option<usize>,
    /// open or periodic.
    #[arg(long)]
    boundary: Option<String>,
    /// Preset: sf, psf (P = 10J), cl (α = 1.5), mi (Δ = 20J).
    #[arg(long)]
    regime: Option<String>,
    /// Also compute E(N+2) + E(N−2) − 2E(N).
    #[arg(long)]
    stability: bool,
    /// Seed for the Lanczos start vector.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GroundConfig {
    pub n_sites: usize,
    pub n_particles: usize,
    pub boundary: String,
    pub regime: String,
    pub stability: bool,
    pub run: RunSection,
    pub model: ModelSection,
    pub eigen: EigenOptions,
}

impl Default for GroundConfig {
    fn default() -> Self {
        Self {
            n_sites: 12,
            n_particles: 4,
            boundary: "periodic".into(),
            regime: "sf".into(),
            stability: false,
            run: RunSection::default(),
            model: ModelSection::default(),
            eigen: EigenOptions::default(),
        }
    }
}

const GROUND_PRESETS: [Preset; 4] =
    [("sf", |_| {}), ("psf", |m| m.p_hop = 10.0), ("cl", |m| m.alpha = 1.5), ("mi", |m| m.delta = 20.0)];

#[derive(Serialize)]
struct GroundRecord {
    model: LatticeModel,
    n_particles: usize,
    dim: usize,
    energy: f64,
    residual: f64,
    mean_pair_number: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    stability: Option<f64>,
    density: Vec<f64>,
}

fn sector_model(n_sites: usize, boundary: &str, n_particles: usize) -> Result<LatticeModel> {
    let boundary = parse_boundary(boundary)?;
    if n_sites == 0 {
        return Err(CliError::config("need at least one site"));
    }
    if n_particles > 2 * n_sites {
        return Err(CliError::config(format!(
            "{n_particles} particles do not fit on {n_sites} sites (at most two per site)"
        )));
    }
    Ok(LatticeModel::chain(n_sites, boundary))
}

pub fn ed_ground(a: GroundArgs) -> Result<Output> {
    let mut cfg: GroundConfig = load(a.run.config.as_deref())?;
    cfg.model.apply(&a.model);
    if let Some(v) = a.n_sites {
        cfg.n_sites = v;
    }
    if let Some(v) = a.n_particles {
        cfg.n_particles = v;
    }
    if let Some(v) = &a.boundary {
        cfg.boundary = v.clone();
    }
    if let Some(v) = &a.regime {
        cfg.regime = v.clone();
    }
    cfg.stability |= a.stability;
    if let Some(s) = a.seed {
        cfg.eigen.seed = s;
    }
    let base = sector_model(cfg.n_sites, &cfg.boundary, cfg.n_particles)?;
    let model = cfg.model.over(preset(&cfg.regime, base, &GROUND_PRESETS)?)?;
    if cfg.stability && (cfg.n_particles < 2 || cfg.n_particles + 2 > 2 * cfg.n_sites) {
        return Err(CliError::config("the stability check needs 2 <= N <= 2L − 2"));
    }
    log::info!("sector dimension {}", sector_dimension(cfg.n_sites, cfg.n_particles));

    let mut out = prepare(&a.run, &mut cfg.run, "ed-ground")?;
    let g = solve_ground_state(&model, cfg.n_particles, &cfg.eigen)?;
    let c = correlators(&g.state, model.boundary);
    let stability = if cfg.stability { Some(stability_check(&model, cfg.n_particles, &cfg.eigen)?) } else { None };
    let record = GroundRecord {
        n_particles: cfg.n_particles,
        dim: g.state.basis.dim(),
        energy: g.energy,
        residual: g.residual,
        mean_pair_number: g.state.mean_pair_number(),
        stability,
        density: g.state.density(),
        model,
    };
    out.config(&cfg)?;
    out.json(".json", &record)?;
    let rows = (0..c.distance.len()).map(|k| {
        vec![
            c.distance[k].to_string(),
            num(c.g1[k]),
            num(c.g1_pair[k]),
            num(c.density_density[k]),
            num(c.pair_density[k]),
        ]
    });
    out.csv(".correlators.csv", &["r", "g1", "g1_pair", "nn", "pair_corr"], rows)?;
    Ok(out)
}

// -------------------------------------------------------------- ed-dynamics

#[derive(Args, Debug)]
pub struct DynamicsArgs {
    #[command(flatten)]
    run: RunArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Number of sites.
    #[arg(long = "L", alias = "sites")]
    n_sites: Option<usize>,
    /// Initial occupations, centred on the chain when shorter than it.
    #[arg(long, value_delimiter = ',')]
    init: Option<Vec<u8>>,
    /// open or periodic.
    #[arg(long)]
    boundary: Option<String>,
    /// Preset: sf (α = 1), psf (α = 1, P = 3J), cl (α = 1.5).
    #[arg(long)]
    regime: Option<String>,
    /// Final time (units of 1/J).
    #[arg(long)]
    t_max: Option<f64>,
    /// Output spacing.
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsConfig {
    pub n_sites: usize,
    pub init: Vec<u8>,
    pub boundary: String,
    pub regime: String,
    pub t_max: f64,
    pub dt_out: f64,
    pub run: RunSection,
    pub model: ModelSection,
    /// Defaults scale the step with the largest coupling.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub propagation: Option<PropagationOptions>,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            n_sites: 13,
            init: vec![1, 2, 1],
            boundary: "open".into(),
            regime: "sf".into(),
            t_max: 6.0,
            dt_out: 0.05,
            run: RunSection::default(),
            model: ModelSection::default(),
            propagation: None,
        }
    }
}

const DYNAMICS_PRESETS: [Preset; 3] = [("sf", |_| {}), ("psf", |m| m.p_hop = 3.0), ("cl", |m| m.alpha = 1.5)];

#[derive(Serialize)]
struct DynamicsRecord<'a> {
    model: &'a LatticeModel,
    initial: &'a [u8],
    n_particles: usize,
    dim: usize,
    propagation: PropagationOptions,
    max_norm_drift: f64,
    max_number_drift: f64,
}

pub fn ed_dynamics(a: DynamicsArgs) -> Result<Output> {
    let mut cfg: DynamicsConfig = load(a.run.config.as_deref())?;
    cfg.model.apply(&a.model);
    if let Some(v) = a.n_sites {
        cfg.n_sites = v;
    }
    if let Some(v) = &a.init {
        cfg.init = v.clone();
    }
    if let Some(v) = &a.boundary {
        cfg.boundary = v.clone();
    }
    if let Some(v) = &a.regime {
        cfg.regime = v.clone();
    }
    if let Some(v) = a.t_max {
        cfg.t_max = v;
    }
    if let Some(v) = a.dt {
        cfg.dt_out = v;
    }
    let l = cfg.n_sites;
    if cfg.init.is_empty() || cfg.init.len() > l {
        return Err(CliError::config(format!("init must list between 1 and {l} occupations")));
    }
    if cfg.init.iter().any(|&r| r > 2) {
        return Err(CliError::config("occupations are at most 2"));
    }
    if !(cfg.t_max >= 0.0 && cfg.dt_out > 0.0 && cfg.t_max.is_finite()) {
        return Err(CliError::config("need t_max >= 0 and dt > 0"));
    }
    let n: usize = cfg.init.iter().map(|&r| r as usize).sum();
    let base = sector_model(l, &cfg.boundary, n)?;
    let model = cfg.model.over(preset(&cfg.regime, base, &DYNAMICS_PRESETS)?)?;
    let start = (l - cfg.init.len()) / 2;
    let mut occupations = vec![0u8; l];
    occupations[start..start + cfg.init.len()].copy_from_slice(&cfg.init);
    let steps = (cfg.t_max / cfg.dt_out).round() as usize;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * cfg.dt_out).collect();
    let prop = cfg.propagation.unwrap_or_else(|| PropagationOptions::for_model(&model));

    let mut out = prepare(&a.run, &mut cfg.run, "ed-dynamics")?;
    let basis = Arc::new(SectorBasis::new(l, n)?);
    let h = build_hamiltonian(&model, &basis)?;
    let s0 = SectorState::fock(basis.clone(), &occupations)?;
    let tr = time_evolve(&s0, &h, &times, &prop)?;
    let drift = |v: &[f64], target: f64| v.iter().map(|x| (x - target).abs()).fold(0.0, f64::max);
    let record = DynamicsRecord {
        model: &model,
        initial: &occupations,
        n_particles: n,
        dim: basis.dim(),
        propagation: prop,
        max_norm_drift: drift(&tr.norm, 1.0),
        max_number_drift: drift(&tr.total_number, n as f64),
    };
    out.config(&cfg)?;
    out.json(".json", &record)?;
    let rows = tr.times.iter().enumerate().flat_map(|(k, t)| {
        let (dens, pairs) = (&tr.density[k], &tr.pair_density[k]);
        (0..l).map(move |j| vec![num(*t), j.to_string(), num(dens[j]), num(pairs[j])])
    });
    out.csv(".trajectory.csv", &["t", "site", "n", "n_pair"], rows)?;
    Ok(out)
}

// -------------------------------------------------------------- gauge-check

#[derive(Args, Debug)]
pub struct GaugeArgs {
    #[command(flatten)]
    run: RunArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Number of sites.
    #[arg(long = "L", alias = "sites")]
    n_sites: Option<usize>,
    /// Number of particles.
    #[arg(long = "N", alias = "particles")]
    n_particles: Option<usize>,
    /// open, or periodic with an even number of sites.
    #[arg(long)]
    boundary: Option<String>,
    /// Largest deviation accepted as equivalent.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaugeConfig {
    pub n_sites: usize,
    pub n_particles: usize,
    pub boundary: String,
    pub tol: f64,
    pub run: RunSection,
    pub model: ModelSection,
}

impl Default for GaugeConfig {
    fn default() -> Self {
        Self {
            n_sites: 8,
            n_particles: 4,
            boundary: "periodic".into(),
            tol: 1e-10,
            run: RunSection::default(),
            model: ModelSection::default(),
        }
    }
}

#[derive(Serialize)]
struct GaugeRecord<'a> {
    model: &'a LatticeModel,
    report: &'a GaugeReport,
    max_deviation: f64,
    passed: bool,
}

/// Writes the report, then fails with a numerical error if the spectra differ.
pub fn gauge_check(a: GaugeArgs) -> Result<Output> {
    let mut cfg: GaugeConfig = load(a.run.config.as_deref())?;
    cfg.model.apply(&a.model);
    if let Some(v) = a.n_sites {
        cfg.n_sites = v;
    }
    if let Some(v) = a.n_particles {
        cfg.n_particles = v;
    }
    if let Some(v) = &a.boundary {
        cfg.boundary = v.clone();
    }
    if let Some(v) = a.tol {
        cfg.tol = v;
    }
    let model = cfg.model.over(sector_model(cfg.n_sites, &cfg.boundary, cfg.n_particles)?)?;

    let mut out = prepare(&a.run, &mut cfg.run, "gauge-check")?;
    let report = sublattice_gauge_check(&model, cfg.n_particles)?;
    let max_deviation = report.max_deviation();
    let passed = max_deviation <= cfg.tol;
    out.config(&cfg)?;
    out.json(".json", &GaugeRecord { model: &model, report: &report, max_deviation, passed })?;
    if !passed {
        return Err(CliError::Numerical(format!("gauge maps deviate by {max_deviation:.3e} > {:.1e}", cfg.tol)));
    }
    Ok(out)
}
