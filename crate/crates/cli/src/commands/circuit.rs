use crate::config::{
    load, parse_policy, parse_range, prepare, CircuitArgs, CircuitSection, Range, RunArgs, RunSection,
};
use crate::error::{CliError, Result};
use crate::output::{num, opt, Output};
use clap::Args;
use qutrit_core::circuit::{
    diagonalize_fluxonium, diagonalize_periodic, FluxoniumBasis, DEFAULT_CHARGE_CUTOFF, DEFAULT_LEVELS,
};
use qutrit_core::qutrit::table::{self, PUBLISHED, QUANTITIES};
use qutrit_core::qutrit::{
    choose_root, dielectric_rate, extract_qutrit, find_resonant_flux_in, flux_dephasing_time_in, sweep_parameters,
    Dephasing, RootChoice, RowStatus, SweepAxis, SweepGrid, SweepRequest, TRANSITIONS,
};
use qutrit_core::{CircuitSpec, CoherenceParams, HhjjSpec, LevelPolicy, QutritDescriptor, Spectrum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

// ----------------------------------------------------------------- spectrum

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[command(flatten)]
    run: RunArgs,
    #[command(flatten)]
    circuit: CircuitArgs,
    /// Number of levels to report.
    #[arg(long)]
    levels: Option<usize>,
    /// Oscillator basis size (fluxonium).
    #[arg(long)]
    basis_size: Option<usize>,
    /// Energy-versus-flux grid as lo:hi:points.
    #[arg(long, value_parser = parse_range)]
    flux_grid: Option<Range>,
}

/// Multi-harmonic junction pair solved in the charge basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HhjjSection {
    pub e_c: f64,
    pub gap: f64,
    pub transmissions_a: Vec<f64>,
    pub transmissions_b: Vec<f64>,
    #[serde(default)]
    pub flux: f64,
    #[serde(default)]
    pub charge_bias: f64,
    #[serde(default = "default_charge_cutoff")]
    pub charge_cutoff: usize,
}

fn default_charge_cutoff() -> usize {
    DEFAULT_CHARGE_CUTOFF
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub levels: usize,
    pub basis_size: usize,
    pub run: RunSection,
    pub circuit: CircuitSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flux_grid: Option<Range>,
    /// When present, replaces the fluxonium `circuit`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hhjj: Option<HhjjSection>,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            levels: DEFAULT_LEVELS,
            basis_size: qutrit_core::circuit::DEFAULT_BASIS_SIZE,
            run: RunSection::default(),
            circuit: CircuitSection::default(),
            flux_grid: None,
            hhjj: None,
        }
    }
}

#[derive(Serialize)]
struct SpectrumRecord<'a> {
    kind: qutrit_core::circuit::SpectrumKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    circuit: Option<CircuitSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hhjj: Option<&'a HhjjSpec>,
    e_c: f64,
    basis_size: usize,
    converged: bool,
    energies: &'a [f64],
    omega10: f64,
    phi_re: Vec<Vec<f64>>,
    phi_im: Vec<Vec<f64>>,
    n_re: Vec<Vec<f64>>,
    n_im: Vec<Vec<f64>>,
}

/// Real and imaginary parts of an n×n matrix given entrywise.
fn split(n: usize, entry: impl Fn(usize, usize) -> (f64, f64)) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let part = |k: usize| {
        (0..n).map(|i| (0..n).map(|j| if k == 0 { entry(i, j).0 } else { entry(i, j).1 }).collect()).collect()
    };
    (part(0), part(1))
}

enum Atom {
    Fluxonium(CircuitSpec),
    Hhjj(HhjjSpec, f64, usize),
}

impl Atom {
    fn solve(&self, flux: f64, levels: usize, basis_size: usize) -> qutrit_core::Result<Spectrum> {
        match self {
            Atom::Fluxonium(s) => diagonalize_fluxonium(&s.with_flux(flux), levels, basis_size),
            Atom::Hhjj(s, e_c, cutoff) => diagonalize_periodic(&HhjjSpec { flux, ..s.clone() }, *e_c, levels, *cutoff),
        }
    }

    fn flux(&self) -> f64 {
        match self {
            Atom::Fluxonium(s) => s.flux,
            Atom::Hhjj(s, ..) => s.flux,
        }
    }
}

pub fn spectrum(a: SpectrumArgs) -> Result<Output> {
    let mut cfg: SpectrumConfig = load(a.run.config.as_deref())?;
    cfg.circuit.apply(&a.circuit);
    if let Some(v) = a.levels {
        cfg.levels = v;
    }
    if let Some(v) = a.basis_size {
        cfg.basis_size = v;
    }
    if a.flux_grid.is_some() {
        cfg.flux_grid = a.flux_grid;
    }
    if cfg.levels < 2 {
        return Err(CliError::config("levels must be at least 2"));
    }
    let atom = match &cfg.hhjj {
        Some(h) => {
            if cfg.circuit != CircuitSection::default() {
                return Err(CliError::config("give either [circuit] (fluxonium) or [hhjj], not both"));
            }
            let spec = HhjjSpec {
                gap: h.gap,
                transmissions_a: h.transmissions_a.clone(),
                transmissions_b: h.transmissions_b.clone(),
                flux: h.flux,
                charge_bias: h.charge_bias,
            };
            spec.validate()?;
            if !(h.e_c > 0.0) {
                return Err(CliError::config("hhjj.e_c must be positive"));
            }
            Atom::Hhjj(spec, h.e_c, h.charge_cutoff)
        }
        None => Atom::Fluxonium(cfg.circuit.spec(Some(0.0))?),
    };
    if let Some(g) = &cfg.flux_grid {
        g.validate("flux_grid", 1)?;
    }

    let mut out = prepare(&a.run, &mut cfg.run, "spectrum")?;
    let s = atom.solve(atom.flux(), cfg.levels, cfg.basis_size)?;
    let (phi_re, phi_im) = split(s.n_levels(), |i, j| (s.phi(i, j).re, s.phi(i, j).im));
    let (n_re, n_im) = split(s.n_levels(), |i, j| (s.n(i, j).re, s.n(i, j).im));
    let record = SpectrumRecord {
        kind: s.kind,
        circuit: match &atom {
            Atom::Fluxonium(c) => Some(*c),
            _ => None,
        },
        hhjj: match &atom {
            Atom::Hhjj(h, ..) => Some(h),
            _ => None,
        },
        e_c: s.e_c,
        basis_size: s.basis_size,
        converged: s.converged,
        energies: &s.energies,
        omega10: s.omega(1, 0),
        phi_re,
        phi_im,
        n_re,
        n_im,
    };
    out.config(&cfg)?;
    out.json(".json", &record)?;

    if let Some(g) = &cfg.flux_grid {
        let fluxes = g.values();
        let energies: Vec<Vec<f64>> = match &atom {
            Atom::Fluxonium(c) => {
                let basis = FluxoniumBasis::new(c.e_c, c.e_l, cfg.basis_size)?;
                fluxes.par_iter().map(|&f| basis.energies(c.e_j, f, cfg.levels)).collect()
            }
            _ => fluxes
                .par_iter()
                .map(|&f| atom.solve(f, cfg.levels, cfg.basis_size).map(|s| s.energies))
                .collect::<qutrit_core::Result<_>>()?,
        };
        let rows = fluxes.iter().zip(&energies).flat_map(|(f, e)| {
            e.iter().enumerate().map(move |(k, x)| vec![num(*f), k.to_string(), num(*x), num(x - e[0])])
        });
        out.csv(".levels.csv", &["flux", "level", "energy", "above_ground"], rows)?;
    }
    Ok(out)
}

// ---------------------------------------------------------- qutrit, coherence

#[derive(Args, Debug)]
pub struct QutritArgs {
    #[command(flatten)]
    run: RunArgs,
    #[command(flatten)]
    circuit: CircuitArgs,
    /// Level policy: lowest-three or skip-second.
    #[arg(long)]
    policy: Option<String>,
    /// Locate the flux where ω21 = ω10 instead of using --flux.
    #[arg(long)]
    resonance: bool,
    /// Root to keep when several fluxes are resonant: largest, smallest, or a
    /// regime label such as PF.
    #[arg(long)]
    root: Option<String>,
    /// Bath temperature for the coherence estimates (K).
    #[arg(long)]
    temperature: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QutritConfig {
    pub policy: String,
    pub resonance: bool,
    pub root: String,
    /// Flux window searched for resonances.
    pub resonance_range: [f64; 2],
    pub resonance_grid: usize,
    pub scan_levels: usize,
    pub basis_size: usize,
    pub run: RunSection,
    pub circuit: CircuitSection,
    pub coherence: CoherenceParams,
}

impl Default for QutritConfig {
    fn default() -> Self {
        Self {
            policy: "lowest-three".into(),
            resonance: false,
            root: "largest".into(),
            resonance_range: [0.0, 0.5],
            resonance_grid: 101,
            scan_levels: qutrit_core::qutrit::DEFAULT_SCAN_LEVELS,
            basis_size: qutrit_core::circuit::DEFAULT_BASIS_SIZE,
            run: RunSection::default(),
            circuit: CircuitSection::default(),
            coherence: CoherenceParams::default(),
        }
    }
}

fn parse_root(s: &str) -> RootChoice {
    match s.to_ascii_lowercase().as_str() {
        "largest" => RootChoice::Largest,
        "smallest" => RootChoice::Smallest,
        _ => RootChoice::Regime(s.to_ascii_uppercase()),
    }
}

struct OperatingPoint {
    spec: CircuitSpec,
    policy: LevelPolicy,
    roots: Option<Vec<f64>>,
    basis: FluxoniumBasis,
    spectrum: Spectrum,
    descriptor: QutritDescriptor,
}

impl QutritConfig {
    fn resolve(&mut self, a: &QutritArgs) -> Result<(CircuitSpec, LevelPolicy)> {
        self.circuit.apply(&a.circuit);
        if let Some(p) = &a.policy {
            self.policy = p.clone();
        }
        self.resonance |= a.resonance;
        if let Some(r) = &a.root {
            self.root = r.clone();
        }
        if let Some(t) = a.temperature {
            self.coherence.temperature = t;
        }
        let policy = parse_policy(&self.policy)?;
        let spec = self.circuit.spec(self.resonance.then_some(0.0))?;
        self.coherence.validate()?;
        if self.resonance && self.circuit.flux.is_some() {
            return Err(CliError::config("flux is located by the resonance search; do not also set it"));
        }
        if !(self.resonance_range[0] < self.resonance_range[1]) {
            return Err(CliError::config("resonance_range must be increasing"));
        }
        Ok((spec, policy))
    }

    fn operating_point(&self, spec: CircuitSpec, policy: LevelPolicy) -> Result<OperatingPoint> {
        let basis = FluxoniumBasis::new(spec.e_c, spec.e_l, self.basis_size)?;
        let (spec, roots) = if self.resonance {
            let range = (self.resonance_range[0], self.resonance_range[1]);
            let roots = find_resonant_flux_in(&basis, spec.e_j, policy, range, self.resonance_grid)?.roots().to_vec();
            let flux = choose_root(&basis, &spec, policy, &roots, &parse_root(&self.root))?.ok_or_else(|| {
                CliError::Numerical(format!("no resonant flux matching '{}' in {range:?}", self.root))
            })?;
            (spec.with_flux(flux), Some(roots))
        } else {
            (spec, None)
        };
        let levels = DEFAULT_LEVELS.max(self.scan_levels + 1);
        let spectrum = diagonalize_fluxonium(&spec, levels, self.basis_size)?;
        let descriptor = extract_qutrit(&spectrum, policy, self.scan_levels)?;
        Ok(OperatingPoint { spec, policy, roots, basis, spectrum, descriptor })
    }
}

#[derive(Serialize)]
struct QutritRecord<'a> {
    circuit: CircuitSpec,
    policy: LevelPolicy,
    #[serde(skip_serializing_if = "Option::is_none")]
    resonant_fluxes: Option<&'a [f64]>,
    regime: String,
    descriptor: &'a QutritDescriptor,
}

pub fn qutrit(a: QutritArgs) -> Result<Output> {
    let mut cfg: QutritConfig = load(a.run.config.as_deref())?;
    let (spec, policy) = cfg.resolve(&a)?;
    let mut out = prepare(&a.run, &mut cfg.run, "qutrit")?;
    let p = cfg.operating_point(spec, policy)?;
    out.config(&cfg)?;
    out.json(
        ".json",
        &QutritRecord {
            circuit: p.spec,
            policy: p.policy,
            resonant_fluxes: p.roots.as_deref(),
            regime: p.descriptor.regime_label(),
            descriptor: &p.descriptor,
        },
    )?;
    Ok(out)
}

#[derive(Serialize)]
struct TransitionRecord {
    /// Qutrit labels and the atom levels behind them.
    qutrit: (usize, usize),
    levels: (usize, usize),
    frequency: f64,
    t1_diel_us: f64,
    rate_diel_per_us: f64,
    dephasing: Dephasing,
    t_phi_us: f64,
}

#[derive(Serialize)]
struct CoherenceRecord {
    circuit: CircuitSpec,
    policy: LevelPolicy,
    transitions: Vec<TransitionRecord>,
    limiting_diel_us: f64,
    limiting_phi_us: f64,
}

pub fn coherence(a: QutritArgs) -> Result<Output> {
    let mut cfg: QutritConfig = load(a.run.config.as_deref())?;
    let (spec, policy) = cfg.resolve(&a)?;
    let mut out = prepare(&a.run, &mut cfg.run, "coherence")?;
    let p = cfg.operating_point(spec, policy)?;
    let q = p.descriptor.levels;
    let mut transitions = Vec::new();
    for (i, j) in TRANSITIONS {
        let (la, lb) = (q[i], q[j]);
        let diel = dielectric_rate(&p.spectrum, la, lb, &cfg.coherence)?;
        let dephasing = flux_dephasing_time_in(&p.basis, &p.spec, la, lb, &cfg.coherence)?;
        transitions.push(TransitionRecord {
            qutrit: (i, j),
            levels: (la, lb),
            frequency: p.spectrum.omega(lb, la),
            t1_diel_us: diel.t1_us,
            rate_diel_per_us: diel.rate_per_us,
            dephasing,
            t_phi_us: dephasing.t_phi_us(),
        });
    }
    let min = |f: fn(&TransitionRecord) -> f64| transitions.iter().map(f).fold(f64::INFINITY, f64::min);
    let record = CoherenceRecord {
        circuit: p.spec,
        policy: p.policy,
        limiting_diel_us: min(|t| t.t1_diel_us),
        limiting_phi_us: min(|t| t.t_phi_us),
        transitions,
    };
    out.config(&cfg)?;
    out.json(".json", &record)?;
    Ok(out)
}

// -------------------------------------------------------------------- sweep

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    #[command(flatten)]
    circuit: CircuitArgs,
    /// First axis: e_j, e_l or flux.
    #[arg(long)]
    x_axis: Option<String>,
    /// First axis values as lo:hi:points.
    #[arg(long, value_parser = parse_range)]
    x_range: Option<Range>,
    /// Second axis: e_j, e_l or flux.
    #[arg(long)]
    y_axis: Option<String>,
    /// Second axis values as lo:hi:points.
    #[arg(long, value_parser = parse_range)]
    y_range: Option<Range>,
    /// Level policy: lowest-three or skip-second.
    #[arg(long)]
    policy: Option<String>,
    /// Keep the given flux instead of locating ω21 = ω10 at every point.
    #[arg(long)]
    fixed_flux: bool,
    /// Root to keep when several fluxes are resonant: largest, smallest or a regime label.
    #[arg(long)]
    root: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxisSection {
    pub axis: String,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl SweepAxisSection {
    fn grid(&self) -> Result<SweepGrid> {
        let axis = match self.axis.to_ascii_lowercase().as_str() {
            "e_j" | "ej" => SweepAxis::EJ,
            "e_l" | "el" => SweepAxis::EL,
            "flux" => SweepAxis::Flux,
            other => return Err(CliError::config(format!("unknown sweep axis '{other}' (expected e_j, e_l, flux)"))),
        };
        Range { lo: self.lo, hi: self.hi, points: self.points }.validate(&self.axis, 1)?;
        Ok(SweepGrid::linspace(axis, self.lo, self.hi, self.points))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub policy: String,
    pub auto_resonance: bool,
    pub root: String,
    pub basis_size: usize,
    pub resonance_grid: usize,
    pub run: RunSection,
    pub circuit: CircuitSection,
    pub x: SweepAxisSection,
    pub y: SweepAxisSection,
    pub coherence: CoherenceParams,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            policy: "lowest-three".into(),
            auto_resonance: true,
            root: "largest".into(),
            basis_size: qutrit_core::circuit::DEFAULT_BASIS_SIZE,
            resonance_grid: 101,
            run: RunSection::default(),
            circuit: CircuitSection::default(),
            x: SweepAxisSection { axis: "e_j".into(), lo: 1.0, hi: 10.0, points: 10 },
            y: SweepAxisSection { axis: "e_l".into(), lo: 0.5, hi: 2.0, points: 4 },
            coherence: CoherenceParams::default(),
        }
    }
}

const SWEEP_HEADER: [&str; 26] = [
    "ix",
    "iy",
    "e_c",
    "e_j",
    "e_l",
    "flux",
    "status",
    "detail",
    "omega10",
    "omega21",
    "delta_hubbard",
    "delta_protect",
    "alpha",
    "alpha_inductive",
    "p_over_j_cap",
    "p_over_j_ind",
    "w1",
    "w2",
    "regime",
    "t_diel_01_us",
    "t_diel_12_us",
    "t_diel_02_us",
    "t_phi_01_us",
    "t_phi_12_us",
    "t_phi_02_us",
    "limiting",
];

pub fn sweep(a: SweepArgs) -> Result<Output> {
    let mut cfg: SweepConfig = load(a.run.config.as_deref())?;
    cfg.circuit.apply(&a.circuit);
    if let Some(v) = &a.x_axis {
        cfg.x.axis = v.clone();
    }
    if let Some(r) = a.x_range {
        (cfg.x.lo, cfg.x.hi, cfg.x.points) = (r.lo, r.hi, r.points);
    }
    if let Some(v) = &a.y_axis {
        cfg.y.axis = v.clone();
    }
    if let Some(r) = a.y_range {
        (cfg.y.lo, cfg.y.hi, cfg.y.points) = (r.lo, r.hi, r.points);
    }
    if let Some(p) = &a.policy {
        cfg.policy = p.clone();
    }
    if a.fixed_flux {
        cfg.auto_resonance = false;
    }
    if let Some(r) = &a.root {
        cfg.root = r.clone();
    }
    let (x, y) = (cfg.x.grid()?, cfg.y.grid()?);
    if x.axis == y.axis {
        return Err(CliError::config("sweep axes must differ"));
    }
    // swept quantities need no fixed value
    let mut fixed = cfg.circuit.clone();
    for axis in [x.axis, y.axis] {
        let slot = match axis {
            SweepAxis::EJ => &mut fixed.e_j,
            SweepAxis::EL => &mut fixed.e_l,
            SweepAxis::Flux => &mut fixed.flux,
        };
        slot.get_or_insert(1.0);
    }
    let fixed = fixed.spec(Some(0.0))?;
    let mut req = SweepRequest::new(x, y, fixed, parse_policy(&cfg.policy)?);
    req.auto_resonance = cfg.auto_resonance;
    req.root = parse_root(&cfg.root);
    req.coherence = cfg.coherence;
    req.basis_size = cfg.basis_size;
    req.resonance_grid = cfg.resonance_grid;
    cfg.coherence.validate()?;

    let mut out = prepare(&a.run, &mut cfg.run, "sweep")?;
    let rows = sweep_parameters(&req)?;
    out.config(&cfg)?;
    let csv_rows = rows.iter().map(|r| {
        let (status, detail) = match &r.status {
            RowStatus::Ok => ("ok", String::new()),
            RowStatus::NoResonance => ("no_resonance", String::new()),
            RowStatus::Failed(m) => ("failed", m.clone()),
        };
        let d = r.descriptor.as_ref();
        let f = |g: fn(&QutritDescriptor) -> f64| opt(d.map(g));
        let diel = r.t_diel_us.map(|t| t.map(num)).unwrap_or_default();
        let phi = r.t_phi.map(|t| t.map(|x| num(x.t_phi_us()))).unwrap_or_default();
        let mut v = vec![
            r.ix.to_string(),
            r.iy.to_string(),
            num(r.spec.e_c),
            num(r.spec.e_j),
            num(r.spec.e_l),
            num(r.spec.flux),
            status.into(),
            detail,
            f(|d| d.omega10),
            f(|d| d.omega21),
            f(|d| d.delta_hubbard),
            f(|d| d.delta_protect),
            f(|d| d.alpha),
            f(|d| d.alpha_inductive),
            f(|d| d.p_over_j_cap),
            f(|d| d.p_over_j_ind),
            f(|d| d.w1),
            f(|d| d.w2),
            d.map(|d| d.regime_label()).unwrap_or_default(),
        ];
        v.extend(diel);
        v.extend(phi);
        v.push(r.limiting_diel().map(|(_, (a, b))| format!("{a}{b}")).unwrap_or_default());
        v
    });
    out.csv(".csv", &SWEEP_HEADER, csv_rows)?;
    out.json(".json", &rows)?;
    Ok(out)
}

// ------------------------------------------------------------------- table1

#[derive(Args, Debug)]
pub struct Table1Args {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated subset of pp, ff, pf, fp.
    #[arg(long, value_delimiter = ',')]
    rows: Option<Vec<String>>,
    /// Override every row's level policy.
    #[arg(long)]
    policy: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Table1Config {
    pub rows: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<String>,
    pub run: RunSection,
    pub coherence: CoherenceParams,
}

impl Default for Table1Config {
    fn default() -> Self {
        Self {
            rows: table::ROWS.iter().map(|r| r.key.to_string()).collect(),
            policy: None,
            run: RunSection::default(),
            coherence: CoherenceParams::default(),
        }
    }
}

#[derive(Serialize)]
struct Table1Record {
    key: String,
    status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<table::RegimeResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    within_tolerance: Option<[bool; 9]>,
}

pub fn table1(a: Table1Args) -> Result<Output> {
    let mut cfg: Table1Config = load(a.run.config.as_deref())?;
    if let Some(r) = &a.rows {
        cfg.rows = r.iter().map(|s| s.trim().to_ascii_lowercase()).collect();
    }
    if let Some(p) = &a.policy {
        cfg.policy = Some(p.clone());
    }
    let rows = cfg.rows.iter().map(|k| table::row(k)).collect::<qutrit_core::Result<Vec<_>>>()?;
    if rows.is_empty() {
        return Err(CliError::config("no rows selected"));
    }
    let policy = cfg.policy.as_deref().map(parse_policy).transpose()?;
    cfg.coherence.validate()?;

    let mut out = prepare(&a.run, &mut cfg.run, "table1")?;
    let coh = cfg.coherence;
    let records: Vec<Table1Record> = rows
        .par_iter()
        .map(|row| match table::evaluate(row, policy, &coh) {
            Ok(r) => {
                let tol = r.within_tolerance();
                let status = match tol {
                    Some(t) if t.iter().all(|&ok| ok) => "ok",
                    Some(_) => "out_of_tolerance",
                    None => "ok",
                };
                Table1Record { key: row.key.into(), status: status.into(), within_tolerance: tol, result: Some(r) }
            }
            Err(e) => Table1Record {
                key: row.key.into(),
                status: format!("failed: {e}"),
                result: None,
                within_tolerance: None,
            },
        })
        .collect();

    let mut header = vec!["key".to_string(), "policy".into(), "e_j".into(), "status".into()];
    for q in QUANTITIES {
        header.extend([q.to_string(), format!("{q}_published"), format!("{q}_ok")]);
    }
    header.push("limiting_diel".into());
    header.push("limiting_phi".into());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let csv_rows = records.iter().zip(&rows).map(|(rec, row)| {
        let published = PUBLISHED.iter().find(|(k, _)| *k == row.key).map(|(_, v)| *v);
        let mut v = vec![
            rec.key.clone(),
            serde_json::to_value(policy.unwrap_or(row.policy))
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default(),
            num(row.e_j),
            rec.status.clone(),
        ];
        let got = rec.result.as_ref().map(|r| r.quantities());
        for k in 0..QUANTITIES.len() {
            v.push(opt(got.map(|g| g[k])));
            v.push(opt(published.map(|p| p[k])));
            v.push(rec.within_tolerance.map(|t| t[k].to_string()).unwrap_or_default());
        }
        let pair = |p: Option<(usize, usize)>| p.map(|(a, b)| format!("{a}{b}")).unwrap_or_default();
        v.push(pair(rec.result.as_ref().map(|r| r.limiting_diel.1)));
        v.push(pair(rec.result.as_ref().map(|r| r.limiting_phi.1)));
        v
    });
    out.config(&cfg)?;
    out.csv(".csv", &header, csv_rows)?;
    out.json(".json", &records)?;
    Ok(out)
}
