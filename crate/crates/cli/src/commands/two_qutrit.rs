use crate::config::{load, parse_policy, prepare, RunArgs, RunSection};
use crate::error::{CliError, Result};
use crate::output::{num, opt, Output};
use clap::Args;
use qutrit_core::circuit::{diagonalize_fluxonium, FluxoniumBasis, DEFAULT_BASIS_SIZE};
use qutrit_core::effective::{
    build_two_qutrit_rwa, extract_effective_params, full_two_atom_blocks, schrieffer_wolff_correction, CouplingSpec,
    EffectiveParams, DEFAULT_LEVEL_CUTOFF, DEFAULT_RESONANCE_TOL,
};
use qutrit_core::qutrit::{choose_root, find_resonant_flux_in, table, RootChoice};
use qutrit_core::CircuitSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Args, Debug)]
pub struct TwoQutritArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Reference regime: pp, ff, pf or fp.
    #[arg(long)]
    regime: Option<String>,
    /// capacitive or inductive.
    #[arg(long)]
    coupling: Option<String>,
    /// Largest coupling strength (GHz).
    #[arg(long, alias = "gc-max", alias = "gl-max")]
    g_max: Option<f64>,
    /// Smallest coupling strength (GHz); defaults to −g_max.
    #[arg(long, allow_hyphen_values = true)]
    g_min: Option<f64>,
    /// Number of intervals between g_min and g_max.
    #[arg(long)]
    steps: Option<usize>,
    /// Level policy override: lowest-three or skip-second.
    #[arg(long)]
    policy: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TwoQutritConfig {
    pub regime: String,
    pub coupling: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_min: Option<f64>,
    pub g_max: f64,
    pub steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<String>,
    /// Atom levels kept in the second-order sum.
    pub level_cutoff: usize,
    /// Intermediate pairs closer than this to resonance are skipped (GHz).
    pub resonance_tol: f64,
    /// Levels per atom in the reference product-basis diagonalization.
    pub full_levels: usize,
    pub run: RunSection,
}

impl Default for TwoQutritConfig {
    fn default() -> Self {
        Self {
            regime: "pp".into(),
            coupling: "capacitive".into(),
            g_min: None,
            g_max: 0.2,
            steps: 40,
            policy: None,
            level_cutoff: DEFAULT_LEVEL_CUTOFF,
            resonance_tol: DEFAULT_RESONANCE_TOL,
            full_levels: 12,
            run: RunSection::default(),
        }
    }
}

#[derive(Serialize)]
struct BlockRecord {
    n: usize,
    rwa: Vec<f64>,
    corrected: Vec<f64>,
    full: Vec<f64>,
}

#[derive(Serialize)]
struct PointRecord {
    g: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    blocks: Vec<BlockRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rwa_params: Option<EffectiveParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    corrected_params: Option<EffectiveParams>,
    excluded_pairs: usize,
    excluded_weight: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    circuit: CircuitSpec,
    levels: [usize; 3],
    points: &'a [PointRecord],
}

pub fn run(a: TwoQutritArgs) -> Result<Output> {
    let mut cfg: TwoQutritConfig = load(a.run.config.as_deref())?;
    if let Some(v) = &a.regime {
        cfg.regime = v.clone();
    }
    if let Some(v) = &a.coupling {
        cfg.coupling = v.clone();
    }
    if let Some(v) = a.g_max {
        cfg.g_max = v;
    }
    if a.g_min.is_some() {
        cfg.g_min = a.g_min;
    }
    if let Some(v) = a.steps {
        cfg.steps = v;
    }
    if a.policy.is_some() {
        cfg.policy = a.policy.clone();
    }
    let row = table::row(&cfg.regime)?;
    let policy = cfg.policy.as_deref().map(parse_policy).transpose()?.unwrap_or(row.policy);
    let channel = match cfg.coupling.to_ascii_lowercase().as_str() {
        "capacitive" => CouplingSpec::capacitive,
        "inductive" => CouplingSpec::inductive,
        other => {
            return Err(CliError::config(format!("unknown coupling '{other}' (expected capacitive or inductive)")))
        }
    };
    let g_min = cfg.g_min.unwrap_or(-cfg.g_max);
    if !(g_min.is_finite() && cfg.g_max.is_finite() && g_min < cfg.g_max) || cfg.steps == 0 {
        return Err(CliError::config("need g_min < g_max and steps >= 1"));
    }
    if cfg.full_levels <= policy.levels()[2] || cfg.level_cutoff > 16 {
        return Err(CliError::config("full_levels must exceed the qutrit levels and level_cutoff must be <= 16"));
    }

    let mut out = prepare(&a.run, &mut cfg.run, "two-qutrit")?;
    let basis = FluxoniumBasis::new(table::E_C, table::E_L, DEFAULT_BASIS_SIZE)?;
    let template = CircuitSpec::new(table::E_C, row.e_j, table::E_L, 0.0);
    let roots = find_resonant_flux_in(&basis, row.e_j, policy, (0.0, 0.5), 101)?;
    let flux = choose_root(&basis, &template, policy, roots.roots(), &RootChoice::Regime(row.key.to_uppercase()))?
        .ok_or_else(|| CliError::Numerical(format!("no resonant flux for regime {}", row.key)))?;
    let spec = template.with_flux(flux);
    let atom = diagonalize_fluxonium(&spec, 16.max(cfg.full_levels), DEFAULT_BASIS_SIZE)?;
    let levels = policy.levels();

    let gs: Vec<f64> = (0..=cfg.steps).map(|k| g_min + (cfg.g_max - g_min) * k as f64 / cfg.steps as f64).collect();
    let points: Vec<PointRecord> = gs
        .par_iter()
        .map(|&g| {
            let c = channel(g);
            let eval = || -> qutrit_core::Result<PointRecord> {
                let rwa = build_two_qutrit_rwa(&atom, &atom, levels, &c)?;
                let sw = schrieffer_wolff_correction(&atom, &atom, levels, &c, cfg.level_cutoff, cfg.resonance_tol)?;
                let corrected = rwa.with_correction(&sw.delta);
                let full = full_two_atom_blocks(&atom, &atom, levels, &c, cfg.full_levels)?;
                let blocks = (0..=4)
                    .map(|n| BlockRecord {
                        n,
                        rwa: rwa.lab_block_eigenvalues(n),
                        corrected: corrected.lab_block_eigenvalues(n),
                        full: full[n].clone(),
                    })
                    .collect();
                Ok(PointRecord {
                    g,
                    error: None,
                    blocks,
                    rwa_params: Some(extract_effective_params(&rwa)?),
                    corrected_params: Some(extract_effective_params(&corrected)?),
                    excluded_pairs: sw.excluded.len(),
                    excluded_weight: sw.excluded_weight,
                })
            };
            eval().unwrap_or_else(|e| PointRecord {
                g,
                error: Some(e.to_string()),
                blocks: Vec::new(),
                rwa_params: None,
                corrected_params: None,
                excluded_pairs: 0,
                excluded_weight: 0.0,
            })
        })
        .collect();

    out.config(&cfg)?;
    out.json(".json", &Summary { circuit: spec, levels, points: &points })?;
    let block_rows = points.iter().flat_map(|p| {
        p.blocks.iter().flat_map(move |b| {
            (0..b.rwa.len()).map(move |k| {
                vec![
                    num(p.g),
                    b.n.to_string(),
                    k.to_string(),
                    num(b.rwa[k]),
                    num(b.corrected[k]),
                    opt(b.full.get(k).copied()),
                ]
            })
        })
    });
    out.csv(".blocks.csv", &["g", "n", "k", "rwa", "corrected", "full"], block_rows)?;
    let param_cols = |p: Option<&EffectiveParams>| -> Vec<String> {
        match p {
            Some(p) => vec![num(p.j), num(p.p), opt(p.alpha), opt(p.alpha_prime), num(p.delta), opt(p.w1), opt(p.w2)],
            None => vec![String::new(); 7],
        }
    };
    let param_rows = points.iter().map(|p| {
        let mut v = vec![num(p.g)];
        v.extend(param_cols(p.rwa_params.as_ref()));
        v.extend(param_cols(p.corrected_params.as_ref()));
        v.push(p.error.clone().unwrap_or_default());
        v
    });
    out.csv(
        ".params.csv",
        &[
            "g",
            "rwa_j",
            "rwa_p",
            "rwa_alpha",
            "rwa_alpha_prime",
            "rwa_delta",
            "rwa_w1",
            "rwa_w2",
            "sw_j",
            "sw_p",
            "sw_alpha",
            "sw_alpha_prime",
            "sw_delta",
            "sw_w1",
            "sw_w2",
            "error",
        ],
        param_rows,
    )?;
    Ok(out)
}
