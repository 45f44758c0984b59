//! Command-line front end: `analyze`, `shadow`, `model` and `budget`.
//!
//! Every command reads an optional `key=value` config file and lets flags
//! override it, writes one CSV table (to `--out` or stdout) and, when `--out`
//! is given, archives the resolved settings next to it as `<out>.cfg`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::conditions::{
    check_d3opt_or_d2, evaluate, evaluate_spectral, format_float, Condition, ConditionReport, ConditionSelector,
    MomentVector,
};
use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::linalg::qdm::{load_qdm, save_qdm};
use crate::linalg::{hermitian_spectrum, matrix_moments, partial_transpose, Bipartition, DensityOperator};
use crate::models::{pxp, quench, xxz};
use crate::shadows::archive::{load_qsh, save_qsh};
use crate::shadows::budget::{confidence_radius, measurement_budget, BudgetParams};
use crate::shadows::estimators::{jackknife_from_values, sector_blocks, PowerSums, ShadowEstimator};
use crate::shadows::{simulate, Ensemble, Shadow, SourceSequence};
use crate::symmetry::{
    all_projectors, build_projector, is_block_diagonal, pt_sector_block, symmetrize, SectorKind, SectorProjector,
};

pub mod config;

pub use config::Settings;

#[derive(Parser, Debug)]
#[command(name = "ptmoments", version, about = "Entanglement detection from partial-transpose moments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default, Clone)]
pub struct Common {
    /// key=value configuration file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output CSV (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// `all`, `full`, or a comma-separated list of charges.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub sectors: Option<String>,
    /// Comma-separated conditions, e.g. `p3PPT,D3,SR-D2`.
    #[arg(long, global = true)]
    pub conditions: Option<String>,
    /// Include exact spectra, negativity and exact moments.
    #[arg(long, global = true)]
    pub oracle: bool,
    /// Project the input onto its charge-conserving part before SR conditions.
    #[arg(long, global = true)]
    pub symmetrize: bool,
    /// Write a QDM1 state file per grid point next to `--out`.
    #[arg(long, global = true)]
    pub emit_states: bool,
    /// Extra `key=value` setting (repeatable).
    #[arg(long = "set", short = 's', global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate conditions on a QDM1 state.
    Analyze {
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Simulate or re-read classical shadows and estimate sector moments.
    Shadow {
        /// QDM1 source state.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Model source: quench, xxz or pxp.
        #[arg(long)]
        model: Option<String>,
        /// Read snapshots from a QSH1 archive instead of simulating.
        #[arg(long)]
        archive: Option<PathBuf>,
        /// Write the snapshots to a QSH1 archive.
        #[arg(long)]
        archive_out: Option<PathBuf>,
        #[arg(long)]
        snapshots: Option<usize>,
        /// pauli or global.
        #[arg(long)]
        ensemble: Option<String>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        /// Print the measurement budget and exit.
        #[arg(long)]
        budget_only: bool,
        /// Size of subsystem A when reading an archive without a state.
        #[arg(long)]
        n_a: Option<usize>,
        #[arg(long)]
        n_b: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a model driver: quench, xxz or pxp.
    Model {
        kind: String,
        #[command(flatten)]
        common: Common,
    },
    /// Measurement budget and confidence radius for the sector D2 estimator.
    Budget {
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        n_a: Option<usize>,
        #[arg(long)]
        n_b: Option<usize>,
        #[arg(long)]
        snapshots: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
}

/// Merge config file, repeatable `--set` pairs and typed flags (in increasing precedence).
fn settings(common: &Common) -> Result<Settings> {
    let mut s = match &common.config {
        Some(p) => Settings::load(p)?,
        None => Settings::default(),
    };
    for pair in &common.set {
        s.set_pair(pair)?;
    }
    s.set_opt("seed", common.seed);
    s.set_opt("out", common.out.as_ref().map(|p| p.display().to_string()));
    s.set_opt("sectors", common.sectors.as_ref());
    s.set_opt("conditions", common.conditions.as_ref());
    if common.oracle {
        s.set("oracle", true);
    }
    if common.symmetrize {
        s.set("symmetrize", true);
    }
    if common.emit_states {
        s.set("emit_states", true);
    }
    Ok(s)
}

fn path_setting(s: &Settings, key: &str) -> Result<Option<PathBuf>> {
    Ok(s.get::<String>(key)?.map(PathBuf::from))
}

/// A CSV table with a fixed header.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_to(&self, w: &mut dyn Write) -> Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(&self.header)?;
        for r in &self.rows {
            csv.write_record(r)?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

fn opt_float(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

fn emit(table: &Table, s: &Settings) -> Result<()> {
    match path_setting(s, "out")? {
        Some(path) => {
            write_atomic(&path, |w| table.write_to(w))?;
            let mut cfg = path.clone().into_os_string();
            cfg.push(".cfg");
            write_atomic(PathBuf::from(cfg), |w| Ok(w.write_all(s.to_text().as_bytes())?))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            table.write_to(&mut lock)
        }
    }
}

/// Path of the state file for grid point `k`: `<out stem>_<k>.qdm` next to `--out`.
fn state_path(s: &Settings, k: usize) -> Result<PathBuf> {
    let out = path_setting(s, "out")?.ok_or_else(|| Error::Config("emit_states needs --out".into()))?;
    let stem = out.file_stem().map(|x| x.to_string_lossy().into_owned()).unwrap_or_else(|| "state".into());
    Ok(out.with_file_name(format!("{stem}_{k:04}.qdm")))
}

fn emit_states(s: &Settings, states: &[DensityOperator]) -> Result<()> {
    if s.flag("emit_states")? {
        for (k, rho) in states.iter().enumerate() {
            save_qdm(state_path(s, k)?, rho)?;
        }
    }
    Ok(())
}

/// Requested sectors. `None` stands for the unresolved partial transpose.
fn parse_sectors(s: &Settings, bip: Bipartition, default: &str) -> Result<Vec<Option<i32>>> {
    let spec = s.raw("sectors").unwrap_or(default).to_string();
    let mut out = Vec::new();
    for tok in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match tok.to_ascii_lowercase().as_str() {
            "all" => out.extend(
                all_projectors(SectorKind::P, bip)?.into_iter().filter(|p| p.rank() > 0).map(|p| Some(p.charge())),
            ),
            "full" => out.push(None),
            t => {
                let q: i32 = t.parse().map_err(|_| Error::Config(format!("bad sector {tok:?}")))?;
                let proj = build_projector(SectorKind::P, q, bip)?;
                if proj.rank() == 0 {
                    return Err(Error::EmptySector(q));
                }
                out.push(Some(q));
            }
        }
    }
    Ok(out)
}

fn projector(bip: Bipartition, sector: Option<i32>) -> Result<SectorProjector> {
    match sector {
        Some(q) => build_projector(SectorKind::P, q, bip),
        None => Ok(SectorProjector::full(bip)),
    }
}

fn sector_label(sector: Option<i32>) -> String {
    sector.map(|q| q.to_string()).unwrap_or_else(|| "full".into())
}

fn evaluate_condition(condition: Condition, moments: &MomentVector, spectrum: &dyn Fn() -> Result<Vec<f64>>) -> Result<ConditionReport> {
    match condition {
        Condition::D3Opt => check_d3opt_or_d2(moments),
        c if c.is_spectral() => evaluate_spectral(c, &spectrum()?),
        c => evaluate(c, moments),
    }
}

// ---------------------------------------------------------------- analyze

/// One report row per requested condition (and sector for SR conditions).
pub fn cmd_analyze(s: &Settings) -> Result<Table> {
    let input = path_setting(s, "input")?.ok_or_else(|| Error::Config("analyze needs --input".into()))?;
    let mut rho = load_qdm(&input)?;
    let bip = rho.bipartition();
    let selectors: Vec<ConditionSelector> = s
        .list::<String>("conditions")?
        .unwrap_or_else(|| vec!["p3PPT".into(), "D3".into()])
        .iter()
        .map(|c| c.parse())
        .collect::<Result<_>>()?;
    if selectors.is_empty() {
        return Err(Error::Config("no conditions requested".into()));
    }
    let oracle = s.flag("oracle")?;
    let any_sr = selectors.iter().any(|c| c.symmetry_resolved);
    if any_sr {
        let bd = is_block_diagonal(&rho, SectorKind::Q);
        if !bd.is_block_diagonal {
            if !s.flag("symmetrize")? {
                return Err(Error::NotSymmetric(bd.residual));
            }
            rho = symmetrize(&rho);
        }
    }
    // validated even when only global conditions are requested
    let parsed = parse_sectors(s, bip, "all")?;
    let sectors: Vec<i32> = if any_sr { parsed.into_iter().flatten().collect() } else { Vec::new() };
    let order = |sel: &[&ConditionSelector]| sel.iter().filter_map(|c| c.condition.required_order()).max().unwrap_or(1);
    let pt = partial_transpose(&rho);
    let global: Vec<&ConditionSelector> = selectors.iter().filter(|c| !c.symmetry_resolved).collect();
    let resolved: Vec<&ConditionSelector> = selectors.iter().filter(|c| c.symmetry_resolved).collect();

    let mut table = Table::new(&ConditionReport::CSV_HEADER);
    let moments = matrix_moments(&pt, order(&global).max(order(&resolved)));
    let spectrum = || hermitian_spectrum(&pt);
    for sel in &global {
        table.push(evaluate_condition(sel.condition, &moments, &spectrum)?.csv_record().to_vec());
    }
    if oracle {
        for c in [Condition::Negativity, Condition::MinEigenvalue] {
            table.push(evaluate_spectral(c, &spectrum()?)?.csv_record().to_vec());
        }
    }
    for &q in &sectors {
        let block = pt_sector_block(&rho, q)?;
        let m = block.moments(order(&resolved));
        let spec = || Ok(block.spectrum());
        for sel in &resolved {
            table.push(evaluate_condition(sel.condition, &m, &spec)?.in_sector(q).csv_record().to_vec());
        }
        if oracle {
            for c in [Condition::Negativity, Condition::MinEigenvalue] {
                table.push(evaluate_spectral(c, &block.spectrum())?.in_sector(q).csv_record().to_vec());
            }
        }
    }
    Ok(table)
}

// ---------------------------------------------------------------- shadow

pub const SHADOW_HEADER: [&str; 7] = ["sector", "quantity", "estimate", "radius", "jackknife", "exact", "n_snapshots"];

/// State produced by a model driver at its final grid point.
fn model_state(kind: &str, s: &Settings) -> Result<DensityOperator> {
    match kind {
        "quench" => {
            let n = s.get_or("n_sites", 8usize)?;
            let p = quench::QuenchParams::new(n, s.get_or("j", 1.0)?, s.get_or("gamma", 0.1)?, vec![0.0, s.get_or("time", 0.05)?])?;
            Ok(quench::lindblad_evolve(&p)?.pop().expect("two grid points"))
        }
        "xxz" => {
            let p = xxz_params(s, s.get_or("jz", -1.0)?)?;
            xxz::xxz_ground_state(&p)?.state.reduced_density(&p.a1, &p.a2)
        }
        "pxp" => {
            let mut p = pxp_params(s)?;
            p.t_grid = vec![0.0, s.get_or("time", 1.9)?];
            let states = pxp::pxp_evolve(&p)?;
            states[1].reduced_density(&p.a1, &p.a2)
        }
        other => Err(Error::Config(format!("unknown model {other:?} (expected quench, xxz or pxp)"))),
    }
}

fn budget_table(s: &Settings, bip: Bipartition) -> Result<Table> {
    let delta: f64 = s.get_or("delta", 0.05)?;
    let snapshots: Option<u64> = s.get("snapshots")?;
    let eps: Option<f64> = s.get("epsilon")?;
    if eps.is_none() && snapshots.is_none() {
        return Err(Error::Config("budget needs --epsilon, --snapshots or both".into()));
    }
    let explicit = s.raw("sectors").is_some_and(|v| !v.trim().eq_ignore_ascii_case("all"));
    let mut table = Table::new(&["sector", "trace_p", "epsilon", "delta", "c1", "c2", "n_snapshots", "radius"]);
    for sector in parse_sectors(s, bip, "all")? {
        let proj = projector(bip, sector)?;
        if proj.rank() < 2 && !explicit {
            continue;
        }
        let mut params = BudgetParams::theorem1(eps.unwrap_or(0.5), delta, proj.clone());
        params.c1 = s.get_or("c1", params.c1)?;
        params.c2 = s.get_or("c2", params.c2)?;
        let n = eps.map(|_| measurement_budget(&params, bip)).transpose()?;
        let radius = snapshots.map(|m| confidence_radius(m, delta, &proj, bip)).transpose()?;
        table.push(vec![
            sector_label(sector),
            proj.rank().to_string(),
            opt_float(eps),
            format_float(delta),
            format_float(params.c1),
            format_float(params.c2),
            n.map(|n| n.to_string()).unwrap_or_default(),
            opt_float(radius),
        ]);
    }
    Ok(table)
}

fn shadow_source(s: &Settings) -> Result<Option<DensityOperator>> {
    match (path_setting(s, "input")?, s.get::<String>("model")?) {
        (Some(_), Some(_)) => Err(Error::Config("give either input or model, not both".into())),
        (Some(p), None) => Ok(Some(load_qdm(p)?)),
        (None, Some(m)) => Ok(Some(model_state(&m, s)?)),
        (None, None) => Ok(None),
    }
}

fn shadow_bipartition(s: &Settings, source: Option<&DensityOperator>, shadow: Option<&Shadow>) -> Result<Bipartition> {
    if let Some(rho) = source {
        return Ok(rho.bipartition());
    }
    let n = shadow.map(|sh| sh.n_qubits).or(s.get("n_qubits")?).ok_or_else(|| {
        Error::Config("no state source: give input, model, or n_a and n_b".into())
    })?;
    let n_a = s.get_or("n_a", n / 2)?;
    let n_b = s.get_or("n_b", n - n_a.min(n))?;
    if n_a + n_b != n {
        return Err(Error::Config(format!("n_a + n_b = {} does not match the {n}-qubit archive", n_a + n_b)));
    }
    Bipartition::new(n_a, n_b)
}

fn shadow_rows(table: &mut Table, shadow: &Shadow, bip: Bipartition, sector: Option<i32>, exact: Option<&DensityOperator>, delta: f64) -> Result<()> {
    let proj = projector(bip, sector)?;
    if proj.rank() == 0 {
        return Err(Error::EmptySector(sector.unwrap_or(0)));
    }
    let blocks = sector_blocks(shadow, &proj)?;
    let ps = PowerSums::from_blocks(&blocks)?;
    let n = blocks.len();
    let (p1, p2, p3) = (ps.p1(), ps.p2()?, ps.p3()?);
    let jack = if n >= 10 {
        let loo = |e: ShadowEstimator| e.leave_one_out(&blocks);
        let (l1, l2, l3, ld) = (loo(ShadowEstimator::P1)?, loo(ShadowEstimator::P2)?, loo(ShadowEstimator::P3)?, loo(ShadowEstimator::D2)?);
        let lp: Vec<f64> = (0..n).map(|i| l2[i] * l2[i] - l1[i] * l3[i]).collect();
        Some([&l1, &l2, &l3, &ld, &lp].map(|v| 1.96 * jackknife_from_values(v)))
    } else {
        None
    };
    let radius = (shadow.ensemble == Ensemble::Pauli && proj.rank() >= 2)
        .then(|| confidence_radius(n as u64, delta, &proj, bip))
        .transpose()?;
    let exact_m = match exact {
        Some(rho) => {
            let m = match sector {
                Some(q) => pt_sector_block(rho, q)?.moments(3),
                None => matrix_moments(&partial_transpose(rho), 3),
            };
            Some([m.p(1), m.p(2), m.p(3), m.p(1) * m.p(1) - m.p(2), m.p(2) * m.p(2) - m.p(1) * m.p(3)])
        }
        None => None,
    };
    let est = [p1, p2, p3, ps.d2()?, p2 * p2 - p1 * p3];
    for (k, name) in ["p1", "p2", "p3", "D2", "p3PPT"].iter().enumerate() {
        table.push(vec![
            sector_label(sector),
            name.to_string(),
            format_float(est[k]),
            opt_float(if *name == "D2" { radius } else { None }),
            opt_float(jack.map(|j| j[k])),
            opt_float(exact_m.map(|e| e[k])),
            n.to_string(),
        ]);
    }
    Ok(())
}

/// Estimates of `p1, p2, p3`, `D2 = p1^2 - p2` and the `p3`-PPT margin per sector,
/// with the rigorous `D2` radius (Pauli ensemble) and 1.96-sigma jackknife bars.
pub fn cmd_shadow(s: &Settings) -> Result<Table> {
    let source = shadow_source(s)?;
    if s.flag("budget_only")? {
        let bip = shadow_bipartition(s, source.as_ref(), None)?;
        return budget_table(s, bip);
    }
    let seed = s.seed()?;
    let shadow = match path_setting(s, "archive")? {
        Some(p) => load_qsh(&p, seed)?,
        None => {
            let rho = source.clone().ok_or_else(|| Error::Config("shadow needs input, model or archive".into()))?;
            let n: usize = s.require("snapshots")?;
            let ensemble: Ensemble = s.get_or("ensemble", "pauli".to_string())?.parse()?;
            simulate(&SourceSequence::Constant(rho), n, ensemble, seed)?
        }
    };
    if shadow.len() < 3 {
        return Err(Error::TooFewSnapshots { needed: 3, got: shadow.len() });
    }
    if let Some(p) = path_setting(s, "archive_out")? {
        save_qsh(&shadow, &p)?;
    }
    let bip = shadow_bipartition(s, source.as_ref(), Some(&shadow))?;
    if bip.n_qubits() != shadow.n_qubits {
        return Err(Error::DimensionMismatch { expected: 1 << bip.n_qubits(), got: 1 << shadow.n_qubits });
    }
    let delta = s.get_or("delta", 0.05)?;
    let exact = if s.flag("oracle")? { source.as_ref() } else { None };
    let mut table = Table::new(&SHADOW_HEADER);
    for sector in parse_sectors(s, bip, "full")? {
        shadow_rows(&mut table, &shadow, bip, sector, exact, delta)?;
    }
    Ok(table)
}

// ---------------------------------------------------------------- budget

pub fn cmd_budget(s: &Settings) -> Result<Table> {
    let n_a: usize = s.require("n_a")?;
    let n_b: usize = s.require("n_b")?;
    budget_table(s, Bipartition::new(n_a, n_b)?)
}

// ---------------------------------------------------------------- model

fn grid(s: &Settings, list_key: &str, lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>> {
    if let Some(v) = s.list::<f64>(list_key)? {
        return Ok(v);
    }
    let lo = s.get_or(&format!("{list_key}_min"), lo)?;
    let hi = s.get_or(&format!("{list_key}_max"), hi)?;
    let steps: usize = s.get_or(&format!("{list_key}_steps"), steps)?;
    if steps < 2 {
        return Ok(vec![lo]);
    }
    Ok((0..steps).map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64).collect())
}

fn xxz_params(s: &Settings, jz: f64) -> Result<xxz::XXZParams> {
    let l = s.get_or("l_sites", 10usize)?;
    let ell = s.get_or("ell", 6usize)?;
    match s.get_or("layout", "connected".to_string())?.as_str() {
        "connected" => xxz::XXZParams::connected(l, ell, jz),
        "disjoint" => xxz::XXZParams::disjoint(l, ell, jz),
        other => Err(Error::Config(format!("unknown layout {other:?} (expected connected or disjoint)"))),
    }
}

fn pxp_params(s: &Settings) -> Result<pxp::PXPParams> {
    let p = pxp::PXPParams {
        n_sites: s.get_or("n_sites", 12usize)?,
        omega: s.get_or("omega", 1.0)?,
        t_grid: grid(s, "t", 0.0, 10.0, 101)?,
        a1: s.list("a1")?.unwrap_or_else(|| vec![4, 5]),
        a2: s.list("a2")?.unwrap_or_else(|| vec![6, 7]),
    };
    if p.a1.is_empty() || p.a2.is_empty() {
        return Err(Error::Config("a1 and a2 must both be non-empty".into()));
    }
    p.validate()?;
    Ok(p)
}

fn model_quench(s: &Settings) -> Result<Table> {
    let n = s.get_or("n_sites", 8usize)?;
    let (j, gamma) = (s.get_or("j", 1.0)?, s.get_or("gamma", 0.1)?);
    let q = s.get_or("sector", -1i32)?;
    let p = quench::QuenchParams::new(n, j, gamma, grid(s, "t", 0.0, 0.05, 11)?)?;
    let states = quench::lindblad_evolve(&p)?;
    emit_states(s, &states)?;
    let ratios = quench::quench_ratios(&states, q)?;
    let (d2p, p3p) = quench::perturbative_ratios(gamma, j, p.partition.n_a());
    let mut table = Table::new(&["t", "sector", "p1", "p2", "p3", "d2_ratio", "p3ppt_ratio", "d2_ratio_perturbative", "p3ppt_ratio_perturbative"]);
    for ((rho, t), r) in states.iter().zip(&p.t_grid).zip(&ratios) {
        let m = pt_sector_block(rho, q)?.moments(3);
        table.push(vec![
            format_float(*t),
            q.to_string(),
            format_float(m.p(1)),
            format_float(m.p(2)),
            format_float(m.p(3)),
            opt_float(r.map(|x| x.0)),
            opt_float(r.map(|x| x.1)),
            format_float(d2p),
            format_float(p3p),
        ]);
    }
    Ok(table)
}

fn model_xxz(s: &Settings) -> Result<Table> {
    let base = xxz_params(s, 0.0)?;
    let q = s.get_or("sector", 1i32)?;
    let jz = grid(s, "jz", -4.0, 0.5, 46)?;
    let rows = xxz::xxz_condition_sweep(&base, &jz, q)?;
    if s.flag("emit_states")? {
        let states = jz
            .iter()
            .map(|&j| {
                let p = xxz::XXZParams { jz: j, ..base.clone() };
                xxz::xxz_ground_state(&p)?.state.reduced_density(&p.a1, &p.a2)
            })
            .collect::<Result<Vec<_>>>()?;
        emit_states(s, &states)?;
    }
    let mut header: Vec<&str> = vec!["jz"];
    header.extend(ConditionReport::CSV_HEADER);
    header.extend(["negativity", "sound"]);
    let mut table = Table::new(&header);
    for r in &rows {
        let mut row = vec![format_float(r.jz)];
        row.extend(r.report.csv_record());
        row.push(format_float(r.negativity));
        row.push(r.sound().to_string());
        table.push(row);
    }
    let unsound = rows.iter().filter(|r| !r.sound()).count();
    eprintln!("soundness (detection implies negativity > 0): {}", if unsound == 0 { "pass" } else { "FAIL" });
    Ok(table)
}

fn model_pxp(s: &Settings) -> Result<Table> {
    let p = pxp_params(s)?;
    let states = pxp::pxp_evolve(&p)?;
    if s.flag("emit_states")? {
        emit_states(s, &pxp::reduced_states(&states, &p.a1, &p.a2)?)?;
    }
    let rows = pxp::pxp_entanglement_scan(&states, &p.t_grid, &p.a1, &p.a2)?;
    let mag: Vec<f64> = states.iter().map(pxp::staggered_magnetization).collect();
    let n_shadow: usize = s.get_or("shadow_snapshots", 0usize)?;
    let shadow = if n_shadow > 0 {
        Some(pxp::pxp_shadow_scan(&states, &p.t_grid, &p.a1, &p.a2, n_shadow, s.seed()?)?)
    } else {
        None
    };
    let mut header = vec!["t", "staggered_magnetization", "negativity", "D3_margin", "D3", "D4_margin", "D4", "p3PPT_margin", "p3PPT"];
    if shadow.is_some() {
        header.extend(["D3_shadow", "D3_shadow_err", "D4_shadow", "D4_shadow_err", "p3PPT_shadow", "p3PPT_shadow_err"]);
    }
    let mut table = Table::new(&header);
    for (k, r) in rows.iter().enumerate() {
        let mut row = vec![
            format_float(r.t),
            format_float(mag[k]),
            format_float(r.negativity),
            format_float(r.d3.margin),
            r.d3.verdict.to_string(),
            format_float(r.d4.margin),
            r.d4.verdict.to_string(),
            format_float(r.p3ppt.margin),
            r.p3ppt.verdict.to_string(),
        ];
        if let Some(sh) = &shadow {
            let e = &sh[k];
            // 2-sigma bars, as in the reference figure.
            for (v, err) in [(e.d3_margin, e.d3_error), (e.d4_margin, e.d4_error), (e.p3ppt_margin, e.p3ppt_error)] {
                row.push(format_float(v));
                row.push(format_float(2.0 * err));
            }
        }
        table.push(row);
    }
    let revival = pxp::first_revival(&mag);
    match revival {
        Some((k, v)) => eprintln!(
            "revival: t = {}, staggered magnetization {v:.3} ({})",
            p.t_grid[k],
            if v >= 0.7 { "pass" } else { "FAIL" }
        ),
        None => eprintln!("revival: none in the time window (FAIL)"),
    }
    let d3_only = rows.iter().any(|r| r.d3.detected() && !r.p3ppt.detected());
    let d4_only = rows.iter().any(|r| r.d4.detected() && !r.d3.detected());
    let sound = rows.iter().all(pxp::ScanRow::sound);
    let pf = |b: bool| if b { "pass" } else { "FAIL" };
    eprintln!("D3 detects where p3PPT does not: {}", pf(d3_only));
    eprintln!("D4 detects where D3 does not: {}", pf(d4_only));
    eprintln!("soundness: {}", pf(sound));
    Ok(table)
}

pub fn cmd_model(kind: &str, s: &Settings) -> Result<Table> {
    match kind {
        "quench" => model_quench(s),
        "xxz" => model_xxz(s),
        "pxp" => model_pxp(s),
        other => Err(Error::Config(format!("unknown model {other:?} (expected quench, xxz or pxp)"))),
    }
}

// ---------------------------------------------------------------- entry points

/// Run a parsed command and write its table.
pub fn run(cli: Cli) -> Result<()> {
    let (table, s) = match cli.command {
        Command::Analyze { input, common } => {
            let mut s = settings(&common)?;
            s.set_opt("input", input.map(|p| p.display().to_string()));
            (cmd_analyze(&s)?, s)
        }
        Command::Shadow { input, model, archive, archive_out, snapshots, ensemble, epsilon, delta, budget_only, n_a, n_b, common } => {
            let mut s = settings(&common)?;
            s.set_opt("input", input.map(|p| p.display().to_string()));
            s.set_opt("model", model);
            s.set_opt("archive", archive.map(|p| p.display().to_string()));
            s.set_opt("archive_out", archive_out.map(|p| p.display().to_string()));
            s.set_opt("snapshots", snapshots);
            s.set_opt("ensemble", ensemble);
            s.set_opt("epsilon", epsilon);
            s.set_opt("delta", delta);
            s.set_opt("n_a", n_a);
            s.set_opt("n_b", n_b);
            if budget_only {
                s.set("budget_only", true);
            }
            (cmd_shadow(&s)?, s)
        }
        Command::Model { kind, common } => {
            let s = settings(&common)?;
            (cmd_model(&kind, &s)?, s)
        }
        Command::Budget { epsilon, delta, n_a, n_b, snapshots, common } => {
            let mut s = settings(&common)?;
            s.set_opt("epsilon", epsilon);
            s.set_opt("delta", delta);
            s.set_opt("n_a", n_a);
            s.set_opt("n_b", n_b);
            s.set_opt("snapshots", snapshots);
            (cmd_budget(&s)?, s)
        }
    };
    emit(&table, &s)
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Convenience for tests and examples: run with arguments given as strings.
pub fn run_args(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("ptmoments").chain(args.iter().copied()))
}

