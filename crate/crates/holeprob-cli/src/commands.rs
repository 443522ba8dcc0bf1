//! The pipelines behind each subcommand. Each returns its artifacts in memory.

use crate::artifacts::{Artifacts, Status};
use holeprob::config::RunConfig;
use holeprob::ensemble::{abel_sum, torus_class_distance, SectionSpace};
use holeprob::equilibrium::{classify_support, frostman_residuals, regularity_audit, solve_equilibrium_i, EquilibriumSolution, FrostmanCertificate, RegularityReport};
use holeprob::fekete::{audit_energy_bounds, audit_separation, solve_fekete, EnergyBoundReport, SeparationReport};
use holeprob::io::{self, PlotRow, SCHEMA_VERSION};
use holeprob::kernel::Discretization;
use holeprob::measures::AtomicConfiguration;
use holeprob::ratelab::{estimate_hole_probability, r_sweep, rate_check, RSweep, RateReport, TrialLedger};
use holeprob::surface::{HoleRegion, SurfaceModel};
use holeprob::{Error, Result};
use serde::Serialize;
use std::sync::Arc;

fn config_err(e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Config { path: "".into(), message: m },
        e => e,
    }
}

struct Setup {
    model: Arc<SurfaceModel>,
    disc: Arc<Discretization>,
}

fn setup(cfg: &RunConfig) -> Result<Setup> {
    let model = Arc::new(cfg.model().map_err(config_err)?);
    let hole = cfg.hole(&model).map_err(config_err)?;
    let disc = Arc::new(Discretization::new(model.clone(), hole)?);
    Ok(Setup { model, disc })
}

fn json<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut b = serde_json::to_vec_pretty(v)?;
    b.push(b'\n');
    Ok(b)
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut b = vec![];
    f(&mut b)?;
    Ok(b)
}

fn solved(s: &EquilibriumSolution) -> Status {
    if s.converged {
        Status::Ok
    } else {
        Status::NonConverged
    }
}

#[derive(Serialize)]
struct EquilibriumReport {
    schema_version: u32,
    value: f64,
    lower_bound: f64,
    duality_gap: f64,
    frostman_constant: f64,
    inequality_residual: f64,
    equality_residual: f64,
    converged: bool,
    iterations: usize,
    boundary_layer_mass: f64,
    forbidden_area: f64,
    bulk_area: f64,
    measure_csv: Option<String>,
    support_csv: Option<String>,
}

pub fn equilibrium(cfg: &RunConfig, stem: &str) -> Result<Artifacts> {
    let s = setup(cfg)?;
    let sol = solve_equilibrium_i(s.disc.clone(), &cfg.solver.options())?;
    let sup = classify_support(&sol);
    let csv = cfg.output.csv();
    let (mname, sname) = (format!("{stem}.measure.csv"), format!("{stem}.support.csv"));
    let rep = EquilibriumReport {
        schema_version: SCHEMA_VERSION,
        value: sol.value,
        lower_bound: sol.lower_bound,
        duality_gap: sol.duality_gap,
        frostman_constant: sol.frostman_constant,
        inequality_residual: sol.kkt_residual_inequality,
        equality_residual: sol.kkt_residual_equality,
        converged: sol.converged,
        iterations: sol.iterations,
        boundary_layer_mass: sup.boundary_layer_mass,
        forbidden_area: sup.forbidden_area,
        bulk_area: sup.bulk_area,
        measure_csv: csv.then(|| mname.clone()),
        support_csv: csv.then(|| sname.clone()),
    };
    let mut files = vec![(format!("{stem}.json"), json(&rep)?)];
    if csv {
        files.push((mname, csv_bytes(|b| io::write_measure_csv(b, &sol.measure))?));
        files.push((sname, csv_bytes(|b| io::write_support_csv(b, &sol.measure, &sup.tags))?));
    }
    Ok(Artifacts { files, status: solved(&sol) })
}

#[derive(Serialize)]
struct FeketeReport {
    schema_version: u32,
    m: usize,
    objective: f64,
    energy: f64,
    max_potential: f64,
    converged: bool,
    gradient_norm: f64,
    iterations: usize,
    restarts_used: usize,
    separation: SeparationReport,
    energy_bounds: EnergyBoundReport,
    equilibrium_value: f64,
    config_csv: Option<String>,
}

pub fn fekete(cfg: &RunConfig, stem: &str) -> Result<Artifacts> {
    let s = setup(cfg)?;
    let sol = solve_equilibrium_i(s.disc.clone(), &cfg.solver.options())?;
    let res = solve_fekete(&s.disc, &sol.potential, cfg.fekete.m, Some(&sol.measure), &cfg.fekete.options())?;
    let csv = cfg.output.csv();
    let cname = format!("{stem}.config.csv");
    let rep = FeketeReport {
        schema_version: SCHEMA_VERSION,
        m: cfg.fekete.m,
        objective: res.objective,
        energy: res.energy,
        max_potential: res.max_potential,
        converged: res.converged,
        gradient_norm: res.gradient_norm,
        iterations: res.iterations,
        restarts_used: res.restarts_used,
        separation: audit_separation(&s.model.geometry, &res.config, 1.0 / 3.0),
        energy_bounds: audit_energy_bounds(&res, &sol),
        equilibrium_value: sol.value,
        config_csv: csv.then(|| cname.clone()),
    };
    let mut files = vec![(format!("{stem}.json"), json(&rep)?)];
    if csv {
        files.push((cname, csv_bytes(|b| io::write_points_csv(b, &res.config))?));
    }
    let status = if res.converged { solved(&sol) } else { Status::NonConverged };
    Ok(Artifacts { files, status })
}

#[derive(Serialize)]
struct SampleReport {
    schema_version: u32,
    n: usize,
    trials: u64,
    failures: u64,
    failure_rate: f64,
    master_seed: u64,
    /// Largest distance of an Abel sum from the first one (torus only).
    abel_spread: Option<f64>,
    zeros_csv: Option<String>,
}

pub fn sample(cfg: &RunConfig, stem: &str) -> Result<Artifacts> {
    let model = cfg.model().map_err(config_err)?;
    let g = model.geometry;
    let n = *cfg.ensemble.n.first().ok_or_else(|| Error::Config { path: "ensemble.n".into(), message: "empty".into() })?;
    let space = SectionSpace::new(&g, n)?;
    let seed = cfg.ensemble.seed;
    let mut zeros: Vec<(u64, AtomicConfiguration)> = vec![];
    let mut failures = 0;
    for t in 0..cfg.ensemble.trials {
        match space.sample(seed, t) {
            Ok(s) => zeros.push((t, s.zeros)),
            Err(_) => failures += 1,
        }
    }
    let abel_spread = g.tau().and_then(|tau| {
        let sums: Vec<_> = zeros.iter().map(|(_, z)| abel_sum(z, tau)).collect();
        let first = *sums.first()?;
        Some(sums.iter().map(|s| torus_class_distance(*s, first, tau)).fold(0.0, f64::max))
    });
    let trials = cfg.ensemble.trials;
    let failure_rate = if trials > 0 { failures as f64 / trials as f64 } else { 0.0 };
    let csv = cfg.output.csv();
    let zname = format!("{stem}.zeros.csv");
    let rep = SampleReport {
        schema_version: SCHEMA_VERSION,
        n,
        trials,
        failures,
        failure_rate,
        master_seed: seed,
        abel_spread,
        zeros_csv: csv.then(|| zname.clone()),
    };
    let mut files = vec![(format!("{stem}.json"), json(&rep)?)];
    if csv {
        files.push((zname, csv_bytes(|b| io::write_zeros_csv(b, zeros.iter().map(|(t, z)| (*t, z))))?));
    }
    let status = if failure_rate < holeprob::ratelab::MAX_FAILURE_RATE { Status::Ok } else { Status::InvalidRun };
    Ok(Artifacts { files, status })
}

fn ledgers(cfg: &RunConfig, model: &SurfaceModel, hole: &HoleRegion) -> Result<Vec<TrialLedger>> {
    let g = model.geometry;
    cfg.ensemble
        .n
        .iter()
        .map(|&n| {
            let space = SectionSpace::new(&g, n)?;
            estimate_hole_probability(&space, &g, hole, cfg.ensemble.trials, cfg.ensemble.seed)
        })
        .collect()
}

fn ledger_status(ls: &[TrialLedger]) -> Status {
    if ls.iter().all(|l| l.valid) {
        Status::Ok
    } else {
        Status::InvalidRun
    }
}

#[derive(Serialize)]
struct HoleProbReport {
    schema_version: u32,
    ledgers: Vec<TrialLedger>,
}

pub fn holeprob(cfg: &RunConfig, stem: &str) -> Result<Artifacts> {
    let model = cfg.model().map_err(config_err)?;
    let hole = cfg.hole(&model).map_err(config_err)?;
    let ls = ledgers(cfg, &model, &hole)?;
    let status = ledger_status(&ls);
    let rep = HoleProbReport { schema_version: SCHEMA_VERSION, ledgers: ls };
    Ok(Artifacts { files: vec![(format!("{stem}.json"), json(&rep)?)], status })
}

#[derive(Serialize)]
struct RateCheckReport {
    schema_version: u32,
    report: RateReport,
    ledgers: Vec<TrialLedger>,
    plot_csv: Option<String>,
}

pub fn ratecheck(cfg: &RunConfig, stem: &str) -> Result<Artifacts> {
    let s = setup(cfg)?;
    let sol = solve_equilibrium_i(s.disc.clone(), &cfg.solver.options())?;
    let ls = ledgers(cfg, &s.model, &s.disc.hole)?;
    let report = rate_check(&ls, &sol);
    let mut plot = vec![];
    for r in &report.rows {
        if let Some(rate) = r.rate {
            plot.push(PlotRow { x: r.n as f64, y: rate, ylow: r.rate_low, yhigh: r.rate_high.unwrap_or(f64::INFINITY), series: "rate".into() });
        }
        plot.push(PlotRow { x: r.n as f64, y: sol.value, ylow: sol.lower_bound, yhigh: sol.value, series: "min_I".into() });
    }
    let csv = cfg.output.csv();
    let pname = format!("{stem}.plot.csv");
    let status = ledger_status(&ls).worst(solved(&sol));
    let rep = RateCheckReport { schema_version: SCHEMA_VERSION, report, ledgers: ls, plot_csv: csv.then(|| pname.clone()) };
    let mut files = vec![(format!("{stem}.json"), json(&rep)?)];
    if csv {
        files.push((pname, csv_bytes(|b| io::write_plot_csv(b, &plot))?));
    }
    Ok(Artifacts { files, status })
}

#[derive(Serialize)]
struct SweepReport {
    schema_version: u32,
    sweep: RSweep,
    plot_csv: Option<String>,
}

pub fn rsweep(cfg: &RunConfig, stem: &str) -> Result<Artifacts> {
    let model = Arc::new(cfg.model().map_err(config_err)?);
    let center = cfg.hole(&model).map_err(config_err)?.center;
    let sw = r_sweep(model, center, &cfg.sweep.radii, &cfg.solver.options(), cfg.sweep.rel_tol, cfg.sweep.witness)?;
    let mut plot = vec![];
    for r in &sw.rows {
        plot.push(PlotRow { x: r.r, y: r.value, ylow: r.lower_bound, yhigh: r.value, series: "min_I".into() });
        if let Some(w) = r.witness {
            plot.push(PlotRow { x: r.r, y: w, ylow: r.value, yhigh: w, series: "witness".into() });
        }
    }
    let status = if sw.excluded.is_empty() { Status::Ok } else { Status::NonConverged };
    let csv = cfg.output.csv();
    let pname = format!("{stem}.plot.csv");
    let rep = SweepReport { schema_version: SCHEMA_VERSION, sweep: sw, plot_csv: csv.then(|| pname.clone()) };
    let mut files = vec![(format!("{stem}.json"), json(&rep)?)];
    if csv {
        files.push((pname, csv_bytes(|b| io::write_plot_csv(b, &plot))?));
    }
    Ok(Artifacts { files, status })
}

#[derive(Serialize)]
struct AuditReport {
    schema_version: u32,
    value: f64,
    duality_gap: f64,
    converged: bool,
    frostman: FrostmanCertificate,
    frostman_holds: bool,
    boundary_layer_mass: f64,
    forbidden_area: f64,
    regularity: Option<RegularityReport>,
}

pub fn audit(cfg: &RunConfig, stem: &str) -> Result<Artifacts> {
    let s = setup(cfg)?;
    let sol = solve_equilibrium_i(s.disc.clone(), &cfg.solver.options())?;
    let cert = frostman_residuals(&sol.measure, &sol.potential, &sol.field);
    let sup = classify_support(&sol);
    let regularity = (s.disc.n_bdry > 0).then(|| regularity_audit(&sol, 2000, cfg.ensemble.seed));
    let tol = 1e-3_f64.max(10.0 * cfg.solver.tol);
    let rep = AuditReport {
        schema_version: SCHEMA_VERSION,
        value: sol.value,
        duality_gap: sol.duality_gap,
        converged: sol.converged,
        frostman: cert,
        frostman_holds: cert.holds(tol),
        boundary_layer_mass: sup.boundary_layer_mass,
        forbidden_area: sup.forbidden_area,
        regularity,
    };
    Ok(Artifacts { files: vec![(format!("{stem}.json"), json(&rep)?)], status: solved(&sol) })
}
