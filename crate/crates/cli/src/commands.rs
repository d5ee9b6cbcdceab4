//! One function per subcommand.

use std::path::{Path, PathBuf};

use biphoton::coincidence::{coincidence_probability, InputEnvelope};
use biphoton::cumulants::{g_cross, g_cross_tabulated, g_single_plus_one, KuboParams, Mode, OrderingCase, TimeQuad};
use biphoton::quadrature::FrequencyGrid;
use biphoton::schmidt::{entropy_scan as scan_sigma12, laguerre_coefficients, schmidt_decompose};
use biphoton::spectral::{amplitude_map as build_map, BiphotonAmplitude, CouplingModel};
use biphoton::stochastic::{estimate, Query};
use biphoton::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{GridRule, ScanAxis};
use crate::output::{num, prepare_dir, write_csv, write_json};
use crate::{CliError, RunConfig};

/// Files written by a command and any warnings for the user.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

fn require_couplings(cfg: &RunConfig) -> Result<&[CouplingModel], CliError> {
    if cfg.couplings.is_empty() {
        return Err(CliError::Config(
            "couplings: at least one coupling model is required".into(),
        ));
    }
    Ok(&cfg.couplings)
}

fn map_for(
    cfg: &RunConfig,
    coupling: &CouplingModel,
    g1: &FrequencyGrid,
    g2: &FrequencyGrid,
    envelope: InputEnvelope,
) -> Result<BiphotonAmplitude, CliError> {
    let p1 = cfg.spectral;
    let p2 = cfg.spectral2();
    Ok(build_map(
        &p1,
        &p2,
        coupling,
        g1,
        g2,
        |w1, w2| Complex64::new(envelope.value(w1, w2), 0.0),
        cfg.tol,
    )?)
}

#[derive(Serialize)]
struct GridInfo {
    n: usize,
    rule: GridRule,
    window1: (f64, f64),
    window2: (f64, f64),
}

fn grid_info(cfg: &RunConfig, g1: &FrequencyGrid, g2: &FrequencyGrid) -> GridInfo {
    let span = |g: &FrequencyGrid| (g.points()[0], g.points()[g.len() - 1]);
    GridInfo {
        n: cfg.grid.n,
        rule: cfg.grid.rule,
        window1: span(g1),
        window2: span(g2),
    }
}

#[derive(Serialize)]
struct MapEntry {
    file: String,
    coupling: CouplingModel,
    entropy: f64,
    schmidt_rank: usize,
    separable: bool,
    residual: f64,
}

#[derive(Serialize)]
struct MapReport {
    envelope: InputEnvelope,
    grid: GridInfo,
    maps: Vec<MapEntry>,
}

pub fn amplitude_map(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let couplings = require_couplings(cfg)?;
    let (g1, g2) = cfg.grids()?;
    prepare_dir(out)?;
    let mut outcome = Outcome::default();
    let mut maps = Vec::new();
    for (k, c) in couplings.iter().enumerate() {
        let a = map_for(cfg, c, &g1, &g2, cfg.envelope)?;
        let s = schmidt_decompose(&a)?;
        let name = format!("amplitude_{k}.csv");
        let rows = (0..g1.len()).flat_map(|i| {
            let a = &a;
            (0..g2.len()).map(move |j| {
                let v = a.values[(i, j)];
                vec![
                    num(a.grid1.points()[i]),
                    num(a.grid2.points()[j]),
                    num(v.norm()),
                    num(v.arg()),
                ]
            })
        });
        outcome.files.push(write_csv(
            out,
            &name,
            cfg,
            &header(&["omega1", "omega2", "abs", "arg"]),
            rows,
        )?);
        maps.push(MapEntry {
            file: name,
            coupling: *c,
            entropy: s.entropy(),
            schmidt_rank: s.rank(),
            separable: s.rank() == 1,
            residual: s.residual,
        });
    }
    let report = MapReport {
        envelope: cfg.envelope,
        grid: grid_info(cfg, &g1, &g2),
        maps,
    };
    outcome.files.push(write_json(out, "amplitude_map.json", cfg, &report)?);
    Ok(outcome)
}

#[derive(Serialize)]
struct ScanRow {
    value: f64,
    entropy: f64,
    /// Laguerre order on the `sigma12` axis, Schmidt rank otherwise.
    order: usize,
    residual: f64,
}

#[derive(Serialize)]
struct Peak {
    value: f64,
    entropy: f64,
    interior_maxima: usize,
}

#[derive(Serialize)]
struct ScanReport {
    axis: ScanAxis,
    points: Vec<ScanRow>,
    argmax: Option<Peak>,
}

pub fn entropy_scan(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let scan = cfg
        .scan
        .as_ref()
        .ok_or_else(|| CliError::Config("scan: section required for entropy-scan".into()))?;
    let values = scan.resolved_values()?;
    let (points, argmax) = match scan.axis {
        ScanAxis::Sigma12 => {
            let s = scan_sigma12(&values, cfg.schmidt.order)?;
            let peak = s.peak();
            let points = s
                .points
                .iter()
                .map(|p| ScanRow {
                    value: p.sigma12_sq,
                    entropy: p.entropy,
                    order: s.order,
                    residual: p.residual,
                })
                .collect();
            let argmax = Peak {
                value: peak.sigma12_sq,
                entropy: peak.entropy,
                interior_maxima: s.interior_maxima(),
            };
            (points, Some(argmax))
        }
        axis => {
            let (g1, g2) = cfg.grids()?;
            let coupling = |v: f64| -> Result<CouplingModel, CliError> {
                match axis {
                    ScanAxis::Xi => {
                        let sigma = scan
                            .sigma_phase
                            .ok_or_else(|| CliError::Config("scan.sigma_phase: required for the xi axis".into()))?;
                        Ok(CouplingModel::gaussian(v, sigma))
                    }
                    _ => {
                        let xi = scan
                            .xi
                            .ok_or_else(|| CliError::Config("scan.xi: required for the sigma_phase axis".into()))?;
                        Ok(CouplingModel::gaussian(xi, v))
                    }
                }
            };
            let points = values
                .par_iter()
                .map(|&v| {
                    let a = map_for(cfg, &coupling(v)?, &g1, &g2, cfg.envelope)?;
                    let s = schmidt_decompose(&a)?;
                    Ok(ScanRow {
                        value: v,
                        entropy: s.entropy(),
                        order: s.rank(),
                        residual: s.residual,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            (points, None)
        }
    };
    prepare_dir(out)?;
    let rows = points
        .iter()
        .map(|p| vec![num(p.value), num(p.entropy), p.order.to_string(), num(p.residual)]);
    let mut outcome = Outcome::default();
    outcome.files.push(write_csv(
        out,
        "entropy_scan.csv",
        cfg,
        &header(&[scan.axis.name(), "entropy", "order", "residual"]),
        rows,
    )?);
    let report = ScanReport {
        axis: scan.axis,
        points,
        argmax,
    };
    outcome.files.push(write_json(out, "entropy_scan.json", cfg, &report)?);
    Ok(outcome)
}

#[derive(Serialize)]
struct ModesReport {
    sigma12_sq: f64,
    order: usize,
    rank: usize,
    emitted: usize,
    entropy: f64,
    lambda_sq_sum: f64,
    residual: f64,
    warnings: Vec<String>,
}

pub fn schmidt_modes(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let sc = &cfg.schmidt;
    let sch = laguerre_coefficients(sc.sigma12_sq, sc.order)?.schmidt()?;
    let rank = sch.lambdas.len();
    let emitted = sc.modes.min(rank);
    let mut outcome = Outcome::default();
    if sc.modes > rank {
        outcome.warnings.push(format!(
            "requested {} modes but the numerical rank is {rank}; writing {rank}",
            sc.modes
        ));
    }
    prepare_dir(out)?;
    let rows = sch
        .lambdas
        .iter()
        .enumerate()
        .map(|(k, l)| vec![k.to_string(), num(*l), num(l * l)]);
    outcome.files.push(write_csv(
        out,
        "schmidt_lambdas.csv",
        cfg,
        &header(&["k", "lambda", "lambda_sq"]),
        rows,
    )?);

    let mut cols = vec!["x".to_string()];
    cols.extend((0..emitted).map(|k| format!("mode1_{k}")));
    cols.extend((0..emitted).map(|k| format!("mode2_{k}")));
    let step = sc.x_max / (sc.samples - 1) as f64;
    let rows: Vec<Vec<String>> = (0..sc.samples)
        .map(|i| {
            let x = i as f64 * step;
            let mut row = vec![num(x)];
            row.extend((0..emitted).map(|k| num(sch.mode_value(k, false, x))));
            row.extend((0..emitted).map(|k| num(sch.mode_value(k, true, x))));
            row
        })
        .collect();
    outcome
        .files
        .push(write_csv(out, "schmidt_modes.csv", cfg, &cols, rows)?);

    let report = ModesReport {
        sigma12_sq: sc.sigma12_sq,
        order: sc.order,
        rank,
        emitted,
        entropy: sch.entropy(),
        lambda_sq_sum: sch.lambdas.iter().map(|l| l * l).sum(),
        residual: sch.residual,
        warnings: outcome.warnings.clone(),
    };
    outcome.files.push(write_json(out, "schmidt_modes.json", cfg, &report)?);
    Ok(outcome)
}

#[derive(Debug, Clone, Serialize)]
pub struct McRow {
    pub case: String,
    pub query: Query,
    pub sigma_tau: f64,
    pub estimate: Complex64,
    pub se_re: f64,
    pub se_im: f64,
    pub n_traj: usize,
    pub analytic: f64,
    /// `null` when infinite.
    pub z: f64,
    pub pass: bool,
    /// Same comparison with the single-mode cumulant carrying `+1`.
    pub plus_one_analytic: f64,
    pub plus_one_z: f64,
    pub plus_one_pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditRow {
    pub case: OrderingCase,
    pub label: &'static str,
    pub times: TimeQuad,
    pub tabulated: f64,
    pub direct: f64,
    pub abs_diff: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct McReport {
    pub rows: Vec<McRow>,
    pub all_pass: bool,
    pub plus_one_all_pass: bool,
    pub z_max: f64,
    pub audit: Vec<AuditRow>,
}

fn plus_one_analytic(k: &KuboParams, q: &Query) -> f64 {
    match q {
        Query::Single { mode, t, tp } => (-g_single_plus_one(k, *mode, t - tp)).exp(),
        Query::Pair(tq) => {
            let (x, y) = tq.elapsed();
            (-(g_single_plus_one(k, Mode::One, x) + g_single_plus_one(k, Mode::Two, y) + g_cross(k, tq))).exp()
        }
    }
}

/// Places four descending times into the slots dictated by `case`.
pub fn quad_for_case(case: OrderingCase, t: [f64; 4]) -> TimeQuad {
    let [a, b, c, d] = t;
    match case {
        OrderingCase::A => TimeQuad {
            t1: a,
            t1p: b,
            t2: c,
            t2p: d,
        },
        OrderingCase::B => TimeQuad {
            t1: a,
            t2: b,
            t1p: c,
            t2p: d,
        },
        OrderingCase::C => TimeQuad {
            t1: a,
            t2: b,
            t2p: c,
            t1p: d,
        },
        OrderingCase::D => TimeQuad {
            t2: a,
            t1: b,
            t1p: c,
            t2p: d,
        },
        OrderingCase::E => TimeQuad {
            t2: a,
            t1: b,
            t2p: c,
            t1p: d,
        },
        OrderingCase::F => TimeQuad {
            t2: a,
            t2p: b,
            t1: c,
            t1p: d,
        },
    }
}

fn audit(k: &KuboParams) -> Result<Vec<AuditRow>, CliError> {
    let tau = k.tau12;
    let times = [3.0 * tau, 2.0 * tau, 1.0 * tau, 0.0];
    OrderingCase::ALL
        .iter()
        .map(|&case| {
            let q = quad_for_case(case, times);
            let tabulated = g_cross_tabulated(k, case, &q)?;
            let direct = g_cross(k, &q);
            Ok(AuditRow {
                case,
                label: case.label(),
                times: q,
                tabulated,
                direct,
                abs_diff: (tabulated - direct).abs(),
            })
        })
        .collect()
}

pub fn run_battery(cfg: &RunConfig) -> Result<McReport, CliError> {
    let battery = cfg.battery();
    let mut rows = Vec::new();
    for (i, case) in battery.iter().enumerate() {
        let mc = cfg.mc_config(i, case);
        mc.validate()
            .map_err(|e| CliError::Config(format!("mc case `{}`: {e}", case.label)))?;
        let estimates = estimate(&mc, &case.queries)?;
        for (q, e) in case.queries.iter().zip(estimates) {
            let analytic = q.exact(&case.params);
            let plus_one = plus_one_analytic(&case.params, q);
            let z = e.z_score(Complex64::new(analytic, 0.0));
            let pz = e.z_score(Complex64::new(plus_one, 0.0));
            rows.push(McRow {
                case: case.label.clone(),
                query: *q,
                sigma_tau: case.params.sigma1 * case.params.tau1,
                estimate: e.mean,
                se_re: e.se_re,
                se_im: e.se_im,
                n_traj: e.n,
                analytic,
                z,
                pass: z < cfg.mc.z_max,
                plus_one_analytic: plus_one,
                plus_one_z: pz,
                plus_one_pass: pz < cfg.mc.z_max,
            });
        }
    }
    let audit = match battery.first() {
        Some(case) => audit(&case.params)?,
        None => Vec::new(),
    };
    Ok(McReport {
        all_pass: rows.iter().all(|r| r.pass),
        plus_one_all_pass: rows.iter().all(|r| r.plus_one_pass),
        z_max: cfg.mc.z_max,
        rows,
        audit,
    })
}

pub fn mc_validate(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let report = run_battery(cfg)?;
    prepare_dir(out)?;
    let mut outcome = Outcome::default();
    if !report.all_pass {
        let failed = report.rows.iter().filter(|r| !r.pass).count();
        outcome.warnings.push(format!(
            "{failed} of {} rows exceed |z| < {}",
            report.rows.len(),
            report.z_max
        ));
    }
    outcome.files.push(write_json(out, "mc_validate.json", cfg, &report)?);
    Ok(outcome)
}

#[derive(Serialize)]
struct CoincidenceEntry {
    coupling: CouplingModel,
    pc: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct CoincidenceReport {
    envelope: InputEnvelope,
    grid: GridInfo,
    measure: f64,
    baseline_pc: f64,
    entries: Vec<CoincidenceEntry>,
}

pub fn coincidence(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let couplings = require_couplings(cfg)?;
    let (g1, g2) = cfg.grids()?;
    let pc = |c: &CouplingModel| -> Result<_, CliError> {
        let a = map_for(cfg, c, &g1, &g2, InputEnvelope::Flat)?;
        Ok(coincidence_probability(&a, cfg.envelope)?)
    };
    let base = pc(&CouplingModel::fixed(0.0, 0.0))?;
    let entries = couplings
        .iter()
        .map(|c| {
            let r = pc(c)?;
            Ok(CoincidenceEntry {
                coupling: *c,
                pc: r.pc,
                ratio: r.pc / base.pc,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    prepare_dir(out)?;
    let report = CoincidenceReport {
        envelope: cfg.envelope,
        grid: grid_info(cfg, &g1, &g2),
        measure: base.measure,
        baseline_pc: base.pc,
        entries,
    };
    let mut outcome = Outcome::default();
    outcome.files.push(write_json(out, "coincidence.json", cfg, &report)?);
    Ok(outcome)
}
