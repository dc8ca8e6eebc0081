//! The canned computations behind each subcommand.

use std::f64::consts::LN_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{RunConfig, Scenario};
use super::ensemble_file::{parse_ensemble, parse_ensemble_file};
use super::output::{Artifacts, Cell, Table};
use super::svg::{line_plot, Series};
use crate::bath::{
    moments_estimate, state_along, BathSpec, MomentRoute, Parameter, STANDARD_CUTOFFS,
    STANDARD_DAMPINGS, STANDARD_TEMPERATURES,
};
use crate::cells;
use crate::error::{Error, Result};
use crate::gaussian::{entropy, symplectic_param, OscillatorParams};
use crate::info::{self, sampling, Ensemble, Povm};
use crate::oracle::{convergence_report, FrequencyGrid};
use crate::thermo::{
    composed_process, cumulative_heat, mass_process, path_profile, ProcessPath,
};
use crate::units::Constants;

const C: Constants = Constants::NATURAL;

/// The textbook pair `{1/2 |0>, 1/2 |+>}`, used when no ensemble file is given.
const DEFAULT_ENSEMBLE: &str = "\
2 2
0.5
1+0j 0+0j
0+0j 0+0j
0.5
0.5+0j 0.5+0j
0.5+0j 0.5+0j
";

struct Units {
    scale: f64,
    suffix: &'static str,
}

impl Units {
    fn new(bits: bool) -> Self {
        if bits {
            Units {
                scale: 1.0 / LN_2,
                suffix: "bits",
            }
        } else {
            Units {
                scale: 1.0,
                suffix: "nats",
            }
        }
    }

    fn col(&self, name: &str) -> String {
        format!("{name}_{}", self.suffix)
    }
}

/// Unit oscillator (`M = omega = 1`) and the bath for the given ratios.
fn physical(t: f64, g: f64, wd: f64) -> Result<(OscillatorParams, BathSpec)> {
    let o = OscillatorParams::unit();
    let b = BathSpec::from_ratios(&o, t, g, wd, &C)?;
    Ok((o, b))
}

fn or_default(v: &Option<Vec<f64>>, d: &[f64]) -> Vec<f64> {
    v.clone().unwrap_or_else(|| d.to_vec())
}

fn grid3(t: &[f64], g: &[f64], w: &[f64]) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for &a in t {
        for &b in g {
            for &c in w {
                out.push((a, b, c));
            }
        }
    }
    out
}

fn grid4(t: &[f64], g: &[f64], w: &[f64], m: &[f64]) -> Vec<(f64, f64, f64, f64)> {
    let mut out = Vec::new();
    for (a, b, c) in grid3(t, g, w) {
        for &d in m {
            out.push((a, b, c, d));
        }
    }
    out
}

pub fn run(cfg: &RunConfig, scenario: Scenario) -> Result<Artifacts> {
    cfg.validate()?;
    match scenario {
        Scenario::Moments => moments(cfg),
        Scenario::Oracle => oracle(cfg),
        Scenario::Sweep => sweep(cfg),
        Scenario::ViolationScan => violation_scan(cfg),
        Scenario::Resolve => resolve(cfg),
        Scenario::Holevo => holevo(cfg),
    }
}

fn moments(cfg: &RunConfig) -> Result<Artifacts> {
    let u = Units::new(cfg.bits);
    let ts = or_default(&cfg.temperatures, &STANDARD_TEMPERATURES);
    let gs = or_default(&cfg.dampings, &STANDARD_DAMPINGS);
    let ws = or_default(&cfg.cutoffs, &STANDARD_CUTOFFS);
    let points = grid3(&ts, &gs, &ws);
    let results: Vec<_> = points
        .par_iter()
        .map(|&(t, g, w)| -> Result<_> {
            let (o, b) = physical(t, g, w)?;
            let route = cfg.route.unwrap_or_else(|| MomentRoute::default_for(&o, &b, &C));
            let est = moments_estimate(&o, &b, &C, route)?;
            let v = symplectic_param(&est.moments, &C)?;
            Ok((route, est, v))
        })
        .collect();

    let ent = u.col("entropy");
    let mut table = Table::new(&[
        "temperature", "damping", "cutoff", "route", "f1", "f2", "cross", "uncertainty_slack",
        "symplectic", &ent, "rel_error",
    ]);
    let mut plot: Vec<Series> = Vec::new();
    for (&(t, g, w), r) in points.iter().zip(results) {
        match r {
            Ok((route, est, v)) => {
                let m = est.moments;
                let s = entropy(v) * u.scale;
                table.push(
                    cells![
                        t, g, w, route.to_string(), m.f1, m.f2, m.cross,
                        m.uncertainty_slack(&C), v.value(), s, est.rel_error
                    ],
                    "",
                );
                if w == ws[0] {
                    let label = format!("damping {g}");
                    match plot.iter_mut().find(|p| p.label == label) {
                        Some(p) => p.points.push((t.log10(), s)),
                        None => plot.push(Series {
                            label,
                            points: vec![(t.log10(), s)],
                        }),
                    }
                }
            }
            Err(e) => table.push_error(cells![t, g, w], &e.to_string()),
        }
    }
    let mut out = Artifacts::default();
    out.add_table("moments.csv", &table)?;
    if cfg.svg {
        out.add_file(
            "moments.svg",
            line_plot(
                &format!("Reduced-state entropy, cutoff {}", ws[0]),
                "log10 temperature",
                &ent,
                &plot,
            ),
        );
    }
    out.summary.push(format!("{} moment rows, {} failed", table.len(), table.failures()));
    Ok(out)
}

fn oracle(cfg: &RunConfig) -> Result<Artifacts> {
    let ts = or_default(&cfg.temperatures, &[1.0]);
    let gs = or_default(&cfg.dampings, &[1.0]);
    let ws = or_default(&cfg.cutoffs, &[50.0]);
    let mut table = Table::new(&[
        "temperature", "damping", "cutoff", "mode_count", "f1", "f2", "cross", "delta_f1",
        "delta_f2", "continuum_f1", "continuum_f2", "rel_dev_f1", "rel_dev_f2", "converged",
    ]);
    for (t, g, w) in grid3(&ts, &gs, &ws) {
        let run = || -> Result<_> {
            let (o, b) = physical(t, g, w)?;
            let route = cfg.route.unwrap_or_else(|| MomentRoute::default_for(&o, &b, &C));
            let cont = moments_estimate(&o, &b, &C, route)?.moments;
            let omega_max = cfg.omega_max_factor * b.cutoff.max(o.frequency);
            let rep = convergence_report(&o, &b, &cfg.mode_counts, omega_max, FrequencyGrid::default(), &C)?;
            Ok((cont, rep))
        };
        match run() {
            Ok((cont, rep)) => {
                for r in &rep.rows {
                    table.push(
                        cells![
                            t, g, w, r.mode_count, r.f1, r.f2, r.cross, r.delta_f1, r.delta_f2,
                            cont.f1, cont.f2, (r.f1 / cont.f1 - 1.0).abs(), (r.f2 / cont.f2 - 1.0).abs(),
                            rep.converged
                        ],
                        "",
                    );
                }
            }
            Err(e) => {
                for &n in &cfg.mode_counts {
                    table.push_error(cells![t, g, w, n], &e.to_string());
                }
            }
        }
    }
    let mut out = Artifacts::default();
    out.add_table("oracle.csv", &table)?;
    out.summary.push(format!("{} oracle rows, {} failed", table.len(), table.failures()));
    Ok(out)
}

fn sweep(cfg: &RunConfig) -> Result<Artifacts> {
    let u = Units::new(cfg.bits);
    let ts = or_default(&cfg.temperatures, &[0.05]);
    let gs = or_default(&cfg.dampings, &[5.0]);
    let ws = or_default(&cfg.cutoffs, &[100.0]);
    let param = cfg.sweep_parameter;
    let mf = cfg.mass_factors.as_ref().map_or(2.0, |v| v[0]);
    let ent = u.col("entropy");
    let dent = u.col("delta_entropy_so_far");
    let mut table = Table::new(&[
        "temperature", "damping", "cutoff", "parameter", "alpha", "f1", "f2", "symplectic", &ent,
        &dent, "heat_so_far", "clausius_slack", "heat_rate", "heat_rate_error",
    ]);
    let mut series_s = Vec::new();
    let mut series_q = Vec::new();
    for (t, g, w) in grid3(&ts, &gs, &ws) {
        let (start, end) = match param {
            Parameter::Mass => (cfg.sweep_start.unwrap_or(1.0), cfg.sweep_end.unwrap_or(mf)),
            Parameter::Damping => (cfg.sweep_start.unwrap_or(0.0), cfg.sweep_end.unwrap_or(g)),
        };
        let run = || -> Result<_> {
            let (o0, b0) = physical(t, g, w)?;
            let (o, b) = state_along(&o0, &b0, param, start)?;
            let path = ProcessPath::new(param, start, end, cfg.grid_points)?;
            let nodes = path_profile(&path, &o, &b, &C)?;
            let q = cumulative_heat(&path, &nodes);
            let states: Vec<_> = nodes
                .iter()
                .map(|n| state_along(&o, &b, param, n.alpha).map(|(_, bb)| bb.damping))
                .collect::<Result<_>>()?;
            Ok((nodes, q, states, b.temperature))
        };
        match run() {
            Ok((nodes, q, dampings, temp)) => {
                let s0 = nodes[0].entropy;
                let mut ps = Vec::new();
                let mut pq = Vec::new();
                for ((n, q), gd) in nodes.iter().zip(&q).zip(dampings) {
                    let ds = n.entropy - s0;
                    let slack = C.thermal_energy(temp) * ds - q;
                    table.push(
                        cells![
                            t, gd, w, param.to_string(), n.alpha, n.moments.f1, n.moments.f2,
                            n.symplectic, n.entropy * u.scale, ds * u.scale, *q, slack,
                            n.heat_rate, n.heat_rate_error
                        ],
                        "",
                    );
                    ps.push((n.alpha, ds * u.scale));
                    pq.push((n.alpha, *q));
                }
                let tag = format!("T {t}, damping {g}, cutoff {w}");
                series_s.push(Series {
                    label: format!("dS ({tag})"),
                    points: ps,
                });
                series_q.push(Series {
                    label: format!("Q ({tag})"),
                    points: pq,
                });
            }
            Err(e) => table.push_error(cells![t, g, w, param.to_string()], &e.to_string()),
        }
    }
    let mut out = Artifacts::default();
    out.add_table("sweep.csv", &table)?;
    if cfg.svg {
        series_s.extend(series_q);
        out.add_file(
            "sweep.svg",
            line_plot(&format!("Entropy change and heat along {param}"), &param.to_string(), "value", &series_s),
        );
    }
    out.summary.push(format!("{} sweep rows, {} failed", table.len(), table.failures()));
    Ok(out)
}

pub const FLAG_VIOLATION: &str = "VIOLATION(APPARENT)";
pub const FLAG_CONSISTENT: &str = "CONSISTENT";

fn violation_scan(cfg: &RunConfig) -> Result<Artifacts> {
    let u = Units::new(cfg.bits);
    let ts = or_default(&cfg.temperatures, &STANDARD_TEMPERATURES);
    let gs = or_default(&cfg.dampings, &STANDARD_DAMPINGS);
    let ws = or_default(&cfg.cutoffs, &STANDARD_CUTOFFS);
    let ms = or_default(&cfg.mass_factors, &[2.0]);
    let points = grid4(&ts, &gs, &ws, &ms);
    let results: Vec<_> = points
        .par_iter()
        .map(|&(t, g, w, m)| {
            let (o, b) = physical(t, g, w)?;
            mass_process(&o, &b, &C, m, cfg.grid_points)
        })
        .collect();
    let ds = u.col("delta_entropy");
    let mut table = Table::new(&[
        "temperature", "damping", "cutoff", "mass_factor", &ds, "heat", "heat_error",
        "clausius_slack", "flag",
    ]);
    let mut violations = 0;
    let mut plot: Vec<Series> = Vec::new();
    for (&(t, g, w, m), r) in points.iter().zip(results) {
        match r {
            Ok(r) => {
                let flag = if r.is_apparent_violation() {
                    violations += 1;
                    FLAG_VIOLATION
                } else {
                    FLAG_CONSISTENT
                };
                table.push(
                    cells![t, g, w, m, r.delta_entropy * u.scale, r.heat, r.heat_error, r.slack, flag],
                    "",
                );
                if w == ws[0] && m == ms[0] {
                    let label = format!("damping {g}");
                    let p = (t.log10(), r.slack);
                    match plot.iter_mut().find(|s| s.label == label) {
                        Some(s) => s.points.push(p),
                        None => plot.push(Series { label, points: vec![p] }),
                    }
                }
            }
            Err(e) => table.push_error(cells![t, g, w, m], &e.to_string()),
        }
    }
    let mut out = Artifacts::default();
    out.add_table("violation_scan.csv", &table)?;
    if cfg.svg {
        out.add_file(
            "violation_scan.svg",
            line_plot(
                &format!("Clausius slack of the mass step alone, cutoff {}, mass factor {}", ws[0], ms[0]),
                "log10 temperature",
                "kT dS - Q",
                &plot,
            ),
        );
    }
    out.summary.push(format!(
        "{} points, {violations} apparent violations, {} failed",
        table.len(),
        table.failures()
    ));
    Ok(out)
}

fn resolve(cfg: &RunConfig) -> Result<Artifacts> {
    let u = Units::new(cfg.bits);
    let ts = or_default(&cfg.temperatures, &[0.05]);
    let gs = or_default(&cfg.dampings, &[5.0]);
    let ws = or_default(&cfg.cutoffs, &[100.0]);
    let ms = or_default(&cfg.mass_factors, &[2.0]);
    let points = grid4(&ts, &gs, &ws, &ms);
    let results: Vec<_> = points
        .par_iter()
        .map(|&(t, g, w, m)| {
            let (o, b) = physical(t, g, w)?;
            composed_process(&o, &b, &C, m, cfg.grid_points)
        })
        .collect();
    let names: Vec<String> = ["delta_entropy_coupling", "delta_entropy_mass", "delta_entropy_total"]
        .iter()
        .map(|n| u.col(n))
        .collect();
    let mut table = Table::new(&[
        "temperature", "damping", "cutoff", "mass_factor", &names[0], "heat_coupling",
        &names[1], "heat_mass", &names[2], "heat_total", "heat_error_total",
        "clausius_slack_total", "clausius_satisfied", "mass_step_apparent_violation",
    ]);
    let mut unsatisfied = 0;
    for (&(t, g, w, m), r) in points.iter().zip(results) {
        match r {
            Ok(r) => {
                if !r.total.clausius_satisfied {
                    unsatisfied += 1;
                }
                table.push(
                    cells![
                        t, g, w, m,
                        r.coupling.delta_entropy * u.scale, r.coupling.heat,
                        r.mass.delta_entropy * u.scale, r.mass.heat,
                        r.total.delta_entropy * u.scale, r.total.heat, r.total.heat_error,
                        r.total.slack, r.total.clausius_satisfied, r.mass.is_apparent_violation()
                    ],
                    "",
                );
            }
            Err(e) => table.push_error(cells![t, g, w, m], &e.to_string()),
        }
    }
    let mut out = Artifacts::default();
    out.add_table("resolve.csv", &table)?;
    out.summary.push(format!(
        "{} points, {unsatisfied} with the Clausius inequality violated, {} failed",
        table.len(),
        table.failures()
    ));
    // A violated total is a result the run should not hide behind exit 0.
    out.failures += unsatisfied;
    Ok(out)
}

fn holevo(cfg: &RunConfig) -> Result<Artifacts> {
    let u = Units::new(cfg.bits);
    let e: Ensemble = match &cfg.ensemble {
        Some(p) => parse_ensemble_file(p)?,
        None => parse_ensemble(DEFAULT_ENSEMBLE)?,
    };
    let temperature = cfg.temperatures.as_ref().map_or(1.0, |v| v[0]);
    let chi = info::holevo_chi(&e)?;
    let budget = info::erasure_budget(&e, temperature, &C)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut random = Vec::with_capacity(cfg.random_povms);
    for k in 0..cfg.random_povms {
        random.push(sampling::random_povm(&mut rng, e.dim(), 2 + k % 3)?);
    }
    let random_best = if random.is_empty() {
        None
    } else {
        Some(info::best_of(&e, &random)?.0)
    };

    let (acc, povm, angles) = if e.dim() == 2 {
        let a = info::accessible_info_lower(&e, cfg.effort)?;
        (a.value, a.povm, Some((a.theta, a.phi)))
    } else {
        let mut candidates = vec![Povm::computational(e.dim())?];
        candidates.extend(random.iter().cloned());
        let (v, k) = info::best_of(&e, &candidates)?;
        (v, candidates.swap_remove(k), None)
    };

    let mut table = Table::new(&["quantity", "value"]);
    let row = |t: &mut Table, name: String, v: Cell| t.push(vec![Cell::Text(name), v], "");
    row(&mut table, "dimension".into(), Cell::Int(e.dim() as u64));
    row(&mut table, "states".into(), Cell::Int(e.len() as u64));
    row(&mut table, "temperature".into(), temperature.into());
    row(&mut table, u.col("holevo_chi"), (chi * u.scale).into());
    row(&mut table, u.col("accessible_info_lower"), (acc * u.scale).into());
    row(&mut table, u.col("random_povm_best"), random_best.map(|v| v * u.scale).into());
    row(&mut table, "bloch_theta".into(), angles.map(|a| a.0).into());
    row(&mut table, "bloch_phi".into(), angles.map(|a| a.1).into());
    row(&mut table, "q_martin".into(), budget.q_martin.into());
    row(&mut table, "q_amy".into(), budget.q_amy.into());
    row(&mut table, "q_shared".into(), budget.q_shared.into());

    let mut elements = Table::new(&["outcome", "row", "col", "re", "im"]);
    for (k, m) in povm.elements().iter().enumerate() {
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let z = m[(r, c)];
                elements.push(cells![k, r, c, z.re, z.im], "");
            }
        }
    }
    let mut out = Artifacts::default();
    out.add_table("holevo.csv", &table)?;
    out.add_table("holevo_povm.csv", &elements)?;
    out.summary.push(format!(
        "chi = {:.6} {s}, accessible information >= {:.6} {s}",
        chi * u.scale,
        acc * u.scale,
        s = u.suffix
    ));
    if acc > chi + 1e-10 {
        return Err(Error::numerical("holevo bound", format!("search value {acc} exceeds chi {chi}")));
    }
    Ok(out)
}
