//! The four subcommands, each producing a [`Table`].

use crate::config::{Command, Pump, RunConfig};
use crate::output::{Cell, Table};
use qlaser_core::coeffs::analyze;
use qlaser_core::linear_theory::{linear_theory, LinearTheoryResult};
use qlaser_core::oracle::{
    continuity_residual, cutoff_policy, moments_exact, ode_residual, q_from_state, solve, steady_state, SteadyState,
};
use qlaser_core::params::{from_dimensionless, RateSet, ReducedParams};
use qlaser_core::qsolution::{asymptotic_profile, moments, q_gaussian, q_generating, select_solution, QProfile};
use qlaser_core::Error;
use rayon::prelude::*;

/// Policy cutoffs above this need `--heavy`.
pub const LIGHT_CUTOFF_LIMIT: usize = 2000;

/// Parameter columns of the comparison table: `(c, r)` with `I0 = 700`.
pub const TABLE_COLUMNS: [(f64, f64); 3] = [(100.0, 20.0), (1000.0, 200.0), (1e4, 2000.0)];
pub const TABLE_INTENSITY: f64 = 700.0;

/// Default triples for `validate`: `(I_s, c, r, cutoff)`.
pub const VALIDATION_POINTS: [(f64, f64, f64, Option<usize>); 3] = [
    (2.0, 40.0, 3.0, Some(80)),
    (1.0, 10.0, 1.0, Some(40)),
    (40.0, 20.0, 9.0, None),
];

pub struct Outcome {
    pub table: Table,
    pub success: bool,
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, crate::CliError> {
    let table = match cfg.command {
        Command::ScanPump => scan_pump(cfg),
        Command::Table => comparison_table(cfg),
        Command::Profile => profile(cfg)?,
        Command::Validate => validate(cfg),
    };
    let success = table.passed.unwrap_or(true);
    Ok(Outcome { table, success })
}

fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn header(t: &mut Table, cfg: &RunConfig) {
    if let Some(i_s) = cfg.i_s {
        t.meta("is", fmt_f64(i_s));
    }
    if !cfg.c.is_empty() {
        t.meta("c", cfg.c.iter().map(|c| fmt_f64(*c)).collect::<Vec<_>>().join(","));
    }
    match cfg.pump {
        Pump::Unset => {}
        Pump::Single(r) => t.meta("r", fmt_f64(r)),
        Pump::Ratio(k) => t.meta("r-ratio", fmt_f64(k)),
        Pump::Range { start, end, step } => {
            t.meta("r-range", format!("{start}:{end}"));
            t.meta("r-step", fmt_f64(step));
        }
    }
    t.meta("theta", fmt_f64(cfg.theta));
    if let Some(n) = cfg.cutoff {
        t.meta("cutoff", n.to_string());
    }
    if cfg.with_oracle {
        t.meta("with-oracle", "true");
    }
    if cfg.heavy {
        t.meta("heavy", "true");
    }
}

fn rates_for(params: &ReducedParams) -> RateSet {
    RateSet::from(*params)
}

/// Oracle steady state honoring the cutoff override and the heavy gate.
fn oracle_state(cfg: &RunConfig, rates: &RateSet) -> Result<SteadyState, String> {
    let fail = |e: Error| format!("oracle:{}", e.code());
    match cfg.cutoff {
        Some(n) => steady_state(rates, n).map_err(fail),
        None if !cfg.heavy && cutoff_policy(rates) > LIGHT_CUTOFF_LIMIT => Err("oracle:needs_heavy".into()),
        None => solve(rates).map_err(fail),
    }
}

fn reasons(list: Vec<String>) -> Cell {
    Cell::text(list.join(";"))
}

pub fn scan_pump(cfg: &RunConfig) -> Table {
    let mut columns = vec!["r", "I_s", "c", "I0", "Qf_lin", "branch_kind", "n_asym", "Qf_asym"];
    if cfg.with_oracle {
        columns.extend(["n_oracle", "Qf_oracle", "oracle_cutoff"]);
    }
    columns.push("reason");
    let mut t = Table::new("scan-pump", columns);
    header(&mut t, cfg);
    let i_s = cfg.i_s.expect("resolved config");
    let points: Vec<(f64, f64)> = cfg
        .c
        .iter()
        .flat_map(|&c| cfg.pump.values(c).into_iter().map(move |r| (c, r)))
        .collect();
    let rows: Vec<Vec<Cell>> = points.par_iter().map(|&(c, r)| scan_row(cfg, i_s, c, r)).collect();
    for row in rows {
        t.push(row);
    }
    t
}

fn scan_row(cfg: &RunConfig, i_s: f64, c: f64, r: f64) -> Vec<Cell> {
    let mut why = vec![];
    let mut row = vec![Cell::num(r), Cell::num(i_s), Cell::num(c)];
    let params = match ReducedParams::new(r, i_s, c) {
        Ok(p) => p,
        Err(e) => {
            let width = if cfg.with_oracle { 8 } else { 5 };
            row.extend(std::iter::repeat_n(Cell::Num(None), width));
            row[5] = Cell::text("");
            row.push(reasons(vec![format!("params:{}", e.code())]));
            return row;
        }
    };
    let lin = linear_theory(&params);
    if lin.qf_lin.is_none() {
        why.push("lin:outside_window".to_string());
    }
    row.push(Cell::num(lin.i0));
    row.push(Cell::opt(lin.qf_lin));
    row.push(Cell::text(select_solution(&params, cfg.theta).name()));
    match asymptotic_profile(&params, cfg.theta).and_then(|q| moments(&q)) {
        Ok(m) => {
            if m.mandel_qf.is_none() {
                why.push("asym:near_vacuum".into());
            }
            row.push(Cell::num(m.mean_photon));
            row.push(Cell::opt(m.mandel_qf));
        }
        Err(e) => {
            why.push(format!("asym:{}", e.code()));
            row.extend([Cell::Num(None), Cell::Num(None)]);
        }
    }
    if cfg.with_oracle {
        match oracle_state(cfg, &rates_for(&params)) {
            Ok(s) => {
                let m = moments_exact(&s);
                if m.mandel_qf.is_none() {
                    why.push("oracle:near_vacuum".into());
                }
                row.push(Cell::num(m.mean_photon));
                row.push(Cell::opt(m.mandel_qf));
                row.push(Cell::Int(Some(s.cutoff as u64)));
            }
            Err(code) => {
                why.push(code);
                row.extend([Cell::Num(None), Cell::Num(None), Cell::Int(None)]);
            }
        }
    }
    row.push(reasons(why));
    row
}

/// Saturation intensity that puts the classical intensity at `i0`.
pub fn saturation_for(i0: f64, r: f64, c: f64) -> f64 {
    2.0 * i0 / ((r - 1.0) - (r + 1.0) * (r + 1.0) / c)
}

pub fn comparison_table(cfg: &RunConfig) -> Table {
    let mut columns = vec!["c", "r", "I_s", "I0", "Qf_lin", "n_q0", "Qf_q0"];
    if cfg.heavy {
        columns.extend(["n_oracle", "Qf_oracle", "oracle_cutoff"]);
    }
    columns.push("reason");
    let mut t = Table::new("table", columns);
    t.meta("intensity", fmt_f64(TABLE_INTENSITY));
    if cfg.heavy {
        t.meta("heavy", "true");
    }
    let rows: Vec<Vec<Cell>> = TABLE_COLUMNS
        .par_iter()
        .map(|&(c, r)| {
            let i_s = saturation_for(TABLE_INTENSITY, r, c);
            let mut why = vec![];
            let params = ReducedParams::new(r, i_s, c).expect("table parameters are positive");
            let lin = linear_theory(&params);
            let mut row = vec![
                Cell::num(c),
                Cell::num(r),
                Cell::num(i_s),
                Cell::num(lin.i0),
                Cell::opt(lin.qf_lin),
            ];
            let q0 = analyze(&params)
                .and_then(|(table, _, roots)| q_generating(&params, &roots, &table))
                .and_then(|q| moments(&q));
            match q0 {
                Ok(m) => row.extend([Cell::num(m.mean_photon), Cell::opt(m.mandel_qf)]),
                Err(e) => {
                    why.push(format!("q0:{}", e.code()));
                    row.extend([Cell::Num(None), Cell::Num(None)]);
                }
            }
            if cfg.heavy {
                match oracle_state(cfg, &rates_for(&params)) {
                    Ok(s) => {
                        let m = moments_exact(&s);
                        row.extend([
                            Cell::num(m.mean_photon),
                            Cell::opt(m.mandel_qf),
                            Cell::Int(Some(s.cutoff as u64)),
                        ]);
                    }
                    Err(code) => {
                        why.push(code);
                        row.extend([Cell::Num(None), Cell::Num(None), Cell::Int(None)]);
                    }
                }
            }
            row.push(reasons(why));
            row
        })
        .collect();
    for row in rows {
        t.push(row);
    }
    t
}

pub fn profile(cfg: &RunConfig) -> Result<Table, crate::CliError> {
    let (i_s, c) = (cfg.i_s.expect("resolved config"), cfg.c[0]);
    let Pump::Single(r) = cfg.pump else { unreachable!("resolved config") };
    let params = ReducedParams::new(r, i_s, c)?;
    let mut columns = vec!["I", "Q_asym", "Q_gaussian"];
    if cfg.with_oracle {
        columns.push("Q_oracle");
    }
    let mut t = Table::new("profile", columns);
    header(&mut t, cfg);

    let lin: LinearTheoryResult = linear_theory(&params);
    let mut curves: Vec<(&str, Result<QProfile, String>)> = vec![
        ("asym", asymptotic_profile(&params, cfg.theta).map_err(|e| e.to_string())),
        ("gaussian", q_gaussian(&params, &lin).map_err(|e| e.to_string())),
    ];
    if cfg.with_oracle {
        let q = oracle_state(cfg, &rates_for(&params)).and_then(|s| q_from_state(&s).map_err(|e| e.to_string()));
        curves.push(("oracle", q));
    }
    for (name, q) in &curves {
        let status = match q {
            Ok(p) => p.kind.name().to_string(),
            Err(e) => format!("error: {e}"),
        };
        t.meta(format!("curve.{name}"), status);
    }
    let i_max = curves
        .iter()
        .filter_map(|(_, q)| q.as_ref().ok().map(|p| p.i_max))
        .fold(0.0, f64::max);
    t.meta("i_max", fmt_f64(i_max));
    if i_max > 0.0 {
        let n = cfg.points;
        for k in 0..n {
            let i = i_max * k as f64 / (n - 1) as f64;
            let mut row = vec![Cell::num(i)];
            for (_, q) in &curves {
                row.push(match q {
                    Ok(p) => Cell::num(p.value(i)),
                    Err(_) => Cell::Num(None),
                });
            }
            t.push(row);
        }
    }
    Ok(t)
}

struct Check {
    point: String,
    name: &'static str,
    value: Option<f64>,
    tolerance: Option<f64>,
    passed: bool,
    detail: String,
}

impl Check {
    fn bounded(point: &str, name: &'static str, value: Result<f64, String>, tolerance: f64) -> Check {
        match value {
            Ok(v) => Check {
                point: point.into(),
                name,
                value: Some(v),
                tolerance: Some(tolerance),
                passed: v.is_finite() && v <= tolerance,
                detail: String::new(),
            },
            Err(detail) => Check {
                point: point.into(),
                name,
                value: None,
                tolerance: Some(tolerance),
                passed: false,
                detail,
            },
        }
    }
}

pub fn validate(cfg: &RunConfig) -> Table {
    let mut t = Table::new("validate", vec!["point", "check", "value", "tolerance", "passed", "detail"]);
    header(&mut t, cfg);
    if let Some((id, factor)) = cfg.mutate {
        t.meta("mutate", format!("{id}={factor}"));
    }
    let points: Vec<(f64, f64, f64, Option<usize>)> = match (cfg.i_s, &cfg.pump) {
        (Some(i_s), Pump::Single(r)) => vec![(i_s, cfg.c[0], *r, cfg.cutoff)],
        _ => VALIDATION_POINTS.to_vec(),
    };
    let checks: Vec<Vec<Check>> = points
        .par_iter()
        .map(|&(i_s, c, r, n)| validate_point(cfg, i_s, c, r, n))
        .collect();
    let mut all = true;
    for c in checks.into_iter().flatten() {
        all &= c.passed;
        t.push(vec![
            Cell::text(c.point),
            Cell::text(c.name),
            Cell::opt(c.value),
            Cell::opt(c.tolerance),
            Cell::Bool(c.passed),
            Cell::text(c.detail),
        ]);
    }
    t.passed = Some(all);
    t
}

fn validate_point(cfg: &RunConfig, i_s: f64, c: f64, r: f64, cutoff: Option<usize>) -> Vec<Check> {
    let tol = cfg.tolerances;
    let point = format!("is={i_s} c={c} r={r}");
    let mut out = vec![];
    let err = |e: Error| e.to_string();
    let params = match ReducedParams::new(r, i_s, c) {
        Ok(p) => p,
        Err(e) => {
            out.push(Check::bounded(&point, "parameters", Err(err(e)), 0.0));
            return out;
        }
    };
    let rates = match from_dimensionless(r, i_s, c, 1.0) {
        Ok(x) => x,
        Err(e) => {
            out.push(Check::bounded(&point, "parameters", Err(err(e)), 0.0));
            return out;
        }
    };
    let state = match cutoff {
        Some(n) => steady_state(&rates, n),
        None => solve(&rates),
    };
    let (table, _, roots) = match analyze(&params) {
        Ok(x) => x,
        Err(e) => {
            out.push(Check::bounded(&point, "coefficients", Err(err(e)), 0.0));
            return out;
        }
    };
    match &state {
        Ok(s) => {
            out.push(Check::bounded(&point, "continuity", continuity_residual(s).map_err(err), tol.residual));
            let table = match cfg.mutate {
                Some((id, factor)) => table.perturbed(id, factor),
                None => table,
            };
            out.push(Check::bounded(&point, "ode_residual", Ok(ode_residual(s, &table).max), tol.residual));
            let q = q_from_state(s);
            let mass = q.as_ref().map_err(|e| err(e.clone())).and_then(|q| q.mass().map_err(err));
            out.push(Check::bounded(
                &point,
                "oracle_normalization",
                mass.map(|m| (m - 1.0).abs()),
                tol.normalization,
            ));
            let exact = moments_exact(s);
            let via_q = q.and_then(|q| moments(&q));
            out.push(Check::bounded(
                &point,
                "moment_identity",
                via_q.map_err(err).map(|m| {
                    let first = (m.mean_i_q - exact.mean_i_q).abs() / exact.mean_i_q;
                    first.max((m.second_moment_i_q - exact.second_moment_i_q).abs() / exact.second_moment_i_q)
                }),
                tol.moment,
            ));
        }
        Err(e) => out.push(Check::bounded(&point, "oracle_solve", Err(err(e.clone())), 0.0)),
    }
    let asym = asymptotic_profile(&params, cfg.theta).and_then(|q| q.mass());
    out.push(Check::bounded(
        &point,
        "asym_normalization",
        asym.map(|m| (m - 1.0).abs()).map_err(err),
        tol.normalization,
    ));
    if linear_theory(&params).valid {
        let (m4, p4) = (roots.i_minus4(), roots.i_plus4());
        let ok = matches!((m4, p4), (Some(a), Some(b)) if a < 0.0 && 0.0 < b);
        out.push(Check {
            point: point.clone(),
            name: "root_signs",
            value: None,
            tolerance: None,
            passed: ok,
            detail: format!("I-4={m4:?} I+4={p4:?}"),
        });
    }
    out
}
