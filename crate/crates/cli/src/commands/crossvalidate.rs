use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::args::{RunArgs, SolverName};
use crate::commands::{check_norm, fmt_d, fmt_phase, population_gap, run_solver, Defaults, Report, Run};
use crate::error::{CliError, CliResult};
use crate::output::print_lines;
use crate::output::write_json;
use crate::sweep::SweepDefaults;

/// Reported lattice/DDE agreement level.
const TOLERANCE: f64 = 2e-2;

const ALL: &[SolverName] = &[SolverName::Lattice, SolverName::Dde, SolverName::Collision];

#[derive(Serialize)]
struct Pair {
    a: &'static str,
    b: &'static str,
    max_pop_gap: Option<f64>,
}

#[derive(Serialize)]
struct CellReport {
    d: Option<usize>,
    phi_c: String,
    config_hash: String,
    /// End of the comparison window, `min(t_max, lattice validity horizon)`.
    t_compared: f64,
    pairs: Vec<Pair>,
    within_tolerance: bool,
}

#[derive(Serialize)]
struct CrossReport<'a> {
    manifest_hash: &'a str,
    tolerance: f64,
    cells: Vec<CellReport>,
}

pub fn run(args: &RunArgs) -> CliResult<Report> {
    let defaults = Defaults {
        sweep: SweepDefaults {
            d: vec![2],
            phi_c: vec![0.0, FRAC_PI_2, PI],
        },
        solvers: ALL,
        allowed: ALL,
        t_max: 20.0,
        dt: 0.01,
        widen: false,
    };
    let (run, solvers, t_max, dt) = Run::prepare("crossvalidate", args, defaults)?;
    if solvers.len() < 2 {
        return Err(CliError::usage("crossvalidate needs at least two solvers"));
    }
    let per_cell = run.for_each_cell(|cell| {
        let mut violations = Vec::new();
        let mut runs = Vec::new();
        for &s in &solvers {
            let tr = run_solver(s, &cell.config, t_max, dt)?;
            check_norm(&tr, &format!("{} {}", cell.stem, s.as_str()), &mut violations);
            runs.push((s, tr));
        }
        let t_end = runs.iter().map(|(_, tr)| tr.t_max_valid).fold(t_max, f64::min);
        let mut pairs = Vec::new();
        for i in 0..runs.len() {
            for j in i + 1..runs.len() {
                let (sa, a) = &runs[i];
                let (sb, b) = &runs[j];
                let gap = population_gap(a, b, t_end).or_else(|| population_gap(b, a, t_end));
                pairs.push(Pair {
                    a: sa.as_str(),
                    b: sb.as_str(),
                    max_pop_gap: gap,
                });
            }
        }
        let within_tolerance = pairs.iter().all(|p| p.max_pop_gap.is_some_and(|g| g <= TOLERANCE));
        let report = CellReport {
            d: cell.d,
            phi_c: fmt_phase(cell.phi_c),
            config_hash: cell.config.config_hash(),
            t_compared: t_end,
            pairs,
            within_tolerance,
        };
        Ok((report, violations))
    })?;

    let mut report = Report::default();
    let mut cells = Vec::new();
    let mut rows = Vec::new();
    for (c, v) in per_cell {
        for p in &c.pairs {
            let gap = p.max_pop_gap.map_or("-".into(), |g| format!("{g:.6e}"));
            rows.push(format!(
                "{},{},{},{},{:.6},{gap}",
                fmt_d(c.d),
                c.phi_c,
                p.a,
                p.b,
                c.t_compared
            ));
        }
        cells.push(c);
        report.violations.extend(v);
    }
    print_lines(&rows);
    run.write_table(
        "crossvalidate.csv",
        "d,phi_c,solver_a,solver_b,t_compared,max_pop_gap",
        &rows,
    )?;
    let hash = run.manifest.manifest_hash.clone();
    write_json(
        &run.path("crossvalidate.json"),
        &CrossReport {
            manifest_hash: &hash,
            tolerance: TOLERANCE,
            cells,
        },
    )?;
    Ok(report)
}
