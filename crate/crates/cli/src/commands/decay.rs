use std::f64::consts::{FRAC_PI_2, PI};

use crate::args::{RunArgs, SolverName};
use crate::commands::{check_norm, file_name, fmt_d, fmt_phase, run_solver, Defaults, Report, Run};
use crate::error::CliResult;
use crate::output::print_lines;
use crate::sweep::SweepDefaults;

const ALLOWED: &[SolverName] = &[SolverName::Lattice, SolverName::Dde, SolverName::Collision];

pub fn run(args: &RunArgs) -> CliResult<Report> {
    let defaults = Defaults {
        sweep: SweepDefaults {
            d: (1..=6).collect(),
            phi_c: vec![0.0, FRAC_PI_2, PI],
        },
        solvers: &[SolverName::Lattice, SolverName::Dde],
        allowed: ALLOWED,
        t_max: 20.0,
        dt: 0.01,
        widen: false,
    };
    let (run, solvers, t_max, dt) = Run::prepare("decay", args, defaults)?;

    let per_cell = run.for_each_cell(|cell| {
        let gamma = cell.config.derived().gamma;
        let reference = move |t: f64| (-gamma * t).exp();
        let mut rows = Vec::new();
        let mut violations = Vec::new();
        for &solver in &solvers {
            let tr = run_solver(solver, &cell.config, t_max, dt)?;
            check_norm(&tr, &format!("{} {}", cell.stem, solver.as_str()), &mut violations);
            let stem = format!("{}_{}", cell.stem, solver.as_str());
            let path = run.write_trajectory(cell, &tr, &stem, Some(&reference), None)?;
            let t_end = t_max.min(tr.t_max_valid);
            let dev = tr.max_population_deviation(0.0, t_end, reference);
            let last = tr.populations().last().copied().unwrap_or(f64::NAN);
            rows.push(format!(
                "{},{},{},{gamma:.10e},{t_end:.6},{dev:.10e},{last:.10e},{}",
                fmt_d(cell.d),
                fmt_phase(cell.phi_c),
                solver.as_str(),
                file_name(&path)
            ));
        }
        Ok((rows, violations))
    })?;

    let mut report = Report::default();
    let mut rows = Vec::new();
    for (r, v) in per_cell {
        rows.extend(r);
        report.violations.extend(v);
    }
    print_lines(&rows);
    run.write_table(
        "decay_summary.csv",
        "d,phi_c,solver,gamma,t_compared,max_dev_exp,final_pop,file",
        &rows,
    )?;
    if args.plot_script {
        run.write_plot_script("decay.gp", &plot_body(&run, &solvers))?;
    }
    Ok(report)
}

/// One panel per spacing, one curve per phase and solver.
fn plot_body(run: &Run, solvers: &[SolverName]) -> String {
    let mut ds: Vec<Option<usize>> = run.cells.iter().map(|c| c.d).collect();
    ds.dedup();
    let cols = ds.len().clamp(1, 3);
    let rows = ds.len().div_ceil(cols);
    let mut s = String::new();
    s += "set terminal pngcairo size 1400,900\nset output 'decay.png'\n";
    s += &format!("set multiplot layout {rows},{cols} title 'atomic population'\n");
    s += "set xlabel 'Jt'\nset ylabel '|eps|^2'\nset yrange [0:1.05]\n";
    for d in ds {
        s += &format!("set title 'd = {}'\n", fmt_d(d));
        let mut curves = Vec::new();
        for cell in run.cells.iter().filter(|c| c.d == d) {
            for solver in solvers {
                let file = format!("{}_{}.csv", cell.stem, solver.as_str());
                curves.push(format!(
                    "'{file}' using 1:4 with lines title '{} phi_c={}'",
                    solver.as_str(),
                    fmt_phase(cell.phi_c)
                ));
            }
        }
        if let Some(first) = run.cells.iter().find(|c| c.d == d) {
            let file = format!("{}_{}.csv", first.stem, solvers[0].as_str());
            curves.push(format!(
                "'{file}' using 1:5 with lines dashtype 2 lc rgb 'black' title 'exp(-Gamma t)'"
            ));
        }
        s += &format!("plot {}\n", curves.join(", \\\n     "));
    }
    s += "unset multiplot\n";
    s
}
