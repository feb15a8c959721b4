use std::f64::consts::FRAC_PI_2;

use giant_atom::collision::run_collision_chain;

use crate::args::{CollisionArgs, Format, SolverName};
use crate::commands::{check_norm, file_name, fmt_d, fmt_phase, Defaults, Report, Run};
use crate::error::{CliError, CliResult};
use crate::output::print_lines;
use crate::sweep::SweepDefaults;

pub fn run(args: &CollisionArgs) -> CliResult<Report> {
    if args.bins && args.run.format != Format::Json {
        return Err(CliError::usage("--bins needs --format json"));
    }
    let defaults = Defaults {
        sweep: SweepDefaults {
            d: vec![2],
            phi_c: vec![FRAC_PI_2],
        },
        solvers: &[SolverName::Collision],
        allowed: &[SolverName::Collision],
        t_max: 20.0,
        dt: 0.01,
        widen: false,
    };
    let (run, _, t_max, dt) = Run::prepare("collision", &args.run, defaults)?;
    let per_cell = run.for_each_cell(|cell| {
        let gamma = cell.config.derived().gamma;
        let reference = move |t: f64| (-gamma * t).exp();
        let result = run_collision_chain(&cell.config, t_max, dt)?;
        let mut violations = Vec::new();
        check_norm(&result.trajectory, &cell.stem, &mut violations);
        let bins = args.bins.then_some(&result.chain);
        let path = run.write_trajectory(cell, &result.trajectory, &cell.stem, Some(&reference), bins)?;
        let chain = &result.chain;
        let row = format!(
            "{},{},{},{:.10e},{:.10e},{:.10e},{:.3e},{}",
            fmt_d(cell.d),
            fmt_phase(cell.phi_c),
            chain.ell,
            chain.eps.norm_sqr(),
            chain.right_weight(),
            chain.left_weight(),
            result.trajectory.max_norm_drift.unwrap_or(0.0),
            file_name(&path)
        );
        Ok((row, violations))
    })?;
    let mut report = Report::default();
    let mut rows = Vec::new();
    for (r, v) in per_cell {
        rows.push(r);
        report.violations.extend(v);
    }
    print_lines(&rows);
    run.write_table(
        "collision_summary.csv",
        "d,phi_c,ell,final_pop,right_weight,left_weight,norm_drift,file",
        &rows,
    )?;
    if args.run.plot_script {
        let curves: Vec<String> = run
            .cells
            .iter()
            .map(|c| {
                format!(
                    "'{}.csv' using 1:4 with lines title 'd={} phi_c={}'",
                    c.stem,
                    fmt_d(c.d),
                    fmt_phase(c.phi_c)
                )
            })
            .collect();
        let body = format!(
            "set terminal pngcairo size 900,500\nset output 'collision.png'\nset xlabel 'Jt'\nset ylabel '|eps|^2'\nplot {}\n",
            curves.join(", \\\n     ")
        );
        run.write_plot_script("collision.gp", &body)?;
    }
    Ok(report)
}
