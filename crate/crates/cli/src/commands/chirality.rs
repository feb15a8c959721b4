use std::f64::consts::FRAC_PI_2;

use giant_atom::collision::{chain_emission_fractions, emission_fractions, run_collision_chain};
use giant_atom::dde::{integrate, DdeSpec};
use giant_atom::field::{field_at_coupling_points, FieldSpec};
use giant_atom::lattice::{evolve_with, LatticeOptions};
use giant_atom::markov::lindblad_rate;
use giant_atom::SystemConfig;

use crate::args::{RunArgs, SolverName};
use crate::commands::{check_norm, dde_substeps, fmt_d, fmt_phase, Defaults, Report, Run};
use crate::error::{CliError, CliResult};
use crate::output::print_lines;
use crate::output::write_atomic;
use crate::sweep::SweepDefaults;

/// Residual population at which the emitted field is counted.
const DECAYED: f64 = 1e-3;

pub fn run(args: &RunArgs) -> CliResult<Report> {
    let defaults = Defaults {
        sweep: SweepDefaults {
            d: vec![1],
            phi_c: vec![FRAC_PI_2],
        },
        solvers: &[SolverName::Lattice, SolverName::Collision],
        allowed: &[SolverName::Lattice, SolverName::Collision],
        t_max: 0.0,
        dt: 0.01,
        widen: false,
    };
    let mut args = args.clone();
    if args.t_max.is_none() {
        args.t_max = Some(default_t_max(&args)?);
    }
    let defaults = Defaults {
        t_max: args.t_max.unwrap_or_default(),
        widen: args.config.is_none(),
        ..defaults
    };
    let (run, solvers, t_max, dt) = Run::prepare("chirality", &args, defaults)?;

    let per_cell = run.for_each_cell(|cell| {
        let mut rows = Vec::new();
        let mut violations = Vec::new();
        let pop_of = |s: &str, f: f64, b: f64, p: f64| {
            format!(
                "{},{},{s},{f:.10e},{b:.10e},{p:.10e}",
                fmt_d(cell.d),
                fmt_phase(cell.phi_c)
            )
        };
        for &solver in &solvers {
            match solver {
                SolverName::Lattice => {
                    let tr = evolve_with(&cell.config, t_max, &LatticeOptions::new(dt).with_final_state())?;
                    check_norm(&tr, &cell.stem, &mut violations);
                    let state = tr.final_state.as_ref().expect("final state requested");
                    let (f, b) = emission_fractions(&cell.config, state)?;
                    rows.push(pop_of("lattice", f, b, state.eps.norm_sqr()));
                }
                SolverName::Collision => {
                    let result = run_collision_chain(&cell.config, t_max, dt)?;
                    check_norm(&result.trajectory, &cell.stem, &mut violations);
                    let (f, b) = chain_emission_fractions(&result.chain)?;
                    rows.push(pop_of("collision", f, b, result.chain.eps.norm_sqr()));
                }
                SolverName::Dde => unreachable!("rejected by prepare"),
            }
        }
        if cell.config.legs() == 2 {
            let spec = DdeSpec::from_config(&cell.config)?;
            let tr = integrate(&spec, t_max, dde_substeps(spec.t_d, dt))?;
            let comps = field_at_coupling_points(&tr, &FieldSpec::from_config(&cell.config)?)?;
            let path = run.path(&format!("{}_field.csv", cell.stem));
            let header = run.manifest.csv_header(cell, Some("dde"), None);
            write_atomic(&path, |w| Ok(comps.write_csv(w, Some(&header))?))?;
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
    run.write_table("chirality.csv", "d,phi_c,solver,forward,backward,final_pop", &rows)?;
    if args.plot_script {
        let curves: Vec<String> = run
            .cells
            .iter()
            .filter(|c| c.config.legs() == 2)
            .map(|c| {
                format!(
                    "'{0}_field.csv' using 1:(sqrt(($2+$4)**2+($3+$5)**2)) with lines title 'c1_b d={1} phi_c={2}', \\\n     \
                     '{0}_field.csv' using 1:(sqrt($6**2+$7**2)) with lines title 'c1_f d={1} phi_c={2}'",
                    c.stem,
                    fmt_d(c.d),
                    fmt_phase(c.phi_c)
                )
            })
            .collect();
        if !curves.is_empty() {
            let body = format!(
                "set terminal pngcairo size 900,500\nset output 'field.png'\nset xlabel 'Jt'\nset ylabel '|c|'\nplot {}\n",
                curves.join(", \\\n     ")
            );
            run.write_plot_script("field.gp", &body)?;
        }
    }
    Ok(report)
}

/// Long enough for the slowest cell to decay below [`DECAYED`] at the
/// Markovian rate, with a 20% margin.
fn default_t_max(args: &RunArgs) -> CliResult<f64> {
    let base = crate::sweep::load_template(args.config.as_deref())?;
    let probe = crate::sweep::expand(
        "probe",
        args,
        &base,
        SweepDefaults {
            d: vec![1],
            phi_c: vec![FRAC_PI_2],
        },
    )?;
    let mut t: f64 = 0.0;
    for cell in probe {
        let rate = markov_rate(&cell.config);
        if rate <= 1e-9 {
            return Err(CliError::usage(format!(
                "d={} phi_c={} does not decay (bound state); pass --t-max",
                fmt_d(cell.d),
                fmt_phase(cell.phi_c)
            )));
        }
        t = t.max(1.2 * (1.0 / DECAYED).ln() / rate);
    }
    Ok(t.ceil())
}

fn markov_rate(cfg: &SystemConfig) -> f64 {
    let k = cfg.derived();
    match (k.phi_c, cfg.spacing()) {
        (Some(phi_c), Some(d)) if cfg.legs() == 2 => lindblad_rate(k.gamma, phi_c, k.k_a, d as f64),
        _ => cfg.legs() as f64 * k.gamma / 2.0,
    }
}
