use giant_atom::bic::{build_bic, verify_bic_numerically, BicReport};
use giant_atom::Error as ModelError;
use serde::Serialize;

use crate::args::RunArgs;
use crate::commands::{file_name, fmt_d, fmt_phase, Defaults, Report, Run};
use crate::error::{CliError, CliResult};
use crate::output::print_lines;
use crate::output::write_atomic;
use crate::sweep::SweepDefaults;

/// Eigenvalue window for the numerical search.
const EIGEN_TOLERANCE: f64 = 1e-8;

#[derive(Serialize)]
struct Analytic {
    exists: bool,
    m: Option<i64>,
    eps_pop: Option<f64>,
    eps: Option<[f64; 2]>,
    energy: Option<f64>,
    exterior_weight: Option<f64>,
}

#[derive(Serialize)]
struct BicArtifact<'a> {
    manifest_hash: &'a str,
    config_hash: String,
    d: Option<usize>,
    phi_c: String,
    analytic: Analytic,
    numerical: BicReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    profile_file: Option<String>,
}

pub fn run(args: &RunArgs) -> CliResult<Report> {
    if !args.solver.is_empty() || args.t_max.is_some() || args.dt.is_some() {
        return Err(CliError::usage("bic takes no --solver, --t-max or --dt"));
    }
    let defaults = Defaults {
        sweep: SweepDefaults {
            d: vec![2],
            phi_c: vec![0.0],
        },
        solvers: &[],
        allowed: &[],
        t_max: 1.0,
        dt: 1.0,
        widen: false,
    };
    let (run, _, _, _) = Run::prepare("bic", args, defaults)?;
    let rows = run.for_each_cell(|cell| {
        let hash = &run.manifest.manifest_hash;
        let (analytic, profile_file) = match build_bic(&cell.config) {
            Ok(state) => {
                let path = run.path(&format!("{}_profile.csv", cell.stem));
                let header = run.manifest.csv_header(cell, None, None);
                write_atomic(&path, |w| Ok(state.write_profile_csv(w, Some(&header))?))?;
                let exterior = state.exterior_weight(cell.config.first_site(), cell.config.last_site());
                let a = Analytic {
                    exists: state.exists,
                    m: Some(state.m),
                    eps_pop: Some(state.eps_pop),
                    eps: Some([state.eps.re, state.eps.im]),
                    energy: Some(state.energy),
                    exterior_weight: Some(exterior),
                };
                (a, Some(file_name(&path)))
            }
            Err(ModelError::NoBoundState) => {
                let a = Analytic {
                    exists: false,
                    m: None,
                    eps_pop: None,
                    eps: None,
                    energy: None,
                    exterior_weight: None,
                };
                (a, None)
            }
            Err(e) => return Err(e.into()),
        };
        let numerical = verify_bic_numerically(&cell.config, EIGEN_TOLERANCE)?;
        let line = format!(
            "{},{},{},{},{},{},{}",
            fmt_d(cell.d),
            fmt_phase(cell.phi_c),
            analytic.exists,
            analytic.eps_pop.map_or("-".into(), |p| format!("{p:.10}")),
            numerical.found,
            numerical.overlap_defect.map_or("-".into(), |o| format!("{o:.3e}")),
            numerical.candidates,
        );
        let has_profile = profile_file.is_some();
        let artifact = BicArtifact {
            manifest_hash: hash,
            config_hash: cell.config.config_hash(),
            d: cell.d,
            phi_c: fmt_phase(cell.phi_c),
            analytic,
            numerical,
            profile_file,
        };
        crate::output::write_json(&run.path(&format!("{}_report.json", cell.stem)), &artifact)?;
        Ok((line, has_profile))
    })?;
    let (rows, has_profile): (Vec<String>, Vec<bool>) = rows.into_iter().unzip();
    print_lines(&rows);
    run.write_table(
        "bic_summary.csv",
        "d,phi_c,exists,eps_pop,found_numerically,overlap_defect,candidates",
        &rows,
    )?;
    if args.plot_script {
        let mut body = String::from(
            "set terminal pngcairo size 900,500\nset output 'bic.png'\nset xlabel 'site'\nset ylabel '|c_x|^2'\n",
        );
        let curves: Vec<String> = run
            .cells
            .iter()
            .zip(&has_profile)
            .filter(|(_, &p)| p)
            .map(|(c, _)| {
                format!(
                    "'{}_profile.csv' using 1:4 with linespoints title 'd={} phi_c={}'",
                    c.stem,
                    fmt_d(c.d),
                    fmt_phase(c.phi_c)
                )
            })
            .collect();
        body += &format!("plot {}\n", curves.join(", \\\n     "));
        run.write_plot_script("bic.gp", &body)?;
    }
    Ok(Report::default())
}
