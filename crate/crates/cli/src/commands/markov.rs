use giant_atom::markov::{markov_solution_set, solve_markov_phases, PhaseVector};
use giant_atom::phase::PhaseDisplay;
use serde::Serialize;

use crate::args::{Format, MarkovArgs};
use crate::commands::Report;
use crate::error::{CliError, CliResult};
use crate::manifest::{ManifestBody, RunManifest, SweepAxes, DETERMINISM};
use crate::output::{ensure_dir, print_lines, write_json};

#[derive(Serialize)]
struct Solution {
    phases: Vec<f64>,
    phases_text: Vec<String>,
    residuals: Vec<f64>,
    max_residual: f64,
    is_markovian: bool,
}

impl From<PhaseVector> for Solution {
    fn from(pv: PhaseVector) -> Self {
        Solution {
            phases_text: pv.phases.iter().map(|&p| PhaseDisplay(p).to_string()).collect(),
            max_residual: pv.max_residual(),
            phases: pv.phases,
            residuals: pv.residuals,
            is_markovian: pv.is_markovian,
        }
    }
}

#[derive(Serialize)]
struct MarkovOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    manifest_hash: Option<String>,
    legs: usize,
    /// `phi_L = pi/2` is fixed; ties go to the smallest `|phi_j|` in index order.
    canonical: Solution,
    #[serde(skip_serializing_if = "Option::is_none")]
    all: Option<Vec<Solution>>,
}

pub fn run(args: &MarkovArgs) -> CliResult<Report> {
    if !(2..=8).contains(&args.legs) {
        return Err(CliError::usage(format!("L must be between 2 and 8, got {}", args.legs)));
    }
    let canonical: Solution = solve_markov_phases(args.legs)?.into();
    let all = if args.all {
        Some(
            markov_solution_set(args.legs)?
                .into_iter()
                .map(|p| PhaseVector::from_phases(p).into())
                .collect(),
        )
    } else {
        None
    };
    let mut out = MarkovOutput {
        manifest_hash: None,
        legs: args.legs,
        canonical,
        all,
    };

    let mut report = Report::default();
    let mut check = |s: &Solution| {
        if !s.is_markovian {
            report.violations.push(format!(
                "solution {:?} has residual {:.3e}",
                s.phases_text, s.max_residual
            ));
        }
    };
    check(&out.canonical);
    out.all.iter().flatten().for_each(&mut check);

    if let Some(dir) = &args.out {
        let body = ManifestBody {
            tool: "giant-atom",
            version: env!("CARGO_PKG_VERSION"),
            command: format!("markov-solve {}{}", args.legs, if args.all { " --all" } else { "" }),
            config: None,
            config_hash: None,
            solvers: Vec::new(),
            sweep: SweepAxes {
                d: Vec::new(),
                phi_c: Vec::new(),
            },
            cells: Vec::new(),
            t_max: 0.0,
            dt: 0.0,
            format: "json",
            determinism: DETERMINISM,
        };
        let manifest = RunManifest::new(body, dir);
        ensure_dir(dir)?;
        manifest.write(dir)?;
        out.manifest_hash = Some(manifest.manifest_hash.clone());
        write_json(&dir.join(format!("markov_L{}.json", args.legs)), &out)?;
    }
    print(args, &out)?;
    Ok(report)
}

fn print(args: &MarkovArgs, out: &MarkovOutput) -> CliResult<()> {
    if args.format == Some(Format::Json) {
        print_lines(&[serde_json::to_string_pretty(out)?]);
        return Ok(());
    }
    let line = |s: &Solution| format!("({})  max residual {:.2e}", s.phases_text.join(", "), s.max_residual);
    let mut lines = vec![format!("L = {}", out.legs), format!("phases {}", line(&out.canonical))];
    if let Some(all) = &out.all {
        lines.push(format!("{} solutions with phi_1 = 0, phi_L = pi/2:", all.len()));
        lines.extend(all.iter().map(|s| format!("  {}", line(s))));
    }
    print_lines(&lines);
    Ok(())
}
