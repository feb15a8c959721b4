pub mod bic;
pub mod chirality;
pub mod collision;
pub mod crossvalidate;
pub mod decay;
pub mod markov;

use std::path::{Path, PathBuf};

use giant_atom::collision::run_collisions;
use giant_atom::dde::{integrate, DdeSpec};
use giant_atom::lattice::{evolve_with, LatticeOptions, NORM_TOLERANCE};
use giant_atom::{SolverTag, SystemConfig, Trajectory};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{Format, RunArgs, SolverName};
use crate::error::{CliError, CliResult};
use crate::manifest::{self, RunManifest};
use crate::output::{ensure_dir, write_atomic, write_json_compact};
use crate::sweep::{self, Cell, SweepDefaults};

/// Outcome of a command: invariant violations are logged and turn into a
/// nonzero exit once every artifact is written.
#[derive(Debug, Default)]
pub struct Report {
    pub violations: Vec<String>,
}

/// Shared state of a sweep command.
pub struct Run {
    pub manifest: RunManifest,
    pub out: PathBuf,
    pub format: Format,
    pub cells: Vec<Cell>,
}

pub struct Defaults {
    pub sweep: SweepDefaults,
    /// Solvers run when `--solver` is absent.
    pub solvers: &'static [SolverName],
    /// Solvers the command accepts.
    pub allowed: &'static [SolverName],
    pub t_max: f64,
    pub dt: f64,
    /// Grow built-in rings so that `t_max` stays inside the validity window.
    pub widen: bool,
}

impl Run {
    pub fn prepare(command: &str, args: &RunArgs, defaults: Defaults) -> CliResult<(Run, Vec<SolverName>, f64, f64)> {
        let t_max = args.t_max.unwrap_or(defaults.t_max);
        let dt = args.dt.unwrap_or(defaults.dt);
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(CliError::usage(format!("--t-max must be positive, got {t_max}")));
        }
        if !(dt.is_finite() && dt > 0.0 && dt <= t_max) {
            return Err(CliError::usage(format!("--dt must be in (0, t_max], got {dt}")));
        }
        let mut solvers = if args.solver.is_empty() {
            defaults.solvers.to_vec()
        } else {
            args.solver.clone()
        };
        solvers.sort();
        solvers.dedup();
        if let Some(bad) = solvers.iter().find(|s| !defaults.allowed.contains(s)) {
            return Err(CliError::usage(format!(
                "{command} does not support solver {}",
                bad.as_str()
            )));
        }
        if args.plot_script && args.format == Format::Json {
            return Err(CliError::usage("--plot-script reads CSV artifacts; use --format csv"));
        }
        let loaded = sweep::load_template(args.config.as_deref())?;
        let mut cells = sweep::expand(command, args, &loaded, defaults.sweep)?;
        if defaults.widen && loaded.is_none() {
            for c in &mut cells {
                sweep::widen_for(c, t_max);
            }
        }
        let template = sweep::template_or_reference(&loaded);
        let tags: Vec<&'static str> = solvers.iter().map(|s| s.as_str()).collect();
        let format = match args.format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        let manifest = manifest::build(command, &template, &tags, &cells, t_max, dt, format, &args.out);
        ensure_dir(&args.out)?;
        manifest.write(&args.out)?;
        Ok((
            Run {
                manifest,
                out: args.out.clone(),
                format: args.format,
                cells,
            },
            solvers,
            t_max,
            dt,
        ))
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    /// Runs `work` on every cell in the worker pool, keeping input order.
    pub fn for_each_cell<T: Send>(&self, work: impl Fn(&Cell) -> CliResult<T> + Sync + Send) -> CliResult<Vec<T>> {
        self.cells.par_iter().map(work).collect()
    }

    pub fn write_trajectory(
        &self,
        cell: &Cell,
        tr: &Trajectory,
        stem: &str,
        reference: Option<&(dyn Fn(f64) -> f64 + Sync)>,
        bins: Option<&giant_atom::collision::BinChainState>,
    ) -> CliResult<PathBuf> {
        let valid = tr.t_max_valid.is_finite().then_some(tr.t_max_valid);
        match self.format {
            Format::Csv => {
                let header =
                    self.manifest
                        .csv_header(cell, Some(&tr.solver.to_string()), valid.or(Some(f64::INFINITY)));
                let path = self.path(&format!("{stem}.csv"));
                write_atomic(&path, |w| {
                    let r = reference.map(|f| f as &dyn Fn(f64) -> f64);
                    tr.write_csv(w, Some(&header), r)?;
                    Ok(())
                })
            }
            Format::Json => {
                let pops = tr.populations();
                let ref_exp: Option<Vec<f64>> = reference.map(|f| tr.times.iter().map(|&t| f(t)).collect());
                let deviation = ref_exp
                    .as_ref()
                    .map(|r| pops.iter().zip(r).map(|(p, r)| p - r).collect());
                let artifact = TrajectoryArtifact {
                    manifest_hash: &self.manifest.manifest_hash,
                    config_hash: cell.config.config_hash(),
                    solver_tag: tr.solver,
                    t_max_valid: valid,
                    dt: tr.dt,
                    max_norm_drift: tr.max_norm_drift,
                    warnings: &tr.warnings,
                    t: &tr.times,
                    re_eps: tr.eps.iter().map(|e| e.re).collect(),
                    im_eps: tr.eps.iter().map(|e| e.im).collect(),
                    pop: pops,
                    ref_exp,
                    deviation,
                    bins,
                };
                write_json_compact(&self.path(&format!("{stem}.json")), &artifact)
            }
        }
    }

    /// Writes a summary table as CSV with the manifest header.
    pub fn write_table(&self, name: &str, columns: &str, rows: &[String]) -> CliResult<PathBuf> {
        let path = self.path(name);
        let hash = &self.manifest.manifest_hash;
        write_atomic(&path, |w| {
            writeln!(w, "# manifest_hash {hash}")?;
            writeln!(w, "{columns}")?;
            for r in rows {
                writeln!(w, "{r}")?;
            }
            Ok(())
        })
    }

    pub fn write_plot_script(&self, name: &str, body: &str) -> CliResult<PathBuf> {
        let path = self.path(name);
        let hash = &self.manifest.manifest_hash;
        write_atomic(&path, |w| {
            writeln!(w, "# gnuplot script; manifest_hash {hash}")?;
            writeln!(w, "set datafile separator ','")?;
            writeln!(w, "set datafile commentschars '#'")?;
            write!(w, "{body}")?;
            Ok(())
        })
    }
}

#[derive(Serialize)]
struct TrajectoryArtifact<'a> {
    manifest_hash: &'a str,
    config_hash: String,
    solver_tag: SolverTag,
    /// `null` when the solver has no finite-size horizon.
    t_max_valid: Option<f64>,
    dt: f64,
    max_norm_drift: Option<f64>,
    warnings: &'a [String],
    t: &'a [f64],
    re_eps: Vec<f64>,
    im_eps: Vec<f64>,
    pop: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ref_exp: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    deviation: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bins: Option<&'a giant_atom::collision::BinChainState>,
}

/// Delay-equation substeps so that the output grid contains every multiple
/// of `dt` when `t_d` is commensurate with it.
pub fn dde_substeps(t_d: f64, dt: f64) -> usize {
    let n0 = (t_d / dt).round().max(1.0) as usize;
    if (t_d / n0 as f64 - dt).abs() < 1e-12 {
        n0 * 50usize.div_ceil(n0)
    } else {
        n0.max(50)
    }
}

pub fn run_solver(solver: SolverName, cfg: &SystemConfig, t_max: f64, dt: f64) -> CliResult<Trajectory> {
    Ok(match solver {
        SolverName::Lattice => evolve_with(cfg, t_max, &LatticeOptions::new(dt))?,
        SolverName::Dde => {
            let spec = DdeSpec::from_config(cfg)?;
            let s = dde_substeps(spec.t_d, dt);
            integrate(&spec, t_max, s)?
        }
        SolverName::Collision => run_collisions(cfg, t_max, dt)?,
    })
}

/// Norm-conservation check shared by the unitary solvers.
pub fn check_norm(tr: &Trajectory, what: &str, violations: &mut Vec<String>) {
    if let Some(drift) = tr.max_norm_drift {
        if drift > NORM_TOLERANCE {
            violations.push(format!("{what}: norm drift {drift:.3e} above {NORM_TOLERANCE:e}"));
        }
    }
}

/// Largest population gap over the shared time grid of two trajectories,
/// up to `t_end`.
pub fn population_gap(a: &Trajectory, b: &Trajectory, t_end: f64) -> Option<f64> {
    let mut worst: Option<f64> = None;
    for (&t, e) in a.times.iter().zip(&a.eps) {
        if t > t_end + 1e-12 {
            break;
        }
        if let Ok(other) = b.eps_at(t) {
            let gap = (e.norm_sqr() - other.norm_sqr()).abs();
            worst = Some(worst.map_or(gap, |w: f64| w.max(gap)));
        }
    }
    worst
}

pub fn fmt_phase(phi: Option<f64>) -> String {
    phi.map_or_else(|| "-".into(), |p| giant_atom::phase::PhaseDisplay(p).to_string())
}

pub fn fmt_d(d: Option<usize>) -> String {
    d.map_or_else(|| "-".into(), |d| d.to_string())
}

pub fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}
