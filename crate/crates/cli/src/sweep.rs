use std::path::Path;

use giant_atom::config::CouplingPoint;
use giant_atom::SystemConfig;

use crate::args::RunArgs;
use crate::error::{CliError, CliResult};
use crate::output::cell_stem;

/// One point of a parameter sweep.
#[derive(Debug, Clone)]
pub struct Cell {
    pub d: Option<usize>,
    pub phi_c: Option<f64>,
    pub config: SystemConfig,
    pub stem: String,
}

/// Per-command defaults used when the flags are absent.
pub struct SweepDefaults {
    pub d: Vec<usize>,
    pub phi_c: Vec<f64>,
}

pub fn load_template(path: Option<&Path>) -> CliResult<Option<SystemConfig>> {
    let Some(path) = path else { return Ok(None) };
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(Some(SystemConfig::from_toml_str(&text)?))
}

/// Reference ring unless a config file is given.
pub fn template_or_reference(loaded: &Option<SystemConfig>) -> SystemConfig {
    loaded
        .clone()
        .unwrap_or_else(|| SystemConfig::reference(1, &[0.0, 0.0]))
}

/// Expands `--d` and `--phi-c` into two-leg configurations. A config file
/// with neither flag is run as a single cell, as written.
pub fn expand(
    prefix: &str,
    args: &RunArgs,
    loaded: &Option<SystemConfig>,
    defaults: SweepDefaults,
) -> CliResult<Vec<Cell>> {
    if args.d.contains(&0) {
        return Err(CliError::usage("--d entries must be at least 1"));
    }
    if let Some(cfg) = loaded {
        if args.d.is_empty() && args.phi_c.is_empty() {
            let k = cfg.derived();
            let d = cfg.spacing();
            let phi_c = k.phi_c;
            let stem = cell_stem(prefix, d, phi_c);
            return Ok(vec![Cell {
                d,
                phi_c,
                config: cfg.clone(),
                stem,
            }]);
        }
    }
    let template = template_or_reference(loaded);
    let from_file = loaded.as_ref().filter(|c| c.legs() == 2);
    let ds = if !args.d.is_empty() {
        args.d.clone()
    } else if let Some(d) = from_file.and_then(|c| c.spacing()) {
        vec![d]
    } else {
        defaults.d
    };
    let phis = if !args.phi_c.is_empty() {
        args.phi_c.clone()
    } else if let Some(p) = from_file.and_then(|c| c.derived().phi_c) {
        vec![p]
    } else {
        defaults.phi_c
    };
    let x1 = loaded.as_ref().map_or(template.sites / 2, |c| c.first_site());
    let phi1 = loaded.as_ref().map_or(0.0, |c| c.coupling_points[0].phi);
    let mut cells = Vec::with_capacity(ds.len() * phis.len());
    for &d in &ds {
        for &phi_c in &phis {
            let mut config = template.clone();
            config.coupling_points = vec![
                CouplingPoint { x: x1, phi: phi1 },
                CouplingPoint {
                    x: x1 + d,
                    phi: phi1 + phi_c,
                },
            ];
            config
                .validate()
                .map_err(|e| CliError::usage(format!("d = {d}: {e}")))?;
            cells.push(Cell {
                d: Some(d),
                phi_c: Some(phi_c),
                config,
                stem: cell_stem(prefix, Some(d), Some(phi_c)),
            });
        }
    }
    Ok(cells)
}

/// Grows the ring around the coupling region so that light cannot wrap
/// back before `t_max`. Only applied to built-in configurations.
pub fn widen_for(cell: &mut Cell, t_max: f64) {
    let v = cell.config.derived().v;
    let span = cell.config.last_site() - cell.config.first_site();
    let needed = (2.0 * (v * t_max / 0.9 + 10.0)).ceil() as usize + span;
    if needed > cell.config.sites {
        let shift = needed / 2 - cell.config.first_site().min(needed / 2);
        cell.config.sites = needed;
        for p in &mut cell.config.coupling_points {
            p.x += shift;
        }
    }
}
