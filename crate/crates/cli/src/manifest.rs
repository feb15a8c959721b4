use std::path::Path;

use giant_atom::phase::PhaseDisplay;
use giant_atom::SystemConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliResult;
use crate::output::write_json;
use crate::sweep::Cell;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything that determines artifact contents; hashed.
#[derive(Debug, Clone, Serialize)]
pub struct ManifestBody {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<SystemConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    pub solvers: Vec<&'static str>,
    pub sweep: SweepAxes,
    pub cells: Vec<CellRecord>,
    pub t_max: f64,
    pub dt: f64,
    pub format: &'static str,
    pub determinism: &'static str,
}

pub const DETERMINISM: &str = "all solvers are deterministic; no random numbers are drawn";

#[derive(Debug, Clone, Serialize)]
pub struct SweepAxes {
    pub d: Vec<usize>,
    pub phi_c: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellRecord {
    pub stem: String,
    pub config_hash: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    #[serde(flatten)]
    pub body: ManifestBody,
    /// Where the artifacts went; not part of the hash so that reruns into a
    /// different directory reproduce the same files.
    pub out_dir: String,
    pub manifest_hash: String,
}

impl RunManifest {
    pub fn new(body: ManifestBody, out_dir: &Path) -> Self {
        let json = serde_json::to_string(&body).expect("manifest serializes");
        let manifest_hash = hex::encode(Sha256::digest(json.as_bytes()));
        RunManifest {
            body,
            out_dir: out_dir.display().to_string(),
            manifest_hash,
        }
    }

    pub fn write(&self, out_dir: &Path) -> CliResult<()> {
        write_json(&out_dir.join(MANIFEST_FILE), self)?;
        Ok(())
    }

    /// Comment block placed at the top of CSV artifacts.
    pub fn csv_header(&self, cell: &Cell, solver: Option<&str>, t_max_valid: Option<f64>) -> String {
        let mut s = format!(
            "manifest_hash {}\nconfig_hash {}",
            self.manifest_hash,
            cell.config.config_hash()
        );
        if let Some(tag) = solver {
            s += &format!("\nsolver_tag {tag}");
        }
        if let Some(t) = t_max_valid {
            s += &format!("\nt_max_valid {t}");
        }
        s
    }
}

#[allow(clippy::too_many_arguments)]
pub fn build(
    command: &str,
    template: &SystemConfig,
    solvers: &[&'static str],
    cells: &[Cell],
    t_max: f64,
    dt: f64,
    format: &'static str,
    out_dir: &Path,
) -> RunManifest {
    let mut d: Vec<usize> = cells.iter().filter_map(|c| c.d).collect();
    d.dedup();
    let mut phi_c: Vec<f64> = Vec::new();
    for p in cells.iter().filter_map(|c| c.phi_c) {
        if !phi_c.contains(&p) {
            phi_c.push(p);
        }
    }
    let body = ManifestBody {
        tool: "giant-atom",
        version: env!("CARGO_PKG_VERSION"),
        command: command.to_string(),
        config: Some(template.clone()),
        config_hash: Some(template.config_hash()),
        solvers: solvers.to_vec(),
        sweep: SweepAxes {
            d,
            phi_c: phi_c.iter().map(|&p| PhaseDisplay(p).to_string()).collect(),
        },
        cells: cells
            .iter()
            .map(|c| CellRecord {
                stem: c.stem.clone(),
                config_hash: c.config.config_hash(),
            })
            .collect(),
        t_max,
        dt,
        format,
        determinism: DETERMINISM,
    };
    RunManifest::new(body, out_dir)
}
