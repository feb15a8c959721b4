//! Browser bindings: decay curves, Markovian phase vectors and coupling-point
//! field components, each returned as a JSON string.

use giant_atom::collision::chirality_coefficients;
use giant_atom::dde::{integrate, DdeSpec};
use giant_atom::field::{field_at_coupling_points, FieldSpec};
use giant_atom::lattice::{evolve_with, LatticeOptions};
use giant_atom::markov::solve_markov_phases;
use giant_atom::phase::PhaseDisplay;
use giant_atom::SystemConfig;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Output spacing of the demo curves.
const DT: f64 = 0.05;
/// Lattice runs are skipped beyond this horizon to keep the page responsive.
const MAX_LATTICE_T: f64 = 200.0;

#[derive(Serialize)]
struct DecayCurves {
    t: Vec<f64>,
    dde: Vec<f64>,
    markov: Vec<f64>,
    lattice: Option<Vec<f64>>,
    gamma: f64,
    t_d: f64,
    sites: usize,
}

#[derive(Serialize)]
struct PhaseSolution {
    legs: usize,
    phases: Vec<f64>,
    text: Vec<String>,
    max_residual: f64,
}

#[derive(Serialize)]
struct FieldCurves {
    t: Vec<f64>,
    c1_b: Vec<f64>,
    c1_f: Vec<f64>,
    c2_b: Vec<f64>,
    c2_f: Vec<f64>,
    /// `|1 - i e^{i phi_c}|` and `|1 + i e^{i phi_c}|` at quarter-wave spacing.
    right_weight: f64,
    left_weight: f64,
}

fn two_leg(d: usize, phi_c: f64, g: f64, t_max: f64) -> SystemConfig {
    let v = 2.0;
    let sites = (2.0 * (v * t_max / 0.9 + 10.0)).ceil() as usize + d;
    SystemConfig::ring(sites.max(90), g, d, &[0.0, phi_c])
}

fn to_json<T: Serialize>(v: &T) -> giant_atom::Result<String> {
    Ok(serde_json::to_string(v)?)
}

fn dde_run(cfg: &SystemConfig, t_max: f64) -> giant_atom::Result<giant_atom::Trajectory> {
    let spec = DdeSpec::from_config(cfg)?;
    let substeps = ((spec.t_d / DT).round() as usize).max(1);
    integrate(&spec, t_max, substeps * 50usize.div_ceil(substeps))
}

pub fn decay_curves_json(d: usize, phi_c: f64, g: f64, t_max: f64) -> giant_atom::Result<String> {
    let cfg = two_leg(d, phi_c, g, t_max);
    let k = cfg.derived();
    let dde = dde_run(&cfg, t_max)?;
    let t: Vec<f64> = (0..=(t_max / DT).round() as usize).map(|i| i as f64 * DT).collect();
    let on_grid = |tr: &giant_atom::Trajectory| -> giant_atom::Result<Vec<f64>> {
        t.iter().map(|&s| Ok(tr.eps_at(s)?.norm_sqr())).collect()
    };
    let lattice = if t_max <= MAX_LATTICE_T {
        Some(on_grid(&evolve_with(&cfg, t_max, &LatticeOptions::new(DT))?)?)
    } else {
        None
    };
    let curves = DecayCurves {
        dde: on_grid(&dde)?,
        markov: t.iter().map(|&s| (-k.gamma * s).exp()).collect(),
        lattice,
        gamma: k.gamma,
        t_d: k.t_d.unwrap_or(0.0),
        sites: cfg.sites,
        t,
    };
    to_json(&curves)
}

pub fn markov_phases_json(legs: usize) -> giant_atom::Result<String> {
    let pv = solve_markov_phases(legs)?;
    to_json(&PhaseSolution {
        legs,
        text: pv.phases.iter().map(|&p| PhaseDisplay(p).to_string()).collect(),
        max_residual: pv.max_residual(),
        phases: pv.phases,
    })
}

pub fn field_components_json(d: usize, phi_c: f64, t_max: f64) -> giant_atom::Result<String> {
    let cfg = two_leg(d, phi_c, 0.2, t_max);
    let dde = dde_run(&cfg, t_max)?;
    let comps = field_at_coupling_points(&dde, &FieldSpec::from_config(&cfg)?)?;
    let idx = 0..comps.times.len();
    let (right, left) = chirality_coefficients(phi_c);
    to_json(&FieldCurves {
        t: comps.times.clone(),
        c1_b: idx.clone().map(|i| comps.c1_b(i).norm()).collect(),
        c1_f: idx.clone().map(|i| comps.c1_f(i).norm()).collect(),
        c2_b: idx.clone().map(|i| comps.c2_b(i).norm()).collect(),
        c2_f: idx.map(|i| comps.c2_f(i).norm()).collect(),
        right_weight: right.norm(),
        left_weight: left.norm(),
    })
}

fn js_err(e: giant_atom::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Populations from the delay equation, the lattice and `exp(-Gamma t)`.
#[wasm_bindgen]
pub fn decay_curves(d: usize, phi_c: f64, g: f64, t_max: f64) -> Result<String, JsError> {
    decay_curves_json(d, phi_c, g, t_max).map_err(js_err)
}

/// Canonical phase vector that makes an L-leg atom decay exponentially.
#[wasm_bindgen]
pub fn markov_phases(legs: usize) -> Result<String, JsError> {
    if !(2..=8).contains(&legs) {
        return Err(JsError::new("L must be between 2 and 8"));
    }
    markov_phases_json(legs).map_err(js_err)
}

/// Backward and forward field magnitudes at both coupling points.
#[wasm_bindgen]
pub fn field_components(d: usize, phi_c: f64, t_max: f64) -> Result<String, JsError> {
    field_components_json(d, phi_c, t_max).map_err(js_err)
}

/// Parses `pi/2`-style phase text for the page's inputs.
#[wasm_bindgen]
pub fn parse_phase(text: &str) -> Result<f64, JsError> {
    giant_atom::phase::parse_phase(text).map_err(js_err)
}
