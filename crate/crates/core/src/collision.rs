//! Time-bin collision model in the one-excitation sector.
//!
//! Each collision of duration `dt` couples the atom to one right-moving and
//! one left-moving bin per leg. Leg `j` (0-based) meets right bin `n - j l`
//! with weight `e^{i phi_j} e^{-i j phi_WG}` and left bin `n + j l` with
//! weight `e^{i phi_j} e^{+i j phi_WG}`, where `l = t_d / dt`. The per-term
//! coupling is `kappa = g / sqrt(v dt)`, which gives the delay-free amplitude
//! decay rate `L g^2 / v`.
//!
//! The interaction only reaches the atom and the collective mode
//! `B = sum_i w_i b_i / sqrt(2L)`, so the exact propagator is a rotation by
//! `theta = kappa sqrt(2L) dt` in that two-dimensional subspace.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::config::{AmplitudeState, Boundary, SystemConfig};
use crate::error::{Error, Result};
use crate::trajectory::{SolverTag, Trajectory};

/// Upper bound on the total number of stored bins.
pub const MAX_BINS: usize = 50_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinChainState {
    pub eps: C64,
    /// Right-moving bins; entry `i` holds bin `i - right_offset`.
    pub right_bins: Vec<C64>,
    pub right_offset: usize,
    /// Left-moving bins indexed from 0.
    pub left_bins: Vec<C64>,
    pub step_index: usize,
    pub ell: usize,
    pub dt: f64,
    /// Per-leg `(right, left)` weights.
    #[serde(skip)]
    pub weights: Vec<(C64, C64)>,
}

impl BinChainState {
    /// Excited atom, all bins empty.
    pub fn new(phases: &[f64], phi_wg: f64, ell: usize, dt: f64) -> Self {
        let weights = phases
            .iter()
            .enumerate()
            .map(|(j, &phi)| {
                let shift = j as f64 * phi_wg;
                (C64::from_polar(1.0, phi - shift), C64::from_polar(1.0, phi + shift))
            })
            .collect();
        let right_offset = phases.len().saturating_sub(1) * ell;
        BinChainState {
            eps: C64::new(1.0, 0.0),
            right_bins: Vec::new(),
            right_offset,
            left_bins: Vec::new(),
            step_index: 0,
            ell,
            dt,
            weights,
        }
    }

    pub fn legs(&self) -> usize {
        self.weights.len()
    }

    pub fn right_weight(&self) -> f64 {
        self.right_bins.iter().map(|b| b.norm_sqr()).sum()
    }

    pub fn left_weight(&self) -> f64 {
        self.left_bins.iter().map(|b| b.norm_sqr()).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.eps.norm_sqr() + self.right_weight() + self.left_weight()
    }

    /// Storage positions of the `2L` bins touched at the current step:
    /// right ones first, then left ones.
    fn participants(&self) -> Vec<(bool, usize)> {
        let n = self.step_index;
        let l = self.ell;
        let right = (0..self.legs()).map(|j| (true, n + self.right_offset - j * l));
        let left = (0..self.legs()).map(|j| (false, n + j * l));
        right.chain(left).collect()
    }

    fn ensure(&mut self) {
        let n = self.step_index;
        let need_right = n + self.right_offset + 1;
        if self.right_bins.len() < need_right {
            self.right_bins.resize(need_right, C64::default());
        }
        let need_left = n + self.legs().saturating_sub(1) * self.ell + 1;
        if self.left_bins.len() < need_left {
            self.left_bins.resize(need_left, C64::default());
        }
    }
}

/// One collision with per-term coupling `kappa`, then advance the step.
pub fn collide_step(state: &mut BinChainState, kappa: f64) {
    state.ensure();
    let parts = state.participants();
    let legs = state.legs();
    let weight_of = |i: usize| -> C64 {
        if i < legs {
            state.weights[i].0
        } else {
            state.weights[i - legs].1
        }
    };
    let scale = ((2 * legs) as f64).sqrt();
    let mut u = C64::default();
    for (i, &(right, pos)) in parts.iter().enumerate() {
        let b = if right {
            state.right_bins[pos]
        } else {
            state.left_bins[pos]
        };
        u += weight_of(i) * b;
    }
    u /= scale;

    let theta = kappa * scale * state.dt;
    let (s, c) = theta.sin_cos();
    let mi = C64::new(0.0, -1.0);
    let eps = state.eps;
    let delta_u = (c - 1.0) * u + mi * s * eps;
    state.eps = c * eps + mi * s * u;
    for (i, &(right, pos)) in parts.iter().enumerate() {
        let add = delta_u * weight_of(i).conj() / scale;
        if right {
            state.right_bins[pos] += add;
        } else {
            state.left_bins[pos] += add;
        }
    }
    state.step_index += 1;
}

/// Final chain plus the sampled amplitude.
#[derive(Debug, Clone)]
pub struct CollisionRun {
    pub trajectory: Trajectory,
    pub chain: BinChainState,
}

/// Per-term coupling `g / sqrt(v dt)`.
pub fn calibrated_kappa(g: f64, v: f64, dt: f64) -> f64 {
    g / (v * dt).sqrt()
}

pub fn run_collisions(cfg: &SystemConfig, t_max: f64, dt: f64) -> Result<Trajectory> {
    Ok(run_collision_chain(cfg, t_max, dt)?.trajectory)
}

/// Runs the collision model and keeps the final bin amplitudes.
pub fn run_collision_chain(cfg: &SystemConfig, t_max: f64, dt: f64) -> Result<CollisionRun> {
    cfg.validate()?;
    if !(t_max.is_finite() && t_max >= 0.0) {
        return Err(Error::BadHorizon(t_max));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Config(format!("collision duration must be positive, got {dt}")));
    }
    let k = cfg.derived();
    let ell = match k.t_d {
        Some(t_d) => {
            let ratio = t_d / dt;
            let ell = ratio.round();
            if (ratio - ell).abs() > 1e-9 * ratio.max(1.0) || ell < 1.0 {
                return Err(Error::Config(format!(
                    "delay t_d = {t_d} is not an integer multiple of dt = {dt} (ratio {ratio})"
                )));
            }
            ell as usize
        }
        None => 0,
    };
    let n_steps = (t_max / dt + 1e-9).floor() as usize;
    let needed = 2 * (n_steps + cfg.legs().saturating_sub(1) * ell + 1);
    if needed > MAX_BINS {
        return Err(Error::TooManyBins {
            needed,
            limit: MAX_BINS,
        });
    }

    let kappa = calibrated_kappa(cfg.g, k.v, dt);
    let mut chain = BinChainState::new(&cfg.phases(), k.phi_wg.unwrap_or(0.0), ell, dt);
    let mut traj = Trajectory::new(SolverTag::Collision, dt, f64::INFINITY);
    let mut drift: f64 = 0.0;
    traj.push(0.0, chain.eps);
    for m in 1..=n_steps {
        collide_step(&mut chain, kappa);
        drift = drift.max((1.0 - chain.norm_sqr()).abs());
        traj.push(m as f64 * dt, chain.eps);
    }
    traj.max_norm_drift = Some(drift);
    traj.warnings.extend(cfg.warnings());
    traj.config_hash = Some(cfg.config_hash());
    Ok(CollisionRun {
        trajectory: traj,
        chain,
    })
}

/// Max-entry norm of `M M^dag - I` for the two-path transfer matrix
/// `M = [[1, e^{i phi_c} e^{-i phi_WG}], [e^{i phi_c} e^{i phi_WG}, 1]] / sqrt(2)`.
pub fn unitarity_deviation(phi_c: f64, phi_wg: f64) -> f64 {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let m = [
        [C64::from(r), C64::from_polar(r, phi_c - phi_wg)],
        [C64::from_polar(r, phi_c + phi_wg), C64::from(r)],
    ];
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let mut e = m[i][0] * m[j][0].conj() + m[i][1] * m[j][1].conj();
            if i == j {
                e -= 1.0;
            }
            worst = worst.max(e.norm());
        }
    }
    worst
}

/// Right and left coupling weights `(1 - i e^{i phi_c}, 1 + i e^{i phi_c})` of
/// the merged two-leg collision at `phi_WG = pi/2` and negligible delay.
pub fn chirality_coefficients(phi_c: f64) -> (C64, C64) {
    let rot = C64::i() * C64::from_polar(1.0, phi_c);
    (1.0 - rot, 1.0 + rot)
}

/// `(forward, backward)` emitted probability on a lattice state.
///
/// Field right of the last leg counts as forward, left of the first leg as
/// backward; the region between the legs is split evenly.
pub fn emission_fractions(cfg: &SystemConfig, state: &AmplitudeState) -> Result<(f64, f64)> {
    let pop = state.eps.norm_sqr();
    if pop >= 1e-3 {
        return Err(Error::NotDecayed(pop));
    }
    let (x1, xl) = (cfg.first_site(), cfg.last_site());
    let weight = |r: std::ops::Range<usize>| -> f64 { state.field[r].iter().map(|c| c.norm_sqr()).sum() };
    let inner = weight(x1..xl + 1);
    let (forward, backward) = match cfg.boundary {
        Boundary::OpenChain => (weight(xl + 1..cfg.sites), weight(0..x1)),
        Boundary::Ring => {
            // the exterior arc is split at its midpoint; sites past it are
            // reached first from the other side
            let outside = cfg.sites - (xl + 1 - x1);
            let ahead = outside.div_ceil(2);
            let fwd: f64 = (1..=ahead).map(|k| state.field[(xl + k) % cfg.sites].norm_sqr()).sum();
            let total: f64 = state.field.iter().map(|c| c.norm_sqr()).sum();
            (fwd, total - inner - fwd)
        }
    };
    Ok((forward + 0.5 * inner, backward + 0.5 * inner))
}

/// `(forward, backward)` emitted probability in the right and left chains.
pub fn chain_emission_fractions(chain: &BinChainState) -> Result<(f64, f64)> {
    let pop = chain.eps.norm_sqr();
    if pop >= 1e-3 {
        return Err(Error::NotDecayed(pop));
    }
    Ok((chain.right_weight(), chain.left_weight()))
}
