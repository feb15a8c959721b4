//! Delay differential equation for the atomic amplitude.
//!
//! For `L` equally spaced legs the amplitude obeys
//!
//! ```text
//! eps'(t) = -a eps(t) + sum_{n=1}^{L-1} K_n Theta(t - n t_d) eps(t - n t_d)
//! a   = L g^2 / v
//! K_n = -(2 g^2 / v) [sum_{j=1}^{L-n} cos(phi_{n+j} - phi_j)] e^{i n phi_WG}
//! ```
//!
//! which for two legs is `K_1 = -(Gamma/2) cos(phi_c) e^{i phi_WG}`. The
//! amplitude lives in the frame rotating at `omega_a`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::config::{is_multiple_of_pi, SystemConfig};
use crate::error::{Error, Result};
use crate::trajectory::{SolverTag, Trajectory};

pub const MIN_SUBSTEPS: usize = 50;
const POLE_TOLERANCE: f64 = 1e-12;
/// `|D(0)|` below this counts as a zero of the characteristic function.
const FINAL_VALUE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DdeSpec {
    /// Two-leg population rate `4 g^2 / v`.
    pub gamma: f64,
    pub phi_wg: f64,
    pub t_d: f64,
    /// `phi_1 .. phi_L`.
    pub phases: Vec<f64>,
    /// `K_1 .. K_{L-1}`.
    pub delay_coefficients: Vec<C64>,
}

impl DdeSpec {
    /// General `L`-leg spec. `gamma` is `4 g^2 / v`.
    pub fn new(gamma: f64, phases: &[f64], phi_wg: f64, t_d: f64) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::Config("a DDE spec needs at least one phase".into()));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::Config(format!("Gamma must be non-negative, got {gamma}")));
        }
        if !(t_d.is_finite() && t_d > 0.0) {
            return Err(Error::Config(format!("delay t_d must be positive, got {t_d}")));
        }
        let unit = gamma / 4.0;
        let delay_coefficients = (1..phases.len())
            .map(|n| {
                let overlap: f64 = (0..phases.len() - n).map(|j| (phases[n + j] - phases[j]).cos()).sum();
                C64::from_polar(1.0, n as f64 * phi_wg) * (-2.0 * unit * overlap)
            })
            .collect();
        Ok(DdeSpec {
            gamma,
            phi_wg,
            t_d,
            phases: phases.to_vec(),
            delay_coefficients,
        })
    }

    /// Two legs with phases `(0, phi_c)`.
    pub fn two_leg(gamma: f64, phi_c: f64, phi_wg: f64, t_d: f64) -> Result<Self> {
        Self::new(gamma, &[0.0, phi_c], phi_wg, t_d)
    }

    /// Reads `Gamma`, `phi_WG`, `t_d` and the phases from a configuration.
    /// A single leg has no delay; its nominal `t_d` is one site of travel.
    pub fn from_config(cfg: &SystemConfig) -> Result<Self> {
        cfg.validate()?;
        let k = cfg.derived();
        Self::new(
            k.gamma,
            &cfg.phases(),
            k.phi_wg.unwrap_or(0.0),
            k.t_d.unwrap_or(1.0 / k.v),
        )
    }

    pub fn legs(&self) -> usize {
        self.phases.len()
    }

    /// Instantaneous amplitude decay rate `L g^2 / v`.
    pub fn local_rate(&self) -> f64 {
        self.legs() as f64 * self.gamma / 4.0
    }

    /// `D(s) = s + a - sum_n K_n e^{-s n t_d}`; the transform is `1/D`.
    pub fn characteristic(&self, s: C64) -> C64 {
        let delayed: C64 = self
            .delay_coefficients
            .iter()
            .enumerate()
            .map(|(i, &k)| k * (-s * ((i + 1) as f64 * self.t_d)).exp())
            .sum();
        s + self.local_rate() - delayed
    }
}

/// Integrates from `eps(0) = 1` with step `h = t_d / substeps`.
///
/// Classical RK4 on the method-of-steps system. Each step keeps its four
/// stage states; stage `i` of step `m` reads stage `i` of step `m - n S` as
/// the delayed value, so no interpolation is ever needed. A step starting at
/// or after `n t_d` sees the `n`-th delay term; a step ending there does not.
pub fn integrate(spec: &DdeSpec, t_max: f64, substeps_per_delay: usize) -> Result<Trajectory> {
    if !(t_max.is_finite() && t_max >= 0.0) {
        return Err(Error::BadHorizon(t_max));
    }
    if substeps_per_delay < MIN_SUBSTEPS {
        return Err(Error::Config(format!(
            "substeps_per_delay must be at least {MIN_SUBSTEPS}, got {substeps_per_delay}"
        )));
    }
    let s = substeps_per_delay;
    let h = spec.t_d / s as f64;
    let n_steps = (t_max / h + 1e-9).floor() as usize;
    let a = spec.local_rate();
    let kernel = &spec.delay_coefficients;
    let depth = kernel.len() * s;

    let mut traj = Trajectory::new(SolverTag::Dde, h, f64::INFINITY);
    // ring[m % len] holds the four stage states of step m
    let len = depth + 1;
    let mut ring = vec![[C64::default(); 4]; len];
    let mut y = C64::new(1.0, 0.0);
    traj.push(0.0, y);

    for m in 0..n_steps {
        let delayed = |stage: usize, ring: &[[C64; 4]]| -> C64 {
            let mut acc = C64::default();
            for (i, &k) in kernel.iter().enumerate() {
                let lag = (i + 1) * s;
                if m >= lag {
                    acc += k * ring[(m - lag) % len][stage];
                }
            }
            acc
        };
        let y1 = y;
        let k1 = -a * y1 + delayed(0, &ring);
        let y2 = y + 0.5 * h * k1;
        let k2 = -a * y2 + delayed(1, &ring);
        let y3 = y + 0.5 * h * k2;
        let k3 = -a * y3 + delayed(2, &ring);
        let y4 = y + h * k3;
        let k4 = -a * y4 + delayed(3, &ring);
        ring[m % len] = [y1, y2, y3, y4];
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        traj.push((m + 1) as f64 * h, y);
    }
    Ok(traj)
}

/// `eps(t -> infinity)` from the final-value theorem.
///
/// Nonzero only when `D(0) = 0`, in which case the limit is `1 / D'(0)`.
/// For two legs that is `(1 + Gamma t_d / 2)^{-1}` at `phi_WG = m pi`,
/// `phi_c = (m + 1) pi`.
pub fn asymptotic_amplitude(spec: &DdeSpec) -> f64 {
    if spec.characteristic(C64::default()).norm() > FINAL_VALUE_TOLERANCE {
        return 0.0;
    }
    let slope: C64 = spec
        .delay_coefficients
        .iter()
        .enumerate()
        .map(|(i, &k)| k * ((i + 1) as f64 * spec.t_d))
        .sum();
    let value = 1.0 / (1.0 + slope);
    // the kernel is real at a bound state, so the limit is real
    value.re
}

/// Two-leg trapping condition: `phi_WG = m pi` with `m >= 1` and
/// `phi_c = (m+1) pi` modulo `2 pi`.
pub fn two_leg_bound_order(phi_wg: f64, phi_c: f64, tol: f64) -> Option<i64> {
    let m = is_multiple_of_pi(phi_wg, tol).filter(|&m| m >= 1)?;
    let target = (m + 1) as f64 * std::f64::consts::PI;
    let mismatch = crate::phase::wrap_phase(phi_c - target).abs();
    (mismatch <= tol).then_some(m)
}

/// Closed-form Laplace transform `1 / D(s)`.
pub fn laplace_transform_amplitude(spec: &DdeSpec, s: C64) -> Result<C64> {
    let d = spec.characteristic(s);
    if d.norm() < POLE_TOLERANCE {
        return Err(Error::Pole(d.norm()));
    }
    Ok(1.0 / d)
}

/// Trapezoidal `int_0^T e^{-st} eps(t) dt` of a sampled trajectory.
pub fn numerical_laplace(traj: &Trajectory, s: C64) -> C64 {
    let f: Vec<C64> = traj
        .times
        .iter()
        .zip(&traj.eps)
        .map(|(&t, &e)| (-s * t).exp() * e)
        .collect();
    traj.times
        .windows(2)
        .zip(f.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}
