//! Exact one-excitation dynamics on the discretized waveguide.
//!
//! Two independent routes: a fixed-step RK4 propagator built on the
//! matrix-free [`LatticeOperator`], and a dense eigendecomposition used as an
//! oracle for moderate sizes.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::config::{AmplitudeState, SystemConfig};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, LatticeOperator};
use crate::trajectory::{FieldSnapshot, ProbeSeries, SolverTag, Trajectory};

pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_SNAPSHOT_INTERVAL: f64 = 0.1;
/// Largest `|1 - norm|` tolerated at a stored sample before the step is halved.
pub const NORM_TOLERANCE: f64 = 1e-9;
/// Dense diagonalization limit for [`EigenSystem`].
pub const MAX_DENSE_DIM: usize = 4096;
const MAX_HALVINGS: u32 = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeOptions {
    /// Output grid spacing; the internal step may be a fraction of it.
    pub dt: f64,
    /// Store the full field every this much time; `None` disables snapshots.
    pub snapshot_interval: Option<f64>,
    /// Sites whose amplitude is recorded at every output sample.
    pub probes: Vec<usize>,
    pub keep_final_state: bool,
}

impl LatticeOptions {
    pub fn new(dt: f64) -> Self {
        LatticeOptions {
            dt,
            snapshot_interval: None,
            probes: Vec::new(),
            keep_final_state: false,
        }
    }

    pub fn with_snapshots(mut self, interval: f64) -> Self {
        self.snapshot_interval = Some(interval);
        self
    }

    pub fn with_probes(mut self, sites: &[usize]) -> Self {
        self.probes = sites.to_vec();
        self
    }

    pub fn with_final_state(mut self) -> Self {
        self.keep_final_state = true;
        self
    }
}

impl Default for LatticeOptions {
    fn default() -> Self {
        LatticeOptions::new(DEFAULT_DT).with_snapshots(DEFAULT_SNAPSHOT_INTERVAL)
    }
}

/// RK4 evolution from `|e>|0>` sampled every `dt` up to `t_max`.
pub fn evolve(cfg: &SystemConfig, t_max: f64, dt: f64) -> Result<Trajectory> {
    evolve_with(cfg, t_max, &LatticeOptions::new(dt))
}

pub fn evolve_with(cfg: &SystemConfig, t_max: f64, opts: &LatticeOptions) -> Result<Trajectory> {
    if !(t_max.is_finite() && t_max >= 0.0) {
        return Err(Error::BadHorizon(t_max));
    }
    if !(opts.dt.is_finite() && opts.dt > 0.0) {
        return Err(Error::Config(format!("time step must be positive, got {}", opts.dt)));
    }
    if let Some(&bad) = opts.probes.iter().find(|&&x| x >= cfg.sites) {
        return Err(Error::Config(format!("probe site {bad} outside the waveguide")));
    }
    let op = LatticeOperator::new(cfg)?;
    let mut substeps = 1usize;
    let mut halvings = 0;
    // The RK4 stability polynomial is not unitary; halve until the drift is
    // inside tolerance.
    let mut traj = loop {
        let traj = run_rk4(cfg, &op, t_max, opts, substeps);
        let drift = traj.max_norm_drift.unwrap_or(0.0);
        if drift <= NORM_TOLERANCE || halvings == MAX_HALVINGS {
            break traj;
        }
        substeps *= 2;
        halvings += 1;
    };
    if traj.max_norm_drift.unwrap_or(0.0) > NORM_TOLERANCE {
        traj.warnings.push(format!(
            "norm drift {:.3e} still above {NORM_TOLERANCE:e} after {MAX_HALVINGS} step halvings",
            traj.max_norm_drift.unwrap_or(0.0)
        ));
    }
    if halvings > 0 {
        traj.warnings
            .push(format!("internal step halved {halvings} time(s) to conserve the norm"));
    }
    traj.warnings.extend(cfg.warnings());
    traj.warn_if_beyond_horizon(t_max);
    traj.config_hash = Some(cfg.config_hash());
    Ok(traj)
}

fn run_rk4(cfg: &SystemConfig, op: &LatticeOperator, t_max: f64, opts: &LatticeOptions, substeps: usize) -> Trajectory {
    let n_out = (t_max / opts.dt + 1e-9).floor() as usize;
    let h = opts.dt / substeps as f64;
    let snapshot_stride = opts.snapshot_interval.map(|s| ((s / opts.dt).round() as usize).max(1));

    let dim = op.dim();
    let mut psi = AmplitudeState::excited(cfg.sites).to_vector();
    let mut k = vec![C64::default(); dim];
    let mut acc = vec![C64::default(); dim];
    let mut tmp = vec![C64::default(); dim];

    let mut traj = Trajectory::new(SolverTag::Lattice, opts.dt, cfg.validity_horizon());
    let mut probes: Vec<ProbeSeries> = opts
        .probes
        .iter()
        .map(|&site| ProbeSeries {
            site,
            samples: Vec::with_capacity(n_out + 1),
        })
        .collect();
    let mut drift: f64 = 0.0;

    let mut record = |i: usize, psi: &[C64], traj: &mut Trajectory| {
        let t = i as f64 * opts.dt;
        traj.push(t, psi[0]);
        for p in probes.iter_mut() {
            p.samples.push(psi[p.site + 1]);
        }
        if snapshot_stride.is_some_and(|s| i.is_multiple_of(s)) {
            traj.snapshots.push(FieldSnapshot {
                t,
                field: psi[1..].to_vec(),
            });
        }
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        drift = drift.max((1.0 - norm).abs());
    };

    record(0, &psi, &mut traj);
    let mi = C64::new(0.0, -1.0);
    for i in 1..=n_out {
        for _ in 0..substeps {
            // k1
            op.apply(&psi, &mut k);
            for j in 0..dim {
                k[j] *= mi;
                acc[j] = k[j];
                tmp[j] = psi[j] + 0.5 * h * k[j];
            }
            // k2
            op.apply(&tmp, &mut k);
            for j in 0..dim {
                k[j] *= mi;
                acc[j] += 2.0 * k[j];
                tmp[j] = psi[j] + 0.5 * h * k[j];
            }
            // k3
            op.apply(&tmp, &mut k);
            for j in 0..dim {
                k[j] *= mi;
                acc[j] += 2.0 * k[j];
                tmp[j] = psi[j] + h * k[j];
            }
            // k4
            op.apply(&tmp, &mut k);
            for j in 0..dim {
                psi[j] += h / 6.0 * (acc[j] + mi * k[j]);
            }
        }
        record(i, &psi, &mut traj);
    }
    traj.probes = probes;
    traj.max_norm_drift = Some(drift);
    if opts.keep_final_state {
        traj.final_state = Some(AmplitudeState::from_vector(&psi));
    }
    traj
}

/// Full spectral decomposition of the one-excitation Hamiltonian.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: DVector<f64>,
    /// Columns are orthonormal eigenvectors (atom component first).
    pub eigenvectors: DMatrix<C64>,
}

impl EigenSystem {
    pub fn new(cfg: &SystemConfig) -> Result<Self> {
        let dim = cfg.sites + 1;
        if dim > MAX_DENSE_DIM {
            return Err(Error::DimensionTooLarge {
                dim,
                max: MAX_DENSE_DIM,
            });
        }
        let eig = SymmetricEigen::new(build_hamiltonian(cfg)?);
        Ok(EigenSystem {
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    /// `<e| e^{-iHt} |e>`.
    pub fn amplitude(&self, t: f64) -> C64 {
        self.eigenvectors
            .row(0)
            .iter()
            .zip(self.eigenvalues.iter())
            .map(|(v, &e)| v.norm_sqr() * C64::from_polar(1.0, -e * t))
            .sum()
    }

    /// `e^{-iHt} |e>` as a full state.
    pub fn state_at(&self, t: f64) -> AmplitudeState {
        let coeffs = DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvectors
                .row(0)
                .iter()
                .zip(self.eigenvalues.iter())
                .map(|(v, &e)| v.conj() * C64::from_polar(1.0, -e * t)),
        );
        let psi = &self.eigenvectors * coeffs;
        AmplitudeState::from_vector(psi.as_slice())
    }
}

/// Amplitude at each requested time via dense diagonalization.
pub fn evolve_eigenbasis(cfg: &SystemConfig, times: &[f64]) -> Result<Trajectory> {
    let sys = EigenSystem::new(cfg)?;
    let dt = match times {
        [a, b, ..] => b - a,
        _ => 0.0,
    };
    let mut traj = Trajectory::new(SolverTag::Lattice, dt, cfg.validity_horizon());
    for &t in times {
        traj.push(t, sys.amplitude(t));
    }
    traj.warn_if_beyond_horizon(times.last().copied().unwrap_or(0.0));
    traj.config_hash = Some(cfg.config_hash());
    Ok(traj)
}

/// Population decay rate from a least-squares fit of `ln |eps|^2` on
/// `[t0, t1]`.
///
/// Fails if the population rises by more than `1e-3` above its running
/// minimum anywhere in the window (a revival is not an exponential).
pub fn fit_decay_rate(traj: &Trajectory, window: (f64, f64)) -> Result<f64> {
    let (t0, t1) = window;
    let pts: Vec<(f64, f64)> = traj
        .times
        .iter()
        .zip(&traj.eps)
        .filter(|(&t, _)| t >= t0 - 1e-12 && t <= t1 + 1e-12)
        .map(|(&t, e)| (t, e.norm_sqr()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Config(format!(
            "fit window [{t0}, {t1}] holds fewer than two samples"
        )));
    }
    let mut lowest = f64::INFINITY;
    for &(t, p) in &pts {
        lowest = lowest.min(p);
        if p - lowest > 1e-3 {
            return Err(Error::NonExponentialWindow { t, rise: p - lowest });
        }
        if p <= 0.0 {
            return Err(Error::NonExponentialWindow { t, rise: 0.0 });
        }
    }
    let n = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(t, p) in &pts {
        sxy += (t - mean_t) * (p.ln() - mean_y);
        sxx += (t - mean_t) * (t - mean_t);
    }
    Ok(-sxy / sxx)
}
