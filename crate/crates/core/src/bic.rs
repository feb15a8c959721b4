//! Bound state in the continuum of a two-leg giant atom.
//!
//! When `k_a d = m pi` and `phi_c = (m+1) pi` the state
//!
//! ```text
//! |psi> = ( |e> + (2 g e^{i phi_1} / v) sum_{x_1 < x < x_2} sin[k_a (x - x_1)] |x> ) / sqrt(1 + Gamma t_d / 2)
//! ```
//!
//! is an exact eigenvector of the lattice Hamiltonian at energy `omega_a`,
//! with the photon confined between the coupling points.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::config::{AmplitudeState, SystemConfig};
use crate::dde::two_leg_bound_order;
use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, LatticeOperator};
use crate::lattice::MAX_DENSE_DIM;

/// Tolerance on `k_a d = m pi` and on the phase matching.
pub const EXISTENCE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BicExistence {
    pub exists: bool,
    /// Order `m` in `k_a d = m pi`, present when the state exists.
    pub m: Option<i64>,
}

/// Existence test: `k_a d = m pi` for an integer `m >= 1` and
/// `phi_c = (m+1) pi` modulo `2 pi`.
pub fn bic_exists(d: f64, k_a: f64, phi_c: f64) -> BicExistence {
    let m = two_leg_bound_order(k_a * d, phi_c, EXISTENCE_TOLERANCE);
    BicExistence { exists: m.is_some(), m }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BicState {
    pub exists: bool,
    pub m: i64,
    /// Atomic population `1 / (1 + Gamma t_d / 2)`.
    pub eps_pop: f64,
    pub eps: C64,
    /// `c_x` on every site; zero at and outside the coupling points.
    pub profile: Vec<C64>,
    pub energy: f64,
}

impl BicState {
    pub fn as_state(&self) -> AmplitudeState {
        AmplitudeState {
            eps: self.eps,
            field: self.profile.clone(),
        }
    }

    /// Field weight strictly outside `(x_1, x_2)`.
    pub fn exterior_weight(&self, x1: usize, x2: usize) -> f64 {
        self.profile
            .iter()
            .enumerate()
            .filter(|&(x, _)| x <= x1 || x >= x2)
            .map(|(_, c)| c.norm_sqr())
            .sum()
    }

    /// Writes `x,re,im,abs2` per site.
    pub fn write_profile_csv<W: Write>(&self, mut out: W, header_comment: Option<&str>) -> Result<()> {
        if let Some(c) = header_comment {
            for line in c.lines() {
                writeln!(out, "# {line}")?;
            }
        }
        writeln!(out, "x,re,im,abs2")?;
        for (x, c) in self.profile.iter().enumerate() {
            writeln!(out, "{x},{:.15e},{:.15e},{:.15e}", c.re, c.im, c.norm_sqr())?;
        }
        Ok(())
    }
}

/// Analytic bound state for a two-leg configuration.
pub fn build_bic(cfg: &SystemConfig) -> Result<BicState> {
    cfg.validate()?;
    if cfg.legs() != 2 {
        return Err(Error::Config(format!(
            "bound-state analysis needs two legs, got {}",
            cfg.legs()
        )));
    }
    let k = cfg.derived();
    let d = cfg.spacing().unwrap_or(0);
    let exist = bic_exists(d as f64, k.k_a, k.phi_c.unwrap_or(0.0));
    let Some(m) = exist.m else {
        return Err(Error::NoBoundState);
    };
    let m_max = (k.k_a * cfg.sites as f64 / (2.0 * PI)).floor() as i64;
    if m > m_max {
        return Err(Error::Config(format!(
            "bound-state order m = {m} exceeds floor(k_a N / 2 pi) = {m_max}; the trap does not fit in the chain"
        )));
    }
    let t_d = k.t_d.unwrap_or(0.0);
    let eps_pop = 1.0 / (1.0 + k.gamma * t_d / 2.0);
    let norm = eps_pop.sqrt();
    let (x1, x2) = (cfg.first_site(), cfg.last_site());
    let amp = C64::from_polar(2.0 * cfg.g / k.v, cfg.coupling_points[0].phi) * norm;
    let mut profile = vec![C64::default(); cfg.sites];
    for (x, c) in profile.iter_mut().enumerate().take(x2).skip(x1 + 1) {
        *c = amp * (k.k_a * (x - x1) as f64).sin();
    }
    Ok(BicState {
        exists: true,
        m,
        eps_pop,
        eps: C64::from(norm),
        profile,
        energy: cfg.omega_a,
    })
}

/// `|| H psi - omega_a psi ||` for a candidate state.
pub fn eigen_residual(cfg: &SystemConfig, state: &AmplitudeState) -> Result<f64> {
    let op = LatticeOperator::new(cfg)?;
    let psi = state.to_vector();
    let mut out = vec![C64::default(); psi.len()];
    op.apply(&psi, &mut out);
    Ok(out
        .iter()
        .zip(&psi)
        .map(|(h, p)| (h - cfg.omega_a * p).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BicReport {
    /// Analytic conditions satisfied.
    pub analytic_exists: bool,
    pub m: Option<i64>,
    /// Eigenvalues within `tol` of `omega_a`.
    pub candidates: usize,
    /// Smallest `|E - omega_a|` among all eigenvalues.
    pub eigenvalue_error: f64,
    /// `1 - |<psi_num | psi_analytic>|^2`, projecting the analytic state onto
    /// the candidate eigenspace (handles accidental degeneracy with band
    /// modes).
    pub overlap_defect: Option<f64>,
    /// Least field weight outside `(x_1, x_2)` of any normalized vector in the
    /// candidate eigenspace that has atomic weight above `1e-6`.
    pub min_exterior_weight: Option<f64>,
    /// A trapped eigenstate with an atomic component was found.
    pub found: bool,
}

/// Diagonalizes the Hamiltonian and looks for the trapped state near
/// `omega_a`.
pub fn verify_bic_numerically(cfg: &SystemConfig, tol: f64) -> Result<BicReport> {
    cfg.validate()?;
    let dim = cfg.sites + 1;
    if dim > MAX_DENSE_DIM {
        return Err(Error::DimensionTooLarge {
            dim,
            max: MAX_DENSE_DIM,
        });
    }
    if cfg.legs() != 2 {
        return Err(Error::Config(format!(
            "bound-state analysis needs two legs, got {}",
            cfg.legs()
        )));
    }
    let eig = SymmetricEigen::new(build_hamiltonian(cfg)?);
    let errors: Vec<f64> = eig.eigenvalues.iter().map(|e| (e - cfg.omega_a).abs()).collect();
    let eigenvalue_error = errors.iter().copied().fold(f64::INFINITY, f64::min);
    let idx: Vec<usize> = (0..dim).filter(|&i| errors[i] <= tol).collect();

    let analytic = build_bic(cfg).ok();
    let m = analytic.as_ref().map(|b| b.m);
    let mut report = BicReport {
        analytic_exists: analytic.is_some(),
        m,
        candidates: idx.len(),
        eigenvalue_error,
        overlap_defect: None,
        min_exterior_weight: None,
        found: false,
    };
    if idx.is_empty() {
        return Ok(report);
    }
    let basis = DMatrix::from_columns(
        &idx.iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );

    if let Some(bic) = &analytic {
        let psi = DVector::from_vec(bic.as_state().to_vector());
        let proj = basis.adjoint() * &psi;
        report.overlap_defect = Some((1.0 - proj.norm_squared()).max(0.0));
    }

    // minimize exterior weight over the candidate eigenspace
    let (x1, x2) = (cfg.first_site(), cfg.last_site());
    let mut ext = basis.clone();
    for r in 0..dim {
        let interior = r == 0 || (r - 1 > x1 && r - 1 < x2);
        if interior {
            ext.row_mut(r).fill(C64::default());
        }
    }
    let gram = ext.adjoint() * &ext;
    let sub = SymmetricEigen::new(gram);
    let mut best: Option<f64> = None;
    for (j, &w) in sub.eigenvalues.iter().enumerate() {
        let vec = &basis * sub.eigenvectors.column(j);
        if vec[0].norm_sqr() > 1e-6 && best.is_none_or(|b| w < b) {
            best = Some(w.max(0.0));
        }
    }
    report.min_exterior_weight = best;
    report.found = best.is_some_and(|w| w <= 1e-10);
    Ok(report)
}
