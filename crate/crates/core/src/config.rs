//! Physical configuration of a giant atom on a tight-binding waveguide.
//!
//! Units: energies in units of the hopping `J` as given, times in inverse
//! energy, distances in lattice sites. The atom sits at row/column 0 of every
//! matrix; waveguide site `x` is row `x + 1`.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::phase::{deserialize_phase, serialize_phase};

/// Above this coupling ratio the linear-dispersion picture is unreliable.
pub const WEAK_COUPLING_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    #[default]
    Ring,
    OpenChain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingPoint {
    /// Waveguide site index.
    pub x: usize,
    /// Coupling phase in radians.
    #[serde(deserialize_with = "deserialize_phase", serialize_with = "serialize_phase")]
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    #[serde(rename = "J")]
    pub hopping: f64,
    pub g: f64,
    #[serde(default)]
    pub omega_a: f64,
    #[serde(rename = "N")]
    pub sites: usize,
    #[serde(default)]
    pub boundary: Boundary,
    pub coupling_points: Vec<CouplingPoint>,
}

/// Quantities that follow from a [`SystemConfig`]; always recomputed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedConstants {
    /// Resonant momentum, `arccos(-omega_a / 2J)`.
    pub k_a: f64,
    /// Group velocity at `k_a`, `2J sin k_a`.
    pub v: f64,
    /// Two-leg decay rate `4 g^2 / v` (population rate of the Markovian atom).
    pub gamma: f64,
    /// Travel time between neighbouring legs, `d / v` (absent for one leg).
    pub t_d: Option<f64>,
    /// Optical length `k_a d` between neighbouring legs.
    pub phi_wg: Option<f64>,
    /// Coupling phase difference `phi_2 - phi_1`.
    pub phi_c: Option<f64>,
}

impl SystemConfig {
    /// Reference waveguide and atom parameters:
    /// `J = 1`, `g = 0.2`, `omega_a = 0` (so `k_a = pi/2`, `v = 2`),
    /// `N = 90` ring, first leg at `N/2`.
    pub fn reference(spacing: usize, phases: &[f64]) -> Self {
        Self::ring(90, 0.2, spacing, phases)
    }

    /// Ring of `sites` resonators with `J = 1`, `omega_a = 0` and legs
    /// starting at the middle site.
    pub fn ring(sites: usize, g: f64, spacing: usize, phases: &[f64]) -> Self {
        let x1 = sites / 2;
        SystemConfig {
            hopping: 1.0,
            g,
            omega_a: 0.0,
            sites,
            boundary: Boundary::Ring,
            coupling_points: phases
                .iter()
                .enumerate()
                .map(|(j, &phi)| CouplingPoint {
                    x: x1 + j * spacing,
                    phi,
                })
                .collect(),
        }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SystemConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn legs(&self) -> usize {
        self.coupling_points.len()
    }

    pub fn phases(&self) -> Vec<f64> {
        self.coupling_points.iter().map(|p| p.phi).collect()
    }

    /// Spacing between consecutive legs; `None` for a small atom.
    pub fn spacing(&self) -> Option<usize> {
        match self.coupling_points.as_slice() {
            [a, b, ..] => Some(b.x.saturating_sub(a.x)),
            _ => None,
        }
    }

    pub fn first_site(&self) -> usize {
        self.coupling_points[0].x
    }

    pub fn last_site(&self) -> usize {
        self.coupling_points[self.legs() - 1].x
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.hopping.is_finite() && self.hopping > 0.0) {
            return bad(format!("hopping J must be positive, got {}", self.hopping));
        }
        if !self.g.is_finite() || self.g < 0.0 {
            return bad(format!("coupling g must be real and non-negative, got {}", self.g));
        }
        if !self.omega_a.is_finite() || self.omega_a.abs() >= 2.0 * self.hopping {
            return bad(format!(
                "omega_a = {} lies outside the open band (-2J, 2J)",
                self.omega_a
            ));
        }
        if self.sites < 2 {
            return bad(format!("need at least two resonators, got N = {}", self.sites));
        }
        if self.coupling_points.is_empty() {
            return bad("at least one coupling point is required".into());
        }
        for p in &self.coupling_points {
            if p.x >= self.sites {
                return bad(format!("coupling point x = {} outside [0, {})", p.x, self.sites));
            }
            if !p.phi.is_finite() {
                return bad(format!("coupling phase at x = {} is not finite", p.x));
            }
        }
        for (j, w) in self.coupling_points.windows(2).enumerate() {
            if w[1].x <= w[0].x {
                return bad(format!(
                    "coupling points must be strictly increasing (legs {j}, {})",
                    j + 1
                ));
            }
        }
        if let Some(d) = self.spacing() {
            for (j, w) in self.coupling_points.windows(2).enumerate() {
                if w[1].x - w[0].x != d {
                    return bad(format!(
                        "coupling points must be equally spaced: spacing {} between legs {j} and {} differs from d = {d}",
                        w[1].x - w[0].x,
                        j + 1
                    ));
                }
            }
        }
        Ok(())
    }

    /// Soft warnings that do not invalidate the configuration.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.g / self.hopping > WEAK_COUPLING_LIMIT {
            out.push(format!(
                "g/J = {:.3} is outside the weak-coupling regime (> {WEAK_COUPLING_LIMIT})",
                self.g / self.hopping
            ));
        }
        out
    }

    pub fn derived(&self) -> DerivedConstants {
        let k_a = (-self.omega_a / (2.0 * self.hopping)).acos();
        let v = 2.0 * self.hopping * k_a.sin();
        let gamma = 4.0 * self.g * self.g / v;
        let d = self.spacing().map(|d| d as f64);
        DerivedConstants {
            k_a,
            v,
            gamma,
            t_d: d.map(|d| d / v),
            phi_wg: d.map(|d| k_a * d),
            phi_c: match self.coupling_points.as_slice() {
                [a, b, ..] => Some(b.phi - a.phi),
                _ => None,
            },
        }
    }

    /// Shifts every phase by `-phi_1`, so the first leg has phase 0.
    pub fn gauge_fix(&self) -> SystemConfig {
        let mut out = self.clone();
        let phi1 = self.coupling_points.first().map_or(0.0, |p| p.phi);
        for p in &mut out.coupling_points {
            p.phi -= phi1;
        }
        out
    }

    /// Time before light emitted by the outermost legs, travelling away from
    /// the atom, can return to the coupling region (wrap-around on a ring,
    /// reflection on an open chain), with a 10% margin.
    pub fn validity_horizon(&self) -> f64 {
        let v = self.derived().v;
        let span = self.last_site() - self.first_site();
        let free = match self.boundary {
            Boundary::Ring => (self.sites - span) as f64,
            Boundary::OpenChain => {
                let left = self.first_site() as f64;
                let right = (self.sites - 1 - self.last_site()) as f64;
                2.0 * left.min(right)
            }
        };
        0.9 * free / v
    }

    /// Stable hash of the canonical JSON form.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// One-excitation state: atomic amplitude plus one amplitude per site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeState {
    pub eps: num_complex::Complex64,
    pub field: Vec<num_complex::Complex64>,
}

impl AmplitudeState {
    pub fn excited(sites: usize) -> Self {
        AmplitudeState {
            eps: 1.0.into(),
            field: vec![0.0.into(); sites],
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.eps.norm_sqr() + self.field.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Flattens to the `(N+1)`-vector used by the Hamiltonian (atom first).
    pub fn to_vector(&self) -> Vec<num_complex::Complex64> {
        std::iter::once(self.eps).chain(self.field.iter().copied()).collect()
    }

    pub fn from_vector(v: &[num_complex::Complex64]) -> Self {
        AmplitudeState {
            eps: v[0],
            field: v[1..].to_vec(),
        }
    }
}

/// Resonant momentum for an atomic frequency on a band of hopping `j`.
pub fn resonant_momentum(omega_a: f64, j: f64) -> f64 {
    (-omega_a / (2.0 * j)).acos()
}

/// `true` when `k` is an integer multiple of `pi` within `tol`.
pub(crate) fn is_multiple_of_pi(k: f64, tol: f64) -> Option<i64> {
    let m = (k / PI).round();
    ((k - m * PI).abs() <= tol).then_some(m as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn reference_constants() {
        let cfg = SystemConfig::reference(2, &[0.0, FRAC_PI_2]);
        let k = cfg.derived();
        assert_abs_diff_eq!(k.k_a, FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(k.v, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(k.gamma, 0.08, epsilon = 1e-15);
        assert_abs_diff_eq!(k.t_d.unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(k.phi_wg.unwrap(), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(k.phi_c.unwrap(), FRAC_PI_2, epsilon = 1e-15);
        assert_eq!(cfg.first_site(), 45);
        assert_eq!(cfg.last_site(), 47);
        assert!(cfg.validate().is_ok());
        assert!(cfg.warnings().is_empty());
    }

    #[test]
    fn rejects_bad_geometry() {
        let mut cfg = SystemConfig::reference(2, &[0.0, 0.0]);
        cfg.coupling_points[1].x = 90;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));

        let mut cfg = SystemConfig::reference(2, &[0.0, 0.0, 0.0]);
        cfg.coupling_points[2].x += 1;
        assert!(cfg.validate().is_err());

        let mut cfg = SystemConfig::reference(2, &[0.0, 0.0]);
        cfg.coupling_points.swap(0, 1);
        assert!(cfg.validate().is_err());

        let mut cfg = SystemConfig::reference(2, &[0.0]);
        cfg.omega_a = 2.5;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn strong_coupling_warns() {
        let cfg = SystemConfig::reference(1, &[0.0, 0.0]).with_g(0.8);
        assert_eq!(cfg.warnings().len(), 1);
    }

    #[test]
    fn gauge_fix_examples() {
        let cfg = SystemConfig::reference(2, &[0.3, 0.3 + FRAC_PI_2]).gauge_fix();
        assert_abs_diff_eq!(cfg.coupling_points[0].phi, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cfg.coupling_points[1].phi, FRAC_PI_2, epsilon = 1e-15);

        let cfg = SystemConfig::reference(2, &[0.0, 0.0]);
        assert_eq!(cfg.gauge_fix(), cfg);
    }

    #[test]
    fn parses_toml_with_pi_strings() {
        let text = r#"
            J = 1.0
            g = 0.2
            omega_a = 0.0
            N = 90
            boundary = "open-chain"
            coupling_points = [ { x = 45, phi = 0 }, { x = 47, phi = "pi/2" } ]
        "#;
        let cfg = SystemConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.boundary, Boundary::OpenChain);
        assert_eq!(cfg.spacing(), Some(2));
        assert_abs_diff_eq!(cfg.coupling_points[1].phi, FRAC_PI_2, epsilon = 1e-15);
    }

    #[test]
    fn toml_rejects_out_of_range_point() {
        let text = r#"
            J = 1.0
            g = 0.2
            N = 10
            coupling_points = [ { x = 5, phi = 0 }, { x = 12, phi = 0 } ]
        "#;
        assert!(SystemConfig::from_toml_str(text).is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = SystemConfig::reference(2, &[0.0, FRAC_PI_2]);
        let b = SystemConfig::reference(2, &[0.0, FRAC_PI_2]);
        let c = SystemConfig::reference(3, &[0.0, FRAC_PI_2]);
        assert_eq!(a.config_hash(), b.config_hash());
        assert_ne!(a.config_hash(), c.config_hash());
    }

    #[test]
    fn validity_horizon_ring_and_open() {
        let ring = SystemConfig::reference(6, &[0.0, 0.0]);
        assert_abs_diff_eq!(ring.validity_horizon(), 0.9 * 84.0 / 2.0, epsilon = 1e-12);
        let open = ring.clone().with_boundary(Boundary::OpenChain);
        // legs at 45 and 51; nearest edge is 38 sites right of the last leg
        assert_abs_diff_eq!(open.validity_horizon(), 0.9 * 2.0 * 38.0 / 2.0, epsilon = 1e-12);
    }
}
