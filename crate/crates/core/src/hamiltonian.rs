//! Single-excitation Hamiltonian of the giant atom plus waveguide.
//!
//! Basis ordering: index 0 is the excited atom with an empty waveguide,
//! index `x + 1` is the ground-state atom with one photon on site `x`.
//! The interaction `g sigma sum_j e^{i phi_j} a^dag_{x_j} + h.c.` puts
//! `g e^{i phi_j}` at `(x_j + 1, 0)` and its conjugate `g e^{-i phi_j}` at
//! `(0, x_j + 1)`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::config::{Boundary, SystemConfig};
use crate::error::Result;

/// Dense `(N+1) x (N+1)` Hermitian matrix.
pub fn build_hamiltonian(cfg: &SystemConfig) -> Result<DMatrix<C64>> {
    cfg.validate()?;
    let n = cfg.sites;
    let mut h = DMatrix::<C64>::zeros(n + 1, n + 1);
    h[(0, 0)] = cfg.omega_a.into();
    let hop = C64::from(-cfg.hopping);
    for x in 0..n - 1 {
        h[(x + 1, x + 2)] += hop;
        h[(x + 2, x + 1)] += hop;
    }
    if cfg.boundary == Boundary::Ring && n > 2 {
        h[(1, n)] += hop;
        h[(n, 1)] += hop;
    }
    for p in &cfg.coupling_points {
        let to_field = C64::from_polar(cfg.g, p.phi);
        h[(p.x + 1, 0)] += to_field;
        h[(0, p.x + 1)] += to_field.conj();
    }
    Ok(h)
}

/// Matrix-free form of the same Hamiltonian, `O(N)` per application.
#[derive(Debug, Clone)]
pub struct LatticeOperator {
    sites: usize,
    hopping: f64,
    omega_a: f64,
    ring: bool,
    /// `(site, g e^{i phi})` per leg.
    legs: Vec<(usize, C64)>,
}

impl LatticeOperator {
    pub fn new(cfg: &SystemConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(LatticeOperator {
            sites: cfg.sites,
            hopping: cfg.hopping,
            omega_a: cfg.omega_a,
            ring: cfg.boundary == Boundary::Ring && cfg.sites > 2,
            legs: cfg
                .coupling_points
                .iter()
                .map(|p| (p.x, C64::from_polar(cfg.g, p.phi)))
                .collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.sites + 1
    }

    /// `out = H psi`.
    pub fn apply(&self, psi: &[C64], out: &mut [C64]) {
        let n = self.sites;
        let field = &psi[1..];
        let j = self.hopping;
        out[0] = psi[0] * self.omega_a;
        for x in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            if x > 0 {
                acc += field[x - 1];
            } else if self.ring {
                acc += field[n - 1];
            }
            if x + 1 < n {
                acc += field[x + 1];
            } else if self.ring {
                acc += field[0];
            }
            out[x + 1] = -j * acc;
        }
        for &(x, c) in &self.legs {
            out[0] += c.conj() * field[x];
            out[x + 1] += c * psi[0];
        }
    }
}

/// Momentum-space coupling `g_k = g/sqrt(N) sum_j e^{i(phi_j + k x_j)}`.
///
/// With the Fourier convention `a_x = sum_k e^{-ikx} a_k / sqrt(N)`, mode `k`
/// has spatial profile `e^{-ikx}`, so `g_{+k_a}` couples to the left-moving
/// resonant wave and `g_{-k_a}` to the right-moving one.
pub fn coupling_in_momentum_space(cfg: &SystemConfig, k: f64) -> C64 {
    let sum: C64 = cfg
        .coupling_points
        .iter()
        .map(|p| C64::from_polar(1.0, p.phi + k * p.x as f64))
        .sum();
    sum * (cfg.g / (cfg.sites as f64).sqrt())
}

/// The `N` allowed momenta of a ring, `2 pi m / N` for `m = 0..N`.
pub fn brillouin_grid(sites: usize) -> impl Iterator<Item = f64> {
    (0..sites).map(move |m| 2.0 * std::f64::consts::PI * m as f64 / sites as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::SymmetricEigen;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6};

    fn hermiticity_gap(h: &DMatrix<C64>) -> f64 {
        (h - h.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn free_ring_dispersion() {
        let cfg = SystemConfig::ring(4, 0.0, 1, &[0.0]);
        let h = build_hamiltonian(&cfg).unwrap();
        let lattice = h.view((1, 1), (4, 4)).into_owned();
        let mut eig: Vec<f64> = SymmetricEigen::new(lattice).eigenvalues.iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        let mut want: Vec<f64> = brillouin_grid(4).map(|k| -2.0 * k.cos()).collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in eig.iter().zip(&want) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(eig[0], -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig[2], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig[3], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn two_leg_atom_row() {
        let cfg = SystemConfig::reference(2, &[0.0, FRAC_PI_2]);
        let h = build_hamiltonian(&cfg).unwrap();
        let g = cfg.g;
        assert_abs_diff_eq!(h[(0, 46)].re, g, epsilon = 1e-15);
        assert_abs_diff_eq!(h[(0, 46)].im, 0.0, epsilon = 1e-15);
        // g e^{-i pi/2} = -i g
        assert_abs_diff_eq!(h[(0, 48)].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h[(0, 48)].im, -g, epsilon = 1e-15);
        assert_eq!(hermiticity_gap(&h), 0.0);
        // ring wraps, open chain does not
        assert_eq!(h[(1, 90)], C64::new(-1.0, 0.0));
        let open = build_hamiltonian(&cfg.clone().with_boundary(Boundary::OpenChain)).unwrap();
        assert_eq!(open[(1, 90)], C64::new(0.0, 0.0));
    }

    #[test]
    fn operator_matches_dense_matrix() {
        for boundary in [Boundary::Ring, Boundary::OpenChain] {
            let cfg = SystemConfig::ring(17, 0.3, 3, &[0.2, -1.1, 2.5]).with_boundary(boundary);
            let h = build_hamiltonian(&cfg).unwrap();
            let op = LatticeOperator::new(&cfg).unwrap();
            let psi: Vec<C64> = (0..18)
                .map(|i| C64::new((i as f64).sin(), (0.7 * i as f64).cos()))
                .collect();
            let mut out = vec![C64::default(); 18];
            op.apply(&psi, &mut out);
            let dense = &h * nalgebra::DVector::from_vec(psi.clone());
            for (a, b) in out.iter().zip(dense.iter()) {
                assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn real_couplings_are_time_reversal_symmetric() {
        let cfg = SystemConfig::reference(3, &[0.0, 0.0]);
        for k in brillouin_grid(90) {
            let a = coupling_in_momentum_space(&cfg, k).norm();
            let b = coupling_in_momentum_space(&cfg, -k).norm();
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn complex_coupling_is_chiral() {
        // d = 3, phi_c = pi/6 at k_a = pi/2
        let cfg = SystemConfig::reference(3, &[0.0, FRAC_PI_6]);
        let fwd = coupling_in_momentum_space(&cfg, FRAC_PI_2).norm();
        let bwd = coupling_in_momentum_space(&cfg, -FRAC_PI_2).norm();
        assert!(fwd > bwd, "{fwd} vs {bwd}");
    }

    #[test]
    fn maximal_chirality_zero() {
        // d = 1, phi_c = pi/2: 1 + e^{i(pi/2 + k)} vanishes at k = +pi/2
        let cfg = SystemConfig::reference(1, &[0.0, FRAC_PI_2]);
        assert!(coupling_in_momentum_space(&cfg, FRAC_PI_2).norm() < 1e-15);
        let other = coupling_in_momentum_space(&cfg, -FRAC_PI_2).norm();
        assert_abs_diff_eq!(other, 2.0 * cfg.g / 90f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn parseval_over_brillouin_zone() {
        for legs in 1..=4 {
            let phases: Vec<f64> = (0..legs).map(|j| 0.7 * j as f64 - 0.2).collect();
            let cfg = SystemConfig::ring(60, 0.25, 4, &phases);
            let total: f64 = brillouin_grid(60)
                .map(|k| coupling_in_momentum_space(&cfg, k).norm_sqr())
                .sum();
            assert_abs_diff_eq!(total, legs as f64 * 0.25 * 0.25, epsilon = 1e-12);
        }
    }
}
