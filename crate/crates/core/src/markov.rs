//! Master-equation rate, the `L`-leg Markovianity conditions and a
//! deviation-from-exponential metric.
//!
//! Rate bookkeeping: [`lindblad_rate`] returns a population rate; the
//! matching amplitude rate is half of it. An `L`-leg atom whose phases satisfy
//! every condition decays with amplitude rate `L g^2 / v`.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::phase::{as_rational_pi, wrap_phase};
use crate::trajectory::Trajectory;

/// Residual bound for a phase vector to count as Markovian.
pub const MARKOV_TOLERANCE: f64 = 1e-12;
/// Two solutions closer than this (modulo `2 pi`) are the same.
/// Loose because double roots (singular Jacobian) only converge to about
/// the square root of the residual target in position.
const DEDUP_TOLERANCE: f64 = 1e-6;
const TIE_TOLERANCE: f64 = 1e-9;
const NEWTON_ITERATIONS: usize = 80;
const POLISH_TARGET: f64 = 1e-14;

/// `gamma = Gamma [1 + cos(phi_c) cos(k_a d)]`, a population rate.
pub fn lindblad_rate(gamma: f64, phi_c: f64, k_a: f64, d: f64) -> f64 {
    gamma * (1.0 + phi_c.cos() * (k_a * d).cos())
}

/// `R_n = sum_{j=1}^{L-n} cos(phi_{n+j} - phi_j)` for `n = 1 .. L-1`.
pub fn markov_residuals(phases: &[f64]) -> Vec<f64> {
    let l = phases.len();
    (1..l)
        .map(|n| (0..l - n).map(|j| (phases[n + j] - phases[j]).cos()).sum())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseVector {
    pub phases: Vec<f64>,
    pub residuals: Vec<f64>,
    pub is_markovian: bool,
}

impl PhaseVector {
    pub fn from_phases(phases: Vec<f64>) -> Self {
        let residuals = markov_residuals(&phases);
        let is_markovian = max_abs(&residuals) <= MARKOV_TOLERANCE;
        PhaseVector {
            phases,
            residuals,
            is_markovian,
        }
    }

    pub fn max_residual(&self) -> f64 {
        max_abs(&self.residuals)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Canonical solution of the Markovianity conditions for `L` legs.
///
/// `phi_1 = 0` and `phi_L = pi/2` (which solves the `n = L-1` condition);
/// the remaining phases are chosen among all solutions by the smallest
/// `|phi_2|`, then `|phi_3|`, and so on, preferring the positive value on a
/// tie.
pub fn solve_markov_phases(legs: usize) -> Result<PhaseVector> {
    let mut all = markov_solution_set(legs)?;
    all.sort_by(|a, b| canonical_order(a, b));
    Ok(PhaseVector::from_phases(all.swap_remove(0)))
}

fn canonical_order(a: &[f64], b: &[f64]) -> Ordering {
    for (&x, &y) in a.iter().zip(b) {
        if (x.abs() - y.abs()).abs() > TIE_TOLERANCE {
            return x.abs().total_cmp(&y.abs());
        }
        if (x - y).abs() > TIE_TOLERANCE {
            // same magnitude, opposite sign: positive first
            return y.total_cmp(&x);
        }
    }
    Ordering::Equal
}

/// Every distinct solution (modulo `2 pi`) reachable from a deterministic
/// set of Newton starts, phases wrapped into `(-pi, pi]`.
pub fn markov_solution_set(legs: usize) -> Result<Vec<Vec<f64>>> {
    if legs < 2 {
        return Err(Error::Config(format!("need at least two legs, got {legs}")));
    }
    if legs == 2 {
        return Ok(vec![vec![0.0, FRAC_PI_2]]);
    }
    let unknowns = legs - 2;
    let starts = 96 * unknowns;
    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut best: Option<(Vec<f64>, f64)> = None;

    for k in 1..=starts {
        let x0 = kronecker_point(k, unknowns);
        let (x, res) = newton(&x0, legs);
        if best.as_ref().is_none_or(|(_, r)| res < *r) {
            best = Some((assemble(&x, legs), res));
        }
        if res > MARKOV_TOLERANCE {
            continue;
        }
        let sol = snap(assemble(&x, legs));
        if !found.iter().any(|f| same_mod_2pi(f, &sol)) {
            found.push(sol);
        }
    }
    if found.is_empty() {
        let (partial, residual) = best.unwrap_or((vec![0.0; legs], f64::INFINITY));
        return Err(Error::RootFinding {
            legs,
            partial,
            residual,
        });
    }
    found.sort_by(|a, b| canonical_order(a, b));
    Ok(found)
}

/// Low-discrepancy start in `(-pi, pi)^dim` (additive recurrence with
/// square roots of primes).
fn kronecker_point(k: usize, dim: usize) -> Vec<f64> {
    const PRIMES: [f64; 8] = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0];
    (0..dim)
        .map(|i| {
            let alpha = PRIMES[i % PRIMES.len()].sqrt().fract();
            let u = (k as f64 * alpha + 0.5 * i as f64 / dim as f64).fract();
            -PI + 2.0 * PI * u
        })
        .collect()
}

fn assemble(inner: &[f64], legs: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(legs);
    v.push(0.0);
    v.extend(inner.iter().map(|&p| wrap_phase(p)));
    v.push(FRAC_PI_2);
    v
}

/// Replaces components within `1e-6` of a `p pi / q` (`q <= 8`) by the exact
/// multiple when that does not worsen the residual.
fn snap(phases: Vec<f64>) -> Vec<f64> {
    let snapped: Vec<f64> = phases
        .iter()
        .map(|&p| match as_rational_pi(p, 8, 1e-6) {
            Some((num, den)) => wrap_phase(num as f64 * PI / den as f64),
            None => p,
        })
        .collect();
    let before = max_abs(&markov_residuals(&phases));
    let after = max_abs(&markov_residuals(&snapped));
    if after <= before.max(1e-15) {
        snapped
    } else {
        phases
    }
}

fn same_mod_2pi(a: &[f64], b: &[f64]) -> bool {
    a.iter()
        .zip(b)
        .all(|(&x, &y)| wrap_phase(x - y).abs() < DEDUP_TOLERANCE)
}

/// Residuals `n = 1 .. L-2` and their Jacobian with respect to the free
/// phases `phi_2 .. phi_{L-1}`.
fn system(inner: &[f64], legs: usize) -> (DVector<f64>, DMatrix<f64>) {
    let full = assemble_raw(inner, legs);
    let m = legs - 2;
    let mut f = DVector::zeros(m);
    let mut jac = DMatrix::zeros(m, m);
    for n in 1..=m {
        for j in 0..legs - n {
            let diff = full[n + j] - full[j];
            f[n - 1] += diff.cos();
            let s = -diff.sin();
            // free phase index k maps to full index k + 1
            if (1..=m).contains(&(n + j)) {
                jac[(n - 1, n + j - 1)] += s;
            }
            if (1..=m).contains(&j) {
                jac[(n - 1, j - 1)] -= s;
            }
        }
    }
    (f, jac)
}

fn assemble_raw(inner: &[f64], legs: usize) -> Vec<f64> {
    let mut v = vec![0.0];
    v.extend_from_slice(inner);
    v.push(FRAC_PI_2);
    debug_assert_eq!(v.len(), legs);
    v
}

/// Damped Newton with a pseudo-inverse step and backtracking.
fn newton(x0: &[f64], legs: usize) -> (Vec<f64>, f64) {
    let mut x = DVector::from_column_slice(x0);
    let (mut f, mut jac) = system(x.as_slice(), legs);
    let mut norm = f.amax();
    for _ in 0..NEWTON_ITERATIONS {
        if norm <= POLISH_TARGET {
            break;
        }
        let svd = jac.clone().svd(true, true);
        let Ok(step) = svd.solve(&(-&f), 1e-13) else { break };
        let mut lambda = 1.0;
        let mut improved = false;
        while lambda > 1e-6 {
            let trial = &x + lambda * &step;
            let (tf, tj) = system(trial.as_slice(), legs);
            if tf.amax() < norm {
                x = trial;
                f = tf;
                jac = tj;
                norm = f.amax();
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (x.as_slice().to_vec(), norm)
}

/// `max_t | |eps(t)| - e^{-rate t} |` over the trajectory's validity window.
pub fn markovianity_deviation(traj: &Trajectory, amplitude_rate: f64) -> f64 {
    traj.valid_range()
        .map(|i| (traj.eps[i].norm() - (-amplitude_rate * traj.times[i]).exp()).abs())
        .fold(0.0, f64::max)
}
