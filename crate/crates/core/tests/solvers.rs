//! Cross-solver agreement and physical sanity checks.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, PI};

use giant_atom::collision::{chain_emission_fractions, emission_fractions, run_collision_chain, run_collisions};
use giant_atom::dde::{integrate, DdeSpec};
use giant_atom::lattice::{evolve, evolve_eigenbasis, evolve_with, fit_decay_rate, LatticeOptions};
use giant_atom::SystemConfig;

#[test]
fn light_cone_is_respected() {
    let cfg = SystemConfig::ring(200, 0.2, 2, &[0.0, 0.7]);
    let opts = LatticeOptions::default().with_snapshots(0.5);
    let tr = evolve_with(&cfg, 30.0, &opts).unwrap();
    let (x1, x2) = (cfg.first_site() as f64, cfg.last_site() as f64);
    let v = cfg.derived().v;
    assert!(!tr.snapshots.is_empty());
    for snap in &tr.snapshots {
        for (x, c) in snap.field.iter().enumerate() {
            let x = x as f64;
            let dist = if x < x1 {
                x1 - x
            } else if x > x2 {
                x - x2
            } else {
                0.0
            };
            if snap.t < (dist - 2.0) / v {
                assert!(c.norm_sqr() < 1e-4, "site {x} at t={} holds {}", snap.t, c.norm_sqr());
            }
        }
    }
}

#[test]
fn rk4_agrees_with_eigenbasis_evolution() {
    let cfg = SystemConfig::ring(80, 0.2, 3, &[0.0, 2.0]);
    let rk = evolve(&cfg, 10.0, 0.01).unwrap();
    let eig = evolve_eigenbasis(&cfg, &rk.times).unwrap();
    let worst = rk
        .eps
        .iter()
        .zip(&eig.eps)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn gauge_fix_leaves_the_dynamics_unchanged() {
    let cfg = SystemConfig::reference(3, &[1.1, 1.1 + 0.4]);
    let fixed = cfg.gauge_fix();
    assert_eq!(fixed.phases()[0], 0.0);
    let a = evolve(&cfg, 15.0, 0.01).unwrap();
    let b = evolve(&fixed, 15.0, 0.01).unwrap();
    for (x, y) in a.eps.iter().zip(&b.eps) {
        assert!((x.norm() - y.norm()).abs() < 1e-12);
    }
}

#[test]
fn small_atom_decays_at_the_single_point_rate() {
    let cfg = SystemConfig::reference(1, &[0.0]);
    let tr = evolve(&cfg, 30.0, 0.01).unwrap();
    let rate = fit_decay_rate(&tr, (1.0, 30.0)).unwrap();
    // one coupling point contributes half of the two-point rate scale
    let gamma = cfg.derived().gamma / 2.0;
    assert!((rate - gamma).abs() / gamma < 0.05, "{rate} vs {gamma}");
    let dde = integrate(&DdeSpec::from_config(&cfg).unwrap(), 30.0, 50).unwrap();
    assert!(dde.max_population_deviation(0.0, 30.0, |t| (-gamma * t).exp()) < 1e-10);
}

#[test]
fn lattice_approaches_the_dde_plateau() {
    let cfg = SystemConfig::ring(300, 0.2, 2, &[0.0, 0.0]);
    let lat = evolve(&cfg, 60.0, 0.01).unwrap();
    let dde = integrate(&DdeSpec::from_config(&cfg).unwrap(), 60.0, 50).unwrap();
    let late = (lat.eps_at(60.0).unwrap().norm_sqr() - dde.eps_at(60.0).unwrap().norm_sqr()).abs();
    assert!(late < 2e-2, "{late}");
}

#[test]
fn collision_tracks_the_dde_population() {
    let cfg = SystemConfig::reference(3, &[0.0, 1.0]);
    // t_d = 1.5 with 150 substeps puts the DDE on the collision grid
    let dde = integrate(&DdeSpec::from_config(&cfg).unwrap(), 20.0, 150).unwrap();
    let col = run_collisions(&cfg, 20.0, 0.01).unwrap();
    for (&t, e) in col.times.iter().zip(&col.eps) {
        let d = (e.norm_sqr() - dde.eps_at(t).unwrap().norm_sqr()).abs();
        assert!(d < 5e-3, "t={t}: {d}");
    }
}

#[test]
fn weak_chirality_favours_forward_emission() {
    let cfg = SystemConfig::ring(600, 0.2, 1, &[0.0, FRAC_PI_6]);
    let tr = evolve_with(&cfg, 100.0, &LatticeOptions::new(0.01).with_final_state()).unwrap();
    let state = tr.final_state.as_ref().unwrap();
    let (fwd, bwd) = emission_fractions(&cfg, state).unwrap();
    assert!(fwd > bwd && bwd > 0.01, "{fwd} {bwd}");
    assert!((fwd + bwd - (1.0 - state.eps.norm_sqr())).abs() < 1e-6);
}

#[test]
fn emission_needs_a_decayed_atom() {
    let cfg = SystemConfig::reference(1, &[0.0, 0.0]);
    let tr = evolve_with(&cfg, 5.0, &LatticeOptions::new(0.01).with_final_state()).unwrap();
    assert!(emission_fractions(&cfg, tr.final_state.as_ref().unwrap()).is_err());
}

#[test]
fn collision_chain_backward_leak_is_the_uncancelled_head() {
    // before t_d only the first leg radiates left; afterwards the second leg
    // cancels it, so the backward weight is about (Gamma/4) t_d
    let cfg = SystemConfig::reference(1, &[0.0, FRAC_PI_2]);
    let d = cfg.derived();
    let run = run_collision_chain(&cfg, 100.0, 0.01).unwrap();
    let (fwd, bwd) = chain_emission_fractions(&run.chain).unwrap();
    let head = d.gamma / 4.0 * d.t_d.unwrap();
    assert!((bwd - head).abs() / head < 0.05, "{bwd} vs {head}");
    assert!(fwd > 0.98);
    let cfg = SystemConfig::reference(1, &[0.0, 0.0]);
    let run = run_collision_chain(&cfg, 100.0, 0.01).unwrap();
    let (fwd, bwd) = chain_emission_fractions(&run.chain).unwrap();
    assert!((fwd - bwd).abs() < 1e-9, "{fwd} {bwd}");
}

#[test]
fn pi_phase_kills_the_feedback_sign() {
    // phi_c = pi with phi_WG = pi is the same interference as phi_c = 0, phi_WG = 0
    let a = integrate(&DdeSpec::two_leg(0.08, PI, PI, 1.0).unwrap(), 20.0, 50).unwrap();
    let b = integrate(&DdeSpec::two_leg(0.08, 0.0, 0.0, 1.0).unwrap(), 20.0, 50).unwrap();
    for (x, y) in a.eps.iter().zip(&b.eps) {
        assert!((x - y).norm() < 1e-12);
    }
}
