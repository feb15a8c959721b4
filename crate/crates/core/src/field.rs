//! Emitted field at the coupling points of a two-leg atom, split into the
//! part radiated directly (`exp`) and the part that travelled between the
//! legs (`del`).
//!
//! With `p = -i g e^{i phi_1} / v`:
//!
//! ```text
//! c1_b_exp = c1_f_exp = p eps(t)
//! c2_b_exp = c2_f_exp = p e^{i phi_c} eps(t)
//! c1_b_del = 2 p e^{i(phi_WG + phi_c)} Theta(t - t_d) eps(t - t_d)
//! c2_f_del = 2 p e^{i phi_WG}          Theta(t - t_d) eps(t - t_d)
//! ```
//!
//! The lattice amplitude at `x_j` is the average `(c_b + c_f) / 2`, and
//! `Theta(0) = 1/2`.

use std::io::Write;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldSpec {
    pub g: f64,
    pub v: f64,
    pub k_a: f64,
    pub phi_1: f64,
    pub phi_c: f64,
    pub phi_wg: f64,
    pub t_d: f64,
}

impl FieldSpec {
    pub fn from_config(cfg: &SystemConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.legs() != 2 {
            return Err(Error::Config(format!(
                "field decomposition needs two legs, got {}",
                cfg.legs()
            )));
        }
        let k = cfg.derived();
        Ok(FieldSpec {
            g: cfg.g,
            v: k.v,
            k_a: k.k_a,
            phi_1: cfg.coupling_points[0].phi,
            phi_c: k.phi_c.unwrap_or(0.0),
            phi_wg: k.phi_wg.unwrap_or(0.0),
            t_d: k.t_d.unwrap_or(0.0),
        })
    }

    /// `-i g e^{i phi_1} / v`.
    pub fn prefactor(&self) -> C64 {
        C64::new(0.0, -1.0) * C64::from_polar(self.g / self.v, self.phi_1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldComponents {
    pub times: Vec<f64>,
    pub c1_b_exp: Vec<C64>,
    pub c1_b_del: Vec<C64>,
    pub c1_f_exp: Vec<C64>,
    pub c2_b_exp: Vec<C64>,
    pub c2_f_exp: Vec<C64>,
    pub c2_f_del: Vec<C64>,
}

impl FieldComponents {
    pub fn c1_b(&self, i: usize) -> C64 {
        self.c1_b_exp[i] + self.c1_b_del[i]
    }

    pub fn c1_f(&self, i: usize) -> C64 {
        self.c1_f_exp[i]
    }

    pub fn c2_b(&self, i: usize) -> C64 {
        self.c2_b_exp[i]
    }

    pub fn c2_f(&self, i: usize) -> C64 {
        self.c2_f_exp[i] + self.c2_f_del[i]
    }

    /// Amplitude on the coupling site `x_j` (`j` = 1 or 2).
    pub fn point_value(&self, leg: usize, i: usize) -> C64 {
        match leg {
            1 => 0.5 * (self.c1_b(i) + self.c1_f(i)),
            _ => 0.5 * (self.c2_b(i) + self.c2_f(i)),
        }
    }

    fn index_of(&self, t: f64) -> Result<usize> {
        let step = match self.times.as_slice() {
            [a, b, ..] => b - a,
            _ => return Err(Error::OffGrid { t, step: 0.0 }),
        };
        let raw = (t - self.times[0]) / step;
        let i = raw.round();
        if i < 0.0 || (raw - i).abs() > 1e-6 || i as usize >= self.times.len() {
            return Err(Error::OffGrid { t, step });
        }
        Ok(i as usize)
    }

    /// One row per sample: `t` then real and imaginary parts of every
    /// component.
    pub fn write_csv<W: Write>(&self, mut out: W, header_comment: Option<&str>) -> Result<()> {
        if let Some(c) = header_comment {
            for line in c.lines() {
                writeln!(out, "# {line}")?;
            }
        }
        let names = ["c1_b_exp", "c1_b_del", "c1_f_exp", "c2_b_exp", "c2_f_exp", "c2_f_del"];
        let header: Vec<String> = names
            .iter()
            .flat_map(|n| [format!("re_{n}"), format!("im_{n}")])
            .collect();
        writeln!(out, "t,{}", header.join(","))?;
        for i in 0..self.times.len() {
            write!(out, "{:.10e}", self.times[i])?;
            for col in [
                &self.c1_b_exp,
                &self.c1_b_del,
                &self.c1_f_exp,
                &self.c2_b_exp,
                &self.c2_f_exp,
                &self.c2_f_del,
            ] {
                write!(out, ",{:.15e},{:.15e}", col[i].re, col[i].im)?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Lag of `t_d` in samples of a uniform grid starting at 0.
fn delay_lag(eps: &Trajectory, t_d: f64) -> Result<usize> {
    let ratio = t_d / eps.dt;
    let lag = ratio.round();
    if eps.times.first() != Some(&0.0) || (ratio - lag).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::OffGrid { t: t_d, step: eps.dt });
    }
    Ok(lag as usize)
}

/// Evaluates every component on the trajectory grid.
pub fn field_at_coupling_points(eps: &Trajectory, spec: &FieldSpec) -> Result<FieldComponents> {
    let lag = delay_lag(eps, spec.t_d)?;
    let p = spec.prefactor();
    let n = eps.len();
    let delayed = |i: usize| -> C64 {
        match i.cmp(&lag) {
            std::cmp::Ordering::Less => C64::default(),
            std::cmp::Ordering::Equal => 0.5 * eps.eps[0],
            std::cmp::Ordering::Greater => eps.eps[i - lag],
        }
    };
    let rot_c = C64::from_polar(1.0, spec.phi_c);
    let back = 2.0 * p * C64::from_polar(1.0, spec.phi_wg + spec.phi_c);
    let fwd = 2.0 * p * C64::from_polar(1.0, spec.phi_wg);
    let direct: Vec<C64> = eps.eps.iter().map(|&e| p * e).collect();
    Ok(FieldComponents {
        times: eps.times.clone(),
        c1_b_exp: direct.clone(),
        c1_b_del: (0..n).map(|i| back * delayed(i)).collect(),
        c1_f_exp: direct.clone(),
        c2_b_exp: direct.iter().map(|&c| c * rot_c).collect(),
        c2_f_exp: direct.iter().map(|&c| c * rot_c).collect(),
        c2_f_del: (0..n).map(|i| fwd * delayed(i)).collect(),
    })
}

/// `c1_b_del e^{-i phi_1} + c2_f_del e^{-i phi_2}`, the part of the field
/// that feeds back into the atom; proportional to `cos(phi_c)`.
pub fn delay_feedback_amplitude(components: &FieldComponents, spec: &FieldSpec, t: f64) -> Result<C64> {
    let i = components.index_of(t)?;
    let phi_2 = spec.phi_1 + spec.phi_c;
    Ok(components.c1_b_del[i] * C64::from_polar(1.0, -spec.phi_1)
        + components.c2_f_del[i] * C64::from_polar(1.0, -phi_2))
}

/// Maximum deviation between lattice amplitudes and the analytic
/// components over `[t0, t1]`.
///
/// Checks the coupling sites themselves and the outer neighbours
/// `x_1 - 1` (purely left-moving) and `x_2 + 1` (purely right-moving), which
/// see the outgoing field one site of travel later. The lattice trajectory
/// must carry probes at all four sites.
pub fn compare_with_lattice_field(
    lattice: &Trajectory,
    components: &FieldComponents,
    cfg: &SystemConfig,
    window: (f64, f64),
) -> Result<f64> {
    let spec = FieldSpec::from_config(cfg)?;
    let (x1, x2) = (cfg.first_site(), cfg.last_site());
    if x1 == 0 || x2 + 1 >= cfg.sites {
        return Err(Error::Config(
            "probe sites x_1 - 1 and x_2 + 1 must lie on the waveguide".into(),
        ));
    }
    let p1 = lattice.probe(x1)?;
    let p2 = lattice.probe(x2)?;
    let left = lattice.probe(x1 - 1)?;
    let right = lattice.probe(x2 + 1)?;
    let hop = delay_lag(lattice, 1.0 / spec.v)?;
    let phase = C64::from_polar(1.0, spec.k_a);

    let mut worst: f64 = 0.0;
    for (i, &t) in lattice.times.iter().enumerate() {
        if t < window.0 - 1e-12 || t > window.1 + 1e-12 {
            continue;
        }
        let j = components.index_of(t)?;
        worst = worst.max((p1.samples[i] - components.point_value(1, j)).norm());
        worst = worst.max((p2.samples[i] - components.point_value(2, j)).norm());
        if j >= hop {
            let k = j - hop;
            let out_left = phase * (components.c1_b_exp[k] + 0.5 * components.c1_b_del[k]);
            let out_right = phase * (components.c2_f_exp[k] + 0.5 * components.c2_f_del[k]);
            worst = worst.max((left.samples[i] - out_left).norm());
            worst = worst.max((right.samples[i] - out_right).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dde::{integrate, DdeSpec};
    use crate::lattice::{evolve_with, LatticeOptions};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    fn components_for(cfg: &SystemConfig, t_max: f64) -> (FieldSpec, FieldComponents) {
        let spec = FieldSpec::from_config(cfg).unwrap();
        let tr = integrate(&DdeSpec::from_config(cfg).unwrap(), t_max, 100).unwrap();
        let comps = field_at_coupling_points(&tr, &spec).unwrap();
        (spec, comps)
    }

    #[test]
    fn delay_parts_vanish_before_t_d() {
        let cfg = SystemConfig::reference(4, &[0.0, 0.4]);
        let (spec, c) = components_for(&cfg, 5.0);
        for (i, &t) in c.times.iter().enumerate() {
            if t < spec.t_d - 1e-12 {
                assert_eq!(c.c1_b_del[i], C64::default());
                assert_eq!(c.c2_f_del[i], C64::default());
            }
        }
        let last = c.times.len() - 1;
        assert!(c.c1_b_del[last].norm() > 0.0);
    }

    #[test]
    fn direct_magnitudes() {
        let cfg = SystemConfig::reference(3, &[0.2, 1.7]);
        let (spec, c) = components_for(&cfg, 4.0);
        let tr = integrate(&DdeSpec::from_config(&cfg).unwrap(), 4.0, 100).unwrap();
        for i in 0..c.times.len() {
            let want = spec.g / spec.v * tr.eps[i].norm();
            assert_abs_diff_eq!(c.c2_b_exp[i].norm(), want, epsilon = 1e-15);
            assert_abs_diff_eq!(c.c1_f_exp[i].norm(), want, epsilon = 1e-15);
        }
    }

    #[test]
    fn feedback_scales_with_cos_phi_c() {
        let t = 3.0;
        let amp = |phi_c: f64| {
            let cfg = SystemConfig::reference(2, &[0.0, phi_c]);
            let (spec, c) = components_for(&cfg, 4.0);
            delay_feedback_amplitude(&c, &spec, t).unwrap()
        };
        assert!(amp(FRAC_PI_2).norm() < 1e-16);
        let zero = amp(0.0);
        assert!(zero.norm() > 1e-3);
        // phi_c = 0: 4 p e^{i phi_WG} eps(t - t_d); magnitude 4 (g/v) |eps|
        let cfg = SystemConfig::reference(2, &[0.0, 0.0]);
        let tr = integrate(&DdeSpec::from_config(&cfg).unwrap(), 4.0, 100).unwrap();
        let eps_del = tr.eps_at(t - 1.0).unwrap();
        assert_abs_diff_eq!(zero.norm(), 4.0 * 0.1 * eps_del.norm(), epsilon = 1e-14);
        // phi_c = pi/3 halves the cosine, but eps(t - t_d) also differs,
        // so compare the closed-form ratio at the same history
        let cfg3 = SystemConfig::reference(2, &[0.0, FRAC_PI_3]);
        let (spec3, _) = components_for(&cfg3, 4.0);
        let c3 = field_at_coupling_points(&tr, &spec3).unwrap();
        let third = delay_feedback_amplitude(&c3, &spec3, t).unwrap();
        assert_abs_diff_eq!(third.norm(), 0.5 * zero.norm(), epsilon = 1e-14);
    }

    #[test]
    fn misaligned_grid_is_rejected() {
        let cfg = SystemConfig::reference(2, &[0.0, 0.0]);
        let spec = FieldSpec::from_config(&cfg).unwrap();
        let tr = integrate(&DdeSpec::two_leg(0.08, 0.0, PI, 0.7).unwrap(), 3.0, 50).unwrap();
        assert!(matches!(
            field_at_coupling_points(&tr, &spec),
            Err(Error::OffGrid { .. })
        ));
    }

    #[test]
    fn csv_has_thirteen_columns() {
        let cfg = SystemConfig::reference(2, &[0.0, 0.3]);
        let (_, c) = components_for(&cfg, 1.0);
        let mut buf = Vec::new();
        c.write_csv(&mut buf, Some("hash")).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().nth(1).unwrap();
        assert_eq!(header.split(',').count(), 13);
        assert!(header.starts_with("t,re_c1_b_exp,im_c1_b_exp"));
    }

    fn lattice_deviation(g: f64, phi_c: f64, windows: &[(f64, f64)]) -> Vec<f64> {
        let cfg = SystemConfig::ring(200, g, 2, &[0.0, phi_c]);
        let (x1, x2) = (cfg.first_site(), cfg.last_site());
        let t_max = windows.iter().fold(0.0f64, |m, w| m.max(w.1));
        let opts = LatticeOptions::new(0.01).with_probes(&[x1 - 1, x1, x2, x2 + 1]);
        let lat = evolve_with(&cfg, t_max, &opts).unwrap();
        let spec = FieldSpec::from_config(&cfg).unwrap();
        let tr = integrate(&DdeSpec::from_config(&cfg).unwrap(), t_max, 100).unwrap();
        let comps = field_at_coupling_points(&tr, &spec).unwrap();
        windows
            .iter()
            .map(|&w| compare_with_lattice_field(&lat, &comps, &cfg, w).unwrap())
            .collect()
    }

    #[test]
    fn lattice_agreement_improves_at_weaker_coupling() {
        let w = [(20.0, 40.0)];
        let strong = lattice_deviation(0.2, 0.0, &w)[0];
        let weak = lattice_deviation(0.05, 0.0, &w)[0];
        assert!(weak < strong, "{weak} vs {strong}");
    }

    #[test]
    fn quadrature_phase_components_track_the_lattice() {
        // the residual is the lattice switch-on transient, which dies out
        let dev = lattice_deviation(0.2, FRAC_PI_2, &[(2.0, 12.0), (40.0, 60.0)]);
        assert!(dev[1] < 0.6 * dev[0], "{dev:?}");
        assert!(dev[1] < 0.3 * 0.1, "{dev:?}");
    }

    #[test]
    fn missing_probes_are_reported() {
        let cfg = SystemConfig::reference(2, &[0.0, 0.0]);
        let lat = crate::lattice::evolve(&cfg, 1.0, 0.01).unwrap();
        let (_, comps) = components_for(&cfg, 1.0);
        assert!(matches!(
            compare_with_lattice_field(&lat, &comps, &cfg, (0.0, 1.0)),
            Err(Error::MissingSnapshots(_))
        ));
    }
}
