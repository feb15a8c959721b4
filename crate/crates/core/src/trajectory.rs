//! Time series produced by every solver, plus CSV/JSON emitters.

use std::io::Write;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::config::AmplitudeState;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverTag {
    Lattice,
    Dde,
    Collision,
}

impl std::fmt::Display for SolverTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolverTag::Lattice => "lattice",
            SolverTag::Dde => "dde",
            SolverTag::Collision => "collision",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSnapshot {
    pub t: f64,
    pub field: Vec<C64>,
}

/// Amplitude on one waveguide site, recorded at every entry of `times`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSeries {
    pub site: usize,
    pub samples: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub solver: SolverTag,
    pub times: Vec<f64>,
    pub eps: Vec<C64>,
    /// Uniform spacing of `times`.
    pub dt: f64,
    /// Beyond this time finite-size artifacts may contaminate the dynamics.
    pub t_max_valid: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshots: Vec<FieldSnapshot>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub probes: Vec<ProbeSeries>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_state: Option<AmplitudeState>,
    /// Largest `|1 - norm|` seen at a stored sample (lattice and collision).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_norm_drift: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

impl Trajectory {
    pub(crate) fn new(solver: SolverTag, dt: f64, t_max_valid: f64) -> Self {
        Trajectory {
            solver,
            times: Vec::new(),
            eps: Vec::new(),
            dt,
            t_max_valid,
            snapshots: Vec::new(),
            probes: Vec::new(),
            final_state: None,
            max_norm_drift: None,
            warnings: Vec::new(),
            config_hash: None,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.eps.iter().map(|e| e.norm_sqr()).collect()
    }

    pub fn last_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// Index of the sample at time `t`; errors if `t` is not on the grid.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let step = self.dt;
        let raw = (t - self.times[0]) / step;
        let i = raw.round();
        if i < 0.0 || (raw - i).abs() > 1e-6 || i as usize >= self.times.len() {
            return Err(Error::OffGrid { t, step });
        }
        Ok(i as usize)
    }

    pub fn eps_at(&self, t: f64) -> Result<C64> {
        Ok(self.eps[self.index_of(t)?])
    }

    pub fn probe(&self, site: usize) -> Result<&ProbeSeries> {
        self.probes
            .iter()
            .find(|p| p.site == site)
            .ok_or(Error::MissingSnapshots(site))
    }

    /// Indices with `t <= t_max_valid`.
    pub fn valid_range(&self) -> std::ops::Range<usize> {
        let end = self.times.partition_point(|&t| t <= self.t_max_valid + 1e-12);
        0..end
    }

    /// Max over `[t0, t1]` of `| |eps|^2 - reference(t) |`.
    pub fn max_population_deviation(&self, t0: f64, t1: f64, reference: impl Fn(f64) -> f64) -> f64 {
        self.times
            .iter()
            .zip(&self.eps)
            .filter(|(&t, _)| t >= t0 - 1e-12 && t <= t1 + 1e-12)
            .map(|(&t, e)| (e.norm_sqr() - reference(t)).abs())
            .fold(0.0, f64::max)
    }

    /// Writes `t, re_eps, im_eps, pop[, ref_exp, deviation]`. The optional
    /// reference curve adds the last two columns.
    pub fn write_csv<W: Write>(
        &self,
        mut out: W,
        header_comment: Option<&str>,
        reference: Option<&dyn Fn(f64) -> f64>,
    ) -> Result<()> {
        if let Some(c) = header_comment {
            for line in c.lines() {
                writeln!(out, "# {line}")?;
            }
        }
        match reference {
            Some(_) => writeln!(out, "t,re_eps,im_eps,pop,ref_exp,deviation")?,
            None => writeln!(out, "t,re_eps,im_eps,pop")?,
        }
        for (&t, e) in self.times.iter().zip(&self.eps) {
            let pop = e.norm_sqr();
            write!(out, "{t:.10e},{:.15e},{:.15e},{pop:.15e}", e.re, e.im)?;
            if let Some(r) = reference {
                let r = r(t);
                write!(out, ",{r:.15e},{:.15e}", pop - r)?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Appends a sample; `times` must stay strictly increasing.
    pub(crate) fn push(&mut self, t: f64, eps: C64) {
        debug_assert!(self.times.last().is_none_or(|&last| t > last));
        self.times.push(t);
        self.eps.push(eps);
    }

    pub(crate) fn warn_if_beyond_horizon(&mut self, t_max: f64) {
        if t_max > self.t_max_valid {
            self.warnings.push(format!(
                "t_max = {t_max} exceeds the validity horizon {:.4}; later samples may contain finite-size artifacts",
                self.t_max_valid
            ));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Trajectory {
        let mut tr = Trajectory::new(SolverTag::Dde, 0.5, 1.0);
        for i in 0..5 {
            let t = 0.5 * i as f64;
            tr.push(t, C64::from_polar((-0.1 * t).exp(), 0.2 * t));
        }
        tr
    }

    #[test]
    fn grid_lookup() {
        let tr = sample();
        assert_eq!(tr.index_of(1.5).unwrap(), 3);
        assert!(matches!(tr.index_of(1.25), Err(Error::OffGrid { .. })));
        assert!(tr.index_of(10.0).is_err());
        assert_eq!(tr.valid_range(), 0..3);
    }

    #[test]
    fn csv_layout() {
        let tr = sample();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf, Some("manifest abc"), Some(&|t: f64| (-0.2 * t).exp()))
            .unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# manifest abc"));
        assert_eq!(lines.next(), Some("t,re_eps,im_eps,pop,ref_exp,deviation"));
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 6);
        assert_eq!(first[3].parse::<f64>().unwrap(), 1.0);
        assert_eq!(text.lines().count(), 7);
    }

    #[test]
    fn json_round_trip() {
        let tr = sample();
        let back: Trajectory = serde_json::from_str(&tr.to_json().unwrap()).unwrap();
        assert_eq!(back, tr);
        assert!(tr.to_json().unwrap().contains("\"solver\": \"dde\""));
    }
}
