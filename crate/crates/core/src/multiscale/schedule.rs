//! Time scales `M_j`, return budgets `K_j`, interval scales `ε_j` and the
//! occupancy fractions `β_n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::FamilyConstants;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    /// `M_{j+1} = ⌊2α^{M_j/pq}⌋`, the upper end of the admissible window
    Auto,
    /// user-supplied time scales
    Desk,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiscaleSchedule {
    pub kind: ScheduleKind,
    pub m: Vec<u64>,
    pub k: Vec<u64>,
    /// one entry more than `m`: `ε_{j+1}` only needs `M_j`
    pub eps: Vec<f64>,
    pub t: u32,
    pub q: f64,
    pub beta: Vec<f64>,
    /// every `M_{j+1}` and `ε_{j+1}` lies in its window and `M_0 = 3`
    pub conforming: bool,
    /// levels whose `M_{j+1}` falls outside `[α^{M_j/2pq}, 2α^{M_j/pq}]`
    pub window_violations: Vec<usize>,
}

/// Smallest `t ≥ 4` with `2^{−t} ≤ log((p²+2)/(p²+1))`.
pub fn smallest_t(p: f64) -> u32 {
    let bound = ((p * p + 2.0) / (p * p + 1.0)).ln();
    let mut t = 4;
    while 2f64.powi(-(t as i32)) > bound {
        t += 1;
    }
    t
}

/// `[α^{M/2pq}, 2α^{M/pq}]`
pub fn m_window(alpha: f64, p: f64, q: f64, m: u64) -> (f64, f64) {
    let m = m as f64;
    (alpha.powf(m / (2.0 * p * q)), 2.0 * alpha.powf(m / (p * q)))
}

/// `[2α^{−M/p}/s, 2α^{−M/2p}/s]`
pub fn eps_window(alpha: f64, p: f64, s: f64, m: u64) -> (f64, f64) {
    let m = m as f64;
    (2.0 * alpha.powf(-m / p) / s, 2.0 * alpha.powf(-m / (2.0 * p)) / s)
}

pub fn beta_ok(p: f64, beta: f64) -> bool {
    2.0 / p * beta - (1.0 - beta) * p >= 1.0 / p
}

impl MultiscaleSchedule {
    /// Auto schedule through `levels` scales, `M_0 = 3`.
    pub fn auto(k: &FamilyConstants, nu: f64, eps0: f64, levels: usize) -> Result<Self> {
        let q = 8f64.max(4.0 * nu);
        let mut m = vec![3u64];
        for j in 0..levels.saturating_sub(1) {
            let next = (2.0 * k.alpha.powf(m[j] as f64 / (k.p * q))).floor();
            if !(next < 1e12) {
                return Err(Error::InvalidParameter(format!(
                    "time scale M_{} = {next:e} is not representable; use a desk schedule",
                    j + 1
                )));
            }
            m.push(next as u64);
        }
        Self::build(ScheduleKind::Auto, m, k, nu, eps0)
    }

    /// Desk schedule with user time scales; labelled non-conforming unless
    /// every scale happens to fall in its window.
    pub fn desk(m: Vec<u64>, k: &FamilyConstants, nu: f64, eps0: f64) -> Result<Self> {
        if m.is_empty() || m.iter().any(|&v| v == 0) {
            return Err(Error::InvalidParameter("desk time scales must be positive".into()));
        }
        Self::build(ScheduleKind::Desk, m, k, nu, eps0)
    }

    fn build(kind: ScheduleKind, m: Vec<u64>, k: &FamilyConstants, nu: f64, eps0: f64) -> Result<Self> {
        if !(eps0 > 0.0) {
            return Err(Error::InvalidParameter("eps_0 must be positive".into()));
        }
        let q = 8f64.max(4.0 * nu);
        let t = smallest_t(k.p);
        let n = m.len();
        let kk: Vec<u64> = (0..n).map(|j| 1u64 << (j as u32 + t + 2)).collect();
        let mut eps = vec![eps0];
        for j in 0..n {
            eps.push(eps_window(k.alpha, k.p, k.small_s, m[j]).0);
        }
        let mut beta = vec![1.0];
        for j in 0..n {
            let b = beta[j] * (1.0 - 1.0 / kk[j] as f64);
            beta.push(b);
        }
        if let Some(bad) = beta.iter().skip(1).position(|&b| !beta_ok(k.p, b)) {
            return Err(Error::InvalidParameter(format!(
                "occupancy fraction beta_{} = {} violates (2/p)β − (1−β)p ≥ 1/p",
                bad + 1,
                beta[bad + 1]
            )));
        }
        let window_violations: Vec<usize> = (0..n - 1)
            .filter(|&j| {
                let (lo, hi) = m_window(k.alpha, k.p, q, m[j]);
                let v = m[j + 1] as f64;
                v < lo || v > hi
            })
            .collect();
        let conforming = m[0] == 3 && window_violations.is_empty();
        if kind == ScheduleKind::Auto && !conforming {
            return Err(Error::InvalidParameter("auto schedule left its window".into()));
        }
        Ok(MultiscaleSchedule {
            kind,
            m,
            k: kk,
            eps,
            t,
            q,
            beta,
            conforming,
            window_violations,
        })
    }

    /// Replaces the interval scales of a desk schedule; `eps` needs one entry
    /// per time scale plus one.
    pub fn with_eps(mut self, eps: Vec<f64>) -> Result<Self> {
        if self.kind != ScheduleKind::Desk {
            return Err(Error::InvalidParameter("only desk schedules take explicit scales".into()));
        }
        if eps.len() != self.m.len() + 1 || eps.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "need {} positive interval scales, got {:?}",
                self.m.len() + 1,
                eps
            )));
        }
        self.eps = eps;
        self.conforming = false;
        Ok(self)
    }

    pub fn levels(&self) -> usize {
        self.m.len()
    }
}
