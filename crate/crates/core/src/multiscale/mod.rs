//! Critical regions, slow-recurrence conditions, exceptional sets, boundary
//! strips and the fast-return gap search.

mod assumptions;
mod hooks;
mod recurrence;
mod regions;
mod schedule;
mod strips;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle::{reduce, CircleInterval};
use crate::error::{Error, Result};

pub use assumptions::{
    propose_e_c, verify_assumptions, AssumptionGrid, AssumptionReport, ConditionResult, SampleWitness, Verdict,
};
pub use hooks::{
    find_fast_return, hook_diagnostics, return_displacement, scan_gap_parameter, scan_state, uniform_at, Classification, FastReturn,
    GapScan, GapStep,
    GapScanSpec, HookReport, HookSpec,
};
pub use recurrence::{
    b1_holds, check_occupancy_bound, check_recurrence, exceptional_sets, largest_gap, occupancy_counts, ExceptionalSets, LevelVerdict,
    OccupancyCheck, OccupancyTable, RecurrenceReport, RecurrenceVariant, Witness,
};
pub use regions::{
    build_critical_sets, critical_margin, critical_separation, detect_i0, detect_i0_with, i0_margin, nesting_holds, BuildSpec, LevelStatus,
    MultiscaleState,
};
pub use schedule::{beta_ok, eps_window, m_window, smallest_t, MultiscaleSchedule, ScheduleKind};
pub use strips::{
    check_strip_bounds, track_boundary_strip, BoundaryStrip, NamedCheck, StripDirection, StripBoundReport,
};

/// The two components `I¹, I²` of a critical region; `I¹` is the one over
/// which the fibre maps decrease in θ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalRegion {
    pub level: usize,
    pub i1: CircleInterval,
    pub i2: CircleInterval,
}

impl CriticalRegion {
    pub fn component(&self, iota: usize) -> &CircleInterval {
        if iota == 1 {
            &self.i1
        } else {
            &self.i2
        }
    }

    pub fn components(&self) -> [CircleInterval; 2] {
        [self.i1, self.i2]
    }

    pub fn max_length(&self) -> f64 {
        self.i1.length().max(self.i2.length())
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.i1.contains_open(theta) || self.i2.contains_open(theta)
    }
}

/// A measured quantity against the bound it should respect.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub measured: f64,
    pub bound: f64,
    /// `bound − measured` for upper bounds, `measured − bound` for lower ones
    pub slack: f64,
    pub holds: bool,
}

impl BoundCheck {
    pub fn upper(measured: f64, bound: f64) -> Self {
        BoundCheck {
            measured,
            bound,
            slack: bound - measured,
            holds: measured <= bound,
        }
    }

    pub fn lower(measured: f64, bound: f64) -> Self {
        BoundCheck {
            measured,
            bound,
            slack: measured - bound,
            holds: measured >= bound,
        }
    }
}

/// Signed margin of `y ∈ [left, left + len]` on the circle: positive inside,
/// negative outside, with the outside gap split evenly between both ends.
pub(crate) fn inside_margin(left: f64, len: f64, y: f64) -> f64 {
    if len >= 1.0 {
        return f64::INFINITY;
    }
    let gap = 1.0 - len;
    let mut o = reduce(y - left);
    if o >= len + 0.5 * gap {
        o -= 1.0;
    }
    o.min(len - o)
}

/// Bisects between `outside` (predicate false) and `inside` (true).
pub(crate) fn boundary(pred: &dyn Fn(f64) -> Result<bool>, outside: f64, inside: f64, tol: f64) -> Result<f64> {
    let (mut out, mut inn) = (outside, inside);
    while (inn - out).abs() > tol {
        let mid = 0.5 * (out + inn);
        if mid == out || mid == inn {
            break;
        }
        if pred(mid)? {
            inn = mid;
        } else {
            out = mid;
        }
    }
    Ok(inn)
}

/// Signed overlap margin of two arcs given by lift endpoints: positive iff
/// their interiors meet.
pub(crate) fn overlap_margin(a_left: f64, a_len: f64, b_left: f64, b_len: f64) -> f64 {
    // b meets a iff b_left ∈ (a_left − b_len, a_left + a_len)
    inside_margin(a_left - b_len, a_len + b_len, b_left)
}

/// Sub-arcs of `base` on which `f > 0`, from a uniform scan with bisected
/// boundaries. On the full circle the scan starts at a non-positive point so
/// no component is split at 0.
pub(crate) fn positive_components<F>(f: &F, base: &CircleInterval, cells: usize, tol: f64) -> Result<Vec<CircleInterval>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if cells < 2 {
        return Err(Error::InvalidParameter("need at least 2 scan cells".into()));
    }
    let full = base.is_full();
    let coarse: Vec<f64> = (0..=cells)
        .into_par_iter()
        .map(|i| f(base.point_at(i as f64 / cells as f64)))
        .collect::<Result<_>>()?;
    let (start, len) = if full {
        match coarse.iter().position(|&v| v <= 0.0) {
            None => return Ok(vec![CircleInterval::full()]),
            Some(i) => (base.point_at(i as f64 / cells as f64), 1.0),
        }
    } else {
        (base.left(), base.length())
    };
    let values: Vec<f64> = if full {
        (0..=cells)
            .into_par_iter()
            .map(|i| f(reduce(start + len * i as f64 / cells as f64)))
            .collect::<Result<_>>()?
    } else {
        coarse
    };
    let at = |i: usize| start + len * i as f64 / cells as f64;
    let bisect = |mut neg: f64, mut pos: f64| -> Result<f64> {
        for _ in 0..200 {
            let ulp = f64::EPSILON * neg.abs().max(1.0);
            if (pos - neg).abs() <= tol.max(2.0 * ulp) {
                break;
            }
            let mid = 0.5 * (neg + pos);
            if f(reduce(mid))? > 0.0 {
                pos = mid;
            } else {
                neg = mid;
            }
        }
        Ok(0.5 * (neg + pos))
    };
    let mut out = Vec::new();
    let mut open: Option<f64> = if values[0] > 0.0 { Some(start) } else { None };
    for i in 0..cells {
        let (a, b) = (values[i], values[i + 1]);
        if a <= 0.0 && b > 0.0 {
            open = Some(bisect(at(i), at(i + 1))?);
        } else if a > 0.0 && b <= 0.0 {
            let right = bisect(at(i + 1), at(i))?;
            let left = open.take().unwrap_or(start);
            out.push(CircleInterval::new(left, (right - left).max(0.0))?);
        }
    }
    if let Some(left) = open {
        out.push(CircleInterval::new(left, (start + len - left).max(0.0))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margins() {
        assert!(inside_margin(0.2, 0.1, 0.25) > 0.0);
        assert!(inside_margin(0.2, 0.1, 0.35) < 0.0);
        assert!(inside_margin(0.95, 0.1, 0.02) > 0.0);
        assert!(overlap_margin(0.1, 0.1, 0.15, 0.3) > 0.0);
        assert!(overlap_margin(0.1, 0.1, 0.25, 0.3) < 0.0);
        assert!(overlap_margin(0.9, 0.2, 0.05, 0.01) > 0.0);
    }

    #[test]
    fn components_of_a_wrapped_bump() {
        let f = |t: f64| Ok(0.1 - crate::circle::circle_dist(t, 0.0));
        let c = positive_components(&f, &CircleInterval::full(), 1000, 1e-13).unwrap();
        assert_eq!(c.len(), 1);
        assert!((c[0].length() - 0.2).abs() < 1e-12);
        assert!((c[0].left() - 0.9).abs() < 1e-12);
        let g = |t: f64| Ok((12.0 * std::f64::consts::PI * t).sin());
        let base = CircleInterval::from_endpoints(0.01, 0.49).unwrap();
        let c = positive_components(&g, &base, 500, 1e-13).unwrap();
        assert_eq!(c.len(), 3);
        assert!((c[1].left() - 1.0 / 6.0).abs() < 1e-12);
    }
}
