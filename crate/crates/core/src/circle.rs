//! Arithmetic on the circle ℝ/ℤ: points, oriented arcs, finite unions of arcs
//! and the finite-horizon Diophantine scan.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Golden-mean rotation (√5 − 1)/2.
pub fn golden_mean() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

/// Reduce a finite real to its representative in [0, 1).
pub fn wrap(x: f64) -> Result<CirclePoint> {
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    Ok(CirclePoint(reduce(x)))
}

/// `x mod 1` in [0, 1) without the finiteness check.
#[inline]
pub fn reduce(x: f64) -> f64 {
    let r = x - x.floor();
    // x slightly below an integer can round up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Representative of `x mod 1` in [−1/2, 1/2).
#[inline]
pub fn centered(x: f64) -> f64 {
    let r = reduce(x + 0.5) - 0.5;
    if r >= 0.5 {
        r - 1.0
    } else {
        r
    }
}

/// `theta + k·omega mod 1`, with the product's rounding error recovered by a
/// fused multiply-add so long orbits do not drift.
#[inline]
pub fn rotate(theta: f64, omega: f64, k: i64) -> f64 {
    let kf = k as f64;
    let prod = kf * omega;
    let err = kf.mul_add(omega, -prod);
    let frac = prod - prod.floor();
    reduce(theta + frac + err)
}

/// Canonical point of the circle.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CirclePoint(f64);

impl CirclePoint {
    pub fn new(x: f64) -> Result<Self> {
        wrap(x)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn shift(self, c: f64) -> CirclePoint {
        CirclePoint(reduce(self.0 + c))
    }

    /// Offset from `other` to `self` taken in [−1/2, 1/2).
    pub fn signed_offset(self, other: CirclePoint) -> f64 {
        centered(self.0 - other.0)
    }
}

impl From<CirclePoint> for f64 {
    fn from(p: CirclePoint) -> f64 {
        p.0
    }
}

/// Distance on ℝ/ℤ, in [0, 1/2].
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = reduce(a - b);
    d.min(1.0 - d)
}

/// Closed arc `[left, left + length]` traversed counter-clockwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleInterval {
    left: f64,
    length: f64,
}

impl CircleInterval {
    pub fn new(left: f64, length: f64) -> Result<Self> {
        if !left.is_finite() || !length.is_finite() {
            return Err(Error::NonFinite(if left.is_finite() { length } else { left }));
        }
        if !(0.0..=1.0).contains(&length) {
            return Err(Error::InvalidParameter(format!(
                "arc length {length} outside [0, 1]"
            )));
        }
        Ok(CircleInterval {
            left: reduce(left),
            length,
        })
    }

    /// Arc from `a` counter-clockwise to `b`; `b` may be given unwrapped.
    pub fn from_endpoints(a: f64, b: f64) -> Result<Self> {
        let length = if b - a >= 1.0 { 1.0 } else { reduce(b - a) };
        Self::new(a, length)
    }

    pub fn full() -> Self {
        CircleInterval {
            left: 0.0,
            length: 1.0,
        }
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    /// Right endpoint as an unwrapped number `left + length`.
    pub fn right_unwrapped(&self) -> f64 {
        self.left + self.length
    }

    pub fn right(&self) -> f64 {
        reduce(self.left + self.length)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn is_full(&self) -> bool {
        self.length >= 1.0
    }

    pub fn midpoint(&self) -> f64 {
        reduce(self.left + 0.5 * self.length)
    }

    /// Offset of `x` counter-clockwise from the left endpoint, in [0, 1).
    pub fn offset_of(&self, x: f64) -> f64 {
        reduce(x - self.left)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.is_full() || self.offset_of(x) <= self.length
    }

    pub fn contains_open(&self, x: f64) -> bool {
        if self.is_full() {
            return true;
        }
        let o = self.offset_of(x);
        o > 0.0 && o < self.length
    }

    /// Position of `t ∈ [0, 1]` along the arc.
    pub fn point_at(&self, t: f64) -> f64 {
        reduce(self.left + t * self.length)
    }

    pub fn shifted(&self, c: f64) -> CircleInterval {
        CircleInterval {
            left: reduce(self.left + c),
            length: self.length,
        }
    }

    /// Closed `r`-neighbourhood; saturates at the full circle.
    pub fn expanded(&self, r: f64) -> CircleInterval {
        let length = self.length + 2.0 * r;
        if length >= 1.0 {
            return Self::full();
        }
        CircleInterval {
            left: reduce(self.left - r),
            length: length.max(0.0),
        }
    }

    pub fn intersects(&self, other: &CircleInterval) -> bool {
        self.contains(other.left) || other.contains(self.left)
    }

    /// `other ⊆ self`, up to `tol`.
    pub fn contains_interval(&self, other: &CircleInterval, tol: f64) -> bool {
        if self.is_full() {
            return true;
        }
        if other.length > self.length + tol {
            return false;
        }
        let o = self.offset_of(other.left);
        let o = if o > 1.0 - tol { o - 1.0 } else { o };
        o >= -tol && o + other.length <= self.length + tol
    }

    /// Intersection of two arcs when it is a single arc.
    pub fn intersection(&self, other: &CircleInterval) -> Option<CircleInterval> {
        if self.is_full() {
            return Some(*other);
        }
        if other.is_full() {
            return Some(*self);
        }
        let o = self.offset_of(other.left);
        if o <= self.length {
            let len = (self.length - o).min(other.length);
            return Some(CircleInterval {
                left: other.left,
                length: len,
            });
        }
        let o = other.offset_of(self.left);
        if o <= other.length {
            let len = (other.length - o).min(self.length);
            return Some(CircleInterval {
                left: self.left,
                length: len,
            });
        }
        None
    }
}

/// Infimum of `circle_dist` over the two closed arcs.
pub fn interval_dist(a: &CircleInterval, b: &CircleInterval) -> f64 {
    if a.intersects(b) {
        return 0.0;
    }
    // for disjoint arcs the infimum is attained at endpoints
    let d1 = circle_dist(a.right(), b.left);
    let d2 = circle_dist(b.right(), a.left);
    d1.min(d2)
}

/// Finite union of arcs kept as disjoint, sorted pieces.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    pieces: Vec<CircleInterval>,
}

impl IntervalSet {
    pub fn from_intervals(items: impl IntoIterator<Item = CircleInterval>) -> Self {
        let mut raw: Vec<(f64, f64)> = Vec::new();
        for iv in items {
            if iv.is_full() {
                return IntervalSet {
                    pieces: vec![CircleInterval::full()],
                };
            }
            let a = iv.left;
            let b = iv.left + iv.length;
            if b > 1.0 {
                raw.push((a, 1.0));
                raw.push((0.0, b - 1.0));
            } else {
                raw.push((a, b));
            }
        }
        raw.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (a, b) in raw {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        if merged.len() >= 2 {
            let first = merged[0];
            let last = *merged.last().unwrap();
            if first.0 <= 0.0 && last.1 >= 1.0 {
                merged.pop();
                merged[0] = (last.0, 1.0 + first.1);
            }
        }
        if merged.len() == 1 && merged[0].1 - merged[0].0 >= 1.0 {
            return IntervalSet {
                pieces: vec![CircleInterval::full()],
            };
        }
        let mut pieces: Vec<CircleInterval> = merged
            .into_iter()
            .map(|(a, b)| CircleInterval {
                left: reduce(a),
                length: (b - a).min(1.0),
            })
            .collect();
        pieces.sort_by(|x, y| x.left.total_cmp(&y.left));
        IntervalSet { pieces }
    }

    pub fn pieces(&self) -> &[CircleInterval] {
        &self.pieces
    }

    pub fn measure(&self) -> f64 {
        self.pieces.iter().map(|p| p.length).sum::<f64>().min(1.0)
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.pieces.iter().any(|p| p.contains(x))
    }

    pub fn intersects(&self, iv: &CircleInterval) -> bool {
        self.pieces.iter().any(|p| p.intersects(iv))
    }

    pub fn dist_to(&self, iv: &CircleInterval) -> f64 {
        self.pieces
            .iter()
            .map(|p| interval_dist(p, iv))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Rotation number together with Diophantine constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiophantineSpec {
    pub omega: f64,
    pub gamma: f64,
    pub nu: f64,
}

impl DiophantineSpec {
    pub fn golden() -> Self {
        DiophantineSpec {
            omega: golden_mean(),
            gamma: 0.38,
            nu: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiophantineReport {
    pub holds: bool,
    pub horizon: u64,
    /// n minimising d(nω, 0)·n^ν
    pub worst_n: u64,
    pub worst_distance: f64,
    pub worst_scaled: f64,
    /// first n violating the bound, if any
    pub first_violation: Option<u64>,
}

pub fn verify_diophantine(spec: &DiophantineSpec, q_check: u64) -> DiophantineReport {
    let mut worst_n = 1;
    let mut worst_distance = f64::INFINITY;
    let mut worst_scaled = f64::INFINITY;
    let mut first_violation = None;
    for n in 1..=q_check.max(1) {
        let d = circle_dist(rotate(0.0, spec.omega, n as i64), 0.0);
        let nf = n as f64;
        let scaled = d * nf.powf(spec.nu);
        if scaled < worst_scaled {
            worst_scaled = scaled;
            worst_n = n;
            worst_distance = d;
        }
        if first_violation.is_none() && d <= spec.gamma * nf.powf(-spec.nu) {
            first_violation = Some(n);
        }
    }
    DiophantineReport {
        holds: first_violation.is_none(),
        horizon: q_check,
        worst_n,
        worst_distance,
        worst_scaled,
        first_violation,
    }
}
