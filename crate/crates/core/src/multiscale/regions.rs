//! `ℐ₀` and the recursion `ℐ_{n+1} = int π₁(f^{M_n−1}(𝒜_n) ∩ f^{−M_n−1}(ℬ_n))`.

use serde::{Deserialize, Serialize};

use super::recurrence::{check_recurrence, RecurrenceVariant};
use super::schedule::MultiscaleSchedule;
use super::{boundary, inside_margin, overlap_margin, positive_components, CriticalRegion};
use crate::circle::{rotate, CircleInterval};
use crate::error::{Error, Result};
use crate::maps::{FamilyConstants, QpfMap};

/// Containment margin of `f_θ(cl(𝕋¹∖E))` in `int(C)`; `ℐ₀` is where it is ≤ 0.
pub fn i0_margin(map: &QpfMap, theta: f64) -> Result<f64> {
    let k = map.family.constants()?;
    let lo = map.eval_lift(theta, k.e.right_unwrapped());
    let hi = map.eval_lift(theta, k.e.left() + 1.0);
    let len = hi - lo;
    if !len.is_finite() {
        return Err(Error::NonFinite(len));
    }
    if len >= k.c.length() {
        return Ok(-(len - k.c.length()) - f64::MIN_POSITIVE);
    }
    // the image sits in C iff its lower end lies in [c⁻, c⁺ − len]
    Ok(inside_margin(k.c.left(), k.c.length() - len, lo))
}

pub fn detect_i0(map: &QpfMap) -> Result<CriticalRegion> {
    detect_i0_with(map, 1 << 16)
}

/// `ℐ₀` from a uniform scan of `cells` points with boundaries bisected to
/// near machine precision.
pub fn detect_i0_with(map: &QpfMap, cells: usize) -> Result<CriticalRegion> {
    let f = |t: f64| Ok(-i0_margin(map, t)?);
    let comps = positive_components(&f, &CircleInterval::full(), cells, 1e-15)?;
    if comps.len() == 1 && comps[0].is_full() {
        return Err(Error::Structure("the (A1) violation set is the whole circle".into()));
    }
    if comps.len() != 2 {
        return Err(Error::Structure(format!(
            "the (A1) violation set has {} components, expected 2",
            comps.len()
        )));
    }
    label_components(map, comps[0], comps[1], 0)
}

fn label_components(map: &QpfMap, a: CircleInterval, b: CircleInterval, level: usize) -> Result<CriticalRegion> {
    let k = map.family.constants()?;
    let slope = |iv: &CircleInterval| map.fibre_derivatives(iv.midpoint(), k.e.right()).d_theta;
    let (sa, sb) = (slope(&a), slope(&b));
    if sa < 0.0 && sb > 0.0 {
        Ok(CriticalRegion { level, i1: a, i2: b })
    } else if sb < 0.0 && sa > 0.0 {
        Ok(CriticalRegion { level, i1: b, i2: a })
    } else {
        Err(Error::Structure(format!(
            "critical components do not have opposite θ-slopes ({sa}, {sb})"
        )))
    }
}

/// Overlap margin of `f^{M−1}_{θ−(M−1)ω}(C)` and `f^{−(M+1)}_{θ+(M+1)ω}(E)`.
pub fn critical_margin(map: &QpfMap, k: &FamilyConstants, m: u64, theta: f64) -> Result<f64> {
    let w = map.omega();
    let m = m as i64;
    let (fl, fh) = map.iterate_arc(rotate(theta, w, -(m - 1)), k.c.left(), k.c.length(), m - 1)?;
    let (bl, bh) = map.iterate_arc(rotate(theta, w, m + 1), k.e.left(), k.e.length(), -(m + 1))?;
    if fh - fl >= 1.0 || bh - bl >= 1.0 {
        return Err(Error::FibreWrap);
    }
    Ok(overlap_margin(fl, fh - fl, bl, bh - bl))
}

/// Signed clearance of `Bwd(θ)` above `Fwd(θ)`: zero when they meet,
/// negative when `Bwd` lies below. Crossings of degenerate arcs show up as
/// sign changes.
pub fn critical_separation(map: &QpfMap, k: &FamilyConstants, m: u64, theta: f64) -> Result<f64> {
    let w = map.omega();
    let m = m as i64;
    let (fl, fh) = map.iterate_arc(rotate(theta, w, -(m - 1)), k.c.left(), k.c.length(), m - 1)?;
    let (bl, bh) = map.iterate_arc(rotate(theta, w, m + 1), k.e.left(), k.e.length(), -(m + 1))?;
    if overlap_margin(fl, fh - fl, bl, bh - bl) > 0.0 {
        return Ok(0.0);
    }
    let gap = 1.0 - (fh - fl) - (bh - bl);
    let o = crate::circle::reduce(bl - fh);
    Ok(if o <= 0.5 * gap { o } else { o - gap })
}

/// Components hiding inside a single scan cell, located through sign
/// changes of the separation. A crossing that never shows a positive overlap
/// (arcs collapsed below double resolution) becomes a zero-length component.
fn degenerate_crossings(
    map: &QpfMap,
    k: &FamilyConstants,
    m: u64,
    base: &CircleInterval,
    cells: usize,
    tol: f64,
) -> Result<Vec<CircleInterval>> {
    use rayon::prelude::*;
    let at = |i: usize| base.left() + base.length() * i as f64 / cells as f64;
    let sep = |t: f64| critical_separation(map, k, m, crate::circle::reduce(t));
    let meets = |t: f64| Ok(critical_margin(map, k, m, crate::circle::reduce(t))? > 0.0);
    let v: Vec<f64> = (0..=cells).into_par_iter().map(|i| sep(at(i))).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for i in 0..cells {
        let (a, b) = (v[i], v[i + 1]);
        if !(a.abs() < 0.25 && b.abs() < 0.25 && ((a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0))) {
            continue;
        }
        let (mut lo, mut hi) = (at(i), at(i + 1));
        let mut inside = None;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let s = sep(mid)?;
            if s == 0.0 {
                inside = Some(mid);
                break;
            }
            if (s > 0.0) == (a > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let Some(t) = inside else {
            out.push(CircleInterval::new(crate::circle::reduce(0.5 * (lo + hi)), 0.0)?);
            continue;
        };
        let left = boundary(&meets, at(i), t, tol)?;
        let right = boundary(&meets, at(i + 1), t, tol)?;
        out.push(CircleInterval::new(crate::circle::reduce(left), right - left)?);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BuildSpec {
    /// scan cells per component of `ℐ_n`
    pub cells: usize,
    /// bisection tolerance on component endpoints
    pub tol: f64,
    /// scan cells for `ℐ₀` on the full circle
    pub i0_cells: usize,
}

impl Default for BuildSpec {
    fn default() -> Self {
        BuildSpec {
            cells: 1 << 12,
            tol: 1e-15,
            i0_cells: 1 << 16,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelStatus {
    pub level: usize,
    pub x_holds: bool,
    pub y_holds: bool,
    pub xprime_holds: bool,
    pub yprime_holds: bool,
    pub ydoubleprime_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiscaleState {
    pub tau: f64,
    pub omega: f64,
    pub alpha: f64,
    pub p: f64,
    pub schedule: MultiscaleSchedule,
    pub regions: Vec<CriticalRegion>,
    pub status: Vec<LevelStatus>,
    /// `n` with `𝒞_n = ∅`, so `ℐ_{n+1} = ∅`
    pub critical_empty_at: Option<usize>,
    pub breakdown: Option<String>,
}

impl MultiscaleState {
    pub fn eps(&self, n: usize) -> f64 {
        self.schedule.eps[n]
    }

    pub fn m(&self, n: usize) -> u64 {
        self.schedule.m[n]
    }

    pub fn region(&self, n: usize) -> Option<&CriticalRegion> {
        self.regions.get(n)
    }

    /// Largest level with a non-empty region.
    pub fn depth(&self) -> usize {
        self.regions.len() - 1
    }

    /// Recomputes the per-level condition flags.
    pub fn refresh_status(&mut self) {
        let x = check_recurrence(self, RecurrenceVariant::X);
        let xp = check_recurrence(self, RecurrenceVariant::XPrime);
        let y = check_recurrence(self, RecurrenceVariant::Y);
        let yp = check_recurrence(self, RecurrenceVariant::YPrime);
        let ypp = check_recurrence(self, RecurrenceVariant::YDoublePrime);
        self.status = (0..x.levels.len())
            .map(|j| LevelStatus {
                level: j,
                x_holds: x.levels[j].holds,
                xprime_holds: xp.levels[j].holds,
                y_holds: y.levels[j].holds,
                yprime_holds: yp.levels[j].holds,
                ydoubleprime_holds: ypp.levels[j].holds,
            })
            .collect();
    }

    /// `(𝒳)_n` in the cumulative sense: the level inequality for all `j ≤ n`.
    pub fn x_through(&self, n: usize) -> bool {
        self.status.iter().take(n + 1).all(|s| s.x_holds)
    }

    pub fn y_through(&self, n: usize) -> bool {
        self.status.iter().take(n + 1).all(|s| s.y_holds)
    }
}

/// Builds `ℐ₁, …, ℐ_{n_max}` from `region0` (or a fresh `detect_i0`) and
/// records the per-level condition flags.
pub fn build_critical_sets(
    map: &QpfMap,
    schedule: &MultiscaleSchedule,
    n_max: usize,
    spec: &BuildSpec,
    region0: Option<CriticalRegion>,
) -> Result<MultiscaleState> {
    if schedule.levels() < n_max {
        return Err(Error::InvalidParameter(format!(
            "schedule has {} time scales, {} needed",
            schedule.levels(),
            n_max
        )));
    }
    let k = *map.family.constants()?;
    let r0 = match region0 {
        Some(r) => r,
        None => detect_i0_with(map, spec.i0_cells)?,
    };
    let mut state = MultiscaleState {
        tau: map.tau,
        omega: map.omega(),
        alpha: k.alpha,
        p: k.p,
        schedule: schedule.clone(),
        regions: vec![r0],
        status: Vec::new(),
        critical_empty_at: None,
        breakdown: None,
    };
    for n in 0..n_max {
        let m = schedule.m[n];
        let current = state.regions[n];
        let mut found: Vec<Vec<CircleInterval>> = Vec::new();
        for base in current.components() {
            let f = |t: f64| critical_margin(map, &k, m, t);
            let mut comps = positive_components(&f, &base, spec.cells, spec.tol)?;
            if comps.is_empty() {
                comps = degenerate_crossings(map, &k, m, &base, spec.cells, spec.tol)?;
            }
            found.push(comps);
        }
        let total = found[0].len() + found[1].len();
        if total == 0 {
            state.critical_empty_at = Some(n);
            break;
        }
        if found[0].len() != 1 || found[1].len() != 1 {
            state.breakdown = Some(format!(
                "level {}: critical region has {} + {} components",
                n + 1,
                found[0].len(),
                found[1].len()
            ));
            break;
        }
        state.regions.push(CriticalRegion {
            level: n + 1,
            i1: found[0][0],
            i2: found[1][0],
        });
    }
    state.refresh_status();
    Ok(state)
}

/// `B_{9ε_n}(I_n^ι) ⊆ I_{n−1}^ι` for both ι.
pub fn nesting_holds(state: &MultiscaleState, n: usize) -> Option<[bool; 2]> {
    if n == 0 || n >= state.regions.len() {
        return None;
    }
    let inner = &state.regions[n];
    let outer = &state.regions[n - 1];
    let r = 9.0 * state.eps(n);
    Some([1, 2].map(|iota| {
        outer
            .component(iota)
            .contains_interval(&inner.component(iota).expanded(r), 0.0)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::DiophantineSpec;
    use crate::maps::{ApProfile, Fibre, Forcing, Profile, QpfFamily};

    pub(crate) fn cos_family() -> QpfFamily {
        let k = FamilyConstants {
            alpha: 100.0,
            p: 2.0,
            big_s: 3.2,
            small_s: 2.0,
            ell: 0.5,
            big_l: 2.0,
            e: CircleInterval::from_endpoints(-5.5e-4, 5.5e-4).unwrap(),
            c: CircleInterval::from_endpoints(0.0565, 0.9435).unwrap(),
        };
        QpfFamily::new(
            DiophantineSpec::golden(),
            Fibre::Additive {
                profile: Profile::Ap(ApProfile::new(2.0, 1e4).unwrap()),
                forcing: Forcing::Cos { amplitude: 0.5, phase: 0.0 },
            },
            Some(k),
        )
        .unwrap()
    }

    #[test]
    fn i0_of_the_cos_family() {
        let m = cos_family().at(0.5);
        let r = detect_i0(&m).unwrap();
        for iv in r.components() {
            assert!(iv.length() > 0.05 && iv.length() < 0.1);
            assert!(i0_margin(&m, iv.midpoint()).unwrap() < 0.0);
            assert!(i0_margin(&m, iv.left() - 1e-9).unwrap() > 0.0);
        }
        // I¹ sits where cos decreases
        assert!(r.i1.midpoint() < 0.5 && r.i2.midpoint() > 0.5);
    }

    #[test]
    fn rigid_fibre_has_no_two_component_i0() {
        let k = cos_family().constants;
        let fam = QpfFamily::new(
            DiophantineSpec::golden(),
            Fibre::Additive {
                profile: Profile::Identity,
                forcing: Forcing::None,
            },
            k,
        )
        .unwrap();
        assert!(matches!(detect_i0(&fam.at(0.3)), Err(Error::Structure(_))));
    }
}
