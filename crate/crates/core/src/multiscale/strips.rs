//! Sampled boundary graphs of iterated strips and the forward/backward
//! iteration bounds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::recurrence::exceptional_sets;
use super::regions::MultiscaleState;
use super::BoundCheck;
use crate::circle::{rotate, CircleInterval};
use crate::error::{Error, Result};
use crate::maps::QpfMap;

/// `f^n(base × fibre)` sampled along its boundary graphs.
///
/// `lower`/`upper` are lift values, continuous along the samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryStrip {
    pub source: CircleInterval,
    pub fibre: CircleInterval,
    pub n: i64,
    /// `source + nω`
    pub base: CircleInterval,
    pub theta_samples: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub slopes_lower: Vec<f64>,
    pub slopes_upper: Vec<f64>,
    pub analytic_lower: Vec<f64>,
    pub analytic_upper: Vec<f64>,
}

impl BoundaryStrip {
    pub fn widths(&self) -> Vec<f64> {
        self.upper.iter().zip(&self.lower).map(|(u, l)| u - l).collect()
    }

    pub fn max_width(&self) -> f64 {
        self.widths().into_iter().fold(0.0, f64::max)
    }

    /// Worst relative disagreement between finite-difference and analytic
    /// slopes, scaled by `max(|analytic|, floor)`.
    pub fn slope_agreement(&self, floor: f64) -> f64 {
        let rel = |fd: &[f64], an: &[f64]| {
            fd.iter()
                .zip(an)
                .map(|(a, b)| (a - b).abs() / b.abs().max(floor))
                .fold(0.0, f64::max)
        };
        rel(&self.slopes_lower, &self.analytic_lower).max(rel(&self.slopes_upper, &self.analytic_upper))
    }

    /// Boundary lift values at a source-relative position by linear interpolation.
    pub fn interpolate(&self, t: f64) -> (f64, f64) {
        let n = self.lower.len();
        let s = (t.clamp(0.0, 1.0) * (n - 1) as f64).min((n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        let u = s - i as f64;
        (
            self.lower[i] + u * (self.lower[i + 1] - self.lower[i]),
            self.upper[i] + u * (self.upper[i + 1] - self.upper[i]),
        )
    }
}

/// Second-order finite differences on a uniform grid.
pub(crate) fn gradient(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            if i == 0 {
                (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
            } else if i == n - 1 {
                (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h)
            } else {
                (v[i + 1] - v[i - 1]) / (2.0 * h)
            }
        })
        .collect()
}

fn unwrap_along(v: &mut [f64], w: &mut [f64]) {
    for i in 1..v.len() {
        let k = (v[i - 1] - v[i]).round();
        v[i] += k;
        w[i] += k;
    }
}

pub fn track_boundary_strip(
    map: &QpfMap,
    base: &CircleInterval,
    fibre: &CircleInterval,
    n: i64,
    samples: usize,
) -> Result<BoundaryStrip> {
    if n == 0 || samples < 32 {
        return Err(Error::InvalidParameter("strips need |n| ≥ 1 and at least 32 samples".into()));
    }
    if fibre.is_full() {
        return Err(Error::FibreWrap);
    }
    let thetas: Vec<f64> = (0..samples).map(|i| base.point_at(i as f64 / (samples - 1) as f64)).collect();
    let rows: Vec<(f64, f64, f64, f64)> = thetas
        .par_iter()
        .map(|&t| {
            let (lo, hi) = map.iterate_arc(t, fibre.left(), fibre.length(), n)?;
            if hi - lo >= 1.0 {
                return Err(Error::FibreWrap);
            }
            let (_, _, dl) = map.orbit_slopes(t, fibre.left(), n, 0.0)?;
            let (_, _, du) = map.orbit_slopes(t, fibre.right(), n, 0.0)?;
            Ok((lo, hi, dl, du))
        })
        .collect::<Result<_>>()?;
    let mut lower: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let mut upper: Vec<f64> = rows.iter().map(|r| r.1).collect();
    unwrap_along(&mut lower, &mut upper);
    let h = base.length() / (samples - 1) as f64;
    let w = map.omega();
    Ok(BoundaryStrip {
        source: *base,
        fibre: *fibre,
        n,
        base: CircleInterval::new(rotate(base.left(), w, n), base.length())?,
        theta_samples: thetas.iter().map(|&t| rotate(t, w, n)).collect(),
        slopes_lower: gradient(&lower, h),
        slopes_upper: gradient(&upper, h),
        analytic_lower: rows.iter().map(|r| r.2).collect(),
        analytic_upper: rows.iter().map(|r| r.3).collect(),
        lower,
        upper,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StripDirection {
    Forward,
    Backward,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedCheck {
    pub name: String,
    pub check: BoundCheck,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripBoundReport {
    pub direction: StripDirection,
    pub level: usize,
    pub steps: u64,
    pub base: CircleInterval,
    pub fibre: CircleInterval,
    /// component of `ℐ_{n−1}` reached after the steps
    pub iota: Option<usize>,
    pub hypotheses: Vec<(String, bool)>,
    pub hypotheses_hold: bool,
    pub checks: Vec<NamedCheck>,
    /// worst finite-difference vs analytic relative slope difference
    pub slope_agreement: f64,
}

impl StripBoundReport {
    pub fn violations(&self) -> usize {
        self.checks.iter().filter(|c| !c.check.holds).count()
    }

    pub fn min_slack(&self) -> f64 {
        self.checks.iter().map(|c| c.check.slack).fold(f64::INFINITY, f64::min)
    }
}

fn worst_upper(name: &str, measured: impl Iterator<Item = f64>, bound: f64) -> NamedCheck {
    let m = measured.fold(f64::NEG_INFINITY, f64::max);
    NamedCheck {
        name: name.into(),
        check: BoundCheck::upper(m, bound),
    }
}

fn worst_lower(name: &str, measured: impl Iterator<Item = f64>, bound: f64) -> NamedCheck {
    let m = measured.fold(f64::INFINITY, f64::min);
    NamedCheck {
        name: name.into(),
        check: BoundCheck::lower(m, bound),
    }
}

/// Checks the hypotheses mechanically and, when they hold, measures the forward
/// (`fibre ⊂ 𝕋¹∖int E`) or backward (`fibre ⊂ 𝕋¹∖int C`) bounds over the
/// strip `base × fibre` iterated `steps` times.
pub fn check_strip_bounds(
    map: &QpfMap,
    state: &MultiscaleState,
    level: usize,
    direction: StripDirection,
    base: &CircleInterval,
    fibre: &CircleInterval,
    steps: u64,
    samples: usize,
) -> Result<StripBoundReport> {
    if level == 0 || level > state.regions.len() || steps == 0 {
        return Err(Error::InvalidParameter("strip bounds need 1 ≤ level ≤ depth+1 and steps ≥ 1".into()));
    }
    let k = *map.family.constants()?;
    let w = map.omega();
    let big_n = steps as i64;
    let prev = &state.regions[level - 1];
    let current = state.regions.get(level);
    let current_known = current.is_some() || state.critical_empty_at == Some(level - 1);
    let ex = exceptional_sets(state, level - 1);
    let a = k.alpha;
    let p = k.p;
    let interior_meets = |x: &CircleInterval, y: &CircleInterval| x.intersection(y).is_some_and(|i| i.length() > 0.0);
    let mut hyp = Vec::new();
    let iota;
    match direction {
        StripDirection::Forward => {
            hyp.push(("I ∩ V⁻ = ∅".to_string(), !ex.v_minus.intersects(base)));
            let end = base.shifted(big_n as f64 * w);
            iota = [1, 2].into_iter().find(|&i| prev.component(i).contains_interval(&end, 0.0));
            hyp.push(("I + Nω ⊂ ℐ_{n−1}".to_string(), iota.is_some()));
            let avoid = current_known
                && (0..big_n).all(|l| current.map_or(true, |r| !r.components().iter().any(|c| base.shifted(l as f64 * w).intersects(c))));
            hyp.push(("(I + lω) ∩ ℐ_n = ∅".to_string(), avoid));
            hyp.push(("fibre ∩ int E = ∅".to_string(), !interior_meets(fibre, &k.e)));
        }
        StripDirection::Backward => {
            hyp.push(("I ∩ V⁺ = ∅".to_string(), !ex.v_plus.intersects(base)));
            let end = base.shifted(-(big_n as f64) * w);
            iota = [1, 2]
                .into_iter()
                .find(|&i| prev.component(i).shifted(w).contains_interval(&end, 0.0));
            hyp.push(("I − Nω ⊂ ℐ_{n−1} + ω".to_string(), iota.is_some()));
            let avoid = current_known
                && (0..big_n).all(|l| {
                    current.map_or(true, |r| {
                        !r.components().iter().any(|c| base.shifted(-(l as f64) * w).intersects(&c.shifted(w)))
                    })
                });
            hyp.push(("(I − lω) ∩ (ℐ_n + ω) = ∅".to_string(), avoid));
            hyp.push(("fibre ∩ int C = ∅".to_string(), !interior_meets(fibre, &k.c)));
        }
    }
    let hypotheses_hold = hyp.iter().all(|(_, ok)| *ok);
    if !hypotheses_hold {
        return Ok(StripBoundReport {
            direction,
            level,
            steps,
            base: *base,
            fibre: *fibre,
            iota,
            hypotheses: hyp,
            hypotheses_hold,
            checks: Vec::new(),
            slope_agreement: 0.0,
        });
    }
    let width0 = fibre.length();
    let geo: f64 = a.powf(1.0 / p) - 1.0;
    let mut checks = Vec::new();
    let strip;
    match direction {
        StripDirection::Forward => {
            strip = track_boundary_strip(map, base, fibre, big_n, samples)?;
            let bound: f64 = (0..big_n).map(|l| a.powf(-(l as f64) / p) * k.big_s).sum();
            let slopes = || strip.analytic_lower.iter().chain(&strip.analytic_upper).map(|v| v.abs());
            checks.push(worst_upper("forward slope bound", slopes(), bound));
            checks.push(worst_upper("forward width (N)", strip.widths().into_iter(), a.powf(-(big_n as f64) / p) * width0));
            let next = track_boundary_strip(map, base, fibre, big_n + 1, samples)?;
            checks.push(worst_upper(
                "forward width (N+1)",
                next.widths().into_iter(),
                a.powf(-(big_n as f64 + 1.0) / p) * width0,
            ));
            let sl = || next.analytic_lower.iter().chain(&next.analytic_upper).copied();
            match iota {
                Some(1) => {
                    checks.push(worst_lower("decreasing slope window lower", sl(), -k.big_s - k.big_s / geo));
                    checks.push(worst_upper("decreasing slope window upper", sl(), -k.small_s + k.big_s / geo));
                }
                Some(_) => {
                    checks.push(worst_lower("increasing slope window lower", sl(), k.small_s - k.big_s / geo));
                    checks.push(worst_upper("increasing slope window upper", sl(), k.big_s + k.big_s / geo));
                }
                None => {}
            }
            let agreement = strip.slope_agreement(1e-12).max(next.slope_agreement(1e-12));
            return Ok(StripBoundReport {
                direction,
                level,
                steps,
                base: *base,
                fibre: *fibre,
                iota,
                hypotheses: hyp,
                hypotheses_hold,
                checks,
                slope_agreement: agreement,
            });
        }
        StripDirection::Backward => {
            strip = track_boundary_strip(map, base, fibre, -big_n, samples)?;
            let bound: f64 = (1..=big_n).map(|l| a.powf(-(l as f64) / p) * k.big_s).sum();
            let slopes = strip.analytic_lower.iter().chain(&strip.analytic_upper).map(|v| v.abs());
            checks.push(worst_upper("backward slope bound", slopes, bound));
            checks.push(worst_upper("backward width", strip.widths().into_iter(), a.powf(-(big_n as f64) / p) * width0));
        }
    }
    Ok(StripBoundReport {
        direction,
        level,
        steps,
        base: *base,
        fibre: *fibre,
        iota,
        hypotheses: hyp,
        hypotheses_hold,
        checks,
        slope_agreement: strip.slope_agreement(1e-12),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::DiophantineSpec;
    use crate::maps::{Fibre, Forcing, Profile, QpfFamily};

    #[test]
    fn rigid_strip_is_a_translate() {
        let fam = QpfFamily::new(
            DiophantineSpec::golden(),
            Fibre::Additive {
                profile: Profile::Identity,
                forcing: Forcing::None,
            },
            None,
        )
        .unwrap();
        let m = fam.at(0.1);
        let base = CircleInterval::new(0.2, 0.1).unwrap();
        let fibre = CircleInterval::new(0.2, 0.1).unwrap();
        let s = track_boundary_strip(&m, &base, &fibre, 5, 64).unwrap();
        for w in s.widths() {
            assert!((w - 0.1).abs() < 1e-12);
        }
        assert!(s.slopes_lower.iter().chain(&s.slopes_upper).all(|v| v.abs() < 1e-9));
        assert!((crate::circle::reduce(s.lower[0]) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn gradient_is_exact_on_quadratics() {
        let h = 0.01;
        let v: Vec<f64> = (0..10).map(|i| (i as f64 * h).powi(2)).collect();
        let g = gradient(&v, h);
        for (i, d) in g.iter().enumerate() {
            assert!((d - 2.0 * i as f64 * h).abs() < 1e-10);
        }
    }
}
