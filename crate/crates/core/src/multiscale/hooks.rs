//! Fast returns, the hook sets built around them and the parameter search
//! for an empty critical set.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::regions::{build_critical_sets, BuildSpec, MultiscaleState};
use super::schedule::MultiscaleSchedule;
use super::strips::{track_boundary_strip, BoundaryStrip, NamedCheck};
use super::{boundary, inside_margin, overlap_margin, positive_components, BoundCheck, CriticalRegion};
use crate::circle::{centered, interval_dist, rotate, CircleInterval, IntervalSet};
use crate::error::{Error, Result};
use crate::lyapunov::{detect_uniform_attractor, UniformAttractorReport};
use crate::maps::{FamilyConstants, QpfFamily, QpfMap};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FastReturn {
    pub k: u64,
    /// `centered(mid I² − mid(I¹ + kω))`; positive when `I¹ + kω` is to the left
    pub displacement: f64,
    pub distance: f64,
}

/// Signed offset of `I²_n` from `I¹_n + kω`, measured between midpoints on
/// the shorter arc.
pub fn return_displacement(region: &CriticalRegion, omega: f64, k: u64) -> f64 {
    let moved = region.i1.shifted(k as f64 * omega);
    centered(region.i2.midpoint() - moved.midpoint())
}

/// Smallest `k` in `k_lo..=k_hi` with `d(I¹_n + kω, I²_n) ≤ 4ε_n` and
/// `I¹_n + kω` locally to the left of `I²_n`.
pub fn find_fast_return(state: &MultiscaleState, level: usize, k_lo: u64, k_hi: u64) -> Option<FastReturn> {
    let r = state.regions.get(level)?;
    let reach = 4.0 * state.eps(level);
    (k_lo.max(1)..=k_hi).find_map(|k| {
        let moved = r.i1.shifted(k as f64 * state.omega);
        let distance = interval_dist(&moved, &r.i2);
        let displacement = return_displacement(r, state.omega, k);
        (distance <= reach && displacement >= 0.0).then_some(FastReturn { k, displacement, distance })
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    LeftOnly,
    RightOnly,
    Both,
    Neither,
    Unresolved,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HookSpec {
    pub k: u64,
    pub samples: usize,
    /// moving-average window for the crossing arc, as a fraction of `|J|`
    pub smoothing: f64,
    /// fibre tolerance below which two arcs count as touching
    pub x_tol: f64,
    /// bisection tolerance in θ
    pub theta_tol: f64,
}

impl HookSpec {
    pub fn new(k: u64) -> Self {
        HookSpec {
            k,
            samples: 2048,
            smoothing: 0.02,
            x_tol: 1e-12,
            theta_tol: 1e-15,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HookReport {
    pub level: usize,
    pub k: u64,
    pub tau: f64,
    pub j: Option<CircleInterval>,
    pub a_strip: Option<BoundaryStrip>,
    pub b_strip: Option<BoundaryStrip>,
    pub d_strip: Option<BoundaryStrip>,
    pub p0: Option<CircleInterval>,
    pub p1: Option<CircleInterval>,
    /// `Ξ` misses `f(J × (𝕋¹∖E))` on every sample
    pub xi_disjoint: bool,
    pub classification: Classification,
    pub left_hits: usize,
    pub right_hits: usize,
    /// no sample where `𝒜″_θ` and `ℬ″_θ` meet
    pub a_b_disjoint: bool,
    pub checks: Vec<NamedCheck>,
    /// the four case inequalities hold at the measured geometry
    pub separated: bool,
    pub unresolved: Option<String>,
}

impl HookReport {
    fn empty(level: usize, k: u64, tau: f64) -> Self {
        HookReport {
            level,
            k,
            tau,
            j: None,
            a_strip: None,
            b_strip: None,
            d_strip: None,
            p0: None,
            p1: None,
            xi_disjoint: false,
            classification: Classification::Unresolved,
            left_hits: 0,
            right_hits: 0,
            a_b_disjoint: false,
            checks: Vec::new(),
            separated: false,
            unresolved: None,
        }
    }

    fn fail(mut self, why: impl Into<String>) -> Self {
        self.unresolved = Some(why.into());
        self.classification = Classification::Unresolved;
        self
    }
}

/// Arc endpoints of the three fibre families at a target `θ ∈ J + ω`.
struct Fibres<'a> {
    map: &'a QpfMap,
    k: FamilyConstants,
    mn: i64,
    mp: i64,
    kk: i64,
}

impl Fibres<'_> {
    fn a(&self, t: f64) -> Result<(f64, f64)> {
        let w = self.map.omega();
        self.map.iterate_arc(rotate(t, w, -self.mn), self.k.c.left(), self.k.c.length(), self.mn)
    }

    fn d(&self, t: f64) -> Result<(f64, f64)> {
        let w = self.map.omega();
        let n = self.kk - self.mp;
        self.map.iterate_arc(rotate(t, w, -n), self.k.c.left(), self.k.c.length(), n)
    }

    fn b(&self, t: f64) -> Result<(f64, f64)> {
        let w = self.map.omega();
        let n = self.mn - self.kk;
        self.map.iterate_arc(rotate(t, w, n), self.k.e.left(), self.k.e.length(), -n)
    }
}

fn touch(a: (f64, f64), b: (f64, f64), tol: f64) -> f64 {
    overlap_margin(a.0 - tol, a.1 - a.0 + 2.0 * tol, b.0, b.1 - b.0)
}

fn single(v: Vec<CircleInterval>) -> Option<CircleInterval> {
    (v.len() == 1).then(|| v[0])
}

/// Builds `J`, the three strips over `J + ω`, `P₀`, `Ξ`, `P₁` and the
/// `ℒ`/`ℛ` classification of `ℬ″` at the current map.
pub fn hook_diagnostics(map: &QpfMap, state: &MultiscaleState, level: usize, spec: &HookSpec) -> Result<HookReport> {
    let mut rep = HookReport::empty(level, spec.k, map.tau);
    if level == 0 || level >= state.regions.len() {
        return Ok(rep.fail("level data missing"));
    }
    if spec.samples < 32 {
        return Err(Error::InvalidParameter("hook diagnostics need ≥ 32 samples".into()));
    }
    let kc = *map.family.constants()?;
    let w = map.omega();
    let r = &state.regions[level];
    let eps = state.eps(level);
    let mn = state.m(level) as i64;
    let mp = state.m(level - 1) as i64;
    let kk = spec.k as i64;
    if !(mp < kk && kk < mn) {
        return Ok(rep.fail(format!("need M_(n-1) < k < M_n, got {mp} < {kk} < {mn}")));
    }
    let u = IntervalSet::from_intervals([r.i1.shifted(kk as f64 * w).expanded(4.0 * eps), r.i2.expanded(4.0 * eps)]);
    let Some(j) = single(u.pieces().to_vec()) else {
        return Ok(rep.fail("J is not an interval"));
    };
    rep.j = Some(j);
    let top = j.shifted(w);
    let fib = Fibres { map, k: kc, mn, mp, kk };
    let n = spec.samples;
    let strips = (
        track_boundary_strip(map, &top.shifted(-(mn as f64) * w), &kc.c, mn, n),
        track_boundary_strip(map, &top.shifted((mn - kk) as f64 * w), &kc.e, -(mn - kk), n),
        track_boundary_strip(map, &top.shifted(-((kk - mp) as f64) * w), &kc.c, kk - mp, n),
    );
    let (a2, b2, d2) = match strips {
        (Ok(a), Ok(b), Ok(d)) => (a, b, d),
        _ => return Ok(rep.fail("a strip wraps around the fibre")),
    };
    let a_pow = |e: f64| kc.alpha.powf(e);
    let geo = a_pow(1.0 / kc.p) - 1.0;
    let (p, s_big, s_small) = (kc.p, kc.big_s, kc.small_s);
    let ex = |x: f64| centered(x - kc.e.left());
    let inside_e = |s: &BoundaryStrip| {
        s.lower
            .iter()
            .zip(&s.upper)
            .map(|(&l, &h)| inside_margin(kc.e.left(), kc.e.length() - (h - l), l))
            .fold(f64::INFINITY, f64::min)
    };
    let mut checks = vec![
        NamedCheck {
            name: "|B''_θ| ≤ |E| α^{-(M_n-k)/p}".into(),
            check: BoundCheck::upper(b2.max_width(), kc.e.length() * a_pow(-((mn - kk) as f64) / p)),
        },
        NamedCheck {
            name: "B'' ⊂ (J+ω)×E".into(),
            check: BoundCheck::lower(inside_e(&b2), 0.0),
        },
        NamedCheck {
            name: "D' ⊂ (J+ω)×E".into(),
            check: BoundCheck::lower(inside_e(&d2), 0.0),
        },
    ];
    let d_slopes = || d2.analytic_lower.iter().chain(&d2.analytic_upper).copied();
    checks.push(NamedCheck {
        name: "slope D' ≥ s − S/(α^{1/p}−1)".into(),
        check: BoundCheck::lower(d_slopes().fold(f64::INFINITY, f64::min), s_small - s_big / geo),
    });
    checks.push(NamedCheck {
        name: "slope D' ≤ S + S/(α^{1/p}−1)".into(),
        check: BoundCheck::upper(d_slopes().fold(f64::NEG_INFINITY, f64::max), s_big + s_big / geo),
    });
    let dw = d2.widths();
    checks.push(NamedCheck {
        name: "|D'_θ| ≤ |C| α^{-(k-M_(n-1))/p}".into(),
        check: BoundCheck::upper(
            dw.iter().copied().fold(0.0, f64::max),
            kc.c.length() * a_pow(-((kk - mp) as f64) / p),
        ),
    });
    checks.push(NamedCheck {
        name: "|D'_θ| ≥ |C| α^{-p(k-M_(n-1))}".into(),
        check: BoundCheck::lower(
            dw.iter().copied().fold(f64::INFINITY, f64::min),
            kc.c.length() * a_pow(-p * (kk - mp) as f64),
        ),
    });
    checks.push(NamedCheck {
        name: "|A''_θ| ≤ |C| α^{-M_n/p + (p+1/p)k}".into(),
        check: BoundCheck::upper(
            a2.max_width(),
            kc.c.length() * a_pow(-(mn as f64) / p + (p + 1.0 / p) * kk as f64),
        ),
    });
    // 𝒜″ against ℬ″ directly
    rep.a_b_disjoint = (0..n)
        .into_par_iter()
        .map(|i| {
            let t = a2.theta_samples[i];
            Ok(touch(fib.a(t)?, fib.b(t)?, spec.x_tol) <= 0.0)
        })
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .all(|v| v);
    rep.a_strip = Some(a2);
    rep.b_strip = Some(b2);
    rep.d_strip = Some(d2);
    rep.checks = checks;

    // P₀: where 𝒜″ leaves 𝒟′
    let leave = |t: f64| Ok(-touch(fib.d(t)?, fib.a(t)?, spec.x_tol));
    let p0s = positive_components(&leave, &top, n, spec.theta_tol)?;
    let Some(p0) = single(p0s.clone()) else {
        return Ok(rep.fail(format!("P0 has {} components", p0s.len())));
    };
    rep.p0 = Some(p0);
    let m1 = state.m(level - 1) as f64;
    rep.checks.push(NamedCheck {
        name: "|P0| ≥ (1−|C|)/(4S) α^{-p M_(n-1)}".into(),
        check: BoundCheck::lower(p0.length(), (1.0 - kc.c.length()) / (4.0 * s_big) * a_pow(-p * m1)),
    });
    rep.checks.push(NamedCheck {
        name: "|P0| ≤ 4(1−|C|)/s α^{-M_(n-1)/p}".into(),
        check: BoundCheck::upper(p0.length(), 4.0 * (1.0 - kc.c.length()) / s_small * a_pow(-m1 / p)),
    });

    // Ξ: ζ smoothed by a moving average, clipped to C
    let i02 = state.regions[0].i2;
    let phi_minus = |t: f64| map.eval_lift(rotate(t, w, -1), kc.e.right_unwrapped());
    let base_lift = phi_minus(rotate(i02.left(), w, 1));
    let thetas: Vec<f64> = (0..n).map(|i| top.point_at(i as f64 / (n - 1) as f64)).collect();
    let zeta: Vec<f64> = thetas
        .iter()
        .map(|&t| {
            let mut d = phi_minus(t) - base_lift;
            d -= d.floor();
            kc.c.left() + d.min(kc.c.length())
        })
        .collect();
    let half = ((spec.smoothing * n as f64) as usize / 2).max(1);
    let xi: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            let avg = zeta[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64;
            avg.clamp(kc.c.left(), kc.c.right_unwrapped())
        })
        .collect();
    rep.xi_disjoint = thetas.iter().zip(&xi).all(|(&t, &x)| {
        let from = rotate(t, w, -1);
        let lo = map.eval_lift(from, kc.e.right_unwrapped());
        let hi = map.eval_lift(from, kc.e.left() + 1.0);
        inside_margin(lo, hi - lo, x) < 0.0
    });
    let xi_at = |t: f64| {
        let pos = (top.offset_of(t) / top.length()).clamp(0.0, 1.0) * (n - 1) as f64;
        let i = (pos.floor() as usize).min(n - 2);
        let u = pos - i as f64;
        xi[i] + u * (xi[i + 1] - xi[i])
    };
    let on_xi = |t: f64| {
        let (lo, hi) = fib.a(t)?;
        Ok(inside_margin(lo - spec.x_tol, hi - lo + 2.0 * spec.x_tol, xi_at(t)))
    };
    let mut p1s = positive_components(&on_xi, &top, n, spec.theta_tol)?;
    if p1s.is_empty() {
        p1s = crossings_of_xi(&fib, &xi_at, &on_xi, &thetas, &top, spec.theta_tol)?;
    }
    let Some(p1) = single(p1s.clone()) else {
        return Ok(rep.fail(format!("P1 has {} components", p1s.len())));
    };
    rep.p1 = Some(p1);
    if !p0.contains_interval(&p1, 0.0) {
        return Ok(rep.fail("P1 is not inside P0"));
    }

    // ℒ / ℛ occupancy of ℬ″
    let o_p0 = top.offset_of(p0.left());
    let o_p0r = o_p0 + p0.length();
    let o_p1 = top.offset_of(p1.left());
    let o_p1r = o_p1 + p1.length();
    let hits: Vec<(bool, bool)> = thetas
        .par_iter()
        .map(|&t| {
            let o = top.offset_of(t);
            let (bl, bh) = fib.b(t)?;
            let (dl, dh) = fib.d(t)?;
            let b0 = ex(bl);
            let b1 = b0 + (bh - bl);
            let d0 = ex(dl);
            let d1 = d0 + (dh - dl);
            let e1 = kc.e.length();
            let meets = |lo: f64, hi: f64| b0 <= hi + spec.x_tol && b1 >= lo - spec.x_tol;
            Ok(if o < o_p0 {
                (meets(0.0, d1), false)
            } else if o > o_p0r {
                (false, meets(d0, e1))
            } else if o < o_p1 {
                (meets(0.0, d0), false)
            } else if o > o_p1r {
                (false, meets(d1, e1))
            } else {
                (false, false)
            })
        })
        .collect::<Result<_>>()?;
    rep.left_hits = hits.iter().filter(|h| h.0).count();
    rep.right_hits = hits.iter().filter(|h| h.1).count();
    rep.classification = match (rep.left_hits > 0, rep.right_hits > 0) {
        (true, true) => Classification::Both,
        (true, false) => Classification::LeftOnly,
        (false, true) => Classification::RightOnly,
        (false, false) => Classification::Neither,
    };

    // case inequalities with Δ at its smallest admissible value, in log space
    let gap = (o_p1 - o_p0).min(o_p0r - o_p1r).max(0.0);
    let coef = s_small / 2.0 - s_big / geo;
    let la = kc.alpha.ln();
    let ln_b = -((mn - kk) as f64) / p * la;
    let ln_d = -((kk - mp) as f64) / p * la;
    let lse = |a: f64, b: f64| a.max(b) + (-(a - b).abs()).exp().ln_1p();
    let case1 = coef > 0.0 && (coef * p0.length()).ln() >= lse(ln_d, ln_b);
    let case2 = coef > 0.0 && gap > 0.0 && (coef * gap).ln() >= ln_b;
    let case4 = kc.c.length().ln() - p * (kk - mp) as f64 * la >= ln_b;
    rep.separated = case1 && case2 && case4;
    Ok(rep)
}

/// Arcs of `𝒜″` too steep for the sample grid: sample gaps with a large
/// step are subdivided until the strip moves continuously, and each
/// crossing of `Ξ` is widened to where the strip stops touching it.
fn crossings_of_xi(
    fib: &Fibres<'_>,
    xi_at: &dyn Fn(f64) -> f64,
    on_xi: &dyn Fn(f64) -> Result<f64>,
    thetas: &[f64],
    top: &CircleInterval,
    tol: f64,
) -> Result<Vec<CircleInterval>> {
    const STEP: f64 = 0.01;
    let at = |o: f64| top.left() + o;
    let mid = |o: f64| -> Result<f64> {
        let (lo, hi) = fib.a(at(o))?;
        Ok(0.5 * (lo + hi))
    };
    let gap = |o: f64| -> Result<f64> { Ok(centered(mid(o)? - xi_at(at(o)))) };
    let offs: Vec<f64> = thetas.iter().map(|&t| top.offset_of(t)).collect();
    let mut path = vec![(offs[0], mid(offs[0])?)];
    for w in offs.windows(2) {
        let mut stack = vec![(w[0], w[1], 0u32)];
        while let Some((a, b, depth)) = stack.pop() {
            let (ya, yb) = (path[path.len() - 1].1, mid(b)?);
            let m = 0.5 * (a + b);
            if centered(yb - ya).abs() <= STEP || depth >= 60 || m == a || m == b {
                path.push((b, yb));
            } else {
                stack.push((m, b, depth + 1));
                stack.push((a, m, depth + 1));
            }
        }
    }
    let mut out = Vec::new();
    for w in path.windows(2) {
        let ((a0, _), (b0, _)) = (w[0], w[1]);
        let ga = gap(a0)?;
        if (ga > 0.0) == (gap(b0)? > 0.0) || (ga - gap(b0)?).abs() > 4.0 * STEP {
            continue;
        }
        let (mut a, mut b) = (a0, b0);
        while b - a > tol {
            let m = 0.5 * (a + b);
            if m == a || m == b {
                break;
            }
            if (gap(m)? > 0.0) == (ga > 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        let root = 0.5 * (a + b);
        let touches = |o: f64| Ok(on_xi(at(o))? >= 0.0);
        let (l, r) = if touches(root)? {
            (boundary(&touches, a0, root, tol)?, boundary(&touches, b0, root, tol)?)
        } else {
            (root, root)
        };
        out.push(CircleInterval::new(at(l), r - l)?);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapScanSpec {
    pub tau_lo: f64,
    pub tau_hi: f64,
    /// level whose critical set should vanish
    pub level: usize,
    pub m: Vec<u64>,
    /// explicit `ε_0, …, ε_{levels}`; `ε_0 = max |I_0^ι|` and the window
    /// lower ends otherwise
    pub eps: Option<Vec<f64>>,
    pub nu: f64,
    pub build: BuildSpec,
    pub hook: HookSpec,
    pub max_bisections: usize,
    pub tau_tol: f64,
    pub attractor_iterations: u64,
    pub attractor_grid: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapStep {
    pub tau: f64,
    pub classification: Classification,
    pub critical_empty: bool,
    /// `𝒜″ ∩ ℬ″ = ∅` on the sample grid
    pub strips_disjoint: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapScan {
    pub tau_star: Option<f64>,
    pub left: Classification,
    pub right: Classification,
    pub steps: Vec<GapStep>,
    /// the state at `τ★`, built one level further
    pub state: Option<MultiscaleState>,
    pub attractor: Option<UniformAttractorReport>,
    pub reason: Option<String>,
}

/// Critical sets at `tau` under the scan's desk schedule, built through
/// level `levels`.
pub fn scan_state(family: &QpfFamily, tau: f64, spec: &GapScanSpec, levels: usize) -> Result<MultiscaleState> {
    let map = family.at(tau);
    let k = family.constants()?;
    let r0 = super::regions::detect_i0_with(&map, spec.build.i0_cells)?;
    let mut schedule = MultiscaleSchedule::desk(spec.m.clone(), k, spec.nu, r0.max_length())?;
    if let Some(eps) = &spec.eps {
        schedule = schedule.with_eps(eps.clone())?;
    }
    build_critical_sets(&map, &schedule, levels, &spec.build, Some(r0))
}

fn classify(family: &QpfFamily, tau: f64, spec: &GapScanSpec) -> Result<GapStep> {
    let st = scan_state(family, tau, spec, spec.level + 1)?;
    let mut step = GapStep {
        tau,
        classification: Classification::Unresolved,
        critical_empty: st.critical_empty_at == Some(spec.level),
        strips_disjoint: false,
    };
    if st.regions.len() > spec.level {
        let rep = hook_diagnostics(&family.at(tau), &st, spec.level, &spec.hook)?;
        step.classification = rep.classification;
        step.strips_disjoint = rep.a_b_disjoint;
    }
    Ok(step)
}

pub fn uniform_at(family: &QpfFamily, tau: f64, n: u64, grid: usize) -> Result<UniformAttractorReport> {
    detect_uniform_attractor(&family.at(tau), n, grid)
}

/// Bisection on the `ℒ`/`ℛ` classification between `tau_lo` and `tau_hi`.
/// Stops at the first τ whose critical set at the chosen level is confirmed
/// empty and which the hooks classify as "neither", or as "both" with
/// `𝒜″ ∩ ℬ″ = ∅` checked directly.
pub fn scan_gap_parameter(family: &QpfFamily, spec: &GapScanSpec) -> Result<GapScan> {
    let a = classify(family, spec.tau_lo, spec)?;
    let b = classify(family, spec.tau_hi, spec)?;
    let (l, r) = (a.classification, b.classification);
    let mut out = GapScan {
        tau_star: None,
        left: l,
        right: r,
        steps: vec![a, b],
        state: None,
        attractor: None,
        reason: None,
    };
    let sided = |c: Classification| matches!(c, Classification::LeftOnly | Classification::RightOnly);
    if !sided(l) || !sided(r) || l == r {
        out.reason = Some(format!("no bracket: endpoints classify as {l:?} and {r:?}"));
        return Ok(out);
    }
    let (mut lo, mut hi) = (spec.tau_lo, spec.tau_hi);
    let mut found = None;
    for _ in 0..spec.max_bisections {
        if hi - lo <= spec.tau_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let step = classify(family, mid, spec)?;
        let (c, empty, disjoint) = (step.classification, step.critical_empty, step.strips_disjoint);
        out.steps.push(step);
        match c {
            Classification::Neither if empty => {
                found = Some(mid);
                break;
            }
            Classification::Both if empty && disjoint => {
                found = Some(mid);
                break;
            }
            c if c == l => lo = mid,
            c if c == r => hi = mid,
            _ => {
                out.reason = Some(format!("bisection met {c:?} at τ = {mid}"));
                return Ok(out);
            }
        }
    }
    let Some(ts) = found else {
        out.reason = Some("bracket shrank below tolerance without an empty critical set".into());
        return Ok(out);
    };
    let st = scan_state(family, ts, spec, spec.level + 1)?;
    out.attractor = Some(uniform_at(family, ts, spec.attractor_iterations, spec.attractor_grid)?);
    out.state = Some(st);
    out.tau_star = Some(ts);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::golden_mean;

    fn state_with(i1: CircleInterval, i2: CircleInterval, eps: f64) -> MultiscaleState {
        let k = FamilyConstants {
            alpha: 100.0,
            p: 2.0,
            big_s: 1.0,
            small_s: 0.5,
            ell: 0.5,
            big_l: 2.0,
            e: CircleInterval::from_endpoints(-0.01, 0.01).unwrap(),
            c: CircleInterval::from_endpoints(0.3, 0.7).unwrap(),
        };
        let schedule = MultiscaleSchedule::desk(vec![3, 20], &k, 1.0, eps).unwrap();
        MultiscaleState {
            tau: 0.0,
            omega: golden_mean(),
            alpha: 100.0,
            p: 2.0,
            schedule,
            regions: vec![
                CriticalRegion { level: 0, i1, i2 },
                CriticalRegion { level: 1, i1, i2 },
            ],
            status: vec![],
            critical_empty_at: None,
            breakdown: None,
        }
    }

    #[test]
    fn exact_return_is_found() {
        let w = golden_mean();
        let i2 = CircleInterval::new(0.4, 1e-9).unwrap();
        let i1 = i2.shifted(-17.0 * w - 1e-10);
        let s = state_with(i1, i2, 1e-9);
        let f = find_fast_return(&s, 0, 1, 100).unwrap();
        assert_eq!(f.k, 17);
        assert!(f.displacement > 0.0 && f.displacement < 1e-9);
        assert!(find_fast_return(&s, 0, 5, 4).is_none());
    }

    #[test]
    fn pigeonhole_return_exists() {
        let i1 = CircleInterval::new(0.123, 1e-4).unwrap();
        let i2 = CircleInterval::new(0.789, 1e-4).unwrap();
        let s = state_with(i1, i2, 1e-4);
        let n = (1.0 / 4e-4f64).ceil();
        let bound = (2.0 / 0.38 * n * n).ceil() as u64;
        assert!(find_fast_return(&s, 0, 1, bound).is_some());
    }
}
