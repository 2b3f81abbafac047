//! Grid verification of the structural assumptions and an `E`/`C` proposal
//! from derivative thresholds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::regions::{detect_i0_with, i0_margin};
use super::CriticalRegion;
use crate::circle::{centered, reduce, CircleInterval};
use crate::error::{Error, Result};
use crate::maps::{FamilyConstants, QpfFamily, QpfMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    NotEvaluable,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleWitness {
    pub tau: f64,
    pub theta: f64,
    pub x: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub id: String,
    pub verdict: Verdict,
    /// smallest margin by which the sampled inequality held (negative if it failed)
    pub slack: f64,
    pub worst: Option<SampleWitness>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AssumptionGrid {
    pub n_theta: usize,
    pub n_x: usize,
    pub taus: Vec<f64>,
    pub i0_cells: usize,
    /// τ step for endpoint derivatives
    pub tau_step: f64,
}

impl Default for AssumptionGrid {
    fn default() -> Self {
        AssumptionGrid {
            n_theta: 1000,
            n_x: 1000,
            taus: vec![0.5],
            i0_cells: 1 << 16,
            tau_step: 1e-5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub conditions: Vec<ConditionResult>,
    pub i0: Vec<(f64, Option<CriticalRegion>)>,
}

impl AssumptionReport {
    pub fn get(&self, id: &str) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.id == id)
    }

    pub fn passes(&self, ids: &[&str]) -> bool {
        ids.iter().all(|id| self.get(id).is_some_and(|c| c.verdict == Verdict::Pass))
    }
}

/// Running minimum of slack with its witness.
#[derive(Clone, Copy)]
struct Worst(f64, Option<SampleWitness>);

impl Worst {
    fn none() -> Self {
        Worst(f64::INFINITY, None)
    }

    fn push(self, slack: f64, w: SampleWitness) -> Self {
        if slack < self.0 || (slack.is_nan() && self.1.is_none()) {
            Worst(slack, Some(w))
        } else {
            self
        }
    }

    fn merge(self, other: Self) -> Self {
        if other.0 < self.0 {
            other
        } else {
            self
        }
    }
}

fn result(id: &str, w: Worst, detail: impl Into<String>) -> ConditionResult {
    ConditionResult {
        id: id.into(),
        verdict: if w.0 > 0.0 { Verdict::Pass } else { Verdict::Fail },
        slack: w.0,
        worst: w.1,
        detail: detail.into(),
    }
}

fn not_evaluable(id: &str, why: &str) -> ConditionResult {
    ConditionResult {
        id: id.into(),
        verdict: Verdict::NotEvaluable,
        slack: f64::NAN,
        worst: None,
        detail: why.into(),
    }
}

/// Minimum of `slack(θ, x)` over `θ ∈ thetas`, `x ∈ xs`.
fn grid_min<F>(tau: f64, thetas: &[f64], xs: &[f64], slack: F) -> Worst
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    thetas
        .par_iter()
        .map(|&t| {
            xs.iter().fold(Worst::none(), |w, &x| {
                let v = slack(t, x);
                w.push(v, SampleWitness { tau, theta: t, x, value: v })
            })
        })
        .reduce(Worst::none, Worst::merge)
}

fn uniform(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / n as f64).collect()
}

fn on_interval(iv: &CircleInterval, n: usize) -> Vec<f64> {
    (0..n).map(|i| iv.point_at(i as f64 / (n - 1).max(1) as f64)).collect()
}

/// Sign changes of a circle-valued offset over a sampled path, ignoring the
/// jump at the antipode.
fn crossings(values: &[f64]) -> usize {
    values
        .windows(2)
        .filter(|w| w[0].abs() < 0.25 && w[1].abs() < 0.25 && (w[0] <= 0.0) != (w[1] <= 0.0))
        .count()
}

fn endpoint_speeds(family: &QpfFamily, tau: f64, h: f64, cells: usize) -> Result<[[f64; 2]; 2]> {
    let lo = detect_i0_with(&family.at(tau - h), cells)?;
    let hi = detect_i0_with(&family.at(tau + h), cells)?;
    let d = |a: f64, b: f64| centered(b - a) / (2.0 * h);
    Ok([1, 2].map(|iota| {
        let (l, r) = (lo.component(iota), hi.component(iota));
        [d(l.left(), r.left()), d(l.right_unwrapped(), r.right_unwrapped())]
    }))
}

/// Evaluates every assumption on the grid at each listed τ.
pub fn verify_assumptions(family: &QpfFamily, grid: &AssumptionGrid) -> Result<AssumptionReport> {
    let k: FamilyConstants = *family.constants()?;
    if grid.n_theta < 2 || grid.n_x < 2 || grid.taus.is_empty() {
        return Err(Error::InvalidParameter("assumption grid is too small".into()));
    }
    let (a, p) = (k.alpha, k.p);
    let thetas = uniform(grid.n_theta);
    let xs = uniform(grid.n_x);
    let xs_e = on_interval(&k.e, grid.n_x);
    let xs_c = on_interval(&k.c, grid.n_x);
    let hi2 = a.powf(2.0 / p);
    let lo2 = a.powf(-2.0 / p);
    let (ap, am) = (a.powf(p), a.powf(-p));
    let mut w = vec![Worst::none(); 8];
    let mut w1p = Worst::none();
    let mut i0s = Vec::new();
    let mut a6 = Vec::new();
    let mut a7: Option<Worst> = Some(Worst::none());
    let mut a9 = Some(Worst::none());
    let mut a10 = Some(Worst::none());
    for &tau in &grid.taus {
        let m = family.at(tau);
        let dv = |t: f64, x: f64| m.fibre_derivatives(t, x);
        let region = detect_i0_with(&m, grid.i0_cells).ok();
        i0s.push((tau, region));
        // A1 on the grid outside I₀
        w[0] = w[0].merge(grid_min(tau, &thetas, &[0.0], |t, _| {
            if region.is_some_and(|r| r.contains(t)) {
                f64::INFINITY
            } else {
                i0_margin(&m, t).unwrap_or(f64::NAN)
            }
        }));
        w1p = w1p.merge(grid_min(tau, &thetas, &[0.0], |t, _| {
            let inside = region.is_some_and(|r| r.contains(reduce(t - m.omega())));
            if inside {
                f64::INFINITY
            } else {
                preimage_margin(&m, &k, t).unwrap_or(f64::NAN)
            }
        }));
        w[1] = w[1].merge(grid_min(tau, &thetas, &xs, |t, x| {
            let d = dv(t, x).d_x;
            (d - am).min(ap - d)
        }));
        w[2] = w[2].merge(grid_min(tau, &thetas, &xs_e, |t, x| dv(t, x).d_x - hi2));
        w[3] = w[3].merge(grid_min(tau, &thetas, &xs_c, |t, x| lo2 - dv(t, x).d_x));
        w[4] = w[4].merge(grid_min(tau, &thetas, &xs, |t, x| k.big_s - dv(t, x).d_theta.abs()));
        w[7] = w[7].merge(grid_min(tau, &thetas, &xs, |t, x| {
            let d = dv(t, x).d_tau;
            (d - k.ell).min(k.big_l - d)
        }));
        match region {
            None => {
                a7 = None;
                a9 = None;
                a10 = None;
                a6.push(None);
            }
            Some(r) => {
                let mut counts = [[0usize; 2]; 2];
                for iota in [1, 2] {
                    let ts = on_interval(r.component(iota), grid.n_theta);
                    let top: Vec<f64> = ts.iter().map(|&t| centered(m.eval_fibre(t, k.c.right()) - k.e.left())).collect();
                    let bot: Vec<f64> = ts.iter().map(|&t| centered(m.eval_fibre(t, k.c.left()) - k.e.right())).collect();
                    counts[iota - 1] = [crossings(&top), crossings(&bot)];
                    if let Some(cur) = a7 {
                        let sign = if iota == 1 { -1.0 } else { 1.0 };
                        a7 = Some(cur.merge(grid_min(tau, &ts, &xs, |t, x| sign * dv(t, x).d_theta - k.small_s)));
                    }
                }
                a6.push(Some(counts));
                match endpoint_speeds(family, tau, grid.tau_step, grid.i0_cells) {
                    Ok(sp) => {
                        let wit = |v| SampleWitness { tau, theta: r.i1.left(), x: f64::NAN, value: v };
                        let sep = sp[0][0].min(sp[0][1]) - sp[1][0].max(sp[1][1]);
                        if let Some(cur) = a9 {
                            a9 = Some(cur.push(sep - k.ell / k.big_s, wit(sep)));
                        }
                        let fastest = sp.iter().flatten().fold(0f64, |m, v| m.max(v.abs()));
                        if let Some(cur) = a10 {
                            a10 = Some(cur.push(2.0 * k.big_l / k.small_s - fastest, wit(fastest)));
                        }
                    }
                    Err(_) => {
                        a9 = None;
                        a10 = None;
                    }
                }
            }
        }
    }
    let missing = "I0 could not be detected at some τ";
    let mut out = vec![
        result("A1", w[0], "f_θ(cl(T∖E)) ⊂ int C off I0"),
        result("A1'", w1p, "f_θ^{-1}(cl(T∖C)) ⊂ int E off I0+ω"),
        result("A2", w[1], "α^{-p} < ∂x f < α^p"),
        result("A3", w[2], "∂x f > α^{2/p} on T×E"),
        result("A4", w[3], "∂x f < α^{-2/p} on T×C"),
        result("A5", w[4], "|∂θ f| < S"),
    ];
    if i0s.iter().any(|(_, r)| r.is_none()) {
        out[0].verdict = Verdict::Fail;
        out[0].detail = format!("{}; {missing}", out[0].detail);
    }
    out.push(if a6.iter().any(|c| c.is_none()) {
        not_evaluable("A6", missing)
    } else {
        let all_one = a6.iter().flatten().all(|c| c.iter().flatten().all(|&n| n == 1));
        ConditionResult {
            id: "A6".into(),
            verdict: if all_one { Verdict::Pass } else { Verdict::Fail },
            slack: if all_one { 1.0 } else { -1.0 },
            worst: None,
            detail: format!("crossing counts per τ [[ι=1 top, bottom], [ι=2 top, bottom]]: {:?}", a6.iter().flatten().collect::<Vec<_>>()),
        }
    });
    out.push(match a7 {
        None => not_evaluable("A7", missing),
        Some(w) => result("A7", w, "∓∂θ f > s over I0^ι × T"),
    });
    out.push(result("A8", w[7], "ℓ < ∂τ f < L"));
    out.push(match a9 {
        None => not_evaluable("A9", missing),
        Some(w) => result("A9", w, "relative endpoint speed > ℓ/S"),
    });
    out.push(match a10 {
        None => not_evaluable("A10", missing),
        Some(w) => result("A10", w, "endpoint speeds < 2L/s"),
    });
    Ok(AssumptionReport { conditions: out, i0: i0s })
}

/// Containment margin of the preimage of `cl(T∖C)` into fibre `θ` in `int E`.
fn preimage_margin(m: &QpfMap, k: &FamilyConstants, theta: f64) -> Result<f64> {
    let from = reduce(theta - m.omega());
    let lo = m.inverse_lift(from, k.c.right_unwrapped())?;
    let hi = m.inverse_lift(from, k.c.left() + 1.0)?;
    let len = hi - lo;
    if len >= k.e.length() {
        return Ok(-(len - k.e.length()) - f64::MIN_POSITIVE);
    }
    Ok(super::inside_margin(k.e.left(), k.e.length() - len, lo))
}

/// Largest arcs where `inf_θ ∂x f > α^{2/p}` (for `E`) and
/// `sup_θ ∂x f < α^{−2/p}` (for `C`), sampled on an `n_theta × n_x` grid at `tau`.
pub fn propose_e_c(
    family: &QpfFamily,
    tau: f64,
    alpha: f64,
    p: f64,
    n_theta: usize,
    n_x: usize,
) -> Result<(CircleInterval, CircleInterval)> {
    let m = family.at(tau);
    let thetas = uniform(n_theta);
    let xs = uniform(n_x);
    let (lo, hi): (Vec<f64>, Vec<f64>) = xs
        .par_iter()
        .map(|&x| {
            thetas.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| {
                let d = m.d_x(t, x);
                (a.min(d), b.max(d))
            })
        })
        .unzip();
    let e = max_run(&xs, &lo, |v| v > alpha.powf(2.0 / p), true)
        .ok_or_else(|| Error::Structure(format!("no x with inf ∂x f > α^(2/p) = {}", alpha.powf(2.0 / p))))?;
    let c = max_run(&xs, &hi, |v| v < alpha.powf(-2.0 / p), false)
        .ok_or_else(|| Error::Structure(format!("no x with sup ∂x f < α^(-2/p) = {}", alpha.powf(-2.0 / p))))?;
    if e.intersects(&c) {
        return Err(Error::Structure("proposed E and C overlap".into()));
    }
    Ok((e, c))
}

/// The run of passing samples around the extremal sample.
fn max_run(xs: &[f64], v: &[f64], ok: impl Fn(f64) -> bool, largest: bool) -> Option<CircleInterval> {
    let n = xs.len();
    let pick = (0..n).max_by(|&i, &j| {
        let o = v[i].total_cmp(&v[j]);
        if largest {
            o
        } else {
            o.reverse()
        }
    })?;
    if !ok(v[pick]) {
        return None;
    }
    if (0..n).all(|i| ok(v[i])) {
        return Some(CircleInterval::full());
    }
    let mut left = 0;
    while ok(v[(pick + n - left - 1) % n]) {
        left += 1;
    }
    let mut right = 0;
    while ok(v[(pick + right + 1) % n]) {
        right += 1;
    }
    let step = 1.0 / n as f64;
    CircleInterval::new(xs[(pick + n - left) % n], (left + right) as f64 * step).ok()
}
