//! Fibred rotation numbers, τ-sweeps, plateau detection and refinement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle::{circle_dist, reduce, CircleInterval};
use crate::error::{Error, Result};
use crate::maps::{QpfFamily, QpfMap};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorParams {
    pub n_iter: u64,
    pub burn_in: u64,
    pub n_starts: usize,
    pub seed: u64,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        EstimatorParams {
            n_iter: 10_000,
            burn_in: 1_000,
            n_starts: 4,
            seed: 1,
        }
    }
}

impl EstimatorParams {
    /// Plateau flatness threshold matched to the estimator's resolution.
    pub fn default_flat_tol(&self) -> f64 {
        10.0 / self.n_iter as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationEstimate {
    /// rotation number mod 1
    pub rho: f64,
    /// mean lift displacement rate (not reduced)
    pub rho_unwrapped: f64,
    pub n_iter: u64,
    pub spread: f64,
    /// heuristic: spread + 2/n_iter
    pub error_bound: f64,
}

/// Decorrelated per-task seed.
pub fn task_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn estimate_rotation_number(map: &QpfMap, params: &EstimatorParams) -> Result<RotationEstimate> {
    if params.n_iter == 0 || params.n_starts == 0 {
        return Err(Error::InvalidParameter("need n_iter >= 1 and n_starts >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut rates = Vec::with_capacity(params.n_starts);
    for _ in 0..params.n_starts {
        let theta: f64 = rng.gen();
        let x: f64 = rng.gen();
        let warm = map.iterate(theta, x, params.burn_in as i64, false)?;
        let run = map.iterate(warm.theta, warm.x, params.n_iter as i64, false)?;
        rates.push(run.displacement / params.n_iter as f64);
    }
    let mean = rates.iter().sum::<f64>() / rates.len() as f64;
    let max = rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = rates.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = max - min;
    Ok(RotationEstimate {
        rho: reduce(mean),
        rho_unwrapped: mean,
        n_iter: params.n_iter,
        spread,
        error_bound: spread + 2.0 / params.n_iter as f64,
    })
}

/// Uniform τ-grid including both endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauGrid {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl TauGrid {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        if n == 1 {
            return vec![self.start];
        }
        (0..n)
            .map(|i| self.start + (self.end - self.start) * i as f64 / (n - 1) as f64)
            .collect()
    }

    pub fn spacing(&self) -> f64 {
        if self.points < 2 {
            0.0
        } else {
            (self.end - self.start) / (self.points - 1) as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Staircase {
    pub tau: Vec<f64>,
    pub estimates: Vec<RotationEstimate>,
}

impl Staircase {
    /// Spacing of the (assumed uniform) grid.
    pub fn spacing(&self) -> f64 {
        if self.tau.len() < 2 {
            0.0
        } else {
            (self.tau[self.tau.len() - 1] - self.tau[0]) / (self.tau.len() - 1) as f64
        }
    }

    /// Indices `j` at which some earlier estimate exceeds this one by more
    /// than their two error bounds combined.
    pub fn monotonicity_violations(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut best = f64::NEG_INFINITY;
        for (j, e) in self.estimates.iter().enumerate() {
            if best > e.rho_unwrapped + e.error_bound {
                out.push(j);
            }
            best = best.max(e.rho_unwrapped - e.error_bound);
        }
        out
    }
}

/// Computes every grid point independently (in parallel) and collects them
/// in grid order, then makes `rho_unwrapped` continuous along the grid.
pub fn sweep_staircase(family: &QpfFamily, grid: &TauGrid, params: &EstimatorParams) -> Result<Staircase> {
    if grid.points < 2 {
        return Err(Error::InvalidParameter("tau grid needs at least 2 points".into()));
    }
    let tau = grid.values();
    sweep_values(family, &tau, params)
}

pub fn sweep_values(family: &QpfFamily, tau: &[f64], params: &EstimatorParams) -> Result<Staircase> {
    let estimates: Vec<RotationEstimate> = tau
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            let p = EstimatorParams {
                seed: task_seed(params.seed, i as u64),
                ..*params
            };
            estimate_rotation_number(&family.at(t), &p)
        })
        .collect::<Result<_>>()?;
    let mut st = Staircase {
        tau: tau.to_vec(),
        estimates,
    };
    track_branch(&mut st);
    Ok(st)
}

/// Shifts each unwrapped value by the integer that keeps it closest to its
/// predecessor.
fn track_branch(st: &mut Staircase) {
    for i in 1..st.estimates.len() {
        let prev = st.estimates[i - 1].rho_unwrapped;
        let cur = st.estimates[i].rho_unwrapped;
        let k = (prev - cur).round();
        st.estimates[i].rho_unwrapped = cur + k;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    pub interval: CircleInterval,
    pub tau_left: f64,
    pub tau_right: f64,
    pub rho_locked: f64,
    pub rho_unwrapped: f64,
    /// distance to the neighbouring grid points, where the true edge may lie
    pub edge_tolerance: f64,
    pub flat_tol: f64,
    pub first_index: usize,
    pub last_index: usize,
}

impl Plateau {
    pub fn width(&self) -> f64 {
        self.tau_right - self.tau_left
    }

    /// Whether `tau` lies in the plateau widened by its edge tolerance.
    pub fn contains_tau(&self, tau: f64) -> bool {
        let tol = self.edge_tolerance;
        let t = self.tau_left + reduce(tau - self.tau_left + tol) - tol;
        t >= self.tau_left - tol && t <= self.tau_right + tol
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Greedy maximal runs of pairwise-flat (range ≤ `flat_tol`) unwrapped values;
/// single-point runs are dropped.
pub fn detect_plateaus(st: &Staircase, flat_tol: f64) -> Vec<Plateau> {
    let n = st.estimates.len();
    let spacing = st.spacing();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let mut lo = st.estimates[i].rho_unwrapped;
        let mut hi = lo;
        let mut j = i;
        while j + 1 < n {
            let v = st.estimates[j + 1].rho_unwrapped;
            let nlo = lo.min(v);
            let nhi = hi.max(v);
            if nhi - nlo > flat_tol {
                break;
            }
            lo = nlo;
            hi = nhi;
            j += 1;
        }
        if j > i {
            let mut vals: Vec<f64> = st.estimates[i..=j].iter().map(|e| e.rho_unwrapped).collect();
            let med = median(&mut vals);
            let (a, b) = (st.tau[i], st.tau[j]);
            out.push(Plateau {
                interval: CircleInterval::new(a, (b - a).min(1.0)).expect("finite tau grid"),
                tau_left: a,
                tau_right: b,
                rho_locked: reduce(med),
                rho_unwrapped: med,
                edge_tolerance: spacing,
                flat_tol,
                first_index: i,
                last_index: j,
            });
        }
        i = j + 1;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinedEdge {
    /// last τ still locked
    pub tau: f64,
    /// first τ found unlocked
    pub tau_unlocked: f64,
    pub evaluations: usize,
}

/// Bisection on τ between the plateau's edge point and the first unlocked
/// point beyond it.
pub fn refine_plateau_edge(
    family: &QpfFamily,
    pl: &Plateau,
    side: Side,
    bisect_tol: f64,
    params: &EstimatorParams,
) -> Result<RefinedEdge> {
    if !family.monotone_in_tau {
        return Err(Error::RefinementDisabled(
            "family is not monotone in tau; bisection on rho is not justified".into(),
        ));
    }
    if !(bisect_tol > 0.0) {
        return Err(Error::InvalidParameter("bisect_tol must be positive".into()));
    }
    let tol = pl.flat_tol;
    let mut evaluations = 0usize;
    let mut locked = |t: f64, k: u64| -> Result<bool> {
        evaluations += 1;
        let p = EstimatorParams {
            seed: crate::rotation::task_seed(params.seed, k),
            ..*params
        };
        let e = estimate_rotation_number(&family.at(t), &p)?;
        Ok(circle_dist(e.rho, pl.rho_locked) <= tol)
    };
    let (inner, dir) = match side {
        Side::Left => (pl.tau_left, -1.0),
        Side::Right => (pl.tau_right, 1.0),
    };
    if !locked(inner, 0)? {
        return Err(Error::FalsePlateau(format!(
            "rho at tau={inner} differs from the locked value {}",
            pl.rho_locked
        )));
    }
    let step = pl.edge_tolerance.max(bisect_tol);
    let mut a = inner;
    let mut b = inner + dir * step;
    let mut k = 1;
    while locked(b, k)? {
        a = b;
        b += dir * step;
        k += 1;
        if k > 10_000 {
            return Err(Error::FalsePlateau("no unlocked point found beyond the edge".into()));
        }
    }
    while (b - a).abs() > bisect_tol {
        let mid = 0.5 * (a + b);
        k += 1;
        if locked(mid, k)? {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(RefinedEdge {
        tau: a,
        tau_unlocked: b,
        evaluations,
    })
}

/// `rho ≈ r + qω (mod 1)` with rationals `r = r_num/r_den`, `q = q_num/q_den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleWitness {
    pub r_num: i64,
    pub r_den: i64,
    pub q_num: i64,
    pub q_den: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Smallest-denominator witness (ordered by the larger of the two
/// denominators, then by |q|); numerators range over `|·| ≤ max_denominator`.
pub fn module_membership(rho: f64, omega: f64, max_denominator: i64, tol: f64) -> Option<ModuleWitness> {
    let dmax = max_denominator.max(1);
    for d in 1..=dmax {
        let mut best: Option<(i64, ModuleWitness)> = None;
        for q_den in 1..=d {
            for q_num in -dmax..=dmax {
                if gcd(q_num, q_den) != 1 && !(q_num == 0 && q_den == 1) {
                    continue;
                }
                let qv = q_num as f64 / q_den as f64;
                let target = reduce(rho - qv * omega);
                for r_den in 1..=d {
                    if q_den.max(r_den) != d {
                        continue;
                    }
                    let r_num = (target * r_den as f64).round() as i64;
                    if circle_dist(target, r_num as f64 / r_den as f64) <= tol {
                        let g = gcd(r_num, r_den).max(1);
                        let w = ModuleWitness {
                            r_num: (r_num / g).rem_euclid(r_den / g),
                            r_den: r_den / g,
                            q_num,
                            q_den,
                        };
                        let key = q_num.abs();
                        if best.map_or(true, |(k, _)| key < k) {
                            best = Some((key, w));
                        }
                    }
                }
            }
        }
        if let Some((_, w)) = best {
            return Some(w);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::{golden_mean, DiophantineSpec};
    use crate::maps::Fibre;

    fn arnold(alpha: f64) -> QpfFamily {
        QpfFamily::new(DiophantineSpec::golden(), Fibre::UnforcedArnold { alpha }, None).unwrap()
    }

    #[test]
    fn rigid_rotation_number() {
        let e = estimate_rotation_number(&arnold(0.0).at(0.3), &EstimatorParams::default()).unwrap();
        assert!((e.rho - 0.3).abs() <= 1.0 / e.n_iter as f64);
        assert!(e.spread <= e.error_bound);
    }

    #[test]
    fn locked_at_fixed_point() {
        let e = estimate_rotation_number(&arnold(0.5).at(0.0), &EstimatorParams::default()).unwrap();
        assert!(circle_dist(e.rho, 0.0) < 1e-3);
    }

    #[test]
    fn identity_staircase_has_no_plateaus() {
        let grid = TauGrid {
            start: 0.0,
            end: 0.999,
            points: 1000,
        };
        let p = EstimatorParams {
            n_iter: 1000,
            burn_in: 0,
            n_starts: 1,
            seed: 3,
        };
        let st = sweep_staircase(&arnold(0.0), &grid, &p).unwrap();
        for (t, e) in st.tau.iter().zip(&st.estimates) {
            assert!((e.rho_unwrapped - t).abs() < 1e-9);
        }
        assert!(detect_plateaus(&st, 1e-6).is_empty());
        assert!(st.monotonicity_violations().is_empty());
    }

    #[test]
    fn constant_staircase_is_one_plateau() {
        let est = RotationEstimate {
            rho: 0.2,
            rho_unwrapped: 0.2,
            n_iter: 1000,
            spread: 0.0,
            error_bound: 0.002,
        };
        let st = Staircase {
            tau: (0..10).map(|i| i as f64 * 0.1).collect(),
            estimates: vec![est; 10],
        };
        let pl = detect_plateaus(&st, 1e-6);
        assert_eq!(pl.len(), 1);
        assert_eq!((pl[0].first_index, pl[0].last_index), (0, 9));
    }

    #[test]
    fn unwrapped_branch_gains_one_over_a_period() {
        let grid = TauGrid {
            start: 0.0,
            end: 1.0,
            points: 101,
        };
        let p = EstimatorParams {
            n_iter: 2000,
            burn_in: 200,
            n_starts: 1,
            seed: 9,
        };
        let st = sweep_staircase(&arnold(0.8), &grid, &p).unwrap();
        let gain = st.estimates[100].rho_unwrapped - st.estimates[0].rho_unwrapped;
        assert!((gain - 1.0).abs() < 1e-3);
    }

    #[test]
    fn membership_examples() {
        let w = golden_mean();
        assert_eq!(
            module_membership(0.0, w, 5, 1e-12),
            Some(ModuleWitness { r_num: 0, r_den: 1, q_num: 0, q_den: 1 })
        );
        let m = module_membership(reduce(3.0 * w), w, 5, 1e-10).unwrap();
        assert_eq!((m.q_num, m.q_den, m.r_num), (3, 1, 0));
        let m = module_membership(reduce(w / 2.0 + 1.0 / 3.0), w, 6, 1e-10).unwrap();
        assert_eq!((m.r_num, m.r_den, m.q_num, m.q_den), (1, 3, 1, 2));
    }

    #[test]
    fn refinement_disabled_without_monotonicity() {
        let h = QpfFamily::new(DiophantineSpec::golden(), Fibre::Harper { lambda: 0.5 }, None).unwrap();
        let pl = Plateau {
            interval: CircleInterval::new(0.0, 0.1).unwrap(),
            tau_left: 0.0,
            tau_right: 0.1,
            rho_locked: 0.0,
            rho_unwrapped: 0.0,
            edge_tolerance: 0.01,
            flat_tol: 1e-3,
            first_index: 0,
            last_index: 10,
        };
        let r = refine_plateau_edge(&h, &pl, Side::Right, 1e-4, &EstimatorParams::default());
        assert!(matches!(r, Err(Error::RefinementDisabled(_))));
    }
}
