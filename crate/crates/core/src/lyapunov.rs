//! Vertical Lyapunov exponents, pullback graphs and the attractor tests built
//! on them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle::{centered, circle_dist, reduce, rotate};
use crate::error::{Error, Result};
use crate::maps::QpfMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub lambda: f64,
    pub n_iter: u64,
    pub direction: Direction,
}

/// Mean of `log ∂ₓf` along the forward orbit, or of `log ∂ₓ(f⁻¹)` along the
/// exact backward orbit.
pub fn finite_time_lyapunov(map: &QpfMap, theta0: f64, x0: f64, n: u64, direction: Direction) -> Result<LyapunovEstimate> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let w = map.omega();
    let theta0 = reduce(theta0);
    let mut x = reduce(x0);
    let mut sum = 0.0;
    for k in 0..n as i64 {
        match direction {
            Direction::Forward => {
                let th = rotate(theta0, w, k);
                sum += map.d_x(th, x).ln();
                x = reduce(map.eval_lift(th, x));
            }
            Direction::Backward => {
                let th = rotate(theta0, w, -(k + 1));
                let xp = reduce(map.inverse_lift(th, x)?);
                sum -= map.d_x(th, xp).ln();
                x = xp;
            }
        }
    }
    Ok(LyapunovEstimate {
        lambda: sum / n as f64,
        n_iter: n,
        direction,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledGraph {
    pub theta_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub converged: bool,
    /// largest circle distance between values at adjacent grid points
    pub oscillation: f64,
    pub n_pullback: u64,
    /// sup distance between the n- and 2n-step pullbacks
    pub doubling_change: f64,
}

impl SampledGraph {
    /// Linear interpolation on the circle between neighbouring samples.
    pub fn interpolate(&self, theta: f64) -> f64 {
        let n = self.theta_grid.len();
        let pos = reduce(theta) * n as f64;
        let i = (pos.floor() as usize).min(n - 1);
        let t = pos - i as f64;
        let a = self.values[i];
        let b = self.values[(i + 1) % n];
        reduce(a + t * centered(b - a))
    }

    /// `∫ log ∂ₓf_θ(φ(θ)) dθ` by the grid mean.
    pub fn lyapunov(&self, map: &QpfMap) -> f64 {
        let s: f64 = self
            .theta_grid
            .iter()
            .zip(&self.values)
            .map(|(&t, &v)| map.d_x(t, v).ln())
            .sum();
        s / self.theta_grid.len() as f64
    }
}

fn oscillation(values: &[f64]) -> f64 {
    let n = values.len();
    (0..n)
        .map(|i| circle_dist(values[i], values[(i + 1) % n]))
        .fold(0.0, f64::max)
}

fn pullback_values(map: &QpfMap, n: u64, grid: &[f64], x_init: f64) -> Result<Vec<f64>> {
    let w = map.omega();
    grid.par_iter()
        .map(|&t| {
            let start = rotate(t, w, -(n as i64));
            Ok(map.iterate(start, x_init, n as i64, false)?.x)
        })
        .collect()
}

/// `θ ↦ f^n_{θ−nω}(x_init)` on a uniform grid; converged when the `2n`-step
/// pullback differs by less than 1e−9 in sup norm. The returned values are
/// the `2n`-step ones.
pub fn pullback_graph(map: &QpfMap, n_pullback: u64, grid_size: usize, x_init: f64) -> Result<SampledGraph> {
    if n_pullback == 0 || grid_size < 16 {
        return Err(Error::InvalidParameter("need n_pullback >= 1 and grid_size >= 16".into()));
    }
    let grid: Vec<f64> = (0..grid_size).map(|i| i as f64 / grid_size as f64).collect();
    let a = pullback_values(map, n_pullback, &grid, x_init)?;
    let b = pullback_values(map, 2 * n_pullback, &grid, x_init)?;
    let change = a
        .iter()
        .zip(&b)
        .map(|(&u, &v)| circle_dist(u, v))
        .fold(0.0, f64::max);
    Ok(SampledGraph {
        oscillation: oscillation(&b),
        theta_grid: grid,
        values: b,
        converged: change < 1e-9,
        n_pullback,
        doubling_change: change,
    })
}

/// `max_θ d(f_θ(φ(θ)), φ(θ+ω))` with `φ(θ+ω)` interpolated.
pub fn invariance_defect(map: &QpfMap, g: &SampledGraph) -> f64 {
    let w = map.omega();
    g.theta_grid
        .iter()
        .zip(&g.values)
        .map(|(&t, &v)| circle_dist(map.eval_fibre(t, v), g.interpolate(t + w)))
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SnaVerdict {
    Smooth,
    SuspectedSna,
    NotConverged,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SnaThresholds {
    pub levels: usize,
    /// required decrease of the oscillation per dyadic refinement
    pub decay_factor: f64,
    /// tolerated shortfall on `decay_factor` caused by grid placement
    pub decay_slack: f64,
}

impl Default for SnaThresholds {
    fn default() -> Self {
        SnaThresholds {
            levels: 3,
            decay_factor: 2.0,
            decay_slack: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnaReport {
    pub grid_sizes: Vec<usize>,
    pub oscillations: Vec<f64>,
    pub lambda: f64,
    pub thresholds: SnaThresholds,
    pub verdict: SnaVerdict,
}

/// Recomputes the pullback on dyadically refined grids and watches the
/// oscillation: a continuous graph loses half of it per refinement.
pub fn sna_indicator(map: &QpfMap, g: &SampledGraph, thresholds: &SnaThresholds, x_init: f64) -> Result<SnaReport> {
    let mut grid_sizes = vec![g.theta_grid.len()];
    let mut oscillations = vec![g.oscillation];
    let lambda = g.lyapunov(map);
    let mut all_converged = g.converged;
    let mut size = g.theta_grid.len();
    for _ in 0..thresholds.levels {
        size *= 2;
        let r = pullback_graph(map, g.n_pullback, size, x_init)?;
        all_converged &= r.converged;
        grid_sizes.push(size);
        oscillations.push(r.oscillation);
    }
    let needed = thresholds.decay_factor * (1.0 - thresholds.decay_slack);
    let decays = oscillations
        .windows(2)
        .all(|w| w[0] < 1e-12 || w[1] <= w[0] / needed);
    let verdict = if !all_converged {
        SnaVerdict::NotConverged
    } else if decays {
        SnaVerdict::Smooth
    } else if lambda < 0.0 {
        SnaVerdict::SuspectedSna
    } else {
        SnaVerdict::NotConverged
    };
    Ok(SnaReport {
        grid_sizes,
        oscillations,
        lambda,
        thresholds: *thresholds,
        verdict,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SinkSourceCandidate {
    pub theta0: f64,
    pub x0: f64,
    pub lambda_fwd: f64,
    pub lambda_bwd: f64,
    pub horizon: u64,
}

/// Grid points whose forward and backward exponents both exceed `lambda_min`.
pub fn sink_source_search(
    map: &QpfMap,
    n_theta: usize,
    n_x: usize,
    horizon: u64,
    lambda_min: f64,
) -> Result<Vec<SinkSourceCandidate>> {
    if !(lambda_min > 0.0) || horizon == 0 {
        return Err(Error::InvalidParameter("need lambda_min > 0 and horizon >= 1".into()));
    }
    let points: Vec<(f64, f64)> = (0..n_theta)
        .flat_map(|i| (0..n_x).map(move |j| ((i as f64 + 0.5) / n_theta as f64, (j as f64 + 0.5) / n_x as f64)))
        .collect();
    let found: Vec<Option<SinkSourceCandidate>> = points
        .par_iter()
        .map(|&(t, x)| {
            let f = finite_time_lyapunov(map, t, x, horizon, Direction::Forward)?;
            if f.lambda <= lambda_min {
                return Ok(None);
            }
            let b = finite_time_lyapunov(map, t, x, horizon, Direction::Backward)?;
            Ok((b.lambda > lambda_min).then_some(SinkSourceCandidate {
                theta0: t,
                x0: x,
                lambda_fwd: f.lambda,
                lambda_bwd: b.lambda,
                horizon,
            }))
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<SinkSourceCandidate> = found.into_iter().flatten().collect();
    out.sort_by(|a, b| b.lambda_fwd.min(b.lambda_bwd).total_cmp(&a.lambda_fwd.min(a.lambda_bwd)));
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformAttractorReport {
    pub is_uniform: bool,
    pub lambda: f64,
    pub sup_distance: f64,
    pub converged_inside: bool,
    pub converged_outside: bool,
}

/// Pullbacks of the sections at the midpoints of `C` and of its complement
/// must converge to one graph with negative exponent.
pub fn detect_uniform_attractor(map: &QpfMap, n: u64, grid_size: usize) -> Result<UniformAttractorReport> {
    let k = map.family.constants()?;
    let inside = pullback_graph(map, n, grid_size, k.c.midpoint())?;
    let outside = pullback_graph(map, n, grid_size, k.c_complement().midpoint())?;
    let sup_distance = inside
        .values
        .iter()
        .zip(&outside.values)
        .map(|(&a, &b)| circle_dist(a, b))
        .fold(0.0, f64::max);
    let lambda = inside.lyapunov(map);
    Ok(UniformAttractorReport {
        is_uniform: inside.converged && outside.converged && sup_distance < 1e-7 && lambda < 0.0,
        lambda,
        sup_distance,
        converged_inside: inside.converged,
        converged_outside: outside.converged,
    })
}

/// Fraction of the cells of a `cells × cells` partition of the torus visited
/// by one orbit; a heuristic for minimality.
pub fn orbit_density(map: &QpfMap, theta0: f64, x0: f64, n: u64, cells: usize) -> Result<f64> {
    let mut hit = vec![false; cells * cells];
    let mut t = reduce(theta0);
    let mut x = reduce(x0);
    for _ in 0..n {
        let i = ((t * cells as f64) as usize).min(cells - 1);
        let j = ((x * cells as f64) as usize).min(cells - 1);
        hit[i * cells + j] = true;
        let (nt, nx, _) = map.step(t, x);
        t = nt;
        x = nx;
    }
    Ok(hit.iter().filter(|&&h| h).count() as f64 / hit.len() as f64)
}
