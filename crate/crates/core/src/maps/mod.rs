//! Skew products `(θ, x) ↦ (θ + ω, f_{τ,θ}(x))` over a circle rotation.
//!
//! Every fibre map is handled through its continuous lift `F_{τ,θ}` with
//! `F(x + 1) = F(x) + 1`. Orbits keep the fibre coordinate canonical and count
//! integer wraps separately, so lift displacements stay exact over long runs.

mod expr;
mod profile;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use expr::Expr;
pub use profile::{a_p, adaptive_gk, eval_ap_profile, ApProfile};

use crate::circle::{centered, reduce, rotate, CircleInterval, DiophantineSpec};
use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const FD_STEP: f64 = 1e-6;

/// θ-dependent additive term of a fibre map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Forcing {
    None,
    /// `amplitude · cos(2πθ + phase)`
    Cos { amplitude: f64, phase: f64 },
    /// `arctan(β sin 2πθ)/π`
    ArctanSin { beta: f64 },
    /// `arctan(β(cos 2π(θ−center) − cos 2π·half_width))/π`, a smoothed
    /// indicator of the arc of radius `half_width` around `center`
    ArctanStep { beta: f64, center: f64, half_width: f64 },
}

impl Forcing {
    #[inline]
    pub fn value(&self, theta: f64) -> f64 {
        match *self {
            Forcing::None => 0.0,
            Forcing::Cos { amplitude, phase } => amplitude * (TWO_PI * theta + phase).cos(),
            Forcing::ArctanSin { beta } => (beta * (TWO_PI * theta).sin()).atan() / std::f64::consts::PI,
            Forcing::ArctanStep {
                beta,
                center,
                half_width,
            } => (beta * ((TWO_PI * (theta - center)).cos() - (TWO_PI * half_width).cos())).atan() / std::f64::consts::PI,
        }
    }

    #[inline]
    pub fn derivative(&self, theta: f64) -> f64 {
        match *self {
            Forcing::None => 0.0,
            Forcing::Cos { amplitude, phase } => -TWO_PI * amplitude * (TWO_PI * theta + phase).sin(),
            Forcing::ArctanSin { beta } => {
                let s = (TWO_PI * theta).sin();
                2.0 * beta * (TWO_PI * theta).cos() / (1.0 + beta * beta * s * s)
            }
            Forcing::ArctanStep {
                beta,
                center,
                half_width,
            } => {
                let u = beta * ((TWO_PI * (theta - center)).cos() - (TWO_PI * half_width).cos());
                -2.0 * beta * (TWO_PI * (theta - center)).sin() / (1.0 + u * u)
            }
        }
    }
}

/// Shape of the unforced part of an additive fibre.
#[derive(Clone, Debug)]
pub enum Profile {
    Identity,
    Ap(ApProfile),
}

impl Profile {
    #[inline]
    fn lift(&self, x: f64) -> f64 {
        match self {
            Profile::Identity => x,
            Profile::Ap(a) => a.lift(x),
        }
    }

    #[inline]
    fn derivative(&self, x: f64) -> f64 {
        match self {
            Profile::Identity => 1.0,
            Profile::Ap(a) => a.derivative(x),
        }
    }

    fn inverse_lift(&self, y: f64) -> Option<f64> {
        match self {
            Profile::Identity => Some(y),
            Profile::Ap(a) => a.inverse_lift(y),
        }
    }
}

/// The fibre-map specification of a family.
#[derive(Clone, Debug)]
pub enum Fibre {
    /// `x + τ + (α/2π) sin 2πx`
    UnforcedArnold { alpha: f64 },
    /// `h(x) + τ + V(θ)`
    Additive { profile: Profile, forcing: Forcing },
    /// `x + τ + (α/2π) sin 2πx + arctan(β sin 2πθ)/π`
    ForcedArnold { alpha: f64, beta: f64 },
    /// projective action of the Schrödinger cocycle with energy τ
    Harper { lambda: f64 },
    /// lift given as an expression in `x`, `theta`, `tau`
    UserDefined { source: String, expr: Arc<Expr> },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Derivatives {
    pub d_x: f64,
    pub d_theta: f64,
    pub d_tau: f64,
    /// set when obtained by finite differences
    pub approximate: bool,
}

impl Fibre {
    pub fn user_defined(source: &str) -> Result<Fibre> {
        Ok(Fibre::UserDefined {
            source: source.to_string(),
            expr: Arc::new(Expr::parse(source)?),
        })
    }

    #[inline]
    pub fn lift(&self, tau: f64, theta: f64, x: f64) -> f64 {
        match self {
            Fibre::UnforcedArnold { alpha } => x + tau + alpha / TWO_PI * (TWO_PI * x).sin(),
            Fibre::Additive { profile, forcing } => profile.lift(x) + tau + forcing.value(theta),
            Fibre::ForcedArnold { alpha, beta } => {
                x + tau
                    + alpha / TWO_PI * (TWO_PI * x).sin()
                    + Forcing::ArctanSin { beta: *beta }.value(theta)
            }
            Fibre::Harper { lambda } => {
                let k = x.round();
                let t = (std::f64::consts::PI * (x - k)).tan();
                let c = tau - lambda * (TWO_PI * theta).cos();
                k + 0.5 + (t - c).atan() / std::f64::consts::PI
            }
            Fibre::UserDefined { expr, .. } => expr.eval(x, theta, tau),
        }
    }

    pub fn derivatives(&self, tau: f64, theta: f64, x: f64) -> Derivatives {
        let exact = |d_x, d_theta, d_tau| Derivatives {
            d_x,
            d_theta,
            d_tau,
            approximate: false,
        };
        match self {
            Fibre::UnforcedArnold { alpha } => exact(1.0 + alpha * (TWO_PI * x).cos(), 0.0, 1.0),
            Fibre::Additive { profile, forcing } => {
                exact(profile.derivative(x), forcing.derivative(theta), 1.0)
            }
            Fibre::ForcedArnold { alpha, beta } => exact(
                1.0 + alpha * (TWO_PI * x).cos(),
                Forcing::ArctanSin { beta: *beta }.derivative(theta),
                1.0,
            ),
            Fibre::Harper { lambda } => {
                let k = x.round();
                let t = (std::f64::consts::PI * (x - k)).tan();
                let c = tau - lambda * (TWO_PI * theta).cos();
                let q = 1.0 + (t - c) * (t - c);
                exact(
                    (1.0 + t * t) / q,
                    -2.0 * lambda * (TWO_PI * theta).sin() / q,
                    -1.0 / (std::f64::consts::PI * q),
                )
            }
            Fibre::UserDefined { expr, .. } => {
                let h = FD_STEP;
                let cd = |f: &dyn Fn(f64) -> f64, v: f64| (f(v + h) - f(v - h)) / (2.0 * h);
                Derivatives {
                    d_x: cd(&|v| expr.eval(v, theta, tau), x),
                    d_theta: cd(&|v| expr.eval(x, v, tau), theta),
                    d_tau: cd(&|v| expr.eval(x, theta, v), tau),
                    approximate: true,
                }
            }
        }
    }

    #[inline]
    pub fn d_x(&self, tau: f64, theta: f64, x: f64) -> f64 {
        match self {
            Fibre::UnforcedArnold { alpha } | Fibre::ForcedArnold { alpha, .. } => {
                1.0 + alpha * (TWO_PI * x).cos()
            }
            Fibre::Additive { profile, .. } => profile.derivative(x),
            _ => self.derivatives(tau, theta, x).d_x,
        }
    }

    fn closed_inverse(&self, tau: f64, theta: f64, y: f64) -> Option<f64> {
        match self {
            Fibre::Additive { profile, forcing } => {
                profile.inverse_lift(y - tau - forcing.value(theta))
            }
            Fibre::Harper { lambda } => {
                let k = y.floor();
                let c = tau - lambda * (TWO_PI * theta).cos();
                let t = c + (std::f64::consts::PI * (y - k - 0.5)).tan();
                Some(k + t.atan() / std::f64::consts::PI)
            }
            _ => None,
        }
    }

    /// Solve `F(x) = y` on the lift.
    pub fn inverse_lift(&self, tau: f64, theta: f64, y: f64) -> Result<f64> {
        if let Some(x) = self.closed_inverse(tau, theta, y) {
            if x.is_finite() {
                return Ok(x);
            }
        }
        self.solve_lift(tau, theta, y)
    }

    /// Safeguarded Newton with bisection fallback on the bracket
    /// `[a − 1, a + 1]`, `a = y − (F(y) − y)`, which always contains the root
    /// because `F(x) − x` oscillates by less than one.
    fn solve_lift(&self, tau: f64, theta: f64, y: f64) -> Result<f64> {
        let a = y - (self.lift(tau, theta, y) - y);
        let fa = self.lift(tau, theta, a) - y;
        if fa == 0.0 {
            return Ok(a);
        }
        let (mut lo, mut hi) = if fa > 0.0 { (a - 1.0, a) } else { (a, a + 1.0) };
        let mut x = a;
        let mut fx = fa;
        for _ in 0..200 {
            let d = self.derivatives(tau, theta, x).d_x;
            let mut next = if d > 0.0 && d.is_finite() { x - fx / d } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let fn_ = self.lift(tau, theta, next) - y;
            if !fn_.is_finite() {
                break;
            }
            if fn_ > 0.0 {
                hi = next;
            } else {
                lo = next;
            }
            // Newton that barely moves the residual: force a bisection step
            if fn_.abs() > 0.5 * fx.abs() {
                let mid = 0.5 * (lo + hi);
                let fm = self.lift(tau, theta, mid) - y;
                if fm > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
                x = mid;
                fx = fm;
            } else {
                x = next;
                fx = fn_;
            }
            let ulp = f64::EPSILON * x.abs().max(1.0);
            if fx.abs() <= 1e-15 || hi - lo <= 4.0 * ulp {
                return Ok(x);
            }
        }
        Err(Error::InverseNotConverged { theta, y })
    }
}

/// Bounds and the expanding/contracting arcs a family is assumed to satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyConstants {
    pub alpha: f64,
    pub p: f64,
    #[serde(rename = "S")]
    pub big_s: f64,
    #[serde(rename = "s")]
    pub small_s: f64,
    pub ell: f64,
    #[serde(rename = "L")]
    pub big_l: f64,
    #[serde(rename = "E")]
    pub e: CircleInterval,
    #[serde(rename = "C")]
    pub c: CircleInterval,
}

impl FamilyConstants {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if !(self.alpha > 1.0) {
            return bad("alpha must exceed 1");
        }
        if !(self.p >= 2.0) {
            return bad("p must be at least 2");
        }
        if !(self.small_s > 0.0 && self.small_s < self.big_s) {
            return bad("need 0 < s < S");
        }
        if !(self.ell > 0.0 && self.ell < self.big_l) {
            return bad("need 0 < ell < L");
        }
        if self.e.length() <= 0.0 || self.c.length() <= 0.0 {
            return bad("E and C must be non-empty");
        }
        if crate::circle::interval_dist(&self.e, &self.c) <= 0.0 {
            return bad("E and C must be disjoint");
        }
        Ok(())
    }

    /// The complement of `C`, as a closed arc.
    pub fn c_complement(&self) -> CircleInterval {
        CircleInterval::new(self.c.right(), 1.0 - self.c.length()).expect("valid arc")
    }

    /// The complement of `E`, as a closed arc.
    pub fn e_complement(&self) -> CircleInterval {
        CircleInterval::new(self.e.right(), 1.0 - self.e.length()).expect("valid arc")
    }
}

/// A one-parameter family `τ ↦ f_τ`.
#[derive(Clone, Debug)]
pub struct QpfFamily {
    pub omega: DiophantineSpec,
    pub fibre: Arc<Fibre>,
    pub constants: Option<FamilyConstants>,
    /// whether ∂_τ f stayed inside (ℓ, L) (or merely positive when no
    /// constants are given) on the construction grid
    pub monotone_in_tau: bool,
}

impl QpfFamily {
    /// Builds the family and spot-checks orientation, degree one and
    /// τ-monotonicity on a 64 × 64 grid.
    pub fn new(omega: DiophantineSpec, fibre: Fibre, constants: Option<FamilyConstants>) -> Result<Self> {
        if let Some(c) = &constants {
            c.validate()?;
        }
        let mut monotone = true;
        let n = 64;
        for &tau in &[0.0, 0.25, 0.5, 0.75] {
            for i in 0..n {
                let theta = (i as f64 + 0.5) / n as f64;
                for j in 0..n {
                    let x = (j as f64 + 0.37) / n as f64;
                    let d = fibre.derivatives(tau, theta, x);
                    if !(d.d_x > 0.0) {
                        return Err(Error::Structure(format!(
                            "fibre not increasing at theta={theta}, x={x} (d_x = {})",
                            d.d_x
                        )));
                    }
                    let step = fibre.lift(tau, theta, x + 1.0) - fibre.lift(tau, theta, x);
                    if (step - 1.0).abs() > 1e-9 {
                        return Err(Error::Structure(format!(
                            "lift is not degree one at theta={theta}, x={x}"
                        )));
                    }
                    let ok = match &constants {
                        Some(c) => d.d_tau > c.ell && d.d_tau < c.big_l,
                        None => d.d_tau > 0.0,
                    };
                    monotone &= ok;
                }
            }
        }
        Ok(QpfFamily {
            omega,
            fibre: Arc::new(fibre),
            constants,
            monotone_in_tau: monotone,
        })
    }

    pub fn at(&self, tau: f64) -> QpfMap {
        QpfMap {
            family: self.clone(),
            tau,
        }
    }

    pub fn constants(&self) -> Result<&FamilyConstants> {
        self.constants
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("family constants (E, C, S, s, ...) not set".into()))
    }
}

/// Result of iterating one orbit.
#[derive(Clone, Debug, PartialEq)]
pub struct Orbit {
    pub theta: f64,
    pub x: f64,
    /// `F^n(x̃₀) − x̃₀`
    pub displacement: f64,
    /// `(θ_k, x_k)` for k = 0..=|n| when requested
    pub points: Option<Vec<(f64, f64)>>,
}

/// A single map `f_τ` of a family.
#[derive(Clone, Debug)]
pub struct QpfMap {
    pub family: QpfFamily,
    /// parameter value as a real number; the lift depends on the representative
    pub tau: f64,
}

impl QpfMap {
    #[inline]
    pub fn omega(&self) -> f64 {
        self.family.omega.omega
    }

    #[inline]
    pub fn eval_lift(&self, theta: f64, x_lift: f64) -> f64 {
        self.family.fibre.lift(self.tau, theta, x_lift)
    }

    pub fn eval_fibre(&self, theta: f64, x: f64) -> f64 {
        reduce(self.eval_lift(theta, reduce(x)))
    }

    pub fn inverse_lift(&self, theta: f64, y_lift: f64) -> Result<f64> {
        self.family.fibre.inverse_lift(self.tau, theta, y_lift)
    }

    /// `x` with `f_θ(x) = y`.
    pub fn eval_inverse_fibre(&self, theta: f64, y: f64) -> Result<f64> {
        Ok(reduce(self.inverse_lift(theta, reduce(y))?))
    }

    pub fn fibre_derivatives(&self, theta: f64, x: f64) -> Derivatives {
        self.family.fibre.derivatives(self.tau, theta, x)
    }

    #[inline]
    pub fn d_x(&self, theta: f64, x: f64) -> f64 {
        self.family.fibre.d_x(self.tau, theta, x)
    }

    /// One forward step on canonical coordinates; returns `(θ', x', wraps)`.
    #[inline]
    pub fn step(&self, theta: f64, x: f64) -> (f64, f64, f64) {
        let y = self.eval_lift(theta, x);
        let k = y.floor();
        let mut xr = y - k;
        let mut kk = k;
        if xr >= 1.0 {
            xr = 0.0;
            kk += 1.0;
        }
        (reduce(theta + self.omega()), xr, kk)
    }

    /// One backward step: `(θ − ω, f_{θ−ω}^{-1}(x), wraps)`.
    #[inline]
    pub fn step_back(&self, theta: f64, x: f64) -> Result<(f64, f64, f64)> {
        let prev = reduce(theta - self.omega());
        let y = self.inverse_lift(prev, x)?;
        let k = y.floor();
        let mut xr = y - k;
        let mut kk = k;
        if xr >= 1.0 {
            xr = 0.0;
            kk += 1.0;
        }
        Ok((prev, xr, kk))
    }

    /// `(θ₀ + nω, f^n_{θ₀}(x₀))` with the lift displacement.
    pub fn iterate(&self, theta0: f64, x0: f64, n: i64, record: bool) -> Result<Orbit> {
        let theta0 = reduce(theta0);
        let x0 = reduce(x0);
        let mut x = x0;
        let mut wraps = 0.0;
        let mut points = record.then(|| {
            let mut v = Vec::with_capacity(n.unsigned_abs() as usize + 1);
            v.push((theta0, x0));
            v
        });
        let w = self.omega();
        let steps = n.unsigned_abs() as i64;
        for k in 0..steps {
            let (th, xn, kk) = if n > 0 {
                let theta = rotate(theta0, w, k);
                let y = self.eval_lift(theta, x);
                (rotate(theta0, w, k + 1), y - y.floor(), y.floor())
            } else {
                let prev = rotate(theta0, w, -(k + 1));
                let y = self.inverse_lift(prev, x)?;
                (prev, y - y.floor(), y.floor())
            };
            let (xn, kk) = if xn >= 1.0 { (0.0, kk + 1.0) } else { (xn, kk) };
            x = xn;
            wraps += kk;
            if let Some(p) = points.as_mut() {
                p.push((th, x));
            }
        }
        Ok(Orbit {
            theta: rotate(theta0, w, n),
            x,
            displacement: wraps + (x - x0),
            points,
        })
    }

    /// Lift value `F^n_{θ₀}(x̃)` for an unwrapped start, tracked exactly.
    pub fn iterate_lift(&self, theta0: f64, x_lift: f64, n: i64) -> Result<f64> {
        let base = x_lift.floor();
        let o = self.iterate(theta0, x_lift - base, n, false)?;
        Ok(x_lift + o.displacement)
    }

    /// Image of the fibre arc `{θ}×J` under `f^n`, by iterating endpoints.
    pub fn fibre_interval_image(&self, theta: f64, j: &CircleInterval, n: i64) -> Result<(f64, CircleInterval)> {
        if j.is_full() {
            return Err(Error::FibreWrap);
        }
        let (lo, hi) = self.iterate_arc(theta, j.left(), j.length(), n)?;
        let len = hi - lo;
        if !(len < 1.0) {
            return Err(Error::FibreWrap);
        }
        Ok((rotate(theta, self.omega(), n), CircleInterval::new(lo, len.max(0.0))?))
    }

    /// Iterates the arc `[left, left + len]` and returns its image endpoints
    /// as lift values (the lower one reduced to [0, 1)).
    pub fn iterate_arc(&self, theta: f64, left: f64, len: f64, n: i64) -> Result<(f64, f64)> {
        let w = self.omega();
        let mut lo = reduce(left);
        let mut hi = lo + len;
        let steps = n.unsigned_abs() as i64;
        for k in 0..steps {
            if n > 0 {
                let th = rotate(theta, w, k);
                let a = self.eval_lift(th, lo);
                let b = self.eval_lift(th, hi);
                let f = a.floor();
                lo = a - f;
                hi = b - f;
            } else {
                let th = rotate(theta, w, -(k + 1));
                let a = self.inverse_lift(th, lo)?;
                let b = self.inverse_lift(th, hi)?;
                let f = a.floor();
                lo = a - f;
                hi = b - f;
            }
        }
        Ok((lo, hi))
    }

    /// Derivative of `x ↦ f^n_{θ}(x)` and of `θ ↦ f^n_θ(φ(θ))` along one orbit,
    /// given the slope `dphi` of the starting curve.
    pub fn orbit_slopes(&self, theta: f64, x: f64, n: i64, dphi: f64) -> Result<(f64, f64, f64)> {
        let w = self.omega();
        let mut x = reduce(x);
        let mut dx = 1.0;
        let mut dth = dphi;
        let steps = n.unsigned_abs() as i64;
        for k in 0..steps {
            if n > 0 {
                let th = rotate(theta, w, k);
                let d = self.fibre_derivatives(th, x);
                dth = d.d_theta + d.d_x * dth;
                dx *= d.d_x;
                x = reduce(self.eval_lift(th, x));
            } else {
                let th = rotate(theta, w, -(k + 1));
                let xp = reduce(self.inverse_lift(th, x)?);
                let d = self.fibre_derivatives(th, xp);
                dth = (dth - d.d_theta) / d.d_x;
                dx /= d.d_x;
                x = xp;
            }
        }
        Ok((x, dx, dth))
    }
}

/// Signed distance from a circle point to an arc endpoint, in the arc's frame.
pub fn arc_offset(arc: &CircleInterval, x: f64) -> f64 {
    centered(x - arc.left())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::circle_dist;

    fn fam(f: Fibre) -> QpfFamily {
        QpfFamily::new(DiophantineSpec::golden(), f, None).unwrap()
    }

    fn rigid() -> QpfFamily {
        fam(Fibre::Additive {
            profile: Profile::Identity,
            forcing: Forcing::None,
        })
    }

    #[test]
    fn eval_examples() {
        let a = fam(Fibre::UnforcedArnold { alpha: 1.0 }).at(0.0);
        let want = 0.25 + 1.0 / TWO_PI;
        assert!((a.eval_fibre(0.3, 0.25) - want).abs() < 1e-15);
        assert!((want - 0.4091549).abs() < 1e-7);
        let r = rigid().at(0.3);
        assert!((r.eval_fibre(0.0, 0.5) - 0.8).abs() < 1e-15);
        let a0 = fam(Fibre::UnforcedArnold { alpha: 0.0 }).at(0.3);
        assert!((a0.eval_lift(0.1, 2.5) - 2.8).abs() < 1e-15);
    }

    #[test]
    fn inverse_examples() {
        let r = rigid().at(0.3);
        assert!((r.eval_inverse_fibre(0.0, 0.8).unwrap() - 0.5).abs() < 1e-15);
        let a = fam(Fibre::UnforcedArnold { alpha: 0.5 }).at(0.0);
        let y = a.eval_fibre(0.0, 0.2);
        assert!(circle_dist(a.eval_inverse_fibre(0.0, y).unwrap(), 0.2) < 1e-14);
    }

    #[test]
    fn derivative_examples() {
        let a = fam(Fibre::UnforcedArnold { alpha: 0.5 }).at(0.1);
        assert!((a.fibre_derivatives(0.2, 0.0).d_x - 1.5).abs() < 1e-15);
        let ad = fam(Fibre::Additive {
            profile: Profile::Ap(ApProfile::new(2.0, 100.0).unwrap()),
            forcing: Forcing::Cos { amplitude: 1.0, phase: 0.0 },
        })
        .at(0.4);
        assert_eq!(ad.fibre_derivatives(0.3, 0.7).d_tau, 1.0);
    }

    #[test]
    fn iterate_examples() {
        let r = rigid().at(0.1);
        let o = r.iterate(0.3, 0.2, 10, false).unwrap();
        assert!((o.displacement - 1.0).abs() < 1e-12);
        let o0 = r.iterate(0.3, 0.2, 0, false).unwrap();
        assert_eq!((o0.theta, o0.x, o0.displacement), (0.3, 0.2, 0.0));
        let img = r
            .fibre_interval_image(0.0, &CircleInterval::from_endpoints(0.2, 0.3).unwrap(), 5)
            .unwrap()
            .1;
        assert!((img.left() - 0.7).abs() < 1e-12 && (img.length() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn harper_lift_is_consistent() {
        let h = fam(Fibre::Harper { lambda: 0.8 });
        let m = h.at(0.4);
        for i in 0..50 {
            let th = i as f64 * 0.137 % 1.0;
            let x = (i as f64 * 0.311 + 0.05) % 1.0;
            let t = (std::f64::consts::PI * x).tan();
            let c = 0.4 - 0.8 * (TWO_PI * th).cos();
            let direct = reduce((-1.0 / (t - c)).atan() / std::f64::consts::PI);
            assert!(circle_dist(m.eval_fibre(th, x), direct) < 1e-12);
            let y = m.eval_fibre(th, x);
            assert!(circle_dist(m.eval_inverse_fibre(th, y).unwrap(), x) < 1e-11);
        }
        assert!(!h.monotone_in_tau);
    }

    #[test]
    fn user_defined_matches_builtin() {
        let u = fam(Fibre::user_defined("x + tau + 0.3/(2*pi)*sin(2*pi*x) + 0.1*cos(2*pi*theta)").unwrap());
        let b = fam(Fibre::Additive {
            profile: Profile::Identity,
            forcing: Forcing::Cos { amplitude: 0.1, phase: 0.0 },
        });
        let um = u.at(0.2);
        let d = um.fibre_derivatives(0.3, 0.6);
        assert!(d.approximate);
        let want = 1.0 + 0.3 * (TWO_PI * 0.6).cos();
        assert!((d.d_x - want).abs() < 1e-6 * want.abs());
        let y = um.eval_fibre(0.3, 0.6);
        assert!(circle_dist(um.eval_inverse_fibre(0.3, y).unwrap(), 0.6) < 1e-12);
        assert!(b.monotone_in_tau && u.monotone_in_tau);
    }

    #[test]
    fn non_monotone_user_fibre_is_rejected() {
        let r = QpfFamily::new(
            DiophantineSpec::golden(),
            Fibre::user_defined("x + 0.5*sin(2*pi*x)").unwrap(),
            None,
        );
        assert!(matches!(r, Err(Error::Structure(_))));
    }
}
