//! The odd, strictly increasing profile `a_p(z) = ∫₀ᶻ dξ / (1 + |ξ|^p)` and the
//! degree-one circle map built from it.

use crate::error::{Error, Result};

/// `a_p(z)`: `atan` for `p = 2`, adaptive Gauss–Kronrod otherwise.
pub fn a_p(p: f64, z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::NonFinite(z));
    }
    if p == 2.0 {
        return Ok(z.atan());
    }
    let sign = z.signum();
    let z = z.abs();
    let g = |t: f64| 1.0 / (1.0 + t.powf(p));
    let value = if z <= 1.0 {
        adaptive_gk(&g, 0.0, z, 1e-13)?
    } else {
        // ξ = 1/t maps [1, z] onto [1/z, 1] where the integrand is bounded
        let head = adaptive_gk(&g, 0.0, 1.0, 1e-13)?;
        let tail = adaptive_gk(&|t: f64| t.powf(p - 2.0) / (t.powf(p) + 1.0), 1.0 / z, 1.0, 1e-13)?;
        head + tail
    };
    Ok(sign * value)
}

/// G7/K15 nodes on [−1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

pub fn adaptive_gk(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut stack = vec![(a, b, tol)];
    let mut total = 0.0;
    let mut evaluations = 0usize;
    while let Some((lo, hi, t)) = stack.pop() {
        let (v, err) = gk15(f, lo, hi);
        evaluations += 1;
        if !v.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand on [{lo}, {hi}]")));
        }
        if err <= t || (hi - lo).abs() < 1e-14 {
            total += v;
        } else if evaluations > 20_000 {
            return Err(Error::Quadrature("subdivision limit reached".into()));
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, 0.5 * t));
            stack.push((mid, hi, 0.5 * t));
        }
    }
    Ok(total)
}

/// `h_α(x) = π(a_p(α ι(x)) / (2 a_p(α/2)))` for a canonical `x`, where ι lifts
/// `x` to [−1/2, 1/2) and π projects back to the circle.
pub fn eval_ap_profile(p: f64, alpha: f64, x: f64) -> Result<f64> {
    if p < 2.0 || alpha < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "profile needs p >= 2 and alpha >= 1, got p={p}, alpha={alpha}"
        )));
    }
    let iota = crate::circle::centered(x);
    let v = a_p(p, alpha * iota)? / (2.0 * a_p(p, alpha / 2.0)?);
    Ok(crate::circle::reduce(v))
}

/// Lift of the profile map with cached normalisation.
#[derive(Clone, Debug)]
pub struct ApProfile {
    pub p: f64,
    pub alpha: f64,
    norm: f64,
}

impl ApProfile {
    pub fn new(p: f64, alpha: f64) -> Result<Self> {
        if p < 2.0 || alpha < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "profile needs p >= 2 and alpha >= 1, got p={p}, alpha={alpha}"
            )));
        }
        Ok(ApProfile {
            p,
            alpha,
            norm: 2.0 * a_p(p, alpha / 2.0)?,
        })
    }

    /// Continuous lift: `k + a_p(α(x−k))/(2a_p(α/2))` with `k = round(x)`.
    pub fn lift(&self, x: f64) -> f64 {
        let k = x.round();
        let u = x - k;
        let a = if self.p == 2.0 {
            (self.alpha * u).atan()
        } else {
            a_p(self.p, self.alpha * u).unwrap_or(f64::NAN)
        };
        k + a / self.norm
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let u = crate::circle::centered(x);
        self.alpha / (1.0 + (self.alpha * u).abs().powf(self.p)) / self.norm
    }

    /// Closed-form inverse lift for `p = 2`.
    pub fn inverse_lift(&self, y: f64) -> Option<f64> {
        if self.p != 2.0 {
            return None;
        }
        let k = y.round();
        let v = (y - k) * self.norm;
        Some(k + v.tan() / self.alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_matches_closed_forms() {
        // p = 2 through the quadrature path: integrate directly
        let g = |t: f64| 1.0 / (1.0 + t * t);
        for z in [0.1f64, 0.7, 1.0, 3.0, 50.0] {
            let head = adaptive_gk(&g, 0.0, z.min(1.0), 1e-13).unwrap();
            let tail = if z > 1.0 {
                adaptive_gk(&|t: f64| 1.0 / (t * t + 1.0), 1.0 / z, 1.0, 1e-13).unwrap()
            } else {
                0.0
            };
            assert!((head + tail - z.atan()).abs() < 1e-12, "z={z}");
        }
        // p = 4 at infinity: π/(4 sin(π/4))
        let inf = a_p(4.0, 1e9).unwrap();
        let want = std::f64::consts::PI / (4.0 * (std::f64::consts::PI / 4.0).sin());
        assert!((inf - want).abs() < 1e-9);
    }

    #[test]
    fn profile_examples() {
        for (p, a) in [(2.0, 10.0), (3.0, 50.0), (2.5, 1.0)] {
            assert_eq!(eval_ap_profile(p, a, 0.0).unwrap(), 0.0);
            let half = eval_ap_profile(p, a, 0.5).unwrap();
            assert!((half - 0.5).abs() < 1e-12);
        }
        let h = eval_ap_profile(2.0, 10.0, 0.05).unwrap();
        let want = 0.5 * 0.5f64.atan() / 5f64.atan();
        assert!((h - want).abs() < 1e-15);
    }

    #[test]
    fn lift_is_continuous_and_invertible() {
        let prof = ApProfile::new(2.0, 1e4).unwrap();
        let l = prof.lift(0.5 - 1e-12);
        let r = prof.lift(0.5 + 1e-12);
        assert!((r - l).abs() < 1e-10);
        for x in [-0.3, 0.0, 0.01, 0.2, 0.49, 1.7] {
            let y = prof.lift(x);
            assert!((prof.inverse_lift(y).unwrap() - x).abs() < 1e-11);
        }
    }
}
