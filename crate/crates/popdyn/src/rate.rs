//! Time-varying scalar rate functions.
//!
//! A closed parametric registry of continuous functions of time. Every form
//! carries an exact analytic derivative and tight interval bounds, which the
//! thinning simulator and the stability analysis rely on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A continuous scalar function of time from a closed parametric family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum RateFunction {
    /// `a`
    Constant { a: f64 },
    /// `a + b*t`
    Linear { a: f64, b: f64 },
    /// `a + b*sin(omega*t + phi)`
    Sinusoid { a: f64, b: f64, omega: f64, phi: f64 },
    /// `a + b*e^{r*t}`
    Exponential { a: f64, b: f64, r: f64 },
    /// Linear interpolation through `(t, value)` knots, constant outside the
    /// table. Knot times must be strictly increasing.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
}

impl RateFunction {
    pub fn constant(a: f64) -> Self {
        RateFunction::Constant { a }
    }

    pub fn linear(a: f64, b: f64) -> Self {
        RateFunction::Linear { a, b }
    }

    pub fn sinusoid(a: f64, b: f64, omega: f64, phi: f64) -> Self {
        RateFunction::Sinusoid { a, b, omega, phi }
    }

    pub fn exponential(a: f64, b: f64, r: f64) -> Self {
        RateFunction::Exponential { a, b, r }
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::Model("piecewise-linear table is empty".into()));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Model(
                "piecewise-linear knot times must be strictly increasing".into(),
            ));
        }
        if knots.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::Model("piecewise-linear knots must be finite".into()));
        }
        Ok(RateFunction::PiecewiseLinear { knots })
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            RateFunction::Constant { a } => *a,
            RateFunction::Linear { a, b } => a + b * t,
            RateFunction::Sinusoid { a, b, omega, phi } => a + b * (omega * t + phi).sin(),
            RateFunction::Exponential { a, b, r } => a + b * (r * t).exp(),
            RateFunction::PiecewiseLinear { knots } => {
                if t <= knots[0].0 {
                    return knots[0].1;
                }
                if t >= knots[knots.len() - 1].0 {
                    return knots[knots.len() - 1].1;
                }
                let i = match knots.binary_search_by(|k| k.0.partial_cmp(&t).unwrap()) {
                    Ok(i) => return knots[i].1,
                    Err(i) => i,
                };
                let (t0, v0) = knots[i - 1];
                let (t1, v1) = knots[i];
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }

    /// Exact analytic derivative. Piecewise-linear tables use the slope of the
    /// active segment, taking the right-derivative at knots and zero outside
    /// the table.
    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            RateFunction::Constant { .. } => 0.0,
            RateFunction::Linear { b, .. } => *b,
            RateFunction::Sinusoid { b, omega, phi, .. } => b * omega * (omega * t + phi).cos(),
            RateFunction::Exponential { b, r, .. } => b * r * (r * t).exp(),
            RateFunction::PiecewiseLinear { knots } => {
                if t < knots[0].0 || t >= knots[knots.len() - 1].0 {
                    return 0.0;
                }
                let i = match knots.binary_search_by(|k| k.0.partial_cmp(&t).unwrap()) {
                    Ok(i) => i + 1,
                    Err(i) => i,
                };
                if i >= knots.len() {
                    return 0.0;
                }
                let (t0, v0) = knots[i - 1];
                let (t1, v1) = knots[i];
                (v1 - v0) / (t1 - t0)
            }
        }
    }

    /// Tight `(min, max)` bounds of the value over `[t0, t1]`, from the
    /// parametric form (endpoints plus interior critical points).
    pub fn bounds_on(&self, t0: f64, t1: f64) -> (f64, f64) {
        debug_assert!(t1 >= t0);
        let mut lo = self.value(t0).min(self.value(t1));
        let mut hi = self.value(t0).max(self.value(t1));
        match self {
            RateFunction::Constant { .. }
            | RateFunction::Linear { .. }
            | RateFunction::Exponential { .. } => {}
            RateFunction::Sinusoid { a, b, omega, phi } => {
                if *omega != 0.0 {
                    // critical points where sin(omega t + phi) = ±1
                    let half_pi = std::f64::consts::FRAC_PI_2;
                    let pi = std::f64::consts::PI;
                    let k0 = ((omega * t0 + phi - half_pi) / pi).ceil() as i64;
                    let k1 = ((omega * t1 + phi - half_pi) / pi).floor() as i64;
                    if k1 >= k0 {
                        // checking two consecutive critical points covers both
                        // parities (sin = +1 and sin = -1)
                        for k in k0..=(k0 + 1).min(k1) {
                            let s = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                            let v = a + b * s;
                            lo = lo.min(v);
                            hi = hi.max(v);
                        }
                    }
                }
            }
            RateFunction::PiecewiseLinear { knots } => {
                for (t, v) in knots {
                    if *t > t0 && *t < t1 {
                        lo = lo.min(*v);
                        hi = hi.max(*v);
                    }
                }
            }
        }
        (lo, hi)
    }

    /// Checks `value(t) > 0` on `[0, horizon]` using the interval bound.
    pub fn check_strictly_positive(&self, horizon: f64) -> Result<()> {
        let (lo, _) = self.bounds_on(0.0, horizon);
        if !(lo > 0.0) {
            return Err(Error::Model(format!(
                "rate function must be strictly positive on [0, {horizon}]; lower bound {lo}"
            )));
        }
        Ok(())
    }

    /// True if the value is finite everywhere on `[t0, t1]`.
    pub fn finite_on(&self, t0: f64, t1: f64) -> bool {
        let (lo, hi) = self.bounds_on(t0, t1);
        lo.is_finite() && hi.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn constant_derivative_is_zero() {
        let r = RateFunction::constant(3.5);
        for t in [0.0, 0.3, 10.0] {
            assert_eq!(r.derivative(t), 0.0);
        }
    }

    #[test]
    fn sinusoid_derivative_at_zero() {
        // d/dt (2 + sin t) = cos t, so 1 at t=0
        let r = RateFunction::sinusoid(2.0, 1.0, 1.0, 0.0);
        assert_relative_eq!(r.derivative(0.0), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn piecewise_linear_segment_slope() {
        let r = RateFunction::piecewise_linear(vec![(0.0, 1.0), (1.0, 3.0)]).unwrap();
        assert_relative_eq!(r.derivative(0.5), 2.0);
        assert_relative_eq!(r.value(0.5), 2.0);
        // right-derivative at the first knot
        assert_relative_eq!(r.derivative(0.0), 2.0);
        // constant extension outside the table
        assert_eq!(r.value(5.0), 3.0);
        assert_eq!(r.derivative(5.0), 0.0);
    }

    #[test]
    fn piecewise_linear_rejects_unsorted() {
        assert!(RateFunction::piecewise_linear(vec![(1.0, 0.0), (0.0, 1.0)]).is_err());
    }

    #[test]
    fn strict_positivity() {
        assert!(RateFunction::constant(0.0).check_strictly_positive(10.0).is_err());
        assert!(RateFunction::sinusoid(2.0, 1.0, 1.0, 0.0)
            .check_strictly_positive(10.0)
            .is_ok());
        // 1 + 1.5 sin t dips below zero
        assert!(RateFunction::sinusoid(1.0, 1.5, 1.0, 0.0)
            .check_strictly_positive(10.0)
            .is_err());
    }

    #[test]
    fn sinusoid_bounds_cover_extrema() {
        let r = RateFunction::sinusoid(2.0, 1.0, 1.0, 0.0);
        let (lo, hi) = r.bounds_on(0.0, 10.0);
        assert_relative_eq!(lo, 1.0);
        assert_relative_eq!(hi, 3.0);
        // window with no critical point: endpoint bounds
        let (lo, hi) = r.bounds_on(0.0, 0.5);
        assert_relative_eq!(lo, 2.0);
        assert_relative_eq!(hi, 2.0 + 0.5f64.sin());
    }

    fn arb_smooth_rate() -> impl Strategy<Value = RateFunction> {
        prop_oneof![
            (-5.0..5.0f64).prop_map(|a| RateFunction::Constant { a }),
            (-5.0..5.0f64, -2.0..2.0f64).prop_map(|(a, b)| RateFunction::Linear { a, b }),
            (-5.0..5.0f64, -2.0..2.0f64, 0.1..3.0f64, -3.0..3.0f64)
                .prop_map(|(a, b, omega, phi)| RateFunction::Sinusoid { a, b, omega, phi }),
            (-5.0..5.0f64, -2.0..2.0f64, -1.0..1.0f64)
                .prop_map(|(a, b, r)| RateFunction::Exponential { a, b, r }),
        ]
    }

    proptest! {
        #[test]
        fn derivative_matches_central_difference(r in arb_smooth_rate(), t in 0.0..20.0f64) {
            let h = 1e-5;
            let fd = (r.value(t + h) - r.value(t - h)) / (2.0 * h);
            let exact = r.derivative(t);
            let scale = 1.0f64.max(exact.abs());
            prop_assert!((fd - exact).abs() <= 1e-6 * scale,
                "fd={fd} exact={exact} at t={t}");
        }

        #[test]
        fn bounds_contain_samples(r in arb_smooth_rate(), t0 in 0.0..10.0f64, dt in 0.01..5.0f64) {
            let (lo, hi) = r.bounds_on(t0, t0 + dt);
            for i in 0..=50 {
                let t = t0 + dt * (i as f64) / 50.0;
                let v = r.value(t);
                prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9);
            }
        }
    }
}
