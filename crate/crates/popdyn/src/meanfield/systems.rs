//! The concrete ODE systems attached to the viral-propagation model: the
//! mean-field pair, its scalar reduction, the finite-n moment-bound system,
//! and a scalar comparison-principle check.

use crate::error::{Error, Result};
use crate::rate::RateFunction;

use super::integrator::{integrate, SampledTrajectory};

/// Right-hand side of the mean-field pair `(X, Y)`:
/// `X' = -lambda X Y + mu Y`, `Y' = lambda X Y - mu Y`.
pub fn sis_pair_field<'a>(
    lambda: &'a RateFunction,
    mu: &'a RateFunction,
) -> impl Fn(f64, &[f64], &mut [f64]) + 'a {
    move |t, s, ds| {
        let flow = lambda.value(t) * s[0] * s[1] - mu.value(t) * s[1];
        ds[0] = -flow;
        ds[1] = flow;
    }
}

/// Scalar susceptible-fraction field `dx/dt = lambda (x - mu/lambda)(x - c)`,
/// expanded as `lambda x^2 - (lambda c + mu) x + mu c`.
pub fn sis_scalar_rhs(lambda: f64, mu: f64, c: f64, x: f64) -> f64 {
    lambda * x * x - (lambda * c + mu) * x + mu * c
}

/// Integrates the infected-fraction limit `Y' = lambda(t)(1-Y)Y - mu(t)Y`.
/// `X(t) = 1 - Y(t)` by conservation.
pub fn sis_limit(
    lambda: &RateFunction,
    mu: &RateFunction,
    y0: f64,
    t_span: (f64, f64),
    tol: f64,
) -> Result<SampledTrajectory> {
    if !(0.0..=1.0).contains(&y0) {
        return Err(Error::Domain(format!("y0 = {y0} outside [0, 1]")));
    }
    integrate(
        |t, y, dy| dy[0] = lambda.value(t) * (1.0 - y[0]) * y[0] - mu.value(t) * y[0],
        &[y0],
        t_span,
        tol,
        tol * 1e-2,
    )
}

/// Joint integration of the infected fraction `Y` with the finite-n moment
/// bounds `z_n`, `w_n` and the limiting second-moment system `v = (v1, v2)`.
///
/// State layout: `[Y, z, w, v1, v2]`.
#[derive(Debug, Clone)]
pub struct MomentBoundSet {
    pub n: u64,
    pub trajectory: SampledTrajectory,
    /// Number of times `w` or `v2` undershot zero by less than the clamp
    /// tolerance and was evaluated as zero.
    pub clamp_events: usize,
}

impl MomentBoundSet {
    pub fn eval(&self, t: f64) -> [f64; 5] {
        let v = self.trajectory.eval(t);
        [v[0], v[1], v[2], v[3], v[4]]
    }

    /// Largest violation of `z_n(t) <= Y(t)` over an evaluation grid.
    pub fn sandwich_violation(&self, points: usize) -> f64 {
        let (t0, t1) = (self.trajectory.start_time(), self.trajectory.end_time());
        let mut worst: f64 = 0.0;
        for i in 0..=points {
            let t = t0 + (t1 - t0) * i as f64 / points as f64;
            let s = self.eval(t);
            worst = worst.max(s[1] - s[0]);
        }
        worst
    }
}

/// 1.5-power evaluated as `w * sqrt(w)`; tiny undershoots of zero (within
/// `clamp_tol`) count as zero, deeper ones poison the integration.
fn pow_three_halves(w: f64, clamp_tol: f64, clamped: &mut usize) -> f64 {
    if w >= 0.0 {
        w * w.sqrt()
    } else if w >= -clamp_tol {
        *clamped += 1;
        0.0
    } else {
        f64::NAN
    }
}

pub fn moment_bounds(
    lambda: &RateFunction,
    mu: &RateFunction,
    y0: f64,
    n: u64,
    t_span: (f64, f64),
    tol: f64,
) -> Result<MomentBoundSet> {
    if !(0.0..=1.0).contains(&y0) {
        return Err(Error::Domain(format!("y0 = {y0} outside [0, 1]")));
    }
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let atol = tol * 1e-2;
    let mut clamped = 0usize;
    let x0 = [y0, y0, y0 * y0, y0, y0 * y0];
    let traj = integrate(
        |t, s, ds| {
            let (l, m) = (lambda.value(t), mu.value(t));
            let [y, z, w, v1, v2] = [s[0], s[1], s[2], s[3], s[4]];
            let w15 = pow_three_halves(w, atol, &mut clamped);
            let v215 = pow_three_halves(v2, atol, &mut clamped);
            ds[0] = l * (1.0 - y) * y - m * y;
            ds[1] = l * (z - w) - m * z;
            ds[2] = 2.0 * l * (w - w15) - 2.0 * m * w + (l + m) / n as f64;
            ds[3] = l * (v1 - v2) - m * v1;
            ds[4] = 2.0 * l * (v2 - v215) - 2.0 * m * v2;
        },
        &x0,
        t_span,
        tol,
        atol,
    )?;
    Ok(MomentBoundSet { n, trajectory: traj, clamp_events: clamped })
}

/// Result of a scalar comparison-principle check.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    /// Largest value of `u(t) - v(t)` over the grid, where `v` solves
    /// `v' = field(t, v)` from `v(t0) = u(t0)`.
    pub max_violation: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Checks `u(t) <= v(t) + tol` where `v` integrates `field` from `u`'s
/// initial value: the scalar comparison principle for sub-solutions.
pub fn comparison_check<F>(u: &SampledTrajectory, mut field: F, tol: f64) -> Result<ComparisonReport>
where
    F: FnMut(f64, f64) -> f64,
{
    if u.dim != 1 {
        return Err(Error::Domain("comparison check needs a scalar trajectory".into()));
    }
    let (t0, t1) = (u.start_time(), u.end_time());
    let v = integrate(
        |t, y, dy| dy[0] = field(t, y[0]),
        &[u.eval(t0)[0]],
        (t0, t1),
        tol.min(1e-8).max(1e-12),
        (tol * 1e-2).min(1e-10).max(1e-14),
    )?;
    let points = 400;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..=points {
        let t = t0 + (t1 - t0) * i as f64 / points as f64;
        worst = worst.max(u.eval(t)[0] - v.eval(t)[0]);
    }
    Ok(ComparisonReport { max_violation: worst, tol, passed: worst <= tol })
}
