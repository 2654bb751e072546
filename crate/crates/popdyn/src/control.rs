//! Rate-control optimization for the viral-propagation limit and the
//! mean-field control-gap experiment.
//!
//! Controls act on the infection and cure rates directly. The state is the
//! susceptible fraction `x` with `y = c - x`; rewards accrue on `x`, costs on
//! `y`, and rate deviations from declared base schedules are penalized.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meanfield::integrate;
use crate::model::PopulationModel;
use crate::rate::RateFunction;
use crate::simulate::JumpEngine;
use crate::stats;

/// Scalar objective-component registry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarFn {
    /// `rate * x`
    Linear { rate: f64 },
    /// `coef * x^2`
    Quadratic { coef: f64 },
    /// Linear interpolation through `(x, value)` knots, constant outside.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
}

impl ScalarFn {
    pub fn zero() -> Self {
        ScalarFn::Linear { rate: 0.0 }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ScalarFn::Linear { rate } => rate * x,
            ScalarFn::Quadratic { coef } => coef * x * x,
            ScalarFn::PiecewiseLinear { knots } => {
                if knots.is_empty() {
                    return 0.0;
                }
                if x <= knots[0].0 {
                    return knots[0].1;
                }
                if x >= knots[knots.len() - 1].0 {
                    return knots[knots.len() - 1].1;
                }
                let i = match knots.binary_search_by(|k| k.0.partial_cmp(&x).unwrap()) {
                    Ok(i) => return knots[i].1,
                    Err(i) => i,
                };
                let (x0, v0) = knots[i - 1];
                let (x1, v1) = knots[i];
                v0 + (v1 - v0) * (x - x0) / (x1 - x0)
            }
        }
    }
}

/// Objective specification: reward on the susceptible fraction, cost on the
/// infected fraction, and control-deviation penalties against base rate
/// schedules. Deviation penalties are evaluated on the absolute deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardSpec {
    pub reward: ScalarFn,
    pub cost: ScalarFn,
    pub control_cost_lambda: ScalarFn,
    pub control_cost_mu: ScalarFn,
    pub base_lambda: RateFunction,
    pub base_mu: RateFunction,
}

impl RewardSpec {
    /// Validates the deviation penalties: zero at zero, nonnegative on a
    /// sample of deviations.
    pub fn validate(&self, max_rate: f64) -> Result<()> {
        for (name, f) in [
            ("control_cost_lambda", &self.control_cost_lambda),
            ("control_cost_mu", &self.control_cost_mu),
        ] {
            if f.eval(0.0).abs() > 1e-12 {
                return Err(Error::Control(format!("{name}(0) must be 0")));
            }
            for i in 0..=100 {
                let d = max_rate * i as f64 / 100.0;
                if f.eval(d) < -1e-12 {
                    return Err(Error::Control(format!("{name}({d}) is negative")));
                }
            }
        }
        Ok(())
    }
}

/// Rate-of-change bounds on the control schedules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaBounds {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub mu_lo: f64,
    pub mu_hi: f64,
}

impl ThetaBounds {
    pub fn validate(&self) -> Result<()> {
        if self.lambda_lo >= self.lambda_hi || self.mu_lo >= self.mu_hi {
            return Err(Error::Control("theta lower bounds must be below upper bounds".into()));
        }
        Ok(())
    }
}

/// A control schedule: stationary scalars or piecewise-constant vectors on a
/// control grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControlPolicy {
    Stationary {
        lambda: f64,
        mu: f64,
    },
    Piecewise {
        /// Knot times; value `i` applies on `[grid[i], grid[i+1])`, the last
        /// value extends to the horizon.
        grid: Vec<f64>,
        lambda: Vec<f64>,
        mu: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bounds: Option<ThetaBounds>,
    },
}

impl ControlPolicy {
    pub fn validate(&self) -> Result<()> {
        match self {
            ControlPolicy::Stationary { lambda, mu } => {
                if *lambda < 0.0 || *mu < 0.0 {
                    return Err(Error::Control("rates must be nonnegative".into()));
                }
            }
            ControlPolicy::Piecewise { grid, lambda, mu, bounds } => {
                if grid.len() != lambda.len() || grid.len() != mu.len() || grid.is_empty() {
                    return Err(Error::Control("grid/value lengths disagree".into()));
                }
                if grid.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Control("grid times must be strictly increasing".into()));
                }
                if lambda.iter().chain(mu).any(|&v| v < 0.0 || !v.is_finite()) {
                    return Err(Error::Control("rates must be nonnegative and finite".into()));
                }
                if let Some(th) = bounds {
                    th.validate()?;
                    for i in 1..grid.len() {
                        let dt = grid[i] - grid[i - 1];
                        let dl = (lambda[i] - lambda[i - 1]) / dt;
                        let dm = (mu[i] - mu[i - 1]) / dt;
                        if dl < th.lambda_lo - 1e-9 || dl > th.lambda_hi + 1e-9 {
                            return Err(Error::Control(format!(
                                "lambda slope {dl} at knot {i} violates theta bounds"
                            )));
                        }
                        if dm < th.mu_lo - 1e-9 || dm > th.mu_hi + 1e-9 {
                            return Err(Error::Control(format!(
                                "mu slope {dm} at knot {i} violates theta bounds"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn lambda_at(&self, t: f64) -> f64 {
        match self {
            ControlPolicy::Stationary { lambda, .. } => *lambda,
            ControlPolicy::Piecewise { grid, lambda, .. } => lambda[knot_index(grid, t)],
        }
    }

    pub fn mu_at(&self, t: f64) -> f64 {
        match self {
            ControlPolicy::Stationary { mu, .. } => *mu,
            ControlPolicy::Piecewise { grid, mu, .. } => mu[knot_index(grid, t)],
        }
    }

    /// Continuous rate schedules realizing the policy: constants for a
    /// stationary policy, piecewise-linear interpolations with a short ramp
    /// of length `ramp` at each knot otherwise. Population models need
    /// continuous positive rates, so step policies are smoothed this way.
    pub fn to_rate_functions(&self, ramp: f64) -> Result<(RateFunction, RateFunction)> {
        match self {
            ControlPolicy::Stationary { lambda, mu } => {
                Ok((RateFunction::constant(*lambda), RateFunction::constant(*mu)))
            }
            ControlPolicy::Piecewise { grid, lambda, mu, .. } => {
                let build = |vals: &[f64]| -> Result<RateFunction> {
                    let mut knots = vec![(grid[0], vals[0])];
                    for i in 1..grid.len() {
                        let pre = grid[i] - ramp.max(1e-9);
                        if pre > knots.last().unwrap().0 {
                            knots.push((pre, vals[i - 1]));
                        }
                        knots.push((grid[i], vals[i]));
                    }
                    RateFunction::piecewise_linear(knots)
                };
                Ok((build(lambda)?, build(mu)?))
            }
        }
    }
}

fn knot_index(grid: &[f64], t: f64) -> usize {
    match grid.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
        Ok(i) => i,
        Err(0) => 0,
        Err(i) => i - 1,
    }
}

fn golden_max_arg<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> (f64, f64) {
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a < 1e-12 {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Stationary-objective value at cure rate `mu` for fixed `lambda`.
pub fn stationary_objective(spec: &RewardSpec, lambda: f64, c: f64, mu: f64) -> f64 {
    let x_inf = (mu / lambda).min(c);
    let y_inf = (c - mu / lambda).max(0.0);
    spec.reward.eval(x_inf) - spec.cost.eval(y_inf) - spec.control_cost_mu.eval(mu.abs())
}

/// Maximizes the stationary objective over `mu in [0, mu_max]` (default
/// `10 * lambda * c`) by a dense grid plus golden-section refinement. Ties
/// break toward smaller `mu`.
pub fn stationary_cure_rate(
    spec: &RewardSpec,
    lambda: f64,
    c: f64,
    mu_max: Option<f64>,
) -> Result<(f64, f64)> {
    if !(lambda > 0.0) || !(c > 0.0) {
        return Err(Error::Control("lambda and c must be positive".into()));
    }
    let mu_max = mu_max.unwrap_or(10.0 * lambda * c);
    spec.validate(mu_max)?;
    let f = |mu: f64| stationary_objective(spec, lambda, c, mu);
    let points = 10_000usize;
    let step = mu_max / points as f64;
    let mut best_i = 0usize;
    let mut best_v = f(0.0);
    for i in 1..=points {
        let v = f(step * i as f64);
        if v > best_v + 1e-15 {
            best_v = v;
            best_i = i;
        }
    }
    if best_i == points && f(mu_max) > f(mu_max - step) + 1e-12 {
        return Err(Error::Control(format!(
            "objective still increasing at mu_max = {mu_max}; raise mu_max"
        )));
    }
    let a = step * best_i.saturating_sub(1) as f64;
    let b = step * (best_i + 1).min(points) as f64;
    let (mu_ref, v_ref) = golden_max_arg(&f, a, b);
    // tie-break toward the smaller mu when refinement gains nothing
    let (mu_star, value) = if v_ref > best_v + 1e-12 {
        (mu_ref, v_ref)
    } else {
        (step * best_i as f64, best_v)
    };
    Ok((mu_star, value))
}

/// The rate prescription that pins `mu/lambda` at `x_star` with the largest
/// declared infection rate.
pub fn ideal_trajectory_policy(x_star: f64, lambda_cap: f64, c: f64) -> Result<ControlPolicy> {
    if !(lambda_cap > 0.0) {
        return Err(Error::Control("lambda_cap must be positive".into()));
    }
    if !(0.0..=c).contains(&x_star) {
        return Err(Error::Control(format!("x_star = {x_star} outside [0, {c}]")));
    }
    Ok(ControlPolicy::Stationary { lambda: lambda_cap, mu: lambda_cap * x_star })
}

/// Best state target within the `delta`-neighborhood of `x_star`:
/// maximizes `R(x) - C(c - x)` over `[x_star - delta, x_star + delta] ∩ [0, c]`.
pub fn neighborhood_target(spec: &RewardSpec, x_star: f64, delta: f64, c: f64) -> f64 {
    let lo = (x_star - delta).max(0.0);
    let hi = (x_star + delta).min(c);
    let f = |x: f64| spec.reward.eval(x) - spec.cost.eval(c - x);
    let points = 2000usize;
    let mut best_x = lo;
    let mut best_v = f(lo);
    for i in 1..=points {
        let x = lo + (hi - lo) * i as f64 / points as f64;
        let v = f(x);
        if v > best_v + 1e-15 {
            best_v = v;
            best_x = x;
        }
    }
    let a = (best_x - (hi - lo) / points as f64).max(lo);
    let b = (best_x + (hi - lo) / points as f64).min(hi);
    let (x_ref, v_ref) = golden_max_arg(&f, a, b);
    if v_ref > best_v + 1e-12 {
        x_ref
    } else {
        best_x
    }
}

/// Rate-limited version of the ideal policy: targets `lambda_cap` and
/// `lambda_cap * x_hat` where `x_hat` maximizes the state objective within
/// the neighborhood, ramping from the base rates at the declared slope
/// limits.
#[allow(clippy::too_many_arguments)]
pub fn constrained_ideal_policy(
    spec: &RewardSpec,
    x_star: f64,
    delta: f64,
    lambda_cap: f64,
    c: f64,
    theta: ThetaBounds,
    grid: &[f64],
) -> Result<ControlPolicy> {
    theta.validate()?;
    if grid.len() < 2 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Control("need a strictly increasing control grid".into()));
    }
    if !(0.0..=c).contains(&x_star) || delta < 0.0 {
        return Err(Error::Control("x_star must lie in [0, c] and delta >= 0".into()));
    }
    let x_hat = neighborhood_target(spec, x_star, delta, c);
    let (l_target, m_target) = (lambda_cap, lambda_cap * x_hat);
    let mut lambda = Vec::with_capacity(grid.len());
    let mut mu = Vec::with_capacity(grid.len());
    let mut l = spec.base_lambda.value(grid[0]);
    let mut m = spec.base_mu.value(grid[0]);
    lambda.push(l);
    mu.push(m);
    for i in 1..grid.len() {
        let dt = grid[i] - grid[i - 1];
        l = ramp_toward(l, l_target, theta.lambda_lo, theta.lambda_hi, dt).max(0.0);
        m = ramp_toward(m, m_target, theta.mu_lo, theta.mu_hi, dt).max(0.0);
        lambda.push(l);
        mu.push(m);
    }
    let policy = ControlPolicy::Piecewise {
        grid: grid.to_vec(),
        lambda,
        mu,
        bounds: Some(theta),
    };
    policy.validate()?;
    Ok(policy)
}

fn ramp_toward(current: f64, target: f64, lo: f64, hi: f64, dt: f64) -> f64 {
    let step = (target - current).clamp(lo * dt, hi * dt);
    current + step
}

/// Finite-horizon control problem on the susceptible fraction.
#[derive(Debug, Clone)]
pub struct ControlProblem<'a> {
    pub spec: &'a RewardSpec,
    pub c: f64,
    /// Initial susceptible fraction.
    pub x0: f64,
    pub horizon: f64,
    /// Number of piecewise-constant control knots.
    pub knots: usize,
    pub lambda_box: (f64, f64),
    pub mu_box: (f64, f64),
    /// Optional terminal reward on `x(T)`.
    pub terminal: Option<ScalarFn>,
}

/// Outcome of the direct-shooting optimizer.
#[derive(Debug, Clone)]
pub struct ControlSolution {
    pub policy: ControlPolicy,
    pub value: f64,
    /// Best objective after each accepted optimizer improvement
    /// (nondecreasing).
    pub ascent_log: Vec<f64>,
    /// Candidates rejected because the ODE rollout failed.
    pub rejected_candidates: usize,
}

struct Shooter<'a> {
    problem: &'a ControlProblem<'a>,
    grid: Vec<f64>,
}

impl<'a> Shooter<'a> {
    fn new(problem: &'a ControlProblem<'a>) -> Self {
        let k = problem.knots.max(1);
        let grid = (0..k)
            .map(|i| problem.horizon * i as f64 / k as f64)
            .collect();
        Shooter { problem, grid }
    }

    /// Objective of a candidate `[lambda_0..lambda_K, mu_0..mu_K]`, or None
    /// if the rollout fails.
    fn objective(&self, params: &[f64]) -> Option<f64> {
        let p = self.problem;
        let k = self.grid.len();
        let (ls, ms) = params.split_at(k);
        let mut x = p.x0;
        let mut total = 0.0;
        for i in 0..k {
            let t0 = self.grid[i];
            let t1 = if i + 1 < k { self.grid[i + 1] } else { p.horizon };
            let (l, m) = (ls[i], ms[i]);
            let traj = integrate(
                |_, s, ds| ds[0] = l * s[0] * s[0] - (l * p.c + m) * s[0] + m * p.c,
                &[x],
                (t0, t1),
                1e-8,
                1e-10,
            )
            .ok()?;
            // composite Simpson of the running reward on this segment;
            // resolution scales with segment length
            let segs = (((t1 - t0) * 8.0).ceil() as usize).clamp(16, 4000) / 2 * 2;
            let h = (t1 - t0) / segs as f64;
            let rate_pen = |t: f64| {
                p.spec.control_cost_lambda.eval((l - p.spec.base_lambda.value(t)).abs())
                    + p.spec.control_cost_mu.eval((m - p.spec.base_mu.value(t)).abs())
            };
            let run = |t: f64| {
                let xv = traj.eval(t)[0];
                p.spec.reward.eval(xv) - p.spec.cost.eval(p.c - xv) - rate_pen(t)
            };
            let mut acc = run(t0) + run(t1);
            for j in 1..segs {
                let t = t0 + h * j as f64;
                acc += if j % 2 == 1 { 4.0 } else { 2.0 } * run(t);
            }
            total += acc * h / 3.0;
            x = traj.eval(t1)[0];
        }
        if let Some(term) = &p.terminal {
            total += term.eval(x);
        }
        total.is_finite().then_some(total)
    }
}

/// Direct single shooting with piecewise-constant controls: pattern search
/// from several starts, then a central-difference gradient polish.
/// Deterministic; the ascent log is nondecreasing.
pub fn finite_horizon_control(problem: &ControlProblem) -> Result<ControlSolution> {
    let (l_lo, l_hi) = problem.lambda_box;
    let (m_lo, m_hi) = problem.mu_box;
    if !(l_lo <= l_hi && m_lo <= m_hi) || l_lo < 0.0 || m_lo < 0.0 {
        return Err(Error::Control("invalid control boxes".into()));
    }
    if !(problem.horizon > 0.0) || problem.knots == 0 {
        return Err(Error::Control("horizon and knot count must be positive".into()));
    }
    problem.spec.validate(l_hi.max(m_hi))?;
    let shooter = Shooter::new(problem);
    let k = shooter.grid.len();

    let x_hat = neighborhood_target(problem.spec, 0.5 * problem.c, 0.5 * problem.c, problem.c);
    let mid = |lo: f64, hi: f64| 0.5 * (lo + hi);
    let starts: Vec<Vec<f64>> = vec![
        // base schedule sampled at the knots
        shooter
            .grid
            .iter()
            .map(|&t| problem.spec.base_lambda.value(t).clamp(l_lo, l_hi))
            .chain(shooter.grid.iter().map(|&t| problem.spec.base_mu.value(t).clamp(m_lo, m_hi)))
            .collect(),
        // equilibrium-targeting start: largest lambda, mu pinning x_hat
        std::iter::repeat(l_hi)
            .take(k)
            .chain(std::iter::repeat((l_hi * x_hat).clamp(m_lo, m_hi)).take(k))
            .collect(),
        std::iter::repeat(mid(l_lo, l_hi)).take(k).chain(std::iter::repeat(mid(m_lo, m_hi)).take(k)).collect(),
        std::iter::repeat(l_lo).take(k).chain(std::iter::repeat(m_hi).take(k)).collect(),
        std::iter::repeat(l_hi).take(k).chain(std::iter::repeat(m_lo).take(k)).collect(),
    ];
    let lo_bounds: Vec<f64> = std::iter::repeat(l_lo).take(k).chain(std::iter::repeat(m_lo).take(k)).collect();
    let hi_bounds: Vec<f64> = std::iter::repeat(l_hi).take(k).chain(std::iter::repeat(m_hi).take(k)).collect();

    let results: Vec<(Vec<f64>, f64, Vec<f64>, usize)> = starts
        .par_iter()
        .map(|start| optimize_from(&shooter, start, &lo_bounds, &hi_bounds))
        .collect();
    let mut rejected = 0usize;
    let mut best: Option<(Vec<f64>, f64, Vec<f64>)> = None;
    for (params, value, log, rej) in results {
        rejected += rej;
        if best.as_ref().map(|(_, v, _)| value > *v).unwrap_or(true) {
            best = Some((params, value, log));
        }
    }
    let (params, value, ascent_log) =
        best.ok_or_else(|| Error::Control("every start failed to evaluate".into()))?;
    let (ls, ms) = params.split_at(k);
    let policy = ControlPolicy::Piecewise {
        grid: shooter.grid.clone(),
        lambda: ls.to_vec(),
        mu: ms.to_vec(),
        bounds: None,
    };
    policy.validate()?;
    Ok(ControlSolution { policy, value, ascent_log, rejected_candidates: rejected })
}

fn optimize_from(
    shooter: &Shooter,
    start: &[f64],
    lo: &[f64],
    hi: &[f64],
) -> (Vec<f64>, f64, Vec<f64>, usize) {
    let mut rejected = 0usize;
    let eval = |p: &[f64], rejected: &mut usize| -> f64 {
        match shooter.objective(p) {
            Some(v) => v,
            None => {
                *rejected += 1;
                f64::NEG_INFINITY
            }
        }
    };
    let dim = start.len();
    let mut x = start.to_vec();
    let mut fx = eval(&x, &mut rejected);
    let mut log = vec![fx];
    let width: Vec<f64> = lo.iter().zip(hi).map(|(&a, &b)| (b - a).max(1e-12)).collect();
    let mut scale = 0.25;
    // pattern search with shrinking steps
    while scale > 1e-4 {
        let mut improved = false;
        for i in 0..dim {
            for dir in [1.0, -1.0] {
                let mut cand = x.clone();
                cand[i] = (cand[i] + dir * scale * width[i]).clamp(lo[i], hi[i]);
                if cand[i] == x[i] {
                    continue;
                }
                let fc = eval(&cand, &mut rejected);
                if fc > fx {
                    x = cand;
                    fx = fc;
                    log.push(fx);
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            scale *= 0.5;
        }
    }
    // central-difference gradient polish
    for _ in 0..10 {
        let h = 1e-5;
        let mut grad = vec![0.0; dim];
        for i in 0..dim {
            let mut up = x.clone();
            let mut dn = x.clone();
            up[i] = (up[i] + h * width[i]).clamp(lo[i], hi[i]);
            dn[i] = (dn[i] - h * width[i]).clamp(lo[i], hi[i]);
            let span = up[i] - dn[i];
            if span > 0.0 {
                grad[i] = (eval(&up, &mut rejected) - eval(&dn, &mut rejected)) / span;
            }
        }
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < 1e-10 {
            break;
        }
        let mut step = 0.01;
        let mut advanced = false;
        while step > 1e-6 {
            let cand: Vec<f64> = x
                .iter()
                .enumerate()
                .map(|(i, &v)| (v + step * width[i] * grad[i] / gnorm).clamp(lo[i], hi[i]))
                .collect();
            let fc = eval(&cand, &mut rejected);
            if fc > fx {
                x = cand;
                fx = fc;
                log.push(fx);
                advanced = true;
                break;
            }
            step *= 0.5;
        }
        if !advanced {
            break;
        }
    }
    (x, fx, log, rejected)
}

/// One scale of the control-gap experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapEntry {
    pub n: u64,
    pub j_hat: f64,
    pub se: f64,
    pub j_ode: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub entries: Vec<GapEntry>,
    /// Whether the gap is nonincreasing across the scales.
    pub decreasing: bool,
}

/// Monte-Carlo estimate of the fixed-policy objective on the jump process at
/// each scale, compared against the ODE rollout value.
#[allow(clippy::too_many_arguments)]
pub fn mean_field_control_gap(
    model: &PopulationModel,
    engine: &dyn JumpEngine,
    c1: &(dyn Fn(f64, &[f64]) -> f64 + Sync),
    c2: &(dyn Fn(&[f64]) -> f64 + Sync),
    z0: &[f64],
    horizon: f64,
    n_list: &[u64],
    paths: usize,
    seed: u64,
) -> Result<GapReport> {
    if n_list.is_empty() || paths == 0 {
        return Err(Error::Control("need scales and paths".into()));
    }
    let reference = integrate(
        |t, x, dx| {
            for (di, f) in dx.iter_mut().zip(drift_terms(model, t, x)) {
                *di = f;
            }
        },
        z0,
        (0.0, horizon),
        1e-9,
        1e-11,
    )?;
    // ODE value: Simpson over a fine grid plus terminal cost
    let segs = 2000usize;
    let h = horizon / segs as f64;
    let run = |t: f64| c1(t, &reference.eval(t));
    let mut acc = run(0.0) + run(horizon);
    for j in 1..segs {
        acc += if j % 2 == 1 { 4.0 } else { 2.0 } * run(h * j as f64);
    }
    let j_ode = acc * h / 3.0 + c2(&reference.eval(horizon));

    let mut entries = Vec::with_capacity(n_list.len());
    for (bi, &n) in n_list.iter().enumerate() {
        let x0 = crate::analysis::lattice_state_for(model, n, z0)?;
        let values: Vec<f64> = (0..paths as u64)
            .into_par_iter()
            .map(|p| {
                let path_seed = crate::rng::derive_seed(seed, (bi as u64) << 32 | p);
                let path = engine.simulate(model, n, &x0, horizon, path_seed)?;
                let mut total = 0.0;
                for i in 0..path.times.len() {
                    let t0 = path.times[i];
                    let t1 = if i + 1 < path.times.len() { path.times[i + 1] } else { horizon };
                    if t1 <= t0 {
                        continue;
                    }
                    let x = path.scaled_row(i);
                    // state constant on the interval; 3-point Simpson in t
                    let tm = 0.5 * (t0 + t1);
                    total +=
                        (t1 - t0) / 6.0 * (c1(t0, &x) + 4.0 * c1(tm, &x) + c1(t1, &x));
                }
                total += c2(&path.scaled_row(path.times.len() - 1));
                Ok(total)
            })
            .collect::<Result<Vec<_>>>()?;
        let j_hat = stats::mean(&values);
        let se = stats::standard_error(&values);
        entries.push(GapEntry { n, j_hat, se, j_ode, gap: (j_hat - j_ode).abs() });
    }
    let decreasing = entries.windows(2).all(|w| w[1].gap <= w[0].gap + 1e-12);
    Ok(GapReport { entries, decreasing })
}

fn drift_terms(model: &PopulationModel, t: f64, x: &[f64]) -> Vec<f64> {
    let mut f = vec![0.0; model.dim];
    for ch in &model.channels {
        let b = ch.rate.eval(t, x);
        for (fi, &ji) in f.iter_mut().zip(&ch.jump) {
            *fi += (ji as f64) * b;
        }
    }
    f
}
