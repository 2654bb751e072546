//! Convergence experiments and equilibrium/stability analysis for the
//! viral-propagation model.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meanfield::{integrate, SampledTrajectory};
use crate::model::{Domain, PopulationModel};
use crate::rate::RateFunction;
use crate::simulate::JumpEngine;
use crate::stats;

/// One scale of a convergence experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceEntry {
    pub n: u64,
    pub median: f64,
    pub q10: f64,
    pub q90: f64,
    pub paths: usize,
}

/// Sup-deviation quantiles per scale plus the fitted log-log slope of the
/// median deviation against n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub entries: Vec<ConvergenceEntry>,
    pub slope: f64,
    pub slope_se: f64,
}

/// Nearest lattice state to `n * z0` that satisfies the domain constraint.
/// Simplex domains use largest-remainder rounding so the total is exact.
pub fn lattice_state_for(model: &PopulationModel, n: u64, z0: &[f64]) -> Result<Vec<i64>> {
    if z0.len() != model.dim {
        return Err(Error::Domain("z0 dimension mismatch".into()));
    }
    model.check_in_domain(z0)?;
    match &model.domain {
        Domain::Box { lo, hi } => Ok(z0
            .iter()
            .zip(lo.iter().zip(hi))
            .map(|(&z, (&l, &h))| {
                let k = (z * n as f64).round();
                let k = k.clamp((l * n as f64).ceil(), (h * n as f64).floor());
                k as i64
            })
            .collect()),
        Domain::Simplex { total, .. } => {
            let units = (total * n as f64).round() as i64;
            let raw: Vec<f64> = z0.iter().map(|&z| z * n as f64).collect();
            let mut ks: Vec<i64> = raw.iter().map(|&r| r.floor() as i64).collect();
            let mut missing = units - ks.iter().sum::<i64>();
            let mut order: Vec<usize> = (0..ks.len()).collect();
            order.sort_by(|&a, &b| {
                let ra = raw[a] - raw[a].floor();
                let rb = raw[b] - raw[b].floor();
                rb.partial_cmp(&ra).unwrap()
            });
            let len = ks.len();
            let mut idx = 0usize;
            while missing > 0 {
                ks[order[idx % len]] += 1;
                missing -= 1;
                idx += 1;
            }
            let mut idx = 0usize;
            while missing < 0 {
                let j = order[len - 1 - idx % len];
                if ks[j] > 0 {
                    ks[j] -= 1;
                    missing += 1;
                }
                idx += 1;
            }
            Ok(ks)
        }
    }
}

/// Simulates ensembles at each scale in `n_list`, measures per-path sup
/// deviation against the integrated mean-field limit, and fits the log-log
/// slope of the median deviation.
#[allow(clippy::too_many_arguments)]
pub fn convergence_experiment(
    model: &PopulationModel,
    engine: &dyn JumpEngine,
    z0: &[f64],
    horizon: f64,
    n_list: &[u64],
    paths: usize,
    seed: u64,
) -> Result<ConvergenceReport> {
    if n_list.len() < 2 {
        return Err(Error::Domain("need at least 2 scales in n_list".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("n_list must be strictly increasing".into()));
    }
    if paths == 0 {
        return Err(Error::Domain("need at least one path".into()));
    }
    let reference = integrate(
        |t, x, dx| {
            // drift is polynomial, safe to extrapolate just past the boundary
            let f = drift_unchecked(model, t, x);
            dx.copy_from_slice(&f);
        },
        z0,
        (0.0, horizon),
        1e-9,
        1e-11,
    )?;
    let grid: Vec<f64> = (0..=200).map(|i| horizon * i as f64 / 200.0).collect();
    let mut entries = Vec::with_capacity(n_list.len());
    for (bi, &n) in n_list.iter().enumerate() {
        let x0 = lattice_state_for(model, n, z0)?;
        let devs: Vec<f64> = (0..paths as u64)
            .into_par_iter()
            .map(|p| {
                let path_seed = crate::rng::derive_seed(seed, (bi as u64) << 32 | p);
                let path = engine.simulate(model, n, &x0, horizon, path_seed)?;
                Ok(path.sup_deviation(&reference, &grid))
            })
            .collect::<Result<Vec<_>>>()?;
        entries.push(ConvergenceEntry {
            n,
            median: stats::quantile(&devs, 0.5),
            q10: stats::quantile(&devs, 0.1),
            q90: stats::quantile(&devs, 0.9),
            paths,
        });
    }
    let xs: Vec<f64> = entries.iter().map(|e| (e.n as f64).ln()).collect();
    let ys: Vec<f64> = entries.iter().map(|e| e.median.ln()).collect();
    let (slope, slope_se) = stats::ols_slope(&xs, &ys);
    Ok(ConvergenceReport { entries, slope, slope_se })
}

/// Evaluates the drift without the domain check; lattice rounding and the
/// integrator's trial steps may poke marginally outside the domain, where
/// the polynomial rates still evaluate cleanly.
fn drift_unchecked(model: &PopulationModel, t: f64, x: &[f64]) -> Vec<f64> {
    let mut f = vec![0.0; model.dim];
    for ch in &model.channels {
        let b = ch.rate.eval(t, x);
        for (fi, &ji) in f.iter_mut().zip(&ch.jump) {
            *fi += (ji as f64) * b;
        }
    }
    f
}

/// Stability classification of one equilibrium value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    Neither,
    /// Time-varying attractor `x1*(t) = mu(t)/lambda(t)` rather than a fixed
    /// point.
    AsymptoticState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumPoint {
    pub value: f64,
    pub stability: Stability,
}

/// Which case of the classification applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseLabel {
    /// Constant-rate cases 1-3.
    Constant(u8),
    /// Time-varying cases 1-4.
    TimeVarying(u8),
    /// The ratio straddles c; outside the classification.
    Unclassified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub points: Vec<EquilibriumPoint>,
    pub case_label: CaseLabel,
    /// Neighborhood radius, only for time-varying case 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Limit of mu/lambda when the ratio settles.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

const CASE_MARGIN: f64 = 1e-9;
const EXACT_TOL: f64 = 1e-12;

/// Equilibria of the constant-rate scalar field
/// `dx/dt = lambda (x - mu/lambda)(x - c)`.
pub fn sis_equilibria_constant(lambda: f64, mu: f64, c: f64) -> Result<EquilibriumReport> {
    if !(lambda > 0.0) || !(mu > 0.0) || !(c > 0.0) {
        return Err(Error::Domain("lambda, mu, c must be positive".into()));
    }
    let x1 = mu / lambda;
    if (x1 - c).abs() <= EXACT_TOL {
        return Ok(EquilibriumReport {
            points: vec![EquilibriumPoint { value: c, stability: Stability::Neither }],
            case_label: CaseLabel::Constant(3),
            delta: None,
            kappa: Some(x1),
        });
    }
    let (s1, s2, case) = if x1 < c {
        (Stability::Stable, Stability::Unstable, 1)
    } else {
        (Stability::Unstable, Stability::Stable, 2)
    };
    Ok(EquilibriumReport {
        points: vec![
            EquilibriumPoint { value: x1, stability: s1 },
            EquilibriumPoint { value: c, stability: s2 },
        ],
        case_label: CaseLabel::Constant(case),
        delta: None,
        kappa: Some(x1),
    })
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a < 1e-13 {
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
    fc.max(fd)
}

/// Tail supremum of `|lambda' mu - mu' lambda| / lambda^3 / |psi - c|` over
/// the second half of `[0, t_window]`, the computable surrogate for the
/// limsup defining the attraction-neighborhood radius.
pub fn delta_neighborhood(
    lambda: &RateFunction,
    mu: &RateFunction,
    psi: f64,
    c: f64,
    t_window: f64,
) -> Result<f64> {
    if !(psi < c) {
        return Err(Error::Domain(format!("psi = {psi} must be below c = {c}")));
    }
    if !(t_window > 0.0) {
        return Err(Error::Domain("window must be positive".into()));
    }
    let t0 = 0.5 * t_window;
    let g = |t: f64| {
        let (l, m) = (lambda.value(t), mu.value(t));
        let (lp, mp) = (lambda.derivative(t), mu.derivative(t));
        (lp * m - mp * l).abs() / (l * l * l) / (psi - c).abs()
    };
    let samples = 4096usize;
    let mut vals = Vec::with_capacity(samples + 1);
    for i in 0..=samples {
        let t = t0 + (t_window - t0) * i as f64 / samples as f64;
        let l = lambda.value(t);
        if !(l > 0.0) {
            return Err(Error::Domain(format!("lambda({t}) = {l} is not positive")));
        }
        vals.push(g(t));
    }
    let step = (t_window - t0) / samples as f64;
    let mut best = vals[0].max(vals[samples]);
    for i in 1..samples {
        if vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1] {
            let a = t0 + step * (i - 1) as f64;
            let b = t0 + step * (i + 1) as f64;
            best = best.max(golden_max(&g, a, b));
        }
    }
    Ok(best)
}

/// Classifies the time-varying system by the range of `mu(t)/lambda(t)` over
/// `[0, t_window]`, with the convergent-ratio refinement when the tail
/// oscillation settles.
pub fn classify_time_varying(
    lambda: &RateFunction,
    mu: &RateFunction,
    c: f64,
    t_window: f64,
) -> Result<EquilibriumReport> {
    if !(c > 0.0) || !(t_window > 0.0) {
        return Err(Error::Domain("c and window must be positive".into()));
    }
    let samples = 4000usize;
    let mut ratios = Vec::with_capacity(samples + 1);
    for i in 0..=samples {
        let t = t_window * i as f64 / samples as f64;
        let (l, m) = (lambda.value(t), mu.value(t));
        if !(l > 0.0) || m < 0.0 {
            return Err(Error::Domain(format!(
                "rates not positive at t = {t}: lambda = {l}, mu = {m}"
            )));
        }
        ratios.push(m / l);
    }
    let sup = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let inf = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let tail = &ratios[samples / 2..];
    let tail_sup = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tail_inf = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    let kappa = if tail_sup - tail_inf < 1e-6 {
        Some(stats::mean(tail))
    } else {
        None
    };
    let report = |points, case, kappa| EquilibriumReport {
        points,
        case_label: case,
        delta: None,
        kappa,
    };
    if (sup - c).abs() <= EXACT_TOL && (inf - c).abs() <= EXACT_TOL {
        return Ok(report(
            vec![EquilibriumPoint { value: c, stability: Stability::Neither }],
            CaseLabel::TimeVarying(3),
            kappa,
        ));
    }
    if sup <= EXACT_TOL {
        return Ok(report(
            vec![EquilibriumPoint { value: 0.0, stability: Stability::AsymptoticState }],
            CaseLabel::TimeVarying(4),
            kappa,
        ));
    }
    if sup < c - CASE_MARGIN {
        let mid = 0.5 * (inf + sup);
        return Ok(report(
            vec![
                EquilibriumPoint { value: mid, stability: Stability::AsymptoticState },
                EquilibriumPoint { value: c, stability: Stability::Unstable },
            ],
            CaseLabel::TimeVarying(1),
            kappa,
        ));
    }
    if inf > c + CASE_MARGIN {
        return Ok(report(
            vec![EquilibriumPoint { value: c, stability: Stability::Stable }],
            CaseLabel::TimeVarying(2),
            kappa,
        ));
    }
    Ok(report(Vec::new(), CaseLabel::Unclassified, kappa))
}

/// Outcome of a Lyapunov-derivative sweep along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    pub checked_points: usize,
    pub violations: usize,
    /// Largest derivative seen where the implication applies (should be < 0).
    pub max_derivative: f64,
    pub passed: bool,
}

/// Derivative of `V(x,t) = (x - mu/lambda)^2 / 2` along the scalar field:
/// `lambda (x - mu/lambda)^2 (x - c) + (x - mu/lambda)(lambda' mu - mu' lambda)/lambda^2`.
pub fn lyapunov_derivative(lambda: &RateFunction, mu: &RateFunction, c: f64, t: f64, x: f64) -> f64 {
    let (l, m) = (lambda.value(t), mu.value(t));
    let (lp, mp) = (lambda.derivative(t), mu.derivative(t));
    let d = x - m / l;
    l * d * d * (x - c) + d * (lp * m - mp * l) / (l * l)
}

/// Sweeps the trajectory and checks `Vdot < 0` wherever `|x - mu/lambda| >
/// delta` and `x < psi`. `psi` defaults to `max(x(0), sup mu/lambda) + 1e-6`.
pub fn lyapunov_derivative_check(
    lambda: &RateFunction,
    mu: &RateFunction,
    c: f64,
    trajectory: &SampledTrajectory,
    delta: f64,
    psi: Option<f64>,
) -> Result<LyapunovReport> {
    if trajectory.dim != 1 {
        return Err(Error::Domain("need a scalar trajectory".into()));
    }
    let (t0, t1) = (trajectory.start_time(), trajectory.end_time());
    let psi = psi.unwrap_or_else(|| {
        let mut sup_ratio = f64::NEG_INFINITY;
        for i in 0..=1000 {
            let t = t0 + (t1 - t0) * i as f64 / 1000.0;
            sup_ratio = sup_ratio.max(mu.value(t) / lambda.value(t));
        }
        trajectory.eval(t0)[0].max(sup_ratio) + 1e-6
    });
    let points = 1000;
    let mut checked = 0usize;
    let mut violations = 0usize;
    let mut max_derivative = f64::NEG_INFINITY;
    for i in 0..=points {
        let t = t0 + (t1 - t0) * i as f64 / points as f64;
        let x = trajectory.eval(t)[0];
        let ratio = mu.value(t) / lambda.value(t);
        if (x - ratio).abs() > delta && x < psi {
            checked += 1;
            let vdot = lyapunov_derivative(lambda, mu, c, t, x);
            max_derivative = max_derivative.max(vdot);
            if vdot >= 0.0 {
                violations += 1;
            }
        }
    }
    Ok(LyapunovReport {
        checked_points: checked,
        violations,
        max_derivative,
        passed: violations == 0,
    })
}

/// True iff `|x(t) - target(t)| <= delta + 1e-6` for all sampled `t >=
/// t_tail`.
pub fn asymptote_check<F: Fn(f64) -> f64>(
    trajectory: &SampledTrajectory,
    target: F,
    delta: f64,
    t_tail: f64,
) -> Result<bool> {
    let (t0, t1) = (trajectory.start_time(), trajectory.end_time());
    if t_tail < t0 || t_tail > t1 {
        return Err(Error::Domain("t_tail outside trajectory span".into()));
    }
    let points = 400;
    for i in 0..=points {
        let t = t_tail + (t1 - t_tail) * i as f64 / points as f64;
        if (trajectory.eval(t)[0] - target(t)).abs() > delta + 1e-6 {
            return Ok(false);
        }
    }
    Ok(true)
}
