//! Random-time-change engine.
//!
//! Each channel carries a unit-exponential budget on its internal clock. With
//! the state frozen between jumps, the channel fires when its cumulative
//! intensity `∫ n·β_l(s, x) ds` exhausts the budget; the earliest firing wins,
//! losers pay the intensity consumed up to that time. Crossing times are
//! solved by bisection over adaptive-quadrature evaluations of the integrand.

use crate::error::{Error, Result};
use crate::model::PopulationModel;
use crate::poly::ChannelRate;
use crate::rng::{exp1, stream_rng};

use super::{check_initial_state, JumpEngine, JumpPath, PathRecorder};

/// Time tolerance of the crossing-time bisection.
const TIME_TOL: f64 = 1e-12;
const MAX_BISECT: usize = 200;

pub struct NextReactionEngine;

impl Default for NextReactionEngine {
    fn default() -> Self {
        NextReactionEngine
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
fn quad<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_refine(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_refine(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1)
            + simpson_refine(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1)
    }
}

/// Cumulative intensity of one channel over `[t0, t1]` at frozen state `x`.
fn consumed(rate: &ChannelRate, n: u64, x: &[f64], t0: f64, t1: f64) -> f64 {
    let f = |s: f64| (n as f64) * rate.eval(s, x);
    let (lo, hi) = rate.inner().bounds_frozen_state(t0, t1, x);
    if (hi - lo).abs() <= 1e-15 * hi.abs().max(1.0) {
        // constant in time over the window
        return f(t0) * (t1 - t0);
    }
    quad(&f, t0, t1, 1e-13)
}

/// Time at which the cumulative intensity from `t0` reaches `budget`, or
/// `None` if it stays below `budget` up to `horizon`.
fn crossing_time(
    rate: &ChannelRate,
    n: u64,
    x: &[f64],
    t0: f64,
    horizon: f64,
    budget: f64,
    channel: usize,
) -> Result<Option<f64>> {
    let f = |s: f64| (n as f64) * rate.eval(s, x);
    let (blo, bhi) = rate.inner().bounds_frozen_state(t0, horizon, x);
    if (bhi - blo).abs() <= 1e-15 * bhi.abs().max(1.0) {
        // constant rate: closed-form crossing
        let r = f(t0);
        if r <= 0.0 || r * (horizon - t0) < budget {
            return Ok(None);
        }
        return Ok(Some(t0 + budget / r));
    }
    let total = quad(&f, t0, horizon, 1e-13 * (1.0 + budget));
    if total < budget {
        return Ok(None);
    }
    let mut lo = t0;
    let mut acc_lo = 0.0;
    let mut hi = horizon;
    for _ in 0..MAX_BISECT {
        if hi - lo <= TIME_TOL {
            return Ok(Some(hi));
        }
        let mid = 0.5 * (lo + hi);
        let g = acc_lo + quad(&f, lo, mid, 1e-14 * (1.0 + budget));
        if g < budget {
            lo = mid;
            acc_lo = g;
        } else {
            hi = mid;
        }
    }
    Err(Error::Simulation(format!(
        "channel {channel}: crossing-time bisection did not converge to {TIME_TOL}"
    )))
}

impl JumpEngine for NextReactionEngine {
    fn name(&self) -> &'static str {
        "next-reaction"
    }

    fn simulate(
        &self,
        model: &PopulationModel,
        n: u64,
        x0: &[i64],
        horizon: f64,
        seed: u64,
    ) -> Result<JumpPath> {
        check_initial_state(model, n, x0, horizon)?;
        let mut rng = stream_rng(seed, 0);
        let mut rec = PathRecorder::new(n, x0);
        let mut budgets: Vec<f64> = model.channels.iter().map(|_| exp1(&mut rng)).collect();
        let mut t = 0.0;
        loop {
            let x = rec.scaled_state();
            let mut winner: Option<(usize, f64)> = None;
            for (i, ch) in model.channels.iter().enumerate() {
                if let Some(s) = crossing_time(&ch.rate, n, &x, t, horizon, budgets[i], i)? {
                    if winner.map(|(_, best)| s < best).unwrap_or(true) {
                        winner = Some((i, s));
                    }
                }
            }
            let Some((pick, mut s)) = winner else {
                return Ok(rec.finish());
            };
            if s <= t {
                s = t + TIME_TOL;
            }
            if s >= horizon {
                return Ok(rec.finish());
            }
            for (i, ch) in model.channels.iter().enumerate() {
                if i != pick {
                    budgets[i] = (budgets[i] - consumed(&ch.rate, n, &x, t, s)).max(1e-300);
                }
            }
            budgets[pick] = exp1(&mut rng);
            rec.record(model, pick, s)?;
            t = s;
        }
    }
}
