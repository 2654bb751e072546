//! Rejection (thinning) engine.
//!
//! Over each lookahead window the total rate with the state frozen is
//! dominated by a bound from the parametric rate forms; candidate events
//! arrive at the bound rate and are accepted with probability
//! `total(t)/bound`. Between jumps the state is constant, so the frozen-state
//! bound is exact and the accepted process has the target law.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::PopulationModel;
use crate::rng::{exp_variate, stream_rng};

use super::{check_initial_state, JumpEngine, JumpPath, PathRecorder};

pub struct ThinningEngine {
    /// Initial lookahead window length.
    pub window: f64,
    /// Smallest window the adaptive shrink may reach.
    pub min_window: f64,
}

impl Default for ThinningEngine {
    fn default() -> Self {
        ThinningEngine { window: 0.1, min_window: 1e-6 }
    }
}

impl JumpEngine for ThinningEngine {
    fn name(&self) -> &'static str {
        "thinning"
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
        let mut t = 0.0;
        let mut delta = self.window;
        let mut rates = vec![0.0; model.channels.len()];
        while t < horizon {
            let x = rec.scaled_state();
            let w_end = (t + delta).min(horizon);
            let mut bound = 0.0;
            for (i, ch) in model.channels.iter().enumerate() {
                let b = ch.rate.upper_bound_window(t, w_end, &x);
                if !b.is_finite() {
                    return Err(Error::Simulation(format!(
                        "channel {i}: rate bound not finite on window [{t}, {w_end}]"
                    )));
                }
                bound += b;
            }
            let bound = (n as f64) * bound;
            if bound <= 0.0 {
                t = w_end;
                continue;
            }
            let mut candidates = 0u32;
            let mut accepted = false;
            let mut s = t;
            loop {
                s += exp_variate(&mut rng, bound);
                if s >= w_end {
                    t = w_end;
                    break;
                }
                candidates += 1;
                let mut total = 0.0;
                for (ri, ch) in rates.iter_mut().zip(&model.channels) {
                    *ri = (n as f64) * ch.rate.eval(s, &x);
                    total += *ri;
                }
                if rng.random::<f64>() * bound < total {
                    let mut u = rng.random::<f64>() * total;
                    let mut pick = rates.len() - 1;
                    for (i, &r) in rates.iter().enumerate() {
                        if u < r {
                            pick = i;
                            break;
                        }
                        u -= r;
                    }
                    rec.record(model, pick, s)?;
                    t = s;
                    accepted = true;
                    break;
                }
            }
            // shrink the window when the dominating bound is loose
            let acc_rate = if accepted { 1.0 / candidates.max(1) as f64 } else { 0.0 };
            if candidates >= 10 && acc_rate < 0.1 {
                delta = (delta * 0.5).max(self.min_window);
            }
        }
        Ok(rec.finish())
    }
}
