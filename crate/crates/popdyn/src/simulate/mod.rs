//! Exact stochastic simulation of the lattice jump process.
//!
//! Two independent engines realize the same law: rejection thinning with
//! windowed rate bounds, and per-channel clocks under random time change.
//! They cross-validate each other in the test suite. Engines are registered
//! by name so callers can select one at run time.

mod next_reaction;
mod thinning;

pub use next_reaction::NextReactionEngine;
pub use thinning::ThinningEngine;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meanfield::SampledTrajectory;
use crate::model::PopulationModel;

/// Hard cap on recorded events per path; hitting it is an error, not a
/// truncation.
pub const MAX_EVENTS: usize = 50_000_000;

/// One realized path of the lattice process at scale `n`.
///
/// `times[0] = 0` holds the initial state; entry `i > 0` records the state
/// right after the `i`-th event. `channels[i]` is the index of the channel
/// that fired (`-1` for the initial row).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpPath {
    pub n: u64,
    pub dim: usize,
    pub times: Vec<f64>,
    /// Lattice states, flattened row-major: one row per entry of `times`.
    pub states: Vec<i64>,
    pub channels: Vec<i64>,
}

impl JumpPath {
    pub fn event_count(&self) -> usize {
        self.times.len() - 1
    }

    pub fn state_row(&self, i: usize) -> &[i64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    /// Scaled state `k/n` at row `i`.
    pub fn scaled_row(&self, i: usize) -> Vec<f64> {
        self.state_row(i).iter().map(|&k| k as f64 / self.n as f64).collect()
    }

    /// Index of the last row with time `<= t` (the path is right-continuous).
    pub fn row_at_time(&self, t: f64) -> usize {
        match self.times.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        }
    }

    /// Scaled state at time `t`.
    pub fn scaled_state_at(&self, t: f64) -> Vec<f64> {
        self.scaled_row(self.row_at_time(t))
    }

    /// Scaled states sampled on a time grid, flattened row-major.
    pub fn sample_grid(&self, grid: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(grid.len() * self.dim);
        for &t in grid {
            out.extend(self.scaled_state_at(t));
        }
        out
    }

    /// Sup-norm deviation from `reference`, taken over the union of `grid`
    /// and the event times.
    pub fn sup_deviation(&self, reference: &SampledTrajectory, grid: &[f64]) -> f64 {
        let mut refv = vec![0.0; self.dim];
        let mut sup: f64 = 0.0;
        let measure = |row: usize, t: f64, refv: &mut Vec<f64>, sup: &mut f64| {
            reference.eval_into(t, refv);
            let k = self.state_row(row);
            for (i, &ki) in k.iter().enumerate() {
                *sup = sup.max((ki as f64 / self.n as f64 - refv[i]).abs());
            }
        };
        for &t in grid {
            measure(self.row_at_time(t), t, &mut refv, &mut sup);
        }
        for i in 1..self.times.len() {
            measure(i, self.times[i], &mut refv, &mut sup);
        }
        sup
    }

    /// The path itself as a piecewise-constant trajectory in scaled
    /// coordinates.
    pub fn as_trajectory(&self) -> SampledTrajectory {
        let ys: Vec<f64> = self.states.iter().map(|&k| k as f64 / self.n as f64).collect();
        SampledTrajectory::piecewise_constant(self.dim, self.times.clone(), ys)
    }

    /// Structural validity against a model: jumps match the recorded channel,
    /// times strictly increase from 0, conserved quantity constant.
    pub fn validate(&self, model: &PopulationModel) -> Result<()> {
        if self.times.is_empty() || self.times[0] != 0.0 {
            return Err(Error::Simulation("path must start at time 0".into()));
        }
        for i in 1..self.times.len() {
            if self.times[i] <= self.times[i - 1] {
                return Err(Error::Simulation(format!(
                    "event times not strictly increasing at index {i}"
                )));
            }
            let ch = self.channels[i];
            let jump = &model.channels[ch as usize].jump;
            let prev = self.state_row(i - 1);
            let cur = self.state_row(i);
            for d in 0..self.dim {
                if cur[d] - prev[d] != jump[d] {
                    return Err(Error::Simulation(format!(
                        "state change at event {i} does not match channel {ch}"
                    )));
                }
            }
        }
        if let Some(w) = &model.conserved {
            let q0: i64 = w.iter().zip(self.state_row(0)).map(|(a, b)| a * b).sum();
            for i in 1..self.times.len() {
                let q: i64 = w.iter().zip(self.state_row(i)).map(|(a, b)| a * b).sum();
                if q != q0 {
                    return Err(Error::Simulation(format!(
                        "conserved quantity drifted at event {i}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A path simulation strategy.
pub trait JumpEngine: Send + Sync {
    fn name(&self) -> &'static str;
    fn simulate(
        &self,
        model: &PopulationModel,
        n: u64,
        x0: &[i64],
        horizon: f64,
        seed: u64,
    ) -> Result<JumpPath>;
}

/// Names accepted by [`engine_by_name`].
pub fn engine_names() -> &'static [&'static str] {
    &["thinning", "next-reaction"]
}

/// Looks up an engine by its registered name.
pub fn engine_by_name(name: &str) -> Option<Box<dyn JumpEngine>> {
    match name {
        "thinning" => Some(Box::new(ThinningEngine::default())),
        "next-reaction" => Some(Box::new(NextReactionEngine::default())),
        _ => None,
    }
}

/// Simulates one path with the thinning engine.
pub fn simulate_thinning(
    model: &PopulationModel,
    n: u64,
    x0: &[i64],
    horizon: f64,
    seed: u64,
) -> Result<JumpPath> {
    ThinningEngine::default().simulate(model, n, x0, horizon, seed)
}

/// Simulates one path with the next-reaction engine.
pub fn simulate_next_reaction(
    model: &PopulationModel,
    n: u64,
    x0: &[i64],
    horizon: f64,
    seed: u64,
) -> Result<JumpPath> {
    NextReactionEngine::default().simulate(model, n, x0, horizon, seed)
}

pub(crate) fn check_initial_state(
    model: &PopulationModel,
    n: u64,
    x0: &[i64],
    horizon: f64,
) -> Result<()> {
    if n == 0 {
        return Err(Error::Simulation("scale n must be positive".into()));
    }
    if !(horizon > 0.0) {
        return Err(Error::Simulation("horizon must be positive".into()));
    }
    if x0.len() != model.dim {
        return Err(Error::Simulation(format!(
            "initial state dimension {} does not match model dimension {}",
            x0.len(),
            model.dim
        )));
    }
    let x: Vec<f64> = x0.iter().map(|&k| k as f64 / n as f64).collect();
    model.check_in_domain(&x)?;
    Ok(())
}

pub(crate) struct PathRecorder {
    path: JumpPath,
    state: Vec<i64>,
}

impl PathRecorder {
    pub fn new(n: u64, x0: &[i64]) -> Self {
        PathRecorder {
            path: JumpPath {
                n,
                dim: x0.len(),
                times: vec![0.0],
                states: x0.to_vec(),
                channels: vec![-1],
            },
            state: x0.to_vec(),
        }
    }

    pub fn scaled_state(&self) -> Vec<f64> {
        self.state.iter().map(|&k| k as f64 / self.path.n as f64).collect()
    }

    /// Applies channel `ch` at time `t`, verifying the new state stays in the
    /// domain.
    pub fn record(&mut self, model: &PopulationModel, ch: usize, t: f64) -> Result<()> {
        if self.path.event_count() >= MAX_EVENTS {
            return Err(Error::Simulation(format!(
                "event budget of {MAX_EVENTS} exceeded"
            )));
        }
        for (s, &j) in self.state.iter_mut().zip(&model.channels[ch].jump) {
            *s += j;
        }
        let x = self.scaled_state();
        if model.check_in_domain(&x).is_err() {
            return Err(Error::Simulation(format!(
                "channel {ch} left the domain at t={t} (state {:?})",
                self.state
            )));
        }
        self.path.times.push(t);
        self.path.states.extend_from_slice(&self.state);
        self.path.channels.push(ch as i64);
        Ok(())
    }

    pub fn finish(self) -> JumpPath {
        self.path
    }
}

/// Ensemble statistics on a fixed time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub n: u64,
    pub path_count: usize,
    pub time_grid: Vec<f64>,
    /// Per-grid-point mean of the scaled state, flattened row-major.
    pub mean: Vec<f64>,
    /// Per-grid-point unbiased variance of the scaled state, flattened.
    pub variance: Vec<f64>,
    /// Per-path sup-norm deviation from the reference (empty without one).
    pub sup_deviations: Vec<f64>,
}

/// Runs `paths` independent paths with per-path seeds derived from `seed`
/// and summarizes them on `grid`. Paths run data-parallel; results do not
/// depend on the thread count.
#[allow(clippy::too_many_arguments)]
pub fn simulate_ensemble(
    model: &PopulationModel,
    engine: &dyn JumpEngine,
    n: u64,
    x0: &[i64],
    horizon: f64,
    paths: usize,
    grid: &[f64],
    reference: Option<&SampledTrajectory>,
    seed: u64,
) -> Result<EnsembleSummary> {
    if paths == 0 {
        return Err(Error::Simulation("ensemble needs at least one path".into()));
    }
    if grid.iter().any(|&t| t < 0.0 || t > horizon) {
        return Err(Error::Simulation("grid must lie within [0, horizon]".into()));
    }
    let dim = model.dim;
    let per_path: Vec<(Vec<f64>, f64)> = (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let path = engine.simulate(model, n, x0, horizon, crate::rng::derive_seed(seed, i))?;
            let samples = path.sample_grid(grid);
            let dev = reference.map(|r| path.sup_deviation(r, grid)).unwrap_or(f64::NAN);
            Ok((samples, dev))
        })
        .collect::<Result<Vec<_>>>()?;

    let cells = grid.len() * dim;
    let mut mean = vec![0.0; cells];
    let mut variance = vec![0.0; cells];
    for (samples, _) in &per_path {
        for (m, &s) in mean.iter_mut().zip(samples) {
            *m += s;
        }
    }
    for m in &mut mean {
        *m /= paths as f64;
    }
    if paths > 1 {
        for (samples, _) in &per_path {
            for ((v, &m), &s) in variance.iter_mut().zip(&mean).zip(samples) {
                *v += (s - m) * (s - m);
            }
        }
        for v in &mut variance {
            *v /= (paths - 1) as f64;
        }
    }
    let sup_deviations = if reference.is_some() {
        per_path.iter().map(|(_, d)| *d).collect()
    } else {
        Vec::new()
    };
    Ok(EnsembleSummary {
        n,
        path_count: paths,
        time_grid: grid.to_vec(),
        mean,
        variance,
        sup_deviations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rate::RateFunction;
    use crate::stats;
    use approx::assert_relative_eq;

    fn sis(lambda: f64, mu: f64) -> PopulationModel {
        PopulationModel::make_sis(&RateFunction::constant(lambda), &RateFunction::constant(mu))
            .unwrap()
    }

    #[test]
    fn absorbing_state_yields_constant_path() {
        let m = sis(2.0, 0.8);
        for name in engine_names() {
            let engine = engine_by_name(name).unwrap();
            let p = engine.simulate(&m, 1, &[1, 0], 10.0, 3).unwrap();
            assert_eq!(p.event_count(), 0, "engine {name}");
            assert_eq!(p.state_row(0), &[1, 0]);
        }
    }

    #[test]
    fn paths_validate_and_conserve() {
        let m = PopulationModel::make_sis(
            &RateFunction::sinusoid(2.0, 1.0, 1.0, 0.0),
            &RateFunction::constant(1.0),
        )
        .unwrap();
        for name in engine_names() {
            let engine = engine_by_name(name).unwrap();
            let p = engine.simulate(&m, 200, &[150, 50], 5.0, 11).unwrap();
            assert!(p.event_count() > 10, "engine {name}");
            p.validate(&m).unwrap();
        }
    }

    #[test]
    fn determinism_identical_seed_identical_path() {
        let m = sis(2.0, 0.8);
        for name in engine_names() {
            let engine = engine_by_name(name).unwrap();
            let a = engine.simulate(&m, 300, &[200, 100], 3.0, 99).unwrap();
            let b = engine.simulate(&m, 300, &[200, 100], 3.0, 99).unwrap();
            assert_eq!(a, b, "engine {name}");
        }
    }

    #[test]
    fn pure_time_intensity_event_count_is_poisson() {
        // single channel at rate 2 + sin t, n=1: count on [0, 2pi] is Poisson
        // with mean 4pi
        use crate::poly::{ChannelRate, PolyTerm, Polynomial};
        let ch = crate::model::TransitionChannel {
            jump: vec![1],
            rate: ChannelRate::Poly(
                Polynomial::new(
                    1,
                    vec![PolyTerm {
                        scale: 1.0,
                        powers: vec![0],
                        rate: RateFunction::sinusoid(2.0, 1.0, 1.0, 0.0),
                    }],
                )
                .unwrap(),
            ),
        };
        let m = PopulationModel::new(
            crate::model::Domain::Box { lo: vec![0.0], hi: vec![1e9] },
            vec![ch],
            None,
        )
        .unwrap();
        let horizon = 2.0 * std::f64::consts::PI;
        let mean_expected = 4.0 * std::f64::consts::PI;
        for name in engine_names() {
            let engine = engine_by_name(name).unwrap();
            let reps = 400;
            let counts: Vec<f64> = (0..reps)
                .map(|i| {
                    engine
                        .simulate(&m, 1, &[0], horizon, crate::rng::derive_seed(17, i))
                        .unwrap()
                        .event_count() as f64
                })
                .collect();
            let mean = stats::mean(&counts);
            let se = stats::standard_error(&counts);
            assert!(
                (mean - mean_expected).abs() < 3.0 * se + 1e-9,
                "engine {name}: mean {mean} vs {mean_expected} (se {se})"
            );
        }
    }

    #[test]
    fn engines_agree_by_ks_test() {
        let m = sis(2.0, 0.8);
        let reps = 300u64;
        let sample = |name: &str, master: u64| -> (Vec<f64>, Vec<f64>) {
            let engine = engine_by_name(name).unwrap();
            let mut counts = Vec::new();
            let mut finals = Vec::new();
            for i in 0..reps {
                let p = engine
                    .simulate(&m, 100, &[70, 30], 2.0, crate::rng::derive_seed(master, i))
                    .unwrap();
                counts.push(p.event_count() as f64);
                finals.push(p.scaled_row(p.times.len() - 1)[1]);
            }
            (counts, finals)
        };
        let (ca, fa) = sample("thinning", 5);
        let (cb, fb) = sample("next-reaction", 6);
        let (_, p_counts) = stats::ks_two_sample(&ca, &cb);
        let (_, p_finals) = stats::ks_two_sample(&fa, &fb);
        assert!(p_counts > 0.01, "count distribution mismatch, p={p_counts}");
        assert!(p_finals > 0.01, "final state mismatch, p={p_finals}");
    }

    #[test]
    fn mean_drift_consistency() {
        let m = sis(2.0, 0.8);
        let x = [0.6, 0.4];
        let x0 = [60i64, 40];
        let n = 100u64;
        let dt = 0.01;
        let drift = m.drift(0.0, &x).unwrap();
        let engine = engine_by_name("thinning").unwrap();
        let reps = 4000;
        let mut disp = vec![Vec::with_capacity(reps); 2];
        for i in 0..reps as u64 {
            let p = engine
                .simulate(&m, n, &x0, dt, crate::rng::derive_seed(23, i))
                .unwrap();
            let last = p.scaled_row(p.times.len() - 1);
            for d in 0..2 {
                disp[d].push((last[d] - x[d]) / dt);
            }
        }
        for d in 0..2 {
            let mean = stats::mean(&disp[d]);
            let se = stats::standard_error(&disp[d]);
            assert!(
                (mean - drift[d]).abs() < 3.0 * se + 1e-9,
                "component {d}: {mean} vs {} (se {se})",
                drift[d]
            );
        }
    }

    #[test]
    fn ensemble_self_reference_has_zero_deviation() {
        let m = sis(2.0, 0.8);
        let engine = engine_by_name("thinning").unwrap();
        let grid: Vec<f64> = (0..=20).map(|i| 0.1 * i as f64).collect();
        // the single ensemble path runs under the derived stream (7, 0)
        let p = engine
            .simulate(&m, 50, &[35, 15], 2.0, crate::rng::derive_seed(7, 0))
            .unwrap();
        let reference = p.as_trajectory();
        assert_eq!(p.sup_deviation(&reference, &grid), 0.0);
        let summary = simulate_ensemble(
            &m,
            engine.as_ref(),
            50,
            &[35, 15],
            2.0,
            1,
            &grid,
            Some(&reference),
            7,
        )
        .unwrap();
        assert_eq!(summary.sup_deviations, vec![0.0]);
    }

    #[test]
    fn ensemble_reproducible_and_thread_independent() {
        let m = sis(2.0, 0.8);
        let engine = engine_by_name("next-reaction").unwrap();
        let grid: Vec<f64> = (0..=10).map(|i| 0.2 * i as f64).collect();
        let a = simulate_ensemble(&m, engine.as_ref(), 100, &[70, 30], 2.0, 20, &grid, None, 42)
            .unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool
            .install(|| {
                simulate_ensemble(&m, engine.as_ref(), 100, &[70, 30], 2.0, 20, &grid, None, 42)
            })
            .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.path_count, 20);
        assert!(a.variance.iter().all(|&v| v >= 0.0));
        for (i, &t) in grid.iter().enumerate() {
            assert_relative_eq!(a.time_grid[i], t);
        }
    }

    #[test]
    fn unknown_engine_name_is_none() {
        assert!(engine_by_name("gillespie-approx").is_none());
        assert_eq!(engine_names().len(), 2);
    }
}
