//! Adaptive Dormand-Prince 5(4) integration with dense output.

use crate::error::{Error, Result};

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];
// Dense-output coefficients (Hairer, Norsett & Wanner).
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const MAX_STEPS: usize = 10_000_000;

/// Dense-output ODE solution on an adaptive grid.
///
/// Between accepted steps the solution is represented by the standard
/// quartic interpolant of the Dormand-Prince pair, so the trajectory can be
/// evaluated at any time in its span.
#[derive(Debug, Clone)]
pub struct SampledTrajectory {
    pub dim: usize,
    /// Accepted step times, `ts[0]` is the initial time.
    pub ts: Vec<f64>,
    /// States at step times, flattened row-major.
    pub ys: Vec<f64>,
    /// Per-step interpolation coefficients: 5 vectors of length `dim` per step.
    dense: Vec<f64>,
    /// Per-step local error estimates (scaled norm).
    pub step_errors: Vec<f64>,
}

impl SampledTrajectory {
    /// A right-continuous step function: on `[ts[i], ts[i+1])` the value is
    /// row `i` of `ys`.
    pub fn piecewise_constant(dim: usize, ts: Vec<f64>, ys: Vec<f64>) -> Self {
        assert_eq!(ys.len(), ts.len() * dim);
        let steps = ts.len().saturating_sub(1);
        let mut dense = Vec::with_capacity(steps * 5 * dim);
        for i in 0..steps {
            dense.extend_from_slice(&ys[i * dim..(i + 1) * dim]);
            dense.extend(std::iter::repeat(0.0).take(4 * dim));
        }
        SampledTrajectory { dim, ts, ys, dense, step_errors: vec![0.0; steps] }
    }

    pub fn start_time(&self) -> f64 {
        self.ts[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.ts.last().unwrap()
    }

    pub fn state_at_step(&self, i: usize) -> &[f64] {
        &self.ys[i * self.dim..(i + 1) * self.dim]
    }

    /// Evaluates the interpolant at `t` (clamped to the span).
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, &mut out);
        out
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let t = t.clamp(self.start_time(), self.end_time());
        if self.ts.len() == 1 {
            out.copy_from_slice(self.state_at_step(0));
            return;
        }
        // find step containing t; exact node hits use the stored row so
        // right-continuous step trajectories evaluate correctly
        let mut i = match self
            .ts
            .binary_search_by(|v| v.partial_cmp(&t).unwrap())
        {
            Ok(i) => {
                out.copy_from_slice(self.state_at_step(i));
                return;
            }
            Err(i) => i - 1,
        };
        if i >= self.ts.len() - 1 {
            i = self.ts.len() - 2;
        }
        let h = self.ts[i + 1] - self.ts[i];
        let theta = if h == 0.0 { 0.0 } else { (t - self.ts[i]) / h };
        let d = self.dim;
        let base = i * 5 * d;
        let r1 = &self.dense[base..base + d];
        let r2 = &self.dense[base + d..base + 2 * d];
        let r3 = &self.dense[base + 2 * d..base + 3 * d];
        let r4 = &self.dense[base + 3 * d..base + 4 * d];
        let r5 = &self.dense[base + 4 * d..base + 5 * d];
        let th1 = 1.0 - theta;
        for k in 0..d {
            out[k] = r1[k] + theta * (r2[k] + th1 * (r3[k] + theta * (r4[k] + th1 * r5[k])));
        }
    }

    /// Samples the trajectory on an evenly spaced grid of `points` values.
    pub fn sample_grid(&self, points: usize) -> (Vec<f64>, Vec<f64>) {
        let n = points.max(2);
        let (t0, t1) = (self.start_time(), self.end_time());
        let mut ts = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n * self.dim);
        for i in 0..n {
            let t = t0 + (t1 - t0) * (i as f64) / ((n - 1) as f64);
            ts.push(t);
            ys.extend(self.eval(t));
        }
        (ts, ys)
    }

    /// Maximum reported local error estimate.
    pub fn max_step_error(&self) -> f64 {
        self.step_errors.iter().cloned().fold(0.0, f64::max)
    }
}

fn dense_coeffs(d: usize, h: f64, y0: &[f64], y1: &[f64], k: &[Vec<f64>], out: &mut Vec<f64>) {
    for i in 0..d {
        out.push(y0[i]);
    }
    for i in 0..d {
        out.push(y1[i] - y0[i]);
    }
    for i in 0..d {
        out.push(h * k[0][i] - (y1[i] - y0[i]));
    }
    for i in 0..d {
        let dy = y1[i] - y0[i];
        out.push(dy - h * k[6][i] - (h * k[0][i] - dy));
    }
    for i in 0..d {
        let mut s = 0.0;
        for (j, dj) in D.iter().enumerate() {
            s += dj * k[j][i];
        }
        out.push(h * s);
    }
}

/// Integrates `dy/dt = field(t, y)` over `t_span` with adaptive step size.
pub fn integrate<F>(
    mut field: F,
    x0: &[f64],
    t_span: (f64, f64),
    rtol: f64,
    atol: f64,
) -> Result<SampledTrajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let (t0, t1) = t_span;
    if !(rtol > 0.0) || !(atol > 0.0) {
        return Err(Error::Integration { t: t0, msg: "tolerances must be positive".into() });
    }
    if !(t1 > t0) {
        return Err(Error::Integration { t: t0, msg: "empty time span".into() });
    }
    let d = x0.len();
    let span = t1 - t0;
    let mut t = t0;
    let mut y = x0.to_vec();
    let mut h = initial_step(&mut field, t0, &y, rtol, atol, span);
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; d]; 7];
    field(t, &y, &mut k[0]);

    let mut traj = SampledTrajectory {
        dim: d,
        ts: vec![t0],
        ys: y.clone(),
        dense: Vec::new(),
        step_errors: Vec::new(),
    };

    let mut ytmp = vec![0.0; d];
    let mut y1 = vec![0.0; d];
    for _ in 0..MAX_STEPS {
        if t >= t1 {
            return Ok(traj);
        }
        if h < span * 1e-14 {
            return Err(Error::Integration { t, msg: "step size underflow".into() });
        }
        if t + h > t1 {
            h = t1 - t;
        }
        // stages 2..7 (k1 already holds the FSAL derivative)
        for s in 1..7 {
            for i in 0..d {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                ytmp[i] = y[i] + h * acc;
            }
            let ts = t + C[s] * h;
            let (head, tail) = k.split_at_mut(s);
            let _ = head;
            field(ts, &ytmp, &mut tail[0]);
        }
        let mut err: f64 = 0.0;
        let mut finite = true;
        for i in 0..d {
            let mut y5 = 0.0;
            let mut y4 = 0.0;
            for j in 0..7 {
                y5 += B5[j] * k[j][i];
                y4 += B4[j] * k[j][i];
            }
            y1[i] = y[i] + h * y5;
            if !y1[i].is_finite() {
                finite = false;
            }
            let sc = atol + rtol * y[i].abs().max(y1[i].abs());
            let e = h * (y5 - y4) / sc;
            err += e * e;
        }
        err = (err / d as f64).sqrt();
        if !finite || !err.is_finite() {
            // retry with a smaller step; treat persistent blowup as failure
            h *= 0.25;
            for i in 0..d {
                k[0][i] = 0.0;
            }
            field(t, &y, &mut k[0]);
            if h < span * 1e-14 {
                return Err(Error::Integration { t, msg: "field evaluation not finite".into() });
            }
            continue;
        }
        if err <= 1.0 {
            // accept
            dense_coeffs(d, h, &y, &y1, &k, &mut traj.dense);
            t += h;
            y.copy_from_slice(&y1);
            traj.ts.push(t);
            traj.ys.extend_from_slice(&y);
            traj.step_errors.push(err);
            k.swap(0, 6); // FSAL
        }
        let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
        h *= fac;
    }
    Err(Error::Integration { t, msg: "maximum step count exceeded".into() })
}

fn initial_step<F>(field: &mut F, t0: f64, y0: &[f64], rtol: f64, atol: f64, span: f64) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let d = y0.len();
    let mut f0 = vec![0.0; d];
    field(t0, y0, &mut f0);
    let d0: f64 = y0
        .iter()
        .map(|&yi| (yi / (atol + rtol * yi.abs())).powi(2))
        .sum::<f64>()
        .sqrt();
    let d1: f64 = f0
        .iter()
        .zip(y0)
        .map(|(&fi, &yi)| (fi / (atol + rtol * yi.abs())).powi(2))
        .sum::<f64>()
        .sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
    h0.min(span)
}

/// Fixed-step RK5 using the same tableau (no error control); used to verify
/// the convergence order on smooth problems.
pub fn integrate_fixed_step<F>(
    mut field: F,
    x0: &[f64],
    t_span: (f64, f64),
    h: f64,
) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let (t0, t1) = t_span;
    let d = x0.len();
    let mut y = x0.to_vec();
    let mut t = t0;
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; d]; 7];
    let mut ytmp = vec![0.0; d];
    let n = ((t1 - t0) / h).round() as usize;
    let h = (t1 - t0) / n as f64;
    for _ in 0..n {
        field(t, &y, &mut k[0]);
        for s in 1..7 {
            for i in 0..d {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                ytmp[i] = y[i] + h * acc;
            }
            let ts = t + C[s] * h;
            let (_, tail) = k.split_at_mut(s);
            field(ts, &ytmp, &mut tail[0]);
        }
        for i in 0..d {
            let mut y5 = 0.0;
            for j in 0..7 {
                y5 += B5[j] * k[j][i];
            }
            y[i] += h * y5;
        }
        t += h;
    }
    Ok(y)
}
