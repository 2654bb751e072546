//! Density-dependent population models with time-varying transition channels.
//!
//! A model is a finite list of channels, each a jump vector `l` together with
//! a density-dependent rate `beta_{l,t}(x)`; the lattice process at scale `n`
//! jumps from `k` to `k + l` at intensity `n * beta_{l,t}(k/n)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{ChannelRate, Polynomial, PolyTerm};
use crate::rate::RateFunction;

/// Horizon used by constructors to validate strict positivity and
/// nonnegativity of the time-varying rates.
pub const VALIDATION_HORIZON: f64 = 100.0;

/// Number of domain sample points used in nonnegativity validation.
pub const VALIDATION_SAMPLES: usize = 10_000;

/// State domain: an axis-aligned box or the simplex `{x >= 0, sum x = total}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Simplex { dim: usize, total: f64 },
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Box { lo, .. } => lo.len(),
            Domain::Simplex { dim, .. } => *dim,
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match self {
            Domain::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(&xi, (&l, &h))| xi >= l - tol && xi <= h + tol),
            Domain::Simplex { total, .. } => {
                x.iter().all(|&xi| xi >= -tol) && (x.iter().sum::<f64>() - total).abs() <= tol * (x.len() as f64)
            }
        }
    }

    /// Deterministic sample of roughly `count` points covering the domain,
    /// including its vertices.
    pub fn sample_points(&self, count: usize) -> Vec<Vec<f64>> {
        let d = self.dim();
        let per_axis = ((count as f64).powf(1.0 / d as f64).ceil() as usize).max(2);
        let mut pts = Vec::new();
        match self {
            Domain::Box { lo, hi } => {
                let mut idx = vec![0usize; d];
                loop {
                    let p: Vec<f64> = (0..d)
                        .map(|i| lo[i] + (hi[i] - lo[i]) * (idx[i] as f64) / ((per_axis - 1) as f64))
                        .collect();
                    pts.push(p);
                    let mut i = 0;
                    loop {
                        idx[i] += 1;
                        if idx[i] < per_axis {
                            break;
                        }
                        idx[i] = 0;
                        i += 1;
                        if i == d {
                            return pts;
                        }
                    }
                }
            }
            Domain::Simplex { dim, total } => {
                // lattice points of the simplex at resolution m
                let mut m = 2usize;
                while count_simplex_lattice(d, m + 1) <= count {
                    m += 1;
                }
                let mut stack: Vec<(Vec<usize>, usize)> = vec![(Vec::new(), m)];
                while let Some((prefix, rem)) = stack.pop() {
                    if prefix.len() == dim - 1 {
                        let mut p: Vec<f64> = prefix
                            .iter()
                            .map(|&k| total * (k as f64) / (m as f64))
                            .collect();
                        p.push(total * (rem as f64) / (m as f64));
                        pts.push(p);
                        continue;
                    }
                    for k in 0..=rem {
                        let mut next = prefix.clone();
                        next.push(k);
                        stack.push((next, rem - k));
                    }
                }
                pts
            }
        }
    }
}

fn count_simplex_lattice(d: usize, m: usize) -> usize {
    // C(m + d - 1, d - 1)
    let mut num = 1usize;
    for i in 1..d {
        num = num.saturating_mul(m + i) / i;
    }
    num
}

/// A jump vector together with its density-dependent rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionChannel {
    pub jump: Vec<i64>,
    pub rate: ChannelRate,
}

/// A density-dependent population model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationModel {
    pub dim: usize,
    pub domain: Domain,
    pub channels: Vec<TransitionChannel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conserved: Option<Vec<i64>>,
}

impl PopulationModel {
    /// Validates and builds a model: dimensions must agree, declared
    /// conservation must annihilate every jump, and every channel rate must be
    /// nonnegative on a sampling grid over the domain and `[0, horizon]`.
    pub fn new(
        domain: Domain,
        channels: Vec<TransitionChannel>,
        conserved: Option<Vec<i64>>,
    ) -> Result<Self> {
        let dim = domain.dim();
        if dim == 0 {
            return Err(Error::Model("model dimension must be positive".into()));
        }
        for (i, ch) in channels.iter().enumerate() {
            if ch.jump.len() != dim || ch.rate.dim() != dim {
                return Err(Error::Model(format!(
                    "channel {i}: jump/rate dimension does not match model dimension {dim}"
                )));
            }
            if ch.jump.iter().all(|&j| j == 0) {
                return Err(Error::Model(format!("channel {i}: zero jump vector")));
            }
        }
        if let Some(w) = &conserved {
            if w.len() != dim {
                return Err(Error::Model("conserved vector dimension mismatch".into()));
            }
            for (i, ch) in channels.iter().enumerate() {
                let dot: i64 = w.iter().zip(&ch.jump).map(|(a, b)| a * b).sum();
                if dot != 0 {
                    return Err(Error::Model(format!(
                        "channel {i}: conserved vector is not orthogonal to jump (w.l = {dot})"
                    )));
                }
            }
        }
        let model = PopulationModel { dim, domain, channels, conserved };
        model.check_nonnegative_rates(VALIDATION_HORIZON)?;
        Ok(model)
    }

    fn check_nonnegative_rates(&self, horizon: f64) -> Result<()> {
        let pts = self.domain.sample_points(VALIDATION_SAMPLES);
        let times = 17;
        for (i, ch) in self.channels.iter().enumerate() {
            for x in &pts {
                for k in 0..times {
                    let t = horizon * (k as f64) / ((times - 1) as f64);
                    let v = ch.rate.eval(t, x);
                    if !v.is_finite() {
                        return Err(Error::Model(format!(
                            "channel {i}: rate is not finite at t={t}, x={x:?}"
                        )));
                    }
                    if v < -1e-12 {
                        return Err(Error::Model(format!(
                            "channel {i}: negative rate {v} at t={t}, x={x:?}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// The drift field `F_t(x) = sum_l l * beta_{l,t}(x)`.
    pub fn drift(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.check_in_domain(x)?;
        let mut f = vec![0.0; self.dim];
        for ch in &self.channels {
            let b = ch.rate.eval(t, x);
            for (fi, &ji) in f.iter_mut().zip(&ch.jump) {
                *fi += (ji as f64) * b;
            }
        }
        Ok(f)
    }

    /// Total event intensity `sum_l n * beta_{l,t}(x)` at scale `n`.
    pub fn total_rate(&self, n: u64, t: f64, x: &[f64]) -> Result<f64> {
        self.check_in_domain(x)?;
        Ok((n as f64) * self.channels.iter().map(|ch| ch.rate.eval(t, x)).sum::<f64>())
    }

    pub fn check_in_domain(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Domain(format!(
                "state dimension {} does not match model dimension {}",
                x.len(),
                self.dim
            )));
        }
        if !self.domain.contains(x, 1e-9) {
            return Err(Error::Domain(format!("state {x:?} outside domain")));
        }
        Ok(())
    }

    /// Viral-propagation (SIS) model on densities `(x, y)` with `x + y = 1`:
    /// infection channel `(-1, +1)` at `lambda(t) x y` and cure channel
    /// `(+1, -1)` at `mu(t) y`.
    pub fn make_sis(lambda: &RateFunction, mu: &RateFunction) -> Result<Self> {
        lambda.check_strictly_positive(VALIDATION_HORIZON)?;
        mu.check_strictly_positive(VALIDATION_HORIZON)?;
        let infection = TransitionChannel {
            jump: vec![-1, 1],
            rate: ChannelRate::Poly(Polynomial::new(
                2,
                vec![PolyTerm { scale: 1.0, powers: vec![1, 1], rate: lambda.clone() }],
            )?),
        };
        let cure = TransitionChannel {
            jump: vec![1, -1],
            rate: ChannelRate::Poly(Polynomial::new(
                2,
                vec![PolyTerm { scale: 1.0, powers: vec![0, 1], rate: mu.clone() }],
            )?),
        };
        Self::new(
            Domain::Simplex { dim: 2, total: 1.0 },
            vec![infection, cure],
            Some(vec![1, 1]),
        )
    }

    /// Logistic growth on a scalar density: birth channel `(+1)` at
    /// `lambda(t) x^2` and death channel `(-1)` at `mu(t) x^2`. The domain is
    /// truncated to `[0, cap]` (default 10) since boxes are finite.
    pub fn make_logistic(lambda: &RateFunction, mu: &RateFunction) -> Result<Self> {
        Self::make_logistic_capped(lambda, mu, 10.0)
    }

    pub fn make_logistic_capped(
        lambda: &RateFunction,
        mu: &RateFunction,
        cap: f64,
    ) -> Result<Self> {
        lambda.check_strictly_positive(VALIDATION_HORIZON)?;
        mu.check_strictly_positive(VALIDATION_HORIZON)?;
        if !(cap > 0.0) {
            return Err(Error::Model("logistic domain cap must be positive".into()));
        }
        let birth = TransitionChannel {
            jump: vec![1],
            rate: ChannelRate::Poly(Polynomial::new(
                1,
                vec![PolyTerm { scale: 1.0, powers: vec![2], rate: lambda.clone() }],
            )?),
        };
        let death = TransitionChannel {
            jump: vec![-1],
            rate: ChannelRate::Poly(Polynomial::new(
                1,
                vec![PolyTerm { scale: 1.0, powers: vec![2], rate: mu.clone() }],
            )?),
        };
        Self::new(Domain::Box { lo: vec![0.0], hi: vec![cap] }, vec![birth, death], None)
    }
}
