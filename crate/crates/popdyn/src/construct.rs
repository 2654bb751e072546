//! Reverse construction: realize a bounded polynomial vector field as a
//! population process.
//!
//! A field on `[0,1]^{d-1}` is decomposed as `F = P - N` with `P, N >= 0`;
//! each component gets a channel moving one agent from a reservoir class into
//! class `i` at rate `alpha * P_i` and a mirrored channel at `alpha * N_i`.
//! The mean-field drift of the resulting process restricted to classes
//! `1..d-1` is exactly `alpha * F`, so the scaled process shadows the target
//! dynamics time-dilated by `alpha`. The reservoir conserves the agent total;
//! it is sized at `(d-1) * n` units so every class count stays nonnegative
//! anywhere in the unit box.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Domain, PopulationModel, TransitionChannel};
use crate::poly::{ChannelRate, Polynomial};

/// Per-axis affine map from an original box onto `[0, B]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub b: f64,
}

/// Builds the map sending `[lo_i, hi_i]` onto `[0, B]` per axis.
pub fn affine_rescale(lo: &[f64], hi: &[f64], b: f64) -> Result<AffineMap> {
    if lo.len() != hi.len() || lo.is_empty() {
        return Err(Error::Domain("box bounds must be nonempty and match".into()));
    }
    if !(b > 0.0) {
        return Err(Error::Domain("target box size must be positive".into()));
    }
    for (i, (&l, &h)) in lo.iter().zip(hi).enumerate() {
        if !(h > l) || !l.is_finite() || !h.is_finite() {
            return Err(Error::Domain(format!("axis {i}: degenerate interval [{l}, {h}]")));
        }
    }
    Ok(AffineMap { lo: lo.to_vec(), hi: hi.to_vec(), b })
}

impl AffineMap {
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Original coordinates to `[0, B]`.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&xi, (&l, &h))| (xi - l) * self.b / (h - l))
            .collect()
    }

    /// `[0, B]` back to original coordinates.
    pub fn inverse(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&ui, (&l, &h))| l + ui * (h - l) / self.b)
            .collect()
    }

    /// Per-axis derivative of the forward map.
    pub fn scales(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&l, &h)| self.b / (h - l))
            .collect()
    }
}

/// A polynomial vector field with time-varying coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorField {
    pub dim: usize,
    pub components: Vec<Polynomial>,
}

impl VectorField {
    pub fn new(components: Vec<Polynomial>) -> Result<Self> {
        let dim = components.len();
        if dim == 0 {
            return Err(Error::Model("field needs at least one component".into()));
        }
        for (i, c) in components.iter().enumerate() {
            if c.dim != dim {
                return Err(Error::Model(format!(
                    "component {i} has dimension {} instead of {dim}",
                    c.dim
                )));
            }
        }
        Ok(VectorField { dim, components })
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.eval(t, x)).collect()
    }

    /// The field expressed in the rescaled coordinates `u = map.forward(x)`:
    /// `du_i/dt = scale_i * F_i(map.inverse(u))`.
    pub fn rescaled(&self, map: &AffineMap) -> Result<VectorField> {
        if map.dim() != self.dim {
            return Err(Error::Model("map dimension mismatch".into()));
        }
        let scales = map.scales();
        let inv_scale: Vec<f64> = scales.iter().map(|s| 1.0 / s).collect();
        let components = self
            .components
            .iter()
            .zip(&scales)
            .map(|(c, &s)| c.substitute_affine(&inv_scale, &map.lo).scaled(s))
            .collect();
        VectorField::new(components)
    }
}

const GRID_TOL: f64 = 1e-12;
const VALIDATION_TIMES: usize = 17;
const VALIDATION_HORIZON: f64 = 100.0;

fn validation_grid(dim: usize) -> Vec<Vec<f64>> {
    Domain::Box { lo: vec![0.0; dim], hi: vec![1.0; dim] }.sample_points(4096)
}

/// How to split the field into nonnegative parts.
pub enum DecomposeMode {
    /// `P = max(F, 0)`, `N = max(-F, 0)`.
    Auto,
    /// Caller-supplied pair, validated on a grid.
    User { pos: Vec<Polynomial>, neg: Vec<Polynomial> },
}

/// A validated `F = P - N` split over `[0,1]^{d-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDecomposition {
    pub dim: usize,
    pub pos: Vec<ChannelRate>,
    pub neg: Vec<ChannelRate>,
}

/// Splits `field` into nonnegative parts over the unit box.
pub fn decompose_field(field: &VectorField, mode: DecomposeMode) -> Result<FieldDecomposition> {
    match mode {
        DecomposeMode::Auto => Ok(FieldDecomposition {
            dim: field.dim,
            pos: field.components.iter().map(|c| ChannelRate::PosPart(c.clone())).collect(),
            neg: field.components.iter().map(|c| ChannelRate::NegPart(c.clone())).collect(),
        }),
        DecomposeMode::User { pos, neg } => {
            if pos.len() != field.dim || neg.len() != field.dim {
                return Err(Error::Model("user pair must cover every component".into()));
            }
            let grid = validation_grid(field.dim);
            for i in 0..field.dim {
                for x in &grid {
                    for k in 0..VALIDATION_TIMES {
                        let t = VALIDATION_HORIZON * k as f64 / (VALIDATION_TIMES - 1) as f64;
                        let (p, nv) = (pos[i].eval(t, x), neg[i].eval(t, x));
                        if p < -GRID_TOL || nv < -GRID_TOL {
                            return Err(Error::Model(format!(
                                "user pair component {i} negative at t={t}, x={x:?}"
                            )));
                        }
                        let f = field.components[i].eval(t, x);
                        if (p - nv - f).abs() > GRID_TOL {
                            return Err(Error::Model(format!(
                                "user pair component {i} mismatch {} at t={t}, x={x:?}",
                                (p - nv - f).abs()
                            )));
                        }
                    }
                }
            }
            Ok(FieldDecomposition {
                dim: field.dim,
                pos: pos.into_iter().map(ChannelRate::Poly).collect(),
                neg: neg.into_iter().map(ChannelRate::Poly).collect(),
            })
        }
    }
}

/// Where a constructed model came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Procedure1,
    Procedure2,
    LorenzPreset,
}

/// A population model realizing a vector field, plus its construction
/// parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructedModel {
    pub model: PopulationModel,
    pub alpha: f64,
    pub n: u64,
    pub n_scaled: bool,
    pub provenance: Provenance,
}

impl ConstructedModel {
    /// Number of agent classes including the reservoir.
    pub fn classes(&self) -> usize {
        self.model.dim
    }

    /// Lattice state for class densities `u` in the unit box; the reservoir
    /// takes the remaining agents so the total is exactly `(d-1) * n`.
    pub fn initial_state(&self, u: &[f64]) -> Result<Vec<i64>> {
        let dm = self.classes() - 1;
        if u.len() != dm {
            return Err(Error::Domain("initial density dimension mismatch".into()));
        }
        if u.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::Domain("initial densities must lie in [0, 1]".into()));
        }
        let mut k: Vec<i64> = u.iter().map(|&v| (v * self.n as f64).round() as i64).collect();
        let total = (dm as i64) * (self.n as i64);
        let used: i64 = k.iter().sum();
        k.push(total - used);
        Ok(k)
    }
}

fn embed(rate: &ChannelRate, dim: usize) -> ChannelRate {
    let pad = |p: &Polynomial| -> Polynomial {
        let terms = p
            .terms
            .iter()
            .map(|t| {
                let mut powers = t.powers.clone();
                powers.resize(dim, 0);
                crate::poly::PolyTerm { scale: t.scale, powers, rate: t.rate.clone() }
            })
            .collect();
        Polynomial { dim, terms }
    };
    match rate {
        ChannelRate::Poly(p) => ChannelRate::Poly(pad(p)),
        ChannelRate::PosPart(p) => ChannelRate::PosPart(pad(p)),
        ChannelRate::NegPart(p) => ChannelRate::NegPart(pad(p)),
    }
}

fn reservoir_channels(
    dec_dim: usize,
    rates: &[(usize, i64, ChannelRate)],
) -> Vec<TransitionChannel> {
    let d = dec_dim + 1;
    rates
        .iter()
        .map(|(i, dir, rate)| {
            let mut jump = vec![0i64; d];
            jump[*i] = *dir;
            jump[d - 1] = -dir;
            TransitionChannel { jump: jump.clone(), rate: embed(rate, d) }
        })
        .collect()
}

fn assemble(
    dec_dim: usize,
    channel_rates: Vec<(usize, i64, ChannelRate)>,
    alpha: f64,
    n: u64,
    with_n_scaling: bool,
    provenance: Provenance,
) -> Result<ConstructedModel> {
    if !(alpha > 0.0) {
        return Err(Error::Model("alpha must be positive".into()));
    }
    if dec_dim == 0 {
        return Err(Error::Model("need at least two classes".into()));
    }
    if n < (dec_dim as u64) + 1 {
        return Err(Error::Model("n must be at least the class count".into()));
    }
    let scale = if with_n_scaling { alpha } else { alpha / n as f64 };
    let scaled: Vec<(usize, i64, ChannelRate)> = channel_rates
        .into_iter()
        .map(|(i, dir, r)| (i, dir, r.scaled(scale)))
        .collect();
    let channels = reservoir_channels(dec_dim, &scaled);
    let d = dec_dim + 1;
    let mut hi = vec![1.0; d];
    hi[d - 1] = dec_dim as f64;
    let model = PopulationModel::new(
        Domain::Box { lo: vec![0.0; d], hi },
        channels,
        Some(vec![1; d]),
    )?;
    Ok(ConstructedModel { model, alpha, n, n_scaled: with_n_scaling, provenance })
}

/// Procedure 1: one channel pair per class from a validated decomposition.
pub fn build_population_model(
    dec: &FieldDecomposition,
    alpha: f64,
    n: u64,
    with_n_scaling: bool,
) -> Result<ConstructedModel> {
    let mut rates = Vec::with_capacity(2 * dec.dim);
    for i in 0..dec.dim {
        rates.push((i, 1i64, dec.pos[i].clone()));
        rates.push((i, -1i64, dec.neg[i].clone()));
    }
    assemble(dec.dim, rates, alpha, n, with_n_scaling, Provenance::Procedure1)
}

/// Procedure 2: signed channels directly from the field, pruning directions
/// that are impossible because the component is sign-definite on the grid.
pub fn build_sign_model(
    field: &VectorField,
    alpha: f64,
    n: u64,
    with_n_scaling: bool,
) -> Result<ConstructedModel> {
    let grid = validation_grid(field.dim);
    let mut rates = Vec::new();
    for (i, comp) in field.components.iter().enumerate() {
        let mut has_pos = false;
        let mut has_neg = false;
        for x in &grid {
            for k in 0..VALIDATION_TIMES {
                let t = VALIDATION_HORIZON * k as f64 / (VALIDATION_TIMES - 1) as f64;
                let f = comp.eval(t, x);
                has_pos |= f > GRID_TOL;
                has_neg |= f < -GRID_TOL;
            }
        }
        if has_pos || !has_neg {
            rates.push((i, 1i64, ChannelRate::PosPart(comp.clone())));
        }
        if has_neg {
            rates.push((i, -1i64, ChannelRate::NegPart(comp.clone())));
        }
    }
    assemble(field.dim, rates, alpha, n, with_n_scaling, Provenance::Procedure2)
}

/// The Lorenz field `(a(y-x), x(b-z)-y, xy-cz)` in original coordinates.
pub fn lorenz_field(a: f64, b: f64, c: f64) -> VectorField {
    let f1 = Polynomial::from_monomials(3, &[(a, &[0, 1, 0]), (-a, &[1, 0, 0])]);
    let f2 = Polynomial::from_monomials(
        3,
        &[(b, &[1, 0, 0]), (-1.0, &[1, 0, 1]), (-1.0, &[0, 1, 0])],
    );
    let f3 = Polynomial::from_monomials(3, &[(1.0, &[1, 1, 0]), (-c, &[0, 0, 1])]);
    VectorField::new(vec![f1, f2, f3]).unwrap()
}

/// Default invariant box used to rescale the Lorenz attractor into the unit
/// cube (standard parameter attractor bounds).
pub fn lorenz_default_box() -> (Vec<f64>, Vec<f64>) {
    (vec![-20.0, -27.0, 0.0], vec![20.0, 27.0, 50.0])
}

/// The 4-class Lorenz population model: the Lorenz field rescaled into the
/// unit cube by `invariant_box` (default attractor bounds) and realized by
/// procedure 1 with the positive/negative-part decomposition.
pub fn lorenz_model(
    a: f64,
    b: f64,
    c_param: f64,
    alpha: f64,
    n: u64,
    invariant_box: Option<(Vec<f64>, Vec<f64>)>,
) -> Result<(ConstructedModel, AffineMap)> {
    if !(a > 0.0) || !(b > 0.0) || !(c_param > 0.0) {
        return Err(Error::Model("Lorenz parameters must be positive".into()));
    }
    let (lo, hi) = invariant_box.unwrap_or_else(lorenz_default_box);
    let map = affine_rescale(&lo, &hi, 1.0)?;
    let field = lorenz_field(a, b, c_param).rescaled(&map)?;
    let dec = decompose_field(&field, DecomposeMode::Auto)?;
    let mut cm = build_population_model(&dec, alpha, n, true)?;
    cm.provenance = Provenance::LorenzPreset;
    Ok((cm, map))
}

/// Largest drift-identity error `max |drift_{1..d-1} - alpha * F|` over
/// `samples` pseudo-random `(t, x)` points in the unit box.
pub fn drift_identity_max_error(
    cm: &ConstructedModel,
    field: &VectorField,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    use rand::Rng;
    let mut rng = crate::rng::stream_rng(seed, 0);
    let dm = cm.classes() - 1;
    if field.dim != dm {
        return Err(Error::Domain("field dimension mismatch".into()));
    }
    let scale = if cm.n_scaled { cm.alpha } else { cm.alpha / cm.n as f64 };
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let mut x: Vec<f64> = (0..dm).map(|_| rng.random::<f64>()).collect();
        let used: f64 = x.iter().sum();
        x.push(dm as f64 - used);
        let t = 100.0 * rng.random::<f64>();
        let drift = cm.model.drift(t, &x)?;
        let f = field.eval(t, &x[..dm]);
        for i in 0..dm {
            worst = worst.max((drift[i] - scale * f[i]).abs());
        }
    }
    Ok(worst)
}
