//! Multivariate polynomials with time-varying coefficients.
//!
//! Transition-channel rates are polynomials in the state components whose
//! coefficients are [`RateFunction`]s. The positive/negative-part wrappers
//! cover the reverse-construction decompositions without leaving a closed,
//! boundable representation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rate::RateFunction;

/// One monomial: `scale * rate(t) * prod_i x_i^powers[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyTerm {
    #[serde(default = "one")]
    pub scale: f64,
    pub powers: Vec<u32>,
    #[serde(default = "unit_rate")]
    pub rate: RateFunction,
}

fn one() -> f64 {
    1.0
}

fn unit_rate() -> RateFunction {
    RateFunction::Constant { a: 1.0 }
}

impl PolyTerm {
    pub fn constant_monomial(scale: f64, powers: Vec<u32>) -> Self {
        PolyTerm { scale, powers, rate: unit_rate() }
    }

    fn monomial(&self, x: &[f64]) -> f64 {
        self.powers
            .iter()
            .zip(x)
            .map(|(&p, &xi)| xi.powi(p as i32))
            .product()
    }
}

/// A sum of [`PolyTerm`]s over a state space of fixed dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Polynomial {
    pub dim: usize,
    pub terms: Vec<PolyTerm>,
}

impl Polynomial {
    pub fn new(dim: usize, terms: Vec<PolyTerm>) -> Result<Self> {
        for term in &terms {
            if term.powers.len() != dim {
                return Err(Error::Model(format!(
                    "polynomial term has {} powers, expected {}",
                    term.powers.len(),
                    dim
                )));
            }
            if !term.scale.is_finite() {
                return Err(Error::Model("polynomial term scale must be finite".into()));
            }
        }
        Ok(Polynomial { dim, terms })
    }

    pub fn zero(dim: usize) -> Self {
        Polynomial { dim, terms: Vec::new() }
    }

    /// Constant-in-time polynomial from `(coefficient, powers)` pairs.
    pub fn from_monomials(dim: usize, monomials: &[(f64, &[u32])]) -> Self {
        let terms = monomials
            .iter()
            .map(|(c, p)| PolyTerm::constant_monomial(*c, p.to_vec()))
            .collect();
        Polynomial { dim, terms }
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|term| term.scale * term.rate.value(t) * term.monomial(x))
            .sum()
    }

    /// Interval bounds of the value over `t in [t0, t1]` with the state frozen.
    pub fn bounds_frozen_state(&self, t0: f64, t1: f64, x: &[f64]) -> (f64, f64) {
        let mut lo = 0.0;
        let mut hi = 0.0;
        for term in &self.terms {
            let m = term.scale * term.monomial(x);
            let (rlo, rhi) = term.rate.bounds_on(t0, t1);
            if m >= 0.0 {
                lo += m * rlo;
                hi += m * rhi;
            } else {
                lo += m * rhi;
                hi += m * rlo;
            }
        }
        (lo, hi)
    }

    pub fn scaled(&self, k: f64) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .map(|t| PolyTerm { scale: t.scale * k, ..t.clone() })
            .collect();
        Polynomial { dim: self.dim, terms }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Polynomial { dim: self.dim, terms }
    }

    /// Substitutes `x_i -> scale_i * u_i + shift_i` and returns the polynomial
    /// in `u`. Used by the reverse construction to move a vector field into
    /// the unit box.
    pub fn substitute_affine(&self, scale: &[f64], shift: &[f64]) -> Polynomial {
        assert_eq!(scale.len(), self.dim);
        let mut out: Vec<PolyTerm> = Vec::new();
        for term in &self.terms {
            // expand prod_i (scale_i u_i + shift_i)^{p_i}
            let mut partial: Vec<(f64, Vec<u32>)> = vec![(term.scale, vec![0; self.dim])];
            for (i, &p) in term.powers.iter().enumerate() {
                for _ in 0..p {
                    let mut next = Vec::with_capacity(partial.len() * 2);
                    for (c, pw) in &partial {
                        let mut pw_up = pw.clone();
                        pw_up[i] += 1;
                        next.push((c * scale[i], pw_up));
                        if shift[i] != 0.0 {
                            next.push((c * shift[i], pw.clone()));
                        }
                    }
                    partial = next;
                }
            }
            for (c, pw) in partial {
                out.push(PolyTerm { scale: c, powers: pw, rate: term.rate.clone() });
            }
        }
        let mut poly = Polynomial { dim: self.dim, terms: out };
        poly.merge_constant_terms();
        poly
    }

    /// Merges terms with identical powers and a constant unit rate.
    fn merge_constant_terms(&mut self) {
        use std::collections::BTreeMap;
        let mut merged: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        let mut rest = Vec::new();
        for term in self.terms.drain(..) {
            if term.rate == unit_rate() {
                *merged.entry(term.powers).or_insert(0.0) += term.scale;
            } else {
                rest.push(term);
            }
        }
        for (powers, scale) in merged {
            if scale != 0.0 {
                rest.push(PolyTerm::constant_monomial(scale, powers));
            }
        }
        self.terms = rest;
    }
}

/// A transition-channel rate expression.
///
/// `PosPart`/`NegPart` wrap a polynomial `p` as `max(p, 0)` / `max(-p, 0)`;
/// they arise from automatic vector-field decompositions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelRate {
    Poly(Polynomial),
    PosPart(Polynomial),
    NegPart(Polynomial),
}

impl ChannelRate {
    pub fn dim(&self) -> usize {
        self.inner().dim
    }

    pub fn inner(&self) -> &Polynomial {
        match self {
            ChannelRate::Poly(p) | ChannelRate::PosPart(p) | ChannelRate::NegPart(p) => p,
        }
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> f64 {
        match self {
            ChannelRate::Poly(p) => p.eval(t, x),
            ChannelRate::PosPart(p) => p.eval(t, x).max(0.0),
            ChannelRate::NegPart(p) => (-p.eval(t, x)).max(0.0),
        }
    }

    /// Upper bound of the rate over `t in [t0, t1]` at a frozen state.
    pub fn upper_bound_window(&self, t0: f64, t1: f64, x: &[f64]) -> f64 {
        let (lo, hi) = self.inner().bounds_frozen_state(t0, t1, x);
        match self {
            ChannelRate::Poly(_) => hi,
            ChannelRate::PosPart(_) => hi.max(0.0),
            ChannelRate::NegPart(_) => (-lo).max(0.0),
        }
    }

    pub fn scaled(&self, k: f64) -> ChannelRate {
        match self {
            ChannelRate::Poly(p) => ChannelRate::Poly(p.scaled(k)),
            ChannelRate::PosPart(p) => ChannelRate::PosPart(p.scaled(k)),
            ChannelRate::NegPart(p) => ChannelRate::NegPart(p.scaled(k)),
        }
    }
}
