//! Conditional waiting-time distributions and their integrated hazards.
//!
//! The `n`-th entry of a [`HazardSpec`] is the law of `U_{n+1} = T_{n+1} - T_n`
//! given the history up to `T_n`. Laws may be defective (total mass below
//! one), which encodes "no further event" with the missing probability.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WaitingDist {
    Exponential {
        rate: f64,
    },
    /// CDF that is 0 before `knots[0]`, equals `values[i]` at `knots[i]`,
    /// is linear in between and constant at `values.last()` afterwards.
    /// `values[0] > 0` puts an atom at `knots[0]`.
    PiecewiseCdf {
        knots: Vec<f64>,
        values: Vec<f64>,
    },
    /// `mass * inner`; with `inner` absent the mass must be zero.
    Defective {
        mass: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        inner: Option<Box<WaitingDist>>,
    },
    PointMass {
        at: f64,
        mass: f64,
    },
}

impl WaitingDist {
    /// The law with no mass at all: the process stops.
    pub fn never() -> Self {
        WaitingDist::Defective { mass: 0.0, inner: None }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::invalid("hazard", reason));
        match self {
            WaitingDist::Exponential { rate } => {
                if !(rate.is_finite() && *rate > 0.0) {
                    return bad(format!("exponential rate {rate} must be > 0"));
                }
            }
            WaitingDist::PiecewiseCdf { knots, values } => {
                if knots.is_empty() || knots.len() != values.len() {
                    return bad("piecewise CDF needs matching, non-empty knots and values".into());
                }
                if !(knots[0].is_finite() && knots[0] > 0.0) {
                    return bad(format!("first knot {} must be > 0", knots[0]));
                }
                if knots.windows(2).any(|w| w[1] <= w[0] || !w[1].is_finite()) {
                    return bad("knots must be strictly increasing".into());
                }
                if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
                    return bad("CDF values must lie in [0, 1]".into());
                }
                if values.windows(2).any(|w| w[1] < w[0]) {
                    return bad("CDF values must be non-decreasing".into());
                }
            }
            WaitingDist::Defective { mass, inner } => {
                if !(0.0..=1.0).contains(mass) {
                    return bad(format!("defective mass {mass} must lie in [0, 1]"));
                }
                match inner {
                    Some(d) => d.validate()?,
                    None if *mass > 0.0 => return bad("defective law with positive mass needs `inner`".into()),
                    None => {}
                }
            }
            WaitingDist::PointMass { at, mass } => {
                if !(at.is_finite() && *at > 0.0) {
                    return bad(format!("point mass location {at} must be > 0"));
                }
                if !(0.0..=1.0).contains(mass) {
                    return bad(format!("point mass {mass} must lie in [0, 1]"));
                }
            }
        }
        Ok(())
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            WaitingDist::Exponential { .. } => 1.0,
            WaitingDist::PiecewiseCdf { values, .. } => *values.last().unwrap_or(&0.0),
            WaitingDist::Defective { mass, inner } => inner.as_ref().map_or(0.0, |d| mass * d.total_mass()),
            WaitingDist::PointMass { mass, .. } => *mass,
        }
    }

    /// `F(x) = P(U <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            WaitingDist::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            WaitingDist::PiecewiseCdf { knots, values } => {
                if x < knots[0] {
                    return 0.0;
                }
                let i = knots.partition_point(|&k| k <= x);
                if i == knots.len() {
                    return values[i - 1];
                }
                let (k0, k1) = (knots[i - 1], knots[i]);
                let (v0, v1) = (values[i - 1], values[i]);
                v0 + (v1 - v0) * (x - k0) / (k1 - k0)
            }
            WaitingDist::Defective { mass, inner } => inner.as_ref().map_or(0.0, |d| mass * d.cdf(x)),
            WaitingDist::PointMass { at, mass } => {
                if x >= *at {
                    *mass
                } else {
                    0.0
                }
            }
        }
    }

    /// Atoms `(location, size)` in increasing order.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        match self {
            WaitingDist::Exponential { .. } => vec![],
            WaitingDist::PiecewiseCdf { knots, values } => {
                if values[0] > 0.0 {
                    vec![(knots[0], values[0])]
                } else {
                    vec![]
                }
            }
            WaitingDist::Defective { mass, inner } => {
                inner.as_ref().map(|d| d.atoms().into_iter().map(|(x, p)| (x, p * mass)).collect()).unwrap_or_default()
            }
            WaitingDist::PointMass { at, mass } => {
                if *mass > 0.0 {
                    vec![(*at, *mass)]
                } else {
                    vec![]
                }
            }
        }
    }

    /// Integrated hazard `H(u) = \int_{[0,u]} F(dx) / (1 - F(x-))`.
    ///
    /// Between atoms the law is continuous and the integral is
    /// `-ln(1 - F)`; an atom of size `p` at `x` adds `p / (1 - F(x-))`.
    /// Returns `None` once the hazard has diverged, i.e. if `F` reached one
    /// at some `x < u` or continuously at `u`.
    pub fn integrated_hazard(&self, u: f64) -> Option<f64> {
        self.hazard_upto(u, true)
    }

    /// Left limit `H(u-)`: as [`integrated_hazard`](Self::integrated_hazard)
    /// without an atom sitting exactly at `u`.
    pub fn integrated_hazard_left(&self, u: f64) -> Option<f64> {
        self.hazard_upto(u, false)
    }

    fn hazard_upto(&self, u: f64, closed: bool) -> Option<f64> {
        if u <= 0.0 {
            return Some(0.0);
        }
        if let WaitingDist::Exponential { rate } = self {
            return Some(rate * u);
        }
        let mut h = 0.0;
        let mut f_left: f64 = 0.0;
        for (x, p) in self.atoms() {
            if x > u || (x == u && !closed) {
                break;
            }
            let f_before = self.cdf(x) - p;
            if f_before >= 1.0 || f_left >= 1.0 {
                return None;
            }
            h += (-f_left).ln_1p() - (-f_before).ln_1p();
            h += p / (1.0 - f_before);
            f_left = self.cdf(x);
            if x == u {
                return Some(h);
            }
        }
        let mut f_u = self.cdf(u);
        if !closed {
            f_u -= self.atoms().iter().find(|a| a.0 == u).map_or(0.0, |a| a.1);
        }
        if f_left >= 1.0 || f_u >= 1.0 {
            return None;
        }
        Some(h + (-f_left).ln_1p() - (-f_u).ln_1p())
    }

    /// Generalized inverse `inf {x : F(x) >= v}`, `None` when `v` exceeds
    /// the total mass ("no further event").
    pub fn quantile(&self, v: f64) -> Option<f64> {
        if v > self.total_mass() {
            return None;
        }
        match self {
            WaitingDist::Exponential { rate } => Some(-(-v).ln_1p() / rate),
            WaitingDist::PiecewiseCdf { knots, values } => {
                if v <= values[0] {
                    return Some(knots[0]);
                }
                let i = values.partition_point(|&y| y < v);
                let (k0, k1) = (knots[i - 1], knots[i]);
                let (v0, v1) = (values[i - 1], values[i]);
                Some(k0 + (v - v0) / (v1 - v0) * (k1 - k0))
            }
            WaitingDist::Defective { mass, inner } => inner.as_ref().and_then(|d| d.quantile(v / mass)),
            WaitingDist::PointMass { at, .. } => Some(*at),
        }
    }
}

/// Sequence of conditional waiting-time laws `F_0, F_1, ...`; the last
/// entry applies to every later index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HazardSpec {
    pub dists: Vec<WaitingDist>,
}

impl HazardSpec {
    pub fn new(dists: Vec<WaitingDist>) -> Result<Self> {
        let spec = Self { dists };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dists.is_empty() {
            return Err(Error::Empty("hazard spec"));
        }
        self.dists.iter().try_for_each(WaitingDist::validate)
    }

    /// `F_n`.
    pub fn dist(&self, n: usize) -> &WaitingDist {
        &self.dists[n.min(self.dists.len() - 1)]
    }
}
