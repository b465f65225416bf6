//! Parametric conditional intensities and their exact integrals.
//!
//! Every model here has, between two consecutive events, an intensity of the
//! form `rate + sum_j amp_j * exp(-decay_j * (t - t0))` with non-negative
//! coefficients. That shape is what [`Profile`] stores; it integrates in
//! closed form and is non-increasing in `t`, which the thinning sampler
//! relies on.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::EventSequence;

/// Deterministic baseline `mu(t) = a + b * exp(-c t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Baseline {
    pub fn constant(a: f64) -> Self {
        Self { a, b: 0.0, c: 0.0 }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.a + self.b * (-self.c * t).exp()
    }

    /// `\int_0^t mu(s) ds`.
    pub fn integral(&self, t: f64) -> f64 {
        self.a * t + self.b * decay_integral(self.c, t)
    }
}

/// Conditional intensity `lambda_t` of a simple counting process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum IntensityModel {
    /// Homogeneous Poisson rate.
    Constant { rate: f64 },
    /// Inhomogeneous Poisson with `mu(t) = a + b e^{-ct}`.
    Baseline { a: f64, b: f64, c: f64 },
    /// `mu(t) + phi0 * N(t-)`: self-excitation with a non-decaying kernel.
    HawkesConst { a: f64, b: f64, c: f64, phi0: f64 },
    /// `mu(t) + sum_{t_i < t} alpha e^{-beta (t - t_i)}`.
    HawkesExp { a: f64, b: f64, c: f64, alpha: f64, beta: f64 },
    /// Rate `rate` until the first event, zero afterwards.
    OneShot { rate: f64 },
}

/// Parametric family used by the fitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Constant,
    Baseline,
    HawkesConst,
    HawkesExp,
}

impl Family {
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Family::Constant => &["rate"],
            Family::Baseline => &["a", "b", "c"],
            Family::HawkesConst => &["a", "b", "c", "phi0"],
            Family::HawkesExp => &["a", "b", "c", "alpha", "beta"],
        }
    }

    /// Model from a parameter vector ordered as [`Family::param_names`].
    pub fn build(self, p: &[f64]) -> Result<IntensityModel> {
        if p.len() != self.param_names().len() {
            return Err(Error::invalid(
                "params",
                format!("{:?} takes {} parameters, got {}", self, self.param_names().len(), p.len()),
            ));
        }
        let m = match self {
            Family::Constant => IntensityModel::Constant { rate: p[0] },
            Family::Baseline => IntensityModel::Baseline { a: p[0], b: p[1], c: p[2] },
            Family::HawkesConst => IntensityModel::HawkesConst { a: p[0], b: p[1], c: p[2], phi0: p[3] },
            Family::HawkesExp => IntensityModel::HawkesExp { a: p[0], b: p[1], c: p[2], alpha: p[3], beta: p[4] },
        };
        m.validate()?;
        Ok(m)
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(Family::Constant),
            "baseline" => Ok(Family::Baseline),
            "hawkes_const" => Ok(Family::HawkesConst),
            "hawkes_exp" => Ok(Family::HawkesExp),
            other => Err(Error::invalid("family", format!("unknown family `{other}`"))),
        }
    }
}

impl IntensityModel {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.params() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(name, format!("{v} must be finite and >= 0")));
            }
        }
        match *self {
            IntensityModel::HawkesExp { beta, .. } if beta <= 0.0 => Err(Error::invalid("beta", "decay must be > 0")),
            IntensityModel::OneShot { rate } if rate <= 0.0 => Err(Error::invalid("rate", "one-shot rate must be > 0")),
            _ => Ok(()),
        }
    }

    /// Named parameters, in the order used by [`Family::build`].
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            IntensityModel::Constant { rate } | IntensityModel::OneShot { rate } => vec![("rate", rate)],
            IntensityModel::Baseline { a, b, c } => vec![("a", a), ("b", b), ("c", c)],
            IntensityModel::HawkesConst { a, b, c, phi0 } => {
                vec![("a", a), ("b", b), ("c", c), ("phi0", phi0)]
            }
            IntensityModel::HawkesExp { a, b, c, alpha, beta } => {
                vec![("a", a), ("b", b), ("c", c), ("alpha", alpha), ("beta", beta)]
            }
        }
    }

    pub fn family(&self) -> Option<Family> {
        match self {
            IntensityModel::Constant { .. } => Some(Family::Constant),
            IntensityModel::Baseline { .. } => Some(Family::Baseline),
            IntensityModel::HawkesConst { .. } => Some(Family::HawkesConst),
            IntensityModel::HawkesExp { .. } => Some(Family::HawkesExp),
            IntensityModel::OneShot { .. } => None,
        }
    }

    pub fn baseline(&self) -> Baseline {
        match *self {
            IntensityModel::Constant { rate } | IntensityModel::OneShot { rate } => Baseline::constant(rate),
            IntensityModel::Baseline { a, b, c }
            | IntensityModel::HawkesConst { a, b, c, .. }
            | IntensityModel::HawkesExp { a, b, c, .. } => Baseline { a, b, c },
        }
    }

    /// Intensity profile valid from `t0` up to the next event, given the
    /// history summarized in `state` (which must be advanced to `t0`).
    pub(crate) fn profile(&self, state: &HistoryState, t0: f64) -> Profile {
        let mut p = Profile::default();
        let base = |p: &mut Profile, a: f64, b: f64, c: f64| {
            p.rate += a;
            if c == 0.0 {
                p.rate += b;
            } else {
                p.push(b * (-c * t0).exp(), c);
            }
        };
        match *self {
            IntensityModel::Constant { rate } => p.rate = rate,
            IntensityModel::OneShot { rate } => {
                if state.count == 0 {
                    p.rate = rate;
                }
            }
            IntensityModel::Baseline { a, b, c } => base(&mut p, a, b, c),
            IntensityModel::HawkesConst { a, b, c, phi0 } => {
                base(&mut p, a, b, c);
                p.rate += phi0 * state.count as f64;
            }
            IntensityModel::HawkesExp { a, b, c, alpha, .. } => {
                base(&mut p, a, b, c);
                if let Some(beta) = state.decay {
                    p.push(alpha * state.excitation, beta);
                }
            }
        }
        p
    }

    pub(crate) fn initial_state(&self) -> HistoryState {
        HistoryState {
            count: 0,
            at: 0.0,
            excitation: 0.0,
            decay: match *self {
                IntensityModel::HawkesExp { beta, .. } => Some(beta),
                _ => None,
            },
        }
    }
}

impl fmt::Display for IntensityModel {
    /// Inline form accepted by [`FromStr`], e.g. `hawkes_const:0.3,0.2,0.1,0.2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self {
            IntensityModel::Constant { .. } => "constant",
            IntensityModel::Baseline { .. } => "baseline",
            IntensityModel::HawkesConst { .. } => "hawkes_const",
            IntensityModel::HawkesExp { .. } => "hawkes_exp",
            IntensityModel::OneShot { .. } => "one_shot",
        };
        let vals: Vec<String> = self.params().iter().map(|(_, v)| v.to_string()).collect();
        write!(f, "{kind}:{}", vals.join(","))
    }
}

impl FromStr for IntensityModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::invalid("model", format!("expected `kind:p1,p2,...`, got `{s}`")))?;
        let vals = rest
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| Error::invalid("model", format!("`{v}` is not a number"))))
            .collect::<Result<Vec<_>>>()?;
        let model = if kind == "one_shot" {
            if vals.len() != 1 {
                return Err(Error::invalid("model", "one_shot takes 1 parameter"));
            }
            IntensityModel::OneShot { rate: vals[0] }
        } else {
            return kind.parse::<Family>()?.build(&vals);
        };
        model.validate()?;
        Ok(model)
    }
}

/// `\int_0^s e^{-c u} du`, continuous at `c = 0`.
pub(crate) fn decay_integral(c: f64, s: f64) -> f64 {
    let x = c * s;
    if x.abs() < 1e-8 {
        s * (1.0 - 0.5 * x)
    } else {
        -(-x).exp_m1() / c
    }
}

/// `rate + sum amp_j exp(-decay_j s)` for `s >= 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Profile {
    pub rate: f64,
    terms: [(f64, f64); 2],
    n_terms: usize,
}

impl Profile {
    fn push(&mut self, amp: f64, decay: f64) {
        if amp != 0.0 {
            self.terms[self.n_terms] = (amp, decay);
            self.n_terms += 1;
        }
    }

    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms[..self.n_terms]
    }

    pub fn value(&self, s: f64) -> f64 {
        self.rate + self.terms().iter().map(|&(a, d)| a * (-d * s).exp()).sum::<f64>()
    }

    pub fn integral(&self, s: f64) -> f64 {
        self.rate * s + self.terms().iter().map(|&(a, d)| a * decay_integral(d, s)).sum::<f64>()
    }

    pub fn is_zero(&self) -> bool {
        self.rate == 0.0 && self.n_terms == 0
    }
}

/// Sufficient statistics of the history for every [`IntensityModel`].
#[derive(Debug, Clone, Copy)]
pub(crate) struct HistoryState {
    pub count: usize,
    pub at: f64,
    /// `sum_i exp(-beta (at - t_i))` over past events (HawkesExp only).
    pub excitation: f64,
    pub decay: Option<f64>,
}

impl HistoryState {
    pub fn advance(&mut self, t: f64) {
        if let Some(beta) = self.decay {
            self.excitation *= (-beta * (t - self.at)).exp();
        }
        self.at = t;
    }

    /// Record an event at the current time.
    pub fn push_event(&mut self) {
        self.count += 1;
        self.excitation += 1.0;
    }
}

fn state_after(model: &IntensityModel, times: &[f64], t: f64) -> HistoryState {
    let mut st = model.initial_state();
    for &ti in times {
        st.advance(ti);
        st.push_event();
    }
    st.advance(t);
    st
}

/// `lambda_t` using only events strictly before `t` (left limit at event
/// times).
pub fn intensity_at(model: &IntensityModel, history: &EventSequence, t: f64) -> Result<f64> {
    history.check_time(t)?;
    let k = history.count_before(t);
    Ok(model.profile(&state_after(model, &history.times()[..k], t), t).value(0.0))
}

/// `lambda_{t+}`: the intensity right after `t`, including an event at `t`.
pub fn intensity_right(model: &IntensityModel, history: &EventSequence, t: f64) -> Result<f64> {
    history.check_time(t)?;
    let k = history.count(t);
    Ok(model.profile(&state_after(model, &history.times()[..k], t), t).value(0.0))
}

/// `A_t = \int_0^t lambda_s ds` evaluated in closed form along the path.
pub fn compensator_at(model: &IntensityModel, events: &EventSequence, t: f64) -> Result<f64> {
    events.check_time(t)?;
    Ok(integrate_path(model, events.times(), t))
}

pub(crate) fn integrate_path(model: &IntensityModel, times: &[f64], t: f64) -> f64 {
    let mut st = model.initial_state();
    let mut acc = 0.0;
    let mut left = 0.0;
    for &ti in times {
        if ti >= t {
            break;
        }
        acc += model.profile(&st, left).integral(ti - left);
        st.advance(ti);
        st.push_event();
        left = ti;
    }
    acc + model.profile(&st, left).integral(t - left)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hawkes() -> IntensityModel {
        IntensityModel::HawkesConst { a: 0.3, b: 0.2, c: 0.1, phi0: 0.2 }
    }

    #[test]
    fn hawkes_const_at_zero_is_baseline() {
        let h = EventSequence::empty(10.0).unwrap();
        assert_eq!(intensity_at(&hawkes(), &h, 0.0).unwrap(), 0.5);
    }

    #[test]
    fn constant_rate_ignores_history() {
        let m = IntensityModel::Constant { rate: 2.0 };
        let h = EventSequence::new(5.0, vec![1.0, 2.0]).unwrap();
        for t in [0.0, 1.0, 1.5, 5.0] {
            assert_eq!(intensity_at(&m, &h, t).unwrap(), 2.0);
        }
    }

    #[test]
    fn jump_is_visible_only_after_the_event() {
        let h = EventSequence::new(10.0, vec![1.0]).unwrap();
        let left = intensity_at(&hawkes(), &h, 1.0).unwrap();
        let right = intensity_right(&hawkes(), &h, 1.0).unwrap();
        assert!((right - left - 0.2).abs() < 1e-15);
    }

    #[test]
    fn out_of_domain_time() {
        let h = EventSequence::empty(1.0).unwrap();
        assert!(matches!(intensity_at(&hawkes(), &h, 1.5), Err(Error::Domain { .. })));
        assert!(intensity_at(&hawkes(), &h, -0.1).is_err());
    }

    #[test]
    fn one_shot_switches_off() {
        let m = IntensityModel::OneShot { rate: 3.0 };
        let h = EventSequence::new(5.0, vec![2.0]).unwrap();
        assert_eq!(intensity_at(&m, &h, 2.0).unwrap(), 3.0);
        assert_eq!(intensity_right(&m, &h, 2.0).unwrap(), 0.0);
        assert!((compensator_at(&m, &h, 5.0).unwrap() - 6.0).abs() < 1e-15);
    }

    #[test]
    fn hawkes_exp_decays_between_events() {
        let m = IntensityModel::HawkesExp { a: 1.0, b: 0.0, c: 0.0, alpha: 0.5, beta: 2.0 };
        let h = EventSequence::new(5.0, vec![1.0, 1.5]).unwrap();
        let got = intensity_at(&m, &h, 2.0).unwrap();
        let want = 1.0 + 0.5 * (-2.0f64).exp() + 0.5 * (-1.0f64).exp();
        assert!((got - want).abs() < 1e-14);
    }

    #[test]
    fn baseline_integral_closed_form() {
        let m = IntensityModel::Baseline { a: 0.3, b: 0.2, c: 0.1 };
        let e = EventSequence::empty(10.0).unwrap();
        let want = 3.0 + 2.0 * (1.0 - (-1.0f64).exp());
        assert!((compensator_at(&m, &e, 10.0).unwrap() - want).abs() < 1e-13);
    }

    #[test]
    fn inline_round_trip() {
        let m: IntensityModel = "hawkes_exp:0.5,0,0,0.3,1.5".parse().unwrap();
        assert_eq!(m.to_string().parse::<IntensityModel>().unwrap(), m);
        assert!("hawkes_exp:0.5,0,0,0.3,0".parse::<IntensityModel>().is_err());
        assert!("constant:-1".parse::<IntensityModel>().is_err());
        assert!("poisson:1".parse::<IntensityModel>().is_err());
    }

    #[test]
    fn json_form() {
        let m: IntensityModel =
            serde_json::from_str(r#"{"kind":"hawkes_const","params":{"a":0.3,"b":0.2,"c":0.1,"phi0":0.2}}"#).unwrap();
        assert_eq!(m, hawkes());
        let back = serde_json::to_string(&IntensityModel::Constant { rate: 2.0 }).unwrap();
        assert_eq!(back, r#"{"kind":"constant","params":{"rate":2.0}}"#);
    }
}
