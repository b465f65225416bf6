//! Log-likelihood ratio against the unit-rate Poisson process and
//! time-rescaling goodness of fit.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::events::EventSequence;
use crate::model::IntensityModel;
use crate::path::CompensatorPath;

/// `\int_0^t (1 - lambda_s) ds + sum_{T_i <= t} log lambda_{T_i-}`.
///
/// The intensity at an event is its left limit, so a Hawkes model never sees
/// its own jump. An event where the model has zero intensity gives
/// `f64::NEG_INFINITY`.
pub fn log_likelihood_ratio(events: &EventSequence, model: &IntensityModel, t: f64) -> Result<f64> {
    model.validate()?;
    events.check_time(t)?;
    let mut state = model.initial_state();
    let mut left = 0.0;
    let mut compensator = 0.0;
    let mut log_sum = 0.0;
    for &ti in events.times().iter().take_while(|&&ti| ti <= t) {
        let profile = model.profile(&state, left);
        compensator += profile.integral(ti - left);
        let lambda = profile.value(ti - left);
        if lambda <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        log_sum += lambda.ln();
        state.advance(ti);
        state.push_event();
        left = ti;
    }
    compensator += model.profile(&state, left).integral(t - left);
    Ok(t - compensator + log_sum)
}

/// Maps events through the compensator: `tau_i = A(T_i)` on the horizon
/// `A(horizon)`. Under the true compensator the result is unit Poisson.
pub fn time_rescale(events: &EventSequence, compensator: &CompensatorPath) -> Result<EventSequence> {
    if compensator.end() < events.horizon() {
        return Err(Error::invalid(
            "compensator",
            format!("defined up to {} but the horizon is {}", compensator.end(), events.horizon()),
        ));
    }
    let mut out = Vec::with_capacity(events.len());
    let mut prev = (0.0, 0.0);
    for &ti in events.times() {
        let v = compensator.eval(ti)?;
        if v <= prev.1 {
            return Err(Error::FlatCompensator(prev.0, ti));
        }
        out.push(v);
        prev = (ti, v);
    }
    let horizon = compensator.eval(events.horizon())?;
    EventSequence::new(horizon, out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub stat: f64,
    pub critical: f64,
    pub pass: bool,
    pub n: usize,
}

/// Asymptotic 1% critical value of the one-sample KS statistic is
/// `KS_COEF_1PCT / sqrt(n)`.
pub const KS_COEF_1PCT: f64 = 1.628;

/// One-sample Kolmogorov-Smirnov test of `waits` against Exp(1).
pub fn gof_exp1(waits: &[f64]) -> Result<KsResult> {
    if waits.is_empty() {
        return Err(Error::Empty("waits"));
    }
    if let Some(w) = waits.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::invalid("waits", format!("{w} is not a positive finite wait")));
    }
    let mut xs = waits.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let stat = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = -(-x).exp_m1();
            f64::max((i + 1) as f64 / n - f, f - i as f64 / n)
        })
        .fold(0.0, f64::max);
    let critical = KS_COEF_1PCT / n.sqrt();
    Ok(KsResult { stat, critical, pass: stat < critical, n: xs.len() })
}
