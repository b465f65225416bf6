//! Construction and estimation of compensators `A_t`.
//!
//! Three routes are provided: the integrated hazard of the conditional
//! waiting-time laws ([`ihf_compensator`]), the closed-form integral of a
//! parametric intensity ([`model_compensator`]), and the two limit
//! characterizations through conditional increments
//! ([`dyadic_approximation`], [`instantaneous_rate_estimate`]).

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::events::EventSequence;
use crate::hazard::{HazardSpec, WaitingDist};
use crate::model::IntensityModel;
use crate::path::{CompensatorPath, Segment, SegmentKind};
use crate::rng::RandomStream;
use crate::simulate::continue_thinning;

/// Integrated-hazard compensator
/// `A_t = sum_n \int_0^{t - T_n} F_n(dx) / (1 - F_n(x-))` on `(T_n, T_{n+1}]`.
///
/// Fails with [`Error::InconsistentHazard`] when the hazard of some `F_n`
/// diverges before the corresponding waiting time ends (the observed or
/// censored wait is impossible under `F_n`), or when an observed wait lies
/// where `F_n` has no mass.
pub fn ihf_compensator(spec: &HazardSpec, events: &EventSequence) -> Result<CompensatorPath> {
    spec.validate()?;
    let times = events.times();
    let mut segments = Vec::new();
    let mut value = 0.0;
    let mut origin = 0.0;
    for n in 0..=times.len() {
        let end = times.get(n).copied().unwrap_or(events.horizon());
        let observed = n < times.len();
        let dist = spec.dist(n);
        let mut wait = end - origin;
        if observed {
            wait = snap_to_atom(dist, wait, end);
        }
        let total = dist.integrated_hazard(wait).ok_or_else(|| Error::InconsistentHazard {
            index: n,
            reason: format!("hazard diverges before the wait {wait} ends"),
        })?;
        if observed && dist.cdf(wait) <= 0.0 {
            return Err(Error::InconsistentHazard {
                index: n,
                reason: format!("observed wait {wait} has zero probability"),
            });
        }
        if end > origin || segments.is_empty() {
            push_hazard_segments(&mut segments, dist, origin, end, value);
        }
        value += total;
        origin = end;
    }
    CompensatorPath::new(segments)
}

/// Event times are stored absolutely, so a wait that was drawn exactly at an
/// atom can come back a few ulps short of it; snap such waits onto the atom.
fn snap_to_atom(dist: &WaitingDist, wait: f64, end: f64) -> f64 {
    let tol = 8.0 * f64::EPSILON * end.abs().max(1.0);
    dist.atoms().into_iter().map(|(x, _)| x).find(|x| (x - wait).abs() <= tol).unwrap_or(wait)
}

fn push_hazard_segments(out: &mut Vec<Segment>, dist: &WaitingDist, origin: f64, end: f64, base: f64) {
    if let WaitingDist::Exponential { rate } = dist {
        out.push(Segment { start: origin, end, start_value: base, kind: SegmentKind::Linear { slope: *rate } });
        return;
    }
    let shared = Arc::new(dist.clone());
    let mut cuts = vec![origin];
    cuts.extend(
        dist.atoms()
            .into_iter()
            .map(|(x, _)| origin + x)
            .filter(|&x| x > origin && x < end - 8.0 * f64::EPSILON * end.abs().max(1.0)),
    );
    cuts.push(end);
    for w in cuts.windows(2) {
        let start_value = base + dist.integrated_hazard(w[0] - origin).unwrap_or(f64::INFINITY);
        out.push(Segment {
            start: w[0],
            end: w[1],
            start_value,
            kind: SegmentKind::Hazard { dist: Arc::clone(&shared), origin },
        });
    }
}

/// `A_t = \int_0^t lambda_s ds` in closed form, with breakpoints at every
/// event and at multiples of `grid_step`.
pub fn model_compensator(model: &IntensityModel, events: &EventSequence, grid_step: f64) -> Result<CompensatorPath> {
    model.validate()?;
    if !(grid_step.is_finite() && grid_step > 0.0) {
        return Err(Error::invalid("grid_step", format!("{grid_step} must be > 0")));
    }
    let horizon = events.horizon();
    let mut cuts: Vec<(f64, bool)> = events.times().iter().map(|&t| (t, true)).collect();
    let n_grid = (horizon / grid_step).floor() as usize;
    cuts.extend((1..=n_grid).map(|k| (k as f64 * grid_step, false)).filter(|&(t, _)| t < horizon));
    cuts.push((horizon, false));
    cuts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    cuts.dedup_by(|b, a| {
        if a.0 == b.0 {
            a.1 |= b.1;
            true
        } else {
            false
        }
    });

    let mut state = model.initial_state();
    let mut segments = Vec::with_capacity(cuts.len());
    let mut left = 0.0;
    let mut value = 0.0;
    for (t, is_event) in cuts {
        if t > left {
            let profile = model.profile(&state, left);
            segments.push(Segment { start: left, end: t, start_value: value, kind: SegmentKind::Profile(profile) });
            value += profile.integral(t - left);
            state.advance(t);
            left = t;
        }
        if is_event {
            state.push_event();
        }
    }
    CompensatorPath::new(segments)
}

/// `sum_k E[N_{(k+1)t/2^n} - N_{kt/2^n} | F_{kt/2^n}]` with the conditional
/// increment taken to first order, `lambda_{kt/2^n +} * t / 2^n`.
///
/// The first-order increment makes each cell biased by `O(dt^2)`; the sum
/// converges to `A_t` as `level` grows and is exact for constant rates.
pub fn dyadic_approximation(model: &IntensityModel, events: &EventSequence, t: f64, level: u32) -> Result<f64> {
    model.validate()?;
    events.check_time(t)?;
    if level > 40 {
        return Err(Error::domain("level", level as f64, "[0, 40]"));
    }
    let cells = 1u64 << level;
    let dt = t / cells as f64;
    let times = events.times();
    let mut state = model.initial_state();
    let mut next = 0usize;
    // Neumaier summation of the intensities, scaled by dt once: at level 20
    // a naive sum of 2^20 terms drifts by ~1e-10
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for k in 0..cells {
        let left = k as f64 * dt;
        while next < times.len() && times[next] <= left {
            state.advance(times[next]);
            state.push_event();
            next += 1;
        }
        state.advance(left);
        let v = model.profile(&state, left).value(0.0);
        let s = sum + v;
        carry += if sum.abs() >= v.abs() { (sum - s) + v } else { (v - s) + sum };
        sum = s;
    }
    Ok((sum + carry) * dt)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub n_mc: usize,
}

/// Monte Carlo estimate of `P(N_{t+h} - N_t >= 1 | F_t) / h`, continuing the
/// history frozen at `t` with `n_mc` independent thinning runs.
pub fn instantaneous_rate_estimate(
    model: &IntensityModel,
    history: &EventSequence,
    t: f64,
    h: f64,
    n_mc: usize,
    stream: RandomStream,
) -> Result<RateEstimate> {
    model.validate()?;
    history.check_time(t)?;
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::invalid("h", format!("{h} must be > 0")));
    }
    if n_mc == 0 {
        return Err(Error::invalid("n_mc", "must be >= 1"));
    }
    let mut rng = stream.rng();
    let mut hits = 0usize;
    for _ in 0..n_mc {
        if !continue_thinning(model, history, t, t + h, &mut rng, 1)?.is_empty() {
            hits += 1;
        }
    }
    let p = hits as f64 / n_mc as f64;
    Ok(RateEstimate { estimate: p / h, std_error: (p * (1.0 - p) / n_mc as f64).sqrt() / h, n_mc })
}

/// Piecewise-constant, right-continuous rate on `[0, end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityPath {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl IntensityPath {
    /// `values[i]` holds on `[breakpoints[i], breakpoints[i+1])`.
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 || values.len() + 1 != breakpoints.len() {
            return Err(Error::invalid("intensity path", "need n+1 breakpoints for n values"));
        }
        if breakpoints[0] != 0.0 || breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("breakpoints", "must start at 0 and increase strictly"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("values", "rates must be finite and >= 0"));
        }
        Ok(Self { breakpoints, values })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn end(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn value_at(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        let i = self.breakpoints.partition_point(|&b| b <= t).clamp(1, self.values.len()) - 1;
        Ok(self.values[i])
    }

    /// `\int_0^t rate(s) ds`.
    pub fn integral(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        let mut acc = 0.0;
        for (w, v) in self.breakpoints.windows(2).zip(&self.values) {
            if t <= w[0] {
                break;
            }
            acc += v * (t.min(w[1]) - w[0]);
        }
        Ok(acc)
    }

    fn check(&self, t: f64) -> Result<()> {
        if t.is_nan() || t < 0.0 || t > self.end() {
            return Err(Error::domain("t", t, format!("[0, {}]", self.end())));
        }
        Ok(())
    }
}

/// Rate that looks `a` ahead: 1 if an event falls in `(t, t + a]`, else 2.
/// Defined on `[0, horizon - a]`.
pub fn anticipative_intensity(events: &EventSequence, a: f64) -> Result<IntensityPath> {
    let horizon = events.horizon();
    if !(a > 0.0 && a < horizon) {
        return Err(Error::domain("a", a, format!("(0, {horizon})")));
    }
    let end = horizon - a;
    // an event T lies in (t, t+a] exactly when t is in [T - a, T)
    let mut windows: Vec<(f64, f64)> = Vec::new();
    for &ti in events.times() {
        let (lo, hi) = ((ti - a).max(0.0), ti.min(end));
        if hi <= lo {
            continue;
        }
        match windows.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => windows.push((lo, hi)),
        }
    }
    let mut breakpoints = vec![0.0];
    let mut values = Vec::new();
    for (lo, hi) in windows {
        if lo > *breakpoints.last().unwrap() {
            values.push(2.0);
            breakpoints.push(lo);
        }
        values.push(1.0);
        breakpoints.push(hi);
    }
    if *breakpoints.last().unwrap() < end {
        values.push(2.0);
        breakpoints.push(end);
    }
    IntensityPath::new(breakpoints, values)
}
