//! Exact samplers for counting processes.
//!
//! [`simulate_thinning`] draws from an [`IntensityModel`] by thinning with a
//! local bound: every model's intensity is non-increasing between events,
//! so the value right after the current time bounds it until the next
//! accepted point. [`simulate_from_hazard`] draws the waiting times directly
//! from a [`HazardSpec`] by generalized inversion.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::events::EventSequence;
use crate::hazard::HazardSpec;
use crate::model::{HistoryState, IntensityModel};
use crate::rng::{RandomStream, StreamRng};

/// Hard cap on the number of events in one simulated path.
pub const MAX_EVENTS: usize = 10_000_000;

pub fn simulate_thinning(model: &IntensityModel, horizon: f64, stream: RandomStream) -> Result<EventSequence> {
    model.validate()?;
    let empty = EventSequence::empty(horizon)?;
    let mut rng = stream.rng();
    let times = continue_thinning(model, &empty, 0.0, horizon, &mut rng, usize::MAX)?;
    Ok(EventSequence::from_sorted_unchecked(horizon, times))
}

/// Thinning continuation of `history` from `start` to `end`, returning at
/// most `max_new` new events (all in `(start, end]`).
pub(crate) fn continue_thinning(
    model: &IntensityModel,
    history: &EventSequence,
    start: f64,
    end: f64,
    rng: &mut StreamRng,
    max_new: usize,
) -> Result<Vec<f64>> {
    let mut state: HistoryState = model.initial_state();
    let mut n_events = 0usize;
    for &ti in history.times().iter().take_while(|&&ti| ti <= start) {
        state.advance(ti);
        state.push_event();
        n_events += 1;
    }
    state.advance(start);

    let mut out = Vec::new();
    let mut t = start;
    while out.len() < max_new {
        let bound = model.profile(&state, t).value(0.0);
        if bound <= 0.0 {
            break;
        }
        let cand = t + rng.exp1() / bound;
        if cand > end {
            break;
        }
        state.advance(cand);
        let lambda = model.profile(&state, cand).value(0.0);
        t = cand;
        if rng.uniform() * bound < lambda {
            state.push_event();
            out.push(cand);
            n_events += 1;
            if n_events > MAX_EVENTS {
                return Err(Error::Explosion { limit: MAX_EVENTS, time: cand });
            }
        }
    }
    Ok(out)
}

pub fn simulate_from_hazard(spec: &HazardSpec, horizon: f64, stream: RandomStream) -> Result<EventSequence> {
    spec.validate()?;
    EventSequence::empty(horizon)?;
    let mut rng = stream.rng();
    let mut times = Vec::new();
    let mut t = 0.0;
    loop {
        let dist = spec.dist(times.len());
        // compare with the total mass first: a draw above it means "no next event"
        let v = rng.open01();
        let Some(wait) = dist.quantile(v) else { break };
        let next = t + wait;
        if next > horizon || next <= t {
            break;
        }
        t = next;
        times.push(t);
        if times.len() > MAX_EVENTS {
            return Err(Error::Explosion { limit: MAX_EVENTS, time: t });
        }
    }
    Ok(EventSequence::from_sorted_unchecked(horizon, times))
}

/// What an ensemble is simulated from.
#[derive(Debug, Clone, Copy)]
pub enum Source<'a> {
    Model(&'a IntensityModel),
    Hazard(&'a HazardSpec),
}

impl<'a> From<&'a IntensityModel> for Source<'a> {
    fn from(m: &'a IntensityModel) -> Self {
        Source::Model(m)
    }
}

impl<'a> From<&'a HazardSpec> for Source<'a> {
    fn from(h: &'a HazardSpec) -> Self {
        Source::Hazard(h)
    }
}

/// `n_paths` independent paths; path `i` uses stream index `i`, and the
/// result is ordered by path index whatever the thread schedule.
pub fn simulate_ensemble<'a>(
    source: impl Into<Source<'a>>,
    horizon: f64,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<EventSequence>> {
    if n_paths == 0 {
        return Err(Error::invalid("n_paths", "must be >= 1"));
    }
    let source = source.into();
    (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let stream = RandomStream::new(seed, i);
            match source {
                Source::Model(m) => simulate_thinning(m, horizon, stream),
                Source::Hazard(h) => simulate_from_hazard(h, horizon, stream),
            }
        })
        .collect()
}
