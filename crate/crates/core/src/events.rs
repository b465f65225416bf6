//! Realized event sequences of a simple counting process.

use crate::error::{Error, Result};

/// Sorted arrival times `T_1 < T_2 < ...` observed on `(0, horizon]`.
///
/// The counting process is `N(t) = #{i : T_i <= t}`; it is right-continuous
/// and its left limit `N(t-)` counts the events strictly before `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSequence {
    horizon: f64,
    times: Vec<f64>,
}

impl EventSequence {
    pub fn new(horizon: f64, times: Vec<f64>) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::invalid("horizon", format!("{horizon} is not a positive finite time")));
        }
        for (i, &t) in times.iter().enumerate() {
            if !t.is_finite() || t <= 0.0 || t > horizon {
                return Err(Error::invalid(format!("times[{i}]"), format!("{t} is outside (0, {horizon}]")));
            }
            if i > 0 && t <= times[i - 1] {
                return Err(Error::invalid(
                    format!("times[{i}]"),
                    format!("{t} does not exceed the previous time {}", times[i - 1]),
                ));
            }
        }
        Ok(Self { horizon, times })
    }

    pub fn empty(horizon: f64) -> Result<Self> {
        Self::new(horizon, Vec::new())
    }

    /// Builder for simulators that produce sorted in-range times already.
    pub(crate) fn from_sorted_unchecked(horizon: f64, times: Vec<f64>) -> Self {
        debug_assert!(times.windows(2).all(|w| w[0] < w[1]));
        Self { horizon, times }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `N(t)`: events at or before `t`.
    pub fn count(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s <= t)
    }

    /// `N(t-)`: events strictly before `t`.
    pub fn count_before(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s < t)
    }

    /// Inter-arrival times `U_n = T_n - T_{n-1}` with `T_0 = 0`.
    pub fn waits(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.times
            .iter()
            .map(|&t| {
                let w = t - prev;
                prev = t;
                w
            })
            .collect()
    }

    /// The path stopped at its `n`-th event; the new horizon is `T_n`.
    /// Returns `None` if fewer than `n` events were observed.
    pub fn truncated(&self, n: usize) -> Option<Self> {
        if n == 0 || n > self.times.len() {
            return None;
        }
        Some(Self { horizon: self.times[n - 1], times: self.times[..n].to_vec() })
    }

    /// Same events observed on the shorter window `(0, horizon]`.
    pub fn restricted(&self, horizon: f64) -> Result<Self> {
        let k = self.count(horizon);
        Self::new(horizon, self.times[..k].to_vec())
    }

    pub(crate) fn check_time(&self, t: f64) -> Result<()> {
        if t.is_nan() || t < 0.0 || t > self.horizon {
            return Err(Error::domain("t", t, format!("[0, {}]", self.horizon)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_out_of_range() {
        assert!(EventSequence::new(1.0, vec![0.5, 0.5]).is_err());
        assert!(EventSequence::new(1.0, vec![0.0]).is_err());
        assert!(EventSequence::new(1.0, vec![1.5]).is_err());
        assert!(EventSequence::new(0.0, vec![]).is_err());
        assert!(EventSequence::new(1.0, vec![1.0]).is_ok());
    }

    #[test]
    fn counts_are_right_continuous() {
        let e = EventSequence::new(3.0, vec![1.0, 2.0]).unwrap();
        assert_eq!(e.count(0.999), 0);
        assert_eq!(e.count(1.0), 1);
        assert_eq!(e.count_before(1.0), 0);
        assert_eq!(e.count(3.0), 2);
        assert_eq!(e.waits(), vec![1.0, 1.0]);
    }

    #[test]
    fn truncation() {
        let e = EventSequence::new(3.0, vec![1.0, 2.0, 2.5]).unwrap();
        let t = e.truncated(2).unwrap();
        assert_eq!(t.horizon(), 2.0);
        assert_eq!(t.times(), &[1.0, 2.0]);
        assert!(e.truncated(4).is_none());
    }
}
