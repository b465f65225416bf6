//! Piecewise representation of a compensator `A_t`.

use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hazard::WaitingDist;
use crate::model::Profile;

/// How `A` moves across one segment `[start, end]`, with `s = t - start`.
#[derive(Debug, Clone, PartialEq)]
pub enum SegmentKind {
    Constant,
    Linear {
        slope: f64,
    },
    /// `\int_0^s` of an intensity profile.
    Profile(Profile),
    /// `H(t - origin) - H(start - origin)` for a waiting-time law.
    Hazard {
        dist: Arc<WaitingDist>,
        origin: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    /// `A(start)`; may exceed the previous segment's end value (a jump).
    pub start_value: f64,
    pub kind: SegmentKind,
}

impl Segment {
    fn increment(&self, t: f64) -> f64 {
        let s = t - self.start;
        match &self.kind {
            SegmentKind::Constant => 0.0,
            SegmentKind::Linear { slope } => slope * s,
            SegmentKind::Profile(p) => p.integral(s),
            SegmentKind::Hazard { dist, origin } => {
                let h = |u: f64| dist.integrated_hazard(u).unwrap_or(f64::INFINITY);
                // the segment start holds any atom at `start`
                let at_start = h(self.start - origin);
                if t == self.start {
                    0.0
                } else {
                    h(t - origin) - at_start
                }
            }
        }
    }

    /// Left limit of `A` at the segment end.
    pub fn end_value(&self) -> f64 {
        match &self.kind {
            SegmentKind::Hazard { dist, origin } if self.end > self.start => {
                let left = dist.integrated_hazard_left(self.end - origin).unwrap_or(f64::INFINITY);
                self.start_value + left - dist.integrated_hazard(self.start - origin).unwrap_or(f64::INFINITY)
            }
            _ => self.start_value + self.increment(self.end),
        }
    }
}

/// Non-decreasing, right-continuous compensator path on `[0, end]`.
///
/// Segments are contiguous; a segment may start above where the previous
/// one ended, which represents a jump of `A` at an atom of a waiting-time
/// law.
#[derive(Debug, Clone, PartialEq)]
pub struct CompensatorPath {
    segments: Vec<Segment>,
}

impl CompensatorPath {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Empty("compensator segments"));
        }
        if segments[0].start != 0.0 || segments[0].start_value != 0.0 {
            return Err(Error::invalid("segments[0]", "path must start at (0, 0)"));
        }
        for (i, w) in segments.windows(2).enumerate() {
            if w[1].start != w[0].end || w[0].end < w[0].start {
                return Err(Error::invalid(format!("segments[{}]", i + 1), "segments must be contiguous"));
            }
            if w[1].start_value < w[0].end_value() - 1e-12 * w[0].end_value().abs().max(1.0) {
                return Err(Error::invalid(format!("segments[{}]", i + 1), "path decreases"));
            }
        }
        Ok(Self { segments })
    }

    /// `A_t = t * slope` on `[0, end]`.
    pub fn linear(slope: f64, end: f64) -> Result<Self> {
        Self::new(vec![Segment { start: 0.0, end, start_value: 0.0, kind: SegmentKind::Linear { slope } }])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn end(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.end)
    }

    /// Exact evaluation of `A_t` for `0 <= t <= end`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 || t > self.end() {
            return Err(Error::domain("t", t, format!("[0, {}]", self.end())));
        }
        // last segment whose start is <= t, so jumps are right-continuous
        let i = self.segments.partition_point(|s| s.start <= t).max(1) - 1;
        let seg = &self.segments[i];
        Ok(seg.start_value + seg.increment(t))
    }

    /// `(t, A_t)` at every breakpoint; a jump emits both its left and right
    /// values at the same `t`.
    pub fn breakpoints(&self) -> Vec<(f64, f64)> {
        let mut out = vec![(0.0, 0.0)];
        for seg in &self.segments {
            let last = *out.last().unwrap();
            if seg.start_value != last.1 {
                out.push((seg.start, seg.start_value));
            }
            out.push((seg.end, seg.end_value()));
        }
        if let Some(seg) = self.segments.last() {
            let closing = seg.start_value + seg.increment(seg.end);
            if closing != out.last().unwrap().1 {
                out.push((seg.end, closing));
            }
        }
        out
    }

    /// CSV with header `t,value`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["t", "value"])?;
        for (t, v) in self.breakpoints() {
            wtr.write_record([t.to_string(), v.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Free function form of [`CompensatorPath::eval`].
pub fn compensator_eval(path: &CompensatorPath, t: f64) -> Result<f64> {
    path.eval(t)
}
