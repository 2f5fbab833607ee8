use crate::error::{Error, Result};

/// Evenly spaced points from `start` towards `stop`.
///
/// Both endpoints are included when `stop - start` is a whole number of
/// steps (up to a relative `1e-9`); otherwise the last point falls short of
/// `stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    start: f64,
    step: f64,
    len: usize,
}

impl Grid1D {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err(Error::invalid("grid bounds and step must be finite"));
        }
        if stop < start {
            return Err(Error::invalid(format!("grid stop {stop} precedes start {start}")));
        }
        if step <= 0.0 {
            return Err(Error::invalid(format!("grid step must be positive, got {step}")));
        }
        let spans = (stop - start) / step;
        let whole = spans.round();
        let intervals = if (spans - whole).abs() <= 1e-9 * whole.max(1.0) { whole } else { spans.floor() };
        if intervals >= usize::MAX as f64 / 2.0 {
            return Err(Error::resource("grid has too many points"));
        }
        Ok(Self { start, step, len: intervals as usize + 1 })
    }

    /// `count` points with both endpoints included.
    pub fn with_count(start: f64, stop: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::invalid("a counted grid needs at least two points"));
        }
        if !(start.is_finite() && stop.is_finite()) || stop <= start {
            return Err(Error::invalid("counted grid needs finite start < stop"));
        }
        Ok(Self { start, step: (stop - start) / (count - 1) as f64, len: count })
    }

    pub fn single(point: f64) -> Result<Self> {
        if !point.is_finite() {
            return Err(Error::invalid("grid point must be finite"));
        }
        Ok(Self { start: point, step: 1.0, len: 1 })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn last(&self) -> f64 {
        self.point(self.len - 1)
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.point(i)).collect()
    }
}
