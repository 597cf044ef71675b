use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` log-spaced points strictly inside `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogGrid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Default for LogGrid {
    fn default() -> Self {
        Self { lo: 1e-4, hi: 0.5, n: 64 }
    }
}

impl LogGrid {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::Invalid(format!("log grid needs 0 < lo < hi, got ({lo}, {hi})")));
        }
        Ok(Self { lo, hi, n })
    }

    pub fn points(&self) -> Vec<f64> {
        let (a, b) = (self.lo.ln(), self.hi.ln());
        let step = (b - a) / (self.n as f64 + 1.0);
        (1..=self.n).map(|i| (a + step * i as f64).exp()).collect()
    }

    /// The grid at doubled resolution covering twice the logarithmic range below `hi`
    /// (same point density, floor pushed from `lo` to `lo^2 / hi`).
    pub fn refined(&self) -> Self {
        Self { lo: self.lo * self.lo / self.hi, hi: self.hi, n: 2 * self.n + 1 }
    }
}

/// `n` equally spaced points strictly inside `(lo, hi)` (cell midpoints).
pub fn midpoints(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let h = (hi - lo) / n as f64;
    (0..n).map(|i| lo + h * (i as f64 + 0.5)).collect()
}
