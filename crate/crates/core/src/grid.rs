//! Uniform position grids and their conjugate momentum grids.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniform grid `x_k = -L/2 + k·dx`, `k = 0..n`, with `dx = L/n`.
///
/// The conjugate momentum grid is `p_m = (m - n/2)·dp` with `dp = 2π/L`, so
/// that `dx·dp·n = 2π`. With even `n` the grid has no point at `+L/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
    length: f64,
}

impl GridSpec {
    pub const MIN_POINTS: usize = 16;
    pub const MAX_POINTS: usize = 4096;

    pub fn new(n: usize, length: f64) -> Result<Self> {
        if !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n = {n} is not a power of two")));
        }
        if !(Self::MIN_POINTS..=Self::MAX_POINTS).contains(&n) {
            return Err(Error::InvalidGrid(format!(
                "n = {n} outside [{}, {}]",
                Self::MIN_POINTS,
                Self::MAX_POINTS
            )));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidGrid(format!("length = {length} must be positive")));
        }
        Ok(Self { n, length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn dp(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn x(&self, k: usize) -> f64 {
        -0.5 * self.length + k as f64 * self.dx()
    }

    pub fn p(&self, m: usize) -> f64 {
        (m as f64 - (self.n / 2) as f64) * self.dp()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.x(k)).collect()
    }

    pub fn momenta(&self) -> Vec<f64> {
        (0..self.n).map(|m| self.p(m)).collect()
    }

    /// Largest representable momentum magnitude, `π/dx`.
    pub fn p_max(&self) -> f64 {
        PI / self.dx()
    }

    /// Index of the grid point nearest to `x`, if `x` lies on the grid's span.
    pub fn nearest_index(&self, x: f64) -> Option<usize> {
        let k = ((x + 0.5 * self.length) / self.dx()).round();
        (k >= 0.0 && k < self.n as f64).then_some(k as usize)
    }
}

/// Default experiment grid: 512 points on a box of length 40.
impl Default for GridSpec {
    fn default() -> Self {
        Self { n: 512, length: 40.0 }
    }
}

pub fn make_grid(n: usize, length: f64) -> Result<GridSpec> {
    GridSpec::new(n, length)
}
