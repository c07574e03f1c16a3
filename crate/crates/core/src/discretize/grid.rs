use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ReferenceProfile;

/// Uniform symmetric grid `x_i = -R + i h`, `i = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub half_width: f64,
    pub n: usize,
    pub h: f64,
}

impl Grid {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if n < 3 || n.is_multiple_of(2) {
            return Err(Error::Config(format!("grid.n = {n} must be odd and >= 3")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Config(format!("grid.R = {half_width} must be positive")));
        }
        Ok(Grid {
            half_width,
            n,
            h: 2.0 * half_width / (n - 1) as f64,
        })
    }

    /// Grid with spacing as close to `h` as an odd node count allows.
    pub fn with_spacing(half_width: f64, h: f64) -> Result<Self> {
        let cells = (half_width / h).round().max(1.0) as usize;
        Self::new(half_width, 2 * cells + 1)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.h
    }

    /// Coordinate of an extended (possibly exterior) index.
    #[inline]
    pub fn x_ext(&self, j: i64) -> f64 {
        -self.half_width + j as f64 * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Nearest node to `x`, clamped to the window.
    pub fn nearest(&self, x: f64) -> usize {
        let k = ((x + self.half_width) / self.h).round();
        k.clamp(0.0, (self.n - 1) as f64) as usize
    }

    /// Trapezoid weights.
    pub fn trapezoid(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n {
            0.5 * self.h
        } else {
            self.h
        }
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.n == other.n && self.half_width == other.half_width
    }
}

/// Samples on a grid plus the constant values taken outside the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub left: f64,
    pub right: f64,
}

impl Profile {
    pub fn new(grid: Grid, values: Vec<f64>, left: f64, right: f64) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.n
            )));
        }
        Ok(Profile {
            grid,
            values,
            left,
            right,
        })
    }

    pub fn sample(grid: Grid, f: impl Fn(f64) -> f64, left: f64, right: f64) -> Self {
        let values = (0..grid.n).map(|i| f(grid.x(i))).collect();
        Profile {
            grid,
            values,
            left,
            right,
        }
    }

    /// Sampled profile whose boundary nodes hold the far-field constants.
    pub fn sample_pinned(grid: Grid, f: impl Fn(f64) -> f64, left: f64, right: f64) -> Self {
        let mut p = Self::sample(grid, f, left, right);
        p.values[0] = left;
        p.values[grid.n - 1] = right;
        p
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Profile {
            grid,
            values: vec![c; grid.n],
            left: c,
            right: c,
        }
    }

    pub fn reference(grid: Grid, r: &ReferenceProfile) -> Self {
        Self::sample(grid, |x| r.eval(x), r.zeta1, r.zeta2)
    }

    /// Value at extended index: far-field constants outside the window.
    #[inline]
    pub fn at(&self, j: i64) -> f64 {
        if j < 0 {
            self.left
        } else if j >= self.grid.n as i64 {
            self.right
        } else {
            self.values[j as usize]
        }
    }

    /// Piecewise-linear interpolation, constants outside.
    pub fn interpolate(&self, x: f64) -> f64 {
        let g = &self.grid;
        let t = (x + g.half_width) / g.h;
        if t < 0.0 {
            return self.left;
        }
        if t > (g.n - 1) as f64 {
            return self.right;
        }
        let k = (t.floor() as usize).min(g.n - 2);
        let f = t - k as f64;
        self.values[k] * (1.0 - f) + self.values[k + 1] * f
    }

    pub fn check_same_grid(&self, other: &Profile) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "grids (R = {}, n = {}) and (R = {}, n = {}) differ",
                self.grid.half_width, self.grid.n, other.grid.half_width, other.grid.n
            )))
        }
    }

    /// Whether the boundary samples agree with the far-field constants.
    pub fn is_pinned(&self, tol: f64) -> bool {
        (self.values[0] - self.left).abs() <= tol
            && (self.values[self.grid.n - 1] - self.right).abs() <= tol
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Profile {
        Profile {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            left: f(self.left),
            right: f(self.right),
        }
    }

    /// Pointwise difference `self - other`.
    pub fn minus(&self, other: &Profile) -> Result<Profile> {
        self.check_same_grid(other)?;
        Ok(Profile {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
            left: self.left - other.left,
            right: self.right - other.right,
        })
    }

    pub fn max_abs_diff(&self, other: &Profile) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Half-open interval `[lo, hi)`; either end may be infinite. Node `x_i`
/// belongs to the interval when `lo <= x_i < hi` up to a relative `1e-9 h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn real_line() -> Self {
        Interval {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x < self.hi
    }
}

pub(crate) const FAR: i64 = 1 << 40;

/// Inclusive extended-index range of nodes inside `iv`.
pub(crate) fn index_range(grid: &Grid, iv: &Interval) -> (i64, i64) {
    let eps = 1e-9;
    let lo = if iv.lo == f64::NEG_INFINITY {
        -FAR
    } else {
        (((iv.lo + grid.half_width) / grid.h - eps).ceil()).clamp(-FAR as f64, FAR as f64) as i64
    };
    let hi = if iv.hi == f64::INFINITY {
        FAR
    } else {
        (((iv.hi + grid.half_width) / grid.h - eps).ceil() - 1.0).clamp(-FAR as f64, FAR as f64)
            as i64
    };
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_symmetric() {
        let g = Grid::new(10.0, 41).unwrap();
        assert_eq!(g.h, 0.5);
        assert_eq!(g.x(20), 0.0);
        assert_eq!(g.x(0), -g.x(40));
        assert!(Grid::new(1.0, 4).is_err());
    }

    #[test]
    fn interval_ranges_partition() {
        let g = Grid::new(2.0, 9).unwrap();
        let (a, b) = index_range(&g, &Interval::new(-1.0, 0.5));
        assert_eq!((a, b), (2, 4));
        let (c, d) = index_range(&g, &Interval::new(0.5, 10.0));
        assert_eq!(c, b + 1);
        assert_eq!(d, 23);
        assert_eq!(index_range(&g, &Interval::real_line()), (-FAR, FAR));
    }

    #[test]
    fn interpolation_and_far_field() {
        let g = Grid::new(1.0, 3).unwrap();
        let p = Profile::new(g, vec![0.0, 1.0, 3.0], -1.0, 5.0).unwrap();
        assert_eq!(p.interpolate(0.5), 2.0);
        assert_eq!(p.interpolate(-3.0), -1.0);
        assert_eq!(p.at(7), 5.0);
    }
}
