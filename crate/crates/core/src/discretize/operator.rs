use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::grid::{Grid, Profile};
use super::weights::{KernelWeights, TailClosure};
use crate::error::{Error, Result};
use crate::model::KernelSpec;

/// Discrete nonlocal operator on a fixed grid.
///
/// `(𝓛u)_i = Σ_{j≠i} w_{|i-j|}(u_i - u_j) + T_{i+1}(u_i - u_left) + T_{n-i}(u_i - u_right)`
/// where `T_m` is the total weight of offsets `>= m` (exterior nodes).
/// The window part is a symmetric Toeplitz matrix applied by FFT.
#[derive(Clone)]
pub struct NonlocalOperator {
    grid: Grid,
    weights: KernelWeights,
    /// Diagonal `Σ_{k>=1} w_k` restricted to the window plus both tails.
    diag: Vec<f64>,
    tail_left: Vec<f64>,
    tail_right: Vec<f64>,
    fft_len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Eigenvalues of the circulant embedding of the offset weights.
    spectrum: Vec<f64>,
}

impl std::fmt::Debug for NonlocalOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NonlocalOperator")
            .field("grid", &self.grid)
            .field("closure", &self.weights.closure())
            .finish()
    }
}

impl NonlocalOperator {
    pub fn new(grid: Grid, kernel: &KernelSpec, closure: TailClosure) -> Result<Self> {
        let n = grid.n;
        let weights = KernelWeights::new(kernel, grid.h, n + 1, closure)?;
        let w = weights.as_slice();
        let mut prefix = vec![0.0; n];
        for k in 1..n {
            prefix[k] = prefix[k - 1] + w[k];
        }
        let tail_left: Vec<f64> = (0..n).map(|i| weights.tail_sum(i as i64 + 1)).collect();
        let tail_right: Vec<f64> = (0..n).map(|i| weights.tail_sum((n - i) as i64)).collect();
        let diag = (0..n)
            .map(|i| prefix[i] + prefix[n - 1 - i] + tail_left[i] + tail_right[i])
            .collect();
        let fft_len = (2 * n).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(fft_len);
        let inverse = planner.plan_fft_inverse(fft_len);
        let mut col = vec![Complex::new(0.0, 0.0); fft_len];
        for k in 1..n {
            col[k].re = w[k];
            col[fft_len - k].re = w[k];
        }
        forward.process(&mut col);
        let spectrum = col.iter().map(|c| c.re).collect();
        Ok(NonlocalOperator {
            grid,
            weights,
            diag,
            tail_left,
            tail_right,
            fft_len,
            forward,
            inverse,
            spectrum,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn weights(&self) -> &KernelWeights {
        &self.weights
    }

    pub fn fft_len(&self) -> usize {
        self.fft_len
    }

    /// Total weight of all offsets, the diagonal of the infinite-line operator.
    pub fn full_diagonal(&self) -> f64 {
        self.weights.tail_sum(1)
    }

    /// Circulant eigenvalues of the offset weights, in FFT order.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub(crate) fn fft_forward(&self, buf: &mut [Complex<f64>]) {
        self.forward.process(buf);
    }

    pub(crate) fn fft_inverse(&self, buf: &mut [Complex<f64>]) {
        self.inverse.process(buf);
    }

    /// `Σ_{j≠i} w_{|i-j|} u_j` for every window node.
    pub fn toeplitz(&self, u: &[f64]) -> Vec<f64> {
        let n = self.grid.n;
        let mut buf = vec![Complex::new(0.0, 0.0); self.fft_len];
        for (b, &v) in buf.iter_mut().zip(u) {
            b.re = v;
        }
        self.forward.process(&mut buf);
        for (b, &s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= s;
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.fft_len as f64;
        buf[..n].iter().map(|c| c.re * scale).collect()
    }

    /// `𝓛u` at every window node, exterior values `left`/`right`.
    pub fn apply(&self, u: &[f64], left: f64, right: f64) -> Vec<f64> {
        let t = self.toeplitz(u);
        (0..self.grid.n)
            .map(|i| {
                self.diag[i] * u[i] - t[i] - self.tail_left[i] * left - self.tail_right[i] * right
            })
            .collect()
    }

    pub fn apply_profile(&self, p: &Profile) -> Vec<f64> {
        self.apply(&p.values, p.left, p.right)
    }

    /// Direct `O(n)` evaluation at one interior node.
    pub fn apply_at(&self, p: &Profile, i: usize) -> Result<f64> {
        let n = self.grid.n;
        if i == 0 || i + 1 >= n {
            return Err(Error::Domain(format!(
                "node {i} is on the window edge; the operator needs interior nodes"
            )));
        }
        let w = self.weights.as_slice();
        let u = &p.values;
        let mut acc = 0.0;
        for (j, &uj) in u.iter().enumerate() {
            if j != i {
                acc += w[i.abs_diff(j)] * (u[i] - uj);
            }
        }
        Ok(acc + self.tail_left[i] * (u[i] - p.left) + self.tail_right[i] * (u[i] - p.right))
    }

    /// Exterior weights `(T_{i+1}, T_{n-i})` at node `i`.
    pub fn tails_at(&self, i: usize) -> (f64, f64) {
        (self.tail_left[i], self.tail_right[i])
    }

    /// Dense matrix of `𝓛` on nodes `lo..=hi`; contributions of all other
    /// nodes are left to the caller's right-hand side.
    pub fn dense_block(&self, lo: usize, hi: usize) -> nalgebra::DMatrix<f64> {
        let m = hi - lo + 1;
        let w = self.weights.as_slice();
        let rows: Vec<Vec<f64>> = (0..m)
            .into_par_iter()
            .map(|a| {
                let mut row = vec![0.0; m];
                for (b, r) in row.iter_mut().enumerate() {
                    if a != b {
                        *r = -w[a.abs_diff(b)];
                    }
                }
                row[a] = self.diag[lo + a];
                row
            })
            .collect();
        nalgebra::DMatrix::from_fn(m, m, |a, b| rows[a][b])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::KernelSpec;

    #[test]
    fn constants_are_annihilated() {
        let g = Grid::new(5.0, 101).unwrap();
        let op = NonlocalOperator::new(g, &KernelSpec::power_law(0.35, 1.0), TailClosure::AnalyticPower)
            .unwrap();
        let u = vec![2.5; g.n];
        let r = op.apply(&u, 2.5, 2.5);
        assert!(r.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn fft_matches_direct_sum() {
        let g = Grid::new(4.0, 81).unwrap();
        let op = NonlocalOperator::new(g, &KernelSpec::fractional_laplacian(0.5), TailClosure::AnalyticPower)
            .unwrap();
        let p = Profile::sample(g, |x| (x * 0.7).sin() + x.atan(), -1.2, 1.5);
        let fast = op.apply_profile(&p);
        for i in 1..g.n - 1 {
            let slow = op.apply_at(&p, i).unwrap();
            assert!((fast[i] - slow).abs() < 1e-11 * (1.0 + slow.abs()), "node {i}");
        }
        assert!(op.apply_at(&p, 0).is_err());
    }
}
