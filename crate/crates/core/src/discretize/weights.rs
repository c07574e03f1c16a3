use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{KernelForm, KernelSpec};

/// How the kernel is integrated beyond the last window node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailClosure {
    /// Exact moments of the kernel out to infinity.
    AnalyticPower,
    /// Kernel treated as zero outside the window.
    TruncatedZero,
}

impl TailClosure {
    pub fn for_kernel(k: &KernelSpec) -> Self {
        if matches!(k.form, KernelForm::Tabulated { .. }) {
            log::warn!("tabulated kernel: exterior tails are dropped");
            TailClosure::TruncatedZero
        } else {
            TailClosure::AnalyticPower
        }
    }

    pub fn check(&self, k: &KernelSpec) -> Result<()> {
        if *self == TailClosure::AnalyticPower && matches!(k.form, KernelForm::Tabulated { .. }) {
            return Err(Error::Config(
                "analytic tail closure requires a power-type kernel".into(),
            ));
        }
        Ok(())
    }
}

pub(crate) fn gauss16() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        GaussLegendre::new(16.try_into().unwrap())
            .as_node_weight_pairs()
            .to_vec()
    })
}

/// Offset weights of the paired quadrature
/// `𝓛u(x_i) ≈ Σ_k w_k (2u_i - u_{i+k} - u_{i-k})`.
///
/// The paired difference is interpolated quadratically in the offset `t`:
/// on `[0, h]` through `t²`, and on the panels `[h, 3h], [3h, 5h], ...` by
/// three-point Lagrange interpolation, integrated exactly against `K`.
#[derive(Debug, Clone)]
pub struct KernelWeights {
    kernel: KernelSpec,
    closure: TailClosure,
    h: f64,
    /// `w[k]` for `k < len`; `w[0] = 0`.
    w: Vec<f64>,
    /// `tail[m] = Σ_{k >= m} w_k` for `m <= len`.
    tail: Vec<f64>,
}

impl KernelWeights {
    pub fn new(kernel: &KernelSpec, h: f64, len: usize, closure: TailClosure) -> Result<Self> {
        closure.check(kernel)?;
        let len = len.max(2);
        let panels = len / 2 + 2;
        let pw: Vec<[f64; 3]> = (0..panels).map(|j| panel_weights(kernel, h, j)).collect();
        let singular = kernel.moment(2, 0.0, h) / (h * h);
        let mut w = vec![0.0; len];
        for k in 1..len {
            w[k] = if k == 1 {
                singular + pw[0][0]
            } else if k % 2 == 0 {
                pw[(k - 2) / 2][1]
            } else {
                let j = (k - 1) / 2;
                pw[j - 1][2] + pw[j][0]
            };
        }
        let mut out = KernelWeights {
            kernel: kernel.clone(),
            closure,
            h,
            w,
            tail: Vec::new(),
        };
        let mut tail = vec![0.0; len + 1];
        for (m, t) in tail.iter_mut().enumerate().skip(1) {
            *t = out.tail_direct(m as i64, &pw);
        }
        tail[0] = tail[1];
        out.tail = tail;
        Ok(out)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn closure(&self) -> TailClosure {
        self.closure
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    #[inline]
    pub fn weight(&self, k: usize) -> f64 {
        if k < self.w.len() {
            self.w[k]
        } else {
            let j = (k - 1) / 2;
            if k.is_multiple_of(2) {
                panel_weights(&self.kernel, self.h, (k - 2) / 2)[1]
            } else {
                panel_weights(&self.kernel, self.h, j - 1)[2]
                    + panel_weights(&self.kernel, self.h, j)[0]
            }
        }
    }

    /// `Σ_{k >= m} w_k`, the total weight of all offsets at least `m`.
    /// Zero for the truncated closure beyond the stored offsets.
    pub fn tail_sum(&self, m: i64) -> f64 {
        let m = m.max(1);
        if (m as usize) < self.tail.len() {
            return self.tail[m as usize];
        }
        match self.closure {
            TailClosure::TruncatedZero => 0.0,
            TailClosure::AnalyticPower => self.tail_direct(m, &[]),
        }
    }

    fn tail_direct(&self, m: i64, pw: &[[f64; 3]]) -> f64 {
        let h = self.h;
        let get = |j: usize| -> [f64; 3] {
            if j < pw.len() {
                pw[j]
            } else {
                panel_weights(&self.kernel, h, j)
            }
        };
        let beyond = |t: f64| match self.closure {
            TailClosure::AnalyticPower => self.kernel.moment(0, t, f64::INFINITY),
            TailClosure::TruncatedZero => 0.0,
        };
        if self.closure == TailClosure::TruncatedZero && (m as usize) >= self.w.len().max(1) {
            return 0.0;
        }
        if self.closure == TailClosure::TruncatedZero {
            return self.w[m as usize..].iter().sum();
        }
        if m == 1 {
            return self.kernel.moment(2, 0.0, h) / (h * h) + beyond(h);
        }
        let mf = m as f64;
        if m % 2 == 0 {
            let j = ((m - 2) / 2) as usize;
            let p = get(j);
            p[1] + p[2] + beyond((mf + 1.0) * h)
        } else {
            let j = ((m - 1) / 2) as usize;
            get(j - 1)[2] + beyond(mf * h)
        }
    }
}

/// Lagrange weights of panel `j`, covering offsets `[(2j+1)h, (2j+3)h]`.
pub(crate) fn panel_weights(kernel: &KernelSpec, h: f64, j: usize) -> [f64; 3] {
    let a = (2 * j + 1) as f64 * h;
    let b = a + 2.0 * h;
    let mut cuts = vec![a];
    for seg in kernel_breaks(kernel) {
        if seg > a && seg < b {
            cuts.push(seg);
        }
    }
    cuts.push(b);
    let rule = gauss16();
    let mut out = [0.0; 3];
    for piece in cuts.windows(2) {
        let (lo, hi) = (piece[0], piece[1]);
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for &(xi, wi) in rule {
            let t = mid + half * xi;
            let k = kernel.density(t) * t.powf(-kernel.exponent()) * wi * half;
            let u = (t - a) / h;
            out[0] += 0.5 * (u - 1.0) * (u - 2.0) * k;
            out[1] -= u * (u - 2.0) * k;
            out[2] += 0.5 * u * (u - 1.0) * k;
        }
    }
    out
}

fn kernel_breaks(kernel: &KernelSpec) -> Vec<f64> {
    match &kernel.form {
        KernelForm::PowerLaw { .. } => Vec::new(),
        KernelForm::TruncatedPower { .. } => vec![kernel.r0],
        KernelForm::Tabulated { r, .. } => r.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn quadratics_are_integrated_exactly() {
        let k = KernelSpec::truncated_power(0.4, 1.0, 0.6, 1.234);
        let h = 0.1;
        let w = KernelWeights::new(&k, h, 401, TailClosure::AnalyticPower).unwrap();
        let j = 100;
        let end = (2 * j + 1) as f64 * h;
        let mut sum: f64 = (1..=2 * j).map(|i| w.weight(i) * (i as f64 * h).powi(2)).sum();
        sum += panel_weights(&k, h, j - 1)[2] * end * end;
        let exact = k.moment(2, 0.0, end);
        assert!((sum - exact).abs() / exact < 1e-12, "{sum} {exact}");
    }

    #[test]
    fn tail_sums_are_consistent() {
        let k = KernelSpec::fractional_laplacian(0.5);
        let w = KernelWeights::new(&k, 0.05, 101, TailClosure::AnalyticPower).unwrap();
        for m in 2..100 {
            let d = w.tail_sum(m) - w.tail_sum(m + 1);
            assert!((d - w.weight(m as usize)).abs() < 1e-13 * w.tail_sum(m), "m = {m}");
        }
        // beyond storage
        let d = w.tail_sum(500) - w.tail_sum(501);
        assert!((d - w.weight(500)).abs() < 1e-15);
        // total ∫_h^∞ 1/(π t²) dt plus singular cell
        let expected = 1.0 / (PI * 0.05) + k.moment(2, 0.0, 0.05) / 0.0025;
        assert!((w.tail_sum(1) - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn truncated_closure_has_no_tail() {
        let k = KernelSpec::power_law(0.5, 1.0);
        let w = KernelWeights::new(&k, 0.1, 21, TailClosure::TruncatedZero).unwrap();
        assert_eq!(w.tail_sum(21), 0.0);
        assert!((w.tail_sum(20) - w.weight(20)).abs() < 1e-15);
    }
}
