use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of the interaction kernel.
///
/// Every form is stored as `K(r) = g(|r|) / |r|^{1+2s}` where `g` is
/// piecewise linear, which lets the discretization integrate the kernel
/// against polynomials in closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum KernelForm {
    /// `K(r) = c / |r|^{1+2s}`.
    PowerLaw { c: f64 },
    /// `c / |r|^{1+2s}` for `|r| <= r0`, `c_far / |r|^{1+2s}` beyond.
    TruncatedPower { c: f64, c_far: f64 },
    /// User samples `(r_k, K(r_k))`, `r_k > 0` increasing. The normalized
    /// density `K r^{1+2s}` is interpolated linearly, held constant below
    /// the first sample and set to zero beyond the last.
    Tabulated { r: Vec<f64>, density: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub s: f64,
    pub theta0: f64,
    #[serde(rename = "Theta0")]
    pub big_theta0: f64,
    pub r0: f64,
    pub form: KernelForm,
}

/// One linear piece `g(t) = alpha + beta * t` on `(lo, hi)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Normalization making `c/|r|^{1+2s}` the fractional Laplacian `(-Δ)^s`.
/// Equals `1/π` at `s = 1/2`.
pub fn fractional_laplacian_constant(s: f64) -> f64 {
    use statrs::function::gamma::gamma;
    s * 4f64.powf(s) * gamma(0.5 + s) / (std::f64::consts::PI.sqrt() * gamma(1.0 - s))
}

impl KernelSpec {
    pub fn power_law(s: f64, c: f64) -> Self {
        KernelSpec {
            s,
            theta0: c,
            big_theta0: c,
            r0: 1.0,
            form: KernelForm::PowerLaw { c },
        }
    }

    /// Power law with the `(-Δ)^s` normalization; `1/(π r²)` at `s = 1/2`.
    pub fn fractional_laplacian(s: f64) -> Self {
        Self::power_law(s, fractional_laplacian_constant(s))
    }

    pub fn truncated_power(s: f64, c: f64, c_far: f64, r0: f64) -> Self {
        KernelSpec {
            s,
            theta0: c,
            big_theta0: c.max(c_far),
            r0,
            form: KernelForm::TruncatedPower { c, c_far },
        }
    }

    pub fn exponent(&self) -> f64 {
        1.0 + 2.0 * self.s
    }

    pub fn is_power_type(&self) -> bool {
        !matches!(self.form, KernelForm::Tabulated { .. })
    }

    /// Normalized density `g(r) = K(r) |r|^{1+2s}` at `r > 0`.
    pub(crate) fn density(&self, r: f64) -> f64 {
        match &self.form {
            KernelForm::PowerLaw { c } => *c,
            KernelForm::TruncatedPower { c, c_far } => {
                if r <= self.r0 {
                    *c
                } else {
                    *c_far
                }
            }
            KernelForm::Tabulated { r: rs, density } => {
                let e = self.exponent();
                let g = |k: usize| density[k] * rs[k].powf(e);
                if r <= rs[0] {
                    return g(0);
                }
                let last = rs.len() - 1;
                if r > rs[last] {
                    return 0.0;
                }
                let k = rs.partition_point(|&x| x < r).max(1);
                let t = (r - rs[k - 1]) / (rs[k] - rs[k - 1]);
                g(k - 1) * (1.0 - t) + g(k) * t
            }
        }
    }

    /// Evaluates `K(r)`. The kernel is singular at the origin.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if r == 0.0 || !r.is_finite() {
            return Err(Error::Domain(format!(
                "kernel evaluated at r = {r}; K is singular at the origin"
            )));
        }
        let a = r.abs();
        Ok(self.density(a) * a.powf(-self.exponent()))
    }

    pub(crate) fn segments(&self) -> Vec<Segment> {
        match &self.form {
            KernelForm::PowerLaw { c } => vec![Segment {
                lo: 0.0,
                hi: f64::INFINITY,
                alpha: *c,
                beta: 0.0,
            }],
            KernelForm::TruncatedPower { c, c_far } => vec![
                Segment {
                    lo: 0.0,
                    hi: self.r0,
                    alpha: *c,
                    beta: 0.0,
                },
                Segment {
                    lo: self.r0,
                    hi: f64::INFINITY,
                    alpha: *c_far,
                    beta: 0.0,
                },
            ],
            KernelForm::Tabulated { r, density } => {
                let e = self.exponent();
                let g: Vec<f64> = r
                    .iter()
                    .zip(density)
                    .map(|(&x, &d)| d * x.powf(e))
                    .collect();
                let mut segs = vec![Segment {
                    lo: 0.0,
                    hi: r[0],
                    alpha: g[0],
                    beta: 0.0,
                }];
                for k in 1..r.len() {
                    let beta = (g[k] - g[k - 1]) / (r[k] - r[k - 1]);
                    segs.push(Segment {
                        lo: r[k - 1],
                        hi: r[k],
                        alpha: g[k - 1] - beta * r[k - 1],
                        beta,
                    });
                }
                segs
            }
        }
    }

    /// `∫_a^b t^p K(t) dt` for `0 <= a < b <= ∞`, exact for every form.
    ///
    /// Returns `+∞` when the integral diverges.
    pub fn moment(&self, p: i32, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let e = self.exponent();
        let mut total = 0.0;
        for seg in self.segments() {
            let lo = seg.lo.max(a);
            let hi = seg.hi.min(b);
            if hi <= lo {
                continue;
            }
            if seg.alpha != 0.0 {
                total += seg.alpha * power_integral(p as f64 - e, lo, hi);
            }
            if seg.beta != 0.0 {
                total += seg.beta * power_integral(p as f64 + 1.0 - e, lo, hi);
            }
        }
        total
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.25 && self.s <= 0.5) {
            return Err(Error::Config(format!(
                "kernel.s = {} outside (1/4, 1/2]",
                self.s
            )));
        }
        if !(self.theta0 > 0.0 && self.big_theta0 >= self.theta0 && self.r0 > 0.0) {
            return Err(Error::Config(
                "kernel constants need Theta0 >= theta0 > 0 and r0 > 0".into(),
            ));
        }
        if let KernelForm::Tabulated { r, density } = &self.form {
            if r.len() < 2 || r.len() != density.len() {
                return Err(Error::Config(
                    "tabulated kernel needs >= 2 samples of matching length".into(),
                ));
            }
            if r[0] <= 0.0 || r.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Config(
                    "tabulated kernel radii must be positive and increasing".into(),
                ));
            }
            if density.iter().any(|&d| d < 0.0) {
                return Err(Error::Config("tabulated kernel must be non-negative".into()));
            }
        }
        Ok(())
    }
}

/// `∫_lo^hi t^q dt`, written with `expm1` so that exponents near `-1`
/// do not lose precision.
pub(crate) fn power_integral(q: f64, lo: f64, hi: f64) -> f64 {
    let k = q + 1.0;
    if hi.is_infinite() {
        if k >= 0.0 {
            return f64::INFINITY;
        }
        return -lo.powf(k) / k;
    }
    if lo == 0.0 {
        if k <= 0.0 {
            return f64::INFINITY;
        }
        return hi.powf(k) / k;
    }
    let l = (hi / lo).ln();
    if k.abs() < 1e-14 {
        return l;
    }
    lo.powf(k) * (k * l).exp_m1() / k
}
