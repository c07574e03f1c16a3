use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PotentialForm {
    /// `A (1 - cos(2π (u - ζ₁) / (ζ₂ - ζ₁)))`. The default amplitude
    /// `A = ((ζ₂ - ζ₁) / 2π)²` makes `W''(ζ) = 1`.
    Cosine { amplitude: f64 },
    /// `A (u - ζ₁)² (u - ζ₂)²`.
    QuarticDoubleWell { amplitude: f64 },
    /// Cubic Hermite interpolation of `(u, W(u), W'(u))` samples.
    Tabulated { u: Vec<f64>, w: Vec<f64>, dw: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub zeta1: f64,
    pub zeta2: f64,
    pub c0: Option<f64>,
    pub big_c0: Option<f64>,
    pub delta0: f64,
    pub form: PotentialForm,
    /// Wells used by the formula of `form`. Differ from `(zeta1, zeta2)`
    /// by a sign when the potential was reflected to increasing orientation.
    #[serde(default)]
    pub(crate) reflected: bool,
}

impl PotentialSpec {
    /// `W(u) = 1 - cos u` between the wells `0` and `2π`.
    pub fn sine_gordon() -> Self {
        let two_pi = 2.0 * std::f64::consts::PI;
        PotentialSpec {
            zeta1: 0.0,
            zeta2: two_pi,
            c0: None,
            big_c0: None,
            delta0: std::f64::consts::PI,
            form: PotentialForm::Cosine { amplitude: 1.0 },
            reflected: false,
        }
    }

    pub fn cosine(zeta1: f64, zeta2: f64) -> Self {
        let l = (zeta2 - zeta1) / (2.0 * std::f64::consts::PI);
        PotentialSpec {
            zeta1,
            zeta2,
            c0: None,
            big_c0: None,
            delta0: 0.5 * (zeta2 - zeta1).abs(),
            form: PotentialForm::Cosine { amplitude: l * l },
            reflected: false,
        }
    }

    pub fn is_reflected(&self) -> bool {
        self.reflected
    }

    pub fn well_min(&self) -> f64 {
        self.zeta1.min(self.zeta2)
    }

    pub fn well_max(&self) -> f64 {
        self.zeta1.max(self.zeta2)
    }

    /// Same potential seen through `u ↦ -u`.
    pub fn reflect(&self) -> Self {
        let mut out = self.clone();
        out.zeta1 = -self.zeta1;
        out.zeta2 = -self.zeta2;
        out.reflected = !self.reflected;
        out
    }

    /// Wells in the coordinates of the formula.
    fn formula_wells(&self) -> (f64, f64) {
        if self.reflected {
            (-self.zeta1, -self.zeta2)
        } else {
            (self.zeta1, self.zeta2)
        }
    }

    /// Returns `(W(u), W'(u))`.
    pub fn eval(&self, u: f64) -> Result<(f64, f64)> {
        if self.reflected {
            let (w, dw) = self.eval_formula(-u)?;
            Ok((w, -dw))
        } else {
            self.eval_formula(u)
        }
    }

    /// Second derivative by the closed form where available, central
    /// differences for tables.
    pub fn second_derivative(&self, u: f64) -> Result<f64> {
        let (z1, z2) = self.formula_wells();
        let v = if self.reflected { -u } else { u };
        match &self.form {
            PotentialForm::Cosine { amplitude } => {
                let k = 2.0 * std::f64::consts::PI / (z2 - z1);
                Ok(amplitude * k * k * (k * (v - z1)).cos())
            }
            PotentialForm::QuarticDoubleWell { amplitude } => {
                let (a, b) = (v - z1, v - z2);
                Ok(amplitude * 2.0 * (a * a + 4.0 * a * b + b * b))
            }
            PotentialForm::Tabulated { u: us, .. } => {
                let e = 1e-5 * (us[us.len() - 1] - us[0]);
                let lo = (u - e).max(if self.reflected { -us[us.len() - 1] } else { us[0] });
                let hi = (u + e).min(if self.reflected { -us[0] } else { us[us.len() - 1] });
                Ok((self.eval(hi)?.1 - self.eval(lo)?.1) / (hi - lo))
            }
        }
    }

    fn eval_formula(&self, u: f64) -> Result<(f64, f64)> {
        let (z1, z2) = self.formula_wells();
        match &self.form {
            PotentialForm::Cosine { amplitude } => {
                let k = 2.0 * std::f64::consts::PI / (z2 - z1);
                let t = k * (u - z1);
                Ok((amplitude * (1.0 - t.cos()), amplitude * k * t.sin()))
            }
            PotentialForm::QuarticDoubleWell { amplitude } => {
                let (a, b) = (u - z1, u - z2);
                Ok((
                    amplitude * a * a * b * b,
                    amplitude * 2.0 * a * b * (a + b),
                ))
            }
            PotentialForm::Tabulated { u: us, w, dw } => {
                let last = us.len() - 1;
                if !(u >= us[0] && u <= us[last]) {
                    return Err(Error::Domain(format!(
                        "tabulated potential queried at u = {u} outside [{}, {}]",
                        us[0], us[last]
                    )));
                }
                let k = us.partition_point(|&x| x < u).clamp(1, last);
                let h = us[k] - us[k - 1];
                let t = (u - us[k - 1]) / h;
                let (t2, t3) = (t * t, t * t * t);
                let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
                let h10 = t3 - 2.0 * t2 + t;
                let h01 = -2.0 * t3 + 3.0 * t2;
                let h11 = t3 - t2;
                let val = h00 * w[k - 1] + h10 * h * dw[k - 1] + h01 * w[k] + h11 * h * dw[k];
                let d00 = 6.0 * t2 - 6.0 * t;
                let d10 = 3.0 * t2 - 4.0 * t + 1.0;
                let d01 = -6.0 * t2 + 6.0 * t;
                let d11 = 3.0 * t2 - 2.0 * t;
                let der = (d00 * w[k - 1] + d01 * w[k]) / h + d10 * dw[k - 1] + d11 * dw[k];
                Ok((val, der))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.zeta1.is_finite() && self.zeta2.is_finite()) || self.zeta1 == self.zeta2 {
            return Err(Error::Config("potential wells must be finite and distinct".into()));
        }
        if !(self.delta0 > 0.0) {
            return Err(Error::Config("potential.delta0 must be positive".into()));
        }
        if let PotentialForm::Tabulated { u, w, dw } = &self.form {
            if u.len() < 2 || u.len() != w.len() || u.len() != dw.len() {
                return Err(Error::Config(
                    "tabulated potential needs >= 2 samples of matching length".into(),
                ));
            }
            if u.windows(2).any(|p| p[1] <= p[0]) {
                return Err(Error::Config("tabulated potential abscissae must increase".into()));
            }
        }
        Ok(())
    }

    /// `max |W'|` over the well interval, sampled.
    pub fn max_abs_derivative(&self, samples: usize) -> f64 {
        let (lo, hi) = (self.well_min(), self.well_max());
        (0..=samples)
            .filter_map(|i| self.eval(lo + (hi - lo) * i as f64 / samples as f64).ok())
            .map(|(_, d)| d.abs())
            .fold(0.0, f64::max)
    }

    /// `max W''` over the well interval, sampled.
    pub fn max_curvature(&self, samples: usize) -> f64 {
        let (lo, hi) = (self.well_min(), self.well_max());
        (0..=samples)
            .filter_map(|i| self.second_derivative(lo + (hi - lo) * i as f64 / samples as f64).ok())
            .fold(0.0, f64::max)
    }
}
