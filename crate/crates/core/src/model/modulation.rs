use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModulationForm {
    Constant(f64),
    /// `base + eps cos(delta_freq x)`.
    CosinePerturbation { base: f64, eps: f64, delta_freq: f64 },
    /// Piecewise linear through `(x, a)`, constant beyond the ends.
    Tabulated { x: Vec<f64>, a: Vec<f64> },
}

/// Location and strength of the two maxima that pin the transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nondegeneracy {
    pub m1: f64,
    pub m2: f64,
    pub omega: f64,
    pub theta: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulationSpec {
    pub form: ModulationForm,
    pub a_lower: Option<f64>,
    pub a_upper: Option<f64>,
    pub nondegeneracy: Option<Nondegeneracy>,
}

impl ModulationSpec {
    pub fn constant(value: f64) -> Self {
        ModulationSpec {
            form: ModulationForm::Constant(value),
            a_lower: None,
            a_upper: None,
            nondegeneracy: None,
        }
    }

    /// `2 + eps cos(delta x)` with the maxima at `0` and `2π/delta`.
    pub fn periodic(eps: f64, delta: f64) -> Self {
        use std::f64::consts::PI;
        ModulationSpec {
            form: ModulationForm::CosinePerturbation {
                base: 2.0,
                eps,
                delta_freq: delta,
            },
            a_lower: None,
            a_upper: None,
            nondegeneracy: Some(Nondegeneracy {
                m1: 0.0,
                m2: 2.0 * PI / delta,
                omega: PI / (4.0 * delta),
                theta: PI / delta,
                gamma: std::f64::consts::SQRT_2 * eps,
            }),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.form {
            ModulationForm::Constant(v) => *v,
            ModulationForm::CosinePerturbation {
                base,
                eps,
                delta_freq,
            } => base + eps * (delta_freq * x).cos(),
            ModulationForm::Tabulated { x: xs, a } => {
                let last = xs.len() - 1;
                if x <= xs[0] {
                    return a[0];
                }
                if x >= xs[last] {
                    return a[last];
                }
                let k = xs.partition_point(|&t| t < x).max(1);
                let t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
                a[k - 1] * (1.0 - t) + a[k] * t
            }
        }
    }

    /// Declared bounds, or the exact range of the form when undeclared.
    pub fn bounds(&self) -> (f64, f64) {
        let (lo, hi) = match &self.form {
            ModulationForm::Constant(v) => (*v, *v),
            ModulationForm::CosinePerturbation { base, eps, .. } => {
                (base - eps.abs(), base + eps.abs())
            }
            ModulationForm::Tabulated { a, .. } => (
                a.iter().copied().fold(f64::INFINITY, f64::min),
                a.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ),
        };
        (self.a_lower.unwrap_or(lo), self.a_upper.unwrap_or(hi))
    }

    pub fn is_constant(&self) -> bool {
        match &self.form {
            ModulationForm::Constant(_) => true,
            ModulationForm::CosinePerturbation { eps, .. } => *eps == 0.0,
            ModulationForm::Tabulated { a, .. } => a.iter().all(|&v| v == a[0]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let ModulationForm::Tabulated { x, a } = &self.form {
            if x.is_empty() || x.len() != a.len() || x.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Config(
                    "tabulated modulation needs increasing abscissae of matching length".into(),
                ));
            }
        }
        if let Some(nd) = &self.nondegeneracy {
            if !(nd.omega >= 0.0 && nd.theta > 0.0) {
                return Err(Error::Config(
                    "modulation needs omega >= 0 and theta > 0".into(),
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_parameters() {
        let m = ModulationSpec::periodic(0.5, 0.5);
        let nd = m.nondegeneracy.unwrap();
        assert!((nd.m2 - 4.0 * std::f64::consts::PI).abs() < 1e-14);
        assert!((nd.omega - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
        assert!((nd.theta - 2.0 * std::f64::consts::PI).abs() < 1e-14);
        assert_eq!(m.bounds(), (1.5, 2.5));
        assert_eq!(m.eval(0.0), 2.5);
    }

    #[test]
    fn tabulated_holds_ends() {
        let m = ModulationSpec {
            form: ModulationForm::Tabulated {
                x: vec![0.0, 1.0],
                a: vec![1.0, 3.0],
            },
            a_lower: None,
            a_upper: None,
            nondegeneracy: None,
        };
        assert_eq!(m.eval(-5.0), 1.0);
        assert_eq!(m.eval(0.25), 1.5);
        assert_eq!(m.eval(9.0), 3.0);
    }
}
