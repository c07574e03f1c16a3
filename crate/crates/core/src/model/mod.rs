//! Kernel, potential, modulation and the reference transition profile.

mod kernel;
mod modulation;
mod potential;
mod reference;
mod verify;

pub use kernel::{fractional_laplacian_constant, KernelForm, KernelSpec};
pub use modulation::{ModulationForm, ModulationSpec, Nondegeneracy};
pub use potential::{PotentialForm, PotentialSpec};
pub use reference::ReferenceProfile;
pub use verify::{verify_model, CheckOutcome, ValidationReport};

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub kernel: KernelSpec,
    pub potential: PotentialSpec,
    pub modulation: ModulationSpec,
}

impl ProblemSpec {
    /// `a ≡ 1`, `W = 1 - cos u`, `K = 1/(π r²)`.
    pub fn peierls_nabarro() -> Self {
        ProblemSpec {
            kernel: KernelSpec::fractional_laplacian(0.5),
            potential: PotentialSpec::sine_gordon(),
            modulation: ModulationSpec::constant(1.0),
        }
    }

    pub fn reference(&self) -> ReferenceProfile {
        ReferenceProfile::new(self.potential.zeta1, self.potential.zeta2)
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        self.potential.validate()?;
        self.modulation.validate()
    }

    /// Problem with increasing wells, and whether `u ↦ -u` was applied.
    pub fn canonical(&self) -> (ProblemSpec, bool) {
        if self.potential.zeta1 > self.potential.zeta2 {
            let mut out = self.clone();
            out.potential = self.potential.reflect();
            (out, true)
        } else {
            (self.clone(), false)
        }
    }

    pub fn reflect(&self) -> ProblemSpec {
        let mut out = self.clone();
        out.potential = self.potential.reflect();
        out
    }

    /// `‖a W'‖∞` over the well interval.
    pub fn force_bound(&self) -> f64 {
        self.modulation.bounds().1 * self.potential.max_abs_derivative(2000)
    }

    /// Parameters of the explicit layer `ζ₁ + (L/2π)(π + 2 arctan(λ x))`,
    /// when the model admits it: `s = 1/2`, constant `a`, cosine `W` and a
    /// `1/(π r²)` power kernel.
    pub fn explicit_layer_rate(&self) -> Option<f64> {
        use std::f64::consts::PI;
        let c = match self.kernel.form {
            KernelForm::PowerLaw { c } => c,
            _ => return None,
        };
        if self.kernel.s != 0.5 || (c - 1.0 / PI).abs() > 1e-12 || !self.modulation.is_constant() {
            return None;
        }
        let amp = match self.potential.form {
            PotentialForm::Cosine { amplitude } => amplitude,
            _ => return None,
        };
        let l = self.potential.zeta2 - self.potential.zeta1;
        let a0 = self.modulation.eval(0.0);
        Some(a0 * amp * (2.0 * PI / l).powi(2))
    }

    pub fn explicit_layer(&self, x: f64) -> Option<f64> {
        use std::f64::consts::PI;
        let lambda = self.explicit_layer_rate()?;
        let (z1, z2) = (self.potential.zeta1, self.potential.zeta2);
        Some(z1 + (z2 - z1) / (2.0 * PI) * (PI + 2.0 * (lambda * x).atan()))
    }
}
