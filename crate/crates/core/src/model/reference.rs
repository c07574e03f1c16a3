use serde::{Deserialize, Serialize};

/// Fixed transition profile: `ζ₁` left of `-1`, `ζ₂` right of `1`, a
/// quintic smoothstep in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceProfile {
    pub zeta1: f64,
    pub zeta2: f64,
}

fn smoothstep(t: f64) -> f64 {
    t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
}

fn smoothstep_slope(t: f64) -> f64 {
    30.0 * t * t * (1.0 - t) * (1.0 - t)
}

impl ReferenceProfile {
    pub fn new(zeta1: f64, zeta2: f64) -> Self {
        ReferenceProfile { zeta1, zeta2 }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= -1.0 {
            self.zeta1
        } else if x >= 1.0 {
            self.zeta2
        } else {
            self.zeta1 + (self.zeta2 - self.zeta1) * smoothstep(0.5 * (x + 1.0))
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        if x.abs() >= 1.0 {
            0.0
        } else {
            0.5 * (self.zeta2 - self.zeta1) * smoothstep_slope(0.5 * (x + 1.0))
        }
    }

    /// `sup |Q♯| + sup |Q♯'|`.
    pub fn c1_norm(&self) -> f64 {
        self.zeta1.abs().max(self.zeta2.abs()) + 0.5 * 1.875 * (self.zeta2 - self.zeta1).abs()
    }
}
