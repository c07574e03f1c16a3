use serde::Serialize;

use super::{KernelForm, ProblemSpec};

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub description: &'static str,
    /// `None` when the hypothesis was not declared and could not be checked.
    pub passed: Option<bool>,
    /// Smallest margin found; negative means violated.
    pub margin: f64,
    /// Sample at which the margin was attained.
    pub worst_at: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckOutcome>,
    /// Inputs that fell back to library defaults.
    pub defaulted: Vec<String>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed != Some(false))
    }

    pub fn failures(&self) -> Vec<&CheckOutcome> {
        self.checks.iter().filter(|c| c.passed == Some(false)).collect()
    }

    pub fn get(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Worst {
    margin: f64,
    at: Option<f64>,
}

impl Worst {
    fn new() -> Self {
        Worst {
            margin: f64::INFINITY,
            at: None,
        }
    }
    fn push(&mut self, margin: f64, at: f64) {
        if margin < self.margin || margin.is_nan() {
            self.margin = margin;
            self.at = Some(at);
        }
    }
}

fn outcome(name: &'static str, description: &'static str, w: Worst, tol: f64) -> CheckOutcome {
    CheckOutcome {
        name,
        description,
        passed: Some(w.margin >= -tol),
        margin: w.margin,
        worst_at: w.at,
    }
}

/// Samples every structural hypothesis of the model. Failures are reported,
/// never raised.
pub fn verify_model(spec: &ProblemSpec, sample_count: usize) -> ValidationReport {
    let n = sample_count.max(100);
    let mut checks = Vec::new();
    let mut defaulted = Vec::new();
    let k = &spec.kernel;

    let mut w = Worst::new();
    w.push((k.s - 0.25).min(0.5 - k.s), k.s);
    checks.push(CheckOutcome {
        passed: Some(k.s > 0.25 && k.s <= 0.5),
        ..outcome("kernel.exponent_range", "1/4 < s <= 1/2", w, 0.0)
    });

    let radii: Vec<f64> = (0..n)
        .map(|i| 10f64.powf(-6.0 + 7.0 * (i as f64 + 1.0) / n as f64))
        .collect();
    let mut even = Worst::new();
    let mut sandwich = Worst::new();
    for &r in &radii {
        match (k.eval(r), k.eval(-r)) {
            (Ok(a), Ok(b)) => {
                even.push(-(a - b).abs(), r);
                let scaled = a * r.powf(k.exponent());
                let lower = if r <= k.r0 { k.theta0 } else { 0.0 };
                let slack = 1e-12 * k.big_theta0;
                sandwich.push(((scaled - lower).min(k.big_theta0 - scaled)) + slack, r);
            }
            _ => even.push(f64::NEG_INFINITY, r),
        }
    }
    checks.push(outcome("kernel.even", "K(r) = K(-r)", even, 0.0));
    checks.push(outcome(
        "kernel.ellipticity",
        "theta0 chi_[0,r0] / |r|^(1+2s) <= K <= Theta0 / |r|^(1+2s)",
        sandwich,
        0.0,
    ));
    if matches!(k.form, KernelForm::PowerLaw { .. }) && k.s == 0.5 {
        defaulted.push("kernel normalization 1/(pi r^2) when kernel.c is omitted".into());
    }

    let p = &spec.potential;
    let (z1, z2) = (p.well_min(), p.well_max());
    let mut wells = Worst::new();
    for z in [z1, z2] {
        match p.eval(z) {
            Ok((v, _)) => wells.push(1e-12 - v.abs(), z),
            Err(_) => wells.push(f64::NEG_INFINITY, z),
        }
    }
    checks.push(outcome("potential.wells", "W(zeta1) = W(zeta2) = 0", wells, 0.0));

    let mut positive = Worst::new();
    for i in 1..n {
        let u = z1 + (z2 - z1) * i as f64 / n as f64;
        let v = p.eval(u).map(|x| x.0).unwrap_or(f64::NEG_INFINITY);
        positive.push(v, u);
    }
    let pos_ok = positive.margin > 0.0;
    checks.push(CheckOutcome {
        passed: Some(pos_ok),
        ..outcome("potential.positive", "W > 0 strictly between the wells", positive, 0.0)
    });

    // quadratic growth ratios W(ζ+ξ)/ξ² on 0 < |ξ| <= δ0, clipped to the
    // well interval for the two inner sides
    let mut lo_ratio = f64::INFINITY;
    let mut hi_ratio = f64::NEG_INFINITY;
    let mut lo_at = None;
    let mut hi_at = None;
    let mut monotone = Worst::new();
    let mut w_scale: f64 = 0.0;
    for (zeta, inward) in [(z1, 1.0), (z2, -1.0)] {
        for side in [inward, -inward] {
            for i in 1..=n {
                let xi = p.delta0 * i as f64 / n as f64;
                let u = zeta + side * xi;
                let Ok((v, d)) = p.eval(u) else { continue };
                w_scale = w_scale.max(v.abs());
                // rounding of W near a well is absolute, so shrink the ratio
                // toward the interval it can certify
                let slack = 8.0 * f64::EPSILON * w_scale.max(1.0) / (xi * xi);
                let ratio = v / (xi * xi);
                if ratio + slack < lo_ratio {
                    lo_ratio = ratio + slack;
                    lo_at = Some(u);
                }
                if ratio - slack > hi_ratio {
                    hi_ratio = ratio - slack;
                    hi_at = Some(u);
                }
                if xi < p.delta0 {
                    monotone.push(d * side, u);
                }
            }
        }
    }
    let (c0, big_c0) = match (p.c0, p.big_c0) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            defaulted.push(format!(
                "growth constants measured: c0 = {lo_ratio:.6e}, C0 = {hi_ratio:.6e}"
            ));
            (p.c0.unwrap_or(lo_ratio), p.big_c0.unwrap_or(hi_ratio))
        }
    };
    let growth_margin_lo = lo_ratio - c0 * (1.0 - 1e-9);
    let growth_margin_hi = big_c0 * (1.0 + 1e-9) - hi_ratio;
    let (margin, at) = if growth_margin_lo < growth_margin_hi {
        (growth_margin_lo, lo_at)
    } else {
        (growth_margin_hi, hi_at)
    };
    checks.push(CheckOutcome {
        name: "potential.quadratic_growth",
        description: "c0 xi^2 <= W(zeta + xi) <= C0 xi^2 for |xi| <= delta0",
        passed: Some(margin >= 0.0 && c0 > 0.0),
        margin,
        worst_at: at,
    });
    checks.push(CheckOutcome {
        passed: Some(monotone.margin > 0.0),
        ..outcome(
            "potential.monotone_near_wells",
            "sign W'(zeta +- xi) = +-1 for 0 < xi < delta0",
            monotone,
            0.0,
        )
    });
    if matches!(p.form, super::PotentialForm::Cosine { .. }) {
        defaulted.push("cosine potential".into());
    }

    let m = &spec.modulation;
    let (a_lo, a_hi) = m.bounds();
    if m.a_lower.is_none() || m.a_upper.is_none() {
        defaulted.push(format!("modulation bounds from form: [{a_lo}, {a_hi}]"));
    }
    let mut span_lo = -100.0f64;
    let mut span_hi = 100.0f64;
    if let Some(nd) = &m.nondegeneracy {
        span_lo = span_lo.min(nd.m1 - nd.omega - nd.theta - 1.0);
        span_hi = span_hi.max(nd.m2 + nd.omega + nd.theta + 1.0);
    }
    let mut range = Worst::new();
    for i in 0..=n {
        let x = span_lo + (span_hi - span_lo) * i as f64 / n as f64;
        let a = m.eval(x);
        range.push((a - a_lo).min(a_hi - a), x);
    }
    range.push(a_lo, f64::NAN);
    let range_ok = range.margin >= -1e-12 && a_lo > 0.0;
    checks.push(CheckOutcome {
        passed: Some(range_ok),
        ..outcome("modulation.range", "0 < a_lower <= a(x) <= a_upper", range, 1e-12)
    });

    match &m.nondegeneracy {
        Some(nd) => {
            let mut sep = Worst::new();
            sep.push(nd.m2 - nd.m1 - 2.0 * nd.omega - nd.theta, nd.m1);
            checks.push(outcome(
                "modulation.separation",
                "m2 - m1 >= 2 omega + theta",
                sep,
                1e-12,
            ));
            let mut nondeg = Worst::new();
            for mi in [nd.m1, nd.m2] {
                for i in 0..=n {
                    let x = mi - nd.omega + 2.0 * nd.omega * i as f64 / n as f64;
                    let a = m.eval(x);
                    let gap = (a - m.eval(x - nd.theta)).min(a - m.eval(x + nd.theta));
                    nondeg.push(gap, x);
                }
            }
            let margin = nondeg.margin;
            checks.push(CheckOutcome {
                name: "modulation.nondegenerate",
                description: "a(x) - a(x +- theta) >= gamma on [m_i - omega, m_i + omega]",
                passed: Some(margin >= nd.gamma * (1.0 - 1e-9)),
                margin,
                worst_at: nondeg.at,
            });
        }
        None => {
            checks.push(CheckOutcome {
                name: "modulation.nondegenerate",
                description: "a(x) - a(x +- theta) >= gamma on [m_i - omega, m_i + omega]",
                passed: None,
                margin: f64::NAN,
                worst_at: None,
            });
        }
    }

    let r = spec.reference();
    let mut inside = Worst::new();
    for i in 1..n {
        let x = -1.0 + 2.0 * i as f64 / n as f64;
        let q = r.eval(x);
        inside.push((q - z1).min(z2 - q), x);
    }
    let exact_ends = r.eval(-1.0) == r.zeta1 && r.eval(1.0) == r.zeta2;
    checks.push(CheckOutcome {
        passed: Some(inside.margin > 0.0 && exact_ends),
        ..outcome(
            "reference.range",
            "reference profile strictly between the wells on (-1, 1)",
            inside,
            0.0,
        )
    });

    ValidationReport { checks, defaulted }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModulationSpec, PotentialSpec};
    use std::f64::consts::PI;

    #[test]
    fn sine_gordon_growth_constants() {
        let mut spec = ProblemSpec::peierls_nabarro();
        spec.potential = PotentialSpec {
            c0: Some(2.0 / (PI * PI)),
            big_c0: Some(0.5),
            delta0: PI / 2.0,
            ..PotentialSpec::sine_gordon()
        };
        let rep = verify_model(&spec, 10_000);
        let g = rep.get("potential.quadratic_growth").unwrap();
        assert_eq!(g.passed, Some(true), "{g:?}");
        // (1 - cos ξ)/ξ² is smallest at ξ = π/2: 1/(π/2)² = 4/π²
        spec.potential.c0 = Some(4.0 / (PI * PI) * 1.001);
        let rep = verify_model(&spec, 10_000);
        assert_eq!(rep.get("potential.quadratic_growth").unwrap().passed, Some(false));
    }

    #[test]
    fn periodic_margin() {
        for &eps in &[0.25, 0.5, 1.0] {
            for &delta in &[0.25, 0.5, 1.0] {
                let spec = ProblemSpec {
                    modulation: ModulationSpec::periodic(eps, delta),
                    ..ProblemSpec::peierls_nabarro()
                };
                let rep = verify_model(&spec, 10_000);
                assert!(rep.all_pass(), "{:?}", rep.failures());
                let m = rep.get("modulation.nondegenerate").unwrap().margin;
                assert!((m - 2f64.sqrt() * eps).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn constant_modulation_fails_nondegeneracy() {
        let mut modulation = ModulationSpec::constant(2.0);
        modulation.nondegeneracy = Some(crate::model::Nondegeneracy {
            m1: 0.0,
            m2: 10.0,
            omega: 1.0,
            theta: 2.0,
            gamma: 0.1,
        });
        let spec = ProblemSpec {
            modulation,
            ..ProblemSpec::peierls_nabarro()
        };
        let rep = verify_model(&spec, 1000);
        assert!(!rep.all_pass());
        assert_eq!(rep.failures()[0].name, "modulation.nondegenerate");
    }

    #[test]
    fn undeclared_nondegeneracy_is_skipped() {
        let rep = verify_model(&ProblemSpec::peierls_nabarro(), 1000);
        assert!(rep.all_pass());
        assert_eq!(rep.get("modulation.nondegenerate").unwrap().passed, None);
    }
}
