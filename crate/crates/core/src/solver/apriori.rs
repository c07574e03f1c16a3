use serde::{Deserialize, Serialize};

use super::SolveResult;
use crate::energy::EnergyModel;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AprioriEntry {
    pub name: String,
    pub value: f64,
    /// Scaling in `η`, `μ` the quantity is bounded by, written with `κ`.
    pub scaling: String,
    /// `κ` such that the bound is attained; `None` where the scaling degenerates.
    pub implied_kappa: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AprioriReport {
    pub eta: f64,
    pub mu: f64,
    pub entries: Vec<AprioriEntry>,
    /// Within-band check: every profile value between the wells.
    pub sandwich: bool,
    pub flagged: bool,
}

impl AprioriReport {
    pub fn get(&self, name: &str) -> Option<&AprioriEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

pub const KAPPA_LIMIT: f64 = 1e6;

/// Measured size of `v = Q - Q♯` next to the bounds a constrained minimizer
/// obeys at viscosity `η` and penalty `μ`.
pub fn verify_apriori_bounds(model: &EnergyModel, result: &SolveResult, eta: f64, mu: f64) -> Result<AprioriReport> {
    let q = &result.profile;
    let spec = model.spec();
    let g = *model.grid();
    let v: Vec<f64> = q.values.iter().zip(&model.qsharp().values).map(|(a, b)| a - b).collect();
    let (n, h) = (g.n, g.h);
    let h1 = ((0..n - 1).map(|i| (v[i + 1] - v[i]).powi(2)).sum::<f64>() / h).sqrt();
    let lv = model.operator().apply(&v, 0.0, 0.0);
    let semi = (2.0 * h * v.iter().zip(&lv).map(|(a, b)| a * b).sum::<f64>()).max(0.0).sqrt();
    let sup = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let l2 = (0..n).map(|i| g.trapezoid(i) * v[i] * v[i]).sum::<f64>().sqrt();
    let interaction = 4.0 * model.breakdown(q, eta, mu)?.interaction;
    let positive = |x: f64| if x > 0.0 { Some(x) } else { None };
    let entries = vec![
        AprioriEntry {
            name: "v_h1".into(),
            value: h1,
            scaling: "kappa/sqrt(eta mu)".into(),
            implied_kappa: positive(eta * mu).map(|p| h1 * p.sqrt()),
        },
        AprioriEntry {
            name: "v_kernel".into(),
            value: semi,
            scaling: "kappa/sqrt(mu)".into(),
            implied_kappa: positive(mu).map(|m| semi * m.sqrt()),
        },
        AprioriEntry {
            name: "v_sup".into(),
            value: sup,
            scaling: "kappa".into(),
            implied_kappa: Some(sup),
        },
        AprioriEntry {
            name: "v_l2".into(),
            value: l2,
            scaling: "kappa/mu".into(),
            implied_kappa: positive(mu).map(|m| l2 * m),
        },
        AprioriEntry {
            name: "interaction".into(),
            value: interaction,
            scaling: "-kappa/mu^2".into(),
            implied_kappa: positive(mu).map(|m| (-interaction).max(0.0) * m * m),
        },
    ];
    let (lo, hi) = (spec.potential.well_min(), spec.potential.well_max());
    let sandwich = q.values.iter().all(|&x| x >= lo && x <= hi);
    let flagged = entries
        .iter()
        .any(|e| e.implied_kappa.is_some_and(|k| !(k <= KAPPA_LIMIT)));
    Ok(AprioriReport {
        eta,
        mu,
        entries,
        sandwich,
        flagged,
    })
}
