use serde::{Deserialize, Serialize};

use crate::discretize::{seminorm_sq, Interval, Profile};
use crate::energy::EnergyModel;
use crate::error::{Error, Result};
use crate::obstacles::ObstaclePair;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StickinessReport {
    pub x1: f64,
    pub x2: f64,
    pub well: f64,
    pub viscous: f64,
    pub penalty: f64,
    pub interaction: f64,
    pub potential: f64,
    pub localized_energy: f64,
    pub sup_dev: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StickinessParams {
    /// Closeness `ρ` required of `Q` at both points.
    pub rho: f64,
    /// Obstacle offset `r`; the deviation must stay below `r/2`.
    pub r: f64,
    /// Pass threshold for the localized energy.
    pub tol: f64,
}

impl StickinessParams {
    pub fn new(rho: f64, r: f64) -> Self {
        StickinessParams { rho, r, tol: 1e-2 }
    }
}

/// Energy of `Q` localized to `(x₁, x₂)` and its deviation from the well
/// both end points are close to.
pub fn stickiness_check(
    model: &EnergyModel,
    q: &Profile,
    x1: f64,
    x2: f64,
    eta: f64,
    mu: f64,
    params: &StickinessParams,
) -> Result<StickinessReport> {
    if x2 < x1 + 4.0 {
        return Err(Error::Precondition(format!("need x2 >= x1 + 4, got {x1}, {x2}")));
    }
    let g = *model.grid();
    q.check_same_grid(model.qsharp())?;
    let spec = model.spec();
    let (i1, i2) = (g.nearest(x1), g.nearest(x2));
    let (v1, v2) = (q.values[i1], q.values[i2]);
    let well = [spec.potential.zeta1, spec.potential.zeta2]
        .into_iter()
        .find(|z| (v1 - z).abs() <= params.rho && (v2 - z).abs() <= params.rho)
        .ok_or_else(|| {
            Error::Precondition(format!(
                "Q({x1}) = {v1} and Q({x2}) = {v2} are not both within {} of one well",
                params.rho
            ))
        })?;
    let iv = Interval::new(x1, x2);
    let inside: Vec<usize> = (0..g.n).filter(|&i| iv.contains(g.x(i))).collect();
    let u = &q.values;
    let qs = &model.qsharp().values;
    let a = model.modulation_samples();
    let viscous = 0.5 * eta * inside.windows(2).map(|w| (u[w[1]] - u[w[0]]).powi(2)).sum::<f64>() / g.h;
    let penalty = 0.5 * mu * inside.iter().map(|&i| g.trapezoid(i) * (u[i] - qs[i]).powi(2)).sum::<f64>();
    let mut potential = 0.0;
    for &i in &inside {
        potential += g.trapezoid(i) * a[i] * spec.potential.eval(u[i])?.0;
    }
    let interaction = 0.25 * seminorm_sq(model.kernel_weights(), q, &iv, &iv);
    let localized_energy = viscous + penalty + interaction + potential;
    let sup_dev = inside.iter().map(|&i| (u[i] - well).abs()).fold(0.0, f64::max);
    Ok(StickinessReport {
        x1,
        x2,
        well,
        viscous,
        penalty,
        interaction,
        potential,
        localized_energy,
        sup_dev,
        pass: sup_dev <= 0.5 * params.r && localized_energy <= params.tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsNode {
    pub node: usize,
    pub x: f64,
    pub value: f64,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsReport {
    pub lo: f64,
    pub hi: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub min_value: f64,
    pub max_value: f64,
    pub slack: f64,
    pub worst: Option<LsNode>,
    pub pass: bool,
}

/// Slack for [`lewy_stampacchia_check`]: ten times the stationarity
/// tolerance of a default solve, in residual units.
pub fn default_ls_slack(model: &EnergyModel) -> f64 {
    let g = model.grid();
    10.0 * 1e-8 * g.n as f64 / g.h
}

fn second_difference(p: &Profile, i: usize) -> f64 {
    let h = p.grid.h;
    (p.at(i as i64 + 1) - 2.0 * p.at(i as i64) + p.at(i as i64 - 1)) / (h * h)
}

/// Two-sided bound on `-η Q'' + 𝓛Q` over the interior nodes of `iv` in
/// terms of the envelopes and `f = -aW'(Q) - μ(Q - Q♯)`.
pub fn lewy_stampacchia_check(
    model: &EnergyModel,
    q: &Profile,
    pair: &ObstaclePair,
    eta: f64,
    mu: f64,
    iv: &Interval,
    slack: f64,
) -> Result<LsReport> {
    let g = *model.grid();
    q.check_same_grid(&pair.upper)?;
    let spec = model.spec();
    let op = model.operator();
    let nodes: Vec<usize> = (1..g.n - 1)
        .filter(|&i| {
            let x = g.x(i);
            x > iv.lo + 1e-9 * g.h && x < iv.hi - 1e-9 * g.h
        })
        .collect();
    if nodes.is_empty() {
        return Err(Error::Domain(format!("no interior node in [{}, {})", iv.lo, iv.hi)));
    }
    let lq = op.apply_profile(q);
    let lphi = op.apply_profile(&pair.upper);
    let lpsi = op.apply_profile(&pair.lower);
    let a = model.modulation_samples();
    let qs = &model.qsharp().values;
    let mut f_min = f64::INFINITY;
    let mut f_max = f64::NEG_INFINITY;
    let mut phi_min = f64::INFINITY;
    let mut psi_max = f64::NEG_INFINITY;
    let mut values = Vec::with_capacity(nodes.len());
    for &i in &nodes {
        let (_, dw) = spec.potential.eval(q.values[i])?;
        let f = -a[i] * dw - mu * (q.values[i] - qs[i]);
        f_min = f_min.min(f);
        f_max = f_max.max(f);
        phi_min = phi_min.min(-second_difference(&pair.upper, i).abs() + lphi[i]);
        psi_max = psi_max.max(second_difference(&pair.lower, i).abs() + lpsi[i]);
        values.push(-eta * second_difference(q, i) + lq[i]);
    }
    let lower_bound = phi_min.min(f_min);
    let upper_bound = psi_max.max(f_max);
    let mut worst: Option<LsNode> = None;
    for (&i, &v) in nodes.iter().zip(&values) {
        let excess = (lower_bound - v).max(v - upper_bound);
        if worst.as_ref().is_none_or(|w| excess > w.excess) {
            worst = Some(LsNode {
                node: i,
                x: g.x(i),
                value: v,
                excess,
            });
        }
    }
    let pass = worst.as_ref().is_none_or(|w| w.excess <= slack);
    Ok(LsReport {
        lo: iv.lo,
        hi: iv.hi,
        lower_bound,
        upper_bound,
        min_value: values.iter().copied().fold(f64::INFINITY, f64::min),
        max_value: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        slack,
        worst,
        pass,
    })
}
