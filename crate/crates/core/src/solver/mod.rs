//! Constrained minimization and the viscosity/penalty continuation.

mod apriori;
mod continuation;
mod minimize;

use serde::{Deserialize, Serialize};

pub use apriori::{verify_apriori_bounds, AprioriEntry, AprioriReport, KAPPA_LIMIT};
pub use continuation::{
    continuation_run, continuation_run_with, limit_check, ContinuationSchedule, LimitCheck,
    RunOptions, Stage, StageRecord, TailCheck,
};
pub use minimize::{minimize_box, Bounds, IterRecord, MinimizeOutcome, SolverConfig, StepRule};

use crate::discretize::{apply_full_operator, Profile};
use crate::energy::{EnergyBreakdown, EnergyModel};
use crate::error::Result;
use crate::model::{PotentialSpec, ProblemSpec};
use crate::obstacles::{ObstacleConfig, ObstaclePair};

/// Node-wise clamp into the closed interval between the wells.
pub fn truncate_to_wells(q: &Profile, spec: &PotentialSpec) -> Profile {
    let (lo, hi) = (spec.well_min(), spec.well_max());
    q.map(|v| v.clamp(lo, hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContactSide {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contact {
    pub node: usize,
    pub x: f64,
    pub side: ContactSide,
}

/// Nodes where the minimizer sits on a constraint.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ContactReport {
    /// Contacts with the envelopes `Φ`, `Ψ` where they constrain.
    pub obstacle: Vec<Contact>,
    /// Contacts with the well clamp.
    pub wells: Vec<Contact>,
}

impl ContactReport {
    pub fn is_empty(&self) -> bool {
        self.obstacle.is_empty()
    }

    pub fn count(&self) -> usize {
        self.obstacle.len()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveResult {
    pub profile: Profile,
    pub breakdown: EnergyBreakdown,
    pub eta: f64,
    pub mu: f64,
    /// `max |𝓛Q + aW'(Q)|` away from the window edges.
    pub residual_max: f64,
    pub grad_norm: f64,
    pub converged: bool,
    pub contact: ContactReport,
    pub trace: Vec<StageRecord>,
    pub iterations: Vec<Vec<IterRecord>>,
    pub limit: Option<LimitCheck>,
    pub flipped: bool,
}

impl SolveResult {
    pub fn stages_completed(&self) -> usize {
        self.trace.len()
    }
}

const CONTACT_TOL: f64 = 1e-10;

fn box_bounds(spec: &ProblemSpec, pair: Option<&ObstaclePair>, cfg: &ObstacleConfig, q: &Profile) -> Bounds {
    let g = q.grid;
    let (wl, wu) = (spec.potential.well_min(), spec.potential.well_max());
    let mut lower = vec![wl; g.n];
    let mut upper = vec![wu; g.n];
    if let Some(p) = pair {
        for i in 0..g.n {
            if cfg.constrains(g.x(i)) {
                lower[i] = lower[i].max(p.lower.values[i]);
                upper[i] = upper[i].min(p.upper.values[i]);
            }
        }
    }
    Bounds { lower, upper }
}

fn contacts(spec: &ProblemSpec, pair: Option<&ObstaclePair>, cfg: &ObstacleConfig, q: &Profile) -> ContactReport {
    let g = q.grid;
    let scale = CONTACT_TOL * (1.0 + spec.potential.well_max().abs().max(spec.potential.well_min().abs()));
    let (wl, wu) = (spec.potential.well_min(), spec.potential.well_max());
    let mut rep = ContactReport::default();
    for i in 1..g.n - 1 {
        let (x, v) = (g.x(i), q.values[i]);
        if let Some(p) = pair {
            if cfg.constrains(x) {
                if v >= p.upper.values[i] - scale && p.upper.values[i] <= wu {
                    rep.obstacle.push(Contact { node: i, x, side: ContactSide::Upper });
                    continue;
                }
                if v <= p.lower.values[i] + scale && p.lower.values[i] >= wl {
                    rep.obstacle.push(Contact { node: i, x, side: ContactSide::Lower });
                    continue;
                }
            }
        }
        if v >= wu - scale {
            rep.wells.push(Contact { node: i, x, side: ContactSide::Upper });
        } else if v <= wl + scale {
            rep.wells.push(Contact { node: i, x, side: ContactSide::Lower });
        }
    }
    rep
}

/// One constrained minimization at fixed `η`, `μ`. With `pair = None` only
/// the well clamp applies.
pub fn minimize_constrained(
    model: &EnergyModel,
    q0: &Profile,
    pair: Option<&ObstaclePair>,
    cfg: &ObstacleConfig,
    eta: f64,
    mu: f64,
    solver_cfg: &SolverConfig,
) -> Result<SolveResult> {
    let spec = model.spec();
    let start = truncate_to_wells(q0, &spec.potential);
    let bounds = box_bounds(spec, pair, cfg, &start);
    let out = minimize_box(model, &start, &bounds, eta, mu, solver_cfg)?;
    let breakdown = model.breakdown(&out.profile, eta, mu)?;
    let residual_max = interior_max(&model.residual(&out.profile, 0.0, 0.0)?);
    Ok(SolveResult {
        contact: contacts(spec, pair, cfg, &out.profile),
        profile: out.profile,
        breakdown,
        eta,
        mu,
        residual_max,
        grad_norm: out.grad_norm,
        converged: out.converged,
        trace: Vec::new(),
        iterations: vec![out.trace],
        limit: None,
        flipped: false,
    })
}

/// `𝓛Q + aW'(Q)` on the window, and its maximum over nodes at least two
/// steps from either edge.
pub fn residual_el(q: &Profile, spec: &ProblemSpec) -> Result<(f64, Vec<f64>)> {
    let field = apply_full_operator(q, spec, 0.0, 0.0, q)?;
    Ok((interior_max(&field), field))
}

pub(crate) fn interior_max(field: &[f64]) -> f64 {
    let n = field.len();
    if n <= 4 {
        return 0.0;
    }
    field[2..n - 2].iter().fold(0.0f64, |m, r| m.max(r.abs()))
}
