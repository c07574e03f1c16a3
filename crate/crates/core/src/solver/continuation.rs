use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{minimize_constrained, ContactSide, SolveResult, SolverConfig};
use crate::discretize::{Grid, Profile};
use crate::energy::{EnergyBreakdown, EnergyModel};
use crate::error::{Error, Result};
use crate::model::ProblemSpec;
use crate::obstacles::{build_obstacles, BandPolicy, ObstacleConfig, ObstaclePair};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuationSchedule {
    pub eta_seq: Vec<f64>,
    pub mu_seq: Vec<f64>,
    pub warm_start: bool,
}

impl Default for ContinuationSchedule {
    fn default() -> Self {
        ContinuationSchedule {
            eta_seq: vec![1e-1, 1e-2, 1e-3],
            mu_seq: vec![0.1, 0.02, 0.005],
            warm_start: true,
        }
    }
}

fn positive_part(name: &str, seq: &[f64]) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = seq.to_vec();
    if out.last() == Some(&0.0) {
        out.pop();
    }
    if out.is_empty() {
        return Err(Error::Config(format!("continuation.{name} has no positive entries")));
    }
    for w in out.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::Config(format!(
                "continuation.{name} must be strictly decreasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    if !out.iter().all(|v| *v > 0.0 && v.is_finite()) {
        return Err(Error::Config(format!(
            "continuation.{name} entries must be positive except a trailing 0"
        )));
    }
    Ok(out)
}

impl ContinuationSchedule {
    pub fn validate(&self) -> Result<()> {
        positive_part("eta_seq", &self.eta_seq)?;
        positive_part("mu_seq", &self.mu_seq)?;
        Ok(())
    }

    /// Every stage in execution order, ending with the unconstrained
    /// `η = 0`, `μ = 0` stage.
    pub fn stages(&self) -> Result<Vec<Stage>> {
        let etas = positive_part("eta_seq", &self.eta_seq)?;
        let mus = positive_part("mu_seq", &self.mu_seq)?;
        let mut out = Vec::new();
        for &mu in &mus {
            for &eta in etas.iter().chain(std::iter::once(&0.0)) {
                out.push(Stage {
                    index: out.len(),
                    eta,
                    mu,
                    constrained: true,
                });
            }
        }
        out.push(Stage {
            index: out.len(),
            eta: 0.0,
            mu: 0.0,
            constrained: false,
        });
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub index: usize,
    pub eta: f64,
    pub mu: f64,
    /// Whether the obstacle envelopes apply; the last stage keeps only the
    /// well clamp.
    pub constrained: bool,
}

impl Stage {
    pub fn label(&self) -> String {
        format!("stage {} (eta = {:e}, mu = {:e})", self.index, self.eta, self.mu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
    pub energy: EnergyBreakdown,
    pub residual_max: f64,
    pub contact_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCheck {
    /// `max |Q - ζ|` over the outer quarter.
    pub deviation: f64,
    /// Maxima over the inner and outer halves of that quarter.
    pub inner_max: f64,
    pub outer_max: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitCheck {
    pub tol: f64,
    pub left: TailCheck,
    pub right: TailCheck,
}

impl LimitCheck {
    pub fn passed(&self) -> bool {
        self.left.passed && self.right.passed
    }
}

/// Far-field check: on each outer quarter of the window the deviation from
/// the well is at most `10 h^{min(2s,1)} + 5/R^{2s}` and does not grow toward
/// the edge.
pub fn limit_check(q: &Profile, spec: &ProblemSpec) -> LimitCheck {
    let g = q.grid;
    let s = spec.kernel.s;
    let tol = 10.0 * g.h.powf((2.0 * s).min(1.0)) + 5.0 / g.half_width.powf(2.0 * s);
    let r = g.half_width;
    let tail = |well: f64, sign: f64| {
        let mut inner = 0.0f64;
        let mut outer = 0.0f64;
        for i in 0..g.n {
            let y = sign * g.x(i);
            if y < 0.5 * r {
                continue;
            }
            let d = (q.values[i] - well).abs();
            if y < 0.75 * r {
                inner = inner.max(d);
            } else {
                outer = outer.max(d);
            }
        }
        let deviation = inner.max(outer);
        TailCheck {
            deviation,
            inner_max: inner,
            outer_max: outer,
            passed: deviation <= tol && inner >= outer,
        }
    };
    LimitCheck {
        tol,
        left: tail(q.left, -1.0),
        right: tail(q.right, 1.0),
    }
}

/// Resume point and per-stage hook for [`continuation_run_with`].
#[derive(Default)]
pub struct RunOptions<'a> {
    /// First stage to run and its starting profile.
    pub resume: Option<(usize, Profile)>,
    pub on_stage: Option<&'a mut dyn FnMut(&StageRecord, &Profile) -> Result<()>>,
}

pub fn continuation_run(
    spec: &ProblemSpec,
    grid: Grid,
    cfg: &ObstacleConfig,
    schedule: &ContinuationSchedule,
    solver_cfg: &SolverConfig,
) -> Result<SolveResult> {
    continuation_run_with(spec, grid, cfg, schedule, solver_cfg, RunOptions::default())
}

pub fn continuation_run_with(
    spec: &ProblemSpec,
    grid: Grid,
    cfg: &ObstacleConfig,
    schedule: &ContinuationSchedule,
    solver_cfg: &SolverConfig,
    mut opts: RunOptions<'_>,
) -> Result<SolveResult> {
    let stages = schedule.stages()?;
    solver_cfg.validate()?;
    if let Some(first) = schedule.mu_seq.first() {
        if *first > 0.1 {
            log::warn!("first penalty {first} exceeds 0.1; the free-minimizer regime may not be reached");
        }
    }
    let (canon, flipped) = spec.canonical();
    let model = EnergyModel::new(&canon, grid)?;
    let qsharp = model.qsharp().clone();
    let (start, mut q) = match opts.resume.take() {
        Some((k, p)) => {
            if k >= stages.len() {
                return Err(Error::Config(format!(
                    "resume stage {k} beyond the {} scheduled stages",
                    stages.len()
                )));
            }
            p.check_same_grid(&qsharp)?;
            let p = if flipped { reflect_profile(&p) } else { p };
            (k, p)
        }
        None => (0, qsharp.clone()),
    };
    let mut cache: HashMap<u64, ObstaclePair> = HashMap::new();
    let mut trace = Vec::new();
    let mut iterations = Vec::new();
    let mut last = None;
    for stage in &stages[start..] {
        let pair = if stage.constrained {
            let key = stage.eta.to_bits();
            if let std::collections::hash_map::Entry::Vacant(e) = cache.entry(key) {
                let built = build_obstacles(&canon, model.operator(), cfg, stage.eta, BandPolicy::Relaxed)?;
                e.insert(built);
            }
            cache.get(&key)
        } else {
            None
        };
        let q0 = if schedule.warm_start { &q } else { &qsharp };
        let res = minimize_constrained(&model, q0, pair, cfg, stage.eta, stage.mu, solver_cfg)
            .map_err(|e| match e {
                Error::Stagnation { .. } | Error::EnergyIncrease { .. } => Error::NonConvergence {
                    stage: stage.label(),
                    detail: e.to_string(),
                },
                other => other,
            })?;
        let record = StageRecord {
            stage: *stage,
            iterations: res.iterations[0].len() - 1,
            grad_norm: res.grad_norm,
            converged: res.converged,
            energy: res.breakdown,
            residual_max: res.residual_max,
            contact_count: res.contact.count(),
        };
        log::info!(
            "{}: {} iterations, |pg| = {:.3e}, E = {:.6}, residual = {:.3e}, contacts = {}",
            stage.label(),
            record.iterations,
            record.grad_norm,
            record.energy.total,
            record.residual_max,
            record.contact_count
        );
        if !res.converged {
            log::warn!("{} stopped at max_iters", stage.label());
        }
        if let Some(cb) = opts.on_stage.as_mut() {
            let dump = if flipped { reflect_profile(&res.profile) } else { res.profile.clone() };
            cb(&record, &dump)?;
        }
        q = res.profile.clone();
        trace.push(record);
        iterations.extend(res.iterations.iter().cloned());
        last = Some((res, *stage));
    }
    let (mut res, stage) = last.expect("schedule has at least one stage");
    if !res.converged {
        return Err(Error::NonConvergence {
            stage: stage.label(),
            detail: format!("projected gradient {:.3e} above tolerance after max_iters", res.grad_norm),
        });
    }
    // contact is reported for the last constrained stage
    if let Some(prev) = trace.iter().rev().find(|r| r.stage.constrained) {
        if prev.contact_count > 0 {
            log::warn!("{} obstacle contacts in the last constrained stage", prev.contact_count);
        }
    }
    let limit = limit_check(&res.profile, &canon);
    if !limit.passed() {
        let samples = tail_samples(&res.profile);
        return Err(Error::NonConvergence {
            stage: stage.label(),
            detail: format!(
                "far-field limit check failed (tol {:.3e}; left {:.3e}/{:.3e}, right {:.3e}/{:.3e}); tail samples {samples}",
                limit.tol, limit.left.inner_max, limit.left.outer_max, limit.right.inner_max, limit.right.outer_max
            ),
        });
    }
    res.limit = Some(limit);
    res.trace = trace;
    res.iterations = iterations;
    if flipped {
        res.profile = reflect_profile(&res.profile);
        res.flipped = true;
        for c in res.contact.obstacle.iter_mut().chain(res.contact.wells.iter_mut()) {
            c.side = match c.side {
                ContactSide::Upper => ContactSide::Lower,
                ContactSide::Lower => ContactSide::Upper,
            };
        }
    }
    Ok(res)
}

pub(crate) fn reflect_profile(p: &Profile) -> Profile {
    p.map(|v| -v)
}

fn tail_samples(q: &Profile) -> String {
    let g = q.grid;
    let picks = [0, g.n / 16, g.n / 8, g.n / 4, g.n - 1 - g.n / 4, g.n - 1 - g.n / 8, g.n - 1 - g.n / 16, g.n - 1];
    picks
        .iter()
        .map(|&i| format!("({:.2}, {:.6})", g.x(i), q.values[i]))
        .collect::<Vec<_>>()
        .join(" ")
}
