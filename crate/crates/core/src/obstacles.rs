//! Barrier profiles, the envelopes built from them, and projection onto the
//! admissible sets.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::discretize::{Grid, NonlocalOperator, Profile, TailClosure};
use crate::error::{Error, Result};
use crate::model::ProblemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObstacleConfig {
    pub b1: f64,
    pub b2: f64,
    pub tau: f64,
    pub r: f64,
    /// Right-hand side `‖aW'‖∞ + 2|ζ₁| + 2|ζ₂| + 1`.
    pub c0_rhs: f64,
}

impl ObstacleConfig {
    pub fn new(spec: &ProblemSpec, b1: f64, b2: f64, tau: f64, r: f64) -> Result<Self> {
        let cap = spec.potential.delta0.min(spec.kernel.r0);
        if !(b1 <= -1.0 && b2 >= 1.0) {
            return Err(Error::Config(format!("need b1 <= -1 <= 1 <= b2, got ({b1}, {b2})")));
        }
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::Config(format!("obstacles.tau = {tau} outside (0, 1)")));
        }
        if !(r > 0.0 && r <= cap) {
            return Err(Error::Config(format!("obstacles.r = {r} outside (0, {cap}]")));
        }
        let p = &spec.potential;
        Ok(ObstacleConfig {
            b1,
            b2,
            tau,
            r,
            c0_rhs: spec.force_bound() + 2.0 * p.zeta1.abs() + 2.0 * p.zeta2.abs() + 1.0,
        })
    }

    /// `r = min(δ₀, r₀)/2`, `τ = 0.05`.
    pub fn with_defaults(spec: &ProblemSpec, b1: f64, b2: f64) -> Result<Self> {
        let r = 0.5 * spec.potential.delta0.min(spec.kernel.r0);
        Self::new(spec, b1, b2, 0.05, r)
    }

    /// Whether `x` lies where the admissible set `Γ` constrains profiles.
    pub fn constrains(&self, x: f64) -> bool {
        x <= self.b1 || x >= self.b2
    }
}

/// Whether a failed band clause aborts construction or is recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BandPolicy {
    Strict,
    Relaxed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClauseViolation {
    pub clause: &'static str,
    pub node: usize,
    pub x: f64,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObstaclePair {
    pub phi: Profile,
    pub psi: Profile,
    pub upper: Profile,
    pub lower: Profile,
    /// Band clauses tolerated under [`BandPolicy::Relaxed`]; worst node per clause.
    pub relaxed: Vec<ClauseViolation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProjectionMode {
    /// Clamp into `[Ψ, Φ]` on `(-∞, b₁] ∪ [b₂, ∞)` only.
    GammaOnly,
    /// Clamp into `[Ψ, Φ]` everywhere.
    SigmaFull,
}

const EDGE_EPS: f64 = 1e-6;

/// Solves `-η u'' + 𝓛u = sign·C₀` on `(b₁ - τ, b₂ + τ)` with exterior data
/// `ζ₁ ± r`, `ζ₂ ± r`, by a dense direct solve.
pub fn solve_barrier(
    spec: &ProblemSpec,
    op: &NonlocalOperator,
    cfg: &ObstacleConfig,
    eta: f64,
    sign: f64,
) -> Result<Profile> {
    let grid = *op.grid();
    let need_lo = cfg.b1 - 2.0 * cfg.tau - 1.0;
    let need_hi = cfg.b2 + 2.0 * cfg.tau + 1.0;
    if need_lo < -grid.half_width || need_hi > grid.half_width {
        return Err(Error::Domain(format!(
            "window [-{R}, {R}] does not contain [{need_lo}, {need_hi}]",
            R = grid.half_width
        )));
    }
    let (z1, z2) = (spec.potential.zeta1, spec.potential.zeta2);
    let off = sign.signum() * cfg.r;
    let (left, right) = (z1 + off, z2 + off);
    let (a, b) = (cfg.b1 - cfg.tau, cfg.b2 + cfg.tau);
    let inside = |x: f64| x > a + EDGE_EPS * grid.h && x < b - EDGE_EPS * grid.h;
    let lo = (0..grid.n).find(|&i| inside(grid.x(i))).unwrap();
    let hi = (0..grid.n).rev().find(|&i| inside(grid.x(i))).unwrap();
    let ext: Vec<f64> = (0..grid.n)
        .map(|i| {
            let x = grid.x(i);
            if inside(x) {
                0.0
            } else if x < 0.5 * (a + b) {
                left
            } else {
                right
            }
        })
        .collect();
    let le = op.apply(&ext, left, right);
    let vis = eta / (grid.h * grid.h);
    let m = hi - lo + 1;
    let rhs: Vec<f64> = (0..m)
        .map(|k| {
            let i = lo + k;
            sign.signum() * cfg.c0_rhs - le[i] + vis * (ext[i - 1] + ext[i + 1])
        })
        .collect();
    let mut mat: DMatrix<f64> = op.dense_block(lo, hi);
    for k in 0..m {
        mat[(k, k)] += 2.0 * vis;
        if k > 0 {
            mat[(k, k - 1)] -= vis;
        }
        if k + 1 < m {
            mat[(k, k + 1)] -= vis;
        }
    }
    let rhs_v = nalgebra::DVector::from_vec(rhs);
    let lu = mat.clone().lu();
    let pivots = lu.u().diagonal();
    let (pmin, pmax) = pivots
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), p| (a.min(p.abs()), b.max(p.abs())));
    let condition = pmax / pmin;
    let sol = lu.solve(&rhs_v).ok_or_else(|| Error::Solver {
        reason: "barrier system is singular".into(),
        condition,
    })?;
    let resid = (&mat * &sol - &rhs_v).amax();
    if !(resid <= 1e-8 * cfg.c0_rhs) {
        return Err(Error::Solver {
            reason: format!("barrier residual {resid:e} exceeds 1e-8 C0"),
            condition,
        });
    }
    let mut values = ext;
    for k in 0..m {
        values[lo + k] = sol[k];
    }
    Profile::new(grid, values, left, right)
}

fn in_left_collar(cfg: &ObstacleConfig, x: f64, h: f64) -> bool {
    x > cfg.b1 - 2.0 * cfg.tau + EDGE_EPS * h && x <= cfg.b1 + EDGE_EPS * h
}

fn in_right_collar(cfg: &ObstacleConfig, x: f64, h: f64) -> bool {
    x >= cfg.b2 - EDGE_EPS * h && x < cfg.b2 + 2.0 * cfg.tau - EDGE_EPS * h
}

fn in_middle(cfg: &ObstacleConfig, x: f64, h: f64) -> bool {
    x > cfg.b1 + EDGE_EPS * h && x < cfg.b2 - EDGE_EPS * h
}

/// Builds `Φ ≥ φ`-type envelopes: equal to the barrier outside
/// `[b₁ - 2τ, b₂ + 2τ]`, pinned at `ζ ± r` on the collars, and at a plateau
/// `r/4` beyond the barrier's extreme value in between.
pub fn build_envelopes(
    spec: &ProblemSpec,
    phi: &Profile,
    psi: &Profile,
    cfg: &ObstacleConfig,
    policy: BandPolicy,
) -> Result<ObstaclePair> {
    phi.check_same_grid(psi)?;
    let g = phi.grid;
    if 2.0 * cfg.tau < g.h {
        let node = g.nearest(cfg.b1);
        return Err(Error::Clause {
            clause: "collar_nonempty",
            node,
            x: g.x(node),
        });
    }
    let (z1, z2) = (spec.potential.zeta1, spec.potential.zeta2);
    let top = phi.values.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 0.25 * cfg.r;
    let bottom = psi.values.iter().copied().fold(f64::INFINITY, f64::min) - 0.25 * cfg.r;
    let mut upper = phi.clone();
    let mut lower = psi.clone();
    for i in 0..g.n {
        let x = g.x(i);
        if in_left_collar(cfg, x, g.h) {
            upper.values[i] = z1 + cfg.r;
            lower.values[i] = z1 - cfg.r;
        } else if in_right_collar(cfg, x, g.h) {
            upper.values[i] = z2 + cfg.r;
            lower.values[i] = z2 - cfg.r;
        } else if in_middle(cfg, x, g.h) {
            upper.values[i] = top;
            lower.values[i] = bottom;
        }
    }
    let mut pair = ObstaclePair {
        phi: phi.clone(),
        psi: psi.clone(),
        upper,
        lower,
        relaxed: Vec::new(),
    };
    let violations = check_clauses(spec, &pair, cfg);
    for v in violations {
        let tolerable = policy == BandPolicy::Relaxed && v.clause.ends_with("band");
        if !tolerable {
            return Err(Error::Clause {
                clause: v.clause,
                node: v.node,
                x: v.x,
            });
        }
        pair.relaxed.push(v);
    }
    if !pair.relaxed.is_empty() {
        log::warn!(
            "barrier band clauses relaxed: {}",
            pair.relaxed
                .iter()
                .map(|v| format!("{} (excess {:.3e} at x = {})", v.clause, v.excess, v.x))
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
    Ok(pair)
}

/// Every envelope clause, worst node per failed clause.
pub fn check_clauses(spec: &ProblemSpec, pair: &ObstaclePair, cfg: &ObstacleConfig) -> Vec<ClauseViolation> {
    let g = pair.phi.grid;
    let (z1, z2) = (spec.potential.zeta1, spec.potential.zeta2);
    let r = cfg.r;
    let tol = 1e-12 * (1.0 + z1.abs().max(z2.abs()) + r);
    let mut worst: Vec<ClauseViolation> = Vec::new();
    let mut push = |clause: &'static str, i: usize, excess: f64| {
        if excess <= tol {
            return;
        }
        match worst.iter_mut().find(|v| v.clause == clause) {
            Some(v) if v.excess >= excess => {}
            Some(v) => {
                v.node = i;
                v.x = g.x(i);
                v.excess = excess;
            }
            None => worst.push(ClauseViolation {
                clause,
                node: i,
                x: g.x(i),
                excess,
            }),
        }
    };
    for i in 0..g.n {
        let x = g.x(i);
        let (up, lo) = (pair.upper.values[i], pair.lower.values[i]);
        let (ph, ps) = (pair.phi.values[i], pair.psi.values[i]);
        push("ordered", i, lo - up);
        if in_left_collar(cfg, x, g.h) || in_right_collar(cfg, x, g.h) {
            let z = if x < 0.0 { z1 } else { z2 };
            push("upper.collar_floor", i, z + 0.75 * r - up);
            push("upper.collar_below_barrier", i, up - ph);
            push("upper.barrier_band", i, ph - (z + 1.25 * r));
            push("lower.collar_ceiling", i, lo - (z - 0.75 * r));
            push("lower.collar_above_barrier", i, ps - lo);
            push("lower.barrier_band", i, (z - 1.25 * r) - ps);
        } else if in_middle(cfg, x, g.h) {
            push("upper.middle", i, ph - up);
            push("lower.middle", i, lo - ps);
        } else {
            push("upper.outside", i, (up - ph).abs());
            push("lower.outside", i, (lo - ps).abs());
        }
    }
    worst
}

/// Builds barriers and envelopes for one viscosity.
pub fn build_obstacles(
    spec: &ProblemSpec,
    op: &NonlocalOperator,
    cfg: &ObstacleConfig,
    eta: f64,
    policy: BandPolicy,
) -> Result<ObstaclePair> {
    let phi = solve_barrier(spec, op, cfg, eta, 1.0)?;
    let psi = solve_barrier(spec, op, cfg, eta, -1.0)?;
    build_envelopes(spec, &phi, &psi, cfg, policy)
}

pub fn build_obstacles_on(
    spec: &ProblemSpec,
    grid: Grid,
    cfg: &ObstacleConfig,
    eta: f64,
    policy: BandPolicy,
) -> Result<ObstaclePair> {
    let op = NonlocalOperator::new(grid, &spec.kernel, TailClosure::for_kernel(&spec.kernel))?;
    build_obstacles(spec, &op, cfg, eta, policy)
}

pub fn project_admissible(
    q: &Profile,
    pair: &ObstaclePair,
    cfg: &ObstacleConfig,
    mode: ProjectionMode,
) -> Result<Profile> {
    q.check_same_grid(&pair.upper)?;
    let g = q.grid;
    let mut out = q.clone();
    for i in 0..g.n {
        let (lo, hi) = (pair.lower.values[i], pair.upper.values[i]);
        if lo > hi {
            return Err(Error::InvalidPair { node: i });
        }
        if mode == ProjectionMode::SigmaFull || cfg.constrains(g.x(i)) {
            out.values[i] = q.values[i].clamp(lo, hi);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::TailClosure;

    fn setup(h: f64) -> (ProblemSpec, NonlocalOperator, ObstacleConfig) {
        let spec = ProblemSpec::peierls_nabarro();
        let grid = Grid::with_spacing(16.0, h).unwrap();
        let op = NonlocalOperator::new(grid, &spec.kernel, TailClosure::AnalyticPower).unwrap();
        let cfg = ObstacleConfig::new(&spec, -6.0, 6.0, 0.05, 0.5).unwrap();
        (spec, op, cfg)
    }

    #[test]
    fn rhs_constant() {
        let (_, _, cfg) = setup(0.1);
        // ‖W'‖∞ = 1, wells 0 and 2π
        assert!((cfg.c0_rhs - (2.0 + 4.0 * std::f64::consts::PI)).abs() < 1e-6);
    }

    #[test]
    fn barrier_exterior_and_sign() {
        let (spec, op, cfg) = setup(0.05);
        let phi = solve_barrier(&spec, &op, &cfg, 1e-2, 1.0).unwrap();
        let g = phi.grid;
        let i = g.nearest(cfg.b1 - cfg.tau - g.h);
        assert_eq!(phi.values[i], cfg.r);
        assert!(phi.values.iter().all(|&v| v >= cfg.r - 1e-12));
        let psi = solve_barrier(&spec, &op, &cfg, 1e-2, -1.0).unwrap();
        // symmetric data: ψ(x) = ζ₁ + ζ₂ - φ(-x)
        let two_pi = 2.0 * std::f64::consts::PI;
        for i in 0..g.n {
            let mirrored = two_pi - phi.values[g.n - 1 - i];
            assert!((psi.values[i] - mirrored).abs() < 1e-9 * cfg.c0_rhs, "node {i}");
        }
    }

    #[test]
    #[ignore = "the r/4 band next to b1 is not reached at grid scale; see the barrier growth study"]
    fn barrier_boundary_layer_band() {
        let (spec, op, cfg) = setup(0.05);
        let phi = solve_barrier(&spec, &op, &cfg, 1e-3, 1.0).unwrap();
        let g = phi.grid;
        for i in 0..g.n {
            let x = g.x(i);
            if x >= cfg.b1 - cfg.tau && x <= cfg.b1 {
                assert!((phi.values[i] - cfg.r).abs() <= cfg.r / 4.0, "x = {x}: {}", phi.values[i]);
            }
        }
    }

    #[test]
    fn barrier_band_violation_grows_like_a_power_of_the_distance() {
        // φ - ζ₁ - r at b₁ scales like (τ)^s times C₀ rather than staying below r/4
        let (spec, op, cfg) = setup(0.025);
        let phi = solve_barrier(&spec, &op, &cfg, 1e-3, 1.0).unwrap();
        let g = phi.grid;
        let at_b1 = phi.values[g.nearest(cfg.b1)] - cfg.r;
        assert!(at_b1 > cfg.r / 4.0);
        let strict = build_envelopes(
            &spec,
            &phi,
            &solve_barrier(&spec, &op, &cfg, 1e-3, -1.0).unwrap(),
            &cfg,
            BandPolicy::Strict,
        );
        assert!(matches!(strict, Err(Error::Clause { clause: "upper.barrier_band", .. })));
    }

    #[test]
    fn envelope_clauses() {
        let (spec, op, cfg) = setup(0.05);
        let pair = build_obstacles(&spec, &op, &cfg, 1e-2, BandPolicy::Relaxed).unwrap();
        let g = pair.phi.grid;
        for i in 0..g.n {
            let x = g.x(i);
            if x <= cfg.b1 - 2.0 * cfg.tau || x >= cfg.b2 + 2.0 * cfg.tau {
                assert_eq!(pair.upper.values[i], pair.phi.values[i]);
                assert_eq!(pair.lower.values[i], pair.psi.values[i]);
            }
            if x > cfg.b1 - 2.0 * cfg.tau && x <= cfg.b1 {
                assert!(pair.upper.values[i] >= 0.75 * cfg.r);
                assert!(pair.upper.values[i] <= pair.phi.values[i]);
            }
            assert!(pair.lower.values[i] <= pair.upper.values[i]);
        }
        assert!(pair.relaxed.iter().all(|v| v.clause.ends_with("band")));
        assert!(check_clauses(&spec, &pair, &cfg)
            .iter()
            .all(|v| v.clause.ends_with("band")));
    }

    #[test]
    fn empty_collar_is_rejected() {
        let (spec, op, cfg) = setup(0.05);
        let pair = build_obstacles(&spec, &op, &cfg, 1e-2, BandPolicy::Relaxed).unwrap();
        let thin = ObstacleConfig { tau: 0.01, ..cfg };
        let err = build_envelopes(&spec, &pair.phi, &pair.psi, &thin, BandPolicy::Relaxed);
        assert!(matches!(err, Err(Error::Clause { clause: "collar_nonempty", .. })));
    }

    #[test]
    fn projection() {
        let (spec, op, cfg) = setup(0.05);
        let pair = build_obstacles(&spec, &op, &cfg, 1e-2, BandPolicy::Relaxed).unwrap();
        let g = pair.phi.grid;
        let qs = Profile::reference(g, &spec.reference());
        let same = project_admissible(&qs, &pair, &cfg, ProjectionMode::SigmaFull).unwrap();
        assert_eq!(same, qs);
        let high = qs.map(|v| v + 10.0);
        let p = project_admissible(&high, &pair, &cfg, ProjectionMode::GammaOnly).unwrap();
        for i in 0..g.n {
            if cfg.constrains(g.x(i)) {
                assert_eq!(p.values[i], pair.upper.values[i]);
            } else {
                assert_eq!(p.values[i], high.values[i]);
            }
        }
        let again = project_admissible(&p, &pair, &cfg, ProjectionMode::GammaOnly).unwrap();
        assert_eq!(again, p);
        let mut broken = pair.clone();
        broken.lower.values[5] = broken.upper.values[5] + 1.0;
        assert!(matches!(
            project_admissible(&qs, &broken, &cfg, ProjectionMode::GammaOnly),
            Err(Error::InvalidPair { node: 5 })
        ));
    }
}
