//! The perturbed renormalized energy
//! `I(Q) = (η/2)∫|Q'|² + (μ/2)∫|Q - Q♯|² + ∫aW(Q) + (1/4)E_{ℝ²}(Q)`
//! and its gradient.

use serde::{Deserialize, Serialize};

use crate::discretize::{
    full_operator_with, pair_sum, Grid, Interval, KernelWeights, NonlocalOperator, Profile,
    TailClosure,
};
use crate::error::{Error, Result};
use crate::model::{KernelSpec, ProblemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub viscous: f64,
    pub penalty: f64,
    pub potential: f64,
    pub interaction: f64,
    pub total: f64,
}

/// Precomputed discretization of one problem on one grid.
#[derive(Debug, Clone)]
pub struct EnergyModel {
    spec: ProblemSpec,
    op: NonlocalOperator,
    a: Vec<f64>,
    qsharp: Profile,
    /// `𝓛Q♯`.
    l_qsharp: Vec<f64>,
}

impl EnergyModel {
    pub fn new(spec: &ProblemSpec, grid: Grid) -> Result<Self> {
        let qsharp = Profile::reference(grid, &spec.reference());
        Self::with_reference(spec, qsharp)
    }

    pub fn with_reference(spec: &ProblemSpec, qsharp: Profile) -> Result<Self> {
        let grid = qsharp.grid;
        let op = NonlocalOperator::new(grid, &spec.kernel, TailClosure::for_kernel(&spec.kernel))?;
        let a = grid.nodes().iter().map(|&x| spec.modulation.eval(x)).collect();
        let l_qsharp = op.apply_profile(&qsharp);
        Ok(EnergyModel {
            spec: spec.clone(),
            op,
            a,
            qsharp,
            l_qsharp,
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn grid(&self) -> &Grid {
        self.op.grid()
    }

    pub fn operator(&self) -> &NonlocalOperator {
        &self.op
    }

    pub fn modulation_samples(&self) -> &[f64] {
        &self.a
    }

    pub fn qsharp(&self) -> &Profile {
        &self.qsharp
    }

    fn check(&self, q: &Profile) -> Result<()> {
        q.check_same_grid(&self.qsharp)?;
        if q.left != self.qsharp.left || q.right != self.qsharp.right {
            return Err(Error::Domain(format!(
                "far fields ({}, {}) differ from the reference ({}, {}); \
                 the renormalized energy is undefined",
                q.left, q.right, self.qsharp.left, self.qsharp.right
            )));
        }
        Ok(())
    }

    fn v(&self, q: &Profile) -> Vec<f64> {
        q.values
            .iter()
            .zip(&self.qsharp.values)
            .map(|(a, b)| a - b)
            .collect()
    }

    pub fn breakdown(&self, q: &Profile, eta: f64, mu: f64) -> Result<EnergyBreakdown> {
        self.check(q)?;
        let g = self.grid();
        let (n, h) = (g.n, g.h);
        let u = &q.values;
        let viscous = if eta == 0.0 {
            0.0
        } else {
            0.5 * eta * (0..n - 1).map(|i| (u[i + 1] - u[i]).powi(2)).sum::<f64>() / h
        };
        let v = self.v(q);
        let penalty = 0.5 * mu * (0..n).map(|i| g.trapezoid(i) * v[i] * v[i]).sum::<f64>();
        let mut potential = 0.0;
        for i in 0..n {
            potential += g.trapezoid(i) * self.a[i] * self.spec.potential.eval(u[i])?.0;
        }
        let lv = self.op.apply(&v, 0.0, 0.0);
        let interaction = h
            * (0..n)
                .map(|i| v[i] * (0.5 * lv[i] + self.l_qsharp[i]))
                .sum::<f64>();
        Ok(EnergyBreakdown {
            viscous,
            penalty,
            potential,
            interaction,
            total: viscous + penalty + potential + interaction,
        })
    }

    pub fn total(&self, q: &Profile, eta: f64, mu: f64) -> Result<f64> {
        Ok(self.breakdown(q, eta, mu)?.total)
    }

    /// `-η Q'' + μ(Q - Q♯) + 𝓛Q + aW'(Q)`; zero on the boundary nodes.
    pub fn residual(&self, q: &Profile, eta: f64, mu: f64) -> Result<Vec<f64>> {
        full_operator_with(&self.op, q, &self.spec, &self.a, eta, mu, &self.qsharp)
    }

    /// Partial derivatives of the discrete energy in the interior values.
    pub fn gradient(&self, q: &Profile, eta: f64, mu: f64) -> Result<Vec<f64>> {
        self.check(q)?;
        let h = self.grid().h;
        Ok(self.residual(q, eta, mu)?.into_iter().map(|r| h * r).collect())
    }

    /// Hessian of the quadratic part applied to `d` (zero on the boundary).
    pub(crate) fn quadratic_hessian(&self, d: &[f64], eta: f64, mu: f64) -> Vec<f64> {
        let g = self.grid();
        let (n, h) = (g.n, g.h);
        let ld = self.op.apply(d, 0.0, 0.0);
        let mut out = vec![0.0; n];
        for i in 1..n - 1 {
            out[i] = eta * (2.0 * d[i] - d[i - 1] - d[i + 1]) / h + h * (mu * d[i] + ld[i]);
        }
        out
    }

    /// `∫ a (W(Q + d) - W(Q))` by node-wise differences.
    pub(crate) fn potential_change(&self, q: &[f64], d: &[f64]) -> Result<f64> {
        let g = self.grid();
        let mut acc = 0.0;
        for i in 0..g.n {
            if d[i] != 0.0 {
                let w0 = self.spec.potential.eval(q[i])?.0;
                let w1 = self.spec.potential.eval(q[i] + d[i])?.0;
                acc += g.trapezoid(i) * self.a[i] * (w1 - w0);
            }
        }
        Ok(acc)
    }

    /// Quadrature weights shared with the operator, for the double integrals.
    pub fn kernel_weights(&self) -> &KernelWeights {
        self.op.weights()
    }
}

/// `E_{I×J}(Q) = [v]²_{I×J} + 2𝓑_{I,J}(v, Q♯)` with `v = Q - Q♯`.
pub fn renormalized_interaction_with(
    w: &KernelWeights,
    q: &Profile,
    qsharp: &Profile,
    i: &Interval,
    j: &Interval,
) -> Result<f64> {
    q.check_same_grid(qsharp)?;
    if q.left != qsharp.left || q.right != qsharp.right {
        return Err(Error::Domain(
            "far fields of Q and Q♯ differ; the renormalization is invalid".into(),
        ));
    }
    let v = q.minus(qsharp)?;
    Ok(pair_sum(w, &v, &v, i, j) + 2.0 * pair_sum(w, &v, qsharp, i, j))
}

pub fn renormalized_interaction(
    q: &Profile,
    qsharp: &Profile,
    kernel: &KernelSpec,
    i: &Interval,
    j: &Interval,
) -> Result<f64> {
    let w = KernelWeights::new(kernel, q.grid.h, q.grid.n + 1, TailClosure::for_kernel(kernel))?;
    renormalized_interaction_with(&w, q, qsharp, i, j)
}

pub fn total_energy(
    q: &Profile,
    spec: &ProblemSpec,
    eta: f64,
    mu: f64,
    qsharp: &Profile,
) -> Result<EnergyBreakdown> {
    EnergyModel::with_reference(spec, qsharp.clone())?.breakdown(q, eta, mu)
}

pub fn energy_gradient(
    q: &Profile,
    spec: &ProblemSpec,
    eta: f64,
    mu: f64,
    qsharp: &Profile,
) -> Result<Vec<f64>> {
    EnergyModel::with_reference(spec, qsharp.clone())?.gradient(q, eta, mu)
}

/// Constant `C` in `|𝓑_{ℝ,ℝ}(v, Q♯)| <= C ‖Q♯‖_{C¹} ([v]_K + ‖v‖_{L²})`
/// realized by `v`.
pub fn mixed_term_constant(model: &EnergyModel, v: &Profile) -> Result<f64> {
    let all = Interval::real_line();
    let w = model.kernel_weights();
    let qs = model.qsharp();
    let b = pair_sum(w, v, qs, &all, &all);
    let semi = pair_sum(w, v, v, &all, &all).sqrt();
    let g = model.grid();
    let l2 = (0..g.n).map(|i| g.trapezoid(i) * v.values[i].powi(2)).sum::<f64>().sqrt();
    let c1 = model.spec().reference().c1_norm();
    Ok(b.abs() / (c1 * (semi + l2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn layer(x: f64) -> f64 {
        PI + 2.0 * x.atan()
    }

    fn model(r: f64, h: f64) -> EnergyModel {
        EnergyModel::new(&ProblemSpec::peierls_nabarro(), Grid::with_spacing(r, h).unwrap()).unwrap()
    }

    #[test]
    fn reference_has_no_penalty_or_interaction() {
        let m = model(10.0, 0.05);
        let b = m.breakdown(m.qsharp(), 1.0, 1.0).unwrap();
        assert_eq!(b.penalty, 0.0);
        assert_eq!(b.interaction, 0.0);
        // ∫|Q♯'|² for the quintic ramp: (2π)² · (1/2) · ∫_0^1 (30 t²(1-t)²)² dt = (2π)² · 10/7 / 2
        let exact = 0.5 * (2.0 * PI).powi(2) * (10.0 / 7.0) * 0.5;
        assert!((b.viscous - exact).abs() < 1e-3 * exact, "{} {exact}", b.viscous);
        assert!((b.total - (b.viscous + b.potential)).abs() < 1e-12);
    }

    #[test]
    fn constant_at_well_has_zero_energy() {
        let g = Grid::new(10.0, 101).unwrap();
        let spec = ProblemSpec::peierls_nabarro();
        let flat = Profile::constant(g, 0.0);
        let b = total_energy(&flat, &spec, 1.0, 0.0, &flat).unwrap();
        assert_eq!((b.viscous, b.potential, b.total), (0.0, 0.0, 0.0));
        let grad = energy_gradient(&flat, &spec, 0.3, 0.0, &flat).unwrap();
        assert!(grad.iter().all(|g| g.abs() < 1e-14));
    }

    #[test]
    fn mismatched_far_fields_are_rejected() {
        let m = model(10.0, 0.1);
        let bad = Profile::constant(*m.grid(), 0.0);
        assert!(m.breakdown(&bad, 0.0, 0.0).is_err());
        let all = Interval::real_line();
        assert!(renormalized_interaction(&bad, m.qsharp(), &m.spec().kernel, &all, &all).is_err());
    }

    #[test]
    fn gradient_matches_central_differences() {
        let m = model(20.0, 0.1);
        let g = *m.grid();
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let mut q = Profile::sample_pinned(g, layer, 0.0, 2.0 * PI);
        for v in q.values[1..g.n - 1].iter_mut() {
            *v += rng.random_range(-0.05..0.05);
        }
        let (eta, mu) = (0.1, 0.05);
        let grad = m.gradient(&q, eta, mu).unwrap();
        let eps = 1e-6;
        for _ in 0..50 {
            let i = rng.random_range(1..g.n - 1);
            let mut p = q.clone();
            p.values[i] += eps;
            let up = m.total(&p, eta, mu).unwrap();
            p.values[i] -= 2.0 * eps;
            let down = m.total(&p, eta, mu).unwrap();
            let fd = (up - down) / (2.0 * eps);
            assert!((fd - grad[i]).abs() <= 1e-6 * (1.0 + grad[i].abs()), "node {i}: {fd} vs {}", grad[i]);
        }
    }

    #[test]
    fn interaction_gradient_at_reference_is_operator() {
        let m = model(15.0, 0.05);
        let h = m.grid().h;
        let g_all = m.gradient(m.qsharp(), 0.0, 0.0).unwrap();
        let lq = m.operator().apply_profile(m.qsharp());
        for i in 1..m.grid().n - 1 {
            let (_, dw) = m.spec().potential.eval(m.qsharp().values[i]).unwrap();
            let interaction_part = g_all[i] - h * dw;
            assert!((interaction_part - h * lq[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn fft_energy_matches_pair_sums() {
        let m = model(12.0, 0.1);
        let q = Profile::sample_pinned(*m.grid(), layer, 0.0, 2.0 * PI);
        let all = Interval::real_line();
        let e = renormalized_interaction_with(m.kernel_weights(), &q, m.qsharp(), &all, &all).unwrap();
        let b = m.breakdown(&q, 0.0, 0.0).unwrap();
        assert!((0.25 * e - b.interaction).abs() < 1e-10 * e.abs(), "{} {}", 0.25 * e, b.interaction);
        let (i, j) = (Interval::new(-3.0, 1.0), Interval::new(0.0, 20.0));
        let eij = renormalized_interaction_with(m.kernel_weights(), &q, m.qsharp(), &i, &j).unwrap();
        let eji = renormalized_interaction_with(m.kernel_weights(), &q, m.qsharp(), &j, &i).unwrap();
        assert!((eij - eji).abs() < 1e-12 * eij.abs().max(1.0));
        let zero = renormalized_interaction_with(m.kernel_weights(), m.qsharp(), m.qsharp(), &i, &j).unwrap();
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn renormalized_layer_energy_is_window_stable() {
        let vals: Vec<f64> = [200.0, 400.0]
            .iter()
            .map(|&r| {
                let m = model(r, 0.1);
                let q = Profile::sample_pinned(*m.grid(), layer, 0.0, 2.0 * PI);
                m.breakdown(&q, 0.0, 0.0).unwrap().interaction
            })
            .collect();
        assert!((vals[0] - vals[1]).abs() < 0.02 * vals[1].abs(), "{vals:?}");
    }

    #[test]
    fn mixed_term_constant_is_finite() {
        let m = model(10.0, 0.1);
        let g = *m.grid();
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let (c, wdt, amp) = (
                rng.random_range(-5.0..5.0),
                rng.random_range(0.3..3.0),
                rng.random_range(-2.0..2.0),
            );
            let v = Profile::sample(
                g,
                |x| {
                    let t = ((x - c) / wdt).abs();
                    if t < 1.0 { amp * (1.0 - t * t).powi(2) } else { 0.0 }
                },
                0.0,
                0.0,
            );
            worst = worst.max(mixed_term_constant(&m, &v).unwrap());
        }
        assert!(worst.is_finite() && worst > 0.0 && worst < 10.0, "{worst}");
    }
}
