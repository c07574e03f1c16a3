//! Grids, profiles with constant far fields, and quadrature for the
//! singular nonlocal operator and the Gagliardo-type double integrals.

mod forms;
mod grid;
mod operator;
mod weights;

pub use forms::{bilinear, seminorm, seminorm_sq};
pub(crate) use forms::pair_sum;
pub use grid::{Grid, Interval, Profile};
pub use operator::NonlocalOperator;
pub use weights::{KernelWeights, TailClosure};
pub(crate) use weights::gauss16;

use crate::error::Result;
use crate::model::{KernelSpec, ProblemSpec};

/// `𝓛Q(x_i)` at one interior node.
pub fn apply_nonlocal(q: &Profile, kernel: &KernelSpec, tail: TailClosure, i: usize) -> Result<f64> {
    NonlocalOperator::new(q.grid, kernel, tail)?.apply_at(q, i)
}

/// `-η Q'' + μ(Q - Q♯) + 𝓛Q + a W'(Q)` on interior nodes; boundary entries
/// are zero.
pub fn apply_full_operator(
    q: &Profile,
    spec: &ProblemSpec,
    eta: f64,
    mu: f64,
    qsharp: &Profile,
) -> Result<Vec<f64>> {
    q.check_same_grid(qsharp)?;
    let op = NonlocalOperator::new(q.grid, &spec.kernel, TailClosure::for_kernel(&spec.kernel))?;
    let a: Vec<f64> = q.grid.nodes().iter().map(|&x| spec.modulation.eval(x)).collect();
    full_operator_with(&op, q, spec, &a, eta, mu, qsharp)
}

pub(crate) fn full_operator_with(
    op: &NonlocalOperator,
    q: &Profile,
    spec: &ProblemSpec,
    a: &[f64],
    eta: f64,
    mu: f64,
    qsharp: &Profile,
) -> Result<Vec<f64>> {
    let n = q.grid.n;
    let h2 = q.grid.h * q.grid.h;
    let lq = op.apply_profile(q);
    let u = &q.values;
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        let (_, dw) = spec.potential.eval(u[i])?;
        let d2 = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h2;
        out[i] = -eta * d2 + mu * (u[i] - qsharp.values[i]) + lq[i] + a[i] * dw;
    }
    Ok(out)
}

/// `[f]_{K, X×Y}` with the operator's quadrature.
pub fn seminorm_k(f: &Profile, x: &Interval, y: &Interval, kernel: &KernelSpec) -> Result<f64> {
    let w = KernelWeights::new(kernel, f.grid.h, f.grid.n + 1, TailClosure::for_kernel(kernel))?;
    Ok(seminorm(&w, f, x, y))
}

/// `𝓑_{I,J}(f, g)` with the operator's quadrature.
pub fn bilinear_form(
    f: &Profile,
    g: &Profile,
    i: &Interval,
    j: &Interval,
    kernel: &KernelSpec,
) -> Result<f64> {
    let w = KernelWeights::new(kernel, f.grid.h, f.grid.n + 1, TailClosure::for_kernel(kernel))?;
    bilinear(&w, f, g, i, j)
}

#[cfg(test)]
mod tests;
