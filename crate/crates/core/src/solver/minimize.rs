use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::discretize::Profile;
use crate::energy::{EnergyBreakdown, EnergyModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StepRule {
    BacktrackingArmijo { c1: f64, shrink: f64 },
    FixedStep(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Projected-gradient 2-norm at which a stage stops; `None` means `1e-8 n`.
    pub grad_tol: Option<f64>,
    pub step_rule: StepRule,
    /// Accepted steps decreasing the energy by less than this count as stalled.
    pub energy_decrease_min: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 20_000,
            grad_tol: None,
            step_rule: StepRule::BacktrackingArmijo {
                c1: 1e-4,
                shrink: 0.5,
            },
            energy_decrease_min: 0.0,
        }
    }
}

impl SolverConfig {
    pub fn tolerance(&self, n: usize) -> f64 {
        self.grad_tol.unwrap_or(1e-8 * n as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::Config("solver.max_iters must be >= 1".into()));
        }
        if let Some(t) = self.grad_tol {
            if !(t > 0.0) {
                return Err(Error::Config("solver.grad_tol must be positive".into()));
            }
        }
        match self.step_rule {
            StepRule::BacktrackingArmijo { c1, shrink } => {
                if !(c1 > 0.0 && c1 <= 0.5 && shrink > 0.0 && shrink < 1.0) {
                    return Err(Error::Config(
                        "Armijo needs c1 in (0, 1/2] and shrink in (0, 1)".into(),
                    ));
                }
            }
            StepRule::FixedStep(a) => {
                if !(a > 0.0) {
                    return Err(Error::Config("fixed step must be positive".into()));
                }
            }
        }
        Ok(())
    }
}

/// Node-wise bounds; boundary nodes are never moved.
#[derive(Debug, Clone)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn project(&self, x: &mut [f64]) {
        let n = x.len();
        for i in 1..n - 1 {
            x[i] = x[i].clamp(self.lower[i], self.upper[i]);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iter: usize,
    pub energy: EnergyBreakdown,
    /// Exact energy decrease of the accepted step, evaluated from the step itself.
    pub decrease: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone)]
pub struct MinimizeOutcome {
    pub profile: Profile,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
    pub trace: Vec<IterRecord>,
}

/// Circulant approximation of the Hessian used to scale descent directions.
struct Preconditioner {
    symbol: Vec<f64>,
}

impl Preconditioner {
    fn new(model: &EnergyModel, eta: f64, mu: f64, shift: f64) -> Self {
        let op = model.operator();
        let h = model.grid().h;
        let len = op.fft_len();
        let diag = 2.0 * op.full_diagonal();
        let symbol = op
            .spectrum()
            .iter()
            .enumerate()
            .map(|(m, &s)| {
                let th = 2.0 * std::f64::consts::PI * m as f64 / len as f64;
                h * (eta * (2.0 - 2.0 * th.cos()) / (h * h) + (diag - s).max(0.0) + mu + shift)
            })
            .collect();
        Preconditioner { symbol }
    }

    fn apply(&self, model: &EnergyModel, r: &[f64], inverse: bool) -> Vec<f64> {
        let op = model.operator();
        let len = op.fft_len();
        let mut buf = vec![Complex::new(0.0, 0.0); len];
        for (b, &v) in buf.iter_mut().zip(r) {
            b.re = v;
        }
        op.fft_forward(&mut buf);
        for (b, &s) in buf.iter_mut().zip(&self.symbol) {
            if inverse {
                *b /= s;
            } else {
                *b *= s;
            }
        }
        op.fft_inverse(&mut buf);
        let scale = 1.0 / len as f64;
        buf[..r.len()].iter().map(|c| c.re * scale).collect()
    }
}

fn projected_gradient_norm(x: &[f64], g: &[f64], b: &Bounds) -> f64 {
    let n = x.len();
    (1..n - 1)
        .map(|i| {
            let p = (x[i] - g[i]).clamp(b.lower[i], b.upper[i]);
            (x[i] - p).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Projected, preconditioned gradient descent with Barzilai-Borwein initial
/// steps and monotone Armijo backtracking along the projection arc.
pub fn minimize_box(
    model: &EnergyModel,
    q0: &Profile,
    bounds: &Bounds,
    eta: f64,
    mu: f64,
    cfg: &SolverConfig,
) -> Result<MinimizeOutcome> {
    cfg.validate()?;
    let g = *model.grid();
    let n = g.n;
    let h = g.h;
    let tol = cfg.tolerance(n);
    let spec = model.spec();
    let a = model.modulation_samples();
    let curvature = spec
        .potential
        .second_derivative(spec.potential.zeta1)
        .unwrap_or(1.0)
        .max(0.0);
    let shift = spec.modulation.bounds().0 * curvature;
    let pre = Preconditioner::new(model, eta, mu, shift);
    let diag_scale = h * (2.0 * eta / (h * h) + 2.0 * model.operator().full_diagonal() + mu + shift);

    let mut q = q0.clone();
    bounds.project(&mut q.values);
    let mut grad = model.gradient(&q, eta, mu)?;
    let mut energy = model.breakdown(&q, eta, mu)?;
    let mut pg = projected_gradient_norm(&q.values, &grad, bounds);
    let mut trace = vec![IterRecord {
        iter: 0,
        energy,
        decrease: 0.0,
        grad_norm: pg,
    }];
    let mut alpha_bb = 1.0;
    let mut iters = 0;
    let mut stalled = 0usize;

    while pg > tol && iters < cfg.max_iters {
        iters += 1;
        let x = &q.values;
        let eps_act = pg.min(1e-3);
        let active: Vec<bool> = (0..n)
            .map(|i| {
                i == 0
                    || i == n - 1
                    || (x[i] <= bounds.lower[i] + eps_act && grad[i] > 0.0)
                    || (x[i] >= bounds.upper[i] - eps_act && grad[i] < 0.0)
            })
            .collect();
        let local: Vec<f64> = (0..n)
            .map(|i| {
                if i == 0 || i == n - 1 {
                    0.0
                } else {
                    spec.potential.eval(x[i]).map(|(_, d)| h * a[i] * d).unwrap_or(0.0)
                }
            })
            .collect();
        let gq: Vec<f64> = grad.iter().zip(&local).map(|(g, l)| g - l).collect();

        let mut accepted: Option<(Vec<f64>, f64)> = None;
        let directions: Vec<Vec<f64>> = match cfg.step_rule {
            StepRule::FixedStep(_) => vec![grad.iter().map(|g| -g).collect()],
            StepRule::BacktrackingArmijo { .. } => {
                let masked: Vec<f64> = (0..n).map(|i| if active[i] { 0.0 } else { grad[i] }).collect();
                let pd = pre.apply(model, &masked, true);
                let two_metric: Vec<f64> = (0..n)
                    .map(|i| {
                        if i == 0 || i == n - 1 {
                            0.0
                        } else if active[i] {
                            -grad[i] / diag_scale
                        } else {
                            -pd[i]
                        }
                    })
                    .collect();
                let plain: Vec<f64> = grad.iter().map(|g| -g / diag_scale).collect();
                vec![two_metric, plain]
            }
        };
        'dirs: for (k, d) in directions.iter().enumerate() {
            let (mut alpha, c1, shrink) = match cfg.step_rule {
                StepRule::FixedStep(s) => (s, 0.0, 1.0),
                StepRule::BacktrackingArmijo { c1, shrink } => {
                    (if k == 0 { alpha_bb } else { 1.0 }, c1, shrink)
                }
            };
            for _ in 0..60 {
                let mut trial = x.clone();
                for i in 1..n - 1 {
                    trial[i] += alpha * d[i];
                }
                bounds.project(&mut trial);
                let delta: Vec<f64> = trial.iter().zip(x).map(|(t, s)| t - s).collect();
                let slope = dot(&grad, &delta);
                if delta.iter().all(|&v| v == 0.0) {
                    break;
                }
                let hd = model.quadratic_hessian(&delta, eta, mu);
                let dq = dot(&gq, &delta) + 0.5 * dot(&delta, &hd);
                let dl = model.potential_change(x, &delta)?;
                let de = dq + dl;
                let ok = match cfg.step_rule {
                    StepRule::FixedStep(_) => de <= 0.0,
                    StepRule::BacktrackingArmijo { .. } => slope < 0.0 && de <= c1 * slope,
                };
                if ok {
                    accepted = Some((trial, de));
                    if k == 0 && matches!(cfg.step_rule, StepRule::BacktrackingArmijo { .. }) {
                        alpha_bb = alpha;
                    }
                    break 'dirs;
                }
                if matches!(cfg.step_rule, StepRule::FixedStep(_)) {
                    return Err(Error::EnergyIncrease {
                        iter: iters,
                        increase: de,
                    });
                }
                alpha *= shrink;
            }
        }
        let Some((trial, de)) = accepted else {
            return Err(Error::Stagnation {
                iters,
                grad_norm: pg,
                step: alpha_bb,
            });
        };
        let s: Vec<f64> = trial.iter().zip(&q.values).map(|(a, b)| a - b).collect();
        q.values = trial;
        let new_grad = model.gradient(&q, eta, mu)?;
        let new_energy = model.breakdown(&q, eta, mu)?;
        let scale = 1.0f64.max(energy.total.abs());
        if new_energy.total > energy.total + 1e-12 * scale {
            return Err(Error::EnergyIncrease {
                iter: iters,
                increase: new_energy.total - energy.total,
            });
        }
        energy = new_energy;
        if -de < cfg.energy_decrease_min {
            stalled += 1;
        } else {
            stalled = 0;
        }
        if let StepRule::BacktrackingArmijo { .. } = cfg.step_rule {
            let y: Vec<f64> = new_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            let ms = pre.apply(model, &s, false);
            let sms = dot(&s, &ms);
            alpha_bb = if sy > 0.0 && sms > 0.0 {
                (sms / sy).clamp(1e-3, 1e3)
            } else {
                1.0
            };
        }
        grad = new_grad;
        pg = projected_gradient_norm(&q.values, &grad, bounds);
        trace.push(IterRecord {
            iter: iters,
            energy,
            decrease: -de,
            grad_norm: pg,
        });
        if stalled >= 50 {
            break;
        }
    }
    Ok(MinimizeOutcome {
        profile: q,
        iterations: iters,
        grad_norm: pg,
        converged: pg <= tol,
        trace,
    })
}
