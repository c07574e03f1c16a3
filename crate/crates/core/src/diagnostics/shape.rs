use serde::{Deserialize, Serialize};

use crate::discretize::{seminorm_sq, Interval, Profile};
use crate::energy::{renormalized_interaction_with, EnergyModel};
use crate::error::{Error, Result};

/// `max |Q(x) - Q(y)| / |x - y|^α` over node pairs in `iv` at least one
/// step apart.
pub fn holder_estimate(q: &Profile, iv: &Interval, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Precondition(format!("alpha = {alpha} outside (0, 1)")));
    }
    let g = q.grid;
    let tol = 1e-9 * g.h;
    if iv.lo < -g.half_width - tol || iv.hi > g.half_width + tol {
        return Err(Error::Domain(format!("[{}, {}] outside the grid", iv.lo, iv.hi)));
    }
    let nodes: Vec<usize> = (0..g.n)
        .filter(|&i| g.x(i) >= iv.lo - tol && g.x(i) <= iv.hi + tol)
        .collect();
    let mut best = 0.0f64;
    for (k, &i) in nodes.iter().enumerate() {
        for &j in &nodes[k + 1..] {
            let d = g.x(j) - g.x(i);
            best = best.max((q.values[j] - q.values[i]).abs() / d.powf(alpha));
        }
    }
    Ok(best)
}

/// `ρ^{1-α/2s}/|ln ρ|^α + ρ + μ^{α/2s} ρ^{1-α/2s}`, the size a Hölder
/// estimate on a `ρ`-clean interval is compared against.
pub fn clean_holder_scale(rho: f64, alpha: f64, s: f64, mu: f64) -> f64 {
    let e = 1.0 - alpha / (2.0 * s);
    rho.powf(e) / rho.ln().abs().powf(alpha) + rho + mu.powf(alpha / (2.0 * s)) * rho.powf(e)
}

/// `|ln ρ| / 8`.
pub fn glue_width(rho: f64) -> f64 {
    rho.ln().abs() / 8.0
}

/// `Q` left of `x₀`, then the linear ramp to `ζ` over `[x₀, x₀ + 1]`, then
/// `ζ`. The right far field becomes `ζ`.
pub fn glue_profile(q: &Profile, x0: f64, zeta: f64, beta: f64) -> Result<Profile> {
    let g = q.grid;
    if beta < 1.0 {
        return Err(Error::Precondition(format!("beta = {beta} below 1")));
    }
    if x0 + beta > g.half_width || x0 < -g.half_width {
        return Err(Error::Domain(format!(
            "splice at {x0} with width {beta} leaves the window [-{R}, {R}]",
            R = g.half_width
        )));
    }
    let i0 = g.nearest(x0);
    let x0 = g.x(i0);
    let q0 = q.values[i0];
    let mut p = q.clone();
    for i in i0 + 1..g.n {
        let x = g.x(i);
        p.values[i] = if x < x0 + 1.0 {
            q0 * (x0 + 1.0 - x) + zeta * (x - x0)
        } else {
            zeta
        };
    }
    p.right = zeta;
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GluingDefect {
    pub whole: f64,
    pub left: f64,
    pub right: f64,
    pub cross: f64,
    pub defect: f64,
}

/// `|E_{(T₁,T₂)²}(P) - E_{(T₁,x₀)²}(Q) - E_{(x₀,T₂)²}(P) + 2[Q♯]²_{(x₀-β,x₀)×(x₀,x₀+β)}|`
/// with `E` the renormalized interaction.
pub fn gluing_energy_defect(
    model: &EnergyModel,
    q: &Profile,
    p: &Profile,
    x0: f64,
    beta: f64,
    t1: f64,
    t2: f64,
) -> Result<GluingDefect> {
    if !(t1 <= x0 - beta && x0 + beta <= t2) {
        return Err(Error::Precondition(format!(
            "need T1 <= x0 - beta < x0 + beta <= T2, got {t1}, {x0}, {beta}, {t2}"
        )));
    }
    let w = model.kernel_weights();
    let qs = model.qsharp();
    let i_all = Interval::new(t1, t2);
    let i_left = Interval::new(t1, x0);
    let i_right = Interval::new(x0, t2);
    let whole = renormalized_interaction_with(w, p, qs, &i_all, &i_all)?;
    let left = renormalized_interaction_with(w, q, qs, &i_left, &i_left)?;
    let right = renormalized_interaction_with(w, p, qs, &i_right, &i_right)?;
    let cross = seminorm_sq(w, qs, &Interval::new(x0 - beta, x0), &Interval::new(x0, x0 + beta));
    Ok(GluingDefect {
        whole,
        left,
        right,
        cross,
        defect: (whole - left - right + 2.0 * cross).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub side: Side,
    pub fitted_exponent: f64,
    pub fitted_constant: f64,
    pub r_squared: f64,
    /// `(|x|, ln |Q - ζ|)` used in the fit.
    pub points: Vec<(f64, f64)>,
}

/// Least-squares fit of `ln |Q - ζ|` against `ln |x|` over
/// `R/8 <= |x| <= R/2` on one side.
pub fn fit_tail_decay(q: &Profile, side: Side) -> Result<TailFit> {
    let g = q.grid;
    let r = g.half_width;
    let well = match side {
        Side::Left => q.left,
        Side::Right => q.right,
    };
    let idx: Vec<usize> = match side {
        Side::Right => (0..g.n).filter(|&i| g.x(i) >= 0.125 * r && g.x(i) <= 0.5 * r).collect(),
        Side::Left => (0..g.n).filter(|&i| g.x(i) <= -0.125 * r && g.x(i) >= -0.5 * r).collect(),
    };
    let points: Vec<(f64, f64)> = idx
        .iter()
        .filter_map(|&i| {
            let d = (q.values[i] - well).abs();
            (d > 1e-13).then(|| (g.x(i).abs(), d.ln()))
        })
        .collect();
    if points.len() < 3 || points.len() * 2 < idx.len() {
        return Err(Error::DegenerateFit(format!(
            "deviation from {well} below 1e-13 on the {side:?} fit region"
        )));
    }
    let m = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("fit abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(TailFit {
        side,
        fitted_exponent: slope,
        fitted_constant: intercept.exp(),
        r_squared,
        points,
    })
}

/// Shift `c` minimizing `max |Q(x) - f(x - c)|` over `|c| <= span`, by a
/// coarse scan refined with golden-section search; returns `(c, distance)`.
pub fn fit_shift(q: &Profile, f: impl Fn(f64) -> f64, span: f64) -> (f64, f64) {
    let g = q.grid;
    let dist = |c: f64| {
        (0..g.n)
            .map(|i| (q.values[i] - f(g.x(i) - c)).abs())
            .fold(0.0f64, f64::max)
    };
    let steps = 64;
    let mut best = (0.0, dist(0.0));
    for k in 0..=steps {
        let c = -span + 2.0 * span * k as f64 / steps as f64;
        let d = dist(c);
        if d < best.1 {
            best = (c, d);
        }
    }
    let step = 2.0 * span / steps as f64;
    let (mut lo, mut hi) = (best.0 - step, best.0 + step);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = hi - phi * (hi - lo);
    let mut b = lo + phi * (hi - lo);
    let (mut fa, mut fb) = (dist(a), dist(b));
    for _ in 0..80 {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - phi * (hi - lo);
            fa = dist(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + phi * (hi - lo);
            fb = dist(b);
        }
    }
    let c = 0.5 * (lo + hi);
    let d = dist(c);
    if d < best.1 {
        (c, d)
    } else {
        best
    }
}

/// Largest drop `Q(xᵢ) - Q(xⱼ)` with `i < j`; zero for a nondecreasing profile.
pub fn monotonicity_defect(q: &Profile) -> f64 {
    let mut run_max = f64::NEG_INFINITY;
    let mut worst = 0.0f64;
    for &v in &q.values {
        run_max = run_max.max(v);
        worst = worst.max(run_max - v);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::Grid;
    use std::f64::consts::{PI, TAU};

    fn layer(x: f64) -> f64 {
        PI + 2.0 * x.atan()
    }

    #[test]
    fn holder_of_constant_and_layer() {
        let g = Grid::new(2.0, 401).unwrap();
        let c = Profile::constant(g, 1.0);
        assert_eq!(holder_estimate(&c, &Interval::new(-1.0, 1.0), 0.5).unwrap(), 0.0);
        let coarse = Profile::sample(g, layer, 0.0, TAU);
        let fine = Profile::sample(Grid::new(2.0, 801).unwrap(), layer, 0.0, TAU);
        let iv = Interval::new(-1.0, 1.0);
        let a = holder_estimate(&coarse, &iv, 0.9).unwrap();
        let b = holder_estimate(&fine, &iv, 0.9).unwrap();
        assert!(((a - b) / b).abs() < 0.05, "{a} vs {b}");
    }

    #[test]
    fn glue_is_identity_on_matched_tail() {
        let g = Grid::new(20.0, 401).unwrap();
        let q = Profile::sample(g, |x| if x > 3.0 { TAU } else { layer(x) }, 0.0, TAU);
        let p = glue_profile(&q, 5.0, TAU, 2.0).unwrap();
        assert_eq!(p, q);
        assert!(matches!(glue_profile(&q, 19.5, TAU, 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn layer_tail_exponent() {
        let g = Grid::with_spacing(200.0, 0.05).unwrap();
        let q = Profile::sample(g, layer, 0.0, TAU);
        let fit = fit_tail_decay(&q, Side::Right).unwrap();
        assert!((fit.fitted_exponent + 1.0).abs() < 0.1);
        assert!((fit.fitted_constant - 2.0).abs() < 0.05);
        let flat = Profile::constant(g, TAU);
        assert!(matches!(fit_tail_decay(&flat, Side::Right), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn recovers_a_known_shift() {
        let g = Grid::new(50.0, 1001).unwrap();
        let q = Profile::sample(g, |x| layer(x - 0.37), 0.0, TAU);
        let (c, d) = fit_shift(&q, layer, 2.0);
        assert!((c - 0.37).abs() < 1e-6 && d < 1e-5);
    }

    #[test]
    fn monotone_profiles_have_no_defect() {
        let g = Grid::new(5.0, 101).unwrap();
        assert_eq!(monotonicity_defect(&Profile::sample(g, layer, 0.0, TAU)), 0.0);
        let bump = Profile::sample(g, |x| (-x * x).exp(), 0.0, 0.0);
        assert!((monotonicity_defect(&bump) - 1.0).abs() < 1e-10);
    }
}
