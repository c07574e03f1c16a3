//! Scaled bump and logarithmic-spike families with known norm scalings,
//! used to exercise the fractional seminorm quadrature.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretize::{gauss16, seminorm_sq, Grid, Interval, KernelWeights, Profile, TailClosure};
use crate::error::{Error, Result};
use crate::model::KernelSpec;

/// `(1 - x²)⁴` on `[-1, 1]`, zero outside.
pub fn base_bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - x * x).powi(4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BumpCenters {
    /// `b_k = k`
    Integer,
    /// `b_k = 1/k`
    Reciprocal,
}

impl BumpCenters {
    pub fn center(self, k: u32) -> f64 {
        match self {
            BumpCenters::Integer => k as f64,
            BumpCenters::Reciprocal => 1.0 / k.max(1) as f64,
        }
    }
}

/// Members `x ↦ φ(e^k (x - b_k))` of the bump family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpFamily {
    pub s: f64,
    pub centers: BumpCenters,
    /// Grid cells across one member's support.
    pub cells: usize,
}

impl BumpFamily {
    pub fn new(s: f64) -> Result<Self> {
        if !(s > 0.0 && s < 0.5) {
            return Err(Error::Precondition(format!(
                "the bump family needs s in (0, 1/2), got {s}"
            )));
        }
        Ok(BumpFamily {
            s,
            centers: BumpCenters::Integer,
            cells: 400,
        })
    }

    pub fn member(&self, k: u32, x: f64) -> f64 {
        base_bump((k as f64).exp() * (x - self.centers.center(k)))
    }

    pub fn with_cells(mut self, cells: usize) -> Self {
        self.cells = cells;
        self
    }
}

/// Spacing below which points near `center` are not distinguishable in
/// double precision with room for quadrature.
fn check_resolvable(center: f64, spacing: f64, what: &str) -> Result<()> {
    let floor = 1e3 * f64::EPSILON * center.abs().max(1.0);
    if !(spacing > floor) {
        return Err(Error::Resolution(format!(
            "{what}: spacing {spacing:.3e} near x = {center} is below the representable {floor:.3e}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemberNorms {
    pub k: i32,
    pub l2: f64,
    pub seminorm: f64,
}

/// `‖φ_k‖_{L²}` and `[φ_k]_{H^s}` on a grid spanning the member's support,
/// in coordinates centered at `b_k`.
pub fn bump_norms(family: &BumpFamily, k: u32) -> Result<MemberNorms> {
    let width = (-(k as f64)).exp();
    let cells = family.cells.max(8);
    let h = 2.0 * width / cells as f64;
    check_resolvable(family.centers.center(k), h, &format!("bump member {k}"))?;
    let grid = Grid::new(width, cells + 1)?;
    let scale = (k as f64).exp();
    let p = Profile::sample(grid, |t| base_bump(scale * t), 0.0, 0.0);
    let kernel = KernelSpec::power_law(family.s, 1.0);
    let w = KernelWeights::new(&kernel, grid.h, grid.n + 1, TailClosure::AnalyticPower)?;
    let all = Interval::real_line();
    let l2 = (0..grid.n).map(|i| grid.trapezoid(i) * p.values[i].powi(2)).sum::<f64>().sqrt();
    Ok(MemberNorms {
        k: k as i32,
        l2,
        seminorm: seminorm_sq(&w, &p, &all, &all).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionWitness {
    /// Largest value at the sampled bump centers.
    pub limsup_est: f64,
    /// Largest value at the sampled midpoints between centers.
    pub liminf_est: f64,
}

/// `Σ_{k≥1} φ(e^k(x - 1/k)) + Σ_{k≥1} φ(e^k(x - k))`, truncated where
/// members vanish in double precision.
pub fn superposition(x: f64) -> f64 {
    let mut total = 0.0;
    for k in 1..=700u32 {
        let e = (k as f64).exp();
        total += base_bump(e * (x - 1.0 / k as f64)) + base_bump(e * (x - k as f64));
    }
    total
}

pub fn superposition_tail_witness(ks: &[u32]) -> SuperpositionWitness {
    let centers = ks.iter().map(|&k| superposition(k as f64));
    let mids = ks.iter().map(|&k| superposition(k as f64 + 0.5));
    SuperpositionWitness {
        limsup_est: centers.fold(0.0, f64::max),
        liminf_est: mids.fold(0.0, f64::max),
    }
}

/// `[Σ_{k∈ks} φ(e^k(x - k))]_{H^s}` on one uniform grid, next to
/// `Σ [φ_k]_{H^s}`.
pub fn superposition_seminorm(family: &BumpFamily, ks: &[u32]) -> Result<(f64, f64)> {
    let kmax = *ks.iter().max().ok_or_else(|| Error::Precondition("empty member list".into()))?;
    let kmin = *ks.iter().min().unwrap();
    let lo = kmin as f64 - 1.0;
    let hi = kmax as f64 + 1.0;
    let mid = 0.5 * (lo + hi);
    let h = 2.0 * (-(kmax as f64)).exp() / family.cells.max(8) as f64;
    let n = ((hi - lo) / h).ceil() as usize | 1;
    let grid = Grid::new(0.5 * (hi - lo), n)?;
    let p = Profile::sample(
        grid,
        |t| ks.iter().map(|&k| base_bump((k as f64).exp() * (t + mid - k as f64))).sum(),
        0.0,
        0.0,
    );
    let kernel = KernelSpec::power_law(family.s, 1.0);
    let w = KernelWeights::new(&kernel, grid.h, grid.n + 1, TailClosure::AnalyticPower)?;
    let all = Interval::real_line();
    let whole = seminorm_sq(&w, &p, &all, &all).sqrt();
    let mut parts = 0.0;
    for &k in ks {
        parts += bump_norms(&family.with_cells(family.cells), k)?.seminorm;
    }
    Ok((whole, parts))
}

/// `ln(1 - ln|x|)` on `(-1, 1) \ {0}`, zero elsewhere.
pub fn log_spike(x: f64) -> f64 {
    let a = x.abs();
    if a >= 1.0 || a == 0.0 {
        0.0
    } else {
        (1.0 - a.ln()).ln()
    }
}

/// Members `x ↦ e^{-|k|} ψ̄(e^{|k|}(x - e^k))` of the spike family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceExample {
    /// Geometric cells per decade toward the singular point.
    pub cells_per_decade: usize,
    /// Innermost cell edge, relative to the support half-width.
    pub inner: f64,
}

impl Default for TraceExample {
    fn default() -> Self {
        TraceExample {
            cells_per_decade: 12,
            inner: 1e-8,
        }
    }
}

impl TraceExample {
    pub fn member(&self, k: i32, x: f64) -> f64 {
        let a = (k.unsigned_abs() as f64).exp();
        log_spike(a * (x - (k as f64).exp())) / a
    }

    pub fn refined(&self, factor: usize) -> Self {
        TraceExample {
            cells_per_decade: self.cells_per_decade * factor,
            ..*self
        }
    }

    /// Cell edges on `[-w, w]`, graded geometrically toward 0.
    fn edges(&self, w: f64) -> Vec<f64> {
        let decades = -self.inner.log10();
        let m = (decades * self.cells_per_decade as f64).ceil() as usize;
        let pos: Vec<f64> = (0..=m).map(|i| w * self.inner.powf(1.0 - i as f64 / m as f64)).collect();
        let mut out: Vec<f64> = pos.iter().rev().map(|x| -x).collect();
        out.extend(pos);
        out
    }
}

/// `∫ f²` and `∬ (f(x) - f(y))² / |x - y|^{1+2s}` for `f` supported in
/// `[edges₀, edges_last]` (symmetric), by tensor Gauss-Legendre over pairs of
/// cells plus the exact exterior contribution.
pub(crate) fn cellwise_norms(f: &(dyn Fn(f64) -> f64 + Sync), edges: &[f64], s: f64) -> (f64, f64) {
    let w = *edges.last().unwrap();
    let gl = gauss16();
    let pts: Vec<Vec<(f64, f64, f64)>> = edges
        .windows(2)
        .map(|e| {
            let (c, r) = (0.5 * (e[0] + e[1]), 0.5 * (e[1] - e[0]));
            gl.iter()
                .map(|&(t, wt)| {
                    let x = c + r * t;
                    (x, wt * r, f(x))
                })
                .collect()
        })
        .collect();
    let l2 = pts.iter().flatten().map(|&(_, wt, v)| wt * v * v).sum::<f64>();
    let inner: f64 = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for cell in &pts {
                for &(x, wx, fx) in &pts[i] {
                    for &(y, wy, fy) in cell {
                        let d = (x - y).abs();
                        if d != 0.0 {
                            acc += wx * wy * (fx - fy).powi(2) / d.powf(1.0 + 2.0 * s);
                        }
                    }
                }
            }
            acc
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    let outer = 2.0
        * pts
            .iter()
            .flatten()
            .map(|&(x, wt, v)| wt * v * v * ((w - x).powf(-2.0 * s) + (w + x).powf(-2.0 * s)) / (2.0 * s))
            .sum::<f64>();
    (l2, inner + outer)
}

/// `‖ψ_k‖_{L²}` and `[ψ_k]_{H^{1/2}}` with kernel `1/|x - y|²` on cells
/// graded toward the singular point.
pub fn trace_norms(example: &TraceExample, k: i32) -> Result<MemberNorms> {
    let a = (k.unsigned_abs() as f64).exp();
    let w = 1.0 / a;
    let center = (k as f64).exp();
    check_resolvable(center, w * example.inner, &format!("spike member {k}"))?;
    let f = |t: f64| log_spike(a * t) / a;
    let edges = example.edges(w);
    let (l2_sq, semi_sq) = cellwise_norms(&f, &edges, 0.5);
    Ok(MemberNorms {
        k,
        l2: l2_sq.sqrt(),
        seminorm: semi_sq.sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub k: i32,
    pub l2: f64,
    pub hs: f64,
    pub ratio_l2: Option<f64>,
    pub ratio_hs: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingCheck {
    pub family: String,
    pub rows: Vec<ScalingRow>,
    pub expected_l2: f64,
    pub expected_hs: f64,
    pub tol: f64,
    /// Largest relative deviation of any ratio from its expected value.
    pub worst: f64,
    pub pass: bool,
}

fn scaling(family: String, norms: Vec<MemberNorms>, expected_l2: f64, expected_hs: f64, tol: f64) -> ScalingCheck {
    let mut rows: Vec<ScalingRow> = Vec::new();
    let mut worst = 0.0f64;
    for (i, m) in norms.iter().enumerate() {
        let (rl, rh) = if i == 0 {
            (None, None)
        } else {
            let p = &norms[i - 1];
            let rl = m.l2 / p.l2;
            let rh = m.seminorm / p.seminorm;
            worst = worst.max(((rl - expected_l2) / expected_l2).abs());
            worst = worst.max(((rh - expected_hs) / expected_hs).abs());
            (Some(rl), Some(rh))
        };
        rows.push(ScalingRow {
            k: m.k,
            l2: m.l2,
            hs: m.seminorm,
            ratio_l2: rl,
            ratio_hs: rh,
        });
    }
    ScalingCheck {
        family,
        rows,
        expected_l2,
        expected_hs,
        tol,
        worst,
        pass: worst <= tol,
    }
}

/// Consecutive-member ratios against `e^{-1/2}` and `e^{-(1-2s)/2}`.
pub fn bump_scaling(family: &BumpFamily, ks: &[u32], tol: f64) -> Result<ScalingCheck> {
    let norms = ks
        .par_iter()
        .map(|&k| bump_norms(family, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(scaling(
        format!("bump s={}", family.s),
        norms,
        (-0.5f64).exp(),
        (-(1.0 - 2.0 * family.s) / 2.0).exp(),
        tol,
    ))
}

/// Consecutive-member ratios against `e^{-3/2}` and `e^{-1}`.
pub fn trace_scaling(example: &TraceExample, ks: &[i32], tol: f64) -> Result<ScalingCheck> {
    let norms = ks
        .iter()
        .map(|&k| trace_norms(example, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(scaling("trace".into(), norms, (-1.5f64).exp(), (-1.0f64).exp(), tol))
}

impl ScalingCheck {
    /// `k,l2,hs,ratio_l2,ratio_hs`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,l2,hs,ratio_l2,ratio_hs\n");
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.12e}")).unwrap_or_default();
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.12e},{:.12e},{},{}\n",
                r.k,
                r.l2,
                r.hs,
                opt(r.ratio_l2),
                opt(r.ratio_hs)
            ));
        }
        out
    }

    /// Largest relative change of any ratio against another run of the same ks.
    pub fn ratio_drift(&self, other: &ScalingCheck) -> f64 {
        self.rows
            .iter()
            .zip(&other.rows)
            .flat_map(|(a, b)| [(a.ratio_l2, b.ratio_l2), (a.ratio_hs, b.ratio_hs)])
            .filter_map(|(a, b)| Some(((a? - b?) / b?).abs()))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeroth_bump_matches_template_quadrature() {
        let fam = BumpFamily::new(0.3).unwrap();
        let m = bump_norms(&fam, 0).unwrap();
        // ∫(1-x²)^8 = 2 · 2^16 (8!)² / 17!
        let exact: f64 = 2.0 * 65536.0 * 40320.0f64.powi(2) / 355687428096000.0;
        assert!((m.l2 * m.l2 - exact).abs() < 1e-6 * exact);
    }

    #[test]
    fn template_seminorm_matches_cellwise_quadrature() {
        for s in [0.3, 0.4] {
            let fam = BumpFamily::new(s).unwrap();
            let m = bump_norms(&fam, 0).unwrap();
            let edges: Vec<f64> = (0..=200).map(|i| -1.0 + i as f64 / 100.0).collect();
            let (_, oracle) = cellwise_norms(&base_bump, &edges, s);
            let rel = (m.seminorm - oracle.sqrt()).abs() / oracle.sqrt();
            assert!(rel < 5e-3, "s = {s}: {} vs {}", m.seminorm, oracle.sqrt());
        }
    }

    #[test]
    fn bump_family_rejects_half() {
        assert!(matches!(BumpFamily::new(0.5), Err(Error::Precondition(_))));
    }

    #[test]
    fn deep_members_are_unresolvable() {
        let fam = BumpFamily::new(0.3).unwrap();
        assert!(matches!(bump_norms(&fam, 40), Err(Error::Resolution(_))));
    }

    #[test]
    fn superposition_peaks_and_gaps() {
        for k in 5..=20u32 {
            assert_eq!(superposition(k as f64), 1.0);
            assert_eq!(superposition(k as f64 + 0.5), 0.0);
        }
    }

    #[test]
    fn disjoint_members_have_no_cross_term() {
        let fam = BumpFamily::new(0.3).unwrap();
        let mut cross = 0.0;
        for i in 0..=4000 {
            let x = 0.5 + 3.0 * i as f64 / 4000.0;
            cross += fam.member(1, x) * fam.member(2, x);
        }
        assert_eq!(cross, 0.0);
    }
}
