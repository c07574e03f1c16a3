//! TOML run configuration.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::discretize::Grid;
use crate::error::{Error, Result};
use crate::model::{
    KernelSpec, ModulationForm, ModulationSpec, Nondegeneracy, PotentialForm, PotentialSpec, ProblemSpec,
};
use crate::obstacles::ObstacleConfig;
use crate::solver::{ContinuationSchedule, SolverConfig, StepRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    FractionalLaplacian,
    PowerLaw,
    TruncatedPower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelSection {
    pub s: f64,
    pub form: KernelKind,
    pub c: Option<f64>,
    pub c_far: Option<f64>,
    pub r0: Option<f64>,
}

impl Default for KernelSection {
    fn default() -> Self {
        KernelSection {
            s: 0.5,
            form: KernelKind::FractionalLaplacian,
            c: None,
            c_far: None,
            r0: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    Cosine,
    Quartic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialSection {
    pub form: PotentialKind,
    pub wells: [f64; 2],
    pub amplitude: Option<f64>,
    pub delta0: Option<f64>,
}

impl Default for PotentialSection {
    fn default() -> Self {
        PotentialSection {
            form: PotentialKind::Cosine,
            wells: [0.0, std::f64::consts::TAU],
            amplitude: None,
            delta0: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulationKind {
    Constant,
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModulationSection {
    pub form: ModulationKind,
    pub value: f64,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub a_lower: Option<f64>,
    pub a_upper: Option<f64>,
    pub nondegeneracy: Option<Nondegeneracy>,
}

impl Default for ModulationSection {
    fn default() -> Self {
        ModulationSection {
            form: ModulationKind::Constant,
            value: 1.0,
            eps: None,
            delta: None,
            a_lower: None,
            a_upper: None,
            nondegeneracy: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    #[serde(rename = "R")]
    pub half_width: f64,
    pub n: Option<usize>,
    pub h: Option<f64>,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            half_width: 200.0,
            n: None,
            h: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObstacleSection {
    pub tau: Option<f64>,
    pub r: Option<f64>,
    pub b1: Option<f64>,
    pub b2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub max_iters: usize,
    pub grad_tol: Option<f64>,
    pub armijo_c1: f64,
    pub armijo_shrink: f64,
    pub fixed_step: Option<f64>,
    pub energy_decrease_min: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            max_iters: 20_000,
            grad_tol: None,
            armijo_c1: 1e-4,
            armijo_shrink: 0.5,
            fixed_step: None,
            energy_decrease_min: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsSection {
    pub rho: f64,
    pub holder_alpha: f64,
    pub stickiness_tol: f64,
    pub ls_slack: Option<f64>,
    /// Viscosity and penalty the diagnosed profile was computed at.
    pub eta: f64,
    pub mu: f64,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        DiagnosticsSection {
            rho: 0.05,
            holder_alpha: 0.5,
            stickiness_tol: 1e-2,
            ls_slack: None,
            eta: 0.0,
            mu: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchSection {
    pub s_values: Vec<f64>,
    pub k_max: u32,
    pub cells: usize,
    pub trace_k_max: i32,
    pub bump_tol: f64,
    pub trace_tol: f64,
}

impl Default for BenchSection {
    fn default() -> Self {
        BenchSection {
            s_values: vec![0.3, 0.4],
            k_max: 12,
            cells: 400,
            trace_k_max: 4,
            bump_tol: 0.03,
            trace_tol: 0.05,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub kernel: KernelSection,
    pub potential: PotentialSection,
    pub modulation: ModulationSection,
    pub grid: GridSection,
    pub obstacles: ObstacleSection,
    pub solver: SolverSection,
    pub continuation: ContinuationSchedule,
    pub diagnostics: DiagnosticsSection,
    pub bench: BenchSection,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
            Error::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Canonical serialization of the resolved configuration.
    pub fn resolved(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.resolved().as_bytes()))
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        let k = &self.kernel;
        let kernel = match k.form {
            KernelKind::FractionalLaplacian => {
                if k.c.is_some() {
                    return Err(Error::Config(
                        "kernel.c is fixed by form = \"fractional_laplacian\"; use form = \"power_law\"".into(),
                    ));
                }
                KernelSpec::fractional_laplacian(k.s)
            }
            KernelKind::PowerLaw => {
                KernelSpec::power_law(k.s, k.c.unwrap_or(crate::model::fractional_laplacian_constant(k.s)))
            }
            KernelKind::TruncatedPower => {
                let c = k.c.unwrap_or(crate::model::fractional_laplacian_constant(k.s));
                KernelSpec::truncated_power(k.s, c, k.c_far.unwrap_or(0.0), k.r0.unwrap_or(1.0))
            }
        };
        let p = &self.potential;
        let [z1, z2] = p.wells;
        let mut potential = PotentialSpec::cosine(z1, z2);
        match p.form {
            PotentialKind::Cosine => {
                if let Some(a) = p.amplitude {
                    potential.form = PotentialForm::Cosine { amplitude: a };
                }
            }
            PotentialKind::Quartic => {
                let l = z2 - z1;
                potential.form = PotentialForm::QuarticDoubleWell {
                    amplitude: p.amplitude.unwrap_or(0.5 / (l * l)),
                };
            }
        }
        if let Some(d) = p.delta0 {
            potential.delta0 = d;
        }
        let m = &self.modulation;
        let mut modulation = match m.form {
            ModulationKind::Constant => ModulationSpec::constant(m.value),
            ModulationKind::Periodic => {
                let (eps, delta) = match (m.eps, m.delta) {
                    (Some(e), Some(d)) => (e, d),
                    _ => {
                        return Err(Error::Config(
                            "modulation.form = \"periodic\" needs modulation.eps and modulation.delta".into(),
                        ))
                    }
                };
                ModulationSpec::periodic(eps, delta)
            }
        };
        if m.nondegeneracy.is_some() {
            modulation.nondegeneracy = m.nondegeneracy;
        }
        modulation.a_lower = m.a_lower;
        modulation.a_upper = m.a_upper;
        if let ModulationForm::Constant(v) = modulation.form {
            if !(v > 0.0) {
                return Err(Error::Config(format!("modulation.value = {v} must be positive")));
            }
        }
        Ok(ProblemSpec {
            kernel,
            potential,
            modulation,
        })
    }

    pub fn grid(&self) -> Result<Grid> {
        let g = &self.grid;
        match (g.n, g.h) {
            (Some(n), None) => Grid::new(g.half_width, n),
            (None, Some(h)) => Grid::with_spacing(g.half_width, h),
            (Some(_), Some(_)) => Err(Error::Config("give grid.n or grid.h, not both".into())),
            (None, None) => Grid::with_spacing(g.half_width, 0.05),
        }
    }

    /// Obstacle parameters; `b₁`, `b₂` default to the declared maxima of `a`
    /// when those lie outside `(-1, 1)`.
    pub fn obstacles(&self, spec: &ProblemSpec) -> Result<ObstacleConfig> {
        let o = &self.obstacles;
        let nd = spec.modulation.nondegeneracy;
        let b1 = o.b1.or(nd.map(|n| n.m1)).ok_or_else(|| {
            Error::Config("obstacles.b1 is required without a declared nondegeneracy".into())
        })?;
        let b2 = o.b2.or(nd.map(|n| n.m2)).ok_or_else(|| {
            Error::Config("obstacles.b2 is required without a declared nondegeneracy".into())
        })?;
        let defaults = ObstacleConfig::with_defaults(spec, b1, b2)?;
        let cfg = ObstacleConfig::new(spec, b1, b2, o.tau.unwrap_or(defaults.tau), o.r.unwrap_or(defaults.r))?;
        let need = 4.0 * b1.abs().max(b2.abs());
        if self.grid.half_width < need {
            return Err(Error::Config(format!(
                "grid.R = {} must be at least 4 max(|b1|, |b2|) = {need}",
                self.grid.half_width
            )));
        }
        Ok(cfg)
    }

    pub fn solver(&self) -> Result<SolverConfig> {
        let s = &self.solver;
        let cfg = SolverConfig {
            max_iters: s.max_iters,
            grad_tol: s.grad_tol,
            step_rule: match s.fixed_step {
                Some(a) => StepRule::FixedStep(a),
                None => StepRule::BacktrackingArmijo {
                    c1: s.armijo_c1,
                    shrink: s.armijo_shrink,
                },
            },
            energy_decrease_min: s.energy_decrease_min,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_homogeneous_model() {
        let cfg = RunConfig::parse("[obstacles]\nb1 = -10.0\nb2 = 10.0\n").unwrap();
        assert_eq!(cfg.problem().unwrap(), ProblemSpec::peierls_nabarro());
        assert_eq!(cfg.grid().unwrap().n, 8001);
        assert_eq!(cfg.obstacles(&cfg.problem().unwrap()).unwrap().r, 0.5);
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = RunConfig::parse("[grid]\nR = 100.0\nn = \"many\"\n").unwrap_err();
        match err {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (3, 5)),
            other => panic!("{other}"),
        }
        assert!(matches!(RunConfig::parse("[grid]\nwidth = 3\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn periodic_defaults_obstacles_to_maxima() {
        let cfg = RunConfig::parse(
            "[modulation]\nform = \"periodic\"\neps = 0.5\ndelta = 0.5\n[obstacles]\nb1 = -12.566370614359172\n",
        )
        .unwrap();
        let spec = cfg.problem().unwrap();
        let o = cfg.obstacles(&spec).unwrap();
        assert!((o.b2 - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn digest_tracks_content() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        assert_eq!(a.digest(), b.digest());
        b.solver.max_iters = 5;
        assert_ne!(a.digest(), b.digest());
    }
}
