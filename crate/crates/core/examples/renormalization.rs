use std::f64::consts::PI;

use nlhet::discretize::{seminorm_sq, Grid, Interval};
use nlhet::energy::EnergyModel;
use nlhet::model::ProblemSpec;
use nlhet::obstacles::ObstacleConfig;
use nlhet::solver::{continuation_run, ContinuationSchedule, SolverConfig};

fn main() -> nlhet::Result<()> {
    let spec = ProblemSpec::peierls_nabarro();
    let unit = 2.0 / PI * (2.0 * PI) * (2.0 * PI);
    let mut prev: Option<(f64, f64)> = None;
    for r in [50.0, 100.0, 200.0, 400.0] {
        let grid = Grid::with_spacing(r, 0.1)?;
        let cfg = ObstacleConfig::with_defaults(&spec, -10.0, 10.0)?;
        let res = continuation_run(&spec, grid, &cfg, &ContinuationSchedule::default(), &SolverConfig::default())?;
        let model = EnergyModel::new(&spec, grid)?;
        let win = Interval::new(-r, r + 0.5 * grid.h);
        let raw = seminorm_sq(model.kernel_weights(), &res.profile, &win, &win) / unit;
        let e = res.breakdown.interaction;
        match prev {
            Some((raw0, e0)) => println!(
                "R {r:>5}: raw/unit {raw:.4} (slope {:.3})  interaction {e:.6} (change {:.2e})",
                (raw - raw0) / 2f64.ln(),
                ((e - e0) / e).abs()
            ),
            None => println!("R {r:>5}: raw/unit {raw:.4}  interaction {e:.6}"),
        }
        prev = Some((raw, e));
    }
    Ok(())
}
