use std::time::Instant;

use nlhet::diagnostics::fit_shift;
use nlhet::discretize::Grid;
use nlhet::model::ProblemSpec;
use nlhet::obstacles::ObstacleConfig;
use nlhet::solver::{continuation_run, ContinuationSchedule, SolverConfig};

fn main() -> nlhet::Result<()> {
    env_logger::init();
    let spec = ProblemSpec::peierls_nabarro();
    let grid = Grid::with_spacing(200.0, 0.05)?;
    let cfg = ObstacleConfig::with_defaults(&spec, -10.0, 10.0)?;
    let t = Instant::now();
    let res = continuation_run(&spec, grid, &cfg, &ContinuationSchedule::default(), &SolverConfig::default())?;
    println!("solved in {:.1?}", t.elapsed());
    for r in &res.trace {
        println!(
            "{:>3}  eta {:<8.0e} mu {:<8.0e} iters {:>6}  E {:>12.6}  residual {:.2e}  contacts {}",
            r.stage.index, r.stage.eta, r.stage.mu, r.iterations, r.energy.total, r.residual_max, r.contact_count
        );
    }
    let (c, dist) = fit_shift(&res.profile, |x| spec.explicit_layer(x).unwrap(), 5.0);
    println!("shift {c:.4}  sup distance {dist:.4}  residual {:.3e}", res.residual_max);
    Ok(())
}
