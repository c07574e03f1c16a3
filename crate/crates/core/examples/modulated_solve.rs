use std::f64::consts::PI;

use nlhet::discretize::Grid;
use nlhet::energy::EnergyModel;
use nlhet::model::{ModulationSpec, ProblemSpec};
use nlhet::obstacles::ObstacleConfig;
use nlhet::solver::{continuation_run, verify_apriori_bounds, ContinuationSchedule, SolverConfig};

fn main() -> nlhet::Result<()> {
    let spec = ProblemSpec {
        modulation: ModulationSpec::periodic(0.5, 0.5),
        ..ProblemSpec::peierls_nabarro()
    };
    let grid = Grid::with_spacing(100.0, 0.05)?;
    let cfg = ObstacleConfig::with_defaults(&spec, -4.0 * PI, 4.0 * PI)?;
    let res = continuation_run(&spec, grid, &cfg, &ContinuationSchedule::default(), &SolverConfig::default())?;
    let limit = res.limit.as_ref().unwrap();
    println!(
        "energy {:.6}  residual {:.2e}  contacts {}  limits {}/{}",
        res.breakdown.total,
        res.residual_max,
        res.contact.count(),
        limit.left.passed,
        limit.right.passed
    );
    let mid = grid.nearest(0.0);
    let crossing = (0..grid.n).find(|&i| res.profile.values[i] >= PI).unwrap();
    println!("Q(0) = {:.4}, crosses pi at x = {:.3}", res.profile.values[mid], grid.x(crossing));

    let model = EnergyModel::new(&spec, grid)?;
    let rep = verify_apriori_bounds(&model, &res, 0.0, 0.0)?;
    for e in &rep.entries {
        println!("{:<12} {:>12.5e}", e.name, e.value);
    }
    Ok(())
}
