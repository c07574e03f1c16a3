use nlhet::discretize::Grid;
use nlhet::model::ProblemSpec;
use nlhet::obstacles::{build_obstacles_on, check_clauses, BandPolicy, ObstacleConfig};

fn main() -> nlhet::Result<()> {
    let spec = ProblemSpec::peierls_nabarro();
    let grid = Grid::with_spacing(60.0, 0.1)?;
    let cfg = ObstacleConfig::with_defaults(&spec, -10.0, 10.0)?;
    println!("b = ({}, {}), tau {}, r {}, C0 {:.4}", cfg.b1, cfg.b2, cfg.tau, cfg.r, cfg.c0_rhs);
    for eta in [1e-1, 1e-2, 0.0] {
        let pair = build_obstacles_on(&spec, grid, &cfg, eta, BandPolicy::Relaxed)?;
        let mid = grid.nearest(0.0);
        println!(
            "eta {eta:<6} barriers at 0: phi {:.4} psi {:.4}; envelopes at 0: [{:.4}, {:.4}]; relaxed clauses {}; violations {}",
            pair.phi.values[mid],
            pair.psi.values[mid],
            pair.lower.values[mid],
            pair.upper.values[mid],
            pair.relaxed.len(),
            check_clauses(&spec, &pair, &cfg).len()
        );
    }
    Ok(())
}
