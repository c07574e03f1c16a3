use nlhet::diagnostics::{
    find_clean_intervals, fit_tail_decay, glue_profile, glue_width, gluing_energy_defect, holder_estimate,
    stickiness_check, Side, StickinessParams,
};
use nlhet::discretize::{Grid, Interval};
use nlhet::energy::EnergyModel;
use nlhet::model::ProblemSpec;
use nlhet::obstacles::ObstacleConfig;
use nlhet::solver::{continuation_run, ContinuationSchedule, SolverConfig};

fn main() -> nlhet::Result<()> {
    let spec = ProblemSpec::peierls_nabarro();
    let grid = Grid::with_spacing(200.0, 0.05)?;
    let cfg = ObstacleConfig::with_defaults(&spec, -10.0, 10.0)?;
    let res = continuation_run(&spec, grid, &cfg, &ContinuationSchedule::default(), &SolverConfig::default())?;
    let q = &res.profile;
    let model = EnergyModel::new(&spec, grid)?;
    let wells = [spec.potential.zeta1, spec.potential.zeta2];

    for rho in [0.05, 0.02] {
        let rep = find_clean_intervals(q, rho, &Interval::new(-200.0, 200.0), &wells)?;
        for iv in &rep.intervals {
            let (a, b) = iv.clean_point_range(rep.min_len);
            let st = stickiness_check(&model, q, a, b, 0.0, 0.0, &StickinessParams::new(rho, cfg.r))?;
            println!(
                "rho {rho}: clean [{:.1}, {:.1}] at {:.4}; pair ({a:.1}, {b:.1}) energy {:.3e} sup dev {:.3e} pass {}",
                iv.lo, iv.hi, iv.well, st.localized_energy, st.sup_dev, st.pass
            );
        }
    }

    for side in [Side::Left, Side::Right] {
        let fit = fit_tail_decay(q, side)?;
        println!("{side:?} tail exponent {:.4} (r^2 {:.4})", fit.fitted_exponent, fit.r_squared);
    }
    println!("holder 1/2 on [-1, 1]: {:.4}", holder_estimate(q, &Interval::new(-1.0, 1.0), 0.5)?);

    let x0 = 120.0;
    let beta = glue_width(0.02).max(1.0);
    let glued = glue_profile(q, x0, spec.potential.zeta2, beta)?;
    let d = gluing_energy_defect(&model, q, &glued, x0, beta, x0 - 10.0, x0 + 10.0)?;
    println!("gluing at {x0}: defect {:.3e}", d.defect);
    Ok(())
}
