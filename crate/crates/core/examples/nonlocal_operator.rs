use nlhet::discretize::{Grid, NonlocalOperator, Profile, TailClosure};
use nlhet::model::KernelSpec;

fn main() -> nlhet::Result<()> {
    let kernel = KernelSpec::fractional_laplacian(0.5);
    for h in [0.2, 0.1, 0.05, 0.025] {
        let grid = Grid::with_spacing(100.0, h)?;
        let op = NonlocalOperator::new(grid, &kernel, TailClosure::for_kernel(&kernel))?;
        let q = Profile::sample(grid, |x| std::f64::consts::PI + 2.0 * x.atan(), 0.0, std::f64::consts::TAU);
        let lq = op.apply_profile(&q);
        let err = (grid.nearest(-3.0)..=grid.nearest(3.0))
            .map(|i| {
                let x = grid.x(i);
                (lq[i] - 2.0 * x / (1.0 + x * x)).abs()
            })
            .fold(0.0, f64::max);
        println!("h {h:<6} max error against 2x/(1+x^2) on |x| <= 3: {err:.3e}");
    }
    Ok(())
}
