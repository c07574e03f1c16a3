use nlhet::model::{verify_model, ModulationSpec, Nondegeneracy, ProblemSpec};

fn main() {
    for (eps, delta) in [(0.25, 0.25), (0.5, 0.5), (1.0, 1.0)] {
        let spec = ProblemSpec {
            modulation: ModulationSpec::periodic(eps, delta),
            ..ProblemSpec::peierls_nabarro()
        };
        let rep = verify_model(&spec, 10_000);
        let m = rep.get("modulation.nondegenerate").unwrap();
        println!(
            "eps {eps:<4} delta {delta:<4} all pass {}  margin {:.6} (sqrt2 eps = {:.6})",
            rep.all_pass(),
            m.margin,
            std::f64::consts::SQRT_2 * eps
        );
    }

    let mut modulation = ModulationSpec::constant(2.0);
    modulation.nondegeneracy = Some(Nondegeneracy {
        m1: -3.0,
        m2: 3.0,
        omega: 0.5,
        theta: 1.0,
        gamma: 0.25,
    });
    let spec = ProblemSpec {
        modulation,
        ..ProblemSpec::peierls_nabarro()
    };
    let rep = verify_model(&spec, 2000);
    for c in rep.failures() {
        println!("constant a fails {}: {}", c.name, c.description);
    }
}
