use nlhet::appendix_bench::{
    bump_scaling, superposition_seminorm, superposition_tail_witness, trace_norms, trace_scaling, BumpFamily,
    TraceExample,
};

fn main() -> nlhet::Result<()> {
    let ks: Vec<u32> = (0..=12).collect();
    for s in [0.3, 0.4] {
        let fam = BumpFamily::new(s)?;
        let coarse = bump_scaling(&fam, &ks, 0.03)?;
        let fine = bump_scaling(&fam.with_cells(2 * fam.cells), &ks, 0.03)?;
        print!("{}", coarse.to_csv());
        println!("s = {s}: worst {:.2e}, drift under refinement {:.2e}", coarse.worst, coarse.ratio_drift(&fine));
        let (whole, parts) = superposition_seminorm(&fam.with_cells(100), &[1, 2, 3])?;
        println!("superposition seminorm {whole:.6} <= sum of members {parts:.6}");
    }
    let w = superposition_tail_witness(&(5..=20).collect::<Vec<_>>());
    println!("at centers {}, at midpoints {}", w.limsup_est, w.liminf_est);

    let ex = TraceExample::default();
    let tr = trace_scaling(&ex, &[0, 1, 2, 3, 4], 0.05)?;
    let fine = trace_scaling(&ex.refined(2), &[0, 1, 2, 3, 4], 0.05)?;
    print!("{}", tr.to_csv());
    println!("trace: worst {:.2e}, drift {:.2e}", tr.worst, tr.ratio_drift(&fine));
    let a = trace_norms(&ex, 0)?.seminorm;
    let b = trace_norms(&ex.refined(4), 0)?.seminorm;
    println!("spike seminorm {a:.6} -> {b:.6} under 4x refinement");
    Ok(())
}
