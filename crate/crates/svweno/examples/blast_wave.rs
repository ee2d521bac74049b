//! Woodward-Colella blast waves: the 400-SV production run compared with a
//! fine-grid reference (800 SVs at 5th order) projected onto the coarse CVs.
//!
//! Usage: `cargo run --release --example blast_wave [ORDER] [M]`

use svweno::harness::{self, component, error_norms, project_piecewise_constant, RunOutput};

fn main() -> svweno::Result<()> {
    let order: usize = std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(3);
    let m: f64 = std::env::args().nth(2).map(|s| s.parse().unwrap()).unwrap_or(0.01);

    let mut cfg = harness::preset("blast1d")?;
    cfg.order = order;
    cfg.tvb_m = m;
    println!("blast waves, k={order}, N=400, M={m} ...");
    let RunOutput::OneD(run) = harness::run(&cfg, false)? else {
        unreachable!()
    };

    println!("reference: k=5, N=800, M=0.01 ...");
    let mut fine_cfg = harness::preset("blast1d")?;
    fine_cfg.order = 5;
    fine_cfg.n_sv = 800;
    let RunOutput::OneD(fine) = harness::run(&fine_cfg, false)? else {
        unreachable!()
    };

    let rho = component(&run.field.data, 3, 0);
    let rho_fine = component(&fine.field.data, 3, 0);
    let reference = project_piecewise_constant(&fine.grid.cv_edges, &rho_fine, &run.grid.cv_edges);
    let norms = error_norms(&rho, &reference)?;
    let peak = rho.iter().cloned().fold(f64::MIN, f64::max);
    let peak_ref = reference.iter().cloned().fold(f64::MIN, f64::max);
    println!(
        "density: peak {:.4} (reference {:.4}), l1 distance to reference {:.3e}",
        peak, peak_ref, norms.l1
    );
    println!(
        "{} steps; fail-safe trace fallbacks over the run: {}",
        run.log.steps.len(),
        run.log.steps.iter().map(|s| s.trace_fallbacks).sum::<u64>()
    );
    Ok(())
}
