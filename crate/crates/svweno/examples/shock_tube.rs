//! Sod and Lax shock tubes against the exact Riemann solution.
//!
//! Usage: `cargo run --release --example shock_tube [sod1d|lax1d] [OUT_DIR]`

use svweno::harness::{self, output, RunOutput};

fn main() -> svweno::Result<()> {
    let preset = std::env::args().nth(1).unwrap_or_else(|| "sod1d".into());
    let out_dir = std::env::args().nth(2);

    let mut cfg = harness::preset(&preset)?;
    cfg.order = 3;
    cfg.n_sv = 100;
    cfg.tvb_m = 10.0;
    let out = harness::run(&cfg, true)?;
    let RunOutput::OneD(r) = out else {
        unreachable!("shock tubes are 1D")
    };
    println!(
        "{preset}: t = {:.3}, {} steps, troubled {:.2}% of CVs on the final step",
        r.field.t,
        r.log.steps.len(),
        r.log.final_step_percent()
    );
    let n = r.norms.expect("shock tubes carry an exact solution");
    println!(
        "density error vs exact Riemann solution: l1 = {:.3e}, l2 = {:.3e}, linf = {:.3e}",
        n.l1, n.l2, n.linf
    );
    if let Some(dir) = out_dir {
        let dir = std::path::PathBuf::from(dir);
        std::fs::create_dir_all(&dir)?;
        output::write_solution_1d(
            &dir.join("solution.csv"),
            &r.grid,
            &r.model,
            &r.field,
            r.exact.as_deref(),
        )?;
        output::write_troubled_csv(&dir.join("troubled.csv"), &r.log)?;
        println!("wrote solution.csv and troubled.csv to {}", dir.display());
    }
    Ok(())
}
