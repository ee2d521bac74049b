//! Double Mach reflection with the moving-shock boundary conditions.
//! Defaults to a reduced 240x60 grid; the published resolution is 960x240.
//!
//! Usage: `cargo run --release --example double_mach [NX] [NY] [M] [OUT_DIR]`

use svweno::harness::{self, output, RunOutput};

fn main() -> svweno::Result<()> {
    let nx: usize = std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(240);
    let ny: usize = std::env::args().nth(2).map(|s| s.parse().unwrap()).unwrap_or(60);
    let m: f64 = std::env::args().nth(3).map(|s| s.parse().unwrap()).unwrap_or(100.0);
    let out_dir = std::env::args().nth(4).unwrap_or_else(|| "double_mach_out".into());

    let mut cfg = harness::preset("doublemach")?;
    cfg.n_sv = nx;
    cfg.n_sv_y = Some(ny);
    cfg.tvb_m = m;
    println!("double Mach reflection on {nx}x{ny} SVs (k=3, M={m}), t -> 0.2 ...");
    let out = harness::run(&cfg, false)?;
    let RunOutput::TwoD(r) = out else {
        unreachable!("2D preset")
    };
    let ncomp = r.field.n_comp;
    let (min_rho, max_rho) = r
        .field
        .data
        .chunks(ncomp)
        .map(|s| s[0])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    println!(
        "done: {} steps, density range [{:.3}, {:.3}]",
        r.log.steps.len(),
        min_rho,
        max_rho
    );
    let dir = std::path::PathBuf::from(out_dir);
    std::fs::create_dir_all(&dir)?;
    output::write_density_matrix(&dir.join("density.dat"), &r.grid, &r.field)?;
    output::write_field_2d(&dir.join("field.dat"), &r.grid, &r.model, &r.field)?;
    println!("wrote density.dat and field.dat to {}", dir.display());
    Ok(())
}
