//! Two-dimensional Riemann problems at desk scale, writing the density
//! matrix and the troubled-cell log for contour plotting.
//!
//! Usage: `cargo run --release --example riemann_2d [riemann2d1|riemann2d2] [N] [M] [OUT_DIR]`

use svweno::harness::{self, output, RunOutput};

fn main() -> svweno::Result<()> {
    let preset = std::env::args().nth(1).unwrap_or_else(|| "riemann2d1".into());
    let n: usize = std::env::args().nth(2).map(|s| s.parse().unwrap()).unwrap_or(50);
    let m: f64 = std::env::args().nth(3).map(|s| s.parse().unwrap()).unwrap_or(100.0);
    let out_dir = std::env::args().nth(4).unwrap_or_else(|| "riemann2d_out".into());

    let mut cfg = harness::preset(&preset)?;
    cfg.order = 3;
    cfg.n_sv = n;
    cfg.n_sv_y = Some(n);
    cfg.tvb_m = m;
    println!("{preset} on {n}x{n} SVs, k=3, M={m} ...");
    let out = harness::run(&cfg, true)?;
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
        "done: t = {:.3}, {} steps, density in [{:.4}, {:.4}], mean troubled {:.2}%",
        r.field.t,
        r.log.steps.len(),
        min_rho,
        max_rho,
        r.log.mean_percent()
    );
    let dir = std::path::PathBuf::from(out_dir);
    std::fs::create_dir_all(&dir)?;
    output::write_field_2d(&dir.join("field.dat"), &r.grid, &r.model, &r.field)?;
    output::write_density_matrix(&dir.join("density.dat"), &r.grid, &r.field)?;
    output::write_troubled_csv(&dir.join("troubled.csv"), &r.log)?;
    println!("wrote field.dat, density.dat, troubled.csv to {}", dir.display());
    Ok(())
}
