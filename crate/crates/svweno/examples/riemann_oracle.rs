//! Sampling the exact Riemann solver: star-state values and a profile CSV.
//!
//! Usage: `cargo run --example riemann_oracle [OUT.csv]`

use std::io::Write;
use svweno::harness::exact_riemann::{ExactRiemann, PrimState};

fn main() -> svweno::Result<()> {
    let left = PrimState { rho: 1.0, vel: 0.0, p: 1.0 };
    let right = PrimState { rho: 0.125, vel: 0.0, p: 0.1 };
    let solver = ExactRiemann::new(left, right, 1.4)?;
    println!(
        "Sod star state: p* = {:.6}, u* = {:.6}",
        solver.p_star, solver.u_star
    );
    if let Some(path) = std::env::args().nth(1) {
        let mut w = std::io::BufWriter::new(std::fs::File::create(&path)?);
        writeln!(w, "xi,rho,u,p")?;
        for i in 0..=1000 {
            let xi = -2.5 + 5.0 * i as f64 / 1000.0;
            let s = solver.sample(xi);
            writeln!(w, "{xi:.6},{:.9e},{:.9e},{:.9e}", s.rho, s.vel, s.p)?;
        }
        println!("wrote profile to {path}");
    }
    Ok(())
}
