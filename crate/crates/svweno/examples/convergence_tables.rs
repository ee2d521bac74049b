//! Error/convergence tables for the smooth benchmarks, in the layout of the
//! published experiment tables: orders 2..5 over N = 5..100, with the
//! troubled-cell percentage column.
//!
//! Usage: `cargo run --release --example convergence_tables [sin1d|eulersin1d] [M]`

use svweno::harness::{self, run_convergence_study};

fn main() -> svweno::Result<()> {
    let preset = std::env::args().nth(1).unwrap_or_else(|| "sin1d".into());
    let m: f64 = std::env::args()
        .nth(2)
        .map(|s| s.parse().expect("M must be a number"))
        .unwrap_or(0.01);
    let n_list = [5, 10, 20, 40, 60, 80, 100];
    for order in 2..=5 {
        let mut cfg = harness::preset(&preset)?;
        cfg.order = order;
        cfg.tvb_m = m;
        let report = run_convergence_study(&cfg, &n_list)?;
        let mut text = Vec::new();
        report.write_text(&mut text)?;
        println!("{}", String::from_utf8_lossy(&text));
    }
    Ok(())
}
