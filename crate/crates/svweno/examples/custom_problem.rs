//! Driving the solver directly, without the preset harness: a square pulse
//! advected through a periodic domain, limiter on.

use svweno::limiter::LimiterParams;
use svweno::mesh::{build_grid_1d, gauss_rule};
use svweno::physics::Model;
use svweno::solver::{Boundary, Solver1D, SolverParams};

fn main() -> svweno::Result<()> {
    let grid = build_grid_1d(0.0, 1.0, 60, 4)?;
    let model = Model::Advection1D { speed: 1.0 };
    let params = SolverParams {
        limiter: LimiterParams {
            tvb_m: 1.0,
            ..Default::default()
        },
        ..Default::default()
    };
    let mut solver = Solver1D::new(
        grid.clone(),
        model,
        [Boundary::Periodic, Boundary::Periodic],
        params,
    )?;

    // CV averages of a square pulse
    let rule = gauss_rule(6)?;
    let pulse = |x: f64| if (0.25..0.5).contains(&x) { 1.0 } else { 0.0 };
    let u0: Vec<f64> = (0..grid.n_cv())
        .map(|cv| {
            rule.integrate(grid.cv_edges[cv], grid.cv_edges[cv + 1], pulse) / grid.cv_widths[cv]
        })
        .collect();

    // one full period: the pulse returns to its starting position
    let (field, log) = solver.advance(&u0, 0.0, 1.0, false)?;
    let overshoot = field
        .data
        .iter()
        .map(|v| (v.max(1.0) - 1.0).max(-v.min(0.0)))
        .fold(0.0f64, f64::max);
    let l1: f64 = field
        .data
        .iter()
        .zip(&u0)
        .map(|(a, b)| (a - b).abs() * grid.cv_widths[0])
        .sum();
    println!(
        "square pulse after one period: {} steps, overshoot beyond [0,1] = {:.3e}, l1 drift = {:.3e}",
        log.steps.len(),
        overshoot,
        l1
    );
    println!(
        "mean troubled percentage of CVs: {:.2}%",
        log.mean_percent()
    );
    Ok(())
}
