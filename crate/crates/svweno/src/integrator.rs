//! Explicit Runge-Kutta stepping in the α/β form
//!
//!   u^(i) = Σ_{l<i} ( α_{i,l} u^(l) + β_{i,l} Δt L(u^(l)) ),  i = 1..stages,
//!
//! with the coefficient rows of orders 2..5 stored verbatim. The final state
//! is the last computed stage.

use crate::error::{Result, SvError};

#[derive(Debug, Clone, PartialEq)]
pub struct RkTableau {
    pub order: usize,
    pub stages: usize,
    /// alpha[i-1][l], lower-triangular rows, each summing to 1.
    pub alpha: Vec<Vec<f64>>,
    /// beta[i-1][l].
    pub beta: Vec<Vec<f64>>,
    /// Effective stage times c_l (in Δt units) at which L(u^(l)) is sampled;
    /// c_0 = 0. Time-dependent boundary data is evaluated at t + c_l Δt.
    pub stage_times: Vec<f64>,
}

/// Coefficient rows for the k-th order scheme.
pub fn tableau(order: usize) -> Result<RkTableau> {
    let (alpha, beta): (Vec<Vec<f64>>, Vec<Vec<f64>>) = match order {
        2 => (
            vec![vec![1.0], vec![0.5, 0.5]],
            vec![vec![1.0], vec![0.0, 0.5]],
        ),
        3 => (
            vec![
                vec![1.0],
                vec![0.75, 0.25],
                vec![1.0 / 3.0, 0.0, 2.0 / 3.0],
            ],
            vec![
                vec![1.0],
                vec![0.0, 0.25],
                vec![0.0, 0.0, 2.0 / 3.0],
            ],
        ),
        4 => (
            vec![
                vec![1.0],
                vec![1.0, 0.0],
                vec![1.0, 0.0, 0.0],
                vec![-1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0],
            ],
            vec![
                vec![0.5],
                vec![0.0, 0.5],
                vec![0.0, 0.0, 1.0],
                vec![0.0, 0.0, 0.0, 1.0 / 6.0],
            ],
        ),
        5 => (
            vec![
                vec![1.0],
                vec![1.0, 0.0],
                vec![1.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0, 0.0, 0.0],
            ],
            vec![
                vec![0.2],
                vec![0.0, 0.25],
                vec![0.0, 0.0, 1.0 / 3.0],
                vec![0.0, 0.0, 0.0, 0.5],
                vec![0.0, 0.0, 0.0, 0.0, 1.0],
            ],
        ),
        _ => return Err(SvError::UnsupportedOrder(order)),
    };
    let stages = alpha.len();
    let mut stage_times = vec![0.0; stages + 1];
    for i in 1..=stages {
        let mut c = 0.0;
        for l in 0..i {
            c += alpha[i - 1][l] * stage_times[l] + beta[i - 1][l];
        }
        stage_times[i] = c;
    }
    stage_times.truncate(stages); // c of the final combination is 1 by construction
    Ok(RkTableau {
        order,
        stages,
        alpha,
        beta,
        stage_times,
    })
}

/// One RK step on a flat state vector. `residual(l, u_l, out)` evaluates
/// L(u^(l)); it is called at most once per stage solution. Any NaN in a
/// stage aborts with the stage index.
pub fn rk_step(
    tab: &RkTableau,
    u: &mut Vec<f64>,
    dt: f64,
    mut residual: impl FnMut(usize, &[f64], &mut [f64]) -> Result<()>,
) -> Result<()> {
    let n = u.len();
    let mut stages: Vec<Vec<f64>> = Vec::with_capacity(tab.stages + 1);
    stages.push(std::mem::take(u));
    let mut residuals: Vec<Option<Vec<f64>>> = vec![None; tab.stages];

    for i in 1..=tab.stages {
        let mut next = vec![0.0; n];
        for l in 0..i {
            let a = tab.alpha[i - 1][l];
            let b = tab.beta[i - 1][l];
            if a != 0.0 {
                let src = &stages[l];
                for (x, s) in next.iter_mut().zip(src) {
                    *x += a * s;
                }
            }
            if b != 0.0 {
                if residuals[l].is_none() {
                    let mut r = vec![0.0; n];
                    residual(l, &stages[l], &mut r)?;
                    residuals[l] = Some(r);
                }
                let src = residuals[l].as_ref().unwrap();
                let bd = b * dt;
                for (x, s) in next.iter_mut().zip(src) {
                    *x += bd * s;
                }
            }
        }
        if next.iter().any(|v| v.is_nan()) {
            return Err(SvError::Aborted {
                step: 0,
                stage: i,
                t: f64::NAN,
                reason: "NaN in stage combination".into(),
                last_good: stages.swap_remove(0),
            });
        }
        stages.push(next);
    }
    *u = stages.pop().unwrap();
    Ok(())
}

/// Clip the step to land exactly on `t_final`; reports whether it clipped.
pub fn clip_dt(dt: f64, t: f64, t_final: f64) -> (f64, bool) {
    let remaining = t_final - t;
    if dt >= remaining {
        (remaining, true)
    } else {
        (dt, false)
    }
}
