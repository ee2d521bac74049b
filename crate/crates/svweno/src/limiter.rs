//! Troubled-cell detection (TVB minmod) and the CV-wise simplified WENO
//! limiting operator.
//!
//! A flagged CV gets a new polynomial
//!
//!   p_new = ω₀ p̃⁰ + Σ_l ω_l p^l,   p̃⁰ = (p⁰ - Σ_l γ_l p^l)/γ₀,
//!
//! where p⁰ is the constrained least-squares polynomial on the large stencil,
//! the p^l are linear candidates from the immediate neighbors, and the
//! nonlinear weights ω are built from smoothness indicators
//! β_l = Σ_q ∫ h^{2q-1} (∂^q p/∂x^q)² dx (which collapse to h-free quadratic
//! forms in the CV frame). All weights sum to one and every ingredient has
//! the target CV average, so limiting never changes ū.

use crate::reconstruction::{LimiterOps1D, LimiterOps2D};
use serde::{Deserialize, Serialize};

/// Classical minmod: the smallest-magnitude argument when all share a sign,
/// zero otherwise. Zero arguments count as sign-incompatible.
#[inline]
pub fn minmod(a: f64, b: f64, c: f64) -> f64 {
    if a > 0.0 && b > 0.0 && c > 0.0 {
        a.min(b).min(c)
    } else if a < 0.0 && b < 0.0 && c < 0.0 {
        a.max(b).max(c)
    } else {
        0.0
    }
}

/// TVB-modified minmod: returns `a1` untouched when |a1| ≤ M h², otherwise
/// minmod(a1, a2, a3). The flag reports whether the minmod branch changed
/// the value; detection keys on that flag rather than on a floating-point
/// comparison of independently computed quantities.
#[inline]
pub fn modified_minmod(a1: f64, a2: f64, a3: f64, tvb_m: f64, h: f64) -> (f64, bool) {
    if a1.abs() <= tvb_m * h * h {
        (a1, false)
    } else {
        let v = minmod(a1, a2, a3);
        (v, v != a1)
    }
}

/// TVB detector for one component of one CV: the CV is troubled if either
/// one-sided interface increment is altered by the modified minmod.
#[inline]
pub fn cv_is_troubled(
    delta_plus: f64,
    delta_minus: f64,
    fwd_avg_diff: f64,
    bwd_avg_diff: f64,
    tvb_m: f64,
    h: f64,
) -> bool {
    modified_minmod(delta_plus, fwd_avg_diff, bwd_avg_diff, tvb_m, h).1
        || modified_minmod(delta_minus, fwd_avg_diff, bwd_avg_diff, tvb_m, h).1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LimiterMode {
    /// Detect with TVB minmod, limit flagged CVs only.
    CvSweno,
    /// Limit every CV.
    Full,
    /// No detection, no limiting (SV faces still use the Riemann flux).
    Off,
}

/// All tunables of the detection/limiting stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimiterParams {
    /// TVB constant M in the |a1| ≤ M h² threshold.
    pub tvb_m: f64,
    /// Regularizer ε in ω̃ = γ(1 + τ/(β+ε)).
    pub epsilon: f64,
    /// Linear weights, 1D: (γ0, γ1, γ2).
    pub gamma_1d: [f64; 3],
    /// Linear weights, 2D: (γ0, ..., γ4).
    pub gamma_2d: [f64; 5],
    pub mode: LimiterMode,
    /// Limit systems in local characteristic variables.
    pub characteristic: bool,
    /// Sensitivity knob: detect/limit only on the first stage of each step
    /// instead of on every stage solution.
    pub once_per_step: bool,
}

impl Default for LimiterParams {
    fn default() -> Self {
        LimiterParams {
            tvb_m: 0.01,
            epsilon: 1e-6,
            gamma_1d: [0.8, 0.1, 0.1],
            gamma_2d: [0.8, 0.05, 0.05, 0.05, 0.05],
            mode: LimiterMode::CvSweno,
            characteristic: true,
            once_per_step: false,
        }
    }
}

impl LimiterParams {
    pub fn validate(&self) -> crate::Result<()> {
        let check = |g: &[f64]| -> bool {
            g.iter().all(|&x| x > 0.0) && (g.iter().sum::<f64>() - 1.0).abs() <= 1e-15
        };
        if !check(&self.gamma_1d) || !check(&self.gamma_2d) {
            return Err(crate::SvError::InvalidConfig(
                "linear weights must be positive and sum to 1".into(),
            ));
        }
        if !(self.epsilon > 0.0) {
            return Err(crate::SvError::InvalidConfig("epsilon must be positive".into()));
        }
        if self.tvb_m < 0.0 {
            return Err(crate::SvError::InvalidConfig("TVB constant must be >= 0".into()));
        }
        Ok(())
    }
}

/// Nonlinear weights from smoothness indicators. τ = 0 short-circuits to the
/// linear weights; an unbounded ω̃ (β + ε = 0 with ε = 0) concentrates the
/// weight on the offending candidates in the limit sense.
fn nonlinear_weights(gammas: &[f64], betas: &[f64], tau: f64, eps: f64, omega: &mut [f64]) {
    let n = gammas.len();
    if tau == 0.0 {
        omega[..n].copy_from_slice(gammas);
        return;
    }
    let mut total = 0.0;
    let mut any_inf = false;
    for l in 0..n {
        let w = gammas[l] * (1.0 + tau / (betas[l] + eps));
        omega[l] = w;
        if w.is_infinite() {
            any_inf = true;
        }
        total += w;
    }
    if any_inf {
        let mut total = 0.0;
        for l in 0..n {
            omega[l] = if omega[l].is_infinite() { gammas[l] } else { 0.0 };
            total += omega[l];
        }
        for w in omega[..n].iter_mut() {
            *w /= total;
        }
        return;
    }
    for w in omega[..n].iter_mut() {
        *w /= total;
    }
}

/// 1D SWENO blend for one scalar component.
///
/// `stencil` holds the 2s+1 CV averages ordered left to right; `m` is the
/// target's position inside its SV. Writes the k CV-frame coefficients of
/// the limited polynomial.
pub fn sweno_limit_1d(
    ops: &LimiterOps1D,
    m: usize,
    stencil: &[f64],
    gammas: &[f64; 3],
    eps: f64,
    out: &mut [f64],
) {
    let k = ops.k;
    let s = ops.s;
    let u_c = stencil[s];
    let mut p0 = [0.0; 8];
    ops.p0(m, stencil, &mut p0[..k]);
    let (b1, b2) = ops.candidate_slopes(m, stencil[s - 1], u_c, stencil[s + 1]);

    // p̃0 = (p0 - γ1 p1 - γ2 p2)/γ0 with p_l = u_c + b_l ζ
    let mut tp0 = [0.0; 8];
    for a in 0..k {
        tp0[a] = p0[a] / gammas[0];
    }
    tp0[0] -= (gammas[1] + gammas[2]) * u_c / gammas[0];
    tp0[1] -= (gammas[1] * b1 + gammas[2] * b2) / gammas[0];

    let mut cand = [[0.0; 8]; 2];
    cand[0][0] = u_c;
    cand[0][1] = b1;
    cand[1][0] = u_c;
    cand[1][1] = b2;

    // linear candidates: β = slope² in the CV frame
    let betas = [ops.beta(&tp0[..k]), b1 * b1, b2 * b2];
    let tau = (0.5 * ((betas[0] - betas[1]).abs() + (betas[0] - betas[2]).abs())).powi(2);
    let mut omega = [0.0; 3];
    nonlinear_weights(gammas, &betas, tau, eps, &mut omega);

    for a in 0..k {
        out[a] = omega[0] * tp0[a] + omega[1] * cand[0][a] + omega[2] * cand[1][a];
    }
}

/// 2D SWENO blend for one scalar component.
///
/// `stencil` holds the (2s+1)² box averages, x fastest; (m, n) is the
/// target's position inside its SV. Writes k² CV-frame coefficients.
pub fn sweno_limit_2d(
    ops: &LimiterOps2D,
    m: usize,
    n: usize,
    stencil: &[f64],
    gammas: &[f64; 5],
    eps: f64,
    out: &mut [f64],
) {
    let k = ops.k;
    let d = k * k;
    let s = ops.s;
    let w = 2 * s + 1;
    let u_c = stencil[s * w + s];
    let u_w = stencil[s * w + s - 1];
    let u_e = stencil[s * w + s + 1];
    let u_s = stencil[(s - 1) * w + s];
    let u_n = stencil[(s + 1) * w + s];

    let mut p0 = [0.0; 32];
    ops.p0(m, n, stencil, &mut p0[..d]);

    let bx_w = (u_w - u_c) / ops.mid_x[m].0;
    let bx_e = (u_e - u_c) / ops.mid_x[m].1;
    let by_s = (u_s - u_c) / ops.mid_y[n].0;
    let by_n = (u_n - u_c) / ops.mid_y[n].1;
    // planes on T1={W,C,S}, T2={C,E,S}, T3={W,C,N}, T4={C,E,N}
    let planes = [
        (bx_w, by_s),
        (bx_e, by_s),
        (bx_w, by_n),
        (bx_e, by_n),
    ];

    let ix = k; // coefficient index of ζx
    let iy = 1; // coefficient index of ζy

    let mut tp0 = [0.0; 32];
    for a in 0..d {
        tp0[a] = p0[a] / gammas[0];
    }
    let mut g_sum = 0.0;
    let mut g_bx = 0.0;
    let mut g_by = 0.0;
    for l in 0..4 {
        g_sum += gammas[l + 1];
        g_bx += gammas[l + 1] * planes[l].0;
        g_by += gammas[l + 1] * planes[l].1;
    }
    tp0[0] -= g_sum * u_c / gammas[0];
    tp0[ix] -= g_bx / gammas[0];
    tp0[iy] -= g_by / gammas[0];

    let mut betas = [0.0; 5];
    betas[0] = ops.beta(&tp0[..d]);
    // for a plane the indicator collapses to bx² + by² in the CV frame
    for l in 0..4 {
        betas[l + 1] = planes[l].0 * planes[l].0 + planes[l].1 * planes[l].1;
    }
    let tau = (0.25
        * ((betas[0] - betas[1]).abs()
            + (betas[0] - betas[2]).abs()
            + (betas[0] - betas[3]).abs()
            + (betas[0] - betas[4]).abs()))
    .powi(2);
    let mut omega = [0.0; 5];
    nonlinear_weights(gammas, &betas, tau, eps, &mut omega);

    for a in 0..d {
        out[a] = omega[0] * tp0[a];
    }
    for l in 0..4 {
        out[0] += omega[l + 1] * u_c;
        out[ix] += omega[l + 1] * planes[l].0;
        out[iy] += omega[l + 1] * planes[l].1;
    }
}
