//! Polynomial reconstruction: the per-SV solve from CV averages, CV-local
//! restrictions, and the limiter's least-squares / linear-candidate
//! operators.
//!
//! Two local frames are used throughout:
//! - SV frame: ξ = (x - x_sv_center)/h_sv ∈ [-1/2, 1/2];
//! - CV frame: ζ = (x - x_cv_center)/h_cv ∈ [-1/2, 1/2].
//!
//! Both use plain monomial bases. Because all SVs of a uniform grid share
//! the Gauss-Lobatto pattern, every matrix here depends only on the scheme
//! order and the CV position inside its SV, so everything is assembled once
//! per run and applied as small dense mat-vecs in the hot loops.

use crate::error::{Result, SvError};
use crate::mesh::lobatto_pattern;
use nalgebra::DMatrix;

/// Mean of ζ^p over [lo, hi].
#[inline]
fn mean_pow(lo: f64, hi: f64, p: usize) -> f64 {
    (hi.powi(p as i32 + 1) - lo.powi(p as i32 + 1)) / ((p as f64 + 1.0) * (hi - lo))
}

/// Evaluate a 1D polynomial in its local frame by Horner's rule.
#[inline]
pub fn eval_1d(coeffs: &[f64], z: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

/// Evaluate a 2D tensor polynomial c[a*k+b] ξ^a η^b at (zx, zy).
#[inline]
pub fn eval_2d(coeffs: &[f64], k: usize, zx: f64, zy: f64) -> f64 {
    let mut acc = 0.0;
    for a in (0..k).rev() {
        let row = &coeffs[a * k..(a + 1) * k];
        acc = acc * zx + eval_1d(row, zy);
    }
    acc
}

/// Per-order reconstruction tables shared by every SV of a uniform grid.
#[derive(Debug, Clone)]
pub struct BasisSet {
    pub k: usize,
    /// CV edges in the SV frame (k+1 values in [-1/2, 1/2]).
    pub xi_edges: Vec<f64>,
    /// CV widths in the SV frame (sum to 1).
    pub widths: Vec<f64>,
    /// CV centers in the SV frame.
    pub centers: Vec<f64>,
    /// Mean-value matrix, row m: mean of ξ^l over CV m. Row-major k×k.
    pub a_mean: Vec<f64>,
    /// Inverse of `a_mean`.
    pub a_inv: Vec<f64>,
    /// 2-norm condition number of `a_mean`.
    pub condition: f64,
    /// Per-CV change of frame: CV coeffs = restrict[m] · SV coeffs (k×k each).
    pub restrict: Vec<Vec<f64>>,
}

impl BasisSet {
    pub fn new(k: usize) -> Result<Self> {
        if !(crate::mesh::MIN_ORDER..=crate::mesh::MAX_ORDER).contains(&k) {
            return Err(SvError::UnsupportedOrder(k));
        }
        let pat = lobatto_pattern(k);
        let xi_edges: Vec<f64> = pat.iter().map(|e| e - 0.5).collect();
        let widths: Vec<f64> = (0..k).map(|m| xi_edges[m + 1] - xi_edges[m]).collect();
        let centers: Vec<f64> = (0..k)
            .map(|m| 0.5 * (xi_edges[m] + xi_edges[m + 1]))
            .collect();

        let mut a_mean = vec![0.0; k * k];
        for m in 0..k {
            for l in 0..k {
                a_mean[m * k + l] = mean_pow(xi_edges[m], xi_edges[m + 1], l);
            }
        }
        let a = DMatrix::from_row_slice(k, k, &a_mean);
        let svd = a.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if !(smin > 0.0) {
            return Err(SvError::Singular("SV mean-value matrix".into()));
        }
        let condition = smax / smin;
        let inv = a
            .try_inverse()
            .ok_or_else(|| SvError::Singular("SV mean-value matrix".into()))?;
        let mut a_inv = vec![0.0; k * k];
        for m in 0..k {
            for l in 0..k {
                a_inv[m * k + l] = inv[(m, l)];
            }
        }

        // ζ-frame coefficients of ξ^l with ξ = center_m + width_m ζ:
        // T[a][l] = C(l,a) center^(l-a) width^a.
        let mut restrict = Vec::with_capacity(k);
        for m in 0..k {
            let mut t = vec![0.0; k * k];
            for l in 0..k {
                for a in 0..=l {
                    t[a * k + l] =
                        binomial(l, a) * centers[m].powi((l - a) as i32) * widths[m].powi(a as i32);
                }
            }
            restrict.push(t);
        }

        Ok(BasisSet {
            k,
            xi_edges,
            widths,
            centers,
            a_mean,
            a_inv,
            condition,
            restrict,
        })
    }

    /// SV coefficients from the k CV averages: W = A⁻¹ ū.
    #[inline]
    pub fn reconstruct_1d(&self, averages: &[f64], coeffs: &mut [f64]) {
        let k = self.k;
        for l in 0..k {
            let mut acc = 0.0;
            for m in 0..k {
                acc += self.a_inv[l * k + m] * averages[m];
            }
            coeffs[l] = acc;
        }
    }

    /// Tensor reconstruction from k² CV averages `u[m*k+n]` (m: x index,
    /// n: y index): W = A⁻¹ Ū A⁻ᵀ, stored as W[l*k+r].
    pub fn reconstruct_2d(&self, averages: &[f64], scratch: &mut [f64], coeffs: &mut [f64]) {
        let k = self.k;
        // scratch = A⁻¹ Ū
        for l in 0..k {
            for n in 0..k {
                let mut acc = 0.0;
                for m in 0..k {
                    acc += self.a_inv[l * k + m] * averages[m * k + n];
                }
                scratch[l * k + n] = acc;
            }
        }
        // W = scratch A⁻ᵀ
        for l in 0..k {
            for r in 0..k {
                let mut acc = 0.0;
                for n in 0..k {
                    acc += scratch[l * k + n] * self.a_inv[r * k + n];
                }
                coeffs[l * k + r] = acc;
            }
        }
    }

    /// CV-frame restriction of SV coefficients: c = T_m W.
    #[inline]
    pub fn restrict_1d(&self, sv_coeffs: &[f64], m: usize, cv_coeffs: &mut [f64]) {
        let k = self.k;
        let t = &self.restrict[m];
        for a in 0..k {
            let mut acc = 0.0;
            for l in a..k {
                acc += t[a * k + l] * sv_coeffs[l];
            }
            cv_coeffs[a] = acc;
        }
    }

    /// CV-frame restriction of a tensor polynomial: C = T_m W T_nᵀ.
    pub fn restrict_2d(
        &self,
        sv_coeffs: &[f64],
        m: usize,
        n: usize,
        scratch: &mut [f64],
        cv_coeffs: &mut [f64],
    ) {
        let k = self.k;
        let tx = &self.restrict[m];
        let ty = &self.restrict[n];
        for a in 0..k {
            for r in 0..k {
                let mut acc = 0.0;
                for l in a..k {
                    acc += tx[a * k + l] * sv_coeffs[l * k + r];
                }
                scratch[a * k + r] = acc;
            }
        }
        for a in 0..k {
            for b in 0..k {
                let mut acc = 0.0;
                for r in b..k {
                    acc += scratch[a * k + r] * ty[b * k + r];
                }
                cv_coeffs[a * k + b] = acc;
            }
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Stencil half width of the limiter's large stencil: ⌊k/2⌋.
pub fn stencil_half_width(k: usize) -> usize {
    k / 2
}

/// Intervals of the CVs `target+d`, d = -s..=s, in the target's CV frame.
/// Relies on the pattern tiling periodically across uniform SVs.
pub fn stencil_intervals(widths: &[f64], m: usize, s: usize) -> Vec<(f64, f64)> {
    let k = widths.len();
    let wm = widths[m];
    let rel = |d: isize| widths[(m as isize + d).rem_euclid(k as isize) as usize] / wm;
    let mut spans = vec![(0.0, 0.0); 2 * s + 1];
    spans[s] = (-0.5, 0.5);
    for d in 1..=s as isize {
        let prev = spans[(s as isize + d - 1) as usize];
        spans[(s as isize + d) as usize] = (prev.1, prev.1 + rel(d));
        let next = spans[(s as isize - d + 1) as usize];
        spans[(s as isize - d) as usize] = (next.0 - rel(-d), next.0);
    }
    spans
}

/// Constrained least-squares operator mapping stencil averages to polynomial
/// coefficients: the mean over the target cell is matched exactly, the
/// remaining cells in the least-squares sense. The equality constraint is
/// eliminated through the null space of the target mean row, then normal
/// equations are formed on the reduced system.
fn constrained_ls_operator(
    means: &DMatrix<f64>, // S×D, row per stencil cell
    target_row: usize,
    what: &str,
) -> Result<DMatrix<f64>> {
    let s_cells = means.nrows();
    let dim = means.ncols();
    let g = means.row(target_row);
    // Null-space basis of g·c = const: columns e_i - g_i e_0 (g_0 = 1).
    let mut z = DMatrix::zeros(dim, dim - 1);
    for i in 1..dim {
        z[(i, i - 1)] = 1.0;
        z[(0, i - 1)] = -g[i];
    }
    let mut reduced = DMatrix::zeros(s_cells - 1, dim - 1);
    let mut row_of = Vec::with_capacity(s_cells - 1);
    let mut rr = 0;
    for j in 0..s_cells {
        if j == target_row {
            continue;
        }
        let bj = means.row(j) * &z;
        reduced.row_mut(rr).copy_from(&bj);
        row_of.push(j);
        rr += 1;
    }
    let bt = reduced.transpose();
    let normal = &bt * &reduced;
    let normal_inv = normal
        .try_inverse()
        .ok_or_else(|| SvError::Singular(what.into()))?;
    let pseudo = z * normal_inv * bt; // D×(S-1)

    // Assemble the full operator on raw stencil averages: the reduced RHS is
    // d_j = ū_j - ū_target, and c = ū_target e_0 + pseudo·d.
    let mut op = DMatrix::zeros(dim, s_cells);
    op[(0, target_row)] = 1.0;
    for (jr, &j) in row_of.iter().enumerate() {
        for a in 0..dim {
            op[(a, j)] += pseudo[(a, jr)];
            op[(a, target_row)] -= pseudo[(a, jr)];
        }
    }
    Ok(op)
}

/// Smoothness-indicator quadratic form for 1D CV-frame polynomials:
/// β = cᵀ Q c with Q[a][b] = Σ_q fall(a,q) fall(b,q) ∫ ζ^{a+b-2q} dζ.
/// In the CV frame the h powers of the defining formula cancel exactly.
fn beta_form_1d(k: usize) -> Vec<f64> {
    let fall = |a: usize, q: usize| -> f64 {
        if q > a {
            return 0.0;
        }
        let mut acc = 1.0;
        for i in 0..q {
            acc *= (a - i) as f64;
        }
        acc
    };
    let int_pow = |p: usize| -> f64 {
        if p % 2 == 0 {
            0.5f64.powi(p as i32) / (p as f64 + 1.0)
        } else {
            0.0
        }
    };
    let mut q_mat = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            let mut acc = 0.0;
            for q in 1..=k.min(a.min(b)) {
                acc += fall(a, q) * fall(b, q) * int_pow(a + b - 2 * q);
            }
            q_mat[a * k + b] = acc;
        }
    }
    q_mat
}

/// 2D analogue over (q1, q2) with 1 ≤ q1+q2 ≤ k; separable per axis.
fn beta_form_2d(k: usize) -> Vec<f64> {
    let fall = |a: usize, q: usize| -> f64 {
        if q > a {
            return 0.0;
        }
        let mut acc = 1.0;
        for i in 0..q {
            acc *= (a - i) as f64;
        }
        acc
    };
    let int_pow = |p: usize| -> f64 {
        if p % 2 == 0 {
            0.5f64.powi(p as i32) / (p as f64 + 1.0)
        } else {
            0.0
        }
    };
    let d = k * k;
    let mut q_mat = vec![0.0; d * d];
    for a1 in 0..k {
        for b1 in 0..k {
            for a2 in 0..k {
                for b2 in 0..k {
                    let mut acc = 0.0;
                    for q1 in 0..=a1.min(a2) {
                        for q2 in 0..=b1.min(b2) {
                            if q1 + q2 == 0 || q1 + q2 > k {
                                continue;
                            }
                            let fx = fall(a1, q1) * fall(a2, q1) * int_pow(a1 + a2 - 2 * q1);
                            let fy = fall(b1, q2) * fall(b2, q2) * int_pow(b1 + b2 - 2 * q2);
                            acc += fx * fy;
                        }
                    }
                    q_mat[(a1 * k + b1) * d + (a2 * k + b2)] = acc;
                }
            }
        }
    }
    q_mat
}

/// Precomputed limiter operators for every CV position inside a 1D SV.
#[derive(Debug, Clone)]
pub struct LimiterOps1D {
    pub k: usize,
    pub s: usize,
    /// Per position m: k×(2s+1) operator, coeffs = op · stencil averages.
    pub p0_ops: Vec<Vec<f64>>,
    /// Per position m: centers of the left/right neighbor in the target frame.
    pub neighbor_mid: Vec<(f64, f64)>,
    /// β quadratic form (k×k).
    pub beta_q: Vec<f64>,
}

impl LimiterOps1D {
    pub fn new(basis: &BasisSet) -> Result<Self> {
        Self::from_widths(basis.k, &basis.widths)
    }

    /// Build for an arbitrary periodic CV width pattern (the grid's pattern
    /// in production; uniform widths in some oracle tests).
    pub fn from_widths(k: usize, widths: &[f64]) -> Result<Self> {
        let s = stencil_half_width(k);
        let mut p0_ops = Vec::with_capacity(k);
        let mut neighbor_mid = Vec::with_capacity(k);
        for m in 0..k {
            let spans = stencil_intervals(widths, m, s);
            let mut means = DMatrix::zeros(2 * s + 1, k);
            for (j, &(lo, hi)) in spans.iter().enumerate() {
                for a in 0..k {
                    means[(j, a)] = mean_pow(lo, hi, a);
                }
            }
            let op = constrained_ls_operator(&means, s, "limiter least-squares stencil")?;
            p0_ops.push(op.transpose().as_slice().to_vec()); // row-major D×S
            let near = stencil_intervals(widths, m, 1);
            neighbor_mid.push((
                0.5 * (near[0].0 + near[0].1),
                0.5 * (near[2].0 + near[2].1),
            ));
        }
        Ok(LimiterOps1D {
            k,
            s,
            p0_ops,
            neighbor_mid,
            beta_q: beta_form_1d(k),
        })
    }

    /// Large-stencil polynomial for position `m`; `stencil` holds 2s+1
    /// averages ordered left to right.
    #[inline]
    pub fn p0(&self, m: usize, stencil: &[f64], coeffs: &mut [f64]) {
        let cols = 2 * self.s + 1;
        let op = &self.p0_ops[m];
        for a in 0..self.k {
            let mut acc = 0.0;
            for j in 0..cols {
                acc += op[a * cols + j] * stencil[j];
            }
            coeffs[a] = acc;
        }
    }

    /// Slopes of the two linear candidates (target frame); both have the
    /// target average as constant term.
    #[inline]
    pub fn candidate_slopes(&self, m: usize, u_left: f64, u_mid: f64, u_right: f64) -> (f64, f64) {
        let (mid_l, mid_r) = self.neighbor_mid[m];
        ((u_left - u_mid) / mid_l, (u_right - u_mid) / mid_r)
    }

    #[inline]
    pub fn beta(&self, coeffs: &[f64]) -> f64 {
        let k = self.k;
        let mut acc = 0.0;
        for a in 0..k {
            let mut row = 0.0;
            for b in 0..k {
                row += self.beta_q[a * k + b] * coeffs[b];
            }
            acc += coeffs[a] * row;
        }
        acc
    }
}

/// Precomputed limiter operators for every CV position inside a 2D SV.
#[derive(Debug, Clone)]
pub struct LimiterOps2D {
    pub k: usize,
    pub s: usize,
    /// Per position m*k+n: (k²)×(2s+1)² operator on the box stencil,
    /// stencil ordered row-major with x fastest.
    pub p0_ops: Vec<Vec<f64>>,
    /// Per x-position m: centers of left/right x-neighbors in target frame.
    pub mid_x: Vec<(f64, f64)>,
    /// Per y-position n: centers of bottom/top y-neighbors in target frame.
    pub mid_y: Vec<(f64, f64)>,
    /// β quadratic form (k²×k²).
    pub beta_q: Vec<f64>,
}

impl LimiterOps2D {
    pub fn new(basis: &BasisSet) -> Result<Self> {
        Self::from_widths(basis.k, &basis.widths)
    }

    pub fn from_widths(k: usize, widths: &[f64]) -> Result<Self> {
        let s = stencil_half_width(k);
        let d = k * k;
        let cells = (2 * s + 1) * (2 * s + 1);
        let mut p0_ops = Vec::with_capacity(d);
        for m in 0..k {
            let spans_x = stencil_intervals(widths, m, s);
            for n in 0..k {
                let spans_y = stencil_intervals(widths, n, s);
                let mut means = DMatrix::zeros(cells, d);
                for (jy, &(ly, hy)) in spans_y.iter().enumerate() {
                    for (jx, &(lx, hx)) in spans_x.iter().enumerate() {
                        let row = jy * (2 * s + 1) + jx;
                        for a in 0..k {
                            let mx = mean_pow(lx, hx, a);
                            for b in 0..k {
                                means[(row, a * k + b)] = mx * mean_pow(ly, hy, b);
                            }
                        }
                    }
                }
                let target = s * (2 * s + 1) + s;
                let op = constrained_ls_operator(&means, target, "2D limiter stencil")?;
                p0_ops.push(op.transpose().as_slice().to_vec());
            }
        }
        let mut mid_x = Vec::with_capacity(k);
        let mut mid_y = Vec::with_capacity(k);
        for m in 0..k {
            let near = stencil_intervals(widths, m, 1);
            mid_x.push((0.5 * (near[0].0 + near[0].1), 0.5 * (near[2].0 + near[2].1)));
        }
        mid_y.clone_from(&mid_x);
        Ok(LimiterOps2D {
            k,
            s,
            p0_ops,
            mid_x,
            mid_y,
            beta_q: beta_form_2d(k),
        })
    }

    #[inline]
    pub fn p0(&self, m: usize, n: usize, stencil: &[f64], coeffs: &mut [f64]) {
        let d = self.k * self.k;
        let cells = (2 * self.s + 1) * (2 * self.s + 1);
        let op = &self.p0_ops[m * self.k + n];
        for a in 0..d {
            let mut acc = 0.0;
            for j in 0..cells {
                acc += op[a * cells + j] * stencil[j];
            }
            coeffs[a] = acc;
        }
    }

    #[inline]
    pub fn beta(&self, coeffs: &[f64]) -> f64 {
        let d = self.k * self.k;
        let mut acc = 0.0;
        for a in 0..d {
            let mut row = 0.0;
            for b in 0..d {
                row += self.beta_q[a * d + b] * coeffs[b];
            }
            acc += coeffs[a] * row;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use crate::mesh::gauss_rule;

    /// CV average of a CV-frame polynomial over an interval of the target
    /// frame, by quadrature.
    fn quad_mean_1d(coeffs: &[f64], lo: f64, hi: f64) -> f64 {
        let rule = gauss_rule(6).unwrap();
        rule.integrate(lo, hi, |z| eval_1d(coeffs, z)) / (hi - lo)
    }

    fn quad_mean_2d(coeffs: &[f64], k: usize, sx: (f64, f64), sy: (f64, f64)) -> f64 {
        let rule = gauss_rule(6).unwrap();
        let inner = |x: f64| rule.integrate(sy.0, sy.1, |y| eval_2d(coeffs, k, x, y));
        rule.integrate(sx.0, sx.1, inner) / ((sx.1 - sx.0) * (sy.1 - sy.0))
    }

    #[test]
    fn hand_solved_k2_reconstruction() {
        // CVs [0,1/2],[1/2,1] with averages (0,1) give p(x) = 2x - 1/2,
        // i.e. in the SV frame (ξ = x - 1/2): p = 1/2 + 2ξ.
        let basis = BasisSet::new(2).unwrap();
        let mut w = [0.0; 2];
        basis.reconstruct_1d(&[0.0, 1.0], &mut w);
        assert_abs_diff_eq!(w[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(w[1], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn constant_data_gives_constant_polynomial() {
        for k in 2..=5 {
            let basis = BasisSet::new(k).unwrap();
            let avgs = vec![3.25; k];
            let mut w = vec![0.0; k];
            basis.reconstruct_1d(&avgs, &mut w);
            assert_abs_diff_eq!(w[0], 3.25, epsilon = 1e-13);
            for l in 1..k {
                assert_abs_diff_eq!(w[l], 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn p_exactness_all_orders_1d() {
        for k in 2..=5 {
            let basis = BasisSet::new(k).unwrap();
            // target polynomial: alternating coefficients
            let truth: Vec<f64> = (0..k).map(|l| 1.0 + 0.5 * l as f64 * if l % 2 == 0 { 1.0 } else { -1.0 }).collect();
            let mut avgs = vec![0.0; k];
            for m in 0..k {
                for l in 0..k {
                    avgs[m] += basis.a_mean[m * k + l] * truth[l];
                }
            }
            let mut w = vec![0.0; k];
            basis.reconstruct_1d(&avgs, &mut w);
            for l in 0..k {
                assert_abs_diff_eq!(w[l], truth[l], epsilon = 1e-11);
            }
            // x^(k-1) data reconstructs exactly (k=5 covers x^4)
            let mut mono = vec![0.0; k];
            mono[k - 1] = 1.0;
            let mut avgs = vec![0.0; k];
            for m in 0..k {
                avgs[m] = basis.a_mean[m * k + k - 1];
            }
            let mut w = vec![0.0; k];
            basis.reconstruct_1d(&avgs, &mut w);
            for l in 0..k {
                assert_abs_diff_eq!(w[l], mono[l], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn reconstruction_is_linear() {
        let basis = BasisSet::new(4).unwrap();
        let u = [1.0, -0.5, 2.0, 0.25];
        let v = [0.5, 3.0, -1.0, 1.5];
        let (al, be) = (1.3, -0.7);
        let mut wu = [0.0; 4];
        let mut wv = [0.0; 4];
        let mut wc = [0.0; 4];
        basis.reconstruct_1d(&u, &mut wu);
        basis.reconstruct_1d(&v, &mut wv);
        let comb: Vec<f64> = (0..4).map(|i| al * u[i] + be * v[i]).collect();
        basis.reconstruct_1d(&comb, &mut wc);
        for l in 0..4 {
            assert_abs_diff_eq!(wc[l], al * wu[l] + be * wv[l], epsilon = 1e-12);
        }
    }

    #[test]
    fn averages_are_reproduced_by_quadrature() {
        for k in 2..=5 {
            let basis = BasisSet::new(k).unwrap();
            let avgs: Vec<f64> = (0..k).map(|m| (m as f64 * 1.7).sin() + 2.0).collect();
            let mut w = vec![0.0; k];
            basis.reconstruct_1d(&avgs, &mut w);
            let rule = gauss_rule(6).unwrap();
            for m in 0..k {
                let (lo, hi) = (basis.xi_edges[m], basis.xi_edges[m + 1]);
                let mean = rule.integrate(lo, hi, |z| eval_1d(&w, z)) / (hi - lo);
                assert_abs_diff_eq!(mean, avgs[m], epsilon = 1e-12 * avgs[m].abs());
            }
        }
    }

    #[test]
    fn sine_reconstruction_error_scales() {
        // averages of sin over one SV of width h: reconstruction error O(h^k)
        let k = 3;
        let basis = BasisSet::new(k).unwrap();
        let rule = gauss_rule(6).unwrap();
        let mut errs = Vec::new();
        for &h in &[2.0 / 3.0, 1.0 / 3.0] {
            let mut avgs = vec![0.0; k];
            for m in 0..k {
                let (lo, hi) = (basis.xi_edges[m], basis.xi_edges[m + 1]);
                avgs[m] = rule
                    .integrate(lo, hi, |z| (std::f64::consts::PI * z * h).sin())
                    / (hi - lo);
            }
            let mut w = vec![0.0; k];
            basis.reconstruct_1d(&avgs, &mut w);
            let mut max_err = 0.0f64;
            for i in 0..=50 {
                let z = -0.5 + i as f64 / 50.0;
                let err = (eval_1d(&w, z) - (std::f64::consts::PI * z * h).sin()).abs();
                max_err = max_err.max(err);
            }
            errs.push(max_err);
        }
        // halving h must shrink the error by at least ~2^k / 2
        assert!(errs[0] / errs[1] > 2.0f64.powi(k as i32) * 0.5, "{errs:?}");
    }

    #[test]
    fn tensor_reconstruction_recovers_xy() {
        let basis = BasisSet::new(2).unwrap();
        let k = 2;
        // data = averages of ξη over the four CVs
        let mut avgs = vec![0.0; 4];
        for m in 0..k {
            for n in 0..k {
                avgs[m * k + n] = basis.a_mean[m * k + 1] * basis.a_mean[n * k + 1];
            }
        }
        let mut scratch = vec![0.0; 4];
        let mut w = vec![0.0; 4];
        basis.reconstruct_2d(&avgs, &mut scratch, &mut w);
        assert_abs_diff_eq!(w[1 * k + 1], 1.0, epsilon = 1e-12);
        for (i, &c) in w.iter().enumerate() {
            if i != k + 1 {
                assert_abs_diff_eq!(c, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn restriction_preserves_point_values() {
        for k in 2..=5 {
            let basis = BasisSet::new(k).unwrap();
            let w: Vec<f64> = (0..k).map(|l| 0.3 + l as f64).collect();
            for m in 0..k {
                let mut c = vec![0.0; k];
                basis.restrict_1d(&w, m, &mut c);
                for i in 0..=8 {
                    let z = -0.5 + i as f64 / 8.0;
                    let xi = basis.centers[m] + basis.widths[m] * z;
                    assert_abs_diff_eq!(eval_1d(&c, z), eval_1d(&w, xi), epsilon = 1e-11);
                }
            }
        }
    }

    #[test]
    fn restriction_2d_matches_tensor_values() {
        let k = 3;
        let basis = BasisSet::new(k).unwrap();
        let w: Vec<f64> = (0..k * k).map(|i| (i as f64 * 0.37).cos()).collect();
        let mut scratch = vec![0.0; k * k];
        let mut c = vec![0.0; k * k];
        for m in 0..k {
            for n in 0..k {
                basis.restrict_2d(&w, m, n, &mut scratch, &mut c);
                for &(zx, zy) in &[(0.5, 0.0), (0.0, -0.5), (0.25, 0.4), (-0.5, 0.5)] {
                    let xi = basis.centers[m] + basis.widths[m] * zx;
                    let eta = basis.centers[n] + basis.widths[n] * zy;
                    assert_abs_diff_eq!(
                        eval_2d(&c, k, zx, zy),
                        eval_2d(&w, k, xi, eta),
                        epsilon = 1e-11
                    );
                }
            }
        }
    }

    /// Dense constrained LS oracle via the KKT system.
    fn kkt_oracle(means: &DMatrix<f64>, target: usize, rhs: &[f64]) -> Vec<f64> {
        let d = means.ncols();
        let s = means.nrows();
        let mut a = DMatrix::zeros(s - 1, d);
        let mut b = DMatrix::zeros(s - 1, 1);
        let mut r = 0;
        for j in 0..s {
            if j == target {
                continue;
            }
            a.row_mut(r).copy_from(&means.row(j));
            b[(r, 0)] = rhs[j];
            r += 1;
        }
        let mut kkt = DMatrix::zeros(d + 1, d + 1);
        let ata = a.transpose() * &a;
        for i in 0..d {
            for j in 0..d {
                kkt[(i, j)] = 2.0 * ata[(i, j)];
            }
            kkt[(i, d)] = means[(target, i)];
            kkt[(d, i)] = means[(target, i)];
        }
        let mut rhs_v = DMatrix::zeros(d + 1, 1);
        let atb = a.transpose() * b;
        for i in 0..d {
            rhs_v[(i, 0)] = 2.0 * atb[(i, 0)];
        }
        rhs_v[(d, 0)] = rhs[target];
        let sol = kkt.lu().solve(&rhs_v).unwrap();
        (0..d).map(|i| sol[(i, 0)]).collect()
    }

    #[test]
    fn p0_matches_dense_constrained_ls_oracle_1d() {
        let mut state = 0x12345u64;
        let mut rand = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as f64 / (1u64 << 31) as f64 - 1.0
        };
        for k in 2..=5 {
            let basis = BasisSet::new(k).unwrap();
            let ops = LimiterOps1D::new(&basis).unwrap();
            let s = ops.s;
            for m in 0..k {
                let spans = stencil_intervals(&basis.widths, m, s);
                let mut means = DMatrix::zeros(2 * s + 1, k);
                for (j, &(lo, hi)) in spans.iter().enumerate() {
                    for a in 0..k {
                        means[(j, a)] = mean_pow(lo, hi, a);
                    }
                }
                for _ in 0..4 {
                    let stencil: Vec<f64> = (0..2 * s + 1).map(|_| rand()).collect();
                    let mut c = vec![0.0; k];
                    ops.p0(m, &stencil, &mut c);
                    let oracle = kkt_oracle(&means, s, &stencil);
                    for a in 0..k {
                        assert_abs_diff_eq!(c[a], oracle[a], epsilon = 1e-10);
                    }
                    // equality constraint is exact
                    assert_abs_diff_eq!(quad_mean_1d(&c, -0.5, 0.5), stencil[s], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn p0_matches_dense_constrained_ls_oracle_2d() {
        let mut state = 0xabcdeu64;
        let mut rand = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as f64 / (1u64 << 31) as f64 - 1.0
        };
        for k in [2usize, 3, 4] {
            let basis = BasisSet::new(k).unwrap();
            let ops = LimiterOps2D::new(&basis).unwrap();
            let s = ops.s;
            let cells = (2 * s + 1) * (2 * s + 1);
            for m in 0..k {
                for n in 0..k {
                    let sx = stencil_intervals(&basis.widths, m, s);
                    let sy = stencil_intervals(&basis.widths, n, s);
                    let mut means = DMatrix::zeros(cells, k * k);
                    for (jy, &(ly, hy)) in sy.iter().enumerate() {
                        for (jx, &(lx, hx)) in sx.iter().enumerate() {
                            for a in 0..k {
                                for b in 0..k {
                                    means[(jy * (2 * s + 1) + jx, a * k + b)] =
                                        mean_pow(lx, hx, a) * mean_pow(ly, hy, b);
                                }
                            }
                        }
                    }
                    let target = s * (2 * s + 1) + s;
                    let stencil: Vec<f64> = (0..cells).map(|_| rand()).collect();
                    let mut c = vec![0.0; k * k];
                    ops.p0(m, n, &stencil, &mut c);
                    let oracle = kkt_oracle(&means, target, &stencil);
                    for a in 0..k * k {
                        assert_abs_diff_eq!(c[a], oracle[a], epsilon = 1e-9);
                    }
                    assert_abs_diff_eq!(
                        quad_mean_2d(&c, k, (-0.5, 0.5), (-0.5, 0.5)),
                        stencil[target],
                        epsilon = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn p0_reproduces_data_in_model_space() {
        // quadratic data with k=3 (interpolation) and cubic with k=4 (LS with
        // data in the span): both must be exact
        for (k, deg) in [(3usize, 2usize), (4, 3)] {
            let basis = BasisSet::new(k).unwrap();
            let ops = LimiterOps1D::new(&basis).unwrap();
            let s = ops.s;
            for m in 0..k {
                let spans = stencil_intervals(&basis.widths, m, s);
                let mut truth = vec![0.0; k];
                truth[deg] = 1.0;
                truth[0] = 0.3;
                let stencil: Vec<f64> = spans
                    .iter()
                    .map(|&(lo, hi)| {
                        (0..k).map(|a| truth[a] * mean_pow(lo, hi, a)).sum::<f64>()
                    })
                    .collect();
                let mut c = vec![0.0; k];
                ops.p0(m, &stencil, &mut c);
                for a in 0..k {
                    assert_abs_diff_eq!(c[a], truth[a], epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn linear_candidates_match_defining_averages() {
        let basis = BasisSet::new(3).unwrap();
        let ops = LimiterOps1D::new(&basis).unwrap();
        // averages (0, 1) on equal-width CVs: slope 1 in the target frame
        let m = 1; // middle CV of k=3 has symmetric neighbors
        let (b1, _) = ops.candidate_slopes(m, 0.0, 1.0, 1.0);
        let spans = stencil_intervals(&basis.widths, m, 1);
        // candidate reproduces both averages
        let coeffs = [1.0, b1];
        assert_abs_diff_eq!(quad_mean_1d(&coeffs, -0.5, 0.5), 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(
            quad_mean_1d(&coeffs, spans[0].0, spans[0].1),
            0.0,
            epsilon = 1e-13
        );
    }

    #[test]
    fn planar_candidate_2d_matches_three_point_oracle() {
        let k = 3;
        let basis = BasisSet::new(k).unwrap();
        let ops = LimiterOps2D::new(&basis).unwrap();
        // T1 = {west, center, south} with averages (1, 2, 3), verified by a
        // dense 3×3 solve
        for (m, n) in [(0usize, 0usize), (1, 2), (2, 1)] {
            let (u_w, u_c, u_s) = (1.0, 2.0, 3.0);
            let bx = (u_w - u_c) / ops.mid_x[m].0;
            let by = (u_s - u_c) / ops.mid_y[n].0;
            let sx = stencil_intervals(&basis.widths, m, 1);
            let sy = stencil_intervals(&basis.widths, n, 1);
            let mut dense = DMatrix::zeros(3, 3);
            let rows = [
                (sx[0], sy[1]), // west
                (sx[1], sy[1]), // center
                (sx[1], sy[0]), // south
            ];
            for (r, &((lx, hx), (ly, hy))) in rows.iter().enumerate() {
                dense[(r, 0)] = 1.0;
                dense[(r, 1)] = mean_pow(lx, hx, 1);
                dense[(r, 2)] = mean_pow(ly, hy, 1);
            }
            let rhs = nalgebra::DVector::from_row_slice(&[u_w, u_c, u_s]);
            let sol = dense.lu().solve(&rhs).unwrap();
            assert_abs_diff_eq!(u_c, sol[0], epsilon = 1e-12);
            assert_abs_diff_eq!(bx, sol[1], epsilon = 1e-12);
            assert_abs_diff_eq!(by, sol[2], epsilon = 1e-12);
        }
    }

    #[test]
    fn beta_form_basics() {
        for k in 2..=5 {
            let basis = BasisSet::new(k).unwrap();
            let ops = LimiterOps1D::new(&basis).unwrap();
            // constant polynomial: β = 0
            let mut c = vec![0.0; k];
            c[0] = 4.2;
            assert_abs_diff_eq!(ops.beta(&c), 0.0, epsilon = 1e-14);
            // linear a + bζ in CV frame: β = b² (equals h²·slope² physically)
            if k >= 2 {
                let mut c = vec![0.0; k];
                c[0] = 1.0;
                c[1] = 0.7;
                assert_abs_diff_eq!(ops.beta(&c), 0.49, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn beta_matches_quadrature_oracle() {
        // random quartic, k=5, against dense quadrature of the defining sum
        let k = 5;
        let basis = BasisSet::new(k).unwrap();
        let ops = LimiterOps1D::new(&basis).unwrap();
        let c = [0.3, -1.2, 0.8, 2.1, -0.6];
        let rule = gauss_rule(6).unwrap();
        let mut expect = 0.0;
        for q in 1..=k {
            // d^q/dζ^q of Σ c_a ζ^a
            let dq = |z: f64| -> f64 {
                let mut acc = 0.0;
                for a in q..k {
                    let mut fall = 1.0;
                    for i in 0..q {
                        fall *= (a - i) as f64;
                    }
                    acc += c[a] * fall * z.powi((a - q) as i32);
                }
                acc
            };
            expect += rule.integrate(-0.5, 0.5, |z| dq(z) * dq(z));
        }
        assert_abs_diff_eq!(ops.beta(&c), expect, epsilon = 1e-10);
    }

    #[test]
    fn beta_2d_matches_quadrature_oracle() {
        let k = 3;
        let basis = BasisSet::new(k).unwrap();
        let ops = LimiterOps2D::new(&basis).unwrap();
        let c: Vec<f64> = (0..9).map(|i| ((i * 7 % 5) as f64 - 2.0) * 0.6).collect();
        let rule = gauss_rule(6).unwrap();
        let fall = |a: usize, q: usize| -> f64 {
            if q > a {
                return 0.0;
            }
            (0..q).map(|i| (a - i) as f64).product()
        };
        let mut expect = 0.0;
        for q1 in 0..k {
            for q2 in 0..k {
                if q1 + q2 == 0 || q1 + q2 > k {
                    continue;
                }
                let d = |x: f64, y: f64| -> f64 {
                    let mut acc = 0.0;
                    for a in q1..k {
                        for b in q2..k {
                            acc += c[a * k + b]
                                * fall(a, q1)
                                * fall(b, q2)
                                * x.powi((a - q1) as i32)
                                * y.powi((b - q2) as i32);
                        }
                    }
                    acc
                };
                expect += rule.integrate(-0.5, 0.5, |x| {
                    rule.integrate(-0.5, 0.5, |y| d(x, y) * d(x, y))
                });
            }
        }
        assert_abs_diff_eq!(ops.beta(&c), expect, epsilon = 1e-10);
    }

    #[test]
    fn condition_number_is_finite_and_modest() {
        for k in 2..=5 {
            let basis = BasisSet::new(k).unwrap();
            assert!(basis.condition.is_finite());
            assert!(basis.condition < 1e5, "cond(k={k}) = {}", basis.condition);
        }
    }
}
