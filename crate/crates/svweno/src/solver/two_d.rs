//! Two-dimensional solver on tensor-product grids.
//!
//! Storage is row-major with x fastest. Faces are handled per family:
//! x-faces carry ∫F̂ dy over one CV's y-extent, y-faces ∫Ĝ dx, both by
//! k-point Gauss quadrature. Heavy loops parallelize over grid rows; every
//! write is row-disjoint and every reduction is exact (min/max/counts), so
//! results do not depend on the worker count.

use super::{Boundary, LfMode, RunLog, SolverParams, StepRecord, TroubledRecord};
use crate::error::{Result, SvError};
use crate::integrator::{clip_dt, rk_step, tableau, RkTableau};
use crate::limiter::{cv_is_troubled, sweno_limit_2d, LimiterMode};
use crate::mesh::{gauss_rule, QuadratureRule, SvGrid2D};
use crate::physics::{
    characteristic_basis, flux_physical, is_physical, lax_friedrichs_physical, max_wavespeed,
    wavespeed_physical, Axis, Model, MAX_COMP,
};
use crate::reconstruction::{BasisSet, LimiterOps2D};
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField2D {
    /// CV averages, `data[(iy * nx_cv + ix) * n_comp + c]`.
    pub data: Vec<f64>,
    pub n_comp: usize,
    pub t: f64,
}

struct Ws2 {
    /// Ghost depth in CVs per side: k + ⌊k/2⌋.
    g: usize,
    exn_x: usize,
    ext_avg: Vec<f64>,
    /// (nsvx+2)(nsvy+2) SV coefficient blocks of k²·ncomp.
    sv_coeffs: Vec<f64>,
    /// (nxcv+2)(nycv+2) CV coefficient blocks of k²·ncomp; interior CVs
    /// plus a one-CV ghost ring.
    cv_coeffs: Vec<f64>,
    troubled: Vec<bool>,
    /// Integrated x-face fluxes, (nxcv+1)·nycv·ncomp.
    flux_x: Vec<f64>,
    /// Integrated y-face fluxes, nxcv·(nycv+1)·ncomp.
    flux_y: Vec<f64>,
    union_troubled: Vec<bool>,
    quad: QuadratureRule,
    /// (node/2)^p, n_q × k.
    qp: Vec<f64>,
    /// (±1/2)^p.
    ep_plus: [f64; 8],
    ep_minus: [f64; 8],
}

pub struct Solver2D {
    pub grid: SvGrid2D,
    pub model: Model,
    /// Sides ordered [x_low, x_high, y_low, y_high].
    pub boundary: [Boundary; 4],
    pub params: SolverParams,
    basis: BasisSet,
    ops: LimiterOps2D,
    tab: RkTableau,
    ws: Ws2,
}

impl Solver2D {
    pub fn new(
        grid: SvGrid2D,
        model: Model,
        boundary: [Boundary; 4],
        params: SolverParams,
    ) -> Result<Self> {
        if model.dim() != 2 {
            return Err(SvError::InvalidConfig(
                "2D solver requires a 2D model".into(),
            ));
        }
        params.validate()?;
        for axis in 0..2 {
            let lo = matches!(boundary[2 * axis], Boundary::Periodic);
            let hi = matches!(boundary[2 * axis + 1], Boundary::Periodic);
            if lo != hi {
                return Err(SvError::InvalidConfig(
                    "periodic boundaries must be paired per axis".into(),
                ));
            }
        }
        let k = grid.order();
        let g = k + k / 2;
        for (axis, ncv) in [(0usize, grid.x.n_cv()), (1, grid.y.n_cv())] {
            if !matches!(boundary[2 * axis], Boundary::Periodic) && ncv < g {
                return Err(SvError::InvalidConfig(
                    "need at least two SVs per axis with non-periodic boundaries".into(),
                ));
            }
        }
        let basis = BasisSet::new(k)?;
        let ops = LimiterOps2D::new(&basis)?;
        let tab = tableau(k)?;
        let (nxcv, nycv) = (grid.x.n_cv(), grid.y.n_cv());
        let ncomp = model.n_comp();
        let k2 = k * k;
        let exn_x = nxcv + 2 * g;
        let exn_y = nycv + 2 * g;
        let quad = gauss_rule(k)?;
        let mut qp = vec![0.0; quad.len() * k];
        for (gq, &node) in quad.nodes.iter().enumerate() {
            for p in 0..k {
                qp[gq * k + p] = (0.5 * node).powi(p as i32);
            }
        }
        let mut ep_plus = [0.0; 8];
        let mut ep_minus = [0.0; 8];
        for p in 0..k {
            ep_plus[p] = 0.5f64.powi(p as i32);
            ep_minus[p] = (-0.5f64).powi(p as i32);
        }
        let ws = Ws2 {
            g,
            exn_x,
            ext_avg: vec![0.0; exn_x * exn_y * ncomp],
            sv_coeffs: vec![0.0; (grid.x.n_sv + 2) * (grid.y.n_sv + 2) * k2 * ncomp],
            cv_coeffs: vec![0.0; (nxcv + 2) * (nycv + 2) * k2 * ncomp],
            troubled: vec![false; (nxcv + 2) * (nycv + 2)],
            flux_x: vec![0.0; (nxcv + 1) * nycv * ncomp],
            flux_y: vec![0.0; nxcv * (nycv + 1) * ncomp],
            union_troubled: vec![false; nxcv * nycv],
            quad,
            qp,
            ep_plus,
            ep_minus,
        };
        Ok(Solver2D {
            grid,
            model,
            boundary,
            params,
            basis,
            ops,
            tab,
            ws,
        })
    }

    pub fn order(&self) -> usize {
        self.grid.order()
    }

    fn dims(&self) -> (usize, usize, usize) {
        (self.grid.x.n_cv(), self.grid.y.n_cv(), self.model.n_comp())
    }

    fn fill_ghosts(&mut self, field: &[f64], t: f64) {
        let (nxcv, nycv, ncomp) = self.dims();
        let g = self.ws.g;
        let exn_x = self.ws.exn_x;
        let row_len = exn_x * ncomp;
        let model = self.model;
        let grid = &self.grid;
        let boundary = &self.boundary;
        let x_momentum = matches!(model, Model::Euler2D { .. }).then_some(1usize);
        let y_momentum = matches!(model, Model::Euler2D { .. }).then_some(2usize);

        // pass 1: interior rows, including their x-ghosts
        self.ws.ext_avg[g * row_len..(g + nycv) * row_len]
            .par_chunks_mut(row_len)
            .enumerate()
            .for_each(|(iy, row)| {
                row[g * ncomp..(g + nxcv) * ncomp]
                    .copy_from_slice(&field[iy * nxcv * ncomp..(iy + 1) * nxcv * ncomp]);
                let y = grid.y.cv_centers[iy];
                for side in 0..2 {
                    for gi in 1..=g {
                        let ix: isize = if side == 0 {
                            -(gi as isize)
                        } else {
                            nxcv as isize - 1 + gi as isize
                        };
                        let dst = (ix + g as isize) as usize * ncomp;
                        let mirror: isize = if side == 0 {
                            gi as isize - 1
                        } else {
                            2 * nxcv as isize - 1 - ix
                        };
                        let mirror_src = (mirror + g as isize) as usize * ncomp;
                        match &boundary[side] {
                            Boundary::Periodic => {
                                let src =
                                    (ix.rem_euclid(nxcv as isize) + g as isize) as usize * ncomp;
                                for c in 0..ncomp {
                                    row[dst + c] = row[src + c];
                                }
                            }
                            Boundary::Reflective => {
                                for c in 0..ncomp {
                                    row[dst + c] = row[mirror_src + c];
                                }
                                if let Some(mc) = x_momentum {
                                    row[dst + mc] = -row[dst + mc];
                                }
                            }
                            Boundary::Outflow => {
                                let near = if side == 0 { g } else { g + nxcv - 1 };
                                for c in 0..ncomp {
                                    row[dst + c] = row[near * ncomp + c];
                                }
                            }
                            Boundary::Prescribed(f) => {
                                let x = grid.x.cv_center_extended(ix);
                                if let Some(state) = f(x, y, t) {
                                    row[dst..dst + ncomp].copy_from_slice(&state[..ncomp]);
                                } else {
                                    for c in 0..ncomp {
                                        row[dst + c] = row[mirror_src + c];
                                    }
                                    if let Some(mc) = x_momentum {
                                        row[dst + mc] = -row[dst + mc];
                                    }
                                }
                            }
                        }
                    }
                }
            });

        // pass 2: ghost rows over the full extended width, reading the
        // already-extended interior rows (corners compose both conditions)
        let (bottom, rest) = self.ws.ext_avg.split_at_mut(g * row_len);
        let (interior, top) = rest.split_at_mut(nycv * row_len);
        let interior = &interior[..];
        let fill_row = |iy: isize, row: &mut [f64], side: usize| {
            let mirror: isize = if side == 0 {
                -1 - iy
            } else {
                2 * nycv as isize - 1 - iy
            };
            match &boundary[2 + side] {
                Boundary::Periodic => {
                    let src = iy.rem_euclid(nycv as isize) as usize;
                    row.copy_from_slice(&interior[src * row_len..(src + 1) * row_len]);
                }
                Boundary::Reflective => {
                    let src = mirror as usize;
                    row.copy_from_slice(&interior[src * row_len..(src + 1) * row_len]);
                    if let Some(mc) = y_momentum {
                        for ix in 0..exn_x {
                            row[ix * ncomp + mc] = -row[ix * ncomp + mc];
                        }
                    }
                }
                Boundary::Outflow => {
                    let src = if side == 0 { 0 } else { nycv - 1 };
                    row.copy_from_slice(&interior[src * row_len..(src + 1) * row_len]);
                }
                Boundary::Prescribed(f) => {
                    let y = grid.y.cv_center_extended(iy);
                    let src = mirror as usize;
                    for ixe in 0..exn_x {
                        let x = grid.x.cv_center_extended(ixe as isize - g as isize);
                        let dst = ixe * ncomp;
                        if let Some(state) = f(x, y, t) {
                            row[dst..dst + ncomp].copy_from_slice(&state[..ncomp]);
                        } else {
                            for c in 0..ncomp {
                                row[dst + c] = interior[src * row_len + dst + c];
                            }
                            if let Some(mc) = y_momentum {
                                row[dst + mc] = -row[dst + mc];
                            }
                        }
                    }
                }
            }
        };
        bottom
            .par_chunks_mut(row_len)
            .enumerate()
            .for_each(|(r, row)| fill_row(r as isize - g as isize, row, 0));
        top.par_chunks_mut(row_len)
            .enumerate()
            .for_each(|(r, row)| fill_row(nycv as isize + r as isize, row, 1));
    }

    fn reconstruct(&mut self) {
        let (nxcv, _nycv, ncomp) = self.dims();
        let k = self.order();
        let k2 = k * k;
        let g = self.ws.g;
        let exn_x = self.ws.exn_x;
        let nsvx_e = self.grid.x.n_sv + 2;
        let basis = &self.basis;
        let ext = &self.ws.ext_avg;

        self.ws
            .sv_coeffs
            .par_chunks_mut(nsvx_e * k2 * ncomp)
            .enumerate()
            .for_each(|(jsv_e, row_out)| {
                let first_iy = jsv_e as isize * k as isize - k as isize;
                let mut avgs = [0.0; 32];
                let mut scratch = [0.0; 32];
                let mut w = [0.0; 32];
                for (isv_e, out) in row_out.chunks_mut(k2 * ncomp).enumerate() {
                    let first_ix = isv_e as isize * k as isize - k as isize;
                    for c in 0..ncomp {
                        for m in 0..k {
                            let ex = (first_ix + m as isize + g as isize) as usize;
                            for n in 0..k {
                                let ey = (first_iy + n as isize + g as isize) as usize;
                                avgs[m * k + n] = ext[(ey * exn_x + ex) * ncomp + c];
                            }
                        }
                        basis.reconstruct_2d(&avgs[..k2], &mut scratch[..k2], &mut w[..k2]);
                        for lr in 0..k2 {
                            out[lr * ncomp + c] = w[lr];
                        }
                    }
                }
            });

        let sv_coeffs = &self.ws.sv_coeffs;
        self.ws
            .cv_coeffs
            .par_chunks_mut((nxcv + 2) * k2 * ncomp)
            .enumerate()
            .for_each(|(iy_e, row_out)| {
                let iy = iy_e as isize - 1;
                let jsv_e = (iy.div_euclid(k as isize) + 1) as usize;
                let n = iy.rem_euclid(k as isize) as usize;
                let mut w = [0.0; 32];
                let mut scratch = [0.0; 32];
                let mut cvw = [0.0; 32];
                for (ix_e, out) in row_out.chunks_mut(k2 * ncomp).enumerate() {
                    let ix = ix_e as isize - 1;
                    let isv_e = (ix.div_euclid(k as isize) + 1) as usize;
                    let m = ix.rem_euclid(k as isize) as usize;
                    let sv = &sv_coeffs[(jsv_e * nsvx_e + isv_e) * k2 * ncomp..][..k2 * ncomp];
                    for c in 0..ncomp {
                        for lr in 0..k2 {
                            w[lr] = sv[lr * ncomp + c];
                        }
                        basis.restrict_2d(&w[..k2], m, n, &mut scratch[..k2], &mut cvw[..k2]);
                        for ab in 0..k2 {
                            out[ab * ncomp + c] = cvw[ab];
                        }
                    }
                }
            });
    }

    fn detect(&mut self, limit_enabled: bool) {
        let mode = self.params.limiter.mode;
        if !limit_enabled || mode == LimiterMode::Off {
            self.ws.troubled.fill(false);
            return;
        }
        if mode == LimiterMode::Full {
            self.ws.troubled.fill(true);
            return;
        }
        let (nxcv, _nycv, ncomp) = self.dims();
        let k = self.order();
        let k2 = k * k;
        let g = self.ws.g;
        let exn_x = self.ws.exn_x;
        let tvb_m = self.params.limiter.tvb_m;
        // thresholds scale with the per-axis SV width (see the 1D detector)
        let hx = self.grid.x.sv_width;
        let hy = self.grid.y.sv_width;
        let ext = &self.ws.ext_avg;
        let cv_coeffs = &self.ws.cv_coeffs;
        let ep_plus = self.ws.ep_plus;
        let ep_minus = self.ws.ep_minus;

        self.ws
            .troubled
            .par_chunks_mut(nxcv + 2)
            .enumerate()
            .for_each(|(iy_e, row)| {
                let iy = iy_e as isize - 1;
                let ey = (iy + g as isize) as usize;
                for (ix_e, flag) in row.iter_mut().enumerate() {
                    let ix = ix_e as isize - 1;
                    let ex = (ix + g as isize) as usize;
                    let coeffs =
                        &cv_coeffs[(iy_e * (nxcv + 2) + ix_e) * k2 * ncomp..][..k2 * ncomp];
                    let mut t = false;
                    for c in 0..ncomp {
                        let u_c = ext[(ey * exn_x + ex) * ncomp + c];
                        // face midpoints: (±1/2, 0) uses the b=0 column,
                        // (0, ±1/2) the a=0 row
                        let mut xp = 0.0;
                        let mut xm = 0.0;
                        let mut yp = 0.0;
                        let mut ym = 0.0;
                        for p in 0..k {
                            let cx = coeffs[(p * k) * ncomp + c];
                            let cy = coeffs[p * ncomp + c];
                            xp += cx * ep_plus[p];
                            xm += cx * ep_minus[p];
                            yp += cy * ep_plus[p];
                            ym += cy * ep_minus[p];
                        }
                        let u_w = ext[(ey * exn_x + ex - 1) * ncomp + c];
                        let u_e = ext[(ey * exn_x + ex + 1) * ncomp + c];
                        let u_s = ext[((ey - 1) * exn_x + ex) * ncomp + c];
                        let u_n = ext[((ey + 1) * exn_x + ex) * ncomp + c];
                        if cv_is_troubled(xp - u_c, u_c - xm, u_e - u_c, u_c - u_w, tvb_m, hx)
                            || cv_is_troubled(yp - u_c, u_c - ym, u_n - u_c, u_c - u_s, tvb_m, hy)
                        {
                            t = true;
                            break;
                        }
                    }
                    *flag = t;
                }
            });
    }

    fn limit(&mut self) -> Result<()> {
        let (nxcv, _nycv, ncomp) = self.dims();
        let k = self.order();
        let k2 = k * k;
        let s = self.ops.s;
        let width = 2 * s + 1;
        let g = self.ws.g;
        let exn_x = self.ws.exn_x;
        let gammas = self.params.limiter.gamma_2d;
        let eps = self.params.limiter.epsilon;
        let use_char = self.params.limiter.characteristic && ncomp > 1;
        let ext = &self.ws.ext_avg;
        let troubled = &self.ws.troubled;
        let ops = &self.ops;
        let model = self.model;

        self.ws
            .cv_coeffs
            .par_chunks_mut((nxcv + 2) * k2 * ncomp)
            .enumerate()
            .try_for_each(|(iy_e, row_out)| -> Result<()> {
                let iy = iy_e as isize - 1;
                let ey = (iy + g as isize) as usize;
                let n = iy.rem_euclid(k as isize) as usize;
                for (ix_e, out) in row_out.chunks_mut(k2 * ncomp).enumerate() {
                    if !troubled[iy_e * (nxcv + 2) + ix_e] {
                        continue;
                    }
                    let ix = ix_e as isize - 1;
                    let ex = (ix + g as isize) as usize;
                    let m = ix.rem_euclid(k as isize) as usize;
                    if use_char {
                        let u_ref = &ext[(ey * exn_x + ex) * ncomp..][..ncomp];
                        out.fill(0.0);
                        for axis in [Axis::X, Axis::Y] {
                            let basis_c = characteristic_basis(&model, u_ref, axis).map_err(
                                |err| SvError::NonPhysical {
                                    state: u_ref.to_vec(),
                                    location: format!(
                                        "characteristic basis at CV ({ix},{iy}): {err}"
                                    ),
                                },
                            )?;
                            let mut w_sten = [[0.0; 32]; MAX_COMP];
                            let mut wbuf = [0.0; MAX_COMP];
                            for dy in 0..width {
                                let ry = (ey + dy - s) * exn_x;
                                for dx in 0..width {
                                    let e = (ry + ex + dx - s) * ncomp;
                                    basis_c.to_characteristic(&ext[e..e + ncomp], &mut wbuf);
                                    for c in 0..ncomp {
                                        w_sten[c][dy * width + dx] = wbuf[c];
                                    }
                                }
                            }
                            let mut char_out = [[0.0; 32]; MAX_COMP];
                            for c in 0..ncomp {
                                sweno_limit_2d(
                                    ops,
                                    m,
                                    n,
                                    &w_sten[c][..width * width],
                                    &gammas,
                                    eps,
                                    &mut char_out[c][..k2],
                                );
                            }
                            // the two per-axis projections are averaged
                            for ab in 0..k2 {
                                for comp in 0..ncomp {
                                    let mut acc = 0.0;
                                    for c in 0..ncomp {
                                        acc += basis_c.r[comp][c] * char_out[c][ab];
                                    }
                                    out[ab * ncomp + comp] += 0.5 * acc;
                                }
                            }
                        }
                    } else {
                        let mut sten = [0.0; 32];
                        let mut cvw = [0.0; 32];
                        for c in 0..ncomp {
                            for dy in 0..width {
                                let ry = (ey + dy - s) * exn_x;
                                for dx in 0..width {
                                    sten[dy * width + dx] = ext[(ry + ex + dx - s) * ncomp + c];
                                }
                            }
                            sweno_limit_2d(
                                ops,
                                m,
                                n,
                                &sten[..width * width],
                                &gammas,
                                eps,
                                &mut cvw[..k2],
                            );
                            for ab in 0..k2 {
                                out[ab * ncomp + c] = cvw[ab];
                            }
                        }
                    }
                }
                Ok(())
            })
    }

    /// Per-axis global LF coefficients when requested.
    fn global_alphas(&self) -> Result<Option<(f64, f64)>> {
        match self.params.lf {
            LfMode::Local => Ok(None),
            LfMode::Global => {
                let (nxcv, nycv, ncomp) = self.dims();
                let g = self.ws.g;
                let exn_x = self.ws.exn_x;
                let ext = &self.ws.ext_avg;
                let model = self.model;
                let pair = (0..nycv)
                    .into_par_iter()
                    .map(|iy| -> Result<(f64, f64)> {
                        let mut ax = 0.0f64;
                        let mut ay = 0.0f64;
                        for ix in 0..nxcv {
                            let e = ((iy + g) * exn_x + ix + g) * ncomp;
                            let u = &ext[e..e + ncomp];
                            ax = ax.max(max_wavespeed(&model, u, Axis::X)?);
                            ay = ay.max(max_wavespeed(&model, u, Axis::Y)?);
                        }
                        Ok((ax, ay))
                    })
                    .try_reduce(|| (0.0, 0.0), |a, b| Ok((a.0.max(b.0), a.1.max(b.1))))?;
                Ok(Some(pair))
            }
        }
    }

    fn fluxes(&mut self) -> Result<u64> {
        let (nxcv, _nycv, ncomp) = self.dims();
        let k = self.order();
        let k2 = k * k;
        let n_q = self.ws.quad.len();
        let g = self.ws.g;
        let exn_x = self.ws.exn_x;
        let ext = &self.ws.ext_avg;
        let troubled = &self.ws.troubled;
        let cv_coeffs = &self.ws.cv_coeffs;
        let model = self.model;
        let euler = model.is_euler();
        let grid = &self.grid;
        let qp = &self.ws.qp;
        let qw = &self.ws.quad.weights;
        let ep_plus = self.ws.ep_plus;
        let ep_minus = self.ws.ep_minus;
        let global = self.global_alphas()?;

        // x faces: trace moments t_b = Σ_a c[a,b] (±1/2)^a, then per-point
        // values along the shared y-extent
        let fb_x: u64 = self
            .ws
            .flux_x
            .par_chunks_mut((nxcv + 1) * ncomp)
            .enumerate()
            .map(|(iy, row)| -> Result<u64> {
                let mut fallbacks = 0u64;
                let hy = grid.y.cv_widths[iy];
                let mut tl = [[0.0; 8]; MAX_COMP];
                let mut tr = [[0.0; 8]; MAX_COMP];
                for ixf in 0..=nxcv {
                    let l_idx = (iy + 1) * (nxcv + 2) + ixf;
                    let r_idx = l_idx + 1;
                    let riemann = ixf % k == 0 || troubled[l_idx] || troubled[r_idx];
                    let lc = &cv_coeffs[l_idx * k2 * ncomp..][..k2 * ncomp];
                    let rc = &cv_coeffs[r_idx * k2 * ncomp..][..k2 * ncomp];
                    for c in 0..ncomp {
                        for b in 0..k {
                            let mut al = 0.0;
                            let mut ar = 0.0;
                            for a in 0..k {
                                al += lc[(a * k + b) * ncomp + c] * ep_plus[a];
                                ar += rc[(a * k + b) * ncomp + c] * ep_minus[a];
                            }
                            tl[c][b] = al;
                            tr[c][b] = ar;
                        }
                    }
                    let out = &mut row[ixf * ncomp..(ixf + 1) * ncomp];
                    out.fill(0.0);
                    let mut ul = [0.0; MAX_COMP];
                    let mut ur = [0.0; MAX_COMP];
                    let mut fbuf = [0.0; MAX_COMP];
                    for gq in 0..n_q {
                        for c in 0..ncomp {
                            let mut vl = 0.0;
                            let mut vr = 0.0;
                            for b in 0..k {
                                vl += tl[c][b] * qp[gq * k + b];
                                vr += tr[c][b] * qp[gq * k + b];
                            }
                            ul[c] = vl;
                            ur[c] = vr;
                        }
                        if euler {
                            for (side, u) in [(0usize, &mut ul), (1, &mut ur)] {
                                if !is_physical(&model, &u[..]) {
                                    let e = (((iy + g) * exn_x) as isize
                                        + ixf as isize - 1 + side as isize + g as isize)
                                        as usize
                                        * ncomp;
                                    u[..ncomp].copy_from_slice(&ext[e..e + ncomp]);
                                    if !is_physical(&model, &u[..]) {
                                        return Err(face_err(
                                            &u[..], ncomp, "x", ixf, iy,
                                            grid.x.cv_edges[ixf],
                                            SvError::Singular("unrecoverable average".into()),
                                        ));
                                    }
                                    fallbacks += 1;
                                }
                            }
                        }
                        if riemann {
                            let alpha = match global {
                                Some((ax, _)) => ax,
                                None => wavespeed_physical(&model, &ul, Axis::X)
                                    .max(wavespeed_physical(&model, &ur, Axis::X)),
                            };
                            lax_friedrichs_physical(&model, &ul, &ur, Axis::X, alpha, &mut fbuf);
                        } else {
                            flux_physical(&model, &ul, Axis::X, &mut fbuf);
                        }
                        for c in 0..ncomp {
                            out[c] += qw[gq] * fbuf[c];
                        }
                    }
                    for c in 0..ncomp {
                        out[c] *= 0.5 * hy;
                    }
                }
                Ok(fallbacks)
            })
            .try_reduce(|| 0, |a, b| Ok(a + b))?;

        // y faces
        let fb_y: u64 = self
            .ws
            .flux_y
            .par_chunks_mut(nxcv * ncomp)
            .enumerate()
            .map(|(iyf, row)| -> Result<u64> {
                let mut fallbacks = 0u64;
                let mut tb = [[0.0; 8]; MAX_COMP];
                let mut tt = [[0.0; 8]; MAX_COMP];
                for ix in 0..nxcv {
                    let hx = grid.x.cv_widths[ix];
                    let b_idx = iyf * (nxcv + 2) + ix + 1;
                    let t_idx = b_idx + nxcv + 2;
                    let riemann = iyf % k == 0 || troubled[b_idx] || troubled[t_idx];
                    let bc = &cv_coeffs[b_idx * k2 * ncomp..][..k2 * ncomp];
                    let tc = &cv_coeffs[t_idx * k2 * ncomp..][..k2 * ncomp];
                    for c in 0..ncomp {
                        for a in 0..k {
                            let mut vb = 0.0;
                            let mut vt = 0.0;
                            for b in 0..k {
                                vb += bc[(a * k + b) * ncomp + c] * ep_plus[b];
                                vt += tc[(a * k + b) * ncomp + c] * ep_minus[b];
                            }
                            tb[c][a] = vb;
                            tt[c][a] = vt;
                        }
                    }
                    let out = &mut row[ix * ncomp..(ix + 1) * ncomp];
                    out.fill(0.0);
                    let mut ub = [0.0; MAX_COMP];
                    let mut ut = [0.0; MAX_COMP];
                    let mut fbuf = [0.0; MAX_COMP];
                    for gq in 0..n_q {
                        for c in 0..ncomp {
                            let mut vb = 0.0;
                            let mut vt = 0.0;
                            for a in 0..k {
                                vb += tb[c][a] * qp[gq * k + a];
                                vt += tt[c][a] * qp[gq * k + a];
                            }
                            ub[c] = vb;
                            ut[c] = vt;
                        }
                        if euler {
                            for (side, u) in [(0usize, &mut ub), (1, &mut ut)] {
                                if !is_physical(&model, &u[..]) {
                                    let e = (((iyf as isize - 1 + side as isize + g as isize)
                                        as usize)
                                        * exn_x
                                        + ix
                                        + g)
                                        * ncomp;
                                    u[..ncomp].copy_from_slice(&ext[e..e + ncomp]);
                                    if !is_physical(&model, &u[..]) {
                                        return Err(face_err(
                                            &u[..], ncomp, "y", iyf, ix,
                                            grid.y.cv_edges[iyf],
                                            SvError::Singular("unrecoverable average".into()),
                                        ));
                                    }
                                    fallbacks += 1;
                                }
                            }
                        }
                        if riemann {
                            let alpha = match global {
                                Some((_, ay)) => ay,
                                None => wavespeed_physical(&model, &ub, Axis::Y)
                                    .max(wavespeed_physical(&model, &ut, Axis::Y)),
                            };
                            lax_friedrichs_physical(&model, &ub, &ut, Axis::Y, alpha, &mut fbuf);
                        } else {
                            flux_physical(&model, &ub, Axis::Y, &mut fbuf);
                        }
                        for c in 0..ncomp {
                            out[c] += qw[gq] * fbuf[c];
                        }
                    }
                    for c in 0..ncomp {
                        out[c] *= 0.5 * hx;
                    }
                }
                Ok(fallbacks)
            })
            .try_reduce(|| 0, |a, b| Ok(a + b))?;
        Ok(fb_x + fb_y)
    }

    fn residual_stage(
        &mut self,
        field: &[f64],
        t: f64,
        limit_enabled: bool,
        out: &mut [f64],
    ) -> Result<(usize, u64)> {
        self.fill_ghosts(field, t);
        self.reconstruct();
        self.detect(limit_enabled);
        if limit_enabled && self.params.limiter.mode != LimiterMode::Off {
            self.limit()?;
        }
        let fallbacks = self.fluxes()?;

        let (nxcv, nycv, ncomp) = self.dims();
        let flux_x = &self.ws.flux_x;
        let flux_y = &self.ws.flux_y;
        let grid = &self.grid;
        out.par_chunks_mut(nxcv * ncomp)
            .enumerate()
            .for_each(|(iy, row)| {
                let hy = grid.y.cv_widths[iy];
                let fx_row = &flux_x[iy * (nxcv + 1) * ncomp..];
                let fy_lo = &flux_y[iy * nxcv * ncomp..];
                let fy_hi = &flux_y[(iy + 1) * nxcv * ncomp..];
                for ix in 0..nxcv {
                    let inv_v = 1.0 / (grid.x.cv_widths[ix] * hy);
                    for c in 0..ncomp {
                        let dfx = fx_row[(ix + 1) * ncomp + c] - fx_row[ix * ncomp + c];
                        let dfy = fy_hi[ix * ncomp + c] - fy_lo[ix * ncomp + c];
                        row[ix * ncomp + c] = -(dfx + dfy) * inv_v;
                    }
                }
            });

        let count = self
            .ws
            .troubled
            .par_chunks(nxcv + 2)
            .enumerate()
            .map(|(iy_e, row)| {
                if iy_e == 0 || iy_e > nycv {
                    0
                } else {
                    row[1..=nxcv].iter().filter(|&&b| b).count()
                }
            })
            .sum();
        Ok((count, fallbacks))
    }

    pub fn residual_of(&mut self, field: &[f64], t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; field.len()];
        self.residual_stage(field, t, true, &mut out)?;
        Ok(out)
    }

    /// Troubled flags of the interior CVs after the last residual call.
    pub fn troubled_interior(&self) -> Vec<bool> {
        let (nxcv, nycv, _) = self.dims();
        let mut out = Vec::with_capacity(nxcv * nycv);
        for iy in 0..nycv {
            let row = &self.ws.troubled[(iy + 1) * (nxcv + 2)..];
            out.extend(row[1..=nxcv].iter().copied());
        }
        out
    }

    /// Δt = CFL · min over CVs of 1/(λx/hx + λy/hy), capped by `max_dt`.
    pub fn compute_dt(&self, field: &[f64]) -> Result<f64> {
        let (nxcv, nycv, ncomp) = self.dims();
        let model = self.model;
        let grid = &self.grid;
        let min_ratio = (0..nycv)
            .into_par_iter()
            .map(|iy| -> Result<f64> {
                let hy = grid.y.cv_widths[iy];
                let mut best = f64::INFINITY;
                for ix in 0..nxcv {
                    let u = &field[(iy * nxcv + ix) * ncomp..][..ncomp];
                    let lx = max_wavespeed(&model, u, Axis::X)?;
                    let ly = max_wavespeed(&model, u, Axis::Y)?;
                    let denom = lx / grid.x.cv_widths[ix] + ly / hy;
                    if denom > 0.0 {
                        best = best.min(1.0 / denom);
                    }
                }
                Ok(best)
            })
            .try_reduce(|| f64::INFINITY, |a, b| Ok(a.min(b)))?;
        Ok((self.params.cfl * min_ratio).min(self.params.max_dt))
    }

    pub fn advance(
        &mut self,
        u0: &[f64],
        t0: f64,
        t_final: f64,
        record_troubled: bool,
    ) -> Result<(SolutionField2D, RunLog)> {
        let (nxcv, nycv, ncomp) = self.dims();
        let n_int = nxcv * nycv;
        if u0.len() != n_int * ncomp {
            return Err(SvError::InvalidConfig(format!(
                "field length {} does not match {}x{} CVs × {} components",
                u0.len(),
                nxcv,
                nycv,
                ncomp
            )));
        }
        let mut u = u0.to_vec();
        let mut t = t0;
        let mut log = RunLog {
            steps: Vec::new(),
            troubled_cells: record_troubled.then(Vec::new),
        };
        self.check_physical(&u, 0, t)?;
        let tab = self.tab.clone();
        let once = self.params.limiter.once_per_step;
        let mut step = 0usize;
        let tiny = 1e-14 * (t_final - t0).abs().max(1.0);

        while t < t_final - tiny {
            let dt_raw = self
                .compute_dt(&u)
                .map_err(|e| self.abort(step, 0, t, &u, e))?;
            let (dt, clipped) = clip_dt(dt_raw, t, t_final);
            let mut max_count = 0usize;
            let mut step_fallbacks = 0u64;
            self.ws.union_troubled.fill(false);
            let prev = u.clone();
            let result = rk_step(&tab, &mut u, dt, |l, field, out| {
                let t_stage = t + tab.stage_times[l] * dt;
                let limit_this = !once || l == 0;
                let (count, fb) = self.residual_stage(field, t_stage, limit_this, out)?;
                max_count = max_count.max(count);
                step_fallbacks += fb;
                for iy in 0..nycv {
                    let row = &self.ws.troubled[(iy + 1) * (nxcv + 2) + 1..][..nxcv];
                    let urow = &mut self.ws.union_troubled[iy * nxcv..(iy + 1) * nxcv];
                    for (um, &tr) in urow.iter_mut().zip(row) {
                        *um |= tr;
                    }
                }
                Ok(())
            });
            if let Err(e) = result {
                return Err(self.abort(step, 0, t, &prev, e));
            }
            t += dt;
            step += 1;
            if let Err(e) = self.check_physical(&u, step, t) {
                return Err(self.abort(step, 0, t, &prev, e));
            }
            log.steps.push(StepRecord {
                step,
                t,
                dt,
                clipped,
                troubled_percent: 100.0 * max_count as f64 / n_int as f64,
                trace_fallbacks: step_fallbacks,
            });
            if let Some(cells) = log.troubled_cells.as_mut() {
                let flagged: Vec<u32> = self
                    .ws
                    .union_troubled
                    .iter()
                    .enumerate()
                    .filter_map(|(i, &b)| b.then_some(i as u32))
                    .collect();
                cells.push(TroubledRecord { step, t, cells: flagged });
            }
        }
        Ok((
            SolutionField2D {
                data: u,
                n_comp: ncomp,
                t,
            },
            log,
        ))
    }

    fn check_physical(&self, u: &[f64], step: usize, t: f64) -> Result<()> {
        let (nxcv, nycv, ncomp) = self.dims();
        for iy in 0..nycv {
            for ix in 0..nxcv {
                let s = &u[(iy * nxcv + ix) * ncomp..][..ncomp];
                if s.iter().any(|v| !v.is_finite()) || !is_physical(&self.model, s) {
                    return Err(SvError::NonPhysical {
                        state: s.to_vec(),
                        location: format!(
                            "CV ({ix},{iy}) at ({:.4},{:.4}) after step {step}, t = {t:.6e}",
                            self.grid.x.cv_centers[ix], self.grid.y.cv_centers[iy]
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    fn abort(&self, step: usize, stage: usize, t: f64, last_good: &[f64], err: SvError) -> SvError {
        match err {
            e @ SvError::Aborted { .. } => e,
            e => SvError::Aborted {
                step,
                stage,
                t,
                reason: e.to_string(),
                last_good: last_good.to_vec(),
            },
        }
    }
}

fn face_err(
    state: &[f64],
    ncomp: usize,
    family: &str,
    face: usize,
    lane: usize,
    coord: f64,
    e: SvError,
) -> SvError {
    SvError::NonPhysical {
        state: state[..ncomp].to_vec(),
        location: format!("{family}-face {face}, lane {lane}, at {coord:.6} ({e})"),
    }
}
