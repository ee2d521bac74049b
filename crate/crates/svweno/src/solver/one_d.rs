//! One-dimensional solver.

use super::{Boundary, LfMode, RunLog, SolverParams, StepRecord, TroubledRecord};
use crate::error::{Result, SvError};
use crate::integrator::{clip_dt, rk_step, tableau, RkTableau};
use crate::limiter::{cv_is_troubled, sweno_limit_1d, LimiterMode};
use crate::mesh::SvGrid1D;
use crate::physics::{
    characteristic_basis, flux_physical, is_physical, lax_friedrichs_physical, max_wavespeed,
    wavespeed_physical, Axis, Model, MAX_COMP,
};
use crate::reconstruction::{eval_1d, BasisSet, LimiterOps1D};

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField1D {
    /// CV averages, `data[cv * n_comp + c]`.
    pub data: Vec<f64>,
    pub n_comp: usize,
    pub t: f64,
}

struct Ws1 {
    /// Ghost depth in CVs per side: k + ⌊k/2⌋.
    g: usize,
    /// Extended averages, (ncv + 2g) · ncomp.
    ext_avg: Vec<f64>,
    /// SV-frame coefficients, (n_sv + 2) · k · ncomp.
    sv_coeffs: Vec<f64>,
    /// CV-frame coefficients for interior CVs plus one ghost CV per side,
    /// (ncv + 2) · k · ncomp; index (cv + 1).
    cv_coeffs: Vec<f64>,
    /// Troubled flags over the same range as `cv_coeffs`.
    troubled: Vec<bool>,
    /// Per-face flux, (ncv + 1) · ncomp.
    flux: Vec<f64>,
    /// Riemann/continuous classification of each face.
    riemann: Vec<bool>,
    /// Union of interior troubled flags over the stages of one step.
    union_troubled: Vec<bool>,
}

pub struct Solver1D {
    pub grid: SvGrid1D,
    pub model: Model,
    pub boundary: [Boundary; 2],
    pub params: SolverParams,
    basis: BasisSet,
    ops: LimiterOps1D,
    tab: RkTableau,
    ws: Ws1,
}

impl Solver1D {
    pub fn new(
        grid: SvGrid1D,
        model: Model,
        boundary: [Boundary; 2],
        params: SolverParams,
    ) -> Result<Self> {
        if model.dim() != 1 {
            return Err(SvError::InvalidConfig(
                "1D solver requires a 1D model".into(),
            ));
        }
        params.validate()?;
        let periodic = [&boundary[0], &boundary[1]]
            .iter()
            .map(|b| matches!(b, Boundary::Periodic))
            .collect::<Vec<_>>();
        if periodic[0] != periodic[1] {
            return Err(SvError::InvalidConfig(
                "periodic boundaries must be paired".into(),
            ));
        }
        let k = grid.order;
        let g = k + k / 2;
        if !periodic[0] && grid.n_cv() < g {
            return Err(SvError::InvalidConfig(
                "need at least two SVs with non-periodic boundaries".into(),
            ));
        }
        let basis = BasisSet::new(k)?;
        let ops = LimiterOps1D::new(&basis)?;
        let tab = tableau(k)?;
        let ncv = grid.n_cv();
        let ncomp = model.n_comp();
        let ws = Ws1 {
            g,
            ext_avg: vec![0.0; (ncv + 2 * g) * ncomp],
            sv_coeffs: vec![0.0; (grid.n_sv + 2) * k * ncomp],
            cv_coeffs: vec![0.0; (ncv + 2) * k * ncomp],
            troubled: vec![false; ncv + 2],
            flux: vec![0.0; (ncv + 1) * ncomp],
            riemann: vec![false; ncv + 1],
            union_troubled: vec![false; ncv],
        };
        Ok(Solver1D {
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
        self.grid.order
    }

    fn ncv(&self) -> usize {
        self.grid.n_cv()
    }

    fn ncomp(&self) -> usize {
        self.model.n_comp()
    }

    /// Extended averages: interior copy plus ghost filling per side.
    fn fill_ghosts(&mut self, field: &[f64], t: f64) {
        let ncv = self.ncv();
        let ncomp = self.ncomp();
        let g = self.ws.g as isize;
        let ext = &mut self.ws.ext_avg;
        ext[(g as usize * ncomp)..(g as usize + ncv) * ncomp].copy_from_slice(field);

        let momentum = match self.model {
            Model::Euler1D { .. } => Some(1usize),
            _ => None,
        };
        for side in 0..2 {
            for gi in 1..=g {
                let cv: isize = if side == 0 { -gi } else { ncv as isize - 1 + gi };
                let dst = ((cv + g) as usize) * ncomp;
                let mirror: isize = if side == 0 {
                    gi - 1
                } else {
                    2 * ncv as isize - 1 - cv
                };
                match &self.boundary[side] {
                    Boundary::Periodic => {
                        let src = cv.rem_euclid(ncv as isize) as usize * ncomp;
                        let (a, b) = (src + g as usize * ncomp, dst);
                        for c in 0..ncomp {
                            ext[b + c] = ext[a + c];
                        }
                    }
                    Boundary::Reflective => {
                        let src = (mirror as usize + g as usize) * ncomp;
                        for c in 0..ncomp {
                            ext[dst + c] = ext[src + c];
                        }
                        if let Some(mc) = momentum {
                            ext[dst + mc] = -ext[dst + mc];
                        }
                    }
                    Boundary::Outflow => {
                        let near = if side == 0 { 0 } else { ncv - 1 };
                        let src = (near + g as usize) * ncomp;
                        for c in 0..ncomp {
                            ext[dst + c] = ext[src + c];
                        }
                    }
                    Boundary::Prescribed(f) => {
                        let x = self.grid.cv_center_extended(cv);
                        if let Some(state) = f(x, 0.0, t) {
                            ext[dst..dst + ncomp].copy_from_slice(&state[..ncomp]);
                        } else {
                            let src = (mirror as usize + g as usize) * ncomp;
                            for c in 0..ncomp {
                                ext[dst + c] = ext[src + c];
                            }
                            if let Some(mc) = momentum {
                                ext[dst + mc] = -ext[dst + mc];
                            }
                        }
                    }
                }
            }
        }
    }

    /// SV solves for the interior SVs plus one ghost SV per side, then
    /// CV-frame restrictions for every interior CV plus one ghost CV per
    /// side.
    fn reconstruct(&mut self) {
        let k = self.grid.order;
        let ncomp = self.ncomp();
        let g = self.ws.g;
        let ncv = self.ncv();
        let basis = &self.basis;
        let ext = &self.ws.ext_avg;

        self.ws
            .sv_coeffs
            .chunks_mut(k * ncomp)
            .enumerate()
            .for_each(|(sv_ext, out)| {
                // sv_ext 0 is the left ghost SV
                let first_cv = sv_ext as isize * k as isize - k as isize;
                let mut avgs = [0.0; 8];
                for c in 0..ncomp {
                    for m in 0..k {
                        let e = (first_cv + m as isize + g as isize) as usize;
                        avgs[m] = ext[e * ncomp + c];
                    }
                    let mut w = [0.0; 8];
                    basis.reconstruct_1d(&avgs[..k], &mut w[..k]);
                    for l in 0..k {
                        out[l * ncomp + c] = w[l];
                    }
                }
            });

        let sv_coeffs = &self.ws.sv_coeffs;
        self.ws
            .cv_coeffs
            .chunks_mut(k * ncomp)
            .enumerate()
            .for_each(|(r, out)| {
                let cv = r as isize - 1;
                let sv_ext = (cv.div_euclid(k as isize) + 1) as usize;
                let m = cv.rem_euclid(k as isize) as usize;
                let sv = &sv_coeffs[sv_ext * k * ncomp..(sv_ext + 1) * k * ncomp];
                let mut w = [0.0; 8];
                let mut cvw = [0.0; 8];
                for c in 0..ncomp {
                    for l in 0..k {
                        w[l] = sv[l * ncomp + c];
                    }
                    basis.restrict_1d(&w[..k], m, &mut cvw[..k]);
                    for a in 0..k {
                        out[a * ncomp + c] = cvw[a];
                    }
                }
            });

        let _ = ncv;
    }

    /// TVB detection over interior CVs plus one ghost CV per side. A CV is
    /// troubled when any conserved component triggers the modified minmod.
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
        let k = self.grid.order;
        let ncomp = self.ncomp();
        let g = self.ws.g;
        let tvb_m = self.params.limiter.tvb_m;
        let ext = &self.ws.ext_avg;
        let cv_coeffs = &self.ws.cv_coeffs;
        // The TVB threshold must scale with the SV width: with the CV width
        // the end CVs of the Gauss-Lobatto pattern would flag smooth extrema
        // at any M below π²/3 regardless of resolution.
        let h = self.grid.sv_width;

        self.ws
            .troubled
            .iter_mut()
            .enumerate()
            .for_each(|(r, flag)| {
                let cv = r as isize - 1;
                let e = (cv + g as isize) as usize;
                let coeffs = &cv_coeffs[r * k * ncomp..(r + 1) * k * ncomp];
                let mut c_buf = [0.0; 8];
                let mut t = false;
                for c in 0..ncomp {
                    for a in 0..k {
                        c_buf[a] = coeffs[a * ncomp + c];
                    }
                    let u_c = ext[e * ncomp + c];
                    let u_l = ext[(e - 1) * ncomp + c];
                    let u_r = ext[(e + 1) * ncomp + c];
                    let delta_plus = eval_1d(&c_buf[..k], 0.5) - u_c;
                    let delta_minus = u_c - eval_1d(&c_buf[..k], -0.5);
                    if cv_is_troubled(delta_plus, delta_minus, u_r - u_c, u_c - u_l, tvb_m, h) {
                        t = true;
                        break;
                    }
                }
                *flag = t;
            });
    }

    /// SWENO limiting of every troubled CV, optionally in characteristic
    /// variables frozen at the CV's own average.
    fn limit(&mut self) -> Result<()> {
        let k = self.grid.order;
        let ncomp = self.ncomp();
        let s = self.ops.s;
        let g = self.ws.g;
        let gammas = self.params.limiter.gamma_1d;
        let eps = self.params.limiter.epsilon;
        let use_char = self.params.limiter.characteristic && ncomp > 1;
        let ext = &self.ws.ext_avg;
        let troubled = &self.ws.troubled;
        let ops = &self.ops;
        let model = self.model;

        self.ws
            .cv_coeffs
            .chunks_mut(k * ncomp)
            .enumerate()
            .try_for_each(|(r, out)| -> Result<()> {
                if !troubled[r] {
                    return Ok(());
                }
                let cv = r as isize - 1;
                let m = cv.rem_euclid(k as isize) as usize;
                let e = (cv + g as isize) as usize;
                let width = 2 * s + 1;
                if use_char {
                    let u_ref = &ext[e * ncomp..(e + 1) * ncomp];
                    let basis_c = characteristic_basis(&model, u_ref, Axis::X).map_err(|err| {
                        SvError::NonPhysical {
                            state: u_ref.to_vec(),
                            location: format!("characteristic basis at CV {cv}: {err}"),
                        }
                    })?;
                    // project the stencil, limit each characteristic field
                    let mut w_sten = [[0.0; 8]; MAX_COMP]; // [comp][stencil]
                    let mut wbuf = [0.0; MAX_COMP];
                    for d in 0..width {
                        let ee = e + d - s;
                        basis_c.to_characteristic(&ext[ee * ncomp..(ee + 1) * ncomp], &mut wbuf);
                        for c in 0..ncomp {
                            w_sten[c][d] = wbuf[c];
                        }
                    }
                    let mut char_out = [[0.0; 8]; MAX_COMP];
                    for c in 0..ncomp {
                        sweno_limit_1d(ops, m, &w_sten[c][..width], &gammas, eps, &mut char_out[c][..k]);
                    }
                    // back to conserved variables coefficient-wise
                    for a in 0..k {
                        for comp in 0..ncomp {
                            let mut acc = 0.0;
                            for c in 0..ncomp {
                                acc += basis_c.r[comp][c] * char_out[c][a];
                            }
                            out[a * ncomp + comp] = acc;
                        }
                    }
                } else {
                    let mut sten = [0.0; 8];
                    let mut cvw = [0.0; 8];
                    for c in 0..ncomp {
                        for d in 0..width {
                            sten[d] = ext[(e + d - s) * ncomp + c];
                        }
                        sweno_limit_1d(ops, m, &sten[..width], &gammas, eps, &mut cvw[..k]);
                        for a in 0..k {
                            out[a * ncomp + c] = cvw[a];
                        }
                    }
                }
                Ok(())
            })
    }

    /// Classify faces and compute per-face fluxes. Returns the number of
    /// trace evaluations that fell back to the CV average because the
    /// polynomial trace left the physical state space.
    fn fluxes(&mut self) -> Result<u64> {
        let k = self.grid.order;
        let ncv = self.ncv();
        let ncomp = self.ncomp();
        let g = self.ws.g;
        let ext = &self.ws.ext_avg;
        let troubled = &self.ws.troubled;
        let cv_coeffs = &self.ws.cv_coeffs;
        let model = self.model;
        let grid = &self.grid;
        let euler = model.is_euler();

        for (f, r) in self.ws.riemann.iter_mut().enumerate() {
            *r = f % k == 0 || troubled[f] || troubled[f + 1];
        }
        let riemann = &self.ws.riemann;

        let global_alpha = match self.params.lf {
            LfMode::Local => None,
            LfMode::Global => {
                let ext = &self.ws.ext_avg;
                let g = self.ws.g;
                let mut alpha = 0.0f64;
                for cv in 0..ncv {
                    let e = (cv + g) * ncomp;
                    alpha = alpha.max(max_wavespeed(&model, &ext[e..e + ncomp], Axis::X)?);
                }
                Some(alpha)
            }
        };

        let mut fallbacks = 0u64;
        self.ws
            .flux
            .chunks_mut(ncomp)
            .enumerate()
            .try_for_each(|(f, out)| -> Result<()> {
                let (left_r, right_r) = (f, f + 1);
                let lc = &cv_coeffs[left_r * k * ncomp..(left_r + 1) * k * ncomp];
                let rc = &cv_coeffs[right_r * k * ncomp..(right_r + 1) * k * ncomp];
                let mut ul = [0.0; MAX_COMP];
                let mut ur = [0.0; MAX_COMP];
                let mut cbuf = [0.0; 8];
                for c in 0..ncomp {
                    for a in 0..k {
                        cbuf[a] = lc[a * ncomp + c];
                    }
                    ul[c] = eval_1d(&cbuf[..k], 0.5);
                    for a in 0..k {
                        cbuf[a] = rc[a * ncomp + c];
                    }
                    ur[c] = eval_1d(&cbuf[..k], -0.5);
                }
                // fail-safe: a polynomial trace outside the physical state
                // space reverts to the (physical) CV average of its side; a
                // nonphysical average is unrecoverable and aborts here
                if euler {
                    for (side, u) in [(0usize, &mut ul), (1, &mut ur)] {
                        if !is_physical(&model, &u[..]) {
                            let e = (f as isize - 1 + side as isize + g as isize) as usize * ncomp;
                            u[..ncomp].copy_from_slice(&ext[e..e + ncomp]);
                            if !is_physical(&model, &u[..]) {
                                return Err(SvError::NonPhysical {
                                    state: u[..ncomp].to_vec(),
                                    location: format!(
                                        "face {f} at x = {:.6}",
                                        grid.cv_edges[f.min(ncv)]
                                    ),
                                });
                            }
                            fallbacks += 1;
                        }
                    }
                }
                if riemann[f] {
                    let alpha = match global_alpha {
                        Some(a) => a,
                        None => wavespeed_physical(&model, &ul, Axis::X)
                            .max(wavespeed_physical(&model, &ur, Axis::X)),
                    };
                    lax_friedrichs_physical(&model, &ul, &ur, Axis::X, alpha, out);
                } else {
                    flux_physical(&model, &ul, Axis::X, out);
                }
                Ok(())
            })?;
        Ok(fallbacks)
    }

    /// Full right-hand side dū/dt for one stage solution. Returns the
    /// number of troubled interior CVs and of trace fallbacks.
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

        let ncomp = self.ncomp();
        let flux = &self.ws.flux;
        let widths = &self.grid.cv_widths;
        out.chunks_mut(ncomp).enumerate().for_each(|(cv, o)| {
            let inv_h = 1.0 / widths[cv];
            for c in 0..ncomp {
                o[c] = -(flux[(cv + 1) * ncomp + c] - flux[cv * ncomp + c]) * inv_h;
            }
        });
        let troubled = self.ws.troubled[1..=self.ncv()].iter().filter(|&&b| b).count();
        Ok((troubled, fallbacks))
    }

    /// Public residual hook (single evaluation with limiting active).
    pub fn residual_of(&mut self, field: &[f64], t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; field.len()];
        self.residual_stage(field, t, true, &mut out)?;
        Ok(out)
    }

    /// Left/right trace states at every face after reconstruction,
    /// detection and limiting; for tests and output sampling.
    pub fn face_traces(&mut self, field: &[f64], t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        self.fill_ghosts(field, t);
        self.reconstruct();
        self.detect(true);
        if self.params.limiter.mode != LimiterMode::Off {
            self.limit()?;
        }
        let k = self.grid.order;
        let ncomp = self.ncomp();
        let ncv = self.ncv();
        let mut left = vec![0.0; (ncv + 1) * ncomp];
        let mut right = vec![0.0; (ncv + 1) * ncomp];
        let mut cbuf = [0.0; 8];
        for f in 0..=ncv {
            let lc = &self.ws.cv_coeffs[f * k * ncomp..(f + 1) * k * ncomp];
            let rc = &self.ws.cv_coeffs[(f + 1) * k * ncomp..(f + 2) * k * ncomp];
            for c in 0..ncomp {
                for a in 0..k {
                    cbuf[a] = lc[a * ncomp + c];
                }
                left[f * ncomp + c] = eval_1d(&cbuf[..k], 0.5);
                for a in 0..k {
                    cbuf[a] = rc[a * ncomp + c];
                }
                right[f * ncomp + c] = eval_1d(&cbuf[..k], -0.5);
            }
        }
        Ok((left, right))
    }

    /// Face classification of the last residual evaluation.
    pub fn face_classification(&self) -> &[bool] {
        &self.ws.riemann
    }

    /// Troubled flags (interior CVs) of the last residual evaluation.
    pub fn troubled_interior(&self) -> Vec<bool> {
        self.ws.troubled[1..=self.ncv()].to_vec()
    }

    /// CFL time step: Δt = CFL · min_cv h/λ, capped by `max_dt`.
    pub fn compute_dt(&self, field: &[f64]) -> Result<f64> {
        let ncomp = self.ncomp();
        let mut min_ratio = f64::INFINITY;
        for cv in 0..self.ncv() {
            let u = &field[cv * ncomp..(cv + 1) * ncomp];
            let lam = max_wavespeed(&self.model, u, Axis::X)?;
            if lam > 0.0 {
                min_ratio = min_ratio.min(self.grid.cv_widths[cv] / lam);
            }
        }
        Ok((self.params.cfl * min_ratio).min(self.params.max_dt))
    }

    /// Run from `t0` to `t_final`; returns the final field and the run log.
    pub fn advance(
        &mut self,
        u0: &[f64],
        t0: f64,
        t_final: f64,
        record_troubled: bool,
    ) -> Result<(SolutionField1D, RunLog)> {
        let ncomp = self.ncomp();
        let ncv = self.ncv();
        if u0.len() != ncv * ncomp {
            return Err(SvError::InvalidConfig(format!(
                "field length {} does not match {} CVs × {} components",
                u0.len(),
                ncv,
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
            let dt_raw = self.compute_dt(&u).map_err(|e| self.abort(step, 0, t, &u, e))?;
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
                for (um, &tr) in self
                    .ws
                    .union_troubled
                    .iter_mut()
                    .zip(&self.ws.troubled[1..=ncv])
                {
                    *um |= tr;
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
                troubled_percent: 100.0 * max_count as f64 / ncv as f64,
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
            SolutionField1D {
                data: u,
                n_comp: ncomp,
                t,
            },
            log,
        ))
    }

    fn check_physical(&self, u: &[f64], step: usize, t: f64) -> Result<()> {
        let ncomp = self.ncomp();
        for cv in 0..self.ncv() {
            let s = &u[cv * ncomp..(cv + 1) * ncomp];
            if s.iter().any(|v| !v.is_finite()) || !is_physical(&self.model, s) {
                return Err(SvError::NonPhysical {
                    state: s.to_vec(),
                    location: format!(
                        "CV {cv} (x = {:.6}) after step {step}, t = {t:.6e}",
                        self.grid.cv_centers[cv]
                    ),
                });
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limiter::LimiterParams;
    use crate::mesh::build_grid_1d;
    use crate::physics::primitive_to_conserved;
    use approx::assert_abs_diff_eq;

    fn advection_solver(n: usize, k: usize, params: SolverParams) -> Solver1D {
        let grid = build_grid_1d(-1.0, 1.0, n, k).unwrap();
        Solver1D::new(
            grid,
            Model::Advection1D { speed: 1.0 },
            [Boundary::Periodic, Boundary::Periodic],
            params,
        )
        .unwrap()
    }

    /// CV averages of a smooth function, by per-CV Gauss quadrature.
    fn cv_averages(grid: &SvGrid1D, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let rule = crate::mesh::gauss_rule(6).unwrap();
        (0..grid.n_cv())
            .map(|cv| {
                rule.integrate(grid.cv_edges[cv], grid.cv_edges[cv + 1], &f) / grid.cv_widths[cv]
            })
            .collect()
    }

    #[test]
    fn constant_field_has_zero_residual() {
        for k in 2..=5 {
            let mut s = advection_solver(8, k, SolverParams::default());
            let u = vec![0.7; s.ncv()];
            let r = s.residual_of(&u, 0.0).unwrap();
            for v in r {
                assert_abs_diff_eq!(v, 0.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn linear_field_advects_exactly() {
        // u = x on interior CVs away from the seam: du/dt = -u_x = -1
        let mut s = advection_solver(10, 3, SolverParams {
            limiter: LimiterParams { mode: LimiterMode::Off, ..Default::default() },
            ..Default::default()
        });
        let grid = s.grid.clone();
        let u = cv_averages(&grid, |x| x);
        let r = s.residual_of(&u, 0.0).unwrap();
        // skip CVs of the two seam-adjacent SVs where periodic wrap breaks linearity
        for cv in 3..(s.ncv() - 3) {
            assert_abs_diff_eq!(r[cv], -1.0, epsilon = 1e-11);
        }
    }

    #[test]
    fn residual_telescopes_to_zero_total() {
        // periodic: Σ V·residual = 0 exactly up to rounding
        let mut s = advection_solver(12, 4, SolverParams::default());
        let grid = s.grid.clone();
        let u = cv_averages(&grid, |x| (std::f64::consts::PI * x).sin().powi(3) + 0.2);
        let r = s.residual_of(&u, 0.0).unwrap();
        let total: f64 = (0..s.ncv()).map(|cv| grid.cv_widths[cv] * r[cv]).sum();
        assert_abs_diff_eq!(total, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn periodic_ghosts_wrap_whole_svs() {
        let mut s = advection_solver(5, 3, SolverParams::default());
        let u: Vec<f64> = (0..15).map(|i| i as f64).collect();
        s.fill_ghosts(&u, 0.0);
        let g = s.ws.g;
        // ghost CV -1 is CV 14, ghost CV -2 is CV 13, ...
        for gi in 1..=g {
            assert_eq!(s.ws.ext_avg[g - gi], u[15 - gi]);
        }
        // right side wraps to the start
        for gi in 0..g {
            assert_eq!(s.ws.ext_avg[g + 15 + gi], u[gi]);
        }
    }

    #[test]
    fn reflective_ghosts_negate_momentum() {
        let grid = build_grid_1d(0.0, 1.0, 4, 3).unwrap();
        let model = Model::Euler1D { gamma: 1.4 };
        let mut s = Solver1D::new(
            grid,
            model,
            [Boundary::Reflective, Boundary::Reflective],
            SolverParams::default(),
        )
        .unwrap();
        let mut u = vec![0.0; 12 * 3];
        for cv in 0..12 {
            u[cv * 3] = 1.0;
            u[cv * 3 + 1] = 0.3;
            u[cv * 3 + 2] = 2.6;
        }
        s.fill_ghosts(&u, 0.0);
        let g = s.ws.g;
        // ghost CV -1 mirrors CV 0
        let dst = (g - 1) * 3;
        assert_eq!(s.ws.ext_avg[dst], 1.0);
        assert_eq!(s.ws.ext_avg[dst + 1], -0.3);
        assert_eq!(s.ws.ext_avg[dst + 2], 2.6);
    }

    #[test]
    fn sod_face_traces_at_split() {
        let grid = build_grid_1d(-5.0, 5.0, 100, 3).unwrap();
        let model = Model::Euler1D { gamma: 1.4 };
        let mut s = Solver1D::new(
            grid.clone(),
            model,
            [Boundary::Outflow, Boundary::Outflow],
            SolverParams::default(),
        )
        .unwrap();
        let mut u = vec![0.0; grid.n_cv() * 3];
        for cv in 0..grid.n_cv() {
            let prim = if grid.cv_centers[cv] < 0.0 {
                [1.0, 0.0, 1.0]
            } else {
                [0.125, 0.0, 0.1]
            };
            let mut cons = [0.0; MAX_COMP];
            primitive_to_conserved(&model, &prim, &mut cons);
            u[cv * 3..cv * 3 + 3].copy_from_slice(&cons[..3]);
        }
        let (left, right) = s.face_traces(&u, 0.0).unwrap();
        // x = 0 is the face between CV 149 and CV 150 (SV boundary)
        let f = 150;
        assert_abs_diff_eq!(grid.cv_edges[f], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(left[f * 3], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(left[f * 3 + 2], 2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(right[f * 3], 0.125, epsilon = 1e-12);
        assert_abs_diff_eq!(right[f * 3 + 2], 0.25, epsilon = 1e-12);
    }

    #[test]
    fn interior_faces_continuous_without_limiting() {
        // smooth data, limiter off: only SV-boundary faces are riemann and
        // interior left/right traces agree to rounding
        let mut s = advection_solver(6, 4, SolverParams {
            limiter: LimiterParams { mode: LimiterMode::Off, ..Default::default() },
            ..Default::default()
        });
        let grid = s.grid.clone();
        let u = cv_averages(&grid, |x| (std::f64::consts::PI * x).sin());
        let (left, right) = s.face_traces(&u, 0.0).unwrap();
        for f in 0..=s.ncv() {
            if f % 4 != 0 {
                assert_abs_diff_eq!(left[f], right[f], epsilon = 1e-12);
            }
        }
        let _ = s.residual_of(&u, 0.0).unwrap();
        for (f, &r) in s.face_classification().iter().enumerate() {
            assert_eq!(r, f % 4 == 0);
        }
    }

    #[test]
    fn face_classification_counts() {
        // troubled CVs extend the riemann set by exactly their non-SV faces
        let mut s = advection_solver(10, 3, SolverParams {
            limiter: LimiterParams { tvb_m: 0.0, ..Default::default() },
            ..Default::default()
        });
        let grid = s.grid.clone();
        // a step at x=0 flags cells near the jump
        let u = cv_averages(&grid, |x| if x < 0.0 { 1.0 } else { 0.0 });
        let _ = s.residual_of(&u, 0.0).unwrap();
        let troubled = s.troubled_interior();
        let ncv = troubled.len();
        let k = 3;
        let mut expect = 0;
        for f in 0..=ncv {
            let tl = if f > 0 { troubled[f - 1] } else { s.ws.troubled[0] };
            let tr = if f < ncv { troubled[f] } else { s.ws.troubled[ncv + 1] };
            if f % k == 0 || tl || tr {
                expect += 1;
            }
        }
        let got = s.face_classification().iter().filter(|&&b| b).count();
        assert_eq!(got, expect);
        assert!(troubled.iter().any(|&b| b), "step data must flag cells");
    }

    #[test]
    fn advection_step_preserves_mean() {
        let mut s = advection_solver(10, 3, SolverParams::default());
        let grid = s.grid.clone();
        let u0 = cv_averages(&grid, |x| (std::f64::consts::PI * x).sin() + 2.0);
        let total0: f64 = (0..u0.len()).map(|cv| grid.cv_widths[cv] * u0[cv]).sum();
        let (field, log) = s.advance(&u0, 0.0, 0.26, false).unwrap();
        let total1: f64 = (0..u0.len())
            .map(|cv| grid.cv_widths[cv] * field.data[cv])
            .sum();
        assert_abs_diff_eq!(total1, total0, epsilon = 1e-12 * total0.abs());
        assert!(!log.steps.is_empty());
        assert!(log.steps.last().unwrap().clipped);
        assert_abs_diff_eq!(field.t, 0.26, epsilon = 1e-14);
    }

    #[test]
    fn zero_speed_advection_is_identity() {
        let grid = build_grid_1d(-1.0, 1.0, 5, 3).unwrap();
        let mut s = Solver1D::new(
            grid.clone(),
            Model::Advection1D { speed: 0.0 },
            [Boundary::Periodic, Boundary::Periodic],
            SolverParams::default(),
        )
        .unwrap();
        let u0 = cv_averages(&grid, |x| x * x);
        let (field, log) = s.advance(&u0, 0.0, 3.0, false).unwrap();
        assert_eq!(log.steps.len(), 1); // single clipped step
        for (a, b) in field.data.iter().zip(&u0) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn uniform_euler_state_is_stationary() {
        let grid = build_grid_1d(0.0, 1.0, 8, 4).unwrap();
        let model = Model::Euler1D { gamma: 1.4 };
        let mut s = Solver1D::new(
            grid,
            model,
            [Boundary::Periodic, Boundary::Periodic],
            SolverParams::default(),
        )
        .unwrap();
        let mut cons = [0.0; MAX_COMP];
        primitive_to_conserved(&model, &[1.0, 0.0, 1.0], &mut cons);
        let u0: Vec<f64> = (0..32).flat_map(|_| cons[..3].to_vec()).collect();
        let (field, _) = s.advance(&u0, 0.0, 0.5, false).unwrap();
        for (a, b) in field.data.iter().zip(&u0) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn advection_order_with_limiter_off() {
        // l1 rates on the advection sine approach k with M large
        for k in [3usize, 4] {
            let mut errs = Vec::new();
            for n in [20usize, 40] {
                let params = SolverParams {
                    limiter: LimiterParams { tvb_m: 2.0, ..Default::default() },
                    ..Default::default()
                };
                let mut s = advection_solver(n, k, params);
                let grid = s.grid.clone();
                let u0 = cv_averages(&grid, |x| (std::f64::consts::PI * x).sin());
                let (field, _) = s.advance(&u0, 0.0, 1.0, false).unwrap();
                let exact = cv_averages(&grid, |x| (std::f64::consts::PI * (x - 1.0)).sin());
                let err: f64 = field
                    .data
                    .iter()
                    .zip(&exact)
                    .map(|(a, b)| (a - b).abs())
                    .sum::<f64>()
                    / grid.n_cv() as f64;
                errs.push(err);
            }
            let rate = (errs[0] / errs[1]).log2();
            assert!(
                (rate - k as f64).abs() < 0.4,
                "k={k}: errors {errs:?}, rate {rate}"
            );
        }
    }

    #[test]
    fn characteristic_flag_is_identity_for_scalar() {
        let mk = |characteristic: bool| SolverParams {
            limiter: LimiterParams {
                tvb_m: 0.0,
                characteristic,
                ..Default::default()
            },
            ..Default::default()
        };
        let grid = build_grid_1d(-1.0, 1.0, 10, 3).unwrap();
        let u0 = cv_averages(&grid, |x| if x < 0.0 { 1.0 } else { 0.0 });
        let mut s1 = advection_solver(10, 3, mk(true));
        let mut s2 = advection_solver(10, 3, mk(false));
        let (f1, _) = s1.advance(&u0, 0.0, 0.2, false).unwrap();
        let (f2, _) = s2.advance(&u0, 0.0, 0.2, false).unwrap();
        assert_eq!(f1.data, f2.data);
    }

    #[test]
    fn abort_carries_last_good_state() {
        // a wildly nonphysical IC must abort, not panic
        let grid = build_grid_1d(0.0, 1.0, 4, 3).unwrap();
        let model = Model::Euler1D { gamma: 1.4 };
        let mut s = Solver1D::new(
            grid,
            model,
            [Boundary::Outflow, Boundary::Outflow],
            SolverParams::default(),
        )
        .unwrap();
        let u0 = vec![-1.0; 12 * 3];
        match s.advance(&u0, 0.0, 1.0, false) {
            Err(SvError::NonPhysical { .. }) | Err(SvError::Aborted { .. }) => {}
            other => panic!("expected abort, got {other:?}"),
        }
    }
}
