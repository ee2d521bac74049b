//! Benchmark harness: problem presets, error norms, convergence studies,
//! and data-file output.

pub mod exact_riemann;
pub mod output;

use crate::error::{Result, SvError};
use crate::limiter::{LimiterMode, LimiterParams};
use crate::mesh::{build_grid_1d, build_grid_2d, gauss_rule, SvGrid1D, SvGrid2D};
use crate::physics::{primitive_to_conserved, Model, StateBuf, MAX_COMP};
use crate::solver::{
    Boundary, LfMode, RunLog, SolutionField1D, SolutionField2D, Solver1D, Solver2D, SolverParams,
};
use exact_riemann::{ExactRiemann, PrimState};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// The paper's benchmark problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Sin1d,
    EulerSin1d,
    Sod1d,
    Lax1d,
    ShuOsher,
    Blast1d,
    Riemann2d1,
    Riemann2d2,
    DoubleMach,
}

impl Preset {
    pub fn all() -> &'static [Preset] {
        &[
            Preset::Sin1d,
            Preset::EulerSin1d,
            Preset::Sod1d,
            Preset::Lax1d,
            Preset::ShuOsher,
            Preset::Blast1d,
            Preset::Riemann2d1,
            Preset::Riemann2d2,
            Preset::DoubleMach,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Sin1d => "sin1d",
            Preset::EulerSin1d => "eulersin1d",
            Preset::Sod1d => "sod1d",
            Preset::Lax1d => "lax1d",
            Preset::ShuOsher => "shuosher",
            Preset::Blast1d => "blast1d",
            Preset::Riemann2d1 => "riemann2d1",
            Preset::Riemann2d2 => "riemann2d2",
            Preset::DoubleMach => "doublemach",
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            Preset::Sin1d => "linear advection of sin(pi x) on [-1,1], periodic, t=1",
            Preset::EulerSin1d => "1D Euler density sine wave on [0,2], periodic, t=2",
            Preset::Sod1d => "Sod shock tube on [-5,5], t=2",
            Preset::Lax1d => "Lax shock tube on [-5,5], t=1.3",
            Preset::ShuOsher => "Mach-3 shock / density-sine interaction on [-5,5], t=1.8",
            Preset::Blast1d => "Woodward-Colella interacting blast waves on [0,1], t=0.038",
            Preset::Riemann2d1 => "2D Riemann problem I on the unit square, t=0.25",
            Preset::Riemann2d2 => "2D Riemann problem II on the unit square, t=0.2",
            Preset::DoubleMach => "double Mach reflection on [0,4]x[0,1], t=0.2",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = SvError;
    fn from_str(s: &str) -> Result<Self> {
        Preset::all()
            .iter()
            .copied()
            .find(|p| p.name() == s)
            .ok_or_else(|| SvError::UnknownPreset(s.into()))
    }
}

/// Fully serializable run configuration; all defaults come from the paper's
/// experiment section (CFL 0.5, epsilon 1e-6, gamma 1.4).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub preset: Preset,
    pub order: usize,
    pub n_sv: usize,
    pub n_sv_y: Option<usize>,
    /// Overrides the preset's final time when set.
    pub t_final: Option<f64>,
    pub tvb_m: f64,
    pub epsilon: f64,
    pub cfl: f64,
    pub limiter_mode: LimiterMode,
    /// Characteristic-variable limiting; `None` means on for Euler models.
    pub characteristic: Option<bool>,
    pub lf: LfMode,
    /// Detect/limit only on the first stage of each step.
    pub once_per_step: bool,
}

impl ProblemConfig {
    pub fn for_preset(preset: Preset) -> ProblemConfig {
        let (n_sv, n_sv_y) = match preset {
            Preset::ShuOsher => (180, None),
            Preset::Blast1d => (400, None),
            Preset::Riemann2d1 | Preset::Riemann2d2 => (100, Some(100)),
            Preset::DoubleMach => (960, Some(240)),
            _ => (100, None),
        };
        ProblemConfig {
            preset,
            order: 3,
            n_sv,
            n_sv_y,
            t_final: None,
            tvb_m: 0.01,
            epsilon: 1e-6,
            cfl: 0.5,
            limiter_mode: LimiterMode::CvSweno,
            characteristic: None,
            lf: LfMode::Local,
            once_per_step: false,
        }
    }

    fn solver_params(&self, model: &Model) -> SolverParams {
        SolverParams {
            limiter: LimiterParams {
                tvb_m: self.tvb_m,
                epsilon: self.epsilon,
                mode: self.limiter_mode,
                characteristic: self.characteristic.unwrap_or(model.is_euler()),
                once_per_step: self.once_per_step,
                ..Default::default()
            },
            cfl: self.cfl,
            lf: self.lf,
            max_dt: f64::INFINITY,
        }
    }
}

/// Paper configuration for a named preset.
pub fn preset(name: &str) -> Result<ProblemConfig> {
    Ok(ProblemConfig::for_preset(name.parse()?))
}

type StateFn = Arc<dyn Fn(f64, f64, f64) -> StateBuf + Send + Sync>;

/// Physics, domain, boundary and reference data of one preset.
pub struct PresetDef {
    pub model: Model,
    pub domain: (f64, f64, f64, f64),
    pub t_final: f64,
    pub boundaries: Vec<Boundary>,
    /// Pointwise initial condition in conserved variables.
    pub initial: StateFn,
    /// Pointwise exact solution, when one exists in closed form.
    pub exact: Option<StateFn>,
}

fn cons_of(model: &Model, prim: &[f64]) -> StateBuf {
    let mut out = [0.0; MAX_COMP];
    primitive_to_conserved(model, prim, &mut out);
    out
}

pub fn preset_def(p: Preset) -> Result<PresetDef> {
    use std::f64::consts::PI;
    let def = match p {
        Preset::Sin1d => {
            let model = Model::Advection1D { speed: 1.0 };
            PresetDef {
                model,
                domain: (-1.0, 1.0, 0.0, 0.0),
                t_final: 1.0,
                boundaries: vec![Boundary::Periodic, Boundary::Periodic],
                initial: Arc::new(|x, _, _| {
                    let mut s = [0.0; MAX_COMP];
                    s[0] = (PI * x).sin();
                    s
                }),
                exact: Some(Arc::new(|x, _, t| {
                    let mut s = [0.0; MAX_COMP];
                    s[0] = (PI * (x - t)).sin();
                    s
                })),
            }
        }
        Preset::EulerSin1d => {
            let model = Model::Euler1D { gamma: 1.4 };
            PresetDef {
                model,
                domain: (0.0, 2.0, 0.0, 0.0),
                t_final: 2.0,
                boundaries: vec![Boundary::Periodic, Boundary::Periodic],
                initial: Arc::new(move |x, _, _| {
                    cons_of(&model, &[1.0 + 0.2 * (PI * x).sin(), 0.7, 1.0])
                }),
                exact: Some(Arc::new(move |x, _, t| {
                    cons_of(&model, &[1.0 + 0.2 * (PI * (x - 0.7 * t)).sin(), 0.7, 1.0])
                })),
            }
        }
        Preset::Sod1d => riemann_preset(
            PrimState { rho: 1.0, vel: 0.0, p: 1.0 },
            PrimState { rho: 0.125, vel: 0.0, p: 0.1 },
            2.0,
        )?,
        Preset::Lax1d => riemann_preset(
            PrimState { rho: 0.445, vel: 0.698, p: 3.528 },
            PrimState { rho: 0.5, vel: 0.0, p: 0.571 },
            1.3,
        )?,
        Preset::ShuOsher => {
            let model = Model::Euler1D { gamma: 1.4 };
            PresetDef {
                model,
                domain: (-5.0, 5.0, 0.0, 0.0),
                t_final: 1.8,
                boundaries: vec![Boundary::Outflow, Boundary::Outflow],
                initial: Arc::new(move |x, _, _| {
                    if x < -4.0 {
                        cons_of(&model, &[3.857134, 2.629369, 10.33333])
                    } else {
                        cons_of(&model, &[1.0 + 0.2 * (5.0 * x).sin(), 0.0, 1.0])
                    }
                }),
                exact: None,
            }
        }
        Preset::Blast1d => {
            let model = Model::Euler1D { gamma: 1.4 };
            PresetDef {
                model,
                domain: (0.0, 1.0, 0.0, 0.0),
                t_final: 0.038,
                boundaries: vec![Boundary::Reflective, Boundary::Reflective],
                initial: Arc::new(move |x, _, _| {
                    let p = if x < 0.1 {
                        1000.0
                    } else if x < 0.9 {
                        0.01
                    } else {
                        100.0
                    };
                    cons_of(&model, &[1.0, 0.0, p])
                }),
                exact: None,
            }
        }
        Preset::Riemann2d1 => quadrant_preset(
            [
                [0.5313, 0.0, 0.0, 0.4],
                [1.0, 0.7276, 0.0, 1.0],
                [0.8, 0.0, 0.0, 1.0],
                [1.0, 0.0, 0.7276, 1.0],
            ],
            0.25,
        ),
        Preset::Riemann2d2 => quadrant_preset(
            [
                [1.0, 0.1, -0.3, 1.0],
                [0.5197, -0.6259, -0.3, 0.4],
                [0.8, 0.1, -0.3, 0.4],
                [0.5313, 0.1, 0.4276, 0.4],
            ],
            0.2,
        ),
        Preset::DoubleMach => {
            let model = Model::Euler2D { gamma: 1.4 };
            let u_post: StateBuf = [8.0, 57.1597, -33.0012, 563.544];
            let u_pre: StateBuf = [1.4, 0.0, 0.0, 2.5];
            // shock front y = sqrt(3)(x - 1/6) - 20t
            let shock_y = |x: f64, t: f64| 3.0f64.sqrt() * (x - 1.0 / 6.0) - 20.0 * t;
            let x_top = |t: f64| 1.0 / 6.0 + (1.0 + 20.0 * t) / 3.0f64.sqrt();
            PresetDef {
                model,
                domain: (0.0, 4.0, 0.0, 1.0),
                t_final: 0.2,
                boundaries: vec![
                    Boundary::Prescribed(Arc::new(move |_x, _y, _t| Some(u_post))),
                    Boundary::Prescribed(Arc::new(move |_x, _y, _t| Some(u_pre))),
                    // post-shock inflow left of the shock foot, wall right of it
                    Boundary::Prescribed(Arc::new(move |x, _y, _t| {
                        (x < 1.0 / 6.0).then_some(u_post)
                    })),
                    Boundary::Prescribed(Arc::new(move |x, _y, t| {
                        Some(if x < x_top(t) { u_post } else { u_pre })
                    })),
                ],
                initial: Arc::new(move |x, y, t| {
                    if y > shock_y(x, t) {
                        u_post
                    } else {
                        u_pre
                    }
                }),
                exact: None,
            }
        }
    };
    Ok(def)
}

fn riemann_preset(left: PrimState, right: PrimState, t_final: f64) -> Result<PresetDef> {
    let model = Model::Euler1D { gamma: 1.4 };
    let solver = ExactRiemann::new(left, right, 1.4)?;
    Ok(PresetDef {
        model,
        domain: (-5.0, 5.0, 0.0, 0.0),
        t_final,
        boundaries: vec![Boundary::Outflow, Boundary::Outflow],
        initial: Arc::new(move |x, _, _| {
            let s = if x < 0.0 { left } else { right };
            cons_of(&model, &[s.rho, s.vel, s.p])
        }),
        exact: Some(Arc::new(move |x, _, t| {
            let s = if t > 0.0 {
                solver.sample(x / t)
            } else if x < 0.0 {
                left
            } else {
                right
            };
            cons_of(&model, &[s.rho, s.vel, s.p])
        })),
    })
}

fn quadrant_preset(prim: [[f64; 4]; 4], t_final: f64) -> PresetDef {
    let model = Model::Euler2D { gamma: 1.4 };
    PresetDef {
        model,
        domain: (0.0, 1.0, 0.0, 1.0),
        t_final,
        boundaries: vec![
            Boundary::Outflow,
            Boundary::Outflow,
            Boundary::Outflow,
            Boundary::Outflow,
        ],
        initial: Arc::new(move |x, y, _| {
            let q = match (x > 0.5, y > 0.5) {
                (true, true) => 0,
                (false, true) => 1,
                (false, false) => 2,
                (true, false) => 3,
            };
            cons_of(&model, &prim[q])
        }),
        exact: None,
    }
}

/// CV averages of a pointwise state function at time `t` on a 1D grid,
/// by per-CV Gauss quadrature two points above the face rule.
pub fn cv_averages_1d(grid: &SvGrid1D, ncomp: usize, f: &StateFn, t: f64) -> Vec<f64> {
    let rule = gauss_rule((grid.order + 2).min(6)).expect("rule");
    let mut out = vec![0.0; grid.n_cv() * ncomp];
    for cv in 0..grid.n_cv() {
        for c in 0..ncomp {
            out[cv * ncomp + c] = rule.integrate(grid.cv_edges[cv], grid.cv_edges[cv + 1], |x| {
                f(x, 0.0, t)[c]
            }) / grid.cv_widths[cv];
        }
    }
    out
}

/// 2D analogue with tensor quadrature.
pub fn cv_averages_2d(grid: &SvGrid2D, ncomp: usize, f: &StateFn, t: f64) -> Vec<f64> {
    let rule = gauss_rule((grid.order() + 2).min(6)).expect("rule");
    let (nx, ny) = (grid.x.n_cv(), grid.y.n_cv());
    let mut out = vec![0.0; nx * ny * ncomp];
    for iy in 0..ny {
        for ix in 0..nx {
            let area = grid.x.cv_widths[ix] * grid.y.cv_widths[iy];
            for c in 0..ncomp {
                out[(iy * nx + ix) * ncomp + c] =
                    rule.integrate(grid.x.cv_edges[ix], grid.x.cv_edges[ix + 1], |x| {
                        rule.integrate(grid.y.cv_edges[iy], grid.y.cv_edges[iy + 1], |y| {
                            f(x, y, t)[c]
                        })
                    }) / area;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// Mean / RMS / max of the pointwise CV-average errors.
pub fn error_norms(numerical: &[f64], exact: &[f64]) -> Result<Norms> {
    if numerical.len() != exact.len() || numerical.is_empty() {
        return Err(SvError::InvalidConfig(
            "error norms need matching nonempty fields".into(),
        ));
    }
    let n = numerical.len() as f64;
    let mut l1 = 0.0;
    let mut l2 = 0.0;
    let mut linf = 0.0f64;
    for (a, b) in numerical.iter().zip(exact) {
        let e = (a - b).abs();
        l1 += e;
        l2 += e * e;
        linf = linf.max(e);
    }
    Ok(Norms {
        l1: l1 / n,
        l2: (l2 / n).sqrt(),
        linf,
    })
}

/// One component of an interleaved field.
pub fn component(data: &[f64], ncomp: usize, c: usize) -> Vec<f64> {
    data.chunks(ncomp).map(|s| s[c]).collect()
}

pub struct Run1D {
    pub config: ProblemConfig,
    pub grid: SvGrid1D,
    pub model: Model,
    pub field: SolutionField1D,
    pub log: RunLog,
    /// Exact CV averages at the final time, when available.
    pub exact: Option<Vec<f64>>,
    /// Density norms against `exact`.
    pub norms: Option<Norms>,
}

pub struct Run2D {
    pub config: ProblemConfig,
    pub grid: SvGrid2D,
    pub model: Model,
    pub field: SolutionField2D,
    pub log: RunLog,
}

pub enum RunOutput {
    OneD(Box<Run1D>),
    TwoD(Box<Run2D>),
}

/// Run one configured problem to its final time.
pub fn run(config: &ProblemConfig, record_troubled: bool) -> Result<RunOutput> {
    let def = preset_def(config.preset)?;
    let ncomp = def.model.n_comp();
    let t_final = config.t_final.unwrap_or(def.t_final);
    let params = config.solver_params(&def.model);
    match def.model.dim() {
        1 => {
            let grid = build_grid_1d(def.domain.0, def.domain.1, config.n_sv, config.order)?;
            let mut solver = Solver1D::new(
                grid.clone(),
                def.model,
                [def.boundaries[0].clone(), def.boundaries[1].clone()],
                params,
            )?;
            let u0 = cv_averages_1d(&grid, ncomp, &def.initial, 0.0);
            let (field, log) = solver.advance(&u0, 0.0, t_final, record_troubled)?;
            let exact = def
                .exact
                .as_ref()
                .map(|f| cv_averages_1d(&grid, ncomp, f, t_final));
            let norms = exact
                .as_ref()
                .map(|e| error_norms(&component(&field.data, ncomp, 0), &component(e, ncomp, 0)))
                .transpose()?;
            Ok(RunOutput::OneD(Box::new(Run1D {
                config: config.clone(),
                grid,
                model: def.model,
                field,
                log,
                exact,
                norms,
            })))
        }
        _ => {
            let n_sv_y = config.n_sv_y.unwrap_or(config.n_sv);
            let grid = build_grid_2d(
                def.domain.0,
                def.domain.1,
                def.domain.2,
                def.domain.3,
                config.n_sv,
                n_sv_y,
                config.order,
            )?;
            let mut solver = Solver2D::new(
                grid.clone(),
                def.model,
                [
                    def.boundaries[0].clone(),
                    def.boundaries[1].clone(),
                    def.boundaries[2].clone(),
                    def.boundaries[3].clone(),
                ],
                params,
            )?;
            let u0 = cv_averages_2d(&grid, ncomp, &def.initial, 0.0);
            let (field, log) = solver.advance(&u0, 0.0, t_final, record_troubled)?;
            Ok(RunOutput::TwoD(Box::new(Run2D {
                config: config.clone(),
                grid,
                model: def.model,
                field,
                log,
            })))
        }
    }
}

/// Convergence order between two resolutions; doubling steps use log2, the
/// rest the generalized log-ratio (flagged).
pub fn convergence_rate(n_coarse: usize, e_coarse: f64, n_fine: usize, e_fine: f64) -> (f64, bool) {
    if n_fine == 2 * n_coarse {
        ((e_coarse / e_fine).log2(), false)
    } else {
        (
            (e_coarse / e_fine).ln() / (n_fine as f64 / n_coarse as f64).ln(),
            true,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n_sv: usize,
    pub l1: f64,
    pub r1: Option<f64>,
    pub l2: f64,
    pub r2: Option<f64>,
    pub linf: f64,
    pub rinf: Option<f64>,
    pub troubled_percent: f64,
    /// Rate computed from a non-doubling step.
    pub generalized: bool,
    /// Set when the row's run aborted.
    pub failed: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub preset: Preset,
    pub order: usize,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n_sv,l1,r1,l2,r2,linf,rinf,percent,generalized,failed")?;
        for r in &self.rows {
            let fmt_rate = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:.4}"));
            writeln!(
                w,
                "{},{:.6e},{},{:.6e},{},{:.6e},{},{:.4},{},{}",
                r.n_sv,
                r.l1,
                fmt_rate(r.r1),
                r.l2,
                fmt_rate(r.r2),
                r.linf,
                fmt_rate(r.rinf),
                r.troubled_percent,
                r.generalized,
                r.failed.as_deref().unwrap_or("")
            )?;
        }
        Ok(())
    }

    pub fn write_text<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "{} order {}:\n{:>6} {:>12} {:>8} {:>12} {:>8} {:>12} {:>8} {:>8}",
            self.preset, self.order, "N", "l1", "R1", "l2", "R2", "linf", "Rinf", "percent"
        )?;
        for r in &self.rows {
            let fr = |x: Option<f64>| x.map_or("---".to_string(), |v| format!("{v:.2}"));
            let star = if r.generalized { "*" } else { " " };
            writeln!(
                w,
                "{:>6} {:>12.4e} {:>7}{star} {:>12.4e} {:>7}{star} {:>12.4e} {:>7}{star} {:>8.2}",
                r.n_sv,
                r.l1,
                fr(r.r1),
                r.l2,
                fr(r.r2),
                r.linf,
                fr(r.rinf),
                r.troubled_percent
            )?;
        }
        writeln!(w, "(* rate from a non-doubling step)")?;
        Ok(())
    }
}

/// Run the configured smooth problem over a resolution sequence and tabulate
/// errors and rates. Rows that abort are marked failed and skipped in rates.
pub fn run_convergence_study(base: &ProblemConfig, n_list: &[usize]) -> Result<ConvergenceReport> {
    let def = preset_def(base.preset)?;
    if def.exact.is_none() {
        return Err(SvError::InvalidConfig(format!(
            "preset {} has no exact solution for a convergence study",
            base.preset
        )));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    let mut prev: Option<(usize, Norms)> = None;
    for &n in n_list {
        let mut cfg = base.clone();
        cfg.n_sv = n;
        cfg.n_sv_y = base.n_sv_y.map(|_| n);
        match run(&cfg, false) {
            Ok(RunOutput::OneD(out)) => {
                let norms = out.norms.expect("exact preset");
                let (r1, r2, rinf, generalized) = match prev {
                    Some((np, pn)) => {
                        let (r1, g) = convergence_rate(np, pn.l1, n, norms.l1);
                        let (r2, _) = convergence_rate(np, pn.l2, n, norms.l2);
                        let (rf, _) = convergence_rate(np, pn.linf, n, norms.linf);
                        (Some(r1), Some(r2), Some(rf), g)
                    }
                    None => (None, None, None, false),
                };
                rows.push(ConvergenceRow {
                    n_sv: n,
                    l1: norms.l1,
                    r1,
                    l2: norms.l2,
                    r2,
                    linf: norms.linf,
                    rinf,
                    troubled_percent: out.log.final_step_percent(),
                    generalized,
                    failed: None,
                });
                prev = Some((n, norms));
            }
            Ok(RunOutput::TwoD(_)) => {
                return Err(SvError::InvalidConfig(
                    "convergence studies are wired for 1D presets".into(),
                ));
            }
            Err(e) => {
                rows.push(ConvergenceRow {
                    n_sv: n,
                    l1: f64::NAN,
                    r1: None,
                    l2: f64::NAN,
                    r2: None,
                    linf: f64::NAN,
                    rinf: None,
                    troubled_percent: f64::NAN,
                    generalized: false,
                    failed: Some(e.to_string()),
                });
                prev = None;
            }
        }
    }
    Ok(ConvergenceReport {
        preset: base.preset,
        order: base.order,
        rows,
    })
}

/// Conservative projection of a piecewise-constant fine field onto coarse
/// CVs by interval overlap; used to compare runs across resolutions.
pub fn project_piecewise_constant(
    fine_edges: &[f64],
    fine_vals: &[f64],
    coarse_edges: &[f64],
) -> Vec<f64> {
    let mut out = vec![0.0; coarse_edges.len() - 1];
    let mut j = 0usize;
    for (i, o) in out.iter_mut().enumerate() {
        let (lo, hi) = (coarse_edges[i], coarse_edges[i + 1]);
        while j + 1 < fine_edges.len() - 1 && fine_edges[j + 1] <= lo {
            j += 1;
        }
        let mut jj = j;
        let mut acc = 0.0;
        while jj < fine_vals.len() && fine_edges[jj] < hi {
            let a = fine_edges[jj].max(lo);
            let b = fine_edges[jj + 1].min(hi);
            if b > a {
                acc += fine_vals[jj] * (b - a);
            }
            jj += 1;
        }
        *o = acc / (hi - lo);
    }
    out
}
