//! Semi-discrete residual assembly and the time loop, in one and two space
//! dimensions.
//!
//! Per RK stage the pipeline is: fill ghost CVs, reconstruct one polynomial
//! per SV, restrict it to every CV, flag troubled CVs, replace their
//! polynomials by the SWENO blend, then integrate fluxes over CV faces.
//! Faces classify as `riemann` (SV boundaries and faces touching limited
//! CVs: two-state Lax-Friedrichs flux) or `continuous` (single-sided
//! analytic flux).

pub mod one_d;
pub mod two_d;

use crate::error::Result;
use crate::limiter::LimiterParams;
use crate::physics::StateBuf;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

pub use one_d::{SolutionField1D, Solver1D};
pub use two_d::{SolutionField2D, Solver2D};

/// Ghost state generator for `Boundary::Prescribed`: (x, y, t) →
/// conserved state; `None` falls back to reflective filling at that
/// location (the double Mach bottom wall mixes the two).
pub type PrescribedFn = Arc<dyn Fn(f64, f64, f64) -> Option<StateBuf> + Send + Sync>;

#[derive(Clone)]
pub enum Boundary {
    /// Ghost SVs wrap around from the opposite side.
    Periodic,
    /// Mirrored CV averages with the normal momentum negated.
    Reflective,
    /// Nearest interior CV copied outward.
    Outflow,
    /// Time-dependent ghost states from a function of position.
    Prescribed(PrescribedFn),
}

impl fmt::Debug for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Periodic => write!(f, "Periodic"),
            Boundary::Reflective => write!(f, "Reflective"),
            Boundary::Outflow => write!(f, "Outflow"),
            Boundary::Prescribed(_) => write!(f, "Prescribed(..)"),
        }
    }
}

/// Choice of the Lax-Friedrichs dissipation coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LfMode {
    /// α = max wave speed of the two face states.
    Local,
    /// α = max wave speed over all CV averages, recomputed per stage.
    Global,
}

#[derive(Debug, Clone)]
pub struct SolverParams {
    pub limiter: LimiterParams,
    pub cfl: f64,
    pub lf: LfMode,
    /// Cap on Δt; binds when wave speeds vanish (e.g. zero-speed advection).
    pub max_dt: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            limiter: LimiterParams::default(),
            cfl: 0.5,
            lf: LfMode::Local,
            max_dt: f64::INFINITY,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        self.limiter.validate()?;
        if !(self.cfl > 0.0) {
            return Err(crate::SvError::InvalidConfig("CFL must be positive".into()));
        }
        if !(self.max_dt > 0.0) {
            return Err(crate::SvError::InvalidConfig("max_dt must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    /// Time reached after this step.
    pub t: f64,
    pub dt: f64,
    /// Whether Δt was clipped to land on t_final.
    pub clipped: bool,
    /// 100 · flagged/total, maximum over the stages of this step.
    pub troubled_percent: f64,
    /// Face-trace evaluations that fell back to the CV average because the
    /// polynomial trace left the physical state space (Euler only); summed
    /// over the step's stages.
    #[serde(default)]
    pub trace_fallbacks: u64,
}

/// Flagged CVs of one step (union over its stages).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TroubledRecord {
    pub step: usize,
    pub t: f64,
    pub cells: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RunLog {
    pub steps: Vec<StepRecord>,
    /// Present when per-cell recording was requested.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub troubled_cells: Option<Vec<TroubledRecord>>,
}

impl RunLog {
    /// Troubled percentage of the final step (max over its stages).
    pub fn final_step_percent(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.troubled_percent)
    }

    /// Mean per-step troubled percentage over the whole run.
    pub fn mean_percent(&self) -> f64 {
        if self.steps.is_empty() {
            return 0.0;
        }
        self.steps.iter().map(|s| s.troubled_percent).sum::<f64>() / self.steps.len() as f64
    }

    /// Line-delimited JSON, one record per step.
    pub fn write_jsonl<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        for s in &self.steps {
            serde_json::to_writer(&mut w, s)?;
            writeln!(w)?;
        }
        Ok(())
    }
}
