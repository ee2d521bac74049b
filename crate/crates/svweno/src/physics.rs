//! Conservation-law models: linear advection and compressible Euler in one
//! and two space dimensions.
//!
//! States are conserved component vectors: (u) for advection,
//! (ρ, ρU, E) for 1D Euler, (ρ, ρU, ρV, E) for 2D Euler, with
//! p = (γ-1)(E - ½ρ(U²+V²)).

use crate::error::{Result, SvError};
use serde::{Deserialize, Serialize};

/// Largest component count over all models.
pub const MAX_COMP: usize = 4;

/// Fixed-size scratch state; only the first `n_comp` entries are meaningful.
pub type StateBuf = [f64; MAX_COMP];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Model {
    Advection1D { speed: f64 },
    Advection2D { speed_x: f64, speed_y: f64 },
    Euler1D { gamma: f64 },
    Euler2D { gamma: f64 },
}

impl Model {
    pub fn n_comp(&self) -> usize {
        match self {
            Model::Advection1D { .. } | Model::Advection2D { .. } => 1,
            Model::Euler1D { .. } => 3,
            Model::Euler2D { .. } => 4,
        }
    }

    pub fn is_euler(&self) -> bool {
        matches!(self, Model::Euler1D { .. } | Model::Euler2D { .. })
    }

    pub fn gamma(&self) -> f64 {
        match self {
            Model::Euler1D { gamma } | Model::Euler2D { gamma } => *gamma,
            _ => 1.4,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::Advection1D { .. } | Model::Euler1D { .. } => 1,
            Model::Advection2D { .. } | Model::Euler2D { .. } => 2,
        }
    }
}

/// Pressure of a conserved Euler state.
#[inline]
pub fn pressure(model: &Model, u: &[f64]) -> f64 {
    match model {
        Model::Euler1D { gamma } => (gamma - 1.0) * (u[2] - 0.5 * u[1] * u[1] / u[0]),
        Model::Euler2D { gamma } => {
            (gamma - 1.0) * (u[3] - 0.5 * (u[1] * u[1] + u[2] * u[2]) / u[0])
        }
        _ => 0.0,
    }
}

/// Physicality check: ρ > 0 and p > 0 for Euler; always true for advection.
#[inline]
pub fn is_physical(model: &Model, u: &[f64]) -> bool {
    match model {
        Model::Advection1D { .. } | Model::Advection2D { .. } => u[0].is_finite(),
        _ => u[0] > 0.0 && u[0].is_finite() && pressure(model, u) > 0.0,
    }
}

fn nonphysical(model: &Model, u: &[f64], what: &str) -> SvError {
    SvError::NonPhysical {
        state: u[..model.n_comp()].to_vec(),
        location: what.into(),
    }
}

/// Exact flux f(u) (axis X) or g(u) (axis Y).
pub fn analytic_flux(model: &Model, u: &[f64], axis: Axis, out: &mut [f64]) -> Result<()> {
    match model {
        Model::Advection1D { speed } => out[0] = speed * u[0],
        Model::Advection2D { speed_x, speed_y } => {
            out[0] = match axis {
                Axis::X => speed_x * u[0],
                Axis::Y => speed_y * u[0],
            }
        }
        Model::Euler1D { .. } => {
            if !is_physical(model, u) {
                return Err(nonphysical(model, u, "analytic_flux"));
            }
            let p = pressure(model, u);
            let vel = u[1] / u[0];
            out[0] = u[1];
            out[1] = u[1] * vel + p;
            out[2] = vel * (u[2] + p);
        }
        Model::Euler2D { .. } => {
            if !is_physical(model, u) {
                return Err(nonphysical(model, u, "analytic_flux"));
            }
            let p = pressure(model, u);
            let vx = u[1] / u[0];
            let vy = u[2] / u[0];
            match axis {
                Axis::X => {
                    out[0] = u[1];
                    out[1] = u[1] * vx + p;
                    out[2] = u[2] * vx;
                    out[3] = vx * (u[3] + p);
                }
                Axis::Y => {
                    out[0] = u[2];
                    out[1] = u[1] * vy;
                    out[2] = u[2] * vy + p;
                    out[3] = vy * (u[3] + p);
                }
            }
        }
    }
    Ok(())
}

/// Largest signal speed |v_axis| + a along the given axis.
pub fn max_wavespeed(model: &Model, u: &[f64], axis: Axis) -> Result<f64> {
    match model {
        Model::Advection1D { speed } => Ok(speed.abs()),
        Model::Advection2D { speed_x, speed_y } => Ok(match axis {
            Axis::X => speed_x.abs(),
            Axis::Y => speed_y.abs(),
        }),
        Model::Euler1D { gamma } => {
            if !is_physical(model, u) {
                return Err(nonphysical(model, u, "max_wavespeed"));
            }
            let a = (gamma * pressure(model, u) / u[0]).sqrt();
            Ok((u[1] / u[0]).abs() + a)
        }
        Model::Euler2D { gamma } => {
            if !is_physical(model, u) {
                return Err(nonphysical(model, u, "max_wavespeed"));
            }
            let a = (gamma * pressure(model, u) / u[0]).sqrt();
            let v = match axis {
                Axis::X => u[1] / u[0],
                Axis::Y => u[2] / u[0],
            };
            Ok(v.abs() + a)
        }
    }
}

/// Lax-Friedrichs numerical flux with the given dissipation coefficient:
/// ½(f(uL) + f(uR)) - ½α(uR - uL).
pub fn lax_friedrichs_with_alpha(
    model: &Model,
    ul: &[f64],
    ur: &[f64],
    axis: Axis,
    alpha: f64,
    out: &mut [f64],
) -> Result<()> {
    let mut fl = [0.0; MAX_COMP];
    let mut fr = [0.0; MAX_COMP];
    analytic_flux(model, ul, axis, &mut fl)?;
    analytic_flux(model, ur, axis, &mut fr)?;
    for c in 0..model.n_comp() {
        out[c] = 0.5 * (fl[c] + fr[c]) - 0.5 * alpha * (ur[c] - ul[c]);
    }
    Ok(())
}

/// Local Lax-Friedrichs flux, α = max of the two states' wave speeds.
pub fn lax_friedrichs(
    model: &Model,
    ul: &[f64],
    ur: &[f64],
    axis: Axis,
    out: &mut [f64],
) -> Result<()> {
    let alpha = max_wavespeed(model, ul, axis)?.max(max_wavespeed(model, ur, axis)?);
    lax_friedrichs_with_alpha(model, ul, ur, axis, alpha, out)
}

/// Wave speed of a state already known to be physical; skips validation.
#[inline]
pub fn wavespeed_physical(model: &Model, u: &[f64], axis: Axis) -> f64 {
    match model {
        Model::Advection1D { speed } => speed.abs(),
        Model::Advection2D { speed_x, speed_y } => match axis {
            Axis::X => speed_x.abs(),
            Axis::Y => speed_y.abs(),
        },
        Model::Euler1D { gamma } => {
            let a = (gamma * pressure(model, u) / u[0]).sqrt();
            (u[1] / u[0]).abs() + a
        }
        Model::Euler2D { gamma } => {
            let a = (gamma * pressure(model, u) / u[0]).sqrt();
            let v = match axis {
                Axis::X => u[1] / u[0],
                Axis::Y => u[2] / u[0],
            };
            v.abs() + a
        }
    }
}

/// Flux of a state already known to be physical; skips validation.
#[inline]
pub fn flux_physical(model: &Model, u: &[f64], axis: Axis, out: &mut [f64]) {
    match model {
        Model::Advection1D { speed } => out[0] = speed * u[0],
        Model::Advection2D { speed_x, speed_y } => {
            out[0] = match axis {
                Axis::X => speed_x * u[0],
                Axis::Y => speed_y * u[0],
            }
        }
        Model::Euler1D { .. } => {
            let p = pressure(model, u);
            let vel = u[1] / u[0];
            out[0] = u[1];
            out[1] = u[1] * vel + p;
            out[2] = vel * (u[2] + p);
        }
        Model::Euler2D { .. } => {
            let p = pressure(model, u);
            let vx = u[1] / u[0];
            let vy = u[2] / u[0];
            match axis {
                Axis::X => {
                    out[0] = u[1];
                    out[1] = u[1] * vx + p;
                    out[2] = u[2] * vx;
                    out[3] = vx * (u[3] + p);
                }
                Axis::Y => {
                    out[0] = u[2];
                    out[1] = u[1] * vy;
                    out[2] = u[2] * vy + p;
                    out[3] = vy * (u[3] + p);
                }
            }
        }
    }
}

/// Lax-Friedrichs combination for two physical states.
#[inline]
pub fn lax_friedrichs_physical(
    model: &Model,
    ul: &[f64],
    ur: &[f64],
    axis: Axis,
    alpha: f64,
    out: &mut [f64],
) {
    let mut fl = [0.0; MAX_COMP];
    let mut fr = [0.0; MAX_COMP];
    flux_physical(model, ul, axis, &mut fl);
    flux_physical(model, ur, axis, &mut fr);
    for c in 0..model.n_comp() {
        out[c] = 0.5 * (fl[c] + fr[c]) - 0.5 * alpha * (ur[c] - ul[c]);
    }
}

/// Primitive (ρ, U, [V,] P) to conserved. Advection is the identity.
pub fn primitive_to_conserved(model: &Model, prim: &[f64], out: &mut [f64]) {
    match model {
        Model::Advection1D { .. } | Model::Advection2D { .. } => out[0] = prim[0],
        Model::Euler1D { gamma } => {
            out[0] = prim[0];
            out[1] = prim[0] * prim[1];
            out[2] = prim[2] / (gamma - 1.0) + 0.5 * prim[0] * prim[1] * prim[1];
        }
        Model::Euler2D { gamma } => {
            out[0] = prim[0];
            out[1] = prim[0] * prim[1];
            out[2] = prim[0] * prim[2];
            out[3] = prim[3] / (gamma - 1.0) + 0.5 * prim[0] * (prim[1] * prim[1] + prim[2] * prim[2]);
        }
    }
}

/// Conserved to primitive, rejecting nonphysical states.
pub fn conserved_to_primitive(model: &Model, u: &[f64], out: &mut [f64]) -> Result<()> {
    match model {
        Model::Advection1D { .. } | Model::Advection2D { .. } => out[0] = u[0],
        Model::Euler1D { .. } => {
            if !is_physical(model, u) {
                return Err(nonphysical(model, u, "conserved_to_primitive"));
            }
            out[0] = u[0];
            out[1] = u[1] / u[0];
            out[2] = pressure(model, u);
        }
        Model::Euler2D { .. } => {
            if !is_physical(model, u) {
                return Err(nonphysical(model, u, "conserved_to_primitive"));
            }
            out[0] = u[0];
            out[1] = u[1] / u[0];
            out[2] = u[2] / u[0];
            out[3] = pressure(model, u);
        }
    }
    Ok(())
}

/// Left/right eigenvector pair of the flux Jacobian at a frozen state.
///
/// Rows of `l` are left eigenvectors, columns of `r` right eigenvectors,
/// ordered by increasing eigenvalue; l·r = identity.
#[derive(Debug, Clone)]
pub struct CharBasis {
    pub n: usize,
    pub l: [[f64; MAX_COMP]; MAX_COMP],
    pub r: [[f64; MAX_COMP]; MAX_COMP],
    pub eigenvalues: [f64; MAX_COMP],
}

impl CharBasis {
    /// w = L·u.
    #[inline]
    pub fn to_characteristic(&self, u: &[f64], w: &mut [f64]) {
        for i in 0..self.n {
            let mut acc = 0.0;
            for j in 0..self.n {
                acc += self.l[i][j] * u[j];
            }
            w[i] = acc;
        }
    }

    /// u = R·w.
    #[inline]
    pub fn from_characteristic(&self, w: &[f64], u: &mut [f64]) {
        for i in 0..self.n {
            let mut acc = 0.0;
            for j in 0..self.n {
                acc += self.r[i][j] * w[j];
            }
            u[i] = acc;
        }
    }
}

/// Eigenvector basis of ∂f/∂u (or ∂g/∂u) at `u_ref`, with the conventional
/// (1, u∓a, H∓ua) scaling of the acoustic right eigenvectors.
pub fn characteristic_basis(model: &Model, u_ref: &[f64], axis: Axis) -> Result<CharBasis> {
    let mut basis = CharBasis {
        n: model.n_comp(),
        l: [[0.0; MAX_COMP]; MAX_COMP],
        r: [[0.0; MAX_COMP]; MAX_COMP],
        eigenvalues: [0.0; MAX_COMP],
    };
    match model {
        Model::Advection1D { speed } => {
            basis.l[0][0] = 1.0;
            basis.r[0][0] = 1.0;
            basis.eigenvalues[0] = *speed;
        }
        Model::Advection2D { speed_x, speed_y } => {
            basis.l[0][0] = 1.0;
            basis.r[0][0] = 1.0;
            basis.eigenvalues[0] = match axis {
                Axis::X => *speed_x,
                Axis::Y => *speed_y,
            };
        }
        Model::Euler1D { gamma } => {
            if !is_physical(model, u_ref) {
                return Err(nonphysical(model, u_ref, "characteristic_basis"));
            }
            let rho = u_ref[0];
            let v = u_ref[1] / rho;
            let p = pressure(model, u_ref);
            let a = (gamma * p / rho).sqrt();
            let h = (u_ref[2] + p) / rho;
            let b1 = (gamma - 1.0) / (a * a);
            let b2 = 0.5 * b1 * v * v;

            basis.eigenvalues[..3].copy_from_slice(&[v - a, v, v + a]);
            basis.r = [[0.0; 4]; 4];
            // columns are right eigenvectors
            let r = [
                [1.0, 1.0, 1.0],
                [v - a, v, v + a],
                [h - v * a, 0.5 * v * v, h + v * a],
            ];
            let l = [
                [0.5 * (b2 + v / a), -0.5 * (b1 * v + 1.0 / a), 0.5 * b1],
                [1.0 - b2, b1 * v, -b1],
                [0.5 * (b2 - v / a), -0.5 * (b1 * v - 1.0 / a), 0.5 * b1],
            ];
            for i in 0..3 {
                for j in 0..3 {
                    basis.r[i][j] = r[i][j];
                    basis.l[i][j] = l[i][j];
                }
            }
        }
        Model::Euler2D { gamma } => {
            if !is_physical(model, u_ref) {
                return Err(nonphysical(model, u_ref, "characteristic_basis"));
            }
            let rho = u_ref[0];
            let vx = u_ref[1] / rho;
            let vy = u_ref[2] / rho;
            let p = pressure(model, u_ref);
            let a = (gamma * p / rho).sqrt();
            let h = (u_ref[3] + p) / rho;
            let q2 = vx * vx + vy * vy;
            let b1 = (gamma - 1.0) / (a * a);
            let b2 = 0.5 * b1 * q2;
            // vn: velocity normal to the face family, vt: tangential
            let (vn, _vt) = match axis {
                Axis::X => (vx, vy),
                Axis::Y => (vy, vx),
            };
            basis.eigenvalues[..4].copy_from_slice(&[vn - a, vn, vn, vn + a]);
            let (r, l) = match axis {
                Axis::X => (
                    [
                        [1.0, 1.0, 0.0, 1.0],
                        [vx - a, vx, 0.0, vx + a],
                        [vy, vy, 1.0, vy],
                        [h - vx * a, 0.5 * q2, vy, h + vx * a],
                    ],
                    [
                        [
                            0.5 * (b2 + vx / a),
                            -0.5 * (b1 * vx + 1.0 / a),
                            -0.5 * b1 * vy,
                            0.5 * b1,
                        ],
                        [1.0 - b2, b1 * vx, b1 * vy, -b1],
                        [-vy, 0.0, 1.0, 0.0],
                        [
                            0.5 * (b2 - vx / a),
                            -0.5 * (b1 * vx - 1.0 / a),
                            -0.5 * b1 * vy,
                            0.5 * b1,
                        ],
                    ],
                ),
                Axis::Y => (
                    [
                        [1.0, 1.0, 0.0, 1.0],
                        [vx, vx, 1.0, vx],
                        [vy - a, vy, 0.0, vy + a],
                        [h - vy * a, 0.5 * q2, vx, h + vy * a],
                    ],
                    [
                        [
                            0.5 * (b2 + vy / a),
                            -0.5 * b1 * vx,
                            -0.5 * (b1 * vy + 1.0 / a),
                            0.5 * b1,
                        ],
                        [1.0 - b2, b1 * vx, b1 * vy, -b1],
                        [-vx, 1.0, 0.0, 0.0],
                        [
                            0.5 * (b2 - vy / a),
                            -0.5 * b1 * vx,
                            -0.5 * (b1 * vy - 1.0 / a),
                            0.5 * b1,
                        ],
                    ],
                ),
            };
            basis.r = r;
            basis.l = l;
        }
    }
    Ok(basis)
}
