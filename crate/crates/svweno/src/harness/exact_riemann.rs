//! Exact solver for the 1D Euler Riemann problem: Newton iteration on the
//! pressure function, then self-similar sampling in x/t. Reference curves
//! for the shock-tube benchmarks.

use crate::error::{Result, SvError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimState {
    pub rho: f64,
    pub vel: f64,
    pub p: f64,
}

impl PrimState {
    pub fn sound_speed(&self, gamma: f64) -> f64 {
        (gamma * self.p / self.rho).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct ExactRiemann {
    pub gamma: f64,
    pub left: PrimState,
    pub right: PrimState,
    pub p_star: f64,
    pub u_star: f64,
    a_l: f64,
    a_r: f64,
}

/// Pressure function of one side and its derivative: the velocity change
/// across the wave as a function of the star pressure.
fn pressure_fn(p: f64, s: &PrimState, a: f64, gamma: f64) -> (f64, f64) {
    if p > s.p {
        // shock branch (Rankine-Hugoniot)
        let ak = 2.0 / ((gamma + 1.0) * s.rho);
        let bk = (gamma - 1.0) / (gamma + 1.0) * s.p;
        let root = (ak / (p + bk)).sqrt();
        let f = (p - s.p) * root;
        let df = root * (1.0 - 0.5 * (p - s.p) / (p + bk));
        (f, df)
    } else {
        // rarefaction branch (isentrope)
        let ex = (gamma - 1.0) / (2.0 * gamma);
        let pr = p / s.p;
        let f = 2.0 * a / (gamma - 1.0) * (pr.powf(ex) - 1.0);
        let df = 1.0 / (s.rho * a) * pr.powf(-(gamma + 1.0) / (2.0 * gamma));
        (f, df)
    }
}

impl ExactRiemann {
    pub fn new(left: PrimState, right: PrimState, gamma: f64) -> Result<Self> {
        for s in [&left, &right] {
            if !(s.rho > 0.0 && s.p > 0.0) {
                return Err(SvError::NonPhysical {
                    state: vec![s.rho, s.vel, s.p],
                    location: "Riemann data".into(),
                });
            }
        }
        let a_l = left.sound_speed(gamma);
        let a_r = right.sound_speed(gamma);
        if 2.0 * (a_l + a_r) / (gamma - 1.0) <= right.vel - left.vel {
            return Err(SvError::Vacuum);
        }
        // primitive-variable guess, clipped positive
        let p_guess = (0.5 * (left.p + right.p)
            - 0.125 * (right.vel - left.vel) * (left.rho + right.rho) * (a_l + a_r))
            .max(1e-8 * (left.p + right.p));
        let mut p = p_guess;
        let mut converged = false;
        for _ in 0..200 {
            let (fl, dfl) = pressure_fn(p, &left, a_l, gamma);
            let (fr, dfr) = pressure_fn(p, &right, a_r, gamma);
            let f = fl + fr + right.vel - left.vel;
            let step = f / (dfl + dfr);
            let p_new = (p - step).max(1e-14 * p);
            let change = 2.0 * (p_new - p).abs() / (p_new + p);
            p = p_new;
            if change < 1e-12 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(SvError::Singular("Riemann pressure iteration".into()));
        }
        let (fl, _) = pressure_fn(p, &left, a_l, gamma);
        let (fr, _) = pressure_fn(p, &right, a_r, gamma);
        let u_star = 0.5 * (left.vel + right.vel) + 0.5 * (fr - fl);
        Ok(ExactRiemann {
            gamma,
            left,
            right,
            p_star: p,
            u_star,
            a_l,
            a_r,
        })
    }

    /// Self-similar solution at ξ = x/t.
    pub fn sample(&self, xi: f64) -> PrimState {
        let g = self.gamma;
        let gm = (g - 1.0) / (g + 1.0);
        if xi <= self.u_star {
            // left of the contact
            let s = &self.left;
            if self.p_star > s.p {
                let sl = s.vel
                    - self.a_l * ((g + 1.0) / (2.0 * g) * self.p_star / s.p + (g - 1.0) / (2.0 * g)).sqrt();
                if xi <= sl {
                    *s
                } else {
                    let pr = self.p_star / s.p;
                    PrimState {
                        rho: s.rho * ((pr + gm) / (gm * pr + 1.0)),
                        vel: self.u_star,
                        p: self.p_star,
                    }
                }
            } else {
                let head = s.vel - self.a_l;
                let a_star = self.a_l * (self.p_star / s.p).powf((g - 1.0) / (2.0 * g));
                let tail = self.u_star - a_star;
                if xi <= head {
                    *s
                } else if xi >= tail {
                    PrimState {
                        rho: s.rho * (self.p_star / s.p).powf(1.0 / g),
                        vel: self.u_star,
                        p: self.p_star,
                    }
                } else {
                    let factor = 2.0 / (g + 1.0) + gm / self.a_l * (s.vel - xi);
                    PrimState {
                        rho: s.rho * factor.powf(2.0 / (g - 1.0)),
                        vel: 2.0 / (g + 1.0) * (self.a_l + (g - 1.0) / 2.0 * s.vel + xi),
                        p: s.p * factor.powf(2.0 * g / (g - 1.0)),
                    }
                }
            }
        } else {
            let s = &self.right;
            if self.p_star > s.p {
                let sr = s.vel
                    + self.a_r * ((g + 1.0) / (2.0 * g) * self.p_star / s.p + (g - 1.0) / (2.0 * g)).sqrt();
                if xi >= sr {
                    *s
                } else {
                    let pr = self.p_star / s.p;
                    PrimState {
                        rho: s.rho * ((pr + gm) / (gm * pr + 1.0)),
                        vel: self.u_star,
                        p: self.p_star,
                    }
                }
            } else {
                let head = s.vel + self.a_r;
                let a_star = self.a_r * (self.p_star / s.p).powf((g - 1.0) / (2.0 * g));
                let tail = self.u_star + a_star;
                if xi >= head {
                    *s
                } else if xi <= tail {
                    PrimState {
                        rho: s.rho * (self.p_star / s.p).powf(1.0 / g),
                        vel: self.u_star,
                        p: self.p_star,
                    }
                } else {
                    let factor = 2.0 / (g + 1.0) - gm / self.a_r * (s.vel - xi);
                    PrimState {
                        rho: s.rho * factor.powf(2.0 / (g - 1.0)),
                        vel: 2.0 / (g + 1.0) * (-self.a_r + (g - 1.0) / 2.0 * s.vel + xi),
                        p: s.p * factor.powf(2.0 * g / (g - 1.0)),
                    }
                }
            }
        }
    }
}
