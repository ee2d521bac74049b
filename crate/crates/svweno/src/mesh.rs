//! Two-level SV/CV structured partitions and Gauss quadrature data.
//!
//! Every spectral volume of a k-th order scheme is split into k (1D) or k²
//! (2D) control volumes whose edges sit at Gauss-Lobatto points,
//!
//! x_{i,m+1/2} = x_{i-1/2} + (h_i/2)(1 - cos(mπ/k)),  m = 0..k.

use crate::error::{Result, SvError};

/// Supported scheme orders.
pub const MIN_ORDER: usize = 2;
pub const MAX_ORDER: usize = 5;

/// Gauss-Legendre rule on the reference interval [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// ∫_a^b f(x) dx by mapping the reference rule onto [a, b].
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

/// Gauss-Legendre nodes and weights, exact for polynomials of degree 2n_q - 1.
pub fn gauss_rule(n_q: usize) -> Result<QuadratureRule> {
    let (nodes, weights): (Vec<f64>, Vec<f64>) = match n_q {
        1 => (vec![0.0], vec![2.0]),
        2 => {
            let x = 1.0 / 3.0f64.sqrt();
            (vec![-x, x], vec![1.0, 1.0])
        }
        3 => {
            let x = (3.0f64 / 5.0).sqrt();
            (vec![-x, 0.0, x], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        4 => {
            let d = (6.0f64 / 5.0).sqrt();
            let x0 = ((3.0 - 2.0 * d) / 7.0).sqrt();
            let x1 = ((3.0 + 2.0 * d) / 7.0).sqrt();
            let w0 = (18.0 + 30.0f64.sqrt()) / 36.0;
            let w1 = (18.0 - 30.0f64.sqrt()) / 36.0;
            (vec![-x1, -x0, x0, x1], vec![w1, w0, w0, w1])
        }
        5 => {
            let d = (10.0f64 / 7.0).sqrt();
            let x1 = (5.0 - 2.0 * d).sqrt() / 3.0;
            let x2 = (5.0 + 2.0 * d).sqrt() / 3.0;
            let w1 = (322.0 + 13.0 * 70.0f64.sqrt()) / 900.0;
            let w2 = (322.0 - 13.0 * 70.0f64.sqrt()) / 900.0;
            (
                vec![-x2, -x1, 0.0, x1, x2],
                vec![w2, w1, 128.0 / 225.0, w1, w2],
            )
        }
        6 => (
            vec![
                -0.932469514203152028,
                -0.661209386466264514,
                -0.238619186083196909,
                0.238619186083196909,
                0.661209386466264514,
                0.932469514203152028,
            ],
            vec![
                0.171324492379170345,
                0.360761573048138608,
                0.467913934572691047,
                0.467913934572691047,
                0.360761573048138608,
                0.171324492379170345,
            ],
        ),
        _ => return Err(SvError::UnsupportedQuadrature(n_q)),
    };
    Ok(QuadratureRule { nodes, weights })
}

/// Gauss-Lobatto CV edge pattern on the unit SV [0, 1]: (1 - cos(mπ/k))/2.
pub fn lobatto_pattern(k: usize) -> Vec<f64> {
    (0..=k)
        .map(|m| 0.5 * (1.0 - (m as f64 * std::f64::consts::PI / k as f64).cos()))
        .collect()
}

/// 1D partition into `n_sv` uniform spectral volumes of `order` CVs each.
#[derive(Debug, Clone, PartialEq)]
pub struct SvGrid1D {
    pub a: f64,
    pub b: f64,
    pub n_sv: usize,
    pub order: usize,
    pub sv_width: f64,
    /// All n_sv*order + 1 CV edges, strictly increasing.
    pub cv_edges: Vec<f64>,
    /// CV widths, precomputed once at build time.
    pub cv_widths: Vec<f64>,
    /// CV centers.
    pub cv_centers: Vec<f64>,
    /// CV edge pattern on the unit SV, shared by every SV.
    pub ref_edges: Vec<f64>,
    /// CV width pattern on the unit SV.
    pub ref_widths: Vec<f64>,
}

impl SvGrid1D {
    pub fn n_cv(&self) -> usize {
        self.n_sv * self.order
    }

    /// Left edge of spectral volume `i`.
    pub fn sv_left(&self, i: usize) -> f64 {
        self.a + i as f64 * self.sv_width
    }

    /// Center of spectral volume `i`.
    pub fn sv_center(&self, i: usize) -> f64 {
        self.a + (i as f64 + 0.5) * self.sv_width
    }

    /// Width of the global CV `idx + offset` where `offset` may leave the
    /// domain; valid because all SVs share the same pattern.
    pub fn cv_width_wrapped(&self, global: isize) -> f64 {
        let k = self.order as isize;
        let m = global.rem_euclid(k) as usize;
        self.ref_widths[m] * self.sv_width
    }

    /// Center of the (possibly ghost) global CV, extended periodically in
    /// pattern and uniformly in SV width.
    pub fn cv_center_extended(&self, global: isize) -> f64 {
        let k = self.order as isize;
        let sv = global.div_euclid(k);
        let m = global.rem_euclid(k) as usize;
        let left = self.a + sv as f64 * self.sv_width;
        left + 0.5 * (self.ref_edges[m] + self.ref_edges[m + 1]) * self.sv_width
    }

    /// Edges of the (possibly ghost) global CV.
    pub fn cv_span_extended(&self, global: isize) -> (f64, f64) {
        let k = self.order as isize;
        let sv = global.div_euclid(k);
        let m = global.rem_euclid(k) as usize;
        let left = self.a + sv as f64 * self.sv_width;
        (
            left + self.ref_edges[m] * self.sv_width,
            left + self.ref_edges[m + 1] * self.sv_width,
        )
    }
}

/// Build a uniform 1D SV grid with the Gauss-Lobatto CV subdivision.
pub fn build_grid_1d(a: f64, b: f64, n_sv: usize, order: usize) -> Result<SvGrid1D> {
    if !(MIN_ORDER..=MAX_ORDER).contains(&order) {
        return Err(SvError::UnsupportedOrder(order));
    }
    if n_sv == 0 {
        return Err(SvError::InvalidGrid("need at least one SV".into()));
    }
    if !(b > a) {
        return Err(SvError::InvalidGrid(format!(
            "domain endpoints must satisfy b > a, got [{a}, {b}]"
        )));
    }
    let sv_width = (b - a) / n_sv as f64;
    let ref_edges = lobatto_pattern(order);
    let ref_widths: Vec<f64> = (0..order).map(|m| ref_edges[m + 1] - ref_edges[m]).collect();

    let mut cv_edges = Vec::with_capacity(n_sv * order + 1);
    for i in 0..n_sv {
        let left = a + i as f64 * sv_width;
        for m in 0..order {
            cv_edges.push(left + ref_edges[m] * sv_width);
        }
    }
    cv_edges.push(b);

    let mut cv_widths = Vec::with_capacity(n_sv * order);
    let mut cv_centers = Vec::with_capacity(n_sv * order);
    for i in 0..n_sv {
        for m in 0..order {
            cv_widths.push(ref_widths[m] * sv_width);
            let left = a + i as f64 * sv_width;
            cv_centers.push(left + 0.5 * (ref_edges[m] + ref_edges[m + 1]) * sv_width);
        }
    }

    Ok(SvGrid1D {
        a,
        b,
        n_sv,
        order,
        sv_width,
        cv_edges,
        cv_widths,
        cv_centers,
        ref_edges,
        ref_widths,
    })
}

/// Tensor-product 2D grid; both axes share the scheme order.
#[derive(Debug, Clone, PartialEq)]
pub struct SvGrid2D {
    pub x: SvGrid1D,
    pub y: SvGrid1D,
}

impl SvGrid2D {
    pub fn order(&self) -> usize {
        self.x.order
    }

    pub fn n_cv(&self) -> usize {
        self.x.n_cv() * self.y.n_cv()
    }

    /// Flatten the (i, m, j, n) CV index; x fastest.
    pub fn flat_index(&self, i: usize, m: usize, j: usize, n: usize) -> usize {
        let k = self.order();
        (j * k + n) * self.x.n_cv() + (i * k + m)
    }

    /// Inverse of [`Self::flat_index`].
    pub fn unflatten(&self, flat: usize) -> (usize, usize, usize, usize) {
        let k = self.order();
        let nx = self.x.n_cv();
        let ix = flat % nx;
        let iy = flat / nx;
        (ix / k, ix % k, iy / k, iy % k)
    }
}

/// Build a 2D grid over `[ax, bx] x [ay, by]`.
pub fn build_grid_2d(
    ax: f64,
    bx: f64,
    ay: f64,
    by: f64,
    n_sv_x: usize,
    n_sv_y: usize,
    order: usize,
) -> Result<SvGrid2D> {
    Ok(SvGrid2D {
        x: build_grid_1d(ax, bx, n_sv_x, order)?,
        y: build_grid_1d(ay, by, n_sv_y, order)?,
    })
}
