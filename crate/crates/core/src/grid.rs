//! Uniform Cartesian node-centered grid and scalar fields with the
//! 5-point stencils used throughout the solver.
//!
//! Cells are square (`dx == dy` is enforced); the stencils and the
//! redistancing sweeps rely on it. Boundary handling is per edge:
//! `ZeroFlux` edges mirror the first interior neighbor into a ghost node
//! (symmetry wall), `Pinned` edges mark their nodes as Dirichlet data
//! that the stencils leave untouched.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BcKind {
    /// Mirror-symmetry wall: homogeneous Neumann via ghost reflection.
    ZeroFlux,
    /// Edge nodes hold prescribed values; stencils return 0 there.
    Pinned,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeBcs {
    pub left: BcKind,
    pub right: BcKind,
    pub bottom: BcKind,
    pub top: BcKind,
}

impl EdgeBcs {
    pub const ZERO_FLUX: EdgeBcs = EdgeBcs {
        left: BcKind::ZeroFlux,
        right: BcKind::ZeroFlux,
        bottom: BcKind::ZeroFlux,
        top: BcKind::ZeroFlux,
    };
}

impl Default for EdgeBcs {
    fn default() -> Self {
        EdgeBcs::ZERO_FLUX
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2 {
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    origin: [f64; 2],
    bc: EdgeBcs,
}

impl Grid2 {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64, origin: [f64; 2], bc: EdgeBcs) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 nodes per axis, got {nx} x {ny}"
            )));
        }
        if !(dx > 0.0) || !(dy > 0.0) || !dx.is_finite() || !dy.is_finite() {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {dx} x {dy}")));
        }
        if (dx - dy).abs() > 1e-12 * dx.max(dy) {
            return Err(Error::InvalidGrid(format!(
                "cells must be square, got dx={dx} dy={dy}"
            )));
        }
        Ok(Grid2 { nx, ny, dx, dy, origin, bc })
    }

    /// Grid of spacing exactly `h` covering at least `width x height` from
    /// `origin`; the extent is rounded up to whole cells.
    pub fn cover(origin: [f64; 2], width: f64, height: f64, h: f64, bc: EdgeBcs) -> Result<Self> {
        if !(h > 0.0) || !(width > 0.0) || !(height > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "extent {width} x {height} and spacing {h} must be positive"
            )));
        }
        let nx = (width / h - 1e-9).ceil() as usize + 1;
        let ny = (height / h - 1e-9).ceil() as usize + 1;
        Grid2::new(nx, ny, h, h, origin, bc)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn n(&self) -> usize {
        self.nx * self.ny
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    /// Common spacing of the square cells.
    pub fn h(&self) -> f64 {
        self.dx
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn bc(&self) -> EdgeBcs {
        self.bc
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.origin[0] + i as f64 * self.dx
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.origin[1] + j as f64 * self.dy
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.nx - 1)
    }

    pub fn y_max(&self) -> f64 {
        self.y(self.ny - 1)
    }

    pub fn pos(&self, i: usize, j: usize) -> [f64; 2] {
        [self.x(i), self.y(j)]
    }

    /// Trapezoid quadrature weight of a node (1 interior, 1/2 edge, 1/4
    /// corner). Also the diagonal of the inner product in which the
    /// mirrored-ghost Laplacian is self-adjoint.
    pub fn node_weight(&self, i: usize, j: usize) -> f64 {
        let wx = if i == 0 || i == self.nx - 1 { 0.5 } else { 1.0 };
        let wy = if j == 0 || j == self.ny - 1 { 0.5 } else { 1.0 };
        wx * wy
    }

    /// Whether the node lies on an edge with [`BcKind::Pinned`].
    pub fn pinned(&self, i: usize, j: usize) -> bool {
        (i == 0 && self.bc.left == BcKind::Pinned)
            || (i == self.nx - 1 && self.bc.right == BcKind::Pinned)
            || (j == 0 && self.bc.bottom == BcKind::Pinned)
            || (j == self.ny - 1 && self.bc.top == BcKind::Pinned)
    }
}

/// Node-centered scalar field. Operations return new fields; shapes must
/// match, which is asserted.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid2,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid2) -> Self {
        ScalarField { grid, values: vec![0.0; grid.n()] }
    }

    pub fn from_fn<F>(grid: Grid2, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Sync + Send,
    {
        let mut values = vec![0.0; grid.n()];
        exec::fill_rows(&mut values, grid.nx, |j, row| {
            let y = grid.y(j);
            for (i, v) in row.iter_mut().enumerate() {
                *v = f(grid.x(i), y);
            }
        });
        ScalarField { grid, values }
    }

    pub fn from_values(grid: Grid2, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::InvalidGrid(format!(
                "value count {} does not match grid with {} nodes",
                values.len(),
                grid.n()
            )));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn grid(&self) -> &Grid2 {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.grid.idx(i, j);
        self.values[k] = v;
    }

    /// Bilinear interpolation at a physical point, clamped to the domain.
    pub fn bilinear(&self, x: f64, y: f64) -> f64 {
        let g = &self.grid;
        let u = ((x - g.origin[0]) / g.dx).clamp(0.0, (g.nx - 1) as f64);
        let v = ((y - g.origin[1]) / g.dy).clamp(0.0, (g.ny - 1) as f64);
        let i0 = (u.floor() as usize).min(g.nx - 2);
        let j0 = (v.floor() as usize).min(g.ny - 2);
        let fx = u - i0 as f64;
        let fy = v - j0 as f64;
        let k = j0 * g.nx + i0;
        let (v00, v10) = (self.values[k], self.values[k + 1]);
        let (v01, v11) = (self.values[k + g.nx], self.values[k + g.nx + 1]);
        v00 * (1.0 - fx) * (1.0 - fy) + v10 * fx * (1.0 - fy) + v01 * (1.0 - fx) * fy + v11 * fx * fy
    }

    /// 5-point Laplacian. ZeroFlux edges mirror the interior neighbor;
    /// nodes on Pinned edges yield 0.
    pub fn laplacian(&self) -> ScalarField {
        let g = self.grid;
        let (nx, ny) = (g.nx, g.ny);
        let inv_dx2 = 1.0 / (g.dx * g.dx);
        let inv_dy2 = 1.0 / (g.dy * g.dy);
        let v = &self.values;
        let mut out = vec![0.0; v.len()];
        exec::fill_rows(&mut out, nx, |j, row| {
            for (i, o) in row.iter_mut().enumerate() {
                if g.pinned(i, j) {
                    *o = 0.0;
                    continue;
                }
                let c = v[j * nx + i];
                let l = if i > 0 { v[j * nx + i - 1] } else { v[j * nx + i + 1] };
                let r = if i + 1 < nx { v[j * nx + i + 1] } else { v[j * nx + i - 1] };
                let b = if j > 0 { v[(j - 1) * nx + i] } else { v[(j + 1) * nx + i] };
                let t = if j + 1 < ny { v[(j + 1) * nx + i] } else { v[(j - 1) * nx + i] };
                *o = (l + r - 2.0 * c) * inv_dx2 + (b + t - 2.0 * c) * inv_dy2;
            }
        });
        ScalarField { grid: g, values: out }
    }

    /// |grad| with central differences in the interior and one-sided
    /// differences on the edges.
    pub fn gradient_norm(&self) -> ScalarField {
        let g = self.grid;
        let (nx, ny) = (g.nx, g.ny);
        let v = &self.values;
        let mut out = vec![0.0; v.len()];
        exec::fill_rows(&mut out, nx, |j, row| {
            for (i, o) in row.iter_mut().enumerate() {
                let gx = if i == 0 {
                    (v[j * nx + 1] - v[j * nx]) / g.dx
                } else if i == nx - 1 {
                    (v[j * nx + i] - v[j * nx + i - 1]) / g.dx
                } else {
                    (v[j * nx + i + 1] - v[j * nx + i - 1]) / (2.0 * g.dx)
                };
                let gy = if j == 0 {
                    (v[nx + i] - v[i]) / g.dy
                } else if j == ny - 1 {
                    (v[j * nx + i] - v[(j - 1) * nx + i]) / g.dy
                } else {
                    (v[(j + 1) * nx + i] - v[(j - 1) * nx + i]) / (2.0 * g.dy)
                };
                *o = gx.hypot(gy);
            }
        });
        ScalarField { grid: g, values: out }
    }

    /// Godunov upwind |grad|, oriented away from the zero level set: per
    /// axis the steeper of ascent-from-below and descent-to-beyond,
    /// clamped at 0. Fields produced by the eikonal sweeps satisfy
    /// norm = 1 exactly at swept nodes, including distance ridges where
    /// central differences dip below 1, so distance-property checks use
    /// this form. On ridges of an exact continuum distance it can reach
    /// sqrt(2) (the gradient is genuinely multivalued there).
    pub fn gradient_norm_upwind(&self) -> ScalarField {
        let g = self.grid;
        let (nx, ny) = (g.nx, g.ny);
        let v = &self.values;
        let mut out = vec![0.0; v.len()];
        exec::fill_rows(&mut out, nx, |j, row| {
            for (i, o) in row.iter_mut().enumerate() {
                let c = v[j * nx + i];
                let s = if c >= 0.0 { 1.0 } else { -1.0 };
                let mut gx: f64 = 0.0;
                if i > 0 {
                    gx = gx.max(s * (c - v[j * nx + i - 1]) / g.dx);
                }
                if i + 1 < nx {
                    gx = gx.max(-s * (v[j * nx + i + 1] - c) / g.dx);
                }
                let mut gy: f64 = 0.0;
                if j > 0 {
                    gy = gy.max(s * (c - v[(j - 1) * nx + i]) / g.dy);
                }
                if j + 1 < ny {
                    gy = gy.max(-s * (v[(j + 1) * nx + i] - c) / g.dy);
                }
                *o = gx.hypot(gy);
            }
        });
        ScalarField { grid: g, values: out }
    }

    pub fn map<F>(&self, f: F) -> ScalarField
    where
        F: Fn(f64) -> f64 + Sync + Send,
    {
        let v = &self.values;
        let mut out = vec![0.0; v.len()];
        exec::fill_rows(&mut out, self.grid.nx, |j, row| {
            let base = j * self.grid.nx;
            for (i, o) in row.iter_mut().enumerate() {
                *o = f(v[base + i]);
            }
        });
        ScalarField { grid: self.grid, values: out }
    }

    pub fn zip_map<F>(&self, other: &ScalarField, f: F) -> ScalarField
    where
        F: Fn(f64, f64) -> f64 + Sync + Send,
    {
        assert_eq!(self.grid, other.grid, "field shapes must match");
        let (a, b) = (&self.values, &other.values);
        let mut out = vec![0.0; a.len()];
        exec::fill_rows(&mut out, self.grid.nx, |j, row| {
            let base = j * self.grid.nx;
            for (i, o) in row.iter_mut().enumerate() {
                *o = f(a[base + i], b[base + i]);
            }
        });
        ScalarField { grid: self.grid, values: out }
    }

    pub fn min(&self) -> f64 {
        -exec::max_rows(self.grid.ny, |j| {
            let base = j * self.grid.nx;
            self.values[base..base + self.grid.nx]
                .iter()
                .fold(f64::NEG_INFINITY, |m, &v| m.max(-v))
        })
    }

    pub fn max(&self) -> f64 {
        exec::max_rows(self.grid.ny, |j| {
            let base = j * self.grid.nx;
            self.values[base..base + self.grid.nx]
                .iter()
                .fold(f64::NEG_INFINITY, |m, &v| m.max(v))
        })
    }

    pub fn linf(&self) -> f64 {
        exec::max_rows(self.grid.ny, |j| {
            let base = j * self.grid.nx;
            self.values[base..base + self.grid.nx]
                .iter()
                .fold(0.0_f64, |m, &v| m.max(v.abs()))
        })
    }

    pub fn all_finite(&self) -> bool {
        // max_rows returns 1.0 only if some row saw a non-finite value.
        exec::max_rows(self.grid.ny, |j| {
            let base = j * self.grid.nx;
            if self.values[base..base + self.grid.nx].iter().all(|v| v.is_finite()) {
                0.0
            } else {
                1.0
            }
        }) < 0.5
    }
}
