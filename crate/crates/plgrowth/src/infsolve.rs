//! Independent route to the ∞-harmonic equation Δ∞u = u_{x_i}u_{x_j}u_{x_ix_j} = 0:
//! the discrete midpoint property
//!
//! ```text
//! u(x) = ½ ( max_{|y−x| ≤ ρ} u(y) + min_{|y−x| ≤ ρ} u(y) )
//! ```
//!
//! iterated to a fixed point over a wide lattice stencil (comparison with
//! cones), plus the exact benchmark solutions used to grade both solvers.
//!
//! Near the boundary the stencil is clipped in symmetric pairs: an offset
//! participates only when its mirror does. Symmetric stencils keep linear
//! fields exact fixed points; boundary values participate in the min/max.

use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::grid::{discrete_gradient, BoundaryValues, Grid, NodeClass, ScalarField};
use crate::psolve::SolveStats;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InfConfig {
    /// Sup-norm tolerance on the fixed-point residual |u − ½(max+min)|.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Neighbor shells used in the min–max average, in units of spacing.
    #[serde(default = "default_stencil_radius")]
    pub stencil_radius: usize,
    /// Jacobi sweeps (double-buffered) instead of in-place Gauss–Seidel.
    #[serde(default)]
    pub jacobi: bool,
}

fn default_tol() -> f64 {
    1e-8
}

fn default_max_iter() -> usize {
    200_000
}

fn default_stencil_radius() -> usize {
    3
}

impl Default for InfConfig {
    fn default() -> Self {
        InfConfig {
            tol: default_tol(),
            max_iter: default_max_iter(),
            stencil_radius: default_stencil_radius(),
            jacobi: false,
        }
    }
}

impl InfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tol",
                reason: format!("must be positive, got {}", self.tol),
            });
        }
        if self.stencil_radius < 1 {
            return Err(Error::InvalidParameter {
                name: "stencil_radius",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// Exact Aronsson solution |x|^{4/3} − |y|^{4/3}: ∞-harmonic away from the
/// origin, nonnegative on the sector {|y| ≤ x} and vanishing on |y| = x.
pub fn exact_aronsson(p: Point) -> f64 {
    p.x.abs().powf(4.0 / 3.0) - p.y.abs().powf(4.0 / 3.0)
}

/// Linear exact solution ⟨p, direction⟩.
pub fn exact_linear(p: Point, direction: Point) -> f64 {
    p.dot(direction)
}

/// Per-sweep diagnostics of a solve.
#[derive(Debug, Clone)]
pub struct InfTrace {
    /// Max update magnitude per sweep.
    pub update_norms: Vec<f64>,
    /// (sweep, residual) at each residual evaluation.
    pub residuals: Vec<(usize, f64)>,
}

struct Stencil {
    /// Canonical half-offsets (dj > 0, or dj == 0 and di > 0).
    half: Vec<(i32, i32)>,
}

impl Stencil {
    fn new(radius: usize) -> Stencil {
        let r = radius as i32;
        let mut half = Vec::new();
        for dj in 0..=r {
            for di in -r..=r {
                if di * di + dj * dj == 0 || di * di + dj * dj > r * r {
                    continue;
                }
                if dj > 0 || di > 0 {
                    half.push((di, dj));
                }
            }
        }
        Stencil { half }
    }
}

struct InfWorkspace {
    grid: Arc<Grid>,
    stencil: Stencil,
    interior: Vec<u32>,
    /// Whether the full stencil fits inside value-carrying nodes.
    full: Vec<bool>,
}

impl InfWorkspace {
    fn new(grid: &Arc<Grid>, radius: usize) -> InfWorkspace {
        let stencil = Stencil::new(radius);
        let (nx, ny) = (grid.nx() as i64, grid.ny() as i64);
        let live = |i: i64, j: i64| {
            i >= 0
                && j >= 0
                && i < nx
                && j < ny
                && grid.class(i as usize, j as usize) != NodeClass::Exterior
        };
        let mut interior = Vec::new();
        let mut full = Vec::new();
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                if grid.class(i, j) != NodeClass::Interior {
                    continue;
                }
                interior.push(grid.idx(i, j) as u32);
                let (ii, jj) = (i as i64, j as i64);
                let all = stencil.half.iter().all(|&(di, dj)| {
                    live(ii + di as i64, jj + dj as i64) && live(ii - di as i64, jj - dj as i64)
                });
                full.push(all);
            }
        }
        InfWorkspace {
            grid: grid.clone(),
            stencil,
            interior,
            full,
        }
    }

    /// Midpoint target ½(max+min) over the symmetric clipped stencil.
    #[inline]
    fn target(&self, u: &[f64], idx: usize, is_full: bool) -> f64 {
        let nx = self.grid.nx() as i64;
        let ny = self.grid.ny() as i64;
        let i = (idx as i64) % nx;
        let j = (idx as i64) / nx;
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::INFINITY;
        if is_full {
            for &(di, dj) in &self.stencil.half {
                let a = u[(idx as i64 + dj as i64 * nx + di as i64) as usize];
                let b = u[(idx as i64 - dj as i64 * nx - di as i64) as usize];
                hi = hi.max(a.max(b));
                lo = lo.min(a.min(b));
            }
        } else {
            for &(di, dj) in &self.stencil.half {
                let (pi, pj) = (i + di as i64, j + dj as i64);
                let (qi, qj) = (i - di as i64, j - dj as i64);
                let ok = |x: i64, y: i64| {
                    x >= 0
                        && y >= 0
                        && x < nx
                        && y < ny
                        && self.grid.class(x as usize, y as usize) != NodeClass::Exterior
                };
                if ok(pi, pj) && ok(qi, qj) {
                    let a = u[(pj * nx + pi) as usize];
                    let b = u[(qj * nx + qi) as usize];
                    hi = hi.max(a.max(b));
                    lo = lo.min(a.min(b));
                }
            }
        }
        if hi == f64::NEG_INFINITY {
            // isolated node: interior nodes always keep their axis pairs
            u[idx]
        } else {
            0.5 * (hi + lo)
        }
    }

    /// One Gauss–Seidel sweep, row-major; returns the max update.
    fn sweep(&self, u: &mut [f64]) -> f64 {
        let mut max_update: f64 = 0.0;
        for (k, &idx) in self.interior.iter().enumerate() {
            let t = self.target(u, idx as usize, self.full[k]);
            max_update = max_update.max((t - u[idx as usize]).abs());
            u[idx as usize] = t;
        }
        max_update
    }

    /// One Jacobi sweep; `next` receives the updated interior values.
    fn sweep_jacobi(&self, u: &[f64], next: &mut [f64]) -> f64 {
        next.copy_from_slice(u);
        let mut max_update: f64 = 0.0;
        for (k, &idx) in self.interior.iter().enumerate() {
            let t = self.target(u, idx as usize, self.full[k]);
            max_update = max_update.max((t - u[idx as usize]).abs());
            next[idx as usize] = t;
        }
        max_update
    }

    /// Fixed-point residual sup_interior |u − ½(max+min)| on a frozen field.
    fn residual(&self, u: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, &idx) in self.interior.iter().enumerate() {
            let t = self.target(u, idx as usize, self.full[k]);
            worst = worst.max((t - u[idx as usize]).abs());
        }
        worst
    }
}

/// Iterates the discrete midpoint property to a fixed point.
///
/// `init` seeds the interior (the runner passes the p = 16 continuation
/// stage when it has one, else the harmonic solve); without a seed the
/// interior starts at the boundary mean. Unlike the energy solver this
/// scheme reports non-convergence as an error.
pub fn solve_inf_harmonic(
    grid: &Arc<Grid>,
    boundary: &BoundaryValues,
    cfg: &InfConfig,
    init: Option<&ScalarField>,
) -> Result<(ScalarField, SolveStats)> {
    let (field, stats, _) = solve_inf_harmonic_traced(grid, boundary, cfg, init)?;
    Ok((field, stats))
}

pub fn solve_inf_harmonic_traced(
    grid: &Arc<Grid>,
    boundary: &BoundaryValues,
    cfg: &InfConfig,
    init: Option<&ScalarField>,
) -> Result<(ScalarField, SolveStats, InfTrace)> {
    cfg.validate()?;
    let (blo, bhi) = boundary.validate()?;
    if !Arc::ptr_eq(boundary.grid(), grid) {
        return Err(Error::FieldGridMismatch(
            "boundary data built on a different grid".into(),
        ));
    }
    let ws = InfWorkspace::new(grid, cfg.stencil_radius);

    let mut u = vec![f64::NAN; grid.node_count()];
    let mean = 0.5 * (blo + bhi);
    for (i, j, c) in grid.nodes() {
        let idx = grid.idx(i, j);
        match c {
            NodeClass::Exterior => {}
            NodeClass::Interior => {
                u[idx] = match init {
                    Some(f) => f.value(i, j),
                    None => mean,
                };
            }
            _ => u[idx] = boundary.value_at(idx),
        }
    }

    let mut trace = InfTrace {
        update_norms: Vec::new(),
        residuals: Vec::new(),
    };
    let mut jacobi_buf = if cfg.jacobi { Some(u.clone()) } else { None };
    let check_every = 32usize;
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    while iterations < cfg.max_iter {
        let update = match jacobi_buf.as_mut() {
            Some(buf) => {
                let upd = ws.sweep_jacobi(&u, buf);
                std::mem::swap(&mut u, buf);
                upd
            }
            None => ws.sweep(&mut u),
        };
        iterations += 1;
        trace.update_norms.push(update);
        if !update.is_finite() {
            return Err(Error::SolverDiverged {
                what: "update",
                iterations,
            });
        }
        if iterations % check_every == 0 || update <= cfg.tol * 0.25 {
            residual = ws.residual(&u);
            trace.residuals.push((iterations, residual));
            if residual <= cfg.tol {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        residual = ws.residual(&u);
        if residual <= cfg.tol {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            residual,
            tol: cfg.tol,
            iterations,
        });
    }
    let field = ScalarField::from_raw(grid.clone(), u);
    // The natural p → ∞ energy: the sup-norm of the discrete gradient.
    let grad = discrete_gradient(&field);
    let mut lip: f64 = 0.0;
    for (i, j, c) in grid.nodes() {
        if c != NodeClass::Exterior {
            lip = lip.max(grad.magnitude(i, j));
        }
    }
    let stats = SolveStats {
        iterations,
        final_residual: residual,
        energy: lip,
        converged,
    };
    Ok((field, stats, trace))
}

/// Finite-difference Δ∞ residual u_x²u_xx + 2u_xu_yu_xy + u_y²u_yy at
/// interior nodes whose full 3×3 stencil carries values; NaN elsewhere.
/// A diagnostic field; callers scale by spacing² when reporting.
pub fn residual_inf_laplacian(f: &ScalarField) -> ScalarField {
    let grid = f.grid().clone();
    let h = grid.spacing();
    let mut out = vec![f64::NAN; grid.node_count()];
    let live = |i: i64, j: i64| {
        i >= 0
            && j >= 0
            && (i as usize) < grid.nx()
            && (j as usize) < grid.ny()
            && grid.class(i as usize, j as usize) != NodeClass::Exterior
    };
    for (i, j, c) in grid.nodes() {
        if c != NodeClass::Interior {
            continue;
        }
        let (ii, jj) = (i as i64, j as i64);
        let full = (-1..=1).all(|dj| (-1..=1i64).all(|di| live(ii + di, jj + dj)));
        if !full {
            continue;
        }
        let v = |di: i64, dj: i64| f.value((ii + di) as usize, (jj + dj) as usize);
        let ux = (v(1, 0) - v(-1, 0)) / (2.0 * h);
        let uy = (v(0, 1) - v(0, -1)) / (2.0 * h);
        let uxx = (v(1, 0) - 2.0 * v(0, 0) + v(-1, 0)) / (h * h);
        let uyy = (v(0, 1) - 2.0 * v(0, 0) + v(0, -1)) / (h * h);
        let uxy = (v(1, 1) - v(1, -1) - v(-1, 1) + v(-1, -1)) / (4.0 * h * h);
        out[grid.idx(i, j)] = ux * ux * uxx + 2.0 * ux * uy * uxy + uy * uy * uyy;
    }
    ScalarField::from_raw(grid, out)
}
