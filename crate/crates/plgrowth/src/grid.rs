//! Uniform Cartesian discretization of D ∩ B(x₀, R): node classification,
//! scalar fields, discrete calculus, the cutoffs h and h^δ, and the
//! measurement functionals M(r) and osc.
//!
//! Node classes, with spacing/2 snapping against the true signed distances:
//! nodes beyond the band outside D (or outside the ball) are Exterior even
//! inside the window square, so the extension-by-zero of the cutoff h is
//! representable on the same grid. Lateral (∂D) classification wins over the
//! outer arc at the corner where both bands cross.
//!
//! A completion pass then promotes any exterior node diagonally adjacent to
//! an interior node into the nearer boundary class. Every interior node then
//! has a full 3×3 neighborhood of value-carrying nodes, which keeps the
//! energy cells of the solvers balanced (and the p = 2 stationarity exactly
//! the 5-point Laplacian). Promoted nodes sit within spacing of their
//! boundary instead of spacing/2.

use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeClass {
    Interior,
    /// Within spacing/2 of ∂D, inside the window: carries lateral data.
    LateralBoundary,
    /// Within spacing/2 of ∂B(x₀, R), inside D: carries outer-arc data.
    OuterArc,
    Exterior,
}

impl NodeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeClass::Interior => "interior",
            NodeClass::LateralBoundary => "lateral",
            NodeClass::OuterArc => "outer_arc",
            NodeClass::Exterior => "exterior",
        }
    }

    fn from_str(s: &str) -> Option<NodeClass> {
        match s {
            "interior" => Some(NodeClass::Interior),
            "lateral" => Some(NodeClass::LateralBoundary),
            "outer_arc" => Some(NodeClass::OuterArc),
            "exterior" => Some(NodeClass::Exterior),
            _ => None,
        }
    }

    pub fn is_boundary(self) -> bool {
        matches!(self, NodeClass::LateralBoundary | NodeClass::OuterArc)
    }
}

/// Immutable uniform grid over the bounding square of B(x₀, R).
#[derive(Debug)]
pub struct Grid {
    origin: Point,
    spacing: f64,
    nx: usize,
    ny: usize,
    x0: Point,
    radius: f64,
    class: Vec<NodeClass>,
}

/// JSON header serialized next to field CSVs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridMeta {
    pub origin: Point,
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
    pub x0: Point,
    pub radius: f64,
    pub interior_nodes: usize,
    pub lateral_nodes: usize,
    pub outer_arc_nodes: usize,
}

/// Builds the grid for D ∩ B(x₀, R). Requires spacing ≤ R/16 so the dyadic
/// measurements r ≤ R/4 stay resolvable, and at least one interior node.
pub fn build_grid(domain: &DomainSpec, x0: Point, radius: f64, spacing: f64) -> Result<Arc<Grid>> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter {
            name: "radius",
            reason: format!("must be positive, got {radius}"),
        });
    }
    if !(spacing > 0.0) {
        return Err(Error::InvalidParameter {
            name: "spacing",
            reason: format!("must be positive, got {spacing}"),
        });
    }
    let limit = radius / 16.0;
    if spacing > limit * (1.0 + 1e-12) {
        return Err(Error::GridTooCoarse {
            spacing,
            radius,
            limit,
        });
    }
    domain.validate()?;

    let n_half = (radius / spacing - 1e-9).ceil() as usize;
    let nx = 2 * n_half + 1;
    let ny = nx;
    let origin = Point::new(
        x0.x - n_half as f64 * spacing,
        x0.y - n_half as f64 * spacing,
    );

    let half = spacing / 2.0;
    let mut class = vec![NodeClass::Exterior; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let q = Point::new(origin.x + i as f64 * spacing, origin.y + j as f64 * spacing);
            let s = domain.signed_boundary_distance(q);
            let d = radius - q.distance(x0);
            let c = if s < -half || d < -half {
                NodeClass::Exterior
            } else if s.abs() <= half {
                NodeClass::LateralBoundary
            } else if d.abs() <= half {
                NodeClass::OuterArc
            } else {
                NodeClass::Interior
            };
            class[j * nx + i] = c;
        }
    }

    // Completion pass: an interior node may have an exterior diagonal
    // neighbor (the signed distances only control axis neighbors). Promote
    // such nodes to the nearer boundary class so every interior node owns a
    // complete 3×3 stencil.
    let idx = |i: usize, j: usize| j * nx + i;
    let mut promote: Vec<usize> = Vec::new();
    for j in 1..ny.saturating_sub(1) {
        for i in 1..nx.saturating_sub(1) {
            if class[idx(i, j)] != NodeClass::Interior {
                continue;
            }
            for (di, dj) in [(-1i64, -1i64), (-1, 1), (1, -1), (1, 1)] {
                let (ni, nj) = ((i as i64 + di) as usize, (j as i64 + dj) as usize);
                if class[idx(ni, nj)] == NodeClass::Exterior {
                    promote.push(idx(ni, nj));
                }
            }
        }
    }
    for k in promote {
        let i = k % nx;
        let j = k / nx;
        let q = Point::new(origin.x + i as f64 * spacing, origin.y + j as f64 * spacing);
        let s = domain.signed_boundary_distance(q);
        class[k] = if s < -half {
            NodeClass::LateralBoundary
        } else {
            NodeClass::OuterArc
        };
    }

    let grid = Grid {
        origin,
        spacing,
        nx,
        ny,
        x0,
        radius,
        class,
    };

    if !grid.class.iter().any(|&c| c == NodeClass::Interior) {
        return Err(Error::EmptyWindow);
    }
    // Signed distances are 1-Lipschitz, so an interior node (band > h/2 on
    // both sides) cannot have an exterior axis neighbor; verify anyway.
    for j in 0..ny {
        for i in 0..nx {
            if grid.class[j * nx + i] != NodeClass::Interior {
                continue;
            }
            let ok = i > 0
                && i + 1 < nx
                && j > 0
                && j + 1 < ny
                && grid.class[j * nx + i - 1] != NodeClass::Exterior
                && grid.class[j * nx + i + 1] != NodeClass::Exterior
                && grid.class[(j - 1) * nx + i] != NodeClass::Exterior
                && grid.class[(j + 1) * nx + i] != NodeClass::Exterior;
            if !ok {
                return Err(Error::InvalidDomain(format!(
                    "inconsistent classification: interior node ({i}, {j}) touches the exterior"
                )));
            }
        }
    }
    Ok(Arc::new(grid))
}

impl Grid {
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn spacing(&self) -> f64 {
        self.spacing
    }
    pub fn origin(&self) -> Point {
        self.origin
    }
    pub fn x0(&self) -> Point {
        self.x0
    }
    pub fn radius(&self) -> f64 {
        self.radius
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    #[inline]
    pub fn pos(&self, i: usize, j: usize) -> Point {
        Point::new(
            self.origin.x + i as f64 * self.spacing,
            self.origin.y + j as f64 * self.spacing,
        )
    }

    #[inline]
    pub fn class(&self, i: usize, j: usize) -> NodeClass {
        self.class[self.idx(i, j)]
    }

    #[inline]
    pub fn class_at(&self, idx: usize) -> NodeClass {
        self.class[idx]
    }

    pub fn node_count(&self) -> usize {
        self.nx * self.ny
    }

    /// Row-major iterator over (i, j, class).
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize, NodeClass)> + '_ {
        let nx = self.nx;
        self.class
            .iter()
            .enumerate()
            .map(move |(k, &c)| (k % nx, k / nx, c))
    }

    pub fn count_class(&self, want: NodeClass) -> usize {
        self.class.iter().filter(|&&c| c == want).count()
    }

    pub fn meta(&self) -> GridMeta {
        GridMeta {
            origin: self.origin,
            spacing: self.spacing,
            nx: self.nx,
            ny: self.ny,
            x0: self.x0,
            radius: self.radius,
            interior_nodes: self.count_class(NodeClass::Interior),
            lateral_nodes: self.count_class(NodeClass::LateralBoundary),
            outer_arc_nodes: self.count_class(NodeClass::OuterArc),
        }
    }
}

/// Nodal values of a field; finite at every non-exterior node, NaN outside.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(Point) -> f64) -> ScalarField {
        let mut values = vec![f64::NAN; grid.node_count()];
        for (i, j, c) in grid.nodes() {
            if c != NodeClass::Exterior {
                values[grid.idx(i, j)] = f(grid.pos(i, j));
            }
        }
        ScalarField {
            grid: grid.clone(),
            values,
        }
    }

    pub fn zeros(grid: &Arc<Grid>) -> ScalarField {
        ScalarField::from_fn(grid, |_| 0.0)
    }

    pub(crate) fn from_raw(grid: Arc<Grid>, values: Vec<f64>) -> ScalarField {
        debug_assert_eq!(values.len(), grid.node_count());
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn value_at(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let idx = self.grid.idx(i, j);
        self.values[idx] = v;
    }

    pub(crate) fn values(&self) -> &[f64] {
        &self.values
    }

    /// Applies `f` to the value at every non-exterior node.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        let mut out = self.clone();
        for (i, j, c) in self.grid.nodes() {
            if c != NodeClass::Exterior {
                let idx = self.grid.idx(i, j);
                out.values[idx] = f(self.values[idx]);
            }
        }
        out
    }

    /// sup of the field over non-exterior nodes within distance r of center.
    pub fn sup_on_ball(&self, center: Point, r: f64) -> Result<f64> {
        let mut best = f64::NEG_INFINITY;
        let mut seen = false;
        for (i, j, c) in self.grid.nodes() {
            if c == NodeClass::Exterior {
                continue;
            }
            if self.grid.pos(i, j).distance(center) <= r {
                best = best.max(self.value(i, j));
                seen = true;
            }
        }
        if !seen {
            return Err(Error::EmptyNodeSet {
                what: format!("B(({}, {}), {r})", center.x, center.y),
            });
        }
        Ok(best)
    }

    /// Oscillation (sup − inf) over non-exterior nodes of the ball.
    pub fn osc_on_ball(&self, center: Point, r: f64) -> Result<f64> {
        let (lo, hi) = self.range_on_annulus(center, 0.0, r)?;
        Ok(hi - lo)
    }

    /// Oscillation over the discrete shell r − shell ≤ |q − center| ≤ r.
    pub fn osc_on_sphere(&self, center: Point, r: f64, shell: f64) -> Result<f64> {
        if shell < self.grid.spacing {
            return Err(Error::InvalidParameter {
                name: "shell",
                reason: format!(
                    "shell width {shell} below one spacing {}",
                    self.grid.spacing
                ),
            });
        }
        let (lo, hi) = self.range_on_annulus(center, r - shell, r)?;
        Ok(hi - lo)
    }

    fn range_on_annulus(&self, center: Point, r_lo: f64, r_hi: f64) -> Result<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut seen = false;
        for (i, j, c) in self.grid.nodes() {
            if c == NodeClass::Exterior {
                continue;
            }
            let d = self.grid.pos(i, j).distance(center);
            if d >= r_lo && d <= r_hi {
                let v = self.value(i, j);
                lo = lo.min(v);
                hi = hi.max(v);
                seen = true;
            }
        }
        if !seen {
            return Err(Error::EmptyNodeSet {
                what: format!(
                    "annulus [{r_lo}, {r_hi}] about ({}, {})",
                    center.x, center.y
                ),
            });
        }
        Ok((lo, hi))
    }

    pub fn sup_abs_diff(&self, other: &ScalarField) -> f64 {
        let mut best: f64 = 0.0;
        for (i, j, c) in self.grid.nodes() {
            if c != NodeClass::Exterior {
                best = best.max((self.value(i, j) - other.value(i, j)).abs());
            }
        }
        best
    }
}

/// h = max(u, 0) at interior and outer-arc nodes, 0 at lateral nodes: the
/// cutoff extended by zero past ∂D.
pub fn cutoff_h(u: &ScalarField) -> ScalarField {
    cutoff_shifted(u, 0.0)
}

/// h^δ = max(u − δ, 0), same extension. Requires δ > 0.
pub fn cutoff_h_delta(u: &ScalarField, delta: f64) -> Result<ScalarField> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: format!("must be positive, got {delta}"),
        });
    }
    Ok(cutoff_shifted(u, delta))
}

fn cutoff_shifted(u: &ScalarField, delta: f64) -> ScalarField {
    let grid = u.grid().clone();
    let mut out = u.clone();
    for (i, j, c) in grid.nodes() {
        let idx = grid.idx(i, j);
        match c {
            NodeClass::Interior | NodeClass::OuterArc => {
                out.values[idx] = (u.values[idx] - delta).max(0.0);
            }
            NodeClass::LateralBoundary => out.values[idx] = 0.0,
            NodeClass::Exterior => {}
        }
    }
    out
}

/// Per-node gradient, NaN at exterior nodes. Per axis: central difference
/// when both axis neighbors carry values, one-sided at nodes missing one
/// (the outermost boundary-class nodes), zero if isolated on that axis.
#[derive(Debug, Clone)]
pub struct GradientField {
    grid: Arc<Grid>,
    gx: Vec<f64>,
    gy: Vec<f64>,
}

impl GradientField {
    pub fn gx(&self, i: usize, j: usize) -> f64 {
        self.gx[self.grid.idx(i, j)]
    }
    pub fn gy(&self, i: usize, j: usize) -> f64 {
        self.gy[self.grid.idx(i, j)]
    }
    pub fn magnitude(&self, i: usize, j: usize) -> f64 {
        self.gx(i, j).hypot(self.gy(i, j))
    }
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }
    /// True when both axes use centered stencils at (i, j).
    pub fn is_central(&self, i: usize, j: usize) -> bool {
        let g = &self.grid;
        let ok = |ii: i64, jj: i64| {
            ii >= 0
                && jj >= 0
                && (ii as usize) < g.nx()
                && (jj as usize) < g.ny()
                && g.class(ii as usize, jj as usize) != NodeClass::Exterior
        };
        let (i, j) = (i as i64, j as i64);
        ok(i - 1, j) && ok(i + 1, j) && ok(i, j - 1) && ok(i, j + 1)
    }
}

pub fn discrete_gradient(f: &ScalarField) -> GradientField {
    let grid = f.grid().clone();
    let (nx, ny, h) = (grid.nx(), grid.ny(), grid.spacing());
    let mut gx = vec![f64::NAN; grid.node_count()];
    let mut gy = vec![f64::NAN; grid.node_count()];
    let has = |i: i64, j: i64| -> bool {
        i >= 0
            && j >= 0
            && (i as usize) < nx
            && (j as usize) < ny
            && grid.class(i as usize, j as usize) != NodeClass::Exterior
    };
    for (i, j, c) in grid.nodes() {
        if c == NodeClass::Exterior {
            continue;
        }
        let (ii, jj) = (i as i64, j as i64);
        let v = f.value(i, j);
        let axis = |minus: bool, plus: bool, vm: f64, vp: f64| -> f64 {
            match (minus, plus) {
                (true, true) => (vp - vm) / (2.0 * h),
                (false, true) => (vp - v) / h,
                (true, false) => (v - vm) / h,
                (false, false) => 0.0,
            }
        };
        let (wm, wp) = (has(ii - 1, jj), has(ii + 1, jj));
        let vm = if wm { f.value(i - 1, j) } else { f64::NAN };
        let vp = if wp { f.value(i + 1, j) } else { f64::NAN };
        gx[grid.idx(i, j)] = axis(wm, wp, vm, vp);
        let (sm, sp) = (has(ii, jj - 1), has(ii, jj + 1));
        let vm = if sm { f.value(i, j - 1) } else { f64::NAN };
        let vp = if sp { f.value(i, j + 1) } else { f64::NAN };
        gy[grid.idx(i, j)] = axis(sm, sp, vm, vp);
    }
    GradientField { grid, gx, gy }
}

/// Midpoint quadrature of `f` over the ball: each non-exterior node owns the
/// cell of side `spacing` centered on it, weighted by the fraction of the
/// cell inside the ball (4×4 subcell midpoint test).
pub fn ball_quadrature(
    grid: &Grid,
    center: Point,
    r: f64,
    f: impl Fn(usize, usize) -> f64,
) -> f64 {
    let h = grid.spacing();
    let cell = h * h;
    let mut total = 0.0;
    for (i, j, c) in grid.nodes() {
        if c == NodeClass::Exterior {
            continue;
        }
        let q = grid.pos(i, j);
        let d = q.distance(center);
        // Cell diagonal half-length: beyond it the cell is fully in or out.
        let reach = h * std::f64::consts::FRAC_1_SQRT_2;
        let w = if d + reach <= r {
            1.0
        } else if d - reach > r {
            0.0
        } else {
            let mut hits = 0u32;
            for a in 0..4 {
                for b in 0..4 {
                    let sub = Point::new(
                        q.x + ((a as f64 + 0.5) / 4.0 - 0.5) * h,
                        q.y + ((b as f64 + 0.5) / 4.0 - 0.5) * h,
                    );
                    if sub.distance(center) <= r {
                        hits += 1;
                    }
                }
            }
            hits as f64 / 16.0
        };
        if w > 0.0 {
            total += w * cell * f(i, j);
        }
    }
    total
}

/// Boundary data for solves: one value per lateral and outer-arc node.
#[derive(Debug, Clone)]
pub struct BoundaryValues {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl BoundaryValues {
    pub fn from_fn(grid: &Arc<Grid>, g: impl Fn(Point) -> f64) -> BoundaryValues {
        let mut values = vec![f64::NAN; grid.node_count()];
        for (i, j, c) in grid.nodes() {
            if c.is_boundary() {
                values[grid.idx(i, j)] = g(grid.pos(i, j));
            }
        }
        BoundaryValues {
            grid: grid.clone(),
            values,
        }
    }

    /// Reads the lateral and outer-arc entries out of a full row-major
    /// nx·ny node array; everything else in the array is ignored.
    pub fn from_node_array(grid: &Arc<Grid>, values: &[f64]) -> Result<BoundaryValues> {
        if values.len() != grid.node_count() {
            return Err(Error::FieldGridMismatch(format!(
                "boundary array has {} entries, the grid has {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        let mut out = vec![f64::NAN; grid.node_count()];
        for (i, j, c) in grid.nodes() {
            if c.is_boundary() {
                out[grid.idx(i, j)] = values[grid.idx(i, j)];
            }
        }
        let b = BoundaryValues {
            grid: grid.clone(),
            values: out,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn from_classed_fn(
        grid: &Arc<Grid>,
        g: impl Fn(Point, NodeClass) -> f64,
    ) -> BoundaryValues {
        let mut values = vec![f64::NAN; grid.node_count()];
        for (i, j, c) in grid.nodes() {
            if c.is_boundary() {
                values[grid.idx(i, j)] = g(grid.pos(i, j), c);
            }
        }
        BoundaryValues {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    #[inline]
    pub fn value_at(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    /// Rejects NaN/inf boundary data; returns (min, max) of the data.
    pub fn validate(&self) -> Result<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (i, j, c) in self.grid.nodes() {
            if c.is_boundary() {
                let v = self.values[self.grid.idx(i, j)];
                if !v.is_finite() {
                    return Err(Error::NonFiniteBoundary { i, j });
                }
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if !lo.is_finite() {
            return Err(Error::EmptyNodeSet {
                what: "boundary".into(),
            });
        }
        Ok((lo, hi))
    }

    /// Oscillation of the boundary data.
    pub fn osc(&self) -> Result<f64> {
        let (lo, hi) = self.validate()?;
        Ok(hi - lo)
    }
}

// --- CSV serialization -----------------------------------------------------

/// Writes `(i, j, x, y, class, value)` rows for the non-exterior nodes.
pub fn write_field_csv(field: &ScalarField, w: &mut impl Write) -> Result<()> {
    let grid = field.grid();
    writeln!(w, "i,j,x,y,class,value")?;
    for (i, j, c) in grid.nodes() {
        if c == NodeClass::Exterior {
            continue;
        }
        let q = grid.pos(i, j);
        writeln!(w, "{},{},{},{},{},{}", i, j, q.x, q.y, c.as_str(), field.value(i, j))?;
    }
    Ok(())
}

/// Reads a field CSV back onto a freshly built grid, checking that the node
/// classes agree and every non-exterior node receives a finite value.
pub fn read_field_csv(grid: &Arc<Grid>, r: &mut impl BufRead) -> Result<ScalarField> {
    let mut values = vec![f64::NAN; grid.node_count()];
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::FieldGridMismatch("empty CSV".into()))??;
    if header.trim() != "i,j,x,y,class,value" {
        return Err(Error::FieldGridMismatch(format!(
            "unexpected CSV header `{header}`"
        )));
    }
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 6 {
            return Err(Error::FieldGridMismatch(format!(
                "line {}: expected 6 columns, got {}",
                lineno + 2,
                parts.len()
            )));
        }
        let i: usize = parts[0]
            .parse()
            .map_err(|_| Error::FieldGridMismatch(format!("line {}: bad i", lineno + 2)))?;
        let j: usize = parts[1]
            .parse()
            .map_err(|_| Error::FieldGridMismatch(format!("line {}: bad j", lineno + 2)))?;
        if i >= grid.nx() || j >= grid.ny() {
            return Err(Error::FieldGridMismatch(format!(
                "line {}: node ({i}, {j}) outside the {}x{} grid",
                lineno + 2,
                grid.nx(),
                grid.ny()
            )));
        }
        let class = NodeClass::from_str(parts[4]).ok_or_else(|| {
            Error::FieldGridMismatch(format!("line {}: unknown class `{}`", lineno + 2, parts[4]))
        })?;
        if class != grid.class(i, j) {
            return Err(Error::FieldGridMismatch(format!(
                "line {}: node ({i}, {j}) is `{}` in the CSV but `{}` on the grid",
                lineno + 2,
                class.as_str(),
                grid.class(i, j).as_str()
            )));
        }
        let value: f64 = parts[5]
            .parse()
            .map_err(|_| Error::FieldGridMismatch(format!("line {}: bad value", lineno + 2)))?;
        values[grid.idx(i, j)] = value;
    }
    for (i, j, c) in grid.nodes() {
        if c != NodeClass::Exterior && !values[grid.idx(i, j)].is_finite() {
            return Err(Error::FieldGridMismatch(format!(
                "node ({i}, {j}) missing or non-finite in the CSV"
            )));
        }
    }
    Ok(ScalarField::from_raw(grid.clone(), values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn upper_half_plane() -> DomainSpec {
        DomainSpec::half_plane(Point::new(0.0, 1.0), 0.0, Point::new(0.0, 0.0)).unwrap()
    }

    fn quarter_sector() -> DomainSpec {
        DomainSpec::sector(Point::new(0.0, 0.0), 0.0, PI / 2.0, Point::new(0.0, 0.0)).unwrap()
    }

    fn grid_64(domain: &DomainSpec) -> Arc<Grid> {
        build_grid(domain, domain.anchor, 1.0, 1.0 / 64.0).unwrap()
    }

    #[test]
    fn too_coarse_rejected() {
        let d = upper_half_plane();
        let err = build_grid(&d, d.anchor, 1.0, 1.0 / 8.0).unwrap_err();
        assert!(matches!(err, Error::GridTooCoarse { .. }));
    }

    #[test]
    fn empty_window_rejected() {
        // A window centered well below the half-plane sees no interior node.
        let d = upper_half_plane();
        let err = build_grid(&d, Point::new(0.0, -5.0), 1.0, 1.0 / 32.0).unwrap_err();
        assert!(matches!(err, Error::EmptyWindow));
    }

    #[test]
    fn interior_fraction_matches_area_ratio() {
        // Interior node count over total in-ball count tracks the density.
        let d = upper_half_plane();
        let g = grid_64(&d);
        assert_eq!(g.nx(), 129);
        let in_ball = |grid: &Grid| {
            let mut disk = 0usize;
            for (i, j, _) in grid.nodes() {
                if grid.pos(i, j).distance(grid.x0()) <= grid.radius() {
                    disk += 1;
                }
            }
            disk
        };
        let disk_nodes = in_ball(&g) as f64;
        let non_ext = (g.count_class(NodeClass::Interior)
            + g.count_class(NodeClass::LateralBoundary)
            + g.count_class(NodeClass::OuterArc)) as f64;
        assert!((non_ext / disk_nodes - 0.5).abs() < 0.02);

        let s = quarter_sector();
        let gs = grid_64(&s);
        let disk_nodes = in_ball(&gs) as f64;
        let non_ext = (gs.count_class(NodeClass::Interior)
            + gs.count_class(NodeClass::LateralBoundary)
            + gs.count_class(NodeClass::OuterArc)) as f64;
        assert!((non_ext / disk_nodes - 0.25).abs() < 0.02);
    }

    #[test]
    fn boundary_bands_and_complete_interior_stencils() {
        let d = quarter_sector();
        let g = grid_64(&d);
        let h = g.spacing();
        // Promoted corner-completion nodes reach up to √2·h − h/2 past the
        // boundary; everything else sits within h/2.
        let band = h * (2f64.sqrt() - 0.5) + 1e-12;
        for (i, j, c) in g.nodes() {
            let q = g.pos(i, j);
            match c {
                NodeClass::LateralBoundary => {
                    assert!(d.signed_boundary_distance(q).abs() <= band);
                }
                NodeClass::OuterArc => {
                    assert!((g.radius() - q.distance(g.x0())).abs() <= band);
                }
                NodeClass::Interior => {
                    for dj in -1i64..=1 {
                        for di in -1i64..=1 {
                            let (ni, nj) = ((i as i64 + di) as usize, (j as i64 + dj) as usize);
                            assert_ne!(
                                g.class(ni, nj),
                                NodeClass::Exterior,
                                "interior node ({i}, {j}) has an exterior neighbor"
                            );
                        }
                    }
                }
                NodeClass::Exterior => {}
            }
        }
    }

    #[test]
    fn gradient_linear_exact() {
        let d = upper_half_plane();
        let g = grid_64(&d);
        let f = ScalarField::from_fn(&g, |p| p.y);
        let grad = discrete_gradient(&f);
        for (i, j, c) in g.nodes() {
            if c == NodeClass::Exterior {
                continue;
            }
            assert!((grad.gx(i, j)).abs() < 1e-13);
            assert!((grad.gy(i, j) - 1.0).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn gradient_exact_on_random_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, c0 in -1.0f64..1.0) {
            let d = upper_half_plane();
            let g = build_grid(&d, d.anchor, 1.0, 1.0 / 32.0).unwrap();
            let f = ScalarField::from_fn(&g, |p| a * p.x + b * p.y + c0);
            let grad = discrete_gradient(&f);
            for (i, j, cl) in g.nodes() {
                if cl == NodeClass::Exterior {
                    continue;
                }
                prop_assert!((grad.gx(i, j) - a).abs() < 1e-10);
                prop_assert!((grad.gy(i, j) - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn gradient_quadratic_exact_at_central_nodes() {
        let d = upper_half_plane();
        let g = grid_64(&d);
        let f = ScalarField::from_fn(&g, |p| p.x * p.x);
        let grad = discrete_gradient(&f);
        for (i, j, c) in g.nodes() {
            if c == NodeClass::Exterior || !grad.is_central(i, j) {
                continue;
            }
            let q = g.pos(i, j);
            assert!(
                (grad.gx(i, j) - 2.0 * q.x).abs() < 1e-10,
                "at ({}, {})",
                q.x,
                q.y
            );
        }
    }

    #[test]
    fn gradient_aronsson_magnitude_on_axis() {
        let d = quarter_sector();
        let g = grid_64(&d);
        let f = ScalarField::from_fn(&g, |p| {
            p.x.abs().powf(4.0 / 3.0) - p.y.abs().powf(4.0 / 3.0)
        });
        let grad = discrete_gradient(&f);
        // |∇f|(s, 0) = (4/3) s^{1/3}; central differencing converges like
        // spacing²/s² in relative terms.
        for &s in &[0.25, 0.5, 0.75] {
            let i = ((s - g.origin().x) / g.spacing()).round() as usize;
            let j = ((0.0 - g.origin().y) / g.spacing()).round() as usize;
            let expect = (4.0 / 3.0) * s.powf(1.0 / 3.0);
            let got = grad.magnitude(i, j);
            let rel = (got - expect).abs() / expect;
            assert!(rel < 0.02, "s = {s}: got {got}, expect {expect}");
        }
    }

    #[test]
    fn sup_and_osc_on_half_plane() {
        let d = upper_half_plane();
        let g = grid_64(&d);
        let f = ScalarField::from_fn(&g, |p| p.y);
        let sup = f.sup_on_ball(g.x0(), 1.0).unwrap();
        assert!((sup - 1.0).abs() <= 2.0 * g.spacing());
        let osc = f.osc_on_ball(g.x0(), 1.0).unwrap();
        assert!((osc - 1.0).abs() <= 2.0 * g.spacing());
        let zero = ScalarField::zeros(&g);
        assert_eq!(zero.sup_on_ball(g.x0(), 0.5).unwrap(), 0.0);
        assert_eq!(zero.osc_on_ball(g.x0(), 0.5).unwrap(), 0.0);
        assert_eq!(
            zero.osc_on_sphere(g.x0(), 0.5, g.spacing()).unwrap(),
            0.0
        );
        // No nodes inside a vanishing ball away from the lattice.
        assert!(f
            .sup_on_ball(Point::new(0.33333, 0.512345), 1e-6)
            .is_err());
    }

    proptest! {
        #[test]
        fn sup_monotone_in_radius(a in -5.0f64..5.0, b in -5.0f64..5.0) {
            let d = upper_half_plane();
            let g = build_grid(&d, d.anchor, 1.0, 1.0 / 16.0).unwrap();
            let f = ScalarField::from_fn(&g, |p| (a * p.x).sin() * (b * p.y + 1.0).cos() - p.y);
            let mut prev = f64::NEG_INFINITY;
            for &r in &[0.25, 0.5, 0.75, 1.0] {
                let s = f.sup_on_ball(g.x0(), r).unwrap();
                prop_assert!(s >= prev);
                prev = s;
            }
            // sphere nodes are a subset of ball nodes
            for &r in &[0.5, 1.0] {
                let ball = f.osc_on_ball(g.x0(), r).unwrap();
                let sphere = f.osc_on_sphere(g.x0(), r, g.spacing()).unwrap();
                prop_assert!(ball >= sphere);
            }
        }
    }

    #[test]
    fn cutoff_examples() {
        let d = upper_half_plane();
        let g = grid_64(&d);
        let u = ScalarField::from_fn(&g, |p| p.y - 0.5);
        let h = cutoff_h(&u);
        for (i, j, c) in g.nodes() {
            match c {
                NodeClass::Exterior => {}
                NodeClass::LateralBoundary => assert_eq!(h.value(i, j), 0.0),
                _ => {
                    let q = g.pos(i, j);
                    if q.y < 0.5 {
                        assert_eq!(h.value(i, j), 0.0);
                    } else {
                        assert!((h.value(i, j) - (q.y - 0.5)).abs() < 1e-15);
                    }
                    assert!(h.value(i, j) >= 0.0);
                }
            }
        }

        // nonnegative field: h = u at interior nodes
        let u = ScalarField::from_fn(&g, |p| p.y.abs() + 0.1);
        let h = cutoff_h(&u);
        for (i, j, c) in g.nodes() {
            if c == NodeClass::Interior {
                assert_eq!(h.value(i, j), u.value(i, j));
            }
        }

        // shift bound h^δ ≤ h ≤ h^δ + δ, attained for u = y
        let u = ScalarField::from_fn(&g, |p| p.y);
        let h = cutoff_h(&u);
        let hd = cutoff_h_delta(&u, 0.1).unwrap();
        let mut max_gap: f64 = 0.0;
        for (i, j, c) in g.nodes() {
            if c == NodeClass::Exterior {
                continue;
            }
            let gap = h.value(i, j) - hd.value(i, j);
            assert!(gap >= -1e-15 && gap <= 0.1 + 1e-15);
            max_gap = max_gap.max(gap);
        }
        assert!((max_gap - 0.1).abs() < 1e-12);

        assert!(cutoff_h_delta(&u, 0.0).is_err());
    }

    #[test]
    fn quadrature_of_one_approximates_ball_area() {
        let d = upper_half_plane();
        let g = grid_64(&d);
        // Interior ball: area πr²
        let r = 0.3;
        let c = Point::new(0.0, 0.5);
        let area = ball_quadrature(&g, c, r, |_, _| 1.0);
        assert!(
            (area - PI * r * r).abs() < 0.01 * PI * r * r,
            "area = {area}"
        );
    }

    #[test]
    fn csv_round_trip() {
        let d = quarter_sector();
        let g = build_grid(&d, d.anchor, 1.0, 1.0 / 32.0).unwrap();
        let f = ScalarField::from_fn(&g, |p| 2.0 * p.x * p.y + 0.125);
        let mut buf = Vec::new();
        write_field_csv(&f, &mut buf).unwrap();
        let back = read_field_csv(&g, &mut buf.as_slice()).unwrap();
        assert_eq!(f.sup_abs_diff(&back), 0.0);

        // Mismatched grid rejected
        let other = build_grid(&d, d.anchor, 1.0, 1.0 / 24.0).unwrap();
        assert!(read_field_csv(&other, &mut buf.as_slice()).is_err());
    }
}
