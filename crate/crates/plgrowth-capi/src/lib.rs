//! C ABI over the plgrowth core: opaque handles, status codes, and plain
//! scalar results so other languages can drive the domain queries, the
//! solvers and the growth measurements. The generated header lands in
//! `include/plgrowth.h` at build time.
//!
//! Conventions: every constructor returns a status and writes an owned
//! handle through an out-pointer; handles are released with the matching
//! `_free` function; all pointers must be non-null unless documented.

use std::ffi::c_char;
use std::sync::Arc;

use plgrowth::bounds::{self, BoundParams};
use plgrowth::geometry::{DomainSpec, Point};
use plgrowth::grid::{build_grid, BoundaryValues, Grid, ScalarField};
use plgrowth::infsolve::{solve_inf_harmonic, InfConfig};
use plgrowth::psolve::{solve_p_harmonic, PSolveConfig, SolveStats};
use plgrowth::verify;
use plgrowth::Error;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NonConvergence = 3,
    EmptyRegion = 4,
    Internal = 5,
}

impl From<&Error> for PlgStatus {
    fn from(e: &Error) -> PlgStatus {
        match e {
            Error::InvalidDomain(_)
            | Error::InvalidParameter { .. }
            | Error::GridTooCoarse { .. }
            | Error::Config(_)
            | Error::OutsideBarrierInterval { .. } => PlgStatus::InvalidArgument,
            Error::NonConvergence { .. }
            | Error::ContinuationStage { .. }
            | Error::SolverDiverged { .. } => PlgStatus::NonConvergence,
            Error::EmptyWindow | Error::EmptyNodeSet { .. } | Error::NoPositiveValue => {
                PlgStatus::EmptyRegion
            }
            _ => PlgStatus::Internal,
        }
    }
}

/// Opaque convex domain handle.
pub struct PlgDomain(DomainSpec);
/// Opaque grid handle.
pub struct PlgGrid(Arc<Grid>);
/// Opaque nodal field handle.
pub struct PlgField(ScalarField);

/// Solve statistics mirrored into C.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PlgSolveStats {
    pub iterations: u64,
    pub final_residual: f64,
    pub energy: f64,
    pub converged: bool,
}

impl From<SolveStats> for PlgSolveStats {
    fn from(s: SolveStats) -> Self {
        PlgSolveStats {
            iterations: s.iterations as u64,
            final_residual: s.final_residual,
            energy: s.energy,
            converged: s.converged,
        }
    }
}

fn write_out<T>(out: *mut T, value: T) -> PlgStatus {
    if out.is_null() {
        return PlgStatus::NullPointer;
    }
    unsafe { out.write(value) };
    PlgStatus::Ok
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn plg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

// --- closed-form bounds ------------------------------------------------------

/// θ = 1 − e^{−C·κ₀^{1/n}}.
#[no_mangle]
pub extern "C" fn plg_theta(n: u32, kappa0: f64, c: f64, out_theta: *mut f64) -> PlgStatus {
    match BoundParams::new(n, kappa0, c) {
        Ok(p) => write_out(out_theta, bounds::theta(p)),
        Err(e) => PlgStatus::from(&e),
    }
}

/// α = −log₄(1 − e^{−C·κ₀^{1/n}}).
#[no_mangle]
pub extern "C" fn plg_alpha(n: u32, kappa0: f64, c: f64, out_alpha: *mut f64) -> PlgStatus {
    match BoundParams::new(n, kappa0, c) {
        Ok(p) => write_out(out_alpha, bounds::alpha(p)),
        Err(e) => PlgStatus::from(&e),
    }
}

/// C = −κ₀^{−1/n}·ln(1 − θ_emp).
#[no_mangle]
pub extern "C" fn plg_calibrate_c(
    theta_emp: f64,
    n: u32,
    kappa0: f64,
    out_c: *mut f64,
) -> PlgStatus {
    match bounds::calibrate_c(theta_emp, n, kappa0) {
        Ok(c) => write_out(out_c, c),
        Err(e) => PlgStatus::from(&e),
    }
}

// --- domains -----------------------------------------------------------------

/// Open half-plane { q : n·q > offset } with anchor (ax, ay) on its line.
///
/// # Safety
/// `out_domain` must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn plg_domain_half_plane(
    normal_x: f64,
    normal_y: f64,
    offset: f64,
    anchor_x: f64,
    anchor_y: f64,
    out_domain: *mut *mut PlgDomain,
) -> PlgStatus {
    if out_domain.is_null() {
        return PlgStatus::NullPointer;
    }
    match DomainSpec::half_plane(
        Point::new(normal_x, normal_y),
        offset,
        Point::new(anchor_x, anchor_y),
    ) {
        Ok(d) => {
            unsafe { out_domain.write(Box::into_raw(Box::new(PlgDomain(d)))) };
            PlgStatus::Ok
        }
        Err(e) => PlgStatus::from(&e),
    }
}

/// Convex sector of the given opening (radians, at most π) about the
/// bisector angle, anchored on its boundary.
///
/// # Safety
/// `out_domain` must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn plg_domain_sector(
    vertex_x: f64,
    vertex_y: f64,
    bisector: f64,
    opening: f64,
    anchor_x: f64,
    anchor_y: f64,
    out_domain: *mut *mut PlgDomain,
) -> PlgStatus {
    if out_domain.is_null() {
        return PlgStatus::NullPointer;
    }
    match DomainSpec::sector(
        Point::new(vertex_x, vertex_y),
        bisector,
        opening,
        Point::new(anchor_x, anchor_y),
    ) {
        Ok(d) => {
            unsafe { out_domain.write(Box::into_raw(Box::new(PlgDomain(d)))) };
            PlgStatus::Ok
        }
        Err(e) => PlgStatus::from(&e),
    }
}

/// # Safety
/// `domain` must have been produced by a `plg_domain_*` constructor and not
/// freed before; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn plg_domain_free(domain: *mut PlgDomain) {
    if !domain.is_null() {
        drop(unsafe { Box::from_raw(domain) });
    }
}

/// Membership test for the open set.
///
/// # Safety
/// `domain` must be a live handle; `out_inside` writable.
#[no_mangle]
pub unsafe extern "C" fn plg_domain_contains(
    domain: *const PlgDomain,
    x: f64,
    y: f64,
    out_inside: *mut bool,
) -> PlgStatus {
    if domain.is_null() {
        return PlgStatus::NullPointer;
    }
    let d = unsafe { &*domain };
    write_out(out_inside, d.0.contains(Point::new(x, y)))
}

/// Area ratio |D ∩ B(x₀,r)| / |B(x₀,r)|; `out_std_error` receives 0 for
/// closed forms and the sampling proxy otherwise.
///
/// # Safety
/// `domain` must be a live handle; out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn plg_domain_density_ratio(
    domain: *const PlgDomain,
    x0_x: f64,
    x0_y: f64,
    r: f64,
    samples: u64,
    out_value: *mut f64,
    out_std_error: *mut f64,
) -> PlgStatus {
    if domain.is_null() || out_value.is_null() || out_std_error.is_null() {
        return PlgStatus::NullPointer;
    }
    let d = unsafe { &*domain };
    match d
        .0
        .density_ratio_with_samples(Point::new(x0_x, x0_y), r, samples as usize)
    {
        Ok(est) => {
            unsafe {
                out_value.write(est.value);
                out_std_error.write(est.std_error.unwrap_or(0.0));
            }
            PlgStatus::Ok
        }
        Err(e) => PlgStatus::from(&e),
    }
}

/// κ₀ over the given radii; `out_exact` reports whether the value is a
/// closed form (true) or a finite-radius lower estimate (false).
///
/// # Safety
/// `domain` live; `radii` must point to `radii_len` readable doubles;
/// out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn plg_domain_kappa0(
    domain: *const PlgDomain,
    x0_x: f64,
    x0_y: f64,
    radii: *const f64,
    radii_len: usize,
    samples: u64,
    out_value: *mut f64,
    out_exact: *mut bool,
) -> PlgStatus {
    if domain.is_null() || radii.is_null() || out_value.is_null() || out_exact.is_null() {
        return PlgStatus::NullPointer;
    }
    let d = unsafe { &*domain };
    let radii = unsafe { std::slice::from_raw_parts(radii, radii_len) };
    match d
        .0
        .kappa0_with_samples(Point::new(x0_x, x0_y), radii, samples as usize)
    {
        Ok(est) => {
            unsafe {
                out_value.write(est.value);
                out_exact.write(est.exact);
            }
            PlgStatus::Ok
        }
        Err(e) => PlgStatus::from(&e),
    }
}

// --- grids and fields ----------------------------------------------------------

/// Discretizes D ∩ B(x₀, R); spacing must be at most R/16.
///
/// # Safety
/// `domain` live; `out_grid` writable.
#[no_mangle]
pub unsafe extern "C" fn plg_grid_build(
    domain: *const PlgDomain,
    x0_x: f64,
    x0_y: f64,
    radius: f64,
    spacing: f64,
    out_grid: *mut *mut PlgGrid,
) -> PlgStatus {
    if domain.is_null() || out_grid.is_null() {
        return PlgStatus::NullPointer;
    }
    let d = unsafe { &*domain };
    match build_grid(&d.0, Point::new(x0_x, x0_y), radius, spacing) {
        Ok(g) => {
            unsafe { out_grid.write(Box::into_raw(Box::new(PlgGrid(g)))) };
            PlgStatus::Ok
        }
        Err(e) => PlgStatus::from(&e),
    }
}

/// # Safety
/// `grid` must be a live handle; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn plg_grid_free(grid: *mut PlgGrid) {
    if !grid.is_null() {
        drop(unsafe { Box::from_raw(grid) });
    }
}

/// Node counts per axis.
///
/// # Safety
/// `grid` live; out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn plg_grid_size(
    grid: *const PlgGrid,
    out_nx: *mut usize,
    out_ny: *mut usize,
) -> PlgStatus {
    if grid.is_null() || out_nx.is_null() || out_ny.is_null() {
        return PlgStatus::NullPointer;
    }
    let g = unsafe { &*grid };
    unsafe {
        out_nx.write(g.0.nx());
        out_ny.write(g.0.ny());
    }
    PlgStatus::Ok
}

fn boundary_from_values(grid: &Arc<Grid>, values: &[f64]) -> Result<BoundaryValues, PlgStatus> {
    BoundaryValues::from_node_array(grid, values).map_err(|e| PlgStatus::from(&e))
}

/// Minimizes the discrete p-Dirichlet energy against boundary data read
/// from a full nx·ny row-major array (only lateral and outer-arc entries
/// are used). reg < 0 selects the spacing² default.
///
/// # Safety
/// `grid` live; `boundary_values` must point to `n_values` readable
/// doubles; out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn plg_solve_p(
    grid: *const PlgGrid,
    boundary_values: *const f64,
    n_values: usize,
    p: f64,
    reg: f64,
    tol: f64,
    max_iter: u64,
    out_field: *mut *mut PlgField,
    out_stats: *mut PlgSolveStats,
) -> PlgStatus {
    if grid.is_null() || boundary_values.is_null() || out_field.is_null() || out_stats.is_null() {
        return PlgStatus::NullPointer;
    }
    let g = unsafe { &*grid };
    let values = unsafe { std::slice::from_raw_parts(boundary_values, n_values) };
    let boundary = match boundary_from_values(&g.0, values) {
        Ok(b) => b,
        Err(s) => return s,
    };
    let cfg = PSolveConfig {
        reg: (reg >= 0.0).then_some(reg),
        tol,
        max_iter: max_iter as usize,
        ..PSolveConfig::new(p)
    };
    match solve_p_harmonic(&g.0, &boundary, &cfg) {
        Ok((field, stats)) => {
            unsafe {
                out_field.write(Box::into_raw(Box::new(PlgField(field))));
                out_stats.write(stats.into());
            }
            if stats.converged {
                PlgStatus::Ok
            } else {
                PlgStatus::NonConvergence
            }
        }
        Err(e) => PlgStatus::from(&e),
    }
}

/// Iterates the ∞-harmonic midpoint scheme to a fixed point; same boundary
/// conventions as `plg_solve_p`.
///
/// # Safety
/// As for `plg_solve_p`.
#[no_mangle]
pub unsafe extern "C" fn plg_solve_inf(
    grid: *const PlgGrid,
    boundary_values: *const f64,
    n_values: usize,
    tol: f64,
    max_iter: u64,
    stencil_radius: usize,
    out_field: *mut *mut PlgField,
    out_stats: *mut PlgSolveStats,
) -> PlgStatus {
    if grid.is_null() || boundary_values.is_null() || out_field.is_null() || out_stats.is_null() {
        return PlgStatus::NullPointer;
    }
    let g = unsafe { &*grid };
    let values = unsafe { std::slice::from_raw_parts(boundary_values, n_values) };
    let boundary = match boundary_from_values(&g.0, values) {
        Ok(b) => b,
        Err(s) => return s,
    };
    let cfg = InfConfig {
        tol,
        max_iter: max_iter as usize,
        stencil_radius,
        jacobi: false,
    };
    match solve_inf_harmonic(&g.0, &boundary, &cfg, None) {
        Ok((field, stats)) => {
            unsafe {
                out_field.write(Box::into_raw(Box::new(PlgField(field))));
                out_stats.write(stats.into());
            }
            PlgStatus::Ok
        }
        Err(e) => PlgStatus::from(&e),
    }
}

/// # Safety
/// `field` must be a live handle; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn plg_field_free(field: *mut PlgField) {
    if !field.is_null() {
        drop(unsafe { Box::from_raw(field) });
    }
}

/// Nodal value at (i, j); NaN at exterior nodes.
///
/// # Safety
/// `field` live; `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn plg_field_value(
    field: *const PlgField,
    i: usize,
    j: usize,
    out_value: *mut f64,
) -> PlgStatus {
    if field.is_null() {
        return PlgStatus::NullPointer;
    }
    let f = unsafe { &*field };
    let grid = f.0.grid();
    if i >= grid.nx() || j >= grid.ny() {
        return PlgStatus::InvalidArgument;
    }
    write_out(out_value, f.0.value(i, j))
}

/// sup of the field over the value-carrying nodes of B((x, y), r).
///
/// # Safety
/// `field` live; `out_sup` writable.
#[no_mangle]
pub unsafe extern "C" fn plg_field_sup_on_ball(
    field: *const PlgField,
    x: f64,
    y: f64,
    r: f64,
    out_sup: *mut f64,
) -> PlgStatus {
    if field.is_null() {
        return PlgStatus::NullPointer;
    }
    let f = unsafe { &*field };
    match f.0.sup_on_ball(Point::new(x, y), r) {
        Ok(v) => write_out(out_sup, v),
        Err(e) => PlgStatus::from(&e),
    }
}

/// Least-squares growth exponent of log M(r) against log r over dyadic
/// radii (three or more, ratio 2 or 4, within R/4).
///
/// # Safety
/// `field` live; `radii` readable for `radii_len` doubles; `out_alpha`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn plg_field_growth_alpha(
    field: *const PlgField,
    x0_x: f64,
    x0_y: f64,
    radii: *const f64,
    radii_len: usize,
    out_alpha: *mut f64,
) -> PlgStatus {
    if field.is_null() || radii.is_null() {
        return PlgStatus::NullPointer;
    }
    let f = unsafe { &*field };
    let radii = unsafe { std::slice::from_raw_parts(radii, radii_len) };
    match verify::measure_growth(&f.0, Point::new(x0_x, x0_y), radii) {
        Ok(table) => write_out(out_alpha, table.alpha_fit),
        Err(e) => PlgStatus::from(&e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn bounds_round_trip_over_ffi() {
        let mut theta = 0.0;
        assert_eq!(plg_theta(2, 0.25, 1.0, &mut theta), PlgStatus::Ok);
        assert!((theta - 0.3934693402873666).abs() < 1e-12);
        let mut alpha = 0.0;
        assert_eq!(plg_alpha(2, 0.25, 1.0, &mut alpha), PlgStatus::Ok);
        assert!((alpha - 0.672838).abs() < 1e-6);
        let mut c = 0.0;
        assert_eq!(plg_calibrate_c(theta, 2, 0.25, &mut c), PlgStatus::Ok);
        assert!((c - 1.0).abs() < 1e-12);
        assert_eq!(
            plg_theta(2, 0.0, 1.0, &mut theta),
            PlgStatus::InvalidArgument
        );
        assert_eq!(plg_theta(2, 0.25, 1.0, ptr::null_mut()), PlgStatus::NullPointer);
    }

    #[test]
    fn domain_grid_solve_over_ffi() {
        unsafe {
            let mut domain: *mut PlgDomain = ptr::null_mut();
            assert_eq!(
                plg_domain_half_plane(0.0, 1.0, 0.0, 0.0, 0.0, &mut domain),
                PlgStatus::Ok
            );
            let mut inside = false;
            assert_eq!(
                plg_domain_contains(domain, 3.0, 0.5, &mut inside),
                PlgStatus::Ok
            );
            assert!(inside);

            let mut value = 0.0;
            let mut se = 0.0;
            assert_eq!(
                plg_domain_density_ratio(domain, 0.0, 0.0, 2.0, 1000, &mut value, &mut se),
                PlgStatus::Ok
            );
            assert_eq!(value, 0.5);
            assert_eq!(se, 0.0);

            let radii = [1.0, 2.0];
            let mut kappa = 0.0;
            let mut exact = false;
            assert_eq!(
                plg_domain_kappa0(
                    domain, 0.0, 0.0, radii.as_ptr(), radii.len(), 1000, &mut kappa, &mut exact
                ),
                PlgStatus::Ok
            );
            assert_eq!(kappa, 0.5);
            assert!(exact);

            let mut grid: *mut PlgGrid = ptr::null_mut();
            assert_eq!(
                plg_grid_build(domain, 0.0, 0.0, 1.0, 1.0 / 32.0, &mut grid),
                PlgStatus::Ok
            );
            let (mut nx, mut ny) = (0usize, 0usize);
            assert_eq!(plg_grid_size(grid, &mut nx, &mut ny), PlgStatus::Ok);
            assert_eq!((nx, ny), (65, 65));

            // boundary data g = y over the full node array
            let g = &(*grid).0;
            let mut data = vec![0.0f64; g.node_count()];
            for (i, j, _) in g.nodes() {
                data[g.idx(i, j)] = g.pos(i, j).y;
            }

            let mut field: *mut PlgField = ptr::null_mut();
            let mut stats = PlgSolveStats {
                iterations: 0,
                final_residual: 0.0,
                energy: 0.0,
                converged: false,
            };
            assert_eq!(
                plg_solve_p(
                    grid,
                    data.as_ptr(),
                    data.len(),
                    4.0,
                    -1.0,
                    1e-10,
                    50_000,
                    &mut field,
                    &mut stats
                ),
                PlgStatus::Ok
            );
            assert!(stats.converged);
            let mut v = 0.0;
            assert_eq!(plg_field_value(field, nx / 2, ny / 2, &mut v), PlgStatus::Ok);
            assert!((v - (*field).0.grid().pos(nx / 2, ny / 2).y).abs() < 1e-8);

            let mut sup = 0.0;
            assert_eq!(
                plg_field_sup_on_ball(field, 0.0, 0.0, 0.5, &mut sup),
                PlgStatus::Ok
            );
            assert!((sup - 0.5).abs() <= 1.5 / 32.0);

            let radii = [1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0];
            let mut alpha = 0.0;
            assert_eq!(
                plg_field_growth_alpha(field, 0.0, 0.0, radii.as_ptr(), radii.len(), &mut alpha),
                PlgStatus::Ok
            );
            assert!((alpha - 1.0).abs() < 0.05);
            plg_field_free(field);

            // ∞-solver over the same data
            let mut inf_field: *mut PlgField = ptr::null_mut();
            assert_eq!(
                plg_solve_inf(
                    grid,
                    data.as_ptr(),
                    data.len(),
                    1e-8,
                    200_000,
                    3,
                    &mut inf_field,
                    &mut stats
                ),
                PlgStatus::Ok
            );
            let mut v = 0.0;
            assert_eq!(
                plg_field_value(inf_field, nx / 2, ny / 2, &mut v),
                PlgStatus::Ok
            );
            assert!((v - (*inf_field).0.grid().pos(nx / 2, ny / 2).y).abs() < 1e-6);
            plg_field_free(inf_field);

            plg_grid_free(grid);
            plg_domain_free(domain);
        }
    }

    #[test]
    fn version_is_nul_terminated() {
        let v = unsafe { std::ffi::CStr::from_ptr(plg_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn header_is_generated() {
        let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/plgrowth.h");
        let text = std::fs::read_to_string(header).expect("header generated by build.rs");
        assert!(text.contains("plg_solve_p"));
        assert!(text.contains("PlgStatus"));
        assert!(text.contains("PLGROWTH_H"));
    }
}
