//! Executable checks for the chain of estimates behind the growth theorem:
//! the Caccioppoli inequality, the interior log-barrier gradient bound, the
//! pointwise cutoff bound, the Gehring–Mostow oscillation step, the dyadic
//! oscillation inequality, Lebesgue monotonicity of the oscillation, and the
//! growth-exponent measurement M(r) with its log-log fit.
//!
//! Discretization slacks are fixed here once: 5% for Caccioppoli, 10% for
//! the barrier bounds, calibrated on 129² grids. Almost-everywhere
//! statements are realized by excluding a one-node collar around node-class
//! transitions.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::bounds::{self, BoundParams, LogBarrier};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::grid::{ball_quadrature, cutoff_h, discrete_gradient, NodeClass, ScalarField};

/// Relative slack of the Caccioppoli check.
pub const CACCIOPPOLI_SLACK: f64 = 0.05;
/// Relative slack of the interior gradient bound check.
pub const LEMMA1_SLACK: f64 = 0.10;
/// Relative slack of the pointwise cutoff bound check.
pub const POINTWISE_SLACK: f64 = 0.10;
/// Default collar width (in nodes) around class transitions.
pub const DEFAULT_COLLAR: usize = 1;

/// Measured growth data: dyadic radii, M(r) = sup of the field over
/// D ∩ B(x₀, r), the dyadic contractions θ_emp = M(r)/M(4r), the least
/// squares exponent of log M against log r, and the weakest dyadic pair
/// exponent −log₄ θ (`alpha_floor`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthTable {
    pub anchor: Point,
    pub radii: Vec<f64>,
    pub m_values: Vec<f64>,
    pub theta_emp: Vec<f64>,
    pub alpha_fit: f64,
    pub alpha_floor: f64,
}

/// Outcome of a single estimate check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub passed: bool,
    pub metadata: BTreeMap<String, f64>,
}

impl EstimateReport {
    fn new(name: &str, lhs: f64, rhs: f64, passed: bool) -> EstimateReport {
        EstimateReport {
            name: name.to_string(),
            lhs,
            rhs,
            slack: rhs - lhs,
            passed,
            metadata: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.metadata.insert(key.to_string(), value);
        self
    }
}

/// Radial hat cutoff ξ: 1 on B_{r/2}, linear to 0 on ∂B_r, 0 outside.
pub fn radial_hat(center: Point, r: f64, q: Point) -> f64 {
    let d = q.distance(center);
    if d <= r / 2.0 {
        1.0
    } else if d >= r {
        0.0
    } else {
        2.0 * (1.0 - d / r)
    }
}

fn require_ball_in_window(field: &ScalarField, center: Point, r: f64) -> Result<()> {
    let grid = field.grid();
    if center.distance(grid.x0()) + r > grid.radius() + grid.spacing() / 2.0 + 1e-12 {
        return Err(Error::BallOutsideWindow {
            cx: center.x,
            cy: center.y,
            r,
        });
    }
    Ok(())
}

fn require_ball_interior(field: &ScalarField, center: Point, r: f64) -> Result<()> {
    require_ball_in_window(field, center, r)?;
    let grid = field.grid();
    for (i, j, c) in grid.nodes() {
        if grid.pos(i, j).distance(center) <= r && c != NodeClass::Interior {
            return Err(Error::BallNotInterior {
                cx: center.x,
                cy: center.y,
                r,
            });
        }
    }
    Ok(())
}

fn barrier_covers(field_sup: f64, barrier: &LogBarrier) -> Result<()> {
    if field_sup > barrier.m4r {
        return Err(Error::OutsideBarrierInterval {
            t: field_sup,
            m4r: barrier.m4r,
        });
    }
    Ok(())
}

/// Caccioppoli inequality for φ(u_p) with the radial hat cutoff:
///
///   (∫_{B_r} |∇φ(u_p)|^p ξ^p)^{1/p} ≤ (p/(p−1)) (∫_{B_r} |∇ξ|^p)^{1/p},
///
/// both sides by midpoint quadrature over the value-carrying nodes of the
/// ball; |∇φ(u)| is evaluated as φ'(u)|∇u|. Passes with 5% slack.
pub fn check_caccioppoli(
    u_p: &ScalarField,
    p: f64,
    barrier: &LogBarrier,
    x0: Point,
    r: f64,
) -> Result<EstimateReport> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("needs p > 1, got {p}"),
        });
    }
    require_ball_in_window(u_p, x0, r)?;
    let grid = u_p.grid().clone();
    barrier_covers(u_p.sup_on_ball(x0, r)?, barrier)?;

    let grad = discrete_gradient(u_p);
    let lhs_p = ball_quadrature(&grid, x0, r, |i, j| {
        let xi = radial_hat(x0, r, grid.pos(i, j));
        if xi == 0.0 {
            return 0.0;
        }
        let dphi = barrier.d1_unchecked(u_p.value(i, j)) * grad.magnitude(i, j);
        (dphi * xi).powf(p)
    });
    let rhs_p = ball_quadrature(&grid, x0, r, |i, j| {
        let d = grid.pos(i, j).distance(x0);
        if d > r / 2.0 && d < r {
            (2.0 / r).powf(p)
        } else {
            0.0
        }
    });
    let lhs = lhs_p.powf(1.0 / p);
    let rhs = (p / (p - 1.0)) * rhs_p.powf(1.0 / p);
    let passed = lhs <= rhs * (1.0 + CACCIOPPOLI_SLACK);
    Ok(EstimateReport::new("caccioppoli", lhs, rhs, passed)
        .with("r", r)
        .with("p", p)
        .with("eps", barrier.eps)
        .with("ratio", lhs / rhs))
}

/// Interior gradient bound ‖∇φ(u)‖_{L∞(B_{(1−δ)r})} ≤ 1/(δr) for a barrier
/// whose conditions hold on the field's range over the (domain-interior)
/// ball. Passes with 10% slack.
pub fn check_lemma1(
    u: &ScalarField,
    barrier: &LogBarrier,
    center: Point,
    r: f64,
    delta: f64,
) -> Result<EstimateReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: format!("must lie in (0, 1), got {delta}"),
        });
    }
    require_ball_interior(u, center, r)?;
    let grid = u.grid().clone();
    let sup = u.sup_on_ball(center, r)?;
    barrier_covers(sup, barrier)?;
    // conditions (C-1)-(C-4) on the field's range
    let lo = sup - u.osc_on_ball(center, r)?;
    let hi = sup.min(barrier.m4r);
    if lo < hi {
        let rep = bounds::check_conditions(barrier, (lo, hi), 1024)?;
        if !rep.passed {
            return Err(Error::BarrierConditionsFailed { lo, hi });
        }
    }

    let grad = discrete_gradient(u);
    let shrunk = (1.0 - delta) * r;
    let mut lhs: f64 = 0.0;
    for (i, j, c) in grid.nodes() {
        if c == NodeClass::Exterior {
            continue;
        }
        if grid.pos(i, j).distance(center) <= shrunk {
            let dphi = barrier.d1_unchecked(u.value(i, j)) * grad.magnitude(i, j);
            lhs = lhs.max(dphi);
        }
    }
    let rhs = 1.0 / (delta * r);
    let passed = lhs <= rhs * (1.0 + LEMMA1_SLACK);
    Ok(EstimateReport::new("lemma1", lhs, rhs, passed)
        .with("r", r)
        .with("delta", delta)
        .with("eps", barrier.eps))
}

/// True when the node sits within `collar` Chebyshev steps of a node of a
/// different class or of the grid edge: the a.e. exclusion set.
fn in_collar(field: &ScalarField, i: usize, j: usize, collar: usize) -> bool {
    let grid = field.grid();
    let own = grid.class(i, j);
    let c = collar as i64;
    let (ii, jj) = (i as i64, j as i64);
    for dj in -c..=c {
        for di in -c..=c {
            let (ni, nj) = (ii + di, jj + dj);
            if ni < 0 || nj < 0 || ni >= grid.nx() as i64 || nj >= grid.ny() as i64 {
                return true;
            }
            if grid.class(ni as usize, nj as usize) != own {
                return true;
            }
        }
    }
    false
}

/// Pointwise barrier bound |∇φ(h)| ≤ 2/r a.e. on B(x₀, 2r) for the cutoff
/// h, with the one-node collar realizing the a.e. allowance. Passes with
/// 10% slack.
pub fn check_pointwise(
    h: &ScalarField,
    barrier: &LogBarrier,
    x0: Point,
    r: f64,
) -> Result<EstimateReport> {
    check_pointwise_with_collar(h, barrier, x0, r, DEFAULT_COLLAR)
}

pub fn check_pointwise_with_collar(
    h: &ScalarField,
    barrier: &LogBarrier,
    x0: Point,
    r: f64,
    collar: usize,
) -> Result<EstimateReport> {
    require_ball_in_window(h, x0, 2.0 * r)?;
    let grid = h.grid().clone();
    let reach = (4.0 * r).min(grid.radius());
    barrier_covers(h.sup_on_ball(x0, reach)?, barrier)?;

    let grad = discrete_gradient(h);
    let mut lhs: f64 = 0.0;
    let mut considered = 0usize;
    for (i, j, c) in grid.nodes() {
        if c == NodeClass::Exterior {
            continue;
        }
        if grid.pos(i, j).distance(x0) > 2.0 * r {
            continue;
        }
        if in_collar(h, i, j, collar) {
            continue;
        }
        let dphi = barrier.d1_unchecked(h.value(i, j)) * grad.magnitude(i, j);
        lhs = lhs.max(dphi);
        considered += 1;
    }
    if considered == 0 {
        return Err(Error::EmptyNodeSet {
            what: format!("B(({}, {}), {}) minus the collar", x0.x, x0.y, 2.0 * r),
        });
    }
    let rhs = 2.0 / r;
    let passed = lhs <= rhs * (1.0 + POINTWISE_SLACK);
    Ok(EstimateReport::new("pointwise", lhs, rhs, passed)
        .with("r", r)
        .with("eps", barrier.eps)
        .with("collar", collar as f64))
}

/// Gehring–Mostow oscillation step in the plane:
///
///   (osc(φ(h); B_r))² log 2 ≤ C ∫_{B_{2r}} |∇φ(h)|² dx.
///
/// The constant is unspecified, so the check reports the implied
/// C_GM = lhs/∫ and passes whenever it is finite; a zero integral against a
/// nonzero oscillation flags a resolution failure.
pub fn check_gehring_mostow(
    h: &ScalarField,
    barrier: &LogBarrier,
    x0: Point,
    r: f64,
) -> Result<EstimateReport> {
    require_ball_in_window(h, x0, 2.0 * r)?;
    let grid = h.grid().clone();
    let reach = (4.0 * r).min(grid.radius());
    barrier_covers(h.sup_on_ball(x0, reach)?, barrier)?;

    let phi_h = h.map(|t| barrier.eval_unchecked(t));
    let osc = phi_h.osc_on_ball(x0, r)?;
    let lhs = osc * osc * 2f64.ln();

    let grad = discrete_gradient(h);
    let integral = ball_quadrature(&grid, x0, 2.0 * r, |i, j| {
        let dphi = barrier.d1_unchecked(h.value(i, j)) * grad.magnitude(i, j);
        dphi * dphi
    });
    if integral == 0.0 && osc > 0.0 {
        return Err(Error::ResolutionFailure(format!(
            "zero Dirichlet integral against oscillation {osc}"
        )));
    }
    let c_gm = if osc == 0.0 { 0.0 } else { lhs / integral };
    let passed = c_gm.is_finite();
    Ok(EstimateReport::new("gehring_mostow", lhs, integral, passed)
        .with("r", r)
        .with("eps", barrier.eps)
        .with("c_gm", c_gm))
}

/// Measures M(r) over the dyadic radii and fits the growth exponent.
///
/// Radii must be at least three in geometric progression of ratio 2 or 4,
/// within (0, R/4] so that M(4r) stays measurable on the same window.
pub fn measure_growth(u: &ScalarField, x0: Point, radii: &[f64]) -> Result<GrowthTable> {
    let grid = u.grid();
    if radii.len() < 3 {
        return Err(Error::InvalidParameter {
            name: "radii",
            reason: format!("need at least 3 dyadic radii, got {}", radii.len()),
        });
    }
    let ratio = radii[1] / radii[0];
    if !((ratio - 2.0).abs() < 1e-9 || (ratio - 4.0).abs() < 1e-9) {
        return Err(Error::InvalidParameter {
            name: "radii",
            reason: format!("geometric ratio must be 2 or 4, got {ratio}"),
        });
    }
    for w in radii.windows(2) {
        if (w[1] / w[0] - ratio).abs() > 1e-9 {
            return Err(Error::InvalidParameter {
                name: "radii",
                reason: "radii must form a geometric progression".into(),
            });
        }
    }
    let r_max = grid.radius() / 4.0;
    for &r in radii {
        if !(r > 0.0) || r > r_max * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter {
                name: "radii",
                reason: format!(
                    "radius {r} outside (0, R/4 = {r_max}]: dyadic measurements need M(4r) on-window"
                ),
            });
        }
    }

    let mut m_values = Vec::with_capacity(radii.len());
    for &r in radii {
        m_values.push(u.sup_on_ball(x0, r)?);
    }
    if m_values.iter().all(|&m| m <= 0.0) {
        return Err(Error::NoPositiveValue);
    }

    // dyadic-4 contractions M(r)/M(4r) over pairs present in the list
    let mut theta_emp = Vec::new();
    for (k, &r) in radii.iter().enumerate() {
        if let Some(k4) = radii
            .iter()
            .position(|&s| (s / r - 4.0).abs() < 1e-9 * (s / r))
        {
            if m_values[k4] > 0.0 && m_values[k] >= 0.0 {
                theta_emp.push(m_values[k] / m_values[k4]);
            }
        }
    }

    // least squares of log M against log r over positive entries
    let pts: Vec<(f64, f64)> = radii
        .iter()
        .zip(&m_values)
        .filter(|(_, &m)| m > 0.0)
        .map(|(&r, &m)| (r.ln(), m.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "radii",
            reason: "fewer than two radii with positive M(r); cannot fit an exponent".into(),
        });
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let alpha_fit = (n * sxy - sx * sy) / (n * sxx - sx * sx);

    // the weakest dyadic contraction, as an exponent
    let alpha_floor = theta_emp
        .iter()
        .filter(|&&t| t > 0.0)
        .map(|&t| -t.ln() / 4f64.ln())
        .fold(f64::INFINITY, f64::min);

    Ok(GrowthTable {
        anchor: x0,
        radii: radii.to_vec(),
        m_values,
        theta_emp,
        alpha_fit,
        alpha_floor,
    })
}

/// Oscillation inequality M(r) ≤ θ M(4r): every measured contraction must
/// sit below θ(n, κ₀, C). Reports the tightest pair and the C it calibrates.
pub fn check_oscillation_inequality(
    table: &GrowthTable,
    params: BoundParams,
) -> Result<EstimateReport> {
    if table.theta_emp.is_empty() {
        return Err(Error::InvalidParameter {
            name: "table",
            reason: "no dyadic-4 pair with positive M(4r)".into(),
        });
    }
    let theta_bound = bounds::theta(params);
    let worst = table
        .theta_emp
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let passed = worst <= theta_bound;
    let mut rep = EstimateReport::new("oscillation", worst, theta_bound, passed)
        .with("kappa0", params.kappa0)
        .with("n", params.n as f64)
        .with("C", params.c);
    if worst > 0.0 && worst < 1.0 {
        rep = rep.with(
            "c_calibrated",
            bounds::calibrate_c(worst, params.n, params.kappa0)?,
        );
    }
    Ok(rep)
}

/// Lebesgue monotonicity proxy: for the composed barrier of the cutoff,
/// |osc(φ(h); B_r) − osc(φ(h); ∂B_r)| must stay within the discrete slack
/// 4·spacing·max|∇φ(h)| at every radius. The shell width is one spacing.
pub fn check_monotone_osc(
    u: &ScalarField,
    barrier: &LogBarrier,
    x0: Point,
    radii: &[f64],
) -> Result<EstimateReport> {
    if radii.is_empty() {
        return Err(Error::InvalidParameter {
            name: "radii",
            reason: "must be non-empty".into(),
        });
    }
    let grid = u.grid().clone();
    let h_field = cutoff_h(u);
    barrier_covers(h_field.sup_on_ball(x0, grid.radius())?, barrier)?;
    let phi_h = h_field.map(|t| barrier.eval_unchecked(t));
    let grad = discrete_gradient(&phi_h);

    let mut all_passed = true;
    let mut worst_gap = f64::NEG_INFINITY;
    let mut worst_slack = 0.0;
    let mut worst_r = radii[0];
    for &r in radii {
        require_ball_in_window(u, x0, r)?;
        let ball = phi_h.osc_on_ball(x0, r)?;
        let sphere = phi_h.osc_on_sphere(x0, r, grid.spacing())?;
        let gap = (ball - sphere).abs();
        let mut max_grad: f64 = 0.0;
        for (i, j, c) in grid.nodes() {
            if c != NodeClass::Exterior && grid.pos(i, j).distance(x0) <= r {
                max_grad = max_grad.max(grad.magnitude(i, j));
            }
        }
        let slack = 4.0 * grid.spacing() * max_grad;
        if gap > slack {
            all_passed = false;
        }
        if gap - slack > worst_gap - worst_slack {
            worst_gap = gap;
            worst_slack = slack;
            worst_r = r;
        }
    }
    Ok(
        EstimateReport::new("monotone_osc", worst_gap, worst_slack, all_passed)
            .with("r", worst_r)
            .with("eps", barrier.eps),
    )
}
