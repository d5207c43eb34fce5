//! Experiment runner: JSON configs in, solve + checks out, artifacts on disk.
//!
//! A run writes, into its own output directory: the field CSV with a grid
//! JSON header, solver stats, the growth table and estimate reports (JSON
//! plus a flat CSV), a log-log growth plot, and a manifest that echoes the
//! resolved config so the run reproduces from the manifest alone. Outputs
//! are deterministic: fixed seeds, fixed sweep orders, no timestamps.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::bounds::{self, BoundParams, LogBarrier};
use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Point, QMC_BASES, QMC_START};
use crate::grid::{
    build_grid, cutoff_h, write_field_csv, BoundaryValues, Grid, NodeClass, ScalarField,
};
use crate::infsolve::{self, InfConfig};
use crate::psolve::{self, PSolveConfig, SolveStats};
use crate::svg;
use crate::verify::{self, EstimateReport, GrowthTable};

/// Environment variable capping check parallelism; default 1.
pub const THREADS_ENV: &str = "PLGROWTH_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    P,
    Inf,
    Continuation,
}

/// Named boundary benchmarks or tabulated per-node values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoundarySpec {
    Named(String),
    Tabulated { tabulated: Vec<(usize, usize, f64)> },
}

/// One requested check with its parameters. Omitted fields take the
/// defaults documented on each variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum CheckSpec {
    /// measure_growth; default radii {R/16, R/8, R/4}.
    Growth { radii: Option<Vec<f64>> },
    /// Oscillation inequality against θ(n, κ₀, C); κ₀ defaults to the
    /// domain's closed form (errors when none exists and none is given).
    Oscillation {
        n: Option<u32>,
        kappa0: Option<f64>,
        #[serde(rename = "C")]
        c: f64,
    },
    /// Caccioppoli on an interior ball; defaults: center = anchor + inward
    /// R/2, r = R/4, margin_factor = 0.5 and eps_factor = 0.5 of the ball
    /// oscillation.
    Caccioppoli {
        p: Option<f64>,
        center: Option<Point>,
        r: Option<f64>,
        eps_factor: Option<f64>,
        margin_factor: Option<f64>,
    },
    /// Interior gradient bound; same ball defaults, δ = 0.25,
    /// eps_factor = 0.1.
    Lemma1 {
        center: Option<Point>,
        r: Option<f64>,
        delta: Option<f64>,
        eps_factor: Option<f64>,
    },
    /// Pointwise cutoff bound at the anchor; default r = R/4,
    /// eps_factor = 0.1 of the cutoff oscillation.
    Pointwise {
        r: Option<f64>,
        eps_factor: Option<f64>,
    },
    /// Gehring–Mostow constant report; same defaults as pointwise.
    GehringMostow {
        r: Option<f64>,
        eps_factor: Option<f64>,
    },
    /// Lebesgue monotonicity of the oscillation; default radii
    /// {R/8, R/4}, eps_factor = 0.1.
    Monotone {
        radii: Option<Vec<f64>>,
        eps_factor: Option<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub domain: DomainSpec,
    #[serde(rename = "R")]
    pub r_window: f64,
    pub spacing: f64,
    pub solver: SolverKind,
    #[serde(default)]
    pub psolve: Option<PSolveConfig>,
    #[serde(default)]
    pub infsolve: Option<InfConfig>,
    pub boundary: BoundarySpec,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        // accept either a bare config or a manifest wrapping one
        let value: serde_json::Value = serde_json::from_str(text)?;
        let config_value = match value.get("config") {
            Some(inner) => inner.clone(),
            None => value,
        };
        let cfg: ExperimentConfig = serde_json::from_value(config_value)
            .map_err(|e| Error::Config(format!("invalid experiment config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = fs::read_to_string(path)?;
        ExperimentConfig::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        if !(self.r_window > 0.0) {
            return Err(Error::Config(format!(
                "window radius R must be positive, got {}",
                self.r_window
            )));
        }
        if !(self.spacing > 0.0) {
            return Err(Error::Config(format!(
                "spacing must be positive, got {}",
                self.spacing
            )));
        }
        if self.spacing > self.r_window / 16.0 * (1.0 + 1e-12) {
            return Err(Error::GridTooCoarse {
                spacing: self.spacing,
                radius: self.r_window,
                limit: self.r_window / 16.0,
            });
        }
        if let Some(p) = &self.psolve {
            p.validate()?;
        }
        if let Some(i) = &self.infsolve {
            i.validate()?;
        }
        if let BoundarySpec::Named(name) = &self.boundary {
            let _ = benchmark_fn(name, &self.domain)?;
        }
        Ok(())
    }
}

/// Reference field of a named benchmark, when an exact solution exists.
pub fn benchmark_exact(name: &str, domain: &DomainSpec) -> Option<Box<dyn Fn(Point) -> f64>> {
    match name {
        "linear" | "aronsson" | "harmonic_sector" => benchmark_fn(name, domain).ok(),
        _ => None,
    }
}

/// Boundary-data function of a named benchmark.
///
/// `linear` needs a half-plane (signed distance off the boundary line);
/// `aronsson` and `harmonic_sector` need a right-angle sector, rotated into
/// the frame of its rays; `zero_lateral_bump` applies to any domain and is
/// assembled per node class, so it has no pointwise closure here.
pub fn benchmark_fn(name: &str, domain: &DomainSpec) -> Result<Box<dyn Fn(Point) -> f64>> {
    match name {
        "linear" => match &domain.kind {
            crate::geometry::DomainKind::HalfPlane { normal, offset } => {
                let (n, c) = (*normal, *offset);
                Ok(Box::new(move |q: Point| n.dot(q) - c))
            }
            _ => Err(Error::Config(
                "benchmark `linear` needs a half_plane domain".into(),
            )),
        },
        "aronsson" | "harmonic_sector" => match &domain.kind {
            crate::geometry::DomainKind::Sector {
                vertex,
                bisector,
                opening,
            } => {
                if (opening - std::f64::consts::FRAC_PI_2).abs() > 1e-9 {
                    return Err(Error::Config(format!(
                        "benchmark `{name}` needs a sector of opening π/2, got {opening}"
                    )));
                }
                let v = *vertex;
                let is_aronsson = name == "aronsson";
                // rotate into the canonical frame: aronsson about the
                // bisector, the harmonic pairing about the rays
                let rot = if is_aronsson {
                    -bisector
                } else {
                    -(bisector - std::f64::consts::FRAC_PI_4)
                };
                let (cos_t, sin_t) = (rot.cos(), rot.sin());
                Ok(Box::new(move |q: Point| {
                    let d = q - v;
                    let x = cos_t * d.x - sin_t * d.y;
                    let y = sin_t * d.x + cos_t * d.y;
                    if is_aronsson {
                        infsolve::exact_aronsson(Point::new(x, y))
                    } else {
                        2.0 * x * y
                    }
                }))
            }
            _ => Err(Error::Config(format!(
                "benchmark `{name}` needs a sector domain"
            ))),
        },
        "zero_lateral_bump" => {
            // validated here, assembled in boundary_values
            Ok(Box::new(|_| 0.0))
        }
        other => Err(Error::Config(format!("unknown benchmark `{other}`"))),
    }
}

/// Assembles boundary data for the run.
pub fn boundary_values(
    grid: &Arc<Grid>,
    domain: &DomainSpec,
    spec: &BoundarySpec,
) -> Result<BoundaryValues> {
    match spec {
        BoundarySpec::Named(name) if name == "zero_lateral_bump" => {
            // zero on ∂D, a compactly supported nonnegative bump on the
            // outer arc around the inward direction
            let x0 = grid.x0();
            let center_angle = domain.inward_direction().angle();
            let width = bump_width(grid, domain, center_angle);
            Ok(BoundaryValues::from_classed_fn(grid, move |q, class| {
                match class {
                    NodeClass::OuterArc => {
                        let mut rel = (q - x0).angle() - center_angle;
                        while rel > std::f64::consts::PI {
                            rel -= std::f64::consts::TAU;
                        }
                        while rel <= -std::f64::consts::PI {
                            rel += std::f64::consts::TAU;
                        }
                        if rel.abs() < width / 2.0 {
                            let t = std::f64::consts::PI * rel / width;
                            t.cos().powi(2)
                        } else {
                            0.0
                        }
                    }
                    _ => 0.0,
                }
            }))
        }
        BoundarySpec::Named(name) => {
            let f = benchmark_fn(name, domain)?;
            Ok(BoundaryValues::from_fn(grid, f))
        }
        BoundarySpec::Tabulated { tabulated } => {
            let mut map: BTreeMap<(usize, usize), f64> = BTreeMap::new();
            for &(i, j, v) in tabulated {
                map.insert((i, j), v);
            }
            let mut array = vec![f64::NAN; grid.node_count()];
            for (i, j, c) in grid.nodes() {
                if c.is_boundary() {
                    match map.get(&(i, j)) {
                        Some(&v) => array[grid.idx(i, j)] = v,
                        None => {
                            return Err(Error::Config(format!(
                                "tabulated boundary misses node ({i}, {j})"
                            )))
                        }
                    }
                }
            }
            BoundaryValues::from_node_array(grid, &array)
        }
    }
}

/// Half the usable arc, capped at π/2 so the bump stays compactly supported.
fn bump_width(grid: &Arc<Grid>, _domain: &DomainSpec, center_angle: f64) -> f64 {
    let x0 = grid.x0();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, j, c) in grid.nodes() {
        if c == NodeClass::OuterArc {
            let mut rel = (grid.pos(i, j) - x0).angle() - center_angle;
            while rel > std::f64::consts::PI {
                rel -= std::f64::consts::TAU;
            }
            while rel <= -std::f64::consts::PI {
                rel += std::f64::consts::TAU;
            }
            lo = lo.min(rel);
            hi = hi.max(rel);
        }
    }
    if !lo.is_finite() {
        return std::f64::consts::FRAC_PI_2;
    }
    (hi - lo).min(std::f64::consts::PI) * 0.5
}

/// Everything a run produces in memory before writing artifacts.
pub struct RunOutcome {
    pub field: ScalarField,
    pub stats: Vec<(f64, SolveStats)>,
    pub diffs: Vec<f64>,
    pub growth: Option<GrowthTable>,
    pub reports: Vec<EstimateReport>,
    pub all_passed: bool,
}

fn default_ball(domain: &DomainSpec, r_window: f64) -> (Point, f64) {
    let dir = domain.inward_direction();
    let center = domain.anchor + dir.scale(r_window / 2.0);
    (center, r_window / 4.0)
}

fn run_check(
    check: &CheckSpec,
    field: &ScalarField,
    domain: &DomainSpec,
    r_window: f64,
    solved_p: Option<f64>,
) -> Result<(Vec<EstimateReport>, Option<GrowthTable>)> {
    let grid = field.grid();
    let x0 = grid.x0();
    match check {
        CheckSpec::Growth { radii } => {
            let radii = radii
                .clone()
                .unwrap_or_else(|| vec![r_window / 16.0, r_window / 8.0, r_window / 4.0]);
            let table = verify::measure_growth(field, x0, &radii)?;
            Ok((Vec::new(), Some(table)))
        }
        CheckSpec::Oscillation { n, kappa0, c } => {
            let n = n.unwrap_or(2);
            let kappa0 = match kappa0 {
                Some(k) => *k,
                None => {
                    let est = domain.kappa0(domain.anchor, &[r_window])?;
                    if !est.exact {
                        return Err(Error::Config(
                            "oscillation check: domain has no closed-form kappa0; pass one explicitly"
                                .into(),
                        ));
                    }
                    est.value
                }
            };
            let params = BoundParams::new(n, kappa0, *c)?;
            let radii = vec![
                r_window / 64.0,
                r_window / 16.0,
                r_window / 4.0,
            ];
            let table = verify::measure_growth(field, x0, &radii)?;
            let rep = verify::check_oscillation_inequality(&table, params)?;
            Ok((vec![rep], None))
        }
        CheckSpec::Caccioppoli {
            p,
            center,
            r,
            eps_factor,
            margin_factor,
        } => {
            let (dc, dr) = default_ball(domain, r_window);
            let center = center.unwrap_or(dc);
            let r = r.unwrap_or(dr);
            let p = p.or(solved_p).ok_or_else(|| {
                Error::Config("caccioppoli check needs `p` when the solver was not a p-solve".into())
            })?;
            let sup = field.sup_on_ball(center, r)?;
            let osc = field.osc_on_ball(center, r)?;
            let margin = margin_factor.unwrap_or(0.5) * osc;
            let eps = (eps_factor.unwrap_or(0.5) * osc).max(1e-12);
            let barrier = LogBarrier::new(sup + margin, eps)?;
            let rep = verify::check_caccioppoli(field, p, &barrier, center, r)?;
            Ok((vec![rep], None))
        }
        CheckSpec::Lemma1 {
            center,
            r,
            delta,
            eps_factor,
        } => {
            let (dc, dr) = default_ball(domain, r_window);
            let center = center.unwrap_or(dc);
            let r = r.unwrap_or(dr);
            let sup = field.sup_on_ball(center, r)?;
            let osc = field.osc_on_ball(center, r)?;
            let eps = (eps_factor.unwrap_or(0.1) * osc).max(1e-12);
            let barrier = LogBarrier::new(sup, eps)?;
            let rep =
                verify::check_lemma1(field, &barrier, center, r, delta.unwrap_or(0.25))?;
            Ok((vec![rep], None))
        }
        CheckSpec::Pointwise { r, eps_factor } => {
            let r = r.unwrap_or(r_window / 4.0);
            let h = cutoff_h(field);
            let reach = (4.0 * r).min(grid.radius());
            let m4r = h.sup_on_ball(x0, reach)?;
            let osc = h.osc_on_ball(x0, reach)?;
            let eps = (eps_factor.unwrap_or(0.1) * osc).max(1e-12);
            let barrier = LogBarrier::new(m4r, eps)?;
            let rep = verify::check_pointwise(&h, &barrier, x0, r)?;
            Ok((vec![rep], None))
        }
        CheckSpec::GehringMostow { r, eps_factor } => {
            let r = r.unwrap_or(r_window / 4.0);
            let h = cutoff_h(field);
            let reach = (4.0 * r).min(grid.radius());
            let m4r = h.sup_on_ball(x0, reach)?;
            let osc = h.osc_on_ball(x0, reach)?;
            let eps = (eps_factor.unwrap_or(0.1) * osc).max(1e-12);
            let barrier = LogBarrier::new(m4r, eps)?;
            let rep = verify::check_gehring_mostow(&h, &barrier, x0, r)?;
            Ok((vec![rep], None))
        }
        CheckSpec::Monotone { radii, eps_factor } => {
            let radii = radii
                .clone()
                .unwrap_or_else(|| vec![r_window / 8.0, r_window / 4.0]);
            let h = cutoff_h(field);
            let m4r = h.sup_on_ball(x0, grid.radius())?;
            let osc = h.osc_on_ball(x0, grid.radius())?;
            let eps = (eps_factor.unwrap_or(0.1) * osc).max(1e-12);
            let barrier = LogBarrier::new(m4r, eps)?;
            let rep = verify::check_monotone_osc(field, &barrier, x0, &radii)?;
            Ok((vec![rep], None))
        }
    }
}

/// Solves the configured problem without running checks.
pub fn solve_only(config: &ExperimentConfig) -> Result<RunOutcome> {
    config.validate()?;
    let grid = build_grid(
        &config.domain,
        config.domain.anchor,
        config.r_window,
        config.spacing,
    )?;
    let boundary = boundary_values(&grid, &config.domain, &config.boundary)?;

    let mut stats = Vec::new();
    let mut diffs = Vec::new();
    let field = match config.solver {
        SolverKind::P => {
            let pcfg = config
                .psolve
                .clone()
                .ok_or_else(|| Error::Config("solver `p` needs a `psolve` section".into()))?;
            let (field, st) = psolve::solve_p_harmonic(&grid, &boundary, &pcfg)?;
            if !st.converged {
                return Err(Error::NonConvergence {
                    residual: st.final_residual,
                    tol: pcfg.tol,
                    iterations: st.iterations,
                });
            }
            stats.push((pcfg.p, st));
            field
        }
        SolverKind::Continuation => {
            let pcfg = config.psolve.clone().ok_or_else(|| {
                Error::Config("solver `continuation` needs a `psolve` section".into())
            })?;
            if pcfg.continuation.is_empty() {
                return Err(Error::Config(
                    "solver `continuation` needs a non-empty schedule".into(),
                ));
            }
            let cont = psolve::p_continuation(&grid, &boundary, &pcfg)?;
            for (k, st) in cont.stats.iter().enumerate() {
                stats.push((cont.schedule[k], *st));
            }
            diffs = cont.diffs.clone();
            cont.fields.into_iter().next_back().expect("stages exist")
        }
        SolverKind::Inf => {
            let icfg = config.infsolve.clone().unwrap_or_default();
            // seed from the p = 16 continuation stage when a schedule is
            // configured, else from a quick harmonic solve
            let init = match &config.psolve {
                Some(pcfg) if !pcfg.continuation.is_empty() => {
                    let cont = psolve::p_continuation(&grid, &boundary, pcfg)?;
                    for (k, st) in cont.stats.iter().enumerate() {
                        stats.push((cont.schedule[k], *st));
                    }
                    diffs = cont.diffs.clone();
                    let seed = cont
                        .stage_field(16.0)
                        .unwrap_or_else(|| cont.final_field());
                    Some(seed.clone())
                }
                _ => {
                    let mut harmonic = PSolveConfig::new(2.0);
                    harmonic.tol = (icfg.tol * 1e-1).max(1e-12);
                    let (f, st) = psolve::solve_p_harmonic(&grid, &boundary, &harmonic)?;
                    stats.push((2.0, st));
                    Some(f)
                }
            };
            let (field, st) = infsolve::solve_inf_harmonic(&grid, &boundary, &icfg, init.as_ref())?;
            stats.push((f64::INFINITY, st));
            field
        }
    };
    Ok(RunOutcome {
        field,
        stats,
        diffs,
        growth: None,
        reports: Vec::new(),
        all_passed: true,
    })
}

/// Runs the checks of a config against an already computed field.
pub fn run_checks(
    config: &ExperimentConfig,
    field: &ScalarField,
    solved_p: Option<f64>,
) -> Result<(Vec<EstimateReport>, Option<GrowthTable>, bool)> {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(1)
        .max(1);

    let results: Vec<Result<(Vec<EstimateReport>, Option<GrowthTable>)>> = if threads <= 1
        || config.checks.len() <= 1
    {
        config
            .checks
            .iter()
            .map(|c| run_check(c, field, &config.domain, config.r_window, solved_p))
            .collect()
    } else {
        // fan checks out over scoped threads, results kept in input order
        std::thread::scope(|scope| {
            let handles: Vec<_> = config
                .checks
                .chunks(config.checks.len().div_ceil(threads))
                .map(|chunk| {
                    scope.spawn(move || {
                        chunk
                            .iter()
                            .map(|c| {
                                run_check(c, field, &config.domain, config.r_window, solved_p)
                            })
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("check thread panicked"))
                .collect()
        })
    };

    let mut reports = Vec::new();
    let mut growth = None;
    let mut all_passed = true;
    for r in results {
        let (reps, table) = r?;
        for rep in reps {
            all_passed &= rep.passed;
            reports.push(rep);
        }
        if let Some(t) = table {
            growth = Some(t);
        }
    }
    Ok((reports, growth, all_passed))
}

/// Full run: solve, check, persist. Returns the outcome; artifact files are
/// written into `config.output_dir`.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome> {
    let mut outcome = solve_only(config)?;
    let solved_p = match config.solver {
        SolverKind::P | SolverKind::Continuation => config.psolve.as_ref().map(|p| p.p),
        SolverKind::Inf => None,
    };
    let (reports, growth, all_passed) = run_checks(config, &outcome.field, solved_p)?;
    outcome.reports = reports;
    outcome.growth = growth;
    outcome.all_passed = all_passed;
    write_artifacts(config, &outcome)?;
    Ok(outcome)
}

/// Reference α drawn on the plot when an oscillation check is configured.
fn reference_alpha(config: &ExperimentConfig) -> Option<f64> {
    for check in &config.checks {
        if let CheckSpec::Oscillation { n, kappa0, c } = check {
            let n = n.unwrap_or(2);
            let kappa0 = kappa0.or_else(|| {
                let est = config.domain.kappa0(config.domain.anchor, &[1.0]).ok()?;
                est.exact.then_some(est.value)
            })?;
            let params = BoundParams::new(n, kappa0, *c).ok()?;
            return Some(bounds::alpha(params));
        }
    }
    None
}

pub fn write_artifacts(config: &ExperimentConfig, outcome: &RunOutcome) -> Result<()> {
    let dir = &config.output_dir;
    fs::create_dir_all(dir)?;

    let mut field_csv = Vec::new();
    write_field_csv(&outcome.field, &mut field_csv)?;
    fs::write(dir.join("field.csv"), field_csv)?;

    fs::write(
        dir.join("grid.json"),
        serde_json::to_string_pretty(&outcome.field.grid().meta())?,
    )?;

    #[derive(Serialize)]
    struct StatsDoc<'a> {
        stages: Vec<StageDoc>,
        diffs: &'a [f64],
    }
    #[derive(Serialize)]
    struct StageDoc {
        p: Option<f64>,
        stats: SolveStats,
    }
    let stats_doc = StatsDoc {
        stages: outcome
            .stats
            .iter()
            .map(|(p, st)| StageDoc {
                p: p.is_finite().then_some(*p),
                stats: *st,
            })
            .collect(),
        diffs: &outcome.diffs,
    };
    fs::write(
        dir.join("stats.json"),
        serde_json::to_string_pretty(&stats_doc)?,
    )?;

    if let Some(table) = &outcome.growth {
        fs::write(
            dir.join("growth_table.json"),
            serde_json::to_string_pretty(table)?,
        )?;
        let plot = svg::growth_plot(table, reference_alpha(config));
        fs::write(dir.join("growth.svg"), plot)?;
    }

    fs::write(
        dir.join("reports.json"),
        serde_json::to_string_pretty(&outcome.reports)?,
    )?;
    let mut csv = String::from("check,r,lhs,rhs,slack,passed\n");
    for rep in &outcome.reports {
        let r = rep
            .metadata
            .get("r")
            .map(|v| v.to_string())
            .unwrap_or_default();
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            rep.name, r, rep.lhs, rep.rhs, rep.slack, rep.passed
        ));
    }
    fs::write(dir.join("reports.csv"), csv)?;

    #[derive(Serialize)]
    struct Manifest<'a> {
        tool: &'static str,
        version: &'static str,
        qmc: QmcSeeds,
        config: &'a ExperimentConfig,
    }
    #[derive(Serialize)]
    struct QmcSeeds {
        bases: (u32, u32),
        start: usize,
    }
    let manifest = Manifest {
        tool: "plgrowth",
        version: crate::VERSION,
        qmc: QmcSeeds {
            bases: QMC_BASES,
            start: QMC_START,
        },
        config,
    };
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn half_plane() -> DomainSpec {
        DomainSpec::half_plane(Point::new(0.0, 1.0), 0.0, Point::new(0.0, 0.0)).unwrap()
    }

    #[test]
    fn config_accepts_bare_and_manifest_json() {
        let bare = r#"{
            "domain": {"kind": "half_plane", "normal": {"x": 0.0, "y": 1.0},
                       "offset": 0.0, "anchor": {"x": 0.0, "y": 0.0}},
            "R": 1.0, "spacing": 0.0625, "solver": "inf",
            "boundary": "linear", "checks": [], "output_dir": "out/x"
        }"#;
        let cfg = ExperimentConfig::from_json(bare).unwrap();
        assert_eq!(cfg.solver, SolverKind::Inf);
        let manifest = format!(r#"{{"tool": "plgrowth", "version": "0", "config": {bare}}}"#);
        let cfg2 = ExperimentConfig::from_json(&manifest).unwrap();
        assert_eq!(cfg.r_window, cfg2.r_window);
    }

    #[test]
    fn benchmark_domain_compatibility_enforced() {
        let hp = half_plane();
        assert!(benchmark_fn("linear", &hp).is_ok());
        assert!(benchmark_fn("aronsson", &hp).is_err());
        let wide = DomainSpec::sector(
            Point::new(0.0, 0.0),
            0.0,
            FRAC_PI_2 * 1.5,
            Point::new(0.0, 0.0),
        )
        .unwrap();
        assert!(benchmark_fn("aronsson", &wide).is_err());
        assert!(benchmark_fn("no_such_benchmark", &hp).is_err());
    }

    #[test]
    fn rotated_benchmarks_vanish_on_their_rays() {
        // harmonic pairing about a tilted right-angle sector
        let d = DomainSpec::sector(
            Point::new(0.2, -0.1),
            FRAC_PI_4 + 0.3,
            FRAC_PI_2,
            Point::new(0.2, -0.1),
        )
        .unwrap();
        let f = benchmark_fn("harmonic_sector", &d).unwrap();
        for &angle in &[0.3, 0.3 + FRAC_PI_2] {
            for &t in &[0.2, 0.7] {
                let q = Point::new(
                    0.2 + t * angle.cos(),
                    -0.1 + t * angle.sin(),
                );
                assert!(f(q).abs() < 1e-12, "ray value {}", f(q));
            }
        }
        let g = benchmark_fn("aronsson", &d).unwrap();
        for &rel in &[FRAC_PI_4, -FRAC_PI_4] {
            let angle = FRAC_PI_4 + 0.3 + rel;
            let q = Point::new(0.2 + 0.5 * angle.cos(), -0.1 + 0.5 * angle.sin());
            assert!(g(q).abs() < 1e-12);
        }
    }

    #[test]
    fn tabulated_boundary_round_trip_and_missing_node() {
        let d = half_plane();
        let grid = build_grid(&d, d.anchor, 1.0, 1.0 / 16.0).unwrap();
        let mut rows = Vec::new();
        for (i, j, c) in grid.nodes() {
            if c.is_boundary() {
                rows.push((i, j, grid.pos(i, j).y));
            }
        }
        let spec = BoundarySpec::Tabulated {
            tabulated: rows.clone(),
        };
        let b = boundary_values(&grid, &d, &spec).unwrap();
        let reference = BoundaryValues::from_fn(&grid, |p| p.y);
        for (i, j, c) in grid.nodes() {
            if c.is_boundary() {
                assert_eq!(
                    b.value_at(grid.idx(i, j)),
                    reference.value_at(grid.idx(i, j))
                );
            }
        }
        rows.pop();
        let incomplete = BoundarySpec::Tabulated { tabulated: rows };
        assert!(boundary_values(&grid, &d, &incomplete).is_err());
    }

    #[test]
    fn bump_boundary_nonnegative_and_compact() {
        let d = half_plane();
        let grid = build_grid(&d, d.anchor, 1.0, 1.0 / 16.0).unwrap();
        let spec = BoundarySpec::Named("zero_lateral_bump".into());
        let b = boundary_values(&grid, &d, &spec).unwrap();
        let mut max_arc = 0.0f64;
        for (i, j, c) in grid.nodes() {
            let v = b.value_at(grid.idx(i, j));
            match c {
                NodeClass::LateralBoundary => assert_eq!(v, 0.0),
                NodeClass::OuterArc => {
                    assert!(v >= 0.0);
                    max_arc = max_arc.max(v);
                }
                _ => {}
            }
        }
        assert!(max_arc > 0.9, "bump peak {max_arc}");
    }
}
