//! Unbounded convex planar domains: membership and boundary queries, and the
//! boundary density ratio κ₀ = sup_r |D ∩ B(x₀,r)| / |B(x₀,r)|.
//!
//! Three domain kinds are supported: half-planes, sectors (opening at most π,
//! so the domain stays convex), and finite intersections of half-planes. The
//! anchor x₀ must lie on ∂D; it is rejected, never projected.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Absolute tolerance for "the anchor lies on the boundary".
pub const ANCHOR_TOL: f64 = 1e-12;

/// Default quasi-Monte Carlo sample count for area ratios without a closed form.
pub const DEFAULT_QMC_SAMPLES: usize = 1_000_000;

/// First index of the Halton sequence used by the QMC sampler. Fixed so that
/// every run draws the identical point set.
pub const QMC_START: usize = 1;

/// Halton bases for the two disk coordinates.
pub const QMC_BASES: (u32, u32) = (2, 3);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Polar angle in (-π, π].
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn unit_at_angle(theta: f64) -> Self {
        Point::new(theta.cos(), theta.sin())
    }

    pub fn scale(self, s: f64) -> Self {
        Point::new(self.x * s, self.y * s)
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

/// Open half-plane { q : n·q > c } with unit inward normal `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane {
    pub normal: Point,
    pub offset: f64,
}

impl HalfPlane {
    /// Normalizes the normal; rejects near-zero normals.
    pub fn new(normal: Point, offset: f64) -> Result<Self> {
        let len = normal.norm();
        if !len.is_finite() || len < 1e-14 {
            return Err(Error::InvalidDomain(format!(
                "half-plane normal ({}, {}) is degenerate",
                normal.x, normal.y
            )));
        }
        Ok(HalfPlane {
            normal: normal.scale(1.0 / len),
            offset: offset / len,
        })
    }

    /// Signed distance to the boundary line, positive inside.
    pub fn signed_distance(&self, q: Point) -> f64 {
        self.normal.dot(q) - self.offset
    }
}

/// Open ball B(center, radius).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub center: Point,
    pub radius: f64,
}

impl BallSpec {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter {
                name: "radius",
                reason: format!("must be positive, got {radius}"),
            });
        }
        Ok(BallSpec { center, radius })
    }

    pub fn contains(&self, q: Point) -> bool {
        q.distance(self.center) < self.radius
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    HalfPlane {
        normal: Point,
        offset: f64,
    },
    /// Sector of opening `opening` about the ray at angle `bisector` from
    /// `vertex`. Openings above π are rejected: the domain must stay convex.
    Sector {
        vertex: Point,
        bisector: f64,
        opening: f64,
    },
    ConvexIntersection {
        half_planes: Vec<HalfPlane>,
    },
}

/// An unbounded open convex planar domain with a boundary anchor x₀.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(flatten)]
    pub kind: DomainKind,
    pub anchor: Point,
}

/// Result of a density-ratio computation. `std_error` is `None` when the
/// value is a closed form; for sampled values it is the binomial proxy
/// sqrt(p(1-p)/N) for the quasi-Monte Carlo estimate.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub value: f64,
    pub std_error: Option<f64>,
    pub exact: bool,
}

/// κ₀ estimate. `exact == false` flags a finite-radius lower estimate of the
/// supremum over all r.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Kappa0Estimate {
    pub value: f64,
    pub std_error: Option<f64>,
    pub exact: bool,
}

impl DomainSpec {
    pub fn half_plane(normal: Point, offset: f64, anchor: Point) -> Result<Self> {
        let hp = HalfPlane::new(normal, offset)?;
        let spec = DomainSpec {
            kind: DomainKind::HalfPlane {
                normal: hp.normal,
                offset: hp.offset,
            },
            anchor,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn sector(vertex: Point, bisector: f64, opening: f64, anchor: Point) -> Result<Self> {
        let spec = DomainSpec {
            kind: DomainKind::Sector {
                vertex,
                bisector,
                opening,
            },
            anchor,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn convex_intersection(half_planes: Vec<HalfPlane>, anchor: Point) -> Result<Self> {
        let spec = DomainSpec {
            kind: DomainKind::ConvexIntersection { half_planes },
            anchor,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks the structural invariants: the domain is open, convex and
    /// unbounded, and the anchor lies on ∂D within `ANCHOR_TOL`.
    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            DomainKind::HalfPlane { normal, .. } => {
                let len = normal.norm();
                if (len - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidDomain(format!(
                        "half-plane normal must be unit length, |n| = {len}"
                    )));
                }
            }
            DomainKind::Sector { opening, .. } => {
                if !(*opening > 0.0 && *opening < TAU) {
                    return Err(Error::InvalidDomain(format!(
                        "sector opening must lie strictly between 0 and 2π, got {opening}"
                    )));
                }
                if *opening > PI + 1e-12 {
                    return Err(Error::InvalidDomain(format!(
                        "sector opening {opening} exceeds π; the domain would not be convex"
                    )));
                }
            }
            DomainKind::ConvexIntersection { half_planes } => {
                if half_planes.is_empty() {
                    return Err(Error::InvalidDomain(
                        "convex intersection needs at least one half-plane".into(),
                    ));
                }
                for hp in half_planes {
                    if (hp.normal.norm() - 1.0).abs() > 1e-9 {
                        return Err(Error::InvalidDomain(
                            "convex intersection half-plane normals must be unit length".into(),
                        ));
                    }
                }
                // Unbounded iff the recession cone {d : n_i·d >= 0 for all i}
                // contains a nonzero direction, iff all normals fit in some
                // closed half-circle: the largest circular gap between sorted
                // normal angles must be at least π.
                let mut angles: Vec<f64> = half_planes
                    .iter()
                    .map(|hp| {
                        let a = hp.normal.angle();
                        if a < 0.0 {
                            a + TAU
                        } else {
                            a
                        }
                    })
                    .collect();
                angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let mut max_gap = angles[0] + TAU - angles[angles.len() - 1];
                for w in angles.windows(2) {
                    max_gap = max_gap.max(w[1] - w[0]);
                }
                if max_gap < PI - 1e-9 {
                    return Err(Error::InvalidDomain(
                        "half-plane intersection is bounded: no recession direction exists".into(),
                    ));
                }
                // Nonempty interior: stepping from the anchor along the
                // average active normal must land strictly inside.
                let dir = self.inward_direction();
                let eps = 1e-7 * (1.0 + self.anchor.norm());
                if !self.contains(self.anchor + dir.scale(eps)) {
                    return Err(Error::InvalidDomain(
                        "half-plane intersection has empty interior near the anchor".into(),
                    ));
                }
            }
        }
        let s = self.signed_boundary_distance(self.anchor);
        if s.abs() > ANCHOR_TOL {
            return Err(Error::InvalidDomain(format!(
                "anchor ({}, {}) is at distance {:.3e} from the boundary (tolerance {ANCHOR_TOL:.0e})",
                self.anchor.x, self.anchor.y, s.abs()
            )));
        }
        Ok(())
    }

    /// True iff `q` lies in the open set D.
    pub fn contains(&self, q: Point) -> bool {
        match &self.kind {
            DomainKind::HalfPlane { normal, offset } => normal.dot(q) - offset > 0.0,
            DomainKind::Sector {
                vertex,
                bisector,
                opening,
            } => {
                let v = q - *vertex;
                if v.norm() == 0.0 {
                    return false;
                }
                let mut rel = v.angle() - bisector;
                while rel > PI {
                    rel -= TAU;
                }
                while rel <= -PI {
                    rel += TAU;
                }
                rel.abs() < opening / 2.0
            }
            DomainKind::ConvexIntersection { half_planes } => {
                half_planes.iter().all(|hp| hp.signed_distance(q) > 0.0)
            }
        }
    }

    /// Signed Euclidean distance to ∂D: positive inside D, negative outside,
    /// zero on the boundary.
    pub fn signed_boundary_distance(&self, q: Point) -> f64 {
        match &self.kind {
            DomainKind::HalfPlane { normal, offset } => normal.dot(q) - offset,
            DomainKind::Sector {
                vertex,
                bisector,
                opening,
            } => {
                let half = opening / 2.0;
                // Convex sector = intersection of the two ray half-planes.
                let n_plus = Point::unit_at_angle(bisector + half - PI / 2.0);
                let n_minus = Point::unit_at_angle(bisector - half + PI / 2.0);
                let v = q - *vertex;
                let s = n_plus.dot(v).min(n_minus.dot(v));
                if s >= 0.0 {
                    s
                } else {
                    // Outside: true distance to the nearer boundary ray.
                    let d_plus = distance_to_ray(v, bisector + half);
                    let d_minus = distance_to_ray(v, bisector - half);
                    -d_plus.min(d_minus)
                }
            }
            DomainKind::ConvexIntersection { half_planes } => {
                let min_s = half_planes
                    .iter()
                    .map(|hp| hp.signed_distance(q))
                    .fold(f64::INFINITY, f64::min);
                if min_s >= 0.0 {
                    // Inside the closure: nearest boundary point lies on the
                    // nearest facet line.
                    min_s
                } else {
                    -distance_to_polyhedron(half_planes, q)
                }
            }
        }
    }

    /// Unit direction pointing from the anchor into the domain. Used to place
    /// default measurement balls and the outer-arc bump benchmark.
    pub fn inward_direction(&self) -> Point {
        match &self.kind {
            DomainKind::HalfPlane { normal, .. } => *normal,
            DomainKind::Sector { bisector, .. } => Point::unit_at_angle(*bisector),
            DomainKind::ConvexIntersection { half_planes } => {
                // Average of the normals active at the anchor.
                let mut sum = Point::new(0.0, 0.0);
                for hp in half_planes {
                    if hp.signed_distance(self.anchor).abs() <= 1e-9 {
                        sum = sum + hp.normal;
                    }
                }
                if sum.norm() < 1e-12 {
                    for hp in half_planes {
                        sum = sum + hp.normal;
                    }
                }
                let len = sum.norm();
                if len < 1e-12 {
                    Point::new(1.0, 0.0)
                } else {
                    sum.scale(1.0 / len)
                }
            }
        }
    }

    /// Area ratio |D ∩ B(x₀,r)| / |B(x₀,r)|.
    ///
    /// Closed forms: 1/2 for a half-plane with x₀ on the line, ω/(2π) for a
    /// sector with vertex at x₀. Everything else is sampled with the
    /// deterministic Halton sequence.
    pub fn density_ratio(&self, x0: Point, r: f64) -> Result<DensityEstimate> {
        self.density_ratio_with_samples(x0, r, DEFAULT_QMC_SAMPLES)
    }

    pub fn density_ratio_with_samples(
        &self,
        x0: Point,
        r: f64,
        samples: usize,
    ) -> Result<DensityEstimate> {
        if !(r > 0.0) {
            return Err(Error::InvalidParameter {
                name: "r",
                reason: format!("must be positive, got {r}"),
            });
        }
        let s = self.signed_boundary_distance(x0);
        if s.abs() > ANCHOR_TOL {
            return Err(Error::InvalidParameter {
                name: "x0",
                reason: format!("must lie on the boundary, distance {:.3e}", s.abs()),
            });
        }
        match &self.kind {
            DomainKind::HalfPlane { .. } => Ok(DensityEstimate {
                value: 0.5,
                std_error: None,
                exact: true,
            }),
            DomainKind::Sector {
                vertex, opening, ..
            } if vertex.distance(x0) <= ANCHOR_TOL => Ok(DensityEstimate {
                value: opening / TAU,
                std_error: None,
                exact: true,
            }),
            _ => {
                let mut hits = 0usize;
                for k in 0..samples {
                    let q = halton_disk_point(x0, r, QMC_START + k);
                    if self.contains(q) {
                        hits += 1;
                    }
                }
                let p = hits as f64 / samples as f64;
                let se = (p * (1.0 - p) / samples as f64).sqrt();
                Ok(DensityEstimate {
                    value: p,
                    std_error: Some(se),
                    exact: false,
                })
            }
        }
    }

    /// κ₀ = sup_r |D ∩ B(x₀,r)| / |B(x₀,r)|.
    ///
    /// Exact for half-planes and for sectors with vertex at x₀ (the ratio is
    /// r-independent there); otherwise the maximum of `density_ratio` over
    /// the supplied radii, flagged as a lower estimate of the supremum.
    pub fn kappa0(&self, x0: Point, radii: &[f64]) -> Result<Kappa0Estimate> {
        self.kappa0_with_samples(x0, radii, DEFAULT_QMC_SAMPLES)
    }

    pub fn kappa0_with_samples(
        &self,
        x0: Point,
        radii: &[f64],
        samples: usize,
    ) -> Result<Kappa0Estimate> {
        if radii.is_empty() {
            return Err(Error::InvalidParameter {
                name: "radii",
                reason: "must be non-empty".into(),
            });
        }
        match &self.kind {
            DomainKind::HalfPlane { .. } => Ok(Kappa0Estimate {
                value: 0.5,
                std_error: None,
                exact: true,
            }),
            DomainKind::Sector {
                vertex, opening, ..
            } if vertex.distance(x0) <= ANCHOR_TOL => Ok(Kappa0Estimate {
                value: opening / TAU,
                std_error: None,
                exact: true,
            }),
            _ => {
                let mut best = f64::NEG_INFINITY;
                let mut best_se = None;
                for &r in radii {
                    let est = self.density_ratio_with_samples(x0, r, samples)?;
                    if est.value > best {
                        best = est.value;
                        best_se = est.std_error;
                    }
                }
                Ok(Kappa0Estimate {
                    value: best,
                    std_error: best_se,
                    exact: false,
                })
            }
        }
    }
}

/// Distance from `v` (relative to the ray origin) to the ray at angle `theta`.
fn distance_to_ray(v: Point, theta: f64) -> f64 {
    let d = Point::unit_at_angle(theta);
    let t = v.dot(d).max(0.0);
    (v - d.scale(t)).norm()
}

/// Distance from an exterior point to the closure of an intersection of
/// half-planes. Candidate projections: the foot on each facet line when it
/// satisfies the remaining constraints, and each pairwise line intersection
/// lying in the closure.
fn distance_to_polyhedron(half_planes: &[HalfPlane], q: Point) -> f64 {
    let feasible = |p: Point| {
        half_planes
            .iter()
            .all(|hp| hp.signed_distance(p) >= -1e-9)
    };
    let mut best = f64::INFINITY;
    for (i, hp) in half_planes.iter().enumerate() {
        let s = hp.signed_distance(q);
        let foot = q - hp.normal.scale(s);
        if feasible(foot) {
            best = best.min(q.distance(foot));
        }
        for other in &half_planes[i + 1..] {
            let det = hp.normal.x * other.normal.y - hp.normal.y * other.normal.x;
            if det.abs() < 1e-14 {
                continue;
            }
            let x = (hp.offset * other.normal.y - other.offset * hp.normal.y) / det;
            let y = (hp.normal.x * other.offset - other.normal.x * hp.offset) / det;
            let corner = Point::new(x, y);
            if feasible(corner) {
                best = best.min(q.distance(corner));
            }
        }
    }
    best
}

/// Radical-inverse (van der Corput) value of `index` in the given base.
fn radical_inverse(base: u32, mut index: usize) -> f64 {
    let b = base as f64;
    let mut inv = 1.0 / b;
    let mut result = 0.0;
    while index > 0 {
        result += (index % base as usize) as f64 * inv;
        index /= base as usize;
        inv /= b;
    }
    result
}

/// k-th point of the deterministic low-discrepancy sequence on B(x0, r),
/// via the polar area-preserving map of the Halton pair (base 2, base 3).
pub fn halton_disk_point(x0: Point, r: f64, k: usize) -> Point {
    let u1 = radical_inverse(QMC_BASES.0, k);
    let u2 = radical_inverse(QMC_BASES.1, k);
    let rho = r * u1.sqrt();
    let theta = TAU * u2;
    Point::new(x0.x + rho * theta.cos(), x0.y + rho * theta.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn upper_half_plane() -> DomainSpec {
        DomainSpec::half_plane(Point::new(0.0, 1.0), 0.0, Point::new(0.0, 0.0)).unwrap()
    }

    fn sector(opening: f64) -> DomainSpec {
        DomainSpec::sector(Point::new(0.0, 0.0), 0.0, opening, Point::new(0.0, 0.0)).unwrap()
    }

    /// Independent plain Monte Carlo estimate of the density ratio, using an
    /// LCG that shares nothing with the Halton sampler.
    fn mc_density(domain: &DomainSpec, x0: Point, r: f64, n: usize) -> f64 {
        let mut state: u64 = 0x9E3779B97F4A7C15;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / (1u64 << 53) as f64
        };
        let mut hits = 0usize;
        let mut total = 0usize;
        while total < n {
            let x = 2.0 * next() - 1.0;
            let y = 2.0 * next() - 1.0;
            if x * x + y * y >= 1.0 {
                continue;
            }
            total += 1;
            if domain.contains(Point::new(x0.x + r * x, x0.y + r * y)) {
                hits += 1;
            }
        }
        hits as f64 / n as f64
    }

    #[test]
    fn contains_half_plane() {
        let d = upper_half_plane();
        assert!(d.contains(Point::new(3.0, 0.5)));
        assert!(!d.contains(Point::new(3.0, -0.5)));
        // the anchor is a boundary point of the open set
        assert!(!d.contains(d.anchor));
    }

    #[test]
    fn contains_sector_by_angle_comparison() {
        // Oracle: a point is inside the sector iff |atan2(y, x)| < opening/2.
        let d = sector(PI / 2.0);
        let inside = Point::new(1.0, 0.9);
        assert!(0.9f64.atan2(1.0) < PI / 4.0);
        assert!(d.contains(inside));
        let outside = Point::new(0.9, 1.0);
        assert!(1.0f64.atan2(0.9) > PI / 4.0);
        assert!(!d.contains(outside));
        assert!(!d.contains(d.anchor));
    }

    #[test]
    fn anchor_off_boundary_rejected() {
        let err =
            DomainSpec::half_plane(Point::new(0.0, 1.0), 0.0, Point::new(0.0, 1e-9)).unwrap_err();
        assert!(matches!(err, Error::InvalidDomain(_)));
    }

    #[test]
    fn reflex_sector_rejected() {
        let err = DomainSpec::sector(
            Point::new(0.0, 0.0),
            0.0,
            1.5 * PI,
            Point::new(0.0, 0.0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidDomain(_)));
    }

    #[test]
    fn bounded_intersection_rejected() {
        // A triangle: normals spanning more than a half-circle.
        let hps = vec![
            HalfPlane::new(Point::new(0.0, 1.0), -1.0).unwrap(),
            HalfPlane::new(Point::new(1.0, -1.0), -1.0).unwrap(),
            HalfPlane::new(Point::new(-1.0, -1.0), -1.0).unwrap(),
        ];
        let err = DomainSpec::convex_intersection(hps, Point::new(0.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::InvalidDomain(_)));
    }

    #[test]
    fn strip_is_unbounded() {
        // {0 < y < 1}: recession cone is the x-axis, max normal gap exactly π.
        let hps = vec![
            HalfPlane::new(Point::new(0.0, 1.0), 0.0).unwrap(),
            HalfPlane::new(Point::new(0.0, -1.0), -1.0).unwrap(),
        ];
        let d = DomainSpec::convex_intersection(hps, Point::new(0.0, 0.0)).unwrap();
        assert!(d.contains(Point::new(100.0, 0.5)));
        assert!(!d.contains(Point::new(0.0, 1.5)));
    }

    #[test]
    fn density_half_plane_exact() {
        let d = upper_half_plane();
        let est = d.density_ratio(Point::new(2.0, 0.0), 5.0).unwrap();
        assert_eq!(est.value, 0.5);
        assert!(est.exact);
    }

    #[test]
    fn density_sector_quarter_vs_mc_oracle() {
        let d = sector(PI / 2.0);
        let est = d.density_ratio(d.anchor, 1.0).unwrap();
        assert!(est.exact);
        assert!((est.value - 0.25).abs() < 1e-15);
        let mc = mc_density(&d, d.anchor, 1.0, 1_000_000);
        assert!((mc - 0.25).abs() < 3e-3, "mc = {mc}");
    }

    #[test]
    fn density_sector_pi_is_half() {
        let d = sector(PI);
        let est = d.density_ratio(d.anchor, 3.0).unwrap();
        assert!((est.value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn density_nonpositive_radius_rejected() {
        let d = upper_half_plane();
        assert!(d.density_ratio(d.anchor, 0.0).is_err());
        assert!(d.density_ratio(d.anchor, -1.0).is_err());
    }

    #[test]
    fn kappa0_half_plane_and_sector() {
        let d = upper_half_plane();
        let k = d.kappa0(d.anchor, &[1.0]).unwrap();
        assert_eq!(k.value, 0.5);
        assert!(k.exact);

        let s = sector(PI / 2.0);
        let k = s.kappa0(s.anchor, &[1.0, 2.0]).unwrap();
        assert!((k.value - 0.25).abs() < 1e-15);
        assert!(k.exact);
    }

    #[test]
    fn kappa0_convex_intersection_sector_pi_3() {
        // The sector of opening π/3 about the x-axis, written as two
        // half-planes through the origin. κ₀ should be ω/(2π) = 1/6.
        let half = PI / 6.0;
        let n_plus = Point::unit_at_angle(half - PI / 2.0);
        let n_minus = Point::unit_at_angle(-half + PI / 2.0);
        let hps = vec![
            HalfPlane::new(n_plus, 0.0).unwrap(),
            HalfPlane::new(n_minus, 0.0).unwrap(),
        ];
        let d = DomainSpec::convex_intersection(hps, Point::new(0.0, 0.0)).unwrap();
        let k = d
            .kappa0_with_samples(d.anchor, &[1.0, 2.0, 4.0, 8.0], 1_000_000)
            .unwrap();
        assert!(!k.exact);
        let se = k.std_error.unwrap();
        assert!(
            (k.value - 1.0 / 6.0).abs() < 3.0 * se.max(1e-3),
            "kappa0 = {} (se {})",
            k.value,
            se
        );
    }

    #[test]
    fn kappa0_empty_radii_rejected() {
        let d = upper_half_plane();
        assert!(d.kappa0(d.anchor, &[]).is_err());
    }

    #[test]
    fn sampled_density_r_independent_for_anchored_cone() {
        // Cone vertex at the anchor, specified as an intersection so the
        // sampled path runs: ratios must agree across radii within 3σ.
        let half = PI / 6.0;
        let hps = vec![
            HalfPlane::new(Point::unit_at_angle(half - PI / 2.0), 0.0).unwrap(),
            HalfPlane::new(Point::unit_at_angle(-half + PI / 2.0), 0.0).unwrap(),
        ];
        let d = DomainSpec::convex_intersection(hps, Point::new(0.0, 0.0)).unwrap();
        let mut values = Vec::new();
        for &r in &[1.0, 2.0, 4.0] {
            let est = d.density_ratio_with_samples(d.anchor, r, 200_000).unwrap();
            values.push((est.value, est.std_error.unwrap()));
        }
        for w in values.windows(2) {
            let (v0, s0) = w[0];
            let (v1, s1) = w[1];
            assert!((v0 - v1).abs() <= 3.0 * (s0 + s1));
        }
    }

    #[test]
    fn density_at_most_half_for_convex() {
        // Supporting half-plane argument: at a boundary point of a convex
        // set the local density cannot exceed 1/2.
        let d = upper_half_plane();
        assert!(d.density_ratio(d.anchor, 7.5).unwrap().value <= 0.5);
        let s = sector(PI / 2.0);
        assert!(s.density_ratio(s.anchor, 2.0).unwrap().value <= 0.5);
        // Sampled case: anchor on a sector ray away from the vertex, where
        // no closed form applies. Rays of this sector are the angles 0 and
        // π/2 from the vertex (-1, 0); the anchor sits on the lower ray.
        let tilted = DomainSpec::sector(
            Point::new(-1.0, 0.0),
            PI / 4.0,
            PI / 2.0,
            Point::new(-0.5, 0.0),
        )
        .unwrap();
        let est = tilted
            .density_ratio_with_samples(tilted.anchor, 0.25, 400_000)
            .unwrap();
        assert!(est.value <= 0.5 + 3.0 * est.std_error.unwrap());
    }

    #[test]
    fn kappa0_monotone_under_inclusion() {
        // sector(π/2) ⊂ sector(π) = {x > 0}, all about the x-axis bisector.
        let small = sector(PI / 2.0);
        let mid = sector(PI);
        let big =
            DomainSpec::half_plane(Point::new(1.0, 0.0), 0.0, Point::new(0.0, 0.0)).unwrap();
        let k_small = small.kappa0(small.anchor, &[1.0]).unwrap().value;
        let k_mid = mid.kappa0(mid.anchor, &[1.0]).unwrap().value;
        let k_big = big.kappa0(big.anchor, &[1.0]).unwrap().value;
        assert!(k_small <= k_mid + 1e-12);
        assert!(k_mid <= k_big + 1e-12);
    }

    #[test]
    fn signed_distance_sector_outside() {
        let d = sector(PI / 2.0);
        // Point behind the vertex: nearest boundary point is the vertex.
        let q = Point::new(-1.0, 0.0);
        assert!((d.signed_boundary_distance(q) + 1.0).abs() < 1e-12);
        // Interior point: distance to the nearer ray.
        let q = Point::new(1.0, 0.0);
        let expect = (PI / 4.0).sin();
        assert!((d.signed_boundary_distance(q) - expect).abs() < 1e-12);
    }

    #[test]
    fn ball_spec_validation_and_membership() {
        let b = BallSpec::new(Point::new(1.0, 2.0), 0.5).unwrap();
        assert!(b.contains(Point::new(1.2, 2.1)));
        assert!(!b.contains(Point::new(1.5, 2.0)), "boundary of the open ball");
        assert!(BallSpec::new(Point::new(0.0, 0.0), 0.0).is_err());
        assert!(BallSpec::new(Point::new(0.0, 0.0), -1.0).is_err());
    }

    #[test]
    fn domain_json_round_trip() {
        let d = sector(PI / 2.0);
        let js = serde_json::to_string(&d).unwrap();
        assert!(js.contains("\"kind\":\"sector\""));
        let back: DomainSpec = serde_json::from_str(&js).unwrap();
        assert_eq!(d, back);
    }
}
