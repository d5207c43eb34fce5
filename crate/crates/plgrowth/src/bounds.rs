//! Closed-form quantities of the growth machinery: the log barrier
//! φ(t) = −log((M(4r) − t + ε)/(M(4r) + ε)), the convexity conditions
//! (C-1)–(C-4), the dyadic contraction factor θ = 1 − e^{−Cκ₀^{1/n}}, the
//! growth exponent α = −log₄ θ, and the iteration M(4^ν r) ≥ θ^{−ν} M(r).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LN_4: f64 = 1.3862943611198906;

/// Parameters (n, κ₀, C) of the oscillation inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: u32,
    pub kappa0: f64,
    #[serde(rename = "C")]
    pub c: f64,
}

impl BoundParams {
    pub fn new(n: u32, kappa0: f64, c: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: format!("dimension must be >= 2, got {n}"),
            });
        }
        if !(kappa0 > 0.0 && kappa0 <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "kappa0",
                reason: format!("must lie in (0, 1], got {kappa0}"),
            });
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter {
                name: "C",
                reason: format!("must be positive and finite, got {c}"),
            });
        }
        Ok(BoundParams { n, kappa0, c })
    }
}

/// θ = 1 − e^{−C κ₀^{1/n}} ∈ (0, 1).
pub fn theta(params: BoundParams) -> f64 {
    let root = params.kappa0.powf(1.0 / params.n as f64);
    -(-params.c * root).exp_m1()
}

/// α = −log₄(1 − e^{−C κ₀^{1/n}}) = −log₄ θ > 0.
pub fn alpha(params: BoundParams) -> f64 {
    -theta(params).ln() / LN_4
}

/// Inverts θ = 1 − e^{−C κ₀^{1/n}} at an empirically measured θ:
/// C = −κ₀^{−1/n} ln(1 − θ_emp).
pub fn calibrate_c(theta_emp: f64, n: u32, kappa0: f64) -> Result<f64> {
    if !(theta_emp > 0.0 && theta_emp < 1.0) {
        return Err(Error::InvalidParameter {
            name: "theta_emp",
            reason: format!("must lie in (0, 1), got {theta_emp}"),
        });
    }
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("dimension must be >= 2, got {n}"),
        });
    }
    if !(kappa0 > 0.0 && kappa0 <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "kappa0",
            reason: format!("must lie in (0, 1], got {kappa0}"),
        });
    }
    let root = kappa0.powf(1.0 / n as f64);
    Ok(-(-theta_emp).ln_1p() / root)
}

/// Dyadic iteration of the oscillation inequality: entry ν is
/// (4^ν r, θ^{−ν} M(r)), ν = 1..=levels. The lower bound equals
/// (4^ν)^α M(r) with α = −log₄ θ.
pub fn iterate_growth(theta: f64, m_r: f64, r: f64, levels: u32) -> Result<Vec<(f64, f64)>> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParameter {
            name: "theta",
            reason: format!("must lie in (0, 1), got {theta}"),
        });
    }
    if !(m_r > 0.0) {
        return Err(Error::InvalidParameter {
            name: "M_r",
            reason: format!("must be positive, got {m_r}"),
        });
    }
    if levels < 1 {
        return Err(Error::InvalidParameter {
            name: "levels",
            reason: "must be at least 1".into(),
        });
    }
    let mut out = Vec::with_capacity(levels as usize);
    for nu in 1..=levels {
        let radius = 4f64.powi(nu as i32) * r;
        let bound = theta.powi(-(nu as i32)) * m_r;
        out.push((radius, bound));
    }
    Ok(out)
}

/// The calibrated convex barrier of the oscillation proof:
/// φ(t) = −log((M4r − t + ε)/(M4r + ε)) on I = (−∞, M4r], with φ(0) = 0,
/// φ'(t) = 1/(M4r − t + ε) and the identity φ'' = φ'².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogBarrier {
    pub m4r: f64,
    pub eps: f64,
}

impl LogBarrier {
    pub fn new(m4r: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidParameter {
                name: "eps",
                reason: format!("must be positive and finite, got {eps}"),
            });
        }
        if !m4r.is_finite() {
            return Err(Error::InvalidParameter {
                name: "M4r",
                reason: format!("must be finite, got {m4r}"),
            });
        }
        Ok(LogBarrier { m4r, eps })
    }

    fn check_interval(&self, t: f64) -> Result<()> {
        if t > self.m4r {
            return Err(Error::OutsideBarrierInterval { t, m4r: self.m4r });
        }
        Ok(())
    }

    /// φ(t). Errors outside I.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.check_interval(t)?;
        Ok(self.eval_unchecked(t))
    }

    pub fn eval_unchecked(&self, t: f64) -> f64 {
        -((self.m4r - t + self.eps) / (self.m4r + self.eps)).ln()
    }

    /// (φ'(t), φ''(t)). Errors outside I.
    pub fn derivatives(&self, t: f64) -> Result<(f64, f64)> {
        self.check_interval(t)?;
        let d1 = self.d1_unchecked(t);
        Ok((d1, d1 * d1))
    }

    pub fn d1_unchecked(&self, t: f64) -> f64 {
        1.0 / (self.m4r - t + self.eps)
    }

    /// sup_I φ' = 1/ε, attained at t = M4r.
    pub fn sup_derivative(&self) -> f64 {
        1.0 / self.eps
    }
}

/// A convex map with two derivatives, as sampled by `check_conditions`.
/// Out-of-domain evaluations may return non-finite values; the checker
/// reports them as errors.
pub trait ConvexMap {
    fn eval(&self, t: f64) -> f64;
    fn d1(&self, t: f64) -> f64;
    fn d2(&self, t: f64) -> f64;
}

impl ConvexMap for LogBarrier {
    fn eval(&self, t: f64) -> f64 {
        self.eval_unchecked(t)
    }
    fn d1(&self, t: f64) -> f64 {
        self.d1_unchecked(t)
    }
    fn d2(&self, t: f64) -> f64 {
        let d = self.d1_unchecked(t);
        d * d
    }
}

/// Pointwise report of the conditions (C-1)–(C-4) on a sampled interval.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConditionReport {
    /// All sampled values and derivatives were finite.
    pub c1_smooth: bool,
    /// max over samples of φ'(t)²/φ''(t); (C-2) requires <= 1.
    pub c2_ratio_max: f64,
    /// min over samples of φ'(t); (C-3) requires > 0.
    pub c3_min_derivative: f64,
    /// max over samples of φ'(t); (C-4) requires a finite bound.
    pub c4_sup_derivative: f64,
    pub passed: bool,
}

/// Evaluates the conditions (C-1)–(C-4) on `samples` equispaced points of
/// [lo, hi]. Passing means c2_ratio_max <= 1 + 1e-12, c3 > 0 and c4 finite.
pub fn check_conditions(
    map: &dyn ConvexMap,
    interval: (f64, f64),
    samples: usize,
) -> Result<ConditionReport> {
    let (lo, hi) = interval;
    if samples < 2 {
        return Err(Error::InvalidParameter {
            name: "samples",
            reason: format!("need at least 2, got {samples}"),
        });
    }
    if !(lo < hi) {
        return Err(Error::InvalidParameter {
            name: "interval",
            reason: format!("need lo < hi, got ({lo}, {hi})"),
        });
    }
    let mut c2_ratio_max = f64::NEG_INFINITY;
    let mut c3_min = f64::INFINITY;
    let mut c4_sup = f64::NEG_INFINITY;
    let mut smooth = true;
    for k in 0..samples {
        let t = lo + (hi - lo) * k as f64 / (samples - 1) as f64;
        let v = map.eval(t);
        let d1 = map.d1(t);
        let d2 = map.d2(t);
        if !v.is_finite() {
            smooth = false;
        }
        if d1.is_nan() || d2.is_nan() {
            return Err(Error::InvalidParameter {
                name: "map",
                reason: format!("non-finite derivative at t = {t}"),
            });
        }
        let ratio = if d2 > 0.0 {
            d1 * d1 / d2
        } else if d1 == 0.0 {
            // 0 <= 0: the inequality holds vacuously at this sample.
            0.0
        } else {
            f64::INFINITY
        };
        c2_ratio_max = c2_ratio_max.max(ratio);
        c3_min = c3_min.min(d1);
        c4_sup = c4_sup.max(d1);
    }
    let passed = smooth
        && c2_ratio_max <= 1.0 + 1e-12
        && c3_min > 0.0
        && c4_sup.is_finite();
    Ok(ConditionReport {
        c1_smooth: smooth,
        c2_ratio_max,
        c3_min_derivative: c3_min,
        c4_sup_derivative: c4_sup,
        passed,
    })
}
