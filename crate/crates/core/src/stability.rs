//! Quantitative analytic-continuation machinery: the slab lower bound
//! `mu(z)`, the stability exponents `(beta0, beta)`, and the right-hand side
//! of the increasing-stability estimate.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Infinite rectangular slab `(K0, +inf) x (-h0, h0)` with the data interval
/// `(K0, K]` of length `a = K - K0`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SlabSpec {
    pub k0: f64,
    pub k: f64,
    pub h0: f64,
}

impl SlabSpec {
    pub fn new(k0: f64, k: f64, h0: f64) -> Result<Self> {
        if !(0.0 < k0 && k0 < k) {
            return Err(Error::InvalidRange(format!("need 0 < K0 < K, got ({k0}, {k})")));
        }
        if !(h0 > 0.0) {
            return Err(Error::InvalidRange(format!("slab half-height must be positive, got {h0}")));
        }
        Ok(Self { k0, k, h0 })
    }

    pub fn a(&self) -> f64 {
        self.k - self.k0
    }
}

/// The closed-form slab bound `64 a h / (3 pi^2 (a^2 + 4 h^2)) *
/// e^{(pi/2h)(a/2 - z)}` without the domain gate; `mu_lower_bound` adds it.
pub fn mu_formula(a: f64, h0: f64, z: f64) -> f64 {
    64.0 * a * h0 / (3.0 * PI * PI * (a * a + 4.0 * h0 * h0))
        * ((PI / (2.0 * h0)) * (a / 2.0 - z)).exp()
}

/// Harmonic-measure lower bound `mu(z)` for continuation beyond the data
/// interval, valid for `z > K`.
pub fn mu_lower_bound(z: f64, slab: &SlabSpec) -> Result<f64> {
    if !(z > slab.k) {
        return Err(Error::DomainError(format!("mu bound needs z > K = {}, got {z}", slab.k)));
    }
    Ok(mu_formula(slab.a(), slab.h0, z))
}

/// Stability parameters of the multi-frequency reconstruction bound.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StabilityParams {
    pub m: f64,
    pub dim: usize,
    /// Smoothness order of the strength class.
    pub s: f64,
    pub t: f64,
    /// `delta_1` (point mode) or `delta_2_tilde` (band mode).
    pub delta: f64,
    pub beta0: f64,
    pub beta: f64,
}

impl StabilityParams {
    pub fn new(m: f64, dim: usize, s: f64, t: f64, delta: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::DimensionError(format!("dim must be 2 or 3, got {dim}")));
        }
        if !(s > 0.0) || !(delta > 0.0) {
            return Err(Error::InvalidRange(format!("need s > 0 and delta > 0, got ({s}, {delta})")));
        }
        if !(t > 0.0 && t < delta / dim as f64) {
            return Err(Error::InvalidRange(format!(
                "need 0 < t < delta/d = {}, got t = {t}",
                delta / dim as f64
            )));
        }
        let d = dim as f64;
        let beta0 = d * t + 2.0 * m;
        let beta = (delta / 2.0 - d * t / 2.0).min(s * t);
        Ok(Self { m, dim, s, t, delta, beta0, beta })
    }
}

/// `(beta0, beta) = (d t + 2m, min{delta/2 - d t/2, s t})`.
pub fn stability_exponents(params: &StabilityParams) -> (f64, f64) {
    (params.beta0, params.beta)
}

/// Default `delta_1 = 0.9 * min{1, (d + 3 - m)/2}` for the point-frequency
/// mode, which requires `d - 1 < m < d + 3`.
pub fn delta1_default(m: f64, dim: usize) -> Result<f64> {
    let d = dim as f64;
    if !(m > d - 1.0 && m < d + 3.0) {
        return Err(Error::InvalidRange(format!(
            "point mode needs d-1 < m < d+3, got m = {m}, d = {dim}"
        )));
    }
    Ok(0.9 * 1.0f64.min((d + 3.0 - m) / 2.0))
}

/// `delta_2` of the band-averaged mode: `9 - m` for `7 <= m < 9`,
/// `7 - m` for `2 < m < 7`.
pub fn delta2(m: f64) -> Result<f64> {
    if m >= 7.0 && m < 9.0 {
        Ok(9.0 - m)
    } else if m > 2.0 && m < 7.0 {
        Ok(7.0 - m)
    } else {
        Err(Error::InvalidRange(format!("band mode needs 2 < m < 9, got m = {m}")))
    }
}

/// Capped band-mode default `delta_2_tilde = 0.9 * min{1, delta_2}`.
pub fn delta2_tilde(m: f64) -> Result<f64> {
    Ok(0.9 * 1.0f64.min(delta2(m)?))
}

/// Right-hand side of the increasing-stability estimate:
/// `K^{beta0} eps^2 + 1 / (K^beta (ln |ln eps|)^beta)`.
pub fn stability_rhs(k: f64, eps: f64, beta0: f64, beta: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < (-1.0f64).exp()) {
        return Err(Error::DomainError(format!("need 0 < eps < 1/e, got {eps}")));
    }
    if !(k > 1.0) {
        return Err(Error::DomainError(format!("need K > 1, got {k}")));
    }
    let loglog = eps.ln().abs().ln();
    Ok(k.powf(beta0) * eps * eps + 1.0 / (k.powf(beta) * loglog.powf(beta)))
}

/// One query of a continuation bound check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuationEntry {
    pub z: f64,
    pub p_abs: f64,
    pub mu: f64,
    pub bound: f64,
    pub margin: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuationReport {
    pub eps: f64,
    pub entries: Vec<ContinuationEntry>,
    pub all_hold: bool,
}

/// Check `|p(z)| <= M * eps^{mu(z)}` at each query `z > K`, where `eps` is
/// the largest sampled `|p|` on the data interval. Report-only: violations
/// are recorded, not raised.
pub fn continuation_bound_check(
    p_on_interval: &[f64],
    bound_m: f64,
    queries: &[(f64, f64)],
    slab: &SlabSpec,
) -> Result<ContinuationReport> {
    if p_on_interval.is_empty() || queries.is_empty() {
        return Err(Error::EmptyGrid("need interval samples and queries".into()));
    }
    let eps = p_on_interval.iter().cloned().fold(0.0, f64::max);
    let mut entries = Vec::with_capacity(queries.len());
    let mut all_hold = true;
    for &(z, p_abs) in queries {
        let mu = mu_lower_bound(z, slab)?;
        let bound = bound_m * eps.powf(mu);
        let holds = p_abs <= bound;
        all_hold &= holds;
        entries.push(ContinuationEntry { z, p_abs, mu, bound, margin: bound - p_abs, holds });
    }
    Ok(ContinuationReport { eps, entries, all_hold })
}
