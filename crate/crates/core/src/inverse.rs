//! Inverse step: far-field correlation estimation over the ensemble, recovery
//! of `h_hat(tau xhat)` through the zeroth-order identity, polar Fourier
//! inversion back to the strength `h`, and the data discrepancies.

use crate::error::{Error, Result};
use crate::grid::{GridSpec, RealField};
use crate::gmig::mean_and_stderr;
use crate::solver::{far_field_constant, FarFieldSample};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorrelationMode {
    Point,
    BandAveraged,
}

/// One correlation estimate: frequencies `(k, k + tau)`, one direction.
///
/// In band-averaged mode `estimate.re` holds the (real) band statistic and
/// `tau` the frequency shift `k * eta`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationPair {
    pub k: f64,
    pub tau: f64,
    pub direction: Vec<f64>,
    pub estimate: Complex64,
    pub stderr: f64,
}

/// Correlation data over a frequency band `I = (k0, k_max]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationDataset {
    pub pairs: Vec<CorrelationPair>,
    pub ensemble_size: usize,
    pub mode: CorrelationMode,
    pub k0: f64,
    pub k_max: f64,
}

impl CorrelationDataset {
    pub fn new(
        pairs: Vec<CorrelationPair>,
        ensemble_size: usize,
        mode: CorrelationMode,
        k0: f64,
        k_max: f64,
    ) -> Result<Self> {
        if !(0.0 <= k0 && k0 < k_max) {
            return Err(Error::InvalidRange(format!("need 0 <= k0 < k_max, got ({k0}, {k_max}]")));
        }
        for p in &pairs {
            if !(p.tau > 0.0) {
                return Err(Error::InvalidRange(format!("tau must be positive, got {}", p.tau)));
            }
            if p.k < k0 || p.k > k_max {
                return Err(Error::BandViolation(format!(
                    "k = {} outside the band ({k0}, {k_max}]",
                    p.k
                )));
            }
            if !(p.stderr >= 0.0) {
                return Err(Error::InvalidRange(format!("stderr must be >= 0, got {}", p.stderr)));
            }
        }
        Ok(Self { pairs, ensemble_size, mode, k0, k_max })
    }
}

/// Sample mean of `u_inf(xhat, k+tau) * conj(u_inf(xhat, k))` across matched
/// realizations, per direction, with its standard error.
pub fn correlation_estimate(
    farfields_at_k: &[FarFieldSample],
    farfields_at_k_plus_tau: &[FarFieldSample],
) -> Result<Vec<(Complex64, f64)>> {
    if farfields_at_k.is_empty() || farfields_at_k.len() != farfields_at_k_plus_tau.len() {
        return Err(Error::EmptyEnsemble);
    }
    let dirs = &farfields_at_k[0].directions;
    for (i, (lo, hi)) in farfields_at_k.iter().zip(farfields_at_k_plus_tau.iter()).enumerate() {
        if lo.seed != hi.seed {
            return Err(Error::SeedMismatch(i));
        }
        if lo.directions != *dirs || hi.directions != *dirs {
            return Err(Error::GridMismatch(format!(
                "realization {i} observes a different direction set"
            )));
        }
    }
    let mut out = Vec::with_capacity(dirs.len());
    for d in 0..dirs.len() {
        let products: Vec<Complex64> = farfields_at_k
            .iter()
            .zip(farfields_at_k_plus_tau.iter())
            .map(|(lo, hi)| hi.values[d] * lo.values[d].conj())
            .collect();
        out.push(mean_and_stderr(&products));
    }
    Ok(out)
}

/// Zeroth-order identity: `h_hat(tau xhat) ~= prefactor * corr` with
/// `prefactor = 4 k^{(7-d)/2} (k+tau)^{(7-d)/2} k^m / |C_d|^2`.
pub fn recover_h_hat(corr: Complex64, k: f64, tau: f64, m: f64, dim: usize) -> Result<Complex64> {
    if !(k > 0.0) || !(tau > 0.0) {
        return Err(Error::BandViolation(format!("need k > 0 and tau > 0, got k={k}, tau={tau}")));
    }
    let p = (7.0 - dim as f64) / 2.0;
    let c = far_field_constant(dim).norm_sqr();
    Ok(corr * (4.0 * k.powf(p) * (k + tau).powf(p) * k.powf(m) / c))
}

/// Band-averaged statistic
/// `(1/k) int_k^{2k} |t^{m+4} corr(t)|^2 dt` by the trapezoid rule, with the
/// propagated standard error of the per-`t` correlation estimates.
///
/// Restricted to `d = 3` and `2 < m < 9`; the 2D variant needs disjoint
/// source/potential supports and is gated off.
pub fn band_averaged_statistic(
    t_grid: &[f64],
    correlations: &[(Complex64, f64)],
    k: f64,
    m: f64,
    dim: usize,
) -> Result<(f64, f64)> {
    if dim != 3 {
        return Err(Error::DimensionError(
            "band-averaged statistic is only available for d = 3".into(),
        ));
    }
    if !(2.0 < m && m < 9.0) {
        return Err(Error::InvalidRange(format!("band mode needs 2 < m < 9, got m = {m}")));
    }
    if t_grid.len() < 8 || t_grid.len() != correlations.len() {
        return Err(Error::BandViolation(format!(
            "t-grid must have >= 8 nodes matching the correlations, got {} and {}",
            t_grid.len(),
            correlations.len()
        )));
    }
    for w in t_grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::BandViolation("t-grid must be strictly increasing".into()));
        }
    }
    if t_grid[0] < k * (1.0 - 1e-9) || *t_grid.last().unwrap() > 2.0 * k * (1.0 + 1e-9) {
        return Err(Error::BandViolation(format!(
            "t-grid [{}, {}] must lie in [k, 2k] = [{k}, {}]",
            t_grid[0],
            t_grid.last().unwrap(),
            2.0 * k
        )));
    }
    let mut value = 0.0;
    let mut var = 0.0;
    for i in 0..t_grid.len() {
        let w = trapezoid_weight(t_grid, i) / k;
        let amp = t_grid[i].powf(m + 4.0);
        let (c, se) = correlations[i];
        value += w * (amp * c.norm()).powi(2);
        // d/d|c| of w (amp |c|)^2 is 2 w amp^2 |c|.
        var += (2.0 * w * amp * amp * c.norm() * se).powi(2);
    }
    Ok((value, var.sqrt()))
}

/// Cubic Hermite interpolation on sorted, possibly nonuniform nodes, with
/// three-point finite-difference slopes; clamps outside the node range.
fn cubic_interp(xs: &[f64], ys: &[Complex64], t: f64) -> Complex64 {
    let n = xs.len();
    if t <= xs[0] {
        return ys[0];
    }
    if t >= xs[n - 1] {
        return ys[n - 1];
    }
    let i = xs.partition_point(|&x| x <= t) - 1;
    let (x0, x1) = (xs[i], xs[i + 1]);
    let (y0, y1) = (ys[i], ys[i + 1]);
    let h = x1 - x0;
    let slope = (y1 - y0) / h;
    let d0 = if i == 0 {
        slope
    } else {
        let hp = x0 - xs[i - 1];
        let sp = (y0 - ys[i - 1]) / hp;
        (sp * h + slope * hp) / (h + hp)
    };
    let d1 = if i + 2 == n {
        slope
    } else {
        let hn = xs[i + 2] - x1;
        let sn = (ys[i + 2] - y1) / hn;
        (slope * hn + sn * h) / (h + hn)
    };
    let s = (t - x0) / h;
    let (s2, s3) = (s * s, s * s * s);
    y0 * (2.0 * s3 - 3.0 * s2 + 1.0)
        + d0 * (h * (s3 - 2.0 * s2 + s))
        + y1 * (-2.0 * s3 + 3.0 * s2)
        + d1 * (h * (s3 - s2))
}

fn trapezoid_weight(grid: &[f64], i: usize) -> f64 {
    let left = if i == 0 { 0.0 } else { grid[i] - grid[i - 1] };
    let right = if i + 1 == grid.len() { 0.0 } else { grid[i + 1] - grid[i] };
    0.5 * (left + right)
}

/// Calibration factor linking the band statistic to `|h_hat(k eta xhat)|^2`
/// for `V = 0`: the statistic approximates
/// `|h_hat|^2 * (|C_3|^4/16) * (1/k) int (t/(t + k eta))^4 dt`.
pub fn band_calibration_factor(t_grid: &[f64], k: f64, eta: f64) -> f64 {
    let c4 = far_field_constant(3).norm_sqr().powi(2);
    let mut integral = 0.0;
    for i in 0..t_grid.len() {
        let t = t_grid[i];
        integral += trapezoid_weight(t_grid, i) * (t / (t + k * eta)).powi(4);
    }
    c4 / 16.0 * integral / k
}

/// Fourier data of `h` on a polar grid `xi = tau * xhat`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolarSamples {
    pub dim: usize,
    pub radii: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
    /// `values[direction][radius] = h_hat(radius * direction)`.
    pub values: Vec<Vec<Complex64>>,
    pub hermitian_completed: bool,
}

impl PolarSamples {
    pub fn new(
        dim: usize,
        radii: Vec<f64>,
        directions: Vec<Vec<f64>>,
        values: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::DimensionError(format!("dim must be 2 or 3, got {dim}")));
        }
        if radii.len() < 2 || directions.is_empty() {
            return Err(Error::EmptyGrid("need >= 2 radii and >= 1 direction".into()));
        }
        for w in radii.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidRange("radii must be strictly increasing".into()));
            }
        }
        if radii[0] < 0.0 {
            return Err(Error::InvalidRange("radii must be nonnegative".into()));
        }
        if values.len() != directions.len()
            || values.iter().any(|row| row.len() != radii.len())
        {
            return Err(Error::GridMismatch("values shape must be directions x radii".into()));
        }
        for row in &values {
            if row.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::Diverged("polar samples contain non-finite values".into()));
            }
        }
        Ok(Self { dim, radii, directions, values, hermitian_completed: false })
    }

    /// Append the antipodal direction of every sample with conjugated values,
    /// so that `value(-xi) = conj(value(xi))` as the real-valuedness of `h`
    /// requires. Directions that already have their antipode present are left
    /// alone.
    pub fn hermitian_complete(&mut self) {
        let existing: Vec<Vec<f64>> = self.directions.clone();
        let mut add_dirs = Vec::new();
        let mut add_vals = Vec::new();
        for (d, row) in self.directions.iter().zip(self.values.iter()) {
            let anti: Vec<f64> = d.iter().map(|v| -v).collect();
            let present = existing
                .iter()
                .chain(add_dirs.iter())
                .any(|e| direction_close(e, &anti));
            if !present {
                add_dirs.push(anti);
                add_vals.push(row.iter().map(|v| v.conj()).collect());
            }
        }
        self.directions.extend(add_dirs);
        self.values.extend(add_vals);
        self.hermitian_completed = true;
    }
}

fn direction_close(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) < 1e-12
}

/// Evenly spaced unit directions on the circle.
pub fn unit_circle(count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| {
            let theta = 2.0 * PI * i as f64 / count as f64;
            vec![theta.cos(), theta.sin()]
        })
        .collect()
}

/// Fibonacci-lattice directions on the sphere (near-uniform area coverage).
pub fn fibonacci_sphere(count: usize) -> Vec<Vec<f64>> {
    let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
    (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let theta = 2.0 * PI * i as f64 / golden;
            vec![r * theta.cos(), r * theta.sin(), z]
        })
        .collect()
}

/// Low-pass polar Fourier inversion
/// `h(x) = (2 pi)^{-d} int_{|xi| <= cutoff} h_hat(xi) e^{i xi . x} dxi`
/// by trapezoid quadrature in radius (Jacobian `tau^{d-1}`) and uniform
/// weights over the direction set. Returns the real field together with the
/// relative imaginary residue that was discarded.
pub fn invert_polar_fourier(
    samples: &PolarSamples,
    cutoff_radius: f64,
    target_grid: GridSpec,
) -> Result<(RealField, f64)> {
    if !samples.hermitian_completed {
        return Err(Error::HermitianViolation(
            "call hermitian_complete before inversion".into(),
        ));
    }
    if target_grid.dim != samples.dim {
        return Err(Error::DimensionError(format!(
            "target grid dim {} differs from samples dim {}",
            target_grid.dim, samples.dim
        )));
    }
    if cutoff_radius > *samples.radii.last().unwrap() * (1.0 + 1e-12) {
        return Err(Error::InvalidRange(format!(
            "cutoff {cutoff_radius} exceeds the max sampled radius {}",
            samples.radii.last().unwrap()
        )));
    }
    let kept = samples.radii.iter().copied().take_while(|&r| r <= cutoff_radius).count();
    if kept < 2 {
        return Ok((RealField::zeros(target_grid), 0.0));
    }
    let dim = samples.dim;
    // The sampled radii are in general sparse and nonuniform (they come from
    // products k * eta), which makes a direct trapezoid rule on them poor for
    // the oscillatory radial integrand, and the inner disk below the smallest
    // radius would be dropped entirely. Resample each direction onto a fine
    // uniform radial grid by cubic interpolation first. The profile extends
    // smoothly through tau = 0 via the Hermitian reflection
    // `h_hat(-tau d) = conj h_hat(tau d)` of a real-valued h.
    let n_fine = 256usize;
    let step = cutoff_radius / n_fine as f64;
    let radii: Vec<f64> = (0..=n_fine).map(|i| step * i as f64).collect();
    // Merge nodes that are equal up to rounding noise (their gap would
    // otherwise wreck the finite-difference slopes).
    let mut merged_radii: Vec<f64> = Vec::with_capacity(samples.radii.len());
    let mut merge_groups: Vec<Vec<usize>> = Vec::new();
    for (i, &r) in samples.radii.iter().enumerate() {
        match merged_radii.last() {
            Some(&prev) if r - prev < 1e-8 * (1.0 + r) => {
                merge_groups.last_mut().unwrap().push(i)
            }
            _ => {
                merged_radii.push(r);
                merge_groups.push(vec![i]);
            }
        }
    }
    // Reflect only strictly positive radii (a sampled tau = 0 node must not
    // be duplicated at -0).
    let n_refl = merged_radii.iter().filter(|&&r| r > 1e-12).count();
    let ext_radii: Vec<f64> = merged_radii
        .iter()
        .rev()
        .take(n_refl)
        .map(|&r| -r)
        .chain(merged_radii.iter().copied())
        .collect();
    let fine_rows: Vec<Vec<Complex64>> = samples
        .values
        .iter()
        .map(|row| {
            let merged: Vec<Complex64> = merge_groups
                .iter()
                .map(|g| g.iter().map(|&i| row[i]).sum::<Complex64>() / g.len() as f64)
                .collect();
            let ext_vals: Vec<Complex64> = merged
                .iter()
                .rev()
                .take(n_refl)
                .map(|v| v.conj())
                .chain(merged.iter().copied())
                .collect();
            radii.iter().map(|&t| cubic_interp(&ext_radii, &ext_vals, t)).collect()
        })
        .collect();
    let sphere_area = if dim == 2 { 2.0 * PI } else { 4.0 * PI };
    let dir_weight = sphere_area / samples.directions.len() as f64;
    let inv_2pi_d = (2.0 * PI).powi(-(dim as i32));
    // Per-radius coefficient (trapezoid weight, Jacobian, angular weight).
    let coeff: Vec<Vec<Complex64>> = fine_rows
        .iter()
        .map(|row| {
            (0..radii.len())
                .map(|i| {
                    row[i]
                        * (trapezoid_weight(&radii, i)
                            * radii[i].powi(dim as i32 - 1)
                            * dir_weight
                            * inv_2pi_d)
                })
                .collect()
        })
        .collect();
    let complex: Vec<Complex64> = (0..target_grid.len())
        .into_par_iter()
        .map(|idx| {
            let ij = target_grid.unravel(idx);
            let mut x = [0.0f64; 3];
            for axis in 0..dim {
                x[axis] = target_grid.coord(ij[axis]);
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for (d, c_row) in samples.directions.iter().zip(coeff.iter()) {
                let p: f64 = d.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
                // e^{i tau_j p} by recurrence along the uniform radii.
                let step = Complex64::new(0.0, (radii[1] - radii[0]) * p).exp();
                let mut phase = Complex64::new(0.0, radii[0] * p).exp();
                for c in c_row {
                    acc += c * phase;
                    phase *= step;
                }
            }
            acc
        })
        .collect();
    let field = crate::grid::ComplexField { grid: target_grid, values: complex };
    let norm = field.l2_norm();
    let (real, residue) = field.into_real_with_residue();
    Ok((real, if norm > 0.0 { residue / norm } else { 0.0 }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiscrepancyMode {
    Eps1,
    Eps2,
}

/// Squared data discrepancy over the declared finite grid.
///
/// `Eps1`: `sup |k^{m+7-d} estimate|^2` over point-mode pairs. `Eps2`: the
/// supremum of the stored band statistics (already weighted).
pub fn data_discrepancy(
    dataset: &CorrelationDataset,
    mode: DiscrepancyMode,
    m: f64,
    dim: usize,
) -> Result<f64> {
    if dataset.pairs.is_empty() {
        return Err(Error::EmptyGrid("correlation dataset has no pairs".into()));
    }
    match mode {
        DiscrepancyMode::Eps1 => {
            if dataset.mode != CorrelationMode::Point {
                return Err(Error::Config("eps1 needs a point-mode dataset".into()));
            }
            Ok(dataset
                .pairs
                .iter()
                .map(|p| (p.k.powf(m + 7.0 - dim as f64) * p.estimate.norm()).powi(2))
                .fold(0.0, f64::max))
        }
        DiscrepancyMode::Eps2 => {
            if dataset.mode != CorrelationMode::BandAveraged {
                return Err(Error::Config("eps2 needs a band-averaged dataset".into()));
            }
            Ok(dataset.pairs.iter().map(|p| p.estimate.re).fold(0.0, f64::max))
        }
    }
}

/// Relative L2 reconstruction error `||h_rec - h_true|| / ||h_true||`.
pub fn reconstruction_error(h_rec: &RealField, h_true: &RealField) -> Result<f64> {
    if h_rec.grid != h_true.grid {
        return Err(Error::GridMismatch("reconstruction and truth grids differ".into()));
    }
    let diff: f64 = h_rec
        .values
        .iter()
        .zip(h_true.values.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let denom: f64 = h_true.values.iter().map(|v| v * v).sum();
    if denom == 0.0 {
        return Ok(if diff == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok((diff / denom).sqrt())
}

/// Parameters a reconstruction was produced under.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReconParams {
    pub m: f64,
    pub dim: usize,
    pub k_max: f64,
    pub ensemble_size: usize,
}

#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub h_rec: RealField,
    pub cutoff_radius: f64,
    pub rel_l2_error: Option<f64>,
    pub params: ReconParams,
}

/// Error-vs-K trend with the stability right-hand side for plotting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityReport {
    pub eps: f64,
    pub k_values: Vec<f64>,
    pub errors: Vec<f64>,
    pub bound_rhs: Vec<f64>,
}
