//! Sampling of generalized microlocally isotropic Gaussian random sources.
//!
//! A realization of order `-m` with strength `h` is built as
//! ```text
//! f = sqrt(h) * (-Laplace)^{-m/4} W
//! ```
//! with `W` white noise, so that the covariance operator
//! `sqrt(h) (-Laplace)^{-m/2} sqrt(h)` has principal symbol `h(x) |xi|^{-m}`.

use crate::error::{Error, Result};
use crate::grid::{
    apply_multiplier, nudft_point_real, GridSpec, RealField, SpectralMultiplier,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Nonnegative compactly supported strength profile `h` with `0 <= h <= M`.
#[derive(Debug, Clone)]
pub struct StrengthProfile {
    pub h: RealField,
    pub bound: f64,
}

impl StrengthProfile {
    pub fn new(h: RealField) -> Result<Self> {
        let grid = h.grid;
        let margin = 2.0 * grid.spacing();
        let mut bound = 0.0f64;
        for (idx, &v) in h.values.iter().enumerate() {
            if v < 0.0 {
                return Err(Error::NegativeStrength { index: idx, value: v });
            }
            bound = bound.max(v);
            if v != 0.0 {
                let ij = grid.unravel(idx);
                for axis in 0..grid.dim {
                    if grid.coord(ij[axis]).abs() > grid.half_width - margin {
                        return Err(Error::Config(
                            "strength profile must vanish within 2 cells of the box boundary"
                                .into(),
                        ));
                    }
                }
            }
        }
        Ok(Self { h, bound })
    }

    pub fn grid(&self) -> GridSpec {
        self.h.grid
    }

    /// `h_hat(0) = int h`, the normalization of the symbol validation.
    pub fn h_hat_zero(&self) -> f64 {
        self.h.integral()
    }

    /// Fourier transform of h at an arbitrary frequency (quadrature oracle).
    pub fn h_hat(&self, xi: &[f64]) -> Result<Complex64> {
        nudft_point_real(&self.h, xi)
    }
}

/// Samplable random source of order `-m` with strength `h`.
#[derive(Debug, Clone)]
pub struct GmigSpec {
    pub m: f64,
    pub strength: StrengthProfile,
}

impl GmigSpec {
    pub fn new(m: f64, strength: StrengthProfile) -> Result<Self> {
        let d = strength.grid().dim as f64;
        if !(m > d - 1.0) {
            return Err(Error::InvalidRange(format!(
                "order parameter m = {m} must exceed d - 1 = {}",
                d - 1.0
            )));
        }
        Ok(Self { m, strength })
    }

    pub fn grid(&self) -> GridSpec {
        self.strength.grid()
    }

    pub fn dim(&self) -> usize {
        self.grid().dim
    }

    /// Point-frequency pipeline additionally requires `m < d + 3`.
    pub fn validate_point_mode(&self) -> Result<()> {
        let d = self.dim() as f64;
        if self.m >= d + 3.0 {
            return Err(Error::InvalidRange(format!(
                "point-frequency pipeline needs m < d + 3, got m = {}",
                self.m
            )));
        }
        Ok(())
    }

    /// Band-averaged pipeline: d = 3 and `2 < m < 9`.
    pub fn validate_band_mode(&self) -> Result<()> {
        if self.dim() != 3 {
            return Err(Error::DimensionError(
                "band-averaged pipeline is defined for d = 3".into(),
            ));
        }
        if !(self.m > 2.0 && self.m < 9.0) {
            return Err(Error::InvalidRange(format!(
                "band-averaged pipeline needs 2 < m < 9, got m = {}",
                self.m
            )));
        }
        Ok(())
    }
}

/// Counter-based seed derivation: realization `i` of a run with `master_seed`
/// always gets the same seed, independent of generation order.
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// I.i.d. centered Gaussians per cell with variance `1/cell_volume`, so that
/// `<W, phi>` has variance approximately `||phi||_{L^2}^2`.
pub fn sample_white_noise(grid: GridSpec, seed: u64) -> RealField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = (1.0 / grid.cell_volume()).sqrt();
    let n = grid.len();
    let mut values = Vec::with_capacity(n);
    // Box-Muller keeps the stream identical across rand_distr versions.
    let mut spare: Option<f64> = None;
    for _ in 0..n {
        let z = if let Some(s) = spare.take() {
            s
        } else {
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen::<f64>();
            let r = (-2.0 * u1.ln()).sqrt();
            let theta = 2.0 * std::f64::consts::PI * u2;
            spare = Some(r * theta.sin());
            r * theta.cos()
        };
        values.push(sigma * z);
    }
    RealField { grid, values }
}

/// One realization: `sqrt(h) * (-Laplace)^{-m/4} W`. Deterministic in
/// `(spec, seed)`.
pub fn sample_gmig(spec: &GmigSpec, seed: u64) -> Result<RealField> {
    let grid = spec.grid();
    let noise = sample_white_noise(grid, seed);
    let mult = SpectralMultiplier::power_law(grid, -spec.m / 2.0, 0.0);
    let colored = apply_multiplier(&noise.to_complex(), &mult)?;
    // The symbol is real and even, so the output is real up to FFT round-off.
    let norm = colored.l2_norm();
    let (mut real, residue) = colored.into_real_with_residue();
    debug_assert!(
        residue <= 1e-12 * norm.max(1e-300),
        "Hermitian symmetry violated: residue {residue}"
    );
    for (v, &h) in real.values.iter_mut().zip(spec.strength.h.values.iter()) {
        *v *= h.sqrt();
    }
    Ok(real)
}

/// Monte Carlo ensemble of realizations with per-realization seeds.
#[derive(Debug, Clone)]
pub struct FieldEnsemble {
    pub spec: GmigSpec,
    pub realizations: Vec<RealField>,
    pub seeds: Vec<u64>,
}

/// Manifest of a persisted ensemble: the spec parameters plus the seeding.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleManifest {
    pub m: f64,
    pub grid: GridSpec,
    pub master_seed: u64,
    pub n_realizations: usize,
}

impl FieldEnsemble {
    /// Parallel generation; realization `i` is fully determined by
    /// `derive_seed(master_seed, i)`.
    pub fn generate(spec: GmigSpec, master_seed: u64, count: usize) -> Result<Self> {
        let seeds: Vec<u64> = (0..count as u64).map(|i| derive_seed(master_seed, i)).collect();
        let realizations: Vec<RealField> = seeds
            .par_iter()
            .map(|&s| sample_gmig(&spec, s))
            .collect::<Result<_>>()?;
        Ok(Self { spec, realizations, seeds })
    }

    pub fn len(&self) -> usize {
        self.realizations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.realizations.is_empty()
    }
}

/// `E[f_hat((k+tau) xhat) conj(f_hat(k xhat))]` by sample mean, with the
/// standard error of the complex mean.
pub fn empirical_fourier_correlation(
    ensemble: &FieldEnsemble,
    k: f64,
    tau: f64,
    xhat: &[f64],
) -> Result<(Complex64, f64)> {
    if ensemble.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let xi_lo: Vec<f64> = xhat.iter().map(|v| v * k).collect();
    let xi_hi: Vec<f64> = xhat.iter().map(|v| v * (k + tau)).collect();
    let products: Vec<Complex64> = ensemble
        .realizations
        .par_iter()
        .map(|f| {
            let lo = nudft_point_real(f, &xi_lo)?;
            let hi = nudft_point_real(f, &xi_hi)?;
            Ok(hi * lo.conj())
        })
        .collect::<Result<_>>()?;
    Ok(mean_and_stderr(&products))
}

/// Sample mean of complex values with the combined standard error
/// `sqrt((var_re + var_im)/N)`.
pub fn mean_and_stderr(values: &[Complex64]) -> (Complex64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<Complex64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var: f64 = values
        .iter()
        .map(|v| {
            let d = v - mean;
            d.re * d.re + d.im * d.im
        })
        .sum::<f64>()
        / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// One row of a symbol validation report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymbolRatio {
    pub k: f64,
    pub direction_index: usize,
    pub ratio: f64,
}

/// Ratios `k^m E|f_hat(k xhat)|^2 / h_hat(0)` over a frequency band: for a
/// correctly sampled field they concentrate near 1 at large `k`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymbolReport {
    pub entries: Vec<SymbolRatio>,
    pub median: f64,
    pub spread: f64,
    pub tolerance: (f64, f64),
    pub pass: bool,
}

pub fn symbol_validation(
    ensemble: &FieldEnsemble,
    k_band: &[f64],
    directions: &[Vec<f64>],
    tolerance: (f64, f64),
) -> Result<SymbolReport> {
    let mut entries = Vec::new();
    let h0 = ensemble.spec.strength.h_hat_zero();
    for &k in k_band {
        for (di, dir) in directions.iter().enumerate() {
            let xi: Vec<f64> = dir.iter().map(|v| v * k).collect();
            let values: Vec<f64> = ensemble
                .realizations
                .par_iter()
                .map(|f| nudft_point_real(f, &xi).map(|v| v.norm_sqr()))
                .collect::<Result<_>>()?;
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            entries.push(SymbolRatio {
                k,
                direction_index: di,
                ratio: k.powf(ensemble.spec.m) * mean / h0,
            });
        }
    }
    if entries.is_empty() {
        return Ok(SymbolReport {
            entries,
            median: f64::NAN,
            spread: f64::NAN,
            tolerance,
            pass: true,
        });
    }
    let mut ratios: Vec<f64> = entries.iter().map(|e| e.ratio).collect();
    ratios.sort_by(|a, b| a.total_cmp(b));
    let median = ratios[ratios.len() / 2];
    let spread = ratios[ratios.len() - 1] - ratios[0];
    let pass = median >= tolerance.0 && median <= tolerance.1;
    Ok(SymbolReport { entries, median, spread, tolerance, pass })
}
