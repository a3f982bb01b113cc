//! Uniform periodic grids, sampled fields, discrete spectral transforms and
//! nonuniform-frequency Fourier quadrature.
//!
//! The Fourier convention is fixed repo-wide as
//! ```text
//! f_hat(xi) = int f(y) e^{-i xi . y} dy
//! ```
//! The computational box is `[-R, R)^d` with cell-centered sample points
//! `y_j = -R + (j + 1/2) h`, `h = 2R/n`. Discrete frequencies are
//! `xi_l = (pi/R) l` with the signed index `l in [-n/2, n/2)`.

use crate::error::{Error, Result};
use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Uniform periodic computational box `[-R, R)^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub n_per_axis: usize,
    pub half_width: f64,
}

impl GridSpec {
    pub fn new(dim: usize, n_per_axis: usize, half_width: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::DimensionError(format!("dim must be 2 or 3, got {dim}")));
        }
        if n_per_axis < 8 || !n_per_axis.is_power_of_two() {
            return Err(Error::Config(format!(
                "n_per_axis must be a power of two >= 8, got {n_per_axis}"
            )));
        }
        if !(half_width > 0.0) {
            return Err(Error::Config(format!("half_width must be positive, got {half_width}")));
        }
        Ok(Self { dim, n_per_axis, half_width })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n_per_axis as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn len(&self) -> usize {
        self.n_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell-centered coordinate along one axis.
    pub fn coord(&self, index: usize) -> f64 {
        -self.half_width + (index as f64 + 0.5) * self.spacing()
    }

    /// Signed frequency for FFT bin `index` along one axis.
    pub fn freq(&self, index: usize) -> f64 {
        let n = self.n_per_axis;
        let signed = if index < n / 2 { index as isize } else { index as isize - n as isize };
        std::f64::consts::PI / self.half_width * signed as f64
    }

    /// Decompose a row-major linear index into per-axis indices.
    pub fn unravel(&self, mut index: usize) -> [usize; 3] {
        let n = self.n_per_axis;
        let mut out = [0usize; 3];
        for axis in (0..self.dim).rev() {
            out[axis] = index % n;
            index /= n;
        }
        out
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        let n = self.n_per_axis;
        let mut out = 0usize;
        for &i in idx.iter().take(self.dim) {
            out = out * n + i;
        }
        out
    }

    /// Grid with the same spacing and doubled extent (for circulant embedding).
    pub fn doubled(&self) -> GridSpec {
        GridSpec {
            dim: self.dim,
            n_per_axis: 2 * self.n_per_axis,
            half_width: 2.0 * self.half_width,
        }
    }
}

/// Real-valued sampled function on a grid, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl RealField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        let mut point = [0.0f64; 3];
        for idx in 0..grid.len() {
            let ij = grid.unravel(idx);
            for axis in 0..grid.dim {
                point[axis] = grid.coord(ij[axis]);
            }
            values.push(f(&point[..grid.dim]));
        }
        Self { grid, values }
    }

    pub fn to_complex(&self) -> ComplexField {
        ComplexField {
            grid: self.grid,
            values: self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    /// Box integral by midpoint quadrature.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }
}

/// Complex-valued sampled function on a grid, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Real part; largest discarded imaginary magnitude is returned alongside.
    pub fn into_real_with_residue(self) -> (RealField, f64) {
        let residue = self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        let values = self.values.into_iter().map(|v| v.re).collect();
        (RealField { grid: self.grid, values }, residue)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

static FFT_PLANS: Lazy<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut plans = FFT_PLANS.lock().unwrap();
    plans
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

/// In-place multidimensional FFT along every axis.
fn fft_nd(grid: &GridSpec, values: &mut [Complex64], inverse: bool) {
    let n = grid.n_per_axis;
    let fft = plan(n, inverse);
    let total = grid.len();
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    // Last axis is contiguous.
    for chunk in values.chunks_exact_mut(n) {
        fft.process(chunk);
    }
    // Remaining axes: gather strided lines into scratch.
    let mut stride = n;
    for _axis in (0..grid.dim - 1).rev() {
        let line_count = total / n;
        for line in 0..line_count {
            // Lines along this axis: index = base + j*stride.
            let block = stride * n;
            let base = (line / stride) * block + (line % stride);
            for j in 0..n {
                scratch[j] = values[base + j * stride];
            }
            fft.process(&mut scratch);
            for j in 0..n {
                values[base + j * stride] = scratch[j];
            }
        }
        stride *= n;
    }
    if inverse {
        let scale = 1.0 / total as f64;
        for v in values.iter_mut() {
            *v *= scale;
        }
    }
}

/// Unitary-up-to-normalization discrete Fourier transform.
///
/// `inverse(forward(x)) = x` to round-off.
pub fn spectral_transform(field: &ComplexField, direction: Direction) -> ComplexField {
    let mut out = field.clone();
    fft_nd(&out.grid.clone(), &mut out.values, direction == Direction::Inverse);
    out
}

/// Continuous-frequency Fourier quadrature at a single point:
/// `cell_volume * sum_j field(y_j) e^{-i xi . y_j}`.
///
/// The per-axis phase factors are precomputed so the inner loop is a plain
/// complex multiply-accumulate.
pub fn nudft_point(field: &ComplexField, xi: &[f64]) -> Result<Complex64> {
    let grid = &field.grid;
    if xi.len() != grid.dim {
        return Err(Error::DimensionError(format!(
            "xi has {} components, grid dim is {}",
            xi.len(),
            grid.dim
        )));
    }
    let xi_norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    if xi_norm * grid.spacing() >= std::f64::consts::PI {
        return Err(Error::NyquistViolation(xi_norm * grid.spacing()));
    }
    let n = grid.n_per_axis;
    // phases[axis][j] = e^{-i xi_axis * y_j}
    let mut phases: Vec<Vec<Complex64>> = Vec::with_capacity(grid.dim);
    for &xa in xi.iter() {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let arg = -xa * grid.coord(j);
            row.push(Complex64::new(arg.cos(), arg.sin()));
        }
        phases.push(row);
    }
    let mut sum = Complex64::new(0.0, 0.0);
    match grid.dim {
        2 => {
            for i0 in 0..n {
                let p0 = phases[0][i0];
                let row = &field.values[i0 * n..(i0 + 1) * n];
                let mut acc = Complex64::new(0.0, 0.0);
                for (v, p1) in row.iter().zip(phases[1].iter()) {
                    acc += v * p1;
                }
                sum += p0 * acc;
            }
        }
        3 => {
            for i0 in 0..n {
                let p0 = phases[0][i0];
                let mut acc0 = Complex64::new(0.0, 0.0);
                for i1 in 0..n {
                    let p1 = phases[1][i1];
                    let row = &field.values[(i0 * n + i1) * n..(i0 * n + i1 + 1) * n];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (v, p2) in row.iter().zip(phases[2].iter()) {
                        acc += v * p2;
                    }
                    acc0 += p1 * acc;
                }
                sum += p0 * acc0;
            }
        }
        _ => unreachable!(),
    }
    Ok(sum * grid.cell_volume())
}

/// Convenience wrapper for real fields.
pub fn nudft_point_real(field: &RealField, xi: &[f64]) -> Result<Complex64> {
    nudft_point(&field.to_complex(), xi)
}

/// Diagonal operator in the discrete Fourier basis. The zero frequency is
/// handled explicitly since symbols like `|xi|^{-m}` are singular there.
pub struct SpectralMultiplier {
    grid: GridSpec,
    /// Per-bin weights in FFT ordering, zero mode already substituted.
    weights: Vec<Complex64>,
}

impl SpectralMultiplier {
    /// Build from a symbol `xi -> weight`; `zero_mode` overrides `xi = 0`.
    pub fn new(
        grid: GridSpec,
        symbol: impl Fn(&[f64]) -> Complex64,
        zero_mode: Complex64,
    ) -> Self {
        let mut weights = Vec::with_capacity(grid.len());
        let mut xi = [0.0f64; 3];
        for idx in 0..grid.len() {
            let ij = grid.unravel(idx);
            let mut is_zero = true;
            for axis in 0..grid.dim {
                xi[axis] = grid.freq(ij[axis]);
                is_zero &= ij[axis] == 0;
            }
            let w = if is_zero { zero_mode } else { symbol(&xi[..grid.dim]) };
            assert!(w.re.is_finite() && w.im.is_finite(), "multiplier not finite at bin {idx}");
            weights.push(w);
        }
        Self { grid, weights }
    }

    pub fn identity(grid: GridSpec) -> Self {
        Self::new(grid, |_| Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
    }

    pub fn zero(grid: GridSpec) -> Self {
        Self::new(grid, |_| Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    }

    /// `|xi|^exponent` with an explicit zero-mode value.
    pub fn power_law(grid: GridSpec, exponent: f64, zero_mode: f64) -> Self {
        Self::new(
            grid,
            |xi| {
                let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
                Complex64::new(r.powf(exponent), 0.0)
            },
            Complex64::new(zero_mode, 0.0),
        )
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Weight at a given FFT linear index.
    pub fn weight(&self, index: usize) -> Complex64 {
        self.weights[index]
    }
}

/// Pointwise multiplication in spectral space.
pub fn apply_multiplier(field: &ComplexField, mult: &SpectralMultiplier) -> Result<ComplexField> {
    if field.grid != mult.grid {
        return Err(Error::GridMismatch("field and multiplier grids differ".into()));
    }
    let mut hat = spectral_transform(field, Direction::Forward);
    for (v, w) in hat.values.iter_mut().zip(mult.weights.iter()) {
        *v *= w;
    }
    Ok(spectral_transform(&hat, Direction::Inverse))
}
