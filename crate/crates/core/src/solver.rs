//! Forward scattering solver: free-resolvent application by FFT convolution
//! on a zero-padded (circulant) grid, Born/Neumann iteration, far-field
//! patterns and resolvent norm probes.

use crate::error::{Error, Result};
use crate::grid::{
    nudft_point, spectral_transform, ComplexField, Direction, GridSpec, RealField,
};
use crate::kernels::{biharmonic_kernel, CutoffWindow};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Relative magnitude above which values outside the inner half-box count as
/// a support violation.
const SUPPORT_TOL: f64 = 1e-9;

/// Bounded compactly supported potential.
#[derive(Debug, Clone)]
pub struct Potential {
    pub v: RealField,
    pub sup_norm: f64,
}

impl Potential {
    pub fn new(v: RealField) -> Result<Self> {
        let grid = v.grid;
        let margin = 2.0 * grid.spacing();
        let mut sup_norm = 0.0f64;
        for (idx, &val) in v.values.iter().enumerate() {
            sup_norm = sup_norm.max(val.abs());
            if val != 0.0 {
                let ij = grid.unravel(idx);
                for axis in 0..grid.dim {
                    if grid.coord(ij[axis]).abs() > grid.half_width - margin {
                        return Err(Error::Config(
                            "potential must be supported strictly inside the box".into(),
                        ));
                    }
                }
            }
        }
        Ok(Self { v, sup_norm })
    }

    pub fn zero(grid: GridSpec) -> Self {
        Self { v: RealField::zeros(grid), sup_norm: 0.0 }
    }

    pub fn is_zero(&self) -> bool {
        self.sup_norm == 0.0
    }
}

/// One forward scattering task: wavenumber, potential and a source realization.
#[derive(Debug, Clone)]
pub struct ScatteringProblem {
    pub k: f64,
    pub potential: Potential,
    pub source: RealField,
}

impl ScatteringProblem {
    pub fn new(k: f64, potential: Potential, source: RealField) -> Result<Self> {
        let grid = source.grid;
        if potential.v.grid != grid {
            return Err(Error::GridMismatch("potential and source grids differ".into()));
        }
        if !(k > 0.0) {
            return Err(Error::Config(format!("wavenumber must be positive, got {k}")));
        }
        if k * grid.spacing() >= PI / 4.0 {
            return Err(Error::NyquistViolation(k * grid.spacing()));
        }
        Ok(Self { k, potential, source })
    }

    pub fn grid(&self) -> GridSpec {
        self.source.grid
    }
}

/// Result of the Born iteration: the converged field and its terms
/// `term_j = (-R0 V)^j R0 f`.
#[derive(Debug, Clone)]
pub struct BornSolution {
    pub lambda: Complex64,
    pub u: ComplexField,
    pub terms: Vec<ComplexField>,
    pub term_norms: Vec<f64>,
    pub converged: bool,
    pub contraction_estimate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FarFieldKind {
    Full,
    Term(usize),
    VField,
}

/// Far-field values over a set of observation directions.
#[derive(Debug, Clone)]
pub struct FarFieldSample {
    pub k: Complex64,
    pub directions: Vec<Vec<f64>>,
    pub values: Vec<Complex64>,
    pub kind: FarFieldKind,
    /// Seed of the source realization, used to match ensembles across
    /// frequencies.
    pub seed: Option<u64>,
}

/// `C_d`: far-field normalization constant.
pub fn far_field_constant(dim: usize) -> Complex64 {
    match dim {
        2 => Complex64::from_polar(1.0 / (8.0 * PI).sqrt(), PI / 4.0),
        3 => Complex64::new(1.0 / (4.0 * PI), 0.0),
        _ => unreachable!("dim checked at construction"),
    }
}

/// Free resolvent `R0(lambda)` realized as FFT convolution with the
/// biharmonic kernel sampled on the doubled (zero-padded) grid. The kernel is
/// truncated at the full box diameter; for densities in the inner half-box
/// the circulant embedding reproduces the volume potential exactly up to
/// quadrature error.
pub struct R0Operator {
    grid: GridSpec,
    pub lambda: Complex64,
    /// FFT of kernel samples times cell volume, on the doubled grid.
    kernel_hat: Vec<Complex64>,
}

impl R0Operator {
    pub fn new(grid: GridSpec, lambda: Complex64) -> Result<Self> {
        if lambda.norm() == 0.0 {
            return Err(Error::KernelDomainError("lambda must be nonzero".into()));
        }
        let big = grid.doubled();
        let h = grid.spacing();
        let n2 = big.n_per_axis;
        let truncation = 2.0 * grid.half_width * (grid.dim as f64).sqrt() * (1.0 + 1e-12);
        let mut kernel = ComplexField::zeros(big);
        // 1D displacement table shared across axes.
        let disp: Vec<f64> = (0..n2)
            .map(|i| {
                let signed = if i <= n2 / 2 { i as isize } else { i as isize - n2 as isize };
                signed as f64 * h
            })
            .collect();
        for idx in 0..big.len() {
            let ij = big.unravel(idx);
            let r2: f64 = (0..big.dim).map(|a| disp[ij[a]] * disp[ij[a]]).sum();
            let r = r2.sqrt();
            if r > truncation {
                continue;
            }
            kernel.values[idx] = biharmonic_kernel(lambda, r, grid.dim)?;
        }
        let mut kernel_hat = spectral_transform(&kernel, Direction::Forward).values;
        let vol = grid.cell_volume();
        for v in kernel_hat.iter_mut() {
            *v *= vol;
        }
        Ok(Self { grid, lambda, kernel_hat })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    fn check_support(&self, density: &ComplexField) -> Result<()> {
        let grid = &density.grid;
        let max = density.max_abs();
        if max == 0.0 {
            return Ok(());
        }
        let half = grid.half_width / 2.0;
        for (idx, v) in density.values.iter().enumerate() {
            if v.norm() <= SUPPORT_TOL * max {
                continue;
            }
            let ij = grid.unravel(idx);
            for axis in 0..grid.dim {
                if grid.coord(ij[axis]).abs() > half {
                    return Err(Error::SupportViolation {
                        index: idx,
                        magnitude: v.norm() / max,
                    });
                }
            }
        }
        Ok(())
    }

    /// Volume potential `int G_lambda(x, y) density(y) dy`.
    pub fn apply(&self, density: &ComplexField) -> Result<ComplexField> {
        self.apply_impl(density, false)
    }

    /// Adjoint (conjugate kernel) application, used by the norm probes.
    pub fn apply_adjoint(&self, density: &ComplexField) -> Result<ComplexField> {
        self.apply_impl(density, true)
    }

    fn apply_impl(&self, density: &ComplexField, adjoint: bool) -> Result<ComplexField> {
        if density.grid != self.grid {
            return Err(Error::GridMismatch("density grid differs from operator grid".into()));
        }
        self.check_support(density)?;
        let big = self.grid.doubled();
        let n = self.grid.n_per_axis;
        let n2 = big.n_per_axis;
        let offset = n / 2;
        let mut embedded = ComplexField::zeros(big);
        // Adjoint of (conv with K) is conv with conj(K) since K is symmetric:
        // A* g = conj(A conj(g)).
        for idx in 0..self.grid.len() {
            let ij = self.grid.unravel(idx);
            let mut big_idx = [0usize; 3];
            for axis in 0..self.grid.dim {
                big_idx[axis] = ij[axis] + offset;
            }
            let v = density.values[idx];
            embedded.values[big.ravel(&big_idx[..big.dim])] = if adjoint { v.conj() } else { v };
        }
        let mut hat = spectral_transform(&embedded, Direction::Forward);
        for (v, k) in hat.values.iter_mut().zip(self.kernel_hat.iter()) {
            *v *= k;
        }
        let out_big = spectral_transform(&hat, Direction::Inverse);
        let mut out = ComplexField::zeros(self.grid);
        for idx in 0..self.grid.len() {
            let ij = self.grid.unravel(idx);
            let mut big_idx = [0usize; 3];
            for axis in 0..self.grid.dim {
                big_idx[axis] = ij[axis] + offset;
            }
            let v = out_big.values[big.ravel(&big_idx[..big.dim])];
            out.values[idx] = if adjoint { v.conj() } else { v };
        }
        let _ = n2;
        Ok(out)
    }
}

/// One-off application of the free resolvent.
pub fn apply_r0(lambda: Complex64, density: &ComplexField) -> Result<ComplexField> {
    R0Operator::new(density.grid, lambda)?.apply(density)
}

fn multiply_real(field: &ComplexField, weight: &RealField) -> ComplexField {
    ComplexField {
        grid: field.grid,
        values: field
            .values
            .iter()
            .zip(weight.values.iter())
            .map(|(f, &w)| f * w)
            .collect(),
    }
}

/// Born iteration at an arbitrary complex wavenumber (the `ik` solves of the
/// conjugation identity reuse the same machinery).
pub fn born_solve_lambda(
    problem: &ScatteringProblem,
    lambda: Complex64,
    tol: f64,
    jmax: usize,
) -> Result<BornSolution> {
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
    }
    let r0 = R0Operator::new(problem.grid(), lambda)?;
    born_solve_with(problem, &r0, tol, jmax)
}

/// Born iteration reusing a prebuilt resolvent operator (kernel cache).
pub fn born_solve_with(
    problem: &ScatteringProblem,
    r0: &R0Operator,
    tol: f64,
    jmax: usize,
) -> Result<BornSolution> {
    let mut terms = Vec::new();
    let mut term_norms = Vec::new();
    let term0 = r0.apply(&problem.source.to_complex())?;
    let norm0 = term0.l2_norm();
    let mut u = term0.clone();
    terms.push(term0);
    term_norms.push(norm0);
    let mut converged = problem.potential.is_zero() || norm0 == 0.0;
    let mut contraction = 0.0f64;
    if !converged {
        for _j in 1..=jmax {
            let prev = terms.last().unwrap();
            let density = multiply_real(prev, &problem.potential.v);
            let mut next = r0.apply(&density)?;
            for v in next.values.iter_mut() {
                *v = -*v;
            }
            let norm = next.l2_norm();
            let ratio = norm / term_norms.last().unwrap().max(1e-300);
            contraction = contraction.max(ratio);
            for (acc, v) in u.values.iter_mut().zip(next.values.iter()) {
                *acc += v;
            }
            terms.push(next);
            term_norms.push(norm);
            if norm / norm0.max(1e-300) < tol {
                converged = true;
                break;
            }
            if ratio >= 1.0 {
                // Divergence is reported, never silently accepted.
                converged = false;
                break;
            }
        }
    }
    Ok(BornSolution {
        lambda: r0.lambda,
        u,
        terms,
        term_norms,
        converged,
        contraction_estimate: contraction,
    })
}

/// Born series solve at the problem's real wavenumber.
pub fn born_solve(problem: &ScatteringProblem, tol: f64, jmax: usize) -> Result<BornSolution> {
    born_solve_lambda(problem, Complex64::new(problem.k, 0.0), tol, jmax)
}

/// Fourth-order 1D second-difference along every axis (periodic wrap).
fn laplacian_4th(field: &ComplexField) -> ComplexField {
    let grid = field.grid;
    let n = grid.n_per_axis;
    let h2 = grid.spacing() * grid.spacing();
    let c = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
    let mut out = ComplexField::zeros(grid);
    for idx in 0..grid.len() {
        let ij = grid.unravel(idx);
        let mut acc = Complex64::new(0.0, 0.0);
        for axis in 0..grid.dim {
            for (s, &w) in (-2i64..=2).zip(c.iter()) {
                let mut jj = ij;
                jj[axis] = ((ij[axis] as i64 + s).rem_euclid(n as i64)) as usize;
                acc += w * field.values[grid.ravel(&jj[..grid.dim])];
            }
        }
        out.values[idx] = acc / h2;
    }
    out
}

/// Relative l2 residual of `(Lap^2 - k^4 + V) u = f` over the inner
/// quarter-box, by fourth-order finite differences.
pub fn pde_residual(solution: &BornSolution, problem: &ScatteringProblem) -> f64 {
    let grid = problem.grid();
    let lap = laplacian_4th(&solution.u);
    let bilap = laplacian_4th(&lap);
    let k4 = solution.lambda.powi(4);
    let quarter = grid.half_width / 4.0;
    let mut num = 0.0;
    let mut den = 0.0;
    for idx in 0..grid.len() {
        let ij = grid.unravel(idx);
        let mut inside = true;
        for axis in 0..grid.dim {
            inside &= grid.coord(ij[axis]).abs() <= quarter;
        }
        if !inside {
            continue;
        }
        let res = bilap.values[idx] - k4 * solution.u.values[idx]
            + problem.potential.v.values[idx] * solution.u.values[idx]
            - problem.source.values[idx];
        num += res.norm_sqr();
        den += problem.source.values[idx] * problem.source.values[idx];
    }
    if den == 0.0 {
        if num == 0.0 {
            return 0.0;
        }
        return f64::INFINITY;
    }
    (num / den).sqrt()
}

fn check_directions(directions: &[Vec<f64>], dim: usize) -> Result<()> {
    for d in directions {
        if d.len() != dim {
            return Err(Error::DimensionError(format!(
                "direction has {} components, expected {dim}",
                d.len()
            )));
        }
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("direction not unit length: |d| = {norm}")));
        }
    }
    Ok(())
}

fn far_field_prefactor(k: f64, dim: usize) -> Complex64 {
    far_field_constant(dim) / (2.0 * k.powf((7.0 - dim as f64) / 2.0))
}

/// Far-field pattern
/// `u_inf(xhat, k) = C_d/(2 k^{(7-d)/2}) int e^{-i k xhat . y} (f - V u) dy`.
pub fn far_field(
    problem: &ScatteringProblem,
    solution: &BornSolution,
    directions: &[Vec<f64>],
) -> Result<FarFieldSample> {
    let grid = problem.grid();
    check_directions(directions, grid.dim)?;
    let vu = multiply_real(&solution.u, &problem.potential.v);
    let density = ComplexField {
        grid,
        values: problem
            .source
            .values
            .iter()
            .zip(vu.values.iter())
            .map(|(&f, v)| Complex64::new(f, 0.0) - v)
            .collect(),
    };
    let pref = far_field_prefactor(problem.k, grid.dim);
    let values = directions
        .iter()
        .map(|d| {
            let xi: Vec<f64> = d.iter().map(|v| v * problem.k).collect();
            nudft_point(&density, &xi).map(|v| pref * v)
        })
        .collect::<Result<_>>()?;
    Ok(FarFieldSample {
        k: Complex64::new(problem.k, 0.0),
        directions: directions.to_vec(),
        values,
        kind: FarFieldKind::Full,
        seed: None,
    })
}

/// Far field for `V = 0`, where the density is just the source: no resolvent
/// application is needed. `seed` tags the realization for ensemble matching.
pub fn free_far_field(
    source: &RealField,
    k: f64,
    directions: &[Vec<f64>],
    seed: Option<u64>,
) -> Result<FarFieldSample> {
    let grid = source.grid;
    check_directions(directions, grid.dim)?;
    if !(k > 0.0) {
        return Err(Error::Config(format!("wavenumber must be positive, got {k}")));
    }
    let pref = far_field_prefactor(k, grid.dim);
    let complex = source.to_complex();
    let values = directions
        .iter()
        .map(|d| {
            let xi: Vec<f64> = d.iter().map(|v| v * k).collect();
            nudft_point(&complex, &xi).map(|v| pref * v)
        })
        .collect::<Result<_>>()?;
    Ok(FarFieldSample {
        k: Complex64::new(k, 0.0),
        directions: directions.to_vec(),
        values,
        kind: FarFieldKind::Full,
        seed,
    })
}

/// Far-field of the j-th Born density `(-V R0)^j f`; for `j >= 1` this equals
/// `-V * term_{j-1}` of the solution.
pub fn far_field_term(
    j: usize,
    problem: &ScatteringProblem,
    solution: &BornSolution,
    directions: &[Vec<f64>],
) -> Result<FarFieldSample> {
    let grid = problem.grid();
    check_directions(directions, grid.dim)?;
    let density = if j == 0 {
        problem.source.to_complex()
    } else {
        if j - 1 >= solution.terms.len() {
            return Err(Error::IndexOutOfRange { index: j, len: solution.terms.len() });
        }
        let mut d = multiply_real(&solution.terms[j - 1], &problem.potential.v);
        for v in d.values.iter_mut() {
            *v = -*v;
        }
        d
    };
    let pref = far_field_prefactor(problem.k, grid.dim);
    let values = directions
        .iter()
        .map(|d| {
            let xi: Vec<f64> = d.iter().map(|v| v * problem.k).collect();
            nudft_point(&density, &xi).map(|v| pref * v)
        })
        .collect::<Result<_>>()?;
    Ok(FarFieldSample {
        k: Complex64::new(problem.k, 0.0),
        directions: directions.to_vec(),
        values,
        kind: FarFieldKind::Term(j),
        seed: None,
    })
}

/// `v_inf(xhat, k) = conj(C_d)/(2 k^{(7-d)/2}) int e^{+i k xhat . y}
/// (f - V u(., ik)) dy`; for real data it equals `conj(u_inf)`.
pub fn v_far_field(
    problem: &ScatteringProblem,
    directions: &[Vec<f64>],
    tol: f64,
    jmax: usize,
) -> Result<FarFieldSample> {
    let grid = problem.grid();
    check_directions(directions, grid.dim)?;
    let lambda = Complex64::new(0.0, problem.k);
    let solution = born_solve_lambda(problem, lambda, tol, jmax)?;
    if !solution.converged {
        return Err(Error::Diverged("Born series at ik did not converge".into()));
    }
    let vu = multiply_real(&solution.u, &problem.potential.v);
    let density = ComplexField {
        grid,
        values: problem
            .source
            .values
            .iter()
            .zip(vu.values.iter())
            .map(|(&f, v)| Complex64::new(f, 0.0) - v)
            .collect(),
    };
    let pref = far_field_constant(grid.dim).conj()
        / (2.0 * problem.k.powf((7.0 - grid.dim as f64) / 2.0));
    let values = directions
        .iter()
        .map(|d| {
            let xi: Vec<f64> = d.iter().map(|v| -v * problem.k).collect();
            nudft_point(&density, &xi).map(|v| pref * v)
        })
        .collect::<Result<_>>()?;
    Ok(FarFieldSample {
        k: Complex64::new(problem.k, 0.0),
        directions: directions.to_vec(),
        values,
        kind: FarFieldKind::VField,
        seed: None,
    })
}

#[derive(Debug, Clone, Copy)]
pub enum ResolventVariant<'a> {
    Free,
    Potential(&'a Potential),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormProbeReport {
    pub entries: Vec<(f64, f64)>,
    pub fitted_slope: f64,
    pub predicted_slope: f64,
}

/// Least squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let lx = x.ln();
        let ly = y.ln();
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Estimate `||chi R chi||_{L2 -> L2}` at each wavenumber by power iteration
/// on the discretized operator and fit the log-log decay slope.
pub fn resolvent_norm_probe(
    k_list: &[f64],
    window: &CutoffWindow,
    variant: ResolventVariant,
    iterations: usize,
) -> Result<NormProbeReport> {
    if k_list.len() < 2 {
        return Err(Error::EmptyGrid("need at least two wavenumbers".into()));
    }
    let grid = window.chi.grid;
    let mut entries = Vec::new();
    for &k in k_list {
        if k * grid.spacing() >= PI / 4.0 {
            return Err(Error::NyquistViolation(k * grid.spacing()));
        }
        let r0 = R0Operator::new(grid, Complex64::new(k, 0.0))?;
        let norm = operator_norm(&r0, window, &variant, iterations)?;
        entries.push((k, norm));
    }
    let fitted_slope = log_log_slope(&entries);
    let predicted_slope = match grid.dim {
        2 => -2.5,
        _ => -3.0,
    };
    Ok(NormProbeReport { entries, fitted_slope, predicted_slope })
}

fn apply_variant(
    r0: &R0Operator,
    variant: &ResolventVariant,
    input: &ComplexField,
    adjoint: bool,
) -> Result<ComplexField> {
    let base = |f: &ComplexField| if adjoint { r0.apply_adjoint(f) } else { r0.apply(f) };
    match variant {
        ResolventVariant::Free => base(input),
        ResolventVariant::Potential(pot) => {
            // R_V = sum_j (-R0 V)^j R0; adjoint applies the series in
            // reversed order: sum_j R0* (-V R0*)^j.
            if adjoint {
                let mut series = input.clone();
                let mut term = input.clone();
                for _ in 0..30 {
                    let mut next = base(&term)?;
                    next = multiply_real(&next, &pot.v);
                    for v in next.values.iter_mut() {
                        *v = -*v;
                    }
                    let norm = next.l2_norm();
                    for (s, v) in series.values.iter_mut().zip(next.values.iter()) {
                        *s += v;
                    }
                    term = next;
                    if norm < 1e-10 * input.l2_norm().max(1e-300) {
                        break;
                    }
                }
                base(&series)
            } else {
                let first = base(input)?;
                let mut total = first.clone();
                let mut term = first;
                for _ in 0..30 {
                    let density = multiply_real(&term, &pot.v);
                    let mut next = base(&density)?;
                    for v in next.values.iter_mut() {
                        *v = -*v;
                    }
                    let norm = next.l2_norm();
                    for (s, v) in total.values.iter_mut().zip(next.values.iter()) {
                        *s += v;
                    }
                    term = next;
                    if norm < 1e-10 * total.l2_norm().max(1e-300) {
                        break;
                    }
                }
                Ok(total)
            }
        }
    }
}

fn operator_norm(
    r0: &R0Operator,
    window: &CutoffWindow,
    variant: &ResolventVariant,
    iterations: usize,
) -> Result<f64> {
    let grid = window.chi.grid;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v = ComplexField {
        grid,
        values: (0..grid.len())
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect(),
    };
    // Keep the start vector in the operator's admissible support.
    v = multiply_real(&v, &window.chi);
    let mut estimate = 0.0;
    for iter in 0..iterations {
        // A v = chi R (chi v)
        let av = apply_variant(r0, variant, &multiply_real(&v, &window.chi), false)?;
        let av = multiply_real(&av, &window.chi);
        let av_norm = av.l2_norm();
        let v_norm = v.l2_norm();
        if !(av_norm > 0.0) || !av_norm.is_finite() {
            return Err(Error::PowerIterationStall(format!("iteration {iter}")));
        }
        estimate = av_norm / v_norm;
        // A* (A v)
        let atav = apply_variant(r0, variant, &multiply_real(&av, &window.chi), true)?;
        let mut next = multiply_real(&atav, &window.chi);
        let scale = 1.0 / next.l2_norm();
        for x in next.values.iter_mut() {
            *x *= scale;
        }
        v = next;
    }
    Ok(estimate)
}
