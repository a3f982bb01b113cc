//! Green kernels for the Laplacian and biharmonic operators, and the Hankel
//! function `H_0^{(1)}` for complex arguments on `S = C \ (-inf, 0]*i`.
//!
//! On `S` the function evaluated here is the analytic continuation of the
//! principal-branch `H_0^{(1)}` through the upper half plane; in particular it
//! is continuous across the negative real axis from above, and the third
//! quadrant is reached via the circuit relation
//! `H_0^{(1)}(e^{i pi} w) = H_0^{(1)}(w) - 2 J_0(w)`.

use crate::error::{Error, Result};
use crate::grid::RealField;
use num_complex::Complex64;
use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Series/asymptotic crossover for `H_0^{(1)}`.
const HANKEL_SWITCH: f64 = 12.0;

/// A complex wavenumber together with its position relative to the branch
/// domain `S = C \ (-inf, 0]*i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavenumberPoint {
    pub lambda: Complex64,
    pub in_s: bool,
    pub in_upper: bool,
}

impl WavenumberPoint {
    pub fn new(lambda: Complex64) -> Result<Self> {
        if lambda.norm() == 0.0 {
            return Err(Error::DomainError("lambda must be nonzero".into()));
        }
        Ok(Self { lambda, in_s: in_branch_domain(lambda), in_upper: lambda.im > 0.0 })
    }
}

/// True when `z` avoids the cut `(-inf, 0]*i` (the non-positive imaginary axis).
pub fn in_branch_domain(z: Complex64) -> bool {
    !(z.re == 0.0 && z.im <= 0.0)
}

/// Piecewise scale `alpha(lambda)`: `|Re lambda|` for `Im lambda <= 0`,
/// `|lambda|` for `Im lambda > 0`.
pub fn alpha(lambda: Complex64) -> f64 {
    if lambda.im > 0.0 {
        lambda.norm()
    } else {
        lambda.re.abs()
    }
}

fn bessel_j0(z: Complex64) -> Complex64 {
    let q = z * z * 0.25;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for m in 1..200 {
        term = -term * q / ((m * m) as f64);
        sum += term;
        if term.norm() < 1e-17 * sum.norm().max(1e-300) {
            break;
        }
    }
    sum
}

/// Ascending series for `H_0^{(1)} = J_0 + i Y_0` with the principal logarithm.
fn hankel_series(z: Complex64) -> Complex64 {
    let q = z * z * 0.25;
    let j0 = bessel_j0(z);
    // Y_0 = (2/pi)[(ln(z/2) + gamma) J_0 + sum_{m>=1} (-1)^{m+1} H_m q^m / (m!)^2]
    let mut term = Complex64::new(1.0, 0.0);
    let mut harmonic = 0.0;
    let mut sum = Complex64::new(0.0, 0.0);
    for m in 1..200 {
        term = -term * q / ((m * m) as f64);
        harmonic += 1.0 / m as f64;
        let contrib = -term * harmonic; // (-1)^{m+1} q^m/(m!)^2 * H_m
        sum += contrib;
        if contrib.norm() < 1e-17 * sum.norm().max(1e-300) {
            break;
        }
    }
    let y0 = ((z / 2.0).ln() + EULER_GAMMA) * j0 * (2.0 / PI) + sum * (2.0 / PI);
    j0 + Complex64::new(0.0, 1.0) * y0
}

/// Large-argument expansion
/// `H_0^{(1)}(z) ~ sqrt(2/(pi z)) e^{i(z - pi/4)} sum_k i^k a_k z^{-k}` with
/// `a_k = prod_{j=1..k} -(2j-1)^2 / (k! 8^k)`, summed to its smallest term.
fn hankel_asymptotic(z: Complex64) -> Complex64 {
    let inv = 1.0 / z;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut last_norm = term.norm();
    for k in 1u32..40 {
        let j = 2.0 * k as f64 - 1.0;
        term = term * Complex64::new(0.0, 1.0) * (-(j * j)) / (8.0 * k as f64) * inv;
        if term.norm() >= last_norm {
            break;
        }
        sum += term;
        last_norm = term.norm();
    }
    let phase = Complex64::new(0.0, 1.0) * z - Complex64::new(0.0, PI / 4.0);
    (2.0 / (PI * z)).sqrt() * phase.exp() * sum
}

fn hankel_principal(z: Complex64) -> Complex64 {
    if z.norm() <= HANKEL_SWITCH {
        hankel_series(z)
    } else {
        hankel_asymptotic(z)
    }
}

/// `H_0^{(1)}(z)` on `S`, continued from the upper half plane.
pub fn hankel_h0(z: Complex64) -> Result<Complex64> {
    if z.norm() == 0.0 {
        return Err(Error::DomainError("Hankel function is singular at z = 0".into()));
    }
    if !in_branch_domain(z) {
        return Err(Error::BranchViolation(z));
    }
    if z.re < 0.0 && z.im < 0.0 {
        // Third quadrant: continue around the origin through the upper half
        // plane; -z sits in the principal domain.
        let w = -z;
        Ok(hankel_principal(w) - 2.0 * bessel_j0(w))
    } else {
        Ok(hankel_principal(z))
    }
}

/// Adaptive Simpson quadrature of a complex integrand.
fn adaptive_simpson(
    f: &impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> Result<Complex64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.norm() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::QuadratureFailure { tol, estimate: delta.norm() / 15.0 });
    }
    let l = adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?;
    let r = adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?;
    Ok(l + r)
}

fn integrate(f: impl Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> Result<Complex64> {
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    adaptive_simpson(&f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Shape integral `e^{iz} int_0^inf e^{-s} s^{-1/2} (s/2 - iz)^{-1/2} ds`,
/// before the overall constant.
fn hankel_integral_shape(z: Complex64) -> Result<Complex64> {
    // Substitute s = t^2: 2 int_0^inf e^{-t^2} (t^2/2 - iz)^{-1/2} dt.
    // The integrand decays like e^{-t^2}; [0, 9] leaves a tail below 1e-35.
    let i = Complex64::new(0.0, 1.0);
    let g = move |t: f64| {
        let w = Complex64::new(0.5 * t * t, 0.0) - i * z;
        (-t * t).exp() / w.sqrt()
    };
    let integral = integrate(g, 0.0, 9.0, 1e-12)?;
    Ok(2.0 * (i * z).exp() * integral)
}

/// Overall constant of the integral representation, calibrated once at z = 1
/// against the series value and then frozen.
fn hankel_integral_constant() -> Complex64 {
    use once_cell::sync::Lazy;
    static CONSTANT: Lazy<Complex64> = Lazy::new(|| {
        let z = Complex64::new(1.0, 0.0);
        hankel_principal(z) / hankel_integral_shape(z).expect("calibration quadrature")
    });
    *CONSTANT
}

/// Independent oracle for `H_0^{(1)}` from its integral representation.
pub fn hankel_h0_integral_oracle(z: Complex64) -> Result<Complex64> {
    if !in_branch_domain(z) {
        return Err(Error::BranchViolation(z));
    }
    Ok(hankel_integral_constant() * hankel_integral_shape(z)?)
}

/// Helmholtz kernel `Phi_lambda` at separation `r`:
/// `(i/4) H_0^{(1)}(lambda r)` for d = 2, `e^{i lambda r}/(4 pi r)` for d = 3.
pub fn helmholtz_kernel(lambda: Complex64, r: f64, dim: usize) -> Result<Complex64> {
    if !(r > 0.0) {
        return Err(Error::DomainError(format!("separation must be positive, got {r}")));
    }
    match dim {
        2 => {
            if !in_branch_domain(lambda) {
                return Err(Error::BranchViolation(lambda));
            }
            Ok(Complex64::new(0.0, 0.25) * hankel_h0(lambda * r)?)
        }
        3 => Ok((Complex64::new(0.0, 1.0) * lambda * r).exp() / (4.0 * PI * r)),
        _ => Err(Error::DimensionError(format!("dim must be 2 or 3, got {dim}"))),
    }
}

/// Biharmonic kernel `G_lambda = (Phi_lambda - Phi_{i lambda}) / (2 lambda^2)`,
/// continuous at `r = 0` with the analytic limits `(1+i)/(8 pi lambda)` (3D)
/// and `i/(8 lambda^2)` (2D).
pub fn biharmonic_kernel(lambda: Complex64, r: f64, dim: usize) -> Result<Complex64> {
    if r < 0.0 {
        return Err(Error::DomainError(format!("separation must be nonnegative, got {r}")));
    }
    if lambda.norm() == 0.0 {
        return Err(Error::KernelDomainError("lambda must be nonzero".into()));
    }
    if r == 0.0 {
        return match dim {
            2 => Ok(Complex64::new(0.0, 0.125) / (lambda * lambda)),
            3 => Ok(Complex64::new(1.0, 1.0) / (8.0 * PI * lambda)),
            _ => Err(Error::DimensionError(format!("dim must be 2 or 3, got {dim}"))),
        };
    }
    let phi = helmholtz_kernel(lambda, r, dim)?;
    let phi_rot = helmholtz_kernel(Complex64::new(0.0, 1.0) * lambda, r, dim)?;
    Ok((phi - phi_rot) / (2.0 * lambda * lambda))
}

/// Smooth cut-off window chi with the declared diameter bound of its support.
#[derive(Debug, Clone)]
pub struct CutoffWindow {
    pub chi: RealField,
    pub diameter: f64,
}

impl CutoffWindow {
    /// Validates 0 <= chi <= 1, vanishing near the box boundary, and that
    /// `diameter` exceeds the support diameter actually observed on the grid.
    pub fn new(chi: RealField, diameter: f64) -> Result<Self> {
        let grid = chi.grid;
        let margin = 2.0 * grid.spacing();
        let mut support_radius = 0.0f64;
        for (idx, &v) in chi.values.iter().enumerate() {
            if !(0.0..=1.0 + 1e-12).contains(&v) {
                return Err(Error::Config(format!("chi out of [0,1] at cell {idx}: {v}")));
            }
            if v != 0.0 {
                let ij = grid.unravel(idx);
                let mut linf = 0.0f64;
                let mut r2 = 0.0;
                for axis in 0..grid.dim {
                    let x = grid.coord(ij[axis]);
                    linf = linf.max(x.abs());
                    r2 += x * x;
                }
                if linf > grid.half_width - margin {
                    return Err(Error::Config(format!(
                        "chi does not vanish near the box boundary (cell {idx})"
                    )));
                }
                support_radius = support_radius.max(r2.sqrt());
            }
        }
        if diameter <= 2.0 * support_radius {
            return Err(Error::Config(format!(
                "declared diameter {diameter} does not exceed support diameter {}",
                2.0 * support_radius
            )));
        }
        Ok(Self { chi, diameter })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_branches() {
        assert_eq!(alpha(Complex64::new(3.0, 0.0)), 3.0);
        assert_eq!(alpha(Complex64::new(3.0, 4.0)), 5.0);
        assert_eq!(alpha(Complex64::new(1.0, -1.0)), 1.0);
    }

    #[test]
    fn hankel_reference_value_at_one() {
        // J_0(1) + i Y_0(1), high-precision reference.
        let v = hankel_h0(Complex64::new(1.0, 0.0)).unwrap();
        assert!((v.re - 0.765_197_686_6).abs() < 1e-9, "re {}", v.re);
        assert!((v.im - 0.088_256_964_2).abs() < 1e-9, "im {}", v.im);
    }

    #[test]
    fn hankel_large_argument_leading_term() {
        let z = Complex64::new(100.0, 0.0);
        let v = hankel_h0(z).unwrap();
        let lead = (2.0 / (PI * z)).sqrt()
            * (Complex64::new(0.0, 1.0) * (z - PI / 4.0)).exp();
        // The neglected first correction is a_1/z = 1/(8 * 100).
        assert!((v - lead).norm() / lead.norm() < 2e-3);
        assert!((v - lead).norm() / lead.norm() > 0.5e-3);
    }

    #[test]
    fn hankel_branch_violation() {
        assert!(matches!(
            hankel_h0(Complex64::new(0.0, -0.5)),
            Err(Error::BranchViolation(_))
        ));
        assert!(matches!(hankel_h0(Complex64::new(0.0, 0.0)), Err(Error::DomainError(_))));
    }

    #[test]
    fn hankel_continuity_at_switch() {
        // Series and asymptotic evaluation must agree at the same points on
        // the crossover circle |z| = 12, on several rays.
        for arg in [0.0f64, 0.4, 1.2, -0.6, 2.8] {
            let z = 12.0 * Complex64::new(arg.cos(), arg.sin());
            let s = hankel_series(z);
            let a = hankel_asymptotic(z);
            assert!(
                (s - a).norm() < 1e-9 * s.norm().max(1.0),
                "discontinuity at arg {arg}: {}",
                (s - a).norm()
            );
        }
    }

    #[test]
    fn integral_oracle_matches_series() {
        for z in [
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 1.0),
            Complex64::new(10.0, 0.0),
            Complex64::new(0.5, -0.3),
            Complex64::new(-3.0, 2.0),
        ] {
            let a = hankel_h0(z).unwrap();
            let b = hankel_h0_integral_oracle(z).unwrap();
            assert!((a - b).norm() < 1e-8, "mismatch at {z}: {} vs {}", a, b);
        }
    }

    #[test]
    fn hankel_third_quadrant_continuity() {
        // The continuation must be continuous across the negative real axis.
        let above = hankel_h0(Complex64::new(-2.0, 1e-9)).unwrap();
        let below = hankel_h0(Complex64::new(-2.0, -1e-9)).unwrap();
        assert!((above - below).norm() < 1e-6, "jump {}", (above - below).norm());
        // And it must agree with the integral representation there.
        let z = Complex64::new(-2.0, -0.5);
        let a = hankel_h0(z).unwrap();
        let b = hankel_h0_integral_oracle(z).unwrap();
        assert!((a - b).norm() < 1e-8, "third quadrant mismatch {}", (a - b).norm());
    }

    #[test]
    fn helmholtz_closed_forms() {
        let v = helmholtz_kernel(Complex64::new(1.0, 0.0), 1.0, 3).unwrap();
        let expect = Complex64::new(0.0, 1.0).exp() / (4.0 * PI);
        assert!((v - expect).norm() < 1e-14);

        let v = helmholtz_kernel(Complex64::new(0.0, 1.0), 2.0, 3).unwrap();
        let expect = Complex64::new((-2.0f64).exp() / (8.0 * PI), 0.0);
        assert!((v - expect).norm() < 1e-14);

        let v = helmholtz_kernel(Complex64::new(1.0, 0.0), 1.0, 2).unwrap();
        let expect = Complex64::new(0.0, 0.25) * hankel_h0(Complex64::new(1.0, 0.0)).unwrap();
        assert!((v - expect).norm() < 1e-12);

        assert!(matches!(
            helmholtz_kernel(Complex64::new(1.0, 0.0), 0.0, 3),
            Err(Error::DomainError(_))
        ));
    }

    #[test]
    fn biharmonic_limits_and_continuity() {
        let k = Complex64::new(2.0, 0.0);
        // 3D closed form at r = 1: (e^{ik} - e^{-k}) / (8 pi k^2).
        let v = biharmonic_kernel(k, 1.0, 3).unwrap();
        let expect = ((Complex64::new(0.0, 2.0)).exp() - Complex64::new((-2.0f64).exp(), 0.0))
            / (8.0 * PI * k * k);
        assert!((v - expect).norm() < 1e-14);

        for dim in [2usize, 3] {
            let limit = biharmonic_kernel(k, 0.0, dim).unwrap();
            let expect = if dim == 3 {
                Complex64::new(1.0, 1.0) / (8.0 * PI * k)
            } else {
                Complex64::new(0.0, 0.125) / (k * k)
            };
            assert!((limit - expect).norm() < 1e-14, "dim {dim}");
            let near3 = biharmonic_kernel(k, 1e-3, dim).unwrap();
            let near4 = biharmonic_kernel(k, 1e-4, dim).unwrap();
            let d3 = (near3 - limit).norm();
            let d4 = (near4 - limit).norm();
            assert!(d3 < 1e-2 * limit.norm(), "dim {dim} d3 {d3}");
            assert!(d4 < d3, "dim {dim}: {d4} !< {d3}");
        }
    }

    #[test]
    fn helmholtz_3d_magnitude_bound() {
        // |Phi_lambda(r)| = e^{-Im(lambda) r} / (4 pi r) exactly in 3D.
        for (lam, r) in [
            (Complex64::new(3.0, 0.5), 0.7),
            (Complex64::new(2.0, -1.0), 1.3),
            (Complex64::new(0.0, 2.0), 0.4),
        ] {
            let v = helmholtz_kernel(lam, r, 3).unwrap();
            let neg_im = (-lam.im).max(0.0);
            let bound = (neg_im * r).exp() / (4.0 * PI * r);
            assert!(v.norm() <= bound * (1.0 + 1e-12), "lam {lam} r {r}");
        }
    }

    #[test]
    fn helmholtz_2d_hankel_bound_shape() {
        // |Phi_lambda(r)| <= C e^{(Im lambda)_- r} / sqrt(alpha(lambda) r)
        // with one fitted constant over the sampled lambda in S.
        let samples = [
            Complex64::new(1.0, 0.0),
            Complex64::new(5.0, 0.0),
            Complex64::new(2.0, 1.0),
            Complex64::new(3.0, -0.5),
            Complex64::new(0.5, 2.0),
            Complex64::new(-2.0, 1.0),
        ];
        let radii = [0.3, 1.0, 2.5, 5.0];
        let mut ratios = Vec::new();
        for &lam in &samples {
            for &r in &radii {
                let v = helmholtz_kernel(lam, r, 2).unwrap();
                let neg_im = (-lam.im).max(0.0);
                let envelope = (neg_im * r).exp() / (alpha(lam) * r).sqrt();
                ratios.push(v.norm() / envelope);
            }
        }
        let fitted_c = ratios.iter().cloned().fold(0.0, f64::max);
        // The fitted constant should be order one, not blowing up.
        assert!(fitted_c < 5.0, "fitted C = {fitted_c}");
        for r in ratios {
            assert!(r <= fitted_c * (1.0 + 1e-12));
        }
    }

    #[test]
    fn cutoff_window_validation() {
        let grid = GridSpec::new(2, 64, 1.0).unwrap();
        let chi = crate::profiles::plateau(grid, 0.3, 0.7);
        let w = CutoffWindow::new(chi.clone(), 2.5).unwrap();
        assert!(w.diameter > 0.0);
        // Declared diameter smaller than support: rejected.
        assert!(CutoffWindow::new(chi, 0.5).is_err());
    }

    use crate::grid::GridSpec;
}
