//! Builtin smooth compactly supported profiles used for strength functions,
//! potentials and cutoff windows.

use crate::grid::{GridSpec, RealField};

/// Isotropic smooth bump `amplitude * exp(1 - 1/(1 - |x - center|^2/r^2))` on
/// `|x - center| < r`, zero outside.
pub fn bump(grid: GridSpec, center: &[f64], radius: f64, amplitude: f64) -> RealField {
    RealField::from_fn(grid, |p| {
        let r2: f64 = p
            .iter()
            .zip(center.iter())
            .map(|(x, c)| (x - c) * (x - c))
            .sum::<f64>()
            / (radius * radius);
        if r2 < 1.0 {
            amplitude * (1.0 - 1.0 / (1.0 - r2)).exp()
        } else {
            0.0
        }
    })
}

/// Centered bump, the default strength/potential shape.
pub fn centered_bump(grid: GridSpec, radius: f64, amplitude: f64) -> RealField {
    bump(grid, &[0.0; 3][..grid.dim], radius, amplitude)
}

/// Sampled Gaussian `amplitude * exp(-|x|^2 / (2 sigma^2))`. Not compactly
/// supported; pick `sigma` small enough relative to the box for the tails to
/// be negligible.
pub fn gaussian(grid: GridSpec, sigma: f64, amplitude: f64) -> RealField {
    RealField::from_fn(grid, |p| {
        let r2: f64 = p.iter().map(|x| x * x).sum();
        amplitude * (-r2 / (2.0 * sigma * sigma)).exp()
    })
}

/// Smooth plateau window: 1 on `|x|_inf <= inner`, 0 on `|x|_inf >= outer`,
/// glued by a smoothstep of the bump primitive in between. Used as the
/// cut-off chi of the resolvent probes.
pub fn plateau(grid: GridSpec, inner: f64, outer: f64) -> RealField {
    assert!(0.0 < inner && inner < outer);
    RealField::from_fn(grid, |p| {
        let mut w = 1.0;
        for &x in p {
            w *= axis_taper(x.abs(), inner, outer);
        }
        w
    })
}

fn axis_taper(r: f64, inner: f64, outer: f64) -> f64 {
    if r <= inner {
        1.0
    } else if r >= outer {
        0.0
    } else {
        // C^infinity transition exp(1 - 1/(1 - t^2)) reparametrized to hit 0/1
        // exactly at the ends.
        let t = (r - inner) / (outer - inner);
        let a = smooth_edge(1.0 - t);
        let b = smooth_edge(t);
        a / (a + b)
    }
}

fn smooth_edge(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}
