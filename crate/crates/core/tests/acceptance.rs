//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line with the measured quantities.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rayon::prelude::*;

use biharmonic_lab::experiment::{assemble_polar_samples, correlation_sweep};
use biharmonic_lab::gmig::{
    derive_seed, sample_gmig, symbol_validation, FieldEnsemble, GmigSpec, StrengthProfile,
};
use biharmonic_lab::grid::{GridSpec, RealField};
use biharmonic_lab::inverse::{
    band_averaged_statistic, band_calibration_factor, correlation_estimate, data_discrepancy,
    invert_polar_fourier, recover_h_hat, reconstruction_error, unit_circle, CorrelationDataset,
    CorrelationMode, CorrelationPair, DiscrepancyMode,
};
use biharmonic_lab::kernels::{
    biharmonic_kernel, hankel_h0, hankel_h0_integral_oracle, CutoffWindow,
};
use biharmonic_lab::profiles;
use biharmonic_lab::solver::{
    born_solve, born_solve_with, far_field, far_field_term, free_far_field, log_log_slope,
    pde_residual, resolvent_norm_probe, v_far_field, FarFieldSample, Potential, R0Operator,
    ResolventVariant, ScatteringProblem,
};
use biharmonic_lab::stability::{
    continuation_bound_check, mu_formula, mu_lower_bound, stability_rhs, SlabSpec,
    StabilityParams,
};

fn verdict(id: &str, pass: bool, detail: &str) {
    println!("acceptance {id}: {} - {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{id}: {detail}");
}

/// Gaussian bump truncated to exact zero outside `r_cut` (the micro-correlation
/// strength used by the sampler and reconstruction criteria: its square root
/// has a rapidly decaying spectrum, so power-law symbol estimates are not
/// polluted by spectral tails folded in from far frequencies).
fn gaussian_bump(grid: GridSpec, sigma: f64, r_cut: f64) -> RealField {
    RealField::from_fn(grid, |p| {
        let r2: f64 = p.iter().map(|x| x * x).sum();
        if r2 <= r_cut * r_cut {
            (-r2 / (2.0 * sigma * sigma)).exp()
        } else {
            0.0
        }
    })
}

// ---------------------------------------------------------------------------
// criterion 01: Hankel function vs its integral-representation oracle
// ---------------------------------------------------------------------------

#[test]
fn c01_hankel_vs_integral_oracle() {
    let t0 = Instant::now();
    let radii = [0.6, 2.0, 5.0, 9.0, 16.0];
    let args = [-1.2, 0.4, 1.9, 3.6];
    let mut worst = 0.0f64;
    let mut count = 0;
    for &r in &radii {
        for &a in &args {
            let z = Complex64::from_polar(r, a);
            let lhs = hankel_h0(z).unwrap();
            let rhs = hankel_h0_integral_oracle(z).unwrap();
            worst = worst.max((lhs - rhs).norm() / rhs.norm());
            count += 1;
        }
    }
    let pass = count == 20 && worst < 1e-8;
    verdict(
        "01 hankel-oracle",
        pass,
        &format!("max rel err {worst:.2e} over {count} points ({:.2?})", t0.elapsed()),
    );
}

// ---------------------------------------------------------------------------
// criterion 02: biharmonic kernel small-r limits and refinement continuity
// ---------------------------------------------------------------------------

#[test]
fn c02_kernel_limits() {
    let t0 = Instant::now();
    let cases = [
        (Complex64::new(2.0, 0.5), 2usize),
        (Complex64::new(3.0, 0.0), 3usize),
    ];
    let mut detail = String::new();
    let mut pass = true;
    for (lambda, dim) in cases {
        let g0 = biharmonic_kernel(lambda, 0.0, dim).unwrap();
        let mut prev = f64::INFINITY;
        let mut r = 1e-2;
        let mut last = 0.0;
        while r > 5e-4 {
            let diff = (biharmonic_kernel(lambda, r, dim).unwrap() - g0).norm();
            // halving r must shrink the gap to the limit by ~r (3D) / ~r^2 (2D)
            pass &= diff < prev / 1.8;
            prev = diff;
            last = diff;
            r /= 2.0;
        }
        let rel = last / g0.norm();
        pass &= rel < 5e-3;
        detail.push_str(&format!("d={dim}: rel gap at r=6.3e-4 is {rel:.2e}; "));
    }
    verdict("02 kernel-limits", pass, &format!("{detail}({:.2?})", t0.elapsed()));
}

// ---------------------------------------------------------------------------
// criterion 03: forward solver residual and its drop under grid doubling
// ---------------------------------------------------------------------------

fn residual_at(n: usize) -> f64 {
    let grid = GridSpec::new(2, n, 4.0).unwrap();
    let source = profiles::gaussian(grid, 0.25, 1.0);
    let problem = ScatteringProblem::new(5.0, Potential::zero(grid), source).unwrap();
    let solution = born_solve(&problem, 1e-10, 20).unwrap();
    pde_residual(&solution, &problem)
}

#[test]
fn c03_forward_residual() {
    let t0 = Instant::now();
    let coarse = residual_at(128);
    let fine = residual_at(256);
    let pass = coarse < 1e-2 && coarse / fine >= 8.0;
    verdict(
        "03 forward-residual",
        pass,
        &format!(
            "residual {coarse:.3e} at n=128, {fine:.3e} at n=256 (ratio {:.1}) ({:.2?})",
            coarse / fine,
            t0.elapsed()
        ),
    );
}

// ---------------------------------------------------------------------------
// criterion 04: Born contraction rate in k and the conjugation identity
// ---------------------------------------------------------------------------

#[test]
fn c04_born_contraction() {
    let t0 = Instant::now();
    let grid = GridSpec::new(2, 256, 1.0).unwrap();
    let source = profiles::centered_bump(grid, 0.3, 1.0);
    let potential = Potential::new(profiles::bump(grid, &[0.1, 0.0], 0.25, 1.0)).unwrap();
    let mut points = Vec::new();
    for k in [4.0, 8.0, 16.0, 40.0] {
        let problem =
            ScatteringProblem::new(k, potential.clone(), source.clone()).unwrap();
        let sol = born_solve(&problem, 1e-12, 12).unwrap();
        points.push((k, sol.term_norms[1] / sol.term_norms[0]));
    }
    let slope = log_log_slope(&points);
    // One-sided like criterion 05: -2.5 is the guaranteed contraction rate
    // (an upper bound on the ratio); the measured 2D decay is ~k^-3.
    let slope_ok = slope <= -2.0 && slope >= -4.5;

    let dirs = unit_circle(8);
    let problem = ScatteringProblem::new(6.0, potential, source).unwrap();
    let sol = born_solve(&problem, 1e-12, 30).unwrap();
    let u_inf = far_field(&problem, &sol, &dirs).unwrap();
    let v_inf = v_far_field(&problem, &dirs, 1e-12, 30).unwrap();
    let gap = u_inf
        .values
        .iter()
        .zip(v_inf.values.iter())
        .map(|(u, v)| (v - u.conj()).norm())
        .fold(0.0f64, f64::max);
    let pass = slope_ok && gap < 1e-8;
    verdict(
        "04 born-contraction",
        pass,
        &format!(
            "contraction slope {slope:.3} (bound -2.5), conjugation gap {gap:.2e} ({:.2?})",
            t0.elapsed()
        ),
    );
}

// ---------------------------------------------------------------------------
// criterion 05: resolvent operator-norm decay rates in 2D and 3D
// ---------------------------------------------------------------------------

#[test]
fn c05_resolvent_decay() {
    let t0 = Instant::now();

    let g2 = GridSpec::new(2, 256, 1.0).unwrap();
    let w2 = CutoffWindow::new(profiles::plateau(g2, 0.28, 0.4), 1.2).unwrap();
    let rep2 =
        resolvent_norm_probe(&[10.0, 20.0, 40.0, 80.0], &w2, ResolventVariant::Free, 20).unwrap();

    let g3 = GridSpec::new(3, 128, 1.0).unwrap();
    let w3 = CutoffWindow::new(profiles::plateau(g3, 0.3, 0.45), 1.6).unwrap();
    let rep3 =
        resolvent_norm_probe(&[12.0, 18.0, 25.0, 30.0], &w3, ResolventVariant::Free, 8).unwrap();

    // The predicted exponents are upper bounds on the norm decay, so the check
    // is one-sided: the fitted slope must be at least as steep, within a 0.3
    // fit tolerance. (The measured 2D decay is ~k^-3, faster than the k^-5/2
    // bound; in 3D the fitted and predicted rates agree.) A sanity floor
    // rejects degenerate fits.
    let one_sided = |rep: &biharmonic_lab::solver::NormProbeReport| {
        rep.fitted_slope <= rep.predicted_slope + 0.3 && rep.fitted_slope >= rep.predicted_slope - 2.0
    };
    let pass = one_sided(&rep2) && one_sided(&rep3);
    verdict(
        "05 resolvent-decay",
        pass,
        &format!(
            "2D slope {:.3} (bound {:.1}), 3D slope {:.3} (bound {:.1}) ({:.2?})",
            rep2.fitted_slope,
            rep2.predicted_slope,
            rep3.fitted_slope,
            rep3.predicted_slope,
            t0.elapsed()
        ),
    );
}

// ---------------------------------------------------------------------------
// criterion 06: sampler symbol calibration over a frequency band
// ---------------------------------------------------------------------------

#[test]
fn c06_sampler_symbol() {
    let t0 = Instant::now();
    let grid = GridSpec::new(2, 256, 2.0).unwrap();
    let h = gaussian_bump(grid, 0.3, 1.5);
    let spec = GmigSpec::new(3.0, StrengthProfile::new(h).unwrap()).unwrap();
    let ens = FieldEnsemble::generate(spec, 0x5f_0601, 512).unwrap();
    let report = symbol_validation(
        &ens,
        &[10.0, 12.5, 15.0, 17.5, 20.0],
        &unit_circle(4),
        (0.8, 1.2),
    )
    .unwrap();
    let pass = report.pass && report.median >= 0.8 && report.median <= 1.2;
    verdict(
        "06 sampler-symbol",
        pass,
        &format!(
            "median ratio {:.4}, spread {:.4}, N=512, k in [10,20] ({:.2?})",
            report.median,
            report.spread,
            t0.elapsed()
        ),
    );
}

// ---------------------------------------------------------------------------
// criterion 07: far-field contamination term decays faster than the signal
// ---------------------------------------------------------------------------

#[test]
fn c07_contamination_decay() {
    let t0 = Instant::now();
    let grid = GridSpec::new(2, 256, 1.0).unwrap();
    let h = profiles::centered_bump(grid, 0.3, 1.0);
    let spec = GmigSpec::new(3.0, StrengthProfile::new(h).unwrap()).unwrap();
    let ens = FieldEnsemble::generate(spec, 0x5f_0701, 128).unwrap();
    let potential = Potential::new(profiles::bump(grid, &[0.1, 0.0], 0.25, 1.0)).unwrap();
    let dirs = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let mut points = Vec::new();
    for k in [10.0, 20.0, 40.0, 80.0] {
        let r0 = R0Operator::new(grid, Complex64::new(k, 0.0)).unwrap();
        let mean: f64 = ens
            .realizations
            .par_iter()
            .map(|f| {
                let problem =
                    ScatteringProblem::new(k, potential.clone(), f.clone()).unwrap();
                let sol = born_solve_with(&problem, &r0, 1e-10, 30).unwrap();
                let term = far_field_term(1, &problem, &sol, &dirs).unwrap();
                term.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / dirs.len() as f64
            })
            .sum::<f64>()
            / ens.len() as f64;
        points.push((k, mean));
    }
    let slope = log_log_slope(&points);
    let pass = slope <= -9.0;
    verdict(
        "07 contamination-decay",
        pass,
        &format!(
            "E|u1_inf|^2 log-log slope {slope:.2} over k in [10,80] (must be <= -9) ({:.2?})",
            t0.elapsed()
        ),
    );
}

// ---------------------------------------------------------------------------
// shared multi-frequency study for criteria 08 and 09 (2D, V = 0, N = 512)
// ---------------------------------------------------------------------------

const STUDY_SEED: u64 = 0x5f_0801;
const STUDY_M: f64 = 3.0;
// Band: offsets tau = eta k stay well inside (0, k), and the smallest eta puts
// high-frequency pairs on the innermost rings where |h_hat| is largest.
const STUDY_K: [f64; 9] = [10.0, 12.0, 14.0, 17.0, 20.0, 24.0, 28.0, 34.0, 40.0];
const STUDY_ETA: [f64; 7] = [0.05, 0.12, 0.22, 0.35, 0.5, 0.65, 0.8];

struct Study {
    target: GridSpec,
    h_true: RealField,
    dirs: Vec<Vec<f64>>,
    pairs: Vec<CorrelationPair>,
    n_real: usize,
    build_time: f64,
}

static STUDY: Lazy<Study> = Lazy::new(|| {
    let t0 = Instant::now();
    let grid = GridSpec::new(2, 256, 2.0).unwrap();
    // Error metric domain: a box containing the full support of h.
    let target = GridSpec::new(2, 128, 1.5).unwrap();
    let h = gaussian_bump(grid, 0.3, 1.5);
    let h_true = gaussian_bump(target, 0.3, 1.5);
    let spec = GmigSpec::new(STUDY_M, StrengthProfile::new(h).unwrap()).unwrap();
    let ens = FieldEnsemble::generate(spec, STUDY_SEED, 512).unwrap();
    let dirs = unit_circle(24);
    let pairs = correlation_sweep(
        &ens,
        &Potential::zero(grid),
        &STUDY_K,
        &STUDY_ETA,
        &dirs,
        1e-8,
    )
    .unwrap();
    Study {
        target,
        h_true,
        dirs,
        pairs,
        n_real: ens.len(),
        build_time: t0.elapsed().as_secs_f64(),
    }
});

/// Reconstruction error from a pair subset with `k <= k_cap`.
fn study_recon_error(pairs: &[CorrelationPair], k_cap: f64, cutoff: f64) -> f64 {
    let study = &*STUDY;
    let sub: Vec<CorrelationPair> =
        pairs.iter().filter(|p| p.k <= k_cap + 1e-9).cloned().collect();
    let mut polar = assemble_polar_samples(&sub, &study.dirs, STUDY_M, 2).unwrap();
    polar.hermitian_complete();
    let (h_rec, _residue) = invert_polar_fourier(&polar, cutoff, study.target).unwrap();
    reconstruction_error(&h_rec, &study.h_true).unwrap()
}

// ---------------------------------------------------------------------------
// criterion 08: end-to-end reconstruction, free and with a bump potential
// ---------------------------------------------------------------------------

#[test]
fn c08_reconstruction() {
    let t0 = Instant::now();
    let study = &*STUDY;
    let err_free = study_recon_error(&study.pairs, 40.0, 10.0);

    // Potential comparison at matched (reduced) budget: same seeds and the
    // same frequency subset for V = 0 and for the bump potential, so the
    // difference isolates the potential-induced contamination. The source
    // must stay inside the inner half-box for the scattering solver, so the
    // strength is a Gaussian rolled off smoothly to zero at radius 0.9 (a
    // hard truncation there would leave a jump whose spectral tail corrupts
    // the k^m-amplified estimates at the top of the band).
    let grid_p = GridSpec::new(2, 512, 2.0).unwrap();
    let target_p = GridSpec::new(2, 64, 1.0).unwrap();
    let roll = |grid: GridSpec| {
        let plat = profiles::plateau(grid, 0.5, 0.9);
        let gauss = gaussian_bump(grid, 0.2475, 0.9);
        RealField {
            grid,
            values: gauss
                .values
                .iter()
                .zip(plat.values.iter())
                .map(|(g, w)| g * w * w)
                .collect(),
        }
    };
    let h_p = roll(grid_p);
    let h_p_true = roll(target_p);
    let spec = GmigSpec::new(STUDY_M, StrengthProfile::new(h_p).unwrap()).unwrap();
    let ens = FieldEnsemble::generate(spec, STUDY_SEED, 128).unwrap();
    let potential =
        Potential::new(profiles::bump(grid_p, &[0.2, 0.0], 0.4, 1.0)).unwrap();
    let k_sub = [12.0, 24.0, 40.0];
    let etas = [0.15, 0.3, 0.45, 0.6, 0.75];
    let pairs_v =
        correlation_sweep(&ens, &potential, &k_sub, &etas, &study.dirs, 1e-8).unwrap();
    let pairs_0 = correlation_sweep(
        &ens,
        &Potential::zero(grid_p),
        &k_sub,
        &etas,
        &study.dirs,
        1e-8,
    )
    .unwrap();
    let recon = |pairs: &[CorrelationPair]| {
        let mut polar = assemble_polar_samples(pairs, &study.dirs, STUDY_M, 2).unwrap();
        polar.hermitian_complete();
        let (h_rec, _residue) = invert_polar_fourier(&polar, 12.0, target_p).unwrap();
        reconstruction_error(&h_rec, &h_p_true).unwrap()
    };
    let err_v = recon(&pairs_v);
    let err_0 = recon(&pairs_0);

    let pass = err_free < 0.15 && err_v <= 1.5 * err_0;
    verdict(
        "08 reconstruction",
        pass,
        &format!(
            "free rel L2 {err_free:.4} (N=512, K=40); |V|=1 bump {err_v:.4} vs matched free \
             {err_0:.4} (x{:.2}) (study {:.1}s + {:.2?})",
            err_v / err_0,
            study.build_time,
            t0.elapsed()
        ),
    );
}

// ---------------------------------------------------------------------------
// criterion 09: increasing stability in the band width K
// ---------------------------------------------------------------------------

#[test]
fn c09_increasing_stability() {
    let t0 = Instant::now();
    let study = &*STUDY;
    let cases = [(10.0, 8.0), (20.0, 8.0), (40.0, 10.0)];
    let params = StabilityParams::new(STUDY_M, 2, 1.0, 0.2, 0.9).unwrap();
    let mut errors = Vec::new();
    let mut rhs = Vec::new();
    for (k_cap, cutoff) in cases {
        errors.push(study_recon_error(&study.pairs, k_cap, cutoff));
        let sub: Vec<CorrelationPair> =
            study.pairs.iter().filter(|p| p.k <= k_cap + 1e-9).cloned().collect();
        let dataset = CorrelationDataset::new(
            sub,
            study.n_real,
            CorrelationMode::Point,
            9.9,
            k_cap,
        )
        .unwrap();
        let eps_sq = data_discrepancy(&dataset, DiscrepancyMode::Eps1, STUDY_M, 2).unwrap();
        rhs.push(stability_rhs(k_cap, eps_sq.sqrt(), params.beta0, params.beta).unwrap());
    }
    // Monotone decrease with 5% Monte Carlo slack, and below C * rhs for the
    // constant fitted at the smallest K.
    let slack_ok = errors[1] <= 1.05 * errors[0] && errors[2] <= 1.05 * errors[1];
    let c_fit = errors[0] / rhs[0];
    let bound_ok =
        errors[1] <= c_fit * rhs[1] * (1.0 + 1e-9) && errors[2] <= c_fit * rhs[2] * (1.0 + 1e-9);
    let pass = slack_ok && bound_ok;
    verdict(
        "09 increasing-stability",
        pass,
        &format!(
            "errors at K=10/20/40: {:.4}/{:.4}/{:.4}; C*rhs: {:.3e}/{:.3e}/{:.3e} ({:.2?})",
            errors[0],
            errors[1],
            errors[2],
            c_fit * rhs[0],
            c_fit * rhs[1],
            c_fit * rhs[2],
            t0.elapsed()
        ),
    );
}

// ---------------------------------------------------------------------------
// criterion 10: band-averaged statistic vs the point-frequency recovery (3D)
// ---------------------------------------------------------------------------

#[test]
fn c10_band_consistency() {
    let t0 = Instant::now();
    let grid = GridSpec::new(3, 128, 1.0).unwrap();
    let h = gaussian_bump(grid, 0.2, 0.95);
    let m = 4.0;
    let spec = GmigSpec::new(m, StrengthProfile::new(h).unwrap()).unwrap();
    spec.validate_band_mode().unwrap();
    // Small offsets tau = eta k: both the band statistic and the point-mode
    // recovery carry a finite-frequency systematic that grows with eta, so
    // the consistency comparison is made in the regime where both are sharp.
    let k = 15.0;
    let t_grid: Vec<f64> = (0..10).map(|i| k + k * i as f64 / 9.0).collect();
    let etas = [0.1, 0.2];
    let dirs = vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]];
    let n_real = 192u64;

    // All frequencies needed: the t-grid and its eta-shifted copies.
    let mut freqs: Vec<f64> = t_grid.clone();
    for &eta in &etas {
        freqs.extend(t_grid.iter().map(|&t| t + eta * k));
    }
    freqs.sort_by(f64::total_cmp);
    freqs.dedup();

    // Streamed far fields: realizations are sampled, observed, and dropped.
    let rows: Vec<Vec<FarFieldSample>> = (0..n_real)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(0x5f_1001, i);
            let f = sample_gmig(&spec, seed).unwrap();
            freqs
                .iter()
                .map(|&t| free_far_field(&f, t, &dirs, Some(seed)).unwrap())
                .collect()
        })
        .collect();
    let mut table: BTreeMap<u64, Vec<FarFieldSample>> = BTreeMap::new();
    for row in rows {
        for s in row {
            table.entry(s.k.re.to_bits()).or_default().push(s);
        }
    }

    let mut worst_z = 0.0f64;
    let mut pass = true;
    for &eta in &etas {
        let tau = eta * k;
        // corr curve over the t-grid, per direction
        let mut curves: Vec<Vec<(Complex64, f64)>> = vec![Vec::new(); dirs.len()];
        for &t in &t_grid {
            let lo = &table[&t.to_bits()];
            let hi = &table[&(t + tau).to_bits()];
            for (d, est) in correlation_estimate(lo, hi).unwrap().into_iter().enumerate() {
                curves[d].push(est);
            }
        }
        let calib = band_calibration_factor(&t_grid, k, eta);
        for (d, curve) in curves.iter().enumerate() {
            let (band, band_se) = band_averaged_statistic(&t_grid, curve, k, m, 3).unwrap();
            // Point-mode recovery from the first node t = k.
            let (c0, se0) = curve[0];
            let factor = recover_h_hat(Complex64::new(1.0, 0.0), k, tau, m, 3).unwrap().re;
            let h_pt = factor * c0.norm();
            let predicted = calib * h_pt * h_pt;
            let pred_se = calib * 2.0 * factor * factor * c0.norm() * se0;
            let combined = (band_se.powi(2) + pred_se.powi(2)).sqrt();
            let z = (band - predicted).abs() / combined;
            worst_z = worst_z.max(z);
            pass &= z <= 3.0;
            let _ = d;
        }
    }
    verdict(
        "10 band-consistency",
        pass,
        &format!(
            "worst |band - calib*|h_hat|^2| = {worst_z:.2} combined std errors \
             (4 eta x direction combos, N=192) ({:.2?})",
            t0.elapsed()
        ),
    );
}

// ---------------------------------------------------------------------------
// criterion 11: slab bound formula, monotonicity, continuation checks
// ---------------------------------------------------------------------------

#[test]
fn c11_continuation_bound() {
    let t0 = Instant::now();
    // Closed-form reference value: a = 1, h0 = 1/2 at z = a/2.
    let formula_ok = (mu_formula(1.0, 0.5, 0.5) - 16.0 / (3.0 * std::f64::consts::PI.powi(2)))
        .abs()
        < 1e-14;

    // 100-point monotonicity scan in z.
    let slab = SlabSpec::new(2.0, 3.0, 0.5).unwrap();
    let mut monotone = true;
    let mut prev = f64::INFINITY;
    for i in 1..=100 {
        let z = 3.0 + 0.05 * i as f64;
        let v = mu_lower_bound(z, &slab).unwrap();
        monotone &= v > 0.0 && v < prev;
        prev = v;
    }

    // Continuation checks on constructed functions: |p| = eps on the data
    // interval. A constant and a decaying extension satisfy the bound with
    // M = 1; a large constant extension must be flagged.
    let eps = 0.05;
    let interval = vec![eps; 16];
    let queries_const: Vec<(f64, f64)> = (1..=10).map(|i| (3.0 + 0.3 * i as f64, eps)).collect();
    let ok_const = continuation_bound_check(&interval, 1.0, &queries_const, &slab).unwrap();
    let queries_decay: Vec<(f64, f64)> = (1..=10)
        .map(|i| {
            let z = 3.0 + 0.3 * i as f64;
            (z, eps * (-(z - 3.0)).exp())
        })
        .collect();
    let ok_decay = continuation_bound_check(&interval, 1.0, &queries_decay, &slab).unwrap();
    let queries_bad: Vec<(f64, f64)> = (1..=10).map(|i| (3.0 + 0.3 * i as f64, 2.0)).collect();
    let flagged = continuation_bound_check(&interval, 1.0, &queries_bad, &slab).unwrap();

    let pass = formula_ok && monotone && ok_const.all_hold && ok_decay.all_hold
        && !flagged.all_hold;
    verdict(
        "11 continuation-bound",
        pass,
        &format!(
            "formula {}, monotone {}, bound holds for admissible extensions {}, violation \
             flagged {} ({:.2?})",
            formula_ok,
            monotone,
            ok_const.all_hold && ok_decay.all_hold,
            !flagged.all_hold,
            t0.elapsed()
        ),
    );
}
