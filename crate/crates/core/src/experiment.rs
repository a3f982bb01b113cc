//! Configuration-driven orchestration: generate an ensemble, run forward
//! solves across the frequency band, estimate correlations, reconstruct the
//! strength, compute discrepancies and stability quantities, and persist
//! everything reproducibly.

use crate::error::{Error, Result};
use crate::gmig::{FieldEnsemble, GmigSpec, StrengthProfile};
use crate::grid::{GridSpec, RealField};
use crate::inverse::{
    band_averaged_statistic, correlation_estimate, data_discrepancy, invert_polar_fourier,
    recover_h_hat, reconstruction_error, unit_circle, CorrelationDataset, CorrelationMode,
    CorrelationPair, DiscrepancyMode, PolarSamples,
};
use crate::io::{read_real_field, write_real_field};
use crate::profiles;
use crate::solver::{
    born_solve_with, far_field, free_far_field, FarFieldSample, Potential, R0Operator,
    ScatteringProblem,
};
use crate::stability::{delta1_default, delta2_tilde, stability_rhs, StabilityParams};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridConfig {
    pub n: usize,
    pub half_width: f64,
}

/// Builtin profile shapes or a field file on disk (sidecar base path).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileConfig {
    Bump { center: Vec<f64>, radius: f64, amplitude: f64 },
    Gaussian { sigma: f64, amplitude: f64 },
    File { path: PathBuf },
}

impl ProfileConfig {
    pub fn build(&self, grid: GridSpec) -> Result<RealField> {
        match self {
            ProfileConfig::Bump { center, radius, amplitude } => {
                if center.len() != grid.dim {
                    return Err(Error::Config(format!(
                        "bump center has {} components, dim is {}",
                        center.len(),
                        grid.dim
                    )));
                }
                Ok(profiles::bump(grid, center, *radius, *amplitude))
            }
            ProfileConfig::Gaussian { sigma, amplitude } => {
                Ok(profiles::gaussian(grid, *sigma, *amplitude))
            }
            ProfileConfig::File { path } => {
                let field = read_real_field(path)?;
                if field.grid != grid {
                    return Err(Error::GridMismatch(format!(
                        "field file {} does not match the configured grid",
                        path.display()
                    )));
                }
                Ok(field)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SourceConfig {
    pub m: f64,
    pub strength: ProfileConfig,
    pub master_seed: u64,
    pub n_realizations: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PotentialConfig {
    pub profile: Option<ProfileConfig>,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandConfig {
    pub k0: f64,
    pub k_max: f64,
    pub num_k: usize,
    pub eta_grid: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InversionConfig {
    pub cutoff_radius: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityConfig {
    pub s: f64,
    pub delta_override: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub grid: GridConfig,
    pub source: SourceConfig,
    pub potential: PotentialConfig,
    pub band: BandConfig,
    pub directions: usize,
    pub mode: CorrelationMode,
    pub inversion: InversionConfig,
    pub stability: StabilityConfig,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let cfg: Self = serde_json::from_slice(&std::fs::read(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.dim, self.grid.n, self.grid.half_width)
    }

    /// Uniform frequency grid on `(k0, k_max]`.
    pub fn k_grid(&self) -> Vec<f64> {
        let b = &self.band;
        (1..=b.num_k)
            .map(|i| b.k0 + (b.k_max - b.k0) * i as f64 / b.num_k as f64)
            .collect()
    }

    /// Module-level invariants, checked at load time.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid_spec()?;
        if self.source.n_realizations < 2 {
            return Err(Error::Config("need at least 2 realizations".into()));
        }
        if self.directions == 0 {
            return Err(Error::Config("need at least one observation direction".into()));
        }
        let b = &self.band;
        if !(0.0 < b.k0 && b.k0 < b.k_max) || b.num_k == 0 {
            return Err(Error::Config(format!(
                "band must satisfy 0 < k0 < k_max with num_k >= 1, got ({}, {}] x {}",
                b.k0, b.k_max, b.num_k
            )));
        }
        if b.eta_grid.is_empty() || b.eta_grid.iter().any(|&e| !(0.0 < e && e < 1.0)) {
            return Err(Error::Config("eta grid must be nonempty inside (0, 1)".into()));
        }
        // The highest observed frequency must stay under the sampling guard.
        let eta_max = b.eta_grid.iter().cloned().fold(0.0, f64::max);
        let k_top = b.k_max * (1.0 + eta_max);
        if k_top * grid.spacing() >= std::f64::consts::PI / 4.0 {
            return Err(Error::NyquistViolation(k_top * grid.spacing()));
        }
        if !(self.inversion.cutoff_radius > 0.0)
            || self.inversion.cutoff_radius > eta_max * b.k_max * (1.0 + 1e-12)
        {
            return Err(Error::Config(format!(
                "cutoff radius must lie in (0, eta_max * k_max] = (0, {}]",
                eta_max * b.k_max
            )));
        }
        // Mode gates mirror the sampler's validity ranges.
        let strength = StrengthProfile::new(self.source.strength.build(grid)?)?;
        let spec = GmigSpec::new(self.source.m, strength)?;
        match self.mode {
            CorrelationMode::Point => spec.validate_point_mode()?,
            CorrelationMode::BandAveraged => spec.validate_band_mode()?,
        }
        // Stability invariant 0 < t < delta/d.
        let delta = self.delta()?;
        StabilityParams::new(self.source.m, self.dim, self.stability.s, self.inversion.t, delta)?;
        if let Some(p) = &self.potential.profile {
            Potential::new(scale(p.build(grid)?, self.potential.amplitude))?;
        }
        Ok(())
    }

    /// Effective delta: override, else the mode default.
    pub fn delta(&self) -> Result<f64> {
        if let Some(d) = self.stability.delta_override {
            return Ok(d);
        }
        match self.mode {
            CorrelationMode::Point => delta1_default(self.source.m, self.dim),
            CorrelationMode::BandAveraged => delta2_tilde(self.source.m),
        }
    }

    /// Hash of the canonical JSON encoding; recorded in every output. The
    /// output directory is excluded so reruns elsewhere compare equal.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        hex(&Sha256::digest(&bytes))
    }
}

fn scale(mut field: RealField, amplitude: f64) -> RealField {
    for v in field.values.iter_mut() {
        *v *= amplitude;
    }
    field
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub code_version: String,
    pub master_seed: u64,
    pub n_realizations: usize,
    pub timings: Vec<(String, f64)>,
    pub files: Vec<FileEntry>,
    pub complete: bool,
    pub failed_stage: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilitySummary {
    pub s: f64,
    pub t: f64,
    pub delta: f64,
    pub beta0: f64,
    pub beta: f64,
    /// `stability_rhs(K, eps)`; absent when `eps` is outside `(0, 1/e)`.
    pub rhs: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub config_hash: String,
    pub dim: usize,
    pub m: f64,
    pub mode: CorrelationMode,
    pub k_max: f64,
    pub ensemble_size: usize,
    pub cutoff_radius: f64,
    pub rel_l2_error: f64,
    /// Squared data discrepancy (eps1^2 or eps2^2).
    pub eps_sq: f64,
    pub imaginary_residue: f64,
    pub stability: StabilitySummary,
}

struct RunState {
    dir: PathBuf,
    files: Vec<FileEntry>,
    timings: Vec<(String, f64)>,
}

impl RunState {
    fn record(&mut self, relative: &str) -> Result<()> {
        let path = self.dir.join(relative);
        let bytes = std::fs::read(&path)?;
        self.files.push(FileEntry { path: relative.into(), sha256: hex(&Sha256::digest(&bytes)) });
        Ok(())
    }
}

/// Far fields of every realization at one frequency. Realization `i` carries
/// its sampling seed so correlation estimation can verify the matching.
pub fn ensemble_far_fields(
    ensemble: &FieldEnsemble,
    potential: &Potential,
    k: f64,
    directions: &[Vec<f64>],
    tol: f64,
) -> Result<Vec<FarFieldSample>> {
    if potential.is_zero() {
        return ensemble
            .realizations
            .iter()
            .zip(ensemble.seeds.iter())
            .map(|(f, &seed)| free_far_field(f, k, directions, Some(seed)))
            .collect();
    }
    // One kernel build per frequency, shared across realizations.
    let grid = ensemble.spec.grid();
    let r0 = R0Operator::new(grid, Complex64::new(k, 0.0))?;
    ensemble
        .realizations
        .iter()
        .zip(ensemble.seeds.iter())
        .map(|(f, &seed)| {
            let problem = ScatteringProblem::new(k, potential.clone(), f.clone())?;
            let solution = born_solve_with(&problem, &r0, tol, 50)?;
            if !solution.converged {
                return Err(Error::Diverged(format!("Born series diverged at k = {k}")));
            }
            let mut sample = far_field(&problem, &solution, directions)?;
            sample.seed = Some(seed);
            Ok(sample)
        })
        .collect()
}

/// Point-mode correlation sweep over `(k, eta, direction)`.
pub fn correlation_sweep(
    ensemble: &FieldEnsemble,
    potential: &Potential,
    k_grid: &[f64],
    eta_grid: &[f64],
    directions: &[Vec<f64>],
    tol: f64,
) -> Result<Vec<CorrelationPair>> {
    // Collect the distinct frequencies once; shifted frequencies coincide
    // between (k, eta) cells only by accident, so key by bits.
    let mut cache: BTreeMap<u64, Vec<FarFieldSample>> = BTreeMap::new();
    let fetch = |k: f64,
                     cache: &mut BTreeMap<u64, Vec<FarFieldSample>>|
     -> Result<()> {
        if !cache.contains_key(&k.to_bits()) {
            let ff = ensemble_far_fields(ensemble, potential, k, directions, tol)?;
            cache.insert(k.to_bits(), ff);
        }
        Ok(())
    };
    let mut pairs = Vec::new();
    for &k in k_grid {
        fetch(k, &mut cache)?;
        for &eta in eta_grid {
            let k_hi = k * (1.0 + eta);
            fetch(k_hi, &mut cache)?;
            let lo = &cache[&k.to_bits()];
            let hi = &cache[&k_hi.to_bits()];
            let estimates = correlation_estimate(lo, hi)?;
            for (d, (est, se)) in estimates.into_iter().enumerate() {
                pairs.push(CorrelationPair {
                    k,
                    tau: eta * k,
                    direction: directions[d].clone(),
                    estimate: est,
                    stderr: se,
                });
            }
        }
    }
    Ok(pairs)
}

/// Recover `h_hat` from point-mode pairs and group them into polar samples;
/// estimates landing on the same `(direction, tau)` cell are averaged with
/// weights proportional to `k^2`.
///
/// Two refinements beyond the raw asymptotic recovery formula:
/// - The discrete correlation concentrates the power-law symbol at the mid
///   frequency `k + tau/2` rather than at `k`, so each recovered value is
///   rescaled by `((k + tau/2) / k)^m`. Without this the estimate at
///   offset `tau = eta k` is low by the factor `(1 + eta/2)^{-m}`.
/// - The residual finite-frequency correction decays like `1/k^2`, so when
///   several `k` contribute to the same `(direction, tau)` cell the average
///   favors the higher frequencies via `k^2` weights.
pub fn assemble_polar_samples(
    pairs: &[CorrelationPair],
    directions: &[Vec<f64>],
    m: f64,
    dim: usize,
) -> Result<PolarSamples> {
    // tau values arise as products k * eta, so nominally equal radii can
    // differ by a few ulps; quantize the bin key so they share a cell.
    let quantize = |tau: f64| (tau * 1e9).round() as i64;
    let mut by_tau: BTreeMap<i64, Vec<Vec<(f64, Complex64)>>> = BTreeMap::new();
    for p in pairs {
        let d = directions
            .iter()
            .position(|d| d == &p.direction)
            .ok_or_else(|| Error::Config("pair direction not in the direction set".into()))?;
        let midpoint = ((p.k + 0.5 * p.tau) / p.k).powf(m);
        let recovered = recover_h_hat(p.estimate, p.k, p.tau, m, dim)? * midpoint;
        by_tau
            .entry(quantize(p.tau))
            .or_insert_with(|| vec![Vec::new(); directions.len()])[d]
            .push((p.k, recovered));
    }
    let mut radii = Vec::new();
    let mut values = vec![Vec::new(); directions.len()];
    for (key, per_dir) in by_tau {
        radii.push(key as f64 * 1e-9);
        for (d, cell) in per_dir.into_iter().enumerate() {
            if cell.is_empty() {
                return Err(Error::EmptyGrid(format!("no estimate for direction {d}")));
            }
            let total: f64 = cell.iter().map(|(k, _)| k * k).sum();
            let mean = cell.iter().map(|(k, v)| v * (k * k)).sum::<Complex64>() / total;
            values[d].push(mean);
        }
    }
    PolarSamples::new(dim, radii, directions.to_vec(), values)
}

fn write_correlations_csv(path: &Path, pairs: &[CorrelationPair]) -> Result<()> {
    let mut out = String::from("k,eta,direction_index,re,im,stderr\n");
    // Recover the direction index by first occurrence order.
    let mut dirs: Vec<&Vec<f64>> = Vec::new();
    for p in pairs {
        let idx = match dirs.iter().position(|d| *d == &p.direction) {
            Some(i) => i,
            None => {
                dirs.push(&p.direction);
                dirs.len() - 1
            }
        };
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.k,
            p.tau / p.k,
            idx,
            p.estimate.re,
            p.estimate.im,
            p.stderr
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Run the full pipeline. On a stage error the manifest is still written,
/// marked incomplete with the failing stage, and the error is returned
/// stage-tagged.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunManifest> {
    config.validate()?;
    std::fs::create_dir_all(&config.output_dir)?;
    let mut state = RunState {
        dir: config.output_dir.clone(),
        files: Vec::new(),
        timings: Vec::new(),
    };
    let result = run_stages(config, &mut state);
    let manifest = RunManifest {
        config_hash: config.hash(),
        code_version: env!("CARGO_PKG_VERSION").into(),
        master_seed: config.source.master_seed,
        n_realizations: config.source.n_realizations,
        timings: state.timings.clone(),
        files: state.files.clone(),
        complete: result.is_ok(),
        failed_stage: result.as_ref().err().map(|(stage, _)| stage.clone()),
    };
    std::fs::write(
        config.output_dir.join("manifest.json"),
        serde_json::to_vec_pretty(&manifest)?,
    )?;
    match result {
        Ok(()) => Ok(manifest),
        Err((stage, e)) => Err(Error::Config(format!("stage {stage} failed: {e}"))),
    }
}

fn run_stages(
    config: &ExperimentConfig,
    state: &mut RunState,
) -> std::result::Result<(), (String, Error)> {
    let stage = |name: &str,
                     state: &mut RunState,
                     f: &mut dyn FnMut(&mut RunState) -> Result<()>|
     -> std::result::Result<(), (String, Error)> {
        let start = Instant::now();
        let r = f(state);
        state.timings.push((name.to_string(), start.elapsed().as_secs_f64()));
        r.map_err(|e| (name.to_string(), e))
    };

    let grid = config.grid_spec().map_err(|e| ("setup".to_string(), e))?;
    let dim = config.dim;
    let m = config.source.m;

    // Stage: configuration snapshot.
    stage("config", state, &mut |state| {
        std::fs::write(
            state.dir.join("config.json"),
            serde_json::to_vec_pretty(config)?,
        )?;
        state.record("config.json")
    })?;

    // Stage: sample the ensemble.
    let mut ensemble_opt = None;
    let mut h_true_opt = None;
    stage("sample", state, &mut |state| {
        let h_true = config.source.strength.build(grid)?;
        let spec = GmigSpec::new(m, StrengthProfile::new(h_true.clone())?)?;
        let ensemble =
            FieldEnsemble::generate(spec, config.source.master_seed, config.source.n_realizations)?;
        write_real_field(&state.dir.join("h_true"), &h_true)?;
        state.record("h_true.json")?;
        state.record("h_true.bin")?;
        h_true_opt = Some(h_true);
        ensemble_opt = Some(ensemble);
        Ok(())
    })?;
    let ensemble = ensemble_opt.unwrap();
    let h_true = h_true_opt.unwrap();

    let potential = match &config.potential.profile {
        Some(p) => Potential::new(scale(
            p.build(grid).map_err(|e| ("setup".to_string(), e))?,
            config.potential.amplitude,
        ))
        .map_err(|e| ("setup".to_string(), e))?,
        None => Potential::zero(grid),
    };
    let directions = match dim {
        2 => unit_circle(config.directions),
        _ => crate::inverse::fibonacci_sphere(config.directions),
    };

    // Stage: forward solves + correlation estimation.
    let mut pairs_opt = None;
    stage("correlate", state, &mut |state| {
        let pairs = match config.mode {
            CorrelationMode::Point => correlation_sweep(
                &ensemble,
                &potential,
                &config.k_grid(),
                &config.band.eta_grid,
                &directions,
                1e-8,
            )?,
            CorrelationMode::BandAveraged => band_sweep(config, &ensemble, &potential, &directions)?,
        };
        write_correlations_csv(&state.dir.join("correlations.csv"), &pairs)?;
        state.record("correlations.csv")?;
        pairs_opt = Some(pairs);
        Ok(())
    })?;
    let pairs = pairs_opt.unwrap();

    // Stage: discrepancy.
    let dataset = CorrelationDataset::new(
        pairs.clone(),
        ensemble.len(),
        config.mode,
        config.band.k0,
        config.band.k_max * 2.0,
    )
    .map_err(|e| ("discrepancy".to_string(), e))?;
    let disc_mode = match config.mode {
        CorrelationMode::Point => DiscrepancyMode::Eps1,
        CorrelationMode::BandAveraged => DiscrepancyMode::Eps2,
    };
    let eps_sq = data_discrepancy(&dataset, disc_mode, m, dim)
        .map_err(|e| ("discrepancy".to_string(), e))?;

    // Stage: reconstruction (point mode; band mode records discrepancies only).
    let mut rel_l2_error = f64::NAN;
    let mut residue = 0.0;
    if config.mode == CorrelationMode::Point {
        stage("invert", state, &mut |state| {
            let mut samples = assemble_polar_samples(&pairs, &directions, m, dim)?;
            samples.hermitian_complete();
            let (h_rec, res) =
                invert_polar_fourier(&samples, config.inversion.cutoff_radius, grid)?;
            residue = res;
            rel_l2_error = reconstruction_error(&h_rec, &h_true)?;
            write_real_field(&state.dir.join("h_rec"), &h_rec)?;
            state.record("h_rec.json")?;
            state.record("h_rec.bin")
        })?;
    }

    // Stage: stability summary.
    stage("stability", state, &mut |state| {
        let delta = config.delta()?;
        let params = StabilityParams::new(m, dim, config.stability.s, config.inversion.t, delta)?;
        let eps = eps_sq.sqrt();
        let rhs = if eps > 0.0 && eps < (-1.0f64).exp() && config.band.k_max > 1.0 {
            Some(stability_rhs(config.band.k_max, eps, params.beta0, params.beta)?)
        } else {
            None
        };
        let summary = RunSummary {
            config_hash: config.hash(),
            dim,
            m,
            mode: config.mode,
            k_max: config.band.k_max,
            ensemble_size: ensemble.len(),
            cutoff_radius: config.inversion.cutoff_radius,
            rel_l2_error,
            eps_sq,
            imaginary_residue: residue,
            stability: StabilitySummary {
                s: config.stability.s,
                t: config.inversion.t,
                delta,
                beta0: params.beta0,
                beta: params.beta,
                rhs,
            },
        };
        std::fs::write(state.dir.join("summary.json"), serde_json::to_vec_pretty(&summary)?)?;
        state.record("summary.json")
    })?;

    Ok(())
}

/// Band-averaged sweep (d = 3): for each `(eta, direction)`, correlations on
/// a `t`-grid spanning `[k0, 2 k0]` reduce to one band statistic, stored with
/// `estimate.re` = statistic and `stderr` = its propagated error.
fn band_sweep(
    config: &ExperimentConfig,
    ensemble: &FieldEnsemble,
    potential: &Potential,
    directions: &[Vec<f64>],
) -> Result<Vec<CorrelationPair>> {
    let k_ref = config.band.k0;
    let n_t = config.band.num_k.max(8);
    let t_grid: Vec<f64> =
        (0..n_t).map(|i| k_ref + k_ref * i as f64 / (n_t - 1) as f64).collect();
    let mut pairs = Vec::new();
    let mut base: Vec<Vec<FarFieldSample>> = Vec::with_capacity(t_grid.len());
    for &t in &t_grid {
        base.push(ensemble_far_fields(ensemble, potential, t, directions, 1e-8)?);
    }
    for &eta in &config.band.eta_grid {
        let mut shifted: Vec<Vec<(Complex64, f64)>> = Vec::with_capacity(t_grid.len());
        for (&t, lo) in t_grid.iter().zip(base.iter()) {
            let hi = ensemble_far_fields(ensemble, potential, t + k_ref * eta, directions, 1e-8)?;
            shifted.push(correlation_estimate(lo, &hi)?);
        }
        for (d, dir) in directions.iter().enumerate() {
            let corr: Vec<(Complex64, f64)> = shifted.iter().map(|row| row[d]).collect();
            let (value, se) = band_averaged_statistic(
                &t_grid,
                &corr,
                k_ref,
                config.source.m,
                config.dim,
            )?;
            pairs.push(CorrelationPair {
                k: k_ref,
                tau: k_ref * eta,
                direction: dir.clone(),
                estimate: Complex64::new(value, 0.0),
                stderr: se,
            });
        }
    }
    Ok(pairs)
}

/// Parse `correlations.csv` back into pairs. The direction set is rebuilt
/// from the config, matching the index column.
pub fn read_correlations_csv(
    path: &Path,
    directions: &[Vec<f64>],
) -> Result<Vec<CorrelationPair>> {
    let text = std::fs::read_to_string(path)?;
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(Error::Config(format!(
                "{}:{}: expected 6 columns, found {}",
                path.display(),
                lineno + 1,
                cols.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|e| Error::Config(format!("{}:{}: {e}", path.display(), lineno + 1)))
        };
        let k = parse(cols[0])?;
        let eta = parse(cols[1])?;
        let idx = cols[2].parse::<usize>().map_err(|e| {
            Error::Config(format!("{}:{}: {e}", path.display(), lineno + 1))
        })?;
        if idx >= directions.len() {
            return Err(Error::IndexOutOfRange { index: idx, len: directions.len() });
        }
        pairs.push(CorrelationPair {
            k,
            tau: eta * k,
            direction: directions[idx].clone(),
            estimate: Complex64::new(parse(cols[3])?, parse(cols[4])?),
            stderr: parse(cols[5])?,
        });
    }
    Ok(pairs)
}

/// Rebuild the polar samples of a stored run from its correlation CSV.
pub fn assemble_from_run(run: &Path, config: &ExperimentConfig) -> Result<PolarSamples> {
    let directions = match config.dim {
        2 => unit_circle(config.directions),
        _ => crate::inverse::fibonacci_sphere(config.directions),
    };
    let pairs = read_correlations_csv(&run.join("correlations.csv"), &directions)?;
    assemble_polar_samples(&pairs, &directions, config.source.m, config.dim)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportBundle {
    pub runs: Vec<RunSummary>,
    pub warnings: Vec<String>,
}

/// Consolidate one or more completed runs below `root` into a plot-ready CSV
/// (`report.csv`: K, eps, error, rhs) and a JSON summary (`report.json`).
/// Missing artifacts are listed as warnings, not fatal.
pub fn emit_report(root: &Path) -> Result<ReportBundle> {
    let mut runs = Vec::new();
    let mut warnings = Vec::new();
    let mut candidates: Vec<PathBuf> = vec![root.to_path_buf()];
    if root.is_dir() {
        for entry in std::fs::read_dir(root)? {
            let p = entry?.path();
            if p.is_dir() {
                candidates.push(p);
            }
        }
    }
    candidates.sort();
    for dir in candidates {
        let summary = dir.join("summary.json");
        if !summary.exists() {
            continue;
        }
        match std::fs::read(&summary)
            .map_err(Error::from)
            .and_then(|b| serde_json::from_slice::<RunSummary>(&b).map_err(Error::from))
        {
            Ok(s) => {
                if !dir.join("manifest.json").exists() {
                    warnings.push(format!("{}: missing manifest.json", dir.display()));
                }
                runs.push(s);
            }
            Err(e) => warnings.push(format!("{}: unreadable summary ({e})", dir.display())),
        }
    }
    if runs.is_empty() {
        warnings.push(format!("no run summaries found under {}", root.display()));
    }
    runs.sort_by(|a, b| a.k_max.total_cmp(&b.k_max));
    let mut csv = String::from("K,eps,error,rhs\n");
    for r in &runs {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            r.k_max,
            r.eps_sq.sqrt(),
            r.rel_l2_error,
            r.stability.rhs.map_or(String::from(""), |v| v.to_string())
        ));
    }
    std::fs::write(root.join("report.csv"), csv)?;
    let bundle = ReportBundle { runs, warnings };
    std::fs::write(root.join("report.json"), serde_json::to_vec_pretty(&bundle)?)?;
    Ok(bundle)
}
