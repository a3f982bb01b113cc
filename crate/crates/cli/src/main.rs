//! `biharm`: command-line front end for the biharmonic scattering laboratory.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure, 4 I/O.

use biharmonic_lab::error::Error;
use biharmonic_lab::experiment::{
    assemble_from_run, emit_report, run_experiment, ExperimentConfig,
};
use biharmonic_lab::gmig::{derive_seed, sample_gmig, GmigSpec, StrengthProfile};
use biharmonic_lab::grid::GridSpec;
use biharmonic_lab::inverse::{
    fibonacci_sphere, invert_polar_fourier, reconstruction_error, unit_circle,
};
use biharmonic_lab::io::{read_real_field, write_complex_field, write_real_field};
use biharmonic_lab::kernels::CutoffWindow;
use biharmonic_lab::profiles;
use biharmonic_lab::solver::{
    born_solve, far_field, pde_residual, resolvent_norm_probe, Potential, ResolventVariant,
    ScatteringProblem,
};
use biharmonic_lab::stability::{continuation_bound_check, mu_lower_bound, SlabSpec};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "biharm", version, about = "Biharmonic scattering laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Spatial dimension (2 or 3).
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Samples per axis (power of two).
    #[arg(long, default_value_t = 64)]
    n: usize,
    /// Box half-width R of [-R, R)^d.
    #[arg(long, default_value_t = 1.0)]
    half_width: f64,
}

impl GridArgs {
    fn spec(&self) -> Result<GridSpec, Error> {
        GridSpec::new(self.dim, self.n, self.half_width)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample one realization of the random source and write it to disk.
    SampleField {
        #[command(flatten)]
        grid: GridArgs,
        /// Covariance order m of the principal symbol h(x)|xi|^{-m}.
        #[arg(long)]
        m: f64,
        /// Radius of the centered bump strength profile.
        #[arg(long, default_value_t = 0.3)]
        radius: f64,
        /// Amplitude of the strength profile.
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        /// Master seed of the ensemble.
        #[arg(long, default_value_t = 0)]
        master_seed: u64,
        /// Realization index within the ensemble.
        #[arg(long, default_value_t = 0)]
        index: u64,
        /// Output base path (writes BASE.json + BASE.bin).
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve (Lap^2 - k^4 + V) u = f for a stored source and write u.
    Forward {
        /// Source field base path.
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        k: f64,
        /// Optional potential field base path.
        #[arg(long)]
        potential: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        pot_amplitude: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Output base path for the complex field u.
        #[arg(long)]
        out: PathBuf,
    },
    /// Far-field pattern of a stored source over evenly spread directions.
    Farfield {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        k: f64,
        #[arg(long)]
        potential: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        pot_amplitude: f64,
        #[arg(long, default_value_t = 8)]
        directions: usize,
        /// Output CSV path (direction_index, re, im).
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-run the polar Fourier inversion of a completed experiment run.
    Invert {
        /// Run directory holding config.json and correlations.csv.
        #[arg(long)]
        run: PathBuf,
        /// Override the low-pass cutoff radius.
        #[arg(long)]
        cutoff: Option<f64>,
    },
    /// Power-iteration probe of ||chi R(k) chi|| across wavenumbers.
    ResolventProbe {
        #[command(flatten)]
        grid: GridArgs,
        /// Comma-separated wavenumbers.
        #[arg(long, value_delimiter = ',')]
        k_list: Vec<f64>,
        /// Plateau of the cutoff window: 1 on |x|_inf <= inner.
        #[arg(long, default_value_t = 0.25)]
        inner: f64,
        /// Cutoff window vanishes on |x|_inf >= outer.
        #[arg(long, default_value_t = 0.4)]
        outer: f64,
        /// Optional bump potential radius; free resolvent when absent.
        #[arg(long)]
        potential_radius: Option<f64>,
        #[arg(long, default_value_t = 30)]
        iterations: usize,
    },
    /// Check |p(z)| <= M eps^{mu(z)} for the built-in analytic test functions.
    ContinuationCheck {
        /// Data interval start K0.
        #[arg(long, default_value_t = 1.0)]
        k0: f64,
        /// Data interval end K.
        #[arg(long, default_value_t = 2.0)]
        k: f64,
        /// Slab half-height h0.
        #[arg(long, default_value_t = 0.5)]
        h0: f64,
        /// Analytic class bound M.
        #[arg(long, default_value_t = 1.0)]
        bound: f64,
        /// Sampled |p| level on the data interval.
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
    },
    /// Run the full configured pipeline.
    Experiment {
        /// JSON configuration file.
        #[arg(long)]
        config: PathBuf,
    },
    /// Consolidate run summaries below a directory into report.csv/json.
    Report {
        #[arg(long)]
        dir: PathBuf,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Serde(_) | Error::MissingArtifacts(_) => 4,
        Error::Diverged(_)
        | Error::QuadratureFailure { .. }
        | Error::PowerIterationStall(_)
        | Error::SupportViolation { .. }
        | Error::BranchViolation(_)
        | Error::DomainError(_)
        | Error::KernelDomainError(_)
        | Error::HermitianViolation(_)
        | Error::SeedMismatch(_) => 3,
        _ => 2,
    }
}

fn load_potential(
    path: &Option<PathBuf>,
    amplitude: f64,
    grid: GridSpec,
) -> Result<Potential, Error> {
    match path {
        None => Ok(Potential::zero(grid)),
        Some(p) => {
            let mut v = read_real_field(p)?;
            for x in v.values.iter_mut() {
                *x *= amplitude;
            }
            Potential::new(v)
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::SampleField { grid, m, radius, amplitude, master_seed, index, out } => {
            let g = grid.spec()?;
            let h = profiles::centered_bump(g, radius, amplitude);
            let spec = GmigSpec::new(m, StrengthProfile::new(h)?)?;
            let f = sample_gmig(&spec, derive_seed(master_seed, index))?;
            write_real_field(&out, &f)?;
            println!("wrote realization {index} (seed {}) to {}", derive_seed(master_seed, index), out.display());
        }
        Command::Forward { source, k, potential, pot_amplitude, tol, out } => {
            let f = read_real_field(&source)?;
            let pot = load_potential(&potential, pot_amplitude, f.grid)?;
            let problem = ScatteringProblem::new(k, pot, f)?;
            let solution = born_solve(&problem, tol, 50)?;
            if !solution.converged {
                return Err(Error::Diverged(format!("Born series diverged at k = {k}")));
            }
            let residual = pde_residual(&solution, &problem);
            write_complex_field(&out, &solution.u)?;
            println!(
                "solved with {} Born terms, relative PDE residual {residual:.3e}",
                solution.terms.len()
            );
        }
        Command::Farfield { source, k, potential, pot_amplitude, directions, out } => {
            let f = read_real_field(&source)?;
            let g = f.grid;
            let pot = load_potential(&potential, pot_amplitude, g)?;
            let dirs = if g.dim == 2 { unit_circle(directions) } else { fibonacci_sphere(directions) };
            let problem = ScatteringProblem::new(k, pot, f)?;
            let solution = born_solve(&problem, 1e-8, 50)?;
            if !solution.converged {
                return Err(Error::Diverged(format!("Born series diverged at k = {k}")));
            }
            let sample = far_field(&problem, &solution, &dirs)?;
            let mut csv = String::from("direction_index,re,im\n");
            for (i, v) in sample.values.iter().enumerate() {
                csv.push_str(&format!("{i},{},{}\n", v.re, v.im));
            }
            std::fs::write(&out, csv)?;
            println!("wrote {} far-field values to {}", sample.values.len(), out.display());
        }
        Command::Invert { run, cutoff } => {
            let config = ExperimentConfig::from_file(&run.join("config.json"))?;
            let grid = config.grid_spec()?;
            let mut samples = assemble_from_run(&run, &config)?;
            samples.hermitian_complete();
            let cutoff = cutoff.unwrap_or(config.inversion.cutoff_radius);
            let (h_rec, residue) = invert_polar_fourier(&samples, cutoff, grid)?;
            write_real_field(&run.join("h_rec"), &h_rec)?;
            let h_true = config.source.strength.build(grid)?;
            let err = reconstruction_error(&h_rec, &h_true)?;
            println!(
                "inverted with cutoff {cutoff}: rel L2 error {err:.4}, imaginary residue {residue:.2e}"
            );
        }
        Command::ResolventProbe { grid, k_list, inner, outer, potential_radius, iterations } => {
            let g = grid.spec()?;
            let chi = profiles::plateau(g, inner, outer);
            let window = CutoffWindow::new(chi, 2.0 * outer * (g.dim as f64).sqrt() + g.spacing())?;
            let pot_field = potential_radius.map(|r| profiles::centered_bump(g, r, 1.0));
            let pot = pot_field.map(Potential::new).transpose()?;
            let variant = match &pot {
                Some(p) => ResolventVariant::Potential(p),
                None => ResolventVariant::Free,
            };
            let report = resolvent_norm_probe(&k_list, &window, variant, iterations)?;
            println!("k,norm");
            for (k, norm) in &report.entries {
                println!("{k},{norm:.6e}");
            }
            println!(
                "fitted slope {:.3} (predicted {:.1})",
                report.fitted_slope, report.predicted_slope
            );
        }
        Command::ContinuationCheck { k0, k, h0, bound, eps } => {
            let slab = SlabSpec::new(k0, k, h0)?;
            // Two analytic test functions: the constant eps and a decaying
            // exponential matched to eps at the interval end.
            let queries: Vec<f64> = (1..=10).map(|i| k + 0.3 * i as f64).collect();
            let funcs: Vec<(&str, Box<dyn Fn(f64) -> f64>)> = vec![
                ("constant", Box::new(move |_z: f64| eps)),
                ("decaying", Box::new(move |z: f64| eps * (-(z - k)).exp())),
            ];
            for (name, p) in funcs {
                let q: Vec<(f64, f64)> = queries.iter().map(|&z| (z, p(z))).collect();
                let report = continuation_bound_check(&[eps], bound, &q, &slab)?;
                println!("{name}: all_hold = {}", report.all_hold);
                for e in &report.entries {
                    println!(
                        "  z = {:.2}: |p| = {:.3e}, mu = {:.3e}, bound = {:.3e}, margin = {:.3e}",
                        e.z, e.p_abs, e.mu, e.bound, e.margin
                    );
                }
            }
            let mu_k = mu_lower_bound(k + 0.3, &slab)?;
            println!("mu just beyond the interval: {mu_k:.4e}");
        }
        Command::Experiment { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let manifest = run_experiment(&cfg)?;
            println!(
                "run complete: {} artifacts in {}",
                manifest.files.len(),
                cfg.output_dir.display()
            );
        }
        Command::Report { dir } => {
            let bundle = emit_report(&dir)?;
            println!("consolidated {} runs", bundle.runs.len());
            for w in &bundle.warnings {
                eprintln!("warning: {w}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    // Worker-pool size from the environment; defaults to all cores.
    if let Ok(v) = std::env::var("BIHARM_WORKERS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: BIHARM_WORKERS must be a positive integer, got {v:?}");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
