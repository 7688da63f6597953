//! attenuspec: command-line driver for the attenuated photoacoustic
//! operator toolkit.
//!
//! Exit codes: 0 success, 1 validation/configuration failure, 2 violated
//! numerical invariant. ATTENUSPEC_THREADS caps worker parallelism.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use attenuspec_core::attenuation::{
    classify, propagation_speed, range_grid, AttenuationModel, Classification,
};
use attenuspec_core::bounds::{tail_sum_bound, SeparableKernel, SyntheticKernel1D};
use attenuspec_core::config::{ModelConfig, RunConfig};
use attenuspec_core::error::{Error, Result};
use attenuspec_core::matio;
use attenuspec_core::operator::{
    gram_direct, gram_weak, Discretization, FrequencyGrid, GramKernel,
};
use attenuspec_core::signals::{causality_check, front_speed_check, synthesize};
use attenuspec_core::spectra::{compare_decay, eigen_spectrum, fit_power, fit_stretched, DecayLaw};
use attenuspec_core::wavekernel::{
    default_omega_cut, directional_derivative, frequency_integral, greens,
};

#[derive(Parser)]
#[command(name = "attenuspec", version, about = "Attenuated photoacoustic operator toolkit")]
#[clap(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Attenuation model queries
    Model {
        #[command(subcommand)]
        cmd: ModelCmd,
    },
    /// Kernel evaluation and derivative/frequency-integral sweeps
    Kernel {
        #[command(subcommand)]
        cmd: KernelCmd,
    },
    /// Assemble the Gram matrix of a configuration
    Assemble {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Eigenvalue spectrum of a configuration or a stored Gram matrix
    Spectrum {
        #[arg(long, conflicts_with = "input")]
        config: Option<PathBuf>,
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a decay law to a spectrum CSV
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = ["power", "stretched"])]
        law: String,
        /// Stretch exponent for the stretched law (e.g. 0.1667)
        #[arg(long, allow_negative_numbers = true)]
        s: Option<f64>,
        /// 1-based inclusive index range "lo:hi"
        #[arg(long)]
        range: Option<String>,
    },
    /// Compare a weak-model and a strong-model spectrum
    Compare {
        #[arg(long)]
        weak: PathBuf,
        #[arg(long)]
        strong: PathBuf,
    },
    /// Eigenvalue-bound verification on synthetic kernels
    Bounds {
        #[command(subcommand)]
        cmd: BoundsCmd,
    },
    /// Synthesize a time-domain pressure trace
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// "point" or "ball:RADIUS"
        #[arg(long, default_value = "point")]
        source: String,
        /// Detector position "x,y,z" on the sphere
        #[arg(long)]
        detector: String,
        #[arg(long)]
        out: PathBuf,
        /// Distance for the front-speed diagnostic (defaults to |detector|)
        #[arg(long, allow_negative_numbers = true)]
        dist: Option<f64>,
    },
}

#[derive(Subcommand)]
enum ModelCmd {
    /// Evaluate kappa(omega)
    Eval {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_negative_numbers = true)]
        omega: f64,
    },
    /// Numerical propagation speed lim i*omega/kappa~(i*omega)
    Speed {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1e9, allow_negative_numbers = true)]
        omega_max: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Strong/weak classification with table constants
    Classify {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Sample kappa~ on an upper-half-plane grid
    Range {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        n: usize,
    },
}

#[derive(Subcommand)]
enum KernelCmd {
    /// Evaluate the free-space kernel G(omega, x)
    Eval {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_negative_numbers = true)]
        omega: f64,
        #[arg(long)]
        x: String,
    },
    /// Directional derivative of the kernel
    Deriv {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_negative_numbers = true)]
        omega: f64,
        #[arg(long)]
        x: String,
        #[arg(long)]
        v: String,
        #[arg(long)]
        j: usize,
    },
    /// Frequency-integral sweep with fitted growth envelope
    Freqint {
        #[command(flatten)]
        model: ModelArgs,
        /// Range "lo..hi" of derivative orders
        #[arg(long, default_value = "0..10")]
        j: String,
        #[arg(long, default_value_t = 0.2)]
        eps: f64,
        #[arg(long)]
        omega_cut: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum BoundsCmd {
    /// Finite-rank tail bound sweep over Taylor ranks
    Verify {
        #[arg(long, default_value = "gaussian")]
        kernel: String,
        /// Range "lo..hi" of Taylor ranks
        #[arg(long, default_value = "1..10")]
        r: String,
        #[arg(long, default_value_t = 512)]
        n_disc: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Model selection: either a config file or --model plus parameter flags.
#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    tau: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tau_tilde: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
}

impl ModelArgs {
    fn build(&self) -> Result<AttenuationModel> {
        if let Some(path) = &self.config {
            let cfg = RunConfig::from_file(path)?;
            return cfg.model.build();
        }
        let name = self
            .model
            .as_deref()
            .ok_or_else(|| Error::Config("pass --model NAME or --config FILE".into()))?;
        let need = |v: Option<f64>, flag: &str| {
            v.ok_or_else(|| Error::Config(format!("model '{name}' requires --{flag}")))
        };
        let cfg = match name {
            "thermo_viscous" => ModelConfig::ThermoViscous { tau: need(self.tau, "tau")? },
            "kowar_scherzer_bonnefond" | "ksb" => ModelConfig::KowarScherzerBonnefond {
                gamma: need(self.gamma, "gamma")?,
                alpha: need(self.alpha, "alpha")?,
                tau: need(self.tau, "tau")?,
            },
            "power_law" => ModelConfig::PowerLaw {
                gamma: need(self.gamma, "gamma")?,
                alpha: need(self.alpha, "alpha")?,
            },
            "modified_szabo" => ModelConfig::ModifiedSzabo {
                gamma: need(self.gamma, "gamma")?,
                alpha: need(self.alpha, "alpha")?,
            },
            "nachman_smith_waag" | "nsw" => ModelConfig::NachmanSmithWaag {
                c0: need(self.c0, "c0")?,
                tau: need(self.tau, "tau")?,
                tau_tilde: need(self.tau_tilde, "tau-tilde")?,
            },
            "linear" | "linear_non_attenuating" => {
                ModelConfig::Linear { c: need(self.c, "c")? }
            }
            other => return Err(Error::Config(format!("unknown model '{other}'"))),
        };
        cfg.build()
    }
}

fn parse_vec3(text: &str) -> Result<[f64; 3]> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!("expected 'x,y,z', got '{text}'")));
    }
    let mut out = [0.0; 3];
    for (slot, p) in out.iter_mut().zip(&parts) {
        *slot =
            p.trim().parse().map_err(|e| Error::Config(format!("bad coordinate '{p}': {e}")))?;
    }
    Ok(out)
}

fn parse_range(text: &str, sep: &str) -> Result<(usize, usize)> {
    let (lo, hi) = text
        .split_once(sep)
        .ok_or_else(|| Error::Config(format!("expected 'lo{sep}hi', got '{text}'")))?;
    let lo = lo.trim().parse().map_err(|e| Error::Config(format!("bad bound '{lo}': {e}")))?;
    let hi = hi.trim().parse().map_err(|e| Error::Config(format!("bad bound '{hi}': {e}")))?;
    Ok((lo, hi))
}

/// Default ω grid for classification checks.
fn classify_grid() -> Vec<f64> {
    (1..=400).map(|k| 0.25 * k as f64).collect()
}

fn write_manifest(out: &Path, manifest: serde_json::Value) -> Result<()> {
    let mut path = out.as_os_str().to_owned();
    path.push(".manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Format(e.to_string()))?;
    std::fs::write(PathBuf::from(path), text)?;
    Ok(())
}

/// Assembles the Gram matrix for a config, dispatching on the model class.
fn assemble_gram(cfg: &RunConfig) -> Result<(GramKernel, Classification)> {
    let model = cfg.model.build()?;
    let geom = cfg.geometry.build()?;
    let disc = Discretization::new(geom, cfg.geometry.n_boundary, cfg.geometry.h)?;
    let class = classify(&model, &classify_grid())?;
    let gram = match &class {
        Classification::Strong(params) => {
            let freq = match cfg.frequency.omega_cut {
                Some(cut) => {
                    let model2 = model.clone();
                    let eps = geom.eps;
                    let amp = move |omega: f64| (-2.0 * eps * model2.kappa(omega).im).exp();
                    FrequencyGrid::banded(&model, cut, 2.0 * geom.radius, &amp)?
                }
                None => FrequencyGrid::for_strong(&model, params, geom.eps, 2.0 * geom.radius)?,
            };
            gram_direct(&model, &class, &disc, &freq)?
        }
        Classification::Weak(split) => gram_weak(split, &disc, &cfg.frequency.weak_options())?,
    };
    Ok((gram, class))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Model { cmd } => match cmd {
            ModelCmd::Eval { model, omega } => {
                let m = model.build()?;
                let k = m.kappa(omega);
                println!("kappa({omega}) = {} + {}i", k.re, k.im);
            }
            ModelCmd::Speed { model, omega_max, tol } => {
                let m = model.build()?;
                let c = propagation_speed(&m, omega_max, tol)?;
                if c.is_infinite() {
                    println!("infinite");
                } else {
                    println!("{c}");
                }
            }
            ModelCmd::Classify { model } => {
                let m = model.build()?;
                match classify(&m, &classify_grid())? {
                    Classification::Strong(p) => println!(
                        "strong: kappa0={} beta={} omega0={} kappa1={} N={}",
                        p.kappa0, p.beta, p.omega0, p.kappa1, p.n_exp
                    ),
                    Classification::Weak(w) => {
                        println!("weak: c={} kappa_inf={}", w.c, w.kappa_inf)
                    }
                }
            }
            ModelCmd::Range { model, out, n } => {
                let m = model.build()?;
                let mut zs = Vec::with_capacity((n + 1) * (n + 1));
                for i in 0..=n {
                    for j in 0..=n {
                        zs.push(Complex64::new(
                            -10.0 + 20.0 * i as f64 / n as f64,
                            10.0 * j as f64 / n as f64,
                        ));
                    }
                }
                let samples = range_grid(&m, &zs)?;
                let flags = samples.iter().filter(|s| s.flagged).count();
                matio::write_range_csv(&out, &samples)?;
                println!("{} samples, {} flagged", samples.len(), flags);
                if flags > 0 {
                    return Err(Error::Numerics(format!(
                        "{flags} samples left the closed upper half-plane"
                    )));
                }
            }
        },
        Command::Kernel { cmd } => match cmd {
            KernelCmd::Eval { model, omega, x } => {
                let m = model.build()?;
                let g = greens(&m, omega, parse_vec3(&x)?)?;
                println!("G({omega}, [{x}]) = {} + {}i  (|G| = {})", g.re, g.im, g.norm());
            }
            KernelCmd::Deriv { model, omega, x, v, j } => {
                let m = model.build()?;
                let d = directional_derivative(&m, omega, parse_vec3(&x)?, parse_vec3(&v)?, j)?;
                println!("d^{j} G = {} + {}i  (|.| = {})", d.re, d.im, d.norm());
            }
            KernelCmd::Freqint { model, j, eps, omega_cut, out } => {
                let m = model.build()?;
                let class = classify(&m, &classify_grid())?;
                let params = *class.strong()?;
                let (j_lo, j_hi) = parse_range(&j, "..")?;
                let cut =
                    omega_cut.unwrap_or_else(|| default_omega_cut(params.kappa0, params.beta, eps));
                let mut rows = Vec::new();
                for jj in j_lo..=j_hi {
                    let q = frequency_integral(&m, &class, eps, jj as u32, cut)?;
                    rows.push((jj as u32, q));
                }
                // fitted envelope B b^j j^(mu j) with mu = N/beta - 1
                let mu = params.n_exp as f64 / params.beta - 1.0;
                let qs: Vec<f64> = rows.iter().map(|r| r.1).collect();
                let env = attenuspec_core::bounds::fit_mj_envelope(&qs, Some(mu))?;
                let table: Vec<(u32, f64, f64)> = rows
                    .iter()
                    .map(|&(jj, q)| (jj, q, env.value(jj as usize)))
                    .collect();
                matio::write_freqint_csv(&out, &table)?;
                println!("wrote {} rows to {}", table.len(), out.display());
            }
        },
        Command::Assemble { config, out } => {
            let cfg = RunConfig::from_file(&config)?;
            let (gram, class) = assemble_gram(&cfg)?;
            gram.check_hermitian()?;
            matio::write_gram(&out, &gram)?;
            let mut manifest = cfg.manifest();
            manifest["class"] = serde_json::json!(class.kind());
            manifest["assembly"] = serde_json::json!(gram.meta);
            write_manifest(&out, manifest)?;
            println!(
                "assembled {}x{} gram ({}), hermitian defect {:.3e}",
                gram.n(),
                gram.n(),
                gram.meta.assembly,
                gram.hermitian_defect
            );
        }
        Command::Spectrum { config, input, out } => {
            let (gram, manifest) = match (config, input) {
                (Some(path), None) => {
                    let cfg = RunConfig::from_file(&path)?;
                    let (gram, _) = assemble_gram(&cfg)?;
                    (gram, Some(cfg.manifest()))
                }
                (None, Some(path)) => (matio::read_gram(&path)?, None),
                _ => {
                    return Err(Error::Config(
                        "pass exactly one of --config FILE or --in gram.bin".into(),
                    ))
                }
            };
            let spec = eigen_spectrum(&gram)?;
            matio::write_spectrum_csv(&out, &spec)?;
            if let Some(mut manifest) = manifest {
                manifest["spectrum"] = serde_json::json!({
                    "n_modes": spec.n_modes,
                    "lambda1": spec.lambda1(),
                    "negative_defect": spec.negative_defect,
                });
                write_manifest(&out, manifest)?;
            }
            println!("{} eigenvalues, lambda1 = {}", spec.n_modes, spec.lambda1());
        }
        Command::Fit { input, law, s, range } => {
            let spec = matio::read_spectrum_csv(&input)?;
            let range = match range {
                Some(text) => parse_range(&text, ":")?,
                None => (5, (spec.n_modes / 4).max(15)),
            };
            let fit = match law.as_str() {
                "power" => fit_power(&spec, range)?,
                "stretched" => {
                    let s = s.ok_or_else(|| {
                        Error::Config("stretched fit requires --s EXPONENT".into())
                    })?;
                    fit_stretched(&spec, s, range)?
                }
                _ => unreachable!("clap validates the law"),
            };
            match fit.law {
                DecayLaw::PowerLaw { p } => println!(
                    "power law: p = {p}, prefactor = {}, R2 = {} over {:?}",
                    fit.prefactor, fit.r_squared, fit.fit_range
                ),
                DecayLaw::StretchedExp { c, s } => println!(
                    "stretched exp: c = {c}, s = {s}, prefactor = {}, R2 = {} over {:?}",
                    fit.prefactor, fit.r_squared, fit.fit_range
                ),
            }
        }
        Command::Compare { weak, strong } => {
            let w = matio::read_spectrum_csv(&weak)?;
            let s = matio::read_spectrum_csv(&strong)?;
            let cmp = compare_decay(&w, &s);
            match cmp.crossover {
                Some(n) => println!(
                    "crossover at n = {n} of {} compared; final ratio {:.3e}",
                    cmp.n_compared,
                    cmp.ratios.last().unwrap()
                ),
                None => println!("no crossover within {} compared modes", cmp.n_compared),
            }
        }
        Command::Bounds { cmd } => match cmd {
            BoundsCmd::Verify { kernel, r, n_disc, out } => {
                let k = SyntheticKernel1D::by_name(&kernel)?;
                let (r_lo, r_hi) = parse_range(&r, "..")?;
                let center = 0.5 * (k.domain.0 + k.domain.1);
                let mut rows = Vec::new();
                let mut all_ok = true;
                for rank in r_lo..=r_hi {
                    let approx = SeparableKernel::taylor(&k, center, rank);
                    match tail_sum_bound(&k, &approx, n_disc, 256) {
                        Ok((lhs, rhs)) => rows.push((rank, lhs, rhs, true)),
                        Err(Error::Numerics(_)) => {
                            all_ok = false;
                            rows.push((rank, f64::NAN, f64::NAN, false));
                        }
                        Err(e) => return Err(e),
                    }
                }
                matio::write_bounds_csv(&out, &rows)?;
                println!("wrote {} rows to {}", rows.len(), out.display());
                if !all_ok {
                    return Err(Error::Numerics("finite-rank tail bound violated".into()));
                }
            }
        },
        Command::Simulate { config, source, detector, out, dist } => {
            let cfg = RunConfig::from_file(&config)?;
            let model = cfg.model.build()?;
            let geom = cfg.geometry.build()?;
            let interior = attenuspec_core::geometry::interior_grid(&geom, cfg.geometry.h)?;
            let det = parse_vec3(&detector)?;
            let h = source_coefficients(&source, &interior, geom.center)?;
            let trace = synthesize(&model, &interior, &h, det, &cfg.synthesis)?;
            matio::write_trace_csv(&out, &trace)?;
            let mut manifest = cfg.manifest();
            manifest["simulate"] = serde_json::json!({
                "source": source,
                "detector": det,
                "imag_residue": trace.imag_residue,
                "window_allowance": trace.window_allowance,
            });
            write_manifest(&out, manifest)?;
            let frac = causality_check(&trace);
            println!("causality fraction: {frac:.3e}");
            let distance = dist.unwrap_or_else(|| {
                attenuspec_core::wavekernel::norm3([
                    det[0] - geom.center[0],
                    det[1] - geom.center[1],
                    det[2] - geom.center[2],
                ])
            });
            let speed = propagation_speed(&model, 1e9, 1e-6)?;
            let rep = front_speed_check(&trace, distance, speed);
            if rep.skipped {
                println!("front-speed check skipped: infinite propagation speed");
            } else {
                println!(
                    "front arrival {:.4} vs earliest admissible {:.4}: {}",
                    rep.arrival,
                    rep.earliest_admissible,
                    if rep.ok { "ok" } else { "violated" }
                );
                if !rep.ok {
                    return Err(Error::Numerics("front-speed inequality violated".into()));
                }
            }
        }
    }
    Ok(())
}

fn source_coefficients(
    spec: &str,
    interior: &attenuspec_core::geometry::InteriorGrid,
    center: [f64; 3],
) -> Result<Vec<f64>> {
    let mut h = vec![0.0; interior.len()];
    if spec == "point" {
        // unit coefficient at the grid point closest to the center
        let (idx, _) = interior
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let d = attenuspec_core::wavekernel::norm3([
                    p[0] - center[0],
                    p[1] - center[1],
                    p[2] - center[2],
                ]);
                (i, d)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or_else(|| Error::Geometry("empty interior grid".into()))?;
        h[idx] = 1.0;
        return Ok(h);
    }
    if let Some(radius) = spec.strip_prefix("ball:") {
        let radius: f64 = radius
            .parse()
            .map_err(|e| Error::Config(format!("bad ball radius '{radius}': {e}")))?;
        for (i, p) in interior.points.iter().enumerate() {
            let d = attenuspec_core::wavekernel::norm3([
                p[0] - center[0],
                p[1] - center[1],
                p[2] - center[2],
            ]);
            if d <= radius {
                h[i] = 1.0;
            }
        }
        if h.iter().all(|v| *v == 0.0) {
            return Err(Error::Config(format!("ball source of radius {radius} contains no grid point")));
        }
        return Ok(h);
    }
    Err(Error::Config(format!("unknown source spec '{spec}'; use 'point' or 'ball:R'")))
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("ATTENUSPEC_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            // usage problems are validation failures (exit 1)
            eprint!("{e}");
            return ExitCode::from(1);
        }
        Err(e) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
