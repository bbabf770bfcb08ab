use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use revspec::actions::{length_spectrum, ActionChart, LengthSpectrum};
use revspec::inverse::{reconstruct, reconstruct_fit, FitTarget, SpectralData, MAX_FAMILY_DIM};
use revspec::io::{read_json, read_profile, write_json, write_profile, ProfileJson, PROFILE_FORMAT};
use revspec::profile::{isometry_distance, preset_with, Profile, DEFAULT_NODES, PRESETS};
use revspec::quantization::{oracle_spectrum, spectrum, JointSpectrum, NormalForm, NormalFormJson};
use revspec::wavetrace::{detect_singularities, singularity_report, smoothed_trace};

const USAGE: u8 = 2;
const NUMERIC: u8 = 1;

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: USAGE,
            message: message.into(),
        }
    }
}

impl From<revspec::Error> for Failure {
    fn from(e: revspec::Error) -> Self {
        let code = if e.is_input_error() { USAGE } else { NUMERIC };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::usage(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

#[derive(Parser, Debug)]
#[command(name = "revspec", version, about = "Spectral data of surfaces of revolution, forward and inverse")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a preset profile (sphere, mirror, asym, spheroid(c)).
    Preset {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_NODES)]
        nodes: usize,
    },
    /// Semiclassical joint spectrum up to a cutoff.
    Spectrum {
        /// Profile JSON file or preset name.
        profile: String,
        #[arg(long)]
        lambda_max: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the normal form JSON here.
        #[arg(long)]
        normal_form: Option<PathBuf>,
    },
    /// Finite-difference eigenvalues of the separated radial operators.
    Oracle {
        profile: String,
        #[arg(long, default_value_t = 0)]
        n_min: i64,
        #[arg(long)]
        n_max: i64,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Action chart over a Chebyshev grid of the Clairaut integral.
    Actions {
        profile: String,
        #[arg(long, default_value_t = 65)]
        nodes: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lengths of periodic tori.
    Lengths {
        profile: String,
        #[arg(long, default_value_t = 6)]
        qmax: u32,
        #[arg(long, default_value_t = 40.0)]
        lmax: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Smoothed wave trace of a spectrum CSV and its singularities.
    Trace {
        spectrum: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        sigma: f64,
        /// Window centre Λ; defaults to the largest value the spectrum supports.
        #[arg(long)]
        cutoff: Option<f64>,
        #[arg(long, default_value_t = 20.0)]
        tmax: f64,
        /// Peak floor in multiples of the median of |trace|.
        #[arg(long, default_value_t = 1.5)]
        threshold: f64,
        /// Profile whose torus lengths label the peaks.
        #[arg(long)]
        profile: Option<String>,
        #[arg(long, default_value_t = 6)]
        qmax: u32,
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
        /// Trace samples CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Profile from a spectrum CSV or a normal form JSON.
    Reconstruct {
        input: PathBuf,
        /// Result JSON; the recovered profile goes next to it as `<stem>.profile.json`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fit a polynomial family of this dimension instead of inverting.
        #[arg(long)]
        family: Option<usize>,
    },
    /// Profile → spectrum → reconstruction, compared up to isometry.
    Roundtrip {
        profile: String,
        #[arg(long, default_value_t = 1e-2)]
        tol: f64,
        #[arg(long, default_value_t = 2500.0)]
        lambda_max: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_profile(arg: &str) -> CliResult<Profile> {
    if arg.trim().is_empty() {
        return Err(Failure::usage("empty profile argument"));
    }
    let path = Path::new(arg);
    if path.exists() {
        return Ok(read_profile(path)?);
    }
    if arg.ends_with(".json") {
        return Err(Failure::usage(format!("no such file: {arg}")));
    }
    preset_with(arg, DEFAULT_NODES).map_err(|e| {
        Failure::usage(format!("{e}; pass a profile file or one of: {}", PRESETS.join(", ")))
    })
}

fn sink(out: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

/// Prints to stdout; a closed pipe is not an error.
fn print_out(text: &str) -> CliResult<()> {
    let mut out = io::stdout().lock();
    match writeln!(out, "{text}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit_json(out: &Option<PathBuf>, value: &serde_json::Value) -> CliResult<()> {
    match out {
        Some(p) => write_json(p, value)?,
        None => print_out(&serde_json::to_string_pretty(value).expect("json value"))?,
    }
    Ok(())
}

fn read_spectrum(path: &Path) -> CliResult<JointSpectrum> {
    Ok(JointSpectrum::read_csv(File::open(path)?)?)
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    match cli.command {
        Command::Preset { name, out, nodes } => {
            let p = preset_with(&name, nodes)?;
            match out {
                Some(path) => write_profile(&path, &p)?,
                None => {
                    let text = serde_json::to_string_pretty(&ProfileJson::from_profile(&p))
                        .expect("profile json");
                    print_out(&text)?;
                }
            }
        }
        Command::Spectrum {
            profile,
            lambda_max,
            out,
            normal_form,
        } => {
            let p = load_profile(&profile)?;
            if let Some(path) = normal_form {
                write_json(&path, &NormalForm::from_profile(&p)?.to_json())?;
            }
            spectrum(&p, lambda_max)?.write_csv(sink(&out)?)?;
        }
        Command::Oracle {
            profile,
            n_min,
            n_max,
            count,
            out,
        } => {
            if n_min > n_max || count == 0 {
                return Err(Failure::usage("need n-min ≤ n-max and count ≥ 1"));
            }
            let p = load_profile(&profile)?;
            let ns: Vec<i64> = (n_min..=n_max).collect();
            oracle_spectrum(&p, &ns, count)?.write_csv(sink(&out)?)?;
        }
        Command::Actions { profile, nodes, out } => {
            let p = load_profile(&profile)?;
            ActionChart::build(&p, nodes)?.write_csv(sink(&out)?)?;
        }
        Command::Lengths {
            profile,
            qmax,
            lmax,
            out,
        } => {
            let p = load_profile(&profile)?;
            match length_spectrum(&p, qmax, lmax)? {
                LengthSpectrum::Degenerate { reason } => {
                    eprintln!("degenerate: {reason}");
                    LengthSpectrum::Degenerate { reason }.write_csv(sink(&out)?)?;
                }
                ls => {
                    if let LengthSpectrum::Tori { simple: false, .. } = ls {
                        eprintln!("warning: length spectrum is not simple");
                    }
                    ls.write_csv(sink(&out)?)?;
                }
            }
        }
        Command::Trace {
            spectrum,
            sigma,
            cutoff,
            tmax,
            threshold,
            profile,
            qmax,
            tol,
            out,
        } => {
            let spec = read_spectrum(&spectrum)?;
            let cutoff = match cutoff {
                Some(c) => c,
                None => {
                    let top = spec
                        .lambda_max
                        .unwrap_or_else(|| spec.entries.iter().map(|e| e.lambda).fold(0.0, f64::max));
                    top.sqrt() / (1.0 + 4.0 * sigma) * (1.0 - 1e-9)
                }
            };
            let sig = smoothed_trace(&spec, cutoff, sigma, tmax)?;
            if let Some(path) = &out {
                sig.write_csv(BufWriter::new(File::create(path)?))?;
            }
            let peaks = detect_singularities(&sig, threshold);
            let lengths = match profile {
                Some(arg) => length_spectrum(&load_profile(&arg)?, qmax, tmax + 1.0)?,
                None => LengthSpectrum::Degenerate {
                    reason: "no profile given".into(),
                },
            };
            let report = singularity_report(&peaks, &lengths, tol);
            let value = json!({
                "format": "revspec-trace-v1",
                "cutoff": cutoff,
                "sigma": sigma,
                "singularities": report,
            });
            emit_json(&None, &value)?;
        }
        Command::Reconstruct { input, out, family } => {
            let is_json = input.extension().is_some_and(|e| e == "json");
            let (data, nf) = if is_json {
                let nf = NormalForm::from_json(&read_json::<NormalFormJson>(&input)?)?;
                (SpectralData::NormalForm(nf.clone()), Some(nf))
            } else {
                (SpectralData::Spectrum(read_spectrum(&input)?), None)
            };
            if let Some(dim) = family {
                if dim == 0 || dim > MAX_FAMILY_DIM {
                    return Err(Failure::usage(format!("--family must be 1..={MAX_FAMILY_DIM}")));
                }
                let nf = match (nf, &data) {
                    (Some(nf), _) => nf,
                    (None, SpectralData::Spectrum(s)) => {
                        revspec::inverse::fit_normal_form(s)?.normal_form
                    }
                    _ => unreachable!(),
                };
                let fit = reconstruct_fit(&FitTarget::from_normal_form(&nf, 24, true), dim)?;
                let value = json!({
                    "format": "revspec-fit-v1",
                    "q": fit.params,
                    "residual_norm": fit.residual_norm,
                    "iterations": fit.iterations,
                    "singular_values": fit.singular_values,
                    "flatness_ratio": fit.flatness_ratio,
                    "flat_direction": fit.flat_direction,
                });
                emit_json(&out, &value)?;
                return Ok(ExitCode::SUCCESS);
            }
            let result = reconstruct(&data)?;
            let mut value = serde_json::to_value(result.to_json()).expect("result json");
            value["format"] = json!("revspec-reconstruction-v1");
            value["profile_format"] = json!(PROFILE_FORMAT);
            if let Some(path) = &out {
                write_profile(&path.with_extension("profile.json"), &result.profile)?;
            }
            for f in &result.flags {
                eprintln!("flag: {f}");
            }
            emit_json(&out, &value)?;
        }
        Command::Roundtrip {
            profile,
            tol,
            lambda_max,
            out,
        } => {
            let p = load_profile(&profile)?;
            let spec = spectrum(&p, lambda_max)?;
            let result = reconstruct(&SpectralData::Spectrum(spec))?;
            let distance = isometry_distance(&p, &result.profile);
            let pass = distance <= tol;
            let value = json!({
                "format": "revspec-roundtrip-v1",
                "profile": p.besse().tag,
                "lambda_max": lambda_max,
                "isometry_distance": distance,
                "tol": tol,
                "pass": pass,
                "flags": result.flags,
            });
            emit_json(&out, &value)?;
            eprintln!(
                "{}: isometry distance {distance:.3e} (tol {tol:.1e})",
                if pass { "PASS" } else { "FAIL" }
            );
            if !pass {
                return Ok(ExitCode::from(NUMERIC));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn configure_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("REVSPEC_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::usage(format!("REVSPEC_THREADS must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::usage(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|_| run(cli)) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
