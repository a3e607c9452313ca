//! `sepgamma` — separability certification from the command line.
//!
//! Subcommands: `gen` (state files), `bounds` (cross-norm bracket),
//! `certify` (full certificate with evidence), `sweep` (parameter grids to
//! CSV), `selftest` (built-in invariant suite).
//!
//! Exit codes carry operational status only: 0 success, 2 invalid input,
//! 3 numeric failure (1 for a failed selftest). Verdicts live in the
//! output files.

mod io;
mod selftest;
mod verify;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sepgamma::baselines::ppt_check;
use sepgamma::bipartite::BipartiteDims;
use sepgamma::crossnorm::{
    certify, lower_bound_realignment, lower_bound_witness, upper_bound_search,
    ElementaryDecomposition, LowerBoundMethod, SearchConfig,
};
use sepgamma::states::{
    max_entangled, random_state, werner, DensityOperator, RandomKind, RandomSpec,
};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "sepgamma",
    version,
    about = "Separability certificates from cross-norm bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a state file from a named family.
    Gen {
        #[arg(value_enum)]
        family: Family,
        /// Werner mixing parameter in [0, 1].
        #[arg(long)]
        p: Option<f64>,
        /// Local dimension for max_entangled.
        #[arg(long)]
        d: Option<usize>,
        /// Random family kind.
        #[arg(long, value_enum)]
        kind: Option<GenKind>,
        /// Term count for random separable states.
        #[arg(long, default_value_t = 4)]
        k: usize,
        /// Rank for random mixed states (defaults to full).
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, default_value_t = 2)]
        d1: usize,
        #[arg(long, default_value_t = 2)]
        d2: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the separable provenance (random separable only).
        #[arg(long)]
        dec_out: Option<PathBuf>,
    },
    /// Lower and upper cross-norm bounds for a state file, as JSON on stdout.
    Bounds {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Full certification; writes a certificate file.
    Certify {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// Separable decomposition file to seed the search.
        #[arg(long)]
        seed_dec: Option<PathBuf>,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Re-read the written files and re-check the evidence.
        #[arg(long)]
        verify: bool,
    },
    /// Certify a one-parameter family over a grid; writes CSV.
    Sweep {
        #[arg(value_enum)]
        family: SweepFamily,
        /// Grid range as LO:HI.
        #[arg(long)]
        param_range: String,
        #[arg(long)]
        steps: usize,
        #[command(flatten)]
        config: ConfigArgs,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in invariant suite.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Werner,
    Bell,
    MaxEntangled,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Pure,
    MixedHs,
    Separable,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepFamily {
    Werner,
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(long, default_value_t = 16)]
    restarts: usize,
    #[arg(long, default_value_t = 2000)]
    max_iters: usize,
    #[arg(long, default_value_t = 0.1)]
    step_init: f64,
    #[arg(long, default_value_t = 0.5)]
    step_shrink: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    rank_padding: usize,
    #[arg(long, default_value_t = 1e-6)]
    entangled_tol: f64,
    #[arg(long, default_value_t = 1e-3)]
    sep_tol: f64,
    #[arg(long, default_value_t = 1e-4)]
    sep_reconstruction_tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    convergence_tol: f64,
}

impl ConfigArgs {
    fn to_config(&self) -> SearchConfig {
        SearchConfig {
            restarts: self.restarts,
            max_iters: self.max_iters,
            step_init: self.step_init,
            step_shrink: self.step_shrink,
            seed: self.seed,
            rank_padding: self.rank_padding,
            entangled_tol: self.entangled_tol,
            sep_tol: self.sep_tol,
            sep_reconstruction_tol: self.sep_reconstruction_tol,
            convergence_tol: self.convergence_tol,
        }
    }
}

/// Operational failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn numeric(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    if let Err(failure) = configure_thread_pool() {
        eprintln!("error: {}", failure.message);
        return ExitCode::from(failure.code);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

/// SEPGAMMA_THREADS caps the restart pool; results do not depend on it.
fn configure_thread_pool() -> Result<(), Failure> {
    if let Ok(raw) = std::env::var("SEPGAMMA_THREADS") {
        let threads: usize = raw.parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
            Failure::input(format!(
                "SEPGAMMA_THREADS must be a positive integer, got \"{raw}\""
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::numeric(format!("thread pool setup failed: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::Gen {
            family,
            p,
            d,
            kind,
            k,
            rank,
            d1,
            d2,
            seed,
            out,
            dec_out,
        } => cmd_gen(family, p, d, kind, k, rank, d1, d2, seed, out, dec_out),
        Command::Bounds { input, config } => cmd_bounds(&input, &config.to_config()),
        Command::Certify {
            input,
            config,
            seed_dec,
            out,
            verify,
        } => cmd_certify(
            &input,
            &config.to_config(),
            seed_dec.as_deref(),
            out.as_deref(),
            verify,
        ),
        Command::Sweep {
            family,
            param_range,
            steps,
            config,
            out,
        } => cmd_sweep(
            family,
            &param_range,
            steps,
            &config.to_config(),
            out.as_deref(),
        ),
        Command::Selftest { seed } => Ok(if selftest::run(seed) {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(1)
        }),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen(
    family: Family,
    p: Option<f64>,
    d: Option<usize>,
    kind: Option<GenKind>,
    k: usize,
    rank: Option<usize>,
    d1: usize,
    d2: usize,
    seed: u64,
    out: Option<PathBuf>,
    dec_out: Option<PathBuf>,
) -> Result<ExitCode, Failure> {
    let rho: DensityOperator = match family {
        Family::Werner => {
            let p = p.ok_or_else(|| Failure::input("gen werner requires --p"))?;
            werner(p).map_err(|e| Failure::input(e.to_string()))?
        }
        Family::Bell => max_entangled(2).expect("d = 2 is valid"),
        Family::MaxEntangled => {
            let d = d.unwrap_or(2);
            max_entangled(d).map_err(|e| Failure::input(e.to_string()))?
        }
        Family::Random => {
            let dims = BipartiteDims::new(d1, d2).map_err(|e| Failure::input(e.to_string()))?;
            let kind = kind.ok_or_else(|| Failure::input("gen random requires --kind"))?;
            let kind = match kind {
                GenKind::Pure => RandomKind::Pure,
                GenKind::MixedHs => RandomKind::MixedHs {
                    rank: rank.unwrap_or(dims.total()),
                },
                GenKind::Separable => RandomKind::Separable { terms: k },
            };
            random_state(RandomSpec { seed, kind }, dims)
                .map_err(|e| Failure::input(e.to_string()))?
        }
    };

    if let Some(path) = dec_out {
        let dec = rho.provenance().ok_or_else(|| {
            Failure::input("--dec-out is only available for gen random --kind separable")
        })?;
        let file = io::SeedDecompositionFile::from_decomposition(dec);
        write_output(Some(&path), &io::to_pretty_json(&file))?;
    }

    let file = io::StateFile::from_state(&rho);
    write_output(out.as_deref(), &io::to_pretty_json(&file))?;
    Ok(ExitCode::SUCCESS)
}

fn read_state(path: &Path) -> Result<DensityOperator, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let file: io::StateFile = serde_json::from_str(&text)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    file.into_state()
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn cmd_bounds(input: &Path, config: &SearchConfig) -> Result<ExitCode, Failure> {
    config
        .validate()
        .map_err(|e| Failure::input(e.to_string()))?;
    let rho = read_state(input)?;
    let (lower_realign, spectrum) = lower_bound_realignment(&rho);
    let witness = lower_bound_witness(&rho, config);
    let (gamma_lower, method) = if witness.value > lower_realign {
        (witness.value, LowerBoundMethod::Witness)
    } else {
        (lower_realign, LowerBoundMethod::Realignment)
    };
    let search =
        upper_bound_search(&rho, config, None).map_err(|e| Failure::numeric(e.to_string()))?;
    let output = io::BoundsOutput {
        gamma_lower,
        gamma_upper: search.cost,
        lower_method: method.as_str().into(),
        spectrum,
    };
    print!("{}", io::to_pretty_json(&output));
    Ok(ExitCode::SUCCESS)
}

fn cmd_certify(
    input: &Path,
    config: &SearchConfig,
    seed_dec: Option<&Path>,
    out: Option<&Path>,
    verify: bool,
) -> Result<ExitCode, Failure> {
    config
        .validate()
        .map_err(|e| Failure::input(e.to_string()))?;
    if verify && out.is_none() {
        return Err(Failure::input("--verify requires --out"));
    }
    let rho = read_state(input)?;
    let seed = match seed_dec {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
            let file: io::SeedDecompositionFile = serde_json::from_str(&text)
                .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            let dec = file
                .into_decomposition()
                .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            if dec.dims() != rho.dims() {
                return Err(Failure::input(format!(
                    "{}: seed decomposition dims ({}, {}) do not match the state",
                    path.display(),
                    dec.dims().d1(),
                    dec.dims().d2()
                )));
            }
            let elementary = ElementaryDecomposition::from_separable(&dec);
            let gap = sepgamma::linalg::trace_norm(
                &(&sepgamma::crossnorm::reconstruct(&elementary) - rho.matrix()),
            )
            .map_err(|e| Failure::numeric(e.to_string()))?;
            if gap > 1e-8 {
                return Err(Failure::input(format!(
                    "{}: seed decomposition does not reconstruct the state (trace-norm gap {gap:.3e})",
                    path.display()
                )));
            }
            Some(elementary)
        }
        None => None,
    };

    let cert = certify(&rho, config, seed.as_ref()).map_err(|e| match e {
        sepgamma::Error::SeedMismatch { .. } | sepgamma::Error::DimensionMismatch { .. } => {
            Failure::input(e.to_string())
        }
        other => Failure::numeric(other.to_string()),
    })?;
    let file = io::CertificateFile::from_certificate(&cert, config);
    write_output(out, &io::to_pretty_json(&file))?;

    if verify {
        let out = out.expect("checked above");
        let text = std::fs::read_to_string(out)
            .map_err(|e| Failure::numeric(format!("cannot re-read {}: {e}", out.display())))?;
        let reread: io::CertificateFile = serde_json::from_str(&text)
            .map_err(|e| Failure::numeric(format!("{}: {e}", out.display())))?;
        let rho_again = read_state(input)?;
        verify::verify_certificate(&reread, &rho_again)
            .map_err(|e| Failure::numeric(format!("certificate verification failed: {e}")))?;
        eprintln!("verification: OK ({})", file.verdict);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(
    family: SweepFamily,
    param_range: &str,
    steps: usize,
    config: &SearchConfig,
    out: Option<&Path>,
) -> Result<ExitCode, Failure> {
    config
        .validate()
        .map_err(|e| Failure::input(e.to_string()))?;
    let SweepFamily::Werner = family;
    let (lo, hi) = parse_range(param_range)?;
    if steps == 0 {
        return Err(Failure::input("--steps must be positive"));
    }
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
        return Err(Failure::input(format!(
            "werner sweep needs 0 <= lo <= hi <= 1, got {lo}:{hi}"
        )));
    }

    let mut csv =
        String::from("param,gamma_lower,gamma_upper,measure_lo,measure_hi,ppt_min_eig,verdict\n");
    for i in 0..steps {
        let p = if steps == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (steps - 1) as f64
        };
        let rho = werner(p).map_err(|e| Failure::input(e.to_string()))?;
        let cert = certify(&rho, config, None).map_err(|e| Failure::numeric(e.to_string()))?;
        let ppt = ppt_check(&rho, 1e-9);
        let upper = cert.bounds.upper.map(|u| u.to_string()).unwrap_or_default();
        let measure_hi = cert
            .bounds
            .upper
            .map(|u| (u - 1.0).to_string())
            .unwrap_or_default();
        writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            p,
            cert.bounds.lower,
            upper,
            cert.bounds.lower - 1.0,
            measure_hi,
            ppt.min_eigenvalue,
            cert.verdict.as_str()
        )
        .expect("writing to a string cannot fail");
    }
    write_output(out, &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn parse_range(raw: &str) -> Result<(f64, f64), Failure> {
    let (lo, hi) = raw
        .split_once(':')
        .ok_or_else(|| Failure::input(format!("--param-range must be LO:HI, got \"{raw}\"")))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Failure::input(format!("invalid number \"{s}\" in --param-range")))
    };
    Ok((parse(lo)?, parse(hi)?))
}

fn write_output(path: Option<&Path>, contents: &str) -> Result<(), Failure> {
    match path {
        Some(path) => std::fs::write(path, contents)
            .map_err(|e| Failure::numeric(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}
