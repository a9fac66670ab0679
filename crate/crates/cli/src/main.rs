//! `piclab` command-line front end. Every run writes one JSON report to
//! `--output` or stdout. Exit status: 0 success, 1 invalid input, 2
//! numerical failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use piclab::boolean::{
    additive_channel, additive_channel_pics, bsc_noise, conjecture_search, noise_spectrum, parity_membership_check,
    CONJECTURE_MAX_N,
};
use piclab::bounds::{
    adv_m_bound, advantage, chi2_uniform_bound, fano_mi_error_rate, map_error, maxcorr_bound, pem_bound_mi,
    pem_bound_rho, pem_exact, pic_fano_bound, MiClamp,
};
use piclab::dist::{chi_squared, empirical_joint, mutual_information, samples_from_csv, JointFile, JointPmf};
use piclab::oracle::{maxcorr_by_ace, pe_exhaustive, variational_pic};
use piclab::pic::{decompose, maximal_correlation};
use piclab::privacy::{analyze, curves_csv, funnel_estimate, PrivacyOptions, FUNNEL_RESTARTS};
use piclab::{Error, LogBase};

const MAX_TOL: f64 = 1e-3;
const ORACLE_ITERS: usize = 1_000_000;
const ORACLE_AGREEMENT: f64 = 1e-6;
const VARIATIONAL_MAX_ALPHABET: usize = 4;

#[derive(Debug, Parser)]
#[command(
    name = "piclab",
    version,
    about = "Principal inertia components and estimation bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Report destination; stdout when absent.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Logarithm base of information quantities: 2, e or 10.
    #[arg(long, global = true, default_value = "2")]
    base: LogBase,
    /// Numerical tolerance in (0, 1e-3].
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    /// Seed of every randomized routine.
    #[arg(long, global = true, default_value_t = 0x5EED)]
    seed: u64,
}

#[derive(Debug, Args)]
struct Source {
    /// Joint distribution in JSON.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Paired `x,y` samples in CSV, used instead of `--input`.
    #[arg(long, conflicts_with = "input")]
    samples: Option<PathBuf>,
    /// The samples file starts with a header row.
    #[arg(long, requires = "samples")]
    header: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// PIC decomposition of a joint.
    Decompose(Source),
    /// Lower bounds on the error of estimating X from Y.
    Bound {
        #[command(flatten)]
        source: Source,
        /// Every applicable bound rather than the PIC bound alone.
        #[arg(long)]
        all: bool,
        /// Bounds for functions of X onto M symbols.
        #[arg(long = "M")]
        big_m: Option<usize>,
    },
    /// Spectra of additive binary noise.
    Boolean {
        /// Number of coordinates of a memoryless BSC.
        #[arg(long, requires = "delta", conflicts_with = "input")]
        n: Option<usize>,
        /// Crossover probability of the BSC.
        #[arg(long, requires = "n")]
        delta: Option<f64>,
        /// Noise pmf as a JSON array of length 2^n.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Perfect privacy and the privacy funnel; rows of the joint are S.
    Privacy {
        #[command(flatten)]
        source: Source,
        /// Single disclosure level to optimize.
        #[arg(long)]
        t: Option<f64>,
        /// Writes the region curves as CSV.
        #[arg(long)]
        csv_curves: Option<PathBuf>,
        /// Restarts of the funnel search.
        #[arg(long, default_value_t = FUNNEL_RESTARTS)]
        restarts: usize,
    },
    /// Recomputes a decompose report and cross-checks it against the oracles.
    Verify {
        /// A decompose report or a plain joint file.
        #[arg(long)]
        input: PathBuf,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_numerical() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn load(source: &Source) -> Result<JointPmf<f64>, Failure> {
    match (&source.input, &source.samples) {
        (Some(path), None) => {
            let file: JointFile = serde_json::from_str(&read(path)?).map_err(Error::from)?;
            Ok(file.into_joint()?)
        }
        (None, Some(path)) => {
            let file = fs::File::open(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            let samples = samples_from_csv(file, source.header)?;
            Ok(empirical_joint::<f64, String, String>(&samples)?.joint)
        }
        _ => Err(invalid("one of --input or --samples is required")),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<Value, Failure> {
    serde_json::to_value(v).map_err(|e| Failure::from(Error::from(e)))
}

fn rows(j: &JointPmf<f64>) -> Vec<Vec<f64>> {
    (0..j.m()).map(|i| (0..j.n()).map(|k| j.get(i, k)).collect()).collect()
}

fn base_name(base: LogBase) -> &'static str {
    match base {
        LogBase::Two => "2",
        LogBase::E => "e",
        LogBase::Ten => "10",
    }
}

fn decompose_report(cli: &Cli, j: &JointPmf<f64>) -> Result<Value, Failure> {
    let dec = decompose(j, cli.tol)?;
    Ok(json!({
        "p": rows(j),
        "x_labels": j.x_labels(),
        "y_labels": j.y_labels(),
        "lambdas": dec.lambdas,
        "sigmas": dec.sigmas,
        "f": to_json(&dec.f)?,
        "g": to_json(&dec.g)?,
        "ties": dec.ties,
        "ill_conditioned": dec.ill_conditioned,
        "maximal_correlation": maximal_correlation(j)?,
        "chi_squared": chi_squared(j),
        "mutual_information": mutual_information(j, cli.base),
        "base": base_name(cli.base),
        "tol": cli.tol,
        "seed": cli.seed,
    }))
}

fn is_uniform(p: &[f64]) -> bool {
    let u = 1.0 / p.len() as f64;
    p.iter().all(|&v| (v - u).abs() <= 1e-12)
}

fn bound_report(cli: &Cli, j: &JointPmf<f64>, all: bool, big_m: Option<usize>) -> Result<Value, Failure> {
    let dec = decompose(j, cli.tol)?;
    let px = j.px();
    let mut bounds = vec![to_json(&pic_fano_bound(px, &dec.lambdas)?)?];
    let mi = mutual_information(j, cli.base);
    let rho = maximal_correlation(j)?;
    if all {
        bounds.push(to_json(&maxcorr_bound(px, rho)?)?);
        bounds.push(to_json(&fano_mi_error_rate(px, mi, cli.base)?)?);
        if is_uniform(px) {
            bounds.push(to_json(&chi2_uniform_bound(j.m(), chi_squared(j))?)?);
        }
    }
    let mut report = json!({
        "lambdas": dec.lambdas,
        "maximal_correlation": rho,
        "mutual_information": mi,
        "exact_map_error": map_error(j),
        "advantage": advantage(j),
        "bounds": bounds,
        "base": base_name(cli.base),
    });
    if let Some(m) = big_m {
        let exact = pem_exact(j, m)?;
        report["function_estimation"] = json!({
            "M": m,
            "pem_bound_rho": to_json(&pem_bound_rho(px, m, rho)?)?,
            "pem_bound_mi": to_json(&pem_bound_mi(px, m, mi, MiClamp::Max, cli.base)?)?,
            "adv_m_bound": adv_m_bound(rho, m)?,
            "exact": to_json(&exact)?,
        });
    }
    Ok(report)
}

fn boolean_report(n: Option<usize>, delta: Option<f64>, input: Option<&Path>) -> Result<Value, Failure> {
    let p_z: Vec<f64> = match (n, delta, input) {
        (Some(n), Some(d), None) => bsc_noise(n, d),
        (None, None, Some(path)) => serde_json::from_str(&read(path)?).map_err(Error::from)?,
        _ => return Err(invalid("give either --n with --delta, or --input")),
    };
    let spectrum = noise_spectrum(&p_z)?;
    let pics = additive_channel_pics(&p_z, true)?;
    let membership = parity_membership_check(&additive_channel(&p_z)?, 1e-9);
    let mut report = json!({
        "p_z": p_z,
        "spectrum": to_json(&spectrum)?,
        "pics": pics,
        "parity_membership": to_json(&membership)?,
    });
    if let (Some(n), Some(d)) = (n, delta) {
        if n <= CONJECTURE_MAX_N {
            report["conjecture"] = to_json(&conjecture_search(n, d)?)?;
        }
    }
    Ok(report)
}

fn privacy_report(
    cli: &Cli,
    j: &JointPmf<f64>,
    t: Option<f64>,
    csv_curves: Option<&Path>,
    restarts: usize,
) -> Result<Value, Failure> {
    let opts = PrivacyOptions {
        tol: cli.tol,
        base: cli.base,
        restarts,
        seed: cli.seed,
        estimate_curve: csv_curves.is_some(),
        ..PrivacyOptions::default()
    };
    let analysis = analyze(j, &opts)?;
    if let Some(path) = csv_curves {
        fs::write(path, curves_csv(&analysis.region)?).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    }
    let mut report = to_json(&analysis)?;
    if let Some(t) = t {
        report["funnel"] = to_json(&funnel_estimate(j, t, restarts, cli.seed, cli.base)?)?;
    }
    Ok(report)
}

fn check(value: f64, reference: f64, tol: f64) -> Value {
    json!({ "value": value, "reference": reference, "agree": (value - reference).abs() <= tol })
}

fn verify_report(cli: &Cli, path: &Path) -> Result<Value, Failure> {
    let report: Value = serde_json::from_str(&read(path)?).map_err(Error::from)?;
    let file: JointFile = serde_json::from_value(report.clone()).map_err(Error::from)?;
    let j: JointPmf<f64> = file.into_joint()?;
    let dec = decompose(&j, cli.tol)?;
    let lambdas_match = match report.get("lambdas") {
        Some(old) => {
            let old = serde_json::to_string(old).map_err(Error::from)?;
            let new = serde_json::to_string(&dec.lambdas).map_err(Error::from)?;
            if old != new {
                return Err(
                    Error::NumericalFailure(format!("recomputed lambdas {new} differ from report {old}")).into(),
                );
            }
            Some(true)
        }
        None => None,
    };
    let lambda1 = dec.lambdas.first().copied().unwrap_or(0.0);
    let ace = maxcorr_by_ace(&j, ORACLE_ITERS, cli.seed)?;
    let pe = pe_exhaustive(&j)?;
    let mut oracles = json!({
        "ace_maximal_correlation": check(ace.value, lambda1.sqrt(), ORACLE_AGREEMENT),
        "exhaustive_map_error": check(pe.value, map_error(&j), 1e-12),
    });
    if j.m().min(j.n()) >= 2 && j.m().max(j.n()) <= VARIATIONAL_MAX_ALPHABET {
        let v = variational_pic(&j, 1, 4, cli.seed)?;
        oracles["variational_lambda1"] = check(v.value, lambda1, ORACLE_AGREEMENT);
    }
    let agree = oracles
        .as_object()
        .map(|o| o.values().all(|v| v["agree"] == json!(true)))
        .unwrap_or(false);
    Ok(json!({
        "lambdas": dec.lambdas,
        "lambdas_match": lambdas_match,
        "oracles": oracles,
        "all_agree": agree,
    }))
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("PICLAB_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| invalid(format!("PICLAB_THREADS must be a positive integer, got `{v}`")))?;
        if n == 0 {
            return Err(invalid("PICLAB_THREADS must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| invalid(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<Value, Failure> {
    if !(cli.tol > 0.0 && cli.tol <= MAX_TOL) {
        return Err(invalid(format!("--tol must lie in (0, {MAX_TOL}], got {}", cli.tol)));
    }
    configure_threads()?;
    match &cli.command {
        Command::Decompose(source) => decompose_report(cli, &load(source)?),
        Command::Bound { source, all, big_m } => bound_report(cli, &load(source)?, *all, *big_m),
        Command::Boolean { n, delta, input } => boolean_report(*n, *delta, input.as_deref()),
        Command::Privacy {
            source,
            t,
            csv_curves,
            restarts,
        } => privacy_report(cli, &load(source)?, *t, csv_curves.as_deref(), *restarts),
        Command::Verify { input } => verify_report(cli, input),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli).and_then(|report| {
        let mut text = serde_json::to_string_pretty(&report).map_err(|e| Failure::from(Error::from(e)))?;
        text.push('\n');
        match &cli.output {
            Some(path) => fs::write(path, text).map_err(|e| invalid(format!("{}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("piclab: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
