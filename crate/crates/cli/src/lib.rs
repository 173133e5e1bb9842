//! Command-line front end for the `nwkernel` library.
//!
//! [`run`] parses arguments, dispatches to a subcommand and returns the
//! process exit code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | input error |
//! | 2 | PSD certificate failed |
//! | 3 | enumeration budget exceeded |

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nwkernel::io::{
    format_gram_csv, format_table_line, parse_histogram, parse_histograms, parse_matrix_csv,
    parse_permutation, parse_weight_file, HistogramRecords,
};
use nwkernel::psd::{PsdCertificate, DEFAULT_TOLERANCE};
use nwkernel::{
    build_gram, certify_psd, count_tables, enumerate_tables, nw_permuted, nw_table, ot_cost,
    psd_weight_check, EnumerationBudget, Error, GramMatrix, Histogram, KernelId, KernelSpec,
    PermutationSet, WeightSpec,
};

pub mod manifest;

use manifest::{to_json, CertificateRecord, KernelChoice, Manifest, RunConfig, WeightsMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_PSD_FAIL: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

pub const GRAM_FILE: &str = "gram.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const CERTIFICATE_FILE: &str = "certificate.json";
pub const TABLES_FILE: &str = "tables.csv";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{message}")]
    Budget { message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Budget { .. } => EXIT_BUDGET,
            CliError::Input(_) | CliError::Io { .. } => EXIT_INPUT,
        }
    }
}

fn is_budget(e: &Error) -> bool {
    match e {
        Error::BudgetExceeded { .. } => true,
        Error::Kernel { source, .. } | Error::Dataset { source, .. } => is_budget(source),
        _ => false,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if is_budget(&e) {
            CliError::Budget {
                message: e.to_string(),
            }
        } else {
            CliError::Input(e.to_string())
        }
    }
}

fn with_path(path: &Path, e: Error) -> CliError {
    let mapped = CliError::from(e);
    match mapped {
        CliError::Input(m) => CliError::Input(format!("{}: {m}", path.display())),
        other => other,
    }
}

pub(crate) fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Parser)]
#[command(
    name = "nwkernel",
    version,
    about = "Transportation polytope kernels on histograms"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gram matrix of a histogram dataset, with a PSD certificate.
    Gram(GramArgs),
    /// List every table of U(r, c).
    Enumerate(PairArgs),
    /// Print the Northwestern corner table of (r, c).
    Nw(NwArgs),
    /// Certify a Gram CSV or a weight matrix as PSD.
    PsdCheck(PsdArgs),
    /// Optimal transport cost and plan between r and c.
    Ot(OtArgs),
}

#[derive(Debug, Args)]
pub struct WeightArgs {
    /// Weight or cost matrix file.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Reading of the matrix entries when the file has no `mode:` header.
    #[arg(long, value_enum)]
    pub weights_mode: Option<WeightsMode>,
}

#[derive(Debug, Args)]
pub struct GramArgs {
    /// Histogram dataset, one histogram per line.
    #[arg(long, required_unless_present = "manifest")]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[arg(long, value_enum, default_value = "nw")]
    pub kernel: KernelChoice,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of sampled permutations |R| for the NW kernel.
    #[arg(long, default_value_t = 8)]
    pub r_size: usize,
    #[arg(long, default_value_t = EnumerationBudget::DEFAULT_MAX_TABLES)]
    pub budget: u64,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    /// Divide NW kernel values by |R|².
    #[arg(long)]
    pub normalize: bool,
    /// Replay the run recorded in this manifest.
    #[arg(long, conflicts_with_all = ["input", "weights", "weights_mode"])]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PairInput {
    /// File holding exactly two histograms, r then c.
    #[arg(long, conflicts_with_all = ["r", "c"])]
    pub input: Option<PathBuf>,
    /// Row histogram, e.g. `2,5,3`.
    #[arg(long, requires = "c")]
    pub r: Option<String>,
    /// Column histogram.
    #[arg(long, requires = "r")]
    pub c: Option<String>,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    #[command(flatten)]
    pub pair: PairInput,
    #[arg(long, default_value_t = EnumerationBudget::DEFAULT_MAX_TABLES)]
    pub budget: u64,
    /// Write `tables.csv` here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NwArgs {
    #[command(flatten)]
    pub pair: PairInput,
    /// Row permutation, 1-based, e.g. `3,1,2`.
    #[arg(long, requires = "sigma_prime")]
    pub sigma: Option<String>,
    /// Column permutation, 1-based.
    #[arg(long, requires = "sigma")]
    pub sigma_prime: Option<String>,
}

#[derive(Debug, Args)]
pub struct PsdArgs {
    /// Gram matrix CSV.
    #[arg(long, required_unless_present = "weights")]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    /// Write `certificate.json` here as well.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OtArgs {
    #[command(flatten)]
    pub pair: PairInput,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[arg(long, default_value_t = EnumerationBudget::DEFAULT_MAX_TABLES)]
    pub budget: u64,
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Gram(args) => {
            let config = gram_config(args)?;
            cmd_gram(&config, out)
        }
        Command::Enumerate(args) => cmd_enumerate(&args, out),
        Command::Nw(args) => cmd_nw(&args, out),
        Command::PsdCheck(args) => cmd_psd_check(&args, out),
        Command::Ot(args) => cmd_ot(&args, out),
    }
}

fn print(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        })
}

fn budget_of(max_tables: u64) -> Result<EnumerationBudget, CliError> {
    EnumerationBudget::new(max_tables).map_err(|e| CliError::Input(format!("--budget: {e}")))
}

fn load_weights(path: &Path, mode: Option<WeightsMode>) -> Result<WeightSpec, CliError> {
    let text = read_file(path)?;
    parse_weight_file(&text, mode.map(Into::into)).map_err(|e| with_path(path, e))
}

fn require_weights(w: &WeightArgs) -> Result<WeightSpec, CliError> {
    let path = w
        .weights
        .as_ref()
        .ok_or_else(|| CliError::Input("--weights is required".into()))?;
    load_weights(path, w.weights_mode)
}

fn gram_config(args: GramArgs) -> Result<RunConfig, CliError> {
    if let Some(path) = &args.manifest {
        let mut config = manifest::read_manifest(path)?.config;
        config.out = args.out;
        return Ok(config);
    }
    let input = args
        .input
        .expect("clap enforces --input without --manifest");
    let weights = args
        .weights
        .weights
        .ok_or_else(|| CliError::Input("--weights is required".into()))?;
    Ok(RunConfig {
        subcommand: "gram".into(),
        input,
        weights,
        weights_mode: args.weights.weights_mode,
        kernel: args.kernel,
        seed: args.seed,
        r_size: args.r_size,
        budget: args.budget,
        tolerance: args.tolerance,
        normalize: args.normalize,
        out: args.out,
    })
}

fn load_dataset(path: &Path) -> Result<HistogramRecords, CliError> {
    let text = read_file(path)?;
    let records = parse_histograms(&text).map_err(|e| with_path(path, e))?;
    if records.histograms.is_empty() {
        return Err(CliError::Input(format!(
            "{}: no histograms",
            path.display()
        )));
    }
    let first = &records.histograms[0];
    for (index, h) in records.histograms.iter().enumerate().skip(1) {
        let problem = if h.dim() != first.dim() {
            format!("dimension {} differs from {}", h.dim(), first.dim())
        } else if h.mass() != first.mass() {
            format!("total mass {} differs from {}", h.mass(), first.mass())
        } else {
            continue;
        };
        return Err(CliError::Input(format!(
            "{}: line {}: {problem}; kernels are only defined on a common \
             Σ_d^N (every histogram needs dimension d = {} and total mass N = {})",
            path.display(),
            records.line_of(index),
            first.dim(),
            first.mass(),
        )));
    }
    Ok(records)
}

/// Computes the Gram matrix, writes `gram.csv`, `certificate.json` and
/// `manifest.json` into `config.out`, and reports the verdict.
pub fn cmd_gram(config: &RunConfig, out: &mut dyn Write) -> Result<i32, CliError> {
    let records = load_dataset(&config.input)?;
    let histograms = &records.histograms;
    let d = histograms[0].dim();
    let weights = load_weights(&config.weights, config.weights_mode)?;
    if weights.dim() != d {
        return Err(CliError::Input(format!(
            "{}: weight matrix is {}×{} but histograms have dimension {d}",
            config.weights.display(),
            weights.dim(),
            weights.dim(),
        )));
    }
    let budget = budget_of(config.budget)?;
    let kernel = match config.kernel {
        KernelChoice::Volume => KernelSpec::Volume { weights, budget },
        KernelChoice::Pseudo => KernelSpec::Pseudo { weights, budget },
        KernelChoice::Nw => KernelSpec::Nw {
            weights,
            perms: PermutationSet::sample(d, config.r_size, config.seed)
                .map_err(|e| CliError::Input(format!("--r-size: {e}")))?,
            normalize: config.normalize,
        },
    };
    let gram = build_gram(histograms, &kernel)?;
    let certificate = certify_psd(&gram, config.tolerance)?;
    let record = CertificateRecord::from(&certificate);

    create_dir(&config.out)?;
    write_file(&config.out.join(GRAM_FILE), &format_gram_csv(&gram))?;
    write_file(&config.out.join(CERTIFICATE_FILE), &to_json(&record))?;
    let manifest = Manifest {
        kernel_id: gram.kernel_id().as_str().to_string(),
        dataset_hash: gram.dataset_hash().to_string(),
        histograms: histograms.len(),
        dimension: d,
        mass: histograms[0].mass(),
        config: config.clone(),
        certificate: record,
    };
    write_file(&config.out.join(MANIFEST_FILE), &to_json(&manifest))?;

    print(
        out,
        &format!(
            "kernel {} on {} histograms: λmin = {:e}, λmax = {:e}, {}\n",
            manifest.kernel_id,
            histograms.len(),
            certificate.min_eigenvalue,
            certificate.max_eigenvalue,
            certificate.verdict.as_str(),
        ),
    )?;
    Ok(verdict_code(&certificate))
}

fn verdict_code(c: &PsdCertificate) -> i32 {
    if c.passed() {
        EXIT_OK
    } else {
        EXIT_PSD_FAIL
    }
}

fn parse_inline(flag: &str, s: &str) -> Result<Histogram, CliError> {
    parse_histogram(s).map_err(|e| CliError::Input(format!("--{flag}: {e}")))
}

fn load_pair(pair: &PairInput) -> Result<(Histogram, Histogram), CliError> {
    match (&pair.input, &pair.r, &pair.c) {
        (Some(path), _, _) => {
            let text = read_file(path)?;
            let records = parse_histograms(&text).map_err(|e| with_path(path, e))?;
            match <[Histogram; 2]>::try_from(records.histograms) {
                Ok([r, c]) => Ok((r, c)),
                Err(v) => Err(CliError::Input(format!(
                    "{}: expected exactly two histograms (r then c), found {}",
                    path.display(),
                    v.len()
                ))),
            }
        }
        (None, Some(r), Some(c)) => Ok((parse_inline("r", r)?, parse_inline("c", c)?)),
        _ => Err(CliError::Input(
            "give either --input or both --r and --c".into(),
        )),
    }
}

/// Writes the table count as a `#` comment line, then one flattened table
/// per line.
pub fn cmd_enumerate(args: &PairArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (r, c) = load_pair(&args.pair)?;
    let budget = budget_of(args.budget)?;
    let count = count_tables(&r, &c)?;
    let mut text = format!("# count={count}\n");
    let mut stream = enumerate_tables(&r, &c, budget)?;
    let mut overflow = None;
    for x in stream.by_ref() {
        match x {
            Ok(x) => {
                text.push_str(&format_table_line(&x));
                text.push('\n');
            }
            Err(e) => {
                overflow = Some(e);
                break;
            }
        }
    }
    match &args.out {
        Some(dir) => {
            create_dir(dir)?;
            write_file(&dir.join(TABLES_FILE), &text)?;
        }
        None => print(out, &text)?,
    }
    match overflow {
        Some(e) => Err(CliError::Budget {
            message: format!(
                "{e}: wrote {} of {count} tables",
                stream.yielded().min(budget.max_tables())
            ),
        }),
        None => Ok(EXIT_OK),
    }
}

fn parse_perm(flag: &str, s: &str) -> Result<nwkernel::Permutation, CliError> {
    parse_permutation(s).map_err(|e| CliError::Input(format!("--{flag}: {e}")))
}

/// Prints `nw_table(r, c)`, or `nw_permuted` when both permutations are given.
pub fn cmd_nw(args: &NwArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (r, c) = load_pair(&args.pair)?;
    let table = match (&args.sigma, &args.sigma_prime) {
        (Some(s), Some(sp)) => nw_permuted(
            &r,
            &c,
            &parse_perm("sigma", s)?,
            &parse_perm("sigma-prime", sp)?,
        )?,
        _ => nw_table(&r, &c)?,
    };
    print(out, &format!("{table}\n"))?;
    Ok(EXIT_OK)
}

/// Certifies a Gram CSV (`--input`) or a weight matrix (`--weights`).
pub fn cmd_psd_check(args: &PsdArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let certificate = match &args.input {
        Some(path) => {
            let text = read_file(path)?;
            let (n, values) = parse_matrix_csv(&text).map_err(|e| with_path(path, e))?;
            let gram = GramMatrix::new(n, values, KernelId::Oracle, String::new())
                .map_err(|e| with_path(path, e))?;
            certify_psd(&gram, args.tolerance)?
        }
        None => {
            let w = require_weights(&args.weights)?;
            let c = psd_weight_check(&w)?;
            PsdCertificate::from_eigenvalues(c.min_eigenvalue, c.max_eigenvalue, args.tolerance)
        }
    };
    let json = to_json(&CertificateRecord::from(&certificate));
    if let Some(dir) = &args.out {
        create_dir(dir)?;
        write_file(&dir.join(CERTIFICATE_FILE), &json)?;
    }
    print(out, &json)?;
    Ok(verdict_code(&certificate))
}

/// Prints the optimal cost `d_M(r, c)` and a minimizing plan.
pub fn cmd_ot(args: &OtArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (r, c) = load_pair(&args.pair)?;
    let w = require_weights(&args.weights)?;
    let solution = ot_cost(&r, &c, &w, budget_of(args.budget)?)?;
    print(
        out,
        &format!("cost {}\nplan {}\n", solution.cost + 0.0, solution.plan),
    )?;
    Ok(EXIT_OK)
}
