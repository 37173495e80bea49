//! Command-line front end: `detect`, `simulate`, `compare`, `generate` and
//! `report`.
//!
//! Detector parameters come from, in order of precedence, command-line flags,
//! a JSON `--config` file, and the built-in defaults. The seed additionally
//! falls back to `HIDETIFY_SEED` when neither a flag nor the config file sets
//! it.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::detector::Detector;
use crate::downstream::{
    compare_pipelines, read_records, simulate_detection, summarize, write_records, write_summary,
    CompareConfig, Method, SimulationConfig,
};
use crate::error::{HidetifyError, Result};
use crate::io::{
    export_sample, metadata_path, read_dataset_file, report_records, write_report, ResponseSelector,
};
use crate::ramm::RammParams;
use crate::simgen::{contaminate, generate_clean, ContaminationModel, ContaminationSpec};
use crate::stats::ExpectileSequence;

pub const SEED_ENV: &str = "HIDETIFY_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "hidetify",
    version,
    about = "Influential observation detection for high-dimensional regression"
)]
struct Cli {
    /// Worker threads; 0 uses every available core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Flag influential rows of a CSV dataset.
    Detect(DetectArgs),
    /// Benchmark detectors on simulated contaminated data.
    Simulate(SimulateArgs),
    /// Compare lasso fits on raw and cleaned simulated data.
    Compare(CompareArgs),
    /// Write one simulated dataset and its ground-truth sidecar.
    Generate(GenerateArgs),
    /// Summarise a long-format results file.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct ParamArgs {
    /// JSON file with detector parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated expectile levels.
    #[arg(long)]
    taus: Option<ExpectileSequence>,
    /// Random subsets per tested row.
    #[arg(long)]
    m: Option<usize>,
    /// Subset size (default: half the rows).
    #[arg(long)]
    nk: Option<usize>,
    /// Cap on rows one Min step may flag, as a fraction of n.
    #[arg(long)]
    omega: Option<f64>,
    /// Significance level of the Min step.
    #[arg(long)]
    alpha_min: Option<f64>,
    /// Significance level of the Max step.
    #[arg(long)]
    alpha_max: Option<f64>,
    /// Significance level of the validation test.
    #[arg(long)]
    alpha_valid: Option<f64>,
    /// Maximum outer iterations of the multiple-deletion loop.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Random seed; falls back to the config file, then HIDETIFY_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct DetectArgs {
    /// Dataset CSV with a header row.
    #[arg(long)]
    input: PathBuf,
    /// Response column name or 0-based index.
    #[arg(long, default_value = "y")]
    response: String,
    /// asymMIP, MIP, asymHIM or HIM.
    #[arg(long, default_value = "asymMIP")]
    detector: Detector,
    /// Remove constant predictor columns instead of failing.
    #[arg(long)]
    drop_degenerate: bool,
    /// Report CSV; metadata goes next to it as `<stem>.meta.json`.
    /// Without it the report is written to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record the wall-clock time in the metadata file.
    #[arg(long)]
    timestamp: bool,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    #[arg(long, default_value = "I")]
    model: ContaminationModel,
    #[arg(long, default_value_t = 10.0)]
    mu: f64,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 300)]
    p: usize,
    /// Share of contaminated rows.
    #[arg(long, default_value_t = 0.15)]
    fraction: f64,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, default_value_t = 10)]
    replications: usize,
    /// Comma-separated detectors.
    #[arg(long, value_delimiter = ',', default_value = "asymMIP,MIP,asymHIM,HIM")]
    detectors: Vec<Detector>,
    /// Long-format results CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, default_value_t = 10)]
    replications: usize,
    /// Comma-separated methods; `RawData` fits on the uncleaned sample.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "RawData,asymMIP,MIP,asymHIM,HIM"
    )]
    methods: Vec<Method>,
    /// Cross-validation folds for choosing lambda.
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Size of the log-spaced lambda grid.
    #[arg(long, default_value_t = 30)]
    n_lambda: usize,
    /// Smallest grid value as a fraction of the largest.
    #[arg(long, default_value_t = 0.01)]
    lambda_ratio: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    /// Dataset CSV; the sidecar is written as `<stem>.truth.txt`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Long-format results CSV from `simulate` or `compare`.
    #[arg(long)]
    input: PathBuf,
    /// Summary CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ParamArgs {
    fn resolve(&self) -> Result<RammParams> {
        let env_seed = match std::env::var(SEED_ENV) {
            Ok(s) => Some(s.trim().parse::<u64>().map_err(|_| {
                HidetifyError::InvalidParameter(format!(
                    "{SEED_ENV}={s:?} is not an unsigned integer"
                ))
            })?),
            Err(_) => None,
        };
        let config = match &self.config {
            Some(path) => Some(std::fs::read_to_string(path)?),
            None => None,
        };
        self.resolve_with(config.as_deref(), env_seed)
    }

    fn resolve_with(&self, config: Option<&str>, env_seed: Option<u64>) -> Result<RammParams> {
        let (mut params, config_seed) = match config {
            Some(text) => {
                let value: serde_json::Value = serde_json::from_str(text)?;
                let has_seed = value.get("seed").is_some();
                let params: RammParams = serde_json::from_value(value)?;
                let seed = has_seed.then_some(params.seed);
                (params, seed)
            }
            None => (RammParams::default(), None),
        };
        if let Some(taus) = &self.taus {
            params.taus = taus.clone();
        }
        if let Some(m) = self.m {
            params.m = m;
        }
        if let Some(nk) = self.nk {
            params.n_k = Some(nk);
        }
        if let Some(v) = self.omega {
            params.omega = v;
        }
        if let Some(v) = self.alpha_min {
            params.alpha_min = v;
        }
        if let Some(v) = self.alpha_max {
            params.alpha_max = v;
        }
        if let Some(v) = self.alpha_valid {
            params.alpha_valid = v;
        }
        if let Some(v) = self.max_iters {
            params.max_outer_iters = v;
        }
        params.seed = self.seed.or(config_seed).or(env_seed).unwrap_or(0);
        Ok(params)
    }
}

impl ScenarioArgs {
    fn spec(&self, seed: u64) -> ContaminationSpec {
        ContaminationSpec {
            model: self.model,
            mu: self.mu,
            fraction: self.fraction,
            seed,
        }
    }
}

#[derive(Debug, Serialize)]
struct RunMetadata<'a> {
    tool: &'static str,
    version: &'static str,
    detector: &'static str,
    input: String,
    response: &'a str,
    n: usize,
    p: usize,
    dropped_columns: &'a [String],
    params: &'a RammParams,
    iterations_used: usize,
    /// 1-based row numbers.
    influential: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    created_unix_seconds: Option<u64>,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn detect(args: &DetectArgs) -> Result<()> {
    let params = args.params.resolve()?;
    let response = ResponseSelector::Name(args.response.clone());
    let loaded = read_dataset_file(&args.input, &response, args.drop_degenerate)?;
    for name in &loaded.dropped {
        eprintln!("warning: dropped constant column {name:?}");
    }
    let data = &loaded.data;
    let result = args.detector.run(data, &params).inspect_err(|e| {
        if let HidetifyError::DegenerateColumn {
            column: Some(j), ..
        } = e
        {
            eprintln!(
                "note: column {j} is {:?} in the input",
                loaded.predictor_names[*j]
            );
        }
    })?;
    let records = report_records(&result, data.n());
    let mut out = output(args.out.as_deref())?;
    write_report(&mut out, &records)?;
    out.flush()?;
    if let Some(path) = &args.out {
        let meta = RunMetadata {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            detector: args.detector.name(),
            input: args.input.display().to_string(),
            response: &loaded.response_name,
            n: data.n(),
            p: data.p(),
            dropped_columns: &loaded.dropped,
            params: &args.detector.effective_params(&params),
            iterations_used: result.iterations_used,
            influential: result.influential.iter().map(|i| i + 1).collect(),
            created_unix_seconds: args.timestamp.then(|| {
                SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map_or(0, |d| d.as_secs())
            }),
        };
        let mut f = BufWriter::new(File::create(metadata_path(path))?);
        serde_json::to_writer_pretty(&mut f, &meta)?;
        writeln!(f)?;
        f.flush()?;
    }
    eprintln!(
        "{}: {} of {} rows influential",
        args.detector,
        result.influential.len(),
        data.n()
    );
    Ok(())
}

fn simulation(
    scenario: &ScenarioArgs,
    replications: usize,
    params: RammParams,
) -> SimulationConfig {
    SimulationConfig {
        n: scenario.n,
        p: scenario.p,
        contamination: scenario.spec(params.seed),
        replications,
        seed: params.seed,
        params,
    }
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let params = args.params.resolve()?;
    let config = simulation(&args.scenario, args.replications, params);
    let records = simulate_detection(&config, &args.detectors)?;
    let mut out = output(args.out.as_deref())?;
    write_records(&mut out, &records)?;
    out.flush()?;
    Ok(())
}

fn compare(args: &CompareArgs) -> Result<()> {
    let params = args.params.resolve()?;
    let mut config = CompareConfig::new(
        simulation(&args.scenario, args.replications, params),
        args.methods.clone(),
    );
    config.folds = args.folds;
    config.n_lambda = args.n_lambda;
    config.lambda_ratio = args.lambda_ratio;
    let records = compare_pipelines(&config)?;
    let mut out = output(args.out.as_deref())?;
    write_records(&mut out, &records)?;
    out.flush()?;
    Ok(())
}

fn generate(args: &GenerateArgs) -> Result<()> {
    let spec = args.scenario.spec(args.seed);
    spec.validate()?;
    let clean = generate_clean(args.scenario.n, args.scenario.p, args.seed)?;
    let sample = contaminate(&clean, &spec)?;
    let sidecar = export_sample(&args.out, &sample)?;
    eprintln!(
        "wrote {} ({} contaminated rows listed in {})",
        args.out.display(),
        sample.truth.len(),
        sidecar.display()
    );
    Ok(())
}

fn report(args: &ReportArgs) -> Result<()> {
    let records = read_records(File::open(&args.input)?)?;
    let mut out = output(args.out.as_deref())?;
    write_summary(&mut out, &summarize(&records))?;
    out.flush()?;
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| HidetifyError::InvalidParameter(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Detect(a) => detect(a),
        Command::Simulate(a) => simulate(a),
        Command::Compare(a) => compare(a),
        Command::Generate(a) => generate(a),
        Command::Report(a) => report(a),
    })
}

/// Parse `args` (including the program name), run the command and return
/// the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
