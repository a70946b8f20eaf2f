//! `sdc` subcommands.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sdc_core::dataset::write_csv;
use sdc_core::metrics::score;
use sdc_core::{
    inject_mar, load_csv, AutoThresholds, ClusterPartition, CsvOptions, MissingDataset, SdcError,
    SdcOptions, SdcRun,
};
use tokio::net::TcpListener;
use tracing::info;
use tracing_subscriber::EnvFilter;

use crate::labels::{read_labels, write_labels};
use crate::service::{self, AppState, SessionStatus};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "sdc", version, about = "Parameter-free clustering for data with missing values")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster a CSV file and write `object_id,cluster_id` labels.
    Cluster(ClusterArgs),
    /// Remove cells at random from a complete CSV file.
    Inject(InjectArgs),
    /// Score predicted labels against ground truth.
    Eval(EvalArgs),
    /// Run the HTTP session service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CsvArgs {
    /// Cell text that marks a missing value (empty cells are always missing).
    #[arg(long, default_value = "")]
    pub missing_marker: String,
    /// First row is a header.
    #[arg(long)]
    pub header: bool,
    /// Ground-truth column, by header name or zero-based index.
    #[arg(long)]
    pub label_column: Option<String>,
}

impl CsvArgs {
    fn options(&self) -> CsvOptions {
        CsvOptions {
            missing_marker: self.missing_marker.clone(),
            has_header: self.header,
            label_column: self.label_column.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Cut every dimension at the detected valleys.
    Auto,
    /// Serve the decision graphs and wait for cuts from a browser.
    Interactive,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub csv: CsvArgs,
    #[arg(long, value_enum, default_value_t = Mode::Auto)]
    pub mode: Mode,
    /// Keep raw feature scales.
    #[arg(long)]
    pub no_normalize: bool,
    /// Skip boundary contraction.
    #[arg(long)]
    pub no_enhance: bool,
    /// Label file to write; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write each decision graph as `dim_<k>.json` (k from 1).
    #[arg(long)]
    pub graphs_dir: Option<PathBuf>,
    #[command(flatten)]
    pub listen: ListenArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ListenArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Directory of static files served next to the API.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InjectArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub csv: CsvArgs,
    /// Fraction of cells to remove, in [0, 1).
    #[arg(long)]
    pub rate: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// `object_id,cluster_id` file.
    #[arg(long)]
    pub pred: PathBuf,
    /// `object_id,label` file.
    #[arg(long)]
    pub truth: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub listen: ListenArgs,
    /// Idle seconds before a session is dropped.
    #[arg(long, default_value_t = service::DEFAULT_SESSION_TTL.as_secs())]
    pub session_ttl: u64,
}

fn output_writer(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn runtime() -> Result<tokio::runtime::Runtime, CliError> {
    Ok(tokio::runtime::Builder::new_multi_thread().enable_all().build()?)
}

fn write_graphs(run: &SdcRun, dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    for g in run.graphs() {
        fs::write(dir.join(format!("dim_{}.json", g.dim + 1)), g.to_json())?;
    }
    Ok(())
}

fn report_scores(ds: &MissingDataset, partition: &ClusterPartition) -> Result<(), CliError> {
    let Some(truth) = ds.truth_labels() else {
        return Ok(());
    };
    let pred = partition.dense_labels(ds.object_count())?;
    let scores = score(&pred, truth)?;
    eprintln!("{}", serde_json::to_string(&scores)?);
    Ok(())
}

fn cluster(args: ClusterArgs) -> Result<(), CliError> {
    let ds = load_csv(&args.input, &args.csv.options())?;
    info!(objects = ds.object_count(), dims = ds.dim_count(), "loaded");
    let opts = SdcOptions {
        normalize: !args.no_normalize,
        enhance: !args.no_enhance,
    };
    let mut run = SdcRun::new(&ds, opts)?;
    if let Some(dir) = &args.graphs_dir {
        write_graphs(&run, dir)?;
    }
    let partition = match args.mode {
        Mode::Auto => {
            run.run_to_end(&mut AutoThresholds)?;
            run.into_result()?.partition
        }
        Mode::Interactive => runtime()?.block_on(interactive(run, &args.listen))?,
    };
    write_labels(&partition, output_writer(args.output.as_deref())?)?;
    report_scores(&ds, &partition)
}

/// Hosts a single session and returns its partition once the browser has
/// posted cuts for every dimension.
async fn interactive(run: SdcRun, listen: &ListenArgs) -> Result<ClusterPartition, CliError> {
    let state = AppState::default();
    let id = state.insert(run);
    let mut status = state
        .subscribe(&id)
        .ok_or_else(|| CliError::Session(format!("{id} vanished")))?;
    let listener = TcpListener::bind((listen.host.as_str(), listen.port)).await?;
    eprintln!("open http://{}/?session={id}", listener.local_addr()?);

    let (stop_tx, stop_rx) = tokio::sync::oneshot::channel::<()>();
    let server = tokio::spawn(service::serve(
        listener,
        state.clone(),
        listen.static_dir.clone(),
        async {
            let _ = stop_rx.await;
        },
    ));
    let outcome = tokio::select! {
        changed = status.wait_for(|s| *s != SessionStatus::AwaitingThresholds) => {
            changed.map(|s| *s).map_err(|_| CliError::Session(format!("{id} expired")))
        }
        _ = tokio::signal::ctrl_c() => Err(CliError::Session(format!("{id} interrupted"))),
    };
    let _ = stop_tx.send(());
    let _ = server.await;
    match outcome? {
        SessionStatus::Finished => state
            .result(&id)
            .ok_or_else(|| CliError::Session(format!("{id} has no result"))),
        _ => Err(CliError::Session(format!("{id} was aborted"))),
    }
}

fn inject(args: InjectArgs) -> Result<(), CliError> {
    let opts = args.csv.options();
    let ds = load_csv(&args.input, &opts)?;
    let out = inject_mar(&ds, args.rate, args.seed)?;
    info!(
        removed = out.missing_cell_count() - ds.missing_cell_count(),
        "injected missing values"
    );
    write_csv(&out, output_writer(args.output.as_deref())?, &opts)?;
    Ok(())
}

fn eval(args: EvalArgs) -> Result<(), CliError> {
    let pred = read_labels(File::open(&args.pred)?, &args.pred.display().to_string())?;
    let truth = read_labels(File::open(&args.truth)?, &args.truth.display().to_string())?;
    if !pred.keys().eq(truth.keys()) {
        let only_pred = pred.keys().filter(|k| !truth.contains_key(k)).count();
        let only_truth = truth.keys().filter(|k| !pred.contains_key(k)).count();
        return Err(SdcError::LabelMismatch(format!(
            "{only_pred} object ids only in predictions, {only_truth} only in truth"
        ))
        .into());
    }
    let p: Vec<&String> = pred.values().collect();
    let t: Vec<&String> = truth.values().collect();
    println!("{}", serde_json::to_string(&score(&p, &t)?)?);
    Ok(())
}

fn serve(args: ServeArgs) -> Result<(), CliError> {
    runtime()?.block_on(async {
        let listener = TcpListener::bind((args.listen.host.as_str(), args.listen.port)).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        let state = AppState::new(Duration::from_secs(args.session_ttl));
        service::serve(listener, state, args.listen.static_dir, async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
        Ok(())
    })
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Cluster(a) => cluster(a),
        Command::Inject(a) => inject(a),
        Command::Eval(a) => eval(a),
        Command::Serve(a) => serve(a),
    }
}

/// Entry point for the binary. Logging goes to stderr, filtered by `SDC_LOG`.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_env("SDC_LOG").unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(io::stderr)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
