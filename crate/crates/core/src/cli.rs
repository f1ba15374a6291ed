//! Command-line surface: `stats`, `circle`, `embed`, `knn`, `graph`, `topology`.
//!
//! Exit codes: 0 on success, 1 on input or configuration errors, 2 when a
//! variable has zero variance. Errors print one line on standard error and
//! nothing is written to the output path.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::data::{DataTable, DisconnectPolicy, MetricMode, PipelineConfig, Standardize};
use crate::error::{Error, Result};
use crate::pipeline::{local_structure, layout, prepare, run_pipeline};
use crate::report::{embedding_csv, to_json, GraphReport, KnnReport, RunReport, TopologyReport};
use crate::stats::pearson_circle;
use crate::svg::render_circles;
use crate::topology::betti_sweep;

#[derive(Debug, Parser)]
#[command(name = "riemstat", version, about = "Riemannian statistics over UMAP local metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the full pipeline and print the statistics report as JSON.
    Stats(RunArgs),
    /// Draw the correlation circle as SVG.
    Circle(RunArgs),
    /// Write the embedding coordinates as CSV.
    Embed(RunArgs),
    /// Dump the k-nearest-neighbor lists as JSON.
    Knn(RunArgs),
    /// Dump local scales, memberships and the distance matrix as JSON.
    Graph(RunArgs),
    /// Betti numbers of the Čech complex of a point cloud.
    Topology(TopologyArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Input CSV with a header row.
    input: PathBuf,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0.1)]
    min_dist: f64,
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = MetricMode::Geodesic)]
    metric_mode: MetricMode,
    #[arg(long, default_value_t = DisconnectPolicy::EuclideanBridge)]
    disconnect: DisconnectPolicy,
    #[arg(long, default_value_t = Standardize::None)]
    standardize: Standardize,
    /// Also compute the Pearson correlation circle.
    #[arg(long)]
    baseline_pearson: bool,
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> PipelineConfig {
        PipelineConfig {
            k: self.k,
            min_dist: self.min_dist,
            n_epochs: self.epochs,
            seed: self.seed,
            metric_mode: self.metric_mode,
            disconnect_policy: self.disconnect,
            standardize: self.standardize,
            ..PipelineConfig::default()
        }
    }
}

#[derive(Debug, Args)]
struct TopologyArgs {
    /// CSV of point coordinates.
    input: PathBuf,
    #[arg(long, conflicts_with = "sweep", required_unless_present = "sweep")]
    epsilon: Option<f64>,
    /// Radius sweep as `lo:hi:steps`.
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn read_table(path: &Path) -> Result<DataTable> {
    let file = fs::File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("cannot read {}: {e}", path.display()),
        ))
    })?;
    DataTable::from_csv(file)
}

fn parse_sweep(spec: &str) -> Result<(f64, f64, usize)> {
    let bad = || Error::InvalidArgument(format!("sweep must look like lo:hi:steps, got {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    Ok((
        parts[0].parse().map_err(|_| bad())?,
        parts[1].parse().map_err(|_| bad())?,
        parts[2].parse().map_err(|_| bad())?,
    ))
}

fn execute(command: &Command) -> Result<(Vec<u8>, Option<&Path>)> {
    match command {
        Command::Stats(args) => {
            let out = run_pipeline(&read_table(&args.input)?, &args.config())?;
            let pearson = if args.baseline_pearson {
                Some(pearson_circle(&out.table, &out.layout.embedding)?)
            } else {
                None
            };
            Ok((to_json(&RunReport::new(&out, pearson.as_ref())), args.output.as_deref()))
        }
        Command::Circle(args) => {
            let out = run_pipeline(&read_table(&args.input)?, &args.config())?;
            let svg = if args.baseline_pearson {
                let pearson = pearson_circle(&out.table, &out.layout.embedding)?;
                render_circles(&[("Pearson", &pearson), ("Riemannian", &out.circle)])
            } else {
                render_circles(&[("Riemannian", &out.circle)])
            };
            Ok((svg.into_bytes(), args.output.as_deref()))
        }
        Command::Embed(args) => {
            let config = args.config();
            let table = prepare(&read_table(&args.input)?, &config)?;
            let local = local_structure(&table, &config)?;
            let layout = layout(&local.connected, &config)?;
            Ok((embedding_csv(&table, &layout.embedding)?, args.output.as_deref()))
        }
        Command::Knn(args) => {
            let config = args.config();
            let table = prepare(&read_table(&args.input)?, &config)?;
            let nbrs = crate::neighbors::exact_knn(&table, config.k)?;
            Ok((to_json(&KnnReport::new(&table, &nbrs)), args.output.as_deref()))
        }
        Command::Graph(args) => {
            let config = args.config();
            let table = prepare(&read_table(&args.input)?, &config)?;
            let local = local_structure(&table, &config)?;
            Ok((to_json(&GraphReport::new(&table, &local)), args.output.as_deref()))
        }
        Command::Topology(args) => {
            let table = read_table(&args.input)?;
            let points: Vec<Vec<f64>> = table.rows().map(<[f64]>::to_vec).collect();
            let (lo, hi, steps) = match (&args.sweep, args.epsilon) {
                (Some(spec), _) => parse_sweep(spec)?,
                (None, Some(eps)) => (eps, eps, 1),
                (None, None) => unreachable!("clap requires one of --epsilon or --sweep"),
            };
            let sweep = betti_sweep(&points, lo, hi, steps)?;
            let report = TopologyReport {
                points: points.len(),
                sweep,
            };
            Ok((to_json(&report), args.output.as_deref()))
        }
    }
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::DegenerateVariance(_) => 2,
        _ => 1,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    1
                }
            };
        }
    };
    let result = execute(&cli.command).and_then(|(bytes, path)| match path {
        Some(path) => write_atomic(path, &bytes),
        None => stdout.write_all(&bytes).map_err(Error::from),
    });
    match result {
        Ok(()) => 0,
        Err(err) => {
            let _ = writeln!(stderr, "error: {err}");
            exit_code(&err)
        }
    }
}
