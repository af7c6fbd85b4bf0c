//! `ppd`: preference profiles to persistence diagrams, distances, kernels
//! and experiment tables.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ppd_core::classical::MetricParams;
use ppd_core::diagram::{read_diagram, write_diagram, PersistenceDiagram, PolarParams};
use ppd_core::experiment::{
    self, run_comparison, stability_sweep, DatasetSpec, DistanceParams, ExperimentSpec, Metric,
};
use ppd_core::filtration::{build_filtration, FilteredComplex, FiltrationConfig, DEFAULT_EPSILON};
use ppd_core::kernels::{gram, KernelKind, KernelParams};
use ppd_core::persistence::compute_persistence;
use ppd_core::polar::{polar_embed, Aggregate, DiagonalMode, PpdConfig};
use ppd_core::preflib::{dominance, parse_preflib};

#[derive(Debug, Parser)]
#[command(
    name = "ppd",
    version,
    about = "Persistent homology of preference profiles and the polar persistence distance"
)]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true, env = "PPD_THREADS")]
    threads: Option<usize>,
    /// Machine-readable JSON on standard output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a SOC file and write its dominance matrix and filtration.
    Ingest(IngestArgs),
    /// Compute the persistence diagram of a filtration or SOC file.
    Persist(PersistArgs),
    /// Distance between two diagram files.
    Compare(CompareArgs),
    /// Kernel Gram matrix over diagram files.
    Gram(GramArgs),
    /// Run an experiment spec and print its table.
    Sweep(SweepArgs),
    /// Polar embedding of every point of a diagram.
    Embed(EmbedArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InputFormat {
    Preflib,
}

#[derive(Debug, Args)]
struct FiltrationArgs {
    /// ε in the edge value 1/(|margin| + ε).
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Keep the graph one-dimensional (no triangles).
    #[arg(long)]
    no_triangles: bool,
}

impl FiltrationArgs {
    fn config(&self) -> FiltrationConfig {
        FiltrationConfig {
            epsilon: self.epsilon,
            expand_triangles: !self.no_triangles,
            cap: None,
        }
    }
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "preflib")]
    format: InputFormat,
    /// Output directory; receives dominance.csv and filtration.txt.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    filtration: FiltrationArgs,
}

#[derive(Debug, Args)]
#[group(id = "source", required = true, multiple = false, args = ["complex", "soc"])]
struct PersistArgs {
    /// Filtration file written by `ingest`.
    #[arg(long)]
    complex: Option<PathBuf>,
    /// SOC file, run through the full pipeline.
    #[arg(long)]
    soc: Option<PathBuf>,
    /// Output diagram file (standard output when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Keep only this homology dimension.
    #[arg(long)]
    dim: Option<usize>,
    #[command(flatten)]
    filtration: FiltrationArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricArg {
    Bottleneck,
    Wasserstein,
    Sliced,
    Ppd,
    Landscape,
    Silhouette,
    Entropy,
}

impl MetricArg {
    fn metric(self) -> Metric {
        match self {
            MetricArg::Bottleneck => Metric::Bottleneck,
            MetricArg::Wasserstein => Metric::Wasserstein,
            MetricArg::Sliced => Metric::Sliced,
            MetricArg::Ppd => Metric::Ppd,
            MetricArg::Landscape => Metric::Landscape,
            MetricArg::Silhouette => Metric::Silhouette,
            MetricArg::Entropy => Metric::Entropy,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AggregateArg {
    Sum,
    Max,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DiagonalArg {
    Project,
    Exclude,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long, value_enum)]
    metric: MetricArg,
    /// Angular weight of the polar distance.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Wasserstein order.
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Homology dimension to compare.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, value_enum, default_value = "sum")]
    aggregate: AggregateArg,
    #[arg(long, value_enum, default_value = "project")]
    diagonal: DiagonalArg,
    #[arg(long, default_value_t = ppd_core::diagram::DEFAULT_EXCLUSION_RADIUS)]
    exclusion_radius: f64,
    /// Projection directions for the sliced distance.
    #[arg(long, default_value_t = 50)]
    directions: usize,
    /// L^p order for landscape and silhouette distances ("sup" for L∞).
    #[arg(long, default_value = "2")]
    norm: String,
    /// Death value for essential classes; they are ignored otherwise.
    #[arg(long)]
    cap: Option<f64>,
}

#[derive(Debug, Args)]
struct GramArgs {
    /// Diagram files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, value_enum)]
    kernel: KernelArg,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    #[arg(long, default_value_t = 50)]
    directions: usize,
    #[arg(long, default_value_t = 1.0)]
    weight_exponent: f64,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KernelArg {
    Pssk,
    Pwgk,
    Heat,
    Sw,
    Kw,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepKind {
    Comparison,
    Stability,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Text,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Replace the spec's dataset with this SOC file.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Defaults to `comparison` when the spec lists comparisons.
    #[arg(long, value_enum)]
    kind: Option<SweepKind>,
    #[arg(long, value_enum, default_value = "csv")]
    format: TableFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EmbedArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long)]
    dim: Option<usize>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn load_diagram(path: &Path) -> Result<PersistenceDiagram> {
    read_diagram(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn select_dim(
    d: PersistenceDiagram,
    dim: Option<usize>,
    path: &Path,
) -> Result<PersistenceDiagram> {
    match dim {
        None => Ok(d),
        Some(k) if d.dimensions().contains(&k) => Ok(d.restrict(k)),
        Some(k) => Err(anyhow!(ppd_core::Error::Validation(format!(
            "dimension {k} is absent from {}",
            path.display()
        )))),
    }
}

fn ingest(args: &IngestArgs) -> Result<()> {
    let InputFormat::Preflib = args.format;
    let profile = parse_preflib(&read(&args.input)?)
        .with_context(|| format!("in {}", args.input.display()))?;
    let dom = dominance(&profile);
    let complex = build_filtration(&dom, &args.filtration.config())?;
    fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    let (dom_path, complex_path) = (
        args.out.join("dominance.csv"),
        args.out.join("filtration.txt"),
    );
    write(&dom_path, &dom.to_csv())?;
    write(&complex_path, &complex.to_text())?;
    if args_json() {
        println!(
            "{}",
            json!({
                "alternatives": dom.len(),
                "voters": dom.voter_count(),
                "simplices": complex.len(),
                "dominance": dom_path,
                "filtration": complex_path,
            })
        );
    } else {
        println!("{}", dom_path.display());
        println!("{}", complex_path.display());
    }
    Ok(())
}

fn persist(args: &PersistArgs) -> Result<()> {
    let complex = match (&args.complex, &args.soc) {
        (Some(path), _) => FilteredComplex::from_text(&read(path)?)
            .with_context(|| format!("in {}", path.display()))?,
        (None, Some(path)) => {
            let profile =
                parse_preflib(&read(path)?).with_context(|| format!("in {}", path.display()))?;
            build_filtration(&dominance(&profile), &args.filtration.config())?
        }
        (None, None) => bail!("one of --complex or --soc is required"),
    };
    let mut diagram = compute_persistence(&complex)?;
    if let Some(k) = args.dim {
        diagram = diagram.restrict(k);
    }
    let text = write_diagram(&diagram);
    if let Some(out) = &args.out {
        write(out, &text)?;
    }
    if args_json() {
        println!("{}", diagram_json(&diagram, &text));
    } else if args.out.is_none() {
        print!("{text}");
    }
    Ok(())
}

fn diagram_json(d: &PersistenceDiagram, text: &str) -> serde_json::Value {
    json!({
        "diagram": text,
        "points": d.points().iter().map(|p| json!({"dim": p.dim, "birth": p.birth, "death": p.death})).collect::<Vec<_>>(),
        "essential": d.essential().iter().map(|e| json!({"dim": e.dim, "birth": e.birth})).collect::<Vec<_>>(),
    })
}

fn parse_norm(s: &str) -> Result<Option<f64>> {
    if s == "sup" || s == "inf" {
        return Ok(None);
    }
    s.parse::<f64>().map(Some).map_err(|_| {
        anyhow!(ppd_core::Error::Parameter(format!(
            "--norm expects a number or 'sup', got '{s}'"
        )))
    })
}

/// The library parameters a `compare` invocation resolves to.
fn distance_params(args: &CompareArgs) -> Result<DistanceParams> {
    Ok(DistanceParams {
        ppd: PpdConfig {
            polar: PolarParams::new(args.alpha, args.exclusion_radius)?,
            diagonal_mode: match args.diagonal {
                DiagonalArg::Project => DiagonalMode::Project,
                DiagonalArg::Exclude => DiagonalMode::Exclude,
            },
            aggregate: match args.aggregate {
                AggregateArg::Sum => Aggregate::Sum,
                AggregateArg::Max => Aggregate::Max,
            },
        },
        metric: MetricParams {
            p: args.p,
            directions: args.directions,
            ..Default::default()
        },
        norm: parse_norm(&args.norm)?,
        ..Default::default()
    })
}

fn compare(args: &CompareArgs) -> Result<()> {
    let params = distance_params(args)?;
    eprintln!("compare: {params:?}");
    let mut a = select_dim(load_diagram(&args.a)?, args.dim, &args.a)?;
    let mut b = select_dim(load_diagram(&args.b)?, args.dim, &args.b)?;
    if let Some(cap) = args.cap {
        a = a.capped(cap)?;
        b = b.capped(cap)?;
    }
    let value = experiment::distance(args.metric.metric(), &a, &b, &params)?;
    if args_json() {
        println!(
            "{}",
            json!({
                "metric": args.metric.metric().name(),
                "value": value,
                "alpha": args.alpha,
                "p": args.p,
                "dim": args.dim,
            })
        );
    } else {
        println!("{value:.9}");
    }
    Ok(())
}

fn gram_cmd(args: &GramArgs) -> Result<()> {
    let params = KernelParams {
        sigma: args.sigma,
        t: args.t,
        c: args.c,
        q: args.q,
        sw_directions: args.directions,
        weight_exponent: args.weight_exponent,
        p: args.p,
    };
    let kind = match args.kernel {
        KernelArg::Pssk => KernelKind::Pssk,
        KernelArg::Pwgk => KernelKind::Pwgk,
        KernelArg::Heat => KernelKind::Heat,
        KernelArg::Sw => KernelKind::SlicedWasserstein,
        KernelArg::Kw => KernelKind::KernelizedWasserstein,
    };
    eprintln!("gram: kernel={} {params:?}", kind.name());
    let diagrams = args
        .inputs
        .iter()
        .map(|path| {
            let d = select_dim(load_diagram(path)?, args.dim, path)?;
            let label = path.file_stem().map(|s| s.to_string_lossy().into_owned());
            Ok(match (d.label.clone(), label) {
                (Some(_), _) | (None, None) => d,
                (None, Some(l)) => d.with_label(l),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let g = gram(&diagrams, kind, &params)?;
    eprintln!("gram: min eigenvalue {:e}", g.min_eigenvalue());
    let csv = g.to_csv();
    if let Some(out) = &args.out {
        write(out, &csv)?;
    }
    if args_json() {
        println!(
            "{}",
            json!({"labels": g.labels, "entries": g.entries, "min_eigenvalue": g.min_eigenvalue()})
        );
    } else if args.out.is_none() {
        print!("{csv}");
    }
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let mut spec = ExperimentSpec::load(&args.spec)?;
    let base = args
        .spec
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let base = if let Some(path) = &args.dataset {
        spec.dataset = DatasetSpec::File {
            path: fs::canonicalize(path)
                .with_context(|| format!("cannot read {}", path.display()))?,
        };
        PathBuf::new()
    } else {
        base
    };
    eprintln!("sweep: {spec:?}");
    let kind = args.kind.unwrap_or(if spec.comparisons.is_empty() {
        SweepKind::Stability
    } else {
        SweepKind::Comparison
    });
    let table = match kind {
        SweepKind::Comparison => run_comparison(&spec, &base)?.table(),
        SweepKind::Stability => stability_sweep(&spec, &base)?.table(),
    };
    let text = match args.format {
        TableFormat::Csv => table.to_csv(),
        TableFormat::Text => table.to_text(),
    };
    if let Some(out) = &args.out {
        write(out, &text)?;
    }
    if args_json() {
        let rows: Vec<serde_json::Map<String, serde_json::Value>> = table
            .rows
            .iter()
            .map(|r| {
                table
                    .header
                    .iter()
                    .cloned()
                    .zip(r.iter().map(|c| json!(c)))
                    .collect()
            })
            .collect();
        println!("{}", json!({ "rows": rows }));
    } else if args.out.is_none() {
        print!("{text}");
    }
    Ok(())
}

fn embed(args: &EmbedArgs) -> Result<()> {
    let params = PolarParams::with_alpha(args.alpha)?;
    eprintln!("embed: {params:?}");
    let d = select_dim(load_diagram(&args.input)?, args.dim, &args.input)?;
    let rows = d
        .points()
        .iter()
        .filter(|p| !params.excludes(p))
        .map(|p| Ok((p, polar_embed(p, &params)?)))
        .collect::<Result<Vec<_>>>()?;
    if args_json() {
        let out: Vec<_> = rows
            .iter()
            .map(|(p, e)| json!({"dim": p.dim, "birth": p.birth, "death": p.death, "embedding": e}))
            .collect();
        println!("{}", json!(out));
    } else {
        println!("dim,birth,death,x,y,z");
        for (p, e) in rows {
            println!(
                "{},{:e},{:e},{:e},{:e},{:e}",
                p.dim, p.birth, p.death, e[0], e[1], e[2]
            );
        }
    }
    Ok(())
}

static JSON: std::sync::OnceLock<bool> = std::sync::OnceLock::new();

fn args_json() -> bool {
    JSON.get().copied().unwrap_or(false)
}

/// 1 for problems with the data itself, 2 for usage, parameter and I/O
/// problems.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<ppd_core::Error>() {
            return if e.is_data_error() { 1 } else { 2 };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 2;
        }
    }
    1
}

fn run(cli: Cli) -> Result<()> {
    let _ = JSON.set(cli.json);
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!(ppd_core::Error::Parameter("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| anyhow!(ppd_core::Error::Parameter(e.to_string())))?;
    }
    match &cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Persist(a) => persist(a),
        Command::Compare(a) => compare(a),
        Command::Gram(a) => gram_cmd(a),
        Command::Sweep(a) => sweep(a),
        Command::Embed(a) => embed(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
