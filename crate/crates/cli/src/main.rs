use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use dual_rtree::harness::{
    self, AngleDistribution, BenchConfig, BuiltIndex, GenConfig, Method, SectorRecord, SweepAxis,
    VerifyConfig,
};
use dual_rtree::rtree::AreaVariant;
use dual_rtree::{Error, Loading, NormalLine, Point, Rect};

const EXIT_IO: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(
    name = "dual-rtree",
    version,
    about = "Index angular sectors with dual R-trees"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic sector file.
    Generate(GenerateArgs),
    /// Run one point or direction query against a sector file.
    Query(QueryArgs),
    /// Check that every index returns exactly the linear-scan hits.
    Verify(VerifyArgs),
    /// Time the query methods on one dataset.
    Bench(BenchArgs),
    /// Repeat the benchmark along the sector count or truncation radius.
    Sweep(SweepArgs),
    /// Print coverage and overlap of a built index.
    Stats(StatsArgs),
}

#[derive(Args, Clone)]
struct GenArgs {
    /// Number of sectors.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Apex region as `minx,miny,maxx,maxy`, in meters.
    #[arg(long, value_parser = parse_region, allow_hyphen_values = true)]
    region: Option<Rect>,
    /// Mean of the exponential angle distribution, in degrees.
    #[arg(long, default_value_t = harness::generate::DEFAULT_ANGLE_MEAN_DEG, value_parser = parse_positive)]
    angle_mean: f64,
    /// Largest angle, in degrees.
    #[arg(long, default_value_t = harness::generate::DEFAULT_ANGLE_MAX_DEG, value_parser = parse_angle_max)]
    angle_max: f64,
    /// Use this angle for every sector instead, in degrees.
    #[arg(long, value_parser = parse_fixed_angle, conflicts_with = "angle_table")]
    angle_fixed: Option<f64>,
    /// CSV histogram `lower_deg,upper_deg,weight` to draw angles from.
    #[arg(long)]
    angle_table: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl GenArgs {
    fn config(&self) -> Result<GenConfig, Error> {
        let angle = if let Some(deg) = self.angle_fixed {
            AngleDistribution::Fixed { deg }
        } else if let Some(path) = &self.angle_table {
            AngleDistribution::Table {
                bins: harness::load_angle_table(path)?,
            }
        } else {
            AngleDistribution::TruncatedExponential {
                mean_deg: self.angle_mean,
                max_deg: self.angle_max,
            }
        };
        let cfg = GenConfig {
            n: self.n,
            region: self
                .region
                .unwrap_or_else(harness::generate::default_region),
            angle,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    gen: GenArgs,
    /// Output file; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Linear,
    Regular,
    DualPolar,
    DualAffine,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Linear => Method::Linear,
            MethodArg::Regular => Method::Regular,
            MethodArg::DualPolar => Method::DualPolar,
            MethodArg::DualAffine => Method::DualAffine,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum LoadingArg {
    Insert,
    Bulk,
}

impl From<LoadingArg> for Loading {
    fn from(l: LoadingArg) -> Self {
        match l {
            LoadingArg::Insert => Loading::Insert,
            LoadingArg::Bulk => Loading::Bulk,
        }
    }
}

#[derive(Args, Clone)]
struct IndexArgs {
    /// Maximum children per tree node.
    #[arg(long, default_value_t = dual_rtree::DEFAULT_BRANCHING, value_parser = clap::value_parser!(usize))]
    branching: usize,
    /// Truncation radius of the regular index, in meters.
    #[arg(long, default_value_t = dual_rtree::DEFAULT_TRUNCATION_RADIUS, value_parser = parse_positive)]
    radius: f64,
    #[arg(long, value_enum, default_value = "insert")]
    loading: LoadingArg,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long, value_enum)]
    index: MethodArg,
    /// Sector file.
    #[arg(long)]
    data: PathBuf,
    /// Query point as `x,y`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true, required_unless_present = "line", conflicts_with = "line")]
    point: Option<Point>,
    /// Query direction as a line `theta,rho` (normal angle in radians, signed offset in meters).
    #[arg(long, value_parser = parse_line, allow_hyphen_values = true)]
    line: Option<NormalLine>,
    #[command(flatten)]
    index_args: IndexArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    queries: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone)]
struct BenchCommon {
    /// Methods to run, comma separated.
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "linear,regular,dual-polar,dual-affine"
    )]
    methods: Vec<MethodArg>,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    queries: u64,
    /// Query region as `minx,miny,maxx,maxy`; a 5 km square around the mean apex if absent.
    #[arg(long, value_parser = parse_region, allow_hyphen_values = true)]
    query_region: Option<Rect>,
    #[arg(long, default_value_t = 0x5eed)]
    query_seed: u64,
    /// Timed query passes; the median is reported.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    repetitions: u64,
    /// Timed builds; the median is reported.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    build_repetitions: u64,
    #[command(flatten)]
    index: IndexArgs,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Report file; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl BenchCommon {
    fn config(&self) -> BenchConfig {
        BenchConfig {
            methods: self.methods.iter().map(|&m| m.into()).collect(),
            queries: self.queries as usize,
            query_region: self.query_region,
            query_seed: self.query_seed,
            repetitions: self.repetitions as usize,
            build_repetitions: self.build_repetitions as usize,
            branching: self.index.branching,
            loading: self.index.loading.into(),
            radius: self.index.radius,
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    /// Sector file; sectors are generated if absent.
    #[arg(long)]
    data: Option<PathBuf>,
    #[command(flatten)]
    gen: GenArgs,
    #[command(flatten)]
    common: BenchCommon,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    N,
    Radius,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    axis: AxisArg,
    /// Ascending values, comma separated (e.g. `1e3,1e4,1e5`).
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_number)]
    values: Vec<f64>,
    #[command(flatten)]
    gen: GenArgs,
    #[command(flatten)]
    common: BenchCommon,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long, value_enum)]
    index: MethodArg,
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    index_args: IndexArgs,
}

fn parse_numbers<const N: usize>(s: &str, shape: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected `{shape}`"));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = parse_number(p)?;
    }
    Ok(out)
}

fn parse_number(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v = parse_number(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("`{s}` must be positive"))
    }
}

fn parse_angle_max(s: &str) -> Result<f64, String> {
    let v = parse_positive(s)?;
    if v <= 180.0 {
        Ok(v)
    } else {
        Err(format!("`{s}` exceeds 180 degrees"))
    }
}

fn parse_fixed_angle(s: &str) -> Result<f64, String> {
    let v = parse_positive(s)?;
    if v < 180.0 {
        Ok(v)
    } else {
        Err(format!("`{s}` must be below 180 degrees"))
    }
}

fn parse_region(s: &str) -> Result<Rect, String> {
    let [a, b, c, d] = parse_numbers::<4>(s, "minx,miny,maxx,maxy")?;
    Rect::new(a, b, c, d).map_err(|e| e.to_string())
}

fn parse_point(s: &str) -> Result<Point, String> {
    let [x, y] = parse_numbers::<2>(s, "x,y")?;
    Ok(Point::new(x, y))
}

fn parse_line(s: &str) -> Result<NormalLine, String> {
    let [theta, rho] = parse_numbers::<2>(s, "theta,rho")?;
    Ok(NormalLine::new(theta, rho))
}

fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn echo_config(command: &str, cfg: serde_json::Value) {
    log::info!("{command} config: {cfg}");
}

fn print_json(value: &serde_json::Value) -> Result<(), Error> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn load(path: &Path) -> Result<(Vec<SectorRecord>, Vec<dual_rtree::AngularSector>), Error> {
    let records = harness::load_sectors(path)?;
    let sectors = harness::to_sectors(&records)?;
    log::info!("loaded {} sectors from {}", sectors.len(), path.display());
    Ok((records, sectors))
}

fn build_options(args: &IndexArgs) -> dual_rtree::BuildOptions {
    dual_rtree::BuildOptions {
        branching: args.branching,
        loading: args.loading.into(),
    }
}

fn run_generate(args: GenerateArgs) -> Result<(), Error> {
    let cfg = args.gen.config()?;
    echo_config("generate", json!({ "gen": cfg, "out": args.out }));
    let records = harness::generate(&cfg)?;
    let mut out = output(args.out.as_deref())?;
    harness::write_sectors(&mut out, &records)?;
    out.flush()?;
    Ok(())
}

fn run_query(args: QueryArgs) -> Result<(), Error> {
    let method: Method = args.index.into();
    echo_config(
        "query",
        json!({
            "index": method, "data": args.data, "point": args.point, "line": args.line,
            "branching": args.index_args.branching, "radius": args.index_args.radius,
        }),
    );
    let (records, sectors) = load(&args.data)?;
    let built = BuiltIndex::build(
        method,
        sectors,
        args.index_args.radius,
        build_options(&args.index_args),
    )?;
    let index = built.as_index();
    let result = match (args.point, &args.line) {
        (Some(p), _) => index.query_point(p),
        (None, Some(l)) => index.query_direction(l),
        (None, None) => unreachable!("clap requires one of --point and --line"),
    };
    let mut hits: Vec<u64> = result
        .hits
        .iter()
        .map(|id| records[id.index()].id)
        .collect();
    hits.sort_unstable();
    print_json(&json!({
        "method": method,
        "hits": hits,
        "candidates": result.candidate_count(),
        "node_visits": result.node_visits,
    }))
}

fn run_verify(args: VerifyArgs) -> Result<ExitCode, Error> {
    let cfg = VerifyConfig {
        n: args.n,
        queries: args.queries,
        seed: args.seed,
        inject_fault: args.inject_fault,
        ..VerifyConfig::default()
    };
    echo_config("verify", json!(cfg));
    let report = harness::verify(&cfg)?;
    print_json(&serde_json::to_value(&report)?)?;
    if report.passed() {
        log::info!("verify: no discrepancies");
        Ok(ExitCode::SUCCESS)
    } else {
        if let Some(c) = &report.counterexample {
            log::error!(
                "verify: {} discrepancies; {} disagrees with the linear scan on sector {} at point ({}, {})",
                report.discrepancies, c.method, c.sector.0, c.point.x, c.point.y
            );
        }
        Ok(ExitCode::from(EXIT_VERIFY))
    }
}

fn write_report(common: &BenchCommon, rows: &[harness::BenchReport]) -> Result<(), Error> {
    let mut out = output(common.out.as_deref())?;
    match common.format {
        Format::Csv => harness::write_reports_csv(&mut out, rows)?,
        Format::Json => {
            harness::write_reports_json(&mut out, rows)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn run_bench(args: BenchArgs) -> Result<(), Error> {
    let bench = args.common.config();
    let sectors = match &args.data {
        Some(path) => {
            echo_config("bench", json!({ "data": path, "bench": bench }));
            load(path)?.1
        }
        None => {
            let gen = args.gen.config()?;
            echo_config("bench", json!({ "gen": gen, "bench": bench }));
            harness::to_sectors(&harness::generate(&gen)?)?
        }
    };
    let rows = harness::run_bench(&sectors, &bench)?;
    write_report(&args.common, &rows)
}

fn run_sweep(args: SweepArgs) -> Result<(), Error> {
    let gen = args.gen.config()?;
    let bench = args.common.config();
    let axis = match args.axis {
        AxisArg::N => SweepAxis::N,
        AxisArg::Radius => SweepAxis::Radius,
    };
    echo_config(
        "sweep",
        json!({ "axis": axis, "values": args.values, "gen": gen, "bench": bench }),
    );
    let rows = harness::sweep(axis, &args.values, &gen, &bench)?;
    if axis == SweepAxis::Radius {
        match harness::crossover(&rows, Method::Regular, Method::DualPolar) {
            Some(r) => log::info!("dual-polar overtakes regular from radius {r} m"),
            None => log::info!("no consistent crossover between regular and dual-polar"),
        }
    }
    write_report(&args.common, &rows)
}

fn run_stats(args: StatsArgs) -> Result<(), Error> {
    let method: Method = args.index.into();
    echo_config(
        "stats",
        json!({ "index": method, "data": args.data, "branching": args.index_args.branching, "radius": args.index_args.radius }),
    );
    let (_, sectors) = load(&args.data)?;
    let n = sectors.len();
    let built = BuiltIndex::build(
        method,
        sectors,
        args.index_args.radius,
        build_options(&args.index_args),
    )?;
    let mut trees = Vec::new();
    for tree in built.trees() {
        if tree.is_empty() {
            trees.push(json!(null));
            continue;
        }
        trees.push(json!({
            "sum": tree.stats(AreaVariant::Sum)?,
            "union": tree.stats(AreaVariant::Union)?,
        }));
    }
    print_json(&json!({ "method": method, "n": n, "pooled": built.stats(), "trees": trees }))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidConfig(_) => EXIT_USAGE,
        _ => EXIT_IO,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => run_generate(a).map(|_| ExitCode::SUCCESS),
        Command::Query(a) => run_query(a).map(|_| ExitCode::SUCCESS),
        Command::Verify(a) => run_verify(a),
        Command::Bench(a) => run_bench(a).map(|_| ExitCode::SUCCESS),
        Command::Sweep(a) => run_sweep(a).map(|_| ExitCode::SUCCESS),
        Command::Stats(a) => run_stats(a).map(|_| ExitCode::SUCCESS),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            log::error!("{e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                log::error!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
