//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bench::{
    budget_sweep, random_baseline, runtime_scaling, speedup_report, write_layout_csv,
    write_metrics_csv,
};
use crate::calibration::{calibrate, sweep_k, write_sweep_csv, CalibrateOptions, CalibrationModel};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::planar::{generate, GenSpec};
use crate::seeds::SeedList;
use crate::solver::{solve, SolveConfig, Workers};

/// Environment variable read for the worker count when `--workers` is absent.
pub const WORKERS_ENV: &str = "DISMANTLE_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "dismantle",
    version,
    about = "Edge-budget dismantling of planar graphs on sampled spanning trees"
)]
struct Cli {
    /// Worker threads for trial grids [default: available cores]
    #[arg(long, global = true, env = WORKERS_ENV)]
    workers: Option<usize>,

    /// Increase log verbosity (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a connected random planar graph
    Gen(GenArgs),
    /// Solve one budgeted dismantling instance
    Solve(SolveArgs),
    /// Sweep the subproblem over a range of k
    SweepK(SweepKArgs),
    /// Solve at several budget fractions, optionally against random removal
    SweepBudget(SweepBudgetArgs),
    /// Fit the slope and subgraph-fraction models on a graph corpus
    Calibrate(CalibrateArgs),
    /// Random edge removal baseline
    Baseline(BaselineArgs),
    /// Subproblem runtime against graph size
    Scaling(ScalingArgs),
    /// Parallel speedup and determinism across worker counts
    Speedup(SpeedupArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    nodes: usize,
    #[arg(long)]
    edges: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TrialArgs {
    /// Spanning tree samples per k
    #[arg(long, default_value_t = 50)]
    samples: usize,
    /// Master seed; trial seeds are derived from it
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl TrialArgs {
    fn seeds(&self) -> Result<SeedList> {
        SeedList::from_master(self.seed, self.samples)
    }
}

#[derive(Debug, Args)]
struct PriorArgs {
    /// Half-width of the k search window
    #[arg(long, default_value_t = 1)]
    delta: usize,
    /// Calibration file produced by `calibrate`
    #[arg(long)]
    calib: Option<PathBuf>,
    /// Subgraph fraction for the small-budget path instead of the fitted one
    #[arg(long)]
    alpha: Option<f64>,
    /// Window center for the large-budget path instead of the fitted one
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Debug, Args)]
#[group(id = "budget_choice", required = true, multiple = false)]
struct BudgetArgs {
    /// Number of edges that may be removed
    #[arg(long, group = "budget_choice")]
    budget: Option<usize>,
    /// Budget as a fraction of |E| (floored)
    #[arg(long, group = "budget_choice")]
    budget_frac: Option<f64>,
}

impl BudgetArgs {
    fn resolve(&self, g: &Graph) -> Result<usize> {
        match (self.budget, self.budget_frac) {
            (Some(b), _) => Ok(b),
            (None, Some(f)) if (0.0..=1.0).contains(&f) => {
                Ok((f * g.edge_count() as f64).floor() as usize)
            }
            (None, Some(f)) => Err(Error::Config(format!("budget fraction {f} outside [0, 1]"))),
            (None, None) => unreachable!("clap requires one budget flag"),
        }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    budget: BudgetArgs,
    #[command(flatten)]
    trials: TrialArgs,
    #[command(flatten)]
    prior: PriorArgs,
    /// Solution JSON path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write `vertex,x,y,class` for the chosen split
    #[arg(long)]
    layout: Option<PathBuf>,
    /// Zero timing and worker-count fields so outputs are byte-comparable
    #[arg(long)]
    stable_output: bool,
}

#[derive(Debug, Args)]
struct SweepKArgs {
    #[arg(long, required = true, num_args = 1..)]
    graph: Vec<PathBuf>,
    #[arg(long, default_value_t = 2)]
    k_min: usize,
    #[arg(long, default_value_t = 10)]
    k_max: usize,
    #[command(flatten)]
    trials: TrialArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SweepBudgetArgs {
    #[arg(long, required = true, num_args = 1..)]
    graph: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.10,0.15,0.20")]
    fractions: Vec<f64>,
    #[command(flatten)]
    trials: TrialArgs,
    #[command(flatten)]
    prior: PriorArgs,
    /// Also run the random baseline with this many trials per budget
    #[arg(long)]
    baseline_trials: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    stable_output: bool,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    /// Corpus graphs
    #[arg(long, required = true, num_args = 1..)]
    graph: Vec<PathBuf>,
    #[arg(long, default_value_t = 10)]
    k_max: usize,
    #[command(flatten)]
    trials: TrialArgs,
    /// Samples per subgraph bisection in the subgraph-fraction sweep
    #[arg(long, default_value_t = 10)]
    alpha_samples: usize,
    #[arg(long)]
    out: PathBuf,
    /// Also write the k sweep records
    #[arg(long)]
    sweep_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BaselineArgs {
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    stable_output: bool,
}

#[derive(Debug, Args)]
struct ScalingArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    nodes: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    edges: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 10)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SpeedupArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5")]
    k: Vec<usize>,
    #[arg(long, default_value_t = 16)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
    p: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `argv` and runs the subcommand. Exit codes: 0 success, 1 runtime
/// error, 2 usage error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_logging(cli.verbose);
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .try_init();
}

fn workers(requested: Option<usize>) -> Result<Workers> {
    let p = requested.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    });
    Workers::new(p)
}

fn dispatch(cli: Cli) -> Result<()> {
    let w = cli.workers;
    match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a, &workers(w)?),
        Command::SweepK(a) => cmd_sweep_k(a, &workers(w)?),
        Command::SweepBudget(a) => cmd_sweep_budget(a, &workers(w)?),
        Command::Calibrate(a) => cmd_calibrate(a, &workers(w)?),
        Command::Baseline(a) => cmd_baseline(a),
        Command::Scaling(a) => cmd_scaling(a, &workers(w)?),
        Command::Speedup(a) => cmd_speedup(a),
    }
}

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn read_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path)?;
    Graph::load(&text).map_err(|e| match e {
        Error::Parse { line, msg } => Error::Parse {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        other => other,
    })
}

fn graph_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn load_calibration(path: Option<&Path>) -> Result<Option<CalibrationModel>> {
    path.map(|p| CalibrationModel::from_json(&fs::read_to_string(p)?))
        .transpose()
}

fn solve_config(budget: usize, trials: &TrialArgs, prior: &PriorArgs) -> Result<SolveConfig> {
    let mut cfg = SolveConfig::new(budget, trials.seeds()?);
    cfg.delta = prior.delta;
    cfg.calibration = load_calibration(prior.calib.as_deref())?;
    cfg.alpha_override = prior.alpha;
    cfg.k_override = prior.k;
    Ok(cfg)
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let g = generate(GenSpec::new(a.nodes, a.edges, a.seed))?;
    write_atomic(&a.out, g.save().as_bytes())?;
    println!(
        "generated |V|={} |E|={} seed={} -> {}",
        g.vertex_count(),
        g.edge_count(),
        a.seed,
        a.out.display()
    );
    Ok(())
}

fn cmd_solve(a: SolveArgs, w: &Workers) -> Result<()> {
    let g = read_graph(&a.graph)?;
    let budget = a.budget.resolve(&g)?;
    let cfg = solve_config(budget, &a.trials, &a.prior)?;
    let report = solve(&g, &cfg, w)?;
    let mut rec = report.record(&g);
    if a.stable_output {
        rec.runtime_ms = 0.0;
        rec.worker_count = 0;
    }
    let json = serde_json::to_string_pretty(&rec)? + "\n";
    match &a.out {
        Some(p) => write_atomic(p, json.as_bytes())?,
        None => print!("{json}"),
    }
    if let Some(p) = &a.layout {
        let mut buf = Vec::new();
        write_layout_csv(&g, &report.solution.class_of, &mut buf)?;
        write_atomic(p, &buf)?;
    }
    println!(
        "lcc={} lcc_ratio={:.6} cut_used={} path={}",
        rec.lcc,
        rec.lcc_ratio,
        rec.cut_count,
        rec.path.as_str()
    );
    Ok(())
}

fn cmd_sweep_k(a: SweepKArgs, w: &Workers) -> Result<()> {
    let seeds = a.trials.seeds()?;
    let mut records = Vec::new();
    for path in &a.graph {
        let g = read_graph(path)?;
        let k_max = a.k_max.min(g.vertex_count());
        records.extend(sweep_k(&g, &graph_id(path), a.k_min, k_max, &seeds, w)?);
    }
    let mut buf = Vec::new();
    write_sweep_csv(&records, &mut buf)?;
    write_atomic(&a.out, &buf)?;
    println!("{} sweep records -> {}", records.len(), a.out.display());
    Ok(())
}

fn cmd_sweep_budget(a: SweepBudgetArgs, w: &Workers) -> Result<()> {
    let template = solve_config(0, &a.trials, &a.prior)?;
    let mut rows = Vec::new();
    for path in &a.graph {
        let g = read_graph(path)?;
        rows.extend(budget_sweep(
            &g,
            &graph_id(path),
            &a.fractions,
            &template,
            a.baseline_trials,
            w,
        )?);
    }
    if a.stable_output {
        rows.iter_mut().for_each(|r| r.runtime_ms = 0.0);
    }
    let mut buf = Vec::new();
    write_metrics_csv(&rows, &mut buf)?;
    write_atomic(&a.out, &buf)?;
    println!("{} rows -> {}", rows.len(), a.out.display());
    Ok(())
}

fn cmd_calibrate(a: CalibrateArgs, w: &Workers) -> Result<()> {
    let corpus = a
        .graph
        .iter()
        .map(|p| Ok((graph_id(p), read_graph(p)?)))
        .collect::<Result<Vec<_>>>()?;
    let opts = CalibrateOptions {
        k_max: a.k_max,
        seeds: a.trials.seeds()?,
        alpha_seeds: SeedList::from_master(a.trials.seed ^ 0xA1FA, a.alpha_samples)?,
    };
    let cal = calibrate(&corpus, &opts, w)?;
    write_atomic(&a.out, cal.model.to_json()?.as_bytes())?;
    if let Some(p) = &a.sweep_out {
        let mut buf = Vec::new();
        write_sweep_csv(&cal.sweeps, &mut buf)?;
        write_atomic(p, &buf)?;
    }
    let m = &cal.model;
    println!(
        "c0={:.6} c1={:.6} B0={:.6} gamma={:.6} beta1={:.6} beta2={:.6} r2_slope={:.4} r2_alpha={:.4} -> {}",
        m.c0, m.c1, m.b0, m.gamma, m.beta1, m.beta2, m.r2_slope, m.r2_alpha,
        a.out.display()
    );
    Ok(())
}

fn cmd_baseline(a: BaselineArgs) -> Result<()> {
    let g = read_graph(&a.graph)?;
    let budget = a.budget.resolve(&g)?;
    let mut r = random_baseline(&g, &graph_id(&a.graph), budget, a.trials, a.seed)?;
    if a.stable_output {
        r.row.runtime_ms = 0.0;
    }
    if let Some(p) = &a.out {
        let mut buf = Vec::new();
        write_metrics_csv(std::slice::from_ref(&r.row), &mut buf)?;
        write_atomic(p, &buf)?;
    }
    println!(
        "lcc_mean={:.3} lcc_best={} lcc_ratio={:.6} cut_used={} path=random",
        r.row.lcc, r.best_lcc, r.row.lcc_ratio, budget
    );
    Ok(())
}

fn cmd_scaling(a: ScalingArgs, w: &Workers) -> Result<()> {
    if a.nodes.len() != a.edges.len() {
        return Err(Error::Config(
            "--nodes and --edges need the same length".into(),
        ));
    }
    let specs: Vec<GenSpec> = a
        .nodes
        .iter()
        .zip(&a.edges)
        .map(|(&n, &e)| GenSpec::new(n, e, a.seed))
        .collect();
    let seeds = SeedList::from_master(a.seed, a.samples)?;
    let report = runtime_scaling(&specs, a.k, &seeds, w)?;
    let mut out = csv::Writer::from_writer(Vec::new());
    for r in &report.rows {
        out.serialize(r)?;
    }
    let buf = out.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    match &a.out {
        Some(p) => write_atomic(p, &buf)?,
        None => print!("{}", String::from_utf8_lossy(&buf)),
    }
    match report.slope {
        Some(s) => println!("log-log slope of runtime vs |E|: {s:.3}"),
        None => println!("log-log slope undefined for a single size"),
    }
    Ok(())
}

fn cmd_speedup(a: SpeedupArgs) -> Result<()> {
    let g = read_graph(&a.graph)?;
    let seeds = SeedList::from_master(a.seed, a.samples)?;
    let reports = speedup_report(&g, &a.k, &seeds, &a.p)?;
    let mut out = csv::Writer::from_writer(Vec::new());
    for r in &reports {
        out.serialize(r)?;
    }
    let buf = out.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    match &a.out {
        Some(p) => write_atomic(p, &buf)?,
        None => print!("{}", String::from_utf8_lossy(&buf)),
    }
    println!("identical selections across p = {:?}", a.p);
    Ok(())
}
