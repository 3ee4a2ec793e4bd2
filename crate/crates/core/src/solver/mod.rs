//! Sample-cut-evaluate subproblem solver and the budget-dispatching solver.
//!
//! A trial samples a uniform spanning tree for one seed, partitions it into
//! `k` balanced classes and removes every graph edge crossing two classes.
//! Trials are independent, so the `(k, seed)` grid runs on a worker pool and
//! is reduced afterwards with a total order (lcc, cut size, k, seed index);
//! the result does not depend on the number of workers.

mod large;
mod small;

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::calibration::CalibrationModel;
use crate::error::{Error, Result};
use crate::graph::{components_masked, is_connected, EdgeId, EdgeSet, Graph};
use crate::partition::{balanced_partition, Partition};
use crate::planar::density_feature;
use crate::seeds::SeedList;
use crate::ust::sample_ust;

pub use large::{estimate_k, search_window, solve_large_budget};
pub(crate) use small::{best_within_budget, detachment_candidates};
pub use small::{corner_vertex, estimate_alpha, grow_subgraph, solve_small_budget};

/// Which branch produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolvePath {
    Baseline,
    SmallBudget,
    LargeBudget,
}

impl SolvePath {
    pub fn as_str(self) -> &'static str {
        match self {
            SolvePath::Baseline => "baseline",
            SolvePath::SmallBudget => "small_budget",
            SolvePath::LargeBudget => "large_budget",
        }
    }
}

/// A removal set together with the vertex split it realizes.
#[derive(Debug, Clone, PartialEq)]
pub struct CutSolution {
    /// Graph edges removed (the full crossing set, not just tree edges).
    pub cut_edges: EdgeSet,
    pub class_of: Vec<usize>,
    pub class_sizes: Vec<usize>,
    /// Largest component of the graph after removing `cut_edges`.
    pub lcc: usize,
    pub k: usize,
    pub seed: Option<u64>,
    pub seed_index: Option<usize>,
    pub path: SolvePath,
    pub feasible: bool,
    /// Subgraph fraction actually used on the small-budget path.
    pub alpha: Option<f64>,
}

impl CutSolution {
    /// No removal: one class, `lcc = |V|`.
    pub fn empty(g: &Graph, path: SolvePath) -> Self {
        let n = g.vertex_count();
        CutSolution {
            cut_edges: EdgeSet::new(),
            class_of: vec![0; n],
            class_sizes: vec![n],
            lcc: n,
            k: 1,
            seed: None,
            seed_index: None,
            path,
            feasible: true,
            alpha: None,
        }
    }

    pub fn cut_count(&self) -> usize {
        self.cut_edges.len()
    }

    fn rank(&self) -> (usize, usize, usize, usize) {
        (
            self.lcc,
            self.cut_count(),
            self.k,
            self.seed_index.unwrap_or(usize::MAX),
        )
    }
}

/// Parameters of the budgeted solver.
#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub budget: usize,
    pub seeds: SeedList,
    /// Half-width of the k search window.
    pub delta: usize,
    pub calibration: Option<CalibrationModel>,
    /// Use this subgraph fraction instead of the fitted estimate.
    pub alpha_override: Option<f64>,
    /// Use this window center instead of the fitted estimate.
    pub k_override: Option<usize>,
}

impl SolveConfig {
    pub fn new(budget: usize, seeds: SeedList) -> Self {
        SolveConfig {
            budget,
            seeds,
            delta: 1,
            calibration: None,
            alpha_override: None,
            k_override: None,
        }
    }

    pub fn samples(&self) -> usize {
        self.seeds.len()
    }
}

/// Fixed-size pool that evaluates trial grids.
pub struct Workers {
    pool: rayon::ThreadPool,
    count: usize,
}

impl Workers {
    pub fn new(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::Config("worker count must be at least 1".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(count)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        Ok(Workers { pool, count })
    }

    pub fn single() -> Self {
        Self::new(1).expect("one worker")
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

/// Every graph edge whose endpoints lie in different classes.
pub fn crossing_edges(g: &Graph, class_of: &[usize]) -> EdgeSet {
    EdgeSet::from_sorted_unchecked(
        g.edges()
            .iter()
            .enumerate()
            .filter(|(_, &(u, v))| class_of[u] != class_of[v])
            .map(|(i, _)| EdgeId(i))
            .collect(),
    )
}

/// Per-`k` spread over all trials of a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialStats {
    pub cut_mean: f64,
    pub cut_std: f64,
    pub lcc_mean: f64,
    pub lcc_std: f64,
    pub trials: usize,
}

fn mean_std(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn run_trial(g: &Graph, k: usize, seed: u64, seed_index: usize) -> Result<CutSolution> {
    let tree = sample_ust(g, seed)?;
    let Partition {
        class_of,
        class_sizes,
        ..
    } = balanced_partition(&tree, k)?;
    let cut_edges = crossing_edges(g, &class_of);
    let lcc = components_masked(g, &cut_edges.mask(g)).lcc;
    Ok(CutSolution {
        cut_edges,
        class_of,
        class_sizes,
        lcc,
        k,
        seed: Some(seed),
        seed_index: Some(seed_index),
        path: SolvePath::Baseline,
        feasible: true,
        alpha: None,
    })
}

/// Runs every `(k, seed)` trial and returns, per `k` in input order, the
/// best trial by lcc then cut size then seed index, with the trial spread.
pub fn solve_grid(
    g: &Graph,
    ks: &[usize],
    seeds: &SeedList,
    workers: &Workers,
) -> Result<Vec<(CutSolution, TrialStats)>> {
    if !is_connected(g) {
        return Err(Error::Disconnected);
    }
    let n = g.vertex_count();
    if let Some(&k) = ks.iter().find(|&&k| k < 1 || k > n) {
        return Err(Error::InvalidK { k, n });
    }
    let m = seeds.len();
    let seed_list = seeds.as_slice();
    let trials: Vec<Result<CutSolution>> = workers.pool.install(|| {
        (0..ks.len() * m)
            .into_par_iter()
            .map(|i| run_trial(g, ks[i / m], seed_list[i % m], i % m))
            .collect()
    });
    let trials = trials.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(trials
        .chunks(m)
        .map(|chunk| {
            let (cut_mean, cut_std) = mean_std(chunk.iter().map(|s| s.cut_count() as f64));
            let (lcc_mean, lcc_std) = mean_std(chunk.iter().map(|s| s.lcc as f64));
            let best = chunk
                .iter()
                .min_by_key(|s| s.rank())
                .expect("non-empty seed list")
                .clone();
            let stats = TrialStats {
                cut_mean,
                cut_std,
                lcc_mean,
                lcc_std,
                trials: m,
            };
            (best, stats)
        })
        .collect())
}

/// Best of `seeds.len()` sample-cut-evaluate trials at fixed `k`.
pub fn solve_subproblem(
    g: &Graph,
    k: usize,
    seeds: &SeedList,
    workers: &Workers,
) -> Result<CutSolution> {
    let mut out = solve_grid(g, &[k], seeds, workers)?;
    Ok(out.pop().expect("one k").0)
}

/// The k = 2 subproblem; its cut size is the dispatch threshold.
pub fn baseline_bisection(g: &Graph, seeds: &SeedList, workers: &Workers) -> Result<CutSolution> {
    solve_subproblem(g, 2, seeds, workers)
}

/// Result of [`solve`] with the quantities that drove the dispatch.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: CutSolution,
    pub budget: usize,
    pub t: f64,
    /// Cut size of the k = 2 baseline.
    pub f2: usize,
    pub baseline_lcc: usize,
    pub runtime_ms: f64,
    pub worker_count: usize,
    pub seeds_used: usize,
}

/// Output record of a solve, serialized as the solution JSON.
#[derive(Debug, Clone, Serialize)]
pub struct SolutionRecord {
    pub graph: GraphSize,
    pub budget: usize,
    pub path: SolvePath,
    pub k: usize,
    pub t: f64,
    pub f2: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub cut_edges: Vec<[usize; 2]>,
    pub cut_edge_ids: Vec<usize>,
    pub cut_count: usize,
    pub lcc: usize,
    pub lcc_ratio: f64,
    pub eta: Option<f64>,
    pub seeds_used: usize,
    pub runtime_ms: f64,
    pub worker_count: usize,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GraphSize {
    pub v: usize,
    pub e: usize,
}

impl SolveReport {
    pub fn record(&self, g: &Graph) -> SolutionRecord {
        let s = &self.solution;
        let n = g.vertex_count();
        SolutionRecord {
            graph: GraphSize {
                v: n,
                e: g.edge_count(),
            },
            budget: self.budget,
            path: s.path,
            k: s.k,
            t: self.t,
            f2: self.f2,
            alpha: s.alpha,
            cut_edges: s
                .cut_edges
                .endpoints(g)
                .into_iter()
                .map(|(u, v)| [u, v])
                .collect(),
            cut_edge_ids: s.cut_edges.iter().map(EdgeId::index).collect(),
            cut_count: s.cut_count(),
            lcc: s.lcc,
            lcc_ratio: s.lcc as f64 / n as f64,
            eta: (!s.cut_edges.is_empty()).then(|| (n - s.lcc) as f64 / s.cut_count() as f64),
            seeds_used: self.seeds_used,
            runtime_ms: self.runtime_ms,
            worker_count: self.worker_count,
        }
    }
}

/// Budgeted dismantling: baseline bisection, then the small- or large-budget
/// branch depending on whether the budget reaches the baseline cut size.
pub fn solve(g: &Graph, cfg: &SolveConfig, workers: &Workers) -> Result<SolveReport> {
    let start = Instant::now();
    if !is_connected(g) {
        return Err(Error::Disconnected);
    }
    if cfg.budget > g.edge_count() {
        return Err(Error::Config(format!(
            "budget {} exceeds |E| = {}",
            cfg.budget,
            g.edge_count()
        )));
    }
    let t = density_feature(g)?;
    let baseline = baseline_bisection(g, &cfg.seeds, workers)?;
    let f2 = baseline.cut_count();
    let solution = if cfg.budget < f2 {
        solve_small_budget(g, cfg, &baseline, workers)?
    } else {
        solve_large_budget(g, cfg, &baseline, workers)?
    };
    debug_assert!(solution.cut_count() <= cfg.budget);
    Ok(SolveReport {
        budget: cfg.budget,
        t,
        f2,
        baseline_lcc: baseline.lcc,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
        worker_count: workers.count(),
        seeds_used: cfg.samples(),
        solution,
    })
}
