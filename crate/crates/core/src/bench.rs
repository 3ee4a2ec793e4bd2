//! Metrics, the random-removal baseline, sweeps and timing reports.

use std::io::Write;
use std::time::Instant;

use rand::seq::index::sample;
use serde::Serialize;

use crate::calibration::linear_fit;
use crate::error::{Error, Result};
use crate::graph::{components, components_masked, EdgeSet, Graph};
use crate::planar::{density_feature, generate, GenSpec};
use crate::seeds::{rng_from_seed, SeedList};
use crate::solver::{solve, solve_grid, SolveConfig, Workers};

/// One row of a sweep CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub graph: String,
    #[serde(rename = "V")]
    pub vertices: usize,
    #[serde(rename = "E")]
    pub edges: usize,
    pub t: f64,
    pub method: String,
    pub budget: usize,
    pub cut_ratio: f64,
    pub cut_used: usize,
    /// Exact for the solver; mean over trials for the random baseline.
    pub lcc: f64,
    pub lcc_ratio: f64,
    pub eta: Option<f64>,
    pub runtime_ms: f64,
    pub seed_count: usize,
}

pub const METRICS_HEADER: [&str; 13] = [
    "graph",
    "V",
    "E",
    "t",
    "method",
    "budget",
    "cut_ratio",
    "cut_used",
    "lcc",
    "lcc_ratio",
    "eta",
    "runtime_ms",
    "seed_count",
];

pub fn write_metrics_csv<W: Write>(rows: &[MetricsRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(METRICS_HEADER)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Lcc reduction per removed edge, `(|V| - L(G \ F)) / |F|` on a connected graph.
pub fn per_edge_efficiency(g: &Graph, f: &EdgeSet) -> Result<f64> {
    if f.is_empty() {
        return Err(Error::EmptyCut);
    }
    let lcc = components(g, f).lcc;
    Ok((g.vertex_count() - lcc) as f64 / f.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomBaseline {
    pub row: MetricsRow,
    pub best_lcc: usize,
    pub lcc_per_trial: Vec<usize>,
}

/// Removes `budget` uniformly random edges in each of `trials` trials.
pub fn random_baseline(
    g: &Graph,
    graph_id: &str,
    budget: usize,
    trials: usize,
    seed: u64,
) -> Result<RandomBaseline> {
    let m = g.edge_count();
    if budget > m {
        return Err(Error::Config(format!("budget {budget} exceeds |E| = {m}")));
    }
    if trials == 0 {
        return Err(Error::Config(
            "random baseline needs at least one trial".into(),
        ));
    }
    let start = Instant::now();
    let mut rng = rng_from_seed(seed);
    let mut mask = vec![false; m];
    let lcc_per_trial: Vec<usize> = (0..trials)
        .map(|_| {
            mask.fill(false);
            for e in sample(&mut rng, m, budget) {
                mask[e] = true;
            }
            components_masked(g, &mask).lcc
        })
        .collect();
    let n = g.vertex_count();
    let mean = lcc_per_trial.iter().sum::<usize>() as f64 / trials as f64;
    let row = MetricsRow {
        graph: graph_id.into(),
        vertices: n,
        edges: m,
        t: density_feature(g).unwrap_or(f64::NAN),
        method: "random".into(),
        budget,
        cut_ratio: budget as f64 / m as f64,
        cut_used: budget,
        lcc: mean,
        lcc_ratio: mean / n as f64,
        eta: (budget > 0).then(|| (n as f64 - mean) / budget as f64),
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
        seed_count: trials,
    };
    Ok(RandomBaseline {
        best_lcc: *lcc_per_trial.iter().min().expect("trials > 0"),
        row,
        lcc_per_trial,
    })
}

/// Budget `floor(fraction |E|)` for each fraction, solver rows first and then,
/// when `baseline_trials` is set, the random baseline at the same budget.
pub fn budget_sweep(
    g: &Graph,
    graph_id: &str,
    fractions: &[f64],
    template: &SolveConfig,
    baseline_trials: Option<usize>,
    workers: &Workers,
) -> Result<Vec<MetricsRow>> {
    if let Some(f) = fractions.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
        return Err(Error::Config(format!("budget fraction {f} outside (0, 1]")));
    }
    let n = g.vertex_count();
    let m = g.edge_count();
    let mut rows = Vec::new();
    for &frac in fractions {
        let budget = (frac * m as f64).floor() as usize;
        let cfg = SolveConfig {
            budget,
            ..template.clone()
        };
        let report = solve(g, &cfg, workers)?;
        let s = &report.solution;
        rows.push(MetricsRow {
            graph: graph_id.into(),
            vertices: n,
            edges: m,
            t: report.t,
            method: s.path.as_str().into(),
            budget,
            cut_ratio: budget as f64 / m as f64,
            cut_used: s.cut_count(),
            lcc: s.lcc as f64,
            lcc_ratio: s.lcc as f64 / n as f64,
            eta: (s.cut_count() > 0).then(|| (n - s.lcc) as f64 / s.cut_count() as f64),
            runtime_ms: report.runtime_ms,
            seed_count: report.seeds_used,
        });
        if let Some(trials) = baseline_trials {
            let seed = template.seeds.as_slice()[0] ^ budget as u64;
            rows.push(random_baseline(g, graph_id, budget, trials, seed)?.row);
        }
    }
    Ok(rows)
}

/// Median wall time in milliseconds of three runs of `f`.
pub fn median_of_three<T>(mut f: impl FnMut() -> Result<T>) -> Result<(f64, T)> {
    let mut times = Vec::with_capacity(3);
    let mut last = None;
    for _ in 0..3 {
        let start = Instant::now();
        let out = f()?;
        times.push(start.elapsed().as_secs_f64() * 1e3);
        last = Some(out);
    }
    times.sort_by(f64::total_cmp);
    Ok((times[1], last.expect("three runs")))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    #[serde(rename = "V")]
    pub vertices: usize,
    #[serde(rename = "E")]
    pub edges: usize,
    pub k: usize,
    pub samples: usize,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// Slope of ln T against ln |E|; `None` with fewer than two sizes.
    pub slope: Option<f64>,
}

/// Times the fixed-k subproblem on one generated graph per spec.
pub fn runtime_scaling(
    specs: &[GenSpec],
    k: usize,
    seeds: &SeedList,
    workers: &Workers,
) -> Result<ScalingReport> {
    let mut rows = Vec::new();
    for spec in specs {
        let g = generate(*spec)?;
        let (ms, _) = median_of_three(|| solve_grid(&g, &[k], seeds, workers))?;
        rows.push(ScalingRow {
            vertices: g.vertex_count(),
            edges: g.edge_count(),
            k,
            samples: seeds.len(),
            runtime_ms: ms,
        });
    }
    let mut sizes: Vec<usize> = rows.iter().map(|r| r.edges).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let slope = if sizes.len() >= 2 {
        let x: Vec<f64> = rows.iter().map(|r| (r.edges as f64).ln()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.runtime_ms.ln()).collect();
        Some(linear_fit(&x, &y)?.slope)
    } else {
        None
    };
    Ok(ScalingReport { rows, slope })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedupReport {
    pub p: usize,
    pub wall_ms: f64,
    pub speedup: f64,
    pub efficiency: f64,
}

/// Runs the same `(k, seed)` grid with each worker count and compares timings
/// against one worker. Any difference in the selected solutions is an error.
pub fn speedup_report(
    g: &Graph,
    ks: &[usize],
    seeds: &SeedList,
    p_values: &[usize],
) -> Result<Vec<SpeedupReport>> {
    if !p_values.contains(&1) {
        return Err(Error::Config(
            "speedup report needs p = 1 in the worker counts".into(),
        ));
    }
    let mut runs = Vec::new();
    for &p in p_values {
        let workers = Workers::new(p)?;
        let (ms, out) = median_of_three(|| solve_grid(g, ks, seeds, &workers))?;
        runs.push((p, ms, out));
    }
    let (_, t1, reference) = runs.iter().find(|r| r.0 == 1).expect("p = 1 present");
    let t1 = *t1;
    for (p, _, out) in &runs {
        if out != reference {
            return Err(Error::Determinism(format!(
                "selected solutions with {p} workers differ from 1 worker"
            )));
        }
    }
    Ok(runs
        .iter()
        .map(|&(p, ms, _)| {
            let speedup = t1 / ms;
            SpeedupReport {
                p,
                wall_ms: ms,
                speedup: if p == 1 { 1.0 } else { speedup },
                efficiency: if p == 1 { 1.0 } else { speedup / p as f64 },
            }
        })
        .collect())
}

/// `vertex,x,y,class` rows for plotting a partition.
pub fn write_layout_csv<W: Write>(g: &Graph, class_of: &[usize], out: W) -> Result<()> {
    let coords = g
        .coords()
        .ok_or_else(|| Error::Config("layout export needs vertex coordinates".into()))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["vertex", "x", "y", "class"])?;
    for (v, (&(x, y), c)) in coords.iter().zip(class_of).enumerate() {
        w.serialize((v, x, y, c))?;
    }
    w.flush()?;
    Ok(())
}
