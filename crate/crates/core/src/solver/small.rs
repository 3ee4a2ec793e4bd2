//! Small-budget branch: bisect a peripheral subgraph and detach part of it.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::calibration::CalibrationModel;
use crate::error::{Error, Result};
use crate::graph::{components_masked, Graph};
use crate::planar::density_feature;
use crate::seeds::SeedList;

use super::{solve_subproblem, CutSolution, SolveConfig, SolvePath, Workers};

const SHRINK: f64 = 0.8;
const MAX_SHRINKS: usize = 10;
const ALPHA_CAP: f64 = 0.95;

/// Fitted fraction of vertices to detach, clamped to `[2/|V|, 0.95]`.
pub fn estimate_alpha(
    cut: usize,
    t: f64,
    f2: usize,
    cal: Option<&CalibrationModel>,
    vertices: usize,
) -> Result<f64> {
    let cal = cal.ok_or(Error::MissingCalibration("alpha"))?;
    if cut < 1 || f2 < 1 || t <= 0.0 {
        return Err(Error::Domain(format!(
            "alpha estimate needs cut >= 1, f2 >= 1, t > 0 (got {cut}, {f2}, {t})"
        )));
    }
    cal.check_domain(t)?;
    let raw = cal.alpha_raw(cut as f64, t, f2 as f64);
    Ok(clamp_alpha(raw, vertices))
}

fn clamp_alpha(alpha: f64, vertices: usize) -> f64 {
    let lo = (2.0 / vertices as f64).min(ALPHA_CAP);
    alpha.clamp(lo, ALPHA_CAP)
}

/// The low-degree starting vertex: minimum degree, then minimum `(x, y)`
/// when coordinates exist, then minimum index.
pub fn corner_vertex(g: &Graph) -> usize {
    let n = g.vertex_count();
    match g.coords() {
        Some(c) => (0..n)
            .min_by(|&a, &b| {
                g.degree(a)
                    .cmp(&g.degree(b))
                    .then(c[a].0.total_cmp(&c[b].0))
                    .then(c[a].1.total_cmp(&c[b].1))
                    .then(a.cmp(&b))
            })
            .unwrap_or(0),
        None => (0..n).min_by_key(|&v| (g.degree(v), v)).unwrap_or(0),
    }
}

/// Grows a connected vertex set of size `size` from the corner vertex, always
/// adding the frontier vertex of smallest degree (ties by index). Vertices
/// are returned in the order they were added.
pub fn grow_subgraph(g: &Graph, size: usize) -> Vec<usize> {
    let n = g.vertex_count();
    let size = size.min(n);
    let mut taken = vec![false; n];
    let mut order = Vec::with_capacity(size);
    let mut frontier = BinaryHeap::new();
    if size == 0 {
        return order;
    }
    let start = corner_vertex(g);
    frontier.push(Reverse((g.degree(start), start)));
    while order.len() < size {
        let Some(Reverse((_, v))) = frontier.pop() else {
            break;
        };
        if taken[v] {
            continue;
        }
        taken[v] = true;
        order.push(v);
        for &(w, _) in g.neighbors(v) {
            if !taken[w] {
                frontier.push(Reverse((g.degree(w), w)));
            }
        }
    }
    order
}

/// Membership mask and the (seed, index) of the trial that produced it.
type Side = (Vec<bool>, Option<(u64, usize)>);

/// Candidate removal sets for one grown subgraph: each side of its best
/// bisection, and the subgraph itself, each cut off from the rest of `g`.
pub(crate) fn detachment_candidates(
    g: &Graph,
    sub_vertices: &[usize],
    seeds: &SeedList,
    workers: &Workers,
) -> Result<Vec<CutSolution>> {
    let n = g.vertex_count();
    let mut sides: Vec<Side> = Vec::new();
    if sub_vertices.len() >= 2 {
        let (sub, _) = g.induced_subgraph(sub_vertices);
        let split = solve_subproblem(&sub, 2, seeds, workers)?;
        let trial = split.seed.zip(split.seed_index);
        for class in 0..2 {
            let mut inside = vec![false; n];
            for (local, &v) in sub_vertices.iter().enumerate() {
                inside[v] = split.class_of[local] == class;
            }
            sides.push((inside, trial));
        }
    }
    let mut whole = vec![false; n];
    for &v in sub_vertices {
        whole[v] = true;
    }
    sides.push((whole, None));

    Ok(sides
        .into_iter()
        .filter_map(|(inside, trial)| {
            let cut = g.boundary_edges(&inside);
            if cut.is_empty() {
                return None;
            }
            let lcc = components_masked(g, &cut.mask(g)).lcc;
            let detached = inside.iter().filter(|&&x| x).count();
            Some(CutSolution {
                cut_edges: cut,
                class_of: inside.iter().map(|&x| usize::from(!x)).collect(),
                class_sizes: vec![detached, n - detached],
                lcc,
                k: 2,
                seed: trial.map(|t| t.0),
                seed_index: trial.map(|t| t.1),
                path: SolvePath::SmallBudget,
                feasible: true,
                alpha: None,
            })
        })
        .collect())
}

/// The feasible candidate with the smallest residual lcc, then fewest edges;
/// earlier candidates win remaining ties.
pub(crate) fn best_within_budget(
    candidates: &[CutSolution],
    budget: usize,
) -> Option<&CutSolution> {
    candidates
        .iter()
        .filter(|s| s.cut_count() <= budget)
        .min_by_key(|s| (s.lcc, s.cut_count()))
}

/// Budget below the baseline cut: detach a bisected peripheral subgraph of
/// `floor(alpha |V|)` vertices. Shrinks alpha by 0.8 up to ten times when no
/// candidate fits the budget, then falls back to removing nothing.
pub fn solve_small_budget(
    g: &Graph,
    cfg: &SolveConfig,
    baseline: &CutSolution,
    workers: &Workers,
) -> Result<CutSolution> {
    let n = g.vertex_count();
    if cfg.budget == 0 {
        return Ok(CutSolution::empty(g, SolvePath::SmallBudget));
    }
    let mut alpha = match cfg.alpha_override {
        Some(a) if a > 0.0 && a < 1.0 => a,
        Some(a) => return Err(Error::Config(format!("alpha must lie in (0, 1), got {a}"))),
        None => estimate_alpha(
            cfg.budget,
            density_feature(g)?,
            baseline.cut_count(),
            cfg.calibration.as_ref(),
            n,
        )?,
    };
    for _ in 0..=MAX_SHRINKS {
        let size = (alpha * n as f64).floor() as usize;
        if size >= 1 {
            let sub = grow_subgraph(g, size);
            let candidates = detachment_candidates(g, &sub, &cfg.seeds, workers)?;
            if let Some(s) = best_within_budget(&candidates, cfg.budget) {
                let mut s = s.clone();
                s.alpha = Some(alpha);
                return Ok(s);
            }
        }
        alpha *= SHRINK;
    }
    log::debug!(
        "no detachment within budget {}; removing nothing",
        cfg.budget
    );
    Ok(CutSolution::empty(g, SolvePath::SmallBudget))
}
