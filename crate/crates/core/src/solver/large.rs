//! Large-budget branch: k-way search around the slope-model estimate.

use crate::calibration::CalibrationModel;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::planar::density_feature;

use super::{solve_grid, CutSolution, SolveConfig, SolvePath, Workers};

/// Window center `max(2, round(2 + (cut - f2) / s(t)))`, clamped to `|V|`.
pub fn estimate_k(
    cut: usize,
    f2: usize,
    t: f64,
    cal: Option<&CalibrationModel>,
    vertices: usize,
) -> Result<usize> {
    let cal = cal.ok_or(Error::MissingCalibration("k"))?;
    if cut < f2 {
        return Err(Error::Domain(format!(
            "k estimate needs cut >= f2 ({cut} < {f2})"
        )));
    }
    cal.check_domain(t)?;
    let slope = cal.slope(t);
    if slope.is_nan() || slope <= 0.0 {
        return Err(Error::CalibrationDomain(format!(
            "fitted slope s({t:.4}) = {slope:.4} is not positive"
        )));
    }
    Ok(k_from_slope(cut, f2, slope, vertices))
}

pub(crate) fn k_from_slope(cut: usize, f2: usize, slope: f64, vertices: usize) -> usize {
    let k = (2.0 + (cut - f2) as f64 / slope).round();
    let k = if k.is_finite() { k.max(2.0) } else { f64::MAX };
    (k.min(vertices as f64) as usize).max(2.min(vertices))
}

/// `{center - delta, ..., center + delta}` restricted to `[2, |V|]`, always
/// containing 2, ascending.
pub fn search_window(center: usize, delta: usize, vertices: usize) -> Vec<usize> {
    let lo = center.saturating_sub(delta).max(2);
    let hi = center.saturating_add(delta).min(vertices);
    let mut ks: Vec<usize> = (lo..=hi).collect();
    if vertices >= 2 && ks.first() != Some(&2) {
        ks.insert(0, 2);
    }
    ks
}

/// Best feasible multi-cut over the k window; the baseline bisection is always
/// a candidate, so the result fits any budget at or above its cut size.
pub fn solve_large_budget(
    g: &Graph,
    cfg: &SolveConfig,
    baseline: &CutSolution,
    workers: &Workers,
) -> Result<CutSolution> {
    let n = g.vertex_count();
    let f2 = baseline.cut_count();
    if cfg.budget < f2 {
        return Err(Error::Domain(format!(
            "large-budget branch needs budget >= {f2}, got {}",
            cfg.budget
        )));
    }
    let center = match cfg.k_override {
        Some(k) => k.clamp(2, n),
        None => estimate_k(
            cfg.budget,
            f2,
            density_feature(g)?,
            cfg.calibration.as_ref(),
            n,
        )?,
    };
    let window = search_window(center, cfg.delta, n);
    let others: Vec<usize> = window.iter().copied().filter(|&k| k != 2).collect();
    log::debug!("k window {window:?} (center {center})");

    let mut candidates = vec![baseline.clone()];
    candidates.extend(
        solve_grid(g, &others, &cfg.seeds, workers)?
            .into_iter()
            .map(|(s, _)| s),
    );
    let mut best = candidates
        .into_iter()
        .filter(|s| s.cut_count() <= cfg.budget)
        .min_by_key(|s| s.rank())
        .expect("baseline is feasible");
    best.path = SolvePath::LargeBudget;
    Ok(best)
}
