//! Fitting the two empirical priors the solver dispatches with.
//!
//! * Slope model `s(t) = c0 ln t + c1`: the average extra crossing-edge cost
//!   per additional class, from k sweeps of the subproblem solver.
//! * Subgraph-fraction model `alpha = B0 t^-gamma cut^beta1 f2^-beta2`: fitted
//!   in log space to the best fractions found by an exhaustive sweep over
//!   subgraph sizes.
//!
//! No coefficients are built in; a model only exists after fitting.

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::planar::density_feature;
use crate::seeds::SeedList;
use crate::solver::{
    best_within_budget, detachment_candidates, grow_subgraph, solve_grid, Workers,
};

/// Relative slack on `t_range` within which a model may be applied.
pub const DOMAIN_SLACK: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationModel {
    pub c0: f64,
    pub c1: f64,
    #[serde(rename = "B0")]
    pub b0: f64,
    pub gamma: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub t_range: [f64; 2],
    pub r2_slope: f64,
    pub r2_alpha: f64,
    pub corpus: String,
}

impl CalibrationModel {
    pub fn slope(&self, t: f64) -> f64 {
        self.c0 * t.ln() + self.c1
    }

    /// Unclamped subgraph fraction.
    pub fn alpha_raw(&self, cut: f64, t: f64, f2: f64) -> f64 {
        self.b0 * t.powf(-self.gamma) * cut.powf(self.beta1) * f2.powf(-self.beta2)
    }

    pub fn check_domain(&self, t: f64) -> Result<()> {
        let [lo, hi] = self.t_range;
        if t < lo * (1.0 - DOMAIN_SLACK) || t > hi * (1.0 + DOMAIN_SLACK) {
            return Err(Error::CalibrationDomain(format!(
                "t = {t:.4} outside the fitted range [{lo:.4}, {hi:.4}] (+/- 5%)"
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: CalibrationModel = serde_json::from_str(text)?;
        if m.t_range[0].partial_cmp(&m.t_range[1]) == Some(std::cmp::Ordering::Greater)
            || m.t_range.iter().any(|x| x.is_nan())
        {
            return Err(Error::Config(
                "calibration t_range must satisfy lo <= hi".into(),
            ));
        }
        Ok(m)
    }
}

/// Cut and lcc spread of the subproblem solver at one `k` on one graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub graph: String,
    #[serde(rename = "V")]
    pub vertices: usize,
    #[serde(rename = "E")]
    pub edges: usize,
    pub t: f64,
    pub k: usize,
    #[serde(rename = "F_mean")]
    pub cut_mean: f64,
    #[serde(rename = "F_std")]
    pub cut_std: f64,
    pub lcc_mean: f64,
    pub lcc_std: f64,
    pub seeds: usize,
    /// Cut size of the selected (best) trial.
    #[serde(skip)]
    pub cut_best: usize,
    #[serde(skip)]
    pub lcc_best: usize,
}

/// One record per `k` in `k_min..=k_max`.
pub fn sweep_k(
    g: &Graph,
    graph_id: &str,
    k_min: usize,
    k_max: usize,
    seeds: &SeedList,
    workers: &Workers,
) -> Result<Vec<SweepRecord>> {
    let n = g.vertex_count();
    if k_min < 2 || k_min > k_max || k_max > n {
        return Err(Error::Config(format!(
            "k range [{k_min}, {k_max}] must satisfy 2 <= k_min <= k_max <= {n}"
        )));
    }
    let t = density_feature(g)?;
    let ks: Vec<usize> = (k_min..=k_max).collect();
    Ok(solve_grid(g, &ks, seeds, workers)?
        .into_iter()
        .map(|(best, st)| SweepRecord {
            graph: graph_id.to_string(),
            vertices: n,
            edges: g.edge_count(),
            t,
            k: best.k,
            cut_mean: st.cut_mean,
            cut_std: st.cut_std,
            lcc_mean: st.lcc_mean,
            lcc_std: st.lcc_std,
            seeds: st.trials,
            cut_best: best.cut_count(),
            lcc_best: best.lcc,
        })
        .collect())
}

pub fn write_sweep_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    if records.is_empty() {
        w.write_record([
            "graph", "V", "E", "t", "k", "F_mean", "F_std", "lcc_mean", "lcc_std", "seeds",
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Ordinary least squares line with intercept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len() as f64;
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Fit("need at least two paired points".into()));
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx <= 1e-12 * (1.0 + mx * mx) * n {
        return Err(Error::Fit("regressor has no spread".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let pred: Vec<f64> = x.iter().map(|a| intercept + slope * a).collect();
    Ok(LineFit {
        slope,
        intercept,
        r2: r_squared(y, &pred),
    })
}

/// Coefficient of determination, clamped to `[0, 1]`; 1 when `y` is constant
/// and matched exactly.
fn r_squared(y: &[f64], pred: &[f64]) -> f64 {
    let n = y.len() as f64;
    let my = y.iter().sum::<f64>() / n;
    let ss_tot: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let ss_res: f64 = y.iter().zip(pred).map(|(b, p)| (b - p) * (b - p)).sum();
    if ss_tot <= f64::EPSILON * (1.0 + my * my) * n {
        return if ss_res <= 1e-18 * (1.0 + my * my) * n {
            1.0
        } else {
            0.0
        };
    }
    (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    pub c0: f64,
    pub c1: f64,
    pub r2: f64,
    /// `(graph, t, fitted per-graph slope)` in graph-id order.
    pub per_graph: Vec<(String, f64, f64)>,
}

/// Per graph, the slope of mean cut size on `k - 2` through the measured k = 2
/// value; then a least-squares line of those slopes on `ln t`. The returned
/// r² is pooled over all records using the fitted model.
pub fn fit_slope(records: &[SweepRecord]) -> Result<SlopeFit> {
    let mut by_graph: BTreeMap<&str, Vec<&SweepRecord>> = BTreeMap::new();
    for r in records {
        by_graph.entry(r.graph.as_str()).or_default().push(r);
    }
    let mut per_graph = Vec::new();
    for (id, rs) in &by_graph {
        let base = rs
            .iter()
            .find(|r| r.k == 2)
            .ok_or_else(|| Error::Fit(format!("graph {id}: no k = 2 record")))?;
        let mut ks: Vec<usize> = rs.iter().map(|r| r.k).collect();
        ks.sort_unstable();
        ks.dedup();
        if ks.len() < 3 {
            return Err(Error::Fit(format!(
                "graph {id}: need at least 3 distinct k"
            )));
        }
        let (mut num, mut den) = (0.0, 0.0);
        for r in rs {
            let x = r.k as f64 - 2.0;
            num += x * (r.cut_mean - base.cut_mean);
            den += x * x;
        }
        per_graph.push((id.to_string(), base.t, num / den));
    }
    let log_t: Vec<f64> = per_graph.iter().map(|p| p.1.ln()).collect();
    let slopes: Vec<f64> = per_graph.iter().map(|p| p.2).collect();
    let line = linear_fit(&log_t, &slopes).map_err(|_| {
        Error::Fit("slope model needs graphs with at least two distinct t values".into())
    })?;
    let (c0, c1) = (line.slope, line.intercept);

    let mut y = Vec::with_capacity(records.len());
    let mut pred = Vec::with_capacity(records.len());
    for rs in by_graph.values() {
        let base = rs.iter().find(|r| r.k == 2).expect("checked above");
        let s = c0 * base.t.ln() + c1;
        for r in rs {
            y.push(r.cut_mean);
            pred.push(base.cut_mean + s * (r.k as f64 - 2.0));
        }
    }
    Ok(SlopeFit {
        c0,
        c1,
        r2: r_squared(&y, &pred),
        per_graph,
    })
}

/// Best subgraph fraction observed for one (graph, budget).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaRecord {
    pub cut: f64,
    pub t: f64,
    pub f2: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaFit {
    pub b0: f64,
    pub gamma: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub r2: f64,
}

/// Least squares of `ln alpha = ln B0 - gamma ln t + beta1 ln cut - beta2 ln f2`.
pub fn fit_alpha(records: &[AlphaRecord]) -> Result<AlphaFit> {
    if records.len() < 8 {
        return Err(Error::Fit(format!(
            "alpha model needs at least 8 records, got {}",
            records.len()
        )));
    }
    if records
        .iter()
        .any(|r| !(r.cut > 0.0 && r.t > 0.0 && r.f2 > 0.0 && r.alpha > 0.0))
    {
        return Err(Error::Fit("alpha records must be positive".into()));
    }
    let x = DMatrix::from_fn(records.len(), 4, |i, j| {
        let r = &records[i];
        match j {
            0 => 1.0,
            1 => r.t.ln(),
            2 => r.cut.ln(),
            _ => r.f2.ln(),
        }
    });
    let y = DVector::from_iterator(records.len(), records.iter().map(|r| r.alpha.ln()));
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin.is_nan() || smin <= 1e-9 * smax {
        return Err(Error::Fit(
            "alpha design matrix is rank deficient (t, cut or f2 does not vary independently)"
                .into(),
        ));
    }
    let a = svd
        .solve(&y, 0.0)
        .map_err(|e| Error::Fit(format!("least squares: {e}")))?;
    let pred = &x * &a;
    Ok(AlphaFit {
        b0: a[0].exp(),
        gamma: -a[1],
        beta1: a[2],
        beta2: -a[3],
        r2: r_squared(y.as_slice(), pred.as_slice()),
    })
}

/// For every budget in `cuts`, the subgraph fraction `n_s / |V|` over
/// `n_s = 2, 4, ...` (up to 95% of the vertices) whose best detachment leaves
/// the smallest lcc; ties go to the smaller subgraph. Budgets no size can
/// satisfy are omitted. Returns `(cut, alpha, lcc)`.
pub fn alpha_oracle(
    g: &Graph,
    cuts: &[usize],
    seeds: &SeedList,
    workers: &Workers,
) -> Result<Vec<(usize, f64, usize)>> {
    let n = g.vertex_count();
    let max_size = (0.95 * n as f64).floor() as usize;
    let order = grow_subgraph(g, max_size);
    let mut best: Vec<Option<(usize, usize)>> = vec![None; cuts.len()]; // (lcc, size)
    for size in (2..=max_size).step_by(2) {
        let candidates = detachment_candidates(g, &order[..size], seeds, workers)?;
        for (slot, &cut) in best.iter_mut().zip(cuts) {
            if let Some(s) = best_within_budget(&candidates, cut) {
                if slot.is_none_or(|(lcc, _)| s.lcc < lcc) {
                    *slot = Some((s.lcc, size));
                }
            }
        }
    }
    Ok(cuts
        .iter()
        .zip(best)
        .filter_map(|(&cut, b)| b.map(|(lcc, size)| (cut, size as f64 / n as f64, lcc)))
        .collect())
}

/// Settings for [`calibrate`].
#[derive(Debug, Clone)]
pub struct CalibrateOptions {
    pub k_max: usize,
    pub seeds: SeedList,
    /// Seeds for the subgraph bisections of the alpha sweep.
    pub alpha_seeds: SeedList,
}

/// Everything a calibration run produced.
#[derive(Debug, Clone)]
pub struct Calibration {
    pub model: CalibrationModel,
    pub sweeps: Vec<SweepRecord>,
    pub alpha_records: Vec<AlphaRecord>,
    pub slope: SlopeFit,
}

/// Sweeps k on every corpus graph, runs the alpha oracle for every budget
/// below each graph's baseline cut, and fits both models.
pub fn calibrate(
    corpus: &[(String, Graph)],
    opts: &CalibrateOptions,
    workers: &Workers,
) -> Result<Calibration> {
    if corpus.is_empty() {
        return Err(Error::Fit("empty calibration corpus".into()));
    }
    let mut sweeps = Vec::new();
    let mut alpha_records = Vec::new();
    let (mut t_lo, mut t_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (id, g) in corpus {
        let k_max = opts.k_max.min(g.vertex_count());
        let recs = sweep_k(g, id, 2, k_max, &opts.seeds, workers)?;
        let t = recs[0].t;
        t_lo = t_lo.min(t);
        t_hi = t_hi.max(t);
        let f2 = recs[0].cut_best;
        let cuts: Vec<usize> = (1..f2).collect();
        for (cut, alpha, _) in alpha_oracle(g, &cuts, &opts.alpha_seeds, workers)? {
            alpha_records.push(AlphaRecord {
                cut: cut as f64,
                t,
                f2: f2 as f64,
                alpha,
            });
        }
        log::info!("calibrated {id}: t = {t:.4}, f2 = {f2}");
        sweeps.extend(recs);
    }
    let slope = fit_slope(&sweeps)?;
    let alpha = fit_alpha(&alpha_records)?;
    let (vmin, vmax) = minmax(corpus.iter().map(|(_, g)| g.vertex_count()));
    let (emin, emax) = minmax(corpus.iter().map(|(_, g)| g.edge_count()));
    let model = CalibrationModel {
        c0: slope.c0,
        c1: slope.c1,
        b0: alpha.b0,
        gamma: alpha.gamma,
        beta1: alpha.beta1,
        beta2: alpha.beta2,
        t_range: [t_lo, t_hi],
        r2_slope: slope.r2,
        r2_alpha: alpha.r2,
        corpus: format!(
            "{} graphs, |V| {vmin}..{vmax}, |E| {emin}..{emax}, k 2..{}, m = {}, {} alpha records",
            corpus.len(),
            opts.k_max,
            opts.seeds.len(),
            alpha_records.len()
        ),
    };
    Ok(Calibration {
        model,
        sweeps,
        alpha_records,
        slope,
    })
}

fn minmax(it: impl Iterator<Item = usize>) -> (usize, usize) {
    it.fold((usize::MAX, 0), |(lo, hi), x| (lo.min(x), hi.max(x)))
}
