//! Sliced explained-variation scores and screening rules.
//!
//! The dependence score of a metric-object sample against a real target is
//! estimated by slicing the target into quantile cells and comparing the
//! expected within-cell Fréchet variance against the global one:
//! score = 1 − (Σ_m p̂_m V̂_m) / V̂_F. Assets are ranked by score and screened
//! either by a threshold κ·n^(−τ) or by keeping the top d. Simple absolute
//! correlation (SIS) and window momentum baselines live here too.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metric::{frechet_mean, frechet_variance, MetricObject, MetricSample};

/// Selection rules available to the studies and the backtest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Mds,
    Sis,
    Mtm,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Mds => "MDS",
            Method::Sis => "SIS",
            Method::Mtm => "MTM",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        match s.to_ascii_lowercase().as_str() {
            "mds" => Ok(Method::Mds),
            "sis" => Ok(Method::Sis),
            "mtm" => Ok(Method::Mtm),
            other => Err(Error::InvalidParameter(format!(
                "unknown method '{other}' (expected mds, sis, or mtm)"
            ))),
        }
    }
}

/// Quantile cells over realized target values.
///
/// Cells are contiguous rank intervals of the target's order statistics with
/// sizes ⌊n/M⌋ or ⌈n/M⌉; ties are broken by time index, so any strictly
/// increasing transform of the target yields the identical partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlicePartition {
    cell_of: Vec<usize>,
    cell_counts: Vec<usize>,
}

impl SlicePartition {
    /// Number of observations n.
    pub fn len(&self) -> usize {
        self.cell_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cell_of.is_empty()
    }

    /// Number of cells M.
    pub fn n_cells(&self) -> usize {
        self.cell_counts.len()
    }

    /// Cell index (0-based) of each time index.
    pub fn cell_of(&self) -> &[usize] {
        &self.cell_of
    }

    /// Observation count per cell.
    pub fn cell_counts(&self) -> &[usize] {
        &self.cell_counts
    }

    /// Time indices grouped by cell, in time order within each cell.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.n_cells()];
        for (t, &c) in self.cell_of.iter().enumerate() {
            groups[c].push(t);
        }
        groups
    }
}

/// Partitions `y` into `n_cells` quantile cells.
///
/// The first `n mod M` cells take the extra observation. Fails when the
/// target is shorter than the cell count or completely constant.
pub fn build_partition(y: &[f64], n_cells: usize) -> Result<SlicePartition> {
    let n = y.len();
    if n_cells < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 cells, got {n_cells}"
        )));
    }
    if n_cells > n {
        return Err(Error::InfeasiblePartition {
            cells: n_cells,
            samples: n,
        });
    }
    for (i, v) in y.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                what: "target series",
                index: i,
            });
        }
    }
    if y.iter().all(|&v| v == y[0]) {
        return Err(Error::DegenerateTarget(n));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| y[a].total_cmp(&y[b]).then(a.cmp(&b)));

    let base = n / n_cells;
    let extra = n % n_cells;
    let mut cell_of = vec![0usize; n];
    let mut cell_counts = vec![0usize; n_cells];
    let mut pos = 0usize;
    for (cell, count) in cell_counts.iter_mut().enumerate() {
        let size = base + usize::from(cell < extra);
        for &t in &order[pos..pos + size] {
            cell_of[t] = cell;
        }
        *count = size;
        pos += size;
    }
    Ok(SlicePartition {
        cell_of,
        cell_counts,
    })
}

/// One asset's sliced explained-variation score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdsScore {
    /// Explained-variation value in [0, 1].
    pub value: f64,
    /// Set when the covariate sample has zero Fréchet variance; the score is
    /// then defined as 0 because a constant asset carries no signal.
    pub degenerate: bool,
}

/// Scores a metric-object sample against a prebuilt target partition.
pub fn mds_score<T: MetricObject>(
    objects: &MetricSample<T>,
    partition: &SlicePartition,
) -> Result<MdsScore> {
    let mean = frechet_mean(objects)?;
    let global = frechet_variance(objects, &mean)?;
    mds_score_with_global_variance(objects, partition, global)
}

/// Same as [`mds_score`] but reuses a precomputed global Fréchet variance —
/// useful when the same object sample is scored against many partitions.
pub fn mds_score_with_global_variance<T: MetricObject>(
    objects: &MetricSample<T>,
    partition: &SlicePartition,
    global_variance: f64,
) -> Result<MdsScore> {
    if objects.len() != partition.len() {
        return Err(Error::DimensionMismatch {
            left: objects.len(),
            right: partition.len(),
        });
    }
    if global_variance == 0.0 {
        return Ok(MdsScore {
            value: 0.0,
            degenerate: true,
        });
    }

    let n = objects.len() as f64;
    let slice = objects.as_slice();
    let mut within = 0.0;
    for cell in partition.members() {
        // Empty cells contribute zero to the within-cell sum.
        if cell.is_empty() {
            continue;
        }
        let members: Vec<&T> = cell.iter().map(|&t| &slice[t]).collect();
        let cell_mean = T::mean_of(&members)?;
        let mut cell_var = 0.0;
        for obj in &members {
            cell_var += obj.dist_sq(&cell_mean)?;
        }
        cell_var /= cell.len() as f64;
        within += (cell.len() as f64 / n) * cell_var;
    }
    // The law of total variance bounds `within` by the global variance; the
    // clamp only absorbs last-bit rounding.
    let value = (1.0 - within / global_variance).clamp(0.0, 1.0);
    Ok(MdsScore {
        value,
        degenerate: false,
    })
}

/// Per-asset scores, descending ranking, and a selected index set.
#[derive(Debug, Clone)]
pub struct ScreenResult {
    /// Score per asset.
    pub scores: Vec<f64>,
    /// Asset indices sorted by descending score, ties broken by lower index.
    pub ranking: Vec<usize>,
    /// Indices chosen by the last screening rule applied (empty after scoring).
    pub selected: Vec<usize>,
    /// Degenerate-covariate diagnostics per asset.
    pub degenerate: Vec<bool>,
}

impl ScreenResult {
    /// Builds the ranking from raw scores.
    pub fn from_scores(scores: Vec<f64>, degenerate: Vec<bool>) -> Self {
        let mut ranking: Vec<usize> = (0..scores.len()).collect();
        ranking.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        ScreenResult {
            scores,
            ranking,
            selected: Vec::new(),
            degenerate,
        }
    }

    /// Threshold rule: every asset with score ≥ κ·n^(−τ). The comparison is
    /// inclusive. Returns indices in ascending order.
    pub fn threshold_set(&self, kappa: f64, tau: f64, n: usize) -> Result<Vec<usize>> {
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kappa must be nonnegative, got {kappa}"
            )));
        }
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tau must be nonnegative, got {tau}"
            )));
        }
        let threshold = kappa * (n as f64).powf(-tau);
        Ok((0..self.scores.len())
            .filter(|&k| self.scores[k] >= threshold)
            .collect())
    }

    /// Fixed-size rule: the d assets with the largest scores (all assets when
    /// d ≥ p). Returns indices in ascending order.
    pub fn top_d(&self, d: usize) -> Result<Vec<usize>> {
        if d == 0 {
            return Err(Error::InvalidParameter(
                "screening size d must be positive".into(),
            ));
        }
        let take = d.min(self.ranking.len());
        let mut set: Vec<usize> = self.ranking[..take].to_vec();
        set.sort_unstable();
        Ok(set)
    }

    /// Rank position (1-based) of each asset; position 1 is the top score.
    pub fn rank_positions(&self) -> Vec<usize> {
        let mut pos = vec![0usize; self.ranking.len()];
        for (i, &k) in self.ranking.iter().enumerate() {
            pos[k] = i + 1;
        }
        pos
    }
}

/// Scores every asset of a panel against a shared partition.
///
/// Assets are evaluated independently (possibly concurrently); the result is
/// bitwise independent of the worker count.
pub fn score_all_assets<T: MetricObject>(
    panel: &[MetricSample<T>],
    partition: &SlicePartition,
) -> Result<ScreenResult> {
    if panel.is_empty() {
        return Err(Error::EmptyInput("asset panel"));
    }
    for sample in panel {
        if sample.len() != partition.len() {
            return Err(Error::DimensionMismatch {
                left: sample.len(),
                right: partition.len(),
            });
        }
    }
    let scored: Vec<MdsScore> = panel
        .par_iter()
        .map(|sample| mds_score(sample, partition))
        .collect::<Result<Vec<_>>>()?;
    let scores = scored.iter().map(|s| s.value).collect();
    let degenerate = scored.iter().map(|s| s.degenerate).collect();
    Ok(ScreenResult::from_scores(scores, degenerate))
}

/// Absolute Pearson correlation; 0 when either series is constant.
pub fn sis_score(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            actual: x.len(),
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(0.0);
    }
    Ok((sxy / (sxx * syy).sqrt()).abs())
}

/// Cumulative simple return over the window: Π(1 + r_t) − 1.
pub fn momentum_score(returns: &[f64]) -> f64 {
    returns.iter().fold(1.0, |acc, r| acc * (1.0 + r)) - 1.0
}
