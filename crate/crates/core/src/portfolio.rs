//! Covariance estimation, the capped minimum-variance program, weighting
//! schemes, and performance metrics.
//!
//! The allocation program is min ω'Σω over the capped simplex
//! {ω ≥ 0, Σω = 1, ω_j ≤ u}. It is solved by projected gradient descent with
//! step 1/L (L the largest eigenvalue, found by power iteration) and an exact
//! sort-based projection onto the capped simplex, so the solver is
//! deterministic and dependency-free.

use crate::error::{Error, Result};

/// Symmetric covariance matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl CovMatrix {
    /// Builds from row-major data; rejects asymmetry beyond 1e-12 (relative
    /// to the largest entry) and negative diagonals.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyInput("covariance matrix"));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                left: data.len(),
                right: dim * dim,
            });
        }
        for (i, v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    what: "covariance matrix",
                    index: i,
                });
            }
        }
        let scale = data.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..dim {
            if data[i * dim + i] < 0.0 {
                return Err(Error::NotPositiveSemidefinite {
                    eigenvalue: data[i * dim + i],
                });
            }
            for j in (i + 1)..dim {
                if (data[i * dim + j] - data[j * dim + i]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidParameter(format!(
                        "matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(CovMatrix { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn matvec(&self, v: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.dim)) {
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    /// Quadratic form ω'Σω.
    pub fn quad_form(&self, w: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            let row = &self.data[i * self.dim..(i + 1) * self.dim];
            let si: f64 = row.iter().zip(w).map(|(a, b)| a * b).sum();
            acc += w[i] * si;
        }
        acc
    }

    /// Largest eigenvalue by power iteration (fixed 200 iterations,
    /// deterministic start).
    pub fn largest_eigenvalue(&self) -> f64 {
        let d = self.dim;
        let mut v: Vec<f64> = (0..d).map(|i| 1.0 + 0.1 * ((i + 1) as f64).sin()).collect();
        let mut buf = vec![0.0; d];
        normalize(&mut v);
        for _ in 0..200 {
            self.matvec(&v, &mut buf);
            let norm = buf.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            for (a, b) in v.iter_mut().zip(&buf) {
                *a = b / norm;
            }
        }
        self.matvec(&v, &mut buf);
        v.iter().zip(&buf).map(|(a, b)| a * b).sum()
    }

    /// Smallest eigenvalue via power iteration on λ_max·I − Σ.
    pub fn smallest_eigenvalue(&self) -> f64 {
        let lmax = self.largest_eigenvalue();
        let d = self.dim;
        let shifted: Vec<f64> = (0..d * d)
            .map(|k| {
                let (i, j) = (k / d, k % d);
                let base = if i == j { lmax } else { 0.0 };
                base - self.data[k]
            })
            .collect();
        let b = CovMatrix {
            dim: d,
            data: shifted,
        };
        lmax - b.largest_eigenvalue()
    }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

fn check_rect(returns: &[Vec<f64>]) -> Result<(usize, usize)> {
    let t = returns.len();
    let d = returns.first().map(|r| r.len()).unwrap_or(0);
    if t == 0 || d == 0 {
        return Err(Error::EmptyInput("returns matrix"));
    }
    for row in returns {
        if row.len() != d {
            return Err(Error::DimensionMismatch {
                left: row.len(),
                right: d,
            });
        }
    }
    Ok((t, d))
}

/// Unbiased sample covariance (T − 1 denominator) of the columns.
pub fn sample_cov(returns: &[Vec<f64>]) -> Result<CovMatrix> {
    let (t, d) = check_rect(returns)?;
    if t < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            actual: t,
        });
    }
    let mut means = vec![0.0; d];
    for row in returns {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in means.iter_mut() {
        *m /= t as f64;
    }
    let mut data = vec![0.0; d * d];
    for row in returns {
        for i in 0..d {
            let di = row[i] - means[i];
            for j in i..d {
                data[i * d + j] += di * (row[j] - means[j]);
            }
        }
    }
    let denom = (t - 1) as f64;
    for i in 0..d {
        for j in i..d {
            let v = data[i * d + j] / denom;
            data[i * d + j] = v;
            data[j * d + i] = v;
        }
    }
    CovMatrix::new(d, data)
}

/// Correlation-shrinkage covariance: sample variances are kept and
/// off-diagonal sample correlations are shrunk toward zero by
/// λ* = clamp(Σ_{i<j} var̂(r_ij) / Σ_{i<j} r_ij², [0, 1]), with var̂(r_ij) the
/// asymptotic estimator from centered standardized-product deviations.
pub fn shrinkage_cov(returns: &[Vec<f64>]) -> Result<CovMatrix> {
    let (t, d) = check_rect(returns)?;
    if t < 3 {
        return Err(Error::InsufficientData {
            required: 3,
            actual: t,
        });
    }
    let sample = sample_cov(returns)?;
    if d == 1 {
        return Ok(sample);
    }
    let tf = t as f64;

    let mut means = vec![0.0; d];
    for row in returns {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in means.iter_mut() {
        *m /= tf;
    }
    let sds: Vec<f64> = (0..d).map(|i| sample.get(i, i).sqrt()).collect();

    // Standardized observations; a constant column gets zero scores and
    // therefore zero correlation with everything.
    let z: Vec<Vec<f64>> = returns
        .iter()
        .map(|row| {
            (0..d)
                .map(|i| {
                    if sds[i] > 0.0 {
                        (row[i] - means[i]) / sds[i]
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();

    let mut var_sum = 0.0;
    let mut sq_sum = 0.0;
    let mut corr = vec![0.0; d * d];
    for i in 0..d {
        corr[i * d + i] = 1.0;
        for j in (i + 1)..d {
            let wbar: f64 = z.iter().map(|row| row[i] * row[j]).sum::<f64>() / tf;
            let r = wbar * tf / (tf - 1.0);
            let var_r: f64 = z
                .iter()
                .map(|row| {
                    let dev = row[i] * row[j] - wbar;
                    dev * dev
                })
                .sum::<f64>()
                * tf
                / (tf - 1.0).powi(3);
            var_sum += var_r;
            sq_sum += r * r;
            corr[i * d + j] = r;
            corr[j * d + i] = r;
        }
    }
    let lambda = if sq_sum > 0.0 {
        (var_sum / sq_sum).clamp(0.0, 1.0)
    } else {
        1.0
    };

    let mut data = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            data[i * d + j] = if i == j {
                sample.get(i, i)
            } else {
                (1.0 - lambda) * corr[i * d + j] * sds[i] * sds[j]
            };
        }
    }
    CovMatrix::new(d, data)
}

/// Long-only weights on the capped simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    /// Validates the budget (1e-8) and box constraints.
    pub fn new(weights: Vec<f64>, cap: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput("weight vector"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidParameter(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        for &w in &weights {
            if !(w.is_finite() && (-1e-12..=cap + 1e-12).contains(&w)) {
                return Err(Error::InvalidParameter(format!(
                    "weight {w} violates [0, {cap}]"
                )));
            }
        }
        Ok(WeightVector { weights })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Exact Euclidean projection onto {ω : ω ≥ 0, Σω = 1, ω_j ≤ cap}.
///
/// Sort-based pivot search over the breakpoints of the piecewise-linear
/// function g(θ) = Σ clamp(z_j − θ, 0, cap); finite and O(d log d). The
/// caller guarantees d·cap ≥ 1.
pub fn project_capped_simplex(z: &[f64], cap: f64) -> Vec<f64> {
    let d = z.len();
    debug_assert!(d as f64 * cap >= 1.0 - 1e-12);

    // Events sorted by θ: at z_j − cap coordinate j drops out of saturation
    // into the middle set; at z_j it leaves the middle set for zero.
    let mut events: Vec<(f64, bool, f64)> = Vec::with_capacity(2 * d);
    for &zj in z {
        events.push((zj - cap, true, zj));
        events.push((zj, false, zj));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut saturated = d; // coordinates at the cap
    let mut middle = 0usize; // coordinates strictly inside (0, cap)
    let mut middle_sum = 0.0; // Σ z_j over the middle set
    let mut prev_theta = events[0].0;

    let theta = 'search: {
        for &(at, enters, zj) in &events {
            // g on [prev_theta, at) with the current state.
            let g_at = cap * saturated as f64 + middle_sum - middle as f64 * at;
            if g_at <= 1.0 {
                if middle > 0 {
                    break 'search (cap * saturated as f64 + middle_sum - 1.0) / middle as f64;
                }
                // Constant segment; only reachable when g equals 1 exactly.
                break 'search prev_theta;
            }
            if enters {
                saturated -= 1;
                middle += 1;
                middle_sum += zj;
            } else {
                middle -= 1;
                middle_sum -= zj;
            }
            prev_theta = at;
        }
        // Unreachable under the feasibility precondition: g starts at
        // cap·d ≥ 1 and crosses 1 before all coordinates hit zero.
        prev_theta
    };

    z.iter().map(|&zj| (zj - theta).clamp(0.0, cap)).collect()
}

/// Minimizer of ω'Σω over the capped simplex.
///
/// Projected gradient with step 1/L (L = largest eigenvalue via 200 power
/// iterations), uniform start, exact capped-simplex projection each step, and
/// stopping when iterates move less than 1e-10 in max norm or after 50000
/// iterations.
pub fn min_var_weights(sigma: &CovMatrix, cap: f64) -> Result<WeightVector> {
    let d = sigma.dim();
    if !(cap.is_finite() && cap > 0.0 && cap <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "cap must lie in (0, 1], got {cap}"
        )));
    }
    if (d as f64) * cap < 1.0 - 1e-12 {
        return Err(Error::InfeasibleCap { dim: d, cap });
    }
    let min_eig = sigma.smallest_eigenvalue();
    if min_eig < -1e-8 {
        return Err(Error::NotPositiveSemidefinite {
            eigenvalue: min_eig,
        });
    }

    let lmax = sigma.largest_eigenvalue();
    let uniform = vec![1.0 / d as f64; d];
    let mut w = project_capped_simplex(&uniform, cap);
    if lmax <= 0.0 {
        // Zero matrix: every feasible point is optimal.
        return WeightVector::new(w, cap);
    }
    let step = 1.0 / lmax;
    let mut grad = vec![0.0; d];
    for _ in 0..50_000 {
        sigma.matvec(&w, &mut grad);
        let trial: Vec<f64> = w.iter().zip(&grad).map(|(wi, gi)| wi - step * gi).collect();
        let next = project_capped_simplex(&trial, cap);
        let delta = w
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        w = next;
        if delta < 1e-10 {
            break;
        }
    }
    WeightVector::new(w, cap)
}

/// Equal weights 1/d.
pub fn equal_weights(d: usize) -> Result<WeightVector> {
    if d == 0 {
        return Err(Error::EmptyInput("weight vector"));
    }
    WeightVector::new(vec![1.0 / d as f64; d], 1.0)
}

/// Score-squared weights ω_j = s_j² / Σ s_k²; equal weights when all scores
/// are zero.
pub fn score_squared_weights(scores: &[f64]) -> Result<WeightVector> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("scores"));
    }
    let sq: Vec<f64> = scores.iter().map(|s| s * s).collect();
    let total: f64 = sq.iter().sum();
    if total == 0.0 {
        return equal_weights(scores.len());
    }
    WeightVector::new(sq.iter().map(|s| s / total).collect(), 1.0)
}

/// NAV path with a bankruptcy marker.
#[derive(Debug, Clone, PartialEq)]
pub struct NavPath {
    /// NAV per day, starting at 1.0 before the first holding day. Truncated
    /// before the first nonpositive value.
    pub values: Vec<f64>,
    /// Set when compounding drove the NAV to zero or below.
    pub bankrupt: bool,
}

/// Compounds a buy-and-hold NAV across holding periods.
///
/// Weights are set at each rebalance and drift with returns inside the
/// period; an empty weight vector holds cash for that period.
pub fn nav_path(schedule: &[WeightVector], period_returns: &[Vec<Vec<f64>>]) -> Result<NavPath> {
    if schedule.len() != period_returns.len() {
        return Err(Error::DimensionMismatch {
            left: schedule.len(),
            right: period_returns.len(),
        });
    }
    let mut values = vec![1.0];
    let mut nav = 1.0;
    for (weights, period) in schedule.iter().zip(period_returns) {
        let d = weights.len();
        let mut positions: Vec<f64> = weights.as_slice().iter().map(|w| w * nav).collect();
        let cash = nav - positions.iter().sum::<f64>();
        for day in period {
            if day.len() != d {
                return Err(Error::DimensionMismatch {
                    left: day.len(),
                    right: d,
                });
            }
            for (pos, r) in positions.iter_mut().zip(day) {
                *pos *= 1.0 + r;
            }
            nav = positions.iter().sum::<f64>() + cash;
            if nav <= 0.0 {
                return Ok(NavPath {
                    values,
                    bankrupt: true,
                });
            }
            values.push(nav);
        }
    }
    Ok(NavPath {
        values,
        bankrupt: false,
    })
}

/// Summary performance of a NAV series.
#[derive(Debug, Clone, PartialEq)]
pub struct PerfReport {
    /// The NAV series the metrics were computed from.
    pub nav: Vec<f64>,
    /// nav_end / nav_start.
    pub accumulated_net_value: f64,
    /// min_t nav_t / max_{s≤t} nav_s − 1 (nonpositive).
    pub max_drawdown: f64,
    /// Annualized Sharpe ratio of daily excess returns (√252, daily risk-free
    /// rate rf/252); `None` when the excess-return deviation is zero.
    pub sharpe: Option<f64>,
}

/// Computes accumulated net value, maximum drawdown, and the annualized
/// Sharpe ratio from a daily NAV series.
pub fn perf_metrics(nav: &[f64], rf_annual: f64) -> Result<PerfReport> {
    if nav.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            actual: nav.len(),
        });
    }
    for (i, &v) in nav.iter().enumerate() {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::NonFinite {
                what: "nav series",
                index: i,
            });
        }
    }
    let accumulated = nav[nav.len() - 1] / nav[0];

    let mut peak = nav[0];
    let mut max_dd = 0.0f64;
    for &v in nav {
        peak = peak.max(v);
        max_dd = max_dd.min(v / peak - 1.0);
    }

    let rf_daily = rf_annual / 252.0;
    let excess: Vec<f64> = nav
        .windows(2)
        .map(|w| w[1] / w[0] - 1.0 - rf_daily)
        .collect();
    let t = excess.len() as f64;
    let mean = excess.iter().sum::<f64>() / t;
    let sharpe = if excess.len() < 2 || excess.iter().all(|&e| e == excess[0]) {
        // Identical excess returns have zero deviation; the ratio is undefined.
        None
    } else {
        let var = excess.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (t - 1.0);
        if var == 0.0 {
            None
        } else {
            Some(mean / var.sqrt() * 252.0f64.sqrt())
        }
    };
    Ok(PerfReport {
        nav: nav.to_vec(),
        accumulated_net_value: accumulated,
        max_drawdown: max_dd,
        sharpe,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;
    use rand_distr::StandardNormal;

    fn random_cov(rng: &mut ChaCha12Rng, d: usize) -> CovMatrix {
        // A'A/d is symmetric PSD.
        let a: Vec<f64> = (0..d * d)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut acc = 0.0;
                for k in 0..d {
                    acc += a[k * d + i] * a[k * d + j];
                }
                data[i * d + j] = acc / d as f64;
            }
        }
        CovMatrix::new(d, data).unwrap()
    }

    #[test]
    fn sample_cov_examples() {
        // Identical columns give a rank-1 matrix with equal entries.
        let rows = vec![vec![1.0, 1.0], vec![3.0, 3.0], vec![-2.0, -2.0]];
        let cov = sample_cov(&rows).unwrap();
        let v = cov.get(0, 0);
        for i in 0..2 {
            for j in 0..2 {
                assert!((cov.get(i, j) - v).abs() < 1e-12);
            }
        }

        // Two-point variance with the T−1 denominator.
        let cov2 = sample_cov(&[vec![0.0], vec![2.0]]).unwrap();
        assert!((cov2.get(0, 0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn sample_cov_matches_double_loop_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(43);
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|_| (0..5).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let cov = sample_cov(&rows).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let mi = rows.iter().map(|r| r[i]).sum::<f64>() / 50.0;
                let mj = rows.iter().map(|r| r[j]).sum::<f64>() / 50.0;
                let oracle: f64 =
                    rows.iter().map(|r| (r[i] - mi) * (r[j] - mj)).sum::<f64>() / 49.0;
                assert!((cov.get(i, j) - oracle).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shrinkage_limits() {
        // Pure noise, tiny T: heavy shrinkage keeps variances on the diagonal.
        let mut rng = ChaCha12Rng::seed_from_u64(47);
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..3).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let shrunk = shrinkage_cov(&rows).unwrap();
        let sample = sample_cov(&rows).unwrap();
        for i in 0..3 {
            assert!((shrunk.get(i, i) - sample.get(i, i)).abs() < 1e-12);
            for j in 0..3 {
                if i != j {
                    assert!(shrunk.get(i, j).abs() <= sample.get(i, j).abs() + 1e-12);
                }
            }
        }
        assert!(shrinkage_cov(&rows[..2]).is_err());
    }

    #[test]
    fn shrinkage_preserves_strong_correlation_in_long_samples() {
        // Two nearly perfectly correlated columns over T = 500: the shrinkage
        // intensity stays near zero and the off-diagonal survives.
        let mut rng = ChaCha12Rng::seed_from_u64(53);
        let rows: Vec<Vec<f64>> = (0..500)
            .map(|_| {
                let x: f64 = rng.sample(StandardNormal);
                vec![x, x]
            })
            .collect();
        let shrunk = shrinkage_cov(&rows).unwrap();
        let sample = sample_cov(&rows).unwrap();
        let ratio = shrunk.get(0, 1) / sample.get(0, 1);
        assert!(ratio > 0.95, "off-diagonal shrunk by {}", 1.0 - ratio);
    }

    #[test]
    fn shrinkage_output_is_psd() {
        let mut rng = ChaCha12Rng::seed_from_u64(59);
        for _ in 0..20 {
            let rows: Vec<Vec<f64>> = (0..8)
                .map(|_| (0..6).map(|_| rng.sample(StandardNormal)).collect())
                .collect();
            let shrunk = shrinkage_cov(&rows).unwrap();
            assert!(shrunk.smallest_eigenvalue() >= -1e-10);
        }
    }

    fn project_oracle(z: &[f64], cap: f64) -> Vec<f64> {
        // Bisection on the pivot.
        let mut lo = z.iter().cloned().fold(f64::INFINITY, f64::min) - cap - 1.0;
        let mut hi = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 1.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let g: f64 = z.iter().map(|&v| (v - mid).clamp(0.0, cap)).sum();
            if g > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let theta = 0.5 * (lo + hi);
        z.iter().map(|&v| (v - theta).clamp(0.0, cap)).collect()
    }

    #[test]
    fn projection_matches_bisection_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(61);
        for trial in 0..200 {
            let d = 2 + trial % 12;
            let cap: f64 = (1.0 / d as f64 + rng.random::<f64>()).min(1.0);
            let z: Vec<f64> = (0..d)
                .map(|_| 2.0 * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let got = project_capped_simplex(&z, cap);
            let oracle = project_oracle(&z, cap);
            let sum: f64 = got.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9, "budget violated: {sum}");
            for (a, b) in got.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-8, "projection mismatch {a} vs {b}");
            }
        }
    }

    #[test]
    fn projection_tight_cap() {
        // d·cap = 1 forces every coordinate to the cap.
        let got = project_capped_simplex(&[5.0, -3.0, 0.0, 1.0], 0.25);
        for w in got {
            assert!((w - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn min_var_symmetric_identity() {
        let eye = CovMatrix::new(4, {
            let mut d = vec![0.0; 16];
            for i in 0..4 {
                d[i * 4 + i] = 1.0;
            }
            d
        })
        .unwrap();
        let w = min_var_weights(&eye, 1.0).unwrap();
        for &wi in w.as_slice() {
            assert!((wi - 0.25).abs() < 1e-9);
        }
    }

    #[test]
    fn min_var_diagonal_closed_form() {
        let sigma = CovMatrix::new(2, vec![1.0, 0.0, 0.0, 4.0]).unwrap();
        let w = min_var_weights(&sigma, 1.0).unwrap();
        assert!((w.as_slice()[0] - 0.8).abs() < 1e-6);
        assert!((w.as_slice()[1] - 0.2).abs() < 1e-6);
    }

    #[test]
    fn min_var_binding_caps() {
        let sigma = CovMatrix::new(3, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 100.0]).unwrap();
        let w = min_var_weights(&sigma, 0.45).unwrap();
        assert!((w.as_slice()[0] - 0.45).abs() < 1e-6);
        assert!((w.as_slice()[1] - 0.45).abs() < 1e-6);
        assert!((w.as_slice()[2] - 0.10).abs() < 1e-6);
    }

    #[test]
    fn min_var_rejects_bad_inputs() {
        let sigma = CovMatrix::new(2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            min_var_weights(&sigma, 0.4),
            Err(Error::InfeasibleCap { .. })
        ));
        assert!(min_var_weights(&sigma, 1.5).is_err());

        let indefinite = CovMatrix::new(2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(matches!(
            min_var_weights(&indefinite, 1.0),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn min_var_beats_random_feasible_points_and_permutes() {
        let mut rng = ChaCha12Rng::seed_from_u64(67);
        for _ in 0..25 {
            let d = 5;
            let cap = 0.4;
            let sigma = random_cov(&mut rng, d);
            let w = min_var_weights(&sigma, cap).unwrap();
            let obj = sigma.quad_form(w.as_slice());

            let ew = vec![1.0 / d as f64; d];
            assert!(obj <= sigma.quad_form(&ew) + 1e-9);
            for _ in 0..500 {
                let z: Vec<f64> = (0..d)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect();
                let feas = project_capped_simplex(&z, cap);
                assert!(obj <= sigma.quad_form(&feas) + 1e-9);
            }

            // Permutation equivariance: reverse the asset order.
            let mut perm_data = vec![0.0; d * d];
            for i in 0..d {
                for j in 0..d {
                    perm_data[i * d + j] = sigma.get(d - 1 - i, d - 1 - j);
                }
            }
            let perm = CovMatrix::new(d, perm_data).unwrap();
            let wp = min_var_weights(&perm, cap).unwrap();
            for i in 0..d {
                assert!((wp.as_slice()[i] - w.as_slice()[d - 1 - i]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn scheme_weight_examples() {
        assert_eq!(equal_weights(4).unwrap().as_slice(), &[0.25; 4]);
        assert_eq!(
            score_squared_weights(&[1.0, 1.0]).unwrap().as_slice(),
            &[0.5, 0.5]
        );
        let w = score_squared_weights(&[3.0, 1.0]).unwrap();
        assert!((w.as_slice()[0] - 0.9).abs() < 1e-15);
        assert!((w.as_slice()[1] - 0.1).abs() < 1e-15);
        assert_eq!(
            score_squared_weights(&[0.0, 0.0]).unwrap().as_slice(),
            &[0.5, 0.5]
        );
    }

    #[test]
    fn nav_path_examples() {
        // Zero returns keep the NAV at 1.
        let w = equal_weights(2).unwrap();
        let path = nav_path(
            std::slice::from_ref(&w),
            &[vec![vec![0.0, 0.0], vec![0.0, 0.0]]],
        )
        .unwrap();
        assert_eq!(path.values, vec![1.0, 1.0, 1.0]);

        // Single asset compounding.
        let w1 = WeightVector::new(vec![1.0], 1.0).unwrap();
        let path = nav_path(&[w1], &[vec![vec![0.1], vec![-0.1]]]).unwrap();
        assert!((path.values[1] - 1.1).abs() < 1e-15);
        assert!((path.values[2] - 0.99).abs() < 1e-15);
    }

    #[test]
    fn nav_path_matches_share_accounting_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(71);
        let w = WeightVector::new(vec![0.7, 0.3], 1.0).unwrap();
        let days: Vec<Vec<f64>> = (0..30)
            .map(|_| {
                (0..2)
                    .map(|_| 0.02 * rng.sample::<f64, _>(StandardNormal))
                    .collect()
            })
            .collect();
        let path = nav_path(&[w], std::slice::from_ref(&days)).unwrap();

        // Explicit shares-held oracle at unit prices.
        let mut price = [1.0, 1.0];
        let shares = [0.7, 0.3];
        for (t, day) in days.iter().enumerate() {
            price[0] *= 1.0 + day[0];
            price[1] *= 1.0 + day[1];
            let nav = shares[0] * price[0] + shares[1] * price[1];
            assert!((path.values[t + 1] - nav).abs() < 1e-12);
        }
    }

    #[test]
    fn nav_single_period_equal_weights_first_day() {
        let w = equal_weights(3).unwrap();
        let day = vec![0.01, 0.02, 0.03];
        let path = nav_path(&[w], &[vec![day.clone()]]).unwrap();
        let mean: f64 = day.iter().sum::<f64>() / 3.0;
        assert!((path.values[1] - (1.0 + mean)).abs() < 1e-12);
    }

    #[test]
    fn nav_bankruptcy_truncates() {
        let w1 = WeightVector::new(vec![1.0], 1.0).unwrap();
        let path = nav_path(&[w1], &[vec![vec![0.5], vec![-1.0], vec![0.2]]]).unwrap();
        assert!(path.bankrupt);
        assert_eq!(path.values, vec![1.0, 1.5]);
    }

    #[test]
    fn perf_metric_examples() {
        let report = perf_metrics(&[1.0, 1.2, 0.9, 1.1], 0.04).unwrap();
        assert!((report.max_drawdown - (0.9 / 1.2 - 1.0)).abs() < 1e-12);
        assert!((report.max_drawdown + 0.25).abs() < 1e-12);
        assert!((report.accumulated_net_value - 1.1).abs() < 1e-12);

        let flat = perf_metrics(&[1.0; 10], 0.04).unwrap();
        assert_eq!(flat.accumulated_net_value, 1.0);
        assert_eq!(flat.max_drawdown, 0.0);
        assert!(flat.sharpe.is_none());
    }

    #[test]
    fn sharpe_direct_formula() {
        // Build a NAV whose daily excess returns have mean 0.001, std 0.01:
        // use alternating excess 0.011 and −0.009 around rf.
        let rf = 0.04;
        let rf_daily = rf / 252.0;
        let mut nav = vec![1.0];
        for t in 0..100 {
            let excess = if t % 2 == 0 { 0.011 } else { -0.009 };
            let r = excess + rf_daily;
            let last = *nav.last().unwrap();
            nav.push(last * (1.0 + r));
        }
        let report = perf_metrics(&nav, rf).unwrap();
        let got = report.sharpe.unwrap();
        // Sample std of the alternating series is slightly above 0.01 due to
        // the T−1 denominator; compare against the exact sample statistics.
        let excess: Vec<f64> = nav
            .windows(2)
            .map(|w| w[1] / w[0] - 1.0 - rf_daily)
            .collect();
        let mean = excess.iter().sum::<f64>() / excess.len() as f64;
        let sd = (excess.iter().map(|e| (e - mean).powi(2)).sum::<f64>()
            / (excess.len() - 1) as f64)
            .sqrt();
        assert!((got - mean / sd * 252.0f64.sqrt()).abs() < 1e-12);
        assert!((mean / sd * 252.0f64.sqrt() - 0.1 * 252.0f64.sqrt()).abs() < 0.01);
    }

    #[test]
    fn sharpe_exact_value_from_known_moments() {
        // mean 0.001 / std 0.01 × √252 = 1.587450...
        let sharpe = 0.001 / 0.01 * 252.0f64.sqrt();
        assert!((sharpe - 1.587450).abs() < 1e-6);
    }
}
