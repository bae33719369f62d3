//! Observed covariates and the risk-adjusted target from minute bars.
//!
//! A minute-bar panel is turned into, per asset-day: the daily close-to-close
//! return, a spot-volatility grid estimated by local root-mean-square of
//! one-minute log returns (one-minute observation clock, Δ = 1), the realized
//! variance from five-minute last-tick log returns anchored at the previous
//! close, and a high-frequency Sharpe ratio. The daily target series is the
//! value-weighted return of the top decile of positive Sharpe ratios.

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::metric::{GridObject, PointCurveObject};

/// High-frequency Sharpe ratio, extended with sentinels that rank below every
/// real value and never enter arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SharpeRatio {
    Value(f64),
    /// No intraday transactions, so realized variance cannot be computed.
    NoTrades,
    /// Trades exist but realized variance is zero; division is undefined.
    /// Treated like a no-trade day, flagged distinctly.
    ZeroRv,
}

impl SharpeRatio {
    pub fn value(&self) -> Option<f64> {
        match self {
            SharpeRatio::Value(v) => Some(*v),
            _ => None,
        }
    }

    /// Strictly positive real ratio (sentinels are never positive).
    pub fn is_positive(&self) -> bool {
        matches!(self, SharpeRatio::Value(v) if *v > 0.0)
    }

    fn rank_key(&self) -> (u8, f64) {
        match self {
            SharpeRatio::NoTrades => (0, 0.0),
            SharpeRatio::ZeroRv => (1, 0.0),
            SharpeRatio::Value(v) => (2, *v),
        }
    }

    /// Total order with sentinels below all real values.
    pub fn cmp_total(&self, other: &Self) -> std::cmp::Ordering {
        let (ca, va) = self.rank_key();
        let (cb, vb) = other.rank_key();
        ca.cmp(&cb).then(va.total_cmp(&vb))
    }
}

/// Simple daily return from consecutive closes.
pub fn daily_return(close_t: f64, close_prev: f64) -> f64 {
    close_t / close_prev - 1.0
}

/// Log returns between adjacent trading observations within one day.
///
/// The series is within-day by construction, so the cross-break return
/// (11:30 to 13:00) is included and overnight gaps never appear.
pub fn minute_log_returns(prices: &[f64]) -> Result<Vec<f64>> {
    if prices.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            actual: prices.len(),
        });
    }
    for (i, &p) in prices.iter().enumerate() {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::NonPositivePrice { index: i, value: p });
        }
    }
    Ok(prices.windows(2).map(|w| w[1].ln() - w[0].ln()).collect())
}

/// Evenly spread positions over a return series for a J-point grid,
/// including both endpoints (48 points on a 240-minute day land on the
/// five-minute marks).
pub fn five_minute_grid(n_returns: usize, grid_points: usize) -> Vec<usize> {
    assert!(n_returns > 0 && grid_points > 0);
    if grid_points == 1 {
        return vec![(n_returns - 1) / 2];
    }
    (0..grid_points)
        .map(|k| {
            let x = k as f64 * (n_returns - 1) as f64 / (grid_points - 1) as f64;
            x.round() as usize
        })
        .collect()
}

/// Spot-volatility grid: at each grid position, the root mean square of the
/// one-minute returns in a symmetric window of `half_window` returns on each
/// side, truncated at the boundaries.
pub fn spot_vol_grid(
    minute_returns: &[f64],
    grid_indices: &[usize],
    half_window: usize,
) -> Result<GridObject> {
    let n = minute_returns.len();
    if n == 0 {
        return Err(Error::EmptyInput("minute returns"));
    }
    let mut values = Vec::with_capacity(grid_indices.len());
    for &idx in grid_indices {
        if idx >= n {
            return Err(Error::GridIndexOutOfRange { index: idx, len: n });
        }
        let lo = idx.saturating_sub(half_window);
        let hi = (idx + half_window).min(n - 1);
        let window = &minute_returns[lo..=hi];
        let mean_sq = window.iter().map(|r| r * r).sum::<f64>() / window.len() as f64;
        values.push(mean_sq.sqrt());
    }
    GridObject::new(values)
}

/// Last-tick five-minute interval log returns, with the first interval based
/// at the previous close.
pub fn five_minute_returns(
    minute_prices: &[f64],
    prev_close: f64,
    intervals: usize,
) -> Result<Vec<f64>> {
    if minute_prices.is_empty() {
        return Err(Error::EmptyInput("minute prices"));
    }
    if intervals == 0 {
        return Err(Error::InvalidParameter("intervals must be positive".into()));
    }
    if !(prev_close.is_finite() && prev_close > 0.0) {
        return Err(Error::NonPositivePrice {
            index: 0,
            value: prev_close,
        });
    }
    let len = minute_prices.len();
    let mut out = Vec::with_capacity(intervals);
    let mut prev = prev_close;
    for j in 0..intervals {
        let idx = ((j + 1) * len).div_ceil(intervals) - 1;
        let p = minute_prices[idx];
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::NonPositivePrice {
                index: idx,
                value: p,
            });
        }
        out.push(p.ln() - prev.ln());
        prev = p;
    }
    Ok(out)
}

/// Daily realized variance: sum of squared interval log returns.
pub fn realized_variance(interval_log_returns: &[f64]) -> f64 {
    interval_log_returns.iter().map(|r| r * r).sum()
}

/// High-frequency Sharpe ratio (r − r_market)/√rv.
///
/// `rv = None` means the asset had no intraday transactions; a zero realized
/// variance with trades present is flagged as [`SharpeRatio::ZeroRv`].
pub fn hf_sharpe(r_daily: f64, r_market: f64, rv: Option<f64>) -> SharpeRatio {
    match rv {
        None => SharpeRatio::NoTrades,
        Some(v) if v <= 0.0 => SharpeRatio::ZeroRv,
        Some(v) => SharpeRatio::Value((r_daily - r_market) / v.sqrt()),
    }
}

/// Daily target returns with per-day membership and weights.
#[derive(Debug, Clone)]
pub struct TargetSeries {
    /// Target return per day.
    pub y: Vec<f64>,
    /// Per-day selection detail.
    pub days: Vec<TargetDay>,
}

/// Selected set and value weights for one day of the target series.
#[derive(Debug, Clone)]
pub struct TargetDay {
    /// Asset indices in the selected set, empty on fallback days.
    pub members: Vec<usize>,
    /// Market-cap weights aligned with `members`, summing to one.
    pub weights: Vec<f64>,
    /// Set when no positive Sharpe ratio existed and the market return was
    /// used instead.
    pub fallback: bool,
}

/// Builds the value-weighted target series.
///
/// Per day: rank Sharpe ratios descending, keep the largest q = ⌊0.1·p⌋
/// strictly positive ones, value-weight them by market cap. With fewer than q
/// positives all positives are used; with none the market return is used and
/// the day is flagged.
pub fn build_target(
    sharpes: &[Vec<SharpeRatio>],
    returns: &[Vec<f64>],
    mcaps: &[Vec<f64>],
    market: &[f64],
) -> Result<TargetSeries> {
    let p = sharpes.len();
    let n = market.len();
    if p != returns.len() || p != mcaps.len() {
        return Err(Error::DimensionMismatch {
            left: p,
            right: returns.len().max(mcaps.len()),
        });
    }
    let q = p / 10;
    if q == 0 {
        return Err(Error::InvalidParameter(format!(
            "need at least 10 assets to form the target decile, got {p}"
        )));
    }
    for row in sharpes.iter().zip(returns).zip(mcaps) {
        let ((s, r), m) = row;
        if s.len() != n || r.len() != n || m.len() != n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: s.len().min(r.len()).min(m.len()),
            });
        }
    }

    let mut y = Vec::with_capacity(n);
    let mut days = Vec::with_capacity(n);
    for t in 0..n {
        let mut positive: Vec<usize> = (0..p).filter(|&i| sharpes[i][t].is_positive()).collect();
        positive.sort_by(|&a, &b| sharpes[b][t].cmp_total(&sharpes[a][t]).then(a.cmp(&b)));
        positive.truncate(q);

        if positive.is_empty() {
            y.push(market[t]);
            days.push(TargetDay {
                members: Vec::new(),
                weights: Vec::new(),
                fallback: true,
            });
            continue;
        }

        let total_cap: f64 = positive.iter().map(|&i| mcaps[i][t]).sum();
        let weights: Vec<f64> = positive.iter().map(|&i| mcaps[i][t] / total_cap).collect();
        let ret: f64 = positive
            .iter()
            .zip(&weights)
            .map(|(&i, w)| w * returns[i][t])
            .sum();
        y.push(ret);
        days.push(TargetDay {
            members: positive,
            weights,
            fallback: false,
        });
    }
    Ok(TargetSeries { y, days })
}

/// A minute-bar panel: per asset-day minute prices, closes, and market caps,
/// plus the market index daily return series.
///
/// Cells may be missing (an asset that did not trade); prices within a day
/// are ordered on the trading clock, so the last pre-break and first
/// post-break observations are adjacent.
#[derive(Debug, Clone)]
pub struct MinutePanel {
    assets: Vec<String>,
    dates: Vec<NaiveDate>,
    minutes: Vec<Vec<Option<Vec<f64>>>>,
    closes: Vec<Vec<Option<f64>>>,
    caps: Vec<Vec<Option<f64>>>,
    market: Vec<f64>,
}

impl MinutePanel {
    pub fn new(
        assets: Vec<String>,
        dates: Vec<NaiveDate>,
        minutes: Vec<Vec<Option<Vec<f64>>>>,
        closes: Vec<Vec<Option<f64>>>,
        caps: Vec<Vec<Option<f64>>>,
        market: Vec<f64>,
    ) -> Result<Self> {
        let p = assets.len();
        let n = dates.len();
        if p == 0 || n == 0 {
            return Err(Error::EmptyInput("minute panel"));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "panel dates must be strictly increasing".into(),
            ));
        }
        if market.len() != n {
            return Err(Error::DimensionMismatch {
                left: market.len(),
                right: n,
            });
        }
        if minutes.len() != p || closes.len() != p || caps.len() != p {
            return Err(Error::DimensionMismatch {
                left: p,
                right: minutes.len().min(closes.len()).min(caps.len()),
            });
        }
        for a in 0..p {
            if minutes[a].len() != n || closes[a].len() != n || caps[a].len() != n {
                return Err(Error::DimensionMismatch {
                    left: n,
                    right: minutes[a].len().min(closes[a].len()).min(caps[a].len()),
                });
            }
            for t in 0..n {
                if let Some(prices) = &minutes[a][t] {
                    for (i, &pr) in prices.iter().enumerate() {
                        if !(pr.is_finite() && pr > 0.0) {
                            return Err(Error::NonPositivePrice {
                                index: i,
                                value: pr,
                            });
                        }
                    }
                }
                if let Some(c) = closes[a][t] {
                    if !(c.is_finite() && c > 0.0) {
                        return Err(Error::NonPositivePrice { index: t, value: c });
                    }
                }
                if let Some(mc) = caps[a][t] {
                    if !(mc.is_finite() && mc > 0.0) {
                        return Err(Error::NonPositivePrice {
                            index: t,
                            value: mc,
                        });
                    }
                }
            }
        }
        for (i, &m) in market.iter().enumerate() {
            if !m.is_finite() {
                return Err(Error::NonFinite {
                    what: "market return series",
                    index: i,
                });
            }
        }
        Ok(MinutePanel {
            assets,
            dates,
            minutes,
            closes,
            caps,
            market,
        })
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    pub fn n_days(&self) -> usize {
        self.dates.len()
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn market(&self) -> &[f64] {
        &self.market
    }

    pub fn minute_prices(&self, asset: usize, day: usize) -> Option<&[f64]> {
        self.minutes[asset][day].as_deref()
    }

    pub fn close(&self, asset: usize, day: usize) -> Option<f64> {
        self.closes[asset][day]
    }

    pub fn market_cap(&self, asset: usize, day: usize) -> Option<f64> {
        self.caps[asset][day]
    }
}

/// Per asset-day derived quantities used by screening and backtesting.
#[derive(Debug, Clone)]
pub struct DerivedPanel {
    /// Daily simple return; `None` on the first day or when a close is missing.
    pub returns: Vec<Vec<Option<f64>>>,
    /// High-frequency Sharpe ratio per asset-day.
    pub sharpes: Vec<Vec<SharpeRatio>>,
    /// Point-curve covariate; `None` when the return or the intraday minutes
    /// are unavailable.
    pub covariates: Vec<Vec<Option<PointCurveObject>>>,
}

/// Derives returns, Sharpe ratios, and point-curve covariates from a panel.
///
/// `grid_points` and `half_window` control the spot-volatility grid;
/// `rv_intervals` the five-minute sampling used for realized variance.
pub fn derive_panel(
    panel: &MinutePanel,
    grid_points: usize,
    half_window: usize,
    rv_intervals: usize,
) -> Result<DerivedPanel> {
    let p = panel.n_assets();
    let n = panel.n_days();
    let mut returns = vec![vec![None; n]; p];
    let mut sharpes = vec![vec![SharpeRatio::NoTrades; n]; p];
    let mut covariates = vec![vec![None; n]; p];

    for a in 0..p {
        for t in 1..n {
            let (Some(close), Some(prev)) = (panel.close(a, t), panel.close(a, t - 1)) else {
                continue;
            };
            let r = daily_return(close, prev);
            returns[a][t] = Some(r);

            let Some(prices) = panel.minute_prices(a, t) else {
                continue;
            };
            if prices.len() < 2 {
                continue;
            }
            let lrets = minute_log_returns(prices)?;
            let rv = realized_variance(&five_minute_returns(prices, prev, rv_intervals)?);
            sharpes[a][t] = hf_sharpe(r, panel.market()[t], Some(rv));

            let grid = five_minute_grid(lrets.len(), grid_points);
            let vol = spot_vol_grid(&lrets, &grid, half_window)?;
            covariates[a][t] = Some(PointCurveObject::new(r, vol)?);
        }
    }
    Ok(DerivedPanel {
        returns,
        sharpes,
        covariates,
    })
}
