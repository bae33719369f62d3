//! Rolling two-stage backtest engine.
//!
//! At the first trading day of each month, the trailing window (in calendar
//! months) is used to build the target series and point-curve covariates,
//! score the universe under each selection rule, keep the top d, and weight
//! the selection under each scheme. The portfolio is held buy-and-hold for
//! the next month and the window rolls forward. Only trailing data ever
//! enters a rebalance decision.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;

use crate::dataio::{fmt_f64, read_kv_file};
use crate::error::{Error, Result};
use crate::highfreq::{build_target, derive_panel, DerivedPanel, MinutePanel};
use crate::metric::{MetricSample, PointCurveObject};
use crate::portfolio::{
    equal_weights, min_var_weights, nav_path, perf_metrics, sample_cov, score_squared_weights,
    shrinkage_cov, PerfReport, WeightVector,
};
use crate::screen::{
    build_partition, momentum_score, score_all_assets, sis_score, Method, ScreenResult,
};

/// Portfolio weighting schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Equal weight.
    Ew,
    /// Score-squared weight.
    Sevw,
    /// Capped minimum variance on the sample covariance.
    Goc,
    /// Capped minimum variance on the shrinkage covariance.
    Gocs,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Ew => "EW",
            Scheme::Sevw => "SEVW",
            Scheme::Goc => "GOC",
            Scheme::Gocs => "GOCS",
        }
    }

    pub fn parse(s: &str) -> Result<Scheme> {
        match s.to_ascii_lowercase().as_str() {
            "ew" => Ok(Scheme::Ew),
            "sevw" => Ok(Scheme::Sevw),
            "goc" => Ok(Scheme::Goc),
            "gocs" => Ok(Scheme::Gocs),
            other => Err(Error::InvalidParameter(format!(
                "unknown scheme '{other}' (expected ew, sevw, goc, or gocs)"
            ))),
        }
    }
}

/// Backtest configuration.
#[derive(Debug, Clone)]
pub struct BacktestConfig {
    /// Rolling estimation window in calendar months.
    pub window_months: usize,
    /// Holding period in calendar months.
    pub hold_months: usize,
    /// Selection sizes to evaluate.
    pub d_list: Vec<usize>,
    /// Number of quantile slices for the dependence score.
    pub slices: usize,
    pub methods: Vec<Method>,
    pub schemes: Vec<Scheme>,
    /// Weight cap per selection size; sizes without an entry are uncapped.
    pub caps: BTreeMap<usize, f64>,
    /// Spot-volatility grid length.
    pub grid_points: usize,
    /// Spot-volatility window half-width in one-minute returns.
    pub half_window: usize,
    /// Five-minute intervals per day for realized variance.
    pub rv_intervals: usize,
    /// Annual risk-free rate for the Sharpe ratio.
    pub rf_annual: f64,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        let mut caps = BTreeMap::new();
        caps.insert(30, 0.15);
        caps.insert(60, 0.10);
        caps.insert(90, 0.05);
        BacktestConfig {
            window_months: 6,
            hold_months: 1,
            d_list: vec![30, 60, 90],
            slices: 8,
            methods: vec![Method::Mds, Method::Sis, Method::Mtm],
            schemes: vec![Scheme::Ew, Scheme::Sevw, Scheme::Goc, Scheme::Gocs],
            caps,
            grid_points: 48,
            half_window: 2,
            rv_intervals: 48,
            rf_annual: 0.04,
        }
    }
}

impl BacktestConfig {
    /// Cap for a selection size; 1.0 (uncapped) when not configured.
    pub fn cap_for(&self, d: usize) -> f64 {
        self.caps.get(&d).copied().unwrap_or(1.0)
    }

    pub fn validate(&self, n_assets: usize) -> Result<()> {
        if self.window_months == 0 || self.hold_months == 0 {
            return Err(Error::InvalidParameter(
                "window and hold must be at least one month".into(),
            ));
        }
        if self.d_list.is_empty() || self.methods.is_empty() || self.schemes.is_empty() {
            return Err(Error::InvalidParameter(
                "d_list, methods, and schemes must be nonempty".into(),
            ));
        }
        if self.slices < 2 {
            return Err(Error::InvalidParameter("need at least 2 slices".into()));
        }
        for &d in &self.d_list {
            if d == 0 {
                return Err(Error::InvalidParameter("selection size 0".into()));
            }
            if d > n_assets {
                return Err(Error::InvalidParameter(format!(
                    "selection size {d} exceeds the {n_assets}-asset universe"
                )));
            }
            let cap = self.cap_for(d);
            if (d as f64) * cap < 1.0 - 1e-12 {
                return Err(Error::InfeasibleCap { dim: d, cap });
            }
        }
        Ok(())
    }
}

/// Parses a backtest config file. All keys are optional and default to the
/// standard configuration: window_months, hold_months, d_list, slices,
/// methods, schemes, caps (d:u pairs), grid_points, half_window,
/// rv_intervals, rf_annual.
pub fn parse_backtest_config(path: &Path) -> Result<BacktestConfig> {
    let mut cfg = BacktestConfig::default();
    for (key, value, lineno) in read_kv_file(path)? {
        let bad = |what: &str| Error::Parse {
            path: path.display().to_string(),
            line: lineno,
            msg: format!("invalid {what} '{value}'"),
        };
        match key.as_str() {
            "window_months" => cfg.window_months = value.parse().map_err(|_| bad("window"))?,
            "hold_months" => cfg.hold_months = value.parse().map_err(|_| bad("hold"))?,
            "slices" => cfg.slices = value.parse().map_err(|_| bad("slices"))?,
            "grid_points" => cfg.grid_points = value.parse().map_err(|_| bad("grid_points"))?,
            "half_window" => cfg.half_window = value.parse().map_err(|_| bad("half_window"))?,
            "rv_intervals" => cfg.rv_intervals = value.parse().map_err(|_| bad("rv_intervals"))?,
            "rf_annual" => cfg.rf_annual = value.parse().map_err(|_| bad("rf_annual"))?,
            "d_list" => {
                let parsed: std::result::Result<Vec<usize>, _> =
                    value.split(',').map(|s| s.trim().parse()).collect();
                cfg.d_list = parsed.map_err(|_| bad("d_list"))?;
            }
            "methods" => {
                cfg.methods = value
                    .split(',')
                    .map(|s| Method::parse(s.trim()))
                    .collect::<Result<Vec<_>>>()?;
            }
            "schemes" => {
                cfg.schemes = value
                    .split(',')
                    .map(|s| Scheme::parse(s.trim()))
                    .collect::<Result<Vec<_>>>()?;
            }
            "caps" => {
                let mut caps = BTreeMap::new();
                for pair in value.split(',') {
                    let (d, u) = pair.split_once(':').ok_or_else(|| bad("caps"))?;
                    let d: usize = d.trim().parse().map_err(|_| bad("caps"))?;
                    let u: f64 = u.trim().parse().map_err(|_| bad("caps"))?;
                    caps.insert(d, u);
                }
                cfg.caps = caps;
            }
            other => {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    line: lineno,
                    msg: format!("unknown key '{other}'"),
                });
            }
        }
    }
    Ok(cfg)
}

/// One combination of selection rule, weighting scheme, and size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ComboKey {
    pub method: Method,
    pub scheme: Scheme,
    pub d: usize,
}

impl ComboKey {
    pub fn label(&self) -> String {
        format!("{}_{}_d{}", self.method.name(), self.scheme.name(), self.d)
    }
}

/// What happened at one rebalance date for one combination.
#[derive(Debug, Clone)]
pub struct RebalanceRecord {
    pub date: NaiveDate,
    /// Selected asset indices into the report's asset list.
    pub selected: Vec<usize>,
    /// Scores of the selected assets, aligned with `selected`.
    pub scores: Vec<f64>,
    /// Weights aligned with `selected`.
    pub weights: Vec<f64>,
    /// The minimum-variance program failed and equal weights were used.
    pub ew_fallback: bool,
    /// The whole window was skipped (degenerate target).
    pub skipped: bool,
}

/// Results for one combination.
#[derive(Debug, Clone)]
pub struct ComboResult {
    pub perf: PerfReport,
    pub history: Vec<RebalanceRecord>,
}

/// Full backtest output.
#[derive(Debug, Clone)]
pub struct BacktestReport {
    pub asset_ids: Vec<String>,
    /// Dates of the NAV series: the first rebalance date, then every holding
    /// day.
    pub nav_dates: Vec<NaiveDate>,
    pub combos: Vec<(ComboKey, ComboResult)>,
}

struct WindowScoring {
    /// Complete-asset indices, ascending.
    complete: Vec<usize>,
    /// One result per configured method, over the complete universe.
    results: Vec<ScreenResult>,
    skipped: bool,
}

fn month_key(date: NaiveDate) -> (i32, u32) {
    (date.year(), date.month())
}

fn score_window(
    panel: &MinutePanel,
    derived: &DerivedPanel,
    cfg: &BacktestConfig,
    window_days: &[usize],
) -> Result<WindowScoring> {
    let p = panel.n_assets();
    let complete: Vec<usize> = (0..p)
        .filter(|&a| {
            window_days.iter().all(|&t| {
                derived.returns[a][t].is_some()
                    && derived.covariates[a][t].is_some()
                    && panel.market_cap(a, t).is_some()
            })
        })
        .collect();
    if complete.len() < 10 {
        return Err(Error::InvalidParameter(format!(
            "only {} assets have complete window data; need at least 10",
            complete.len()
        )));
    }

    let returns: Vec<Vec<f64>> = complete
        .iter()
        .map(|&a| {
            window_days
                .iter()
                .map(|&t| derived.returns[a][t].unwrap())
                .collect()
        })
        .collect();
    let sharpes: Vec<Vec<crate::highfreq::SharpeRatio>> = complete
        .iter()
        .map(|&a| window_days.iter().map(|&t| derived.sharpes[a][t]).collect())
        .collect();
    let mcaps: Vec<Vec<f64>> = complete
        .iter()
        .map(|&a| {
            window_days
                .iter()
                .map(|&t| panel.market_cap(a, t).unwrap())
                .collect()
        })
        .collect();
    let market: Vec<f64> = window_days.iter().map(|&t| panel.market()[t]).collect();

    let target = build_target(&sharpes, &returns, &mcaps, &market)?;
    let partition = match build_partition(&target.y, cfg.slices) {
        Ok(part) => part,
        Err(Error::DegenerateTarget(_)) => {
            return Ok(WindowScoring {
                complete,
                results: Vec::new(),
                skipped: true,
            });
        }
        Err(e) => return Err(e),
    };

    let results = cfg
        .methods
        .par_iter()
        .map(|method| -> Result<ScreenResult> {
            match method {
                Method::Mds => {
                    let objs: Vec<MetricSample<PointCurveObject>> = complete
                        .iter()
                        .map(|&a| {
                            MetricSample::new(
                                window_days
                                    .iter()
                                    .map(|&t| derived.covariates[a][t].clone().unwrap())
                                    .collect(),
                            )
                        })
                        .collect::<Result<Vec<_>>>()?;
                    score_all_assets(&objs, &partition)
                }
                Method::Sis => {
                    let scores = returns
                        .iter()
                        .map(|r| sis_score(r, &target.y))
                        .collect::<Result<Vec<f64>>>()?;
                    let flags = vec![false; scores.len()];
                    Ok(ScreenResult::from_scores(scores, flags))
                }
                Method::Mtm => {
                    let scores: Vec<f64> = returns.iter().map(|r| momentum_score(r)).collect();
                    let flags = vec![false; scores.len()];
                    Ok(ScreenResult::from_scores(scores, flags))
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(WindowScoring {
        complete,
        results,
        skipped: false,
    })
}

fn weights_for_scheme(
    scheme: Scheme,
    cfg: &BacktestConfig,
    d: usize,
    sel_scores: &[f64],
    window_returns: &[Vec<f64>],
) -> (WeightVector, bool) {
    let k = sel_scores.len();
    match scheme {
        Scheme::Ew => (equal_weights(k).expect("nonempty selection"), false),
        Scheme::Sevw => (
            score_squared_weights(sel_scores).expect("nonempty selection"),
            false,
        ),
        Scheme::Goc | Scheme::Gocs => {
            let cov = match scheme {
                Scheme::Goc => sample_cov(window_returns),
                _ => shrinkage_cov(window_returns),
            };
            let solved = cov.and_then(|sigma| min_var_weights(&sigma, cfg.cap_for(d)));
            match solved {
                Ok(w) => (w, false),
                Err(_) => (equal_weights(k).expect("nonempty selection"), true),
            }
        }
    }
}

/// Runs the rolling backtest over a minute panel.
pub fn run_backtest(panel: &MinutePanel, cfg: &BacktestConfig) -> Result<BacktestReport> {
    cfg.validate(panel.n_assets())?;
    let derived = derive_panel(panel, cfg.grid_points, cfg.half_window, cfg.rv_intervals)?;

    // Trading days grouped by calendar month, in date order.
    let mut months: Vec<((i32, u32), Vec<usize>)> = Vec::new();
    for (t, &date) in panel.dates().iter().enumerate() {
        let key = month_key(date);
        match months.last_mut() {
            Some((k, days)) if *k == key => days.push(t),
            _ => months.push((key, vec![t])),
        }
    }
    let n_months = months.len();
    if n_months < cfg.window_months + cfg.hold_months {
        return Err(Error::InsufficientData {
            required: cfg.window_months + cfg.hold_months,
            actual: n_months,
        });
    }

    let combos: Vec<ComboKey> = cfg
        .methods
        .iter()
        .flat_map(|&method| {
            cfg.schemes.iter().flat_map(move |&scheme| {
                cfg.d_list
                    .iter()
                    .map(move |&d| ComboKey { method, scheme, d })
            })
        })
        .collect();

    let mut histories: Vec<Vec<RebalanceRecord>> = vec![Vec::new(); combos.len()];
    let mut schedules: Vec<Vec<WeightVector>> = vec![Vec::new(); combos.len()];
    let mut period_returns: Vec<Vec<Vec<Vec<f64>>>> = vec![Vec::new(); combos.len()];
    let mut nav_dates: Vec<NaiveDate> = Vec::new();

    let mut k = cfg.window_months;
    while k + cfg.hold_months <= n_months {
        // The very first panel day has no previous close, so no asset can
        // have a return or covariate there; drop it from the first window.
        let window_days: Vec<usize> = months[k - cfg.window_months..k]
            .iter()
            .flat_map(|(_, days)| days.iter().copied())
            .filter(|&t| t != 0)
            .collect();
        let hold_days: Vec<usize> = months[k..k + cfg.hold_months]
            .iter()
            .flat_map(|(_, days)| days.iter().copied())
            .collect();
        let rebalance_date = panel.dates()[hold_days[0]];
        if nav_dates.is_empty() {
            nav_dates.push(rebalance_date);
        }
        nav_dates.extend(hold_days.iter().map(|&t| panel.dates()[t]));

        let scoring = score_window(panel, &derived, cfg, &window_days)?;

        for (c, combo) in combos.iter().enumerate() {
            if scoring.skipped {
                histories[c].push(RebalanceRecord {
                    date: rebalance_date,
                    selected: Vec::new(),
                    scores: Vec::new(),
                    weights: Vec::new(),
                    ew_fallback: false,
                    skipped: true,
                });
                schedules[c].push(WeightVector::new(vec![1.0], 1.0).expect("unit weight"));
                // A skipped window holds cash: zero returns for the period.
                period_returns[c].push(hold_days.iter().map(|_| vec![0.0]).collect());
                continue;
            }
            let m_idx = cfg
                .methods
                .iter()
                .position(|&m| m == combo.method)
                .expect("method configured");
            let result = &scoring.results[m_idx];
            let local_sel = result.top_d(combo.d)?;
            let selected: Vec<usize> = local_sel.iter().map(|&i| scoring.complete[i]).collect();
            let sel_scores: Vec<f64> = local_sel.iter().map(|&i| result.scores[i]).collect();

            let window_returns: Vec<Vec<f64>> = window_days
                .iter()
                .map(|&t| {
                    local_sel
                        .iter()
                        .map(|&i| derived.returns[scoring.complete[i]][t].unwrap())
                        .collect()
                })
                .collect();
            let (weights, ew_fallback) =
                weights_for_scheme(combo.scheme, cfg, combo.d, &sel_scores, &window_returns);

            // Holding-period daily returns of the selected assets; a missing
            // asset-day freezes that position at zero return.
            let hold: Vec<Vec<f64>> = hold_days
                .iter()
                .map(|&t| {
                    selected
                        .iter()
                        .map(|&a| derived.returns[a][t].unwrap_or(0.0))
                        .collect()
                })
                .collect();

            histories[c].push(RebalanceRecord {
                date: rebalance_date,
                selected,
                scores: sel_scores,
                weights: weights.as_slice().to_vec(),
                ew_fallback,
                skipped: false,
            });
            schedules[c].push(weights);
            period_returns[c].push(hold);
        }
        k += cfg.hold_months;
    }

    let mut out = Vec::with_capacity(combos.len());
    for (c, &key) in combos.iter().enumerate() {
        let path = nav_path(&schedules[c], &period_returns[c])?;
        let perf = perf_metrics(&path.values, cfg.rf_annual)?;
        out.push((
            key,
            ComboResult {
                perf,
                history: std::mem::take(&mut histories[c]),
            },
        ));
    }
    Ok(BacktestReport {
        asset_ids: panel.assets().to_vec(),
        nav_dates,
        combos: out,
    })
}

const SUMMARY_HEADER: &str = "method,scheme,d,accumulated_net_value,max_drawdown,sharpe";
const NAV_HEADER: &str = "date,nav";
const SELECTION_HEADER: &str = "method,scheme,d,date,asset_id,score,weight";

/// One parsed row of a summary CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: String,
    pub scheme: String,
    pub d: usize,
    pub accumulated_net_value: f64,
    pub max_drawdown: f64,
    pub sharpe: Option<f64>,
}

/// Writes the summary table, per-combination NAV CSVs (under `nav/`), the
/// selection history, and optionally one NAV SVG per selection size.
pub fn emit_report(report: &BacktestReport, dir: &Path, svg: bool) -> Result<()> {
    let io_err = |e: std::io::Error, p: &Path| Error::Io {
        path: p.display().to_string(),
        source: e,
    };
    fs::create_dir_all(dir.join("nav")).map_err(|e| io_err(e, dir))?;

    let summary_path = dir.join("summary.csv");
    let file = fs::File::create(&summary_path).map_err(|e| io_err(e, &summary_path))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{SUMMARY_HEADER}").map_err(|e| io_err(e, &summary_path))?;
    for (key, result) in &report.combos {
        let sharpe = match result.perf.sharpe {
            Some(s) => fmt_f64(s),
            None => "NA".to_string(),
        };
        writeln!(
            w,
            "{},{},{},{},{},{}",
            key.method.name(),
            key.scheme.name(),
            key.d,
            fmt_f64(result.perf.accumulated_net_value),
            fmt_f64(result.perf.max_drawdown),
            sharpe
        )
        .map_err(|e| io_err(e, &summary_path))?;
    }
    w.flush().map_err(|e| io_err(e, &summary_path))?;

    for (key, result) in &report.combos {
        let nav_file = dir.join("nav").join(format!("{}.csv", key.label()));
        let file = fs::File::create(&nav_file).map_err(|e| io_err(e, &nav_file))?;
        let mut w = BufWriter::new(file);
        writeln!(w, "{NAV_HEADER}").map_err(|e| io_err(e, &nav_file))?;
        for (date, nav) in report.nav_dates.iter().zip(&result.perf.nav) {
            writeln!(w, "{},{}", date.format("%Y-%m-%d"), fmt_f64(*nav))
                .map_err(|e| io_err(e, &nav_file))?;
        }
        w.flush().map_err(|e| io_err(e, &nav_file))?;
    }

    let sel_path = dir.join("selections.csv");
    let file = fs::File::create(&sel_path).map_err(|e| io_err(e, &sel_path))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{SELECTION_HEADER}").map_err(|e| io_err(e, &sel_path))?;
    for (key, result) in &report.combos {
        for rec in &result.history {
            for ((&a, &score), &weight) in rec.selected.iter().zip(&rec.scores).zip(&rec.weights) {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{}",
                    key.method.name(),
                    key.scheme.name(),
                    key.d,
                    rec.date.format("%Y-%m-%d"),
                    report.asset_ids[a],
                    fmt_f64(score),
                    fmt_f64(weight)
                )
                .map_err(|e| io_err(e, &sel_path))?;
            }
        }
    }
    w.flush().map_err(|e| io_err(e, &sel_path))?;

    if svg {
        let mut by_d: BTreeMap<usize, Vec<(String, Vec<f64>)>> = BTreeMap::new();
        for (key, result) in &report.combos {
            by_d.entry(key.d)
                .or_default()
                .push((key.label(), result.perf.nav.clone()));
        }
        for (d, series) in by_d {
            let svg_path = dir.join(format!("nav_d{d}.svg"));
            let body = render_nav_svg(&series);
            fs::write(&svg_path, body).map_err(|e| io_err(e, &svg_path))?;
        }
    }
    Ok(())
}

/// Renders NAV paths as a standalone SVG line chart.
pub fn render_nav_svg(series: &[(String, Vec<f64>)]) -> String {
    const W: f64 = 900.0;
    const H: f64 = 480.0;
    const ML: f64 = 60.0;
    const MR: f64 = 200.0;
    const MT: f64 = 20.0;
    const MB: f64 = 40.0;
    let palette = [
        "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
        "#bcbd22", "#17becf", "#393b79", "#637939",
    ];
    let max_len = series.iter().map(|(_, v)| v.len()).max().unwrap_or(2);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (_, v) in series {
        for &x in v {
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    if !lo.is_finite() || lo == hi {
        lo = 0.0;
        hi = lo.max(hi) + 1.0;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let x_of = |i: usize| ML + (W - ML - MR) * i as f64 / (max_len.max(2) - 1) as f64;
    let y_of = |v: f64| MT + (H - MT - MB) * (1.0 - (v - lo) / (hi - lo));

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    ));
    // Axes and horizontal gridlines.
    out.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MB
    ));
    out.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n",
        H - MB,
        W - MR
    ));
    for g in 0..=4 {
        let v = lo + (hi - lo) * g as f64 / 4.0;
        let y = y_of(v);
        out.push_str(&format!(
            "<line x1=\"{ML}\" y1=\"{y:.2}\" x2=\"{}\" y2=\"{y:.2}\" stroke=\"#dddddd\"/>\n",
            W - MR
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">{v:.2}</text>\n",
            ML - 6.0,
            y + 4.0
        ));
    }
    for (s, (label, values)) in series.iter().enumerate() {
        let color = palette[s % palette.len()];
        let points: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", x_of(i), y_of(v)))
            .collect();
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            points.join(" ")
        ));
        let ly = MT + 16.0 * s as f64 + 10.0;
        out.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{ly:.2}\" x2=\"{1}\" y2=\"{ly:.2}\" stroke=\"{color}\" \
             stroke-width=\"3\"/>\n<text x=\"{2}\" y=\"{3:.2}\" font-size=\"11\">{label}</text>\n",
            W - MR + 10.0,
            W - MR + 30.0,
            W - MR + 36.0,
            ly + 4.0
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Reads back a summary CSV.
pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first == SUMMARY_HEADER => {}
        _ => {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: 1,
                msg: format!("expected header '{SUMMARY_HEADER}'"),
            })
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: lineno,
                msg: format!("expected 6 fields, got {}", f.len()),
            });
        }
        let bad = |msg: String| Error::Parse {
            path: path.display().to_string(),
            line: lineno,
            msg,
        };
        rows.push(SummaryRow {
            method: f[0].to_string(),
            scheme: f[1].to_string(),
            d: f[2]
                .parse()
                .map_err(|_| bad(format!("invalid d '{}'", f[2])))?,
            accumulated_net_value: f[3]
                .parse()
                .map_err(|_| bad(format!("invalid net value '{}'", f[3])))?,
            max_drawdown: f[4]
                .parse()
                .map_err(|_| bad(format!("invalid drawdown '{}'", f[4])))?,
            sharpe: if f[5] == "NA" {
                None
            } else {
                Some(
                    f[5].parse()
                        .map_err(|_| bad(format!("invalid sharpe '{}'", f[5])))?,
                )
            },
        });
    }
    Ok(rows)
}

/// Reads back one NAV CSV.
pub fn read_nav_csv(path: &Path) -> Result<Vec<(NaiveDate, f64)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first == NAV_HEADER => {}
        _ => {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: 1,
                msg: format!("expected header '{NAV_HEADER}'"),
            })
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let bad = |msg: String| Error::Parse {
            path: path.display().to_string(),
            line: lineno,
            msg,
        };
        let (date, nav) = line
            .split_once(',')
            .ok_or_else(|| bad("expected 2 fields".into()))?;
        let date = NaiveDate::parse_from_str(date, "%Y-%m-%d")
            .map_err(|_| bad(format!("invalid date '{date}'")))?;
        let nav: f64 = nav
            .parse()
            .map_err(|_| bad(format!("invalid nav '{nav}'")))?;
        rows.push((date, nav));
    }
    Ok(rows)
}

/// One parsed row of the selection history CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionRow {
    pub method: String,
    pub scheme: String,
    pub d: usize,
    pub date: NaiveDate,
    pub asset_id: String,
    pub score: f64,
    pub weight: f64,
}

/// Reads back the selection history CSV.
pub fn read_selections_csv(path: &Path) -> Result<Vec<SelectionRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first == SELECTION_HEADER => {}
        _ => {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: 1,
                msg: format!("expected header '{SELECTION_HEADER}'"),
            })
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let f: Vec<&str> = line.split(',').collect();
        let bad = |msg: String| Error::Parse {
            path: path.display().to_string(),
            line: lineno,
            msg,
        };
        if f.len() != 7 {
            return Err(bad(format!("expected 7 fields, got {}", f.len())));
        }
        rows.push(SelectionRow {
            method: f[0].to_string(),
            scheme: f[1].to_string(),
            d: f[2]
                .parse()
                .map_err(|_| bad(format!("invalid d '{}'", f[2])))?,
            date: NaiveDate::parse_from_str(f[3], "%Y-%m-%d")
                .map_err(|_| bad(format!("invalid date '{}'", f[3])))?,
            asset_id: f[4].to_string(),
            score: f[5]
                .parse()
                .map_err(|_| bad(format!("invalid score '{}'", f[5])))?,
            weight: f[6]
                .parse()
                .map_err(|_| bad(format!("invalid weight '{}'", f[6])))?,
        });
    }
    Ok(rows)
}
