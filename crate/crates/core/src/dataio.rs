//! File formats and the synthetic-market generator.
//!
//! Three CSV schemas make a panel directory: `minutes.csv`
//! (`asset_id,date,minute_index,price`), `daily.csv`
//! (`asset_id,date,close,market_cap`), and `index.csv`
//! (`date,market_return`). Reals are serialized with 17 significant digits so
//! that read(write(x)) == x bit-exactly; readers reject NaN/Inf and
//! nonpositive prices with located errors. Config files are plain
//! `key = value` lines with `#` comments.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::{Datelike, NaiveDate, Weekday};
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::highfreq::MinutePanel;
use crate::simgen::{default_d_list, DgpConfig, Model, Process, StudyRow};

/// Minute-bar file name inside a panel directory.
pub const PANEL_MINUTES: &str = "minutes.csv";
/// Daily close/cap file name inside a panel directory.
pub const PANEL_DAILY: &str = "daily.csv";
/// Market-index file name inside a panel directory.
pub const PANEL_INDEX: &str = "index.csv";

const MINUTE_HEADER: &str = "asset_id,date,minute_index,price";
const DAILY_HEADER: &str = "asset_id,date,close,market_cap";
const INDEX_HEADER: &str = "date,market_return";

/// One minute-bar observation.
#[derive(Debug, Clone, PartialEq)]
pub struct MinuteBarRecord {
    pub asset_id: String,
    pub date: NaiveDate,
    pub minute_index: u32,
    pub price: f64,
}

/// One asset-day close and market cap.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyRecord {
    pub asset_id: String,
    pub date: NaiveDate,
    pub close: f64,
    pub market_cap: f64,
}

/// One market-index daily return.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexRecord {
    pub date: NaiveDate,
    pub market_return: f64,
}

/// 17-significant-digit serialization; round-trips every finite f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

fn parse_f64(field: &str, what: &str, path: &Path, line: usize) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| parse_err(path, line, format!("invalid {what} '{field}'")))?;
    if !v.is_finite() {
        return Err(parse_err(
            path,
            line,
            format!("non-finite {what} '{field}'"),
        ));
    }
    Ok(v)
}

fn parse_date(field: &str, path: &Path, line: usize) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(field, "%Y-%m-%d")
        .map_err(|_| parse_err(path, line, format!("invalid date '{field}'")))
}

fn read_lines(path: &Path, header: &str) -> Result<Vec<(usize, String)>> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut rows = Vec::new();
    let mut lines = reader.lines().enumerate();
    match lines.next() {
        Some((_, Ok(first))) if first.trim_end() == header => {}
        Some((_, Ok(first))) => {
            return Err(parse_err(
                path,
                1,
                format!("expected header '{header}', got '{first}'"),
            ))
        }
        Some((_, Err(e))) => return Err(io_err(path, e)),
        None => return Err(parse_err(path, 1, "empty file, expected header")),
    }
    for (idx, line) in lines {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.is_empty() {
            continue;
        }
        rows.push((idx + 1, line));
    }
    Ok(rows)
}

fn split_fields<'a>(
    line: &'a str,
    expect: usize,
    path: &Path,
    lineno: usize,
) -> Result<Vec<&'a str>> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != expect {
        return Err(parse_err(
            path,
            lineno,
            format!("expected {expect} fields, got {}", fields.len()),
        ));
    }
    Ok(fields)
}

/// Reads a minute-bar CSV into records (sorted by asset, date, minute).
pub fn read_minute_csv(path: &Path) -> Result<Vec<MinuteBarRecord>> {
    let mut records = Vec::new();
    for (lineno, line) in read_lines(path, MINUTE_HEADER)? {
        let f = split_fields(&line, 4, path, lineno)?;
        let date = parse_date(f[1], path, lineno)?;
        let minute_index: u32 = f[2]
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("invalid minute index '{}'", f[2])))?;
        let price = parse_f64(f[3], "price", path, lineno)?;
        if price <= 0.0 {
            return Err(parse_err(
                path,
                lineno,
                format!("nonpositive price {price}"),
            ));
        }
        records.push(MinuteBarRecord {
            asset_id: f[0].to_string(),
            date,
            minute_index,
            price,
        });
    }
    let mut sorted = records;
    sorted.sort_by(|a, b| {
        (&a.asset_id, a.date, a.minute_index).cmp(&(&b.asset_id, b.date, b.minute_index))
    });
    for w in sorted.windows(2) {
        if w[0].asset_id == w[1].asset_id
            && w[0].date == w[1].date
            && w[0].minute_index == w[1].minute_index
        {
            return Err(parse_err(
                path,
                0,
                format!(
                    "duplicate minute bar ({}, {}, {})",
                    w[1].asset_id, w[1].date, w[1].minute_index
                ),
            ));
        }
    }
    Ok(sorted)
}

/// Writes minute-bar records (UTF-8, LF, 17-digit reals).
pub fn write_minute_csv(records: &[MinuteBarRecord], path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let mut emit = || -> std::io::Result<()> {
        writeln!(w, "{MINUTE_HEADER}")?;
        for r in records {
            writeln!(
                w,
                "{},{},{},{}",
                r.asset_id,
                r.date.format("%Y-%m-%d"),
                r.minute_index,
                fmt_f64(r.price)
            )?;
        }
        w.flush()
    };
    emit().map_err(|e| io_err(path, e))
}

/// Reads a daily close/cap CSV.
pub fn read_daily_csv(path: &Path) -> Result<Vec<DailyRecord>> {
    let mut records = Vec::new();
    for (lineno, line) in read_lines(path, DAILY_HEADER)? {
        let f = split_fields(&line, 4, path, lineno)?;
        let date = parse_date(f[1], path, lineno)?;
        let close = parse_f64(f[2], "close", path, lineno)?;
        let cap = parse_f64(f[3], "market cap", path, lineno)?;
        if close <= 0.0 || cap <= 0.0 {
            return Err(parse_err(path, lineno, "nonpositive close or market cap"));
        }
        records.push(DailyRecord {
            asset_id: f[0].to_string(),
            date,
            close,
            market_cap: cap,
        });
    }
    let mut sorted = records;
    sorted.sort_by(|a, b| (&a.asset_id, a.date).cmp(&(&b.asset_id, b.date)));
    for w in sorted.windows(2) {
        if w[0].asset_id == w[1].asset_id && w[0].date == w[1].date {
            return Err(parse_err(
                path,
                0,
                format!("duplicate daily record ({}, {})", w[1].asset_id, w[1].date),
            ));
        }
    }
    Ok(sorted)
}

/// Writes a daily close/cap CSV.
pub fn write_daily_csv(records: &[DailyRecord], path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let mut emit = || -> std::io::Result<()> {
        writeln!(w, "{DAILY_HEADER}")?;
        for r in records {
            writeln!(
                w,
                "{},{},{},{}",
                r.asset_id,
                r.date.format("%Y-%m-%d"),
                fmt_f64(r.close),
                fmt_f64(r.market_cap)
            )?;
        }
        w.flush()
    };
    emit().map_err(|e| io_err(path, e))
}

/// Reads a market-index CSV.
pub fn read_index_csv(path: &Path) -> Result<Vec<IndexRecord>> {
    let mut records: Vec<IndexRecord> = Vec::new();
    for (lineno, line) in read_lines(path, INDEX_HEADER)? {
        let f = split_fields(&line, 2, path, lineno)?;
        let date = parse_date(f[0], path, lineno)?;
        let market_return = parse_f64(f[1], "market return", path, lineno)?;
        records.push(IndexRecord {
            date,
            market_return,
        });
    }
    let mut sorted = records;
    sorted.sort_by_key(|r| r.date);
    for w in sorted.windows(2) {
        if w[0].date == w[1].date {
            return Err(parse_err(
                path,
                0,
                format!("duplicate index date {}", w[1].date),
            ));
        }
    }
    Ok(sorted)
}

/// Writes a market-index CSV.
pub fn write_index_csv(records: &[IndexRecord], path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let mut emit = || -> std::io::Result<()> {
        writeln!(w, "{INDEX_HEADER}")?;
        for r in records {
            writeln!(
                w,
                "{},{}",
                r.date.format("%Y-%m-%d"),
                fmt_f64(r.market_return)
            )?;
        }
        w.flush()
    };
    emit().map_err(|e| io_err(path, e))
}

/// Reads a panel directory (minutes, daily, index CSVs) into a [`MinutePanel`].
pub fn read_panel(dir: &Path) -> Result<MinutePanel> {
    let index = read_index_csv(&dir.join(PANEL_INDEX))?;
    if index.is_empty() {
        return Err(Error::EmptyInput("index series"));
    }
    let dates: Vec<NaiveDate> = index.iter().map(|r| r.date).collect();
    let market: Vec<f64> = index.iter().map(|r| r.market_return).collect();
    let date_idx: HashMap<NaiveDate, usize> =
        dates.iter().enumerate().map(|(i, &d)| (d, i)).collect();

    let daily = read_daily_csv(&dir.join(PANEL_DAILY))?;
    let bars = read_minute_csv(&dir.join(PANEL_MINUTES))?;

    let mut assets: Vec<String> = daily
        .iter()
        .map(|r| r.asset_id.clone())
        .chain(bars.iter().map(|r| r.asset_id.clone()))
        .collect();
    assets.sort();
    assets.dedup();
    if assets.is_empty() {
        return Err(Error::EmptyInput("panel assets"));
    }
    let asset_idx: HashMap<&str, usize> = assets
        .iter()
        .enumerate()
        .map(|(i, a)| (a.as_str(), i))
        .collect();

    let n = dates.len();
    let p = assets.len();
    let mut minutes: Vec<Vec<Option<Vec<f64>>>> = vec![vec![None; n]; p];
    let mut closes: Vec<Vec<Option<f64>>> = vec![vec![None; n]; p];
    let mut caps: Vec<Vec<Option<f64>>> = vec![vec![None; n]; p];

    for r in &daily {
        let &t = date_idx.get(&r.date).ok_or_else(|| {
            parse_err(
                &dir.join(PANEL_DAILY),
                0,
                format!("date {} not present in the index series", r.date),
            )
        })?;
        let a = asset_idx[r.asset_id.as_str()];
        closes[a][t] = Some(r.close);
        caps[a][t] = Some(r.market_cap);
    }
    for r in &bars {
        let &t = date_idx.get(&r.date).ok_or_else(|| {
            parse_err(
                &dir.join(PANEL_MINUTES),
                0,
                format!("date {} not present in the index series", r.date),
            )
        })?;
        let a = asset_idx[r.asset_id.as_str()];
        minutes[a][t].get_or_insert_with(Vec::new).push(r.price);
    }
    MinutePanel::new(assets, dates, minutes, closes, caps, market)
}

/// Writes a panel directory. Minute indices are emitted as the observation
/// position within the day.
pub fn write_panel(panel: &MinutePanel, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut bars = Vec::new();
    let mut daily = Vec::new();
    let mut index = Vec::new();
    for (t, &date) in panel.dates().iter().enumerate() {
        index.push(IndexRecord {
            date,
            market_return: panel.market()[t],
        });
    }
    for (a, asset) in panel.assets().iter().enumerate() {
        for (t, &date) in panel.dates().iter().enumerate() {
            if let (Some(close), Some(cap)) = (panel.close(a, t), panel.market_cap(a, t)) {
                daily.push(DailyRecord {
                    asset_id: asset.clone(),
                    date,
                    close,
                    market_cap: cap,
                });
            }
            if let Some(prices) = panel.minute_prices(a, t) {
                for (m, &price) in prices.iter().enumerate() {
                    bars.push(MinuteBarRecord {
                        asset_id: asset.clone(),
                        date,
                        minute_index: m as u32,
                        price,
                    });
                }
            }
        }
    }
    write_minute_csv(&bars, &dir.join(PANEL_MINUTES))?;
    write_daily_csv(&daily, &dir.join(PANEL_DAILY))?;
    write_index_csv(&index, &dir.join(PANEL_INDEX))
}

/// Configuration of the synthetic market generator.
#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub assets: usize,
    pub days: usize,
    pub seed: u64,
    /// First calendar date; trading days are consecutive weekdays.
    pub start_date: NaiveDate,
    pub minutes_per_day: usize,
    /// Median idiosyncratic volatility per √minute.
    pub base_vol: f64,
    /// Lognormal dispersion of per-asset volatility.
    pub vol_dispersion: f64,
    /// U-shape strength of the intraday volatility multiplier
    /// m(u) = 1 + amplitude·(2u − 1)².
    pub diurnal_amplitude: f64,
    /// Daily volatility of the common market factor.
    pub market_vol: f64,
    /// Daily drift of the common market factor.
    pub market_drift: f64,
    pub cap_log_mean: f64,
    pub cap_log_sd: f64,
    pub initial_price_log_sd: f64,
}

impl SyntheticConfig {
    pub fn new(assets: usize, days: usize, seed: u64) -> Self {
        SyntheticConfig {
            assets,
            days,
            seed,
            start_date: NaiveDate::from_ymd_opt(2024, 1, 1).expect("valid date"),
            minutes_per_day: 240,
            base_vol: 0.0012,
            vol_dispersion: 0.4,
            diurnal_amplitude: 1.0,
            market_vol: 0.008,
            market_drift: 0.0002,
            cap_log_mean: 20.7,
            cap_log_sd: 1.0,
            initial_price_log_sd: 0.5,
        }
    }
}

fn weekday_dates(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut dates = Vec::with_capacity(count);
    let mut d = start;
    while dates.len() < count {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            dates.push(d);
        }
        d = d.succ_opt().expect("date range exhausted");
    }
    dates
}

/// Simulates a complete minute-bar panel: per asset-day a geometric random
/// walk with a U-shaped intraday volatility multiplier and a common market
/// factor; market caps are lognormal at the start and drift with the asset's
/// own return. Deterministic per seed.
pub fn gen_synthetic_market(cfg: &SyntheticConfig) -> Result<MinutePanel> {
    if cfg.assets == 0 || cfg.days == 0 {
        return Err(Error::EmptyInput("synthetic market size"));
    }
    if cfg.minutes_per_day < 2 {
        return Err(Error::InvalidParameter(
            "need at least 2 minutes per day".into(),
        ));
    }
    let p = cfg.assets;
    let n = cfg.days;
    let l = cfg.minutes_per_day;
    let dates = weekday_dates(cfg.start_date, n);
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);

    // Per-asset parameters.
    let betas: Vec<f64> = (0..p).map(|_| 0.7 + 0.6 * rng.random::<f64>()).collect();
    let vols: Vec<f64> = (0..p)
        .map(|_| cfg.base_vol * (cfg.vol_dispersion * rng.sample::<f64, _>(StandardNormal)).exp())
        .collect();
    let mut prices: Vec<f64> = (0..p)
        .map(|_| 10.0 * (cfg.initial_price_log_sd * rng.sample::<f64, _>(StandardNormal)).exp())
        .collect();
    let mut cap_now: Vec<f64> = (0..p)
        .map(|_| (cfg.cap_log_mean + cfg.cap_log_sd * rng.sample::<f64, _>(StandardNormal)).exp())
        .collect();

    let diurnal: Vec<f64> = (0..l)
        .map(|m| {
            let u = if l > 1 {
                m as f64 / (l - 1) as f64
            } else {
                0.5
            };
            1.0 + cfg.diurnal_amplitude * (2.0 * u - 1.0) * (2.0 * u - 1.0)
        })
        .collect();

    let mut minutes: Vec<Vec<Option<Vec<f64>>>> = vec![vec![None; n]; p];
    let mut closes: Vec<Vec<Option<f64>>> = vec![vec![None; n]; p];
    let mut caps: Vec<Vec<Option<f64>>> = vec![vec![None; n]; p];
    let mut market = Vec::with_capacity(n);

    let drift_min = cfg.market_drift / l as f64;
    let mvol_min = cfg.market_vol / (l as f64).sqrt();
    for t in 0..n {
        let shocks: Vec<f64> = (0..l)
            .map(|_| drift_min + mvol_min * rng.sample::<f64, _>(StandardNormal))
            .collect();
        market.push(shocks.iter().sum::<f64>().exp() - 1.0);

        for a in 0..p {
            let mut path = Vec::with_capacity(l);
            let mut price = prices[a];
            for (m, &g) in shocks.iter().enumerate() {
                let z: f64 = rng.sample(StandardNormal);
                let lr = betas[a] * g + vols[a] * diurnal[m] * z;
                price *= lr.exp();
                path.push(price);
            }
            let close = price;
            let ret = close / prices[a] - 1.0;
            prices[a] = close;
            cap_now[a] *= 1.0 + ret;
            minutes[a][t] = Some(path);
            closes[a][t] = Some(close);
            caps[a][t] = Some(cap_now[a]);
        }
    }
    MinutePanel::new(
        (0..p).map(|a| format!("A{a:04}")).collect(),
        dates,
        minutes,
        closes,
        caps,
        market,
    )
}

/// Key-value config lines: `key = value`, `#` comments, blank lines ignored.
pub fn read_kv_file(path: &Path) -> Result<Vec<(String, String, usize)>> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return Err(parse_err(path, lineno, "expected 'key = value'"));
        };
        out.push((key.trim().to_string(), value.trim().to_string(), lineno));
    }
    Ok(out)
}

/// A full study specification parsed from a config file.
#[derive(Debug, Clone)]
pub struct StudyRunConfig {
    pub dgp: DgpConfig,
    pub replications: usize,
    pub slices: usize,
    pub d_list: Vec<usize>,
}

/// Parses a study config. Required keys: n, p, sigma, process, model, seed.
/// Optional: burn_in (500), slices (8), reps (100), d_list (d1, 2d1, 3d1).
/// Unknown keys are rejected.
pub fn parse_study_config(path: &Path) -> Result<StudyRunConfig> {
    let kv = read_kv_file(path)?;
    let mut n = None;
    let mut p = None;
    let mut sigma = None;
    let mut process = None;
    let mut model = None;
    let mut seed = None;
    let mut burn_in = 500usize;
    let mut slices = 8usize;
    let mut replications = 100usize;
    let mut d_list: Option<Vec<usize>> = None;

    for (key, value, lineno) in &kv {
        let bad = |what: &str| parse_err(path, *lineno, format!("invalid {what} '{value}'"));
        match key.as_str() {
            "n" => n = Some(value.parse().map_err(|_| bad("n"))?),
            "p" => p = Some(value.parse().map_err(|_| bad("p"))?),
            "sigma" => sigma = Some(value.parse().map_err(|_| bad("sigma"))?),
            "process" => process = Some(Process::parse(value)?),
            "model" => model = Some(Model::parse(value)?),
            "seed" => seed = Some(value.parse().map_err(|_| bad("seed"))?),
            "burn_in" => burn_in = value.parse().map_err(|_| bad("burn_in"))?,
            "slices" => slices = value.parse().map_err(|_| bad("slices"))?,
            "reps" => replications = value.parse().map_err(|_| bad("reps"))?,
            "d_list" => {
                let parsed: std::result::Result<Vec<usize>, _> =
                    value.split(',').map(|s| s.trim().parse()).collect();
                d_list = Some(parsed.map_err(|_| bad("d_list"))?);
            }
            other => {
                return Err(parse_err(path, *lineno, format!("unknown key '{other}'")));
            }
        }
    }
    let missing = |what: &str| parse_err(path, 0, format!("missing required key '{what}'"));
    let n = n.ok_or_else(|| missing("n"))?;
    let dgp = DgpConfig {
        n,
        p: p.ok_or_else(|| missing("p"))?,
        sigma: sigma.ok_or_else(|| missing("sigma"))?,
        process: process.ok_or_else(|| missing("process"))?,
        model: model.ok_or_else(|| missing("model"))?,
        seed: seed.ok_or_else(|| missing("seed"))?,
        burn_in,
    };
    dgp.validate()?;
    Ok(StudyRunConfig {
        dgp,
        replications,
        slices,
        d_list: d_list.unwrap_or_else(|| default_d_list(n).to_vec()),
    })
}

const STUDY_HEADER: &str =
    "method,model,process,n,p,sigma,d,ps_x1,ps_x2,ps_x12,ps_x22,pa,s_q25,s_q50,s_q75";

/// Writes study metrics as one row per (method, d), mirroring the study
/// table layout.
pub fn write_study_csv(rows: &[StudyRow], dgp: &DgpConfig, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let mut emit = || -> std::io::Result<()> {
        writeln!(w, "{STUDY_HEADER}")?;
        for row in rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                row.method.name(),
                dgp.model.name(),
                dgp.process.name(),
                dgp.n,
                dgp.p,
                fmt_f64(dgp.sigma),
                row.d,
                fmt_f64(row.metrics.p_s[0]),
                fmt_f64(row.metrics.p_s[1]),
                fmt_f64(row.metrics.p_s[2]),
                fmt_f64(row.metrics.p_s[3]),
                fmt_f64(row.metrics.p_a),
                fmt_f64(row.metrics.s_quantiles[0]),
                fmt_f64(row.metrics.s_quantiles[1]),
                fmt_f64(row.metrics.s_quantiles[2]),
            )?;
        }
        w.flush()
    };
    emit().map_err(|e| io_err(path, e))
}

/// One parsed row of a study metrics CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyCsvRow {
    pub method: String,
    pub model: String,
    pub process: String,
    pub n: usize,
    pub p: usize,
    pub sigma: f64,
    pub d: usize,
    pub p_s: [f64; 4],
    pub p_a: f64,
    pub s_quantiles: [f64; 3],
}

/// Reads back a study metrics CSV.
pub fn read_study_csv(path: &Path) -> Result<Vec<StudyCsvRow>> {
    let mut rows = Vec::new();
    for (lineno, line) in read_lines(path, STUDY_HEADER)? {
        let f = split_fields(&line, 15, path, lineno)?;
        let num = |i: usize, what: &str| parse_f64(f[i], what, path, lineno);
        let int = |i: usize, what: &str| -> Result<usize> {
            f[i].parse()
                .map_err(|_| parse_err(path, lineno, format!("invalid {what} '{}'", f[i])))
        };
        rows.push(StudyCsvRow {
            method: f[0].to_string(),
            model: f[1].to_string(),
            process: f[2].to_string(),
            n: int(3, "n")?,
            p: int(4, "p")?,
            sigma: num(5, "sigma")?,
            d: int(6, "d")?,
            p_s: [num(7, "ps")?, num(8, "ps")?, num(9, "ps")?, num(10, "ps")?],
            p_a: num(11, "pa")?,
            s_quantiles: [num(12, "sq")?, num(13, "sq")?, num(14, "sq")?],
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::highfreq::{derive_panel, five_minute_grid, minute_log_returns, spot_vol_grid};

    fn tmpdir(tag: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("mds_dataio_{tag}_{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn minute_csv_round_trip_bitwise() {
        let dir = tmpdir("minute_rt");
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let date = NaiveDate::from_ymd_opt(2024, 3, 4).unwrap();
        let records: Vec<MinuteBarRecord> = (0..10_000)
            .map(|i| MinuteBarRecord {
                asset_id: format!("A{:03}", i % 25),
                date: date + chrono::Days::new((i / 2500) as u64),
                minute_index: ((i % 2500) / 25) as u32,
                price: 10.0 * (1.0 + rng.random::<f64>()),
            })
            .collect();
        let path = dir.join("m.csv");
        write_minute_csv(&records, &path).unwrap();
        let back = read_minute_csv(&path).unwrap();
        let mut sorted = records.clone();
        sorted.sort_by(|a, b| {
            (&a.asset_id, a.date, a.minute_index).cmp(&(&b.asset_id, b.date, b.minute_index))
        });
        assert_eq!(back.len(), sorted.len());
        for (a, b) in back.iter().zip(&sorted) {
            assert_eq!(a.asset_id, b.asset_id);
            assert_eq!(a.date, b.date);
            assert_eq!(a.minute_index, b.minute_index);
            assert_eq!(a.price.to_bits(), b.price.to_bits());
        }
    }

    #[test]
    fn minute_csv_rejects_malformed_rows() {
        let dir = tmpdir("minute_bad");
        let path = dir.join("bad.csv");
        let mut f = fs::File::create(&path).unwrap();
        writeln!(f, "asset_id,date,minute_index,price").unwrap();
        writeln!(f, "A,2024-01-02,0,10.5").unwrap();
        writeln!(f, "A,2024-01-02,1").unwrap();
        drop(f);
        let err = read_minute_csv(&path).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }

        let mut f = fs::File::create(&path).unwrap();
        writeln!(f, "asset_id,date,minute_index,price").unwrap();
        writeln!(f, "A,2024-01-02,0,NaN").unwrap();
        drop(f);
        assert!(read_minute_csv(&path).is_err());

        let mut f = fs::File::create(&path).unwrap();
        writeln!(f, "asset_id,date,minute_index,price").unwrap();
        writeln!(f, "A,2024-01-02,0,-3.0").unwrap();
        drop(f);
        assert!(read_minute_csv(&path).is_err());

        // Duplicate key.
        let mut f = fs::File::create(&path).unwrap();
        writeln!(f, "asset_id,date,minute_index,price").unwrap();
        writeln!(f, "A,2024-01-02,0,1.0").unwrap();
        writeln!(f, "A,2024-01-02,0,2.0").unwrap();
        drop(f);
        assert!(read_minute_csv(&path).is_err());
    }

    #[test]
    fn empty_body_is_empty_panel() {
        let dir = tmpdir("minute_empty");
        let path = dir.join("empty.csv");
        fs::write(&path, "asset_id,date,minute_index,price\n").unwrap();
        assert!(read_minute_csv(&path).unwrap().is_empty());
    }

    #[test]
    fn panel_round_trip() {
        let dir = tmpdir("panel_rt");
        let cfg = SyntheticConfig::new(4, 7, 9);
        let panel = gen_synthetic_market(&cfg).unwrap();
        write_panel(&panel, &dir).unwrap();
        let back = read_panel(&dir).unwrap();
        assert_eq!(back.assets(), panel.assets());
        assert_eq!(back.dates(), panel.dates());
        for t in 0..panel.n_days() {
            assert_eq!(back.market()[t].to_bits(), panel.market()[t].to_bits());
            for a in 0..panel.n_assets() {
                assert_eq!(
                    back.close(a, t).unwrap().to_bits(),
                    panel.close(a, t).unwrap().to_bits()
                );
                assert_eq!(
                    back.market_cap(a, t).unwrap().to_bits(),
                    panel.market_cap(a, t).unwrap().to_bits()
                );
                let x = panel.minute_prices(a, t).unwrap();
                let y = back.minute_prices(a, t).unwrap();
                assert_eq!(x.len(), y.len());
                for (u, v) in x.iter().zip(y) {
                    assert_eq!(u.to_bits(), v.to_bits());
                }
            }
        }
    }

    #[test]
    fn synthetic_market_is_seed_deterministic() {
        let cfg = SyntheticConfig::new(3, 5, 77);
        let a = gen_synthetic_market(&cfg).unwrap();
        let b = gen_synthetic_market(&cfg).unwrap();
        for t in 0..5 {
            for i in 0..3 {
                let x = a.minute_prices(i, t).unwrap();
                let y = b.minute_prices(i, t).unwrap();
                assert_eq!(x, y);
            }
        }
        let other = gen_synthetic_market(&SyntheticConfig::new(3, 5, 78)).unwrap();
        assert_ne!(
            a.minute_prices(0, 0).unwrap(),
            other.minute_prices(0, 0).unwrap()
        );
    }

    #[test]
    fn zero_volatility_gives_constant_prices() {
        let mut cfg = SyntheticConfig::new(2, 3, 1);
        cfg.base_vol = 0.0;
        cfg.market_vol = 0.0;
        cfg.market_drift = 0.0;
        let panel = gen_synthetic_market(&cfg).unwrap();
        for t in 0..3 {
            let prices = panel.minute_prices(0, t).unwrap();
            for w in prices.windows(2) {
                assert_eq!(w[0], w[1]);
            }
        }
        assert!(panel.market().iter().all(|&r| r == 0.0));
    }

    #[test]
    fn diurnal_multiplier_shapes_estimated_vol() {
        // Average estimated spot-vol over 100 asset-days: the first/last 4
        // grid points must exceed the middle 8 by at least 20%.
        let cfg = SyntheticConfig::new(5, 20, 42);
        let panel = gen_synthetic_market(&cfg).unwrap();
        let mut edge = 0.0;
        let mut middle = 0.0;
        let mut count = 0;
        for a in 0..5 {
            for t in 0..20 {
                let prices = panel.minute_prices(a, t).unwrap();
                let rets = minute_log_returns(prices).unwrap();
                let grid = five_minute_grid(rets.len(), 48);
                let vol = spot_vol_grid(&rets, &grid, 2).unwrap();
                let v = vol.values();
                edge += v[..4].iter().sum::<f64>() + v[44..].iter().sum::<f64>();
                middle += v[20..28].iter().sum::<f64>();
                count += 1;
            }
        }
        let edge_mean = edge / (8.0 * count as f64);
        let middle_mean = middle / (8.0 * count as f64);
        assert!(
            edge_mean >= 1.2 * middle_mean,
            "edge {edge_mean} vs middle {middle_mean}"
        );
    }

    #[test]
    fn synthetic_panel_is_derivable() {
        let cfg = SyntheticConfig::new(12, 10, 3);
        let panel = gen_synthetic_market(&cfg).unwrap();
        let derived = derive_panel(&panel, 48, 2, 48).unwrap();
        for a in 0..12 {
            assert!(derived.returns[a][0].is_none());
            for t in 1..10 {
                assert!(derived.returns[a][t].is_some());
                assert!(derived.covariates[a][t].is_some());
                assert!(derived.sharpes[a][t].value().is_some());
            }
        }
    }

    #[test]
    fn kv_parser_and_study_config() {
        let dir = tmpdir("kv");
        let path = dir.join("study.conf");
        fs::write(
            &path,
            "# study\nn = 60\np = 25\nsigma = 0.5\nprocess = ar2\nmodel = 1c\nseed = 7\nreps = 3\n",
        )
        .unwrap();
        let cfg = parse_study_config(&path).unwrap();
        assert_eq!(cfg.dgp.n, 60);
        assert_eq!(cfg.dgp.p, 25);
        assert_eq!(cfg.replications, 3);
        assert_eq!(cfg.slices, 8);
        assert_eq!(cfg.d_list, vec![14, 28, 42]);

        fs::write(&path, "n = 60\nbogus = 1\n").unwrap();
        assert!(matches!(
            parse_study_config(&path),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn study_csv_round_trip() {
        use crate::screen::Method;
        use crate::simgen::StudyMetrics;
        let dir = tmpdir("study_csv");
        let path = dir.join("metrics.csv");
        let dgp = DgpConfig {
            n: 100,
            p: 50,
            sigma: 0.5,
            process: Process::Ar2,
            model: Model::M1c,
            seed: 1,
            burn_in: 500,
        };
        let rows = vec![StudyRow {
            method: Method::Mds,
            d: 21,
            metrics: StudyMetrics {
                p_s: vec![1.0, 0.97, 0.81, 0.96],
                p_a: 0.77,
                s_quantiles: [4.0, 7.5, 32.0],
            },
        }];
        write_study_csv(&rows, &dgp, &path).unwrap();
        let back = read_study_csv(&path).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].method, "MDS");
        assert_eq!(back[0].d, 21);
        assert_eq!(back[0].p_a.to_bits(), 0.77f64.to_bits());
        assert_eq!(back[0].s_quantiles[1].to_bits(), 7.5f64.to_bits());
    }

    #[test]
    fn fmt_f64_round_trips_extremes() {
        for &x in &[
            0.0,
            -0.0,
            1.0,
            0.1,
            -std::f64::consts::PI,
            1e-300,
            -1e300,
            f64::MIN_POSITIVE,
            1.0 + f64::EPSILON,
        ] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }
}
