//! Batch command surface: generate data, run simulation studies, score and
//! screen a panel, run backtests, and re-render plots.
//!
//! Exit codes: 0 on success, 1 on validation/configuration errors, 2 on data
//! errors. All errors go to standard error with a stable one-line prefix
//! (`error[config]:` or `error[data]:`).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::{Months, NaiveDate};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use mds_screen_core::backtest::{
    emit_report, parse_backtest_config, read_nav_csv, render_nav_svg, run_backtest, BacktestConfig,
};
use mds_screen_core::dataio::{
    fmt_f64, gen_synthetic_market, parse_study_config, read_panel, write_panel, write_study_csv,
    SyntheticConfig,
};
use mds_screen_core::error::Error;
use mds_screen_core::highfreq::{build_target, derive_panel};
use mds_screen_core::metric::MetricSample;
use mds_screen_core::screen::{
    build_partition, momentum_score, score_all_assets, sis_score, Method, ScreenResult,
};
use mds_screen_core::simgen::run_study;

#[derive(Parser)]
#[command(
    name = "mds-screen",
    version,
    about = "Metric dependence screening and capped minimum-variance allocation"
)]
struct Cli {
    /// Worker threads (default: all cores). Results are identical for any
    /// thread count.
    #[arg(long, global = true, env = "MDS_SCREEN_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic minute-bar market panel.
    GenData {
        /// Number of assets.
        #[arg(long)]
        assets: usize,
        /// Number of trading days (consecutive weekdays).
        #[arg(long)]
        days: usize,
        /// RNG seed; identical seeds give identical panels.
        #[arg(long)]
        seed: u64,
        /// Output panel directory (minutes.csv, daily.csv, index.csv).
        #[arg(long)]
        out: PathBuf,
        /// First calendar date of the panel.
        #[arg(long, default_value = "2024-01-01")]
        start_date: String,
        /// Minutes per trading day.
        #[arg(long, default_value_t = 240)]
        minutes: usize,
    },
    /// Run a Monte Carlo screening study from a config file.
    Simulate {
        /// Study config (key = value lines).
        #[arg(long)]
        config: PathBuf,
        /// Replications; overrides the config when given.
        #[arg(long)]
        reps: Option<usize>,
        /// Output directory for metrics.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Score and screen a panel over a trailing window.
    Screen {
        /// Panel directory.
        #[arg(long)]
        panel: PathBuf,
        /// Last day of the estimation window (YYYY-MM-DD).
        #[arg(long)]
        window_end: String,
        /// Trailing window length in calendar months.
        #[arg(long, default_value_t = 6)]
        window_months: usize,
        /// Number of quantile slices.
        #[arg(long, default_value_t = 8)]
        slices: usize,
        /// Selection size.
        #[arg(long)]
        top: usize,
        /// Selection rule: mds, sis, or mtm.
        #[arg(long, default_value = "mds")]
        method: String,
        /// Output CSV file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the rolling monthly backtest.
    Backtest {
        /// Panel directory.
        #[arg(long)]
        panel: PathBuf,
        /// Backtest config (key = value lines); defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (summary.csv, nav/, selections.csv, SVGs).
        #[arg(long)]
        out: PathBuf,
        /// Skip SVG rendering.
        #[arg(long, default_value_t = false)]
        no_svg: bool,
    },
    /// Re-render NAV plots from saved NAV CSVs.
    Report {
        /// Directory holding a nav/ subdirectory.
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error[config]: --threads must be positive");
            return ExitCode::from(1);
        }
        // Ignore the error if a global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            if err.is_data() {
                eprintln!("error[data]: {err}");
                ExitCode::from(2)
            } else {
                eprintln!("error[config]: {err}");
                ExitCode::from(1)
            }
        }
    }
}

fn parse_cli_date(s: &str) -> Result<NaiveDate, Error> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map_err(|_| Error::InvalidParameter(format!("invalid date '{s}' (expected YYYY-MM-DD)")))
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::GenData {
            assets,
            days,
            seed,
            out,
            start_date,
            minutes,
        } => {
            let mut cfg = SyntheticConfig::new(assets, days, seed);
            cfg.start_date = parse_cli_date(&start_date)?;
            cfg.minutes_per_day = minutes;
            let panel = gen_synthetic_market(&cfg)?;
            write_panel(&panel, &out)?;
            println!(
                "wrote {} assets x {} days to {}",
                assets,
                days,
                out.display()
            );
            Ok(())
        }
        Command::Simulate { config, reps, out } => {
            let mut study = parse_study_config(&config)?;
            if let Some(r) = reps {
                study.replications = r;
            }
            let rows = run_study(&study.dgp, study.replications, &study.d_list, study.slices)?;
            fs::create_dir_all(&out).map_err(|e| Error::Io {
                path: out.display().to_string(),
                source: e,
            })?;
            let path = out.join("metrics.csv");
            write_study_csv(&rows, &study.dgp, &path)?;
            println!(
                "wrote {} rows ({} replications) to {}",
                rows.len(),
                study.replications,
                path.display()
            );
            Ok(())
        }
        Command::Screen {
            panel,
            window_end,
            window_months,
            slices,
            top,
            method,
            out,
        } => {
            let method = Method::parse(&method)?;
            let end = parse_cli_date(&window_end)?;
            let start = end
                .checked_sub_months(Months::new(window_months as u32))
                .ok_or_else(|| Error::InvalidParameter("window start underflow".into()))?;
            let panel = read_panel(&panel)?;
            let result = screen_window(&panel, start, end, slices, method, top, &out)?;
            println!(
                "scored {} assets, selected {} into {}",
                result.scores.len(),
                result.selected.len(),
                out.display()
            );
            Ok(())
        }
        Command::Backtest {
            panel,
            config,
            out,
            no_svg,
        } => {
            let cfg = match config {
                Some(path) => parse_backtest_config(&path)?,
                None => BacktestConfig::default(),
            };
            let panel = read_panel(&panel)?;
            let report = run_backtest(&panel, &cfg)?;
            emit_report(&report, &out, !no_svg)?;
            println!(
                "backtested {} combinations over {} rebalances into {}",
                report.combos.len(),
                report.combos[0].1.history.len(),
                out.display()
            );
            Ok(())
        }
        Command::Report { input } => {
            let count = rerender(&input)?;
            println!("re-rendered {count} plots under {}", input.display());
            Ok(())
        }
    }
}

/// Scores the trailing window ending at `end` and writes the ranked CSV.
fn screen_window(
    panel: &mds_screen_core::highfreq::MinutePanel,
    start: NaiveDate,
    end: NaiveDate,
    slices: usize,
    method: Method,
    top: usize,
    out: &Path,
) -> Result<ScreenResult, Error> {
    let derived = derive_panel(panel, 48, 2, 48)?;
    let days: Vec<usize> = panel
        .dates()
        .iter()
        .enumerate()
        .filter(|&(t, d)| t > 0 && *d > start && *d <= end)
        .map(|(t, _)| t)
        .collect();
    if days.len() < slices {
        return Err(Error::InsufficientData {
            required: slices,
            actual: days.len(),
        });
    }
    let complete: Vec<usize> = (0..panel.n_assets())
        .filter(|&a| {
            days.iter().all(|&t| {
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
            days.iter()
                .map(|&t| derived.returns[a][t].unwrap())
                .collect()
        })
        .collect();
    let sharpes: Vec<Vec<_>> = complete
        .iter()
        .map(|&a| days.iter().map(|&t| derived.sharpes[a][t]).collect())
        .collect();
    let mcaps: Vec<Vec<f64>> = complete
        .iter()
        .map(|&a| {
            days.iter()
                .map(|&t| panel.market_cap(a, t).unwrap())
                .collect()
        })
        .collect();
    let market: Vec<f64> = days.iter().map(|&t| panel.market()[t]).collect();
    let target = build_target(&sharpes, &returns, &mcaps, &market)?;

    let mut result = match method {
        Method::Mds => {
            let partition = build_partition(&target.y, slices)?;
            let objs: Vec<MetricSample<_>> = complete
                .iter()
                .map(|&a| {
                    MetricSample::new(
                        days.iter()
                            .map(|&t| derived.covariates[a][t].clone().unwrap())
                            .collect(),
                    )
                })
                .collect::<Result<Vec<_>, Error>>()?;
            score_all_assets(&objs, &partition)?
        }
        Method::Sis => {
            let scores = returns
                .iter()
                .map(|r| sis_score(r, &target.y))
                .collect::<Result<Vec<f64>, Error>>()?;
            let flags = vec![false; scores.len()];
            ScreenResult::from_scores(scores, flags)
        }
        Method::Mtm => {
            let scores: Vec<f64> = returns.iter().map(|r| momentum_score(r)).collect();
            let flags = vec![false; scores.len()];
            ScreenResult::from_scores(scores, flags)
        }
    };
    result.selected = result.top_d(top)?;

    let file = fs::File::create(out).map_err(|e| Error::Io {
        path: out.display().to_string(),
        source: e,
    })?;
    let mut w = std::io::BufWriter::new(file);
    let io_err = |e: std::io::Error| Error::Io {
        path: out.display().to_string(),
        source: e,
    };
    writeln!(w, "rank,asset_id,score,selected").map_err(io_err)?;
    for (rank, &local) in result.ranking.iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{}",
            rank + 1,
            panel.assets()[complete[local]],
            fmt_f64(result.scores[local]),
            u8::from(result.selected.contains(&local))
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(result)
}

/// Re-renders one SVG per selection size from the NAV CSVs under `dir/nav`.
fn rerender(dir: &Path) -> Result<usize, Error> {
    let nav_dir = dir.join("nav");
    let entries = fs::read_dir(&nav_dir).map_err(|e| Error::Io {
        path: nav_dir.display().to_string(),
        source: e,
    })?;
    let mut by_d: std::collections::BTreeMap<String, Vec<(String, Vec<f64>)>> =
        std::collections::BTreeMap::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::Io {
            path: nav_dir.display().to_string(),
            source: e,
        })?;
        let path = entry.path();
        let Some(name) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        if path.extension().and_then(|s| s.to_str()) != Some("csv") {
            continue;
        }
        let Some(d_part) = name.rsplit("_d").next() else {
            continue;
        };
        let nav = read_nav_csv(&path)?;
        by_d.entry(d_part.to_string())
            .or_default()
            .push((name.to_string(), nav.iter().map(|(_, v)| *v).collect()));
    }
    if by_d.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no NAV CSVs found under {}",
            nav_dir.display()
        )));
    }
    let mut count = 0;
    for (d, mut series) in by_d {
        series.sort_by(|a, b| a.0.cmp(&b.0));
        let svg_path = dir.join(format!("nav_d{d}.svg"));
        fs::write(&svg_path, render_nav_svg(&series)).map_err(|e| Error::Io {
            path: svg_path.display().to_string(),
            source: e,
        })?;
        count += 1;
    }
    Ok(count)
}
