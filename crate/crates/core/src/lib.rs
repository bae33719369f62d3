//! Screening-and-allocation toolkit over point-curve asset objects.
//!
//! Assets are represented as metric objects (daily return plus an intraday
//! spot-volatility grid), ranked by how much a risk-adjusted target explains
//! their metric dispersion, and screened into a reduced universe on which
//! capped minimum-variance allocation runs. The crate also ships the Monte
//! Carlo study designs used to characterize the screening rules and a rolling
//! monthly backtest engine with CSV/SVG reporting.

pub mod backtest;
pub mod dataio;
pub mod error;
pub mod highfreq;
pub mod metric;
pub mod portfolio;
pub mod screen;
pub mod simgen;

pub use error::{Error, Result};
pub use highfreq::{MinutePanel, SharpeRatio, TargetSeries};
pub use metric::{GridObject, MetricObject, MetricSample, PointCurveObject, ProductMetric};
pub use portfolio::{CovMatrix, PerfReport, WeightVector};
pub use screen::{MdsScore, Method, ScreenResult, SlicePartition};
pub use simgen::{DgpConfig, Model, Process, StudyMetrics, StudyRow};
