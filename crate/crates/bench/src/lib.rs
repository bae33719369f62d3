//! Shared input builders for the benchmark targets.

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use mds_screen_core::metric::{GridObject, MetricSample, PointCurveObject};
use mds_screen_core::portfolio::CovMatrix;

pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

pub fn normal_series(rng: &mut ChaCha12Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// A panel of point-curve samples shaped like one backtest window
/// (n window days, J grid points per curve).
pub fn point_curve_panel(
    rng: &mut ChaCha12Rng,
    assets: usize,
    days: usize,
    grid: usize,
) -> Vec<MetricSample<PointCurveObject>> {
    (0..assets)
        .map(|_| {
            MetricSample::new(
                (0..days)
                    .map(|_| {
                        let r: f64 = 0.02 * rng.sample::<f64, _>(StandardNormal);
                        let curve: Vec<f64> = (0..grid)
                            .map(|_| 0.001 * rng.sample::<f64, _>(StandardNormal).abs())
                            .collect();
                        PointCurveObject::new(r, GridObject::new(curve).unwrap()).unwrap()
                    })
                    .collect(),
            )
            .unwrap()
        })
        .collect()
}

/// Random positive semidefinite matrix A'A/d.
pub fn random_psd(rng: &mut ChaCha12Rng, d: usize) -> CovMatrix {
    let a: Vec<f64> = (0..d * d).map(|_| rng.sample(StandardNormal)).collect();
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
