//! Metric objects and closed-form Fréchet statistics.
//!
//! Two object kinds are supported: a generic fixed-length real grid under the
//! squared-L2 metric (volatility curves, quantile curves) and a point-curve
//! pair combining a daily return with such a grid under a product metric.
//! Because the metric is squared-L2 on a product of grids, the empirical
//! Fréchet mean is the componentwise average and both mean and variance have
//! closed forms; no iterative optimizer is needed. Scalars implement the same
//! interface under the absolute-difference metric, which is the 1-point grid
//! special case.

use crate::error::{Error, Result};

/// A point of a metric space with closed-form componentwise means.
pub trait MetricObject: Clone + PartialEq + Send + Sync {
    /// Fails when the two objects cannot be compared (e.g. grid lengths differ).
    fn check_compatible(&self, other: &Self) -> Result<()>;

    /// Validity of the object itself (finiteness).
    fn validate(&self) -> Result<()>;

    /// Squared distance to `other`.
    fn dist_sq(&self, other: &Self) -> Result<f64>;

    /// Distance to `other`.
    fn dist(&self, other: &Self) -> Result<f64> {
        Ok(self.dist_sq(other)?.sqrt())
    }

    /// Componentwise mean of the referenced objects; this is the Fréchet mean
    /// under the squared-L2 product metric.
    fn mean_of(items: &[&Self]) -> Result<Self>;
}

/// Scalars under the absolute-difference metric.
impl MetricObject for f64 {
    fn check_compatible(&self, _other: &Self) -> Result<()> {
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite {
                what: "scalar object",
                index: 0,
            })
        }
    }

    fn dist_sq(&self, other: &Self) -> Result<f64> {
        let d = self - other;
        Ok(d * d)
    }

    fn mean_of(items: &[&Self]) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::EmptyInput("mean of scalar objects"));
        }
        Ok(items.iter().map(|v| **v).sum::<f64>() / items.len() as f64)
    }
}

/// A fixed-length real grid (volatility levels, quantile levels) under the
/// squared-L2 metric.
#[derive(Debug, Clone, PartialEq)]
pub struct GridObject {
    values: Vec<f64>,
}

impl GridObject {
    /// Builds a grid object, rejecting empty or non-finite input.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("grid object"));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    what: "grid object",
                    index: i,
                });
            }
        }
        Ok(GridObject { values })
    }

    /// Grid length J.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Grid levels.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl MetricObject for GridObject {
    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.values.len() == other.values.len() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left: self.values.len(),
                right: other.values.len(),
            })
        }
    }

    fn validate(&self) -> Result<()> {
        Ok(())
    }

    fn dist_sq(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum())
    }

    fn mean_of(items: &[&Self]) -> Result<Self> {
        let first = items
            .first()
            .ok_or(Error::EmptyInput("mean of grid objects"))?;
        let mut acc = vec![0.0; first.values.len()];
        for item in items {
            first.check_compatible(item)?;
            for (a, v) in acc.iter_mut().zip(&item.values) {
                *a += v;
            }
        }
        let n = items.len() as f64;
        for a in acc.iter_mut() {
            *a /= n;
        }
        Ok(GridObject { values: acc })
    }
}

/// One asset-day covariate: daily return paired with an intraday volatility
/// grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCurveObject {
    return_value: f64,
    curve: GridObject,
}

impl PointCurveObject {
    /// Builds a point-curve object. Inputs are validated for finiteness only;
    /// no range bounds are enforced.
    pub fn new(return_value: f64, curve: GridObject) -> Result<Self> {
        if !return_value.is_finite() {
            return Err(Error::NonFinite {
                what: "point-curve return",
                index: 0,
            });
        }
        Ok(PointCurveObject {
            return_value,
            curve,
        })
    }

    pub fn return_value(&self) -> f64 {
        self.return_value
    }

    pub fn curve(&self) -> &GridObject {
        &self.curve
    }
}

impl MetricObject for PointCurveObject {
    fn check_compatible(&self, other: &Self) -> Result<()> {
        self.curve.check_compatible(&other.curve)
    }

    fn validate(&self) -> Result<()> {
        Ok(())
    }

    /// The normalized discrete product distance: unit weight on the curve
    /// component. See [`ProductMetric`] for the general weighted form.
    fn dist_sq(&self, other: &Self) -> Result<f64> {
        ProductMetric::default().dist_sq(self, other)
    }

    fn mean_of(items: &[&Self]) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::EmptyInput("mean of point-curve objects"));
        }
        let curves: Vec<&GridObject> = items.iter().map(|o| &o.curve).collect();
        let curve = GridObject::mean_of(&curves)?;
        let ret = items.iter().map(|o| o.return_value).sum::<f64>() / items.len() as f64;
        Ok(PointCurveObject {
            return_value: ret,
            curve,
        })
    }
}

/// Weighted product distance on point-curve objects,
/// d²(x, x') = (r − r')² + w · Σ_j (v_j − v'_j)².
///
/// The default weight 1.0 is the normalized discrete distance used everywhere
/// downstream; the weight stays fixed across windows and methods. The Fréchet
/// mean does not depend on the weight.
#[derive(Debug, Clone, Copy)]
pub struct ProductMetric {
    pub curve_weight: f64,
}

impl Default for ProductMetric {
    fn default() -> Self {
        ProductMetric { curve_weight: 1.0 }
    }
}

impl ProductMetric {
    pub fn new(curve_weight: f64) -> Result<Self> {
        if !(curve_weight.is_finite() && curve_weight > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "curve weight must be positive and finite, got {curve_weight}"
            )));
        }
        Ok(ProductMetric { curve_weight })
    }

    pub fn dist_sq(&self, a: &PointCurveObject, b: &PointCurveObject) -> Result<f64> {
        let dr = a.return_value - b.return_value;
        let dc = a.curve.dist_sq(&b.curve)?;
        Ok(dr * dr + self.curve_weight * dc)
    }

    pub fn dist(&self, a: &PointCurveObject, b: &PointCurveObject) -> Result<f64> {
        Ok(self.dist_sq(a, b)?.sqrt())
    }
}

/// An ordered, nonempty, homogeneous collection of metric objects.
#[derive(Debug, Clone)]
pub struct MetricSample<T: MetricObject> {
    objects: Vec<T>,
}

impl<T: MetricObject> MetricSample<T> {
    /// Validates homogeneity of kind/grid length and object finiteness.
    pub fn new(objects: Vec<T>) -> Result<Self> {
        let first = objects.first().ok_or(Error::EmptyInput("metric sample"))?;
        first.validate()?;
        for obj in objects.iter().skip(1) {
            obj.validate()?;
            first.check_compatible(obj)?;
        }
        Ok(MetricSample { objects })
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.objects
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.objects.iter()
    }
}

/// Empirical Fréchet mean of the sample (componentwise average).
pub fn frechet_mean<T: MetricObject>(sample: &MetricSample<T>) -> Result<T> {
    let refs: Vec<&T> = sample.iter().collect();
    T::mean_of(&refs)
}

/// Empirical Fréchet variance around `mean`: (1/n) Σ_t d²(x_t, mean).
pub fn frechet_variance<T: MetricObject>(sample: &MetricSample<T>, mean: &T) -> Result<f64> {
    let mut sum = 0.0;
    for obj in sample.iter() {
        sum += obj.dist_sq(mean)?;
    }
    Ok(sum / sample.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;
    use rand_distr::StandardNormal;

    fn pc(r: f64, curve: &[f64]) -> PointCurveObject {
        PointCurveObject::new(r, GridObject::new(curve.to_vec()).unwrap()).unwrap()
    }

    fn random_pc(rng: &mut ChaCha12Rng, grid_len: usize) -> PointCurveObject {
        let r: f64 = rng.sample(StandardNormal);
        let curve: Vec<f64> = (0..grid_len)
            .map(|_| rng.sample::<f64, _>(StandardNormal).abs())
            .collect();
        pc(r, &curve)
    }

    #[test]
    fn distance_identity_case() {
        let a = pc(0.0, &[0.0, 0.0]);
        let b = pc(0.0, &[0.0, 0.0]);
        assert_eq!(a.dist(&b).unwrap(), 0.0);
    }

    #[test]
    fn distance_direct_formula() {
        let a = pc(0.02, &[0.1, 0.2]);
        let b = pc(0.00, &[0.1, 0.1]);
        let expect = (0.0004f64 + 0.01).sqrt();
        assert!((a.dist(&b).unwrap() - expect).abs() < 1e-15);
        assert!((a.dist(&b).unwrap() - 0.101980).abs() < 1e-6);
    }

    #[test]
    fn distance_matches_elementwise_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let a = random_pc(&mut rng, 48);
        let b = random_pc(&mut rng, 48);
        // Independent element-by-element accumulation.
        let mut acc = (a.return_value() - b.return_value()).powi(2);
        for j in 0..48 {
            acc += (a.curve().values()[j] - b.curve().values()[j]).powi(2);
        }
        assert!((a.dist(&b).unwrap() - acc.sqrt()).abs() < 1e-12);
        assert!((a.dist(&b).unwrap() - b.dist(&a).unwrap()).abs() == 0.0);
    }

    #[test]
    fn distance_grid_mismatch_errors() {
        let a = pc(0.0, &[0.0, 0.0]);
        let b = pc(0.0, &[0.0, 0.0, 0.0]);
        assert!(matches!(
            a.dist_sq(&b),
            Err(Error::DimensionMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn mean_midpoint_and_identity() {
        let sample = MetricSample::new(vec![pc(0.0, &[0.0, 0.0]), pc(2.0, &[0.0, 0.0])]).unwrap();
        let mean = frechet_mean(&sample).unwrap();
        assert_eq!(mean, pc(1.0, &[0.0, 0.0]));

        let single = MetricSample::new(vec![pc(0.3, &[0.1, 0.4])]).unwrap();
        assert_eq!(frechet_mean(&single).unwrap(), pc(0.3, &[0.1, 0.4]));
    }

    #[test]
    fn mean_matches_lattice_search_on_two_point_grids() {
        // Brute-force minimization of the mean squared distance over a fine
        // lattice on (return, v1, v2); the componentwise mean must win.
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let objs: Vec<PointCurveObject> = (0..5).map(|_| random_pc(&mut rng, 2)).collect();
        let sample = MetricSample::new(objs.clone()).unwrap();
        let mean = frechet_mean(&sample).unwrap();

        let msd = |cand: &PointCurveObject| -> f64 {
            objs.iter().map(|o| o.dist_sq(cand).unwrap()).sum::<f64>() / objs.len() as f64
        };

        let step = 0.02;
        let mut best = f64::INFINITY;
        let mut best_cand = mean.clone();
        for i in -10..=10 {
            for j in -10..=10 {
                for k in -10..=10 {
                    let cand = pc(
                        mean.return_value() + step * i as f64,
                        &[
                            mean.curve().values()[0] + step * j as f64,
                            mean.curve().values()[1] + step * k as f64,
                        ],
                    );
                    let v = msd(&cand);
                    if v < best {
                        best = v;
                        best_cand = cand;
                    }
                }
            }
        }
        // The lattice contains the mean itself, so the winner is the mean.
        assert_eq!(best_cand, mean);
        assert!((best - msd(&mean)).abs() < 1e-15);
    }

    #[test]
    fn variance_examples() {
        let sample = MetricSample::new(vec![pc(0.0, &[0.0, 0.0]), pc(2.0, &[0.0, 0.0])]).unwrap();
        let mean = pc(1.0, &[0.0, 0.0]);
        assert_eq!(frechet_variance(&sample, &mean).unwrap(), 1.0);

        let same = MetricSample::new(vec![pc(0.5, &[0.2, 0.2]); 4]).unwrap();
        let m = frechet_mean(&same).unwrap();
        assert_eq!(frechet_variance(&same, &m).unwrap(), 0.0);
    }

    #[test]
    fn variance_matches_double_loop_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let objs: Vec<PointCurveObject> = (0..20).map(|_| random_pc(&mut rng, 6)).collect();
        let sample = MetricSample::new(objs.clone()).unwrap();
        let mean = frechet_mean(&sample).unwrap();
        let var = frechet_variance(&sample, &mean).unwrap();

        // Naive summation oracle over coordinates.
        let mut acc = 0.0;
        for o in &objs {
            let mut d2 = (o.return_value() - mean.return_value()).powi(2);
            for j in 0..6 {
                d2 += (o.curve().values()[j] - mean.curve().values()[j]).powi(2);
            }
            acc += d2;
        }
        assert!((var - acc / 20.0).abs() < 1e-12);
    }

    #[test]
    fn empty_sample_errors() {
        assert!(matches!(
            MetricSample::<PointCurveObject>::new(vec![]),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn weighted_metric_scales_curve_component() {
        let a = pc(0.5, &[1.0, 1.0]);
        let b = pc(0.5, &[0.0, 0.0]);
        let unit = ProductMetric::default();
        let heavy = ProductMetric::new(3.0).unwrap();
        assert!((unit.dist_sq(&a, &b).unwrap() - 2.0).abs() < 1e-15);
        assert!((heavy.dist_sq(&a, &b).unwrap() - 6.0).abs() < 1e-15);
        assert!(ProductMetric::new(0.0).is_err());
        assert!(ProductMetric::new(-1.0).is_err());
    }

    #[test]
    fn scalar_objects_match_one_point_grids() {
        let xs = [0.4, -1.2, 0.9, 2.5];
        let scalars = MetricSample::new(xs.to_vec()).unwrap();
        let grids = MetricSample::new(
            xs.iter()
                .map(|&x| GridObject::new(vec![x]).unwrap())
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let ms = frechet_mean(&scalars).unwrap();
        let mg = frechet_mean(&grids).unwrap();
        assert_eq!(ms, mg.values()[0]);
        assert_eq!(
            frechet_variance(&scalars, &ms).unwrap(),
            frechet_variance(&grids, &mg).unwrap()
        );
    }

    #[test]
    fn non_finite_rejected() {
        assert!(GridObject::new(vec![0.1, f64::NAN]).is_err());
        assert!(PointCurveObject::new(f64::INFINITY, GridObject::new(vec![0.1]).unwrap()).is_err());
        assert!(MetricSample::new(vec![1.0, f64::NAN]).is_err());
    }
}
