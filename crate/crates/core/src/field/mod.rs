//! Gaussian random-field generators with interval hyperparameters.

pub mod coefficient;
pub mod kl;
pub mod ou;

pub use coefficient::{apply_cutoff, coefficient_field_2d, ProductCoefficient};
pub use kl::{
    evaluate_kl_field, kl_eigenpairs, solve_characteristic_roots, EvalMode, ExpCovarianceParams,
    FieldEvaluator, GaussianDraw, KlBasis,
};
pub use ou::{sample_ou_path, sample_ou_path_exact, OuPath};

use crate::error::Result;

/// A one-dimensional field with a value and a spatial derivative.
pub trait SpatialField: Send + Sync {
    fn value(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;
}

/// Spatially constant field.
#[derive(Debug, Clone, Copy)]
pub struct ConstantField(pub f64);

impl SpatialField for ConstantField {
    fn value(&self, _x: f64) -> f64 {
        self.0
    }

    fn derivative(&self, _x: f64) -> f64 {
        0.0
    }
}

/// A KL realization sampled once on a uniform grid and interpolated by cubic
/// Hermite polynomials through the exact values and slopes.
///
/// Characteristic tracing evaluates the field millions of times per solve;
/// the table makes each evaluation O(1) instead of O(terms). Outside the
/// field's domain the end values are held and the derivative vanishes.
#[derive(Debug, Clone)]
pub struct TabulatedField {
    lo: f64,
    h: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl TabulatedField {
    /// Intervals used by [`TabulatedField::from_kl`]: enough to resolve the
    /// shortest eigenfunction wavelength with several dozen nodes.
    pub fn default_intervals(terms: usize) -> usize {
        (32 * terms).max(2048)
    }

    pub fn from_kl(field: &FieldEvaluator) -> Result<Self> {
        Self::with_intervals(field, Self::default_intervals(field.basis().terms()))
    }

    pub fn with_intervals(field: &FieldEvaluator, intervals: usize) -> Result<Self> {
        let d = field.basis().domain();
        let xs = d.linspace(intervals.max(1) + 1);
        let values = xs.iter().map(|&x| field.value(x)).collect::<Result<Vec<_>>>()?;
        let slopes = xs.iter().map(|&x| field.derivative(x)).collect::<Result<Vec<_>>>()?;
        Ok(Self { lo: d.lo(), h: d.width() / intervals.max(1) as f64, values, slopes })
    }

    /// Cell index and local coordinate, or `None` outside the table.
    fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let n = self.values.len() - 1;
        let s = (x - self.lo) / self.h;
        if !(s >= 0.0 && s <= n as f64) {
            return None;
        }
        let i = (s.floor() as usize).min(n - 1);
        Some((i, s - i as f64))
    }
}

impl SpatialField for TabulatedField {
    fn value(&self, x: f64) -> f64 {
        let Some((i, t)) = self.locate(x) else {
            return if x < self.lo { self.values[0] } else { *self.values.last().expect("nonempty") };
        };
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.values[i] + h10 * self.h * self.slopes[i] + h01 * self.values[i + 1] + h11 * self.h * self.slopes[i + 1]
    }

    fn derivative(&self, x: f64) -> f64 {
        let Some((i, t)) = self.locate(x) else { return 0.0 };
        let t2 = t * t;
        let d00 = (6.0 * t2 - 6.0 * t) / self.h;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = -d00;
        let d11 = 3.0 * t2 - 2.0 * t;
        d00 * self.values[i] + d10 * self.slopes[i] + d01 * self.values[i + 1] + d11 * self.slopes[i + 1]
    }
}

/// `clamp(mean + q(x), floor, ceiling)`; the derivative vanishes where a cutoff is active.
#[derive(Clone)]
pub struct CutoffField {
    pub mean: f64,
    pub field: std::sync::Arc<dyn SpatialField>,
    pub floor: f64,
    pub ceiling: f64,
}

impl SpatialField for CutoffField {
    fn value(&self, x: f64) -> f64 {
        (self.mean + self.field.value(x)).clamp(self.floor, self.ceiling)
    }

    fn derivative(&self, x: f64) -> f64 {
        let v = self.mean + self.field.value(x);
        if v <= self.floor || v >= self.ceiling {
            0.0
        } else {
            self.field.derivative(x)
        }
    }
}
