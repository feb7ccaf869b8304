//! Positive coefficient fields built from products of one-dimensional random fields.

use crate::error::Result;
use crate::field::kl::FieldEvaluator;

/// `a(x) = max(mu(x) + q1(x1) q2(x2), a_min)`.
pub fn coefficient_field_2d(
    mu: impl Fn(f64, f64) -> f64,
    q1: &FieldEvaluator,
    q2: &FieldEvaluator,
    a_min: f64,
    (x1, x2): (f64, f64),
) -> Result<f64> {
    let product = q1.value(x1)? * q2.value(x2)?;
    Ok(apply_cutoff(mu(x1, x2) + product, a_min, None))
}

/// Lower cutoff at `a_min`, optional upper cutoff at `a_max`.
pub fn apply_cutoff(value: f64, a_min: f64, a_max: Option<f64>) -> f64 {
    let v = value.max(a_min);
    match a_max {
        Some(hi) => v.min(hi),
        None => v,
    }
}

/// Product coefficient `mean + q1(x1) q2(x2)` with cutoffs, as a reusable evaluator.
#[derive(Debug, Clone)]
pub struct ProductCoefficient {
    pub mean: f64,
    pub q1: FieldEvaluator,
    pub q2: FieldEvaluator,
    pub a_min: f64,
    pub a_max: Option<f64>,
}

impl ProductCoefficient {
    pub fn eval(&self, x1: f64, x2: f64) -> Result<f64> {
        let product = self.q1.value(x1)? * self.q2.value(x2)?;
        Ok(apply_cutoff(self.mean + product, self.a_min, self.a_max))
    }

    /// Tabulates the coefficient on a tensor grid: `out[j][i] = a(xs1[i], xs2[j])`.
    ///
    /// Each axis field is evaluated once per coordinate.
    pub fn tabulate(&self, xs1: &[f64], xs2: &[f64]) -> Result<Vec<Vec<f64>>> {
        let v1 = xs1.iter().map(|&x| self.q1.value(x)).collect::<Result<Vec<_>>>()?;
        let v2 = xs2.iter().map(|&x| self.q2.value(x)).collect::<Result<Vec<_>>>()?;
        Ok(v2
            .iter()
            .map(|b| {
                v1.iter()
                    .map(|a| apply_cutoff(self.mean + a * b, self.a_min, self.a_max))
                    .collect()
            })
            .collect())
    }
}
