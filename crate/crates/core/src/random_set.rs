//! Intervals, finite random sets, p-boxes and the set functionals built on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::inverse_normal_cdf;

/// Closed bounded real interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInput(format!(
                "interval bounds must be finite, got [{lo}, {hi}]"
            )));
        }
        if lo > hi {
            return Err(Error::InvalidInput(format!(
                "interval lower bound {lo} exceeds upper bound {hi}"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// Degenerate interval `[x, x]`.
    pub fn point(x: f64) -> Result<Self> {
        Self::new(x, x)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `other ⊂ self`.
    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo.max(other.lo) <= self.hi.min(other.hi)
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    /// `count` equally spaced points from `lo` to `hi`; a single point yields the midpoint.
    pub fn linspace(&self, count: usize) -> Vec<f64> {
        match count {
            0 => Vec::new(),
            1 => vec![self.midpoint()],
            _ => {
                // i / (n - 1) is correctly rounded, so nested grids share bit-identical points
                (0..count)
                    .map(|i| {
                        if i == count - 1 {
                            self.hi
                        } else {
                            self.lo + self.width() * (i as f64 / (count - 1) as f64)
                        }
                    })
                    .collect()
            }
        }
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Finite random set (Dempster-Shafer structure) with interval focal elements.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteRandomSet {
    focals: Vec<Interval>,
    weights: Vec<f64>,
}

impl FiniteRandomSet {
    pub fn new(focals: Vec<Interval>, weights: Vec<f64>) -> Result<Self> {
        if focals.is_empty() {
            return Err(Error::InvalidInput("random set needs at least one focal element".into()));
        }
        if focals.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} focal elements but {} weights",
                focals.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidInput("focal weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("focal weights sum to {total}, not 1")));
        }
        Ok(Self { focals, weights })
    }

    pub fn focals(&self) -> &[Interval] {
        &self.focals
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn mass_where(&self, pred: impl Fn(&Interval) -> bool) -> f64 {
        self.focals
            .iter()
            .zip(&self.weights)
            .filter(|(a, _)| pred(a))
            .map(|(_, w)| *w)
            .sum()
    }
}

/// Probability that the random set hits `event` (plausibility).
pub fn upper_probability(rs: &FiniteRandomSet, event: &Interval) -> f64 {
    rs.mass_where(|a| a.intersects(event))
}

/// Probability that the random set is contained in `event` (belief).
pub fn lower_probability(rs: &FiniteRandomSet, event: &Interval) -> f64 {
    rs.mass_where(|a| event.contains_interval(a))
}

/// Sample of realizations of a random interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomIntervalSample {
    samples: Vec<Interval>,
}

impl RandomIntervalSample {
    pub fn new(samples: Vec<Interval>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidInput("random interval sample is empty".into()));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[Interval] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Smallest lower bound and largest upper bound over the sample.
    pub fn envelope(&self) -> Interval {
        let lo = self.samples.iter().map(Interval::lo).fold(f64::INFINITY, f64::min);
        let hi = self.samples.iter().map(Interval::hi).fold(f64::NEG_INFINITY, f64::max);
        Interval { lo, hi }
    }
}

/// Lower and upper distribution functions tabulated on a threshold grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PBox {
    thresholds: Vec<f64>,
    f_lower: Vec<f64>,
    f_upper: Vec<f64>,
}

impl PBox {
    pub fn new(thresholds: Vec<f64>, f_lower: Vec<f64>, f_upper: Vec<f64>) -> Result<Self> {
        if thresholds.len() != f_lower.len() || thresholds.len() != f_upper.len() {
            return Err(Error::InvalidInput("p-box columns differ in length".into()));
        }
        check_sorted(&thresholds)?;
        for i in 0..thresholds.len() {
            let (l, u) = (f_lower[i], f_upper[i]);
            if !(0.0 <= l && l <= u && u <= 1.0) {
                return Err(Error::InvalidInput(format!(
                    "p-box row {i} violates 0 <= {l} <= {u} <= 1"
                )));
            }
            if i > 0 && (l < f_lower[i - 1] || u < f_upper[i - 1]) {
                return Err(Error::InvalidInput(format!("p-box not monotone at row {i}")));
            }
        }
        Ok(Self { thresholds, f_lower, f_upper })
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn f_lower(&self) -> &[f64] {
        &self.f_lower
    }

    pub fn f_upper(&self) -> &[f64] {
        &self.f_upper
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }
}

pub(crate) fn check_sorted(values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("thresholds must be finite".into()));
    }
    if values.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidInput("thresholds must be sorted ascending".into()));
    }
    Ok(())
}

/// Right-continuous empirical CDF `#{v <= b} / n` at every threshold.
///
/// `sorted` must be ascending; thresholds are walked in one merge pass.
pub(crate) fn ecdf_sorted(sorted: &[f64], thresholds: &[f64]) -> Vec<f64> {
    let n = sorted.len() as f64;
    let mut count = 0usize;
    thresholds
        .iter()
        .map(|&b| {
            while count < sorted.len() && sorted[count] <= b {
                count += 1;
            }
            count as f64 / n
        })
        .collect()
}

pub(crate) fn sorted_copy(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Empirical p-box: `F_lower(b)` counts upper endpoints `<= b`, `F_upper(b)` lower endpoints.
pub fn empirical_pbox(s: &RandomIntervalSample, thresholds: &[f64]) -> Result<PBox> {
    if s.is_empty() {
        return Err(Error::InvalidInput("empty sample".into()));
    }
    check_sorted(thresholds)?;
    let uppers = sorted_copy(s.samples.iter().map(Interval::hi));
    let lowers = sorted_copy(s.samples.iter().map(Interval::lo));
    PBox::new(
        thresholds.to_vec(),
        ecdf_sorted(&uppers, thresholds),
        ecdf_sorted(&lowers, thresholds),
    )
}

/// Aumann expectation of a random interval: `[mean of lowers, mean of uppers]`.
pub fn aumann_expectation(s: &RandomIntervalSample) -> Result<Interval> {
    if s.is_empty() {
        return Err(Error::InvalidInput("empty sample".into()));
    }
    let n = s.len() as f64;
    let lo = s.samples.iter().map(Interval::lo).sum::<f64>() / n;
    let hi = s.samples.iter().map(Interval::hi).sum::<f64>() / n;
    Interval::new(lo, hi)
}

/// Hull `[min, max]` of a finite list of values.
pub fn interval_hull(values: &[f64]) -> Result<Interval> {
    if values.is_empty() {
        return Err(Error::InvalidInput("hull of an empty parameter grid".into()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Interval::new(lo, hi)
}

/// Gaussian family `mu + sigma * z` with interval mean and standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpreciseGaussianSpec {
    mu: Interval,
    sigma: Interval,
}

impl ImpreciseGaussianSpec {
    pub fn new(mu: Interval, sigma: Interval) -> Result<Self> {
        if sigma.lo() <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "standard deviation bounds must be positive, got {sigma}"
            )));
        }
        Ok(Self { mu, sigma })
    }

    pub fn mu(&self) -> Interval {
        self.mu
    }

    pub fn sigma(&self) -> Interval {
        self.sigma
    }

    /// Focal interval for a standard normal quantile `z` directly.
    pub fn focal_at_quantile(&self, z: f64) -> Interval {
        let (s_lo, s_hi) = if z >= 0.0 {
            (self.sigma.lo(), self.sigma.hi())
        } else {
            (self.sigma.hi(), self.sigma.lo())
        };
        Interval {
            lo: self.mu.lo() + s_lo * z,
            hi: self.mu.hi() + s_hi * z,
        }
    }
}

/// Focal element `A(omega)` of the imprecise Gaussian family.
pub fn imprecise_gaussian_focal(omega: f64, spec: &ImpreciseGaussianSpec) -> Result<Interval> {
    let z = inverse_normal_cdf(omega)?;
    Ok(spec.focal_at_quantile(z))
}
