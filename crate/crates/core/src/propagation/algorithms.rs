//! Random-set and parametric double loops, bound comparison and interval mean fields.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagation::grid::ParameterGrid;
use crate::propagation::model::Model;
use crate::random_set::{
    aumann_expectation, check_sorted, ecdf_sorted, empirical_pbox, interval_hull, sorted_copy, Interval, PBox,
    RandomIntervalSample,
};
use crate::rng::Substream;

/// Number of points of an automatic threshold grid.
pub const AUTO_THRESHOLD_POINTS: usize = 201;

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationSettings {
    pub samples: usize,
    pub seed: u64,
    /// Worker threads; `None` uses all cores.
    pub workers: Option<usize>,
    /// P-box query points; chosen from the data when absent.
    pub thresholds: Option<Vec<f64>>,
}

impl PropagationSettings {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self { samples, seed, workers: None, thresholds: None }
    }
}

/// A model evaluation that failed, by sample and grid index.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleFailure {
    pub sample: usize,
    pub lambda: usize,
    pub message: String,
}

/// Draw-sharing scheme of the parametric loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Sample `k` uses substream `(seed, k)` for every grid point.
    #[default]
    Shared,
    /// Grid point `i` and sample `k` use substream `(seed, ((i + 1) << 32) | k)`.
    Independent,
}

fn independent_index(lambda: usize, sample: usize) -> u64 {
    (((lambda as u64) + 1) << 32) | sample as u64
}

fn run_indexed<T: Send>(workers: Option<usize>, n: usize, f: impl Fn(usize) -> T + Send + Sync) -> Result<Vec<T>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
    // indexed collect keeps sample order regardless of scheduling
    Ok(pool.install(|| (0..n).into_par_iter().map(f).collect()))
}

fn check_run(model: &dyn Model, grid: &ParameterGrid, settings: &PropagationSettings) -> Result<()> {
    if settings.samples == 0 {
        return Err(Error::InvalidInput("sample size must be at least 1".into()));
    }
    if settings.workers == Some(0) {
        return Err(Error::InvalidInput("worker count must be at least 1".into()));
    }
    if model.output_len() == 0 || model.primary() >= model.output_len() {
        return Err(Error::InvalidInput("model has no primary output component".into()));
    }
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty parameter grid".into()));
    }
    if let Some(t) = &settings.thresholds {
        if t.is_empty() {
            return Err(Error::InvalidInput("threshold list is empty".into()));
        }
        check_sorted(t)?;
    }
    Ok(())
}

fn failure_check(failures: &[SampleFailure], failed_units: usize, total: usize) -> Result<()> {
    if failed_units * 100 > total {
        let first = &failures[0];
        return Err(Error::TooManyFailures {
            failed: failed_units,
            total,
            sample: first.sample,
            lambda: first.lambda,
            message: first.message.clone(),
        });
    }
    Ok(())
}

/// Evaluates every grid point for sample `k` with the shared draw `(seed, k)`.
fn shared_sample(model: &dyn Model, grid: &ParameterGrid, seed: u64, k: usize) -> std::result::Result<Vec<f64>, SampleFailure> {
    let draw = Substream::new(seed, k as u64).standard_normals(model.draw_len());
    let len = model.output_len();
    let mut out = Vec::with_capacity(grid.len() * len);
    for (i, lambda) in grid.points().iter().enumerate() {
        let fail = |message: String| SampleFailure { sample: k, lambda: i, message };
        let v = model.evaluate(lambda, &draw).map_err(|e| fail(e.to_string()))?;
        if v.len() != len {
            return Err(fail(format!("model returned {} values, expected {len}", v.len())));
        }
        if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
            return Err(fail(format!("non-finite model value {bad}")));
        }
        out.extend_from_slice(&v);
    }
    Ok(out)
}

/// 201 equally spaced points over `[lo - 5% range, hi + 5% range]`.
pub fn auto_thresholds(lo: f64, hi: f64) -> Vec<f64> {
    let range = hi - lo;
    let pad = if range > 0.0 { 0.05 * range } else { 0.05 * lo.abs().max(1.0) };
    Interval::new(lo - pad, hi + pad)
        .expect("padded range is ordered")
        .linspace(AUTO_THRESHOLD_POINTS)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomSetResult {
    pub seed: u64,
    /// Requested sample size.
    pub samples: usize,
    pub lambdas: Vec<Vec<f64>>,
    pub output_len: usize,
    pub primary: usize,
    /// Indices of the samples that completed, ascending.
    pub sample_indices: Vec<usize>,
    /// Values indexed `[(s * M + i) * L + c]` for kept sample `s`, grid point `i`, component `c`.
    pub values: Vec<f64>,
    /// Per component, the random interval over the kept samples.
    pub intervals: Vec<RandomIntervalSample>,
    pub pbox: PBox,
    pub aumann: Vec<Interval>,
    pub failures: Vec<SampleFailure>,
}

impl RandomSetResult {
    pub fn grid_len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn value(&self, s: usize, i: usize, c: usize) -> f64 {
        self.values[(s * self.grid_len() + i) * self.output_len + c]
    }

    /// Random interval of the primary quantity.
    pub fn primary_intervals(&self) -> &RandomIntervalSample {
        &self.intervals[self.primary]
    }

    /// Every per-parameter value lies in its sample's hull, for every component.
    pub fn membership_holds(&self) -> bool {
        (0..self.sample_indices.len()).all(|s| {
            (0..self.output_len).all(|c| {
                let iv = self.intervals[c].samples()[s];
                (0..self.grid_len()).all(|i| iv.contains(self.value(s, i, c)))
            })
        })
    }

    /// Sample mean of component `c` for each grid point.
    pub fn per_lambda_means(&self, c: usize) -> Vec<f64> {
        let n = self.sample_indices.len() as f64;
        (0..self.grid_len())
            .map(|i| (0..self.sample_indices.len()).map(|s| self.value(s, i, c)).sum::<f64>() / n)
            .collect()
    }
}

/// Random-set double loop: shared draw per sample, hull over the grid.
pub fn propagate_random_set(
    model: &dyn Model,
    grid: &ParameterGrid,
    settings: &PropagationSettings,
) -> Result<RandomSetResult> {
    check_run(model, grid, settings)?;
    let n = settings.samples;
    let rows = run_indexed(settings.workers, n, |k| shared_sample(model, grid, settings.seed, k))?;
    let mut failures = Vec::new();
    let mut sample_indices = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n * grid.len() * model.output_len());
    for (k, row) in rows.into_iter().enumerate() {
        match row {
            Ok(v) => {
                sample_indices.push(k);
                values.extend(v);
            }
            Err(f) => failures.push(f),
        }
    }
    failure_check(&failures, failures.len(), n)?;
    if sample_indices.is_empty() {
        return Err(failure_check(&failures, 1, 0).expect_err("all samples failed"));
    }

    let (m, l) = (grid.len(), model.output_len());
    let kept = sample_indices.len();
    let mut intervals = Vec::with_capacity(l);
    let mut column = vec![0.0; m];
    for c in 0..l {
        let mut hulls = Vec::with_capacity(kept);
        for s in 0..kept {
            for (i, slot) in column.iter_mut().enumerate() {
                *slot = values[(s * m + i) * l + c];
            }
            hulls.push(interval_hull(&column)?);
        }
        intervals.push(RandomIntervalSample::new(hulls)?);
    }
    let primary = model.primary();
    let thresholds = match &settings.thresholds {
        Some(t) => t.clone(),
        None => {
            let env = intervals[primary].envelope();
            auto_thresholds(env.lo(), env.hi())
        }
    };
    let pbox = empirical_pbox(&intervals[primary], &thresholds)?;
    let aumann = intervals.iter().map(aumann_expectation).collect::<Result<Vec<_>>>()?;
    Ok(RandomSetResult {
        seed: settings.seed,
        samples: n,
        lambdas: grid.points().to_vec(),
        output_len: l,
        primary,
        sample_indices,
        values,
        intervals,
        pbox,
        aumann,
        failures,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParametricResult {
    pub seed: u64,
    pub samples: usize,
    pub sampling: Sampling,
    pub lambdas: Vec<Vec<f64>>,
    pub thresholds: Vec<f64>,
    /// Kept samples (shared sampling drops a failed sample for every grid point).
    pub sample_indices: Vec<usize>,
    /// Empirical CDF of the primary quantity per grid point.
    pub ecdfs: Vec<Vec<f64>>,
    pub f_low: Vec<f64>,
    pub f_upp: Vec<f64>,
    pub failures: Vec<SampleFailure>,
}

/// Parametric double loop: one empirical CDF per grid point, then pointwise min and max.
pub fn propagate_parametric(
    model: &dyn Model,
    grid: &ParameterGrid,
    settings: &PropagationSettings,
    sampling: Sampling,
) -> Result<ParametricResult> {
    check_run(model, grid, settings)?;
    let (n, m) = (settings.samples, grid.len());
    let primary = model.primary();
    let mut failures = Vec::new();
    // per grid point, the primary values of the kept samples
    let mut per_lambda: Vec<Vec<f64>> = vec![Vec::with_capacity(n); m];
    let mut sample_indices = Vec::new();
    match sampling {
        Sampling::Shared => {
            let rows = run_indexed(settings.workers, n, |k| shared_sample(model, grid, settings.seed, k))?;
            let l = model.output_len();
            for (k, row) in rows.into_iter().enumerate() {
                match row {
                    Ok(v) => {
                        sample_indices.push(k);
                        for (i, values) in per_lambda.iter_mut().enumerate() {
                            values.push(v[i * l + primary]);
                        }
                    }
                    Err(f) => failures.push(f),
                }
            }
            failure_check(&failures, failures.len(), n)?;
        }
        Sampling::Independent => {
            let rows = run_indexed(settings.workers, n, |k| {
                grid.points()
                    .iter()
                    .enumerate()
                    .map(|(i, lambda)| {
                        let draw = Substream::new(settings.seed, independent_index(i, k)).standard_normals(model.draw_len());
                        model
                            .evaluate(lambda, &draw)
                            .and_then(|v| {
                                v.get(primary).copied().filter(|x| x.is_finite()).ok_or_else(|| {
                                    Error::InvalidInput("model returned no finite primary value".into())
                                })
                            })
                            .map_err(|e| SampleFailure { sample: k, lambda: i, message: e.to_string() })
                    })
                    .collect::<Vec<_>>()
            })?;
            for row in rows {
                for (i, r) in row.into_iter().enumerate() {
                    match r {
                        Ok(v) => per_lambda[i].push(v),
                        Err(f) => failures.push(f),
                    }
                }
            }
            failure_check(&failures, failures.len(), n * m)?;
            sample_indices = (0..n).collect();
        }
    }
    if per_lambda.iter().any(Vec::is_empty) {
        return Err(failure_check(&failures, 1, 0).expect_err("a grid point has no samples"));
    }
    let sorted: Vec<Vec<f64>> = per_lambda.into_iter().map(|v| sorted_copy(v.into_iter())).collect();
    let thresholds = match &settings.thresholds {
        Some(t) => t.clone(),
        None => {
            let lo = sorted.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
            let hi = sorted.iter().map(|v| v[v.len() - 1]).fold(f64::NEG_INFINITY, f64::max);
            auto_thresholds(lo, hi)
        }
    };
    let ecdfs: Vec<Vec<f64>> = sorted.iter().map(|v| ecdf_sorted(v, &thresholds)).collect();
    let f_low = (0..thresholds.len())
        .map(|t| ecdfs.iter().map(|e| e[t]).fold(f64::INFINITY, f64::min))
        .collect();
    let f_upp = (0..thresholds.len())
        .map(|t| ecdfs.iter().map(|e| e[t]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    Ok(ParametricResult {
        seed: settings.seed,
        samples: n,
        sampling,
        lambdas: grid.points().to_vec(),
        thresholds,
        sample_indices,
        ecdfs,
        f_low,
        f_upp,
        failures,
    })
}

/// The four curves of the ordering chain at common thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingReport {
    pub thresholds: Vec<f64>,
    pub f_lower: Vec<f64>,
    pub f_low: Vec<f64>,
    pub f_upp: Vec<f64>,
    pub f_upper: Vec<f64>,
    /// Thresholds (by index) where `f_lower <= f_low <= f_upp <= f_upper` fails.
    pub violations: Vec<usize>,
}

impl OrderingReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the chain `f_lower <= f_low <= f_upp <= f_upper`, exactly.
///
/// Both runs must come from the same seed, sample size, grid and thresholds,
/// with shared draws in the parametric loop.
pub fn compare_bounds(rs: &RandomSetResult, pm: &ParametricResult) -> Result<OrderingReport> {
    let mut problems = Vec::new();
    if rs.seed != pm.seed {
        problems.push(format!("seeds differ ({} vs {})", rs.seed, pm.seed));
    }
    if rs.samples != pm.samples {
        problems.push(format!("sample sizes differ ({} vs {})", rs.samples, pm.samples));
    }
    if rs.lambdas != pm.lambdas {
        problems.push("parameter grids differ".to_string());
    }
    if pm.sampling != Sampling::Shared {
        problems.push("parametric run did not share draws".to_string());
    }
    if rs.pbox.thresholds() != pm.thresholds.as_slice() {
        problems.push("threshold grids differ".to_string());
    }
    if rs.sample_indices != pm.sample_indices {
        problems.push("runs kept different samples".to_string());
    }
    if !problems.is_empty() {
        return Err(Error::Mismatch(problems.join("; ")));
    }
    let (f_lower, f_upper) = (rs.pbox.f_lower().to_vec(), rs.pbox.f_upper().to_vec());
    let violations = (0..pm.thresholds.len())
        .filter(|&t| !(f_lower[t] <= pm.f_low[t] && pm.f_low[t] <= pm.f_upp[t] && pm.f_upp[t] <= f_upper[t]))
        .collect();
    Ok(OrderingReport {
        thresholds: pm.thresholds.clone(),
        f_lower,
        f_low: pm.f_low.clone(),
        f_upp: pm.f_upp.clone(),
        f_upper,
        violations,
    })
}

/// Aumann interval and per-parameter means of selected components (e.g. a slice).
#[derive(Debug, Clone, PartialEq)]
pub struct MeanField {
    pub components: Vec<usize>,
    pub aumann: Vec<Interval>,
    /// `per_lambda[i][n]`: mean of component `components[n]` at grid point `i`.
    pub per_lambda: Vec<Vec<f64>>,
}

pub fn interval_mean_field(rs: &RandomSetResult, components: &[usize]) -> Result<MeanField> {
    if let Some(c) = components.iter().find(|&&c| c >= rs.output_len) {
        return Err(Error::InvalidInput(format!("component {c} out of range")));
    }
    let aumann = components.iter().map(|&c| rs.aumann[c]).collect();
    let means: Vec<Vec<f64>> = components.iter().map(|&c| rs.per_lambda_means(c)).collect();
    let per_lambda = (0..rs.grid_len()).map(|i| means.iter().map(|m| m[i]).collect()).collect();
    Ok(MeanField { components: components.to_vec(), aumann, per_lambda })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal::normal_cdf;
    use crate::propagation::model::{FnModel, GaussianFamilyModel};

    fn gauss_grid(n: usize) -> ParameterGrid {
        ParameterGrid::new(
            vec![Interval::new(-1.0, 1.0).unwrap(), Interval::new(1.0, 2.0).unwrap()],
            vec![n, n],
        )
        .unwrap()
    }

    fn at_zero(thresholds: &[f64], curve: &[f64]) -> f64 {
        curve[thresholds.iter().position(|&b| b == 0.0).unwrap()]
    }

    #[test]
    fn singleton_grid_is_single_valued() {
        let grid = ParameterGrid::new(vec![Interval::point(0.0).unwrap(), Interval::point(1.0).unwrap()], vec![1, 1])
            .unwrap();
        let settings = PropagationSettings::new(200, 5);
        let rs = propagate_random_set(&GaussianFamilyModel, &grid, &settings).unwrap();
        assert!(rs.primary_intervals().samples().iter().all(Interval::is_degenerate));
        assert_eq!(rs.pbox.f_lower(), rs.pbox.f_upper());
        let pm = propagate_parametric(&GaussianFamilyModel, &grid, &settings, Sampling::Shared).unwrap();
        let rs = propagate_random_set(
            &GaussianFamilyModel,
            &grid,
            &PropagationSettings { thresholds: Some(pm.thresholds.clone()), ..settings },
        )
        .unwrap();
        let report = compare_bounds(&rs, &pm).unwrap();
        assert_eq!(report.f_lower, report.f_low);
        assert_eq!(report.f_low, report.f_upp);
        assert_eq!(report.f_upp, report.f_upper);
    }

    #[test]
    fn gaussian_envelope_at_zero() {
        let n = 10_000;
        let tol = 3.0 * (0.8413 * 0.1587 / n as f64).sqrt();
        let mut t = vec![-1.0, 0.0, 1.0];
        t.sort_by(f64::total_cmp);
        let settings = PropagationSettings { thresholds: Some(t.clone()), ..PropagationSettings::new(n, 11) };
        let rs = propagate_random_set(&GaussianFamilyModel, &gauss_grid(11), &settings).unwrap();
        assert!((at_zero(&t, rs.pbox.f_upper()) - normal_cdf(1.0)).abs() <= tol);
        assert!((at_zero(&t, rs.pbox.f_lower()) - normal_cdf(-1.0)).abs() <= tol);
        let pm = propagate_parametric(&GaussianFamilyModel, &gauss_grid(11), &settings, Sampling::Shared).unwrap();
        assert!((at_zero(&t, &pm.f_upp) - normal_cdf(1.0)).abs() <= tol);
        assert!((at_zero(&t, &pm.f_low) - normal_cdf(-1.0)).abs() <= tol);
        let ind = propagate_parametric(&GaussianFamilyModel, &gauss_grid(11), &settings, Sampling::Independent).unwrap();
        assert!(at_zero(&t, &ind.f_upp) >= normal_cdf(1.0) - tol);
        assert!(compare_bounds(&rs, &ind).is_err());
    }

    #[test]
    fn envelope_converges_with_sample_size() {
        let grid = gauss_grid(11);
        let t = vec![0.0];
        for n in [1_000, 10_000] {
            let settings = PropagationSettings { thresholds: Some(t.clone()), ..PropagationSettings::new(n, 3) };
            let rs = propagate_random_set(&GaussianFamilyModel, &grid, &settings).unwrap();
            let se = (0.8413 * 0.1587 / n as f64).sqrt();
            assert!((rs.pbox.f_upper()[0] - normal_cdf(1.0)).abs() <= 3.0 * se);
        }
    }

    #[test]
    fn nested_grids_nest_intervals() {
        let settings = PropagationSettings::new(300, 9);
        let fine = propagate_random_set(&GaussianFamilyModel, &gauss_grid(11), &settings).unwrap();
        let coarse = propagate_random_set(&GaussianFamilyModel, &gauss_grid(6), &settings).unwrap();
        for (f, c) in fine.primary_intervals().samples().iter().zip(coarse.primary_intervals().samples()) {
            assert!(f.contains_interval(c));
        }
        let t = auto_thresholds(-8.0, 8.0);
        let with = |s: &PropagationSettings| PropagationSettings { thresholds: Some(t.clone()), ..s.clone() };
        let fine = propagate_random_set(&GaussianFamilyModel, &gauss_grid(11), &with(&settings)).unwrap();
        let coarse = propagate_random_set(&GaussianFamilyModel, &gauss_grid(6), &with(&settings)).unwrap();
        for k in 0..t.len() {
            assert!(fine.pbox.f_lower()[k] <= coarse.pbox.f_lower()[k]);
            assert!(fine.pbox.f_upper()[k] >= coarse.pbox.f_upper()[k]);
        }
    }

    #[test]
    fn constant_model_gives_unit_steps() {
        let model = FnModel::new(0, 1, |_: &[f64], _: &[f64]| Ok(vec![7.0]));
        let grid = ParameterGrid::line(Interval::new(0.0, 1.0).unwrap(), 4).unwrap();
        let settings = PropagationSettings::new(50, 1);
        let pm = propagate_parametric(&model, &grid, &settings, Sampling::Shared).unwrap();
        for (b, (lo, hi)) in pm.thresholds.iter().zip(pm.f_low.iter().zip(&pm.f_upp)) {
            let step = if *b >= 7.0 { 1.0 } else { 0.0 };
            assert_eq!((*lo, *hi), (step, step));
        }
        let rs = propagate_random_set(&model, &grid, &settings).unwrap();
        assert_eq!(rs.pbox.thresholds().len(), AUTO_THRESHOLD_POINTS);
        assert_eq!(rs.aumann[0], Interval::point(7.0).unwrap());
    }

    /// Finite toy: outcome `omega` in {0, 1, 2} from the draw, two parameters.
    fn toy() -> impl Model {
        FnModel::new(1, 1, |lambda: &[f64], draw: &[f64]| {
            let omega = if draw[0] < -0.5 { 0.0 } else if draw[0] < 0.5 { 1.0 } else { 2.0 };
            Ok(vec![(omega - 1.0) * lambda[0] + omega * omega * 0.1])
        })
    }

    #[test]
    fn ordering_chain_by_enumeration() {
        let grid = ParameterGrid::new(vec![Interval::new(-1.0, 2.0).unwrap()], vec![2]).unwrap();
        let thresholds: Vec<f64> = (-30..=30).map(|k| k as f64 * 0.1).collect();
        let settings = PropagationSettings { thresholds: Some(thresholds.clone()), ..PropagationSettings::new(400, 4) };
        let rs = propagate_random_set(&toy(), &grid, &settings).unwrap();
        let pm = propagate_parametric(&toy(), &grid, &settings, Sampling::Shared).unwrap();
        let report = compare_bounds(&rs, &pm).unwrap();
        assert!(report.holds());

        // brute force over the observed outcomes and both parameters
        let model = toy();
        for (t, &b) in thresholds.iter().enumerate() {
            let mut lower = 0.0;
            let mut upper = 0.0;
            let mut per = [0.0; 2];
            for k in 0..400 {
                let draw = Substream::new(4, k).standard_normals(1);
                let vals: Vec<f64> = grid.points().iter().map(|l| model.evaluate(l, &draw).unwrap()[0]).collect();
                let below: Vec<bool> = vals.iter().map(|v| *v <= b).collect();
                lower += below.iter().all(|x| *x) as u8 as f64;
                upper += below.iter().any(|x| *x) as u8 as f64;
                for i in 0..2 {
                    per[i] += below[i] as u8 as f64;
                }
            }
            assert_eq!(report.f_lower[t], lower / 400.0);
            assert_eq!(report.f_upper[t], upper / 400.0);
            assert_eq!(report.f_low[t], per[0].min(per[1]) / 400.0);
            assert_eq!(report.f_upp[t], per[0].max(per[1]) / 400.0);
        }
    }

    #[test]
    fn mismatched_runs_are_rejected() {
        let grid = gauss_grid(3);
        let s = PropagationSettings::new(20, 1);
        let rs = propagate_random_set(&GaussianFamilyModel, &grid, &s).unwrap();
        let pm = propagate_parametric(&GaussianFamilyModel, &grid, &PropagationSettings::new(20, 2), Sampling::Shared)
            .unwrap();
        assert!(matches!(compare_bounds(&rs, &pm), Err(Error::Mismatch(_))));
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let grid = gauss_grid(5);
        let one = PropagationSettings { workers: Some(1), ..PropagationSettings::new(500, 77) };
        let many = PropagationSettings { workers: Some(8), ..one.clone() };
        assert_eq!(
            propagate_random_set(&GaussianFamilyModel, &grid, &one).unwrap(),
            propagate_random_set(&GaussianFamilyModel, &grid, &many).unwrap()
        );
        assert_eq!(
            propagate_parametric(&GaussianFamilyModel, &grid, &one, Sampling::Independent).unwrap(),
            propagate_parametric(&GaussianFamilyModel, &grid, &many, Sampling::Independent).unwrap()
        );
    }

    #[test]
    fn failures_are_dropped_or_fatal() {
        let grid = ParameterGrid::line(Interval::new(0.0, 1.0).unwrap(), 3).unwrap();
        // sample 13 fails: 1 of 200 is within the 1% budget
        let flaky = FnModel::new(1, 1, |lambda: &[f64], draw: &[f64]| {
            if lambda[0] == 0.5 && draw[0] == Substream::new(8, 13).standard_normal() {
                Err(Error::InvalidInput("boom".into()))
            } else {
                Ok(vec![draw[0] + lambda[0]])
            }
        });
        let rs = propagate_random_set(&flaky, &grid, &PropagationSettings::new(200, 8)).unwrap();
        assert_eq!(rs.failures, vec![SampleFailure { sample: 13, lambda: 1, message: "invalid input: boom".into() }]);
        assert_eq!(rs.sample_indices.len(), 199);
        assert!(!rs.sample_indices.contains(&13));
        // with 50 samples, one failure is 2%
        let err = propagate_random_set(&flaky, &grid, &PropagationSettings::new(50, 8)).unwrap_err();
        assert!(matches!(err, Error::TooManyFailures { failed: 1, total: 50, sample: 13, lambda: 1, .. }));
    }

    #[test]
    fn mean_field_contains_per_lambda_means() {
        let model = FnModel::new(2, 3, |lambda: &[f64], d: &[f64]| {
            Ok(vec![0.0, lambda[0] * d[0] + d[1], (lambda[0] * d[1]).sin()])
        });
        let grid = ParameterGrid::line(Interval::new(0.5, 1.5).unwrap(), 11).unwrap();
        let rs = propagate_random_set(&model, &grid, &PropagationSettings::new(300, 2)).unwrap();
        assert!(rs.membership_holds());
        let mf = interval_mean_field(&rs, &[0, 1, 2]).unwrap();
        assert_eq!(mf.aumann[0], Interval::point(0.0).unwrap());
        for row in &mf.per_lambda {
            for (iv, m) in mf.aumann.iter().zip(row) {
                assert!(iv.contains(*m));
            }
        }
        assert!(interval_mean_field(&rs, &[3]).is_err());
    }
}
