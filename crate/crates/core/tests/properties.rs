use std::sync::Arc;

use proptest::prelude::*;
use randset::elliptic::{assemble, build_mesh, solve_cg, CoefficientSpec, DomainShape};
use randset::field::{coefficient_field_2d, FieldEvaluator, GaussianDraw, KlBasis};
use randset::propagation::{
    compare_bounds, propagate_parametric, propagate_random_set, FnModel, ParameterGrid, PropagationSettings, Sampling,
};
use randset::rng::Substream;
use randset::Interval;

fn toy_model() -> FnModel<impl Fn(&[f64], &[f64]) -> randset::Result<Vec<f64>> + Send + Sync> {
    // nonlinear and non-monotone in the parameter
    FnModel::new(2, 2, |l: &[f64], z: &[f64]| Ok(vec![(l[0] * z[0]).sin() + l[0] * z[1], z[0] * z[0] - l[0]]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ordering_chain_with_shared_draws(seed in any::<u64>(), lo in -2.0..0.0f64, width in 0.1..3.0f64) {
        let grid = ParameterGrid::line(Interval::new(lo, lo + width).unwrap(), 7).unwrap();
        let settings = PropagationSettings::new(60, seed);
        let model = toy_model();
        let rs = propagate_random_set(&model, &grid, &settings).unwrap();
        let pm_settings = PropagationSettings { thresholds: Some(rs.pbox.thresholds().to_vec()), ..settings };
        let pm = propagate_parametric(&model, &grid, &pm_settings, Sampling::Shared).unwrap();
        let report = compare_bounds(&rs, &pm).unwrap();
        prop_assert!(report.holds());
        prop_assert!(rs.membership_holds());
    }

    #[test]
    fn finer_grid_widens_the_pbox(seed in any::<u64>(), lo in -2.0..0.0f64, width in 0.1..3.0f64) {
        let range = Interval::new(lo, lo + width).unwrap();
        let model = toy_model();
        let coarse = ParameterGrid::line(range, 5).unwrap();
        let fine = ParameterGrid::line(range, 9).unwrap();
        let first = propagate_random_set(&model, &fine, &PropagationSettings::new(40, seed)).unwrap();
        let settings = PropagationSettings { thresholds: Some(first.pbox.thresholds().to_vec()), ..PropagationSettings::new(40, seed) };
        let a = propagate_random_set(&model, &coarse, &settings).unwrap();
        let b = propagate_random_set(&model, &fine, &settings).unwrap();
        for k in 0..a.pbox.len() {
            prop_assert!(b.pbox.f_lower()[k] <= a.pbox.f_lower()[k]);
            prop_assert!(b.pbox.f_upper()[k] >= a.pbox.f_upper()[k]);
        }
    }

    #[test]
    fn membrane_solution_is_nonnegative(values in prop::collection::vec(0.01..100.0f64, 128), load in 0.0..5.0f64) {
        let mesh = build_mesh(DomainShape::LShape, 8, 8).unwrap();
        let coeffs = CoefficientSpec::new(values[..mesh.quads().len()].to_vec()).unwrap();
        let sol = solve_cg(&assemble(&mesh, &coeffs, |x, _| load * x).unwrap(), 1e-12, None).unwrap();
        prop_assert!(sol.values.iter().all(|&u| u >= -1e-12));
    }

    #[test]
    fn coefficient_cutoff_holds(seed in any::<u64>(), sigma in 0.0..5.0f64, a_min in 0.01..1.0f64, x1 in 0.0..1.0f64, x2 in 0.0..1.0f64) {
        let basis = Arc::new(KlBasis::new(0.8, Interval::new(0.0, 1.0).unwrap(), 20).unwrap());
        let mut s = Substream::new(seed, 0);
        let q1 = FieldEvaluator::new(basis.clone(), Arc::new(GaussianDraw::sample(20, &mut s)), sigma).unwrap();
        let q2 = FieldEvaluator::new(basis, Arc::new(GaussianDraw::sample(20, &mut s)), sigma).unwrap();
        let a = coefficient_field_2d(|_, _| 1.0, &q1, &q2, a_min, (x1, x2)).unwrap();
        prop_assert!(a >= a_min);
    }
}
