//! Double-loop propagation of random-set uncertainty through a model.

pub mod algorithms;
pub mod grid;
pub mod model;

pub use algorithms::{
    auto_thresholds, compare_bounds, interval_mean_field, propagate_parametric, propagate_random_set, MeanField,
    OrderingReport, ParametricResult, PropagationSettings, RandomSetResult, SampleFailure, Sampling,
    AUTO_THRESHOLD_POINTS,
};
pub use grid::{ParameterGrid, DEFAULT_POINTS_PER_DIM};
pub use model::{
    AxisDraws, EllipticModel, EllipticScenario, FnModel, GaussianFamilyModel, HyperbolicGrid, LoadFn, Model,
    TransportModel, TransportScenario, WaveModel, WaveScenario,
};
