//! Propagation of random-set (interval plus probabilistic) uncertainty through
//! elliptic and hyperbolic PDE models.
//!
//! The crate provides
//! - interval, finite random set and p-box functionals ([`random_set`]),
//! - exponential-kernel random fields by explicit Karhunen-Loève expansion or
//!   Ornstein-Uhlenbeck sampling ([`field`]),
//! - a linear finite-element solver on square and L-shaped meshes ([`elliptic`]),
//! - method-of-characteristics solvers for transport and wave problems ([`hyperbolic`]),
//! - the random-set and parametric double-loop propagation algorithms ([`propagation`]),
//! - configuration, CSV/JSON output and SVG plots for the `randset` binary ([`cli`]).

pub mod cli;
pub mod elliptic;
pub mod error;
pub mod field;
pub mod hyperbolic;
pub mod normal;
pub mod propagation;
pub mod random_set;
pub mod rng;

pub use error::{Error, Result};
pub use normal::{inverse_normal_cdf, normal_cdf};
pub use random_set::{
    aumann_expectation, empirical_pbox, imprecise_gaussian_focal, interval_hull, lower_probability,
    upper_probability, FiniteRandomSet, ImpreciseGaussianSpec, Interval, PBox, RandomIntervalSample,
};
