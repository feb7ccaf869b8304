//! Method-of-characteristics solvers for transport and rod-wave problems.

pub mod characteristic;
pub mod region;
pub mod transport;
pub mod wave;

pub use characteristic::{trace_characteristic, CharacteristicCurve, SpaceFn, SpaceTimeFn};
pub use region::{domain_of_determinacy, DeterminacyRegion};
pub use transport::{solve_transport, GridSolution2D, PicardSettings, SpaceTimeGrid, TransportCoefficients};
pub use wave::{
    reconstruct_displacement, solve_2x2_system, wave_initial_data, wave_to_system, CouplingForm, WaveMaterial,
    WaveSystem,
};
