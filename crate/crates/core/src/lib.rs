//! Exact free-particle Schrödinger evolution on periodic grids, together with
//! the hydrodynamic and vortex diagnostics used to study turbulence in the
//! resulting flows.

pub mod analytic;
pub mod correlation;
pub mod error;
pub mod evolution;
mod fft;
pub mod fit;
pub mod flow;
pub mod grid;
pub mod par;
pub mod pipeline;
pub mod snapshot;
pub mod vortex;

pub use error::{Error, Result};
pub use evolution::{advance, propagate, random_phase_ic, recurrence_time, Evolver, InitialConditionParams};
pub use grid::{FieldMeta, GridSpec, SpectralField, WaveField};
pub use snapshot::{load_snapshot, save_snapshot};
