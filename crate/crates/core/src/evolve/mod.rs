//! Time evolution in the single-excitation subspace.
//!
//! Energies are angular frequencies and `ħ = 1`, so `exp(-iHt)` takes `t` in
//! seconds directly.

mod dispersion;
mod epochs;
pub mod kernel;
mod mask;
mod propagate;
mod pulse;
mod pulsed;
mod record;

pub use dispersion::propagate_dispersion_1d;
pub use epochs::{propagate_epochs, HamiltonianEpoch};
pub use kernel::{chebyshev_evolve, DenseEigen, HermitianOperator, WithOnsite};
pub use mask::{apply_phase_mask, PhaseMask};
pub use propagate::{
    propagate_static, time_grid, PropagationOptions, Propagator, DEFAULT_DENSE_LIMIT,
};
pub use pulse::{PulseProfile, PulseSchedule};
pub use pulsed::{
    equivalent_mask, propagate_pulsed, propagate_pulsed_fixed, IntegratorOptions, IntegratorStats,
};
pub use record::{Diagnostics, RecordOptions, RunRecord};
