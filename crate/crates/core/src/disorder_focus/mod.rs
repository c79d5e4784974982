//! Focusing experiments on vacancy-disordered lattices: lens enhancement
//! statistics and block-phase focusing, run as parallel ensembles.

mod block;
mod enhancement;
mod seeds;
mod stats;

pub use block::{
    block_focus_experiment, block_focus_realization, block_phases, random_phasor_gain, BlockFocusConfig,
    BlockFocusReport, BlockOutcome, BlockPhaseSolution, PhasorModel,
};
pub use enhancement::{
    enhancement_experiment, focus_time_scan, realization_with_target, EnhancementConfig, EnhancementReport,
    FocusScan, InitialState, RealizationOutcome,
};
pub use seeds::realization_seed;
pub use stats::{summarize, Summary};
