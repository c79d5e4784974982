//! Control protocols: momentum kicks, quadratic lenses, field-to-phase maps
//! and field-orientation steering, with their analytic predictions.

pub mod fieldmap;
mod masks;
mod predict;
mod steering;

pub use fieldmap::{
    ac_stark_two_level, dc_stark_shift, gaussian_beam_intensity, pulse_to_delta_beam, pulse_to_delta_dc,
    FieldConfig, GaussianBeam, Level, MolecularConstants, TwoLevelTransition,
};
pub use masks::{lens_focuses, linear_kick_mask, quadratic_lens_mask, ControlProtocol};
pub use predict::{
    optimal_lens_gaussian, plane_wave_focus_profile, predict_focus_gaussian, predict_focus_plane_wave,
    FocusPrediction,
};
pub use steering::{magic_angle, steering_schedule, SteeringMode, SteeringPoint};
