//! Maps from applied fields to on-site energy shifts, phases and kicks.
//!
//! SI intermediates such as `μ² ≈ 1e-58` leave the `f32` range, so every map
//! here computes in `f64`; only the resulting pulse schedules are converted
//! to the lattice scalar type.

use std::fmt;
use std::str::FromStr;

use crate::coupling::FieldOrientation;
use crate::error::{invalid, Error, Result};
use crate::evolve::{PulseProfile, PulseSchedule};
use crate::lattice::DisorderRealization;
use crate::scalar::Scalar;

/// Physical constants (SI) and atomic-unit conversions.
pub mod units {
    pub const HBAR: f64 = 1.054_571_817e-34;
    pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
    pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
    pub const DEBYE: f64 = 3.335_640_952e-30;
    /// Atomic unit of electric dipole moment `e a₀`, C·m.
    pub const AU_DIPOLE: f64 = 8.478_353_625_5e-30;
    /// Atomic unit of polarizability, C·m²/V.
    pub const AU_POLARIZABILITY: f64 = 1.648_777_274_36e-41;
    /// Hartree, J.
    pub const HARTREE: f64 = 4.359_744_722_2e-18;
    pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
}

use units::*;

/// Peak field amplitude squared for a beam of intensity `i` (W/m²): `2I/(cε₀)`.
pub fn field_amplitude_sq(intensity: f64) -> f64 {
    2.0 * intensity / (SPEED_OF_LIGHT * EPSILON_0)
}

/// Rigid-rotor constants of a ¹Σ molecule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MolecularConstants {
    /// Rotational constant `B/ħ`, rad/s.
    pub rotational_constant: f64,
    /// Permanent dipole moment, C·m.
    pub dipole: f64,
    /// Polarizability along the molecular axis, C·m²/V.
    pub alpha_parallel: f64,
    /// Polarizability perpendicular to the axis, C·m²/V.
    pub alpha_perpendicular: f64,
}

impl MolecularConstants {
    /// LiCs. `B` is set so that the J=0→1 transition in 1 kV/cm is 12.14 GHz;
    /// the anisotropy of 311 a.u. is the only polarizability combination that
    /// enters the transition shift, so `α⊥` is left at zero.
    pub fn lics() -> Self {
        Self {
            rotational_constant: TWO_PI * 5.897e9,
            dipole: 5.5 * DEBYE,
            alpha_parallel: 311.0 * AU_POLARIZABILITY,
            alpha_perpendicular: 0.0,
        }
    }

    pub fn anisotropy(&self) -> f64 {
        self.alpha_parallel - self.alpha_perpendicular
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rotational_constant > 0.0) {
            return Err(invalid("rotational_constant", "must be positive"));
        }
        if !(self.dipole > 0.0) {
            return Err(invalid("dipole", "must be positive"));
        }
        Ok(())
    }
}

/// Rotational level used as `|g⟩` or `|e⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    /// `|J=0, M_J=0⟩`
    Ground,
    /// `|J=1, M_J=0⟩`
    Excited,
}

impl Level {
    pub fn j(self) -> u32 {
        match self {
            Level::Ground => 0,
            Level::Excited => 1,
        }
    }

    /// DC Stark coefficient `G(J, M_J)` as an exact fraction.
    pub const fn g_coefficient(self) -> (i32, i32) {
        match self {
            Level::Ground => (-1, 3),
            Level::Excited => (1, 5),
        }
    }

    /// AC Stark anisotropy coefficient `F(J, M_J)` as an exact fraction.
    pub const fn f_coefficient(self) -> (i32, i32) {
        match self {
            Level::Ground => (-1, 3),
            Level::Excited => (-3, 5),
        }
    }
}

fn ratio((n, d): (i32, i32)) -> f64 {
    n as f64 / d as f64
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(' ', "").as_str() {
            "g" | "ground" | "(0,0)" | "0,0" => Ok(Level::Ground),
            "e" | "excited" | "(1,0)" | "1,0" => Ok(Level::Excited),
            other => Err(Error::UnknownLevel(other.to_string())),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Ground => "g",
            Level::Excited => "e",
        })
    }
}

/// Focused Gaussian beam. Positions along the axis are measured from the focus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianBeam {
    /// Intensity at the focus, W/m².
    pub peak_intensity: f64,
    /// Waist radius `w₀`, m.
    pub waist: f64,
    /// Wavelength, m.
    pub wavelength: f64,
}

impl GaussianBeam {
    pub fn rayleigh_range(&self) -> f64 {
        std::f64::consts::PI * self.waist * self.waist / self.wavelength
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.waist > 0.0) || !(self.wavelength > 0.0) {
            return Err(invalid("beam", "waist and wavelength must be positive"));
        }
        if !(self.peak_intensity >= 0.0) {
            return Err(invalid("beam", "peak intensity must be non-negative"));
        }
        Ok(())
    }
}

/// `I(r, z) = I₀/(1 + z²/z_R²) · exp[−2r²/(w₀²(1 + z²/z_R²))]`.
pub fn gaussian_beam_intensity(beam: &GaussianBeam, r: f64, z: f64) -> f64 {
    let zr = beam.rayleigh_range();
    let s = 1.0 + (z / zr).powi(2);
    beam.peak_intensity / s * (-2.0 * r * r / (beam.waist * beam.waist * s)).exp()
}

/// Two-level optical transition driven off resonance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoLevelTransition {
    /// Transition dipole matrix element, C·m.
    pub matrix_element: f64,
    /// Detuning, rad/s.
    pub detuning: f64,
}

/// Static and optical fields acting on the molecules.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldConfig {
    pub molecule: MolecularConstants,
    /// DC field magnitude, V/m.
    pub dc_field: f64,
    pub orientation: FieldOrientation<f64>,
    /// AC field envelope amplitude, V/m.
    pub ac_field: f64,
    pub beam: Option<GaussianBeam>,
    pub two_level: Option<TwoLevelTransition>,
}

impl FieldConfig {
    pub fn new(molecule: MolecularConstants, dc_field: f64) -> Self {
        Self {
            molecule,
            dc_field,
            orientation: FieldOrientation::perpendicular(),
            ac_field: 0.0,
            beam: None,
            two_level: None,
        }
    }
}

/// Dressed level energy (rad/s) in weak DC and AC fields:
/// `BJ(J+1) + (μ²𝓔²/2B) G − α⊥𝓔_AC²/4 + (α∥ − α⊥)𝓔_AC² F/4`.
pub fn dc_stark_shift(config: &FieldConfig, level: Level) -> f64 {
    let m = &config.molecule;
    let b = m.rotational_constant;
    let j = level.j() as f64;
    let dc = m.dipole * m.dipole * config.dc_field * config.dc_field / (2.0 * HBAR * HBAR * b);
    let ac2 = config.ac_field * config.ac_field / HBAR;
    b * j * (j + 1.0) + dc * ratio(level.g_coefficient()) - m.alpha_perpendicular * ac2 / 4.0
        + m.anisotropy() * ac2 / 4.0 * ratio(level.f_coefficient())
}

/// `E_e − E_g` in rad/s.
pub fn transition_frequency(config: &FieldConfig) -> f64 {
    dc_stark_shift(config, Level::Excited) - dc_stark_shift(config, Level::Ground)
}

/// `(𝓔 V_eg)² / (4ħ²δω)` in rad/s for field amplitude `field` (V/m).
pub fn ac_stark_two_level(transition: &TwoLevelTransition, field: f64) -> Result<f64> {
    if transition.detuning == 0.0 || !transition.detuning.is_finite() {
        return Err(invalid("detuning", "must be finite and nonzero"));
    }
    let v = field * transition.matrix_element;
    Ok(v * v / (4.0 * HBAR * HBAR * transition.detuning))
}

/// Transition shift per unit beam intensity (rad/s per W/m²) from the
/// polarizability anisotropy: `−2(α∥ − α⊥)/(15 cε₀ ħ)`. The isotropic part
/// shifts both levels equally and drops out.
pub fn ac_transition_coefficient(molecule: &MolecularConstants) -> f64 {
    -2.0 * molecule.anisotropy() / (15.0 * SPEED_OF_LIGHT * EPSILON_0 * HBAR)
}

/// DC-field coefficient `κ` with `ε = κ[(𝓔* + Δ𝓔)² − 𝓔*²]`, rad/s per (V/m)².
pub fn dc_transition_coefficient(molecule: &MolecularConstants) -> f64 {
    let (g0, g1) = (ratio(Level::Ground.g_coefficient()), ratio(Level::Excited.g_coefficient()));
    (g1 - g0) * molecule.dipole * molecule.dipole / (2.0 * HBAR * HBAR * molecule.rotational_constant)
}

/// Kick from a DC pulse `𝓔* + (n − n₀) A sin²(πt/T)`, in 1/m:
/// `δ = −4A𝓔*μ²T / (15ħBa)`.
pub fn pulse_to_delta_dc(molecule: &MolecularConstants, base_field: f64, gradient: f64, duration: f64, lattice_constant: f64) -> f64 {
    -4.0 * gradient * base_field * molecule.dipole * molecule.dipole * duration
        / (15.0 * HBAR * HBAR * molecule.rotational_constant * lattice_constant)
}

/// Kick from a sin² beam pulse on an array along the beam axis, centred at
/// `z_R/√3` from the focus: `δ = −√3 T 𝓔₀² (α∥ − α⊥) / (80 ħ z_R)`.
pub fn pulse_to_delta_beam(molecule: &MolecularConstants, beam: &GaussianBeam, duration: f64) -> f64 {
    -(3f64.sqrt()) * duration * field_amplitude_sq(beam.peak_intensity) * molecule.anisotropy()
        / (80.0 * HBAR * beam.rayleigh_range())
}

/// Lens curvature imprinted by a sin² pulse of a beam centred on the array,
/// from the paraxial profile `I₀[1 − 2d²a²/w₀²]`. Negative for `α∥ > α⊥`.
pub fn lens_phi0_from_beam(molecule: &MolecularConstants, beam: &GaussianBeam, duration: f64, lattice_constant: f64) -> f64 {
    let per_i = ac_transition_coefficient(molecule);
    // Φ_n = ∫ε dt = per_i · I_n · T/2; the lens convention stores −Φ₀ d²
    per_i * beam.peak_intensity * duration / 2.0 * 2.0 * lattice_constant.powi(2) / beam.waist.powi(2)
}

fn site_offsets<T: Scalar>(realization: &DisorderRealization<T>, f: impl Fn([usize; 2]) -> f64) -> Vec<T> {
    realization
        .sites()
        .iter()
        .map(|&c| T::of(f(realization.spec().coord(c))))
        .collect()
}

/// DC gradient pulse `𝓔(t) = 𝓔* + (n − n₀) A sin²(πt/T)` along the x axis.
pub fn dc_gradient_pulse<T: Scalar>(
    molecule: &MolecularConstants,
    realization: &DisorderRealization<T>,
    base_field: f64,
    gradient: f64,
    origin: f64,
    start: T,
    duration: T,
) -> Result<PulseSchedule<T>> {
    molecule.validate()?;
    let offsets = site_offsets(realization, |[x, _]| (x as f64 - origin) * gradient);
    PulseSchedule::new(
        start,
        duration,
        PulseProfile::QuadraticField {
            coefficient: T::of(dc_transition_coefficient(molecule)),
            base_field: T::of(base_field),
            field_offsets: offsets,
        },
    )
}

/// Sin² beam pulse with the full on-axis profile; site `n` sits at
/// `z = z_first + n a` from the focus.
pub fn beam_pulse_axial<T: Scalar>(
    molecule: &MolecularConstants,
    beam: &GaussianBeam,
    realization: &DisorderRealization<T>,
    z_first: f64,
    start: T,
    duration: T,
) -> Result<PulseSchedule<T>> {
    beam.validate()?;
    let a = realization.spec().lattice_constant().as_f64();
    let k = ac_transition_coefficient(molecule);
    let amps = site_offsets(realization, |[x, _]| {
        k * gaussian_beam_intensity(beam, 0.0, z_first + x as f64 * a)
    });
    PulseSchedule::new(start, duration, PulseProfile::Sin2 { amplitudes: amps })
}

/// Sin² beam pulse with the intensity linearized about the packet centre:
/// `I_c + (n − n_c) I₁`, where site `n_c` sits `z0` from the focus.
pub fn beam_pulse_linear<T: Scalar>(
    molecule: &MolecularConstants,
    beam: &GaussianBeam,
    realization: &DisorderRealization<T>,
    z0: f64,
    center_site: f64,
    start: T,
    duration: T,
) -> Result<PulseSchedule<T>> {
    beam.validate()?;
    let a = realization.spec().lattice_constant().as_f64();
    let zr = beam.rayleigh_range();
    let ic = gaussian_beam_intensity(beam, 0.0, z0);
    let s = 1.0 + (z0 / zr).powi(2);
    let i1 = -2.0 * beam.peak_intensity * z0 / (zr * zr * s * s) * a;
    let k = ac_transition_coefficient(molecule);
    let amps = site_offsets(realization, |[x, _]| k * (ic + (x as f64 - center_site) * i1));
    PulseSchedule::new(start, duration, PulseProfile::Sin2 { amplitudes: amps })
}

/// Sin² pulse of a beam centred on a 2D array in its focal plane, using the
/// paraxial profile `I₀[1 − 2d²a²/w₀²]`.
pub fn beam_pulse_quadratic<T: Scalar>(
    molecule: &MolecularConstants,
    beam: &GaussianBeam,
    realization: &DisorderRealization<T>,
    center: [f64; 2],
    start: T,
    duration: T,
) -> Result<PulseSchedule<T>> {
    beam.validate()?;
    let a = realization.spec().lattice_constant().as_f64();
    let k = ac_transition_coefficient(molecule);
    let w2 = beam.waist * beam.waist;
    let amps = site_offsets(realization, |[x, y]| {
        let d2 = (x as f64 - center[0]).powi(2) + (y as f64 - center[1]).powi(2);
        k * beam.peak_intensity * (1.0 - 2.0 * d2 * a * a / w2)
    });
    PulseSchedule::new(start, duration, PulseProfile::Sin2 { amplitudes: amps })
}
