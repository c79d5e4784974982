use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Analytic focusing estimates for a quadratic lens.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FocusPrediction<T> {
    /// `1/(4αΦ₀)`; negative when the lens defocuses.
    pub t_star: T,
    /// Focused amplitude width in sites.
    pub sigma_x_focus: T,
    /// Dimensionless spectral width `a σ_k` after the lens.
    pub delta_k: T,
    pub focuses: bool,
}

fn check<T: Scalar>(phi0: T, alpha: T) -> Result<()> {
    if phi0 == T::zero() || !phi0.is_finite() {
        return Err(invalid("phi0", "lens curvature must be finite and nonzero"));
    }
    if alpha == T::zero() || !alpha.is_finite() {
        return Err(invalid("alpha", "coupling must be finite and nonzero"));
    }
    Ok(())
}

/// Gaussian packet of amplitude width `sigma` sites under a lens `phi0`.
pub fn predict_focus_gaussian<T: Scalar>(sigma: T, phi0: T, alpha: T) -> Result<FocusPrediction<T>> {
    check(phi0, alpha)?;
    if !(sigma > T::zero()) {
        return Err(invalid("sigma", "packet width must be positive"));
    }
    let g = (T::one() + T::of(4.0) * phi0 * phi0 * sigma.powi(4)).sqrt();
    let t_star = T::one() / (T::of(4.0) * alpha * phi0);
    if t_star < T::zero() {
        log::warn!("lens sign opposes the coupling: focus lies at negative time");
    }
    Ok(FocusPrediction {
        t_star,
        sigma_x_focus: sigma / g,
        delta_k: g / sigma,
        focuses: t_star > T::zero(),
    })
}

/// Plane wave on `n` sites under a lens `phi0`. The focused width is the
/// half-width `2π/Δ_k` of the central sinc lobe.
pub fn predict_focus_plane_wave<T: Scalar>(n: usize, phi0: T, alpha: T) -> Result<FocusPrediction<T>> {
    check(phi0, alpha)?;
    let delta_k = T::of(2.0 * n as f64) * phi0.abs();
    let t_star = T::one() / (T::of(4.0) * alpha * phi0);
    Ok(FocusPrediction {
        t_star,
        sigma_x_focus: T::of(2.0) * T::PI() / delta_k,
        delta_k,
        focuses: t_star > T::zero(),
    })
}

/// Optimal curvature `a/(2σ̃)` for a packet of width `sigma` sites.
pub fn optimal_lens_gaussian<T: Scalar>(sigma: T) -> T {
    T::one() / (T::of(2.0) * sigma)
}

/// Focused plane-wave profile `|C_n|² = (2/πΔ) sin²(nΔ/2)/n²` at offset `n`
/// from the focus; the `n = 0` value is its limit `Δ/2π`.
pub fn plane_wave_focus_profile<T: Scalar>(offset: T, delta_k: T) -> T {
    if offset == T::zero() {
        return delta_k / (T::of(2.0) * T::PI());
    }
    let s = (offset * delta_k / T::of(2.0)).sin();
    T::of(2.0) / (T::PI() * delta_k) * s * s / (offset * offset)
}
