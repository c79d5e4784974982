use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{invalid, Result};
use crate::scalar::{cis, Scalar};
use crate::wavepacket::ExcitonState;

/// Propagates a vacancy-free 1D state under an arbitrary dispersion `ω(ak)`.
///
/// The chain is embedded in a zero-padded ring `padding` times longer so the
/// packet evolves as on an unbounded lattice for as long as it stays clear of
/// the wrap-around. Amplitude that leaves the original window is discarded, so
/// the returned norm is at most one; it is not renormalized.
pub fn propagate_dispersion_1d<T: Scalar>(
    state: &ExcitonState<T>,
    dispersion: impl Fn(T) -> T,
    t: T,
    padding: usize,
) -> Result<ExcitonState<T>> {
    let r = state.realization();
    if r.spec().dimensionality() != 1 || !r.is_vacancy_free() {
        return Err(invalid("state", "dispersion propagation needs a vacancy-free chain"));
    }
    if padding < 1 {
        return Err(invalid("padding", "padding factor must be at least 1"));
    }
    let n = state.amplitudes().len();
    let p = n * padding;
    let offset = (p - n) / 2;
    let mut grid = vec![Complex::new(T::zero(), T::zero()); p];
    grid[offset..offset + n].copy_from_slice(state.amplitudes());

    let mut planner = FftPlanner::<T>::new();
    planner.plan_fft_forward(p).process(&mut grid);
    let two_pi = T::PI() + T::PI();
    for (nu, g) in grid.iter_mut().enumerate() {
        let folded = if nu > p / 2 { nu as f64 - p as f64 } else { nu as f64 };
        let ak = two_pi * T::of(folded / p as f64);
        *g = *g * cis(-(dispersion(ak) * t));
    }
    planner.plan_fft_inverse(p).process(&mut grid);
    let scale = T::one() / T::of(p as f64);
    let amps = grid[offset..offset + n].iter().map(|c| *c * scale).collect();
    Ok(state.evolved(amps, state.time() + t))
}
