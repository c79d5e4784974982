use std::sync::Arc;

use crate::evolve::PhaseMask;
use crate::lattice::DisorderRealization;
use crate::scalar::Scalar;

/// Momentum kick by `delta` (1/m per axis): `Φ_n = −a (n_x δ_x + n_y δ_y)`.
///
/// With the `e^{-iΦ}` mask convention this multiplies amplitudes by
/// `e^{+i a δ·n}`, moving every k component by `+δ`.
pub fn linear_kick_mask<T: Scalar>(realization: Arc<DisorderRealization<T>>, delta: [T; 2]) -> PhaseMask<T> {
    let a = realization.spec().lattice_constant();
    let two_d = realization.spec().dimensionality() == 2;
    PhaseMask::from_fn(realization, |[x, y]| {
        let mut p = T::of(x as f64) * delta[0];
        if two_d {
            p = p + T::of(y as f64) * delta[1];
        }
        -(a * p)
    })
}

/// Quadratic lens centred on `target` (cell coordinates).
///
/// The imprinted amplitude factor is `e^{+iΦ₀ d²}` with `d²` the summed
/// squared per-axis distance in sites, so the stored mask values are
/// `−Φ₀ d²`. A packet then refocuses after `t* = 1/(4αΦ₀)`, which is in the
/// future only when `Φ₀` and `α` share a sign.
pub fn quadratic_lens_mask<T: Scalar>(
    realization: Arc<DisorderRealization<T>>,
    phi0: T,
    target: [T; 2],
) -> PhaseMask<T> {
    let two_d = realization.spec().dimensionality() == 2;
    PhaseMask::from_fn(realization, |[x, y]| {
        let dx = T::of(x as f64) - target[0];
        let mut d2 = dx * dx;
        if two_d {
            let dy = T::of(y as f64) - target[1];
            d2 = d2 + dy * dy;
        }
        -(phi0 * d2)
    })
}

/// Whether a lens of curvature `phi0` focuses (rather than defocuses) for coupling `alpha`.
pub fn lens_focuses<T: Scalar>(phi0: T, alpha: T) -> bool {
    phi0 * alpha > T::zero()
}

/// Instantaneous control protocols.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ControlProtocol<T> {
    LinearKick { delta: [T; 2] },
    QuadraticLens { phi0: T, target: [T; 2] },
}

impl<T: Scalar> ControlProtocol<T> {
    pub fn mask(&self, realization: Arc<DisorderRealization<T>>) -> PhaseMask<T> {
        match *self {
            Self::LinearKick { delta } => linear_kick_mask(realization, delta),
            Self::QuadraticLens { phi0, target } => quadratic_lens_mask(realization, phi0, target),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::apply_phase_mask;
    use crate::lattice::LatticeSpec;
    use crate::wavepacket::{k_transform, make_gaussian, GaussianPacket};

    fn chain(n: usize, a: f64) -> Arc<DisorderRealization<f64>> {
        Arc::new(DisorderRealization::full(LatticeSpec::chain(n, a).unwrap()))
    }

    #[test]
    fn kick_moves_spectrum_center_forward() {
        let a = 400e-9;
        let r = chain(201, a);
        let s = make_gaussian(r.clone(), GaussianPacket { center: [100.0, 0.0], width: 10.0, carrier: [0.0; 2] }).unwrap();
        let kicked = apply_phase_mask(&s, &linear_kick_mask(r, [1.29 / a, 0.0])).unwrap();
        let c = k_transform(&kicked).center_ak()[0];
        assert!((c - 1.29).abs() < 1e-6, "{c}");
    }

    #[test]
    fn zero_parameters_give_identity_masks() {
        let r = chain(11, 1.0);
        assert!(linear_kick_mask(r.clone(), [0.0, 0.0]).phases().iter().all(|p| *p == 0.0));
        assert!(quadratic_lens_mask(r, 0.0, [5.0, 0.0]).phases().iter().all(|p| *p == 0.0));
    }

    #[test]
    fn lens_is_quadratic_about_target() {
        let spec = LatticeSpec::square(5, 5, 1.0).unwrap();
        let r = Arc::new(DisorderRealization::full(spec));
        let m = quadratic_lens_mask(r.clone(), 0.1_f64, [2.0, 1.0]);
        let row = r.row_of([4, 4]).unwrap();
        assert!((m.phases()[row] + 0.1 * (4.0 + 9.0)).abs() < 1e-15);
        assert!(lens_focuses(0.1, 2.0) && !lens_focuses(-0.1, 2.0));
    }
}
