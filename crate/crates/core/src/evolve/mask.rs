use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{Coord, DisorderRealization};
use crate::scalar::{cis, Scalar};
use crate::wavepacket::ExcitonState;

/// Static phase `Φ_n` per occupied site.
///
/// Applying the mask multiplies each amplitude by `e^{-iΦ_n}`, the factor a
/// monomer picks up from an accumulated level shift `Φ_n = ∫ ε_n dt`. A mask
/// varying as `Φ_n = −a δ n` therefore moves a packet by `+δ` in k-space.
#[derive(Clone, Debug)]
pub struct PhaseMask<T> {
    realization: Arc<DisorderRealization<T>>,
    phases: Vec<T>,
}

impl<T: Scalar> PhaseMask<T> {
    pub fn zeros(realization: Arc<DisorderRealization<T>>) -> Self {
        let n = realization.num_occupied();
        Self {
            realization,
            phases: vec![T::zero(); n],
        }
    }

    /// Evaluates `f(coord)` on every occupied site.
    pub fn from_fn(realization: Arc<DisorderRealization<T>>, f: impl Fn(Coord) -> T) -> Self {
        let phases = realization
            .sites()
            .iter()
            .map(|&c| f(realization.spec().coord(c)))
            .collect();
        Self {
            realization,
            phases,
        }
    }

    pub fn from_phases(realization: Arc<DisorderRealization<T>>, phases: Vec<T>) -> Result<Self> {
        if phases.len() != realization.num_occupied() {
            return Err(Error::BasisMismatch);
        }
        Ok(Self {
            realization,
            phases,
        })
    }

    pub fn realization(&self) -> &Arc<DisorderRealization<T>> {
        &self.realization
    }

    pub fn phases(&self) -> &[T] {
        &self.phases
    }

    /// Mask whose action equals applying `self` then `other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if !self.realization.same_basis(&other.realization) {
            return Err(Error::BasisMismatch);
        }
        Ok(Self {
            realization: Arc::clone(&self.realization),
            phases: self
                .phases
                .iter()
                .zip(&other.phases)
                .map(|(a, b)| *a + *b)
                .collect(),
        })
    }

    /// Phase grid with one lattice row per line; vacancies print as `nan`.
    pub fn write_grid<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let spec = self.realization.spec();
        let [nx, ny] = spec.extent();
        for y in 0..ny {
            let row: Vec<String> = (0..nx)
                .map(|x| match self.realization.row_of_cell(y * nx + x) {
                    Some(r) => format!("{:.6e}", self.phases[r]),
                    None => "nan".to_string(),
                })
                .collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// `C_n → e^{-iΦ_n} C_n`.
pub fn apply_phase_mask<T: Scalar>(state: &ExcitonState<T>, mask: &PhaseMask<T>) -> Result<ExcitonState<T>> {
    if !state.realization().same_basis(mask.realization()) {
        return Err(Error::BasisMismatch);
    }
    let amps = state
        .amplitudes()
        .iter()
        .zip(mask.phases())
        .map(|(c, p)| *c * cis(-*p))
        .collect();
    Ok(state.evolved(amps, state.time()))
}
