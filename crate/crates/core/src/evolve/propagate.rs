use num_complex::Complex;

use crate::coupling::HamiltonianMatrix;
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;
use crate::wavepacket::ExcitonState;

use super::kernel::{chebyshev_evolve, DenseEigen};
use super::record::{RecordOptions, RunRecord};

/// Bases up to this size are diagonalized densely by default.
pub const DEFAULT_DENSE_LIMIT: usize = 1500;

#[derive(Clone, Copy, Debug)]
pub struct PropagationOptions<T> {
    /// Largest basis handled by dense diagonalization; larger ones use Chebyshev.
    pub dense_limit: usize,
    /// Truncation bound for the Chebyshev series.
    pub tolerance: T,
}

impl<T: Scalar> Default for PropagationOptions<T> {
    fn default() -> Self {
        Self {
            dense_limit: DEFAULT_DENSE_LIMIT,
            tolerance: T::of(1e-13),
        }
    }
}

/// Static-Hamiltonian propagator, dense or Chebyshev depending on size.
pub struct Propagator<'h, T: Scalar> {
    hamiltonian: &'h HamiltonianMatrix<T>,
    dense: Option<DenseEigen<T>>,
    tolerance: T,
}

impl<'h, T: Scalar> Propagator<'h, T> {
    pub fn new(hamiltonian: &'h HamiltonianMatrix<T>, options: PropagationOptions<T>) -> Self {
        let dense = (hamiltonian.dim() <= options.dense_limit).then(|| DenseEigen::new(hamiltonian));
        Self {
            hamiltonian,
            dense,
            tolerance: options.tolerance,
        }
    }

    pub fn hamiltonian(&self) -> &HamiltonianMatrix<T> {
        self.hamiltonian
    }

    pub fn is_dense(&self) -> bool {
        self.dense.is_some()
    }

    pub fn evolve_amplitudes(&self, psi: &[Complex<T>], t: T) -> Vec<Complex<T>> {
        match &self.dense {
            Some(d) => d.evolve(psi, t),
            None => chebyshev_evolve(self.hamiltonian, psi, t, self.tolerance),
        }
    }

    /// `exp(-iHt)` applied to `state`; the time tag advances by `t`.
    pub fn evolve(&self, state: &ExcitonState<T>, t: T) -> Result<ExcitonState<T>> {
        check_basis(self.hamiltonian, state)?;
        let amps = self.evolve_amplitudes(state.amplitudes(), t);
        Ok(state.evolved(amps, state.time() + t))
    }

    /// Samples the trajectory at absolute times `times` (non-decreasing, not
    /// before the state's own time tag).
    pub fn trajectory(
        &self,
        state: &ExcitonState<T>,
        times: &[T],
        options: RecordOptions,
    ) -> Result<RunRecord<T>> {
        check_basis(self.hamiltonian, state)?;
        check_grid(state.time(), times)?;
        let mut record = RunRecord::new(state.clone(), options);
        let mut cur = state.clone();
        for &t in times {
            let dt = t - cur.time();
            if dt != T::zero() {
                cur = self.evolve(&cur, dt)?.with_time(t);
            }
            record.push(cur.clone());
        }
        Ok(record)
    }
}

pub(crate) fn check_basis<T: Scalar>(h: &HamiltonianMatrix<T>, state: &ExcitonState<T>) -> Result<()> {
    if h.realization().same_basis(state.realization()) {
        Ok(())
    } else {
        Err(Error::BasisMismatch)
    }
}

pub(crate) fn check_grid<T: Scalar>(start: T, times: &[T]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(invalid("times", "sample times must be finite"));
    }
    if times.first().is_some_and(|&t| t < start) {
        return Err(invalid("times", "first sample precedes the state's time tag"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("times", "sample times must be non-decreasing"));
    }
    Ok(())
}

/// Evolves `state` by `t` under the static `h` with default options.
pub fn propagate_static<T: Scalar>(
    h: &HamiltonianMatrix<T>,
    state: &ExcitonState<T>,
    t: T,
) -> Result<ExcitonState<T>> {
    check_basis(h, state)?;
    let amps = if h.dim() <= DEFAULT_DENSE_LIMIT && h.dim() <= 64 {
        DenseEigen::new(h).evolve(state.amplitudes(), t)
    } else {
        // one-off propagation: Chebyshev beats an O(n³) diagonalization
        chebyshev_evolve(h, state.amplitudes(), t, PropagationOptions::<T>::default().tolerance)
    };
    Ok(state.evolved(amps, state.time() + t))
}

/// Evenly spaced sample times `start, …, end` (inclusive).
pub fn time_grid<T: Scalar>(start: T, end: T, samples: usize) -> Vec<T> {
    match samples {
        0 => Vec::new(),
        1 => vec![end],
        n => (0..n)
            .map(|i| start + (end - start) * T::of(i as f64) / T::of((n - 1) as f64))
            .collect(),
    }
}
