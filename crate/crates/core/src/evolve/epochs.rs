use crate::coupling::HamiltonianMatrix;
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;
use crate::wavepacket::ExcitonState;

use super::propagate::{check_grid, PropagationOptions, Propagator};
use super::record::{RecordOptions, RunRecord};

/// A static Hamiltonian in force over `[start, end]`.
#[derive(Clone, Debug)]
pub struct HamiltonianEpoch<T> {
    pub start: T,
    pub end: T,
    pub hamiltonian: HamiltonianMatrix<T>,
}

fn validate<T: Scalar>(epochs: &[HamiltonianEpoch<T>]) -> Result<()> {
    let first = epochs.first().ok_or_else(|| invalid("epochs", "schedule is empty"))?;
    for e in epochs {
        if !(e.end >= e.start) {
            return Err(invalid("epochs", "epoch ends before it starts"));
        }
        if !e.hamiltonian.realization().same_basis(first.hamiltonian.realization()) {
            return Err(Error::BasisMismatch);
        }
    }
    if epochs.windows(2).any(|w| w[1].start != w[0].end) {
        return Err(invalid("epochs", "epochs must be contiguous"));
    }
    Ok(())
}

/// Piecewise-static propagation through consecutive epochs, sampled at `times`.
pub fn propagate_epochs<T: Scalar>(
    epochs: &[HamiltonianEpoch<T>],
    state: &ExcitonState<T>,
    times: &[T],
    options: PropagationOptions<T>,
    record: RecordOptions,
) -> Result<RunRecord<T>> {
    validate(epochs)?;
    check_grid(state.time(), times)?;
    super::propagate::check_basis(&epochs[0].hamiltonian, state)?;
    let (t0, t1) = (epochs[0].start, epochs[epochs.len() - 1].end);
    if state.time() < t0 || times.last().is_some_and(|&t| t > t1) {
        return Err(invalid("times", "samples fall outside the epoch schedule"));
    }

    let mut out = RunRecord::new(state.clone(), record);
    let mut cur = state.clone();
    let mut idx = 0;
    let mut prop = Propagator::new(&epochs[0].hamiltonian, options);
    for &target in times {
        while cur.time() < target {
            while cur.time() >= epochs[idx].end && idx + 1 < epochs.len() {
                idx += 1;
                prop = Propagator::new(&epochs[idx].hamiltonian, options);
            }
            let to = target.min(epochs[idx].end);
            cur = prop.evolve(&cur, to - cur.time())?.with_time(to);
        }
        out.push(cur.clone());
    }
    Ok(out)
}
