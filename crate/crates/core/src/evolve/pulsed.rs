//! Time-dependent propagation under `H + diag(ε(t))`.
//!
//! Inside the pulse window the modulation is frozen at each substep midpoint
//! and the substep is taken with the Chebyshev kernel (exponential midpoint
//! rule, second order). Step size adapts by comparing one full step with two
//! half steps. Outside the window the static propagator is used exactly.

use std::sync::Arc;

use num_complex::Complex;

use crate::coupling::HamiltonianMatrix;
use crate::error::{invalid, Error, Result};
use crate::lattice::DisorderRealization;
use crate::scalar::{norm_sqr, Scalar};
use crate::wavepacket::ExcitonState;

use super::kernel::{chebyshev_evolve, WithOnsite};
use super::mask::PhaseMask;
use super::propagate::{check_basis, check_grid, PropagationOptions, Propagator};
use super::pulse::PulseSchedule;
use super::record::{RecordOptions, RunRecord};

#[derive(Clone, Copy, Debug)]
pub struct IntegratorOptions<T> {
    /// Accepted local error per substep, in units of the state norm.
    pub tolerance: T,
    /// Smallest substep as a fraction of the pulse duration before giving up.
    pub min_step_fraction: T,
    /// Hard cap on attempted substeps per pulse.
    pub max_steps: usize,
    /// Options for the static segments and the per-substep kernel.
    pub propagation: PropagationOptions<T>,
}

impl<T: Scalar> Default for IntegratorOptions<T> {
    fn default() -> Self {
        Self {
            tolerance: T::of(1e-9),
            min_step_fraction: T::of(1e-10),
            max_steps: 1_000_000,
            propagation: PropagationOptions::default(),
        }
    }
}

/// Integration bookkeeping returned next to the trajectory.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct IntegratorStats {
    pub accepted: usize,
    pub rejected: usize,
    pub max_error: f64,
}

fn midpoint_step<T: Scalar>(
    h: &HamiltonianMatrix<T>,
    schedule: &PulseSchedule<T>,
    psi: &[Complex<T>],
    t: T,
    dt: T,
    buf: &mut [T],
    tol: T,
) -> Vec<Complex<T>> {
    schedule.modulation_at(t + dt / T::of(2.0), buf);
    let op = WithOnsite { base: h, extra: buf };
    chebyshev_evolve(&op, psi, dt, tol)
}

fn distance<T: Scalar>(a: &[Complex<T>], b: &[Complex<T>]) -> T {
    a.iter()
        .zip(b)
        .map(|(x, y)| (*x - *y).norm_sqr())
        .sum::<T>()
        .sqrt()
}

struct Pulsed<'a, T: Scalar> {
    h: &'a HamiltonianMatrix<T>,
    schedule: &'a PulseSchedule<T>,
    options: IntegratorOptions<T>,
    propagator: Option<Propagator<'a, T>>,
    step: T,
    buf: Vec<T>,
    stats: IntegratorStats,
}

impl<'a, T: Scalar> Pulsed<'a, T> {
    fn static_step(&mut self, psi: &[Complex<T>], dt: T) -> Vec<Complex<T>> {
        let (h, opts) = (self.h, self.options.propagation);
        self.propagator
            .get_or_insert_with(|| Propagator::new(h, opts))
            .evolve_amplitudes(psi, dt)
    }

    fn pulse_segment(&mut self, mut psi: Vec<Complex<T>>, mut t: T, end: T) -> Result<Vec<Complex<T>>> {
        let tol = self.options.tolerance;
        let kernel_tol = self.options.propagation.tolerance;
        let floor = self.schedule.duration() * self.options.min_step_fraction;
        let third = T::one() / T::of(3.0);
        let half = T::of(0.5);
        while t < end {
            if self.stats.accepted + self.stats.rejected >= self.options.max_steps {
                return Err(Error::Integrator(format!(
                    "step budget of {} exhausted at t = {:e}",
                    self.options.max_steps, t
                )));
            }
            let last = end - t <= self.step;
            let dt = if last { end - t } else { self.step };
            let big = midpoint_step(self.h, self.schedule, &psi, t, dt, &mut self.buf, kernel_tol);
            let mid = midpoint_step(self.h, self.schedule, &psi, t, dt * half, &mut self.buf, kernel_tol);
            let fine = midpoint_step(self.h, self.schedule, &mid, t + dt * half, dt * half, &mut self.buf, kernel_tol);
            let err = distance(&fine, &big) * third;
            let factor = if err > T::zero() {
                (T::of(0.9) * (tol / err).powf(third)).max(T::of(0.2)).min(T::of(2.0))
            } else {
                T::of(2.0)
            };
            if err <= tol {
                psi = fine;
                t = if last { end } else { t + dt };
                self.stats.accepted += 1;
                self.stats.max_error = self.stats.max_error.max(err.as_f64());
                if !last {
                    self.step = dt * factor;
                }
            } else {
                self.stats.rejected += 1;
                self.step = dt * factor.min(T::of(0.9));
                if self.step < floor {
                    return Err(Error::Integrator(format!(
                        "tolerance {:e} not met at t = {:e} with step {:e} (local error {:e})",
                        tol.as_f64(),
                        t.as_f64(),
                        self.step.as_f64(),
                        err.as_f64()
                    )));
                }
            }
        }
        Ok(psi)
    }

    fn advance(&mut self, mut psi: Vec<Complex<T>>, mut t: T, target: T) -> Result<Vec<Complex<T>>> {
        let (start, end) = (self.schedule.start(), self.schedule.end());
        while t < target {
            let next = if t < start {
                let to = target.min(start);
                psi = self.static_step(&psi, to - t);
                to
            } else if t < end {
                let to = target.min(end);
                psi = self.pulse_segment(psi, t, to)?;
                to
            } else {
                psi = self.static_step(&psi, target - t);
                target
            };
            t = next;
        }
        Ok(psi)
    }
}

/// Integrates the pulsed dynamics and samples it at the absolute `times`.
pub fn propagate_pulsed<T: Scalar>(
    h: &HamiltonianMatrix<T>,
    schedule: &PulseSchedule<T>,
    state: &ExcitonState<T>,
    times: &[T],
    options: &IntegratorOptions<T>,
    record: RecordOptions,
) -> Result<(RunRecord<T>, IntegratorStats)> {
    check_basis(h, state)?;
    check_grid(state.time(), times)?;
    if schedule.num_sites() != h.dim() {
        return Err(Error::BasisMismatch);
    }
    if !(options.tolerance > T::zero()) {
        return Err(invalid("tolerance", "integrator tolerance must be positive"));
    }
    let mut run = Pulsed {
        h,
        schedule,
        options: *options,
        propagator: None,
        step: schedule.duration() / T::of(64.0),
        buf: vec![T::zero(); h.dim()],
        stats: IntegratorStats::default(),
    };
    let mut out = RunRecord::new(state.clone(), record);
    let mut psi = state.amplitudes().to_vec();
    let mut t = state.time();
    for &target in times {
        psi = run.advance(psi, t, target)?;
        t = target;
        out.push(state.evolved(psi.clone(), t));
    }
    let drift = (norm_sqr(&psi) - T::one()).abs();
    log::debug!(
        "pulsed run: {} accepted, {} rejected, max local error {:.2e}, norm drift {:.2e}",
        run.stats.accepted,
        run.stats.rejected,
        run.stats.max_error,
        drift.as_f64()
    );
    Ok((out, run.stats))
}

/// Exponential midpoint rule with `steps` equal substeps from the state's time
/// to `t_end`. Used to verify the integrator order.
pub fn propagate_pulsed_fixed<T: Scalar>(
    h: &HamiltonianMatrix<T>,
    schedule: &PulseSchedule<T>,
    state: &ExcitonState<T>,
    t_end: T,
    steps: usize,
) -> Result<ExcitonState<T>> {
    check_basis(h, state)?;
    if steps == 0 {
        return Err(invalid("steps", "need at least one step"));
    }
    let dt = (t_end - state.time()) / T::of(steps as f64);
    let mut buf = vec![T::zero(); h.dim()];
    let mut psi = state.amplitudes().to_vec();
    for i in 0..steps {
        let t = state.time() + dt * T::of(i as f64);
        psi = midpoint_step(h, schedule, &psi, t, dt, &mut buf, T::of(1e-15));
    }
    Ok(state.evolved(psi, t_end))
}

/// Instantaneous mask carrying the pulse's accumulated phases.
pub fn equivalent_mask<T: Scalar>(
    realization: Arc<DisorderRealization<T>>,
    schedule: &PulseSchedule<T>,
) -> Result<PhaseMask<T>> {
    PhaseMask::from_phases(realization, schedule.accumulated_phase())
}
