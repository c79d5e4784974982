use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Time dependence of the on-site energy modulation `ε_n(t)` (rad/s).
#[derive(Clone, Debug)]
pub enum PulseProfile<T> {
    /// `ε_n(t) = a_n sin²(πτ/T)` with `τ = t − start`. Covers any drive that
    /// is linear in the pulse intensity, e.g. AC Stark shifts from a beam.
    Sin2 { amplitudes: Vec<T> },
    /// `ε_n(t) = κ [(F₀ + f_n s)² − F₀²]`, `s = sin²(πτ/T)`: a field-squared
    /// (DC Stark) response to a field offset `f_n` on top of a static `F₀`.
    QuadraticField {
        coefficient: T,
        base_field: T,
        field_offsets: Vec<T>,
    },
    /// Linear interpolation in `τ` between tabulated rows `values[i][n]`.
    Tabulated { times: Vec<T>, values: Vec<Vec<T>> },
}

/// Transient site-dependent modulation switched on during `[start, start + duration]`.
#[derive(Clone, Debug)]
pub struct PulseSchedule<T> {
    start: T,
    duration: T,
    profile: PulseProfile<T>,
}

fn sin2<T: Scalar>(tau: T, duration: T) -> T {
    let s = (T::PI() * tau / duration).sin();
    s * s
}

impl<T: Scalar> PulseSchedule<T> {
    pub fn new(start: T, duration: T, profile: PulseProfile<T>) -> Result<Self> {
        if !(duration > T::zero()) || !duration.is_finite() {
            return Err(invalid("duration", "pulse duration must be positive and finite"));
        }
        if let PulseProfile::Tabulated { times, values } = &profile {
            if times.len() < 2 || times.len() != values.len() {
                return Err(invalid("times", "need at least two rows with matching values"));
            }
            if times.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(invalid("times", "tabulated times must increase"));
            }
            let n = values[0].len();
            if values.iter().any(|v| v.len() != n) {
                return Err(invalid("values", "every tabulated row needs the same site count"));
            }
        }
        Ok(Self {
            start,
            duration,
            profile,
        })
    }

    /// No modulation at all on `n` sites.
    pub fn null(n: usize, start: T, duration: T) -> Result<Self> {
        Self::new(
            start,
            duration,
            PulseProfile::Sin2 {
                amplitudes: vec![T::zero(); n],
            },
        )
    }

    pub fn start(&self) -> T {
        self.start
    }

    pub fn duration(&self) -> T {
        self.duration
    }

    pub fn end(&self) -> T {
        self.start + self.duration
    }

    pub fn profile(&self) -> &PulseProfile<T> {
        &self.profile
    }

    pub fn num_sites(&self) -> usize {
        match &self.profile {
            PulseProfile::Sin2 { amplitudes } => amplitudes.len(),
            PulseProfile::QuadraticField { field_offsets, .. } => field_offsets.len(),
            PulseProfile::Tabulated { values, .. } => values[0].len(),
        }
    }

    pub fn is_active(&self, t: T) -> bool {
        t >= self.start && t <= self.end()
    }

    /// Writes `ε_n(t)` into `out`; zero outside the pulse window.
    pub fn modulation_at(&self, t: T, out: &mut [T]) {
        if !self.is_active(t) {
            out.iter_mut().for_each(|v| *v = T::zero());
            return;
        }
        let tau = t - self.start;
        match &self.profile {
            PulseProfile::Sin2 { amplitudes } => {
                let s = sin2(tau, self.duration);
                for (o, a) in out.iter_mut().zip(amplitudes) {
                    *o = *a * s;
                }
            }
            PulseProfile::QuadraticField {
                coefficient,
                base_field,
                field_offsets,
            } => {
                let s = sin2(tau, self.duration);
                for (o, f) in out.iter_mut().zip(field_offsets) {
                    let df = *f * s;
                    *o = *coefficient * (T::of(2.0) * *base_field * df + df * df);
                }
            }
            PulseProfile::Tabulated { times, values } => {
                let i = match times.iter().position(|&x| x > tau) {
                    Some(0) => 0,
                    Some(i) => i - 1,
                    None => times.len() - 2,
                };
                let i = i.min(times.len() - 2);
                let w = ((tau - times[i]) / (times[i + 1] - times[i])).max(T::zero()).min(T::one());
                for (n, o) in out.iter_mut().enumerate() {
                    *o = values[i][n] * (T::one() - w) + values[i + 1][n] * w;
                }
            }
        }
    }

    /// `Φ_n = ∫ ε_n(t) dt` over the pulse.
    pub fn accumulated_phase(&self) -> Vec<T> {
        let d = self.duration;
        match &self.profile {
            PulseProfile::Sin2 { amplitudes } => {
                amplitudes.iter().map(|a| *a * d / T::of(2.0)).collect()
            }
            PulseProfile::QuadraticField {
                coefficient,
                base_field,
                field_offsets,
            } => field_offsets
                .iter()
                .map(|f| {
                    // ∫ sin² = T/2, ∫ sin⁴ = 3T/8
                    *coefficient
                        * (*base_field * *f * d + *f * *f * T::of(3.0) * d / T::of(8.0))
                })
                .collect(),
            PulseProfile::Tabulated { times, values } => {
                let n = values[0].len();
                let mut acc = vec![T::zero(); n];
                for i in 0..times.len() - 1 {
                    let h = times[i + 1] - times[i];
                    for (s, a) in acc.iter_mut().enumerate() {
                        *a = *a + (values[i][s] + values[i + 1][s]) * h / T::of(2.0);
                    }
                }
                acc
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(p: &PulseSchedule<f64>) -> Vec<f64> {
        let m = 20_000;
        let h = p.duration() / m as f64;
        let mut acc = vec![0.0; p.num_sites()];
        let mut buf = vec![0.0; p.num_sites()];
        for i in 0..m {
            p.modulation_at(p.start() + (i as f64 + 0.5) * h, &mut buf);
            for (a, b) in acc.iter_mut().zip(&buf) {
                *a += b * h;
            }
        }
        acc
    }

    #[test]
    fn accumulated_phase_matches_quadrature() {
        let p = PulseSchedule::new(1.0, 3.0, PulseProfile::Sin2 { amplitudes: vec![1.0, -2.0, 0.5] }).unwrap();
        for (a, b) in p.accumulated_phase().iter().zip(quad(&p)) {
            assert!((a - b).abs() < 1e-8);
        }
        let q = PulseSchedule::new(
            0.0,
            2.0,
            PulseProfile::QuadraticField { coefficient: 0.7, base_field: 3.0, field_offsets: vec![-1.0, 0.0, 2.0] },
        )
        .unwrap();
        for (a, b) in q.accumulated_phase().iter().zip(quad(&q)) {
            assert!((a - b).abs() < 1e-8);
        }
        let tab = PulseSchedule::<f64>::new(
            0.0,
            2.0,
            PulseProfile::Tabulated { times: vec![0.0, 1.0, 2.0], values: vec![vec![0.0], vec![2.0], vec![0.0]] },
        )
        .unwrap();
        assert!((tab.accumulated_phase()[0] - 2.0_f64).abs() < 1e-12);
        assert!((quad(&tab)[0] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn zero_outside_window() {
        let p = PulseSchedule::new(1.0_f64, 3.0, PulseProfile::Sin2 { amplitudes: vec![5.0] }).unwrap();
        let mut out = [9.0_f64];
        p.modulation_at(0.5, &mut out);
        assert_eq!(out[0], 0.0);
        p.modulation_at(4.5, &mut out);
        assert_eq!(out[0], 0.0);
        p.modulation_at(2.5, &mut out);
        assert!((out[0] - 5.0_f64).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_schedules() {
        assert!(PulseSchedule::<f64>::null(3, 0.0, 0.0).is_err());
        assert!(PulseSchedule::new(
            0.0,
            1.0,
            PulseProfile::Tabulated { times: vec![0.0, 0.0], values: vec![vec![1.0], vec![1.0]] }
        )
        .is_err());
    }
}
