use std::sync::Arc;

use crate::coupling::{build_hamiltonian, CouplingModel, FieldOrientation};
use crate::error::{invalid, Result};
use crate::evolve::HamiltonianEpoch;
use crate::lattice::DisorderRealization;
use crate::scalar::Scalar;

/// Field orientation taking effect at `time`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteeringPoint<T> {
    pub time: T,
    pub orientation: FieldOrientation<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SteeringMode {
    /// Hold each orientation until the next breakpoint.
    Step,
    /// Interpolate the angles linearly between breakpoints, sampled at the
    /// midpoints of `slices` equal sub-epochs per segment.
    Ramp { slices: usize },
}

/// Expands angle breakpoints into consecutive Hamiltonian epochs ending at `end`.
pub fn steering_schedule<T: Scalar>(
    model: &CouplingModel<T>,
    realization: Arc<DisorderRealization<T>>,
    points: &[SteeringPoint<T>],
    end: T,
    mode: SteeringMode,
) -> Result<Vec<HamiltonianEpoch<T>>> {
    if points.is_empty() {
        return Err(invalid("schedule", "need at least one breakpoint"));
    }
    if points.windows(2).any(|w| !(w[1].time > w[0].time)) {
        return Err(invalid("schedule", "breakpoint times must increase"));
    }
    if !(end > points[points.len() - 1].time) {
        return Err(invalid("end", "schedule must end after the last breakpoint"));
    }
    let slices = match mode {
        SteeringMode::Step => 1,
        SteeringMode::Ramp { slices } if slices >= 1 => slices,
        SteeringMode::Ramp { .. } => return Err(invalid("slices", "need at least one slice")),
    };

    let mut epochs = Vec::new();
    let mut push = |start: T, stop: T, o: FieldOrientation<T>| -> Result<()> {
        let h = build_hamiltonian(&model.with_orientation(o.normalized()), Arc::clone(&realization))?;
        epochs.push(HamiltonianEpoch { start, end: stop, hamiltonian: h });
        Ok(())
    };
    for (i, p) in points.iter().enumerate() {
        let stop = points.get(i + 1).map_or(end, |q| q.time);
        let next = points.get(i + 1).filter(|_| matches!(mode, SteeringMode::Ramp { .. }));
        match next {
            None => push(p.time, stop, p.orientation)?,
            Some(q) => {
                let span = stop - p.time;
                for s in 0..slices {
                    let t0 = p.time + span * T::of(s as f64) / T::of(slices as f64);
                    let t1 = if s + 1 == slices {
                        stop
                    } else {
                        p.time + span * T::of((s + 1) as f64) / T::of(slices as f64)
                    };
                    let w = T::of((s as f64 + 0.5) / slices as f64);
                    let lerp = |a: T, b: T| a + (b - a) * w;
                    let o = FieldOrientation::new(
                        lerp(p.orientation.theta, q.orientation.theta),
                        lerp(p.orientation.phi, q.orientation.phi),
                    );
                    push(t0, t1, o)?;
                }
            }
        }
    }
    Ok(epochs)
}

/// `θ = arccos(1/√3)`, where the dipolar coupling along the field-plane bond vanishes.
pub fn magic_angle<T: Scalar>() -> T {
    (T::one() / T::of(3.0).sqrt()).acos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;

    fn setup() -> (CouplingModel<f64>, Arc<DisorderRealization<f64>>) {
        let m = CouplingModel::dipolar(1.0, 0.0, FieldOrientation::perpendicular(), Some(5.0));
        let r = Arc::new(DisorderRealization::full(LatticeSpec::chain(20, 1.0).unwrap()));
        (m, r)
    }

    #[test]
    fn constant_schedule_is_one_epoch() {
        let (m, r) = setup();
        let pts = [SteeringPoint { time: 0.0, orientation: FieldOrientation::perpendicular() }];
        let e = steering_schedule(&m, r, &pts, 5.0, SteeringMode::Step).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!((e[0].start, e[0].end), (0.0, 5.0));
    }

    #[test]
    fn ramp_slices_are_contiguous() {
        let (m, r) = setup();
        let pts = [
            SteeringPoint { time: 0.0, orientation: FieldOrientation::new(0.0, 0.0) },
            SteeringPoint { time: 2.0, orientation: FieldOrientation::new(1.5, 0.0) },
        ];
        let e = steering_schedule(&m, r, &pts, 3.0, SteeringMode::Ramp { slices: 4 }).unwrap();
        assert_eq!(e.len(), 5);
        assert!(e.windows(2).all(|w| w[0].end == w[1].start));
        assert_eq!(e[4].end, 3.0);
    }

    #[test]
    fn out_of_range_angles_are_folded() {
        let (m, r) = setup();
        let pts = [SteeringPoint { time: 0.0, orientation: FieldOrientation::new(-0.3, 7.0) }];
        let folded = steering_schedule(&m, r.clone(), &pts, 1.0, SteeringMode::Step).unwrap();
        let direct = build_hamiltonian(&m.with_orientation(FieldOrientation::new(0.3, 7.0 - 2.0 * std::f64::consts::PI)), r).unwrap();
        assert!((folded[0].hamiltonian.get(0, 1) - direct.get(0, 1)).abs() < 1e-12);
    }

    #[test]
    fn magic_angle_zeroes_coupling() {
        let (m, _) = setup();
        let o = FieldOrientation::new(magic_angle::<f64>(), 0.0);
        let c = crate::coupling::coupling_element(&m.with_orientation(o), [1, 0]).unwrap();
        assert!(c.abs() < 1e-15);
    }
}
