//! Energy flow steered by the orientation of the dressing field.

use std::sync::Arc;

use exciton::control::{steering_schedule, SteeringMode, SteeringPoint};
use exciton::coupling::{build_hamiltonian, coupling_element, dispersion_lattice_sum, FieldOrientation};
use exciton::evolve::{apply_phase_mask, propagate_epochs, time_grid, Diagnostics, Propagator, RecordOptions};
use serde_json::json;

use super::{initial_state, num, propagation, protocol, realization, trajectory_rows, TRAJECTORY_HEADER};
use crate::config::{Breakpoint, ExperimentConfig, SteerMode};
use crate::error::Result;
use crate::output::Artifacts;

const DISPERSION_POINTS: usize = 181;

pub fn run(config: &ExperimentConfig, out: &mut Artifacts) -> Result<()> {
    let steering = config.steering.as_ref().expect("validated: steering section present");
    let r = realization(config, None)?;
    let mut psi = initial_state(config, Arc::clone(&r))?;
    if let Some(p) = protocol(config) {
        psi = apply_phase_mask(&psi, &p.mask(Arc::clone(&r)))?;
    }
    let duration = config.run.duration.expect("validated: run.duration present");
    let times = time_grid(0.0, duration, config.run.samples);
    let base = config.coupling.model();
    let a = config.lattice.spacing;
    let dim = config.lattice.dimensionality();
    let record = RecordOptions::default();

    let mut per_angle = Vec::new();
    let mut bands = Vec::new();
    for (i, &theta) in steering.theta_grid.iter().enumerate() {
        let model = base.with_orientation(FieldOrientation::new(theta, config.coupling.phi));
        let h = build_hamiltonian(&model, Arc::clone(&r))?;
        let run = Propagator::new(&h, propagation()).trajectory(&psi, &times, record.clone())?;
        out.csv(&format!("theta_{i:02}.csv"), TRAJECTORY_HEADER, trajectory_rows(&run.diagnostics))?;

        let mut banded = model.clone();
        banded.truncation = banded.truncation.or(Some(*config.lattice.extent.iter().max().unwrap_or(&1) as f64));
        for j in 0..DISPERSION_POINTS {
            let ak = -std::f64::consts::PI + std::f64::consts::TAU * j as f64 / (DISPERSION_POINTS - 1) as f64;
            let e = dispersion_lattice_sum(&banded, a, dim, [ak / a, 0.0])?;
            bands.push(vec![num(theta.to_degrees()), num(ak), num(e)]);
        }
        let (first, last) = (&run.diagnostics[0], &run.diagnostics[run.diagnostics.len() - 1]);
        per_angle.push(json!({
            "theta_deg": theta.to_degrees(),
            "alpha_x_rad_s": coupling_element(&model, [1, 0])?,
            "displacement_sites": displacement(first, last),
            "mean_velocity_sites_per_s": displacement(first, last).map(|d| d / duration),
        }));
    }
    if !bands.is_empty() {
        out.csv("dispersion_theta.csv", &["theta_deg", "ak_x", "energy_rad_s"], bands)?;
    }

    let mut scheduled = serde_json::Value::Null;
    if !steering.points.is_empty() {
        let points: Vec<SteeringPoint<f64>> = steering
            .points
            .iter()
            .map(|p| SteeringPoint {
                time: p.time,
                orientation: FieldOrientation::new(p.theta, p.phi),
            })
            .collect();
        let mode = match steering.mode {
            SteerMode::Step => SteeringMode::Step,
            SteerMode::Ramp => SteeringMode::Ramp { slices: steering.slices },
        };
        let epochs = steering_schedule(&base, Arc::clone(&r), &points, duration, mode)?;
        let run = propagate_epochs(&epochs, &psi, &times, propagation(), record)?;
        let mut header = TRAJECTORY_HEADER.to_vec();
        header.extend(["theta_deg", "phi_deg"]);
        let rows = trajectory_rows(&run.diagnostics)
            .into_iter()
            .zip(&run.diagnostics)
            .map(|(mut row, d)| {
                let (theta, phi) = orientation_at(&steering.points, steering.mode, d.time);
                row.extend([num(theta.to_degrees()), num(phi.to_degrees())]);
                row
            })
            .collect::<Vec<_>>();
        out.csv("schedule.csv", &header, rows)?;
        let (first, last) = (&run.diagnostics[0], &run.diagnostics[run.diagnostics.len() - 1]);
        scheduled = json!({
            "epochs": epochs.len(),
            "final_center": last.center,
            "displacement_sites": displacement(first, last),
            "max_norm_drift": run.max_norm_drift(),
        });
    }

    out.json(
        "summary.json",
        &json!({
            "experiment": "steer",
            "theta_grid": per_angle,
            "schedule": scheduled,
        }),
    )
}

fn displacement(first: &Diagnostics, last: &Diagnostics) -> [f64; 2] {
    [last.center[0] - first.center[0], last.center[1] - first.center[1]]
}

/// Field angles in force at `t` under the same rule the schedule uses.
fn orientation_at(points: &[Breakpoint], mode: SteerMode, t: f64) -> (f64, f64) {
    let i = points.iter().rposition(|p| p.time <= t).unwrap_or(0);
    let p = points[i];
    match (mode, points.get(i + 1)) {
        (SteerMode::Ramp, Some(q)) => {
            let w = (t - p.time) / (q.time - p.time);
            (p.theta + (q.theta - p.theta) * w, p.phi + (q.phi - p.phi) * w)
        }
        _ => (p.theta, p.phi),
    }
}
