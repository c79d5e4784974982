//! Single-realization dynamics: momentum kicks and lens focusing.

use std::sync::Arc;

use exciton::control::fieldmap::{beam_pulse_axial, dc_gradient_pulse};
use exciton::control::{
    predict_focus_gaussian, predict_focus_plane_wave, pulse_to_delta_beam, pulse_to_delta_dc, ControlProtocol,
    GaussianBeam, MolecularConstants,
};
use exciton::coupling::build_hamiltonian;
use exciton::evolve::{
    apply_phase_mask, equivalent_mask, propagate_pulsed, time_grid, Diagnostics, IntegratorOptions,
    IntegratorStats, Propagator, PulseSchedule, RecordOptions, RunRecord,
};
use exciton::lattice::{Coord, DisorderRealization};
use exciton::wavepacket::{k_transform, ExcitonState};
use serde_json::{json, Value};

use super::{
    cell, initial_state, mask_grid, num, packet, probability_grid, propagation, protocol, realization,
    trajectory_rows, TRAJECTORY_HEADER,
};
use crate::config::{ExperimentConfig, ExperimentKind, PacketKind, PulseConfig, PulseKind};
use crate::error::Result;
use crate::output::Artifacts;

pub fn run(config: &ExperimentConfig, out: &mut Artifacts) -> Result<()> {
    let control = protocol(config);
    let target = tracked_site(config, control.as_ref());
    let r = realization(config, target)?;
    let h = build_hamiltonian(&config.coupling.model(), Arc::clone(&r))?;
    let psi0 = initial_state(config, Arc::clone(&r))?;
    let psi = match &control {
        Some(p) => apply_phase_mask(&psi0, &p.mask(Arc::clone(&r)))?,
        None => psi0.clone(),
    };

    let duration = config.run.duration.expect("validated: run.duration present");
    let times = time_grid(0.0, duration, config.run.samples);
    let one_d = config.lattice.dimensionality() == 1;
    let record = RecordOptions {
        target,
        snapshot_stride: if one_d { 1 } else { config.run.snapshot_stride },
    };
    let prop = Propagator::new(&h, propagation());
    let (run, stats, schedule) = match &config.pulse {
        Some(pulse) => {
            let schedule = pulse_schedule(pulse, &r)?;
            let options = IntegratorOptions {
                tolerance: config.run.tolerance,
                ..Default::default()
            };
            let (run, stats) = propagate_pulsed(&h, &schedule, &psi, &times, &options, record)?;
            (run, Some(stats), Some(schedule))
        }
        None => (prop.trajectory(&psi, &times, record)?, None, None),
    };

    out.csv("trajectory.csv", TRAJECTORY_HEADER, trajectory_rows(&run.diagnostics))?;
    if one_d {
        write_1d_series(&run, out)?;
    } else {
        for (i, s) in &run.snapshots {
            out.write(&format!("grids/probability_{i:04}.txt"), probability_grid(s).as_bytes())?;
        }
    }
    if let Some(p) = &control {
        out.write("mask.txt", &mask_grid(&p.mask(Arc::clone(&r))))?;
    }
    if let Some(s) = &schedule {
        out.write("mask.txt", &mask_grid(&equivalent_mask(Arc::clone(&r), s)?))?;
    }
    if !r.is_vacancy_free() {
        out.write("occupancy.txt", r.to_grid_text().as_bytes())?;
    }

    let mut summary = json!({
        "experiment": config.experiment.name(),
        "sites": r.num_occupied(),
        "max_norm_drift": run.max_norm_drift(),
    });
    if let Some(s) = stats {
        summary["integrator"] = integrator_json(&s);
    }
    match config.experiment {
        ExperimentKind::Kick => {
            let k0 = k_transform(&psi0).center_ak()[0];
            kick_summary(config, k0, &run.diagnostics, schedule.as_ref(), &mut summary)
        }
        _ => focus_summary(config, &control, &prop, &psi, &run.diagnostics, target, out, &mut summary)?,
    }
    out.json("summary.json", &summary)
}

/// Site whose probability is tracked: `run.target`, else the lens focus.
fn tracked_site(config: &ExperimentConfig, control: Option<&ControlProtocol<f64>>) -> Option<Coord> {
    config.run.target.or_else(|| match control {
        Some(ControlProtocol::QuadraticLens { target, .. }) => Some(cell(*target)),
        _ => None,
    })
}

fn pulse_schedule(pulse: &PulseConfig, r: &DisorderRealization<f64>) -> Result<PulseSchedule<f64>> {
    let molecule = MolecularConstants::lics();
    let schedule = match pulse.kind {
        PulseKind::Beam {
            intensity,
            waist,
            wavelength,
            first_offset,
        } => {
            let beam = GaussianBeam {
                peak_intensity: intensity,
                waist,
                wavelength,
            };
            beam_pulse_axial(&molecule, &beam, r, first_offset, pulse.start, pulse.duration)?
        }
        PulseKind::Dc { field, gradient, origin } => {
            dc_gradient_pulse(&molecule, r, field, gradient, origin, pulse.start, pulse.duration)?
        }
    };
    Ok(schedule)
}

fn integrator_json(s: &IntegratorStats) -> Value {
    json!({ "accepted": s.accepted, "rejected": s.rejected, "max_local_error": s.max_error })
}

fn write_1d_series(run: &RunRecord<f64>, out: &mut Artifacts) -> Result<()> {
    let mut real = Vec::new();
    let mut kspace = Vec::new();
    for (_, s) in &run.snapshots {
        let t = num(s.time());
        let r = s.realization();
        for (&c, a) in r.sites().iter().zip(s.amplitudes()) {
            real.push(vec![t.clone(), c.to_string(), num(a.norm_sqr()), num(a.arg())]);
        }
        let k = k_transform(s);
        let mut rows: Vec<(f64, f64, f64)> = k
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(i, g)| (k.ak(i)[0], g.norm_sqr(), g.arg()))
            .collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        kspace.extend(rows.into_iter().map(|(ak, w, ph)| vec![t.clone(), num(ak), num(w), num(ph)]));
    }
    out.csv("realspace.csv", &["time_s", "site", "probability", "phase"], real)?;
    out.csv("kspace.csv", &["time_s", "ak", "weight", "phase"], kspace)
}

/// `k_before` is the spectrum centre ahead of any instantaneous mask.
fn kick_summary(
    config: &ExperimentConfig,
    k_before: f64,
    diagnostics: &[Diagnostics],
    schedule: Option<&PulseSchedule<f64>>,
    summary: &mut Value,
) {
    let a = config.lattice.spacing;
    let molecule = MolecularConstants::lics();
    // k moves only while the perturbation acts; read it right after
    let done = schedule.map_or(0.0, PulseSchedule::end);
    let slack = 1e-9 * diagnostics[diagnostics.len() - 1].time;
    let after = diagnostics.iter().find(|d| d.time >= done - slack).unwrap_or(&diagnostics[diagnostics.len() - 1]);
    let measured = after.k_center_ak[0] - k_before;
    let analytic = match (&config.protocol, config.pulse.as_ref().map(|p| (&p.kind, p.duration))) {
        (crate::config::ProtocolConfig::Kick { shift }, _) => Some(shift[0]),
        (_, Some((PulseKind::Beam { intensity, waist, wavelength, .. }, t))) => {
            let beam = GaussianBeam {
                peak_intensity: *intensity,
                waist: *waist,
                wavelength: *wavelength,
            };
            Some(pulse_to_delta_beam(&molecule, &beam, t) * a)
        }
        (_, Some((PulseKind::Dc { field, gradient, .. }, t))) => {
            Some(pulse_to_delta_dc(&molecule, *field, *gradient, t, a) * a)
        }
        _ => None,
    };
    summary["k_center_before_ak"] = json!(k_before);
    summary["k_center_after_ak"] = json!(after.k_center_ak[0]);
    summary["shift_measured_ak"] = json!(measured);
    summary["shift_analytic_ak"] = json!(analytic);
    summary["measured_at_s"] = json!(after.time);
}

#[allow(clippy::too_many_arguments)]
fn focus_summary(
    config: &ExperimentConfig,
    control: &Option<ControlProtocol<f64>>,
    prop: &Propagator<'_, f64>,
    psi: &ExcitonState<f64>,
    diagnostics: &[Diagnostics],
    target: Option<Coord>,
    out: &mut Artifacts,
    summary: &mut Value,
) -> Result<()> {
    let p = |d: &Diagnostics| d.target_probability.unwrap_or(0.0);
    let best = diagnostics
        .iter()
        .enumerate()
        .fold(0, |b, (i, d)| if p(d) > p(&diagnostics[b]) { i } else { b });
    let d = &diagnostics[best];
    let p0 = p(&diagnostics[0]);
    let alpha = config.coupling.alpha;
    let prediction = match (control, packet(config)) {
        (Some(ControlProtocol::QuadraticLens { phi0, .. }), pk) => match (pk.kind, pk.width) {
            (PacketKind::Gaussian, Some(w)) => Some(predict_focus_gaussian(w, *phi0, alpha)?),
            (PacketKind::Uniform, _) => {
                let n = *config.lattice.extent.iter().max().unwrap_or(&1);
                Some(predict_focus_plane_wave(n, *phi0, alpha)?)
            }
            _ => None,
        },
        _ => None,
    };
    if let Some(ControlProtocol::QuadraticLens { phi0, target }) = control {
        summary["phi0"] = json!(phi0);
        summary["lens_center"] = json!(target);
    }
    summary["target"] = json!(target);
    summary["focus_time_s"] = json!(d.time);
    summary["focus_probability"] = json!(p(d));
    summary["initial_probability"] = json!(p0);
    summary["eta"] = json!(if p0 > 0.0 { p(d) / p0 } else { f64::INFINITY });
    summary["focus_width_sites"] = json!(d.width_sites);
    summary["predicted_focus_time_s"] = json!(prediction.map(|f| f.t_star));
    summary["predicted_focus_width_sites"] = json!(prediction.map(|f| f.sigma_x_focus));
    if config.lattice.dimensionality() == 2 {
        out.write("grids/initial_probability.txt", probability_grid(psi).as_bytes())?;
        let focused = prop.evolve(psi, d.time)?;
        out.write("grids/focus_probability.txt", probability_grid(&focused).as_bytes())?;
    }
    Ok(())
}
