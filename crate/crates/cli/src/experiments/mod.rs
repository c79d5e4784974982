//! Experiment drivers. Each one reads a validated [`ExperimentConfig`],
//! calls into the `exciton` crate and writes its artifacts.

mod dispersion;
mod dynamics;
mod ensemble;
mod steer;

use std::sync::Arc;

use exciton::control::{optimal_lens_gaussian, ControlProtocol};
use exciton::disorder_focus::realization_with_target;
use exciton::evolve::PropagationOptions;
use exciton::lattice::{sample_disorder, Coord, DisorderRealization};
use exciton::wavepacket::{
    make_bessel_focus, make_eigenstate, make_gaussian, make_single_site, make_uniform, ExcitonState,
    GaussianPacket,
};

use crate::config::{Curvature, ExperimentConfig, ExperimentKind, PacketConfig, PacketKind, ProtocolConfig};
use crate::error::Result;
use crate::output::{num, Artifacts};

pub fn run(config: &ExperimentConfig, out: &mut Artifacts) -> Result<()> {
    match config.experiment {
        ExperimentKind::Dispersion => dispersion::run(config, out),
        ExperimentKind::Kick | ExperimentKind::Focus1d | ExperimentKind::Focus2d => dynamics::run(config, out),
        ExperimentKind::Steer => steer::run(config, out),
        ExperimentKind::VacancyScan => ensemble::vacancy_scan(config, out),
        ExperimentKind::BlockFocus => ensemble::block_focus(config, out),
    }
}

/// Static propagation settings; `run.tolerance` only steers the pulsed integrator.
fn propagation() -> PropagationOptions<f64> {
    PropagationOptions::default()
}

/// Lattice for a single run. With vacancies, `target` (when given) is kept
/// occupied by resampling, exactly as the ensemble drivers do.
fn realization(config: &ExperimentConfig, target: Option<Coord>) -> Result<Arc<DisorderRealization<f64>>> {
    let spec = config.lattice.spec()?;
    let f = config.lattice.vacancy_fraction;
    Ok(match (f > 0.0, target) {
        (false, _) => Arc::new(DisorderRealization::full(spec)),
        (true, Some(t)) => realization_with_target(&spec, f, config.seed, 0, t)?.0,
        (true, None) => Arc::new(sample_disorder(&spec, f, config.seed)?),
    })
}

fn packet(config: &ExperimentConfig) -> &PacketConfig {
    config.packet.as_ref().expect("validated: packet section present")
}

fn cell(c: [f64; 2]) -> Coord {
    [c[0].round().max(0.0) as usize, c[1].round().max(0.0) as usize]
}

fn initial_state(config: &ExperimentConfig, r: Arc<DisorderRealization<f64>>) -> Result<ExcitonState<f64>> {
    let p = packet(config);
    let state = match p.kind {
        PacketKind::Gaussian => make_gaussian(
            r,
            GaussianPacket {
                center: p.center,
                width: p.width.unwrap_or(1.0),
                carrier: p.carrier,
            },
        )?,
        PacketKind::Uniform => make_uniform(r)?,
        PacketKind::Eigenstate => make_eigenstate(r, p.carrier)?,
        PacketKind::SingleSite => make_single_site(r, cell(p.center))?,
        PacketKind::Bessel => make_bessel_focus(r, cell(p.center), p.lead_time.unwrap_or(0.0), config.coupling.alpha)?,
    };
    Ok(state)
}

/// Lens curvature with `"optimal"` resolved and signed to focus.
fn lens_phi0(config: &ExperimentConfig, phi0: Curvature) -> f64 {
    match phi0 {
        Curvature::Value(v) => v,
        Curvature::Optimal => {
            let p = packet(config);
            let magnitude = match (p.kind, p.width) {
                (PacketKind::Gaussian, Some(w)) => optimal_lens_gaussian(w),
                _ => 1.0 / (2.0 * *config.lattice.extent.iter().max().unwrap_or(&1) as f64),
            };
            magnitude.copysign(config.coupling.alpha)
        }
    }
}

fn lens_target(config: &ExperimentConfig, target: Option<[f64; 2]>) -> [f64; 2] {
    target.unwrap_or_else(|| config.lattice.center())
}

fn protocol(config: &ExperimentConfig) -> Option<ControlProtocol<f64>> {
    match &config.protocol {
        ProtocolConfig::None => None,
        ProtocolConfig::Kick { shift } => {
            let a = config.lattice.spacing;
            Some(ControlProtocol::LinearKick {
                delta: [shift[0] / a, shift[1] / a],
            })
        }
        ProtocolConfig::Lens { phi0, target } => Some(ControlProtocol::QuadraticLens {
            phi0: lens_phi0(config, *phi0),
            target: lens_target(config, *target),
        }),
    }
}

/// Probability per cell, one lattice row per line; vacancies print as `nan`.
fn probability_grid(state: &ExcitonState<f64>) -> String {
    let r = state.realization();
    let [nx, ny] = r.spec().extent();
    let amps = state.amplitudes();
    let mut s = String::new();
    for y in 0..ny {
        let row: Vec<String> = (0..nx)
            .map(|x| match r.row_of_cell(y * nx + x) {
                Some(i) => format!("{:.6e}", amps[i].norm_sqr()),
                None => "nan".to_string(),
            })
            .collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

fn mask_grid(mask: &exciton::PhaseMask) -> Vec<u8> {
    let mut buf = Vec::new();
    mask.write_grid(&mut buf).expect("writing to a Vec cannot fail");
    buf
}

const TRAJECTORY_HEADER: &[&str] = &[
    "time_s",
    "norm",
    "center_x",
    "center_y",
    "width_x",
    "width_y",
    "participation",
    "k_center_x",
    "k_center_y",
    "k_width_x",
    "k_width_y",
    "target_probability",
];

fn trajectory_rows(diagnostics: &[exciton::evolve::Diagnostics]) -> Vec<Vec<String>> {
    diagnostics
        .iter()
        .map(|d| {
            vec![
                num(d.time),
                num(d.norm),
                num(d.center[0]),
                num(d.center[1]),
                num(d.width_sites[0]),
                num(d.width_sites[1]),
                num(d.participation),
                num(d.k_center_ak[0]),
                num(d.k_center_ak[1]),
                num(d.k_width_ak[0]),
                num(d.k_width_ak[1]),
                d.target_probability.map(num).unwrap_or_default(),
            ]
        })
        .collect()
}
