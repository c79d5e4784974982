//! Ensemble experiments over vacancy realizations.

use std::sync::Arc;

use exciton::control::{predict_focus_gaussian, predict_focus_plane_wave, ControlProtocol};
use exciton::coupling::build_hamiltonian;
use exciton::disorder_focus::{
    block_focus_experiment, block_focus_realization, enhancement_experiment, focus_time_scan,
    realization_with_target, BlockFocusConfig, EnhancementConfig, InitialState, Summary,
};
use exciton::evolve::{apply_phase_mask, Propagator};
use exciton::lattice::{partition_blocks, DisorderRealization};
use exciton::wavepacket::GaussianPacket;
use serde::Serialize;
use serde_json::json;

use super::{mask_grid, num, packet, probability_grid, propagation, protocol};
use crate::config::{EnsembleConfig, ExperimentConfig, FocusTime, PacketKind};
use crate::error::{CliError, Result};
use crate::output::Artifacts;

fn ensemble(config: &ExperimentConfig) -> &EnsembleConfig {
    config.ensemble.as_ref().expect("validated: ensemble section present")
}

fn initial(config: &ExperimentConfig) -> Result<InitialState<f64>> {
    let p = packet(config);
    match (p.kind, p.width) {
        (PacketKind::Uniform, _) => Ok(InitialState::Uniform),
        (PacketKind::Gaussian, Some(width)) => Ok(InitialState::Gaussian(GaussianPacket {
            center: p.center,
            width,
            carrier: p.carrier,
        })),
        _ => Err(CliError::config("packet.kind", "ensembles need a gaussian or uniform packet")),
    }
}

fn dir(v: f64) -> String {
    format!("vacancy_{}", num(v))
}

fn summary_cells(s: &Summary) -> [String; 3] {
    [num(s.mean), num(s.std_dev), s.ci95_half_width.map(num).unwrap_or_default()]
}

#[derive(Serialize)]
struct LensRow {
    vacancy: f64,
    index: usize,
    seed: u64,
    resamples: u64,
    occupied: usize,
    p_initial: f64,
    p_unmasked: f64,
    p_masked: f64,
    eta: f64,
    chi: f64,
    chi_saturated: bool,
}

pub fn vacancy_scan(config: &ExperimentConfig, out: &mut Artifacts) -> Result<()> {
    let e = ensemble(config);
    let spec = config.lattice.spec()?;
    let lens = protocol(config).expect("validated: lens protocol");
    let base = EnhancementConfig {
        model: config.coupling.model(),
        spec: spec.clone(),
        vacancy_fraction: 0.0,
        realizations: e.realizations,
        seed: config.seed,
        protocol: lens,
        initial: initial(config)?,
        target: e.target,
        focus_time: 0.0,
        propagation: propagation(),
        chi_cap: e.chi_cap,
    };

    let clean = Arc::new(DisorderRealization::full(spec.clone()));
    let (focus_time, scan) = match e.focus_time {
        FocusTime::Value(t) => (t, None),
        FocusTime::Auto => {
            let window = e.scan_window.expect("validated: scan window present");
            let scan = focus_time_scan(&base, clean, window, e.scan_samples)?;
            (scan.time, Some(scan))
        }
    };
    if let Some(s) = &scan {
        let rows = s.curve.iter().map(|(t, p)| vec![num(*t), num(*p)]);
        out.csv("focus_scan.csv", &["time_s", "target_probability"], rows)?;
    }
    let predicted = match (lens, base.initial) {
        (ControlProtocol::QuadraticLens { phi0, .. }, InitialState::Gaussian(g)) => {
            Some(predict_focus_gaussian(g.width, phi0, config.coupling.alpha)?.t_star)
        }
        (ControlProtocol::QuadraticLens { phi0, .. }, InitialState::Uniform) => {
            let n = *config.lattice.extent.iter().max().unwrap_or(&1);
            Some(predict_focus_plane_wave(n, phi0, config.coupling.alpha)?.t_star)
        }
        _ => None,
    };

    let mut table = Vec::new();
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    let mut snapshots = Vec::new();
    for &v in &e.vacancies {
        let cfg = EnhancementConfig {
            vacancy_fraction: v,
            focus_time,
            ..base.clone()
        };
        let report = enhancement_experiment(&cfg)?;
        log::info!("vacancy {v}: eta {:.3}, chi {:.3}", report.eta.mean, report.chi.mean);
        let saturated = report.realizations.iter().filter(|o| o.chi_saturated).count();
        let mut row = vec![num(v), report.realizations.len().to_string()];
        row.extend(summary_cells(&report.eta));
        row.extend(summary_cells(&report.chi));
        row.push(saturated.to_string());
        table.push(row);
        rows.extend(report.realizations.iter().map(|o| LensRow {
            vacancy: v,
            index: o.index,
            seed: o.seed,
            resamples: o.resamples,
            occupied: o.occupied,
            p_initial: o.p_initial,
            p_unmasked: o.p_unmasked,
            p_masked: o.p_masked,
            eta: o.eta,
            chi: o.chi,
            chi_saturated: o.chi_saturated,
        }));
        if e.grids {
            snapshots.push(lens_snapshot(&cfg, e, out)?);
        }
        reports.push(json!({
            "vacancy": v,
            "eta": report.eta,
            "chi": report.chi,
            "chi_saturated": saturated,
        }));
    }
    out.csv(
        "vacancy_scan.csv",
        &[
            "vacancy",
            "realizations",
            "eta_mean",
            "eta_std",
            "eta_ci95",
            "chi_mean",
            "chi_std",
            "chi_ci95",
            "chi_saturated",
        ],
        table,
    )?;
    out.csv_records("realizations.csv", &rows)?;
    out.json(
        "summary.json",
        &json!({
            "experiment": "vacancy_scan",
            "target": e.target,
            "focus_time_s": focus_time,
            "focus_time_source": if scan.is_some() { "clean-lattice scan" } else { "configured" },
            "predicted_focus_time_s": predicted,
            "scans": reports,
            "snapshots": snapshots,
        }),
    )
}

/// Grids for realization 0, at the ensemble focus time and at this
/// realization's own probability peak.
fn lens_snapshot(cfg: &EnhancementConfig<f64>, e: &EnsembleConfig, out: &mut Artifacts) -> Result<serde_json::Value> {
    let v = cfg.vacancy_fraction;
    let (r, seed, _) = realization_with_target(&cfg.spec, v, cfg.seed, 0, cfg.target)?;
    let h = build_hamiltonian(&cfg.model, Arc::clone(&r))?;
    let prop = Propagator::new(&h, cfg.propagation);
    let psi = cfg.initial.prepare(Arc::clone(&r))?;
    let masked = apply_phase_mask(&psi, &cfg.protocol.mask(Arc::clone(&r)))?;
    let window = e.scan_window.unwrap_or(2.0 * cfg.focus_time);
    let own = focus_time_scan(cfg, Arc::clone(&r), window, e.scan_samples)?;
    let lensed = prop.evolve(&masked, cfg.focus_time)?;
    let plain = prop.evolve(&psi, cfg.focus_time)?;
    let lensed_own = prop.evolve(&masked, own.time)?;
    let plain_own = prop.evolve(&psi, own.time)?;
    let d = dir(v);
    out.write(&format!("{d}/occupancy.txt"), r.to_grid_text().as_bytes())?;
    out.write(&format!("{d}/initial_probability.txt"), probability_grid(&psi).as_bytes())?;
    out.write(&format!("{d}/masked_probability.txt"), probability_grid(&lensed).as_bytes())?;
    out.write(&format!("{d}/unmasked_probability.txt"), probability_grid(&plain).as_bytes())?;
    out.write(&format!("{d}/masked_probability_own_focus.txt"), probability_grid(&lensed_own).as_bytes())?;
    out.write(&format!("{d}/unmasked_probability_own_focus.txt"), probability_grid(&plain_own).as_bytes())?;
    let p0 = psi.probability(cfg.target);
    Ok(json!({
        "vacancy": v,
        "seed": seed,
        "own_focus_time_s": own.time,
        "eta_own_focus": lensed_own.probability(cfg.target) / p0,
        "chi_own_focus": lensed_own.probability(cfg.target) / plain_own.probability(cfg.target),
    }))
}

#[derive(Serialize)]
struct BlockRow {
    vacancy: f64,
    index: usize,
    seed: u64,
    resamples: u64,
    occupied: usize,
    occupied_blocks: usize,
    p_initial: f64,
    p_unmasked: f64,
    p_masked: f64,
    p_masked_predicted: f64,
    eta: f64,
    gain: f64,
    reciprocity_residual: f64,
}

pub fn block_focus(config: &ExperimentConfig, out: &mut Artifacts) -> Result<()> {
    let e = ensemble(config);
    let spec = config.lattice.spec()?;
    let block = e.block.expect("validated: block shape present");
    let shape = if config.lattice.dimensionality() == 2 { block } else { [block[0], 1] };
    let base = BlockFocusConfig {
        model: config.coupling.model(),
        spec: spec.clone(),
        vacancy_fraction: 0.0,
        realizations: e.realizations,
        seed: config.seed,
        block_shape: shape,
        target: e.target,
        horizon: e.horizon.expect("validated: horizon present"),
        initial: initial(config)?,
        propagation: propagation(),
    };
    let dims = &shape[..config.lattice.dimensionality()];
    let partition = partition_blocks(&spec, dims)?;

    let mut table = Vec::new();
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for &v in &e.vacancies {
        let cfg = BlockFocusConfig {
            vacancy_fraction: v,
            ..base.clone()
        };
        let report = block_focus_experiment(&cfg)?;
        log::info!("vacancy {v}: eta {:.3}, gain {:.3}", report.eta.mean, report.gain.mean);
        let mut row = vec![num(v), report.blocks.to_string(), report.realizations.len().to_string()];
        row.extend(summary_cells(&report.eta));
        row.extend(summary_cells(&report.gain));
        table.push(row);
        rows.extend(report.realizations.iter().map(|o| BlockRow {
            vacancy: v,
            index: o.index,
            seed: o.seed,
            resamples: o.resamples,
            occupied: o.occupied,
            occupied_blocks: o.occupied_blocks,
            p_initial: o.p_initial,
            p_unmasked: o.p_unmasked,
            p_masked: o.p_masked,
            p_masked_predicted: o.p_masked_predicted,
            eta: o.eta,
            gain: o.gain,
            reciprocity_residual: o.reciprocity_residual,
        }));
        if e.grids {
            let (r, _, _) = realization_with_target(&spec, v, cfg.seed, 0, cfg.target)?;
            let (sol, psi, focused) = block_focus_realization(&cfg, &partition, Arc::clone(&r))?;
            let h = build_hamiltonian(&cfg.model, Arc::clone(&r))?;
            let plain = Propagator::new(&h, cfg.propagation).evolve(&psi, cfg.horizon)?;
            let d = dir(v);
            out.write(&format!("{d}/occupancy.txt"), r.to_grid_text().as_bytes())?;
            out.write(&format!("{d}/block_phases.txt"), &mask_grid(sol.mask()))?;
            out.write(&format!("{d}/initial_probability.txt"), probability_grid(&psi).as_bytes())?;
            out.write(&format!("{d}/masked_probability.txt"), probability_grid(&focused).as_bytes())?;
            out.write(&format!("{d}/unmasked_probability.txt"), probability_grid(&plain).as_bytes())?;
        }
        reports.push(json!({
            "vacancy": v,
            "blocks": report.blocks,
            "eta": report.eta,
            "gain": report.gain,
        }));
    }
    out.csv(
        "block_focus.csv",
        &[
            "vacancy",
            "blocks",
            "realizations",
            "eta_mean",
            "eta_std",
            "eta_ci95",
            "gain_mean",
            "gain_std",
            "gain_ci95",
        ],
        table,
    )?;
    out.csv_records("realizations.csv", &rows)?;
    out.json(
        "summary.json",
        &json!({
            "experiment": "block_focus",
            "target": e.target,
            "horizon_s": base.horizon,
            "block_shape": dims,
            "blocks": partition.len(),
            "scans": reports,
        }),
    )
}
