use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::control::ControlProtocol;
use crate::coupling::{build_hamiltonian, CouplingModel};
use crate::error::{invalid, Error, Result};
use crate::evolve::{apply_phase_mask, time_grid, PropagationOptions, Propagator, RecordOptions};
use crate::lattice::{sample_disorder, Coord, DisorderRealization, LatticeSpec};
use crate::scalar::Scalar;
use crate::wavepacket::{make_gaussian, make_uniform, ExcitonState, GaussianPacket};

use super::seeds::realization_seed;
use super::stats::{summarize, Summary};

/// Attempts per realization before a vacant target becomes an error.
const MAX_RESAMPLES: u64 = 1000;

/// Initial excitation prepared on each realization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialState<T> {
    /// Equal amplitude on every occupied site.
    Uniform,
    Gaussian(GaussianPacket<T>),
}

impl<T: Scalar> InitialState<T> {
    pub fn prepare(&self, realization: Arc<DisorderRealization<T>>) -> Result<ExcitonState<T>> {
        match self {
            Self::Uniform => make_uniform(realization),
            Self::Gaussian(p) => make_gaussian(realization, *p),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EnhancementConfig<T> {
    pub model: CouplingModel<T>,
    pub spec: LatticeSpec<T>,
    pub vacancy_fraction: f64,
    pub realizations: usize,
    pub seed: u64,
    pub protocol: ControlProtocol<T>,
    pub initial: InitialState<T>,
    pub target: Coord,
    /// Evaluation time, normally the clean-lattice focus time.
    pub focus_time: T,
    pub propagation: PropagationOptions<T>,
    /// Value reported for χ when the unmasked probability is below `1e-12`.
    pub chi_cap: f64,
}

/// One disorder realization of an enhancement experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RealizationOutcome {
    pub index: usize,
    pub seed: u64,
    /// Realizations discarded because the target cell was vacant.
    pub resamples: u64,
    pub occupied: usize,
    pub p_initial: f64,
    pub p_unmasked: f64,
    pub p_masked: f64,
    pub eta: f64,
    pub chi: f64,
    pub chi_saturated: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnhancementReport {
    pub vacancy_fraction: f64,
    pub focus_time: f64,
    pub target: Coord,
    pub realizations: Vec<RealizationOutcome>,
    pub eta: Summary,
    pub chi: Summary,
}

/// Draws realization `index`, resampling until the target is occupied.
pub fn realization_with_target<T: Scalar>(
    spec: &LatticeSpec<T>,
    vacancy_fraction: f64,
    base_seed: u64,
    index: usize,
    target: Coord,
) -> Result<(Arc<DisorderRealization<T>>, u64, u64)> {
    if !spec.contains(target) {
        return Err(Error::OutOfBounds(target));
    }
    for attempt in 0..MAX_RESAMPLES {
        let seed = realization_seed(base_seed, index as u64, attempt);
        let r = sample_disorder(spec, vacancy_fraction, seed)?;
        if r.is_occupied(target) {
            return Ok((Arc::new(r), seed, attempt));
        }
    }
    Err(Error::VacantTarget(target))
}

/// `(p_unmasked, p_masked, p_initial)` at the target for one realization.
fn masked_pair<T: Scalar>(
    model: &CouplingModel<T>,
    realization: Arc<DisorderRealization<T>>,
    protocol: &ControlProtocol<T>,
    initial: &InitialState<T>,
    target: Coord,
    t: T,
    options: PropagationOptions<T>,
) -> Result<(f64, f64, f64)> {
    let h = build_hamiltonian(model, Arc::clone(&realization))?;
    let prop = Propagator::new(&h, options);
    let psi = initial.prepare(Arc::clone(&realization))?;
    let masked = apply_phase_mask(&psi, &protocol.mask(realization))?;
    let p_unmasked = prop.evolve(&psi, t)?.probability(target).as_f64();
    let p_masked = prop.evolve(&masked, t)?.probability(target).as_f64();
    Ok((p_unmasked, p_masked, psi.probability(target).as_f64()))
}

/// Masked versus unmasked focusing over an ensemble of vacancy realizations.
///
/// Realizations run in parallel on the current rayon pool; results are
/// gathered in index order so the report does not depend on scheduling.
pub fn enhancement_experiment<T: Scalar>(config: &EnhancementConfig<T>) -> Result<EnhancementReport> {
    config.model.validate()?;
    if config.realizations == 0 {
        return Err(invalid("realizations", "need at least one realization"));
    }
    if !(config.focus_time >= T::zero()) {
        return Err(invalid("focus_time", "must be non-negative"));
    }
    let outcomes: Vec<RealizationOutcome> = (0..config.realizations)
        .into_par_iter()
        .map(|index| {
            let (r, seed, resamples) =
                realization_with_target(&config.spec, config.vacancy_fraction, config.seed, index, config.target)?;
            let occupied = r.num_occupied();
            let (pu, pm, p0) = masked_pair(
                &config.model,
                r,
                &config.protocol,
                &config.initial,
                config.target,
                config.focus_time,
                config.propagation,
            )?;
            let saturated = pu < 1e-12;
            Ok(RealizationOutcome {
                index,
                seed,
                resamples,
                occupied,
                p_initial: p0,
                p_unmasked: pu,
                p_masked: pm,
                eta: pm / p0,
                chi: if saturated { config.chi_cap } else { pm / pu },
                chi_saturated: saturated,
            })
        })
        .collect::<Result<_>>()?;
    let etas: Vec<f64> = outcomes.iter().map(|o| o.eta).collect();
    let chis: Vec<f64> = outcomes.iter().map(|o| o.chi).collect();
    Ok(EnhancementReport {
        vacancy_fraction: config.vacancy_fraction,
        focus_time: config.focus_time.as_f64(),
        target: config.target,
        eta: summarize(&etas),
        chi: summarize(&chis),
        realizations: outcomes,
    })
}

/// Target-probability curve of a focusing run on one realization.
#[derive(Clone, Debug, Serialize)]
pub struct FocusScan {
    pub time: f64,
    pub probability: f64,
    pub curve: Vec<(f64, f64)>,
}

/// Time of maximal target probability after the protocol mask, located on a
/// uniform grid of `samples` points over `(0, t_max]` and refined on a
/// 21-point grid between the neighbours of the coarse maximum.
pub fn focus_time_scan<T: Scalar>(
    config: &EnhancementConfig<T>,
    realization: Arc<DisorderRealization<T>>,
    t_max: T,
    samples: usize,
) -> Result<FocusScan> {
    let (model, protocol, initial, target) = (&config.model, &config.protocol, &config.initial, config.target);
    if samples < 2 || !(t_max > T::zero()) {
        return Err(invalid("samples", "need at least two samples over a positive window"));
    }
    realization.row_of(target)?;
    let h = build_hamiltonian(model, Arc::clone(&realization))?;
    let prop = Propagator::new(&h, config.propagation);
    let psi = apply_phase_mask(&initial.prepare(Arc::clone(&realization))?, &protocol.mask(realization))?;
    let rec = RecordOptions {
        target: Some(target),
        snapshot_stride: 0,
    };
    let step = t_max / T::of(samples as f64);
    let coarse = time_grid(step, t_max, samples);
    let run = prop.trajectory(&psi, &coarse, rec.clone())?;
    let mut curve: Vec<(f64, f64)> = run
        .diagnostics
        .iter()
        .map(|d| (d.time, d.target_probability.unwrap_or(0.0)))
        .collect();
    let best = argmax(&curve);
    let lo = if best == 0 { T::zero() } else { coarse[best - 1] };
    let hi = coarse[(best + 1).min(samples - 1)];
    let fine = time_grid(lo, hi, 21);
    let run = prop.trajectory(&psi, &fine, rec)?;
    curve.extend(run.diagnostics.iter().map(|d| (d.time, d.target_probability.unwrap_or(0.0))));
    curve.sort_by(|a, b| a.0.total_cmp(&b.0));
    let best = argmax(&curve);
    Ok(FocusScan {
        time: curve[best].0,
        probability: curve[best].1,
        curve,
    })
}

fn argmax(curve: &[(f64, f64)]) -> usize {
    curve
        .iter()
        .enumerate()
        .fold(0, |b, (i, c)| if c.1 > curve[b].1 { i } else { b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::optimal_lens_gaussian;

    fn config(vac: f64) -> EnhancementConfig<f64> {
        let spec = LatticeSpec::square(15, 15, 1.0).unwrap();
        EnhancementConfig {
            model: CouplingModel::nearest_neighbor(1.0, 0.0),
            spec,
            vacancy_fraction: vac,
            realizations: 4,
            seed: 11,
            protocol: ControlProtocol::QuadraticLens { phi0: optimal_lens_gaussian(3.0), target: [7.0, 7.0] },
            initial: InitialState::Gaussian(GaussianPacket { center: [7.0, 7.0], width: 3.0, carrier: [0.0; 2] }),
            target: [7, 7],
            focus_time: 1.0,
            propagation: PropagationOptions::default(),
            chi_cap: 1e6,
        }
    }

    #[test]
    fn clean_lattice_realizations_are_identical() {
        let r = enhancement_experiment(&config(0.0)).unwrap();
        let first = &r.realizations[0];
        assert!(r.realizations.iter().all(|o| o.p_masked == first.p_masked && o.chi == first.chi));
        assert_eq!(r.chi.ci95_half_width, Some(0.0));
    }

    #[test]
    fn deterministic_and_target_always_occupied() {
        let a = enhancement_experiment(&config(0.4)).unwrap();
        let b = enhancement_experiment(&config(0.4)).unwrap();
        assert_eq!(a.realizations, b.realizations);
        assert!(a.realizations.iter().all(|o| o.p_initial > 0.0));
    }

    #[test]
    fn global_phase_leaves_factors_unchanged() {
        let c = config(0.2);
        let (r, _, _) = realization_with_target(&c.spec, 0.2, 3, 0, c.target).unwrap();
        let base = masked_pair(&c.model, r.clone(), &c.protocol, &c.initial, c.target, 1.3, c.propagation).unwrap();
        let shifted = ControlProtocol::QuadraticLens { phi0: optimal_lens_gaussian(3.0), target: [7.0, 7.0] };
        let h = build_hamiltonian(&c.model, r.clone()).unwrap();
        let psi = c.initial.prepare(r.clone()).unwrap();
        let rotated = apply_phase_mask(&psi, &crate::evolve::PhaseMask::from_fn(r.clone(), |_| 0.77)).unwrap();
        let masked = apply_phase_mask(&rotated, &shifted.mask(r)).unwrap();
        let prop = Propagator::new(&h, c.propagation);
        let pm = prop.evolve(&masked, 1.3).unwrap().probability(c.target);
        let pu = prop.evolve(&rotated, 1.3).unwrap().probability(c.target);
        assert!((pm - base.1).abs() < 1e-13 && (pu - base.0).abs() < 1e-13);
    }
}
