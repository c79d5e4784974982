//! Block-phase focusing through strong disorder.
//!
//! The target amplitude after time `T` is `c_o = Σ_γ c_γ` with block
//! contributions `c_γ = Σ_{i∈γ} U_{o,i} c_i(0)`. Because `H` is real and
//! symmetric, `U_{o,i} = U_{i,o}`, so a single forward propagation of the
//! state localized on `o` yields every `U_{o,i}`. Rotating each block by
//! `e^{-iφ_γ}` with `φ_γ = arg c_γ` makes all contributions add in phase.

use std::sync::Arc;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coupling::{build_hamiltonian, CouplingModel, HamiltonianMatrix};
use crate::error::{invalid, Result};
use crate::evolve::{apply_phase_mask, PhaseMask, PropagationOptions, Propagator};
use crate::lattice::{BlockPartition, Coord, DisorderRealization, LatticeSpec};
use crate::scalar::Scalar;
use crate::wavepacket::{make_single_site, ExcitonState};

use super::enhancement::{realization_with_target, InitialState};
use super::stats::{summarize, Summary};

/// Per-block phases aligning the contributions at the target.
#[derive(Clone, Debug)]
pub struct BlockPhaseSolution<T: Scalar> {
    pub target: Coord,
    pub horizon: T,
    /// `φ_γ = arg c_γ` per block; zero for blocks without occupied sites.
    pub phases: Vec<T>,
    /// `|c_γ|` per block.
    pub magnitudes: Vec<T>,
    /// Occupied sites per block.
    pub populations: Vec<usize>,
    /// `U_{i,o}(T)` over the occupied basis.
    pub column: Vec<Complex<T>>,
    /// `max_i |U_{i,o} − U_{o,i}|`, the second from a backward propagation.
    pub reciprocity_residual: f64,
    mask: PhaseMask<T>,
    unmasked_amplitude: Complex<T>,
}

impl<T: Scalar> BlockPhaseSolution<T> {
    /// Mask applying `e^{-iφ_γ}` to every occupied site of block `γ`.
    pub fn mask(&self) -> &PhaseMask<T> {
        &self.mask
    }

    pub fn occupied_blocks(&self) -> usize {
        self.populations.iter().filter(|&&n| n > 0).count()
    }

    /// `|Σ_γ c_γ|²`: target probability at `T` without the mask.
    pub fn predicted_unmasked(&self) -> T {
        self.unmasked_amplitude.norm_sqr()
    }

    /// `(Σ_γ |c_γ|)²`: target probability at `T` with the mask.
    pub fn predicted_masked(&self) -> T {
        let s: T = self.magnitudes.iter().copied().sum();
        s * s
    }
}

fn check_partition<T: Scalar>(partition: &BlockPartition<T>, spec: &LatticeSpec<T>) -> Result<()> {
    if partition.spec().extent() != spec.extent() {
        return Err(invalid("partition", "partition and lattice extents differ"));
    }
    Ok(())
}

/// Block phases for focusing `initial` onto `target` after `horizon`.
pub fn block_phases<T: Scalar>(
    hamiltonian: &HamiltonianMatrix<T>,
    partition: &BlockPartition<T>,
    initial: &ExcitonState<T>,
    target: Coord,
    horizon: T,
    options: PropagationOptions<T>,
) -> Result<BlockPhaseSolution<T>> {
    let realization = Arc::clone(hamiltonian.realization());
    check_partition(partition, realization.spec())?;
    realization.row_of(target)?;
    let local = make_single_site(Arc::clone(&realization), target)?;
    let prop = Propagator::new(hamiltonian, options);
    let column = prop.evolve(&local, horizon)?.amplitudes().to_vec();
    // U_{o,i} = ⟨o|U(T)|i⟩ = conj(⟨i|U(−T)|o⟩)
    let backward = prop.evolve(&local, -horizon)?;
    let reciprocity_residual = column
        .iter()
        .zip(backward.amplitudes())
        .map(|(c, b)| (*c - b.conj()).norm().as_f64())
        .fold(0.0, f64::max);

    let m = partition.len();
    let mut sums = vec![Complex::new(T::zero(), T::zero()); m];
    let mut populations = vec![0usize; m];
    for (row, &cell) in realization.sites().iter().enumerate() {
        let g = partition.block_of_cell(cell);
        sums[g] = sums[g] + column[row] * initial.amplitudes()[row];
        populations[g] += 1;
    }
    let phases: Vec<T> = sums.iter().map(|c| if c.norm_sqr() > T::zero() { c.arg() } else { T::zero() }).collect();
    let magnitudes = sums.iter().map(|c| c.norm()).collect();
    let unmasked_amplitude = sums.iter().fold(Complex::new(T::zero(), T::zero()), |a, b| a + b);
    let site_phases = realization
        .sites()
        .iter()
        .map(|&cell| phases[partition.block_of_cell(cell)])
        .collect();
    let mask = PhaseMask::from_phases(Arc::clone(&realization), site_phases)?;
    Ok(BlockPhaseSolution {
        target,
        horizon,
        phases,
        magnitudes,
        populations,
        column,
        reciprocity_residual,
        mask,
        unmasked_amplitude,
    })
}

#[derive(Clone, Debug)]
pub struct BlockFocusConfig<T> {
    pub model: CouplingModel<T>,
    pub spec: LatticeSpec<T>,
    pub vacancy_fraction: f64,
    pub realizations: usize,
    pub seed: u64,
    pub block_shape: [usize; 2],
    pub target: Coord,
    pub horizon: T,
    pub initial: InitialState<T>,
    pub propagation: PropagationOptions<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockOutcome {
    pub index: usize,
    pub seed: u64,
    pub resamples: u64,
    pub occupied: usize,
    pub occupied_blocks: usize,
    pub p_initial: f64,
    pub p_unmasked: f64,
    pub p_masked: f64,
    pub p_masked_predicted: f64,
    /// `p_masked / p_initial`.
    pub eta: f64,
    /// `p_masked / p_unmasked`.
    pub gain: f64,
    pub reciprocity_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockFocusReport {
    pub vacancy_fraction: f64,
    pub horizon: f64,
    pub target: Coord,
    pub blocks: usize,
    pub realizations: Vec<BlockOutcome>,
    pub eta: Summary,
    pub gain: Summary,
}

/// Runs one realization: phases, then an explicit masked propagation.
pub fn block_focus_realization<T: Scalar>(
    config: &BlockFocusConfig<T>,
    partition: &BlockPartition<T>,
    realization: Arc<DisorderRealization<T>>,
) -> Result<(BlockPhaseSolution<T>, ExcitonState<T>, ExcitonState<T>)> {
    let h = build_hamiltonian(&config.model, Arc::clone(&realization))?;
    let psi = config.initial.prepare(Arc::clone(&realization))?;
    let sol = block_phases(&h, partition, &psi, config.target, config.horizon, config.propagation)?;
    let masked = apply_phase_mask(&psi, sol.mask())?;
    let focused = Propagator::new(&h, config.propagation).evolve(&masked, config.horizon)?;
    Ok((sol, psi, focused))
}

/// Block-phase focusing over an ensemble of vacancy realizations.
pub fn block_focus_experiment<T: Scalar>(config: &BlockFocusConfig<T>) -> Result<BlockFocusReport> {
    config.model.validate()?;
    if config.realizations == 0 {
        return Err(invalid("realizations", "need at least one realization"));
    }
    let partition = crate::lattice::partition_blocks(&config.spec, &config.block_shape)?;
    let outcomes: Vec<BlockOutcome> = (0..config.realizations)
        .into_par_iter()
        .map(|index| {
            let (r, seed, resamples) =
                realization_with_target(&config.spec, config.vacancy_fraction, config.seed, index, config.target)?;
            let (sol, psi, focused) = block_focus_realization(config, &partition, Arc::clone(&r))?;
            let p0 = psi.probability(config.target).as_f64();
            let pu = sol.predicted_unmasked().as_f64();
            let pm = focused.probability(config.target).as_f64();
            Ok(BlockOutcome {
                index,
                seed,
                resamples,
                occupied: r.num_occupied(),
                occupied_blocks: sol.occupied_blocks(),
                p_initial: p0,
                p_unmasked: pu,
                p_masked: pm,
                p_masked_predicted: sol.predicted_masked().as_f64(),
                eta: pm / p0,
                gain: pm / pu,
                reciprocity_residual: sol.reciprocity_residual,
            })
        })
        .collect::<Result<_>>()?;
    let etas: Vec<f64> = outcomes.iter().map(|o| o.eta).collect();
    let gains: Vec<f64> = outcomes.iter().map(|o| o.gain).collect();
    Ok(BlockFocusReport {
        vacancy_fraction: config.vacancy_fraction,
        horizon: config.horizon.as_f64(),
        target: config.target,
        blocks: partition.len(),
        eta: summarize(&etas),
        gain: summarize(&gains),
        realizations: outcomes,
    })
}

/// Phasor statistics for the null model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhasorModel {
    /// Unit modulus, uniform phase.
    UnitModulus,
    /// Circular complex Gaussian with unit mean modulus.
    ComplexGaussian,
}

/// Monte-Carlo mean of `|Σ c_γ|²` for `m` random phasors against the aligned
/// `(Σ |c_γ|)²`, over `trials` draws. Returns `(aligned, random, ratio)`.
pub fn random_phasor_gain(m: usize, trials: usize, model: PhasorModel, seed: u64) -> (f64, f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau = std::f64::consts::TAU;
    // Rayleigh with unit mean has σ = √(2/π)
    let sigma = (2.0 / std::f64::consts::PI).sqrt();
    let (mut aligned, mut random) = (0.0, 0.0);
    for _ in 0..trials {
        let mut sum = Complex::new(0.0, 0.0);
        let mut abs = 0.0;
        for _ in 0..m {
            let r = match model {
                PhasorModel::UnitModulus => 1.0,
                PhasorModel::ComplexGaussian => {
                    let u: f64 = rng.random::<f64>();
                    sigma * (-2.0 * (1.0 - u).ln()).sqrt()
                }
            };
            let phase = tau * rng.random::<f64>();
            sum += Complex::from_polar(r, phase);
            abs += r;
        }
        aligned += abs * abs;
        random += sum.norm_sqr();
    }
    let (aligned, random) = (aligned / trials as f64, random / trials as f64);
    (aligned, random, aligned / random)
}
