//! Coherent control of Frenkel excitons in ordered and vacancy-disordered
//! molecular lattices.
//!
//! The crate builds single-excitation Hamiltonians for one- and
//! two-dimensional arrays of polar molecules, propagates excitonic wave
//! packets exactly (dense eigendecomposition or Chebyshev expansion), and
//! shapes them with site-dependent phase masks imprinted by short electric
//! field pulses: momentum kicks, quadratic lenses and block phases that
//! refocus an excitation through strong disorder.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`). The aliases
//! below fix the precision for callers that do not need the generality.
//!
//! ```
//! use std::sync::Arc;
//! use exciton::coupling::{build_hamiltonian, CouplingModel};
//! use exciton::evolve::propagate_static;
//! use exciton::lattice::{DisorderRealization, LatticeSpec};
//! use exciton::wavepacket::make_single_site;
//!
//! let spec = LatticeSpec::chain(21, 1.0).unwrap();
//! let r = Arc::new(DisorderRealization::full(spec));
//! let h = build_hamiltonian(&CouplingModel::nearest_neighbor(1.0_f64, 0.0), r.clone()).unwrap();
//! let psi = make_single_site(r, [10, 0]).unwrap();
//! let later = propagate_static(&h, &psi, 2.0).unwrap();
//! assert!((later.norm_sqr() - 1.0).abs() < 1e-12);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod coupling;
pub mod disorder_focus;
pub mod error;
pub mod evolve;
pub mod lattice;
pub mod scalar;
pub mod special;
pub mod wavepacket;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type LatticeSpec = lattice::LatticeSpec<f64>;
pub type DisorderRealization = lattice::DisorderRealization<f64>;
pub type CouplingModel = coupling::CouplingModel<f64>;
pub type HamiltonianMatrix = coupling::HamiltonianMatrix<f64>;
pub type ExcitonState = wavepacket::ExcitonState<f64>;
pub type PhaseMask = evolve::PhaseMask<f64>;
pub type PulseSchedule = evolve::PulseSchedule<f64>;

pub type LatticeSpecF32 = lattice::LatticeSpec<f32>;
pub type DisorderRealizationF32 = lattice::DisorderRealization<f32>;
pub type CouplingModelF32 = coupling::CouplingModel<f32>;
pub type HamiltonianMatrixF32 = coupling::HamiltonianMatrix<f32>;
pub type ExcitonStateF32 = wavepacket::ExcitonState<f32>;
pub type PhaseMaskF32 = evolve::PhaseMask<f32>;
pub type PulseScheduleF32 = evolve::PulseSchedule<f32>;
