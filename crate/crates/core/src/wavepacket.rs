//! Single-excitation states, their momentum representation and packet
//! diagnostics.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};
use crate::lattice::{Coord, DisorderRealization};
use crate::scalar::{cis, norm_sqr, Scalar};
use crate::special::bessel_j_sequence;

/// Tail mass beyond which a truncated ideal-focus state is rejected.
pub const BESSEL_TAIL_LIMIT: f64 = 1e-6;

/// Complex amplitude per occupied site.
#[derive(Clone, Debug)]
pub struct ExcitonState<T> {
    realization: Arc<DisorderRealization<T>>,
    amplitudes: Vec<Complex<T>>,
    time: T,
}

/// Parameters of a (product) Gaussian wave packet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianPacket<T> {
    /// Centre in cell units.
    pub center: [T; 2],
    /// Amplitude width σ̃x in cell units: `C ∝ exp(-(n − n0)² / 2σ̃x²)`.
    pub width: T,
    /// Carrier wave vector per axis as the dimensionless `a·k`.
    pub carrier: [T; 2],
}

impl<T: Scalar> ExcitonState<T> {
    /// Restricts full-grid amplitudes to the occupied sites and renormalizes.
    pub fn from_grid(realization: Arc<DisorderRealization<T>>, grid: &[Complex<T>]) -> Result<Self> {
        if grid.len() != realization.spec().num_cells() {
            return Err(Error::BasisMismatch);
        }
        let amps = realization.sites().iter().map(|&c| grid[c]).collect();
        Self::from_amplitudes(realization, amps)
    }

    /// Normalizes basis-ordered amplitudes into a state.
    pub fn from_amplitudes(
        realization: Arc<DisorderRealization<T>>,
        mut amplitudes: Vec<Complex<T>>,
    ) -> Result<Self> {
        if amplitudes.len() != realization.num_occupied() {
            return Err(Error::BasisMismatch);
        }
        let norm = norm_sqr(&amplitudes).sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        for a in amplitudes.iter_mut() {
            *a = *a / norm;
        }
        Ok(Self {
            realization,
            amplitudes,
            time: T::zero(),
        })
    }

    /// Same basis, new amplitudes, no renormalization.
    pub(crate) fn evolved(&self, amplitudes: Vec<Complex<T>>, time: T) -> Self {
        debug_assert_eq!(amplitudes.len(), self.amplitudes.len());
        Self {
            realization: Arc::clone(&self.realization),
            amplitudes,
            time,
        }
    }

    pub fn with_time(mut self, time: T) -> Self {
        self.time = time;
        self
    }

    pub fn realization(&self) -> &Arc<DisorderRealization<T>> {
        &self.realization
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn time(&self) -> T {
        self.time
    }

    pub fn norm_sqr(&self) -> T {
        norm_sqr(&self.amplitudes)
    }

    /// `|C|²` at a cell; zero for vacancies.
    pub fn probability(&self, c: Coord) -> T {
        match self.realization.row_of(c) {
            Ok(row) => self.amplitudes[row].norm_sqr(),
            Err(_) => T::zero(),
        }
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Amplitudes on every cell, zero on vacancies.
    pub fn to_grid(&self) -> Vec<Complex<T>> {
        let mut grid = vec![Complex::new(T::zero(), T::zero()); self.realization.spec().num_cells()];
        for (&cell, &a) in self.realization.sites().iter().zip(&self.amplitudes) {
            grid[cell] = a;
        }
        grid
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if !self.realization.same_basis(&other.realization) {
            return Err(Error::BasisMismatch);
        }
        Ok(crate::scalar::inner(&self.amplitudes, &other.amplitudes))
    }

    /// One `cell re im` row per occupied site.
    pub fn write_dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# cell re im")?;
        for (&cell, a) in self.realization.sites().iter().zip(&self.amplitudes) {
            writeln!(w, "{cell} {:e} {:e}", a.re, a.im)?;
        }
        Ok(())
    }
}

/// Gaussian envelope times plane-wave carrier, masked to occupied sites.
pub fn make_gaussian<T: Scalar>(
    realization: Arc<DisorderRealization<T>>,
    packet: GaussianPacket<T>,
) -> Result<ExcitonState<T>> {
    if !(packet.width > T::zero()) {
        return Err(invalid("width", "Gaussian width must be positive"));
    }
    let two_d = realization.spec().dimensionality() == 2;
    let two = T::of(2.0);
    let amps = realization
        .sites()
        .iter()
        .map(|&cell| {
            let [x, y] = realization.spec().coord(cell);
            let dx = T::of(x as f64) - packet.center[0];
            let mut r2 = dx * dx;
            let mut phase = packet.carrier[0] * T::of(x as f64);
            if two_d {
                let dy = T::of(y as f64) - packet.center[1];
                r2 = r2 + dy * dy;
                phase = phase + packet.carrier[1] * T::of(y as f64);
            }
            cis(phase) * (-r2 / (two * packet.width * packet.width)).exp()
        })
        .collect();
    ExcitonState::from_amplitudes(realization, amps)
}

/// Plane wave `e^{i a k·n}/√N` over the occupied sites.
pub fn make_eigenstate<T: Scalar>(
    realization: Arc<DisorderRealization<T>>,
    ak: [T; 2],
) -> Result<ExcitonState<T>> {
    if !realization.is_vacancy_free() {
        log::warn!("plane-wave state on a lattice with vacancies is not an eigenstate");
    }
    let amps = realization
        .sites()
        .iter()
        .map(|&cell| {
            let [x, y] = realization.spec().coord(cell);
            cis(ak[0] * T::of(x as f64) + ak[1] * T::of(y as f64))
        })
        .collect();
    ExcitonState::from_amplitudes(realization, amps)
}

/// Excitation localized on a single occupied cell.
pub fn make_single_site<T: Scalar>(
    realization: Arc<DisorderRealization<T>>,
    site: Coord,
) -> Result<ExcitonState<T>> {
    let row = realization.row_of(site)?;
    let mut amps = vec![Complex::new(T::zero(), T::zero()); realization.num_occupied()];
    amps[row] = Complex::new(T::one(), T::zero());
    ExcitonState::from_amplitudes(realization, amps)
}

/// Equal amplitudes on every occupied site.
pub fn make_uniform<T: Scalar>(realization: Arc<DisorderRealization<T>>) -> Result<ExcitonState<T>> {
    let n = realization.num_occupied();
    ExcitonState::from_amplitudes(realization, vec![Complex::new(T::one(), T::zero()); n])
}

/// State that refocuses onto `target` after evolving for `lead_time` under a
/// nearest-neighbour Hamiltonian with coupling `alpha`:
/// `C_n = J_{n−n0}(2ατ) e^{iπ(n−n0)/2}`, a product over axes in 2D.
///
/// Rejects lead times whose Bessel support spills more than
/// [`BESSEL_TAIL_LIMIT`] of the norm off the lattice.
pub fn make_bessel_focus<T: Scalar>(
    realization: Arc<DisorderRealization<T>>,
    target: Coord,
    lead_time: T,
    alpha: T,
) -> Result<ExcitonState<T>> {
    realization.row_of(target)?;
    let spec = realization.spec();
    let arg = T::of(2.0) * alpha * lead_time;
    let [nx, ny] = spec.extent();
    let max_order = nx.max(ny);
    let j = bessel_j_sequence(arg, max_order);
    let axis = |m: i64| -> Complex<T> {
        let n = m.unsigned_abs() as usize;
        let mut v = j[n];
        if m < 0 && n % 2 == 1 {
            v = -v;
        }
        // i^m
        let phase = match m.rem_euclid(4) {
            0 => Complex::new(T::one(), T::zero()),
            1 => Complex::new(T::zero(), T::one()),
            2 => Complex::new(-T::one(), T::zero()),
            _ => Complex::new(T::zero(), -T::one()),
        };
        phase * v
    };
    let two_d = spec.dimensionality() == 2;
    let mut grid = Vec::with_capacity(spec.num_cells());
    for cell in 0..spec.num_cells() {
        let [x, y] = spec.coord(cell);
        let mut c = axis(x as i64 - target[0] as i64);
        if two_d {
            c = c * axis(y as i64 - target[1] as i64);
        }
        grid.push(c);
    }
    let kept: T = realization.sites().iter().map(|&c| grid[c].norm_sqr()).sum();
    let tail = (T::one() - kept).as_f64();
    if tail > BESSEL_TAIL_LIMIT {
        return Err(Error::BesselTail {
            tail,
            limit: BESSEL_TAIL_LIMIT,
        });
    }
    ExcitonState::from_grid(realization, &grid)
}

fn fft_axes<T: Scalar>(grid: &mut [Complex<T>], extent: [usize; 2], inverse: bool) {
    let [nx, ny] = extent;
    let mut planner = FftPlanner::<T>::new();
    let plan = |planner: &mut FftPlanner<T>, n: usize| {
        if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        }
    };
    let fx = plan(&mut planner, nx);
    for row in grid.chunks_mut(nx) {
        fx.process(row);
    }
    if ny > 1 {
        let fy = plan(&mut planner, ny);
        let mut col = vec![Complex::new(T::zero(), T::zero()); ny];
        for x in 0..nx {
            for y in 0..ny {
                col[y] = grid[y * nx + x];
            }
            fy.process(&mut col);
            for y in 0..ny {
                grid[y * nx + x] = col[y];
            }
        }
    }
    let scale = T::one() / T::of((nx * ny) as f64).sqrt();
    for v in grid.iter_mut() {
        *v = *v * scale;
    }
}

/// Unitary discrete Fourier amplitudes `G_k = N^{-1/2} Σ_n C_n e^{-i a k·n}`
/// on the grid `k_ν = 2πν/(N a)`, stored in FFT order.
#[derive(Clone, Debug)]
pub struct KSpectrum<T> {
    extent: [usize; 2],
    dimensionality: usize,
    lattice_constant: T,
    amplitudes: Vec<Complex<T>>,
}

/// Momentum representation of a state; vacancies are zero-amplitude cells.
pub fn k_transform<T: Scalar>(state: &ExcitonState<T>) -> KSpectrum<T> {
    let spec = state.realization().spec();
    let mut grid = state.to_grid();
    fft_axes(&mut grid, spec.extent(), false);
    KSpectrum {
        extent: spec.extent(),
        dimensionality: spec.dimensionality(),
        lattice_constant: spec.lattice_constant(),
        amplitudes: grid,
    }
}

fn fold_index<T: Scalar>(nu: usize, n: usize) -> T {
    // ν ∈ (−N/2, N/2]
    let nu = nu as i64;
    let n = n as i64;
    let folded = if nu > n / 2 { nu - n } else { nu };
    T::of(2.0 * std::f64::consts::PI * folded as f64 / n as f64)
}

/// Wraps an angle into (−π, π].
pub fn wrap_phase<T: Scalar>(x: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut y = x % two_pi;
    if y <= -T::PI() {
        y = y + two_pi;
    } else if y > T::PI() {
        y = y - two_pi;
    }
    y
}

impl<T: Scalar> KSpectrum<T> {
    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn extent(&self) -> [usize; 2] {
        self.extent
    }

    pub fn weights(&self) -> Vec<T> {
        self.amplitudes.iter().map(|g| g.norm_sqr()).collect()
    }

    pub fn total_weight(&self) -> T {
        norm_sqr(&self.amplitudes)
    }

    /// Dimensionless `a·k` per axis for a stored index, folded into the zone.
    pub fn ak(&self, index: usize) -> [T; 2] {
        let [nx, ny] = self.extent;
        [fold_index(index % nx, nx), fold_index(index / nx, ny)]
    }

    /// Circular mean of `a·k` per axis, weighted by `|G_k|²`.
    pub fn center_ak(&self) -> [T; 2] {
        let mut acc = [Complex::new(T::zero(), T::zero()); 2];
        for (i, g) in self.amplitudes.iter().enumerate() {
            let w = g.norm_sqr();
            let ak = self.ak(i);
            for axis in 0..2 {
                acc[axis] = acc[axis] + cis(ak[axis]) * w;
            }
        }
        let mut out = [acc[0].arg(), acc[1].arg()];
        if self.dimensionality == 1 {
            out[1] = T::zero();
        }
        out
    }

    /// Mean wave vector in 1/m.
    pub fn center(&self) -> [T; 2] {
        let c = self.center_ak();
        [c[0] / self.lattice_constant, c[1] / self.lattice_constant]
    }

    /// RMS spread of `a·k` about the circular mean, per axis.
    pub fn width_ak(&self) -> [T; 2] {
        let c = self.center_ak();
        let total = self.total_weight();
        let mut acc = [T::zero(); 2];
        for (i, g) in self.amplitudes.iter().enumerate() {
            let w = g.norm_sqr();
            let ak = self.ak(i);
            for axis in 0..2 {
                let d = wrap_phase(ak[axis] - c[axis]);
                acc[axis] = acc[axis] + w * d * d;
            }
        }
        [(acc[0] / total).sqrt(), (acc[1] / total).sqrt()]
    }

    /// Grid amplitudes recovered by the inverse transform.
    pub fn inverse(&self) -> Vec<Complex<T>> {
        let mut grid = self.amplitudes.clone();
        fft_axes(&mut grid, self.extent, true);
        grid
    }

    /// One `ak_x ak_y re im` row per grid point.
    pub fn write_dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# ak_x ak_y re im")?;
        for (i, g) in self.amplitudes.iter().enumerate() {
            let ak = self.ak(i);
            writeln!(w, "{:e} {:e} {:e} {:e}", ak[0], ak[1], g.re, g.im)?;
        }
        Ok(())
    }
}

/// Position-space moments of a state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PacketStats<T> {
    /// `Σ n |C_n|²` per axis, in cell units.
    pub center: [T; 2],
    /// Probability-density RMS width per axis, in cell units.
    pub width_sites: [T; 2],
    /// Probability-density RMS width per axis, in metres.
    pub width_m: [T; 2],
    /// `1 / Σ |C_n|⁴`.
    pub participation: T,
}

pub fn packet_stats<T: Scalar>(state: &ExcitonState<T>) -> PacketStats<T> {
    let r = state.realization();
    let spec = r.spec();
    let total = state.norm_sqr();
    let mut m1 = [T::zero(); 2];
    let mut m2 = [T::zero(); 2];
    let mut p4 = T::zero();
    for (&cell, a) in r.sites().iter().zip(state.amplitudes()) {
        let p = a.norm_sqr() / total;
        let [x, y] = spec.coord(cell);
        let xy = [T::of(x as f64), T::of(y as f64)];
        for axis in 0..2 {
            m1[axis] = m1[axis] + p * xy[axis];
            m2[axis] = m2[axis] + p * xy[axis] * xy[axis];
        }
        p4 = p4 + p * p;
    }
    let var = |axis: usize| (m2[axis] - m1[axis] * m1[axis]).max(T::zero());
    let w = [var(0).sqrt(), var(1).sqrt()];
    let a = spec.lattice_constant();
    PacketStats {
        center: m1,
        width_sites: w,
        width_m: [w[0] * a, w[1] * a],
        participation: T::one() / p4,
    }
}
