//! Coupling models and the single-excitation Hamiltonian.
//!
//! Energies are angular frequencies (rad/s, ħ = 1). The Hamiltonian acts on
//! the occupied sites of a [`DisorderRealization`]: vacant cells contribute no
//! rows, which is how vacancy disorder enters the dynamics.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::lattice::{DisorderRealization, LatticeSpec};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingKind {
    NearestNeighbor,
    Dipolar,
}

/// Direction of the dressing DC field.
///
/// `theta` is measured from the lattice x axis (the chain axis in 1D) and
/// `phi` rotates the field about the lattice normal, so the unit vector is
/// `(cos θ cos φ, cos θ sin φ, sin θ)`. With `phi = 0` the angle between the
/// field and a bond along x is exactly `theta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldOrientation<T> {
    pub theta: T,
    pub phi: T,
}

impl<T: Scalar> FieldOrientation<T> {
    pub fn new(theta: T, phi: T) -> Self {
        Self { theta, phi }
    }

    /// Field perpendicular to every in-plane bond.
    pub fn perpendicular() -> Self {
        Self::new(T::FRAC_PI_2(), T::zero())
    }

    pub fn direction(&self) -> [T; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [ct * cp, ct * sp, st]
    }

    /// Folds arbitrary angles into `θ ∈ [0, π]`, `φ ∈ [0, 2π)` while keeping
    /// the same field axis up to inversion (the coupling is even in the field).
    pub fn normalized(&self) -> Self {
        let two_pi = T::PI() + T::PI();
        let mut theta = self.theta % two_pi;
        if theta < T::zero() {
            theta = theta + two_pi;
        }
        let mut phi = self.phi;
        if theta > T::PI() {
            // (θ, φ) and (2π − θ, φ + π) point along the same axis in our frame
            theta = two_pi - theta;
            phi = phi + T::PI();
        }
        let mut phi = phi % two_pi;
        if phi < T::zero() {
            phi = phi + two_pi;
        }
        Self { theta, phi }
    }
}

/// Rule for the intersite coupling `α(n − m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingModel<T> {
    pub kind: CouplingKind,
    /// Nearest-neighbour coupling at the reference geometry (field ⟂ bond), rad/s.
    pub alpha_ref: T,
    pub orientation: FieldOrientation<T>,
    /// Largest coupled separation in lattice units; `None` couples all pairs.
    pub truncation: Option<T>,
    /// Monomer excitation energy ΔE_{e−g}, rad/s.
    pub site_energy: T,
    /// Drop the uniform diagonal (a pure gauge for single-excitation dynamics).
    pub gauge_site_energy: bool,
}

impl<T: Scalar> CouplingModel<T> {
    pub fn nearest_neighbor(alpha: T, site_energy: T) -> Self {
        Self {
            kind: CouplingKind::NearestNeighbor,
            alpha_ref: alpha,
            orientation: FieldOrientation::perpendicular(),
            truncation: Some(T::one()),
            site_energy,
            gauge_site_energy: false,
        }
    }

    pub fn dipolar(
        alpha_ref: T,
        site_energy: T,
        orientation: FieldOrientation<T>,
        truncation: Option<T>,
    ) -> Self {
        Self {
            kind: CouplingKind::Dipolar,
            alpha_ref,
            orientation,
            truncation,
            site_energy,
            gauge_site_energy: false,
        }
    }

    pub fn with_orientation(&self, orientation: FieldOrientation<T>) -> Self {
        Self {
            orientation,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.truncation {
            if !(r >= T::one()) {
                return Err(invalid("truncation", format!("must be >= 1, got {r}")));
            }
        }
        if !self.alpha_ref.is_finite() || !self.site_energy.is_finite() {
            return Err(invalid("alpha", "coupling and site energy must be finite"));
        }
        Ok(())
    }

    /// Diagonal value actually placed in the Hamiltonian.
    pub fn diagonal(&self) -> T {
        if self.gauge_site_energy {
            T::zero()
        } else {
            self.site_energy
        }
    }

    /// Anisotropy factor `3(1/3 − cos²γ)` for a bond direction.
    pub fn angular_factor(&self, bond: [T; 2]) -> T {
        let d = self.orientation.direction();
        let len = (bond[0] * bond[0] + bond[1] * bond[1]).sqrt();
        let cos_g = (bond[0] * d[0] + bond[1] * d[1]) / len;
        T::one() - T::of(3.0) * cos_g * cos_g
    }
}

/// Coupling between two sites separated by an integer lattice vector.
///
/// Nearest-neighbour: `alpha_ref` for unit separation, zero otherwise.
/// Dipolar: `alpha_ref · (a/r)³ · 3(1/3 − cos²γ)`, zero beyond the truncation.
pub fn coupling_element<T: Scalar>(model: &CouplingModel<T>, displacement: [i64; 2]) -> Result<T> {
    if displacement == [0, 0] {
        return Err(Error::ZeroDisplacement);
    }
    let dx = T::of(displacement[0] as f64);
    let dy = T::of(displacement[1] as f64);
    let r2 = dx * dx + dy * dy;
    Ok(match model.kind {
        CouplingKind::NearestNeighbor => {
            if displacement[0].abs() + displacement[1].abs() == 1 {
                model.alpha_ref
            } else {
                T::zero()
            }
        }
        CouplingKind::Dipolar => {
            let r = r2.sqrt();
            if let Some(cut) = model.truncation {
                if r > cut + T::of(1e-9) {
                    return Ok(T::zero());
                }
            }
            model.alpha_ref * model.angular_factor([dx, dy]) / (r2 * r)
        }
    })
}

/// Nonzero coupling displacements reachable on a lattice with the given extent.
fn stencil<T: Scalar>(model: &CouplingModel<T>, extent: [usize; 2]) -> Vec<([i64; 2], T)> {
    let reach = |axis: usize| -> i64 {
        let max = extent[axis] as i64 - 1;
        match (model.kind, model.truncation) {
            (CouplingKind::NearestNeighbor, _) => max.min(1),
            (_, Some(r)) => max.min(r.as_f64().floor() as i64),
            (_, None) => max,
        }
    };
    let (rx, ry) = (reach(0), reach(1));
    let mut out = Vec::new();
    for dy in -ry..=ry {
        for dx in -rx..=rx {
            if dx == 0 && dy == 0 {
                continue;
            }
            let v = coupling_element(model, [dx, dy]).expect("nonzero displacement");
            if v != T::zero() {
                out.push(([dx, dy], v));
            }
        }
    }
    out
}

/// Real-symmetric single-excitation Hamiltonian in compressed-row storage.
#[derive(Clone, Debug)]
pub struct HamiltonianMatrix<T> {
    realization: Arc<DisorderRealization<T>>,
    diagonal: Vec<T>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

/// Assembles `H` over the occupied sites with open boundaries.
pub fn build_hamiltonian<T: Scalar>(
    model: &CouplingModel<T>,
    realization: Arc<DisorderRealization<T>>,
) -> Result<HamiltonianMatrix<T>> {
    model.validate()?;
    if realization.num_occupied() == 0 {
        return Err(Error::EmptyOccupancy);
    }
    let spec = realization.spec().clone();
    let [nx, ny] = spec.extent();
    let st = stencil(model, spec.extent());
    let n = realization.num_occupied();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    for &cell in realization.sites() {
        let [x, y] = spec.coord(cell);
        let mut row: Vec<(usize, T)> = Vec::new();
        for &([dx, dy], v) in &st {
            let (tx, ty) = (x as i64 + dx, y as i64 + dy);
            if tx < 0 || ty < 0 || tx >= nx as i64 || ty >= ny as i64 {
                continue;
            }
            let target = ty as usize * nx + tx as usize;
            if let Some(j) = realization.row_of_cell(target) {
                row.push((j, v));
            }
        }
        row.sort_by_key(|e| e.0);
        for (j, v) in row {
            cols.push(j);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    Ok(HamiltonianMatrix {
        realization,
        diagonal: vec![model.diagonal(); n],
        row_ptr,
        cols,
        vals,
    })
}

/// Vacancy-free ring (1D) or torus (2D) with every stencil displacement wrapped
/// periodically; used to validate dispersion relations.
pub fn build_periodic_hamiltonian<T: Scalar>(
    model: &CouplingModel<T>,
    spec: &LatticeSpec<T>,
) -> Result<HamiltonianMatrix<T>> {
    model.validate()?;
    let [nx, ny] = spec.extent();
    let realization = Arc::new(DisorderRealization::full(spec.clone()));
    // Displacements longer than the ring wrap around and accumulate, so the
    // spectrum is exactly the lattice-sum dispersion at the quantized k.
    let reach = |axis: usize| -> i64 {
        let n = [nx, ny][axis];
        match (model.kind, model.truncation) {
            (CouplingKind::NearestNeighbor, _) => 1,
            (_, Some(r)) => r.as_f64().floor() as i64,
            (_, None) => (n as i64 - 1) / 2,
        }
    };
    let (rx, ry) = (reach(0), if spec.dimensionality() == 2 { reach(1) } else { 0 });
    let n = spec.num_cells();
    let mut row_ptr = vec![0];
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut diagonal = vec![model.diagonal(); n];
    for cell in 0..n {
        let [x, y] = spec.coord(cell);
        let mut row: BTreeMap<usize, T> = BTreeMap::new();
        for dy in -ry..=ry {
            for dx in -rx..=rx {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let v = coupling_element(model, [dx, dy])?;
                if v == T::zero() {
                    continue;
                }
                let tx = (x as i64 + dx).rem_euclid(nx as i64) as usize;
                let ty = (y as i64 + dy).rem_euclid(ny as i64) as usize;
                let target = ty * nx + tx;
                if target == cell {
                    diagonal[cell] = diagonal[cell] + v;
                } else {
                    let e = row.entry(target).or_insert(T::zero());
                    *e = *e + v;
                }
            }
        }
        for (j, v) in row {
            cols.push(j);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    Ok(HamiltonianMatrix {
        realization,
        diagonal,
        row_ptr,
        cols,
        vals,
    })
}

impl<T: Scalar> HamiltonianMatrix<T> {
    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn realization(&self) -> &Arc<DisorderRealization<T>> {
        &self.realization
    }

    pub fn diagonal(&self) -> &[T] {
        &self.diagonal
    }

    /// Number of stored off-diagonal entries.
    pub fn nnz_offdiag(&self) -> usize {
        self.vals.len()
    }

    /// Off-diagonal entries of row `i` as `(column, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if i == j {
            return self.diagonal[i];
        }
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[span.clone()].binary_search(&j) {
            Ok(pos) => self.vals[span.start + pos],
            Err(_) => T::zero(),
        }
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[Complex<T>], y: &mut [Complex<T>]) {
        for i in 0..self.dim() {
            let mut acc = x[i] * self.diagonal[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc = acc + x[self.cols[k]] * self.vals[k];
            }
            y[i] = acc;
        }
    }

    /// Gershgorin enclosure `[min, max]` of the spectrum.
    pub fn spectral_bounds(&self) -> (T, T) {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..self.dim() {
            let radius: T = self.vals[self.row_ptr[i]..self.row_ptr[i + 1]]
                .iter()
                .map(|v| v.abs())
                .sum();
            lo = lo.min(self.diagonal[i] - radius);
            hi = hi.max(self.diagonal[i] + radius);
        }
        (lo, hi)
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diagonal[i];
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// `max |H_ij − H_ji|` over stored entries.
    pub fn max_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim() {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Same off-diagonal couplings with an extra on-site term added.
    pub fn with_extra_diagonal(&self, extra: &[T]) -> Self {
        let mut out = self.clone();
        for (d, e) in out.diagonal.iter_mut().zip(extra) {
            *d = *d + *e;
        }
        out
    }

    /// Writes the matrix as sparse triplets: a header line
    /// `# rows cols entries`, then one `row col value` line per nonzero
    /// (0-based basis rows, diagonal included).
    pub fn write_triplets<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.dim();
        writeln!(w, "# {n} {n} {}", n + self.vals.len())?;
        for i in 0..n {
            let mut entries: Vec<(usize, T)> = self.row(i).collect();
            entries.push((i, self.diagonal[i]));
            entries.sort_by_key(|e| e.0);
            for (j, v) in entries {
                writeln!(w, "{i} {j} {v:e}")?;
            }
        }
        Ok(())
    }
}

/// Nearest-neighbour dispersion `ΔE + 2α cos(ak)`.
pub fn dispersion_nn<T: Scalar>(model: &CouplingModel<T>, lattice_constant: T, k: T) -> T {
    model.diagonal() + T::of(2.0) * model.alpha_ref * (lattice_constant * k).cos()
}

/// Long-range 1D dispersion `ΔE + Σ_{n=1}^{R} 2 α(n) cos(akn)` for a finite
/// truncation `R`.
pub fn dispersion_lr<T: Scalar>(model: &CouplingModel<T>, lattice_constant: T, k: T) -> Result<T> {
    let r = model
        .truncation
        .ok_or_else(|| invalid("truncation", "long-range dispersion needs a finite truncation"))?;
    let reach = r.as_f64().floor() as i64;
    let ak = lattice_constant * k;
    let mut e = model.diagonal();
    for n in 1..=reach {
        let a = coupling_element(model, [n, 0])?;
        e = e + T::of(2.0) * a * (ak * T::of(n as f64)).cos();
    }
    Ok(e)
}

/// Lattice-sum dispersion for any dimensionality:
/// `ΔE + Σ_d α(d) cos(a k·d)` over the truncated stencil.
pub fn dispersion_lattice_sum<T: Scalar>(
    model: &CouplingModel<T>,
    lattice_constant: T,
    dimensionality: usize,
    k: [T; 2],
) -> Result<T> {
    let r = match (model.kind, model.truncation) {
        (CouplingKind::NearestNeighbor, _) => 1,
        (_, Some(r)) => r.as_f64().floor() as i64,
        (_, None) => return Err(invalid("truncation", "lattice sum needs a finite truncation")),
    };
    let ry = if dimensionality == 2 { r } else { 0 };
    let mut e = model.diagonal();
    for dy in -ry..=ry {
        for dx in -r..=r {
            if dx == 0 && dy == 0 {
                continue;
            }
            let v = coupling_element(model, [dx, dy])?;
            let phase = lattice_constant * (k[0] * T::of(dx as f64) + k[1] * T::of(dy as f64));
            e = e + v * phase.cos();
        }
    }
    Ok(e)
}
