//! Lattice geometry, vacancy realizations and block partitions.
//!
//! Cells are indexed row-major with the origin at a corner: a cell with
//! integer coordinate `[x, y]` has index `y * nx + x`. One-dimensional chains
//! use `y = 0` and `ny = 1`.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Integer cell coordinate `[x, y]`.
pub type Coord = [usize; 2];

/// Geometry of a 1D chain or square 2D array.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeSpec<T> {
    dimensionality: usize,
    extent: [usize; 2],
    lattice_constant: T,
}

impl<T: Scalar> LatticeSpec<T> {
    /// Builds a lattice from per-axis extents. `extent` must have
    /// `dimensionality` entries, each at least 2.
    pub fn new(dimensionality: usize, extent: &[usize], lattice_constant: T) -> Result<Self> {
        if !(dimensionality == 1 || dimensionality == 2) {
            return Err(Error::InvalidLattice(format!(
                "dimensionality must be 1 or 2, got {dimensionality}"
            )));
        }
        if extent.len() != dimensionality {
            return Err(Error::InvalidLattice(format!(
                "expected {dimensionality} extents, got {}",
                extent.len()
            )));
        }
        if let Some(e) = extent.iter().find(|&&e| e < 2) {
            return Err(Error::InvalidLattice(format!(
                "every axis needs at least 2 sites, got {e}"
            )));
        }
        if !(lattice_constant > T::zero()) || !lattice_constant.is_finite() {
            return Err(Error::InvalidLattice(format!(
                "lattice constant must be positive, got {lattice_constant}"
            )));
        }
        let ny = if dimensionality == 2 { extent[1] } else { 1 };
        Ok(Self {
            dimensionality,
            extent: [extent[0], ny],
            lattice_constant,
        })
    }

    pub fn chain(n: usize, lattice_constant: T) -> Result<Self> {
        Self::new(1, &[n], lattice_constant)
    }

    pub fn square(nx: usize, ny: usize, lattice_constant: T) -> Result<Self> {
        Self::new(2, &[nx, ny], lattice_constant)
    }

    pub fn dimensionality(&self) -> usize {
        self.dimensionality
    }

    /// `[nx, ny]`; `ny == 1` for chains.
    pub fn extent(&self) -> [usize; 2] {
        self.extent
    }

    pub fn lattice_constant(&self) -> T {
        self.lattice_constant
    }

    pub fn num_cells(&self) -> usize {
        self.extent[0] * self.extent[1]
    }

    pub fn contains(&self, c: Coord) -> bool {
        c[0] < self.extent[0] && c[1] < self.extent[1]
    }

    pub fn index(&self, c: Coord) -> Result<usize> {
        if !self.contains(c) {
            return Err(Error::OutOfBounds(c));
        }
        Ok(c[1] * self.extent[0] + c[0])
    }

    pub fn coord(&self, index: usize) -> Coord {
        debug_assert!(index < self.num_cells());
        [index % self.extent[0], index / self.extent[0]]
    }

    /// Geometric centre in cell units (may be half-integer).
    pub fn center(&self) -> [T; 2] {
        let half = |n: usize| T::of((n as f64 - 1.0) / 2.0);
        [half(self.extent[0]), half(self.extent[1])]
    }
}

/// Occupancy mask of a lattice: which cells carry a monomer.
#[derive(Clone, Debug)]
pub struct DisorderRealization<T> {
    spec: LatticeSpec<T>,
    occupied: Vec<bool>,
    seed: Option<u64>,
    vacancy_fraction: f64,
    sites: Vec<usize>,
    row_of: Vec<usize>,
}

const VACANT: usize = usize::MAX;

impl<T: Scalar> DisorderRealization<T> {
    /// Every cell occupied.
    pub fn full(spec: LatticeSpec<T>) -> Self {
        let n = spec.num_cells();
        Self::assemble(spec, vec![true; n], None, 0.0)
    }

    /// Builds a realization from an explicit mask (length = number of cells).
    pub fn from_mask(spec: LatticeSpec<T>, occupied: Vec<bool>) -> Result<Self> {
        if occupied.len() != spec.num_cells() {
            return Err(Error::InvalidLattice(format!(
                "mask has {} entries, lattice has {} cells",
                occupied.len(),
                spec.num_cells()
            )));
        }
        let vacant = occupied.iter().filter(|o| !**o).count();
        let fraction = vacant as f64 / occupied.len() as f64;
        Ok(Self::assemble(spec, occupied, None, fraction))
    }

    fn assemble(spec: LatticeSpec<T>, occupied: Vec<bool>, seed: Option<u64>, f: f64) -> Self {
        let mut row_of = vec![VACANT; occupied.len()];
        let mut sites = Vec::with_capacity(occupied.len());
        for (cell, &occ) in occupied.iter().enumerate() {
            if occ {
                row_of[cell] = sites.len();
                sites.push(cell);
            }
        }
        Self {
            spec,
            occupied,
            seed,
            vacancy_fraction: f,
            sites,
            row_of,
        }
    }

    pub fn spec(&self) -> &LatticeSpec<T> {
        &self.spec
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Requested vacancy fraction (for sampled realizations) or the measured
    /// one (for explicit masks).
    pub fn vacancy_fraction(&self) -> f64 {
        self.vacancy_fraction
    }

    pub fn occupied(&self) -> &[bool] {
        &self.occupied
    }

    pub fn is_occupied(&self, c: Coord) -> bool {
        self.spec
            .index(c)
            .map(|i| self.occupied[i])
            .unwrap_or(false)
    }

    /// Cell indices of occupied sites, in basis (matrix-row) order.
    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn num_occupied(&self) -> usize {
        self.sites.len()
    }

    pub fn num_vacant(&self) -> usize {
        self.occupied.len() - self.sites.len()
    }

    pub fn is_vacancy_free(&self) -> bool {
        self.sites.len() == self.occupied.len()
    }

    /// Basis row of a cell, `None` if vacant.
    pub fn row_of_cell(&self, cell: usize) -> Option<usize> {
        match self.row_of.get(cell) {
            Some(&r) if r != VACANT => Some(r),
            _ => None,
        }
    }

    pub fn row_of(&self, c: Coord) -> Result<usize> {
        let cell = self.spec.index(c)?;
        self.row_of_cell(cell).ok_or(Error::VacantTarget(c))
    }

    /// Coordinate of a basis row.
    pub fn coord_of_row(&self, row: usize) -> Coord {
        self.spec.coord(self.sites[row])
    }

    /// True when both realizations describe the same basis.
    pub fn same_basis(&self, other: &Self) -> bool {
        self.spec == other.spec && self.occupied == other.occupied
    }

    /// Plain-text 0/1 grid, one lattice row (fixed `y`) per line.
    pub fn to_grid_text(&self) -> String {
        let [nx, ny] = self.spec.extent();
        let mut s = String::with_capacity((nx + 1) * ny);
        for y in 0..ny {
            for x in 0..nx {
                s.push(if self.occupied[y * nx + x] { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }

    /// Parses the format written by [`Self::to_grid_text`].
    pub fn from_grid_text(spec: LatticeSpec<T>, text: &str) -> Result<Self> {
        let mut mask = Vec::with_capacity(spec.num_cells());
        for (line_no, line) in text.lines().filter(|l| !l.trim().is_empty()).enumerate() {
            let line = line.trim();
            if line.len() != spec.extent()[0] {
                return Err(Error::InvalidLattice(format!(
                    "grid row {line_no} has {} columns, expected {}",
                    line.len(),
                    spec.extent()[0]
                )));
            }
            for ch in line.chars() {
                match ch {
                    '1' => mask.push(true),
                    '0' => mask.push(false),
                    other => {
                        return Err(Error::InvalidLattice(format!(
                            "unexpected character {other:?} in grid row {line_no}"
                        )))
                    }
                }
            }
        }
        Self::from_mask(spec, mask)
    }
}

/// Fixed-count vacancy sampling: exactly `round(fraction · cells)` vacancies
/// drawn uniformly without replacement from a ChaCha8 stream seeded by `seed`.
pub fn sample_disorder<T: Scalar>(
    spec: &LatticeSpec<T>,
    vacancy_fraction: f64,
    seed: u64,
) -> Result<DisorderRealization<T>> {
    if !(0.0..1.0).contains(&vacancy_fraction) {
        return Err(invalid(
            "vacancy_fraction",
            format!("must lie in [0, 1), got {vacancy_fraction}"),
        ));
    }
    let cells = spec.num_cells();
    let n_vacant = (vacancy_fraction * cells as f64).round() as usize;
    if n_vacant >= cells {
        return Err(Error::EmptyOccupancy);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut occupied = vec![true; cells];
    for cell in rand::seq::index::sample(&mut rng, cells, n_vacant) {
        occupied[cell] = false;
    }
    Ok(DisorderRealization::assemble(
        spec.clone(),
        occupied,
        Some(seed),
        vacancy_fraction,
    ))
}

/// Partition of the cell grid into rectangular blocks.
#[derive(Clone, Debug)]
pub struct BlockPartition<T> {
    spec: LatticeSpec<T>,
    block_shape: [usize; 2],
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

/// Splits the lattice into `block_shape` tiles; the last row/column of tiles
/// may be smaller when the shape does not divide the extent.
pub fn partition_blocks<T: Scalar>(
    spec: &LatticeSpec<T>,
    block_shape: &[usize],
) -> Result<BlockPartition<T>> {
    let dim = spec.dimensionality();
    if block_shape.len() != dim {
        return Err(invalid(
            "block_shape",
            format!("expected {dim} entries, got {}", block_shape.len()),
        ));
    }
    let ext = spec.extent();
    let shape = [block_shape[0], if dim == 2 { block_shape[1] } else { 1 }];
    for axis in 0..2 {
        if shape[axis] == 0 {
            return Err(invalid("block_shape", "block sides must be positive"));
        }
        if shape[axis] > ext[axis] {
            return Err(invalid(
                "block_shape",
                format!(
                    "block side {} exceeds lattice extent {} on axis {axis}",
                    shape[axis], ext[axis]
                ),
            ));
        }
    }
    let grid = [ext[0].div_ceil(shape[0]), ext[1].div_ceil(shape[1])];
    let mut blocks = vec![Vec::new(); grid[0] * grid[1]];
    let mut block_of = vec![0; spec.num_cells()];
    for cell in 0..spec.num_cells() {
        let [x, y] = spec.coord(cell);
        let b = (y / shape[1]) * grid[0] + x / shape[0];
        blocks[b].push(cell);
        block_of[cell] = b;
    }
    Ok(BlockPartition {
        spec: spec.clone(),
        block_shape: shape,
        blocks,
        block_of,
    })
}

impl<T: Scalar> BlockPartition<T> {
    pub fn spec(&self) -> &LatticeSpec<T> {
        &self.spec
    }

    pub fn block_shape(&self) -> [usize; 2] {
        self.block_shape
    }

    /// Number of blocks `M`.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of_cell(&self, cell: usize) -> usize {
        self.block_of[cell]
    }

    /// Number of blocks holding at least one occupied site.
    pub fn occupied_blocks(&self, realization: &DisorderRealization<T>) -> usize {
        self.blocks
            .iter()
            .filter(|b| b.iter().any(|&c| realization.occupied()[c]))
            .count()
    }

    /// Block index per cell rendered as a text grid (debugging aid).
    pub fn to_grid_text(&self) -> String {
        let [nx, ny] = self.spec.extent();
        let mut s = String::new();
        for y in 0..ny {
            let row: Vec<String> = (0..nx)
                .map(|x| self.block_of[y * nx + x].to_string())
                .collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }
}

/// Convenience: share a realization between states and Hamiltonians.
pub fn shared<T: Scalar>(r: DisorderRealization<T>) -> Arc<DisorderRealization<T>> {
    Arc::new(r)
}
