//! Propagation kernels for static Hamiltonians.
//!
//! Two routes compute `exp(-iHt)ψ`: a dense symmetric eigendecomposition for
//! small bases and a Chebyshev expansion on the sparse operator for large ones.
//! Both factor out the same uniform diagonal shift so their global phases agree.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::coupling::HamiltonianMatrix;
use crate::scalar::{cis, Scalar};
use crate::special::bessel_j_sequence;

/// Real-symmetric operator acting on complex vectors.
pub trait HermitianOperator<T: Scalar>: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[Complex<T>], y: &mut [Complex<T>]);
    /// Enclosure `[lo, hi]` of the spectrum.
    fn spectral_bounds(&self) -> (T, T);
    /// Uniform reference energy used to split off the global phase.
    fn reference_energy(&self) -> T;
}

impl<T: Scalar> HermitianOperator<T> for HamiltonianMatrix<T> {
    fn dim(&self) -> usize {
        HamiltonianMatrix::dim(self)
    }

    fn apply(&self, x: &[Complex<T>], y: &mut [Complex<T>]) {
        HamiltonianMatrix::apply(self, x, y)
    }

    fn spectral_bounds(&self) -> (T, T) {
        HamiltonianMatrix::spectral_bounds(self)
    }

    fn reference_energy(&self) -> T {
        mean(self.diagonal())
    }
}

/// `H + diag(extra)` without copying `H`.
pub struct WithOnsite<'a, T> {
    pub base: &'a HamiltonianMatrix<T>,
    pub extra: &'a [T],
}

impl<T: Scalar> HermitianOperator<T> for WithOnsite<'_, T> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn apply(&self, x: &[Complex<T>], y: &mut [Complex<T>]) {
        self.base.apply(x, y);
        for ((yi, xi), e) in y.iter_mut().zip(x).zip(self.extra) {
            *yi = *yi + *xi * *e;
        }
    }

    fn spectral_bounds(&self) -> (T, T) {
        let (lo, hi) = self.base.spectral_bounds();
        let emin = self.extra.iter().copied().fold(T::infinity(), T::min);
        let emax = self.extra.iter().copied().fold(T::neg_infinity(), T::max);
        (lo + emin, hi + emax)
    }

    fn reference_energy(&self) -> T {
        self.base.reference_energy()
    }
}

fn mean<T: Scalar>(v: &[T]) -> T {
    v.iter().copied().sum::<T>() / T::of(v.len() as f64)
}

/// `exp(-i op t) ψ` by Chebyshev expansion. `tol` bounds the discarded
/// Bessel coefficients.
pub fn chebyshev_evolve<T: Scalar, Op: HermitianOperator<T> + ?Sized>(
    op: &Op,
    psi: &[Complex<T>],
    t: T,
    tol: T,
) -> Vec<Complex<T>> {
    let n = op.dim();
    debug_assert_eq!(psi.len(), n);
    let reference = op.reference_energy();
    let (lo, hi) = op.spectral_bounds();
    let center = (lo + hi) / T::of(2.0);
    let mut half = (hi - lo) / T::of(2.0);
    let global = cis(-(reference * t)) * cis(-((center - reference) * t));
    if t == T::zero() {
        return psi.to_vec();
    }
    if half <= T::zero() {
        return psi.iter().map(|c| *c * global).collect();
    }
    // a little slack keeps the scaled spectrum strictly inside [-1, 1]
    half = half * T::of(1.01);
    let x = half * t;
    let xa = x.abs().as_f64();
    let kmax = (xa + 12.0 * xa.cbrt() + 40.0) as usize;
    let j = bessel_j_sequence(x, kmax);
    let cutoff = tol * T::of(1e-3);
    let order = j
        .iter()
        .rposition(|v| v.abs() > cutoff)
        .unwrap_or(0)
        .max(1);

    let scale = T::one() / half;
    let hn = |src: &[Complex<T>], dst: &mut [Complex<T>]| {
        op.apply(src, dst);
        for (d, s) in dst.iter_mut().zip(src) {
            *d = (*d - *s * center) * scale;
        }
    };

    let minus_i_pow = |k: usize| match k % 4 {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), -T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), T::one()),
    };

    let two = T::of(2.0);
    let mut prev = psi.to_vec();
    let mut cur = vec![Complex::new(T::zero(), T::zero()); n];
    hn(&prev, &mut cur);
    let c0 = j[0];
    let c1 = minus_i_pow(1) * (two * j[1]);
    let mut out: Vec<Complex<T>> = prev
        .iter()
        .zip(&cur)
        .map(|(p, c)| *p * c0 + *c * c1)
        .collect();
    let mut next = vec![Complex::new(T::zero(), T::zero()); n];
    for k in 2..=order {
        hn(&cur, &mut next);
        let ck = minus_i_pow(k) * (two * j[k]);
        for i in 0..n {
            let v = next[i] * two - prev[i];
            next[i] = v;
            out[i] = out[i] + v * ck;
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    for o in out.iter_mut() {
        *o = *o * global;
    }
    out
}

/// Dense eigendecomposition of a Hamiltonian, shifted by its mean diagonal.
#[derive(Clone, Debug)]
pub struct DenseEigen<T: Scalar> {
    shift: T,
    values: Vec<T>,
    vectors: DMatrix<T>,
}

impl<T: Scalar> DenseEigen<T> {
    pub fn new<Op: HermitianOperator<T> + ?Sized>(op: &Op) -> Self {
        let n = op.dim();
        let shift = op.reference_energy();
        let mut dense = DMatrix::<T>::zeros(n, n);
        let mut e = vec![Complex::new(T::zero(), T::zero()); n];
        let mut col = vec![Complex::new(T::zero(), T::zero()); n];
        for j in 0..n {
            e[j] = Complex::new(T::one(), T::zero());
            op.apply(&e, &mut col);
            for i in 0..n {
                dense[(i, j)] = col[i].re;
            }
            dense[(j, j)] = dense[(j, j)] - shift;
            e[j] = Complex::new(T::zero(), T::zero());
        }
        let (values, vectors) = T::sym_eigen(dense);
        Self {
            shift,
            values,
            vectors,
        }
    }

    /// Eigenvalues of the unshifted Hamiltonian.
    pub fn eigenvalues(&self) -> Vec<T> {
        self.values.iter().map(|v| *v + self.shift).collect()
    }

    pub fn eigenvectors(&self) -> &DMatrix<T> {
        &self.vectors
    }

    pub fn evolve(&self, psi: &[Complex<T>], t: T) -> Vec<Complex<T>> {
        let n = self.values.len();
        let v = &self.vectors;
        let mut coeff = vec![Complex::new(T::zero(), T::zero()); n];
        for (j, c) in coeff.iter_mut().enumerate() {
            let mut acc = Complex::new(T::zero(), T::zero());
            for i in 0..n {
                acc = acc + psi[i] * v[(i, j)];
            }
            *c = acc * cis(-(self.values[j] * t));
        }
        let global = cis(-(self.shift * t));
        (0..n)
            .map(|i| {
                let mut acc = Complex::new(T::zero(), T::zero());
                for j in 0..n {
                    acc = acc + coeff[j] * v[(i, j)];
                }
                acc * global
            })
            .collect()
    }

    /// Full evolution matrix `U(t) = V e^{-iΛt} Vᵀ`.
    pub fn evolution_matrix(&self, t: T) -> DMatrix<Complex<T>> {
        let n = self.values.len();
        let v = &self.vectors;
        let phases: Vec<Complex<T>> = self.values.iter().map(|l| cis(-(*l * t))).collect();
        let global = cis(-(self.shift * t));
        DMatrix::from_fn(n, n, |i, k| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for j in 0..n {
                acc = acc + phases[j] * (v[(i, j)] * v[(k, j)]);
            }
            acc * global
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{build_hamiltonian, CouplingModel, FieldOrientation};
    use crate::lattice::{sample_disorder, LatticeSpec};
    use std::sync::Arc;

    #[test]
    fn chebyshev_matches_dense() {
        let spec = LatticeSpec::square(7, 6, 1.0).unwrap();
        let r = Arc::new(sample_disorder(&spec, 0.2, 9).unwrap());
        let m = CouplingModel::dipolar(1.0, 3.0, FieldOrientation::new(0.3, 0.9), Some(3.0));
        let h = build_hamiltonian(&m, r).unwrap();
        let n = h.dim();
        let psi: Vec<Complex<f64>> = (0..n)
            .map(|i| Complex::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let dense = DenseEigen::new(&h);
        for &t in &[0.0, 0.1, 2.5, 40.0, -7.0] {
            let a = chebyshev_evolve(&h, &psi, t, 1e-14);
            let b = dense.evolve(&psi, t);
            let err = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(err < 1e-10, "t={t}: {err}");
        }
    }

    #[test]
    fn onsite_operator_adds_diagonal() {
        let spec = LatticeSpec::chain(5, 1.0).unwrap();
        let h = build_hamiltonian(
            &CouplingModel::nearest_neighbor(1.0, 0.0),
            Arc::new(crate::lattice::DisorderRealization::full(spec)),
        )
        .unwrap();
        let extra = [0.5, -1.0, 2.0, 0.0, 3.0];
        let op = WithOnsite { base: &h, extra: &extra };
        let direct = h.with_extra_diagonal(&extra);
        let psi: Vec<Complex<f64>> = (0..5).map(|i| Complex::new(i as f64, 1.0)).collect();
        let a = chebyshev_evolve(&op, &psi, 1.3, 1e-14);
        let b = DenseEigen::new(&direct).evolve(&psi, 1.3);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-11);
        }
    }
}
