//! Floating-point abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Real scalar the lattice dynamics is generic over: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Default
    + Debug
    + Display
    + LowerExp
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Machine epsilon scaled to the tolerances used for norm checks.
    fn norm_tolerance() -> Self;

    /// Symmetric eigendecomposition: eigenvalues and column eigenvectors.
    fn sym_eigen(matrix: DMatrix<Self>) -> (Vec<Self>, DMatrix<Self>);

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar representable as f64")
    }
}

macro_rules! impl_scalar {
    ($t:ty, $tol:expr) => {
        impl Scalar for $t {
            fn norm_tolerance() -> Self {
                $tol
            }

            fn sym_eigen(matrix: DMatrix<Self>) -> (Vec<Self>, DMatrix<Self>) {
                let eig = nalgebra::SymmetricEigen::new(matrix);
                (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
            }
        }
    };
}

impl_scalar!(f64, 1e-12);
impl_scalar!(f32, 1e-5);

/// `e^{iθ}`.
#[inline]
pub fn cis<T: Scalar>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// Squared Euclidean norm of a complex vector.
pub fn norm_sqr<T: Scalar>(v: &[Complex<T>]) -> T {
    v.iter().map(|c| c.norm_sqr()).sum()
}

/// Hermitian inner product `⟨a|b⟩`.
pub fn inner<T: Scalar>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter()
        .zip(b)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y)
}
