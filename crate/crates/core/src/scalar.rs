//! Matrix entry types shared by the real and complex code paths.

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// `f64` or `Complex64`.
pub trait Entry: ComplexField<RealField = f64> + Copy + Send + Sync + 'static {
    const IS_COMPLEX: bool;

    fn to_c64(self) -> Complex64;

    /// Drops the imaginary part for real entries.
    fn from_c64(z: Complex64) -> Self;

    /// Standard normal sample (circularly symmetric with unit variance for
    /// complex entries).
    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Entry for f64 {
    const IS_COMPLEX: bool = false;

    fn to_c64(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }

    fn from_c64(z: Complex64) -> Self {
        z.re
    }

    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

impl Entry for Complex64 {
    const IS_COMPLEX: bool = true;

    fn to_c64(self) -> Complex64 {
        self
    }

    fn from_c64(z: Complex64) -> Self {
        z
    }

    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }
}

/// `½(X − X*)`.
pub fn skew<T: Entry>(x: &DMatrix<T>) -> DMatrix<T> {
    (x - x.adjoint()) * T::from_real(0.5)
}

/// Real Frobenius inner product `Re tr(X* Y)`.
pub fn inner<T: Entry>(x: &DMatrix<T>, y: &DMatrix<T>) -> f64 {
    x.iter()
        .zip(y.iter())
        .map(|(a, b)| (a.conjugate() * *b).real())
        .sum()
}

pub fn embed_complex(a: &DMatrix<f64>) -> DMatrix<Complex64> {
    a.map(|x| Complex64::new(x, 0.0))
}
