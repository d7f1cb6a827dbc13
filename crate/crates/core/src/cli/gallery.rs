//! Benchmark matrix families.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GalleryError {
    #[error("unknown gallery matrix '{0}' (expected type1, grcar, randn or rand)")]
    UnknownName(String),
    #[error("gallery matrices need n >= 2, got {0}")]
    TooSmall(usize),
    #[error("malformed gallery spec '{0}' (expected NAME:N)")]
    Malformed(String),
}

/// Ones on the first subdiagonal and −0.1 in the top right corner.
pub fn type1(n: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    for i in 1..n {
        a[(i, i - 1)] = 1.0;
    }
    a[(0, n - 1)] = -0.1;
    a
}

/// −1 on the first subdiagonal, +1 on the diagonal and the first three
/// superdiagonals.
pub fn grcar(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j + 1 {
            -1.0
        } else if j >= i && j - i <= 3 {
            1.0
        } else {
            0.0
        }
    })
}

/// Standard normal entries, filled row by row.
pub fn randn(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = rng.sample(StandardNormal);
        }
    }
    a
}

/// Uniform `[0, 1)` entries, filled row by row.
pub fn rand(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = rng.random::<f64>();
        }
    }
    a
}

pub fn gallery(name: &str, n: usize, seed: u64) -> Result<DMatrix<f64>, GalleryError> {
    if n < 2 {
        return Err(GalleryError::TooSmall(n));
    }
    match name {
        "type1" => Ok(type1(n)),
        "grcar" => Ok(grcar(n)),
        "randn" => Ok(randn(n, seed)),
        "rand" => Ok(rand(n, seed)),
        other => Err(GalleryError::UnknownName(other.to_string())),
    }
}

/// Parses `NAME:N`.
pub fn parse_spec(spec: &str) -> Result<(String, usize), GalleryError> {
    let (name, n) = spec
        .split_once(':')
        .ok_or_else(|| GalleryError::Malformed(spec.to_string()))?;
    let n = n
        .trim()
        .parse()
        .map_err(|_| GalleryError::Malformed(spec.to_string()))?;
    Ok((name.trim().to_string(), n))
}
