//! JSON result documents.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::objective::Mode;
use crate::scalar::Entry;
use crate::solver::SolveOutcome;

/// Row-major matrix; complex entries are `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixJson {
    Real(Vec<Vec<f64>>),
    Complex(Vec<Vec<[f64; 2]>>),
}

impl MatrixJson {
    pub fn from_matrix<T: Entry>(m: &DMatrix<T>) -> Self {
        if T::IS_COMPLEX {
            Self::Complex(
                m.row_iter()
                    .map(|r| {
                        r.iter()
                            .map(|z| {
                                let c = z.to_c64();
                                [c.re, c.im]
                            })
                            .collect()
                    })
                    .collect(),
            )
        } else {
            Self::Real(
                m.row_iter()
                    .map(|r| r.iter().map(|z| z.to_c64().re).collect())
                    .collect(),
            )
        }
    }

    /// Complex view of the stored matrix; `None` if the rows are ragged.
    pub fn to_complex(&self) -> Option<DMatrix<Complex64>> {
        let rows: Vec<Vec<Complex64>> = match self {
            Self::Real(r) => r
                .iter()
                .map(|row| row.iter().map(|&x| Complex64::new(x, 0.0)).collect())
                .collect(),
            Self::Complex(r) => r
                .iter()
                .map(|row| row.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
                .collect(),
        };
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return None;
        }
        Some(DMatrix::from_row_iterator(n, m, rows.into_iter().flatten()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    /// Input file path or gallery spec.
    pub input: String,
    pub region: String,
    pub mode: Mode,
    pub distance: f64,
    #[serde(rename = "B")]
    pub b: MatrixJson,
    #[serde(rename = "T")]
    pub t: MatrixJson,
    #[serde(rename = "Q")]
    pub q: MatrixJson,
    /// Eigenvalues read off the diagonal (blocks) of `T`, as `[re, im]`.
    pub eigenvalues: Vec<[f64; 2]>,
    pub iterations: usize,
    pub seconds: f64,
    pub final_gradnorm: f64,
    pub seed: u64,
    pub version: String,
}

impl ResultDocument {
    pub fn from_outcome<T: Entry>(
        input: &str,
        region: &str,
        seed: u64,
        outcome: &SolveOutcome<T>,
    ) -> Self {
        Self {
            input: input.to_string(),
            region: region.to_string(),
            mode: outcome.mode,
            distance: outcome.distance,
            b: MatrixJson::from_matrix(&outcome.b),
            t: MatrixJson::from_matrix(&outcome.t),
            q: MatrixJson::from_matrix(outcome.q.matrix()),
            eigenvalues: outcome.eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
            iterations: outcome.iterations,
            seconds: outcome.seconds,
            final_gradnorm: outcome.grad_norm,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result documents always serialize")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
