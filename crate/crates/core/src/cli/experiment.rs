//! Reproducible experiment drivers behind `nearstable experiment`.

use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use super::gallery;
use crate::objective::Mode;
use crate::region::RegionSpec;
use crate::solver::{conjecture_probe, nearest_stable, SolveConfig, SolveError};

// Reference best distances for the grcar benchmarks (n = 5, 10, 30).
pub const GRCAR_REFERENCE: [(usize, f64); 3] = [(5, 2.309628), (10, 3.2834), (30, 5.66)];
// Reference distances for the two real-eigenvalue examples.
pub const REAL_EIG_3X3_REFERENCE: f64 = 0.4946;
pub const REAL_EIG_4X4_REFERENCE: f64 = 0.2181;

/// Tolerance used when grouping diagonal entries of `T` into clusters.
pub const CLUSTER_TOL: f64 = 1e-2;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("unknown experiment '{0}' (expected grcar-suite, real-eig-suite, conjecture or perf-profile)")]
    Unknown(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    GrcarSuite,
    RealEigSuite,
    Conjecture,
    PerfProfile,
}

impl FromStr for Experiment {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "grcar-suite" => Ok(Self::GrcarSuite),
            "real-eig-suite" => Ok(Self::RealEigSuite),
            "conjecture" => Ok(Self::Conjecture),
            "perf-profile" => Ok(Self::PerfProfile),
            other => Err(ExperimentError::Unknown(other.to_string())),
        }
    }
}

/// 3×3 matrix whose real-Schur truncation sits at distance 0.5.
pub fn real_eig_3x3() -> DMatrix<f64> {
    DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
}

/// Two rotation blocks coupled by `a` in position (2, 3).
pub fn real_eig_4x4(a: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(
        4,
        4,
        &[
            0.0, 1.0, 0.0, 0.0, -1.0, 0.0, a, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, -1.0, 0.0,
        ],
    )
}

/// Greedy single-linkage grouping of eigenvalues; clusters are sorted by
/// decreasing size, then by real part.
pub fn eigenvalue_clusters(eigs: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let mut sorted = eigs.to_vec();
    sorted.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    for z in sorted {
        match groups
            .iter_mut()
            .find(|g| g.iter().any(|w| (z - w).norm() <= tol))
        {
            Some(g) => g.push(z),
            None => groups.push(vec![z]),
        }
    }
    let mut out: Vec<(Complex64, usize)> = groups
        .into_iter()
        .map(|g| {
            let k = g.len();
            (g.iter().sum::<Complex64>() / k as f64, k)
        })
        .collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.re.total_cmp(&b.0.re)));
    out
}

#[derive(Debug, Clone)]
pub struct SuiteRow {
    pub name: String,
    pub distance: f64,
    pub reference: f64,
    pub seconds: f64,
    /// Largest eigenvalue cluster of `T`: (center, multiplicity).
    pub cluster: (Complex64, usize),
}

fn row(
    name: String,
    a: &DMatrix<f64>,
    region: RegionSpec,
    mode: Mode,
    reference: f64,
    config: &SolveConfig,
) -> Result<SuiteRow, SolveError> {
    let start = Instant::now();
    let out = nearest_stable(a, &region, mode, config)?;
    let cluster = eigenvalue_clusters(&out.eigenvalues, CLUSTER_TOL)[0];
    Ok(SuiteRow {
        name,
        distance: out.distance,
        reference,
        seconds: start.elapsed().as_secs_f64(),
        cluster,
    })
}

/// Hurwitz solves of grcar(5), grcar(10) and grcar(30).
pub fn grcar_suite(config: &SolveConfig) -> Result<Vec<SuiteRow>, SolveError> {
    GRCAR_REFERENCE
        .iter()
        .map(|&(n, reference)| {
            row(
                format!("grcar({n})"),
                &gallery::grcar(n),
                RegionSpec::hurwitz(),
                Mode::RealBlock,
                reference,
                config,
            )
        })
        .collect()
}

/// Real-spectrum solves of the 3×3 example and the 4×4 example with `a = 10`.
/// The 4×4 problem uses at least 20 starts.
pub fn real_eig_suite(config: &SolveConfig) -> Result<Vec<SuiteRow>, SolveError> {
    let mut wide = config.clone();
    wide.n_starts = wide.n_starts.max(20);
    Ok(vec![
        row(
            "3x3".into(),
            &real_eig_3x3(),
            RegionSpec::real_line(),
            Mode::RealTriangular,
            REAL_EIG_3X3_REFERENCE,
            config,
        )?,
        row(
            "4x4(a=10)".into(),
            &real_eig_4x4(10.0),
            RegionSpec::real_line(),
            Mode::RealTriangular,
            REAL_EIG_4X4_REFERENCE,
            &wide,
        )?,
    ])
}

/// `count` standard-normal matrices of size `n`, seeded `seed, seed+1, …`.
pub fn random_corpus(count: usize, n: usize, seed: u64) -> Vec<DMatrix<f64>> {
    (0..count as u64)
        .map(|k| gallery::randn(n, seed.wrapping_add(k)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureSummary {
    pub count: usize,
    pub max_imag_norm: f64,
    /// Largest `real − complex` distance gap; zero when real minimizers are
    /// never beaten over the complex field.
    pub max_gap: f64,
}

pub fn conjecture(
    corpus: &[DMatrix<f64>],
    config: &SolveConfig,
) -> Result<ConjectureSummary, SolveError> {
    let mut summary = ConjectureSummary {
        count: corpus.len(),
        max_imag_norm: 0.0,
        max_gap: 0.0,
    };
    for a in corpus {
        let r = conjecture_probe(a, config)?;
        summary.max_imag_norm = summary.max_imag_norm.max(r.imag_norm);
        summary.max_gap = summary.max_gap.max(r.real_distance - r.complex_distance);
    }
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerfRow {
    pub family: String,
    pub seed: u64,
    pub n: usize,
    pub distance: f64,
}

/// Hurwitz solves over `per_family` randn and `per_family` rand matrices.
pub fn perf_profile(
    n: usize,
    per_family: usize,
    config: &SolveConfig,
) -> Result<Vec<PerfRow>, SolveError> {
    let mut rows = Vec::with_capacity(2 * per_family);
    for family in ["randn", "rand"] {
        for k in 0..per_family as u64 {
            let seed = config.seed.wrapping_add(k);
            let a = gallery::gallery(family, n, seed).expect("known family");
            let out = nearest_stable(&a, &RegionSpec::hurwitz(), Mode::RealBlock, config)?;
            rows.push(PerfRow {
                family: family.to_string(),
                seed,
                n,
                distance: out.distance,
            });
        }
    }
    Ok(rows)
}

/// Runs `which` and writes its report to `out`.
pub fn run<W: Write>(
    which: Experiment,
    config: &SolveConfig,
    mut out: W,
) -> Result<(), ExperimentError> {
    match which {
        Experiment::GrcarSuite | Experiment::RealEigSuite => {
            let rows = if which == Experiment::GrcarSuite {
                grcar_suite(config)?
            } else {
                real_eig_suite(config)?
            };
            writeln!(
                out,
                "{:<12} {:>10} {:>10} {:>9}  largest T-diagonal cluster",
                "problem", "distance", "reference", "seconds"
            )?;
            for r in rows {
                let (c, k) = r.cluster;
                writeln!(
                    out,
                    "{:<12} {:>10} {:>10} {:>9.2}  {} x ({}, {})",
                    r.name,
                    super::format_significant(r.distance, 6),
                    r.reference,
                    r.seconds,
                    k,
                    super::format_significant(c.re, 6),
                    super::format_significant(c.im, 6),
                )?;
            }
        }
        Experiment::Conjecture => {
            let corpus = random_corpus(20, 6, config.seed);
            let s = conjecture(&corpus, config)?;
            writeln!(out, "matrices        {}", s.count)?;
            writeln!(out, "max |Im B|_F    {:e}", s.max_imag_norm)?;
            writeln!(out, "max real-cplx   {:e}", s.max_gap)?;
        }
        Experiment::PerfProfile => {
            let rows = perf_profile(10, 50, config)?;
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}
