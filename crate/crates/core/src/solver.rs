//! Multi-start nearest Ω-stable matrix solves.

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::manifold::{
    gradient_descent_minimize, q_factor, trust_region_minimize, OptimizeResult, OptimizerOptions,
    OrthogonalPoint, Status, TraceEntry,
};
use crate::objective::{block_of, diagonal_eigenvalues, Mode, ObjectiveError, ProblemInstance};
use crate::region::{RegionKind, RegionSpec};
use crate::scalar::{embed_complex, Entry};

/// Absolute tolerance (per unit of `max(1, ‖A‖²_F)`) used to certify results.
pub const FEASIBILITY_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error("T breaks the {mode:?} zero pattern at ({row}, {col}) by {magnitude:e}")]
    PatternViolation {
        mode: Mode,
        row: usize,
        col: usize,
        magnitude: f64,
    },
    #[error("result is not stable: worst violation {margin:e}")]
    Infeasible { margin: f64 },
    #[error("at least one starting point is required")]
    NoStarts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    TrustRegion,
    GradientDescent,
}

#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub optimizer: OptimizerOptions,
    pub n_starts: usize,
    pub seed: u64,
    pub method: Method,
    /// Iteration cap of the Schur-form warm start; `5n` when unset.
    pub prerun_iterations: Option<usize>,
    /// Run the starts on the rayon pool.
    pub parallel: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerOptions::default(),
            n_starts: 10,
            seed: 0,
            method: Method::TrustRegion,
            prerun_iterations: None,
            parallel: true,
        }
    }
}

impl SolveConfig {
    pub fn with_starts(n_starts: usize, seed: u64) -> Self {
        Self {
            n_starts,
            seed,
            ..Self::default()
        }
    }
}

/// Number of starts used when the caller does not choose one.
pub fn default_starts(n: usize) -> usize {
    if n <= 50 {
        10
    } else {
        4
    }
}

/// A labelled starting point.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialPoint<T: Entry> {
    pub label: String,
    pub point: OrthogonalPoint<T>,
}

/// Summary of a single start of a multi-start solve.
#[derive(Debug, Clone, PartialEq)]
pub struct StartSummary {
    pub label: String,
    pub distance: f64,
    pub status: Status,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome<T: Entry> {
    /// Nearest stable matrix found.
    pub b: DMatrix<T>,
    pub q: OrthogonalPoint<T>,
    pub t: DMatrix<T>,
    /// `‖A − B‖_F`.
    pub distance: f64,
    /// `f(Q) = ‖L‖²_F` at the returned point.
    pub objective: f64,
    pub grad_norm: f64,
    pub objective_trace: Vec<TraceEntry>,
    pub init_label: String,
    pub start_index: usize,
    pub status: Status,
    pub iterations: usize,
    pub mode: Mode,
    pub eigenvalues: Vec<Complex64>,
    pub starts: Vec<StartSummary>,
    pub seconds: f64,
}

/// Nearest Ω-stable matrix to `a` from `config.n_starts` starting points.
pub fn nearest_stable<T: Entry>(
    a: &DMatrix<T>,
    region: &RegionSpec,
    mode: Mode,
    config: &SolveConfig,
) -> Result<SolveOutcome<T>, SolveError> {
    let instance = ProblemInstance::new(a.clone(), region.clone(), mode)?;
    let starts = initial_points_with(a, mode, config.n_starts, config.seed, config);
    solve_from(&instance, starts, config)
}

/// Runs the optimizer from each of the given starts and keeps the best.
pub fn solve_from<T: Entry>(
    instance: &ProblemInstance<T>,
    starts: Vec<InitialPoint<T>>,
    config: &SolveConfig,
) -> Result<SolveOutcome<T>, SolveError> {
    if starts.is_empty() {
        return Err(SolveError::NoStarts);
    }
    let clock = Instant::now();
    let a = instance.matrix();
    let scale = a.norm().max(1.0);
    let mut opts = config.optimizer.clone();
    opts.grad_tolerance *= scale;

    let run = |start: &InitialPoint<T>| -> OptimizeResult<T> {
        match config.method {
            Method::TrustRegion => trust_region_minimize(instance, &start.point, &opts),
            Method::GradientDescent => gradient_descent_minimize(instance, &start.point, &opts),
        }
    };
    let results: Vec<OptimizeResult<T>> = if config.parallel {
        starts.par_iter().map(run).collect()
    } else {
        starts.iter().map(run).collect()
    };

    // Lowest start index wins ties.
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.value < results[best].value {
            best = i;
        }
    }
    let summaries = starts
        .iter()
        .zip(&results)
        .map(|(s, r)| StartSummary {
            label: s.label.clone(),
            distance: r.value.sqrt(),
            status: r.status,
            iterations: r.iterations,
        })
        .collect();

    let result = results
        .into_iter()
        .nth(best)
        .expect("best index is in range");
    let split = instance.split_at(&result.point);
    let b = reconstruct(&result.point, &split.t);
    let distance = (a - &b).norm();
    let tol = FEASIBILITY_TOL * scale * scale;
    let check = verify_stability(&split.t, instance.region(), instance.mode(), tol)?;
    if !check.feasible {
        return Err(SolveError::Infeasible {
            margin: check.margin,
        });
    }

    Ok(SolveOutcome {
        eigenvalues: diagonal_eigenvalues(&split.t, instance.mode()),
        b,
        t: split.t,
        q: result.point,
        distance,
        objective: result.value,
        grad_norm: result.grad_norm,
        objective_trace: result.trace,
        init_label: starts[best].label.clone(),
        start_index: best,
        status: result.status,
        iterations: result.iterations,
        mode: instance.mode(),
        starts: summaries,
        seconds: clock.elapsed().as_secs_f64(),
    })
}

/// `Q T Q*`.
pub fn reconstruct<T: Entry>(q: &OrthogonalPoint<T>, t: &DMatrix<T>) -> DMatrix<T> {
    q.matrix() * t * q.matrix().adjoint()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityCheck {
    pub feasible: bool,
    /// Worst violation; negative when strictly inside the region.
    pub margin: f64,
}

/// Certifies that the diagonal (blocks) of `T` lie in Ω.
pub fn verify_stability<T: Entry>(
    t: &DMatrix<T>,
    region: &RegionSpec,
    mode: Mode,
    tol: f64,
) -> Result<StabilityCheck, SolveError> {
    let n = t.nrows();
    for j in 0..n {
        for i in j + 1..n {
            let below = match mode {
                Mode::RealBlock => block_of(i) > block_of(j),
                _ => true,
            };
            let magnitude = t[(i, j)].modulus();
            if below && magnitude > tol {
                return Err(SolveError::PatternViolation {
                    mode,
                    row: i,
                    col: j,
                    magnitude,
                });
            }
        }
    }

    let mut margin = f64::NEG_INFINITY;
    match mode {
        Mode::ComplexTriangular | Mode::RealTriangular => {
            for i in 0..n {
                margin = margin.max(region.violation(t[(i, i)].to_c64()));
            }
        }
        Mode::RealBlock => {
            let re = |i: usize, j: usize| t[(i, j)].to_c64().re;
            for k in (0..n.saturating_sub(1)).step_by(2) {
                let trace = re(k, k) + re(k + 1, k + 1);
                let det = re(k, k) * re(k + 1, k + 1) - re(k, k + 1) * re(k + 1, k);
                let v = match region.kind() {
                    RegionKind::WholePlane => f64::NEG_INFINITY,
                    _ => trace.max(-det),
                };
                margin = margin.max(v);
            }
            if n % 2 == 1 {
                margin = margin.max(region.violation(Complex64::new(re(n - 1, n - 1), 0.0)));
            }
        }
    }
    Ok(StabilityCheck {
        feasible: margin <= tol,
        margin,
    })
}

/// Starting points: identity, a Schur-form warm start, then Haar-random
/// matrices drawn from `seed`.
pub fn initial_points<T: Entry>(
    a: &DMatrix<T>,
    mode: Mode,
    n_starts: usize,
    seed: u64,
) -> Vec<InitialPoint<T>> {
    initial_points_with(a, mode, n_starts, seed, &SolveConfig::default())
}

fn initial_points_with<T: Entry>(
    a: &DMatrix<T>,
    mode: Mode,
    n_starts: usize,
    seed: u64,
    config: &SolveConfig,
) -> Vec<InitialPoint<T>> {
    let n = a.nrows();
    let mut points = Vec::with_capacity(n_starts);
    if n_starts == 0 {
        return points;
    }
    points.push(InitialPoint {
        label: "identity".to_string(),
        point: OrthogonalPoint::identity(n),
    });
    if n_starts >= 2 {
        points.push(InitialPoint {
            label: "schur-warm-start".to_string(),
            point: schur_warm_start(a, mode, config),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 2..n_starts {
        points.push(InitialPoint {
            label: format!("haar-{}", k - 1),
            point: haar_random(n, &mut rng),
        });
    }
    points
}

/// Runs the optimizer with Ω = ℂ (no eigenvalue constraint), which only asks
/// for a (block) upper triangular `Q*AQ`.
fn schur_warm_start<T: Entry>(
    a: &DMatrix<T>,
    mode: Mode,
    config: &SolveConfig,
) -> OrthogonalPoint<T> {
    let n = a.nrows();
    let region = match mode {
        Mode::RealTriangular => RegionSpec::real_line(),
        Mode::ComplexTriangular | Mode::RealBlock => RegionSpec::whole_plane(),
    };
    let Ok(instance) = ProblemInstance::new(a.clone(), region, mode) else {
        return OrthogonalPoint::identity(n);
    };
    let mut opts = config.optimizer.clone();
    opts.max_iterations = config.prerun_iterations.unwrap_or(5 * n);
    opts.grad_tolerance *= a.norm().max(1.0);
    trust_region_minimize(&instance, &OrthogonalPoint::identity(n), &opts).point
}

/// Haar-distributed orthogonal (unitary) matrix.
pub fn haar_random<T: Entry, R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> OrthogonalPoint<T> {
    // Row-major fill keeps the stream order independent of storage layout.
    let mut z = DMatrix::<T>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            z[(i, j)] = T::sample_normal(rng);
        }
    }
    OrthogonalPoint::from_matrix_unchecked(q_factor(z))
}

/// Unitary `U` with `U*BU` upper triangular, where `B = QTQᵀ` and `T` is in
/// modified real Schur form. Each diagonal 2×2 block is triangularized by a
/// unitary built from one of its eigenvectors.
pub fn complex_schur_basis(
    q: &OrthogonalPoint<f64>,
    t: &DMatrix<f64>,
) -> OrthogonalPoint<Complex64> {
    let n = t.nrows();
    let mut w = DMatrix::<Complex64>::identity(n, n);
    for k in (0..n.saturating_sub(1)).step_by(2) {
        let (a, b, c, d) = (t[(k, k)], t[(k, k + 1)], t[(k + 1, k)], t[(k + 1, k + 1)]);
        let block = crate::region::Block2x2::new(a, b, c, d);
        let lambda = crate::objective::block_eigenvalues(&block)[0];
        let v1 = [Complex64::new(b, 0.0), lambda - a];
        let v2 = [lambda - d, Complex64::new(c, 0.0)];
        let norm = |v: &[Complex64; 2]| (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        let (v, nv) = if norm(&v1) >= norm(&v2) {
            (v1, norm(&v1))
        } else {
            (v2, norm(&v2))
        };
        if nv == 0.0 {
            continue;
        }
        let v = [v[0] / nv, v[1] / nv];
        w[(k, k)] = v[0];
        w[(k + 1, k)] = v[1];
        w[(k, k + 1)] = -v[1].conj();
        w[(k + 1, k + 1)] = v[0].conj();
    }
    let u = embed_complex(q.matrix()) * w;
    OrthogonalPoint::new(u)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjectureReport {
    pub real_distance: f64,
    pub complex_distance: f64,
    /// `‖Im B‖_F` of the complex minimizer.
    pub imag_norm: f64,
}

/// Solves the Hurwitz problem for a real matrix over real and over complex
/// matrices. The complex solve additionally starts from the complex Schur
/// basis of the real minimizer, so it can never report a larger distance.
pub fn conjecture_probe(
    a: &DMatrix<f64>,
    config: &SolveConfig,
) -> Result<ConjectureReport, SolveError> {
    let region = RegionSpec::hurwitz();
    let real = nearest_stable(a, &region, Mode::RealBlock, config)?;

    let ac = embed_complex(a);
    let instance = ProblemInstance::new(ac.clone(), region, Mode::ComplexTriangular)?;
    let mut starts = initial_points_with(
        &ac,
        Mode::ComplexTriangular,
        config.n_starts,
        config.seed,
        config,
    );
    starts.push(InitialPoint {
        label: "real-minimizer".to_string(),
        point: complex_schur_basis(&real.q, &real.t),
    });
    let complex = solve_from(&instance, starts, config)?;
    let imag_norm = complex.b.map(|z| z.im).norm();
    Ok(ConjectureReport {
        real_distance: real.distance,
        complex_distance: complex.distance,
        imag_norm,
    })
}
