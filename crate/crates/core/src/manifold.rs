//! Optimization over the orthogonal group O(n) and the unitary group U(n).
//!
//! Tangent vectors at `Q` are stored through their skew-symmetric
//! (skew-Hermitian) generator `S`, the ambient vector being `QS`. With the
//! embedded metric `⟨QS, QS'⟩ = Re tr(S*S')` all inner products can be taken
//! directly on generators.

use std::time::Instant;

use nalgebra::DMatrix;

use crate::scalar::{inner, skew, Entry};

/// Orthogonality drift tolerated per `√n` before re-orthonormalizing.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

/// Real orthogonal or complex unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalPoint<T: Entry> {
    q: DMatrix<T>,
}

impl<T: Entry> OrthogonalPoint<T> {
    pub fn identity(n: usize) -> Self {
        Self {
            q: DMatrix::identity(n, n),
        }
    }

    /// Wraps `q`, re-orthonormalizing it when `‖Q*Q − I‖_F > 1e-10·√n`.
    pub fn new(q: DMatrix<T>) -> Self {
        let p = Self { q };
        if p.orthogonality_error() > ORTHOGONALITY_TOL * (p.dim() as f64).sqrt() {
            p.reorthonormalized()
        } else {
            p
        }
    }

    pub fn from_matrix_unchecked(q: DMatrix<T>) -> Self {
        Self { q }
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.q
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    /// `‖Q*Q − I‖_F`.
    pub fn orthogonality_error(&self) -> f64 {
        let n = self.dim();
        (self.q.adjoint() * &self.q - DMatrix::<T>::identity(n, n)).norm()
    }

    pub fn reorthonormalized(&self) -> Self {
        Self {
            q: q_factor(self.q.clone()),
        }
    }

    /// Ambient representation `QS` of a tangent vector.
    pub fn ambient(&self, v: &TangentVector<T>) -> DMatrix<T> {
        &self.q * &v.s
    }
}

/// Q factor of a QR factorization with the diagonal of R real and positive.
pub fn q_factor<T: Entry>(m: DMatrix<T>) -> DMatrix<T> {
    let qr = m.qr();
    let r_diag = qr.r().diagonal();
    let mut q = qr.q();
    for (j, rjj) in r_diag.iter().enumerate() {
        let modulus = rjj.modulus();
        if modulus > 0.0 {
            let phase = rjj.scale(modulus.recip());
            for x in q.column_mut(j).iter_mut() {
                *x *= phase;
            }
        }
    }
    q
}

/// Tangent vector `QS` represented by its generator `S = −S*`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector<T: Entry> {
    s: DMatrix<T>,
}

impl<T: Entry> TangentVector<T> {
    /// Takes `s` as given; callers guarantee skew-symmetry.
    pub fn from_skew(s: DMatrix<T>) -> Self {
        Self { s }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            s: DMatrix::zeros(n, n),
        }
    }

    pub fn generator(&self) -> &DMatrix<T> {
        &self.s
    }

    pub fn into_generator(self) -> DMatrix<T> {
        self.s
    }

    pub fn norm(&self) -> f64 {
        self.s.norm()
    }

    pub fn inner(&self, other: &Self) -> f64 {
        inner(&self.s, &other.s)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            s: &self.s * T::from_real(alpha),
        }
    }

    /// `self + alpha·other`.
    pub fn axpy(&self, alpha: f64, other: &Self) -> Self {
        Self {
            s: &self.s + &other.s * T::from_real(alpha),
        }
    }
}

/// Orthogonal projection of an ambient matrix onto `T_Q`: `S = skew(Q*M)`.
pub fn tangent_project<T: Entry>(q: &OrthogonalPoint<T>, m: &DMatrix<T>) -> TangentVector<T> {
    TangentVector {
        s: skew(&(q.q.adjoint() * m)),
    }
}

/// QR retraction `qf(Q + t·QS)`.
pub fn retract<T: Entry>(
    q: &OrthogonalPoint<T>,
    v: &TangentVector<T>,
    step: f64,
) -> OrthogonalPoint<T> {
    if step == 0.0 {
        return q.clone();
    }
    let moved = &q.q + &q.q * &v.s * T::from_real(step);
    OrthogonalPoint { q: q_factor(moved) }
}

/// A cost function on O(n) or U(n) with its Riemannian gradient.
pub trait Objective<T: Entry> {
    fn value(&self, q: &OrthogonalPoint<T>) -> f64;

    fn gradient(&self, q: &OrthogonalPoint<T>) -> TangentVector<T>;

    fn value_and_gradient(&self, q: &OrthogonalPoint<T>) -> (f64, TangentVector<T>) {
        (self.value(q), self.gradient(q))
    }
}

/// Adapter turning a pair of closures into an [`Objective`].
pub struct FnObjective<F, G> {
    pub value: F,
    pub gradient: G,
}

impl<T, F, G> Objective<T> for FnObjective<F, G>
where
    T: Entry,
    F: Fn(&OrthogonalPoint<T>) -> f64,
    G: Fn(&OrthogonalPoint<T>) -> TangentVector<T>,
{
    fn value(&self, q: &OrthogonalPoint<T>) -> f64 {
        (self.value)(q)
    }

    fn gradient(&self, q: &OrthogonalPoint<T>) -> TangentVector<T> {
        (self.gradient)(q)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerOptions {
    pub max_iterations: usize,
    /// Stop once `‖grad f‖_F` drops to this value.
    pub grad_tolerance: f64,
    pub initial_tr_radius: f64,
    /// Defaults to `√n` when unset.
    pub max_tr_radius: Option<f64>,
    /// Radius below which the trust-region loop gives up.
    pub min_tr_radius: f64,
    /// Defaults to the manifold dimension when unset.
    pub tcg_max_inner: Option<usize>,
    /// Finite-difference step for Hessian-vector products, relative to the
    /// length of the direction.
    pub fd_step: f64,
    pub armijo_c1: f64,
    pub backtrack_factor: f64,
    pub max_backtracks: usize,
    pub verbosity: u8,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            grad_tolerance: 1e-8,
            initial_tr_radius: 1.0,
            max_tr_radius: None,
            min_tr_radius: 1e-14,
            tcg_max_inner: None,
            fd_step: 1e-7,
            armijo_c1: 1e-4,
            backtrack_factor: 0.5,
            max_backtracks: 60,
            verbosity: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Converged,
    IterationLimit,
    LineSearchFailure,
}

/// One accepted iterate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub value: f64,
    pub grad_norm: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct OptimizeResult<T: Entry> {
    pub point: OrthogonalPoint<T>,
    pub value: f64,
    pub grad_norm: f64,
    pub status: Status,
    pub iterations: usize,
    pub trace: Vec<TraceEntry>,
    pub value_evals: usize,
    pub gradient_evals: usize,
}

struct Counted<'a, T: Entry, O: Objective<T> + ?Sized> {
    inner: &'a O,
    values: usize,
    gradients: usize,
    _marker: std::marker::PhantomData<T>,
}

impl<'a, T: Entry, O: Objective<T> + ?Sized> Counted<'a, T, O> {
    fn new(inner: &'a O) -> Self {
        Self {
            inner,
            values: 0,
            gradients: 0,
            _marker: std::marker::PhantomData,
        }
    }

    fn value(&mut self, q: &OrthogonalPoint<T>) -> f64 {
        self.values += 1;
        self.inner.value(q)
    }

    fn gradient(&mut self, q: &OrthogonalPoint<T>) -> TangentVector<T> {
        self.gradients += 1;
        self.inner.gradient(q)
    }

    fn both(&mut self, q: &OrthogonalPoint<T>) -> (f64, TangentVector<T>) {
        self.values += 1;
        self.gradients += 1;
        self.inner.value_and_gradient(q)
    }
}

/// Riemannian steepest descent with Armijo backtracking.
pub fn gradient_descent_minimize<T: Entry, O: Objective<T> + ?Sized>(
    objective: &O,
    q0: &OrthogonalPoint<T>,
    opts: &OptimizerOptions,
) -> OptimizeResult<T> {
    let start = Instant::now();
    let mut f = Counted::new(objective);
    let mut q = q0.clone();
    let (mut value, mut grad) = f.both(&q);
    let mut grad_norm = grad.norm();
    let mut trace = vec![TraceEntry {
        iteration: 0,
        value,
        grad_norm,
        seconds: start.elapsed().as_secs_f64(),
    }];
    let mut status = Status::IterationLimit;
    let mut step = 1.0;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        if grad_norm <= opts.grad_tolerance {
            status = Status::Converged;
            break;
        }
        iterations += 1;
        let slope = -grad_norm * grad_norm;
        let direction = grad.scaled(-1.0);
        let mut t = step;
        let mut accepted = None;
        for _ in 0..=opts.max_backtracks {
            let candidate = retract(&q, &direction, t);
            let cand_value = f.value(&candidate);
            if cand_value <= value + opts.armijo_c1 * t * slope {
                accepted = Some((candidate, cand_value));
                break;
            }
            t *= opts.backtrack_factor;
        }
        let Some((next, next_value)) = accepted else {
            status = Status::LineSearchFailure;
            break;
        };
        q = next;
        value = next_value;
        grad = f.gradient(&q);
        grad_norm = grad.norm();
        trace.push(TraceEntry {
            iteration: iterations,
            value,
            grad_norm,
            seconds: start.elapsed().as_secs_f64(),
        });
        if opts.verbosity > 1 {
            eprintln!("gd {iterations:5} f={value:.12e} |g|={grad_norm:.3e} t={t:.2e}");
        }
        step = (t / opts.backtrack_factor).min(1e3);
    }
    if status == Status::IterationLimit && grad_norm <= opts.grad_tolerance {
        status = Status::Converged;
    }

    OptimizeResult {
        point: q,
        value,
        grad_norm,
        status,
        iterations,
        trace,
        value_evals: f.values,
        gradient_evals: f.gradients,
    }
}

struct TcgOutcome<T: Entry> {
    eta: TangentVector<T>,
    h_eta: TangentVector<T>,
    on_boundary: bool,
}

/// Riemannian trust-region method with truncated-CG inner solves and
/// finite-difference Hessian-vector products.
pub fn trust_region_minimize<T: Entry, O: Objective<T> + ?Sized>(
    objective: &O,
    q0: &OrthogonalPoint<T>,
    opts: &OptimizerOptions,
) -> OptimizeResult<T> {
    let start = Instant::now();
    let n = q0.dim();
    let manifold_dim = if T::IS_COMPLEX {
        n * n
    } else {
        n * (n - 1) / 2
    };
    let max_radius = opts.max_tr_radius.unwrap_or((n as f64).sqrt());
    let max_inner = opts.tcg_max_inner.unwrap_or(manifold_dim).max(1);
    let mut radius = opts.initial_tr_radius.min(max_radius);

    let mut f = Counted::new(objective);
    let mut q = q0.clone();
    let (mut value, mut grad) = f.both(&q);
    let mut grad_norm = grad.norm();
    let mut trace = vec![TraceEntry {
        iteration: 0,
        value,
        grad_norm,
        seconds: start.elapsed().as_secs_f64(),
    }];
    let mut status = Status::IterationLimit;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        if grad_norm <= opts.grad_tolerance {
            status = Status::Converged;
            break;
        }
        if radius < opts.min_tr_radius {
            break;
        }
        iterations += 1;

        let tcg = truncated_cg(&mut f, &q, &grad, radius, max_inner, opts.fd_step);
        let candidate = retract(&q, &tcg.eta, 1.0);
        let cand_value = f.value(&candidate);

        let model_decrease = -(grad.inner(&tcg.eta) + 0.5 * tcg.h_eta.inner(&tcg.eta));
        // Keeps ρ meaningful once both decreases approach rounding level.
        let regularization = value.abs().max(1.0) * f64::EPSILON * 1e3;
        let rho = (value - cand_value + regularization) / (model_decrease + regularization);
        let rho = if rho.is_finite() && model_decrease >= 0.0 {
            rho
        } else {
            f64::NEG_INFINITY
        };

        if rho < 0.25 {
            radius *= 0.25;
        } else if rho > 0.75 && tcg.on_boundary {
            radius = (2.0 * radius).min(max_radius);
        }

        let accept = rho > 0.1 && cand_value <= value;
        if accept {
            q = candidate;
            value = cand_value;
            grad = f.gradient(&q);
            grad_norm = grad.norm();
            trace.push(TraceEntry {
                iteration: iterations,
                value,
                grad_norm,
                seconds: start.elapsed().as_secs_f64(),
            });
        }
        if opts.verbosity > 1 {
            eprintln!(
                "tr {iterations:5} {} f={value:.12e} |g|={grad_norm:.3e} rho={rho:.3} radius={radius:.3e}",
                if accept { "acc" } else { "REJ" }
            );
        }
    }
    if status == Status::IterationLimit && grad_norm <= opts.grad_tolerance {
        status = Status::Converged;
    }

    OptimizeResult {
        point: q,
        value,
        grad_norm,
        status,
        iterations,
        trace,
        value_evals: f.values,
        gradient_evals: f.gradients,
    }
}

/// `H[v] ≈ (P_Q grad f(R_Q(hv)) − grad f(Q)) / h`.
fn hessian_fd<T: Entry, O: Objective<T> + ?Sized>(
    f: &mut Counted<'_, T, O>,
    q: &OrthogonalPoint<T>,
    grad: &TangentVector<T>,
    v: &TangentVector<T>,
    fd_step: f64,
) -> TangentVector<T> {
    let norm = v.norm();
    if norm == 0.0 {
        return TangentVector::zeros(q.dim());
    }
    let scale = q.matrix().norm();
    let h = fd_step * (1.0 + scale) / norm.max(f64::EPSILON);
    let moved = retract(q, v, h);
    let g_moved = f.gradient(&moved);
    let transported = tangent_project(q, &moved.ambient(&g_moved));
    transported.axpy(-1.0, grad).scaled(h.recip())
}

fn truncated_cg<T: Entry, O: Objective<T> + ?Sized>(
    f: &mut Counted<'_, T, O>,
    q: &OrthogonalPoint<T>,
    grad: &TangentVector<T>,
    radius: f64,
    max_inner: usize,
    fd_step: f64,
) -> TcgOutcome<T> {
    const THETA: f64 = 1.0;
    const KAPPA: f64 = 0.1;

    let n = q.dim();
    let mut eta = TangentVector::zeros(n);
    let mut h_eta = TangentVector::zeros(n);
    let mut r = grad.clone();
    let mut r_r = r.inner(&r);
    let r0 = r_r.sqrt();
    let mut delta = r.scaled(-1.0);
    let mut eta_eta = 0.0;
    let mut eta_delta = 0.0;
    let mut delta_delta = r_r;

    for _ in 0..max_inner {
        let h_delta = hessian_fd(f, q, grad, &delta, fd_step);
        let d_hd = delta.inner(&h_delta);
        let alpha = r_r / d_hd;
        let eta_eta_next = eta_eta + 2.0 * alpha * eta_delta + alpha * alpha * delta_delta;

        if d_hd <= 0.0 || !alpha.is_finite() || eta_eta_next >= radius * radius {
            // Step to the boundary along delta.
            let tau = (-eta_delta
                + (eta_delta * eta_delta + delta_delta * (radius * radius - eta_eta))
                    .max(0.0)
                    .sqrt())
                / delta_delta;
            eta = eta.axpy(tau, &delta);
            h_eta = h_eta.axpy(tau, &h_delta);
            return TcgOutcome {
                eta,
                h_eta,
                on_boundary: true,
            };
        }

        eta_eta = eta_eta_next;
        eta = eta.axpy(alpha, &delta);
        h_eta = h_eta.axpy(alpha, &h_delta);
        r = r.axpy(alpha, &h_delta);
        let r_r_next = r.inner(&r);
        let r_norm = r_r_next.sqrt();
        if r_norm <= r0 * r0.powf(THETA).min(KAPPA) {
            break;
        }
        let beta = r_r_next / r_r;
        r_r = r_r_next;
        delta = r.scaled(-1.0).axpy(beta, &delta);
        eta_delta = beta * (eta_delta + alpha * delta_delta);
        delta_delta = r_r + beta * beta * delta_delta;
    }
    TcgOutcome {
        eta,
        h_eta,
        on_boundary: false,
    }
}
