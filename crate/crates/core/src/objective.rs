//! Triangular and block-triangular splits and the objective they induce.
//!
//! For a rotated matrix `Â = Q*AQ` the split `Â = T + L` puts the nearest
//! Ω-stable (block) upper triangular matrix in `T` and the residual in `L`.
//! The objective `f(Q) = ‖L‖²_F` is the squared distance from `A` to the
//! nearest Ω-stable matrix whose (modified) Schur basis is `Q`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::manifold::{Objective, OrthogonalPoint, TangentVector};
use crate::region::{project_block, Block2x2, RegionSpec};
use crate::scalar::Entry;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObjectiveError {
    #[error("matrix is empty")]
    Empty,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("mode {mode:?} cannot be used with {field} entries")]
    FieldMismatch { mode: Mode, field: &'static str },
    #[error("region '{region}' is not supported in mode {mode:?}")]
    UnsupportedRegion { region: &'static str, mode: Mode },
}

/// Shape of the stabilized factor `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Complex upper triangular `T` (complex Schur form).
    ComplexTriangular,
    /// Real upper triangular `T`; requires Ω ⊆ ℝ.
    RealTriangular,
    /// Real `T` in modified real Schur form: 2×2 diagonal blocks with a
    /// trailing 1×1 block when n is odd.
    RealBlock,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::ComplexTriangular => "complex-triangular",
            Mode::RealTriangular => "real-triangular",
            Mode::RealBlock => "real-block",
        }
    }

    pub fn is_block(self) -> bool {
        self == Mode::RealBlock
    }
}

/// Block index of row/column `i` on the partition (0,1), (2,3), ….
#[inline]
pub(crate) fn block_of(i: usize) -> usize {
    i / 2
}

#[derive(Debug, Clone)]
pub struct ProblemInstance<T: Entry> {
    a: DMatrix<T>,
    region: RegionSpec,
    mode: Mode,
}

impl<T: Entry> ProblemInstance<T> {
    pub fn new(a: DMatrix<T>, region: RegionSpec, mode: Mode) -> Result<Self, ObjectiveError> {
        if a.is_empty() {
            return Err(ObjectiveError::Empty);
        }
        if !a.is_square() {
            return Err(ObjectiveError::NotSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        if a.iter().any(|x| !x.to_c64().is_finite()) {
            return Err(ObjectiveError::NonFinite);
        }
        check_mode::<T>(&region, mode)?;
        Ok(Self { a, region, mode })
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.a
    }

    pub fn region(&self) -> &RegionSpec {
        &self.region
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// The same matrix and mode with a different region.
    pub fn with_region(&self, region: RegionSpec) -> Result<Self, ObjectiveError> {
        check_mode::<T>(&region, self.mode)?;
        Ok(Self {
            a: self.a.clone(),
            region,
            mode: self.mode,
        })
    }

    /// `Q*AQ`.
    pub fn rotate(&self, q: &DMatrix<T>) -> DMatrix<T> {
        q.adjoint() * &self.a * q
    }

    pub fn split(&self, ahat: &DMatrix<T>) -> SplitResult<T> {
        match self.mode {
            Mode::ComplexTriangular | Mode::RealTriangular => split_triangular(ahat, &self.region),
            Mode::RealBlock => split_block_generic(ahat, &self.region)
                .expect("block support checked at construction"),
        }
    }

    pub fn split_at(&self, q: &OrthogonalPoint<T>) -> SplitResult<T> {
        self.split(&self.rotate(q.matrix()))
    }
}

pub(crate) fn check_mode<T: Entry>(region: &RegionSpec, mode: Mode) -> Result<(), ObjectiveError> {
    let field = if T::IS_COMPLEX { "complex" } else { "real" };
    match mode {
        Mode::ComplexTriangular if !T::IS_COMPLEX => {
            Err(ObjectiveError::FieldMismatch { mode, field })
        }
        Mode::RealTriangular | Mode::RealBlock if T::IS_COMPLEX => {
            Err(ObjectiveError::FieldMismatch { mode, field })
        }
        Mode::RealTriangular if !region.is_real_subset() => {
            Err(ObjectiveError::UnsupportedRegion {
                region: region.name(),
                mode,
            })
        }
        Mode::RealBlock if !region.supports_block_projection() => {
            Err(ObjectiveError::UnsupportedRegion {
                region: region.name(),
                mode,
            })
        }
        _ => Ok(()),
    }
}

/// `Â = T + L` in a fixed orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult<T: Entry> {
    pub t: DMatrix<T>,
    pub l: DMatrix<T>,
    pub frame: DMatrix<T>,
}

impl<T: Entry> SplitResult<T> {
    /// `‖L‖²_F`.
    pub fn residual_sq(&self) -> f64 {
        self.l.norm_squared()
    }
}

/// Keeps the strict upper triangle, projects the diagonal onto Ω.
pub fn split_triangular<T: Entry>(ahat: &DMatrix<T>, region: &RegionSpec) -> SplitResult<T> {
    let n = ahat.nrows();
    let mut t = ahat.upper_triangle();
    for i in 0..n {
        t[(i, i)] = T::from_c64(region.project(ahat[(i, i)].to_c64()));
    }
    let l = ahat - &t;
    SplitResult {
        t,
        l,
        frame: ahat.clone(),
    }
}

/// Block version on the 2×2 partition, for real matrices.
pub fn split_block(
    ahat: &DMatrix<f64>,
    region: &RegionSpec,
) -> Result<SplitResult<f64>, ObjectiveError> {
    split_block_generic(ahat, region)
}

fn split_block_generic<T: Entry>(
    ahat: &DMatrix<T>,
    region: &RegionSpec,
) -> Result<SplitResult<T>, ObjectiveError> {
    if !region.supports_block_projection() {
        return Err(ObjectiveError::UnsupportedRegion {
            region: region.name(),
            mode: Mode::RealBlock,
        });
    }
    let n = ahat.nrows();
    let mut t = DMatrix::<T>::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            if block_of(i) < block_of(j) {
                t[(i, j)] = ahat[(i, j)];
            }
        }
    }
    let re = |i: usize, j: usize| ahat[(i, j)].to_c64().re;
    for k in (0..n.saturating_sub(1)).step_by(2) {
        let block = Block2x2::new(re(k, k), re(k, k + 1), re(k + 1, k), re(k + 1, k + 1));
        let p = project_block(&block, region).expect("checked above");
        for (di, dj) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            t[(k + di, k + dj)] = T::from_real(p[(di, dj)]);
        }
    }
    if n % 2 == 1 {
        let last = n - 1;
        t[(last, last)] = T::from_real(region.project_real(re(last, last)));
    }
    let l = ahat - &t;
    Ok(SplitResult {
        t,
        l,
        frame: ahat.clone(),
    })
}

/// Generator `S = 2 skew(TL* − L*T)` of the Riemannian gradient `QS`.
pub fn gradient_generator<T: Entry>(split: &SplitResult<T>) -> DMatrix<T> {
    let lh = split.l.adjoint();
    let x = &split.t * &lh - &lh * &split.t;
    &x - x.adjoint()
}

impl<T: Entry> Objective<T> for ProblemInstance<T> {
    fn value(&self, q: &OrthogonalPoint<T>) -> f64 {
        self.split_at(q).residual_sq()
    }

    fn gradient(&self, q: &OrthogonalPoint<T>) -> TangentVector<T> {
        TangentVector::from_skew(gradient_generator(&self.split_at(q)))
    }

    fn value_and_gradient(&self, q: &OrthogonalPoint<T>) -> (f64, TangentVector<T>) {
        let split = self.split_at(q);
        (
            split.residual_sq(),
            TangentVector::from_skew(gradient_generator(&split)),
        )
    }
}

pub fn objective_value<T: Entry>(q: &OrthogonalPoint<T>, instance: &ProblemInstance<T>) -> f64 {
    instance.value(q)
}

pub fn riemannian_gradient<T: Entry>(
    q: &OrthogonalPoint<T>,
    instance: &ProblemInstance<T>,
) -> TangentVector<T> {
    instance.gradient(q)
}

/// Eigenvalues of a (block) triangular `T`, read off its diagonal blocks.
pub fn diagonal_eigenvalues<T: Entry>(t: &DMatrix<T>, mode: Mode) -> Vec<Complex64> {
    let n = t.nrows();
    match mode {
        Mode::ComplexTriangular | Mode::RealTriangular => {
            (0..n).map(|i| t[(i, i)].to_c64()).collect()
        }
        Mode::RealBlock => {
            let re = |i: usize, j: usize| t[(i, j)].to_c64().re;
            let mut out = Vec::with_capacity(n);
            for k in (0..n.saturating_sub(1)).step_by(2) {
                let block = Block2x2::new(re(k, k), re(k, k + 1), re(k + 1, k), re(k + 1, k + 1));
                out.extend(block_eigenvalues(&block));
            }
            if n % 2 == 1 {
                out.push(Complex64::new(re(n - 1, n - 1), 0.0));
            }
            out
        }
    }
}

/// Roots of `λ² − tr·λ + det`.
pub fn block_eigenvalues(b: &Block2x2) -> [Complex64; 2] {
    let half_tr = 0.5 * b.trace();
    let disc = half_tr * half_tr - b.determinant();
    if disc >= 0.0 {
        let r = disc.sqrt();
        // Avoid cancellation in the smaller root.
        let big = half_tr + half_tr.signum() * r;
        let det = b.determinant();
        let small = if big != 0.0 { det / big } else { half_tr - r };
        let (a, b) = if big >= small {
            (big, small)
        } else {
            (small, big)
        };
        [Complex64::new(a, 0.0), Complex64::new(b, 0.0)]
    } else {
        let r = (-disc).sqrt();
        [Complex64::new(half_tr, r), Complex64::new(half_tr, -r)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::retract;
    use crate::region::is_hurwitz_2x2;
    use crate::solver::haar_random;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random<T: Entry>(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<T> {
        DMatrix::from_fn(n, n, |_, _| T::sample_normal(rng))
    }

    fn rows(n: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(n, n, v)
    }

    // Central difference of t ↦ f(R_Q(tV)) against ⟨grad f(Q), V⟩.
    fn max_fd_error<T: Entry>(
        instance: &ProblemInstance<T>,
        q: &OrthogonalPoint<T>,
        seed: u64,
    ) -> f64 {
        let mut r = rng(seed);
        let n = instance.dim();
        let grad = instance.gradient(q);
        let h = 1e-5;
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let v = crate::manifold::tangent_project(q, &random::<T>(n, &mut r));
            let fd = (instance.value(&retract(q, &v, h)) - instance.value(&retract(q, &v, -h)))
                / (2.0 * h);
            let exact = grad.inner(&v);
            worst = worst.max((fd - exact).abs() / exact.abs().max(1e-8));
        }
        worst
    }

    #[test]
    fn triangular_split_example() {
        let ahat = rows(2, &[1.0, 5.0, 3.0, -2.0]);
        let s = split_triangular(&ahat, &RegionSpec::hurwitz());
        assert_eq!(s.t, rows(2, &[0.0, 5.0, 0.0, -2.0]));
        assert_eq!(s.l, rows(2, &[1.0, 0.0, 3.0, 0.0]));
        assert_eq!(s.residual_sq(), 10.0);
    }

    #[test]
    fn triangular_split_of_stable_upper_triangle_is_exact() {
        let ahat = rows(3, &[-1.0, 2.0, 3.0, 0.0, -0.5, 4.0, 0.0, 0.0, 0.0]);
        let s = split_triangular(&ahat, &RegionSpec::hurwitz());
        assert_eq!(s.t, ahat);
        assert_eq!(s.residual_sq(), 0.0);
    }

    #[test]
    fn real_line_split_counts_strict_lower_part() {
        let mut r = rng(1);
        let a = random::<f64>(6, &mut r);
        let q = haar_random::<f64, _>(6, &mut r);
        let ahat = q.matrix().transpose() * &a * q.matrix();
        let s = split_triangular(&ahat, &RegionSpec::real_line());
        let mut expected = 0.0;
        for j in 0..6 {
            for i in j + 1..6 {
                expected += ahat[(i, j)] * ahat[(i, j)];
            }
        }
        assert!((s.residual_sq() - expected).abs() < 1e-12 * expected);
        assert!((&s.t + &s.l - &ahat).amax() <= 4.0 * f64::EPSILON * ahat.amax());
    }

    #[test]
    fn block_split_examples() {
        let s = split_block(&rows(2, &[1.0, 2.0, 1.0, 1.0]), &RegionSpec::hurwitz()).unwrap();
        assert!((&s.t - rows(2, &[0.0, 2.0, 0.0, 0.0])).norm() < 1e-15);
        assert!((s.residual_sq() - 3.0).abs() < 1e-12);

        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -1.0, 5.0]));
        let s = split_block(&d, &RegionSpec::hurwitz()).unwrap();
        assert_eq!(
            s.t,
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -1.0, 0.0]))
        );
        assert_eq!(s.residual_sq(), 25.0);

        let ahat = rows(
            4,
            &[
                -1.0, 2.0, 3.0, 4.0, //
                -3.0, -1.0, 5.0, 6.0, //
                0.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, 0.0, 0.0,
            ],
        );
        let s = split_block(&ahat, &RegionSpec::hurwitz()).unwrap();
        assert_eq!(s.residual_sq(), 0.0);
        assert_eq!(s.t, ahat);
    }

    #[test]
    fn block_split_rejects_unsupported_region() {
        let err = split_block(&DMatrix::identity(2, 2), &RegionSpec::schur()).unwrap_err();
        assert!(matches!(err, ObjectiveError::UnsupportedRegion { .. }));
    }

    #[test]
    fn block_split_structure() {
        let mut r = rng(2);
        for n in [1, 2, 5, 6] {
            let ahat = random::<f64>(n, &mut r);
            let s = split_block(&ahat, &RegionSpec::hurwitz()).unwrap();
            assert!((&s.t + &s.l - &ahat).amax() <= 4.0 * f64::EPSILON * ahat.amax());
            for i in 0..n {
                for j in 0..n {
                    if block_of(i) > block_of(j) {
                        assert_eq!(s.t[(i, j)], 0.0);
                    }
                    if block_of(i) < block_of(j) {
                        assert_eq!(s.l[(i, j)], 0.0);
                    }
                }
            }
            for k in (0..n.saturating_sub(1)).step_by(2) {
                let b = s.t.fixed_view::<2, 2>(k, k).into_owned();
                assert!(is_hurwitz_2x2(&b, 1e-12));
            }
            if n % 2 == 1 {
                assert!(s.t[(n - 1, n - 1)] <= 0.0);
            }
        }
    }

    #[test]
    fn instance_validation() {
        let a = DMatrix::<f64>::identity(3, 3);
        assert!(matches!(
            ProblemInstance::new(a.clone(), RegionSpec::hurwitz(), Mode::RealTriangular),
            Err(ObjectiveError::UnsupportedRegion { .. })
        ));
        assert!(matches!(
            ProblemInstance::new(a.clone(), RegionSpec::schur(), Mode::RealBlock),
            Err(ObjectiveError::UnsupportedRegion { .. })
        ));
        assert!(matches!(
            ProblemInstance::new(a.clone(), RegionSpec::hurwitz(), Mode::ComplexTriangular),
            Err(ObjectiveError::FieldMismatch { .. })
        ));
        let c = crate::scalar::embed_complex(&a);
        assert!(matches!(
            ProblemInstance::new(c, RegionSpec::hurwitz(), Mode::RealBlock),
            Err(ObjectiveError::FieldMismatch { .. })
        ));
        assert!(matches!(
            ProblemInstance::new(
                DMatrix::<f64>::zeros(2, 3),
                RegionSpec::hurwitz(),
                Mode::RealBlock
            ),
            Err(ObjectiveError::NotSquare { .. })
        ));
        assert!(matches!(
            ProblemInstance::new(
                DMatrix::<f64>::zeros(0, 0),
                RegionSpec::hurwitz(),
                Mode::RealBlock
            ),
            Err(ObjectiveError::Empty)
        ));
        let mut bad = a.clone();
        bad[(0, 1)] = f64::NAN;
        assert!(matches!(
            ProblemInstance::new(bad, RegionSpec::hurwitz(), Mode::RealBlock),
            Err(ObjectiveError::NonFinite)
        ));
        let custom = RegionSpec::custom(|z| Complex64::new(z.re, 0.0), true);
        assert!(ProblemInstance::new(a, custom, Mode::RealTriangular).is_ok());
    }

    #[test]
    fn objective_at_identity_matches_example() {
        let inst = ProblemInstance::new(
            rows(2, &[1.0, 2.0, 1.0, 1.0]),
            RegionSpec::hurwitz(),
            Mode::RealBlock,
        )
        .unwrap();
        assert!((objective_value(&OrthogonalPoint::identity(2), &inst) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn objective_vanishes_with_gradient_on_stable_input() {
        let mut r = rng(3);
        let n = 6;
        let q = haar_random::<f64, _>(n, &mut r);
        // Stable modified real Schur form: Hurwitz 2×2 blocks, free upper part.
        let mut t = random::<f64>(n, &mut r);
        for j in 0..n {
            for i in 0..n {
                if block_of(i) > block_of(j) {
                    t[(i, j)] = 0.0;
                }
            }
        }
        for k in (0..n).step_by(2) {
            let b = t.fixed_view::<2, 2>(k, k).into_owned();
            let p = crate::region::project_block_hurwitz(&b);
            t.fixed_view_mut::<2, 2>(k, k).copy_from(&p);
        }
        let a = q.matrix() * &t * q.matrix().transpose();
        let inst = ProblemInstance::new(a, RegionSpec::hurwitz(), Mode::RealBlock).unwrap();
        assert!(inst.value(&q) < 1e-24);
        assert!(inst.gradient(&q).norm() < 1e-11);
    }

    #[test]
    fn objective_equals_reconstruction_distance() {
        let mut r = rng(4);
        for (n, mode) in [(5, Mode::RealBlock), (6, Mode::RealBlock)] {
            let a = random::<f64>(n, &mut r);
            let q = haar_random::<f64, _>(n, &mut r);
            let inst = ProblemInstance::new(a.clone(), RegionSpec::hurwitz(), mode).unwrap();
            let s = inst.split_at(&q);
            let b = q.matrix() * &s.t * q.matrix().transpose();
            let direct = (&a - b).norm_squared();
            assert!((inst.value(&q) - direct).abs() <= 1e-12 * a.norm_squared());
        }
        let a = random::<Complex64>(5, &mut r);
        let q = haar_random::<Complex64, _>(5, &mut r);
        let inst =
            ProblemInstance::new(a.clone(), RegionSpec::schur(), Mode::ComplexTriangular).unwrap();
        let s = inst.split_at(&q);
        let b = q.matrix() * &s.t * q.matrix().adjoint();
        assert!((inst.value(&q) - (&a - b).norm_squared()).abs() <= 1e-12 * a.norm_squared());
    }

    #[test]
    fn real_block_gradient_matches_finite_differences() {
        let mut r = rng(5);
        let a = random::<f64>(8, &mut r);
        let q = haar_random::<f64, _>(8, &mut r);
        let inst = ProblemInstance::new(a, RegionSpec::hurwitz(), Mode::RealBlock).unwrap();
        assert!(max_fd_error(&inst, &q, 6) <= 1e-6);
    }

    #[test]
    fn complex_gradient_matches_finite_differences() {
        let mut r = rng(7);
        let a = random::<Complex64>(6, &mut r) * Complex64::new(2.0, 0.0);
        let q = haar_random::<Complex64, _>(6, &mut r);
        let inst = ProblemInstance::new(a, RegionSpec::schur(), Mode::ComplexTriangular).unwrap();
        assert!(max_fd_error(&inst, &q, 8) <= 1e-6);
    }

    #[test]
    fn real_triangular_gradient_matches_finite_differences() {
        let mut r = rng(9);
        let a = random::<f64>(7, &mut r);
        let q = haar_random::<f64, _>(7, &mut r);
        let inst = ProblemInstance::new(a, RegionSpec::real_line(), Mode::RealTriangular).unwrap();
        assert!(max_fd_error(&inst, &q, 10) <= 1e-6);
    }

    #[test]
    fn gradient_generator_is_skew_and_commutator_is_upper() {
        let mut r = rng(11);
        let a = random::<f64>(7, &mut r);
        let q = haar_random::<f64, _>(7, &mut r);
        let inst = ProblemInstance::new(a, RegionSpec::hurwitz(), Mode::RealBlock).unwrap();
        let s = inst.split_at(&q);
        let x = &s.t * s.l.transpose() - s.l.transpose() * &s.t;
        for i in 0..7 {
            for j in 0..7 {
                if block_of(i) >= block_of(j) {
                    assert!(x[(i, j)].abs() < 1e-12, "({i},{j}) = {}", x[(i, j)]);
                }
            }
        }
        let g = gradient_generator(&s);
        assert_eq!(&g + g.transpose(), DMatrix::zeros(7, 7));

        let a = random::<Complex64>(5, &mut r);
        let q = haar_random::<Complex64, _>(5, &mut r);
        let inst = ProblemInstance::new(a, RegionSpec::hurwitz(), Mode::ComplexTriangular).unwrap();
        let s = inst.split_at(&q);
        let x = &s.t * s.l.adjoint() - s.l.adjoint() * &s.t;
        for i in 0..5 {
            for j in 0..=i {
                assert!(x[(i, j)].norm() < 1e-12);
            }
        }
        let g = gradient_generator(&s);
        assert_eq!(&g + g.adjoint(), DMatrix::zeros(5, 5));
    }

    #[test]
    fn commutator_matches_entrywise_formula_real() {
        let mut r = rng(12);
        let n = 10;
        let ahat = random::<f64>(n, &mut r);
        let s = split_triangular(&ahat, &RegionSpec::real_line());
        let x = &s.t * s.l.transpose() - s.l.transpose() * &s.t;
        for i in 0..n {
            for j in i + 1..n {
                let first: f64 = (i..j).map(|k| ahat[(i, k)] * ahat[(j, k)]).sum();
                let second: f64 = (i + 1..=j).map(|k| ahat[(k, i)] * ahat[(k, j)]).sum();
                assert!((x[(i, j)] - (first - second)).abs() < 1e-13 * ahat.norm_squared());
            }
        }
    }

    #[test]
    fn commutator_matches_entrywise_formula_complex() {
        let mut r = rng(13);
        let n = 10;
        let ahat = random::<Complex64>(n, &mut r);
        let s = split_triangular(&ahat, &RegionSpec::schur());
        let (t, l) = (&s.t, &s.l);
        let x = t * l.adjoint() - l.adjoint() * t;
        for i in 0..n {
            for j in i + 1..n {
                let mut e = t[(i, i)] * ahat[(j, i)].conj() + ahat[(i, j)] * l[(j, j)].conj()
                    - l[(i, i)].conj() * ahat[(i, j)]
                    - ahat[(j, i)].conj() * t[(j, j)];
                for k in i + 1..j {
                    e += ahat[(i, k)] * ahat[(j, k)].conj() - ahat[(k, i)].conj() * ahat[(k, j)];
                }
                assert!((x[(i, j)] - e).norm() < 1e-13 * ahat.norm_squared());
            }
        }
    }

    #[test]
    fn complex_objective_is_invariant_under_diagonal_phases() {
        let mut r = rng(14);
        let n = 5;
        let a = random::<Complex64>(n, &mut r);
        let q = haar_random::<Complex64, _>(n, &mut r);
        let phases = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |i, _| {
            Complex64::from_polar(1.0, 0.7 * i as f64 + 0.3)
        }));
        let qd = OrthogonalPoint::from_matrix_unchecked(q.matrix() * phases);
        for region in [RegionSpec::hurwitz(), RegionSpec::schur()] {
            let inst = ProblemInstance::new(a.clone(), region, Mode::ComplexTriangular).unwrap();
            assert!((inst.value(&q) - inst.value(&qd)).abs() < 1e-12 * a.norm_squared());
        }
    }

    #[test]
    fn block_eigenvalues_from_trace_and_det() {
        let e = block_eigenvalues(&Block2x2::new(0.0, 2.0, 0.0, 0.0));
        assert_eq!(e, [Complex64::new(0.0, 0.0); 2]);
        let e = block_eigenvalues(&Block2x2::new(-1.0, 2.0, -2.0, -1.0));
        assert!((e[0] - Complex64::new(-1.0, 2.0)).norm() < 1e-15);
        assert!((e[1] - Complex64::new(-1.0, -2.0)).norm() < 1e-15);
        let e = block_eigenvalues(&Block2x2::new(1.0, 2.0, 1.0, 1.0));
        assert!((e[0].re - (1.0 + 2f64.sqrt())).abs() < 1e-15);
        assert!((e[1].re - (1.0 - 2f64.sqrt())).abs() < 1e-15);
    }
}
