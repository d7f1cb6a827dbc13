//! Closed eigenvalue regions and projections onto them.
//!
//! A [`RegionSpec`] describes a closed set Ω ⊆ ℂ through its nearest-point map.
//! For real problems whose region is not contained in the real line, the
//! nearest Hurwitz-stable 2×2 real matrix is computed in closed form by
//! [`project_block_hurwitz`], which scans a five-element candidate set.

use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix2;
use num_complex::Complex64;
use thiserror::Error;

/// Real 2×2 block.
pub type Block2x2 = Matrix2<f64>;

/// Relative tolerance used when testing candidate blocks for stability.
pub const BLOCK_STABILITY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegionError {
    #[error("target diagonal value {target} lies outside [{lo}, {hi}]")]
    InfeasibleTarget { target: f64, lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionKind {
    /// Closed left half-plane, Re z ≤ 0.
    HurwitzHalfPlane,
    /// Closed unit disk, |z| ≤ 1.
    SchurUnitDisk,
    /// The real axis.
    RealLine,
    /// All of ℂ. Every matrix is stable; used to drive the optimizer towards a
    /// plain (block) Schur form.
    WholePlane,
    /// User supplied scalar projection.
    CustomScalar,
}

type ScalarMap = dyn Fn(Complex64) -> Complex64 + Send + Sync;

/// A closed region Ω ⊆ ℂ together with its projection.
///
/// Custom projections must be deterministic: points on the medial axis of a
/// nonconvex region have several nearest points and the map has to pick one
/// consistently.
#[derive(Clone)]
pub struct RegionSpec {
    kind: RegionKind,
    custom: Option<Arc<ScalarMap>>,
    custom_is_real: bool,
}

impl fmt::Debug for RegionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RegionSpec")
            .field("kind", &self.kind)
            .field("custom_is_real", &self.custom_is_real)
            .finish()
    }
}

impl RegionSpec {
    pub fn hurwitz() -> Self {
        Self::builtin(RegionKind::HurwitzHalfPlane)
    }

    pub fn schur() -> Self {
        Self::builtin(RegionKind::SchurUnitDisk)
    }

    pub fn real_line() -> Self {
        Self::builtin(RegionKind::RealLine)
    }

    pub fn whole_plane() -> Self {
        Self::builtin(RegionKind::WholePlane)
    }

    /// A region given by its projection. `subset_of_real_line` declares that
    /// the projection always returns real numbers, which makes the region
    /// usable with real triangular problems.
    pub fn custom<F>(projection: F, subset_of_real_line: bool) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            kind: RegionKind::CustomScalar,
            custom: Some(Arc::new(projection)),
            custom_is_real: subset_of_real_line,
        }
    }

    fn builtin(kind: RegionKind) -> Self {
        Self {
            kind,
            custom: None,
            custom_is_real: false,
        }
    }

    pub fn kind(&self) -> RegionKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            RegionKind::HurwitzHalfPlane => "hurwitz",
            RegionKind::SchurUnitDisk => "schur",
            RegionKind::RealLine => "real",
            RegionKind::WholePlane => "complex-plane",
            RegionKind::CustomScalar => "custom",
        }
    }

    /// Whether Ω ⊆ ℝ.
    pub fn is_real_subset(&self) -> bool {
        match self.kind {
            RegionKind::RealLine => true,
            RegionKind::CustomScalar => self.custom_is_real,
            _ => false,
        }
    }

    /// Whether a closed-form projection of real 2×2 blocks is available.
    pub fn supports_block_projection(&self) -> bool {
        matches!(
            self.kind,
            RegionKind::HurwitzHalfPlane | RegionKind::WholePlane
        )
    }

    pub fn project(&self, z: Complex64) -> Complex64 {
        match self.kind {
            RegionKind::HurwitzHalfPlane => Complex64::new(z.re.min(0.0), z.im),
            RegionKind::SchurUnitDisk => {
                let r = z.norm();
                if r > 1.0 {
                    z / r
                } else {
                    z
                }
            }
            RegionKind::RealLine => Complex64::new(z.re, 0.0),
            RegionKind::WholePlane => z,
            RegionKind::CustomScalar => {
                let map = self.custom.as_ref().expect("custom region without map");
                map(z)
            }
        }
    }

    /// Projection of a real scalar onto Ω ∩ ℝ.
    ///
    /// Used for the trailing 1×1 block of a real block problem, where the
    /// stabilized entry has to stay real.
    pub fn project_real(&self, x: f64) -> f64 {
        match self.kind {
            RegionKind::HurwitzHalfPlane => x.min(0.0),
            RegionKind::SchurUnitDisk => x.clamp(-1.0, 1.0),
            RegionKind::RealLine | RegionKind::WholePlane => x,
            RegionKind::CustomScalar => self.project(Complex64::new(x, 0.0)).re,
        }
    }

    pub fn sq_dist(&self, z: Complex64) -> f64 {
        (z - self.project(z)).norm_sqr()
    }

    /// Signed violation of `z`: positive outside Ω, nonpositive inside.
    ///
    /// For the built-in regions this is a signed distance-like quantity
    /// (negative values measure how deep inside z lies); custom regions only
    /// report the unsigned distance.
    pub fn violation(&self, z: Complex64) -> f64 {
        match self.kind {
            RegionKind::HurwitzHalfPlane => z.re,
            RegionKind::SchurUnitDisk => z.norm() - 1.0,
            RegionKind::RealLine => z.im.abs(),
            RegionKind::WholePlane => f64::NEG_INFINITY,
            RegionKind::CustomScalar => self.sq_dist(z).sqrt(),
        }
    }

    /// Membership test with absolute tolerance.
    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        match self.kind {
            RegionKind::HurwitzHalfPlane => z.re <= tol,
            RegionKind::SchurUnitDisk => z.norm() <= 1.0 + tol,
            RegionKind::RealLine => z.im.abs() <= tol,
            RegionKind::WholePlane => true,
            RegionKind::CustomScalar => self.sq_dist(z) <= tol * tol,
        }
    }
}

pub fn project_scalar(z: Complex64, region: &RegionSpec) -> Complex64 {
    region.project(z)
}

pub fn sq_dist_scalar(z: Complex64, region: &RegionSpec) -> f64 {
    region.sq_dist(z)
}

/// `trace(A) ≤ tol` and `det(A) ≥ -tol`: both eigenvalues in the closed left
/// half-plane.
pub fn is_hurwitz_2x2(a: &Block2x2, tol: f64) -> bool {
    a.trace() <= tol && a.determinant() >= -tol
}

fn rotation(c: f64, s: f64) -> Block2x2 {
    Block2x2::new(c, s, -s, c)
}

/// Rotation `G ∈ SO(2)` such that `(GᵀAG)₁₁ = y`.
///
/// `y` has to lie between the two diagonal entries of `A`.
pub fn equilibrate_rotation(a: &Block2x2, y: f64) -> Result<Block2x2, RegionError> {
    let lo = a[(0, 0)].min(a[(1, 1)]);
    let hi = a[(0, 0)].max(a[(1, 1)]);
    let slack = 1e-14 * a.norm().max(f64::MIN_POSITIVE);
    if !(y >= lo - slack && y <= hi + slack) {
        return Err(RegionError::InfeasibleTarget { target: y, lo, hi });
    }
    let y = y.clamp(lo, hi);

    if a[(0, 0)] > a[(1, 1)] {
        // Quarter turn P swaps the diagonal: PᵀAP = [[d, -c], [-b, a]].
        let p = rotation(0.0, -1.0);
        let swapped = p.transpose() * a * p;
        return Ok(p * equilibrate_sorted(&swapped, y));
    }
    Ok(equilibrate_sorted(a, y))
}

// Requires a₁₁ ≤ y ≤ a₂₂. Solves (a−y) + (d−y)x² − (b+c)x = 0 for its root of
// smallest magnitude and returns (1+x²)^{-1/2} [[1, x], [−x, 1]].
fn equilibrate_sorted(a: &Block2x2, y: f64) -> Block2x2 {
    let (a11, a12, a21, a22) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let qa = a22 - y;
    let qb = -(a12 + a21);
    let qc = a11 - y;

    let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
    let q = -0.5 * (qb + qb.signum() * disc.sqrt());
    let x = if q != 0.0 {
        qc / q
    } else if qc == 0.0 {
        0.0
    } else {
        // qa = qb = 0 and a₁₁ < y = a₂₂: the root sits at infinity, i.e. a
        // quarter turn.
        return rotation(0.0, 1.0);
    };
    let scale = (1.0 + x * x).sqrt().recip();
    rotation(scale, scale * x)
}

/// Singular value decomposition of a 2×2 block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Svd2x2 {
    pub u: Block2x2,
    pub sigma: [f64; 2],
    pub v: Block2x2,
}

impl Svd2x2 {
    pub fn recompose(&self) -> Block2x2 {
        self.u * Block2x2::new(self.sigma[0], 0.0, 0.0, self.sigma[1]) * self.v.transpose()
    }
}

/// Closed-form two-sided rotation SVD, `A = U diag(σ₁, σ₂) Vᵀ` with
/// `σ₁ ≥ σ₂ ≥ 0`.
pub fn svd_2x2(a: &Block2x2) -> Svd2x2 {
    let (a11, a12, a21, a22) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    // A is the sum of a scaled rotation (e, h) and a scaled reflection (f, g).
    let e = 0.5 * (a11 + a22);
    let f = 0.5 * (a11 - a22);
    let g = 0.5 * (a21 + a12);
    let h = 0.5 * (a21 - a12);
    let rot = e.hypot(h);
    let refl = f.hypot(g);
    let s1 = rot + refl;
    let s2 = rot - refl;

    let a1 = g.atan2(f);
    let a2 = h.atan2(e);
    let theta = 0.5 * (a2 - a1);
    let phi = 0.5 * (a2 + a1);

    let u = Block2x2::new(phi.cos(), -phi.sin(), phi.sin(), phi.cos());
    // Vᵀ is the rotation by θ.
    let mut v = Block2x2::new(theta.cos(), theta.sin(), -theta.sin(), theta.cos());
    let mut sigma = [s1, s2];
    if s2 < 0.0 {
        sigma[1] = -s2;
        v.column_mut(1).neg_mut();
    }
    Svd2x2 { u, sigma, v }
}

/// Which member of the candidate set a block is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateKind {
    Original,
    TraceShifted,
    RankOne,
    UpperNilpotent,
    LowerNilpotent,
}

/// The candidate nearest Hurwitz-stable matrices of a 2×2 block, in the fixed
/// order used for tie-breaking.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    pub candidates: Vec<(CandidateKind, Block2x2)>,
}

impl CandidateSet {
    pub fn new(a: &Block2x2) -> Self {
        let mut candidates = Vec::with_capacity(5);
        candidates.push((CandidateKind::Original, *a));
        candidates.push((
            CandidateKind::TraceShifted,
            a - Block2x2::identity() * (0.5 * a.trace()),
        ));

        let svd = svd_2x2(a);
        let rank_one = svd.u.column(0) * svd.v.column(0).transpose() * svd.sigma[0];
        candidates.push((CandidateKind::RankOne, rank_one));

        let mean = 0.5 * a.trace();
        let g = equilibrate_rotation(a, mean).expect("diagonal mean is always feasible");
        let balanced = g.transpose() * a * g;
        let upper = g * Block2x2::new(0.0, balanced[(0, 1)], 0.0, 0.0) * g.transpose();
        let lower = g * Block2x2::new(0.0, 0.0, balanced[(1, 0)], 0.0) * g.transpose();
        candidates.push((CandidateKind::UpperNilpotent, upper));
        candidates.push((CandidateKind::LowerNilpotent, lower));
        Self { candidates }
    }
}

/// Nearest Hurwitz-stable real 2×2 matrix in the Frobenius norm.
pub fn project_block_hurwitz(a: &Block2x2) -> Block2x2 {
    project_block_hurwitz_with_kind(a).1
}

pub fn project_block_hurwitz_with_kind(a: &Block2x2) -> (CandidateKind, Block2x2) {
    let scale = a.norm();
    let tol = BLOCK_STABILITY_TOL * scale.max(1.0) * scale.max(1.0);
    if is_hurwitz_2x2(a, tol) {
        return (CandidateKind::Original, *a);
    }
    let mut best: Option<(f64, CandidateKind, Block2x2)> = None;
    for (kind, c) in CandidateSet::new(a).candidates {
        // The nilpotent candidates are stable by construction; only rounding
        // could make the test fail for them.
        let nilpotent = matches!(
            kind,
            CandidateKind::UpperNilpotent | CandidateKind::LowerNilpotent
        );
        if !nilpotent && !is_hurwitz_2x2(&c, tol) {
            continue;
        }
        let d = (a - c).norm();
        if best.as_ref().is_none_or(|(bd, _, _)| d < *bd) {
            best = Some((d, kind, c));
        }
    }
    let (_, kind, c) = best.expect("nilpotent candidates are always present");
    (kind, c)
}

/// Projection of a real 2×2 block onto the real matrices with spectrum in Ω.
pub fn project_block(a: &Block2x2, region: &RegionSpec) -> Option<Block2x2> {
    match region.kind() {
        RegionKind::HurwitzHalfPlane => Some(project_block_hurwitz(a)),
        RegionKind::WholePlane => Some(*a),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn m(a: f64, b: f64, c: f64, d: f64) -> Block2x2 {
        Block2x2::new(a, b, c, d)
    }

    #[test]
    fn scalar_projections() {
        assert_eq!(RegionSpec::hurwitz().project(c(1.0, 2.0)), c(0.0, 2.0));
        let p = RegionSpec::schur().project(c(3.0, 4.0));
        assert_abs_diff_eq!(p.re, 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(p.im, 0.8, epsilon = 1e-15);
        assert_eq!(RegionSpec::real_line().project(c(1.0, 2.0)), c(1.0, 0.0));
        assert_eq!(RegionSpec::hurwitz().project(c(-5.0, 0.0)), c(-5.0, 0.0));
    }

    #[test]
    fn scalar_sq_dist() {
        assert_eq!(sq_dist_scalar(c(1.0, 2.0), &RegionSpec::hurwitz()), 1.0);
        assert_eq!(sq_dist_scalar(c(1.0, 2.0), &RegionSpec::real_line()), 4.0);
        assert_eq!(sq_dist_scalar(c(2.0, 0.0), &RegionSpec::schur()), 1.0);
    }

    #[test]
    fn custom_region_uses_map() {
        let r = RegionSpec::custom(|z| Complex64::new(z.re.max(1.0), 0.0), true);
        assert!(r.is_real_subset());
        assert_eq!(r.project(c(0.0, 3.0)), c(1.0, 0.0));
        assert_eq!(r.sq_dist(c(0.0, 3.0)), 10.0);
        assert!(!r.supports_block_projection());
    }

    #[test]
    fn hurwitz_2x2_membership() {
        assert!(is_hurwitz_2x2(&m(0.0, 2.0, 0.0, 0.0), 0.0));
        assert!(!is_hurwitz_2x2(&m(1.0, 2.0, 1.0, 1.0), 0.0));
        assert!(is_hurwitz_2x2(&m(-1.0, 0.0, 0.0, -1.0), 0.0));
    }

    #[test]
    fn equilibrate_identity_cases() {
        let a = m(2.0, 3.0, -1.0, 2.0);
        assert_eq!(equilibrate_rotation(&a, 2.0).unwrap(), Block2x2::identity());
        let a = m(1.0, 2.0, 1.0, 1.0);
        assert_eq!(equilibrate_rotation(&a, 1.0).unwrap(), Block2x2::identity());
    }

    #[test]
    fn equilibrate_rejects_out_of_range_target() {
        let a = m(1.0, 0.0, 0.0, 2.0);
        assert!(matches!(
            equilibrate_rotation(&a, 3.0),
            Err(RegionError::InfeasibleTarget { .. })
        ));
    }

    #[test]
    fn equilibrate_degenerate_quadratic() {
        // d = y and b + c = 0 with a ≠ y needs a quarter turn.
        let a = m(1.0, 0.5, -0.5, 2.0);
        let g = equilibrate_rotation(&a, 2.0).unwrap();
        assert_abs_diff_eq!((g.transpose() * a * g)[(0, 0)], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g.determinant(), 1.0, epsilon = 1e-15);
        // d = y with b + c ≠ 0: linear root.
        let a = m(1.0, 1.0, 2.0, 2.0);
        let g = equilibrate_rotation(&a, 2.0).unwrap();
        assert_abs_diff_eq!((g.transpose() * a * g)[(0, 0)], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn svd_examples() {
        let s = svd_2x2(&m(3.0, 0.0, 0.0, 2.0));
        assert_abs_diff_eq!(s.sigma[0], 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.sigma[1], 2.0, epsilon = 1e-15);
        assert!((s.u - Block2x2::identity()).norm() < 1e-15);
        assert!((s.v - Block2x2::identity()).norm() < 1e-15);

        let s = svd_2x2(&Block2x2::zeros());
        assert_eq!(s.sigma, [0.0, 0.0]);
    }

    #[test]
    fn svd_swapped_diagonal_and_negative_entries() {
        for a in [
            m(2.0, 0.0, 0.0, 3.0),
            m(-1.0, 0.0, 0.0, 4.0),
            m(0.0, 1.0, 1.0, 0.0),
            m(1.0, 1.0, 1.0, 1.0),
            m(0.0, 0.0, 0.0, -2.0),
        ] {
            let s = svd_2x2(&a);
            assert!(s.sigma[0] >= s.sigma[1] && s.sigma[1] >= 0.0);
            assert!((s.recompose() - a).norm() <= 1e-13 * a.norm(), "{a}");
        }
    }

    #[test]
    fn example_block_projection() {
        let a = m(1.0, 2.0, 1.0, 1.0);
        let (kind, b) = project_block_hurwitz_with_kind(&a);
        assert_eq!(kind, CandidateKind::UpperNilpotent);
        assert!((b - m(0.0, 2.0, 0.0, 0.0)).norm() < 1e-15);
        assert_abs_diff_eq!((a - b).norm(), 3f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn stable_block_is_fixed() {
        let a = m(-1.0, 0.0, 0.0, -2.0);
        assert_eq!(project_block_hurwitz(&a), a);
    }

    #[test]
    fn identity_projects_to_zero() {
        let b = project_block_hurwitz(&Block2x2::identity());
        assert!(b.norm() < 1e-15);
    }

    #[test]
    fn unsupported_block_regions() {
        assert!(project_block(&Block2x2::identity(), &RegionSpec::schur()).is_none());
        assert_eq!(
            project_block(&Block2x2::identity(), &RegionSpec::whole_plane()),
            Some(Block2x2::identity())
        );
    }

    fn block() -> impl Strategy<Value = Block2x2> {
        prop::array::uniform4(-2.0f64..2.0).prop_map(|e| m(e[0], e[1], e[2], e[3]))
    }

    fn complex() -> impl Strategy<Value = Complex64> {
        (-5.0f64..5.0, -5.0f64..5.0).prop_map(|(re, im)| c(re, im))
    }

    proptest! {
        #[test]
        fn projection_is_idempotent(a in block()) {
            let p = project_block_hurwitz(&a);
            prop_assert_eq!(project_block_hurwitz(&p), p);
        }

        #[test]
        fn projection_is_feasible(a in block()) {
            prop_assert!(is_hurwitz_2x2(&project_block_hurwitz(&a), 1e-10));
        }

        #[test]
        fn nilpotent_candidates_are_stable(a in block()) {
            let set = CandidateSet::new(&a);
            for (kind, c) in &set.candidates[3..] {
                prop_assert!(is_hurwitz_2x2(c, 1e-12), "{:?}", kind);
                prop_assert!(c.trace().abs() < 1e-12 && c.determinant().abs() < 1e-12);
            }
        }

        #[test]
        fn svd_reconstructs(a in block()) {
            let s = svd_2x2(&a);
            prop_assert!(s.sigma[0] >= s.sigma[1] && s.sigma[1] >= 0.0);
            prop_assert!((s.recompose() - a).norm() <= 1e-13 * a.norm().max(1e-300));
            prop_assert!((s.u.transpose() * s.u - Block2x2::identity()).norm() < 1e-14);
            prop_assert!((s.v.transpose() * s.v - Block2x2::identity()).norm() < 1e-14);
            // Characteristic polynomial of AᵀA.
            let ata = a.transpose() * a;
            let tr = ata.trace();
            let det = ata.determinant();
            let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
            let l1 = (0.5 * (tr + disc)).sqrt();
            let l2 = (0.5 * (tr - disc)).max(0.0).sqrt();
            prop_assert!((s.sigma[0] - l1).abs() < 1e-12);
            prop_assert!((s.sigma[1] - l2).abs() < 1e-6);
        }

        #[test]
        fn equilibrate_to_mean(a in block()) {
            let mean = 0.5 * a.trace();
            let g = equilibrate_rotation(&a, mean).unwrap();
            let r = g.transpose() * a * g;
            prop_assert!((g.determinant() - 1.0).abs() < 1e-14);
            prop_assert!((r[(0, 0)] - r[(1, 1)]).abs() <= 2e-12 * a.norm());
        }

        #[test]
        fn equilibrate_any_target(a in block(), frac in 0.0f64..=1.0) {
            let lo = a[(0, 0)].min(a[(1, 1)]);
            let hi = a[(0, 0)].max(a[(1, 1)]);
            let y = lo + frac * (hi - lo);
            let g = equilibrate_rotation(&a, y).unwrap();
            prop_assert!(((g.transpose() * a * g)[(0, 0)] - y).abs() <= 1e-12 * a.norm());
        }

        #[test]
        fn hurwitz_set_is_rotation_invariant(a in block(), angle in 0.0f64..6.3) {
            let g = rotation(angle.cos(), angle.sin());
            let r = g.transpose() * a * g;
            // Keep away from the boundary where rounding could flip the test.
            let margin = a.trace().abs().min(a.determinant().abs());
            prop_assume!(margin > 1e-9);
            prop_assert_eq!(is_hurwitz_2x2(&a, 0.0), is_hurwitz_2x2(&r, 0.0));
        }

        #[test]
        fn scalar_projection_lands_in_region(z in complex()) {
            for r in [RegionSpec::hurwitz(), RegionSpec::schur(), RegionSpec::real_line()] {
                let p = r.project(z);
                prop_assert!(r.contains(p, 1e-15));
                prop_assert!(r.sq_dist(z) >= 0.0);
                prop_assert_eq!(r.sq_dist(z) == 0.0, r.contains(z, 0.0));
            }
        }

        #[test]
        fn scalar_projection_is_nonexpansive(z1 in complex(), z2 in complex()) {
            for r in [RegionSpec::hurwitz(), RegionSpec::schur(), RegionSpec::real_line()] {
                prop_assert!((r.project(z1) - r.project(z2)).norm() <= (z1 - z2).norm() + 1e-14);
            }
        }
    }
}
