//! Per-mode solver for the azimuthal (swirl) velocity component.
//!
//! At the linear level the swirl decouples from the meridional flow: each
//! axial mode `v̂ᶿ(r)` solves the second-order problem
//!
//! ```text
//! iξ U(r) v̂ᶿ − (L − ξ²) v̂ᶿ = F̂ᶿ,
//! v̂ᶿ(0) = 0,    dv̂ᶿ/dr(1) = (1 − α) v̂ᶿ(1),
//! ```
//!
//! with the same operator `L` as the stream-function problem. For `α > 0`
//! the problem is uniquely solvable; at `α = 0` and `ξ = 0` the homogeneous
//! problem has the rigid-rotation solution `v̂ᶿ = β r`, which is why
//! [`solve_swirl_mode`] insists on positive slip and [`nullspace_probe`]
//! exists to measure exactly that degeneracy.
//!
//! The slip coefficient of the boundary row is a separate argument from the
//! profile so that sweeps can vary the boundary slip knob while holding the
//! base flow fixed, and vice versa.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::baseflow::PoiseuilleProfile;
use crate::error::Error;
use crate::radial::RadialOperators;
use crate::stream::{complex_matvec, componentwise_backward_error, equilibrate_rows};
use crate::{Result, C64};

/// Weighted norms of a swirl mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwirlNormReport {
    /// `∫ |(r v̂ᶿ)′|² dr/r`.
    pub ring_sq: f64,
    /// `∫ |v̂ᶿ|² r dr`.
    pub v_sq: f64,
    /// `ξ² ∫ |v̂ᶿ|² r dr`.
    pub xi2_v_sq: f64,
    /// `∫ U |v̂ᶿ|² r dr`.
    pub u_v_sq: f64,
}

/// One solved swirl mode.
#[derive(Debug, Clone)]
pub struct SwirlSolution {
    /// Axial wavenumber `ξ`.
    pub xi: f64,
    /// Slip coefficient used in the wall row.
    pub alpha: f64,
    /// Azimuthal velocity samples `v̂ᶿ`.
    pub v_theta_hat: DVector<C64>,
    /// Wall value `v̂ᶿ(1)`.
    pub boundary_trace: C64,
    /// Weighted norms of the mode.
    pub norm_report: SwirlNormReport,
    /// Componentwise backward error of the interior rows.
    pub residual: f64,
}

/// Smallest-singular-value probe of the homogeneous swirl operator.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NullspaceProbe {
    /// Smallest singular value of the equilibrated operator.
    pub sigma_min: f64,
    /// Cosine similarity between the corresponding right-singular vector
    /// and the sampled function `r`, the rigid-rotation candidate.
    pub cosine_with_r: f64,
}

fn assemble_swirl_operator(
    xi: f64,
    profile: &PoiseuilleProfile,
    ops: &RadialOperators,
    alpha: f64,
) -> DMatrix<C64> {
    let n = ops.n_points;
    let xi2 = xi * xi;
    let mut a = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for i in 0..n {
        for k in 0..n {
            let delta = if i == k { 1.0 } else { 0.0 };
            let lx = ops.l_op[(i, k)] - xi2 * delta;
            a[(i, k)] = C64::new(-lx, xi * profile.u_bar[i] * delta);
        }
    }
    // Axis row v̂ᶿ(0) = 0 through interpolation, wall row
    // dv̂ᶿ/dr(1) − (1−α) v̂ᶿ(1) = 0.
    for k in 0..n {
        a[(0, k)] = C64::new(ops.axis_row[k], 0.0);
        a[(n - 1, k)] = C64::new(ops.d1[(n - 1, k)], 0.0);
    }
    a[(n - 1, n - 1)] -= C64::new(1.0 - alpha, 0.0);
    a
}

fn bc_rows(n: usize) -> [usize; 2] {
    [0, n - 1]
}

/// Solves one swirl mode for `α > 0`.
///
/// `alpha` controls the wall row; the profile supplies the advecting flow
/// `U`. Nonpositive slip is rejected: at `α = 0` the wall row degenerates to
/// `v̂ᶿ′(1) = v̂ᶿ(1)` and the `ξ = 0` operator acquires the rigid-rotation
/// nullvector `v̂ᶿ ∝ r`, so uniqueness is lost; use [`nullspace_probe`] to
/// study that regime instead.
pub fn solve_swirl_mode(
    xi: f64,
    f_theta_hat: &DVector<C64>,
    profile: &PoiseuilleProfile,
    ops: &RadialOperators,
    alpha: f64,
) -> Result<SwirlSolution> {
    // `!(alpha > 0.0)` rather than `alpha <= 0.0`: NaN must fail too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "swirl solve needs alpha > 0 (got {alpha}): the homogeneous problem at \
             alpha = 0, xi = 0 admits the rigid rotation v = beta*r; use nullspace_probe \
             to examine that degeneracy"
        )));
    }
    let n = ops.n_points;
    if f_theta_hat.len() != n || profile.u_bar.len() != n {
        return Err(Error::InvalidParameter(format!(
            "swirl forcing/profile sampled on {}/{} nodes, grid has {n}",
            f_theta_hat.len(),
            profile.u_bar.len()
        )));
    }
    if !xi.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "xi must be finite, got {xi}"
        )));
    }
    let a = assemble_swirl_operator(xi, profile, ops, alpha);
    let rows = bc_rows(n);
    let mut b = f_theta_hat.clone();
    for &i in &rows {
        b[i] = C64::new(0.0, 0.0);
    }
    let mut a_eq = a.clone();
    let mut b_eq = b.clone();
    equilibrate_rows(&mut a_eq, &mut b_eq);
    let v = a_eq.lu().solve(&b_eq).ok_or_else(|| {
        Error::SingularSystem(format!(
            "swirl operator singular at xi = {xi}, alpha = {alpha}, n = {n}"
        ))
    })?;

    let residual = componentwise_backward_error(&a, &rows, &v, &b);
    let norm_report = swirl_norm_report(xi, &v, profile, ops);
    Ok(SwirlSolution {
        xi,
        alpha,
        boundary_trace: v[n - 1],
        v_theta_hat: v,
        norm_report,
        residual,
    })
}

/// Weighted norms of a swirl field.
pub fn swirl_norm_report(
    xi: f64,
    v_theta_hat: &DVector<C64>,
    profile: &PoiseuilleProfile,
    ops: &RadialOperators,
) -> SwirlNormReport {
    let ring = crate::stream::ring_derivative(v_theta_hat, ops);
    let v_sq = ops.norm_sq_r(v_theta_hat);
    let u_v_sq: f64 = ops
        .quad_r
        .iter()
        .zip(profile.u_bar.iter().zip(v_theta_hat.iter()))
        .map(|(w, (u, v))| w * u * v.norm_sqr())
        .sum();
    SwirlNormReport {
        ring_sq: ops.norm_sq_inv_r(&ring),
        v_sq,
        xi2_v_sq: xi * xi * v_sq,
        u_v_sq: u_v_sq.max(0.0),
    }
}

/// Relative defects of the two exact swirl balances.
///
/// The real balance is
/// `∫|(rv̂ᶿ)′|²/r + (α−2)|v̂ᶿ(1)|² + ξ²∫|v̂ᶿ|²r = Re ∫ F̂ᶿ v̄̂ᶿ r dr`,
/// the imaginary one `ξ∫U|v̂ᶿ|²r = Im ∫ F̂ᶿ v̄̂ᶿ r dr`; both are normalized
/// by their largest term.
pub fn swirl_identity_residuals(
    sol: &SwirlSolution,
    f_theta_hat: &DVector<C64>,
    profile: &PoiseuilleProfile,
    ops: &RadialOperators,
) -> (f64, f64) {
    let nr = &sol.norm_report;
    let work = ops.quad_r(&DVector::from_fn(ops.n_points, |i, _| {
        f_theta_hat[i] * sol.v_theta_hat[i].conj()
    }));
    let bc_term = (sol.alpha - 2.0) * sol.boundary_trace.norm_sqr();
    let lhs_re = nr.ring_sq + bc_term + nr.xi2_v_sq;
    let scale_re = [nr.ring_sq, bc_term.abs(), nr.xi2_v_sq, work.re.abs()]
        .into_iter()
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let real_gap = (lhs_re - work.re).abs() / scale_re;

    // Recompute the profile-weighted norm from the profile rather than
    // trusting the cached report, so the two modules cross-check each other.
    let u_v_sq: f64 = ops
        .quad_r
        .iter()
        .zip(profile.u_bar.iter().zip(sol.v_theta_hat.iter()))
        .map(|(w, (u, v))| w * u * v.norm_sqr())
        .sum();
    let lhs_im = sol.xi * u_v_sq.max(0.0);
    let scale_im = lhs_im.abs().max(work.im.abs()).max(f64::MIN_POSITIVE);
    let imag_gap = (lhs_im - work.im).abs() / scale_im;
    (real_gap, imag_gap)
}

/// Measures invertibility of the homogeneous swirl operator at `(ξ, α)`.
///
/// Returns the smallest singular value of the equilibrated operator together
/// with the cosine similarity between its right-singular vector and the
/// rigid-rotation candidate `r`. At `ξ = 0, α = 0` the operator is singular
/// with nullvector `∝ r`; any positive slip or nonzero wavenumber restores a
/// strictly positive margin.
pub fn nullspace_probe(
    xi: f64,
    alpha: f64,
    profile: &PoiseuilleProfile,
    ops: &RadialOperators,
) -> NullspaceProbe {
    assert_eq!(
        profile.u_bar.len(),
        ops.n_points,
        "profile and grid must share nodes"
    );
    let n = ops.n_points;
    let mut a = assemble_swirl_operator(xi, profile, ops, alpha);
    let mut dummy = DVector::from_element(n, C64::new(0.0, 0.0));
    equilibrate_rows(&mut a, &mut dummy);
    let svd = a.svd(false, true);
    let (mut sigma_min, mut idx) = (f64::INFINITY, 0usize);
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s < sigma_min {
            sigma_min = *s;
            idx = i;
        }
    }
    let v_t = svd.v_t.expect("right singular vectors requested");
    let candidate = v_t.row(idx);
    let mut dot = C64::new(0.0, 0.0);
    let mut norm_v = 0.0_f64;
    let mut norm_r = 0.0_f64;
    for i in 0..n {
        dot += candidate[i] * ops.nodes[i];
        norm_v += candidate[i].norm_sqr();
        norm_r += ops.nodes[i] * ops.nodes[i];
    }
    NullspaceProbe {
        sigma_min,
        cosine_with_r: dot.norm() / (norm_v.sqrt() * norm_r.sqrt()),
    }
}

/// Componentwise backward error of a candidate swirl mode against the
/// assembled operator's interior rows, with `F̂ᶿ` as the right-hand side.
pub fn swirl_backward_error(
    xi: f64,
    v_theta_hat: &DVector<C64>,
    f_theta_hat: &DVector<C64>,
    profile: &PoiseuilleProfile,
    ops: &RadialOperators,
    alpha: f64,
) -> f64 {
    let a = assemble_swirl_operator(xi, profile, ops, alpha);
    crate::stream::componentwise_backward_error(
        &a,
        &[0, ops.n_points - 1],
        v_theta_hat,
        f_theta_hat,
    )
}

/// Largest interior row defect and row scale of a candidate swirl mode;
/// see [`crate::stream`]'s extrema helper for the contract.
pub(crate) fn swirl_backward_error_extrema(
    xi: f64,
    v_theta_hat: &DVector<C64>,
    f_theta_hat: &DVector<C64>,
    profile: &PoiseuilleProfile,
    ops: &RadialOperators,
    alpha: f64,
) -> (f64, f64) {
    let a = assemble_swirl_operator(xi, profile, ops, alpha);
    crate::stream::backward_error_extrema(&a, &[0, ops.n_points - 1], v_theta_hat, f_theta_hat)
}

/// Interior residual samples of the swirl equation for a candidate field,
/// used by diagnostics: `iξU v − (L − ξ²)v − F̂ᶿ`.
pub fn swirl_equation_residual(
    xi: f64,
    v_theta_hat: &DVector<C64>,
    f_theta_hat: &DVector<C64>,
    profile: &PoiseuilleProfile,
    ops: &RadialOperators,
) -> DVector<C64> {
    let lv = complex_matvec(&ops.l_op, v_theta_hat);
    DVector::from_fn(ops.n_points, |i, _| {
        C64::new(0.0, xi * profile.u_bar[i]) * v_theta_hat[i]
            - (lv[i] - xi * xi * v_theta_hat[i])
            - f_theta_hat[i]
    })
}
