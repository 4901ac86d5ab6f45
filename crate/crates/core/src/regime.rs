//! Asymptotic regime classification and boundary-layer comparison profiles.
//!
//! The linear response of a mode depends on where `(Φ, ξ, α)` falls relative
//! to two small thresholds `ε₁, δ`: low frequencies (`|ξ| ≤ 1/(ε₁Φ)`), high
//! frequencies (`|ξ| ≥ ε₁√Φ`), and a mid-frequency band that splits further
//! by the size of `4 + α` against `(Φ|ξ|)^{1/3}`. In the mid band the
//! solution develops a wall layer whose shape this module constructs:
//!
//! - small slip: an exponential profile `e^{−√β cos(θ/2)(1−r)}
//!   e^{−i√β sin(θ/2)(1−r)}` with `β, θ` combining the advection strength
//!   `4Φξ/(π(4+α))` and the wavenumber `ξ²`;
//! - large slip: an Airy-type profile obtained by solving the reduced
//!   near-wall equation `(i(4Φξ/π)(1−r) − d²/dr² + ξ²)φ = 0` and
//!   integrating `(d²/dr² − ξ²)ψ = φ` back, normalized to one at the wall.
//!
//! The modified Bessel function `I₁` lives here too: `I₁(|ξ|r)` spans the
//! homogeneous solutions of `(L − ξ²)` that are regular at the axis, and the
//! decay-fit diagnostic compares computed wall layers against the predicted
//! rates.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::baseflow::FlowParams;
use crate::error::Error;
use crate::radial::RadialOperators;
use crate::stream::equilibrate_rows;
use crate::{Result, C64};

const PI: f64 = std::f64::consts::PI;

/// Thresholds `ε₁, δ` splitting the parameter space into regimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeThresholds {
    /// Frequency threshold `ε₁ ∈ (0, 1)`.
    pub eps1: f64,
    /// Slip-band threshold `δ ∈ (0, 1)`.
    pub delta: f64,
}

impl RegimeThresholds {
    /// Validates `0 < ε₁ < 1` and `0 < δ < 1`.
    pub fn new(eps1: f64, delta: f64) -> Result<Self> {
        if !(eps1 > 0.0 && eps1 < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eps1 must lie in (0, 1), got {eps1}"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        Ok(Self { eps1, delta })
    }
}

impl Default for RegimeThresholds {
    /// Conventional defaults `ε₁ = δ = 0.1`; any sufficiently small pair is
    /// admissible, so records always carry the thresholds they used.
    fn default() -> Self {
        Self {
            eps1: 0.1,
            delta: 0.1,
        }
    }
}

/// Parameter regime of one `(Φ, ξ, α)` triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeLabel {
    /// `|ξ| ≤ 1/(ε₁Φ)`.
    LowFrequency,
    /// `|ξ| ≥ ε₁√Φ`.
    HighFrequency,
    /// Mid band with `4 + α ≤ δ(Φ|ξ|)^{1/3}`.
    MidSmallSlip,
    /// Mid band with `4 + α ≥ δ⁻¹(Φ|ξ|)^{1/3}`.
    MidLargeSlip,
    /// Mid band between the two slip extremes.
    MidIntermediateSlip,
}

impl std::fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RegimeLabel::LowFrequency => "low-frequency",
            RegimeLabel::HighFrequency => "high-frequency",
            RegimeLabel::MidSmallSlip => "mid-small-slip",
            RegimeLabel::MidLargeSlip => "mid-large-slip",
            RegimeLabel::MidIntermediateSlip => "mid-intermediate-slip",
        };
        f.write_str(s)
    }
}

/// Kind of wall-layer profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileKind {
    /// Closed-form exponential layer of the small-slip band.
    SmallSlipExponential,
    /// Numerically constructed Airy-type layer of the large-slip band.
    LargeSlipAiry,
}

/// A wall-layer comparison profile sampled on a radial grid.
#[derive(Debug, Clone)]
pub struct BoundaryLayerProfile {
    /// Layer strength: the combined parameter `√(ξ⁴ + (4Φξ/(π(4+α)))²)`
    /// for the exponential kind, the cube root `(4Φξ/π)^{1/3}` for the
    /// Airy kind.
    pub beta: f64,
    /// Phase angle `θ ∈ (0, π/2)` of the layer parameter.
    pub theta: f64,
    /// Profile samples `ψ̂_BL` at the grid nodes, value 1 at the wall.
    pub samples: DVector<C64>,
    /// Which construction produced the samples.
    pub kind: ProfileKind,
}

/// Result of fitting an exponential decay rate to a computed wall layer.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayFit {
    /// Least-squares slope magnitude of `log|ψ̂|` against `1−r` in the
    /// fitting window.
    pub fitted_rate: f64,
    /// Predicted rate `√β cos(θ/2)`.
    pub predicted_rate: f64,
    /// Number of grid nodes inside the window.
    pub window_points: usize,
    /// Set when the signal in the window is too small to carry a slope;
    /// `fitted_rate` is zero in that case.
    pub flat_signal: bool,
}

/// Assigns the regime label of `(params, ξ)` under the given thresholds.
///
/// Total in all arguments: `ξ = 0` (and `Φ = 0`) land in `LowFrequency`,
/// and ties resolve toward the earlier label in the order low, high,
/// mid-small, mid-large, mid-intermediate. Only `|ξ|` enters, so the label
/// is even in `ξ`.
pub fn classify(params: FlowParams, xi: f64, thresholds: &RegimeThresholds) -> RegimeLabel {
    let ax = xi.abs();
    if ax <= 1.0 / (thresholds.eps1 * params.phi) {
        return RegimeLabel::LowFrequency;
    }
    if ax >= thresholds.eps1 * params.phi.sqrt() {
        return RegimeLabel::HighFrequency;
    }
    let cube = (params.phi * ax).cbrt();
    let slip = 4.0 + params.alpha;
    if slip <= thresholds.delta * cube {
        return RegimeLabel::MidSmallSlip;
    }
    if slip >= cube / thresholds.delta {
        return RegimeLabel::MidLargeSlip;
    }
    RegimeLabel::MidIntermediateSlip
}

/// Layer parameter of a mode in polar form:
/// `β = √(ξ⁴ + (4Φξ/(π(4+α)))²)` and `θ = atan2(4Φξ/(π(4+α)), ξ²)`.
///
/// Intended for `ξ > 0`; negative wavenumbers are handled by conjugate
/// symmetry of the physical fields.
pub fn beta_theta(params: FlowParams, xi: f64) -> (f64, f64) {
    let a = xi * xi;
    let b = 4.0 * params.phi * xi / (PI * (4.0 + params.alpha));
    (f64::hypot(a, b), f64::atan2(b, a))
}

/// Closed-form exponential wall layer of the small-slip band:
/// `ψ̂_BL(r) = e^{−√β cos(θ/2)(1−r)} e^{−i√β sin(θ/2)(1−r)}`.
///
/// Meaningful as an approximation only where [`classify`] returns
/// `MidSmallSlip`, but evaluable anywhere as a diagnostic.
pub fn bl_profile_small_slip(
    params: FlowParams,
    xi: f64,
    ops: &RadialOperators,
) -> BoundaryLayerProfile {
    let (beta, theta) = beta_theta(params, xi);
    let sqrt_beta = beta.sqrt();
    let (decay, phase) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let samples = DVector::from_fn(ops.n_points, |i, _| {
        let depth = 1.0 - ops.nodes[i];
        C64::from_polar(
            (-sqrt_beta * decay * depth).exp(),
            -sqrt_beta * phase * depth,
        )
    });
    BoundaryLayerProfile {
        beta,
        theta,
        samples,
        kind: ProfileKind::SmallSlipExponential,
    }
}

/// Airy-type wall layer of the large-slip band, built numerically.
///
/// Solves the reduced near-wall equation
/// `(i(4Φξ/π)(1−r) − d²/dr² + ξ²)φ = 0` with decay at the inner end of the
/// grid and unit value at the wall, then integrates `(d²/dr² − ξ²)ψ = φ`
/// back with `ψ = ψ′ = 0` at the inner end, normalizing `ψ(1) = 1`. The
/// construction is accepted only if the profile has genuinely decayed:
/// `|ψ| < 0.05` wherever `1−r ≥ 5/|β|` with `|β| = (4Φξ/π)^{1/3}`;
/// otherwise the grid is deemed too coarse and an error is returned.
///
/// Resolution note: the layer width is `1/|β|`, so grids from
/// `resolution_for_beta(β²)` resolve it with the standard budget.
pub fn bl_profile_large_slip(
    params: FlowParams,
    xi: f64,
    ops: &RadialOperators,
) -> Result<BoundaryLayerProfile> {
    let coef = 4.0 * params.phi * xi / PI;
    // `!(coef > 0.0)` rather than `coef <= 0.0`: NaN must fail too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(coef > 0.0) || !coef.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "large-slip layer needs positive finite flux and wavenumber, got phi = {}, xi = {xi}",
            params.phi
        )));
    }
    let beta_abs = coef.cbrt();
    let n = ops.n_points;
    let wall = ops.wall_index();

    // Stage one: the reduced second-order equation for φ.
    let mut a = DMatrix::from_fn(n, n, |i, k| {
        let delta = if i == k { 1.0 } else { 0.0 };
        C64::new(
            -ops.d2[(i, k)] + xi * xi * delta,
            coef * (1.0 - ops.nodes[i]) * delta,
        )
    });
    let mut b = DVector::from_element(n, C64::new(0.0, 0.0));
    for k in 0..n {
        a[(0, k)] = C64::new(0.0, 0.0);
        a[(wall, k)] = C64::new(0.0, 0.0);
    }
    a[(0, 0)] = C64::new(1.0, 0.0);
    a[(wall, wall)] = C64::new(1.0, 0.0);
    b[wall] = C64::new(1.0, 0.0);
    equilibrate_rows(&mut a, &mut b);
    let phi_fn = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::SingularSystem("reduced layer equation".into()))?;

    // Stage two: integrate back to the stream-function shape.
    let mut bmat = DMatrix::from_fn(n, n, |i, k| {
        let delta = if i == k { 1.0 } else { 0.0 };
        C64::new(ops.d2[(i, k)] - xi * xi * delta, 0.0)
    });
    let mut rhs = phi_fn.clone();
    for k in 0..n {
        bmat[(0, k)] = C64::new(0.0, 0.0);
        bmat[(1, k)] = C64::new(ops.d1[(0, k)], 0.0);
    }
    bmat[(0, 0)] = C64::new(1.0, 0.0);
    rhs[0] = C64::new(0.0, 0.0);
    rhs[1] = C64::new(0.0, 0.0);
    equilibrate_rows(&mut bmat, &mut rhs);
    let mut psi = bmat
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSystem("layer back-integration".into()))?;
    let wall_value = psi[wall];
    if wall_value.norm() == 0.0 {
        return Err(Error::SingularSystem(
            "layer profile vanished at the wall; cannot normalize".into(),
        ));
    }
    for v in psi.iter_mut() {
        *v /= wall_value;
    }

    // Decay gate: beyond five layer widths the profile must be small.
    let mut tail = 0.0_f64;
    for i in 0..n {
        if 1.0 - ops.nodes[i] >= 5.0 / beta_abs {
            tail = tail.max(psi[i].norm());
        }
    }
    if tail >= 0.05 {
        return Err(Error::Unresolved {
            n,
            gap: tail,
            tol: 0.05,
        });
    }

    let (_, theta) = beta_theta(params, xi);
    Ok(BoundaryLayerProfile {
        beta: beta_abs,
        theta,
        samples: psi,
        kind: ProfileKind::LargeSlipAiry,
    })
}

/// Modified Bessel function `I₁(ρ)` for `ρ ≥ 0`.
///
/// Power series up to `ρ = 30` (all terms positive, no cancellation),
/// scaled asymptotic expansion beyond. Overflows to infinity past
/// `ρ ≈ 713`; use [`bessel_i1_scaled`] there, since only ratios of `I₁`
/// values ever enter the solvers. Negative arguments return NaN.
pub fn bessel_i1(rho: f64) -> f64 {
    if rho < 0.0 {
        return f64::NAN;
    }
    if rho <= 30.0 {
        i1_series(rho)
    } else {
        bessel_i1_scaled(rho) * rho.exp()
    }
}

/// Exponentially scaled `e^{−ρ} I₁(ρ)`, safe for arbitrarily large `ρ`.
pub fn bessel_i1_scaled(rho: f64) -> f64 {
    if rho < 0.0 {
        return f64::NAN;
    }
    if rho <= 30.0 {
        i1_series(rho) * (-rho).exp()
    } else {
        i1_scaled_asymptotic(rho)
    }
}

fn i1_series(rho: f64) -> f64 {
    let x = rho / 2.0;
    let mut term = x;
    let mut sum = x;
    for k in 1..200 {
        term *= x * x / ((k * (k + 1)) as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

fn i1_scaled_asymptotic(rho: f64) -> f64 {
    // e^{−ρ} I₁(ρ) ~ (2πρ)^{−1/2} (1 − 3/(8ρ) − 15/(128ρ²) − ...);
    // truncate at the smallest term.
    let mut sum = 1.0;
    let mut term = 1.0_f64;
    for k in 1..30 {
        let kf = k as f64;
        let next = term * -(4.0 - (2.0 * kf - 1.0).powi(2)) / (8.0 * kf * rho);
        if next.abs() >= term.abs() && k > 1 {
            break;
        }
        sum += next;
        term = next;
    }
    sum / (2.0 * PI * rho).sqrt()
}

/// Smooth nondecreasing cutoff: `0` on `[0, 1/4]`, `1` on `[1/2, 1]`,
/// quintic smoothstep in between (continuous up to second derivatives).
pub fn cutoff_chi(r: f64) -> f64 {
    if r <= 0.25 {
        0.0
    } else if r >= 0.5 {
        1.0
    } else {
        let t = (r - 0.25) / 0.25;
        t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

/// Fits the near-wall decay rate of `ψ̂` and compares it with the predicted
/// `√β cos(θ/2)`.
///
/// The fit is a least-squares slope of `log|ψ̂|` against the wall distance
/// `1−r` over the window `1−r ∈ [0.2, 2]/√β`, where the wall layer dominates
/// any smooth interior trend. Returns both rates without judging agreement.
/// Fails if fewer than five grid nodes fall inside the window; signals
/// instead of fitting when the window carries no usable amplitude.
pub fn bl_decay_fit(
    psi_hat: &DVector<C64>,
    xi: f64,
    params: FlowParams,
    ops: &RadialOperators,
) -> Result<DecayFit> {
    if psi_hat.len() != ops.n_points {
        return Err(Error::InvalidParameter(
            "samples and grid disagree on node count".into(),
        ));
    }
    let (beta, theta) = beta_theta(params, xi);
    let sqrt_beta = beta.sqrt();
    let predicted_rate = sqrt_beta * (theta / 2.0).cos();
    let (lo, hi) = (0.2 / sqrt_beta, 2.0 / sqrt_beta);

    let window: Vec<usize> = (0..ops.n_points)
        .filter(|&i| {
            let depth = 1.0 - ops.nodes[i];
            depth >= lo && depth <= hi
        })
        .collect();
    if window.len() < 5 {
        return Err(Error::Unresolved {
            n: ops.n_points,
            gap: window.len() as f64,
            tol: 5.0,
        });
    }

    let global_max = psi_hat.iter().map(|c| c.norm()).fold(0.0_f64, f64::max);
    let window_max = window
        .iter()
        .map(|&i| psi_hat[i].norm())
        .fold(0.0_f64, f64::max);
    if global_max == 0.0 || window_max <= 1e-13 * global_max {
        return Ok(DecayFit {
            fitted_rate: 0.0,
            predicted_rate,
            window_points: window.len(),
            flat_signal: true,
        });
    }

    let pts: Vec<(f64, f64)> = window
        .iter()
        .filter(|&&i| psi_hat[i].norm() > 0.0)
        .map(|&i| (1.0 - ops.nodes[i], psi_hat[i].norm().ln()))
        .collect();
    let m = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    Ok(DecayFit {
        fitted_rate: -slope,
        predicted_rate,
        window_points: pts.len(),
        flat_signal: false,
    })
}
