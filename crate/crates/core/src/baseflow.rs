//! Laminar base profile of the pipe flow.
//!
//! For volumetric flux `Φ` and slip coefficient `α` the steady axial profile
//! is the generalized Poiseuille flow
//!
//! ```text
//! U(r) = (4 + 2α)/(4 + α) · (1 − 2α/(4 + 2α) · r²) · Φ/π
//! ```
//!
//! which carries flux `Φ` exactly and satisfies the slip condition
//! `U′(1) + α U(1) = 0` at the wall. The slip coefficient interpolates
//! between plug flow (`α = 0`) and the no-slip Hagen-Poiseuille parabola
//! (`α → ∞`). Viscosity is normalized to one throughout the crate.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::radial::RadialOperators;
use crate::Result;

/// Physical parameters of the base flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowParams {
    /// Volumetric flux `Φ ≥ 0`.
    pub phi: f64,
    /// Slip coefficient `α ≥ 0`.
    pub alpha: f64,
}

impl FlowParams {
    /// Validates and wraps `(Φ, α)`.
    pub fn new(phi: f64, alpha: f64) -> Result<Self> {
        if !phi.is_finite() || phi < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "flux phi must be finite and nonnegative, got {phi}"
            )));
        }
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "slip alpha must be finite and nonnegative, got {alpha}"
            )));
        }
        Ok(Self { phi, alpha })
    }
}

/// Base profile sampled on a radial grid, with its analytic derivative.
#[derive(Debug, Clone)]
pub struct PoiseuilleProfile {
    /// Parameters the profile was built from.
    pub params: FlowParams,
    /// `U(r)` at the nodes.
    pub u_bar: DVector<f64>,
    /// `U′(r)` at the nodes, sampled from the closed form rather than
    /// differentiated numerically, so profile error never enters solver
    /// convergence studies.
    pub du_bar: DVector<f64>,
}

impl PoiseuilleProfile {
    /// `U(r)` from the closed form at an arbitrary radius.
    pub fn u_at(&self, r: f64) -> f64 {
        let FlowParams { phi, alpha } = self.params;
        let lead = (4.0 + 2.0 * alpha) / (4.0 + alpha);
        let curv = 2.0 * alpha / (4.0 + 2.0 * alpha);
        lead * (1.0 - curv * r * r) * phi / std::f64::consts::PI
    }

    /// `U′(r)` from the closed form: `−(4α/(4+α)) · (Φ/π) · r`.
    pub fn du_at(&self, r: f64) -> f64 {
        let FlowParams { phi, alpha } = self.params;
        -(4.0 * alpha / (4.0 + alpha)) * phi / std::f64::consts::PI * r
    }
}

/// Samples the base profile and its derivative on the grid.
pub fn poiseuille_profile(params: FlowParams, ops: &RadialOperators) -> PoiseuilleProfile {
    let profile = PoiseuilleProfile {
        params,
        u_bar: DVector::zeros(ops.n_points),
        du_bar: DVector::zeros(ops.n_points),
    };
    let u_bar = DVector::from_fn(ops.n_points, |i, _| profile.u_at(ops.nodes[i]));
    let du_bar = DVector::from_fn(ops.n_points, |i, _| profile.du_at(ops.nodes[i]));
    PoiseuilleProfile {
        params,
        u_bar,
        du_bar,
    }
}
