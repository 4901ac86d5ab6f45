//! Picard iteration for the steady nonlinear perturbation system on a
//! periodic pipe.
//!
//! The infinite pipe is truncated to one axial period `L` — the single
//! largest modeling departure in this toolkit; long periods approximate
//! localized forcing. Fields are stored as a half spectrum of Fourier modes
//! `ξ_k = 2πk/L`, `k = 0..=K`, with negative modes implied by conjugation,
//! so real-valuedness is structural. The iteration is
//!
//! `v₀ = T F`, `v_{j+1} = T F + T N(v_j)`,
//!
//! where `T` solves the linearized per-mode problems (stream function for
//! the meridional part, swirl for the azimuthal part) and `N` is the
//! quadratic perturbation nonlinearity, evaluated pointwise in physical
//! `z`-space on `3K+1` planes so that products of band-limited fields are
//! dealiased exactly. Pressure never appears: residuals are measured on the
//! fourth-order stream form and the swirl equation, which is the curl of
//! the momentum equations.

use nalgebra::DVector;
use serde::Serialize;

use crate::baseflow::{poiseuille_profile, FlowParams, PoiseuilleProfile};
use crate::error::Error;
use crate::harness::{swirl_velocity_mode_norms, velocity_mode_norms};
use crate::radial::{build_radial_operators, RadialOperators};
use crate::stream::{assemble_mode_operator, complex_matvec, solve_mode, ModeForcing};
use crate::swirl::{solve_swirl_mode, swirl_backward_error_extrema};
use crate::{Result, C64};

const PI: f64 = std::f64::consts::PI;

/// One Fourier mode of a velocity field, with its stream function.
#[derive(Debug, Clone)]
pub struct FieldMode {
    /// Stream function `ψ̂_k`, the primitive of the meridional part.
    pub psi_hat: DVector<C64>,
    /// `v̂ʳ_k = iξ_k ψ̂_k`.
    pub v_r_hat: DVector<C64>,
    /// Azimuthal component `v̂ᶿ_k`.
    pub v_theta_hat: DVector<C64>,
    /// `v̂ᶻ_k = −(rψ̂_k)′/r`.
    pub v_z_hat: DVector<C64>,
}

impl FieldMode {
    fn zero(n: usize) -> Self {
        let z = DVector::from_element(n, C64::new(0.0, 0.0));
        Self {
            psi_hat: z.clone(),
            v_r_hat: z.clone(),
            v_theta_hat: z.clone(),
            v_z_hat: z,
        }
    }
}

/// An axisymmetric velocity field on a periodic pipe, stored as the modes
/// `k = 0..=K`; the modes `−k` are the conjugates, so the physical field is
/// real by construction.
#[derive(Debug, Clone)]
pub struct AxisymField {
    /// Axial period `L`.
    pub period_length: f64,
    /// Modes indexed by `k`; `modes[0]` is the mean and is kept real.
    pub modes: Vec<FieldMode>,
}

/// One Fourier mode of a forcing field.
#[derive(Debug, Clone)]
pub struct ForcingMode {
    pub f_r_hat: DVector<C64>,
    pub f_theta_hat: DVector<C64>,
    pub f_z_hat: DVector<C64>,
}

impl ForcingMode {
    fn zero(n: usize) -> Self {
        let z = DVector::from_element(n, C64::new(0.0, 0.0));
        Self {
            f_r_hat: z.clone(),
            f_theta_hat: z.clone(),
            f_z_hat: z,
        }
    }
}

/// A forcing field in the same half-spectrum layout as [`AxisymField`].
#[derive(Debug, Clone)]
pub struct ForcingModes {
    pub period_length: f64,
    pub modes: Vec<ForcingMode>,
}

impl ForcingModes {
    /// Zero forcing with `max_mode + 1` stored modes on `n` radial nodes.
    pub fn zero(period_length: f64, max_mode: usize, n: usize) -> Self {
        Self {
            period_length,
            modes: (0..=max_mode).map(|_| ForcingMode::zero(n)).collect(),
        }
    }

    /// Places the given radial shapes at one mode index, zeros elsewhere.
    pub fn single_mode(
        period_length: f64,
        max_mode: usize,
        k: usize,
        f_r_hat: DVector<C64>,
        f_theta_hat: DVector<C64>,
        f_z_hat: DVector<C64>,
    ) -> Result<Self> {
        if k > max_mode {
            return Err(Error::InvalidParameter(format!(
                "active mode {k} exceeds the stored band {max_mode}"
            )));
        }
        let mut out = Self::zero(period_length, max_mode, f_r_hat.len());
        out.modes[k] = ForcingMode {
            f_r_hat,
            f_theta_hat,
            f_z_hat,
        };
        Ok(out)
    }

    pub fn max_mode(&self) -> usize {
        self.modes.len() - 1
    }

    /// Wavenumber of stored mode `k`.
    pub fn xi(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.period_length
    }

    /// Mode-wise sum; shapes must agree.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.modes.len() != other.modes.len() || self.period_length != other.period_length {
            return Err(Error::InvalidParameter(
                "forcing fields differ in period or band".into(),
            ));
        }
        Ok(Self {
            period_length: self.period_length,
            modes: self
                .modes
                .iter()
                .zip(&other.modes)
                .map(|(a, b)| ForcingMode {
                    f_r_hat: &a.f_r_hat + &b.f_r_hat,
                    f_theta_hat: &a.f_theta_hat + &b.f_theta_hat,
                    f_z_hat: &a.f_z_hat + &b.f_z_hat,
                })
                .collect(),
        })
    }

    /// `L²`-type field norm: mode sums weighted `2 − δ_{k0}` for the
    /// implied conjugate modes.
    pub fn norm(&self, ops: &RadialOperators) -> f64 {
        self.modes
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let w = if k == 0 { 1.0 } else { 2.0 };
                w * (ops.norm_sq_r(&m.f_r_hat)
                    + ops.norm_sq_r(&m.f_theta_hat)
                    + ops.norm_sq_r(&m.f_z_hat))
            })
            .sum::<f64>()
            .sqrt()
    }

    /// True when every azimuthal component vanishes identically.
    pub fn is_swirl_free(&self) -> bool {
        self.modes
            .iter()
            .all(|m| m.f_theta_hat.iter().all(|c| c.norm() == 0.0))
    }

    /// Rescales every mode.
    pub fn scaled(&self, factor: f64) -> Self {
        let s = C64::new(factor, 0.0);
        Self {
            period_length: self.period_length,
            modes: self
                .modes
                .iter()
                .map(|m| ForcingMode {
                    f_r_hat: &m.f_r_hat * s,
                    f_theta_hat: &m.f_theta_hat * s,
                    f_z_hat: &m.f_z_hat * s,
                })
                .collect(),
        }
    }
}

impl AxisymField {
    /// Zero field with `max_mode + 1` stored modes on `n` radial nodes.
    pub fn zero(period_length: f64, max_mode: usize, n: usize) -> Self {
        Self {
            period_length,
            modes: (0..=max_mode).map(|_| FieldMode::zero(n)).collect(),
        }
    }

    pub fn max_mode(&self) -> usize {
        self.modes.len() - 1
    }

    /// Number of signed Fourier modes the field represents.
    pub fn n_signed_modes(&self) -> usize {
        2 * self.max_mode() + 1
    }

    /// Wavenumber of stored mode `k`.
    pub fn xi(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.period_length
    }

    /// Mode-wise difference; shapes must agree.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.modes.len() != other.modes.len() || self.period_length != other.period_length {
            return Err(Error::InvalidParameter(
                "fields differ in period or band".into(),
            ));
        }
        Ok(Self {
            period_length: self.period_length,
            modes: self
                .modes
                .iter()
                .zip(&other.modes)
                .map(|(a, b)| FieldMode {
                    psi_hat: &a.psi_hat - &b.psi_hat,
                    v_r_hat: &a.v_r_hat - &b.v_r_hat,
                    v_theta_hat: &a.v_theta_hat - &b.v_theta_hat,
                    v_z_hat: &a.v_z_hat - &b.v_z_hat,
                })
                .collect(),
        })
    }

    /// Rescales every mode, preserving all structural invariants.
    pub fn scaled(&self, factor: f64) -> Self {
        let s = C64::new(factor, 0.0);
        Self {
            period_length: self.period_length,
            modes: self
                .modes
                .iter()
                .map(|m| FieldMode {
                    psi_hat: &m.psi_hat * s,
                    v_r_hat: &m.v_r_hat * s,
                    v_theta_hat: &m.v_theta_hat * s,
                    v_z_hat: &m.v_z_hat * s,
                })
                .collect(),
        }
    }

    /// `L²`-type field norm with conjugate-mode weights.
    pub fn norm(&self, ops: &RadialOperators) -> f64 {
        self.modes
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let w = if k == 0 { 1.0 } else { 2.0 };
                w * (ops.norm_sq_r(&m.v_r_hat)
                    + ops.norm_sq_r(&m.v_theta_hat)
                    + ops.norm_sq_r(&m.v_z_hat))
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Interpolation-norm proxy of order `5/4`, combining meridional and
    /// azimuthal parts across modes.
    pub fn h54_norm(&self, ops: &RadialOperators) -> f64 {
        self.modes
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let w = if k == 0 { 1.0 } else { 2.0 };
                let xi = self.xi(k);
                let merid = velocity_mode_norms(xi, &m.v_r_hat, &m.v_z_hat, ops).h54();
                let swirl = swirl_velocity_mode_norms(xi, &m.v_theta_hat, ops).h54();
                w * (merid * merid + swirl * swirl)
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Largest relative per-mode divergence defect
    /// `|(rv̂ʳ)′/r + iξ v̂ᶻ|` against the size of its terms.
    pub fn divergence_defect(&self, ops: &RadialOperators) -> f64 {
        let mut worst = 0.0_f64;
        for (k, m) in self.modes.iter().enumerate() {
            let xi = self.xi(k);
            let dvr = complex_matvec(&ops.d1, &m.v_r_hat);
            for i in 0..ops.n_points {
                let radial = m.v_r_hat[i] / ops.nodes[i] + dvr[i];
                let axial = C64::new(0.0, xi) * m.v_z_hat[i];
                let defect = (radial + axial).norm();
                let scale = m.v_r_hat[i].norm() / ops.nodes[i] + dvr[i].norm() + axial.norm();
                if scale > 0.0 {
                    worst = worst.max(defect / scale.max(1e-300));
                }
            }
        }
        worst
    }

    /// Net axial flux carried by the mean mode (must vanish: perturbations
    /// are flux-free).
    pub fn mean_flux(&self, ops: &RadialOperators) -> f64 {
        ops.quad_r(&self.modes[0].v_z_hat).norm()
    }

    fn strip_mean_imag(&mut self) {
        let mean = &mut self.modes[0];
        for v in [
            &mut mean.psi_hat,
            &mut mean.v_r_hat,
            &mut mean.v_theta_hat,
            &mut mean.v_z_hat,
        ] {
            for c in v.iter_mut() {
                c.im = 0.0;
            }
        }
    }
}

/// Applies the linear solution operator mode by mode: the meridional system
/// through the stream formulation and, when slip is positive, the swirl
/// system.
///
/// Azimuthal forcing with `α = 0` is rejected: the homogeneous swirl
/// problem then carries the rigid-rotation kernel and loses uniqueness.
/// With zero azimuthal forcing the swirl component is exactly zero and no
/// swirl solve runs, so `α = 0` remains usable for swirl-free problems.
pub fn apply_t(
    forcing: &ForcingModes,
    profile: &PoiseuilleProfile,
    ops: &RadialOperators,
) -> Result<AxisymField> {
    let alpha = profile.params.alpha;
    if alpha == 0.0 && !forcing.is_swirl_free() {
        return Err(Error::InvalidParameter(
            "azimuthal forcing with alpha = 0: the swirl problem admits the \
             rigid-rotation kernel v = beta*r and has no unique solution"
                .into(),
        ));
    }
    let mut field = AxisymField::zero(forcing.period_length, forcing.max_mode(), ops.n_points);
    for (k, fm) in forcing.modes.iter().enumerate() {
        let xi = forcing.xi(k);
        let mode_forcing = ModeForcing::new(xi, fm.f_r_hat.clone(), fm.f_z_hat.clone());
        let sol = solve_mode(&mode_forcing, profile, ops)?;
        field.modes[k].psi_hat = sol.psi_hat;
        field.modes[k].v_r_hat = sol.v_r_hat;
        field.modes[k].v_z_hat = sol.v_z_hat;
        if fm.f_theta_hat.iter().any(|c| c.norm() > 0.0) {
            let swirl = solve_swirl_mode(xi, &fm.f_theta_hat, profile, ops, alpha)?;
            field.modes[k].v_theta_hat = swirl.v_theta_hat;
        }
    }
    field.strip_mean_imag();
    Ok(field)
}

/// Fraction of the largest radial-velocity amplitude tolerated at the
/// innermost node; a regular field decays linearly toward the axis and
/// sits far below this.
const AXIS_TOL: f64 = 0.2;

/// Quadratic perturbation nonlinearity, evaluated in physical `z`-space on
/// `3K+1` planes (products of `K`-band fields are `2K`-band, so the
/// transform pair is alias-free) and returned as forcing modes:
///
/// `Fʳ = −(vʳ∂ᵣvʳ + vᶻ∂_zvʳ) + (vᶿ)²/r`,
/// `Fᶻ = −(vʳ∂ᵣvᶻ + vᶻ∂_zvᶻ)`,
/// `Fᶿ = −(vʳ∂ᵣvᶿ + vᶻ∂_zvᶿ) − vʳvᶿ/r`.
///
/// The `1/r` factors are finite because regular axisymmetric fields have
/// `vʳ, vᶿ` vanishing linearly at the axis; a field whose radial velocity
/// fails to decay toward the innermost node is rejected.
pub fn nonlinear_terms(v: &AxisymField, ops: &RadialOperators) -> Result<ForcingModes> {
    let kmax = v.max_mode();
    let n = ops.n_points;
    let m_planes = 3 * kmax + 1;

    // Radial and axial derivatives per mode, then everything to z-space.
    let mut vr_modes = Vec::with_capacity(kmax + 1);
    let mut vt_modes = Vec::with_capacity(kmax + 1);
    let mut vz_modes = Vec::with_capacity(kmax + 1);
    let mut dvr_modes = Vec::with_capacity(kmax + 1);
    let mut dvt_modes = Vec::with_capacity(kmax + 1);
    let mut dvz_modes = Vec::with_capacity(kmax + 1);
    let mut zvr_modes = Vec::with_capacity(kmax + 1);
    let mut zvt_modes = Vec::with_capacity(kmax + 1);
    let mut zvz_modes = Vec::with_capacity(kmax + 1);
    for (k, mode) in v.modes.iter().enumerate() {
        let i_xi = C64::new(0.0, v.xi(k));
        vr_modes.push(mode.v_r_hat.clone());
        vt_modes.push(mode.v_theta_hat.clone());
        vz_modes.push(mode.v_z_hat.clone());
        dvr_modes.push(complex_matvec(&ops.d1, &mode.v_r_hat));
        dvt_modes.push(complex_matvec(&ops.d1, &mode.v_theta_hat));
        dvz_modes.push(complex_matvec(&ops.d1, &mode.v_z_hat));
        zvr_modes.push(&mode.v_r_hat * i_xi);
        zvt_modes.push(&mode.v_theta_hat * i_xi);
        zvz_modes.push(&mode.v_z_hat * i_xi);
    }
    let vr = to_physical(&vr_modes, m_planes);
    let vt = to_physical(&vt_modes, m_planes);
    let vz = to_physical(&vz_modes, m_planes);
    let dvr = to_physical(&dvr_modes, m_planes);
    let dvt = to_physical(&dvt_modes, m_planes);
    let dvz = to_physical(&dvz_modes, m_planes);
    let zvr = to_physical(&zvr_modes, m_planes);
    let zvt = to_physical(&zvt_modes, m_planes);
    let zvz = to_physical(&zvz_modes, m_planes);

    // Axis-regularity gate on the innermost node.
    let global = vr.iter().flatten().fold(0.0_f64, |a, &x| a.max(x.abs()));
    let axis = vr[0].iter().fold(0.0_f64, |a, &x| a.max(x.abs()));
    if global > 0.0 && axis > AXIS_TOL * global {
        return Err(Error::InvalidParameter(format!(
            "radial velocity does not vanish toward the axis: |v^r| = {axis:.3e} at \
             r = {:.3e} against a field amplitude of {global:.3e}",
            ops.nodes[0]
        )));
    }

    let mut f_r = vec![vec![0.0; m_planes]; n];
    let mut f_t = vec![vec![0.0; m_planes]; n];
    let mut f_z = vec![vec![0.0; m_planes]; n];
    for i in 0..n {
        let r = ops.nodes[i];
        for m in 0..m_planes {
            f_r[i][m] = -(vr[i][m] * dvr[i][m] + vz[i][m] * zvr[i][m]) + vt[i][m] * vt[i][m] / r;
            f_z[i][m] = -(vr[i][m] * dvz[i][m] + vz[i][m] * zvz[i][m]);
            f_t[i][m] = -(vr[i][m] * dvt[i][m] + vz[i][m] * zvt[i][m]) - vr[i][m] * vt[i][m] / r;
        }
    }

    Ok(ForcingModes {
        period_length: v.period_length,
        modes: (0..=kmax)
            .map(|k| ForcingMode {
                f_r_hat: to_mode(&f_r, k, n, m_planes),
                f_theta_hat: to_mode(&f_t, k, n, m_planes),
                f_z_hat: to_mode(&f_z, k, n, m_planes),
            })
            .collect(),
    })
}

/// Synthesis: real physical samples on `m_planes` equispaced `z`-planes.
fn to_physical(modes: &[DVector<C64>], m_planes: usize) -> Vec<Vec<f64>> {
    let n = modes[0].len();
    let mut out = vec![vec![0.0; m_planes]; n];
    for i in 0..n {
        for (m, row) in out[i].iter_mut().enumerate() {
            let mut acc = modes[0][i].re;
            for (k, mode) in modes.iter().enumerate().skip(1) {
                let angle = 2.0 * PI * (k * m) as f64 / m_planes as f64;
                let phase = C64::new(angle.cos(), angle.sin());
                acc += 2.0 * (mode[i] * phase).re;
            }
            *row = acc;
        }
    }
    out
}

/// Analysis: mode `k` of real physical samples.
fn to_mode(phys: &[Vec<f64>], k: usize, n: usize, m_planes: usize) -> DVector<C64> {
    DVector::from_fn(n, |i, _| {
        let mut acc = C64::new(0.0, 0.0);
        for (m, &value) in phys[i].iter().enumerate() {
            let angle = -2.0 * PI * (k * m) as f64 / m_planes as f64;
            acc += value * C64::new(angle.cos(), angle.sin());
        }
        acc / m_planes as f64
    })
}

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Termination {
    /// Relative increment fell below the tolerance.
    Converged,
    /// Iteration budget exhausted without convergence.
    MaxIters,
    /// Increments grew over five consecutive iterations.
    Diverged,
}

/// Telemetry for one Picard iterate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IterationEntry {
    pub iteration: usize,
    /// Curl-form momentum backward error of this iterate against the total
    /// forcing it should balance.
    pub residual_norm: f64,
    /// Relative increment from the previous iterate, in the `5/4`-order
    /// interpolation norm.
    pub increment_norm: f64,
    /// Field norm of order `5/4` of the iterate.
    pub membership_norm: f64,
    /// Reference scale `Φ^{1/16}·‖F‖` for the membership norm.
    pub membership_scale: f64,
    /// `‖vʳ‖ + ‖∂_z vᶻ‖` across modes.
    pub smallness_norm: f64,
    /// Reference scale `Φ^{−1/10}·‖F‖` for the smallness norm.
    pub smallness_scale: f64,
}

/// Full iteration history plus the stopping reason.
#[derive(Debug, Clone, Serialize)]
pub struct IterationTrace {
    pub entries: Vec<IterationEntry>,
    pub termination: Termination,
}

impl IterationTrace {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}

/// Iteration controls; the defaults match the acceptance gates.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PicardConfig {
    /// Iteration budget.
    pub max_iters: usize,
    /// Relative-increment stopping tolerance.
    pub tol: f64,
    /// Radial grid size.
    pub n_points: usize,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            max_iters: 50,
            tol: 1e-10,
            n_points: 64,
        }
    }
}

/// Runs the Picard iteration from the linear solution `T F`.
pub fn picard_iterate(
    forcing: &ForcingModes,
    params: FlowParams,
    config: &PicardConfig,
) -> Result<(AxisymField, IterationTrace)> {
    picard_iterate_from(forcing, params, config, None)
}

/// Runs the Picard iteration from an explicit starting field (used by the
/// uniqueness probe); `None` starts from the linear solution.
///
/// Divergence is a reported outcome, not an error: the trace comes back
/// with the `Diverged` termination and the last iterate.
pub fn picard_iterate_from(
    forcing: &ForcingModes,
    params: FlowParams,
    config: &PicardConfig,
    start: Option<&AxisymField>,
) -> Result<(AxisymField, IterationTrace)> {
    let ops = build_radial_operators(config.n_points)?;
    let profile = poiseuille_profile(params, &ops);
    if forcing.modes[0].f_r_hat.len() != ops.n_points {
        return Err(Error::InvalidParameter(format!(
            "forcing sampled on {} nodes, iteration grid has {}",
            forcing.modes[0].f_r_hat.len(),
            ops.n_points
        )));
    }
    let forcing_norm = forcing.norm(&ops);
    let membership_scale = params.phi.powf(1.0 / 16.0) * forcing_norm;
    let smallness_scale = params.phi.powf(-0.1) * forcing_norm;

    let mut v_prev = AxisymField::zero(forcing.period_length, forcing.max_mode(), ops.n_points);
    let mut v = match start {
        Some(field) => field.clone(),
        None => apply_t(forcing, &profile, &ops)?,
    };

    let mut entries: Vec<IterationEntry> = Vec::new();
    let termination = loop {
        let j = entries.len();
        let nl = nonlinear_terms(&v, &ops)?;
        let total = forcing.add(&nl)?;
        let residual_norm = momentum_residual(&v, &total, &profile, &ops)?;
        let increment_norm =
            v.sub(&v_prev)?.h54_norm(&ops) / v.h54_norm(&ops).max(f64::MIN_POSITIVE);
        let smallness = smallness_quantity(&v, &ops);
        entries.push(IterationEntry {
            iteration: j,
            residual_norm,
            increment_norm,
            membership_norm: v.h54_norm(&ops),
            membership_scale,
            smallness_norm: smallness,
            smallness_scale,
        });

        if increment_norm <= config.tol {
            break Termination::Converged;
        }
        if entries.len() >= 6
            && entries
                .windows(2)
                .rev()
                .take(5)
                .all(|w| w[1].increment_norm > w[0].increment_norm)
        {
            break Termination::Diverged;
        }
        if j >= config.max_iters {
            break Termination::MaxIters;
        }
        v_prev = v;
        v = apply_t(&total, &profile, &ops)?;
    };

    Ok((
        v,
        IterationTrace {
            entries,
            termination,
        },
    ))
}

/// `‖vʳ‖ + ‖∂_z vᶻ‖` across modes with conjugate weights.
fn smallness_quantity(v: &AxisymField, ops: &RadialOperators) -> f64 {
    let mut vr_sq = 0.0;
    let mut dzvz_sq = 0.0;
    for (k, m) in v.modes.iter().enumerate() {
        let w = if k == 0 { 1.0 } else { 2.0 };
        let xi = v.xi(k);
        vr_sq += w * ops.norm_sq_r(&m.v_r_hat);
        dzvz_sq += w * xi * xi * ops.norm_sq_r(&m.v_z_hat);
    }
    vr_sq.sqrt() + dzvz_sq.sqrt()
}

/// Field-scaled backward error of the field against the stream and swirl
/// equations with the given total forcing — the momentum residual with the
/// pressure eliminated.
///
/// The numerator is the largest interior row defect across all modes; the
/// scale is the largest row magnitude across all modes. Per-mode relative
/// errors would let modes whose content is pure roundoff (hit by a tiny
/// freshly produced quadratic forcing) report order-one failures that say
/// nothing about the field; the shared scale keeps the report proportional
/// to how well the field as a whole balances its equations.
pub fn momentum_residual(
    v: &AxisymField,
    total: &ForcingModes,
    profile: &PoiseuilleProfile,
    ops: &RadialOperators,
) -> Result<f64> {
    let mut defect = 0.0_f64;
    let mut scale = 0.0_f64;
    for (k, (vm, fm)) in v.modes.iter().zip(&total.modes).enumerate() {
        let xi = v.xi(k);
        let op = assemble_mode_operator(xi, profile, ops)?;
        let mode_forcing = ModeForcing::new(xi, fm.f_r_hat.clone(), fm.f_z_hat.clone());
        let f_hat = mode_forcing.scalar_forcing(ops)?;
        let (d, s) = op.backward_error_extrema(&vm.psi_hat, &f_hat);
        defect = defect.max(d);
        scale = scale.max(s);

        let swirl_active = vm.v_theta_hat.iter().any(|c| c.norm() > 0.0)
            || fm.f_theta_hat.iter().any(|c| c.norm() > 0.0);
        if swirl_active {
            let (d, s) = swirl_backward_error_extrema(
                xi,
                &vm.v_theta_hat,
                &fm.f_theta_hat,
                profile,
                ops,
                profile.params.alpha,
            );
            defect = defect.max(d);
            scale = scale.max(s);
        }
    }
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(defect / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::ForcingFamily;
    use crate::radial::resolution_for_beta;
    use crate::regime::beta_theta;

    fn samples(ops: &RadialOperators, f: impl Fn(f64) -> f64) -> DVector<C64> {
        DVector::from_fn(ops.n_points, |i, _| C64::new(f(ops.nodes[i]), 0.0))
    }

    /// Default smooth meridional shapes at mode `k`, scaled to a total
    /// field norm of `amplitude`.
    fn single_mode_family(
        ops: &RadialOperators,
        period: f64,
        max_mode: usize,
        k: usize,
        amplitude: f64,
    ) -> ForcingModes {
        let (f_r, f_z) = ForcingFamily::DefaultSmooth.stream_pair(ops);
        let zero = DVector::from_element(ops.n_points, C64::new(0.0, 0.0));
        let base = ForcingModes::single_mode(period, max_mode, k, f_r, zero, f_z).unwrap();
        let norm = base.norm(ops);
        base.scaled(amplitude / norm)
    }

    #[test]
    fn zero_forcing_converges_immediately_to_zero() {
        let config = PicardConfig {
            n_points: 32,
            ..Default::default()
        };
        let forcing = ForcingModes::zero(2.0 * PI, 4, 32);
        let params = FlowParams::new(10.0, 1.0).unwrap();
        let (v, trace) = picard_iterate(&forcing, params, &config).unwrap();
        assert!(trace.converged());
        assert_eq!(trace.entries.len(), 1);
        let ops = build_radial_operators(32).unwrap();
        assert_eq!(v.norm(&ops), 0.0);
        assert_eq!(trace.entries[0].residual_norm, 0.0);
    }

    #[test]
    fn apply_t_agrees_with_per_mode_solvers() {
        let ops = build_radial_operators(48).unwrap();
        let params = FlowParams::new(50.0, 2.0).unwrap();
        let profile = poiseuille_profile(params, &ops);
        let period = 2.0 * PI;
        let (f_r, f_z) = ForcingFamily::DefaultSmooth.stream_pair(&ops);
        let f_t = ForcingFamily::DefaultSmooth.swirl_component(&ops);
        let forcing =
            ForcingModes::single_mode(period, 3, 2, f_r.clone(), f_t.clone(), f_z.clone()).unwrap();

        let field = apply_t(&forcing, &profile, &ops).unwrap();
        let xi = forcing.xi(2);
        let direct = solve_mode(&ModeForcing::new(xi, f_r, f_z), &profile, &ops).unwrap();
        let swirl = solve_swirl_mode(xi, &f_t, &profile, &ops, 2.0).unwrap();
        assert!((&field.modes[2].psi_hat - &direct.psi_hat).norm() <= 1e-14);
        assert!((&field.modes[2].v_theta_hat - &swirl.v_theta_hat).norm() <= 1e-14);
        for k in [0usize, 1, 3] {
            assert_eq!(field.modes[k].psi_hat.norm(), 0.0);
            assert_eq!(field.modes[k].v_theta_hat.norm(), 0.0);
        }
        // Structural invariants of the solved field.
        assert!(field.divergence_defect(&ops) <= 1e-8);
        assert!(field.mean_flux(&ops) <= 1e-12);
    }

    #[test]
    fn apply_t_rejects_swirl_forcing_without_slip() {
        let ops = build_radial_operators(32).unwrap();
        let params = FlowParams::new(10.0, 0.0).unwrap();
        let profile = poiseuille_profile(params, &ops);
        let f_t = ForcingFamily::DefaultSmooth.swirl_component(&ops);
        let zero = DVector::from_element(32, C64::new(0.0, 0.0));
        let forcing = ForcingModes::single_mode(2.0 * PI, 2, 1, zero.clone(), f_t, zero).unwrap();
        assert!(apply_t(&forcing, &profile, &ops).is_err());
    }

    #[test]
    fn manufactured_quintic_embeds_at_mode_one() {
        // With period 2π the first mode has ξ = 1; drive it with the scalar
        // forcing realized through F̂ʳ = f̂/(iξ), and the stream mode must
        // be the quintic cr + (1−c)r³ − r⁵ with c = −(8+α)/(4+α).
        let params = FlowParams::new(PI, 4.0).unwrap();
        let ops = build_radial_operators(48).unwrap();
        let profile = poiseuille_profile(params, &ops);
        let c = -1.5;
        let want = samples(&ops, |r| c * r + (1.0 - c) * r * r * r - r.powi(5));

        // f̂ = iξU(Lψ − ξ²ψ) − (L²ψ − 2ξ²Lψ + ξ⁴ψ) evaluated analytically.
        let lpsi = samples(&ops, |r| 8.0 * (1.0 - c) * r - 24.0 * r * r * r);
        let llpsi = samples(&ops, |r| -192.0 * r);
        let f_hat = DVector::from_fn(ops.n_points, |i, _| {
            let u = profile.u_bar[i];
            C64::new(0.0, u) * (lpsi[i] - want[i]) - (llpsi[i] - 2.0 * lpsi[i] + want[i])
        });
        let f_r = f_hat.map(|z| z / C64::new(0.0, 1.0));
        let zero = DVector::from_element(ops.n_points, C64::new(0.0, 0.0));
        let forcing = ForcingModes::single_mode(2.0 * PI, 2, 1, f_r, zero.clone(), zero).unwrap();

        let field = apply_t(&forcing, &profile, &ops).unwrap();
        let err = (&field.modes[1].psi_hat - &want)
            .iter()
            .map(|z| z.norm())
            .fold(0.0_f64, f64::max);
        let scale = want.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
        assert!(err / scale <= 1e-8, "relative error {:.3e}", err / scale);
        assert_eq!(field.modes[2].psi_hat.norm(), 0.0);
    }

    #[test]
    fn nonlinear_terms_oracles() {
        let ops = build_radial_operators(32).unwrap();
        // Zero field maps to zero forcing.
        let zero_field = AxisymField::zero(2.0 * PI, 3, 32);
        let f = nonlinear_terms(&zero_field, &ops).unwrap();
        assert_eq!(f.norm(&ops), 0.0);

        // A z-independent swirl-free shear (0, 0, g(r)) transports nothing.
        let mut shear = AxisymField::zero(2.0 * PI, 3, 32);
        shear.modes[0].v_z_hat = samples(&ops, |r| 1.0 - r * r);
        let f = nonlinear_terms(&shear, &ops).unwrap();
        assert_eq!(f.norm(&ops), 0.0);

        // Rigid rotation vᶿ = r: centripetal term (vᶿ)²/r = r, no swirl
        // transport.
        let mut rot = AxisymField::zero(2.0 * PI, 3, 32);
        rot.modes[0].v_theta_hat = samples(&ops, |r| r);
        let f = nonlinear_terms(&rot, &ops).unwrap();
        let want = samples(&ops, |r| r);
        assert!((&f.modes[0].f_r_hat - &want).norm() <= 1e-12);
        assert_eq!(f.modes[0].f_theta_hat.norm(), 0.0);
        assert_eq!(f.modes[0].f_z_hat.norm(), 0.0);
        for k in 1..=3 {
            assert!(f.modes[k].f_r_hat.norm() <= 1e-14);
        }

        // A radial velocity that does not vanish at the axis is rejected.
        let mut bad = AxisymField::zero(2.0 * PI, 3, 32);
        bad.modes[1].v_r_hat = samples(&ops, |_| 1.0);
        assert!(nonlinear_terms(&bad, &ops).is_err());
    }

    #[test]
    fn small_forcing_contracts_geometrically() {
        let config = PicardConfig {
            n_points: 48,
            ..Default::default()
        };
        let ops = build_radial_operators(48).unwrap();
        let forcing = single_mode_family(&ops, 2.0 * PI, 8, 1, 1e-3);
        assert_eq!(ForcingModes::zero(1.0, 8, 4).modes.len(), 9);
        let params = FlowParams::new(10.0, 1.0).unwrap();
        let (v, trace) = picard_iterate(&forcing, params, &config).unwrap();
        assert!(trace.converged(), "trace: {:?}", trace.termination);

        // Geometric contraction beyond the second iterate.
        for w in trace.entries[2..].windows(2) {
            if w[1].increment_norm > config.tol {
                assert!(
                    w[1].increment_norm <= 0.5 * w[0].increment_norm,
                    "increments {:?}",
                    trace
                        .entries
                        .iter()
                        .map(|e| e.increment_norm)
                        .collect::<Vec<_>>()
                );
            }
        }
        // Converged momentum residual in curl form.
        let last = trace.entries.last().unwrap();
        assert!(
            last.residual_norm <= 10.0 * config.tol,
            "residual history {:?}, increments {:?}",
            trace
                .entries
                .iter()
                .map(|e| e.residual_norm)
                .collect::<Vec<_>>(),
            trace
                .entries
                .iter()
                .map(|e| e.increment_norm)
                .collect::<Vec<_>>()
        );

        // Structural invariants hold at the fixed point.
        assert!(v.divergence_defect(&ops) <= 1e-8);
        assert!(v.mean_flux(&ops) <= 1e-14);
        assert_eq!(v.n_signed_modes(), 17);

        // Fixed-point property: one more application of the map moves the
        // field by no more than the stopping tolerance's scale.
        let profile = poiseuille_profile(params, &ops);
        let nl = nonlinear_terms(&v, &ops).unwrap();
        let total = forcing.add(&nl).unwrap();
        let again = apply_t(&total, &profile, &ops).unwrap();
        let moved = again.sub(&v).unwrap().h54_norm(&ops) / v.h54_norm(&ops).max(f64::MIN_POSITIVE);
        assert!(moved <= 10.0 * config.tol, "fixed-point defect {moved:.3e}");
    }

    #[test]
    fn distinct_warm_starts_reach_the_same_fixed_point() {
        let config = PicardConfig {
            n_points: 48,
            ..Default::default()
        };
        let ops = build_radial_operators(48).unwrap();
        let forcing = single_mode_family(&ops, 2.0 * PI, 8, 1, 1e-3);
        let params = FlowParams::new(10.0, 1.0).unwrap();
        let (v_cold, trace_cold) = picard_iterate(&forcing, params, &config).unwrap();
        assert!(trace_cold.converged());

        let profile = poiseuille_profile(params, &ops);
        let v0 = apply_t(&forcing, &profile, &ops).unwrap();
        let warm = v0.scaled(1.5);
        let (v_warm, trace_warm) =
            picard_iterate_from(&forcing, params, &config, Some(&warm)).unwrap();
        assert!(trace_warm.converged());

        let diff =
            v_warm.sub(&v_cold).unwrap().norm(&ops) / v_cold.norm(&ops).max(f64::MIN_POSITIVE);
        assert!(
            diff <= 10.0 * config.tol,
            "fixed points differ by {diff:.3e}"
        );
    }

    #[test]
    fn large_flux_solutions_meet_the_smallness_proxy() {
        // Forcing of norm Φ^{1/40} at moderate grid: the converged field's
        // ‖vʳ‖ + ‖∂_z vᶻ‖ must sit within a factor 2 of Φ^{−1/10}·‖F‖.
        for phi in [1e3, 1e4] {
            let params = FlowParams::new(phi, 1.0).unwrap();
            let beta = beta_theta(params, 1.0).0;
            let n = resolution_for_beta(beta);
            let config = PicardConfig {
                n_points: n,
                ..Default::default()
            };
            let ops = build_radial_operators(n).unwrap();
            let forcing = single_mode_family(&ops, 2.0 * PI, 8, 1, phi.powf(1.0 / 40.0));
            let (_, trace) = picard_iterate(&forcing, params, &config).unwrap();
            assert!(trace.converged(), "phi = {phi}: {:?}", trace.termination);
            let last = trace.entries.last().unwrap();
            assert!(
                last.smallness_norm <= 2.0 * last.smallness_scale,
                "phi = {phi}: {:.3e} vs scale {:.3e}",
                last.smallness_norm,
                last.smallness_scale
            );
        }
    }
}
