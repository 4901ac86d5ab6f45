//! Radial collocation grid and operators on (0, 1].
//!
//! The grid is the Chebyshev-Gauss-Lobatto family mapped to [0, 1] with the
//! axis endpoint removed, so every retained node has `r > 0` and the factors
//! `1/r`, `1/r²` in the cylindrical operators stay finite. Values and
//! constraints at the axis are recovered through the interpolation row
//! evaluated at `r = 0` instead of a collocation node there.
//!
//! Provided operators: dense first/second derivative matrices, the singular
//! second-order operator `L = d²/dr² + (1/r) d/dr − 1/r²` that the
//! stream-function and swirl equations are built from, and quadrature weights
//! for the measures `r dr` and `dr/r`.

use nalgebra::{DMatrix, DVector};
use std::sync::OnceLock;

use crate::error::Error;
use crate::{Result, C64};

/// Radial grid with differentiation and quadrature operators.
///
/// Immutable after construction; shareable across threads.
#[derive(Debug, Clone)]
pub struct RadialOperators {
    /// Number of collocation nodes (all in `(0, 1]`, the last one at `r = 1`).
    pub n_points: usize,
    /// Strictly increasing node radii; `nodes[n_points - 1] == 1.0`.
    pub nodes: DVector<f64>,
    /// First-derivative matrix at the nodes.
    pub d1: DMatrix<f64>,
    /// Second-derivative matrix at the nodes.
    pub d2: DMatrix<f64>,
    /// The operator `L = d²/dr² + (1/r) d/dr − 1/r²` at the nodes.
    pub l_op: DMatrix<f64>,
    /// Weights for `∫₀¹ f(r) r dr`.
    pub quad_r: DVector<f64>,
    /// Weights for `∫₀¹ f(r) dr/r`; valid for integrands vanishing at least
    /// linearly at `r = 0`.
    pub quad_inv_r: DVector<f64>,
    /// Weights for the plain measure `∫₀¹ f(r) dr`.
    pub(crate) quad_plain: DVector<f64>,
    /// Interpolation row evaluating the nodal interpolant at `r = 0`.
    pub(crate) axis_row: DVector<f64>,
    /// Normalized barycentric weights of the node set.
    bary_w: DVector<f64>,
    /// Cached `L²`, built lazily for fourth-order assemblies.
    l_sq: OnceLock<DMatrix<f64>>,
}

/// Builds the radial operator table on `n_points` nodes.
///
/// Fourth-order problems with four boundary rows need a handful of interior
/// rows to be meaningful, so `n_points < 8` is rejected.
pub fn build_radial_operators(n_points: usize) -> Result<RadialOperators> {
    if n_points < 8 {
        return Err(Error::InvalidParameter(format!(
            "n_points = {n_points} is below the minimum of 8"
        )));
    }
    let n = n_points;

    // Gauss-Lobatto nodes of [0, 1], ascending, with the r = 0 endpoint
    // dropped: r_j = (1 − cos(jπ/n))/2 for j = 1..n. The wall r = 1 is the
    // last node.
    let nodes = DVector::from_fn(n, |i, _| {
        let j = (i + 1) as f64;
        0.5 * (1.0 - (std::f64::consts::PI * j / n as f64).cos())
    });

    // Barycentric weights. For the full Gauss-Lobatto set these are the
    // classic alternating-sign weights with halved endpoints; removing the
    // r = 0 node strikes its factor from each denominator product, which
    // multiplies the remaining weights by (r_i − 0). Only ratios matter, so
    // the common scale factor is dropped.
    let bary_w = DVector::from_fn(n, |i, _| {
        let sign = if (i + 1) % 2 == 0 { 1.0 } else { -1.0 };
        let endpoint = if i + 1 == n { 0.5 } else { 1.0 };
        sign * endpoint * nodes[i]
    });

    // First derivative via the barycentric formula, diagonal by the
    // negative-sum trick so constants differentiate to exactly zero.
    let mut d1 = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut row_sum = 0.0;
        for k in 0..n {
            if k != i {
                let v = (bary_w[k] / bary_w[i]) / (nodes[i] - nodes[k]);
                d1[(i, k)] = v;
                row_sum += v;
            }
        }
        d1[(i, i)] = -row_sum;
    }

    // Second derivative from the first by the Welfert recursion, again with
    // negative-sum diagonals.
    let mut d2 = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut row_sum = 0.0;
        for k in 0..n {
            if k != i {
                let v = 2.0 * d1[(i, k)] * (d1[(i, i)] - 1.0 / (nodes[i] - nodes[k]));
                d2[(i, k)] = v;
                row_sum += v;
            }
        }
        d2[(i, i)] = -row_sum;
    }

    let mut l_op = d2.clone();
    for i in 0..n {
        let r = nodes[i];
        for k in 0..n {
            l_op[(i, k)] += d1[(i, k)] / r;
        }
        l_op[(i, i)] -= 1.0 / (r * r);
    }

    // Quadrature: integrate each Lagrange basis polynomial exactly with a
    // Gauss-Legendre rule of more than sufficient order, against r dr and dr.
    let (gauss_x, gauss_w) = gauss_legendre_01(n + 2);
    let mut quad_r = DVector::zeros(n);
    let mut quad_plain = DVector::zeros(n);
    for (&x, &wq) in gauss_x.iter().zip(gauss_w.iter()) {
        let basis = lagrange_basis(&nodes, &bary_w, x);
        for i in 0..n {
            quad_r[i] += wq * x * basis[i];
            quad_plain[i] += wq * basis[i];
        }
    }
    // dr/r weights: apply the plain rule to f/r, folded into the weights.
    // For f vanishing linearly at the axis, f/r is as smooth as f itself,
    // so this keeps the full polynomial exactness of the plain rule.
    let quad_inv_r = DVector::from_fn(n, |i, _| quad_plain[i] / nodes[i]);

    let axis_row = lagrange_basis(&nodes, &bary_w, 0.0);

    Ok(RadialOperators {
        n_points: n,
        nodes,
        d1,
        d2,
        l_op,
        quad_r,
        quad_inv_r,
        quad_plain,
        axis_row,
        bary_w,
        l_sq: OnceLock::new(),
    })
}

/// Resolution policy for boundary-layer problems: layers of modulus `beta`
/// have width `~ beta^{-1/2}`, and eight points per e-fold of decay needs
/// `n = 8·⌈4·beta^{1/4}⌉`, floored at 48 and capped at the dense-matrix
/// budget of 512.
pub fn resolution_for_beta(beta: f64) -> usize {
    let b = beta.abs();
    if !b.is_finite() {
        return 512;
    }
    let target = 8.0 * (4.0 * b.powf(0.25)).ceil();
    target.clamp(48.0, 512.0) as usize
}

impl RadialOperators {
    /// Index of the wall node `r = 1`.
    pub fn wall_index(&self) -> usize {
        self.n_points - 1
    }

    /// `∫₀¹ f(r) r dr` for complex nodal samples.
    pub fn quad_r(&self, f: &DVector<C64>) -> C64 {
        weighted_sum(&self.quad_r, f)
    }

    /// `∫₀¹ f(r) dr/r`; requires `f` to vanish at least linearly at the axis.
    pub fn quad_inv_r(&self, f: &DVector<C64>) -> C64 {
        weighted_sum(&self.quad_inv_r, f)
    }

    /// `∫₀¹ f(r) dr` for complex nodal samples.
    pub(crate) fn quad_plain(&self, f: &DVector<C64>) -> C64 {
        weighted_sum(&self.quad_plain, f)
    }

    /// `∫₀¹ f(r) r dr` for real nodal samples.
    pub fn quad_r_real(&self, f: &DVector<f64>) -> f64 {
        self.quad_r.dot(f)
    }

    /// `∫₀¹ |f(r)|² r dr`, clamped at zero against roundoff.
    pub fn norm_sq_r(&self, f: &DVector<C64>) -> f64 {
        let s: f64 = self
            .quad_r
            .iter()
            .zip(f.iter())
            .map(|(w, v)| w * v.norm_sqr())
            .sum();
        s.max(0.0)
    }

    /// `∫₀¹ |f(r)|² dr/r`, clamped at zero; requires axis decay of `f`.
    pub fn norm_sq_inv_r(&self, f: &DVector<C64>) -> f64 {
        let s: f64 = self
            .quad_inv_r
            .iter()
            .zip(f.iter())
            .map(|(w, v)| w * v.norm_sqr())
            .sum();
        s.max(0.0)
    }

    /// Row of Lagrange basis values at an arbitrary point `x` in [0, 1].
    ///
    /// Dotting this row with nodal samples evaluates the interpolant at `x`.
    pub(crate) fn basis_at(&self, x: f64) -> DVector<f64> {
        lagrange_basis(&self.nodes, &self.bary_w, x)
    }

    /// Evaluates the nodal interpolant of `f` at `x`.
    pub fn interp_at(&self, f: &DVector<C64>, x: f64) -> C64 {
        // Exact node hits short-circuit to the sample to avoid 1/0.
        for (i, &r) in self.nodes.iter().enumerate() {
            if (x - r).abs() < 4.0 * f64::EPSILON {
                return f[i];
            }
        }
        let basis = self.basis_at(x);
        weighted_sum(&basis, f)
    }

    /// Value of the interpolant of `f` at the axis `r = 0`.
    pub fn axis_value(&self, f: &DVector<C64>) -> C64 {
        weighted_sum(&self.axis_row, f)
    }

    /// Cached square `L²` of the singular operator.
    pub(crate) fn l_sq(&self) -> &DMatrix<f64> {
        self.l_sq.get_or_init(|| &self.l_op * &self.l_op)
    }
}

fn weighted_sum(w: &DVector<f64>, f: &DVector<C64>) -> C64 {
    w.iter().zip(f.iter()).map(|(wi, fi)| fi * *wi).sum()
}

/// Lagrange basis values at `x` from barycentric weights; exact node hits
/// return an indicator row.
fn lagrange_basis(nodes: &DVector<f64>, bary_w: &DVector<f64>, x: f64) -> DVector<f64> {
    let n = nodes.len();
    for i in 0..n {
        if (x - nodes[i]).abs() < 4.0 * f64::EPSILON {
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            return e;
        }
    }
    let mut c = DVector::from_fn(n, |i, _| bary_w[i] / (x - nodes[i]));
    let s: f64 = c.iter().sum();
    c /= s;
    c
}

/// Gauss-Legendre nodes and weights on [0, 1].
fn gauss_legendre_01(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; m];
    let mut ws = vec![0.0; m];
    for i in 0..m {
        // Standard interior root estimate, refined by Newton iteration.
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..60 {
            let (p, d) = legendre_with_derivative(m, t);
            dp = d;
            let step = p / d;
            t -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        xs[i] = 0.5 * (t + 1.0);
        // Weight 2/((1−t²) P'²) on [−1,1], halved by the affine map.
        ws[i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    (xs, ws)
}

fn legendre_with_derivative(m: usize, t: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = t;
    for k in 1..m {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * t * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = next;
    }
    let dp = m as f64 * (t * p - p_prev) / (t * t - 1.0);
    (p, dp)
}
