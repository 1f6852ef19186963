//! Damped Newton sampling of the Milnor set at a fixed radius.
//!
//! One attempt restricts the system `(Re h, Im h, |x|^2 - R^2)` to a
//! random 3-dimensional affine slice of R^{2n}, giving a square system
//! solved by Newton with Armijo backtracking. Residuals are measured
//! relative to the local term size of `h` and to `R^2`, which keeps the
//! stopping rule meaningful across radii that span several decades.

use crate::milnor::MilnorPresentation;
use crate::numeric::rng::{substream, unit_vector, StreamKind};
use crate::numeric::NumericError;
use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Parameters of one Newton solve.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NewtonParams {
    /// Convergence tolerance on the scaled residual vector.
    pub tol: f64,
    pub max_iterations: usize,
    /// Attempt budget per requested sample.
    pub oversampling: usize,
}

impl Default for NewtonParams {
    fn default() -> Self {
        NewtonParams {
            tol: 1e-10,
            max_iterations: 50,
            oversampling: 4,
        }
    }
}

/// Generation metadata echoed into serialized clouds.
#[derive(Clone, Debug, Serialize)]
pub struct CloudMeta {
    pub radius_target: f64,
    pub requested: usize,
    pub attempts: usize,
    pub successes: usize,
    pub newton_tol: f64,
    pub max_iterations: usize,
    /// Residual tolerances are relative: a sample is accepted when
    /// `|h(x)| <= newton_tol * max(1, Σ|terms of h at x|)`.
    pub residual_scaling: &'static str,
}

/// A finite sample of the Milnor set: real points with their residuals,
/// radii and images under the map.
#[derive(Clone, Debug)]
pub struct SampleCloud {
    pub n: usize,
    pub points: Vec<Vec<f64>>,
    /// Raw residuals `|h(x)|` per point.
    pub residuals: Vec<f64>,
    /// Euclidean norms `|x|` per point.
    pub radii: Vec<f64>,
    /// Realified images `G(x)` per point, length `2(n-1)`.
    pub g_images: Vec<Vec<f64>>,
    pub seed: u64,
    pub meta: CloudMeta,
}

impl SampleCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of distinct radii present, grouping by relative bands.
    pub fn distinct_radius_bands(&self) -> usize {
        let mut radii: Vec<f64> = self.radii.clone();
        radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut count = 0;
        let mut last = f64::NEG_INFINITY;
        for r in radii {
            if r > last * 1.5 {
                count += 1;
            }
            last = r;
        }
        count
    }
}

pub(crate) fn g_image_real(pres: &MilnorPresentation, x: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * (pres.n - 1));
    for v in pres.g_at(x) {
        out.push(v.re);
        out.push(v.im);
    }
    out
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Scaled residual vector of the constraint system at `x`:
/// `(Re h / s, Im h / s, (|x|^2 - R^2) / R^2)` with `s = max(1, Σ|h terms|)`.
pub(crate) fn constraint_residual(pres: &MilnorPresentation, x: &[f64], radius: f64) -> [f64; 3] {
    constraint_residual_frozen(pres, x, radius, pres.h_scale_at(x))
}

/// As [`constraint_residual`] but with the `h` scale supplied by the
/// caller. Line searches freeze the scale at the iterate, otherwise the
/// Newton direction need not descend the backtracking merit.
pub(crate) fn constraint_residual_frozen(
    pres: &MilnorPresentation,
    x: &[f64],
    radius: f64,
    scale: f64,
) -> [f64; 3] {
    let h = pres.h_at(x);
    let r2 = radius * radius;
    let sphere = (x.iter().map(|v| v * v).sum::<f64>() - r2) / r2;
    [h.re / scale, h.im / scale, sphere]
}

/// Jacobian of the scaled constraint system, `3 x 2n`.
pub(crate) fn constraint_jacobian(
    pres: &MilnorPresentation,
    x: &[f64],
    radius: f64,
) -> DMatrix<f64> {
    constraint_jacobian_frozen(pres, x, radius, pres.h_scale_at(x))
}

pub(crate) fn constraint_jacobian_frozen(
    pres: &MilnorPresentation,
    x: &[f64],
    radius: f64,
    scale: f64,
) -> DMatrix<f64> {
    let hj = pres.h_jacobian_at(x);
    let r2 = radius * radius;
    let m = 2 * pres.n;
    let mut jac = DMatrix::zeros(3, m);
    for c in 0..m {
        jac[(0, c)] = hj[(0, c)] / scale;
        jac[(1, c)] = hj[(1, c)] / scale;
        jac[(2, c)] = 2.0 * x[c] / r2;
    }
    jac
}

pub(crate) fn max_abs3(r: &[f64; 3]) -> f64 {
    r.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// Damped least-norm Newton for the underdetermined constraint system:
/// each step solves the linearization with minimum norm and is damped
/// by Armijo backtracking on the squared scaled residual.
fn damped_newton(
    pres: &MilnorPresentation,
    x: &mut Vec<f64>,
    radius: f64,
    params: &NewtonParams,
) -> bool {
    let merit = |r: &[f64; 3]| -> f64 { r.iter().map(|v| v * v).sum::<f64>() };
    for _ in 0..params.max_iterations {
        if max_abs3(&constraint_residual(pres, x, radius)) <= params.tol {
            return true;
        }
        let scale = pres.h_scale_at(x);
        let res = constraint_residual_frozen(pres, x, radius, scale);
        let jac = constraint_jacobian_frozen(pres, x, radius, scale);
        let rhs = DVector::from_column_slice(&[-res[0], -res[1], -res[2]]);
        let step = match (jac.clone() * jac.transpose()).lu().solve(&rhs) {
            Some(y) => jac.transpose() * y,
            None => match jac.svd(true, true).solve(&rhs, 1e-14) {
                Ok(s) => s,
                Err(_) => return false,
            },
        };
        if !step.iter().all(|v| v.is_finite()) {
            return false;
        }
        let m0 = merit(&res);
        let mut accepted = false;
        let mut alpha = 1.0;
        for _ in 0..24 {
            let xn: Vec<f64> = x
                .iter()
                .zip(step.iter())
                .map(|(xi, si)| xi + alpha * si)
                .collect();
            let rn = constraint_residual_frozen(pres, &xn, radius, scale);
            if merit(&rn) <= (1.0 - 1e-4 * alpha) * m0 {
                *x = xn;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            return false;
        }
    }
    max_abs3(&constraint_residual(pres, x, radius)) <= params.tol
}

/// One sampling attempt: random start on the sphere, damped Newton on
/// `(Re h, Im h, |x|^2 - R^2)`.
pub(crate) fn sample_attempt(
    pres: &MilnorPresentation,
    radius: f64,
    rng: &mut ChaCha8Rng,
    params: &NewtonParams,
) -> Option<Vec<f64>> {
    let dim = 2 * pres.n;
    let mut x: Vec<f64> = unit_vector(rng, dim).into_iter().map(|v| v * radius).collect();
    if damped_newton(pres, &mut x, radius, params) {
        Some(x)
    } else {
        None
    }
}

/// Samples the Milnor set near the sphere of the given radius.
///
/// Draws up to `count * oversampling` attempts and keeps the first
/// `count` successes in attempt order, so the result is independent of
/// the number of worker threads.
pub fn newton_on_milnor(
    pres: &MilnorPresentation,
    radius: f64,
    count: usize,
    seed: u64,
    params: &NewtonParams,
) -> Result<SampleCloud, NumericError> {
    newton_on_milnor_indexed(pres, radius, count, seed, 0, params)
}

pub(crate) fn newton_on_milnor_indexed(
    pres: &MilnorPresentation,
    radius: f64,
    count: usize,
    seed: u64,
    radius_index: usize,
    params: &NewtonParams,
) -> Result<SampleCloud, NumericError> {
    if pres.h.is_zero() {
        return Err(NumericError::IdenticallyZero);
    }
    if count == 0 || radius <= 0.0 {
        return Err(NumericError::InvalidParameter(
            "sample count and radius must be positive".into(),
        ));
    }
    let attempts = count.saturating_mul(params.oversampling.max(1));
    let hits: Vec<Option<Vec<f64>>> = (0..attempts)
        .into_par_iter()
        .map(|k| {
            let mut rng = substream(seed, StreamKind::MilnorSample, radius_index, k as u64);
            sample_attempt(pres, radius, &mut rng, params)
        })
        .collect();

    let successes = hits.iter().filter(|h| h.is_some()).count();
    let mut points = Vec::with_capacity(count.min(successes));
    for x in hits.into_iter().flatten() {
        if points.len() == count {
            break;
        }
        points.push(x);
    }
    if points.is_empty() {
        return Err(NumericError::Starved { radius });
    }
    let residuals: Vec<f64> = points.iter().map(|x| pres.h_at(x).norm()).collect();
    let radii: Vec<f64> = points.iter().map(|x| norm(x)).collect();
    let g_images: Vec<Vec<f64>> = points.iter().map(|x| g_image_real(pres, x)).collect();
    Ok(SampleCloud {
        n: pres.n,
        points,
        residuals,
        radii,
        g_images,
        seed,
        meta: CloudMeta {
            radius_target: radius,
            requested: count,
            attempts,
            successes,
            newton_tol: params.tol,
            max_iterations: params.max_iterations,
            residual_scaling: "relative-to-term-sum",
        },
    })
}

/// Gauss-Newton restoration onto `{h = 0, |x| = R}` from a nearby point.
/// Returns true when the scaled residual dropped below `tol`.
pub(crate) fn restore_feasibility(
    pres: &MilnorPresentation,
    x: &mut Vec<f64>,
    radius: f64,
    tol: f64,
    max_iter: usize,
) -> bool {
    for _ in 0..max_iter {
        let res = constraint_residual(pres, x, radius);
        if max_abs3(&res) <= tol {
            return true;
        }
        let jac = constraint_jacobian(pres, x, radius);
        let rhs = DVector::from_column_slice(&[-res[0], -res[1], -res[2]]);
        // Minimum-norm correction for the underdetermined system.
        let step = match (jac.clone() * jac.transpose()).lu().solve(&rhs) {
            Some(y) => jac.transpose() * y,
            None => match jac.svd(true, true).solve(&rhs, 1e-12) {
                Ok(s) => s,
                Err(_) => return false,
            },
        };
        if !step.iter().all(|v| v.is_finite()) {
            return false;
        }
        for (xi, si) in x.iter_mut().zip(step.iter()) {
            *xi += si;
        }
    }
    max_abs3(&constraint_residual(pres, x, radius)) <= tol
}
