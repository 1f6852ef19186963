//! Multi-radius estimation of the asymptotic value set of a mapping.
//!
//! At each scheduled radius the Milnor set is sampled on the sphere;
//! every attempt is then pulled along the constraint manifold toward a
//! random bounded target in image space, and points whose image norm
//! stays below the cutoff are retained. Targets are derived from the
//! attempt index only, so a genuine asymptotic value attracts the same
//! attempt at every radius and shows up as a cluster supported across
//! the whole schedule with shrinking spread.

use crate::mapspec::MappingSpec;
use crate::milnor::{milnor_h, to_complex, MilnorPresentation};
use crate::numeric::cluster::{dist, single_linkage, summarize, Cluster, RetainedPoint};
use crate::numeric::newton::{
    constraint_residual, g_image_real, max_abs3, norm, restore_feasibility, sample_attempt,
    CloudMeta, NewtonParams, SampleCloud,
};
use crate::numeric::rng::{ball_point, substream, StreamKind};
use crate::numeric::NumericError;
use crate::poly::mixed::CompiledPoly;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

/// Radii, budgets and tolerances of one estimation run.
#[derive(Clone, Debug, Serialize)]
pub struct RadiusSchedule {
    /// Strictly increasing sphere radii; at least three.
    pub radii: Vec<f64>,
    pub samples_per_radius: usize,
    /// Newton tolerance on the scaled constraint system.
    pub newton_tol: f64,
    pub max_iterations: usize,
    /// Retain only points with `|G(x)| <= image_cutoff`.
    pub image_cutoff: f64,
    /// Single-linkage tolerance in image space.
    pub cluster_tol: f64,
    /// Linkage tolerance for unit directions.
    pub direction_tol: f64,
    /// Base of the decreasing Rabier threshold `t(R) = base * sqrt(R1/R)`.
    pub kinf_threshold_base: f64,
}

impl Default for RadiusSchedule {
    fn default() -> Self {
        RadiusSchedule {
            radii: vec![1e2, 1e3, 1e4, 1e5],
            samples_per_radius: 256,
            newton_tol: 1e-10,
            max_iterations: 50,
            image_cutoff: 1.0,
            cluster_tol: 1e-2,
            direction_tol: 5e-2,
            kinf_threshold_base: 1.0,
        }
    }
}

impl RadiusSchedule {
    pub fn validate(&self) -> Result<(), NumericError> {
        if self.radii.len() < 3 {
            return Err(NumericError::InvalidParameter(
                "schedule needs at least 3 radii".into(),
            ));
        }
        if !self.radii.windows(2).all(|w| w[0] < w[1]) || self.radii[0] <= 0.0 {
            return Err(NumericError::InvalidParameter(
                "radii must be positive and strictly increasing".into(),
            ));
        }
        if self.samples_per_radius == 0 {
            return Err(NumericError::InvalidParameter(
                "per-radius budget must be at least 1".into(),
            ));
        }
        if self.newton_tol <= 0.0 || self.cluster_tol <= 0.0 || self.image_cutoff <= 0.0 {
            return Err(NumericError::InvalidParameter(
                "tolerances must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn newton_params(&self) -> NewtonParams {
        NewtonParams {
            tol: self.newton_tol,
            max_iterations: self.max_iterations,
            oversampling: 4,
        }
    }

    /// Decreasing Rabier retention threshold.
    pub fn kinf_threshold(&self, radius: f64) -> f64 {
        self.kinf_threshold_base * (self.radii[0] / radius).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Empty,
    Nonempty,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct RadiusDiagnostics {
    pub radius: f64,
    pub attempts: usize,
    /// Attempts that reached the Milnor set on the sphere.
    pub on_set: usize,
    /// Attempts retained with bounded image.
    pub retained: usize,
    pub starved: bool,
}

/// A unit direction of escape with its leading-form residual.
#[derive(Clone, Debug, Serialize)]
pub struct DirectionCluster {
    pub direction: Vec<f64>,
    pub count: usize,
    /// `max_i |Ĝ_i(direction)|` over the leading forms.
    pub leading_residual: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContainmentViolation {
    pub sg_center: Vec<f64>,
    pub nearest_kinf_distance: f64,
}

/// Outcome of asymptotic-set / asymptotic-critical-value estimation.
#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticReport {
    pub seed: u64,
    pub verdict: Verdict,
    /// Persistent bounded-image clusters (estimated asymptotic set).
    pub clusters: Vec<Cluster>,
    /// Candidate asymptotic critical values (filled by the Rabier pass).
    pub kinf_candidates: Vec<Cluster>,
    /// Escape directions of the bounded-image samples (estimated
    /// tangent cone at infinity).
    pub direction_clusters: Vec<DirectionCluster>,
    /// Asymptotic-set cluster centers with no nearby Rabier candidate.
    pub containment_violations: Vec<ContainmentViolation>,
    /// Clusters discarded by the persistence gate.
    pub rejected_clusters: usize,
    pub per_radius: Vec<RadiusDiagnostics>,
    pub schedule: RadiusSchedule,
}

/// Evaluation context shared by the descent phases.
pub(crate) struct MapContext {
    pub pres: MilnorPresentation,
    /// Complex Jacobian of the map, `(n-1) x n`.
    pub dg: Vec<Vec<CompiledPoly>>,
    /// `d(dg[l][m])/dz_j`, for Rabier gradients.
    pub d2g: Vec<Vec<Vec<CompiledPoly>>>,
}

impl MapContext {
    pub fn new(spec: &MappingSpec) -> Result<Self, NumericError> {
        let pres = milnor_h(&spec.map, &spec.weights)?;
        let dg_sym = crate::milnor::complex_jacobian(&spec.map);
        let n = spec.n;
        let d2g = dg_sym
            .iter()
            .map(|row| {
                row.iter()
                    .map(|p| {
                        (0..n)
                            .map(|j| CompiledPoly::from_poly(&p.wirtinger(j, false)))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let dg = dg_sym
            .iter()
            .map(|row| row.iter().map(CompiledPoly::from_poly).collect())
            .collect();
        Ok(MapContext { pres, dg, d2g })
    }

    pub fn dg_at(&self, z: &[Complex64]) -> DMatrix<Complex64> {
        let rows = self.dg.len();
        let cols = self.dg[0].len();
        DMatrix::from_fn(rows, cols, |r, c| self.dg[r][c].eval(z))
    }

    /// Complex image residual `G(x) - target`.
    fn image_residual(&self, x: &[f64], target: &[f64]) -> Vec<Complex64> {
        self.pres
            .g_at(x)
            .into_iter()
            .enumerate()
            .map(|(l, g)| g - Complex64::new(target[2 * l], target[2 * l + 1]))
            .collect()
    }

    /// `f = |G(x) - target|^2` and its real gradient.
    pub(crate) fn image_objective(&self, x: &[f64], target: &[f64]) -> (f64, Vec<f64>) {
        let z = to_complex(x);
        let res = self.image_residual(x, target);
        let f = res.iter().map(|r| r.norm_sqr()).sum();
        let n = self.pres.n;
        let mut grad = vec![0.0; 2 * n];
        for (l, r) in res.iter().enumerate() {
            for j in 0..n {
                let d = self.dg[l][j].eval(&z);
                // d/dRe z_j and d/dIm z_j of |G_l - t|^2
                grad[2 * j] += 2.0 * (r.conj() * d).re;
                grad[2 * j + 1] += 2.0 * (r.conj() * (Complex64::i() * d)).re;
            }
        }
        (f, grad)
    }
}

/// Projects a gradient onto the tangent space of the constraint
/// manifold `{h = 0, |x| = R}` at `x`.
fn project_tangent(ctx: &MapContext, x: &[f64], radius: f64, grad: &[f64]) -> Vec<f64> {
    let jac = crate::numeric::newton::constraint_jacobian(&ctx.pres, x, radius);
    let g = DVector::from_column_slice(grad);
    let jg = &jac * &g;
    let jjt = &jac * jac.transpose();
    match jjt.lu().solve(&jg) {
        Some(y) => {
            let corr = jac.transpose() * y;
            (0..g.len()).map(|i| g[i] - corr[i]).collect()
        }
        None => grad.to_vec(),
    }
}

/// Pulls a feasible point along the constraint manifold toward a target
/// image value by projected gradient descent with feasibility
/// restoration. The point stays on `{h = 0, |x| = R}` throughout.
pub(crate) fn descend_to_target(
    ctx: &MapContext,
    x: &mut Vec<f64>,
    radius: f64,
    target: &[f64],
    tol: f64,
) -> bool {
    let (mut f, mut grad) = ctx.image_objective(x, target);
    let mut step = 1.0;
    let mut stall = 0;
    for _ in 0..150 {
        let tangent = project_tangent(ctx, x, radius, &grad);
        let tnorm = norm(&tangent);
        if tnorm <= 1e-12 * (1.0 + f.sqrt()) {
            break;
        }
        let dir: Vec<f64> = tangent.iter().map(|v| -v / tnorm).collect();
        let mut accepted = false;
        let mut s = step;
        for _ in 0..48 {
            let mut cand: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + s * di).collect();
            if restore_feasibility(&ctx.pres, &mut cand, radius, tol, 30) {
                let (fc, gc) = ctx.image_objective(&cand, target);
                if fc <= f - 1e-4 * s * tnorm {
                    *x = cand;
                    if (f - fc).abs() <= 1e-12 * f.max(1e-30) {
                        stall += 1;
                    } else {
                        stall = 0;
                    }
                    f = fc;
                    grad = gc;
                    accepted = true;
                    break;
                }
            }
            s *= 0.5;
        }
        if !accepted {
            break;
        }
        step = (s * 2.0).min(radius);
        if stall >= 3 || f <= 1e-24 {
            break;
        }
    }
    max_abs3(&constraint_residual(&ctx.pres, x, radius)) <= tol
}

pub(crate) struct RadiusOutcome {
    pub diagnostics: RadiusDiagnostics,
    pub retained: Vec<RetainedPoint>,
    pub retained_points: Vec<(Vec<f64>, f64)>, // (x, raw residual)
}

/// Samples one radius: Newton onto the Milnor set, then target descent.
fn run_radius(
    ctx: &MapContext,
    schedule: &RadiusSchedule,
    seed: u64,
    radius_index: usize,
) -> RadiusOutcome {
    let radius = schedule.radii[radius_index];
    let params = schedule.newton_params();
    let budget = schedule.samples_per_radius;

    let results: Vec<Option<(Vec<f64>, bool)>> = (0..budget)
        .into_par_iter()
        .map(|k| {
            let mut rng = substream(seed, StreamKind::MilnorSample, radius_index, k as u64);
            let x0 = sample_attempt(&ctx.pres, radius, &mut rng, &params)?;
            // Target depends on the attempt only, not the radius.
            let mut trng = substream(seed, StreamKind::AsymptoticTarget, 0, k as u64);
            let target = ball_point(
                &mut trng,
                2 * (ctx.pres.n - 1),
                schedule.image_cutoff,
            );
            let mut x = x0;
            let ok = descend_to_target(ctx, &mut x, radius, &target, schedule.newton_tol);
            Some((x, ok))
        })
        .collect();

    let mut on_set = 0;
    let mut retained = Vec::new();
    let mut retained_points = Vec::new();
    for (k, r) in results.into_iter().enumerate() {
        let Some((x, feasible)) = r else { continue };
        on_set += 1;
        if !feasible {
            continue;
        }
        let g = g_image_real(&ctx.pres, &x);
        if norm(&g) <= schedule.image_cutoff {
            retained.push(RetainedPoint {
                g,
                radius,
                radius_index,
                attempt: k as u64,
            });
            let res = ctx.pres.h_at(&x).norm();
            retained_points.push((x, res));
        }
    }
    RadiusOutcome {
        diagnostics: RadiusDiagnostics {
            radius,
            attempts: budget,
            on_set,
            retained: retained.len(),
            starved: on_set == 0,
        },
        retained,
        retained_points,
    }
}

/// Persistence gate: supported at >= 3 radii including the largest,
/// spread within the clustering tolerance, and non-growing spread from
/// the smallest supported radius to the largest.
fn accept_cluster(c: &Cluster, schedule: &RadiusSchedule) -> bool {
    let last = *schedule.radii.last().unwrap();
    if !c.supported_at(last) || c.support_radii.len() < 3 {
        return false;
    }
    if c.spread > schedule.cluster_tol {
        return false;
    }
    let s_first = c.per_radius_spread.first().map(|p| p.1).unwrap_or(0.0);
    let s_last = c.per_radius_spread.last().map(|p| p.1).unwrap_or(0.0);
    s_last <= (1.05 * s_first).max(1e-6)
}

pub(crate) fn cluster_retained(
    retained: &[RetainedPoint],
    schedule: &RadiusSchedule,
) -> (Vec<Cluster>, usize) {
    let gs: Vec<Vec<f64>> = retained.iter().map(|p| p.g.clone()).collect();
    let groups = single_linkage(&gs, schedule.cluster_tol);
    let mut accepted = Vec::new();
    let mut rejected = 0;
    for members in groups {
        let c = summarize(retained, &members);
        if accept_cluster(&c, schedule) {
            accepted.push(c);
        } else {
            rejected += 1;
        }
    }
    accepted.sort_by(|a, b| a.center.partial_cmp(&b.center).unwrap());
    (accepted, rejected)
}

/// Estimates the asymptotic value set of the mapping along its Milnor
/// set, returning the report together with the retained bounded-image
/// samples.
pub fn estimate_asymptotic_with_cloud(
    spec: &MappingSpec,
    schedule: &RadiusSchedule,
    seed: u64,
) -> Result<(AsymptoticReport, SampleCloud), NumericError> {
    schedule.validate()?;
    let ctx = MapContext::new(spec)?;
    if ctx.pres.h.is_zero() {
        return Err(NumericError::IdenticallyZero);
    }

    let outcomes: Vec<RadiusOutcome> = (0..schedule.radii.len())
        .map(|r| run_radius(&ctx, schedule, seed, r))
        .collect();

    let per_radius: Vec<RadiusDiagnostics> =
        outcomes.iter().map(|o| o.diagnostics.clone()).collect();
    let starved_everywhere = per_radius.iter().all(|d| d.starved);

    let mut retained: Vec<RetainedPoint> = Vec::new();
    let mut points = Vec::new();
    let mut residuals = Vec::new();
    for o in outcomes {
        retained.extend(o.retained);
        for (x, res) in o.retained_points {
            points.push(x);
            residuals.push(res);
        }
    }

    let (clusters, rejected) = cluster_retained(&retained, schedule);
    let verdict = if starved_everywhere {
        Verdict::Inconclusive
    } else if !clusters.is_empty() {
        Verdict::Nonempty
    } else {
        Verdict::Empty
    };

    let radii: Vec<f64> = points.iter().map(|x| norm(x)).collect();
    let g_images: Vec<Vec<f64>> = retained.iter().map(|p| p.g.clone()).collect();
    let cloud = SampleCloud {
        n: spec.n,
        points,
        residuals,
        radii,
        g_images,
        seed,
        meta: CloudMeta {
            radius_target: *schedule.radii.last().unwrap(),
            requested: schedule.samples_per_radius * schedule.radii.len(),
            attempts: schedule.samples_per_radius * schedule.radii.len(),
            successes: retained.len(),
            newton_tol: schedule.newton_tol,
            max_iterations: schedule.max_iterations,
            residual_scaling: "relative-to-term-sum",
        },
    };

    let direction_clusters = if cloud.distinct_radius_bands() >= 3 {
        super::tangent::tangent_cone_directions(&cloud, &spec.map, 1e-2, schedule.direction_tol)
            .unwrap_or_default()
    } else {
        Vec::new()
    };

    let report = AsymptoticReport {
        seed,
        verdict,
        clusters,
        kinf_candidates: Vec::new(),
        direction_clusters,
        containment_violations: Vec::new(),
        rejected_clusters: rejected,
        per_radius,
        schedule: schedule.clone(),
    };
    Ok((report, cloud))
}

/// Estimates the asymptotic set; see [`estimate_asymptotic_with_cloud`].
pub fn estimate_asymptotic_set(
    spec: &MappingSpec,
    schedule: &RadiusSchedule,
    seed: u64,
) -> Result<AsymptoticReport, NumericError> {
    estimate_asymptotic_with_cloud(spec, schedule, seed).map(|(r, _)| r)
}

pub(crate) fn containment_check(
    sg_clusters: &[Cluster],
    kinf: &[Cluster],
    tol: f64,
) -> Vec<ContainmentViolation> {
    let mut out = Vec::new();
    for c in sg_clusters {
        let nearest = kinf
            .iter()
            .map(|k| dist(&c.center, &k.center))
            .fold(f64::INFINITY, f64::min);
        if nearest > tol {
            out.push(ContainmentViolation {
                sg_center: c.center.clone(),
                nearest_kinf_distance: nearest,
            });
        }
    }
    out
}

