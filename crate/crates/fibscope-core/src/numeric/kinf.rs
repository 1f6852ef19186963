//! Estimation of asymptotic critical values through the Rabier
//! quantity `|x| * sigma_min(DG(x))`.
//!
//! Candidates are image values reached, at the largest radii, by sphere
//! points whose Rabier quantity falls below a threshold that decreases
//! with the radius. Sampling shares its bounded targets with the
//! asymptotic-set pass, so containment of the estimated asymptotic set
//! in the candidate set can be checked cluster against cluster.

use crate::mapspec::MappingSpec;
use crate::milnor::to_complex;
use crate::numeric::asymptotic::{
    containment_check, estimate_asymptotic_with_cloud, AsymptoticReport, MapContext,
    RadiusDiagnostics, RadiusSchedule,
};
use crate::numeric::cluster::{single_linkage, summarize, Cluster, RetainedPoint};
use crate::numeric::newton::{g_image_real, norm, SampleCloud};
use crate::numeric::rank::realify_matrix;
use crate::numeric::rng::{ball_point, substream, unit_vector, StreamKind};
use crate::numeric::NumericError;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

/// `(sigma_min(DG), gradient of (|x| sigma_min)^2)` at a real point.
fn rabier_and_grad(ctx: &MapContext, x: &[f64]) -> (f64, Vec<f64>) {
    let z = to_complex(x);
    let m = realify_matrix(&ctx.dg_at(&z));
    let svd = m.clone().svd(true, true);
    let (mut idx, mut smin) = (0usize, f64::INFINITY);
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s < smin {
            smin = s;
            idx = i;
        }
    }
    let u = svd.u.as_ref().unwrap().column(idx).clone_owned();
    let vt = svd.v_t.as_ref().unwrap().row(idx).clone_owned();

    let n = ctx.pres.n;
    let rows = ctx.dg.len();
    let x2: f64 = x.iter().map(|v| v * v).sum();
    let mut grad = vec![0.0; 2 * n];
    for j in 0..n {
        for part in 0..2 {
            // derivative of DG wrt x_{2j+part}
            let dm_c = DMatrix::from_fn(rows, n, |l, mcol| {
                let d = ctx.d2g[l][mcol][j].eval(&z);
                if part == 0 {
                    d
                } else {
                    Complex64::i() * d
                }
            });
            let dm = realify_matrix(&dm_c);
            // d sigma = u^T dM v
            let mut ds = 0.0;
            for r in 0..dm.nrows() {
                for c in 0..dm.ncols() {
                    ds += u[r] * dm[(r, c)] * vt[c];
                }
            }
            let k = 2 * j + part;
            grad[k] = 2.0 * x[k] * smin * smin + x2 * 2.0 * smin * ds;
        }
    }
    (smin, grad)
}

fn sphere_project(x: &[f64], radius: f64) -> Vec<f64> {
    let nn = norm(x);
    x.iter().map(|v| v * radius / nn).collect()
}

fn tangent_part(x: &[f64], radius: f64, grad: &[f64]) -> Vec<f64> {
    let dot: f64 = x.iter().zip(grad).map(|(a, b)| a * b).sum();
    let scale = dot / (radius * radius);
    x.iter()
        .zip(grad)
        .map(|(xi, gi)| gi - scale * xi)
        .collect()
}

/// Minimizes the squared Rabier quantity on the sphere; stops early
/// once it falls safely under the threshold.
fn descend_rabier(ctx: &MapContext, x: &mut Vec<f64>, radius: f64, threshold: f64) -> f64 {
    let (mut smin, mut grad) = rabier_and_grad(ctx, x);
    let mut rab = radius * smin;
    let mut step = radius / 8.0;
    for _ in 0..160 {
        if rab <= 0.25 * threshold {
            break;
        }
        let tangent = tangent_part(x, radius, &grad);
        let tnorm = norm(&tangent);
        if tnorm <= 1e-14 * (1.0 + rab * rab) {
            break;
        }
        let dir: Vec<f64> = tangent.iter().map(|v| -v / tnorm).collect();
        let mut s = step;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = sphere_project(
                &x.iter().zip(&dir).map(|(xi, di)| xi + s * di).collect::<Vec<_>>(),
                radius,
            );
            let (sc, gc) = rabier_and_grad(ctx, &cand);
            let rc = radius * sc;
            if rc * rc <= rab * rab - 1e-4 * s * tnorm {
                *x = cand;
                smin = sc;
                grad = gc;
                rab = rc;
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if !accepted {
            break;
        }
        step = (s * 2.0).min(radius);
    }
    let _ = smin;
    rab
}

/// Pulls the image toward a bounded target while keeping the Rabier
/// quantity under the threshold.
fn descend_image_filtered(
    ctx: &MapContext,
    x: &mut Vec<f64>,
    radius: f64,
    target: &[f64],
    threshold: f64,
) {
    let (mut f, mut grad) = ctx.image_objective(x, target);
    let mut step = 1.0;
    for _ in 0..120 {
        let tangent = tangent_part(x, radius, &grad);
        let tnorm = norm(&tangent);
        if tnorm <= 1e-12 * (1.0 + f.sqrt()) {
            break;
        }
        let dir: Vec<f64> = tangent.iter().map(|v| -v / tnorm).collect();
        let mut s = step;
        let mut accepted = false;
        for _ in 0..48 {
            let cand = sphere_project(
                &x.iter().zip(&dir).map(|(xi, di)| xi + s * di).collect::<Vec<_>>(),
                radius,
            );
            let (sc, _) = rabier_and_grad(ctx, &cand);
            if radius * sc <= threshold {
                let (fc, gc) = ctx.image_objective(&cand, target);
                if fc <= f - 1e-4 * s * tnorm {
                    *x = cand;
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
        if f <= 1e-24 {
            break;
        }
    }
}

pub(crate) struct KinfRadiusOutcome {
    pub diagnostics: RadiusDiagnostics,
    pub retained: Vec<RetainedPoint>,
}

fn run_kinf_radius(
    ctx: &MapContext,
    schedule: &RadiusSchedule,
    seed: u64,
    radius_index: usize,
) -> KinfRadiusOutcome {
    let radius = schedule.radii[radius_index];
    let threshold = schedule.kinf_threshold(radius);
    let budget = schedule.samples_per_radius;
    let dim = 2 * ctx.pres.n;

    let results: Vec<Option<RetainedPoint>> = (0..budget)
        .into_par_iter()
        .map(|k| {
            let mut rng = substream(seed, StreamKind::KinfSample, radius_index, k as u64);
            let mut x: Vec<f64> = unit_vector(&mut rng, dim)
                .into_iter()
                .map(|v| v * radius)
                .collect();
            let rab = descend_rabier(ctx, &mut x, radius, threshold);
            if rab > threshold {
                return None;
            }
            let mut trng = substream(seed, StreamKind::AsymptoticTarget, 0, k as u64);
            let target = ball_point(&mut trng, 2 * (ctx.pres.n - 1), schedule.image_cutoff);
            descend_image_filtered(ctx, &mut x, radius, &target, threshold);
            let g = g_image_real(&ctx.pres, &x);
            if norm(&g) <= schedule.image_cutoff {
                Some(RetainedPoint {
                    g,
                    radius,
                    radius_index,
                    attempt: k as u64,
                })
            } else {
                None
            }
        })
        .collect();

    let retained: Vec<RetainedPoint> = results.into_iter().flatten().collect();
    KinfRadiusOutcome {
        diagnostics: RadiusDiagnostics {
            radius,
            attempts: budget,
            on_set: retained.len(),
            retained: retained.len(),
            starved: retained.is_empty(),
        },
        retained,
    }
}

/// Candidate clusters from the top-radius retained points. Support at
/// smaller radii is recorded from nearest retained points but does not
/// gate acceptance: the retention window shrinks with the radius, so a
/// genuine asymptotic critical value is witnessed by the top band.
pub(crate) fn kinf_clusters(
    retained: &[RetainedPoint],
    schedule: &RadiusSchedule,
) -> Vec<Cluster> {
    let top = schedule.radii.len() - 1;
    let top_idx: Vec<usize> = (0..retained.len())
        .filter(|&i| retained[i].radius_index == top)
        .collect();
    if top_idx.is_empty() {
        return Vec::new();
    }
    let gs: Vec<Vec<f64>> = top_idx.iter().map(|&i| retained[i].g.clone()).collect();
    let groups = single_linkage(&gs, schedule.cluster_tol);
    let mut out = Vec::new();
    for members in groups {
        let abs_members: Vec<usize> = members.iter().map(|&m| top_idx[m]).collect();
        let mut c = summarize(retained, &abs_members);
        if c.spread > schedule.cluster_tol {
            continue;
        }
        // Record how far down the schedule the candidate is witnessed.
        let mut support = Vec::new();
        for (ri, &r) in schedule.radii.iter().enumerate() {
            let near = retained
                .iter()
                .filter(|p| p.radius_index == ri)
                .map(|p| crate::numeric::cluster::dist(&p.g, &c.center))
                .fold(f64::INFINITY, f64::min);
            if near <= schedule.cluster_tol {
                support.push(r);
            }
        }
        c.support_radii = support;
        out.push(c);
    }
    out.sort_by(|a, b| a.center.partial_cmp(&b.center).unwrap());
    out
}

/// Estimates asymptotic critical values by Rabier descent on full
/// spheres, and cross-checks that every asymptotic-set cluster sits
/// near some candidate.
pub fn estimate_kinf(
    spec: &MappingSpec,
    schedule: &RadiusSchedule,
    seed: u64,
) -> Result<AsymptoticReport, NumericError> {
    estimate_kinf_with_cloud(spec, schedule, seed).map(|(r, _)| r)
}

/// As [`estimate_kinf`], also returning the bounded-image cloud of the
/// asymptotic-set pass.
pub fn estimate_kinf_with_cloud(
    spec: &MappingSpec,
    schedule: &RadiusSchedule,
    seed: u64,
) -> Result<(AsymptoticReport, SampleCloud), NumericError> {
    schedule.validate()?;
    let (mut report, cloud) = estimate_asymptotic_with_cloud(spec, schedule, seed)?;
    let ctx = MapContext::new(spec)?;

    let mut retained = Vec::new();
    let mut kinf_diag = Vec::new();
    for r in 0..schedule.radii.len() {
        let outcome = run_kinf_radius(&ctx, schedule, seed, r);
        kinf_diag.push(outcome.diagnostics);
        retained.extend(outcome.retained);
    }
    report.kinf_candidates = kinf_clusters(&retained, schedule);
    report.containment_violations = containment_check(
        &report.clusters,
        &report.kinf_candidates,
        schedule.cluster_tol,
    );
    Ok((report, cloud))
}
