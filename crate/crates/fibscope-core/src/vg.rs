//! Embedded point clouds of the singular variety associated to a map.
//!
//! Milnor-set samples `x` are mapped to `(G(x), psi_1(x), .., psi_p(x))`.
//! With the default single chart `psi = phi = 1/(1+rho)` the chart block
//! lies in (0, 1] and equals 1 exactly where `rho` vanishes. Candidate
//! singular points at infinity are top-radius samples whose chart block
//! nearly vanishes while their image block sits near an estimated
//! asymptotic value.

use crate::certify::{decay_normalize, NormalizedChart};
use crate::mapspec::{ChartExpr, MappingSpec};
use crate::milnor::to_complex;
use crate::numeric::cluster::{dist, Cluster};
use crate::numeric::newton::SampleCloud;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VgError {
    #[error("chart {index} evaluated to a non-finite value at sample {sample}")]
    ChartNotFinite { index: usize, sample: usize },
    #[error("chart {index} is not real-valued at sample {sample} (imaginary part {imag:.3e})")]
    ChartNotReal {
        index: usize,
        sample: usize,
        imag: f64,
    },
    #[error("cloud is empty")]
    EmptyCloud,
    #[error("cloud dimension {cloud_n} does not match the mapping dimension {spec_n}")]
    DimensionMismatch { cloud_n: usize, spec_n: usize },
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EmbedParams {
    /// Chart-block norm below which a top-radius point is a candidate
    /// singular point at infinity.
    pub sing_tol: f64,
    /// Image-block distance to an asymptotic cluster center required to
    /// confirm a candidate.
    pub cluster_tol: f64,
}

impl Default for EmbedParams {
    fn default() -> Self {
        EmbedParams {
            sing_tol: 1e-2,
            cluster_tol: 1e-2,
        }
    }
}

/// Embedded cloud in `R^{2(n-1)+p}`.
#[derive(Clone, Debug)]
pub struct VGCloud {
    pub n: usize,
    pub chart_count: usize,
    /// Image blocks `G(x)`, length `2(n-1)` per point.
    pub alpha: Vec<Vec<f64>>,
    /// Chart blocks `(psi_1(x), .., psi_p(x))` per point.
    pub psi: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Per-point candidate flag for the singular set at infinity.
    pub sing_flags: Vec<bool>,
    pub params: EmbedParams,
}

impl VGCloud {
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// Ambient dimension of the embedded points.
    pub fn ambient_dim(&self) -> usize {
        2 * (self.n - 1) + self.chart_count
    }

    /// Full coordinates of one embedded point.
    pub fn point(&self, i: usize) -> Vec<f64> {
        let mut v = self.alpha[i].clone();
        v.extend_from_slice(&self.psi[i]);
        v
    }

    pub fn sing_candidates(&self) -> impl Iterator<Item = usize> + '_ {
        self.sing_flags
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(i, _)| i)
    }
}

fn charts_of(spec: &MappingSpec) -> Vec<NormalizedChart> {
    if spec.charts.is_empty() {
        vec![decay_normalize(&ChartExpr::Phi, 0)]
    } else {
        spec.charts
            .iter()
            .zip(&spec.decay)
            .map(|(c, d)| decay_normalize(c, d.unwrap_or(0)))
            .collect()
    }
}

/// Maps every cloud sample to `(G(x), psi(x))` and flags candidate
/// singular points at infinity against the given asymptotic clusters.
pub fn embed_vg(
    spec: &MappingSpec,
    cloud: &SampleCloud,
    sg_clusters: &[Cluster],
    params: EmbedParams,
) -> Result<VGCloud, VgError> {
    if cloud.is_empty() {
        return Err(VgError::EmptyCloud);
    }
    if cloud.n != spec.n {
        return Err(VgError::DimensionMismatch {
            cloud_n: cloud.n,
            spec_n: spec.n,
        });
    }
    let charts = charts_of(spec);
    let top_radius = cloud.radii.iter().fold(0.0f64, |a, &b| a.max(b));
    let top_floor = top_radius / 1.5;

    let mut alpha = Vec::with_capacity(cloud.len());
    let mut psi = Vec::with_capacity(cloud.len());
    let mut flags = Vec::with_capacity(cloud.len());
    for (i, x) in cloud.points.iter().enumerate() {
        let z = to_complex(x);
        let rho = spec.weights.rho_f64(x);
        let phi = 1.0 / (1.0 + rho);
        let x2: f64 = x.iter().map(|v| v * v).sum();
        let mut block = Vec::with_capacity(charts.len());
        for (j, chart) in charts.iter().enumerate() {
            let v = chart.eval(&z, phi, x2);
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(VgError::ChartNotFinite { index: j, sample: i });
            }
            if v.im.abs() > 1e-9 * (1.0 + v.norm()) {
                return Err(VgError::ChartNotReal {
                    index: j,
                    sample: i,
                    imag: v.im,
                });
            }
            block.push(v.re);
        }

        let g = cloud.g_images[i].clone();
        let chart_norm = block.iter().map(|v| v * v).sum::<f64>().sqrt();
        let near_cluster = sg_clusters
            .iter()
            .any(|c| dist(&g, &c.center) <= params.cluster_tol);
        let flagged =
            cloud.radii[i] >= top_floor && chart_norm <= params.sing_tol && near_cluster;

        alpha.push(g);
        psi.push(block);
        flags.push(flagged);
    }
    Ok(VGCloud {
        n: spec.n,
        chart_count: charts.len(),
        alpha,
        psi,
        radii: cloud.radii.clone(),
        residuals: cloud.residuals.clone(),
        sing_flags: flags,
        params,
    })
}
