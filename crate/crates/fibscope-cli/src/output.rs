//! Output-file plumbing: config echoes, JSON documents, cloud exports.

use crate::{Cli, Format};
use anyhow::Context;
use fibscope_core::milnor::MilnorPresentation;
use fibscope_core::numeric::newton::{newton_on_milnor, NewtonParams, SampleCloud};
use fibscope_core::numeric::rng::{substream, StreamKind};
use fibscope_core::vg::VGCloud;
use rand::Rng;
use serde::Serialize;
use std::io::Write;
use std::path::Path;

/// Run configuration echoed verbatim into every output artifact. The
/// timestamp is the only field excluded from golden comparisons.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub seed: u64,
    pub radii: Option<Vec<f64>>,
    pub samples: usize,
    pub tol: f64,
    pub cluster_tol: f64,
    pub out: String,
    pub format: String,
    pub timestamp: String,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Self {
        RunConfig {
            command: format!("{:?}", cli.command)
                .split_whitespace()
                .next()
                .unwrap_or("?")
                .trim_end_matches('{')
                .to_lowercase(),
            seed: cli.seed,
            radii: cli.radii.clone(),
            samples: cli.samples,
            tol: cli.tol,
            cluster_tol: cli.cluster_tol,
            out: cli.out.display().to_string(),
            format: format!("{:?}", cli.format).to_lowercase(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        }
    }
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    config: &'a RunConfig,
    #[serde(flatten)]
    body: Body<'a, T>,
}

#[derive(Serialize)]
struct Body<'a, T: Serialize> {
    report: &'a T,
}

pub fn write_json<T: Serialize>(path: &Path, config: &RunConfig, report: &T) -> anyhow::Result<()> {
    let doc = Document {
        config,
        body: Body { report },
    };
    let mut file = std::fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(&mut file, &doc)?;
    file.write_all(b"\n")?;
    Ok(())
}

/// Serializable face of the Milnor presentation: canonical text forms.
#[derive(Serialize)]
pub struct MilnorDoc {
    pub h: String,
    pub h_re: String,
    pub h_im: String,
    pub cofactors: Vec<String>,
    pub minors: Vec<String>,
}

impl MilnorDoc {
    pub fn new(pres: &MilnorPresentation) -> Self {
        MilnorDoc {
            h: pres.h.to_string(),
            h_re: pres.h_re.to_string(),
            h_im: pres.h_im.to_string(),
            cofactors: pres
                .cofactors
                .components()
                .iter()
                .map(|p| p.to_string())
                .collect(),
            minors: pres.minors.iter().map(|p| p.to_string()).collect(),
        }
    }
}

/// On-set samples from several spheres plus uniform off-set points, for
/// the presentation-equivalence check.
pub fn equivalence_samples(
    pres: &MilnorPresentation,
    seed: u64,
    on_target: usize,
    off_target: usize,
    params: &NewtonParams,
) -> Vec<Vec<f64>> {
    let mut samples = Vec::new();
    let radii = [2.0, 5.0, 10.0, 50.0, 100.0];
    let per = on_target.div_ceil(radii.len());
    for (i, &r) in radii.iter().enumerate() {
        if let Ok(cloud) = newton_on_milnor(pres, r, per, seed.wrapping_add(7000 + i as u64), params)
        {
            samples.extend(cloud.points);
        }
        if samples.len() >= on_target {
            samples.truncate(on_target);
            break;
        }
    }
    let dim = 2 * pres.n;
    let mut rng = substream(seed, StreamKind::Generic, 1, 0);
    for _ in 0..off_target {
        samples.push((0..dim).map(|_| rng.random_range(-3.0..3.0)).collect());
    }
    samples
}

pub fn write_cloud(out: &Path, config: &RunConfig, cloud: &SampleCloud) -> anyhow::Result<()> {
    let path = out.join("cloud.csv");
    let mut file = std::fs::File::create(&path)
        .with_context(|| format!("creating {}", path.display()))?;
    fibscope_core::write_cloud_csv(cloud, &mut file)?;
    write_json(&out.join("cloud.json"), config, &cloud.meta)?;
    Ok(())
}

pub fn parse_projection(axes: Option<&[usize]>) -> anyhow::Result<Option<[usize; 3]>> {
    match axes {
        None => Ok(None),
        Some([a, b, c]) => Ok(Some([*a, *b, *c])),
        Some(other) => anyhow::bail!("projection needs exactly 3 axes, got {}", other.len()),
    }
}

pub fn export_vg(
    out: &Path,
    config: &RunConfig,
    vg: &VGCloud,
    format: Format,
    projection: Option<[usize; 3]>,
    view_extent: f64,
) -> anyhow::Result<()> {
    // High-dimensional clouds fall back to the first two image axes and
    // the last chart axis when the caller gave no projection but the
    // format needs one.
    let proj = match projection {
        Some(p) => Some(p),
        None if vg.ambient_dim() > 3 && format != Format::Csv => {
            Some([1, 2, vg.ambient_dim()])
        }
        None => None,
    };
    match format {
        Format::Csv => {
            let path = out.join("vg.csv");
            let mut f = std::fs::File::create(&path)?;
            fibscope_core::write_vg_csv(vg, &mut f)?;
        }
        Format::Ply => {
            let path = out.join("vg.ply");
            let mut f = std::fs::File::create(&path)?;
            fibscope_core::write_vg_ply(vg, proj, false, &mut f)?;
            let path = out.join("vg.binary.ply");
            let mut f = std::fs::File::create(&path)?;
            fibscope_core::write_vg_ply(vg, proj, true, &mut f)?;
        }
        Format::Svg => {
            let path = out.join("vg.svg");
            let mut f = std::fs::File::create(&path)?;
            fibscope_core::write_vg_svg(vg, proj, Some(view_extent), &mut f)?;
        }
    }
    write_json(
        &out.join("vg.json"),
        config,
        &VgSummary {
            points: vg.len(),
            singular_candidates: vg.sing_candidates().count(),
            ambient_dim: vg.ambient_dim(),
            chart_count: vg.chart_count,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct VgSummary {
    points: usize,
    singular_candidates: usize,
    ambient_dim: usize,
    chart_count: usize,
}

/// Concatenates clouds from several radii into one.
pub fn merge_clouds(clouds: Vec<SampleCloud>) -> Option<SampleCloud> {
    let mut it = clouds.into_iter();
    let mut acc = it.next()?;
    for c in it {
        acc.points.extend(c.points);
        acc.residuals.extend(c.residuals);
        acc.radii.extend(c.radii);
        acc.g_images.extend(c.g_images);
        acc.meta.attempts += c.meta.attempts;
        acc.meta.successes += c.meta.successes;
        acc.meta.requested += c.meta.requested;
        acc.meta.radius_target = acc.meta.radius_target.max(c.meta.radius_target);
    }
    Some(acc)
}
