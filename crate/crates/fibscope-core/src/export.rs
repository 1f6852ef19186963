//! Deterministic exporters for sample and embedded clouds.
//!
//! CSV rows use Rust's shortest-roundtrip float formatting, so files
//! re-read to the exact same values and byte-compare across runs.

use crate::numeric::newton::SampleCloud;
use crate::vg::VGCloud;
use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("projection axis {axis} out of range for ambient dimension {dim}")]
    BadProjection { axis: usize, dim: usize },
    #[error("a 3-axis projection is required when the ambient dimension exceeds 3 (got {dim})")]
    ProjectionRequired { dim: usize },
}

/// Milnor-set sample cloud: one row per point with the source
/// coordinates, residual, radius and image.
pub fn write_cloud_csv(cloud: &SampleCloud, w: &mut impl Write) -> Result<(), ExportError> {
    let n = cloud.n;
    let mut header: Vec<String> = (1..=2 * n).map(|i| format!("x_{i}")).collect();
    header.push("residual".into());
    header.push("radius".into());
    header.extend((1..=2 * (n - 1)).map(|i| format!("g_{i}")));
    writeln!(w, "{}", header.join(","))?;
    for i in 0..cloud.len() {
        let mut row: Vec<String> = cloud.points[i].iter().map(|v| format!("{v}")).collect();
        row.push(format!("{}", cloud.residuals[i]));
        row.push(format!("{}", cloud.radii[i]));
        row.extend(cloud.g_images[i].iter().map(|v| format!("{v}")));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Embedded cloud: `alpha_1..alpha_{2(n-1)}, psi_1..psi_p, radius,
/// residual, flag_sing_inf`.
pub fn write_vg_csv(vg: &VGCloud, w: &mut impl Write) -> Result<(), ExportError> {
    let mut header: Vec<String> = (1..=2 * (vg.n - 1)).map(|i| format!("alpha_{i}")).collect();
    header.extend((1..=vg.chart_count).map(|i| format!("psi_{i}")));
    header.push("radius".into());
    header.push("residual".into());
    header.push("flag_sing_inf".into());
    writeln!(w, "{}", header.join(","))?;
    for i in 0..vg.len() {
        let mut row: Vec<String> = vg.alpha[i].iter().map(|v| format!("{v}")).collect();
        row.extend(vg.psi[i].iter().map(|v| format!("{v}")));
        row.push(format!("{}", vg.radii[i]));
        row.push(format!("{}", vg.residuals[i]));
        row.push(if vg.sing_flags[i] { "1" } else { "0" }.into());
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Resolves the plotting axes: identity for ambient dimension <= 3,
/// otherwise the user-supplied axis triple (1-based indices).
fn resolve_projection(vg: &VGCloud, projection: Option<[usize; 3]>) -> Result<Vec<usize>, ExportError> {
    let dim = vg.ambient_dim();
    match projection {
        Some(axes) => {
            for &a in &axes {
                if a == 0 || a > dim {
                    return Err(ExportError::BadProjection { axis: a, dim });
                }
            }
            Ok(axes.iter().map(|&a| a - 1).collect())
        }
        None if dim <= 3 => Ok((0..dim).collect()),
        None => Err(ExportError::ProjectionRequired { dim }),
    }
}

fn projected(vg: &VGCloud, axes: &[usize], i: usize) -> [f64; 3] {
    let p = vg.point(i);
    let mut out = [0.0; 3];
    for (k, &a) in axes.iter().enumerate().take(3) {
        out[k] = p[a];
    }
    out
}

/// Point cloud in PLY, with the candidate singular points at infinity
/// in their own element. Properties are float64.
pub fn write_vg_ply(
    vg: &VGCloud,
    projection: Option<[usize; 3]>,
    binary: bool,
    w: &mut impl Write,
) -> Result<(), ExportError> {
    let axes = resolve_projection(vg, projection)?;
    let regular: Vec<usize> = (0..vg.len()).filter(|&i| !vg.sing_flags[i]).collect();
    let singular: Vec<usize> = (0..vg.len()).filter(|&i| vg.sing_flags[i]).collect();

    writeln!(w, "ply")?;
    if binary {
        writeln!(w, "format binary_little_endian 1.0")?;
    } else {
        writeln!(w, "format ascii 1.0")?;
    }
    writeln!(w, "element vertex {}", regular.len())?;
    for name in ["x", "y", "z"] {
        writeln!(w, "property double {name}")?;
    }
    writeln!(w, "element singular {}", singular.len())?;
    for name in ["x", "y", "z"] {
        writeln!(w, "property double {name}")?;
    }
    writeln!(w, "end_header")?;

    let emit = |idx: &[usize], w: &mut dyn Write| -> io::Result<()> {
        for &i in idx {
            let p = projected(vg, &axes, i);
            if binary {
                for v in p {
                    w.write_all(&v.to_le_bytes())?;
                }
            } else {
                writeln!(w, "{} {} {}", p[0], p[1], p[2])?;
            }
        }
        Ok(())
    };
    emit(&regular, w)?;
    emit(&singular, w)?;
    Ok(())
}

/// 2D orthographic scatter of the projected cloud: fixed 1000x1000
/// viewBox, axes, legend, candidate singular points highlighted.
pub fn write_vg_svg(
    vg: &VGCloud,
    projection: Option<[usize; 3]>,
    extent: Option<f64>,
    w: &mut impl Write,
) -> Result<(), ExportError> {
    let axes = resolve_projection(vg, projection)?;
    // Oblique view: the third axis leans into the page so a horizontal
    // plane and a vertical cone stay distinguishable.
    let view = |p: [f64; 3]| -> (f64, f64) {
        let u = p[0] + 0.35 * p[1];
        let v = p[2] + 0.35 * p[1] - 0.0 * p[0];
        (u, v)
    };

    let ext = extent.unwrap_or(1.5).max(1e-12);
    let scale = 420.0 / ext;
    let cx = 500.0;
    let cy = 620.0;
    let to_px = |(u, v): (f64, f64)| -> (f64, f64) { (cx + u * scale, cy - v * scale) };

    writeln!(
        w,
        r##"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 1000 1000" width="1000" height="1000">"##
    )?;
    writeln!(w, r##"<rect width="1000" height="1000" fill="white"/>"##)?;

    // axes through the projected origin
    let (ox, oy) = to_px((0.0, 0.0));
    writeln!(
        w,
        r##"<line x1="{:.2}" y1="{oy:.2}" x2="{:.2}" y2="{oy:.2}" stroke="#888" stroke-width="1"/>"##,
        ox - 460.0,
        ox + 460.0
    )?;
    writeln!(
        w,
        r##"<line x1="{ox:.2}" y1="{:.2}" x2="{ox:.2}" y2="{:.2}" stroke="#888" stroke-width="1"/>"##,
        oy - 560.0,
        oy + 360.0
    )?;
    let axis_names: Vec<String> = axes
        .iter()
        .map(|&a| {
            if a < 2 * (vg.n - 1) {
                format!("alpha_{}", a + 1)
            } else {
                format!("psi_{}", a + 1 - 2 * (vg.n - 1))
            }
        })
        .collect();
    writeln!(
        w,
        r##"<text x="{:.2}" y="{:.2}" font-family="monospace" font-size="16" fill="#555">{}</text>"##,
        ox + 440.0,
        oy - 8.0,
        axis_names.first().cloned().unwrap_or_default()
    )?;
    writeln!(
        w,
        r##"<text x="{:.2}" y="{:.2}" font-family="monospace" font-size="16" fill="#555">{}</text>"##,
        ox + 8.0,
        oy - 545.0,
        axis_names.get(2).cloned().unwrap_or_default()
    )?;

    let mut plotted = 0usize;
    let mut clipped = 0usize;
    for i in 0..vg.len() {
        let p = projected(vg, &axes, i);
        if p.iter().any(|v| v.abs() > ext) {
            clipped += 1;
            continue;
        }
        let (px, py) = to_px(view(p));
        if vg.sing_flags[i] {
            writeln!(
                w,
                r##"<circle cx="{px:.2}" cy="{py:.2}" r="5" fill="#c0392b" class="singular"/>"##
            )?;
        } else {
            writeln!(
                w,
                r##"<circle cx="{px:.2}" cy="{py:.2}" r="2" fill="#2c6fa8" fill-opacity="0.55" class="regular"/>"##
            )?;
        }
        plotted += 1;
    }

    writeln!(
        w,
        r##"<rect x="20" y="20" width="330" height="86" fill="#fafafa" stroke="#ccc"/>"##
    )?;
    writeln!(
        w,
        r##"<circle cx="40" cy="44" r="2" fill="#2c6fa8"/><text x="54" y="49" font-family="monospace" font-size="15">embedded samples ({plotted} shown, {clipped} outside view)</text>"##
    )?;
    writeln!(
        w,
        r##"<circle cx="40" cy="74" r="5" fill="#c0392b"/><text x="54" y="79" font-family="monospace" font-size="15">singular-at-infinity candidates</text>"##
    )?;
    writeln!(w, "</svg>")?;
    Ok(())
}
