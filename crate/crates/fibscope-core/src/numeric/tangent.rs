//! Escape directions of clouds tending to infinity.
//!
//! For a cloud with bounded image, every accumulation direction of
//! `x/|x|` must kill all leading forms of the map; directions that fail
//! that test are flagged rather than dropped.

use crate::milnor::to_complex;
use crate::numeric::asymptotic::DirectionCluster;
use crate::numeric::cluster::single_linkage;
use crate::numeric::newton::{norm, SampleCloud};
use crate::numeric::NumericError;
use crate::poly::PolyMap;

/// Clusters unit directions from the top two radius bands of a cloud
/// and evaluates the leading forms on each cluster direction.
pub fn tangent_cone_directions(
    cloud: &SampleCloud,
    map: &PolyMap,
    tol: f64,
    direction_tol: f64,
) -> Result<Vec<DirectionCluster>, NumericError> {
    if cloud.distinct_radius_bands() < 3 {
        return Err(NumericError::InvalidParameter(
            "direction estimation needs samples spanning at least 3 radius bands".into(),
        ));
    }
    let leading = map
        .leading_forms()
        .map_err(|e| NumericError::InvalidParameter(e.to_string()))?;

    // Find the top two radius bands (relative grouping, factor 1.5).
    let mut radii: Vec<f64> = cloud.radii.clone();
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut band_floors = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for r in radii {
        if r > last * 1.5 {
            band_floors.push(r);
        }
        last = r;
    }
    let cutoff = band_floors[band_floors.len() - 2];

    let dirs: Vec<Vec<f64>> = cloud
        .points
        .iter()
        .zip(&cloud.radii)
        .filter(|(_, &r)| r >= cutoff * 0.999)
        .map(|(x, &r)| x.iter().map(|v| v / r).collect())
        .collect();
    if dirs.is_empty() {
        return Ok(Vec::new());
    }

    let groups = single_linkage(&dirs, direction_tol);
    let mut out = Vec::new();
    for members in groups {
        let dim = dirs[members[0]].len();
        let mut mean = vec![0.0; dim];
        for &i in &members {
            for (m, v) in mean.iter_mut().zip(&dirs[i]) {
                *m += v;
            }
        }
        let mnorm = norm(&mean);
        if mnorm <= 1e-12 {
            continue;
        }
        let direction: Vec<f64> = mean.iter().map(|v| v / mnorm).collect();
        let z = to_complex(&direction);
        let leading_residual = leading
            .iter()
            .map(|g| g.eval_c64(&z).norm())
            .fold(0.0f64, f64::max);
        out.push(DirectionCluster {
            flagged: leading_residual > tol,
            direction,
            count: members.len(),
            leading_residual,
        });
    }
    out.sort_by(|a, b| a.direction.partial_cmp(&b.direction).unwrap());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapspec::parse_mapping;
    use crate::numeric::newton::CloudMeta;

    fn cloud_from(points: Vec<Vec<f64>>, n: usize) -> SampleCloud {
        let radii: Vec<f64> = points.iter().map(|x| norm(x)).collect();
        SampleCloud {
            n,
            g_images: points.iter().map(|_| vec![0.0; 2 * (n - 1)]).collect(),
            residuals: vec![0.0; points.len()],
            points,
            radii,
            seed: 0,
            meta: CloudMeta {
                radius_target: 0.0,
                requested: 0,
                attempts: 0,
                successes: 0,
                newton_tol: 1e-10,
                max_iterations: 50,
                residual_scaling: "relative-to-term-sum",
            },
        }
    }

    #[test]
    fn line_cloud_gives_a_single_direction_pair() {
        let map = parse_mapping("n=2; G1 = z + z^2*w; rho = 0,1").unwrap().map;
        let dir = [0.5f64, -0.5, 0.5, 0.5];
        let mut pts = Vec::new();
        for &r in &[10.0, 100.0, 1000.0] {
            pts.push(dir.iter().map(|d| d * r).collect());
            pts.push(dir.iter().map(|d| -d * r).collect());
        }
        let cloud = cloud_from(pts, 2);
        let dirs = tangent_cone_directions(&cloud, &map, 1e-2, 5e-2).unwrap();
        assert_eq!(dirs.len(), 2);
        for d in &dirs {
            let dot: f64 = d.direction.iter().zip(&dir).map(|(a, b)| a * b).sum();
            assert!((dot.abs() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn violating_direction_is_flagged_not_dropped() {
        let map = parse_mapping("n=2; G1 = z + z^2*w; rho = 0,1").unwrap().map;
        // direction with z-part nonzero: leading form z^2 w does not vanish
        let dir = [
            0.7071067811865476f64,
            0.0,
            0.7071067811865476,
            0.0,
        ];
        let pts: Vec<Vec<f64>> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&r| dir.iter().map(|d| d * r).collect())
            .collect();
        let cloud = cloud_from(pts, 2);
        let dirs = tangent_cone_directions(&cloud, &map, 1e-2, 5e-2).unwrap();
        assert_eq!(dirs.len(), 1);
        assert!(dirs[0].flagged);
        assert!(dirs[0].leading_residual > 0.1);
    }

    #[test]
    fn too_few_radii_is_an_error() {
        let map = parse_mapping("n=2; G1 = z + z^2*w; rho = 0,1").unwrap().map;
        let cloud = cloud_from(vec![vec![10.0, 0.0, 0.0, 0.0]], 2);
        assert!(tangent_cone_directions(&cloud, &map, 1e-2, 5e-2).is_err());
    }
}
