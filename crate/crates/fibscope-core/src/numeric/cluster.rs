//! Single-linkage clustering of image points across radii.

use serde::Serialize;

/// One retained sample feeding the clustering stage.
#[derive(Clone, Debug)]
pub struct RetainedPoint {
    /// Real image vector (length `2(n-1)`).
    pub g: Vec<f64>,
    /// Scheduled radius this point was sampled at.
    pub radius: f64,
    pub radius_index: usize,
    pub attempt: u64,
}

/// An accumulation cluster of image points.
#[derive(Clone, Debug, Serialize)]
pub struct Cluster {
    pub center: Vec<f64>,
    /// Max distance from the center over all members.
    pub spread: f64,
    pub count: usize,
    /// Distinct scheduled radii with members, ascending.
    pub support_radii: Vec<f64>,
    /// Per-radius max distance from the center, ascending by radius.
    pub per_radius_spread: Vec<(f64, f64)>,
}

impl Cluster {
    pub fn supported_at(&self, radius: f64) -> bool {
        self.support_radii.iter().any(|&r| r == radius)
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, i: usize) -> usize {
        let mut root = i;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = i;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Groups points whose pairwise-linked distance is below `tol`.
/// Returns clusters as sorted index lists, ordered by smallest member.
pub fn single_linkage(points: &[Vec<f64>], tol: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if dist(&points[i], &points[j]) <= tol {
                uf.union(i, j);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let root = uf.find(i);
        groups.entry(root).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Summarizes a member set into a [`Cluster`]. Member order is made
/// canonical before the mean so results are scheduling-independent.
pub fn summarize(points: &[RetainedPoint], members: &[usize]) -> Cluster {
    let mut idx: Vec<usize> = members.to_vec();
    idx.sort_unstable();
    let dim = points[idx[0]].g.len();
    let mut center = vec![0.0; dim];
    for &i in &idx {
        for (c, v) in center.iter_mut().zip(&points[i].g) {
            *c += v;
        }
    }
    for c in center.iter_mut() {
        *c /= idx.len() as f64;
    }
    let spread = idx
        .iter()
        .map(|&i| dist(&points[i].g, &center))
        .fold(0.0f64, f64::max);

    let mut radii: Vec<f64> = idx.iter().map(|&i| points[i].radius).collect();
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    radii.dedup();

    // Per-radius spread is measured around the band's own mean, so it
    // tracks how tightly that radius accumulates rather than how far
    // the band sits from the all-radius center.
    let per_radius_spread = radii
        .iter()
        .map(|&r| {
            let band: Vec<usize> = idx
                .iter()
                .copied()
                .filter(|&i| points[i].radius == r)
                .collect();
            let mut band_center = vec![0.0; dim];
            for &i in &band {
                for (c, v) in band_center.iter_mut().zip(&points[i].g) {
                    *c += v;
                }
            }
            for c in band_center.iter_mut() {
                *c /= band.len() as f64;
            }
            let s = band
                .iter()
                .map(|&i| dist(&points[i].g, &band_center))
                .fold(0.0f64, f64::max);
            (r, s)
        })
        .collect();

    Cluster {
        center,
        spread,
        count: idx.len(),
        support_radii: radii,
        per_radius_spread,
    }
}
