//! Symbolic construction of the Milnor set of a mapping.
//!
//! For `G: C^n -> C^(n-1)` and a weight function `rho = Σ a_i |z_i|^2`,
//! the Milnor set is the singular locus of `(G, rho): R^{2n} -> R^{2n-1}`.
//! It is cut out by a single mixed-polynomial equation `h = 0`, where
//! `h(z) = 2 Σ a_i v_i(z) conj(z_i)` and `v` is the vector of signed
//! maximal cofactors of the complex Jacobian of `G`. This module builds
//! both presentations (the equation `h` and the maximal minors of the
//! real Jacobian of `(G, rho)`) and cross-checks them numerically.

use crate::numeric::rank::{numerical_rank, numerical_rank_row_normalized};
use crate::poly::real::{realify_pair, realify_rho};
use crate::poly::mixed::CompiledPoly;
use crate::poly::{MixedPoly, PolyError, PolyMap, RealPoly, WeightVector};
use crate::rational::rat_int;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MilnorError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("presentation is identically zero; the weight function is constant along every fiber")]
    IdenticallyZero,
    #[error("empty sample set")]
    EmptySamples,
    #[error("sample {index} has residual {residual:.3e}, above tolerance {tol:.3e}")]
    OffSetSample {
        index: usize,
        residual: f64,
        tol: f64,
    },
}

/// The vector field of signed maximal cofactors of the complex Jacobian,
/// tangent to every fiber of the map.
#[derive(Clone, Debug)]
pub struct CofactorField {
    v: Vec<MixedPoly>,
}

impl CofactorField {
    pub fn components(&self) -> &[MixedPoly] {
        &self.v
    }
}

/// Complex Jacobian of a holomorphic map: the `(n-1) x n` matrix of
/// Wirtinger derivatives.
pub fn complex_jacobian(map: &PolyMap) -> Vec<Vec<MixedPoly>> {
    let n = map.source_dim();
    map.components()
        .iter()
        .map(|g| (0..n).map(|i| g.wirtinger(i, false)).collect())
        .collect()
}

pub(crate) trait RingElem: Clone {
    fn ring_zero(&self) -> Self;
    fn ring_one(&self) -> Self;
    fn ring_add(&self, o: &Self) -> Self;
    fn ring_mul(&self, o: &Self) -> Self;
    fn ring_neg(&self) -> Self;
}

impl RingElem for MixedPoly {
    fn ring_zero(&self) -> Self {
        MixedPoly::zero(self.nvars())
    }
    fn ring_one(&self) -> Self {
        MixedPoly::one(self.nvars())
    }
    fn ring_add(&self, o: &Self) -> Self {
        self.add(o).expect("matching variable counts")
    }
    fn ring_mul(&self, o: &Self) -> Self {
        self.mul(o).expect("matching variable counts")
    }
    fn ring_neg(&self) -> Self {
        self.neg()
    }
}

impl RingElem for RealPoly {
    fn ring_zero(&self) -> Self {
        RealPoly::zero(self.nvars())
    }
    fn ring_one(&self) -> Self {
        RealPoly::constant(self.nvars(), rat_int(1))
    }
    fn ring_add(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn ring_mul(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn ring_neg(&self) -> Self {
        self.neg()
    }
}

/// Determinant of a square matrix of ring elements, by Laplace expansion
/// with memoization on column subsets.
pub(crate) fn det_ring<T: RingElem>(m: &[Vec<T>]) -> T {
    let k = m.len();
    assert!(k > 0 && m.iter().all(|r| r.len() == k));
    let full: u32 = if k == 32 { u32::MAX } else { (1u32 << k) - 1 };
    let mut memo: HashMap<u32, T> = HashMap::new();
    det_masked(m, 0, full, &mut memo)
}

fn det_masked<T: RingElem>(m: &[Vec<T>], row: usize, mask: u32, memo: &mut HashMap<u32, T>) -> T {
    if mask == 0 {
        return m[0][0].ring_one();
    }
    if let Some(hit) = memo.get(&mask) {
        return hit.clone();
    }
    let mut acc = m[0][0].ring_zero();
    let mut pos = 0;
    for j in 0..m.len() {
        if mask & (1 << j) == 0 {
            continue;
        }
        let sub = det_masked(m, row + 1, mask & !(1 << j), memo);
        let term = m[row][j].ring_mul(&sub);
        acc = if pos % 2 == 0 {
            acc.ring_add(&term)
        } else {
            acc.ring_add(&term.ring_neg())
        };
        pos += 1;
    }
    memo.insert(mask, acc.clone());
    acc
}

/// Signed cofactors `v_i = (-1)^(1+i) det(J without column i)` of the
/// complex Jacobian `J`. The signs make `Σ_i v_i dG_j/dz_i = 0` hold as
/// a polynomial identity for every component `j`.
pub fn cofactor_field(map: &PolyMap) -> CofactorField {
    let n = map.source_dim();
    let jac = complex_jacobian(map);
    let mut v = Vec::with_capacity(n);
    for i in 0..n {
        let sub: Vec<Vec<MixedPoly>> = jac
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != i)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let d = if n == 1 {
            MixedPoly::one(n)
        } else {
            det_ring(&sub)
        };
        v.push(if i % 2 == 0 { d } else { d.neg() });
    }
    CofactorField { v }
}

/// Unsigned maximal minors of the complex Jacobian (delete one column).
/// Their common zero set is the critical locus of the map.
pub fn jacobian_minors(map: &PolyMap) -> Vec<MixedPoly> {
    cofactor_field(map)
        .components()
        .iter()
        .enumerate()
        .map(|(i, v)| if i % 2 == 0 { v.clone() } else { v.neg() })
        .collect()
}

/// Both presentations of the Milnor set: the single mixed equation `h`
/// and the maximal minors of the real Jacobian of `(G, rho)`.
#[derive(Clone, Debug)]
pub struct MilnorPresentation {
    pub n: usize,
    pub map: PolyMap,
    pub weights: WeightVector,
    pub cofactors: CofactorField,
    /// `h(z) = 2 Σ a_i v_i(z) conj(z_i)`; the Milnor set is `h = 0`.
    pub h: MixedPoly,
    pub h_re: RealPoly,
    pub h_im: RealPoly,
    /// Wirtinger partials of `h` (plain and conjugate), for Jacobians.
    pub h_dz: Vec<MixedPoly>,
    pub h_dzbar: Vec<MixedPoly>,
    /// Real Jacobian of `(G, rho)`: rows are gradients of
    /// `(Re G_1, Im G_1, ..., rho)`, a `(2n-1) x 2n` matrix.
    pub jac_real: Vec<Vec<RealPoly>>,
    /// All `(2n-1) x (2n-1)` minors of `jac_real` (column `j` deleted).
    pub minors: Vec<RealPoly>,
    pub rho_real: RealPoly,
    compiled: CompiledMilnor,
}

/// Float-coefficient evaluators for the hot numeric paths.
#[derive(Clone, Debug)]
struct CompiledMilnor {
    h: CompiledPoly,
    h_dz: Vec<CompiledPoly>,
    h_dzbar: Vec<CompiledPoly>,
    g: Vec<CompiledPoly>,
}

impl CompiledMilnor {
    fn new(h: &MixedPoly, h_dz: &[MixedPoly], h_dzbar: &[MixedPoly], map: &PolyMap) -> Self {
        CompiledMilnor {
            h: CompiledPoly::from_poly(h),
            h_dz: h_dz.iter().map(CompiledPoly::from_poly).collect(),
            h_dzbar: h_dzbar.iter().map(CompiledPoly::from_poly).collect(),
            g: map.components().iter().map(CompiledPoly::from_poly).collect(),
        }
    }
}

impl MilnorPresentation {
    /// `h` evaluated at a real point of R^{2n}.
    pub fn h_at(&self, x: &[f64]) -> Complex64 {
        self.compiled.h.eval(&to_complex(x))
    }

    /// Scale `max(1, Σ |terms of h|)` at a point; residual tolerances are
    /// taken relative to it.
    pub fn h_scale_at(&self, x: &[f64]) -> f64 {
        self.compiled.h.eval_abs(&to_complex(x)).max(1.0)
    }

    /// Map components evaluated at a real point.
    pub fn g_at(&self, x: &[f64]) -> Vec<Complex64> {
        let z = to_complex(x);
        self.compiled.g.iter().map(|g| g.eval(&z)).collect()
    }

    /// Rebuilds the compiled evaluators after a field edit; only used
    /// by in-crate tests that splice in synthetic equations.
    #[cfg(test)]
    pub(crate) fn refresh_compiled(&mut self) {
        self.compiled = CompiledMilnor::new(&self.h, &self.h_dz, &self.h_dzbar, &self.map);
    }

    /// Gradient rows of `(Re h, Im h)` as a `2 x 2n` real matrix.
    pub fn h_jacobian_at(&self, x: &[f64]) -> DMatrix<f64> {
        let z = to_complex(x);
        let mut m = DMatrix::zeros(2, 2 * self.n);
        for j in 0..self.n {
            let hz = self.compiled.h_dz[j].eval(&z);
            let hzb = self.compiled.h_dzbar[j].eval(&z);
            let d_re = hz + hzb; // d/dx_{2j}
            let d_im = Complex64::i() * (hz - hzb); // d/dx_{2j+1}
            m[(0, 2 * j)] = d_re.re;
            m[(1, 2 * j)] = d_re.im;
            m[(0, 2 * j + 1)] = d_im.re;
            m[(1, 2 * j + 1)] = d_im.im;
        }
        m
    }

    /// Real Jacobian of `(G, rho)` evaluated at a point.
    pub fn jac_rho_at(&self, x: &[f64]) -> DMatrix<f64> {
        let rows = self.jac_real.len();
        let cols = 2 * self.n;
        DMatrix::from_fn(rows, cols, |r, c| self.jac_real[r][c].eval_f64(x))
    }

    /// Real Jacobian of `(G, phi)` with `phi = 1/(1+rho)`: the rho row
    /// scaled by `-1/(1+rho)^2`.
    pub fn jac_phi_at(&self, x: &[f64]) -> DMatrix<f64> {
        let mut m = self.jac_rho_at(x);
        let rho = self.rho_real.eval_f64(x);
        let s = -1.0 / ((1.0 + rho) * (1.0 + rho));
        let last = m.nrows() - 1;
        for c in 0..m.ncols() {
            m[(last, c)] *= s;
        }
        m
    }
}

pub(crate) fn to_complex(x: &[f64]) -> Vec<Complex64> {
    x.chunks_exact(2)
        .map(|p| Complex64::new(p[0], p[1]))
        .collect()
}

/// Builds the full Milnor presentation for a map and weight vector.
///
/// The identification of the zero set of `h` with the Milnor set takes
/// the critical-value set of `G` to be empty; `numeric::k0_probe`
/// gathers evidence for that separately.
pub fn milnor_h(map: &PolyMap, weights: &WeightVector) -> Result<MilnorPresentation, MilnorError> {
    let n = map.source_dim();
    if weights.len() != n {
        return Err(MilnorError::Poly(PolyError::VariableCountMismatch {
            left: n,
            right: weights.len(),
        }));
    }
    let cofactors = cofactor_field(map);
    let two = rat_int(2);
    let mut h = MixedPoly::zero(n);
    for (i, v) in cofactors.components().iter().enumerate() {
        let a = &weights.weights()[i];
        if num_traits::Zero::is_zero(a) {
            continue;
        }
        let t = v
            .mul(&MixedPoly::conj_var(n, i))
            .expect("same nvars")
            .scale_rat(&(a * &two));
        h = h.add(&t).expect("same nvars");
    }
    debug_assert!(h.terms().all(|(e, _)| e.conj_degree() == 1));

    let (h_re, h_im) = realify_pair(&h);
    let h_dz: Vec<MixedPoly> = (0..n).map(|j| h.wirtinger(j, false)).collect();
    let h_dzbar: Vec<MixedPoly> = (0..n).map(|j| h.wirtinger(j, true)).collect();
    let compiled = CompiledMilnor::new(&h, &h_dz, &h_dzbar, map);

    let real_map = crate::poly::realify_map(map);
    let rho_real = realify_rho(weights);
    let m = 2 * n;
    let mut jac_real: Vec<Vec<RealPoly>> = Vec::with_capacity(m - 1);
    for comp in &real_map.components {
        jac_real.push((0..m).map(|c| comp.partial(c)).collect());
    }
    jac_real.push((0..m).map(|c| rho_real.partial(c)).collect());

    let minors = (0..m)
        .map(|skip| {
            let sub: Vec<Vec<RealPoly>> = jac_real
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(c, _)| *c != skip)
                        .map(|(_, p)| p.clone())
                        .collect()
                })
                .collect();
            det_ring(&sub)
        })
        .collect();

    Ok(MilnorPresentation {
        n,
        map: map.clone(),
        weights: weights.clone(),
        cofactors,
        h,
        h_re,
        h_im,
        h_dz,
        h_dzbar,
        jac_real,
        minors,
        rho_real,
        compiled,
    })
}

/// One failed pointwise check in [`verify_equivalence`].
#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceViolation {
    pub index: usize,
    pub kind: String,
    pub detail: String,
}

/// Pointwise certification report for the two Milnor-set presentations.
#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub checked: usize,
    pub on_set: usize,
    pub off_set: usize,
    pub tol: f64,
    pub violations: Vec<EquivalenceViolation>,
}

impl EquivalenceReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks, at every sample point, that the rank presentations through
/// `rho` and `phi` agree and that `h` vanishes exactly where all maximal
/// minors of the real Jacobian do (relative to per-point scales).
pub fn verify_equivalence(
    pres: &MilnorPresentation,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<EquivalenceReport, MilnorError> {
    if samples.is_empty() {
        return Err(MilnorError::EmptySamples);
    }
    let mut violations = Vec::new();
    let mut on_set = 0;
    let mut off_set = 0;
    for (index, x) in samples.iter().enumerate() {
        let a = pres.jac_rho_at(x);
        let b = pres.jac_phi_at(x);
        let ra = numerical_rank_row_normalized(&a, tol);
        let rb = numerical_rank_row_normalized(&b, tol);
        if ra != rb {
            violations.push(EquivalenceViolation {
                index,
                kind: "rank-mismatch".into(),
                detail: format!("rank through rho {ra} vs through phi {rb}"),
            });
        }

        let h_val = pres.h_at(x).norm();
        let h_on = h_val <= tol * pres.h_scale_at(x);

        let mut minors_on = true;
        for skip in 0..a.ncols() {
            let sub = a.clone().remove_column(skip);
            let det = sub.clone().lu().determinant();
            let hadamard: f64 = (0..sub.nrows())
                .map(|r| sub.row(r).norm())
                .product();
            if det.abs() > tol * (1.0 + hadamard) {
                minors_on = false;
                break;
            }
        }

        if h_on != minors_on {
            violations.push(EquivalenceViolation {
                index,
                kind: "membership-mismatch".into(),
                detail: format!(
                    "|h| = {h_val:.3e} says {} but minors say {}",
                    if h_on { "on" } else { "off" },
                    if minors_on { "on" } else { "off" }
                ),
            });
        }
        if h_on {
            on_set += 1;
        } else {
            off_set += 1;
        }
    }
    violations.sort_by(|a, b| (a.index, a.kind.clone()).cmp(&(b.index, b.kind.clone())));
    Ok(EquivalenceReport {
        checked: samples.len(),
        on_set,
        off_set,
        tol,
        violations,
    })
}

/// Rank evidence for smoothness of the Milnor set at on-set samples.
#[derive(Clone, Debug, Serialize)]
pub struct SmoothnessReport {
    pub checked: usize,
    /// Histogram: rank of the `2 x 2n` Jacobian of `(Re h, Im h)` -> count.
    pub rank_histogram: Vec<(usize, usize)>,
    /// Local real dimension implied at full-rank samples.
    pub implied_dimension: usize,
    pub deficient_samples: Vec<usize>,
    pub tol: f64,
}

/// Probes the rank of `D(Re h, Im h)` at on-set samples. Full rank 2
/// at a sample means the set is locally a manifold of dimension `2n-2`
/// there; deficient samples are reported, not judged.
pub fn smoothness_probe(
    pres: &MilnorPresentation,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<SmoothnessReport, MilnorError> {
    if pres.h.is_zero() {
        return Err(MilnorError::IdenticallyZero);
    }
    if samples.is_empty() {
        return Err(MilnorError::EmptySamples);
    }
    let mut hist: HashMap<usize, usize> = HashMap::new();
    let mut deficient = Vec::new();
    for (index, x) in samples.iter().enumerate() {
        let res = pres.h_at(x).norm();
        let scale = pres.h_scale_at(x);
        if res > tol * scale {
            return Err(MilnorError::OffSetSample {
                index,
                residual: res,
                tol: tol * scale,
            });
        }
        let jac = pres.h_jacobian_at(x);
        let rank = numerical_rank(&jac, 1e-8);
        *hist.entry(rank).or_insert(0) += 1;
        if rank < 2 {
            deficient.push(index);
        }
    }
    let mut rank_histogram: Vec<(usize, usize)> = hist.into_iter().collect();
    rank_histogram.sort_unstable();
    Ok(SmoothnessReport {
        checked: samples.len(),
        rank_histogram,
        implied_dimension: 2 * pres.n - 2,
        deficient_samples: deficient,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapspec::{parse_mapping, parse_poly};
    use crate::poly::WeightVector;

    fn broughton() -> PolyMap {
        parse_mapping("n=2; G1 = z + z^2*w; rho = 0,1").unwrap().map
    }

    fn twistsum() -> PolyMap {
        parse_mapping("n=3; G1 = z; G2 = z*zeta^2 + w; rho = 0,0,1")
            .unwrap()
            .map
    }

    fn suspension() -> PolyMap {
        parse_mapping("n=3; G1 = z + z^2*w; G2 = zeta; rho = 0,1,0")
            .unwrap()
            .map
    }

    /// Independent determinant oracle: a plain permutation expansion.
    fn det_permutation(m: &[Vec<MixedPoly>]) -> MixedPoly {
        fn go(m: &[Vec<MixedPoly>], cols: &mut Vec<usize>, row: usize, sign: bool) -> MixedPoly {
            let n = m.len();
            if row == n {
                let mut prod = MixedPoly::one(m[0][0].nvars());
                for (r, &c) in cols.iter().enumerate() {
                    prod = prod.mul(&m[r][c]).unwrap();
                }
                return if sign { prod.neg() } else { prod };
            }
            let mut acc = MixedPoly::zero(m[0][0].nvars());
            for c in 0..n {
                if cols.contains(&c) {
                    continue;
                }
                let inversions = cols.iter().filter(|&&p| p > c).count();
                cols.push(c);
                let term = go(m, cols, row + 1, sign ^ (inversions % 2 == 1));
                cols.pop();
                acc = acc.add(&term).unwrap();
            }
            acc
        }
        go(m, &mut Vec::new(), 0, false)
    }

    #[test]
    fn det_ring_matches_permutation_expansion() {
        let entries: Vec<Vec<MixedPoly>> = vec![
            vec![
                parse_poly(2, "z1 + 1").unwrap(),
                parse_poly(2, "z2^2").unwrap(),
                parse_poly(2, "3").unwrap(),
            ],
            vec![
                parse_poly(2, "conj(z1)").unwrap(),
                parse_poly(2, "z1*z2").unwrap(),
                parse_poly(2, "0").unwrap(),
            ],
            vec![
                parse_poly(2, "1/2").unwrap(),
                parse_poly(2, "z2 - i").unwrap(),
                parse_poly(2, "z1^2").unwrap(),
            ],
        ];
        assert_eq!(det_ring(&entries), det_permutation(&entries));
    }

    #[test]
    fn jacobian_broughton() {
        let j = complex_jacobian(&broughton());
        assert_eq!(j.len(), 1);
        assert_eq!(j[0][0], parse_poly(2, "1 + 2*z1*z2").unwrap());
        assert_eq!(j[0][1], parse_poly(2, "z1^2").unwrap());
    }

    #[test]
    fn jacobian_twistsum_and_constant_row() {
        let j = complex_jacobian(&twistsum());
        assert_eq!(j[0][0], parse_poly(3, "1").unwrap());
        assert_eq!(j[0][1], parse_poly(3, "0").unwrap());
        assert_eq!(j[0][2], parse_poly(3, "0").unwrap());
        assert_eq!(j[1][0], parse_poly(3, "z3^2").unwrap());
        assert_eq!(j[1][1], parse_poly(3, "1").unwrap());
        assert_eq!(j[1][2], parse_poly(3, "2*z1*z3").unwrap());

        let constant = parse_mapping("n=2; G1 = 5; rho = 1,0").unwrap().map;
        let j = complex_jacobian(&constant);
        assert!(j[0].iter().all(|p| p.is_zero()));
    }

    #[test]
    fn cofactors_match_hand_expansion() {
        let v = cofactor_field(&broughton());
        assert_eq!(v.components()[0], parse_poly(2, "z1^2").unwrap());
        assert_eq!(v.components()[1], parse_poly(2, "-1 - 2*z1*z2").unwrap());

        let v = cofactor_field(&twistsum());
        assert_eq!(v.components()[0], parse_poly(3, "0").unwrap());
        assert_eq!(v.components()[1], parse_poly(3, "-2*z1*z3").unwrap());
        assert_eq!(v.components()[2], parse_poly(3, "1").unwrap());

        let line = parse_mapping("n=2; G1 = z1; rho = 0,1").unwrap().map;
        let v = cofactor_field(&line);
        assert_eq!(v.components()[0], parse_poly(2, "0").unwrap());
        assert_eq!(v.components()[1], parse_poly(2, "-1").unwrap());
    }

    #[test]
    fn cofactor_tangency_identity() {
        for map in [broughton(), twistsum(), suspension()] {
            let v = cofactor_field(&map);
            let jac = complex_jacobian(&map);
            for row in &jac {
                let mut acc = MixedPoly::zero(map.source_dim());
                for (vi, dg) in v.components().iter().zip(row) {
                    acc = acc.add(&vi.mul(dg).unwrap()).unwrap();
                }
                assert!(acc.is_zero(), "tangency failed: {acc}");
            }
        }
    }

    #[test]
    fn h_broughton_factors_exactly() {
        let w = WeightVector::from_ints(&[0, 1]).unwrap();
        let pres = milnor_h(&broughton(), &w).unwrap();
        // h = -2 (1 + 2 z w) conj(w), as an exact identity
        let factor = parse_poly(2, "1 + 2*z1*z2")
            .unwrap()
            .mul(&parse_poly(2, "conj(z2)").unwrap())
            .unwrap()
            .scale_rat(&rat_int(-2));
        assert_eq!(pres.h, factor);
        assert_eq!(format!("{}", pres.h), "-4*z1*z2*conj(z2) - 2*conj(z2)");
    }

    #[test]
    fn h_twistsum_both_weight_choices() {
        let map = twistsum();
        let pres = milnor_h(&map, &WeightVector::from_ints(&[0, 0, 1]).unwrap()).unwrap();
        assert_eq!(pres.h, parse_poly(3, "2*conj(z3)").unwrap());

        let pres = milnor_h(&map, &WeightVector::from_ints(&[0, 1, 0]).unwrap()).unwrap();
        assert_eq!(pres.h, parse_poly(3, "-4*z1*z3*conj(z2)").unwrap());
    }

    #[test]
    fn h_is_linear_in_conjugates() {
        for (map, w) in [
            (broughton(), WeightVector::from_ints(&[0, 1]).unwrap()),
            (broughton(), WeightVector::from_ints(&[1, 1]).unwrap()),
            (twistsum(), WeightVector::from_ints(&[1, 2, 3]).unwrap()),
            (suspension(), WeightVector::from_ints(&[0, 1, 0]).unwrap()),
        ] {
            let pres = milnor_h(&map, &w).unwrap();
            assert!(pres.h.terms().all(|(e, _)| e.conj_degree() == 1));
        }
    }

    #[test]
    fn weight_scaling_scales_h_exactly() {
        let map = twistsum();
        let w = WeightVector::from_ints(&[1, 2, 3]).unwrap();
        let lambda = crate::rational::rat_frac(7, 3);
        let scaled = w.scaled(&lambda).unwrap();
        let h1 = milnor_h(&map, &w).unwrap().h;
        let h2 = milnor_h(&map, &scaled).unwrap().h;
        assert_eq!(h2, h1.scale_rat(&lambda));
    }

    /// Points on the two branches of the Broughton Milnor set plus
    /// generic off-set points.
    fn broughton_samples() -> Vec<Vec<f64>> {
        let mut pts = Vec::new();
        // branch with w = 0
        for k in 0..20 {
            let t = -2.0 + 0.21 * k as f64;
            pts.push(vec![t, 1.0 - 0.1 * t, 0.0, 0.0]);
        }
        // branch z = -conj(w) / (2|w|^2)
        for k in 1..=20 {
            let x3 = 0.3 * k as f64;
            let x4 = -1.5 + 0.17 * k as f64;
            let d = 2.0 * (x3 * x3 + x4 * x4);
            pts.push(vec![-x3 / d, x4 / d, x3, x4]);
        }
        // off-set
        for k in 0..20 {
            let t = k as f64 * 0.37;
            pts.push(vec![1.0 + t, -0.5 * t, 2.0 - t, 1.0 + 0.5 * t]);
        }
        pts
    }

    #[test]
    fn equivalence_of_presentations_on_broughton() {
        let w = WeightVector::from_ints(&[0, 1]).unwrap();
        let pres = milnor_h(&broughton(), &w).unwrap();
        let report = verify_equivalence(&pres, &broughton_samples(), 1e-8).unwrap();
        assert!(report.is_clean(), "violations: {:?}", report.violations);
        assert!(report.on_set >= 40);
        assert!(report.off_set >= 15);
    }

    #[test]
    fn equivalence_on_the_line_example() {
        // G = z1 with rho = |w|^2: h = -2 conj(w), minors vanish exactly
        // on {x3 = x4 = 0}
        let spec = parse_mapping("n=2; G1 = z1; rho = 0,1").unwrap();
        let pres = milnor_h(&spec.map, &spec.weights).unwrap();
        assert_eq!(pres.h, parse_poly(2, "-2*conj(z2)").unwrap());
        let samples = vec![
            vec![1.0, 2.0, 0.0, 0.0],
            vec![-3.0, 0.5, 0.0, 0.0],
            vec![1.0, 2.0, 0.3, -0.4],
        ];
        let report = verify_equivalence(&pres, &samples, 1e-8).unwrap();
        assert!(report.is_clean());
        assert_eq!(report.on_set, 2);
        assert_eq!(report.off_set, 1);
    }

    #[test]
    fn smoothness_probe_reports_rank_two() {
        let w = WeightVector::from_ints(&[0, 1]).unwrap();
        let pres = milnor_h(&broughton(), &w).unwrap();
        let on_set: Vec<Vec<f64>> = broughton_samples()
            .into_iter()
            .filter(|x| pres.h_at(x).norm() <= 1e-10 * pres.h_scale_at(x))
            .collect();
        let report = smoothness_probe(&pres, &on_set, 1e-8).unwrap();
        assert!(report.deficient_samples.is_empty());
        assert_eq!(report.rank_histogram, vec![(2, on_set.len())]);
        assert_eq!(report.implied_dimension, 2);
    }

    #[test]
    fn degenerate_weight_gives_identically_zero_guard() {
        // rho = |z|^2 on G = z1 is constant along fibers: h vanishes
        let spec_text = "n=2; G1 = z1; rho = 1,0";
        let spec = parse_mapping(spec_text).unwrap();
        let pres = milnor_h(&spec.map, &spec.weights).unwrap();
        assert!(pres.h.is_zero());
        let err = smoothness_probe(&pres, &[vec![0.0; 4]], 1e-8).unwrap_err();
        assert!(matches!(err, MilnorError::IdenticallyZero));
    }

    #[test]
    fn off_set_sample_is_rejected_by_probe() {
        let w = WeightVector::from_ints(&[0, 1]).unwrap();
        let pres = milnor_h(&broughton(), &w).unwrap();
        let err = smoothness_probe(&pres, &[vec![5.0, 1.0, 2.0, 3.0]], 1e-8).unwrap_err();
        assert!(matches!(err, MilnorError::OffSetSample { .. }));
    }

    #[test]
    fn empty_sample_sets_error() {
        let w = WeightVector::from_ints(&[0, 1]).unwrap();
        let pres = milnor_h(&broughton(), &w).unwrap();
        assert!(matches!(
            verify_equivalence(&pres, &[], 1e-8),
            Err(MilnorError::EmptySamples)
        ));
    }
}
