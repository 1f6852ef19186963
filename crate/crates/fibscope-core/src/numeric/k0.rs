//! Search for complex critical points of the map.
//!
//! The critical locus is the common zero set of the maximal minors of
//! the complex Jacobian: `n` holomorphic equations in `n` unknowns.
//! The probe is evidential (Newton from random starts); two exact
//! short-circuits certify emptiness where cheap certificates exist:
//! a maximal minor that is a nonzero constant, and, for two variables,
//! a Sylvester resultant of the two partials that is a nonzero constant.

use crate::milnor::jacobian_minors;
use crate::numeric::rng::{normal, substream, StreamKind};
use crate::numeric::NumericError;
use crate::poly::mixed::CompiledPoly;
use crate::poly::{MixedPoly, PolyMap};
use crate::rational::CRat;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

/// Bound on each variable's degree for the exact resultant branch.
const RESULTANT_DEGREE_CAP: u32 = 8;
/// Witnesses beyond this coordinate size are treated as escapes to
/// infinity, not critical points.
const WITNESS_RADIUS_CAP: f64 = 1e4;
const WITNESS_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum K0Verdict {
    /// Emptiness proved by an exact certificate.
    EmptyCertified,
    /// A critical point was found numerically.
    WitnessFound,
    /// Nothing found within the budget; evidence, not proof.
    NoneFound,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactCertificate {
    pub method: String,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct K0Witness {
    /// Complex coordinates as (re, im) pairs.
    pub point: Vec<(f64, f64)>,
    /// Max norm of the minor system at the point.
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct K0Report {
    pub verdict: K0Verdict,
    pub exact: Option<ExactCertificate>,
    pub witnesses: Vec<K0Witness>,
    pub attempts: usize,
    /// Smallest in-bounds residual reached over all attempts.
    pub best_residual: f64,
    pub seed: u64,
}

impl K0Report {
    pub fn found_nothing(&self) -> bool {
        matches!(self.verdict, K0Verdict::EmptyCertified | K0Verdict::NoneFound)
    }
}

// ---------------------------------------------------------------------------
// Exact certificates
// ---------------------------------------------------------------------------

fn nonzero_constant(p: &MixedPoly) -> Option<CRat> {
    if p.num_terms() != 1 {
        return None;
    }
    let (e, c) = p.terms().next().unwrap();
    if e.total_degree() == 0 {
        Some(c.clone())
    } else {
        None
    }
}

/// Dense univariate polynomial over exact complex rationals.
#[derive(Clone, Debug, PartialEq)]
struct UPoly(Vec<CRat>);

impl UPoly {
    fn zero() -> Self {
        UPoly(Vec::new())
    }

    fn constant(c: CRat) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            UPoly(vec![c])
        }
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.0.len() - 1)
        }
    }

    fn trim(mut self) -> Self {
        while self.0.last().map(|c| c.is_zero()).unwrap_or(false) {
            self.0.pop();
        }
        self
    }

    fn mul(&self, other: &UPoly) -> UPoly {
        if self.is_zero() || other.is_zero() {
            return UPoly::zero();
        }
        let mut out = vec![CRat::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        UPoly(out).trim()
    }

    fn sub(&self, other: &UPoly) -> UPoly {
        let len = self.0.len().max(other.0.len());
        let mut out = Vec::with_capacity(len);
        for i in 0..len {
            let a = self.0.get(i).cloned().unwrap_or_else(CRat::zero);
            let b = other.0.get(i).cloned().unwrap_or_else(CRat::zero);
            out.push(&a - &b);
        }
        UPoly(out).trim()
    }

    /// Exact division; panics if the division leaves a remainder, which
    /// cannot happen inside the Bareiss elimination below.
    fn div_exact(&self, d: &UPoly) -> UPoly {
        assert!(!d.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return UPoly::zero();
        }
        let mut rem = self.0.clone();
        let dd = d.degree().unwrap();
        let lead_inv = d.0[dd].inv().expect("nonzero leading coefficient");
        let mut quot = vec![CRat::zero(); self.0.len().saturating_sub(dd)];
        while rem.len() > dd && !rem.is_empty() {
            let k = rem.len() - 1;
            let c = &rem[k] * &lead_inv;
            if !c.is_zero() {
                quot[k - dd] = c.clone();
                for i in 0..=dd {
                    rem[k - dd + i] = &rem[k - dd + i] - &(&c * &d.0[i]);
                }
            }
            rem.pop();
        }
        assert!(
            rem.iter().all(|c| c.is_zero()),
            "inexact polynomial division"
        );
        UPoly(quot).trim()
    }

    fn pow(&self, e: usize) -> UPoly {
        let mut acc = UPoly::constant(CRat::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

/// Writes a bivariate holomorphic polynomial as a polynomial in the
/// eliminated variable with univariate coefficients in the other.
fn as_tower(p: &MixedPoly, eliminate: usize) -> Vec<UPoly> {
    let keep = 1 - eliminate;
    let de = p
        .terms()
        .map(|(e, _)| e.z[eliminate])
        .max()
        .unwrap_or(0) as usize;
    let mut out = vec![Vec::new(); de + 1];
    for (e, c) in p.terms() {
        let a = e.z[eliminate] as usize;
        let b = e.z[keep] as usize;
        if out[a].len() <= b {
            out[a].resize(b + 1, CRat::zero());
        }
        out[a][b] = c.clone();
    }
    out.into_iter().map(|v| UPoly(v).trim()).collect()
}

/// Fraction-free Bareiss determinant over the polynomial ring.
fn bareiss_det(mut m: Vec<Vec<UPoly>>) -> UPoly {
    let k = m.len();
    if k == 0 {
        return UPoly::constant(CRat::one());
    }
    let mut sign = false;
    let mut prev = UPoly::constant(CRat::one());
    for i in 0..k - 1 {
        if m[i][i].is_zero() {
            let pivot = (i + 1..k).find(|&r| !m[r][i].is_zero());
            match pivot {
                Some(r) => {
                    m.swap(i, r);
                    sign = !sign;
                }
                None => return UPoly::zero(),
            }
        }
        for r in i + 1..k {
            for c in i + 1..k {
                let t = m[r][c].mul(&m[i][i]).sub(&m[r][i].mul(&m[i][c]));
                m[r][c] = t.div_exact(&prev);
            }
            m[r][i] = UPoly::zero();
        }
        prev = m[i][i].clone();
    }
    let det = m[k - 1][k - 1].clone();
    if sign {
        UPoly::zero().sub(&det)
    } else {
        det
    }
}

/// Sylvester resultant of two bivariate polynomials with respect to one
/// variable; `None` when a degenerate input makes it meaningless.
fn resultant(p: &MixedPoly, q: &MixedPoly, eliminate: usize) -> Option<UPoly> {
    if p.is_zero() || q.is_zero() {
        return None;
    }
    let tp = as_tower(p, eliminate);
    let tq = as_tower(q, eliminate);
    let dp = tp.len() - 1;
    let dq = tq.len() - 1;
    if dp == 0 {
        return Some(tp[0].pow(dq));
    }
    if dq == 0 {
        return Some(tq[0].pow(dp));
    }
    let size = dp + dq;
    let mut m = vec![vec![UPoly::zero(); size]; size];
    for row in 0..dq {
        for (j, c) in tp.iter().rev().enumerate() {
            m[row][row + j] = c.clone();
        }
    }
    for row in 0..dp {
        for (j, c) in tq.iter().rev().enumerate() {
            m[dq + row][row + j] = c.clone();
        }
    }
    Some(bareiss_det(m))
}

fn exact_emptiness(map: &PolyMap, minors: &[MixedPoly]) -> Option<ExactCertificate> {
    for (i, m) in minors.iter().enumerate() {
        if let Some(c) = nonzero_constant(m) {
            return Some(ExactCertificate {
                method: "constant-minor".into(),
                detail: format!(
                    "maximal minor {} is the nonzero constant {:?}; the system is inconsistent",
                    i + 1,
                    c
                ),
            });
        }
    }
    if map.source_dim() == 2 {
        let p = &minors[0];
        let q = &minors[1];
        let small = |f: &MixedPoly| {
            !f.is_zero() && f.degree().unwrap_or(0) <= RESULTANT_DEGREE_CAP
        };
        if small(p) && small(q) {
            for eliminate in 0..2 {
                if let Some(r) = resultant(p, q, eliminate) {
                    if r.degree() == Some(0) {
                        return Some(ExactCertificate {
                            method: "resultant".into(),
                            detail: format!(
                                "resultant eliminating z{} is the nonzero constant {:?}; \
                                 the two partials share no root",
                                eliminate + 1,
                                r.0[0]
                            ),
                        });
                    }
                }
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Newton search
// ---------------------------------------------------------------------------

struct MinorSystem {
    minors: Vec<CompiledPoly>,
    jac: Vec<Vec<CompiledPoly>>,
}

impl MinorSystem {
    fn new(map: &PolyMap, minors: &[MixedPoly]) -> Self {
        let n = map.source_dim();
        MinorSystem {
            minors: minors.iter().map(CompiledPoly::from_poly).collect(),
            jac: minors
                .iter()
                .map(|m| {
                    (0..n)
                        .map(|j| CompiledPoly::from_poly(&m.wirtinger(j, false)))
                        .collect()
                })
                .collect(),
        }
    }

    fn residual(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.minors.iter().map(|m| m.eval(z)).collect()
    }

    fn residual_norm(&self, z: &[Complex64]) -> f64 {
        self.residual(z)
            .iter()
            .map(|v| v.norm())
            .fold(0.0f64, f64::max)
    }
}

fn newton_attempt(sys: &MinorSystem, n: usize, start: Vec<Complex64>) -> (Vec<Complex64>, f64) {
    let mut z = start;
    let mut best = (z.clone(), f64::INFINITY);
    for _ in 0..50 {
        let res = sys.residual(&z);
        let rmax = res.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        let in_bounds = z.iter().all(|c| c.re.abs() <= WITNESS_RADIUS_CAP && c.im.abs() <= WITNESS_RADIUS_CAP);
        if in_bounds && rmax < best.1 {
            best = (z.clone(), rmax);
        }
        if rmax <= WITNESS_TOL / 10.0 {
            break;
        }
        let jac = DMatrix::from_fn(sys.minors.len(), n, |r, c| sys.jac[r][c].eval(&z));
        let rhs = nalgebra::DVector::from_iterator(res.len(), res.iter().map(|v| -v));
        let step = match jac.svd(true, true).solve(&rhs, 1e-14) {
            Ok(s) => s,
            Err(_) => break,
        };
        let m0: f64 = res.iter().map(|v| v.norm_sqr()).sum();
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..20 {
            let zn: Vec<Complex64> = z
                .iter()
                .zip(step.iter())
                .map(|(zi, si)| zi + alpha * si)
                .collect();
            let mn: f64 = sys.residual(&zn).iter().map(|v| v.norm_sqr()).sum();
            if mn <= (1.0 - 1e-4 * alpha) * m0 {
                z = zn;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let res = sys.residual_norm(&z);
    let in_bounds = z.iter().all(|c| c.re.abs() <= WITNESS_RADIUS_CAP && c.im.abs() <= WITNESS_RADIUS_CAP);
    if in_bounds && res < best.1 {
        best = (z, res);
    }
    best
}

/// Probes for complex critical points of the map. Always returns a
/// report; `EmptyCertified` carries an exact proof, `NoneFound` is
/// evidence at the given budget only.
pub fn k0_probe(map: &PolyMap, seed: u64, attempts: usize) -> Result<K0Report, NumericError> {
    let minors_sym = jacobian_minors(map);
    let exact = exact_emptiness(map, &minors_sym);
    let sys = MinorSystem::new(map, &minors_sym);
    let n = map.source_dim();

    let outcomes: Vec<(Vec<Complex64>, f64)> = (0..attempts)
        .into_par_iter()
        .map(|k| {
            let mut rng = substream(seed, StreamKind::K0Probe, 0, k as u64);
            let spread = [0.5, 1.0, 2.0, 4.0, 8.0][k % 5];
            let start: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(spread * normal(&mut rng), spread * normal(&mut rng)))
                .collect();
            newton_attempt(&sys, n, start)
        })
        .collect();

    let mut witnesses = Vec::new();
    let mut best_residual = f64::INFINITY;
    for (z, res) in outcomes {
        best_residual = best_residual.min(res);
        if res <= WITNESS_TOL {
            witnesses.push(K0Witness {
                point: z.iter().map(|c| (c.re, c.im)).collect(),
                residual: res,
            });
        }
    }
    // Keep a handful of representative witnesses, deterministic order.
    witnesses.sort_by(|a, b| {
        a.residual
            .partial_cmp(&b.residual)
            .unwrap()
            .then(a.point.partial_cmp(&b.point).unwrap())
    });
    witnesses.truncate(8);

    let verdict = if !witnesses.is_empty() {
        K0Verdict::WitnessFound
    } else if exact.is_some() {
        K0Verdict::EmptyCertified
    } else {
        K0Verdict::NoneFound
    };
    Ok(K0Report {
        verdict,
        exact,
        witnesses,
        attempts,
        best_residual,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapspec::{parse_mapping, parse_poly};
    use crate::rational::rat_int;

    #[test]
    fn broughton_emptiness_is_certified_by_resultant() {
        let map = parse_mapping("n=2; G1 = z + z^2*w; rho = 0,1").unwrap().map;
        let report = k0_probe(&map, 42, 200).unwrap();
        assert_eq!(report.verdict, K0Verdict::EmptyCertified);
        let cert = report.exact.unwrap();
        assert_eq!(cert.method, "resultant");
        assert!(report.witnesses.is_empty());
        // Newton never got close either
        assert!(report.best_residual > 1e-10);
    }

    #[test]
    fn twistsum_has_a_constant_minor_certificate() {
        let map = parse_mapping("n=3; G1 = z; G2 = z*zeta^2 + w; rho = 0,0,1")
            .unwrap()
            .map;
        let report = k0_probe(&map, 7, 100).unwrap();
        assert_eq!(report.verdict, K0Verdict::EmptyCertified);
        assert_eq!(report.exact.unwrap().method, "constant-minor");
    }

    #[test]
    fn genuine_critical_locus_yields_a_witness() {
        let map = parse_mapping("n=2; G1 = z1^2; rho = 1,1").unwrap().map;
        let report = k0_probe(&map, 3, 50).unwrap();
        assert_eq!(report.verdict, K0Verdict::WitnessFound);
        let w = &report.witnesses[0];
        assert!(w.residual <= 1e-8);
        // critical locus is {z1 = 0}
        let (re, im) = w.point[0];
        assert!((re * re + im * im).sqrt() <= 1e-5);
    }

    #[test]
    fn resultant_matches_hand_value_for_broughton_partials() {
        let p = parse_poly(2, "z1^2").unwrap();
        let q = parse_poly(2, "1 + 2*z1*z2").unwrap();
        let r = resultant(&p, &q, 0).unwrap();
        assert_eq!(r.degree(), Some(0));
        assert_eq!(r.0[0], crate::rational::CRat::one());
    }

    #[test]
    fn resultant_detects_shared_roots() {
        // p = z1 * (z1 - 1), q = z1 * z2: share the root z1 = 0
        let p = parse_poly(2, "z1^2 - z1").unwrap();
        let q = parse_poly(2, "z1*z2").unwrap();
        let r = resultant(&p, &q, 0).unwrap();
        // Res = 0 at every w where a common z-root exists; here the
        // shared divisor z1 makes it vanish identically or nonconstant
        assert!(r.is_zero() || r.degree() != Some(0));
    }

    #[test]
    fn bareiss_agrees_with_small_hand_determinants() {
        let one = UPoly::constant(CRat::one());
        let t = UPoly(vec![CRat::zero(), CRat::one()]); // the variable
        // det [[1, t],[t, 1]] = 1 - t^2
        let m = vec![vec![one.clone(), t.clone()], vec![t.clone(), one.clone()]];
        let d = bareiss_det(m);
        let expected = UPoly(vec![
            CRat::one(),
            CRat::zero(),
            &CRat::zero() - &CRat::one(),
        ]);
        assert_eq!(d, expected);
        // singular matrix
        let m = vec![vec![t.clone(), t.clone()], vec![t.clone(), t.clone()]];
        assert!(bareiss_det(m).is_zero());
        let _ = rat_int(0);
    }
}
