//! Real polynomials and the realification of complex maps.
//!
//! Realification substitutes `z_j = x_{2j-1} + i*x_{2j}` (and the
//! conjugate for conj-variables) and splits the result into real and
//! imaginary parts, all in exact rational arithmetic.

use crate::poly::mixed::MixedPoly;
use crate::poly::{PolyMap, WeightVector};
use crate::rational::{CRat, Rat};
use num_traits::{One, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// Monomial in real variables `x1..xm`, graded-lex ordered.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RealExp(pub Vec<u32>);

impl RealExp {
    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &RealExp) -> RealExp {
        RealExp(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for RealExp {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for RealExp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial in real variables with rational coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct RealPoly {
    m: usize,
    terms: BTreeMap<RealExp, Rat>,
}

impl RealPoly {
    pub fn zero(m: usize) -> Self {
        RealPoly {
            m,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(m: usize, c: Rat) -> Self {
        let mut p = Self::zero(m);
        p.add_term(RealExp(vec![0; m]), c);
        p
    }

    pub fn var(m: usize, i: usize) -> Self {
        let mut e = vec![0; m];
        e[i] = 1;
        let mut p = Self::zero(m);
        p.add_term(RealExp(e), Rat::one());
        p
    }

    pub fn nvars(&self) -> usize {
        self.m
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.total_degree()).max()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&RealExp, &Rat)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, exp: RealExp, coef: Rat) {
        debug_assert_eq!(exp.0.len(), self.m);
        if coef.is_zero() {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coef);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + &coef;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &RealPoly) -> RealPoly {
        assert_eq!(self.m, other.m);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &RealPoly) -> RealPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> RealPoly {
        RealPoly {
            m: self.m,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn mul(&self, other: &RealPoly) -> RealPoly {
        assert_eq!(self.m, other.m);
        let mut out = RealPoly::zero(self.m);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(ea.mul(eb), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, s: &Rat) -> RealPoly {
        if s.is_zero() {
            return RealPoly::zero(self.m);
        }
        RealPoly {
            m: self.m,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect(),
        }
    }

    /// Formal partial derivative with respect to `x_{i+1}`.
    pub fn partial(&self, i: usize) -> RealPoly {
        let mut out = RealPoly::zero(self.m);
        for (e, c) in &self.terms {
            let k = e.0[i];
            if k == 0 {
                continue;
            }
            let mut de = e.clone();
            de.0[i] -= 1;
            out.add_term(de, c * Rat::from_integer(k.into()));
        }
        out
    }

    pub fn eval_exact(&self, point: &[Rat]) -> Rat {
        assert_eq!(point.len(), self.m);
        let mut acc = Rat::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.0.iter().enumerate() {
                for _ in 0..k {
                    t *= &point[i];
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        debug_assert_eq!(point.len(), self.m);
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut t = c.to_f64().unwrap_or(f64::NAN);
            for (i, &k) in e.0.iter().enumerate() {
                if k > 0 {
                    t *= point[i].powi(k as i32);
                }
            }
            acc += t;
        }
        acc
    }
}

impl fmt::Display for RealPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use num_traits::{One, Signed};
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let mut coef = c.clone();
            if first {
                first = false;
            } else if coef.is_negative() {
                write!(f, " - ")?;
                coef = -coef;
            } else {
                write!(f, " + ")?;
            }
            let mono: Vec<String> = e
                .0
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    if k == 1 {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{}", i + 1, k)
                    }
                })
                .collect();
            if mono.is_empty() {
                write!(f, "{coef}")?;
            } else if coef.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else if coef == -Rat::one() {
                write!(f, "-{}", mono.join("*"))?;
            } else {
                write!(f, "{}*{}", coef, mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for RealPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RealPoly({self})")
    }
}

/// Real polynomial with complex coefficients; intermediate carrier for
/// realification before the real/imaginary split.
#[derive(Clone)]
struct CRealPoly {
    m: usize,
    terms: BTreeMap<RealExp, CRat>,
}

impl CRealPoly {
    fn zero(m: usize) -> Self {
        CRealPoly {
            m,
            terms: BTreeMap::new(),
        }
    }

    fn constant(m: usize, c: CRat) -> Self {
        let mut p = Self::zero(m);
        p.add_term(RealExp(vec![0; m]), c);
        p
    }

    fn add_term(&mut self, exp: RealExp, coef: CRat) {
        if coef.is_zero() {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coef);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = &*e.get() + &coef;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn mul(&self, other: &CRealPoly) -> CRealPoly {
        let mut out = CRealPoly::zero(self.m);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(ea.mul(eb), ca * cb);
            }
        }
        out
    }

    fn split(self) -> (RealPoly, RealPoly) {
        let mut re = RealPoly::zero(self.m);
        let mut im = RealPoly::zero(self.m);
        for (e, c) in self.terms {
            re.add_term(e.clone(), c.re);
            im.add_term(e, c.im);
        }
        (re, im)
    }
}

/// Real and imaginary parts of a mixed polynomial under
/// `z_j = x_{2j-1} + i*x_{2j}`, with exact coefficients.
pub fn realify_pair(p: &MixedPoly) -> (RealPoly, RealPoly) {
    let n = p.nvars();
    let m = 2 * n;
    let mut acc = CRealPoly::zero(m);
    for (e, c) in p.terms() {
        let mut term = CRealPoly::constant(m, c.clone());
        for i in 0..n {
            // x_{2i+1} + i*x_{2i+2} and its conjugate
            let mut zi = CRealPoly::zero(m);
            let mut ex = vec![0; m];
            ex[2 * i] = 1;
            zi.add_term(RealExp(ex.clone()), CRat::one());
            ex[2 * i] = 0;
            ex[2 * i + 1] = 1;
            zi.add_term(RealExp(ex), CRat::i());
            let mut zbar = CRealPoly::zero(m);
            let mut ex = vec![0; m];
            ex[2 * i] = 1;
            zbar.add_term(RealExp(ex.clone()), CRat::one());
            ex[2 * i] = 0;
            ex[2 * i + 1] = 1;
            zbar.add_term(RealExp(ex), -&CRat::i());
            for _ in 0..e.z[i] {
                term = term.mul(&zi);
            }
            for _ in 0..e.zbar[i] {
                term = term.mul(&zbar);
            }
        }
        for (ex, c) in term.terms {
            acc.add_term(ex, c);
        }
    }
    acc.split()
}

/// A complex polynomial map seen as a real one: `2(n-1)` components in
/// the variables `x1..x_{2n}`.
#[derive(Clone, Debug)]
pub struct RealPolyMap {
    pub m_in: usize,
    pub components: Vec<RealPoly>,
}

/// Realifies a holomorphic map componentwise, interleaving real and
/// imaginary parts: `(Re G1, Im G1, Re G2, Im G2, ...)`.
pub fn realify_map(map: &PolyMap) -> RealPolyMap {
    let mut components = Vec::with_capacity(2 * map.target_dim());
    for g in map.components() {
        let (re, im) = realify_pair(g);
        components.push(re);
        components.push(im);
    }
    RealPolyMap {
        m_in: 2 * map.source_dim(),
        components,
    }
}

/// The weight function `Σ a_i |z_i|^2` as a real polynomial
/// `Σ a_i (x_{2i-1}^2 + x_{2i}^2)`.
pub fn realify_rho(w: &WeightVector) -> RealPoly {
    let n = w.len();
    let m = 2 * n;
    let mut p = RealPoly::zero(m);
    for (i, a) in w.weights().iter().enumerate() {
        let mut e = vec![0; m];
        e[2 * i] = 2;
        p.add_term(RealExp(e.clone()), a.clone());
        e[2 * i] = 0;
        e[2 * i + 1] = 2;
        p.add_term(RealExp(e), a.clone());
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapspec::parse_poly;
    use crate::rational::rat_int;

    #[test]
    fn broughton_realification_matches_quartics() {
        let g = parse_poly(2, "z1 + z1^2*z2").unwrap();
        let (re, im) = realify_pair(&g);
        assert_eq!(
            format!("{re}"),
            "x1^2*x3 - 2*x1*x2*x4 - x2^2*x3 + x1"
        );
        assert_eq!(
            format!("{im}"),
            "x1^2*x4 + 2*x1*x2*x3 - x2^2*x4 + x2"
        );
    }

    #[test]
    fn identity_and_rotation_realify() {
        let z1 = parse_poly(2, "z1").unwrap();
        let (re, im) = realify_pair(&z1);
        assert_eq!(format!("{re}"), "x1");
        assert_eq!(format!("{im}"), "x2");

        let iz = parse_poly(2, "i*z1").unwrap();
        let (re, im) = realify_pair(&iz);
        assert_eq!(format!("{re}"), "-x2");
        assert_eq!(format!("{im}"), "x1");
    }

    #[test]
    fn rho_realification() {
        let w = WeightVector::from_ints(&[0, 1]).unwrap();
        assert_eq!(format!("{}", realify_rho(&w)), "x3^2 + x4^2");
        let w = WeightVector::from_ints(&[1, 1]).unwrap();
        assert_eq!(
            format!("{}", realify_rho(&w)),
            "x1^2 + x2^2 + x3^2 + x4^2"
        );
        assert!(WeightVector::from_ints(&[0, 0]).is_err());
        assert!(WeightVector::from_ints(&[-1, 1]).is_err());
    }

    #[test]
    fn realified_map_interleaves_re_im() {
        let map = crate::mapspec::parse_mapping("n=3; G1 = z1; G2 = z1*z3^2 + z2; rho = 0,0,1")
            .unwrap()
            .map;
        let rm = realify_map(&map);
        assert_eq!(rm.m_in, 6);
        assert_eq!(rm.components.len(), 4);
        assert_eq!(format!("{}", rm.components[0]), "x1");
        assert_eq!(format!("{}", rm.components[1]), "x2");
    }

    #[test]
    fn mixed_polynomials_realify_exactly() {
        // |z1|^2 -> x1^2 + x2^2 with zero imaginary part
        let m = parse_poly(2, "z1*conj(z1)").unwrap();
        let (re, im) = realify_pair(&m);
        assert_eq!(format!("{re}"), "x1^2 + x2^2");
        assert!(im.is_zero());
    }

    #[test]
    fn partial_derivative_and_eval() {
        let g = parse_poly(2, "z1 + z1^2*z2").unwrap();
        let (re, _) = realify_pair(&g);
        // d/dx1 (x1 + x1^2 x3 - x2^2 x3 - 2 x1 x2 x4) = 1 + 2 x1 x3 - 2 x2 x4
        let d = re.partial(0);
        assert_eq!(format!("{d}"), "2*x1*x3 - 2*x2*x4 + 1");
        let pt = [rat_int(1), rat_int(2), rat_int(3), rat_int(5)];
        assert_eq!(d.eval_exact(&pt), rat_int(1 + 2 * 3 - 2 * 2 * 5));
        let ptf = [1.0, 2.0, 3.0, 5.0];
        assert!((d.eval_f64(&ptf) - (1.0 + 6.0 - 20.0)).abs() < 1e-12);
    }
}
