//! Sparse polynomials in complex variables and their conjugates.
//!
//! A term is `c * z1^a1..zn^an * conj(z1)^b1..conj(zn)^bn` with an exact
//! complex-rational coefficient. Holomorphic polynomials are the special
//! case with all conjugate exponents zero.

use crate::poly::PolyError;
use crate::rational::{CRat, Rat};
use num_complex::Complex64;
use num_traits::Zero;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// Exponent pair of one mixed monomial: powers of the variables and of
/// their conjugates, both of length `n`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MixedExp {
    pub z: Vec<u32>,
    pub zbar: Vec<u32>,
}

impl MixedExp {
    pub fn constant(n: usize) -> Self {
        MixedExp {
            z: vec![0; n],
            zbar: vec![0; n],
        }
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut e = Self::constant(n);
        e.z[i] = 1;
        e
    }

    pub fn conj_var(n: usize, i: usize) -> Self {
        let mut e = Self::constant(n);
        e.zbar[i] = 1;
        e
    }

    pub fn total_degree(&self) -> u32 {
        self.z.iter().sum::<u32>() + self.zbar.iter().sum::<u32>()
    }

    pub fn conj_degree(&self) -> u32 {
        self.zbar.iter().sum()
    }

    pub fn is_holomorphic(&self) -> bool {
        self.zbar.iter().all(|&b| b == 0)
    }

    fn mul(&self, other: &MixedExp) -> MixedExp {
        MixedExp {
            z: self.z.iter().zip(&other.z).map(|(a, b)| a + b).collect(),
            zbar: self
                .zbar
                .iter()
                .zip(&other.zbar)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    fn swapped(&self) -> MixedExp {
        MixedExp {
            z: self.zbar.clone(),
            zbar: self.z.clone(),
        }
    }
}

// Graded lexicographic: total degree first, then the exponent rows.
impl Ord for MixedExp {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.z.cmp(&other.z))
            .then_with(|| self.zbar.cmp(&other.zbar))
    }
}

impl PartialOrd for MixedExp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse mixed polynomial with exact complex-rational coefficients.
///
/// Invariant: no stored zero coefficients; all exponent vectors have
/// length equal to the variable count.
#[derive(Clone, PartialEq, Eq)]
pub struct MixedPoly {
    n: usize,
    terms: BTreeMap<MixedExp, CRat>,
}

impl MixedPoly {
    pub fn zero(n: usize) -> Self {
        MixedPoly {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: CRat) -> Self {
        let mut p = Self::zero(n);
        p.add_term(MixedExp::constant(n), c);
        p
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, CRat::one())
    }

    /// The variable `z_{i+1}` (zero-based index).
    pub fn var(n: usize, i: usize) -> Self {
        let mut p = Self::zero(n);
        p.add_term(MixedExp::var(n, i), CRat::one());
        p
    }

    /// The conjugated variable `conj(z_{i+1})`.
    pub fn conj_var(n: usize, i: usize) -> Self {
        let mut p = Self::zero(n);
        p.add_term(MixedExp::conj_var(n, i), CRat::one());
        p
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MixedExp, &CRat)> {
        self.terms.iter()
    }

    pub fn is_holomorphic(&self) -> bool {
        self.terms.keys().all(|e| e.is_holomorphic())
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.total_degree()).max()
    }

    /// Largest conjugate-exponent total over all terms.
    pub fn max_conj_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.conj_degree()).max()
    }

    pub fn add_term(&mut self, exp: MixedExp, coef: CRat) {
        debug_assert_eq!(exp.z.len(), self.n);
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

    pub fn add(&self, other: &MixedPoly) -> Result<MixedPoly, PolyError> {
        self.check_nvars(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &MixedPoly) -> Result<MixedPoly, PolyError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> MixedPoly {
        MixedPoly {
            n: self.n,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn mul(&self, other: &MixedPoly) -> Result<MixedPoly, PolyError> {
        self.check_nvars(other)?;
        let mut out = MixedPoly::zero(self.n);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(ea.mul(eb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &CRat) -> MixedPoly {
        if c.is_zero() {
            return MixedPoly::zero(self.n);
        }
        MixedPoly {
            n: self.n,
            terms: self.terms.iter().map(|(e, k)| (e.clone(), k * c)).collect(),
        }
    }

    pub fn scale_rat(&self, s: &Rat) -> MixedPoly {
        if s.is_zero() {
            return MixedPoly::zero(self.n);
        }
        MixedPoly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(e, k)| (e.clone(), k.scale(s)))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> MixedPoly {
        let mut acc = MixedPoly::one(self.n);
        for _ in 0..e {
            acc = acc.mul(self).expect("same nvars");
        }
        acc
    }

    /// Complex conjugate: swaps each variable with its conjugate and
    /// conjugates every coefficient.
    pub fn conj(&self) -> MixedPoly {
        MixedPoly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.swapped(), c.conj()))
                .collect(),
        }
    }

    /// Formal Wirtinger partial derivative, treating `z_i` and `conj(z_i)`
    /// as independent. `conjugate` selects the conj(z_i) derivative.
    pub fn wirtinger(&self, i: usize, conjugate: bool) -> MixedPoly {
        let mut out = MixedPoly::zero(self.n);
        for (e, c) in &self.terms {
            let k = if conjugate { e.zbar[i] } else { e.z[i] };
            if k == 0 {
                continue;
            }
            let mut de = e.clone();
            if conjugate {
                de.zbar[i] -= 1;
            } else {
                de.z[i] -= 1;
            }
            out.add_term(de, c.scale(&crate::rational::rat_int(k as i64)));
        }
        out
    }

    /// Sum of the terms of maximal total degree.
    ///
    /// Defined for nonzero holomorphic polynomials.
    pub fn leading_form(&self) -> Result<MixedPoly, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        if !self.is_holomorphic() {
            return Err(PolyError::NotHolomorphic);
        }
        let d = self.degree().unwrap();
        let mut out = MixedPoly::zero(self.n);
        for (e, c) in &self.terms {
            if e.total_degree() == d {
                out.add_term(e.clone(), c.clone());
            }
        }
        Ok(out)
    }

    /// Exact evaluation at a complex-rational point.
    pub fn eval_exact(&self, point: &[CRat]) -> CRat {
        assert_eq!(point.len(), self.n);
        let mut acc = CRat::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, (&a, &b)) in e.z.iter().zip(&e.zbar).enumerate() {
                if a > 0 {
                    t = &t * &point[i].pow(a);
                }
                if b > 0 {
                    t = &t * &point[i].conj().pow(b);
                }
            }
            acc = &acc + &t;
        }
        acc
    }

    /// Double-precision evaluation at a complex point.
    pub fn eval_c64(&self, point: &[Complex64]) -> Complex64 {
        debug_assert_eq!(point.len(), self.n);
        let mut acc = Complex64::ZERO;
        for (e, c) in &self.terms {
            let mut t = c.to_c64();
            for (i, (&a, &b)) in e.z.iter().zip(&e.zbar).enumerate() {
                if a > 0 {
                    t *= point[i].powu(a);
                }
                if b > 0 {
                    t *= point[i].conj().powu(b);
                }
            }
            acc += t;
        }
        acc
    }

    /// Sum of term magnitudes at a point: `Σ |c| Π |z_i|^(a_i+b_i)`.
    ///
    /// An upper scale for rounding error of `eval_c64`, used to express
    /// residual tolerances relative to the local term size.
    pub fn eval_abs_c64(&self, point: &[Complex64]) -> f64 {
        debug_assert_eq!(point.len(), self.n);
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut t = c.to_c64().norm();
            for (i, (&a, &b)) in e.z.iter().zip(&e.zbar).enumerate() {
                let m = point[i].norm();
                if a + b > 0 {
                    t *= m.powi((a + b) as i32);
                }
            }
            acc += t;
        }
        acc
    }

    /// Exact substitution of one variable (and its conjugate) by a constant.
    pub fn substitute(&self, i: usize, value: &CRat) -> MixedPoly {
        let mut out = MixedPoly::zero(self.n);
        for (e, c) in &self.terms {
            let mut coef = c.clone();
            if e.z[i] > 0 {
                coef = &coef * &value.pow(e.z[i]);
            }
            if e.zbar[i] > 0 {
                coef = &coef * &value.conj().pow(e.zbar[i]);
            }
            let mut ne = e.clone();
            ne.z[i] = 0;
            ne.zbar[i] = 0;
            out.add_term(ne, coef);
        }
        out
    }

    fn check_nvars(&self, other: &MixedPoly) -> Result<(), PolyError> {
        if self.n != other.n {
            Err(PolyError::VariableCountMismatch {
                left: self.n,
                right: other.n,
            })
        } else {
            Ok(())
        }
    }
}

fn write_coef(f: &mut fmt::Formatter<'_>, c: &CRat, has_mono: bool) -> fmt::Result {
    use num_traits::One;
    if !has_mono {
        if c.is_real() {
            return write!(f, "{}", c.re);
        }
        if c.re.is_zero() {
            if c.im.is_one() {
                return write!(f, "i");
            }
            if c.im == -Rat::one() {
                return write!(f, "-i");
            }
            return write!(f, "{}*i", c.im);
        }
        return write!(f, "({})", fmt_complex(c));
    }
    if c.is_real() {
        if c.re.is_one() {
            return Ok(());
        }
        if c.re == -Rat::one() {
            return write!(f, "-");
        }
        return write!(f, "{}*", c.re);
    }
    if c.re.is_zero() {
        if c.im.is_one() {
            return write!(f, "i*");
        }
        if c.im == -Rat::one() {
            return write!(f, "-i*");
        }
        return write!(f, "{}*i*", c.im);
    }
    write!(f, "({})*", fmt_complex(c))
}

fn fmt_complex(c: &CRat) -> String {
    use num_traits::{One, Signed};
    let im = &c.im;
    if im.is_positive() {
        if im.is_one() {
            format!("{} + i", c.re)
        } else {
            format!("{} + {}*i", c.re, im)
        }
    } else {
        let m = -im.clone();
        if m.is_one() {
            format!("{} - i", c.re)
        } else {
            format!("{} - {}*i", c.re, m)
        }
    }
}

impl fmt::Display for MixedPoly {
    /// Canonical text form: terms in descending graded-lex order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_terms(f)
    }
}

impl MixedPoly {
    fn fmt_terms(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let mono = mono_string(e);
            let mut coef = c.clone();
            if first {
                first = false;
            } else {
                let neg = if coef.is_real() {
                    use num_traits::Signed;
                    coef.re.is_negative()
                } else if coef.re.is_zero() {
                    use num_traits::Signed;
                    coef.im.is_negative()
                } else {
                    false
                };
                if neg {
                    write!(f, " - ")?;
                    coef = -&coef;
                } else {
                    write!(f, " + ")?;
                }
            }
            write_coef(f, &coef, !mono.is_empty())?;
            write!(f, "{mono}")?;
        }
        Ok(())
    }
}

fn mono_string(e: &MixedExp) -> String {
    let mut parts = Vec::new();
    for (i, &a) in e.z.iter().enumerate() {
        match a {
            0 => {}
            1 => parts.push(format!("z{}", i + 1)),
            _ => parts.push(format!("z{}^{}", i + 1, a)),
        }
    }
    for (i, &b) in e.zbar.iter().enumerate() {
        match b {
            0 => {}
            1 => parts.push(format!("conj(z{})", i + 1)),
            _ => parts.push(format!("conj(z{})^{}", i + 1, b)),
        }
    }
    parts.join("*")
}

impl fmt::Debug for MixedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MixedPoly({self})")
    }
}

/// Float-coefficient form of a mixed polynomial for hot evaluation
/// loops; coefficients are converted from the exact representation once.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    n: usize,
    terms: Vec<(Complex64, Vec<u32>, Vec<u32>)>,
}

impl CompiledPoly {
    pub fn from_poly(p: &MixedPoly) -> Self {
        CompiledPoly {
            n: p.nvars(),
            terms: p
                .terms()
                .map(|(e, c)| (c.to_c64(), e.z.clone(), e.zbar.clone()))
                .collect(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        debug_assert_eq!(z.len(), self.n);
        let mut acc = Complex64::ZERO;
        for (c, za, zb) in &self.terms {
            let mut t = *c;
            for (i, &a) in za.iter().enumerate() {
                if a > 0 {
                    t *= z[i].powu(a);
                }
            }
            for (i, &b) in zb.iter().enumerate() {
                if b > 0 {
                    t *= z[i].conj().powu(b);
                }
            }
            acc += t;
        }
        acc
    }

    /// Sum of term magnitudes, as in [`MixedPoly::eval_abs_c64`].
    pub fn eval_abs(&self, z: &[Complex64]) -> f64 {
        let mut acc = 0.0;
        for (c, za, zb) in &self.terms {
            let mut t = c.norm();
            for (i, &a) in za.iter().enumerate() {
                let e = a + zb[i];
                if e > 0 {
                    t *= z[i].norm().powi(e as i32);
                }
            }
            acc += t;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapspec::parse_poly;
    use crate::rational::{rat_frac, rat_int};

    fn p2(s: &str) -> MixedPoly {
        parse_poly(2, s).unwrap()
    }

    #[test]
    fn modulus_monomial() {
        let m = p2("z1*conj(z1)");
        let (e, c) = m.terms().next().unwrap();
        assert_eq!(e.z, vec![1, 0]);
        assert_eq!(e.zbar, vec![1, 0]);
        assert_eq!(*c, CRat::one());
    }

    #[test]
    fn additive_inverse_gives_empty_term_map() {
        let p = p2("z1 + z1^2*z2 - 3/4");
        let z = p.add(&p.neg()).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.num_terms(), 0);
    }

    #[test]
    fn conjugation_examples() {
        assert_eq!(p2("i*z1").conj(), p2("-i*conj(z1)"));
        let p = p2("z1*z2 + i*conj(z2)");
        assert_eq!(p.conj().conj(), p);
        // conj distributes over + and *
        let q = p2("2*z1 - conj(z1)^2");
        assert_eq!(
            p.add(&q).unwrap().conj(),
            p.conj().add(&q.conj()).unwrap()
        );
        assert_eq!(
            p.mul(&q).unwrap().conj(),
            p.conj().mul(&q.conj()).unwrap()
        );
    }

    #[test]
    fn wirtinger_derivatives() {
        let g = p2("z1 + z1^2*z2");
        assert_eq!(g.wirtinger(0, false), p2("1 + 2*z1*z2"));
        assert_eq!(g.wirtinger(1, false), p2("z1^2"));
        assert_eq!(p2("conj(z1)").wirtinger(0, false), MixedPoly::zero(2));
        assert_eq!(p2("conj(z1)").wirtinger(0, true), MixedPoly::one(2));
        // holomorphic polynomials have vanishing conj-derivatives
        assert!(g.wirtinger(0, true).is_zero());
        assert!(g.wirtinger(1, true).is_zero());
    }

    #[test]
    fn evaluation_examples() {
        let g = p2("z1 + z1^2*z2");
        let one = CRat::one();
        let zero = CRat::zero();
        assert_eq!(g.eval_exact(&[one.clone(), zero.clone()]), CRat::one());

        let modulus = p2("z1*conj(z1)");
        let pt = CRat::new(rat_int(3), rat_int(4));
        assert_eq!(
            modulus.eval_exact(&[pt, zero.clone()]),
            CRat::from_int(25)
        );

        // 1 + 2zw vanishes at z=1, w=-1/2
        let f = p2("1 + 2*z1*z2");
        let z = CRat::one();
        let w = CRat::from_rat(rat_frac(-1, 2));
        assert!(f.eval_exact(&[z, w]).is_zero());
    }

    #[test]
    fn float_evaluation_tracks_exact() {
        let g = p2("3/7*z1^3*z2 - i*z2^2 + 5");
        let ze = CRat::new(rat_frac(1, 3), rat_frac(-2, 5));
        let we = CRat::new(rat_int(2), rat_frac(1, 7));
        let exact = g.eval_exact(&[ze.clone(), we.clone()]).to_c64();
        let float = g.eval_c64(&[ze.to_c64(), we.to_c64()]);
        let scale = g.eval_abs_c64(&[ze.to_c64(), we.to_c64()]);
        assert!((exact - float).norm() <= scale * 2f64.powi(-40));
    }

    #[test]
    fn leading_forms() {
        assert_eq!(p2("z1 + z1^2*z2").leading_form().unwrap(), p2("z1^2*z2"));
        let g = parse_poly(3, "z1*z3^2 + z2").unwrap();
        assert_eq!(g.leading_form().unwrap(), parse_poly(3, "z1*z3^2").unwrap());
        assert_eq!(p2("z1").leading_form().unwrap(), p2("z1"));
        assert!(MixedPoly::zero(2).leading_form().is_err());
        assert!(p2("conj(z1)").leading_form().is_err());
    }

    #[test]
    fn substitution_zero_kills_terms() {
        let h = p2("-2*conj(z2) - 4*z1*z2*conj(z2)");
        let s = h.substitute(1, &CRat::zero());
        assert!(s.is_zero());
    }

    #[test]
    fn canonical_display_roundtrips() {
        for s in [
            "z1^2*z2 - 2*z1*z2*conj(z2) + 1/2",
            "-2*conj(z2) - 4*z1*z2*conj(z2)",
            "(1 - 2*i)*z1 + i",
            "0",
            "-1/3",
        ] {
            let p = p2(s);
            let printed = format!("{p}");
            assert_eq!(parse_poly(2, &printed).unwrap(), p, "from {printed}");
        }
    }
}
