//! Exact polynomial arithmetic: mixed polynomials, realification, and
//! the domain types for polynomial mappings.

pub mod mixed;
pub mod real;

pub use mixed::{MixedExp, MixedPoly};
pub use real::{realify_map, realify_pair, realify_rho, RealExp, RealPoly, RealPolyMap};

use crate::rational::Rat;
use num_traits::{Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("variable count mismatch: {left} vs {right}")]
    VariableCountMismatch { left: usize, right: usize },
    #[error("operation undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("operation requires a holomorphic polynomial")]
    NotHolomorphic,
    #[error("weights must be nonnegative with at least one positive entry")]
    InvalidWeights,
    #[error("a mapping C^n -> C^(n-1) needs n >= 2 and exactly n-1 components, got n={n}, {got} components")]
    BadComponentCount { n: usize, got: usize },
}

/// Nonnegative rational weights `a_1..a_n`, not all zero, defining
/// `rho = Σ a_i |z_i|^2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightVector {
    a: Vec<Rat>,
}

impl WeightVector {
    pub fn new(a: Vec<Rat>) -> Result<Self, PolyError> {
        if a.is_empty() || a.iter().any(|w| w.is_negative()) || a.iter().all(|w| w.is_zero()) {
            return Err(PolyError::InvalidWeights);
        }
        Ok(WeightVector { a })
    }

    pub fn from_ints(a: &[i64]) -> Result<Self, PolyError> {
        Self::new(a.iter().map(|&v| crate::rational::rat_int(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn weights(&self) -> &[Rat] {
        &self.a
    }

    /// Scales all weights by a positive rational.
    pub fn scaled(&self, s: &Rat) -> Result<Self, PolyError> {
        if !s.is_positive() {
            return Err(PolyError::InvalidWeights);
        }
        WeightVector::new(self.a.iter().map(|w| w * s).collect())
    }

    /// `rho(x) = Σ a_i |z_i|^2` at a real point `x` in R^{2n}.
    pub fn rho_f64(&self, x: &[f64]) -> f64 {
        use num_traits::ToPrimitive;
        self.a
            .iter()
            .enumerate()
            .map(|(i, a)| {
                a.to_f64().unwrap_or(f64::NAN) * (x[2 * i] * x[2 * i] + x[2 * i + 1] * x[2 * i + 1])
            })
            .sum()
    }
}

/// An ordered tuple of `n-1` holomorphic polynomials in `n` variables;
/// the mapping `G: C^n -> C^(n-1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMap {
    n: usize,
    components: Vec<MixedPoly>,
}

impl PolyMap {
    pub fn new(n: usize, components: Vec<MixedPoly>) -> Result<Self, PolyError> {
        if n < 2 || components.len() != n - 1 {
            return Err(PolyError::BadComponentCount {
                n,
                got: components.len(),
            });
        }
        for c in &components {
            if c.nvars() != n {
                return Err(PolyError::VariableCountMismatch {
                    left: n,
                    right: c.nvars(),
                });
            }
            if !c.is_holomorphic() {
                return Err(PolyError::NotHolomorphic);
            }
        }
        Ok(PolyMap { n, components })
    }

    /// Source dimension `n` (complex).
    pub fn source_dim(&self) -> usize {
        self.n
    }

    /// Target dimension `n-1` (complex).
    pub fn target_dim(&self) -> usize {
        self.n - 1
    }

    pub fn components(&self) -> &[MixedPoly] {
        &self.components
    }

    /// Evaluates all components at a complex point.
    pub fn eval_c64(&self, z: &[num_complex::Complex64]) -> Vec<num_complex::Complex64> {
        self.components.iter().map(|g| g.eval_c64(z)).collect()
    }

    /// Componentwise leading forms.
    pub fn leading_forms(&self) -> Result<Vec<MixedPoly>, PolyError> {
        self.components.iter().map(|g| g.leading_form()).collect()
    }
}
