//! Depth of characters of `T(K) = L^×` and of their Langlands parameters.
//!
//! Characters and parameters enter only through their depths. The transform
//! taking `dep(χ)` to `dep(λ_T(χ))` for `T = R_{L/K} G_m` is
//! `r ↦ φ_{L/K}(e · r)`; it is the identity exactly when `L/K` is at most
//! tamely ramified, and otherwise exceeds `r` by at most `a(L/K)`, with
//! equality once `e · r` passes the largest lower break `b`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::arith::{self, Rational};
use crate::filtration::{Classification, RamificationFiltration};
use crate::herbrand::{self, PiecewiseLinear};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DepthError {
    #[error("depth {0} is negative")]
    NegativeDepth(Rational),
    #[error("depth must be positive")]
    ZeroDepth,
    #[error("epsilon {0} must be positive")]
    NonpositiveEpsilon(Rational),
}

/// A nonnegative exact depth.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Depth(Rational);

impl Depth {
    pub fn new(value: Rational) -> Result<Self, DepthError> {
        if value.is_negative() {
            Err(DepthError::NegativeDepth(value))
        } else {
            Ok(Depth(value))
        }
    }

    pub fn zero() -> Self {
        Depth(Rational::zero())
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn into_inner(self) -> Rational {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl fmt::Display for Depth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl TryFrom<Rational> for Depth {
    type Error = DepthError;

    fn try_from(value: Rational) -> Result<Self, Self::Error> {
        Depth::new(value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthReport {
    pub chi_depth: Depth,
    pub lambda_depth: Depth,
    /// `None` at depth zero.
    pub ratio: Option<Rational>,
    pub gap: Rational,
    pub invariant_a: Rational,
    pub classification: Classification,
}

/// The depth transform of one extension, with `φ` and `a(L/K)` precomputed.
#[derive(Debug, Clone)]
pub struct DepthTransform {
    phi: PiecewiseLinear,
    e: Rational,
    largest_break: Option<i64>,
    invariant_a: Rational,
    classification: Classification,
}

impl DepthTransform {
    pub fn new(filtration: &RamificationFiltration) -> Self {
        let phi = herbrand::phi_from_filtration(filtration);
        let e = arith::from_biguint(&filtration.ramification_index());
        let largest_break = filtration.largest_break().ok();
        let classification = filtration.classify();
        let invariant_a = match largest_break {
            Some(b) if b >= 0 => {
                let b = Rational::from_integer(b.into());
                phi.evaluate(&b).expect("b >= 0") - b / &e
            }
            // unramified or trivial: φ is the identity and e = 1
            _ => Rational::zero(),
        };
        DepthTransform { phi, e, largest_break, invariant_a, classification }
    }

    pub fn phi(&self) -> &PiecewiseLinear {
        &self.phi
    }

    pub fn ramification_index(&self) -> &Rational {
        &self.e
    }

    pub fn classification(&self) -> Classification {
        self.classification
    }

    /// `b / e`, the depth past which the tail identity holds (0 when `b < 0`).
    pub fn tail_threshold(&self) -> Rational {
        match self.largest_break {
            Some(b) if b > 0 => Rational::from_integer(b.into()) / &self.e,
            _ => Rational::zero(),
        }
    }

    /// `a(L/K) = φ(b) − b/e`, taken as 0 when there is no break `b >= 0`.
    pub fn invariant_a(&self) -> &Rational {
        &self.invariant_a
    }

    /// `dep(λ_T(χ)) = φ_{L/K}(e · dep(χ))`.
    pub fn parameter_depth(&self, chi: &Depth) -> Depth {
        let value = self.phi.evaluate(&(&self.e * chi.value())).expect("depth is nonnegative");
        Depth(value)
    }

    pub fn depth_ratio(&self, chi: &Depth) -> Result<Rational, DepthError> {
        if chi.is_zero() {
            return Err(DepthError::ZeroDepth);
        }
        Ok(self.parameter_depth(chi).0 / chi.value())
    }

    pub fn depth_gap(&self, chi: &Depth) -> Rational {
        self.parameter_depth(chi).0 - chi.value()
    }

    pub fn is_depth_preserving(&self) -> bool {
        self.classification != Classification::WildlyRamified
    }

    /// Smallest `r` with `φ(e·r)/r − 1 <= epsilon`, searched segment by segment.
    ///
    /// When the bound already holds for every `r > 0` (tame extensions, or a
    /// first slope with `|G_1| − 1 <= epsilon`) the set has no minimum and its
    /// infimum 0 is returned.
    pub fn min_depth_for_ratio(&self, epsilon: &Rational) -> Result<Depth, DepthError> {
        if !epsilon.is_positive() {
            return Err(DepthError::NonpositiveEpsilon(epsilon.clone()));
        }
        let one_plus_eps = Rational::from_integer(1.into()) + epsilon;
        let points = self.phi.breakpoints();
        let slopes = self.phi.slopes();
        // In r-coordinates segment j is r ∈ [x_j/e, x_{j+1}/e] with
        // φ(e·r) = y_j + s_j (e·r − x_j); the bound is r·(s_j·e − 1 − ε) <= s_j·x_j − y_j.
        for (j, ((x, y), s)) in points.iter().zip(&slopes).enumerate() {
            let lo = x / &self.e;
            let hi = points.get(j + 1).map(|(x1, _)| x1 / &self.e);
            let coeff = s * &self.e - &one_plus_eps;
            let rhs = s * x - y;
            if let Some(r) = first_solution(&coeff, &rhs, &lo) {
                if hi.as_ref().is_none_or(|h| r <= *h) {
                    return Ok(Depth(r));
                }
            }
        }
        unreachable!("the final segment always satisfies the bound for large r")
    }

    /// Smallest integer `>= e · r`: the valuation cutoff of `T(K)_r`.
    pub fn moy_prasad_threshold(&self, r: &Depth) -> BigUint {
        arith::ceil(&(&self.e * r.value()))
            .to_biguint()
            .expect("nonnegative")
    }

    pub fn report(&self, chi: &Depth) -> DepthReport {
        let lambda = self.parameter_depth(chi);
        let gap = &lambda.0 - chi.value();
        let ratio = (!chi.is_zero()).then(|| &lambda.0 / chi.value());
        DepthReport {
            chi_depth: chi.clone(),
            lambda_depth: lambda,
            ratio,
            gap,
            invariant_a: self.invariant_a.clone(),
            classification: self.classification,
        }
    }
}

/// Infimum of `{ r >= lo, r > 0 : r·coeff <= rhs }`, if nonempty.
fn first_solution(coeff: &Rational, rhs: &Rational, lo: &Rational) -> Option<Rational> {
    if coeff.is_negative() {
        return Some((rhs / coeff).max(lo.clone()));
    }
    if coeff.is_zero() {
        return (!rhs.is_negative()).then(|| lo.clone());
    }
    let bound = rhs / coeff;
    (bound >= *lo && bound.is_positive()).then(|| lo.clone())
}

pub fn parameter_depth(filtration: &RamificationFiltration, chi: &Depth) -> Depth {
    DepthTransform::new(filtration).parameter_depth(chi)
}

pub fn invariant_a(filtration: &RamificationFiltration) -> Rational {
    DepthTransform::new(filtration).invariant_a
}

pub fn depth_ratio(filtration: &RamificationFiltration, chi: &Depth) -> Result<Rational, DepthError> {
    DepthTransform::new(filtration).depth_ratio(chi)
}

pub fn depth_gap(filtration: &RamificationFiltration, chi: &Depth) -> Rational {
    DepthTransform::new(filtration).depth_gap(chi)
}

pub fn is_depth_preserving(filtration: &RamificationFiltration) -> bool {
    filtration.classify() != Classification::WildlyRamified
}

pub fn min_depth_for_ratio(
    filtration: &RamificationFiltration,
    epsilon: &Rational,
) -> Result<Depth, DepthError> {
    DepthTransform::new(filtration).min_depth_for_ratio(epsilon)
}

pub fn moy_prasad_threshold(filtration: &RamificationFiltration, r: &Depth) -> BigUint {
    DepthTransform::new(filtration).moy_prasad_threshold(r)
}

pub fn depth_report(filtration: &RamificationFiltration, chi: &Depth) -> DepthReport {
    DepthTransform::new(filtration).report(chi)
}
