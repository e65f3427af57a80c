//! The Hasse-Herbrand function `φ_{L/K}(u) = ∫_0^u dt / (G_0 : G_t)` as an
//! exact piecewise-linear function on `[0, ∞)`, together with its inverse `ψ`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::arith::{self, Rational};
use crate::filtration::{FiltrationError, RamificationFiltration};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HerbrandError {
    #[error("argument {0} is negative")]
    NegativeArgument(Rational),
    #[error("function is not strictly increasing and cannot be inverted")]
    NotInvertible,
    #[error("breakpoints must start at (0, 0) and have strictly increasing x")]
    MalformedBreakpoints,
    #[error("extension is unramified and has no break at index >= 0")]
    Unramified,
    #[error(transparent)]
    Filtration(#[from] FiltrationError),
}

/// A continuous piecewise-linear function on `[0, ∞)` with `f(0) = 0`.
///
/// Stored as breakpoints `(x_i, y_i)` starting at the origin, plus the slope on
/// `[x_last, ∞)`. Values are kept in canonical form: no breakpoint sits between
/// two segments of equal slope, so `==` is equality of functions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PiecewiseLinear {
    points: Vec<(Rational, Rational)>,
    final_slope: Rational,
}

impl PiecewiseLinear {
    pub fn new(
        points: Vec<(Rational, Rational)>,
        final_slope: Rational,
    ) -> Result<Self, HerbrandError> {
        let origin_ok = points
            .first()
            .is_some_and(|(x, y)| x.is_zero() && y.is_zero());
        if !origin_ok || points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(HerbrandError::MalformedBreakpoints);
        }
        Ok(Self::canonical(points, final_slope))
    }

    pub fn identity() -> Self {
        Self::linear(Rational::one())
    }

    /// `u ↦ slope · u`.
    pub fn linear(slope: Rational) -> Self {
        PiecewiseLinear {
            points: vec![(Rational::zero(), Rational::zero())],
            final_slope: slope,
        }
    }

    fn canonical(points: Vec<(Rational, Rational)>, final_slope: Rational) -> Self {
        let mut kept: Vec<(Rational, Rational)> = Vec::with_capacity(points.len());
        for (i, pt) in points.iter().enumerate() {
            if i > 0 {
                let prev = kept.last().expect("origin kept");
                let incoming = slope_between(prev, pt);
                let outgoing = match points.get(i + 1) {
                    Some(next) => slope_between(pt, next),
                    None => final_slope.clone(),
                };
                if incoming == outgoing {
                    continue;
                }
            }
            kept.push(pt.clone());
        }
        PiecewiseLinear { points: kept, final_slope }
    }

    pub fn breakpoints(&self) -> &[(Rational, Rational)] {
        &self.points
    }

    pub fn final_slope(&self) -> &Rational {
        &self.final_slope
    }

    /// Slope of every segment, left to right, ending with the final slope.
    pub fn slopes(&self) -> Vec<Rational> {
        self.points
            .windows(2)
            .map(|w| slope_between(&w[0], &w[1]))
            .chain(std::iter::once(self.final_slope.clone()))
            .collect()
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.slopes().iter().all(Signed::is_positive)
    }

    pub fn is_concave(&self) -> bool {
        self.slopes().windows(2).all(|w| w[0] >= w[1])
    }

    pub fn evaluate(&self, u: &Rational) -> Result<Rational, HerbrandError> {
        if u.is_negative() {
            return Err(HerbrandError::NegativeArgument(u.clone()));
        }
        let k = self.points.partition_point(|(x, _)| x <= u);
        let (x0, y0) = &self.points[k - 1];
        let slope = match self.points.get(k) {
            Some(next) => slope_between(&self.points[k - 1], next),
            None => self.final_slope.clone(),
        };
        Ok(y0 + slope * (u - x0))
    }

    pub fn inverse(&self) -> Result<Self, HerbrandError> {
        if !self.is_strictly_increasing() {
            return Err(HerbrandError::NotInvertible);
        }
        let points = self.points.iter().map(|(x, y)| (y.clone(), x.clone())).collect();
        Ok(Self::canonical(points, self.final_slope.recip()))
    }

    /// `outer ∘ inner`. `inner` must be strictly increasing.
    pub fn compose(outer: &Self, inner: &Self) -> Result<Self, HerbrandError> {
        let inner_inv = inner.inverse()?;
        let mut xs: Vec<Rational> = inner.points.iter().map(|(x, _)| x.clone()).collect();
        for (x, _) in outer.points.iter().skip(1) {
            xs.push(inner_inv.evaluate(x)?);
        }
        xs.sort();
        xs.dedup();
        let points = xs
            .into_iter()
            .map(|x| {
                let y = outer.evaluate(&inner.evaluate(&x)?)?;
                Ok((x, y))
            })
            .collect::<Result<Vec<_>, HerbrandError>>()?;
        Ok(Self::canonical(points, &outer.final_slope * &inner.final_slope))
    }
}

fn slope_between(a: &(Rational, Rational), b: &(Rational, Rational)) -> Rational {
    (&b.1 - &a.1) / (&b.0 - &a.0)
}

impl fmt::Display for PiecewiseLinear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, y)) in self.points.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "({x}, {y})")?;
        }
        write!(f, " then slope {}", self.final_slope)
    }
}

/// Builds `φ_{L/K}`: slope `g_i / g_0` on `(i − 1, i]`, kinks at the lower breaks.
pub fn phi_from_filtration(filtration: &RamificationFiltration) -> PiecewiseLinear {
    let g0 = arith::from_biguint(&filtration.ramification_index());
    let mut slope = arith::from_biguint(&filtration.order(1)) / &g0;
    let mut points = vec![(Rational::zero(), Rational::zero())];
    for drop in filtration.drops().iter().filter(|d| d.index >= 1) {
        let (x0, y0) = points.last().expect("nonempty");
        let x = Rational::from_integer(drop.index.into());
        let y = y0 + &slope * (&x - x0);
        points.push((x, y));
        slope = arith::from_biguint(&drop.order_after) / &g0;
    }
    PiecewiseLinear::canonical(points, slope)
}

/// `φ(b_j)` for each lower break `b_j >= 0`.
pub fn upper_breaks(filtration: &RamificationFiltration) -> Result<Vec<Rational>, HerbrandError> {
    let breaks = filtration.break_sequence()?;
    if breaks.is_empty() {
        return Err(HerbrandError::Unramified);
    }
    let phi = phi_from_filtration(filtration);
    breaks
        .iter()
        .map(|d| phi.evaluate(&Rational::from_integer(d.index.into())))
        .collect()
}

/// Brute-force `φ(u) = (1/g_0) · Σ_{i=1}^{u} g_i` for integer `u`, summing term by term.
pub fn phi_integer_oracle(filtration: &RamificationFiltration, u: u64) -> Rational {
    let mut total = BigUint::zero();
    for i in 1..=u {
        total += filtration.order(i as i64);
    }
    arith::from_biguint(&total) / arith::from_biguint(&filtration.order(0))
}


#[cfg(test)]
mod proptests {
    use super::*;
    use crate::arith::{int, rat};
    use proptest::prelude::*;

    fn arb_filtration() -> impl Strategy<Value = RamificationFiltration> {
        (
            prop::sample::select(vec![2u64, 3, 5]),
            1u64..3,
            prop::sample::select(vec![1u64, 2, 4, 7]),
            prop::collection::vec((0i64..5, 1u32..3), 0..5),
        )
            .prop_filter_map("tame part must be prime to p", |(p, unram, tame, runs)| {
                let wild: u64 = runs.iter().map(|&(_, k)| p.pow(k)).product();
                let g0 = BigUint::from(tame * wild);
                let mut index = 0i64;
                let mut current = wild;
                let mut breaks = vec![(-1, g0.clone()), (0, BigUint::from(wild))];
                for (gap, k) in runs {
                    index += gap + 1;
                    current /= p.pow(k);
                    breaks.push((index, BigUint::from(current)));
                }
                breaks.push((index + 1, BigUint::one()));
                RamificationFiltration::from_breaks(
                    p,
                    BigUint::from(unram) * &g0,
                    breaks,
                    Default::default(),
                )
                .ok()
            })
    }

    proptest! {
        #[test]
        fn oracle_matches_and_shape_holds(fl in arb_filtration(), a in 0i64..400, d in 1i64..9) {
            let phi = phi_from_filtration(&fl);
            let n = fl.last_index().max(0) as u64;
            for u in 0..=n + 10 {
                prop_assert_eq!(phi.evaluate(&int(u as i64)).unwrap(), phi_integer_oracle(&fl, u));
            }
            let slopes = phi.slopes();
            prop_assert!(slopes.windows(2).all(|w| w[0] > w[1]));
            prop_assert!(slopes.iter().all(|s| s.is_positive() && *s <= int(1)));
            let e = arith::from_biguint(&fl.ramification_index());
            prop_assert_eq!(slopes.last().unwrap(), &e.recip());
            prop_assert_eq!(&slopes[0], &(arith::from_biguint(&fl.wild_order()) / &e));

            let u = rat(a, d);
            let v = &u + rat(1, 7);
            let phi_u = phi.evaluate(&u).unwrap();
            prop_assert!(phi_u <= u);
            prop_assert!(phi_u < phi.evaluate(&v).unwrap());
            prop_assert_eq!(phi == PiecewiseLinear::identity(), e.is_one());

            let psi = phi.inverse().unwrap();
            prop_assert_eq!(psi.evaluate(&phi_u).unwrap(), u);
            prop_assert_eq!(PiecewiseLinear::compose(&psi, &phi).unwrap(), PiecewiseLinear::identity());
            prop_assert_eq!(PiecewiseLinear::compose(&phi, &psi).unwrap(), PiecewiseLinear::identity());
        }
    }
}
