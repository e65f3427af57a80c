//! Lower-numbering ramification filtrations, described by group orders.
//!
//! A filtration `G = G_{-1} ⊇ G_0 ⊇ G_1 ⊇ … ⊇ {1}` is stored through the
//! orders `g_i = |G_i|` only. Internally the sequence is run-length encoded as
//! the order of `G_{-1}` plus the list of indices where the order drops, so a
//! filtration with a break at index `10^9` costs no more than one at index 3.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::arith::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FiltrationError {
    #[error("residue characteristic {0} is not prime")]
    InvalidPrime(u64),
    #[error("order sequence is empty")]
    Empty,
    #[error("order at index {index} is zero")]
    ZeroOrder { index: i64 },
    #[error("orders increase from index {index} to {}", index + 1)]
    NotNonincreasing { index: i64 },
    #[error("order at index {} does not divide the order at index {index}", index + 1)]
    NotDivisibilityChain { index: i64 },
    #[error("order sequence does not end in 1")]
    NonterminatingSequence,
    #[error("|G_1| = {order} is not a power of p = {p}")]
    WildPartNotPPower { order: BigUint, p: u64 },
    #[error("(G_0 : G_1) = {quotient} is divisible by p = {p}")]
    TameQuotientNotCoprime { quotient: BigUint, p: u64 },
    #[error("(G_{index} : G_{}) is not a power of p = {p}", index + 1)]
    HigherQuotientNotPPower { index: i64, p: u64 },
    #[error("break indices must be strictly increasing (offending index {index})")]
    UnorderedBreaks { index: i64 },
    #[error("index {0} is below -1")]
    IndexBelowMinusOne(String),
    #[error("the extension is trivial and has no ramification break")]
    TrivialExtension,
}

/// How much of the group-theoretic structure to enforce on the orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValidationMode {
    /// All order-level consequences of `G` being a Galois group of local fields.
    #[default]
    Strict,
    /// Only positivity, monotonicity, divisibility and termination; enough for `φ`.
    OrdersOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Unramified,
    TamelyRamified,
    WildlyRamified,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Unramified => "unramified",
            Classification::TamelyRamified => "tame",
            Classification::WildlyRamified => "wild",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A drop of the filtration: `g_index > g_{index+1} = order_after`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Drop {
    pub index: i64,
    pub order_after: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RamificationFiltration {
    residue_char: u64,
    top: BigUint,
    drops: Vec<Drop>,
}

impl RamificationFiltration {
    /// Validates `orders = (g_{-1}, g_0, g_1, …, 1)` in strict mode.
    pub fn new(residue_char: u64, orders: Vec<BigUint>) -> Result<Self, FiltrationError> {
        Self::with_mode(residue_char, orders, ValidationMode::Strict)
    }

    pub fn from_u64(residue_char: u64, orders: &[u64]) -> Result<Self, FiltrationError> {
        Self::new(residue_char, orders.iter().map(|&g| BigUint::from(g)).collect())
    }

    pub fn with_mode(
        residue_char: u64,
        orders: Vec<BigUint>,
        mode: ValidationMode,
    ) -> Result<Self, FiltrationError> {
        check_prime(residue_char)?;
        let mut iter = orders.into_iter();
        let top = iter.next().ok_or(FiltrationError::Empty)?;
        let mut drops = Vec::new();
        let mut current = top.clone();
        for (offset, g) in iter.enumerate() {
            let index = offset as i64 - 1;
            if g != current {
                drops.push(Drop { index, order_after: g.clone() });
                current = g;
            }
        }
        Self::from_runs(residue_char, top, drops, mode)
    }

    /// Builds a filtration from `|G|` and the list of drops `(index, order after)`.
    ///
    /// Entries whose order equals the running order are ignored; indices must be
    /// strictly increasing and at least `-1`.
    pub fn from_breaks(
        residue_char: u64,
        group_order: BigUint,
        breaks: Vec<(i64, BigUint)>,
        mode: ValidationMode,
    ) -> Result<Self, FiltrationError> {
        check_prime(residue_char)?;
        let mut drops: Vec<Drop> = Vec::with_capacity(breaks.len());
        let mut current = group_order.clone();
        let mut last_index: Option<i64> = None;
        for (index, order_after) in breaks {
            if index < -1 {
                return Err(FiltrationError::IndexBelowMinusOne(index.to_string()));
            }
            if last_index.is_some_and(|l| index <= l) {
                return Err(FiltrationError::UnorderedBreaks { index });
            }
            last_index = Some(index);
            if order_after != current {
                current = order_after.clone();
                drops.push(Drop { index, order_after });
            }
        }
        Self::from_runs(residue_char, group_order, drops, mode)
    }

    fn from_runs(
        p: u64,
        top: BigUint,
        drops: Vec<Drop>,
        mode: ValidationMode,
    ) -> Result<Self, FiltrationError> {
        if top.is_zero() {
            return Err(FiltrationError::ZeroOrder { index: -1 });
        }
        if let Some(d) = drops.iter().find(|d| d.order_after.is_zero()) {
            return Err(FiltrationError::ZeroOrder { index: d.index + 1 });
        }
        let mut before = &top;
        for d in &drops {
            if d.order_after > *before {
                return Err(FiltrationError::NotNonincreasing { index: d.index });
            }
            before = &d.order_after;
        }
        let mut before = &top;
        for d in &drops {
            if !before.is_multiple_of(&d.order_after) {
                return Err(FiltrationError::NotDivisibilityChain { index: d.index });
            }
            before = &d.order_after;
        }
        if !before.is_one() {
            return Err(FiltrationError::NonterminatingSequence);
        }
        let filtration = RamificationFiltration { residue_char: p, top, drops };
        if mode == ValidationMode::Strict {
            filtration.check_group_structure()?;
        }
        Ok(filtration)
    }

    fn check_group_structure(&self) -> Result<(), FiltrationError> {
        let p = self.residue_char;
        let g0 = self.order(0);
        let g1 = self.order(1);
        if !arith::is_power_of(&g1, p) {
            return Err(FiltrationError::WildPartNotPPower { order: g1, p });
        }
        let tame = &g0 / &g1;
        if arith::divides(p, &tame) {
            return Err(FiltrationError::TameQuotientNotCoprime { quotient: tame, p });
        }
        // Subsumed by the wild-part check given divisibility, kept as a guard.
        let mut before = self.top.clone();
        for d in &self.drops {
            if d.index >= 1 && !arith::is_power_of(&(&before / &d.order_after), p) {
                return Err(FiltrationError::HigherQuotientNotPPower { index: d.index, p });
            }
            before = d.order_after.clone();
        }
        Ok(())
    }

    pub fn residue_char(&self) -> u64 {
        self.residue_char
    }

    /// `|G| = g_{-1}`.
    pub fn group_order(&self) -> &BigUint {
        &self.top
    }

    /// The drops `g_i > g_{i+1}` at every index `i >= -1`, in increasing order.
    pub fn drops(&self) -> &[Drop] {
        &self.drops
    }

    /// `g_i` for an integer index `i >= -1`; identically 1 past the last break.
    pub fn order(&self, index: i64) -> BigUint {
        debug_assert!(index >= -1);
        let k = self.drops.partition_point(|d| d.index < index);
        if k == 0 {
            self.top.clone()
        } else {
            self.drops[k - 1].order_after.clone()
        }
    }

    /// Index `N` of the terminal 1 in the normalized order sequence.
    pub fn last_index(&self) -> i64 {
        self.drops.last().map_or(-1, |d| d.index + 1)
    }

    /// Expanded `(g_{-1}, …, g_N)`, ending in a single 1.
    pub fn orders(&self) -> Vec<BigUint> {
        (-1..=self.last_index()).map(|i| self.order(i)).collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.top.is_one()
    }

    /// `e(L/K) = |G_0|`.
    pub fn ramification_index(&self) -> BigUint {
        self.order(0)
    }

    /// `|G_1|`, the wild inertia order.
    pub fn wild_order(&self) -> BigUint {
        self.order(1)
    }

    /// `|G_t|` with `G_t = G_⌈t⌉` for real `t >= -1`.
    pub fn group_order_at(&self, t: &Rational) -> Result<BigUint, FiltrationError> {
        if *t < arith::int(-1) {
            return Err(FiltrationError::IndexBelowMinusOne(t.to_string()));
        }
        let i = arith::ceil(t);
        let last = self.last_index();
        match arith::to_i64(&i) {
            Some(i) if i <= last => Ok(self.order(i)),
            _ => Ok(BigUint::one()),
        }
    }

    pub fn classify(&self) -> Classification {
        if self.order(0).is_one() {
            Classification::Unramified
        } else if self.order(1).is_one() {
            Classification::TamelyRamified
        } else {
            Classification::WildlyRamified
        }
    }

    /// `b = max{ i : g_i > 1 }`: −1 when unramified, 0 when tame.
    pub fn largest_break(&self) -> Result<i64, FiltrationError> {
        self.drops
            .last()
            .map(|d| d.index)
            .ok_or(FiltrationError::TrivialExtension)
    }

    /// The lower breaks `b_1 < … < b_k = b` at indices `>= 0`, with the order after each.
    pub fn break_sequence(&self) -> Result<Vec<Drop>, FiltrationError> {
        if self.is_trivial() {
            return Err(FiltrationError::TrivialExtension);
        }
        Ok(self.drops.iter().filter(|d| d.index >= 0).cloned().collect())
    }

    /// Degrees of `K_0/K`, `K_1/K_0` and `L/K_1` in the tower `L ⊃ K_1 ⊃ K_0 ⊃ K`.
    pub fn tower_degrees(&self) -> (BigUint, BigUint, BigUint) {
        let g0 = self.order(0);
        let g1 = self.order(1);
        (&self.top / &g0, &g0 / &g1, g1)
    }
}

fn check_prime(p: u64) -> Result<(), FiltrationError> {
    if arith::is_prime(p) {
        Ok(())
    } else {
        Err(FiltrationError::InvalidPrime(p))
    }
}

impl fmt::Display for RamificationFiltration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={} |G|={}", self.residue_char, self.top)?;
        for d in &self.drops {
            write!(f, " {}->{}", d.index, d.order_after)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};

    fn f(p: u64, orders: &[u64]) -> RamificationFiltration {
        RamificationFiltration::from_u64(p, orders).unwrap()
    }

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    fn quaternion() -> RamificationFiltration {
        f(2, &[16, 16, 16, 2, 2, 1])
    }

    #[test]
    fn constructs_and_normalizes() {
        let q = quaternion();
        assert_eq!(q.last_index(), 4);
        assert_eq!(q.orders(), [16u64, 16, 16, 2, 2, 1].map(big).to_vec());

        let trivial = f(3, &[1]);
        assert!(trivial.is_trivial());
        assert_eq!(trivial.last_index(), -1);
        assert_eq!(f(3, &[1, 1, 1]), trivial);
        assert_eq!(f(3, &[2, 2, 1, 1, 1]), f(3, &[2, 2, 1]));
        assert_eq!(f(3, &[2, 2, 1, 1]).orders(), [2u64, 2, 1].map(big).to_vec());
    }

    #[test]
    fn rejects_each_violation() {
        use FiltrationError::*;
        let err = |p, o: &[u64]| RamificationFiltration::from_u64(p, o).unwrap_err();
        assert!(matches!(err(2, &[4, 4, 3, 1]), NotDivisibilityChain { index: 0 }));
        assert_eq!(err(4, &[1]), InvalidPrime(4));
        assert_eq!(err(1, &[1]), InvalidPrime(1));
        assert_eq!(err(2, &[]), Empty);
        assert_eq!(err(2, &[2, 0, 1]), ZeroOrder { index: 0 });
        assert_eq!(err(2, &[2, 4, 1]), NotNonincreasing { index: -1 });
        assert_eq!(err(2, &[4, 2]), NonterminatingSequence);
        assert!(matches!(err(2, &[6, 6, 3, 1]), WildPartNotPPower { .. }));
        assert!(matches!(err(2, &[2, 2, 1]), TameQuotientNotCoprime { .. }));
        assert!(matches!(err(3, &[6, 6, 1]), TameQuotientNotCoprime { .. }));
        assert!(RamificationFiltration::from_u64(3, &[10, 10, 1]).is_ok());
    }

    #[test]
    fn orders_only_mode_skips_group_checks() {
        let orders = [6u64, 6, 3, 1].map(big).to_vec();
        assert!(RamificationFiltration::new(2, orders.clone()).is_err());
        let lenient =
            RamificationFiltration::with_mode(2, orders, ValidationMode::OrdersOnly).unwrap();
        assert_eq!(lenient.ramification_index(), big(6));
        assert!(RamificationFiltration::with_mode(
            2,
            [4u64, 4, 3, 1].map(big).to_vec(),
            ValidationMode::OrdersOnly
        )
        .is_err());
    }

    #[test]
    fn ramification_index() {
        assert_eq!(quaternion().ramification_index(), big(16));
        assert_eq!(f(3, &[1]).ramification_index(), big(1));
        assert_eq!(f(3, &[6, 3, 3, 1]).ramification_index(), big(3));
    }

    #[test]
    fn group_order_at_uses_ceiling() {
        let q = quaternion();
        assert_eq!(q.group_order_at(&rat(3, 2)).unwrap(), big(2));
        assert_eq!(q.group_order_at(&int(1)).unwrap(), big(16));
        assert_eq!(q.group_order_at(&int(7)).unwrap(), big(1));
        assert_eq!(q.group_order_at(&rat(-1, 2)).unwrap(), big(16));
        assert_eq!(q.group_order_at(&int(-1)).unwrap(), big(16));
        assert!(matches!(
            q.group_order_at(&rat(-3, 2)),
            Err(FiltrationError::IndexBelowMinusOne(_))
        ));
        let huge = rat(1, 1) * arith::from_biguint(&num_traits::pow(big(10), 30));
        assert_eq!(q.group_order_at(&huge).unwrap(), big(1));
    }

    #[test]
    fn classifies() {
        assert_eq!(f(3, &[6, 3, 3, 1]).classify(), Classification::WildlyRamified);
        assert_eq!(f(3, &[2, 2, 1]).classify(), Classification::TamelyRamified);
        assert_eq!(f(3, &[5, 1]).classify(), Classification::Unramified);
        assert_eq!(f(3, &[1]).classify(), Classification::Unramified);
    }

    #[test]
    fn largest_break() {
        assert_eq!(quaternion().largest_break(), Ok(3));
        assert_eq!(f(3, &[2, 2, 1]).largest_break(), Ok(0));
        assert_eq!(f(5, &[3, 1]).largest_break(), Ok(-1));
        assert_eq!(f(5, &[1]).largest_break(), Err(FiltrationError::TrivialExtension));
    }

    #[test]
    fn break_sequence() {
        let drops = |fl: RamificationFiltration| -> Vec<(i64, u64)> {
            fl.break_sequence()
                .unwrap()
                .into_iter()
                .map(|d| (d.index, u64::try_from(d.order_after).unwrap()))
                .collect()
        };
        assert_eq!(drops(quaternion()), vec![(1, 2), (3, 1)]);
        assert_eq!(drops(f(3, &[3, 3, 3, 3, 1])), vec![(2, 1)]);
        assert_eq!(drops(f(2, &[2, 2, 2, 1])), vec![(1, 1)]);
        assert_eq!(drops(f(3, &[2, 2, 1])), vec![(0, 1)]);
        assert_eq!(drops(f(3, &[5, 1])), vec![]);
        assert_eq!(f(3, &[1]).break_sequence(), Err(FiltrationError::TrivialExtension));
    }

    #[test]
    fn wild_order_and_tower() {
        assert_eq!(quaternion().wild_order(), big(16));
        assert_eq!(f(3, &[2, 2, 1]).wild_order(), big(1));
        assert_eq!(f(3, &[6, 3, 3, 1]).wild_order(), big(3));

        assert_eq!(quaternion().tower_degrees(), (big(1), big(1), big(16)));
        assert_eq!(f(3, &[12, 6, 3, 1]).tower_degrees(), (big(2), big(2), big(3)));
        assert_eq!(f(5, &[7, 1]).tower_degrees(), (big(7), big(1), big(1)));
    }

    #[test]
    fn from_breaks_matches_orders() {
        let b = RamificationFiltration::from_breaks(
            2,
            big(16),
            vec![(1, big(2)), (3, big(1))],
            ValidationMode::Strict,
        )
        .unwrap();
        assert_eq!(b, quaternion());
        let far = RamificationFiltration::from_breaks(
            3,
            big(3),
            vec![(1_000_000_000_000, big(1))],
            ValidationMode::Strict,
        )
        .unwrap();
        assert_eq!(far.largest_break(), Ok(1_000_000_000_000));
        assert_eq!(far.order(999_999_999_999), big(3));
        assert!(matches!(
            RamificationFiltration::from_breaks(
                2,
                big(4),
                vec![(3, big(2)), (1, big(1))],
                ValidationMode::Strict
            ),
            Err(FiltrationError::UnorderedBreaks { index: 1 })
        ));
    }
}
