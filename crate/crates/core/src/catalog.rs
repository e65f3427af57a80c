//! Named families of wildly ramified extensions with known invariants.
//!
//! Each constructor returns the lower filtration together with closed-form
//! expected values of `e`, `b`, `φ(b)` and `a(L/K)`. [`verify_entry`]
//! recomputes those four from the filtration alone and compares exactly.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use thiserror::Error;

use crate::arith::{self, Rational};
use crate::depth::DepthTransform;
use crate::filtration::{FiltrationError, RamificationFiltration, ValidationMode};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("m = {m} is divisible by p = {p}")]
    MNotCoprimeToP { m: u64, p: u64 },
    #[error("m must be positive")]
    NonpositiveM,
    #[error("n must be positive")]
    NonpositiveN,
    #[error("break m = {0} must be odd")]
    EvenBreak(u64),
    #[error("n = {0} must be at least 2")]
    NTooSmall(u64),
    #[error("p = {0} is not prime")]
    InvalidPrime(u64),
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("family `{family}` requires parameter `{param}`")]
    MissingParam { family: &'static str, param: &'static str },
    #[error("family `{family}` has no parameter `{param}`")]
    UnknownParam { family: &'static str, param: String },
    #[error("unknown expected quantity `{0}` (expected one of e, b, phi_b, a)")]
    UnknownQuantity(String),
    #[error("filtration too large to build: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Filtration(#[from] FiltrationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    ArtinSchreier,
    Abrashkin,
    Char2Quadratic,
    QuaternionSerre,
    CyclotomicMp,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::ArtinSchreier,
        Family::Abrashkin,
        Family::Char2Quadratic,
        Family::QuaternionSerre,
        Family::CyclotomicMp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::ArtinSchreier => "artin_schreier",
            Family::Abrashkin => "abrashkin",
            Family::Char2Quadratic => "char2_quadratic",
            Family::QuaternionSerre => "quaternion_serre",
            Family::CyclotomicMp => "cyclotomic_mp",
        }
    }

    pub fn from_name(name: &str) -> Result<Family, CatalogError> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == name)
            .ok_or_else(|| CatalogError::UnknownFamily(name.to_string()))
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Family::ArtinSchreier => &["p", "m"],
            Family::Abrashkin => &["p", "n", "m"],
            Family::Char2Quadratic => &["m"],
            Family::QuaternionSerre => &[],
            Family::CyclotomicMp => &["p", "n"],
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Family::ArtinSchreier => "degree-p Artin-Schreier extension in characteristic p, one break at m",
            Family::Abrashkin => "degree q = p^n extension from X^q - X - alpha in characteristic 0, one break at m",
            Family::Char2Quadratic => "totally ramified quadratic extension in characteristic 2, odd break m",
            Family::QuaternionSerre => "quaternion extension of Q_2(sqrt 5) with breaks at 1 and 3",
            Family::CyclotomicMp => "Q_p(zeta_{p^n}) over Q_p(zeta_p)",
        }
    }

    /// Parameters used by `show` and `verify` when none are given.
    pub fn default_params(self) -> BTreeMap<String, u64> {
        let pairs: &[(&str, u64)] = match self {
            Family::ArtinSchreier => &[("p", 3), ("m", 2)],
            Family::Abrashkin => &[("p", 2), ("n", 2), ("m", 3)],
            Family::Char2Quadratic => &[("m", 5)],
            Family::QuaternionSerre => &[],
            Family::CyclotomicMp => &[("p", 3), ("n", 2)],
        };
        pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    /// Parameter grid exercised by `verify --all`.
    pub fn default_grid(self) -> Vec<BTreeMap<String, u64>> {
        let primes = [2u64, 3, 5, 7];
        let mk = |pairs: &[(&str, u64)]| -> BTreeMap<String, u64> {
            pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
        };
        match self {
            Family::ArtinSchreier => primes
                .iter()
                .flat_map(|&p| (1..=20).filter(move |m| m % p != 0).map(move |m| mk(&[("p", p), ("m", m)])))
                .collect(),
            Family::Abrashkin => primes
                .iter()
                .flat_map(|&p| {
                    (1..=3).flat_map(move |n| {
                        (1..=20)
                            .filter(move |m| m % p != 0)
                            .map(move |m| mk(&[("p", p), ("n", n), ("m", m)]))
                    })
                })
                .collect(),
            Family::Char2Quadratic => (1..=99).step_by(2).map(|m| mk(&[("m", m)])).collect(),
            Family::QuaternionSerre => vec![mk(&[])],
            Family::CyclotomicMp => primes
                .iter()
                .flat_map(|&p| (2..=5).map(move |n| mk(&[("p", p), ("n", n)])))
                .collect(),
        }
    }

    pub fn build(self, params: &BTreeMap<String, u64>) -> Result<CatalogEntry, CatalogError> {
        if let Some(extra) = params.keys().find(|k| !self.param_names().contains(&k.as_str())) {
            return Err(CatalogError::UnknownParam { family: self.name(), param: extra.clone() });
        }
        let get = |param: &'static str| {
            params
                .get(param)
                .copied()
                .ok_or(CatalogError::MissingParam { family: self.name(), param })
        };
        match self {
            Family::ArtinSchreier => artin_schreier(get("p")?, get("m")?),
            Family::Abrashkin => abrashkin(get("p")?, get("n")?, get("m")?),
            Family::Char2Quadratic => char2_quadratic(get("m")?),
            Family::QuaternionSerre => Ok(quaternion_serre()),
            Family::CyclotomicMp => cyclotomic_mp(get("p")?, get("n")?),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The four tabulated quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quantity {
    E,
    B,
    PhiB,
    A,
}

impl Quantity {
    pub const ALL: [Quantity; 4] = [Quantity::E, Quantity::B, Quantity::PhiB, Quantity::A];

    pub fn key(self) -> &'static str {
        match self {
            Quantity::E => "e",
            Quantity::B => "b",
            Quantity::PhiB => "phi_b",
            Quantity::A => "a",
        }
    }

    pub fn from_key(key: &str) -> Result<Quantity, CatalogError> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.key() == key)
            .ok_or_else(|| CatalogError::UnknownQuantity(key.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    /// Closed form tabulated with the example.
    Published,
    /// Derived from the filtration's defining data.
    Derived,
    /// Derived value differs from the published one, which is kept for reference.
    DerivedDisagreesWithPublished { published: Rational },
    /// Supplied by the caller, overriding the family's closed form.
    Override,
}

impl Provenance {
    pub fn tag(&self) -> &'static str {
        match self {
            Provenance::Published => "published",
            Provenance::Derived => "derived",
            Provenance::DerivedDisagreesWithPublished { .. } => "derived-disagrees-with-published",
            Provenance::Override => "override",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedValue {
    pub value: Rational,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    pub family: Family,
    pub params: BTreeMap<String, u64>,
    pub filtration: RamificationFiltration,
    pub expected: BTreeMap<Quantity, ExpectedValue>,
    pub notes: Vec<String>,
}

impl CatalogEntry {
    /// `family(p=3, m=2)`.
    pub fn label(&self) -> String {
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}({})", self.family.name(), params.join(", "))
    }

    pub fn expected(&self, q: Quantity) -> &ExpectedValue {
        &self.expected[&q]
    }

    pub fn override_expected(&mut self, q: Quantity, value: Rational) {
        self.expected.insert(q, ExpectedValue { value, provenance: Provenance::Override });
    }
}

fn expected_map(e: Rational, b: Rational, phi_b: Rational, a: ExpectedValue) -> BTreeMap<Quantity, ExpectedValue> {
    let published = |value| ExpectedValue { value, provenance: Provenance::Published };
    BTreeMap::from([
        (Quantity::E, published(e)),
        (Quantity::B, published(b)),
        (Quantity::PhiB, published(phi_b)),
        (Quantity::A, a),
    ])
}

fn q_u(n: u64) -> Rational {
    Rational::from_integer(n.into())
}

fn check_prime(p: u64) -> Result<(), CatalogError> {
    if arith::is_prime(p) {
        Ok(())
    } else {
        Err(CatalogError::InvalidPrime(p))
    }
}

fn index(n: u64) -> Result<i64, CatalogError> {
    i64::try_from(n).map_err(|_| CatalogError::TooLarge(format!("index {n}")))
}

/// `G = G_0 = … = G_m` of order `q`, `G_{m+1} = {1}`.
fn single_break(p: u64, q: BigUint, m: u64) -> Result<RamificationFiltration, CatalogError> {
    Ok(RamificationFiltration::from_breaks(
        p,
        q,
        vec![(index(m)?, BigUint::one())],
        ValidationMode::Strict,
    )?)
}

/// Artin-Schreier extension `X^p − X − a`, `v(a) = −m`.
pub fn artin_schreier(p: u64, m: u64) -> Result<CatalogEntry, CatalogError> {
    check_prime(p)?;
    if m == 0 {
        return Err(CatalogError::NonpositiveM);
    }
    if m.is_multiple_of(p) {
        return Err(CatalogError::MNotCoprimeToP { m, p });
    }
    let filtration = single_break(p, BigUint::from(p), m)?;
    let a = q_u(m) * (Rational::one() - q_u(p).recip());
    Ok(CatalogEntry {
        family: Family::ArtinSchreier,
        params: BTreeMap::from([("m".to_string(), m), ("p".to_string(), p)]),
        filtration,
        expected: expected_map(
            q_u(p),
            q_u(m),
            q_u(m),
            ExpectedValue { value: a, provenance: Provenance::Published },
        ),
        notes: vec![
            format!("L = K(alpha), alpha^{p} - alpha = a with v_K(a) = -{m}, K of characteristic {p}"),
            "expected a = m(1 - 1/p)".to_string(),
        ],
    })
}

/// Extension `X^q − X − α` with `q = p^n`, `v_K(α) = −m`.
pub fn abrashkin(p: u64, n: u64, m: u64) -> Result<CatalogEntry, CatalogError> {
    check_prime(p)?;
    if n == 0 {
        return Err(CatalogError::NonpositiveN);
    }
    if m == 0 {
        return Err(CatalogError::NonpositiveM);
    }
    if m.is_multiple_of(p) {
        return Err(CatalogError::MNotCoprimeToP { m, p });
    }
    let exp = usize::try_from(n).map_err(|_| CatalogError::TooLarge(format!("n = {n}")))?;
    let q = num_traits::pow(BigUint::from(p), exp);
    let filtration = single_break(p, q.clone(), m)?;
    let q_rat = arith::from_biguint(&q);
    let a = q_u(m) * (Rational::one() - q_rat.recip());
    let mut params = BTreeMap::new();
    params.insert("m".to_string(), m);
    params.insert("n".to_string(), n);
    params.insert("p".to_string(), p);
    Ok(CatalogEntry {
        family: Family::Abrashkin,
        params,
        filtration,
        expected: expected_map(
            q_rat,
            q_u(m),
            q_u(m),
            ExpectedValue { value: a, provenance: Provenance::Published },
        ),
        notes: vec![
            format!("L = F(beta), beta^q - beta = alpha with q = {q}, v_K(alpha) = -{m}"),
            "requires v_K(alpha) > -q e(F)/(q - 1); the base field F is not modelled, so this bound is not checked".to_string(),
            "expected a = m(1 - 1/q)".to_string(),
        ],
    })
}

/// Totally ramified quadratic extension in characteristic 2 with break `m`.
pub fn char2_quadratic(m: u64) -> Result<CatalogEntry, CatalogError> {
    if m.is_multiple_of(2) {
        return Err(CatalogError::EvenBreak(m));
    }
    let filtration = single_break(2, BigUint::from(2u32), m)?;
    Ok(CatalogEntry {
        family: Family::Char2Quadratic,
        params: BTreeMap::from([("m".to_string(), m)]),
        filtration,
        expected: expected_map(
            q_u(2),
            q_u(m),
            q_u(m),
            ExpectedValue { value: q_u(m) / q_u(2), provenance: Provenance::Published },
        ),
        notes: vec!["breaks of quadratic extensions in characteristic 2 are the odd integers".to_string(), "expected a = m/2".to_string()],
    })
}

/// Quaternion extension of `Q_2(√5)`: `G_0 = G_1 ⊃ G_2 = G_3 ⊃ {1}`.
pub fn quaternion_serre() -> CatalogEntry {
    let filtration = RamificationFiltration::from_u64(2, &[16, 16, 16, 2, 2, 1])
        .expect("fixed filtration is valid");
    CatalogEntry {
        family: Family::QuaternionSerre,
        params: BTreeMap::new(),
        filtration,
        expected: expected_map(
            q_u(16),
            q_u(3),
            arith::rat(5, 4),
            ExpectedValue { value: arith::rat(17, 16), provenance: Provenance::Published },
        ),
        notes: vec![
            "orders (16, 16, 16, 2, 2, 1) follow the tabulated |G_1| = e = 2^4, G_1/G_2 = (Z/2)^3".to_string(),
            "the group is also described as the 8 unit quaternions {±1, ±i, ±j, ±k}; with |G| = 8 the tabulated phi(b) = 5/4 and a = 17/16 would not hold".to_string(),
            "G_2 = {±1}".to_string(),
        ],
    }
}

/// `L = Q_p(ζ_{p^n})` over `K = Q_p(ζ_p)`.
///
/// `Gal(L/K)` is the subgroup `1 + pZ` of `(Z/p^n)^×`, and its lower filtration
/// is `|G_u| = p^{n−k}` for `p^{k−1} <= u <= p^k − 1`, `k = 1..n`, so the breaks
/// sit at `p^k − 1`.
pub fn cyclotomic_mp(p: u64, n: u64) -> Result<CatalogEntry, CatalogError> {
    check_prime(p)?;
    if n < 2 {
        return Err(CatalogError::NTooSmall(n));
    }
    let too_large = || CatalogError::TooLarge(format!("p = {p}, n = {n}"));
    let n_us = u32::try_from(n).map_err(|_| too_large())?;
    let e = BigUint::from(p).pow(n_us - 1);
    let mut breaks = Vec::new();
    let mut break_index = BigUint::one();
    for k in 1..n_us {
        break_index *= p;
        let idx = i64::try_from(&break_index - 1u32).map_err(|_| too_large())?;
        breaks.push((idx, BigUint::from(p).pow(n_us - 1 - k)));
    }
    let filtration =
        RamificationFiltration::from_breaks(p, e.clone(), breaks, ValidationMode::Strict)?;

    let e_rat = arith::from_biguint(&e);
    let b = &e_rat - Rational::one();
    let phi_b = q_u(n - 1) * q_u(p - 1);
    let derived = &phi_b - Rational::one() + e_rat.recip();
    let published = &phi_b + Rational::one() - e_rat.recip();
    Ok(CatalogEntry {
        family: Family::CyclotomicMp,
        params: BTreeMap::from([("n".to_string(), n), ("p".to_string(), p)]),
        filtration,
        expected: expected_map(
            e_rat,
            b,
            phi_b,
            ExpectedValue {
                value: derived.clone(),
                provenance: Provenance::DerivedDisagreesWithPublished { published: published.clone() },
            },
        ),
        notes: vec![
            "lower breaks at p^k - 1, k = 1..n-1".to_string(),
            format!(
                "published a = (n-1)(p-1) + 1 - p^(1-n) = {published}; phi(b) - b/e gives (n-1)(p-1) - 1 + p^(1-n) = {derived}, which is used"
            ),
        ],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ExactMatch,
    Mismatch,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::ExactMatch => "exact-match",
            Verdict::Mismatch => "mismatch",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantityCheck {
    pub quantity: Quantity,
    pub expected: Rational,
    pub computed: Rational,
    pub provenance: Provenance,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub entry: String,
    pub checks: Vec<QuantityCheck>,
    pub notices: Vec<String>,
    pub overall: Verdict,
}

impl VerificationReport {
    pub fn is_match(&self) -> bool {
        self.overall == Verdict::ExactMatch
    }
}

/// Computed `(e, b, φ(b), a)` of a filtration; `b` and `φ(b)` are 0 when there is no break `>= 0`.
pub fn computed_quantities(filtration: &RamificationFiltration) -> BTreeMap<Quantity, Rational> {
    let transform = DepthTransform::new(filtration);
    let b = filtration.largest_break().unwrap_or(-1).max(0);
    let b_rat = Rational::from_integer(b.into());
    let phi_b = transform.phi().evaluate(&b_rat).expect("b >= 0");
    BTreeMap::from([
        (Quantity::E, arith::from_biguint(&filtration.ramification_index())),
        (Quantity::B, b_rat),
        (Quantity::PhiB, phi_b),
        (Quantity::A, transform.invariant_a().clone()),
    ])
}

pub fn verify_entry(entry: &CatalogEntry) -> VerificationReport {
    let computed = computed_quantities(&entry.filtration);
    let checks: Vec<QuantityCheck> = Quantity::ALL
        .into_iter()
        .map(|q| {
            let exp = entry.expected(q);
            let got = computed[&q].clone();
            QuantityCheck {
                quantity: q,
                verdict: if got == exp.value { Verdict::ExactMatch } else { Verdict::Mismatch },
                expected: exp.value.clone(),
                computed: got,
                provenance: exp.provenance.clone(),
            }
        })
        .collect();
    let notices = checks
        .iter()
        .filter_map(|c| match &c.provenance {
            Provenance::DerivedDisagreesWithPublished { published } => Some(format!(
                "{}: published {} = {} differs from derived {} (= phi(b) - b/e); derived value verified",
                entry.label(),
                c.quantity.key(),
                published,
                c.expected
            )),
            _ => None,
        })
        .collect();
    let overall = if checks.iter().all(|c| c.verdict == Verdict::ExactMatch) {
        Verdict::ExactMatch
    } else {
        Verdict::Mismatch
    };
    VerificationReport { entry: entry.label(), checks, notices, overall }
}

/// Every entry of every family's default grid, in a fixed order.
pub fn default_entries() -> Result<Vec<CatalogEntry>, CatalogError> {
    Family::ALL
        .into_iter()
        .flat_map(|f| f.default_grid().into_iter().map(move |params| f.build(&params)))
        .collect()
}
