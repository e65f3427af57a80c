use std::collections::BTreeMap;

use herbrand_core::arith::{self, Rational};
use herbrand_core::catalog::{Family, Quantity};
use herbrand_core::depth::{Depth, DepthTransform};
use herbrand_core::extspec::{self, ExtensionSpecDocument, OutputFormat};
use herbrand_core::filtration::{Classification, RamificationFiltration};
use herbrand_core::herbrand::{self, PiecewiseLinear};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

/// `(p, orders)` for a strictly valid filtration with up to four wild breaks.
fn arb_filtration() -> impl Strategy<Value = (u64, Vec<u64>)> {
    (
        prop::sample::select(vec![2u64, 3, 5, 7]),
        1u64..4,
        1u64..12,
        prop::collection::vec((1usize..6, 1u32..3), 0..5),
    )
        .prop_map(|(p, unram, tame, wild)| {
            let tame = if tame % p == 0 { tame + 1 } else { tame };
            let wild_order: u64 = wild.iter().map(|&(_, k)| p.pow(k)).product();
            let g0 = tame * wild_order;
            let mut orders = vec![unram * g0, g0];
            let mut current = wild_order;
            for (run, k) in wild {
                orders.extend(std::iter::repeat_n(current, run));
                current /= p.pow(k);
            }
            orders.push(current);
            (p, orders)
        })
}

fn filtration(p: u64, orders: &[u64]) -> RamificationFiltration {
    RamificationFiltration::from_u64(p, orders).expect("generator yields valid filtrations")
}

fn positive_rational() -> impl Strategy<Value = Rational> {
    (1i64..4000, 1i64..60).prop_map(|(n, d)| arith::rat(n, d))
}

fn depth(r: &Rational) -> Depth {
    Depth::new(r.clone()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn tame_preserves_depth_and_wild_raises_it((p, orders) in arb_filtration(), r in positive_rational()) {
        let t = DepthTransform::new(&filtration(p, &orders));
        let lambda = t.parameter_depth(&depth(&r));
        match t.classification() {
            Classification::WildlyRamified => {
                prop_assert!(lambda.value() > &r);
                prop_assert!(t.invariant_a().is_positive());
            }
            _ => {
                prop_assert_eq!(lambda.value(), &r);
                prop_assert!(t.invariant_a().is_zero());
            }
        }
    }

    #[test]
    fn tail_identity((p, orders) in arb_filtration(), k in positive_rational()) {
        let t = DepthTransform::new(&filtration(p, &orders));
        let r = t.tail_threshold() + k;
        let d = depth(&r);
        let a = t.invariant_a().clone();
        prop_assert_eq!(t.parameter_depth(&d).into_inner(), &r + &a);
        prop_assert_eq!(t.depth_ratio(&d).unwrap(), Rational::one() + &a / &r);
        prop_assert_eq!(t.depth_gap(&d), a);
    }

    #[test]
    fn ratio_nonincreasing_and_gap_nondecreasing((p, orders) in arb_filtration(), r in positive_rational(), s in positive_rational()) {
        let t = DepthTransform::new(&filtration(p, &orders));
        let (lo, hi) = if r <= s { (r, s) } else { (s, r) };
        prop_assert!(t.depth_ratio(&depth(&lo)).unwrap() >= t.depth_ratio(&depth(&hi)).unwrap());
        prop_assert!(t.depth_gap(&depth(&lo)) <= t.depth_gap(&depth(&hi)));
        prop_assert!(t.parameter_depth(&depth(&lo)).value() <= t.parameter_depth(&depth(&hi)).value());
    }

    #[test]
    fn min_depth_is_the_infimum((p, orders) in arb_filtration(), eps in (1i64..50, 1i64..200).prop_map(|(n, d)| arith::rat(n, d))) {
        let t = DepthTransform::new(&filtration(p, &orders));
        let r = t.min_depth_for_ratio(&eps).unwrap().into_inner();
        if r.is_zero() {
            let tiny = arith::rat(1, 1_000_000);
            prop_assert!(t.depth_ratio(&depth(&tiny)).unwrap() - Rational::one() <= eps);
        } else {
            prop_assert_eq!(t.depth_ratio(&depth(&r)).unwrap() - Rational::one(), eps.clone());
            let below = &r - &r / arith::int(1000);
            prop_assert!(t.depth_ratio(&depth(&below)).unwrap() - Rational::one() > eps.clone());
            if r >= t.tail_threshold() {
                prop_assert_eq!(r, t.invariant_a() / &eps);
            }
        }
    }

    #[test]
    fn phi_matches_oracle_and_inverts((p, orders) in arb_filtration(), x in positive_rational()) {
        let f = filtration(p, &orders);
        let phi = herbrand::phi_from_filtration(&f);
        for u in 0..=(f.last_index().max(0) as u64 + 10) {
            prop_assert_eq!(phi.evaluate(&arith::int(u as i64)).unwrap(), herbrand::phi_integer_oracle(&f, u));
        }
        let psi = phi.inverse().unwrap();
        prop_assert_eq!(psi.evaluate(&phi.evaluate(&x).unwrap()).unwrap(), x.clone());
        let id = PiecewiseLinear::compose(&psi, &phi).unwrap();
        prop_assert_eq!(id, PiecewiseLinear::identity());
    }

    #[test]
    fn orders_and_breaks_documents_agree((p, orders) in arb_filtration()) {
        let f = filtration(p, &orders);
        let as_orders = ExtensionSpecDocument::Orders {
            residue_char: p,
            orders: orders.iter().map(|&o| BigUint::from(o)).collect(),
        };
        let as_breaks = ExtensionSpecDocument::Breaks {
            residue_char: p,
            group_order: f.group_order().clone(),
            breaks: f.drops().iter().map(|d| (d.index, d.order_after.clone())).collect(),
        };
        prop_assert_eq!(as_orders.resolve().unwrap(), f.clone());
        prop_assert_eq!(as_breaks.resolve().unwrap(), f);
    }
}

fn arb_document() -> impl Strategy<Value = ExtensionSpecDocument> {
    let orders = arb_filtration().prop_map(|(p, orders)| ExtensionSpecDocument::Orders {
        residue_char: p,
        orders: orders.into_iter().map(BigUint::from).collect(),
    });
    let breaks = arb_filtration().prop_map(|(p, orders)| {
        let f = filtration(p, &orders);
        ExtensionSpecDocument::Breaks {
            residue_char: p,
            group_order: f.group_order().clone(),
            breaks: f.drops().iter().map(|d| (d.index, d.order_after.clone())).collect(),
        }
    });
    let catalog = (
        prop::sample::select(Family::ALL.to_vec()),
        any::<prop::sample::Index>(),
        prop::collection::btree_map(
            prop::sample::select(vec![Quantity::E, Quantity::B, Quantity::PhiB, Quantity::A]),
            (-500i64..500, 1i64..50),
            0..4,
        ),
    )
        .prop_map(|(family, pick, expected)| {
            let grid = family.default_grid();
            let params = &grid[pick.index(grid.len())];
            ExtensionSpecDocument::Catalog {
                family: family.name().to_string(),
                params: params.iter().map(|(k, v)| (k.clone(), BigInt::from(*v))).collect(),
                expected: expected
                    .into_iter()
                    .map(|(q, (n, d))| (q.key().to_string(), arith::rat(n, d)))
                    .collect::<BTreeMap<_, _>>(),
            }
        });
    prop_oneof![orders, breaks, catalog]
}

proptest! {
    #[test]
    fn documents_round_trip(doc in arb_document()) {
        for format in [OutputFormat::Text, OutputFormat::Json] {
            let emitted = doc.emit(format);
            prop_assert_eq!(extspec::parse(&emitted).unwrap(), doc.clone(), "{}", emitted);
        }
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..1024)) {
        if let Err(e) = extspec::parse_bytes(&bytes) {
            let (line, column) = e.position();
            prop_assert!(line >= 1 && column >= 1);
        }
    }

    #[test]
    fn near_miss_text_never_panics(lines in prop::collection::vec(
        prop::sample::select(vec![
            "p = 2", "p = 4", "p=", "orders = 16 16 16 2 2 1", "orders = 4 2 3 1", "orders =",
            "group = 16", "break 1 -> 2", "break 3 -> 1", "break -> 1", "break 1 2",
            "family = artin_schreier", "family = nope", "param p = 3", "param m = 2", "param m = -2",
            "expect a = 4/3", "expect a = 1/0", "expect zz = 1", "# comment", "", "   ", "{", "}",
        ]),
        0..8,
    )) {
        let text = lines.join("\n");
        if let Err(e) = extspec::parse(&text) {
            let (line, column) = e.position();
            prop_assert!(line >= 1 && line <= lines.len() + 1 && column >= 1, "{}: {:?}", text, e);
        }
    }
}
