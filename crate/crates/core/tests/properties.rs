mod common;

use std::sync::OnceLock;

use k3mirror::lattice::{saturation, GramLattice};
use k3mirror::matrix::Matrix;
use k3mirror::quadform::{direct_sum, gauss_signature, is_isomorphic, negate, parse_form_expression, FiniteQuadraticForm, Q};
use k3mirror::{Int, Sublattice};
use proptest::prelude::*;

use common::*;

fn pool64() -> &'static Vec<(String, FiniteQuadraticForm)> {
    static POOL: OnceLock<Vec<(String, FiniteQuadraticForm)>> = OnceLock::new();
    POOL.get_or_init(|| forms_up_to(64))
}

fn same_mod2(a: Q, b: Q) -> bool {
    ((a - b) / Q::from_integer(2)).is_integer()
}

fn add(x: &[i64], y: &[i64], orders: &[u64]) -> Vec<i64> {
    x.iter().zip(y).zip(orders).map(|((a, b), &o)| (a + b).rem_euclid(o as i64)).collect()
}

#[test]
fn q_is_quadratic_on_every_generator_form() {
    let gens = generator_symbols(64);
    assert!(gens.len() > 40);
    for (sym, order) in gens {
        let f = parse_form_expression(&sym).unwrap();
        assert_eq!(f.order(), order, "{sym}");
        let orders = f.orders().to_vec();
        let elems = f.element_coords();
        let exponent = *orders.iter().max().unwrap() as i64;
        for x in &elems {
            let qx = f.q_coords(x);
            for n in 0..=exponent {
                let nx: Vec<i64> = x.iter().zip(&orders).map(|(v, &o)| (n * v).rem_euclid(o as i64)).collect();
                assert!(same_mod2(f.q_coords(&nx), qx * Q::from_integer(n * n)), "{sym}: n={n} x={x:?}");
            }
            for y in &elems {
                let s = add(x, y, &orders);
                let rhs = qx + f.q_coords(y) + Q::from_integer(2) * f.b_coords(x, y);
                assert!(same_mod2(f.q_coords(&s), rhs), "{sym}: polarization at {x:?}, {y:?}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gauss_signature_is_additive(i in 0usize..10_000, j in 0usize..10_000) {
        let p = pool64();
        let (a, b) = (&p[i % p.len()].1, &p[j % p.len()].1);
        let s = gauss_signature(&direct_sum(a, b)).unwrap();
        prop_assert_eq!(s, (gauss_signature(a).unwrap() + gauss_signature(b).unwrap()) % 8);
        prop_assert_eq!(gauss_signature(&negate(a)).unwrap(), (8 - gauss_signature(a).unwrap()) % 8);
    }

    #[test]
    fn saturation_is_idempotent(
        (n, rows) in (1usize..=6).prop_flat_map(|n| (Just(n), prop::collection::vec(prop::collection::vec(-6i64..=6, n), 1..=n)))
    ) {
        let k = rows.len();
        let gram: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 2 * (i as i64 + 1) } else { 0 }).collect()).collect();
        let ambient: GramLattice<Int> = GramLattice::from_i64_rows(&gram).unwrap();
        let basis = Matrix::<Int>::from_i64_rows(&rows);
        prop_assume!(basis.rank() == k);
        let s = Sublattice::new(ambient, basis).unwrap();
        let sat = saturation(&s);
        let sat2 = saturation(&sat);
        prop_assert_eq!(sat.rank(), k);
        prop_assert!(sat.contains_sublattice(&s));
        prop_assert!(sat.contains_sublattice(&sat2) && sat2.contains_sublattice(&sat));
        prop_assert!(sat.is_primitive());
        prop_assert_eq!(s.is_primitive(), s.index_in_saturation() == Int::from(1));
        // the index is the gcd of the maximal minors
        prop_assert_eq!(s.index_in_saturation(), Int::from(maximal_minor_gcd(&rows)));
    }
}

#[test]
fn isomorphism_engine_agrees_with_homomorphism_oracle() {
    let forms = forms_up_to(32);
    let buckets = by_group(&forms);
    let mut pairs = 0;
    let mut isomorphic = 0;
    for idx in buckets.values() {
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a..] {
                let (ni, fi) = &forms[i];
                let (nj, fj) = &forms[j];
                let oracle = isomorphic_by_homomorphisms(fi, fj);
                assert_eq!(is_isomorphic(fi, fj), oracle, "{ni} vs {nj}");
                pairs += 1;
                isomorphic += usize::from(oracle);
            }
        }
    }
    // different groups are never isomorphic
    let keys: Vec<&Vec<u64>> = buckets.keys().collect();
    for w in keys.windows(2) {
        let (i, j) = (buckets[w[0]][0], buckets[w[1]][0]);
        assert!(!is_isomorphic(&forms[i].1, &forms[j].1));
    }
    assert!(pairs > 1000, "{pairs} pairs");
    assert!(isomorphic > forms.len());
}

#[test]
fn isomorphism_is_an_equivalence_on_a_sample() {
    let p = pool64();
    let sample: Vec<&FiniteQuadraticForm> = p.iter().step_by(7).map(|(_, f)| f).take(60).collect();
    for a in &sample {
        assert!(is_isomorphic(a, a));
        for b in &sample {
            assert_eq!(is_isomorphic(a, b), is_isomorphic(b, a));
        }
    }
}
