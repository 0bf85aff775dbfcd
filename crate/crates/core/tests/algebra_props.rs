use std::collections::BTreeMap;

use proptest::prelude::*;

use orthosig::esig::{
    binary_inner, inner_fawcett, inner_fawcett_via_product, inner_ito, inner_ito_via_product,
    TimeHorizon,
};
use orthosig::hoffman::{hoffman_exp, hoffman_log, ito_to_strat_map, strat_to_ito_map};
use orthosig::poly::rat;
use orthosig::shuffle::{quasi_shuffle, shuffle};
use orthosig::{Letter, Rational, TensorPoly, Word};

fn word(max_letter: Letter, max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0..=max_letter, 0..=max_len).prop_map(Word::new)
}

fn tpoly(max_letter: Letter, max_len: usize) -> impl Strategy<Value = TensorPoly> {
    prop::collection::vec((word(max_letter, max_len), -4i64..=4, 1i64..=3), 1..=3)
        .prop_map(|terms| TensorPoly::from_terms(terms.into_iter().map(|(w, p, q)| (w, rat(p, q)))))
}

// Interleavings counted by choosing which positions of the result hold `u`.
fn shuffle_oracle(u: &Word, v: &Word) -> BTreeMap<Word, usize> {
    let (a, b) = (u.letters(), v.letters());
    let n = a.len() + b.len();
    let mut out = BTreeMap::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != a.len() {
            continue;
        }
        let (mut i, mut j) = (0, 0);
        let mut x = Vec::with_capacity(n);
        for k in 0..n {
            if mask >> k & 1 == 1 {
                x.push(a[i]);
                i += 1;
            } else {
                x.push(b[j]);
                j += 1;
            }
        }
        *out.entry(Word::new(x)).or_insert(0) += 1;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shuffle_agrees_with_position_oracle(u in word(2, 4), v in word(2, 4)) {
        let p = shuffle(&TensorPoly::from_word(u.clone()), &TensorPoly::from_word(v.clone()));
        let oracle = shuffle_oracle(&u, &v);
        prop_assert_eq!(p.len(), oracle.len());
        for (w, c) in oracle {
            prop_assert_eq!(p.coeff(&w), rat(c as i64, 1));
        }
    }

    #[test]
    fn products_are_commutative_associative_unital(a in tpoly(2, 3), b in tpoly(2, 3), c in tpoly(2, 2)) {
        let one = TensorPoly::one();
        for op in [shuffle as fn(&TensorPoly, &TensorPoly) -> TensorPoly, quasi_shuffle] {
            prop_assert_eq!(op(&a, &b), op(&b, &a));
            prop_assert_eq!(op(&op(&a, &b), &c), op(&a, &op(&b, &c)));
            prop_assert_eq!(op(&a, &one), a.clone());
        }
    }

    #[test]
    fn products_add_degrees(u in word(3, 4), v in word(3, 4)) {
        let n = u.tensor_degree() + v.tensor_degree();
        let p = shuffle(&TensorPoly::from_word(u.clone()), &TensorPoly::from_word(v.clone()));
        prop_assert!(p.is_homogeneous(n));
        let q = quasi_shuffle(&TensorPoly::from_word(u), &TensorPoly::from_word(v));
        prop_assert!(q.words().all(|w| w.tensor_degree() <= n));
    }

    #[test]
    fn hoffman_maps_are_inverse_morphisms(a in tpoly(2, 3), b in tpoly(2, 3)) {
        prop_assert_eq!(hoffman_log(&hoffman_exp(&a)), a.clone());
        prop_assert_eq!(hoffman_exp(&hoffman_log(&a)), a.clone());
        prop_assert_eq!(hoffman_exp(&shuffle(&a, &b)), quasi_shuffle(&hoffman_exp(&a), &hoffman_exp(&b)));
    }

    #[test]
    fn hoffman_preserves_weighted_degree(u in word(2, 5)) {
        let img = hoffman_log(&TensorPoly::from_word(u.clone()));
        prop_assert!(img.words().all(|w| w.weighted_degree() == u.weighted_degree()));
    }

    #[test]
    fn fast_inner_products_match_products(a in tpoly(2, 3), b in tpoly(2, 3), t in 1i64..=3) {
        let t = TimeHorizon::new(rat(t, 2)).unwrap();
        prop_assert_eq!(inner_ito(&a, &b, &t), inner_ito_via_product(&a, &b, &t));
        prop_assert_eq!(inner_ito(&a, &b, &t), inner_ito(&b, &a, &t));
        let strip = |p: &TensorPoly| TensorPoly::from_terms(
            p.iter().filter(|(w, _)| !w.contains_time()).map(|(w, c)| (w.clone(), c.clone())));
        let (sa, sb) = (strip(&a), strip(&b));
        prop_assert_eq!(
            inner_fawcett(&sa, &sb, &t, 2).unwrap(),
            inner_fawcett_via_product(&sa, &sb, &t, 2).unwrap()
        );
    }

    #[test]
    fn ito_norm_is_nonnegative(a in tpoly(2, 3)) {
        prop_assert!(inner_ito(&a, &a, &TimeHorizon::unit()) >= Rational::from_integer(0.into()));
    }

    #[test]
    fn binary_inner_matches_general(u in word(1, 5), v in word(1, 5)) {
        prop_assume!(!u.ends_in_time() && !v.ends_in_time());
        let t = TimeHorizon::unit();
        let exact = inner_ito(&TensorPoly::from_word(u.clone()), &TensorPoly::from_word(v.clone()), &t);
        prop_assert_eq!(binary_inner(&u, &v, &t).unwrap(), exact);
    }

    #[test]
    fn conversion_matrices_apply_the_maps(a in tpoly(2, 4)) {
        let (l, e) = (strat_to_ito_map(2, 4), ito_to_strat_map(2, 4));
        prop_assert_eq!(l.apply(&a), hoffman_log(&a));
        prop_assert_eq!(e.apply(&l.apply(&a)), a);
    }

    #[test]
    fn word_order_is_total_and_degree_first(u in word(3, 4), v in word(3, 4)) {
        if u.tensor_degree() < v.tensor_degree() {
            prop_assert!(u < v);
        }
        prop_assert_eq!(u.cmp(&v), v.cmp(&u).reverse());
    }
}
