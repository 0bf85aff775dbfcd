use orthosig::esig::{Fawcett, TimeHorizon};
use orthosig::naturality::{
    audit, build_system, rank_certify, AnsatzSolution, DeltaMonomial, Pairing,
};
use orthosig::ortho::BlockOrthogonalizer;
use orthosig::poly::rat;
use orthosig::{Rational, TensorPoly, Word};

fn solved(n: usize) -> AnsatzSolution {
    let (sys, rep) = audit(n, false).unwrap();
    assert!(rep.consistent, "n={n}");
    AnsatzSolution::from_system(&sys, rep.solution.as_ref().expect("unique"))
}

#[test]
fn degree_four_unique_solution() {
    let sol = solved(4);
    let p = |arcs: &[(u8, u8)]| Pairing::from_arcs(4, arcs).unwrap();
    for a in [(1, 2), (2, 3), (3, 4)] {
        assert_eq!(sol.weight(&p(&[a])), rat(-1, 6));
    }
    assert_eq!(sol.weight(&p(&[(1, 2), (3, 4)])), rat(1, 24));
    assert_eq!(sol.weight(&p(&[(1, 4), (2, 3)])), rat(1, 12));
    for (q, c) in &sol.terms {
        if q.is_crossing() || (!q.is_island() && !q.is_identity()) {
            assert_eq!(*c, Rational::from_integer(0.into()), "{q}");
        }
    }
}

#[test]
fn noncrossing_degree_four_agrees() {
    let (sys, rep) = audit(4, true).unwrap();
    assert_eq!(sys.cols(), 5);
    let x = rep.solution.unwrap();
    let full = solved(4);
    for (p, c) in sys.vars.iter().zip(&x) {
        assert_eq!(*c, full.weight(p), "{p}");
    }
}

#[test]
fn degree_six_ranks() {
    let (sys, rep) = audit(6, false).unwrap();
    assert_eq!(sys.cols(), 75);
    assert_eq!((rep.rank_a, rep.rank_aug), (75, 76));
    assert!(rep.certificate.unwrap().verify(&sys));
}

#[test]
#[ignore = "largest system; run with --ignored"]
fn degree_seven_ranks() {
    let (sys, rep) = audit(7, false).unwrap();
    assert_eq!(sys.cols(), 231);
    assert_eq!((rep.rank_a, rep.rank_aug), (231, 232));
}

#[test]
fn degree_five_contradiction_triple() {
    let sys = build_system(5, true).unwrap();
    let x3 = sys
        .var_index(&Pairing::from_arcs(5, &[(3, 4)]).unwrap())
        .unwrap();
    let y5 = sys
        .var_index(&Pairing::from_arcs(5, &[(2, 5), (3, 4)]).unwrap())
        .unwrap();
    let eq = |pairs: Vec<(u8, u8)>| sys.find(&DeltaMonomial::new(pairs)).unwrap().clone();
    let first = eq(vec![(1, 6), (2, 5), (3, 4)]);
    let second = eq(vec![(1, 6), (2, 5), (3, 4), (7, 8)]);
    let third = eq(vec![(1, 6), (2, 7), (3, 4), (5, 8)]);
    let coeffs = |e: &orthosig::naturality::Equation| {
        let get = |j| {
            e.coeffs
                .iter()
                .find(|(k, _)| *k == j)
                .map(|(_, c)| c.clone())
        };
        (get(x3), get(y5), e.coeffs.len(), e.constant.clone())
    };
    // y5 + x3/4 = 0
    assert_eq!(
        coeffs(&first),
        (Some(rat(1, 4)), Some(rat(1, 1)), 2, rat(0, 1))
    );
    // y5/4 + x3/12 = 0
    assert_eq!(
        coeffs(&second),
        (Some(rat(1, 12)), Some(rat(1, 4)), 2, rat(0, 1))
    );
    // 1/48 + x3/6 = 0
    assert_eq!(coeffs(&third), (Some(rat(1, 6)), None, 1, rat(1, 48)));

    let sub = orthosig::naturality::AnsatzSystem {
        equations: vec![first, second, third],
        ..sys.clone()
    };
    let rep = rank_certify(&sub);
    assert!(!rep.consistent);
    assert_eq!(rep.certificate.unwrap().rows.len(), 3);
    assert!(!rank_certify(&sys).consistent);
}

#[test]
fn degree_four_matches_block_orthogonalization() {
    let sol = solved(4);
    let t = TimeHorizon::unit();
    for d in [2u8, 3] {
        let inner = Fawcett::new(t.clone(), d as usize);
        let ortho = BlockOrthogonalizer::for_degree(&inner, 1, d, 4).unwrap();
        for w in Word::all_of_length(1, d, 4) {
            let exact = ortho
                .orthogonalize(&TensorPoly::from_word(w.clone()))
                .unwrap();
            assert_eq!(sol.evaluate(&w).unwrap(), exact, "d={d} w={w}");
        }
    }
}
