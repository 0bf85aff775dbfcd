use orthosig::esig::{inner_fawcett, inner_ito, TimeHorizon};
use orthosig::expansion::{covariance_series, fit_expansion, metrics, ols_fit};
use orthosig::experiments::ito_basis_for;
use orthosig::ortho::{ito_orthogonal_basis, stratonovich_basis};
use orthosig::path::{
    geometric_bm, ito_features, mean_se, sample_paths, strat_features, strat_signature, PathSpec,
};
use orthosig::poly::to_f64;
use orthosig::word::w;
use orthosig::{TensorPoly, Word};

fn spec(d: usize, augment_time: bool, steps: usize, paths: usize, seed: u64) -> PathSpec {
    PathSpec {
        d,
        augment_time,
        horizon: 1.0,
        steps,
        paths,
        seed,
    }
}

#[test]
fn terminal_variance_is_horizon() {
    let b = sample_paths(spec(1, false, 4, 100_000, 1)).unwrap();
    let sq: Vec<f64> = (0..b.len()).map(|i| b.terminal(i, 1).powi(2)).collect();
    let (m, se) = mean_se(&sq);
    assert!((m - 1.0).abs() < 3.0 * se, "{m} ± {se}");
}

#[test]
fn two_segment_signature_matches_quadrature() {
    let segs = [[0.3, -0.7], [1.1, 0.4]];
    let inc: Vec<f64> = segs.iter().flatten().copied().collect();
    let sig = strat_signature(&inc, 2, false, 3);
    // nested left-point sums on a fine subdivision
    let k = 20_000;
    let mut x = [0.0f64; 2];
    let mut s1 = [0.0f64; 2];
    let mut s2 = [[0.0f64; 2]; 2];
    let mut s3 = [[[0.0f64; 2]; 2]; 2];
    for seg in &segs {
        for _ in 0..k {
            let dx = [seg[0] / k as f64, seg[1] / k as f64];
            for a in 0..2 {
                for b in 0..2 {
                    for c in 0..2 {
                        s3[a][b][c] += s2[a][b] * dx[c];
                    }
                }
            }
            for a in 0..2 {
                for b in 0..2 {
                    s2[a][b] += s1[a] * dx[b];
                }
            }
            for a in 0..2 {
                s1[a] += dx[a];
                x[a] += dx[a];
            }
        }
    }
    for a in 0..2u8 {
        assert!((sig.coord(&Word::new(vec![a + 1])).unwrap() - s1[a as usize]).abs() < 1e-9);
        for b in 0..2u8 {
            let v = sig.coord(&Word::new(vec![a + 1, b + 1])).unwrap();
            assert!((v - s2[a as usize][b as usize]).abs() < 1e-3);
            for c in 0..2u8 {
                let v = sig.coord(&Word::new(vec![a + 1, b + 1, c + 1])).unwrap();
                assert!((v - s3[a as usize][b as usize][c as usize]).abs() < 1e-3);
            }
        }
    }
}

#[test]
fn ito_columns_of_time_words_and_martingales() {
    let b = sample_paths(spec(1, true, 10, 20_000, 2)).unwrap();
    let ito = ito_features(&b, 3).unwrap();
    let strat = strat_features(&b, 3);
    for v in ito.column(&w("000")).unwrap() {
        assert!((v - 1.0 / 6.0).abs() < 1e-12);
    }
    let c11 = ito.column(&w("11")).unwrap();
    for (a, s) in c11.iter().zip(strat.column(&w("11")).unwrap()) {
        assert!((a - (s - 0.5)).abs() < 1e-12);
    }
    let (m, se) = mean_se(&c11);
    assert!(m.abs() < 3.0 * se);
    assert_eq!(ito.column(&w("1")), strat.column(&w("1")));
    assert!(ito_features(&sample_paths(spec(1, false, 10, 10, 2)).unwrap(), 2).is_err());
}

#[test]
fn mean_features_converge_to_expected_signatures() {
    let t = TimeHorizon::unit();
    let b = sample_paths(spec(1, true, 50, 20_000, 3)).unwrap();
    let ito = ito_features(&b, 4).unwrap();
    for (j, word) in ito.words.iter().enumerate() {
        let col: Vec<f64> = ito.data.iter().map(|r| r[j]).collect();
        let (m, se) = mean_se(&col);
        let exact = to_f64(&inner_ito(
            &TensorPoly::from_word(word.clone()),
            &TensorPoly::one(),
            &t,
        ));
        assert!(
            (m - exact).abs() <= 4.0 * se + 1e-9,
            "{word}: {m} vs {exact}"
        );
    }
    let b = sample_paths(spec(2, false, 200, 20_000, 4)).unwrap();
    let strat = strat_features(&b, 4);
    for (j, word) in strat.words.iter().enumerate() {
        let col: Vec<f64> = strat.data.iter().map(|r| r[j]).collect();
        let (m, se) = mean_se(&col);
        let exact = to_f64(
            &inner_fawcett(
                &TensorPoly::from_word(word.clone()),
                &TensorPoly::one(),
                &t,
                2,
            )
            .unwrap(),
        );
        assert!(
            (m - exact).abs() <= 4.0 * se + 1e-9,
            "{word}: {m} vs {exact}"
        );
    }
}

#[test]
fn refinement_shrinks_area_error() {
    let fine = 256;
    let b = sample_paths(spec(2, false, fine, 400, 5)).unwrap();
    let area = |inc: &[f64], group: usize| {
        let coarse: Vec<f64> = inc
            .chunks(2 * group)
            .flat_map(|c| {
                let (mut a, mut b) = (0.0, 0.0);
                for s in c.chunks(2) {
                    a += s[0];
                    b += s[1];
                }
                [a, b]
            })
            .collect();
        let s = strat_signature(&coarse, 2, false, 2);
        s.coord(&w("12")).unwrap() - s.coord(&w("21")).unwrap()
    };
    let median_err = |group: usize| {
        let mut e: Vec<f64> = (0..b.len())
            .map(|i| {
                let inc = b.increments(i);
                (area(&inc, group) - area(&inc, 1)).abs()
            })
            .collect();
        e.sort_by(f64::total_cmp);
        e[e.len() / 2]
    };
    let (e16, e8, e4) = (median_err(16), median_err(8), median_err(4));
    assert!(e8 < e16 && e4 < e8, "{e16} {e8} {e4}");
}

#[test]
fn geometric_bm_moments() {
    let b = sample_paths(spec(1, false, 20, 50_000, 6)).unwrap();
    assert!(geometric_bm(&b, 0, 1.0, 0.0, 0.0)
        .unwrap()
        .iter()
        .all(|&s| s == 1.0));
    assert!(geometric_bm(&b, 0, 1.0, -0.1, 0.0).is_err());
    let st: Vec<f64> = (0..b.len())
        .map(|i| *geometric_bm(&b, i, 1.0, 0.3, 0.1).unwrap().last().unwrap())
        .collect();
    let (m, se) = mean_se(&st);
    assert!((m - 0.1f64.exp()).abs() < 4.0 * se);
}

#[test]
fn expansion_of_simple_targets() {
    let t = TimeHorizon::unit();
    let basis = ito_orthogonal_basis(4, &t);
    let b = sample_paths(spec(1, true, 20, 40_000, 7)).unwrap();
    let ito = ito_features(&b, 4).unwrap();
    let bt: Vec<f64> = (0..b.len()).map(|i| b.terminal(i, 1)).collect();

    let y: Vec<f64> = bt.iter().map(|x| x * x).collect();
    let m = fit_expansion(&y, &ito, &basis, 4).unwrap();
    assert!((m.coefficient(&w("")).unwrap() - 1.0).abs() < 0.03);
    assert!(
        (m.coefficient(&w("11")).unwrap() - 2.0).abs() < 0.1,
        "{:?}",
        m.terms
    );
    assert!(m.coefficient(&w("1")).unwrap().abs() < 0.05);

    let c = fit_expansion(&vec![2.5; b.len()], &ito, &basis, 4).unwrap();
    assert!(c.terms.iter().all(|(k, v, _)| if k.is_empty() {
        *v == 2.5
    } else {
        v.abs() < 1e-12
    }));

    let direct = fit_expansion(&y, &ito, &basis, 2).unwrap();
    let truncated = m.truncate(2);
    assert_eq!(direct.terms, truncated.terms);

    let lin = fit_expansion(&bt, &ito, &basis, 4).unwrap();
    assert!((covariance_series(&lin, &lin).unwrap() - 1.0).abs() < 0.03);

    let other = ito_orthogonal_basis(3, &TimeHorizon::new(orthosig::poly::rat(2, 1)).unwrap());
    assert!(fit_expansion(&y, &ito, &other, 3).is_err());
}

#[test]
fn independent_components_have_zero_covariance_series() {
    let s = spec(2, true, 10, 20_000, 8);
    let basis = ito_basis_for(&s, 2).unwrap();
    let b = sample_paths(s).unwrap();
    let ito = ito_features(&b, 2).unwrap();
    let y1: Vec<f64> = (0..b.len()).map(|i| b.terminal(i, 1)).collect();
    let y2: Vec<f64> = (0..b.len()).map(|i| b.terminal(i, 2)).collect();
    let m1 = fit_expansion(&y1, &ito, &basis, 2).unwrap();
    let m2 = fit_expansion(&y2, &ito, &basis, 2).unwrap();
    let prod: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| a * b).collect();
    let (_, se) = mean_se(&prod);
    assert!(covariance_series(&m1, &m2).unwrap().abs() < 4.0 * se);
}

#[test]
fn ols_recovers_linear_targets() {
    let b = sample_paths(spec(2, false, 10, 500, 9)).unwrap();
    let f = strat_features(&b, 2);
    let y: Vec<f64> = f
        .data
        .iter()
        .map(|r| {
            0.5 + 2.0 * r[f.column_index(&w("1")).unwrap()] - r[f.column_index(&w("12")).unwrap()]
        })
        .collect();
    let model = ols_fit(&y, &f, 2, 0.0).unwrap();
    assert!(!model.fallback);
    let pred = model.predict(&f).unwrap();
    assert!(metrics(&pred, &y).unwrap().l2 < 1e-8);

    let few = sample_paths(spec(2, false, 10, 5, 9)).unwrap();
    let ff = strat_features(&few, 2);
    let m = ols_fit(&[1.0, 2.0, 0.0, 1.0, 3.0], &ff, 2, 0.0).unwrap();
    assert!(m.fallback);
}

#[test]
fn stratonovich_basis_reproduces_ito_coordinates() {
    let s = spec(2, true, 20, 20_000, 10);
    let basis = ito_basis_for(&s, 3).unwrap();
    let strat_basis = stratonovich_basis(&basis);
    let b = sample_paths(s).unwrap();
    let ito = ito_features(&b, 3).unwrap();
    let strat = strat_features(&b, 3);
    let keys: Vec<Word> = basis.keys().into_iter().filter(|k| !k.is_empty()).collect();
    let mut cols = Vec::new();
    for k in &keys {
        let a = ito.eval(&basis.get(k).unwrap().poly).unwrap();
        let c = strat.eval(&strat_basis.get(k).unwrap().poly).unwrap();
        for (x, y) in a.iter().zip(&c) {
            assert!((x - y).abs() < 1e-9 * (1.0 + x.abs()));
        }
        cols.push(c);
    }
    let corr = orthosig::experiments::Correlation::from_columns(keys, &cols);
    assert!(corr.max_off_diagonal() < 0.1, "{}", corr.max_off_diagonal());
}

#[test]
fn ito_products_estimate_the_inner_product() {
    let t = TimeHorizon::unit();
    let b = sample_paths(spec(2, true, 50, 40_000, 11)).unwrap();
    let ito = ito_features(&b, 3).unwrap();
    for (u, v) in [
        ("11", "11"),
        ("12", "21"),
        ("1", "01"),
        ("011", "1"),
        ("111", "1"),
        ("2", "102"),
    ] {
        let (cu, cv) = (ito.column(&w(u)).unwrap(), ito.column(&w(v)).unwrap());
        let prod: Vec<f64> = cu.iter().zip(&cv).map(|(a, b)| a * b).collect();
        let (m, se) = mean_se(&prod);
        let exact = to_f64(&inner_ito(
            &TensorPoly::from_word(w(u)),
            &TensorPoly::from_word(w(v)),
            &t,
        ));
        assert!(
            (m - exact).abs() < 4.0 * se + 1e-9,
            "{u},{v}: {m} vs {exact}"
        );
    }
}
