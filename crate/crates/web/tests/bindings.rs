use std::collections::BTreeMap;

use orthosig_web::{correlation_heatmap, ito_basis_table, orthogonalize_word};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn basis_table_rows() {
    let v = parse(ito_basis_table(3, 1));
    let row = v
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["word"] == "001")
        .unwrap();
    assert_eq!(row["poly"], "001 − 1/2·01 + 1/12·1");
    assert_eq!(row["sq_norm"], "1/720");
    let lifted = parse(ito_basis_table(2, 2));
    assert!(lifted.as_array().unwrap().iter().any(|r| r["word"] == "02"));
    assert!(parse(ito_basis_table(9, 1))["error"].is_string());
}

#[test]
fn orthogonalized_word_terms() {
    let v = parse(orthogonalize_word("11112", 2));
    let got: BTreeMap<String, String> = v["terms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| {
            (
                t["word"].as_str().unwrap().into(),
                t["coeff"].as_str().unwrap().into(),
            )
        })
        .collect();
    let want: BTreeMap<String, String> = [
        ("11112", "1/1"),
        ("211", "-1/80"),
        ("112", "-29/80"),
        ("2", "5/96"),
    ]
    .into_iter()
    .map(|(a, b)| (a.into(), b.into()))
    .collect();
    assert_eq!(got, want);
    assert!(parse(orthogonalize_word("0", 2))["error"].is_string());
    assert!(parse(orthogonalize_word("111111", 2))["error"].is_string());
}

#[test]
fn heatmap_shapes() {
    let v = parse(correlation_heatmap(2, 2, 500, 10, 3));
    for k in ["stratonovich", "ito", "orthogonal"] {
        let n = v[k]["words"].as_array().unwrap().len();
        let rho = v[k]["rho"].as_array().unwrap();
        assert_eq!(rho.len(), n);
        for (i, row) in rho.iter().enumerate() {
            assert!((row[i].as_f64().unwrap() - 1.0).abs() < 1e-9);
        }
    }
    assert!(parse(correlation_heatmap(2, 2, 5, 10, 3))["error"].is_string());
}
