//! Browser bindings. Every export returns a JSON string; failures come back
//! as `{"error": "..."}` so the page never has to catch exceptions.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use orthosig::esig::{Cached, Fawcett, TimeHorizon};
use orthosig::experiments::{orthcheck, Correlation};
use orthosig::ortho::{ito_orthogonal_basis, lift_basis, BlockOrthogonalizer};
use orthosig::path::PathSpec;
use orthosig::poly::fmt_rational;
use orthosig::{TensorPoly, Word};

const MAX_WORD: usize = 5;
const MAX_PATHS: usize = 50_000;

fn wrap(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

fn terms(p: &TensorPoly) -> Vec<Value> {
    let mut all: Vec<_> = p.iter().collect();
    all.reverse();
    all.into_iter()
        .map(|(w, c)| json!({"word": w.key(), "coeff": fmt_rational(c)}))
        .collect()
}

/// Itô orthogonal basis over `d` letters, words of length at most `max_degree`.
#[wasm_bindgen]
pub fn ito_basis_table(max_degree: usize, d: usize) -> String {
    wrap((|| {
        if max_degree > 4 || !(1..=3).contains(&d) {
            return Err("choose max degree ≤ 4 and 1 ≤ d ≤ 3".to_string());
        }
        let binary = ito_orthogonal_basis(2 * max_degree, &TimeHorizon::unit());
        let basis = lift_basis(&binary, d).map_err(|e| e.to_string())?;
        let rows: Vec<Value> = basis
            .entries
            .iter()
            .filter(|e| e.key.tensor_degree() <= max_degree)
            .map(|e| {
                json!({
                    "word": e.key.key(),
                    "poly": e.poly.to_string(),
                    "sq_norm": fmt_rational(&e.sq_norm),
                })
            })
            .collect();
        Ok(Value::Array(rows))
    })())
}

/// Projects a spatial word off all shorter words in the Fawcett inner product.
#[wasm_bindgen]
pub fn orthogonalize_word(word: &str, d: usize) -> String {
    wrap((|| {
        let w: Word = word
            .trim()
            .parse()
            .map_err(|e: orthosig::Error| e.to_string())?;
        if !(1..=3).contains(&d) {
            return Err("d must be 1, 2 or 3".into());
        }
        if w.tensor_degree() > MAX_WORD {
            return Err(format!("words up to length {MAX_WORD} only"));
        }
        if w.contains_time() || w.letters().iter().any(|&a| a as usize > d) {
            return Err(format!("use letters 1..{d}"));
        }
        let inner = Fawcett::new(TimeHorizon::unit(), d);
        let cached = Cached::new(&inner);
        let ortho = BlockOrthogonalizer::for_degree(&cached, 1, d as u8, w.tensor_degree())
            .map_err(|e| e.to_string())?;
        let p = ortho
            .orthogonalize(&TensorPoly::from_word(w.clone()))
            .map_err(|e| e.to_string())?;
        Ok(json!({"word": w.key(), "poly": p.to_string(), "terms": terms(&p)}))
    })())
}

fn matrix(c: &Correlation) -> Value {
    json!({"words": c.words.iter().map(|w| w.key()).collect::<Vec<_>>(), "rho": c.rho})
}

/// Empirical correlations of the three feature sets on sampled paths.
#[wasm_bindgen]
pub fn correlation_heatmap(
    d: usize,
    level: usize,
    paths: usize,
    steps: usize,
    seed: u32,
) -> String {
    wrap((|| {
        if !(10..=MAX_PATHS).contains(&paths) {
            return Err(format!("paths must lie in 10..={MAX_PATHS}"));
        }
        if !(1..=2).contains(&d) || !(1..=4).contains(&level) {
            return Err("choose d ∈ {1, 2} and level 1..4".into());
        }
        let spec = PathSpec {
            d,
            augment_time: true,
            horizon: 1.0,
            steps,
            paths,
            seed: seed as u64,
        };
        let oc = orthcheck(&spec, level).map_err(|e| e.to_string())?;
        Ok(json!({
            "stratonovich": matrix(&oc.stratonovich),
            "ito": matrix(&oc.ito),
            "orthogonal": matrix(&oc.orthogonal),
        }))
    })())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_are_json() {
        let v: Value = serde_json::from_str(&orthogonalize_word("19", 2)).unwrap();
        assert!(v["error"].is_string());
    }
}
