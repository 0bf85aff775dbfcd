//! Orthogonal series expansion, OLS signature regression, truncated
//! stochastic Taylor expansion of linear SDEs, and error metrics.

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ortho::OrthoBasis;
use crate::path::{mean, FeatureKind, FeatureMatrix, SigTensor};
use crate::poly::{fmt_rational, to_f64};
use crate::word::{Letter, Word};

/// Orthogonal series `Σ_w c_w ⟨p̂_w, Ŝ⟩` estimated by Monte Carlo.
#[derive(Clone, Debug)]
pub struct ExpansionModel {
    pub basis_id: String,
    pub level: usize,
    /// `(key, coefficient, exact squared norm)` per basis entry used.
    pub terms: Vec<(Word, f64, f64)>,
}

fn basis_id(basis: &OrthoBasis) -> String {
    format!(
        "{}/d={}/T={}",
        basis.inner,
        basis.d,
        fmt_rational(&basis.horizon)
    )
}

/// Basis entries of weighted degree `≤ level`, evaluated on Itô features.
pub fn orthogonal_features(
    features: &FeatureMatrix,
    basis: &OrthoBasis,
    level: usize,
) -> Result<Vec<(Word, f64, Vec<f64>)>> {
    if features.kind != FeatureKind::Ito {
        return Err(Error::BasisMismatch(
            "orthogonal features need Itô features".into(),
        ));
    }
    if basis.d != features.d {
        return Err(Error::BasisMismatch(format!(
            "basis over {} letters, features over {}",
            basis.d, features.d
        )));
    }
    if (to_f64(&basis.horizon) - features.horizon).abs() > 1e-12 * features.horizon.max(1.0) {
        return Err(Error::BasisMismatch(format!(
            "basis horizon {} differs from sampled horizon {}",
            fmt_rational(&basis.horizon),
            features.horizon
        )));
    }
    basis
        .entries
        .iter()
        .filter(|e| e.key.weighted_degree() <= level && !e.sq_norm.is_zero())
        .map(|e| Ok((e.key.clone(), to_f64(&e.sq_norm), features.eval(&e.poly)?)))
        .collect()
}

/// Coefficients `E[Y ⟨p̂_w, Ŝ⟩] / (p̂_w, p̂_w)` by sample means.
///
/// For `w ≠ ∅` the feature has mean zero, so `Y` is centred by its sample
/// mean first; this leaves the estimand unchanged and removes the `E[Y]²`
/// part of the Monte Carlo variance.
pub fn fit_expansion(
    y: &[f64],
    features: &FeatureMatrix,
    basis: &OrthoBasis,
    level: usize,
) -> Result<ExpansionModel> {
    if y.len() != features.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{} targets for {} paths",
            y.len(),
            features.rows()
        )));
    }
    let ybar = mean(y);
    let centred: Vec<f64> = y.iter().map(|v| v - ybar).collect();
    let feats = orthogonal_features(features, basis, level)?;
    let terms = feats
        .into_par_iter()
        .map(|(key, norm, phi)| {
            let c = if key.is_empty() {
                ybar
            } else {
                let prod: Vec<f64> = centred.iter().zip(&phi).map(|(a, b)| a * b).collect();
                mean(&prod) / norm
            };
            (key, c, norm)
        })
        .collect();
    Ok(ExpansionModel {
        basis_id: basis_id(basis),
        level,
        terms,
    })
}

impl ExpansionModel {
    pub fn coefficient(&self, w: &Word) -> Option<f64> {
        self.terms.iter().find(|t| &t.0 == w).map(|t| t.1)
    }

    /// The same model restricted to weighted degree `≤ level`.
    pub fn truncate(&self, level: usize) -> ExpansionModel {
        ExpansionModel {
            basis_id: self.basis_id.clone(),
            level: level.min(self.level),
            terms: self
                .terms
                .iter()
                .filter(|t| t.0.weighted_degree() <= level)
                .cloned()
                .collect(),
        }
    }

    pub fn predict(&self, features: &FeatureMatrix, basis: &OrthoBasis) -> Result<Vec<f64>> {
        if basis_id(basis) != self.basis_id {
            return Err(Error::BasisMismatch(format!(
                "{} vs {}",
                basis_id(basis),
                self.basis_id
            )));
        }
        let mut out = vec![0.0; features.rows()];
        for (key, c, _) in &self.terms {
            let e = basis
                .get(key)
                .ok_or_else(|| Error::BasisMismatch(format!("no basis entry {key}")))?;
            let phi = features.eval(&e.poly)?;
            out.par_iter_mut().zip(&phi).for_each(|(o, p)| *o += c * p);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        let coeffs: serde_json::Map<String, Value> = self
            .terms
            .iter()
            .map(|(w, c, _)| (w.key(), json!(c)))
            .collect();
        json!({"basis_id": self.basis_id, "N": self.level, "coefficients": coeffs})
    }
}

/// `Σ_w c¹_w c²_w (p̂_w, p̂_w)`, the series estimate of `E[Y₁ Y₂]`.
pub fn covariance_series(a: &ExpansionModel, b: &ExpansionModel) -> Result<f64> {
    if a.basis_id != b.basis_id {
        return Err(Error::BasisMismatch(format!(
            "{} vs {}",
            a.basis_id, b.basis_id
        )));
    }
    let mut acc = 0.0;
    for (w, ca, norm) in &a.terms {
        if let Some(cb) = b.coefficient(w) {
            acc += ca * cb * norm;
        }
    }
    Ok(acc)
}

/// Least-squares fit on raw signature coordinates.
#[derive(Clone, Debug)]
pub struct RegressionModel {
    pub words: Vec<Word>,
    pub beta: Vec<f64>,
    pub ridge: f64,
    /// Set when the design was rank deficient and a tiny ridge was added.
    pub fallback: bool,
    /// Ratio of extreme diagonal entries of the triangular factor.
    pub condition: f64,
}

const RANK_TOL: f64 = 1e-10;
const FALLBACK_RIDGE: f64 = 1e-8;

fn qr_solve(x: &DMatrix<f64>, y: &DVector<f64>) -> (DVector<f64>, f64) {
    let qr = x.clone().qr();
    let r = qr.r();
    let diag: Vec<f64> = r.diagonal().iter().map(|v| v.abs()).collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let qty = qr.q().transpose() * y;
    let beta = r
        .solve_upper_triangular(&qty)
        .unwrap_or_else(|| DVector::zeros(x.ncols()));
    (beta, if min > 0.0 { max / min } else { f64::INFINITY })
}

fn ridge_solve(cols: &[Vec<f64>], y: &[f64], ridge: f64) -> (Vec<f64>, f64) {
    let m = y.len();
    let p = cols.len();
    let scale: Vec<f64> = cols
        .iter()
        .map(|c| {
            let n = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n > 0.0 {
                n
            } else {
                1.0
            }
        })
        .collect();
    let extra = if ridge > 0.0 { p } else { 0 };
    let mut x = DMatrix::<f64>::zeros(m + extra, p);
    for (j, c) in cols.iter().enumerate() {
        for (i, v) in c.iter().enumerate() {
            x[(i, j)] = v / scale[j];
        }
        if ridge > 0.0 {
            x[(m + j, j)] = ridge.sqrt() / scale[j];
        }
    }
    let mut rhs = DVector::<f64>::zeros(m + extra);
    for (i, v) in y.iter().enumerate() {
        rhs[i] = *v;
    }
    let (gamma, cond) = qr_solve(&x, &rhs);
    (gamma.iter().zip(&scale).map(|(g, s)| g / s).collect(), cond)
}

/// Minimizes `‖Φβ − Y‖² + λ‖β‖²` over the columns of tensor degree `≤ level`.
pub fn ols_fit(
    y: &[f64],
    features: &FeatureMatrix,
    level: usize,
    ridge: f64,
) -> Result<RegressionModel> {
    if features.rows() == 0 {
        return Err(Error::InvalidConfig(
            "regression needs at least one path".into(),
        ));
    }
    if y.len() != features.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{} targets for {} paths",
            y.len(),
            features.rows()
        )));
    }
    if ridge < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "ridge {ridge} must be non-negative"
        )));
    }
    let idx: Vec<usize> = (0..features.cols())
        .filter(|&j| features.words[j].tensor_degree() <= level)
        .collect();
    let cols: Vec<Vec<f64>> = idx
        .iter()
        .map(|&j| features.data.iter().map(|r| r[j]).collect())
        .collect();
    let wide = ridge == 0.0 && cols.len() > y.len();
    let (mut beta, mut cond) = if wide {
        (Vec::new(), f64::INFINITY)
    } else {
        ridge_solve(&cols, y, ridge)
    };
    let mut fallback = false;
    let mut used = ridge;
    let deficient = wide || cond > 1.0 / RANK_TOL || beta.iter().any(|b| !b.is_finite());
    if ridge == 0.0 && deficient {
        fallback = true;
        used = FALLBACK_RIDGE;
        (beta, cond) = ridge_solve(&cols, y, used);
    }
    Ok(RegressionModel {
        words: idx.iter().map(|&j| features.words[j].clone()).collect(),
        beta,
        ridge: used,
        fallback,
        condition: cond,
    })
}

impl RegressionModel {
    pub fn predict(&self, features: &FeatureMatrix) -> Result<Vec<f64>> {
        let idx: Vec<usize> = self
            .words
            .iter()
            .map(|w| {
                features
                    .column_index(w)
                    .ok_or_else(|| Error::DimensionMismatch(format!("no feature column for {w}")))
            })
            .collect::<Result<_>>()?;
        Ok(features
            .data
            .par_iter()
            .map(|r| idx.iter().zip(&self.beta).map(|(&j, b)| b * r[j]).sum())
            .collect())
    }

    pub fn to_json(&self) -> Value {
        let coeffs: serde_json::Map<String, Value> = self
            .words
            .iter()
            .zip(&self.beta)
            .map(|(w, b)| (w.key(), json!(b)))
            .collect();
        json!({
            "ridge": self.ridge,
            "fallback": self.fallback,
            "condition": self.condition,
            "coefficients": coeffs,
        })
    }
}

/// `dY = Σ_α A_α Y ∘ dB^α`, `Y_0 = y0`.
#[derive(Clone, Debug)]
pub struct LinearSdeSpec {
    pub y0: Vec<f64>,
    /// One `n × n` matrix per spatial letter `1..=d`.
    pub a: Vec<DMatrix<f64>>,
}

impl LinearSdeSpec {
    pub fn new(y0: Vec<f64>, a: Vec<DMatrix<f64>>) -> Result<Self> {
        let n = y0.len();
        if a.iter().any(|m| m.nrows() != n || m.ncols() != n) {
            return Err(Error::DimensionMismatch(format!(
                "matrices must be {n}×{n}"
            )));
        }
        Ok(LinearSdeSpec { y0, a })
    }

    /// Gaussian matrices rescaled to joint Frobenius norm 1.
    pub fn random_unit(d: usize, n: usize, seed: u64) -> Self {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut a: Vec<DMatrix<f64>> = (0..d)
            .map(|_| DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng)))
            .collect();
        let norm = a.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt();
        for m in &mut a {
            *m /= norm;
        }
        let mut y0 = vec![0.0; n];
        y0[0] = 1.0;
        LinearSdeSpec { y0, a }
    }

    pub fn d(&self) -> usize {
        self.a.len()
    }

    fn check_sig(&self, sig: &SigTensor) -> Result<()> {
        let spatial = sig.dim - sig.augmented as usize;
        if spatial != self.d() {
            return Err(Error::DimensionMismatch(format!(
                "{} driving letters, signature over {spatial}",
                self.d()
            )));
        }
        Ok(())
    }

    /// Solution on a piecewise-linear driver: product of the exact flows
    /// `exp(Σ_α A_α Δ^α)` of each segment.
    pub fn solve_polyline(&self, increments: &[f64], dim: usize, augmented: bool) -> Vec<f64> {
        let n = self.y0.len();
        let off = augmented as usize;
        let mut y = DVector::from_vec(self.y0.clone());
        for step in increments.chunks(dim) {
            let mut gen = DMatrix::<f64>::zeros(n, n);
            for (k, m) in self.a.iter().enumerate() {
                gen += m * step[k + off];
            }
            y = gen.exp() * y;
        }
        y.iter().copied().collect()
    }
}

/// `Σ_{n ≤ N} Σ_{α_1..α_n} A_{α_n} ⋯ A_{α_1} y0 ⟨α_1 ⋯ α_n, S⟩`.
///
/// The matrix of the first letter acts first: the innermost integral in
/// `⟨α_1 ⋯ α_n, S⟩` is the earliest one.
pub fn linear_sde_taylor(spec: &LinearSdeSpec, sig: &SigTensor, level: usize) -> Result<Vec<f64>> {
    spec.check_sig(sig)?;
    if level > sig.level() {
        return Err(Error::DimensionMismatch(format!(
            "Taylor level {level} above signature truncation {}",
            sig.level()
        )));
    }
    let y0 = DVector::from_vec(spec.y0.clone());
    let mut out = y0.clone();
    // depth-first over words; `v` is A_{α_k} ⋯ A_{α_1} y0 for the prefix
    let mut stack: Vec<(Vec<Letter>, DVector<f64>)> = vec![(Vec::new(), y0)];
    while let Some((prefix, v)) = stack.pop() {
        if prefix.len() == level {
            continue;
        }
        for (k, m) in spec.a.iter().enumerate() {
            let mut w = prefix.clone();
            w.push(k as Letter + 1);
            let next = m * &v;
            out += &next * sig.coord(&Word::new(w.clone()))?;
            stack.push((w, next));
        }
    }
    Ok(out.iter().copied().collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metrics {
    pub l2: f64,
    pub r2: f64,
}

/// Root-mean-square error and `1 − SSE/SST`.
pub fn metrics(predictions: &[f64], targets: &[f64]) -> Result<Metrics> {
    if predictions.len() != targets.len() || targets.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions for {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    let m = mean(targets);
    let sse: Vec<f64> = predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t).powi(2))
        .collect();
    let sst: Vec<f64> = targets.iter().map(|t| (t - m).powi(2)).collect();
    let sse = crate::path::pairwise_sum(&sse);
    let sst = crate::path::pairwise_sum(&sst);
    if sst == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(Metrics {
        l2: (sse / targets.len() as f64).sqrt(),
        r2: 1.0 - sse / sst,
    })
}

/// `(S_T − K)⁺`.
pub fn call_payoff(prices: &[f64], strike: f64) -> f64 {
    (prices.last().copied().unwrap_or(0.0) - strike).max(0.0)
}

/// `max_t S_t` on the grid.
pub fn lookback_payoff(prices: &[f64]) -> f64 {
    prices.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::strat_signature;

    #[test]
    fn metrics_examples() {
        let t = [1.0, 2.0, 3.0, 4.0];
        let m = metrics(&t, &t).unwrap();
        assert_eq!((m.l2, m.r2), (0.0, 1.0));
        let c = metrics(&[2.5; 4], &t).unwrap();
        assert!(c.r2.abs() < 1e-15);
        assert!(matches!(
            metrics(&[1.0, 1.0], &[2.0, 2.0]),
            Err(Error::ZeroVariance)
        ));
    }

    #[test]
    fn taylor_trivial_cases() {
        let spec = LinearSdeSpec::new(vec![1.0, 2.0], vec![DMatrix::zeros(2, 2)]).unwrap();
        let sig = strat_signature(&[0.4, -0.3], 1, false, 3);
        assert_eq!(linear_sde_taylor(&spec, &sig, 3).unwrap(), vec![1.0, 2.0]);
        let spec = LinearSdeSpec::random_unit(1, 2, 3);
        assert_eq!(linear_sde_taylor(&spec, &sig, 0).unwrap(), spec.y0);
    }

    #[test]
    fn scalar_taylor_is_exponential_series() {
        let sigma = 0.7;
        let spec = LinearSdeSpec::new(vec![2.0], vec![DMatrix::from_element(1, 1, sigma)]).unwrap();
        let inc = [0.3, -0.1, 0.5];
        let b: f64 = inc.iter().sum();
        let sig = strat_signature(&inc, 1, false, 4);
        let got = linear_sde_taylor(&spec, &sig, 4).unwrap()[0];
        let want: f64 = 2.0
            * (0..=4)
                .map(|k| (sigma * b).powi(k) / (1..=k).product::<i32>().max(1) as f64)
                .sum::<f64>();
        assert!((got - want).abs() < 1e-12);
        let exact = spec.solve_polyline(&inc, 1, false)[0];
        assert!((exact - 2.0 * (sigma * b).exp()).abs() < 1e-12);
    }

    #[test]
    fn noncommuting_taylor_converges_to_flow() {
        let spec = LinearSdeSpec::random_unit(2, 3, 11);
        let inc = [0.2, -0.4, 0.1, 0.3, -0.5, 0.2];
        let sig = strat_signature(&inc, 2, false, 12);
        let taylor = linear_sde_taylor(&spec, &sig, 12).unwrap();
        let exact = spec.solve_polyline(&inc, 2, false);
        for (a, b) in taylor.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-10, "{a} {b}");
        }
    }

    #[test]
    fn payoffs() {
        assert_eq!(call_payoff(&[1.0, 1.3], 1.0), 1.3 - 1.0);
        assert_eq!(call_payoff(&[1.0, 0.8], 1.0), 0.0);
        assert_eq!(lookback_payoff(&[1.0, 1.4, 0.9]), 1.4);
    }
}
