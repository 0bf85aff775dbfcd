//! Monte Carlo experiments: orthogonality checks of signature features,
//! linear-SDE Taylor versus orthogonal expansion, Black-Scholes payoffs and
//! agreement of the two projection estimators.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::esig::{InnerProduct, Ito, TimeHorizon};
use crate::expansion::{
    call_payoff, fit_expansion, linear_sde_taylor, lookback_payoff, metrics, ols_fit, LinearSdeSpec,
};
use crate::ortho::{ito_orthogonal_basis, lift_basis, nondegenerate_words, OrthoBasis};
use crate::path::{
    geometric_bm, ito_features, mean, pairwise_sum, sample_paths, strat_features, strat_signature,
    FeatureMatrix, PathSpec,
};
use crate::poly::{rat, to_f64, Rational};
use crate::word::Word;

/// Test paths are drawn from seeds offset by this amount.
pub const TEST_SEED_OFFSET: u64 = 1 << 32;

/// One row of a tidy result table.
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub method: String,
    pub level: usize,
    pub paths: usize,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
}

pub fn records_csv(records: &[Record]) -> String {
    let mut out = String::from("method,N,paths,seed,metric,value\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.method, r.level, r.paths, r.seed, r.metric, r.value
        ));
    }
    out
}

pub fn records_json(records: &[Record]) -> Value {
    Value::Array(
        records
            .iter()
            .map(|r| {
                json!({"method": r.method, "N": r.level, "paths": r.paths,
                       "seed": r.seed, "metric": r.metric, "value": r.value})
            })
            .collect(),
    )
}

/// Median of `metric` for `method` at truncation `level` over all seeds.
pub fn median(records: &[Record], method: &str, metric: &str, level: usize) -> Option<f64> {
    let mut v: Vec<f64> = records
        .iter()
        .filter(|r| r.method == method && r.metric == metric && r.level == level)
        .map(|r| r.value)
        .collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len();
    Some(if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    })
}

fn spec_with_seed(spec: &PathSpec, paths: usize, seed: u64) -> PathSpec {
    PathSpec {
        paths,
        seed,
        ..spec.clone()
    }
}

pub fn horizon_of(spec: &PathSpec) -> Result<TimeHorizon> {
    // Exact horizons are needed for the basis; accept values that are
    // integers or simple fractions of a thousand.
    let scaled = (spec.horizon * 1000.0).round();
    if (scaled / 1000.0 - spec.horizon).abs() > 1e-12 {
        return Err(Error::InvalidConfig(format!(
            "horizon {} must be a multiple of 0.001",
            spec.horizon
        )));
    }
    TimeHorizon::new(rat(scaled as i64, 1000))
}

/// Itô orthogonal basis over the batch alphabet, weighted degree `≤ level`.
pub fn ito_basis_for(spec: &PathSpec, level: usize) -> Result<OrthoBasis> {
    let t = horizon_of(spec)?;
    lift_basis(&ito_orthogonal_basis(level, &t), spec.d)
}

/// Empirical correlation matrix of a set of feature columns.
#[derive(Clone, Debug)]
pub struct Correlation {
    pub words: Vec<Word>,
    pub rho: Vec<Vec<f64>>,
}

impl Correlation {
    pub fn from_columns(words: Vec<Word>, cols: &[Vec<f64>]) -> Self {
        let centred: Vec<Vec<f64>> = cols
            .iter()
            .map(|c| {
                let m = mean(c);
                c.iter().map(|x| x - m).collect()
            })
            .collect();
        let sd: Vec<f64> = centred
            .iter()
            .map(|c| pairwise_sum(&c.iter().map(|x| x * x).collect::<Vec<_>>()).sqrt())
            .collect();
        let k = cols.len();
        let mut rho = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in i..k {
                let prod: Vec<f64> = centred[i]
                    .iter()
                    .zip(&centred[j])
                    .map(|(a, b)| a * b)
                    .collect();
                let r = pairwise_sum(&prod) / (sd[i] * sd[j]);
                rho[i][j] = r;
                rho[j][i] = r;
            }
        }
        Correlation { words, rho }
    }

    /// Largest `|ρ_ij|` over `i ≠ j` with `keep(w_i, w_j)`.
    pub fn max_abs_where<F: Fn(&Word, &Word) -> bool>(&self, keep: F) -> f64 {
        let mut m: f64 = 0.0;
        for (i, wi) in self.words.iter().enumerate() {
            for (j, wj) in self.words.iter().enumerate() {
                if i != j && keep(wi, wj) {
                    m = m.max(self.rho[i][j].abs());
                }
            }
        }
        m
    }

    pub fn max_off_diagonal(&self) -> f64 {
        self.max_abs_where(|_, _| true)
    }
}

/// Empirical versus exact inner product of two orthogonal features.
#[derive(Clone, Debug)]
pub struct GramEstimate {
    pub u: Word,
    pub v: Word,
    pub estimate: f64,
    pub std_err: f64,
    pub exact: f64,
}

impl GramEstimate {
    pub fn z_score(&self) -> f64 {
        if self.std_err == 0.0 {
            if (self.estimate - self.exact).abs() < 1e-12 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.estimate - self.exact) / self.std_err
        }
    }
}

#[derive(Clone, Debug)]
pub struct OrthCheck {
    pub stratonovich: Correlation,
    pub ito: Correlation,
    pub orthogonal: Correlation,
    pub gram: Vec<GramEstimate>,
}

impl OrthCheck {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("features,row,col,rho\n");
        for (name, c) in [
            ("stratonovich", &self.stratonovich),
            ("ito", &self.ito),
            ("orthogonal", &self.orthogonal),
        ] {
            for (i, wi) in c.words.iter().enumerate() {
                for (j, wj) in c.words.iter().enumerate() {
                    out.push_str(&format!(
                        "{name},{},{},{}\n",
                        wi.key(),
                        wj.key(),
                        c.rho[i][j]
                    ));
                }
            }
        }
        out
    }
}

/// Correlations of Stratonovich, Itô and orthogonalised features over the
/// nondegenerate words of weighted degree `1..=level`, plus the empirical
/// Gram matrix of the orthogonal features against its exact value.
pub fn orthcheck(spec: &PathSpec, level: usize) -> Result<OrthCheck> {
    if !spec.augment_time {
        return Err(Error::InvalidConfig(
            "orthcheck needs time-augmented paths".into(),
        ));
    }
    let batch = sample_paths(spec.clone())?;
    let words: Vec<Word> = nondegenerate_words(spec.d, level)
        .into_iter()
        .filter(|w| !w.is_empty())
        .collect();
    let strat = strat_features(&batch, level);
    let ito = ito_features(&batch, level)?;
    let columns = |f: &FeatureMatrix| -> Result<Vec<Vec<f64>>> {
        words
            .iter()
            .map(|w| {
                f.column(w)
                    .ok_or_else(|| Error::DimensionMismatch(format!("no column {w}")))
            })
            .collect()
    };
    let basis = ito_basis_for(spec, level)?;
    let orth_cols: Vec<Vec<f64>> = words
        .iter()
        .map(|w| {
            let e = basis
                .get(w)
                .ok_or_else(|| Error::BasisMismatch(format!("no basis entry {w}")))?;
            ito.eval(&e.poly)
        })
        .collect::<Result<_>>()?;

    let inner = Ito::new(horizon_of(spec)?);
    let mut gram = Vec::new();
    for (i, u) in words.iter().enumerate() {
        for (j, v) in words.iter().enumerate().skip(i) {
            let prod: Vec<f64> = orth_cols[i]
                .iter()
                .zip(&orth_cols[j])
                .map(|(a, b)| a * b)
                .collect();
            let (estimate, std_err) = crate::path::mean_se(&prod);
            let exact: Rational =
                inner.pair(&basis.get(u).unwrap().poly, &basis.get(v).unwrap().poly)?;
            gram.push(GramEstimate {
                u: u.clone(),
                v: v.clone(),
                estimate,
                std_err,
                exact: to_f64(&exact),
            });
        }
    }
    Ok(OrthCheck {
        stratonovich: Correlation::from_columns(words.clone(), &columns(&strat)?),
        ito: Correlation::from_columns(words.clone(), &columns(&ito)?),
        orthogonal: Correlation::from_columns(words, &orth_cols),
        gram,
    })
}

#[derive(Clone, Debug)]
pub struct SdeCompare {
    pub d: usize,
    pub state_dim: usize,
    pub steps: usize,
    pub train_paths: usize,
    pub test_paths: usize,
    pub seeds: Vec<u64>,
    pub max_level: usize,
    pub horizon: f64,
}

/// Taylor expansion against the orthogonal series for the first component
/// of a linear Stratonovich SDE with random unit-norm vector fields. The
/// reference solution is the exact flow along each sampled polyline.
pub fn sde_compare(cfg: &SdeCompare) -> Result<Vec<Record>> {
    let mut out = Vec::new();
    for &seed in &cfg.seeds {
        let sde = LinearSdeSpec::random_unit(cfg.d, cfg.state_dim, seed);
        let base = PathSpec {
            d: cfg.d,
            augment_time: true,
            horizon: cfg.horizon,
            steps: cfg.steps,
            paths: cfg.train_paths,
            seed,
        };
        let train = sample_paths(base.clone())?;
        let test = sample_paths(spec_with_seed(
            &base,
            cfg.test_paths,
            seed + TEST_SEED_OFFSET,
        ))?;
        let dim = base.dim();
        let truth =
            |b: &crate::path::PathBatch| b.par_map(|_, inc| sde.solve_polyline(inc, dim, true)[0]);
        let y_train = truth(&train);
        let y_test = truth(&test);

        let sigs = test.par_map(|_, inc| strat_signature(inc, dim, true, cfg.max_level));
        let basis = ito_basis_for(&base, cfg.max_level)?;
        let model = fit_expansion(
            &y_train,
            &ito_features(&train, cfg.max_level)?,
            &basis,
            cfg.max_level,
        )?;
        let test_feats = ito_features(&test, cfg.max_level)?;
        for level in 1..=cfg.max_level {
            let taylor: Vec<f64> = sigs
                .iter()
                .map(|s| linear_sde_taylor(&sde, s, level).map(|v| v[0]))
                .collect::<Result<_>>()?;
            let orth = model.truncate(level).predict(&test_feats, &basis)?;
            for (method, pred) in [("Taylor", taylor), ("Orth", orth)] {
                let m = metrics(&pred, &y_test)?;
                for (metric, value) in [("L2", m.l2), ("R2", m.r2)] {
                    out.push(Record {
                        method: method.into(),
                        level,
                        paths: cfg.train_paths,
                        seed,
                        metric: metric.into(),
                        value,
                    });
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct BlackScholes {
    pub sigma: f64,
    pub mu: f64,
    pub s0: f64,
    pub strike: f64,
    pub horizon: f64,
    pub steps: usize,
    pub train_paths: usize,
    pub test_paths: usize,
    pub seed: u64,
    pub max_level: usize,
    pub ridge: f64,
}

/// OLS on the time-augmented Stratonovich signature (`Regr`) and the
/// orthogonal series (`Orth`) for call and lookback payoffs of geometric
/// Brownian motion, expanded in the driving Brownian motion. Methods are
/// reported as `Regr/call`, `Orth/lookback`, and so on.
pub fn black_scholes(cfg: &BlackScholes) -> Result<Vec<Record>> {
    let base = PathSpec {
        d: 1,
        augment_time: true,
        horizon: cfg.horizon,
        steps: cfg.steps,
        paths: cfg.train_paths,
        seed: cfg.seed,
    };
    let train = sample_paths(base.clone())?;
    let test = sample_paths(spec_with_seed(
        &base,
        cfg.test_paths,
        cfg.seed + TEST_SEED_OFFSET,
    ))?;
    let payoffs = |b: &crate::path::PathBatch| -> Result<(Vec<f64>, Vec<f64>)> {
        let prices: Vec<Vec<f64>> = (0..b.len())
            .map(|i| geometric_bm(b, i, cfg.s0, cfg.sigma, cfg.mu))
            .collect::<Result<_>>()?;
        Ok((
            prices.iter().map(|p| call_payoff(p, cfg.strike)).collect(),
            prices.iter().map(|p| lookback_payoff(p)).collect(),
        ))
    };
    let (call_train, look_train) = payoffs(&train)?;
    let (call_test, look_test) = payoffs(&test)?;
    let basis = ito_basis_for(&base, cfg.max_level)?;
    let ito_train = ito_features(&train, cfg.max_level)?;
    let ito_test = ito_features(&test, cfg.max_level)?;
    let strat_train = strat_features(&train, cfg.max_level);
    let strat_test = strat_features(&test, cfg.max_level);

    let mut out = Vec::new();
    for (name, y_train, y_test) in [
        ("call", &call_train, &call_test),
        ("lookback", &look_train, &look_test),
    ] {
        let model = fit_expansion(y_train, &ito_train, &basis, cfg.max_level)?;
        for level in 1..=cfg.max_level {
            let regr = ols_fit(y_train, &strat_train, level, cfg.ridge)?.predict(&strat_test)?;
            let orth = model.truncate(level).predict(&ito_test, &basis)?;
            for (method, pred) in [("Regr", regr), ("Orth", orth)] {
                let m = metrics(&pred, y_test)?;
                for (metric, value) in [("L2", m.l2), ("R2", m.r2)] {
                    out.push(Record {
                        method: format!("{method}/{name}"),
                        level,
                        paths: cfg.train_paths,
                        seed: cfg.seed,
                        metric: metric.into(),
                        value,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Relative distance `‖OLS − expansion‖ / ‖target‖` on held-out paths for a
/// target in the span of the degree-3 Itô basis over two letters.
pub fn estimator_agreement(
    paths: usize,
    test_paths: usize,
    steps: usize,
    seed: u64,
) -> Result<f64> {
    let level = 3;
    let base = PathSpec {
        d: 2,
        augment_time: true,
        horizon: 1.0,
        steps,
        paths,
        seed,
    };
    let basis = ito_basis_for(&base, level)?;
    let weights = [
        ("", 0.5),
        ("1", 1.0),
        ("2", -0.7),
        ("12", 0.8),
        ("01", 0.4),
        ("111", 0.3),
        ("221", -0.5),
    ];
    let target = |f: &FeatureMatrix| -> Result<Vec<f64>> {
        let mut y = vec![0.0; f.rows()];
        for (key, c) in weights {
            let e = basis
                .get(&crate::word::w(key))
                .ok_or_else(|| Error::BasisMismatch(format!("no basis entry {key}")))?;
            for (yi, v) in y.iter_mut().zip(f.eval(&e.poly)?) {
                *yi += c * v;
            }
        }
        Ok(y)
    };
    let train = sample_paths(base.clone())?;
    let test = sample_paths(spec_with_seed(&base, test_paths, seed + TEST_SEED_OFFSET))?;
    let (ito_train, ito_test) = (ito_features(&train, level)?, ito_features(&test, level)?);
    let y_train = target(&ito_train)?;
    let y_test = target(&ito_test)?;
    let orth = fit_expansion(&y_train, &ito_train, &basis, level)?.predict(&ito_test, &basis)?;
    let regr = ols_fit(&y_train, &strat_features(&train, level), level, 0.0)?
        .predict(&strat_features(&test, level))?;
    let diff: Vec<f64> = orth
        .iter()
        .zip(&regr)
        .map(|(a, b)| (a - b).powi(2))
        .collect();
    let norm: Vec<f64> = y_test.iter().map(|v| v * v).collect();
    Ok((pairwise_sum(&diff) / pairwise_sum(&norm)).sqrt())
}
