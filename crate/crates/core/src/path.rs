//! Sampled Brownian paths and their truncated signatures.
//!
//! Paths are never stored in bulk: path `i` of a batch is regenerated on
//! demand from a ChaCha8 stream keyed by `(seed, i)`, so any partition of
//! the batch across workers sees bit-identical increments.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hoffman::strat_to_ito_map;
use crate::poly::{to_f64, TensorPoly};
use crate::word::{Letter, Word, TIME};

#[derive(Clone, Debug, PartialEq)]
pub struct PathSpec {
    pub d: usize,
    pub augment_time: bool,
    pub horizon: f64,
    pub steps: usize,
    pub paths: usize,
    pub seed: u64,
}

impl PathSpec {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidConfig("d must be at least 1".into()));
        }
        if self.steps == 0 || self.paths == 0 {
            return Err(Error::InvalidConfig(
                "steps and paths must be at least 1".into(),
            ));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "horizon {} must be positive",
                self.horizon
            )));
        }
        Ok(())
    }

    /// Coordinates per increment: the spatial ones plus time if augmented.
    pub fn dim(&self) -> usize {
        self.d + self.augment_time as usize
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }
}

#[derive(Clone, Debug)]
pub struct PathBatch {
    spec: PathSpec,
}

/// Generates a batch of Brownian paths.
pub fn sample_paths(spec: PathSpec) -> Result<PathBatch> {
    spec.validate()?;
    Ok(PathBatch { spec })
}

impl PathBatch {
    pub fn spec(&self) -> &PathSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.spec.paths
    }

    pub fn is_empty(&self) -> bool {
        self.spec.paths == 0
    }

    /// Increments of path `i`, row-major `steps × dim`; with time
    /// augmentation coordinate 0 is the time increment.
    pub fn increments(&self, i: usize) -> Vec<f64> {
        let s = &self.spec;
        let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
        rng.set_stream(i as u64);
        let dt = s.dt();
        let sd = dt.sqrt();
        let dim = s.dim();
        let mut out = Vec::with_capacity(s.steps * dim);
        for _ in 0..s.steps {
            if s.augment_time {
                out.push(dt);
            }
            for _ in 0..s.d {
                let z: f64 = StandardNormal.sample(&mut rng);
                out.push(z * sd);
            }
        }
        out
    }

    /// Cumulative positions of path `i`, `(steps + 1) × dim`, starting at 0.
    pub fn positions(&self, i: usize) -> Vec<f64> {
        let dim = self.spec.dim();
        let inc = self.increments(i);
        let mut out = vec![0.0; dim];
        for step in inc.chunks(dim) {
            let last = out.len() - dim;
            let next: Vec<f64> = (0..dim).map(|k| out[last + k] + step[k]).collect();
            out.extend(next);
        }
        out
    }

    /// Terminal value of spatial coordinate `k` (1-based letter).
    pub fn terminal(&self, i: usize, letter: Letter) -> f64 {
        let dim = self.spec.dim();
        let col = self.column_of(letter);
        self.increments(i).chunks(dim).map(|s| s[col]).sum()
    }

    fn column_of(&self, letter: Letter) -> usize {
        if self.spec.augment_time {
            letter as usize
        } else {
            letter as usize - 1
        }
    }

    /// Applies `f(i, increments)` to every path in parallel, keeping order.
    pub fn par_map<T: Send, F: Fn(usize, &[f64]) -> T + Sync>(&self, f: F) -> Vec<T> {
        (0..self.spec.paths)
            .into_par_iter()
            .map(|i| f(i, &self.increments(i)))
            .collect()
    }
}

/// Truncated signature with dense levels; entry `(i_1..i_k)` of level `k`
/// sits at the big-endian base-`dim` index.
#[derive(Clone, Debug, PartialEq)]
pub struct SigTensor {
    pub dim: usize,
    pub augmented: bool,
    pub levels: Vec<Vec<f64>>,
}

impl SigTensor {
    pub fn identity(dim: usize, augmented: bool, level: usize) -> Self {
        let levels = (0..=level)
            .map(|k| {
                let mut v = vec![0.0; dim.pow(k as u32)];
                if k == 0 {
                    v[0] = 1.0;
                }
                v
            })
            .collect();
        SigTensor {
            dim,
            augmented,
            levels,
        }
    }

    pub fn level(&self) -> usize {
        self.levels.len() - 1
    }

    /// Multiplies on the right by `exp(Δ)` (Chen's relation for one linear
    /// segment), truncated at the top level.
    pub fn extend(&mut self, delta: &[f64]) {
        let n = self.level();
        let dim = self.dim;
        let mut acc = Vec::new();
        for k in (1..=n).rev() {
            // Horner: ((Δ/k + S_1) ⊗ Δ/(k−1) + S_2) ⊗ ... ⊗ Δ + S_k
            acc.clear();
            acc.extend(delta.iter().map(|x| x / k as f64));
            for j in 1..k {
                let scale = 1.0 / (k - j) as f64;
                let prev = std::mem::take(&mut acc);
                acc.reserve(prev.len() * dim);
                for (a, s) in prev.iter().zip(&self.levels[j]) {
                    let base = (a + s) * scale;
                    acc.extend(delta.iter().map(|x| base * x));
                }
            }
            for (x, a) in self.levels[k].iter_mut().zip(&acc) {
                *x += a;
            }
        }
    }

    fn index(&self, w: &Word) -> Result<usize> {
        let mut idx = 0;
        for &l in w.letters() {
            let c = match (self.augmented, l) {
                (true, l) => l as usize,
                (false, TIME) => return Err(Error::TimeLetterNotAllowed(w.to_string())),
                (false, l) => l as usize - 1,
            };
            if c >= self.dim {
                return Err(Error::LetterOutOfRange {
                    letter: l,
                    d: self.dim - self.augmented as usize,
                });
            }
            idx = idx * self.dim + c;
        }
        Ok(idx)
    }

    /// `⟨w, S⟩`.
    pub fn coord(&self, w: &Word) -> Result<f64> {
        let k = w.tensor_degree();
        if k > self.level() {
            return Err(Error::DimensionMismatch(format!(
                "word {w} above truncation {}",
                self.level()
            )));
        }
        Ok(self.levels[k][self.index(w)?])
    }

    /// `⟨p, S⟩` for a polynomial.
    pub fn eval(&self, p: &TensorPoly) -> Result<f64> {
        p.iter().map(|(w, c)| Ok(to_f64(c) * self.coord(w)?)).sum()
    }

    pub fn flat(&self) -> Vec<f64> {
        self.levels.iter().flatten().copied().collect()
    }
}

/// Stratonovich signature of the piecewise-linear path with the given
/// increments (row-major, `dim` per segment).
pub fn strat_signature(increments: &[f64], dim: usize, augmented: bool, level: usize) -> SigTensor {
    let mut s = SigTensor::identity(dim, augmented, level);
    for delta in increments.chunks(dim) {
        s.extend(delta);
    }
    s
}

/// Number of words of tensor degree `≤ n` over `dim` letters.
pub fn word_count(dim: usize, n: usize) -> usize {
    (0..=n).map(|k| dim.pow(k as u32)).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureKind {
    Stratonovich,
    Ito,
}

impl FeatureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Stratonovich => "stratonovich",
            FeatureKind::Ito => "ito",
        }
    }
}

/// Per-path signature coordinates, one column per word of degree `≤ N` in
/// word order.
#[derive(Clone, Debug)]
pub struct FeatureMatrix {
    pub d: usize,
    pub horizon: f64,
    pub words: Vec<Word>,
    pub kind: FeatureKind,
    pub data: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn rows(&self) -> usize {
        self.data.len()
    }

    pub fn cols(&self) -> usize {
        self.words.len()
    }

    pub fn column_index(&self, w: &Word) -> Option<usize> {
        self.words.binary_search(w).ok()
    }

    pub fn column(&self, w: &Word) -> Option<Vec<f64>> {
        let j = self.column_index(w)?;
        Some(self.data.iter().map(|r| r[j]).collect())
    }

    /// `⟨p, ·⟩` per row for a polynomial supported on the columns.
    pub fn eval(&self, p: &TensorPoly) -> Result<Vec<f64>> {
        let terms: Vec<(usize, f64)> = p
            .iter()
            .map(|(w, c)| {
                self.column_index(w)
                    .map(|j| (j, to_f64(c)))
                    .ok_or_else(|| Error::DimensionMismatch(format!("no feature column for {w}")))
            })
            .collect::<Result<_>>()?;
        Ok(self
            .data
            .par_iter()
            .map(|r| terms.iter().map(|&(j, c)| c * r[j]).sum())
            .collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self
            .words
            .iter()
            .map(|w| {
                if w.is_empty() {
                    "e".to_string()
                } else {
                    w.key()
                }
            })
            .collect::<Vec<_>>()
            .join(",");
        out.push('\n');
        for r in &self.data {
            let row: Vec<String> = r.iter().map(|x| x.to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn feature_words(batch: &PathBatch, level: usize) -> Vec<Word> {
    let s = batch.spec();
    if s.augment_time {
        Word::all_up_to(0, s.d as Letter, level)
    } else {
        Word::all_up_to(1, s.d as Letter, level)
    }
}

/// Stratonovich signature coordinates of every path.
pub fn strat_features(batch: &PathBatch, level: usize) -> FeatureMatrix {
    let s = batch.spec();
    let dim = s.dim();
    let aug = s.augment_time;
    let data = batch.par_map(|_, inc| strat_signature(inc, dim, aug, level).flat());
    FeatureMatrix {
        d: s.d,
        horizon: s.horizon,
        words: feature_words(batch, level),
        kind: FeatureKind::Stratonovich,
        data,
    }
}

/// Itô signature coordinates `⟨w, Ŝ⟩ = ⟨log w, S⟩` of every path.
pub fn ito_features(batch: &PathBatch, level: usize) -> Result<FeatureMatrix> {
    let s = batch.spec();
    if !s.augment_time {
        return Err(Error::InvalidConfig(
            "Itô features need a time-augmented batch".into(),
        ));
    }
    let words = feature_words(batch, level);
    let conv = strat_to_ito_map(s.d, level);
    // flat indices coincide with positions in `words`
    let sparse: Vec<Vec<(usize, f64)>> = words
        .iter()
        .map(|w| {
            conv.column(w)
                .iter()
                .map(|(v, c)| (words.binary_search(v).expect("closed under log"), to_f64(c)))
                .collect()
        })
        .collect();
    let dim = s.dim();
    let data = batch.par_map(|_, inc| {
        let flat = strat_signature(inc, dim, true, level).flat();
        sparse
            .iter()
            .map(|col| col.iter().map(|&(j, c)| c * flat[j]).sum())
            .collect()
    });
    Ok(FeatureMatrix {
        d: s.d,
        horizon: s.horizon,
        words,
        kind: FeatureKind::Ito,
        data,
    })
}

/// Geometric Brownian motion `S_t = S_0 exp(σ B_t + (μ − σ²/2) t)` on the
/// grid of path `i`, driven by spatial coordinate 1.
pub fn geometric_bm(batch: &PathBatch, i: usize, s0: f64, sigma: f64, mu: f64) -> Result<Vec<f64>> {
    let s = batch.spec();
    if sigma < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "volatility {sigma} must be non-negative"
        )));
    }
    if s.d != 1 {
        return Err(Error::InvalidConfig(
            "geometric BM needs a scalar driver".into(),
        ));
    }
    let dim = s.dim();
    let col = batch.column_of(1);
    let dt = s.dt();
    let mut b = 0.0;
    let mut out = Vec::with_capacity(s.steps + 1);
    out.push(s0);
    for (k, step) in batch.increments(i).chunks(dim).enumerate() {
        b += step[col];
        let t = (k + 1) as f64 * dt;
        out.push(s0 * (sigma * b + (mu - 0.5 * sigma * sigma) * t).exp());
    }
    Ok(out)
}

/// Sum by recursive halving; the split points depend only on the length,
/// so the result is independent of how the values were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

pub fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let m = mean(xs);
    let dev: Vec<f64> = xs.iter().map(|x| (x - m).powi(2)).collect();
    let var = pairwise_sum(&dev) / (xs.len().max(2) - 1) as f64;
    (m, (var / xs.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::w;

    fn spec(d: usize, aug: bool, steps: usize, paths: usize) -> PathSpec {
        PathSpec {
            d,
            augment_time: aug,
            horizon: 1.0,
            steps,
            paths,
            seed: 7,
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(sample_paths(spec(2, true, 0, 1)).is_err());
        assert!(sample_paths(spec(0, true, 1, 1)).is_err());
    }

    #[test]
    fn time_row_is_uniform() {
        let b = sample_paths(spec(1, true, 4, 1)).unwrap();
        let pos = b.positions(0);
        let times: Vec<f64> = pos.chunks(2).map(|c| c[0]).collect();
        assert_eq!(times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn deterministic_per_index() {
        let a = sample_paths(spec(2, false, 10, 5)).unwrap();
        let b = sample_paths(PathSpec {
            paths: 50,
            ..spec(2, false, 10, 5)
        })
        .unwrap();
        assert_eq!(a.increments(3), b.increments(3));
        assert_ne!(a.increments(3), a.increments(4));
    }

    #[test]
    fn one_segment_level_two() {
        let s = strat_signature(&[0.3, -1.2], 2, false, 3);
        assert!((s.coord(&w("12")).unwrap() - 0.3 * -1.2 / 2.0).abs() < 1e-15);
        assert!((s.coord(&w("111")).unwrap() - 0.027 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn shuffle_identity_on_polyline() {
        let inc = [0.3, -1.2, 0.5, 0.1, -0.7, 0.9];
        let s = strat_signature(&inc, 2, false, 2);
        let lhs = s.coord(&w("1")).unwrap() * s.coord(&w("2")).unwrap();
        let rhs = s.coord(&w("12")).unwrap() + s.coord(&w("21")).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn feature_columns_match_word_count() {
        let b = sample_paths(spec(2, true, 5, 3)).unwrap();
        let f = ito_features(&b, 3).unwrap();
        assert_eq!(f.cols(), word_count(3, 3));
        assert_eq!(f.cols(), 40);
        let ns = sample_paths(spec(2, false, 5, 3)).unwrap();
        assert!(ito_features(&ns, 2).is_err());
    }

    #[test]
    fn pairwise_sum_is_accurate() {
        let xs = vec![0.1; 1000];
        assert!((pairwise_sum(&xs) - 100.0).abs() < 1e-12);
    }
}
