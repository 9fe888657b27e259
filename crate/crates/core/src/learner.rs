//! Log-linear model over logical forms, trained online from denotations.
//!
//! p(z | x) ∝ exp(θ·φ(x, z)) over a finite beam Z. Feedback is a successor
//! state y; the loss marginalizes over every z in Z whose denotation is y.
//! One AdaGrad step is taken per labeled example.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::features::{join_key, split_key, FeatureVector, Featurizer, LfParts, Variant};
use crate::lf::LogicalForm;

pub const DEFAULT_ADAGRAD_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub eta: f64,
    /// Coefficient of the (λ/2)‖θ‖² penalty.
    pub l2: f64,
    pub adagrad_eps: f64,
}

impl LearnerConfig {
    /// Memorize needs a large step to fit a pair in one update.
    pub fn for_variant(variant: Variant) -> Self {
        LearnerConfig {
            eta: match variant {
                Variant::Memorize => 1.0,
                Variant::Half | Variant::Full => 0.1,
            },
            l2: 0.0,
            adagrad_eps: DEFAULT_ADAGRAD_EPS,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Param {
    weight: f64,
    accum: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LearnError {
    /// The observed denotation is produced by no form on the beam.
    #[error("unreachable label: no logical form on the beam yields the selected state")]
    UnreachableLabel,
    #[error("empty beam")]
    EmptyBeam,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("model line {line}: {message}")]
pub struct ModelLoadError {
    pub line: usize,
    pub message: String,
}

/// Weights of the log-linear model plus AdaGrad state.
///
/// Parameters are stored grouped by the utterance part of their key so
/// that one utterance's weights can be projected onto logical-form parts
/// without touching the rest of θ.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub featurizer: Featurizer,
    pub config: LearnerConfig,
    params: BTreeMap<String, BTreeMap<String, Param>>,
}

/// θ summed over one utterance's parts, keyed by logical-form part.
/// `score(z) = Σ_l count(l, z) · weights[l]`.
#[derive(Debug, Clone, Default)]
pub struct Projection {
    weights: HashMap<String, f64>,
}

impl Projection {
    pub fn weight(&self, lf_part: &str) -> f64 {
        self.weights.get(lf_part).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.weights.values().all(|&w| w == 0.0)
    }
}

/// Result of [`Model::loss_and_gradient`].
#[derive(Debug, Clone)]
pub struct LossGradient {
    pub loss: f64,
    pub gradient: FeatureVector,
    /// p(z | x, ⟦z⟧ = y), aligned with the beam; zero for inconsistent forms.
    pub consistent_posterior: Vec<f64>,
}

impl Model {
    pub fn new(variant: Variant) -> Self {
        Self::with_config(
            Featurizer::new(variant),
            LearnerConfig::for_variant(variant),
        )
    }

    pub fn with_config(featurizer: Featurizer, config: LearnerConfig) -> Self {
        Model {
            featurizer,
            config,
            params: BTreeMap::new(),
        }
    }

    pub fn variant(&self) -> Variant {
        self.featurizer.variant
    }

    pub fn weight(&self, key: &str) -> f64 {
        split_key(key)
            .and_then(|(u, l)| self.params.get(u)?.get(l))
            .map_or(0.0, |p| p.weight)
    }

    pub fn accum(&self, key: &str) -> f64 {
        split_key(key)
            .and_then(|(u, l)| self.params.get(u)?.get(l))
            .map_or(0.0, |p| p.accum)
    }

    pub fn set_weight(&mut self, key: &str, weight: f64) {
        let (u, l) = split_key(key).expect("feature key without `|`");
        self.params
            .entry(u.to_string())
            .or_default()
            .entry(l.to_string())
            .or_default()
            .weight = weight;
    }

    /// Number of stored parameters.
    pub fn len(&self) -> usize {
        self.params.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// (key, weight) pairs in key order.
    pub fn weights(&self) -> impl Iterator<Item = (String, f64)> + '_ {
        self.params
            .iter()
            .flat_map(|(u, inner)| inner.iter().map(move |(l, p)| (join_key(u, l), p.weight)))
    }

    pub fn project<S: AsRef<str>>(&self, tokens: &[S]) -> Projection {
        let mut weights: HashMap<String, f64> = HashMap::new();
        for u in self.featurizer.utterance_parts(tokens) {
            if let Some(inner) = self.params.get(&u) {
                for (l, p) in inner {
                    *weights.entry(l.clone()).or_insert(0.0) += p.weight;
                }
            }
        }
        Projection { weights }
    }

    pub fn score_projected(&self, projection: &Projection, lf: &LogicalForm) -> f64 {
        self.featurizer
            .lf_parts(lf)
            .iter()
            .map(|(l, n)| n * projection.weight(l))
            .sum()
    }

    /// Scores from precomputed logical-form parts; equal to [`Self::scores`].
    pub fn scores_from_parts(&self, projection: &Projection, parts: &[LfParts]) -> Vec<f64> {
        parts
            .iter()
            .map(|p| p.iter().map(|(l, n)| n * projection.weight(l)).sum())
            .collect()
    }

    /// θ·φ(x, z).
    pub fn score<S: AsRef<str>>(&self, tokens: &[S], lf: &LogicalForm) -> f64 {
        self.score_projected(&self.project(tokens), lf)
    }

    pub fn scores<S: AsRef<str>>(&self, tokens: &[S], beam: &[LogicalForm]) -> Vec<f64> {
        let proj = self.project(tokens);
        beam.iter()
            .map(|z| self.score_projected(&proj, z))
            .collect()
    }

    /// p(z | x) over the beam.
    pub fn distribution<S: AsRef<str>>(&self, tokens: &[S], beam: &[LogicalForm]) -> Vec<f64> {
        softmax(&self.scores(tokens, beam))
    }

    fn penalty(&self) -> f64 {
        if self.config.l2 == 0.0 {
            return 0.0;
        }
        let sq: f64 = self
            .params
            .values()
            .flat_map(BTreeMap::values)
            .map(|p| p.weight * p.weight)
            .sum();
        0.5 * self.config.l2 * sq
    }

    /// Loss `-log Σ_{z: ⟦z⟧=y} p(z|x) + (λ/2)‖θ‖²` and its gradient, where
    /// `consistent[i]` says whether `beam[i]` executes to the label.
    pub fn loss_and_gradient<S: AsRef<str>>(
        &self,
        tokens: &[S],
        beam: &[LogicalForm],
        consistent: &[bool],
    ) -> Result<LossGradient, LearnError> {
        assert_eq!(beam.len(), consistent.len());
        if beam.is_empty() {
            return Err(LearnError::EmptyBeam);
        }
        if !consistent.iter().any(|&c| c) {
            return Err(LearnError::UnreachableLabel);
        }
        let scores = self.scores(tokens, beam);
        let log_z = log_sum_exp(scores.iter().copied());
        let log_zc = log_sum_exp(
            scores
                .iter()
                .zip(consistent)
                .filter(|(_, &c)| c)
                .map(|(&s, _)| s),
        );
        let loss = log_z - log_zc + self.penalty();

        let mut posterior = vec![0.0; beam.len()];
        // coefficient on each logical-form part: E_p[count] - E_q[count]
        let mut lf_grad: BTreeMap<String, f64> = BTreeMap::new();
        for (i, z) in beam.iter().enumerate() {
            let p = (scores[i] - log_z).exp();
            let q = if consistent[i] {
                (scores[i] - log_zc).exp()
            } else {
                0.0
            };
            posterior[i] = q;
            let coef = p - q;
            if coef == 0.0 {
                continue;
            }
            for (l, n) in self.featurizer.lf_parts(z) {
                *lf_grad.entry(l).or_insert(0.0) += coef * n;
            }
        }

        let mut gradient = FeatureVector::new();
        for u in self.featurizer.utterance_parts(tokens) {
            for (l, g) in &lf_grad {
                gradient.add(join_key(&u, l), *g);
            }
        }
        if self.config.l2 != 0.0 {
            for (key, w) in self.weights() {
                gradient.add(key, self.config.l2 * w);
            }
        }
        Ok(LossGradient {
            loss,
            gradient,
            consistent_posterior: posterior,
        })
    }

    /// [`Self::loss_and_gradient`] followed by [`Self::adagrad_update`],
    /// leaving the same parameters without building the joined gradient.
    /// Returns the loss.
    pub fn step<S: AsRef<str>>(
        &mut self,
        tokens: &[S],
        beam: &[LogicalForm],
        consistent: &[bool],
    ) -> Result<f64, LearnError> {
        let parts: Vec<LfParts> = beam.iter().map(|z| self.featurizer.lf_parts(z)).collect();
        self.step_with_parts(tokens, beam, &parts, consistent)
    }

    /// [`Self::step`] with each form's [`Featurizer::lf_parts`] precomputed.
    pub fn step_with_parts<S: AsRef<str>>(
        &mut self,
        tokens: &[S],
        beam: &[LogicalForm],
        parts: &[LfParts],
        consistent: &[bool],
    ) -> Result<f64, LearnError> {
        if self.config.l2 != 0.0 {
            // the penalty touches every weight; take the general path
            let lg = self.loss_and_gradient(tokens, beam, consistent)?;
            self.adagrad_update(&lg.gradient);
            return Ok(lg.loss);
        }
        assert_eq!(beam.len(), consistent.len());
        assert_eq!(beam.len(), parts.len());
        if beam.is_empty() {
            return Err(LearnError::EmptyBeam);
        }
        if !consistent.iter().any(|&c| c) {
            return Err(LearnError::UnreachableLabel);
        }
        let scores = self.scores_from_parts(&self.project(tokens), parts);
        let log_z = log_sum_exp(scores.iter().copied());
        let log_zc = log_sum_exp(
            scores
                .iter()
                .zip(consistent)
                .filter(|(_, &c)| c)
                .map(|(&s, _)| s),
        );
        let loss = log_z - log_zc + self.penalty();

        let mut lf_grad: BTreeMap<&str, f64> = BTreeMap::new();
        for (i, p) in parts.iter().enumerate() {
            let q = if consistent[i] {
                (scores[i] - log_zc).exp()
            } else {
                0.0
            };
            let coef = (scores[i] - log_z).exp() - q;
            if coef == 0.0 {
                continue;
            }
            for (l, n) in p {
                *lf_grad.entry(l).or_insert(0.0) += coef * n;
            }
        }

        let LearnerConfig {
            eta, adagrad_eps, ..
        } = self.config;
        for u in self.featurizer.utterance_parts(tokens) {
            let inner = self.params.entry(u).or_default();
            for (&l, &g) in &lf_grad {
                if g == 0.0 {
                    continue;
                }
                let p = match inner.get_mut(l) {
                    Some(p) => p,
                    None => inner.entry(l.to_string()).or_default(),
                };
                p.accum += g * g;
                p.weight -= eta * g / (adagrad_eps + p.accum.sqrt());
            }
        }
        Ok(loss)
    }

    /// The loss alone, for gradient checking.
    pub fn loss<S: AsRef<str>>(
        &self,
        tokens: &[S],
        beam: &[LogicalForm],
        consistent: &[bool],
    ) -> Result<f64, LearnError> {
        self.loss_and_gradient(tokens, beam, consistent)
            .map(|lg| lg.loss)
    }

    /// One AdaGrad step: `accum += g²; θ -= η g / (ε + √accum)`.
    pub fn adagrad_update(&mut self, gradient: &FeatureVector) {
        let LearnerConfig {
            eta, adagrad_eps, ..
        } = self.config;
        for (key, g) in gradient.iter() {
            if g == 0.0 {
                continue;
            }
            let (u, l) = split_key(key).expect("feature key without `|`");
            let p = self
                .params
                .entry(u.to_string())
                .or_default()
                .entry(l.to_string())
                .or_default();
            p.accum += g * g;
            p.weight -= eta * g / (adagrad_eps + p.accum.sqrt());
        }
    }

    /// `key<TAB>weight<TAB>accum` lines in key order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (u, inner) in &self.params {
            for (l, p) in inner {
                writeln!(out, "{u}|{l}\t{}\t{}", p.weight, p.accum).unwrap();
            }
        }
        out
    }

    pub fn load(
        featurizer: Featurizer,
        config: LearnerConfig,
        text: &str,
    ) -> Result<Self, ModelLoadError> {
        let mut model = Model::with_config(featurizer, config);
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| ModelLoadError {
                line: i + 1,
                message: message.to_string(),
            };
            let mut fields = line.split('\t');
            let (Some(key), Some(w), Some(a), None) =
                (fields.next(), fields.next(), fields.next(), fields.next())
            else {
                return Err(err("expected three tab-separated fields"));
            };
            let (u, l) = split_key(key).ok_or_else(|| err("feature key without `|`"))?;
            let weight: f64 = w.parse().map_err(|_| err("bad weight"))?;
            let accum: f64 = a.parse().map_err(|_| err("bad accumulator"))?;
            if !weight.is_finite() || !(accum.is_finite() && accum >= 0.0) {
                return Err(err("non-finite value"));
            }
            model
                .params
                .entry(u.to_string())
                .or_default()
                .insert(l.to_string(), Param { weight, accum });
        }
        Ok(model)
    }
}

pub fn log_sum_exp(values: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values
        .into_iter()
        .map(|v| (v - max).exp())
        .sum::<f64>()
        .ln()
}

/// Softmax with max subtraction.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    if scores.is_empty() {
        return Vec::new();
    }
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}
