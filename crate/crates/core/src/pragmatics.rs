//! Pragmatic listener implementing mutual exclusivity.
//!
//! The speaker is modeled as S(x|z) ∝ (p(z|x) p(x))^β and the listener as
//! L(z|x) ∝ S(x|z) p(z). Normalizing S requires summing over every utterance,
//! so online we approximate the normalizer by
//! Q(z) = ε + Σ_i p_{θ_i}(z|x_i)^β over the examples seen so far, and p(z) by
//! an add-α estimate P(z) from pseudocounts C(z):
//!
//! ```text
//! L(z|x) ∝ P(z) / Q(z) · p(z|x)^β
//! ```
//!
//! The listener only reorders candidates; it never feeds into gradients.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PragmaticsConfig {
    /// Add-α smoothing of the prior over logical forms.
    pub alpha: f64,
    /// Sharpening exponent, β ≥ 1.
    pub beta: f64,
    /// Initial value of every Q(z).
    pub epsilon: f64,
}

impl Default for PragmaticsConfig {
    fn default() -> Self {
        PragmaticsConfig {
            alpha: 1.0,
            beta: 3.0,
            epsilon: 0.01,
        }
    }
}

/// Pseudocounts C(z) and speaker normalizers Q(z), keyed by canonical text.
#[derive(Debug, Clone, PartialEq)]
pub struct PragmaticsState {
    pub config: PragmaticsConfig,
    counts: BTreeMap<String, f64>,
    norms: BTreeMap<String, f64>,
    /// Σ_{z: C(z) > 0} (C(z) + α)
    prior_mass: f64,
}

impl PragmaticsState {
    pub fn new(config: PragmaticsConfig) -> Self {
        PragmaticsState {
            config,
            counts: BTreeMap::new(),
            norms: BTreeMap::new(),
            prior_mass: 0.0,
        }
    }

    pub fn count(&self, z: &str) -> f64 {
        self.counts.get(z).copied().unwrap_or(0.0)
    }

    pub fn norm(&self, z: &str) -> f64 {
        self.norms.get(z).copied().unwrap_or(self.config.epsilon)
    }

    /// P(z). When nothing has been counted yet the prior is uniform over
    /// the `support` forms under consideration.
    pub fn prior(&self, z: &str, support: usize) -> f64 {
        if self.prior_mass == 0.0 {
            return 1.0 / support.max(1) as f64;
        }
        (self.count(z) + self.config.alpha) / self.prior_mass
    }

    /// Unnormalized L(z|x) = P(z)/Q(z) · literal(z)^β, aligned with `forms`.
    pub fn listener<S: AsRef<str>>(&self, forms: &[S], literal: &[f64]) -> Vec<f64> {
        assert_eq!(forms.len(), literal.len());
        forms
            .iter()
            .zip(literal)
            .map(|(z, &p)| {
                let z = z.as_ref();
                self.prior(z, forms.len()) / self.norm(z) * p.powf(self.config.beta)
            })
            .collect()
    }

    /// Folds in one labeled example. `literal` must come from the model
    /// after its update on this example; `posterior` is p(z|x, ⟦z⟧=y).
    pub fn observe<S: AsRef<str>>(&mut self, forms: &[S], literal: &[f64], posterior: &[f64]) {
        assert_eq!(forms.len(), literal.len());
        assert_eq!(forms.len(), posterior.len());
        let PragmaticsConfig { beta, epsilon, .. } = self.config;
        for ((z, &p), &q) in forms.iter().zip(literal).zip(posterior) {
            let z = z.as_ref();
            let add = p.powf(beta);
            match self.norms.get_mut(z) {
                Some(n) => *n += add,
                None => {
                    self.norms.insert(z.to_string(), epsilon + add);
                }
            }
            if q > 0.0 {
                match self.counts.get_mut(z) {
                    Some(c) => *c += q,
                    None => {
                        self.counts.insert(z.to_string(), q);
                    }
                }
            }
        }
        let alpha = self.config.alpha;
        self.prior_mass = self
            .counts
            .values()
            .filter(|&&c| c > 0.0)
            .map(|c| c + alpha)
            .sum();
    }

    /// `z<TAB>C<TAB>Q<TAB>P` lines for every touched form.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let support = self.norms.len();
        for (z, q) in &self.norms {
            writeln!(
                out,
                "{z}\t{}\t{q}\t{}",
                self.count(z),
                self.prior(z, support)
            )
            .unwrap();
        }
        out
    }
}

/// Exact speaker and listener tables over a finite set of utterances.
#[derive(Debug, Clone, PartialEq)]
pub struct RsaTables {
    /// S[x][z], each column sums to one.
    pub speaker: Vec<Vec<f64>>,
    /// L[x][z], each row sums to one.
    pub listener: Vec<Vec<f64>>,
}

/// Computes S(x|z) ∝ (p(z|x) p(x))^β and L(z|x) ∝ S(x|z) p(z) from the
/// literal matrix `literal[x][z]`. Uniform priors when `None`.
pub fn rsa_tables(
    literal: &[Vec<f64>],
    beta: f64,
    utterance_prior: Option<&[f64]>,
    form_prior: Option<&[f64]>,
) -> RsaTables {
    let nx = literal.len();
    let nz = literal.first().map_or(0, Vec::len);
    let px = |x: usize| utterance_prior.map_or(1.0, |p| p[x]);
    let pz = |z: usize| form_prior.map_or(1.0, |p| p[z]);

    let mut speaker = vec![vec![0.0; nz]; nx];
    for z in 0..nz {
        let col: Vec<f64> = (0..nx)
            .map(|x| (literal[x][z] * px(x)).powf(beta))
            .collect();
        let total: f64 = col.iter().sum();
        for x in 0..nx {
            speaker[x][z] = if total > 0.0 { col[x] / total } else { 0.0 };
        }
    }
    let listener = speaker
        .iter()
        .map(|row| {
            let weighted: Vec<f64> = row.iter().enumerate().map(|(z, s)| s * pz(z)).collect();
            let total: f64 = weighted.iter().sum();
            weighted
                .into_iter()
                .map(|w| if total > 0.0 { w / total } else { 0.0 })
                .collect()
        })
        .collect();
    RsaTables { speaker, listener }
}
