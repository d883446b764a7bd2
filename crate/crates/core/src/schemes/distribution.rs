use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::Rational;

/// A finite law with exact rational probabilities summing to exactly one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distribution<T> {
    outcomes: Vec<(T, Rational)>,
}

impl<T> Distribution<T> {
    pub fn new(outcomes: Vec<(T, Rational)>) -> Result<Self> {
        if outcomes.iter().any(|(_, p)| p.is_negative()) {
            return Err(Error::Validation("negative probability".into()));
        }
        let total: Rational = outcomes.iter().map(|(_, p)| p).sum();
        if !total.is_one() {
            return Err(Error::Validation(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { outcomes })
    }

    /// Normalizes nonnegative weights by their sum.
    pub fn from_weights(weights: Vec<(T, Rational)>) -> Result<Self> {
        let total: Rational = weights.iter().map(|(_, w)| w).sum();
        if !total.is_positive() || weights.iter().any(|(_, w)| w.is_negative()) {
            return Err(Error::Validation("weights must be nonnegative with a positive sum".into()));
        }
        Ok(Self { outcomes: weights.into_iter().map(|(x, w)| (x, w / &total)).collect() })
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, &Rational)> {
        self.outcomes.iter().map(|(x, p)| (x, p))
    }

    pub fn outcomes(&self) -> &[(T, Rational)] {
        &self.outcomes
    }

    pub fn probability(&self, outcome: &T) -> Rational
    where
        T: PartialEq,
    {
        self.outcomes.iter().filter(|(x, _)| x == outcome).map(|(_, p)| p).sum()
    }

    pub fn sampler(&self) -> CategoricalSampler {
        CategoricalSampler::new(self.outcomes.iter().map(|(_, p)| p))
    }

    /// Draws one outcome by cumulative inversion against a 64-bit uniform.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &T {
        &self.outcomes[self.sampler().sample_index(rng)].0
    }
}

/// Cumulative thresholds `floor(cdf_i · 2^64)` of an exact law.
///
/// A draw `u` from `[0, 2^64)` selects the first index with `u < threshold`.
/// Zero-probability outcomes are never selected and the final threshold
/// equals `2^64` exactly, so every draw lands somewhere.
#[derive(Clone, Debug)]
pub struct CategoricalSampler {
    thresholds: Vec<u128>,
}

impl CategoricalSampler {
    pub fn new<'a>(probs: impl IntoIterator<Item = &'a Rational>) -> Self {
        let scale = BigInt::from(1u128 << 64);
        let mut cdf = Rational::zero();
        let thresholds = probs
            .into_iter()
            .map(|p| {
                cdf += p;
                let scaled = (&cdf * &scale).floor().to_integer();
                match scaled.sign() {
                    Sign::Minus => 0,
                    _ => scaled.to_u128().unwrap_or(u128::MAX).min(1u128 << 64),
                }
            })
            .collect();
        Self { thresholds }
    }

    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.next_u64() as u128;
        self.thresholds.iter().position(|&t| u < t).unwrap_or(self.thresholds.len() - 1)
    }
}
