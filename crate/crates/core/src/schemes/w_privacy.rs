//! The ε-leaky W-privacy scheme.
//!
//! A level `k ∈ [0, ⌈g⌉-1]` is drawn with probability proportional to
//! `C(g-1, k) (N-1)^k t^k`. The unknown pattern then has weight
//! `ℓ_k = min{k(M+1), K-M-1}`, the inference server's side pattern carries
//! the remainder `k(M+1) - ℓ_k`, and every other server's side pattern is
//! full. Query weights are therefore always 0, a multiple of `M+1`, or `K`.

use rand::Rng;

use super::binomial::{generalized_binomial, pow};
use super::distribution::Distribution;
use super::{fill_pattern, uniform_perm, PatternShape};
use crate::error::Result;
use crate::model::{RandomPattern, RetrievalRequest};
use crate::params::SchemeParams;
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeightLevel {
    pub k: usize,
    /// Weight of `F_U`.
    pub ell: usize,
    /// Weight of `F_S⁽⁰⁾`.
    pub s0_weight: usize,
}

pub fn w_weight_levels(params: &SchemeParams) -> Vec<WeightLevel> {
    let block = params.side_info() + 1;
    let cap = params.unknown_count();
    (0..params.g_ceil())
        .map(|k| {
            let ell = (k * block).min(cap);
            WeightLevel { k, ell, s0_weight: k * block - ell }
        })
        .collect()
}

/// `P_k ∝ C(g-1, k) (N-1)^k t^k` over `k ∈ [0, ⌈g⌉-1]`.
pub fn w_level_distribution(params: &SchemeParams) -> Result<Distribution<usize>> {
    let g_minus_1 = params.g() - Rational::from_integer(1.into());
    let r = params.r();
    Distribution::from_weights(
        (0..params.g_ceil()).map(|k| (k, generalized_binomial(&g_minus_1, k) * pow(&r, k))).collect(),
    )
}

pub fn sample_pattern_w<R: Rng + ?Sized>(
    params: &SchemeParams,
    req: &RetrievalRequest,
    rng: &mut R,
) -> Result<RandomPattern> {
    let perm = uniform_perm(params.servers(), rng);
    let law = w_level_distribution(params)?;
    let k = *law.sample(rng);
    let level = w_weight_levels(params)[k];
    let shape = PatternShape { u_weight: level.ell, s0_weight: level.s0_weight, s1_weight: params.side_info() };
    fill_pattern(perm, shape, params, req, rng)
}
