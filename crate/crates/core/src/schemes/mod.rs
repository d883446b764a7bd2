//! Probability laws for the random pattern, and closed-form costs.
//!
//! Both schemes share one structure. A *shape* fixes the Hamming weights of
//! `F_U`, `F_S⁽⁰⁾` and `F_S⁽¹⁾`; given a shape, each vector is uniform over
//! all vectors of that weight whose nonzero entries lie in `[1, N-1]`, and
//! `π` is an independent uniform bijection. The schemes differ only in their
//! law over shapes.

mod binomial;
mod costs;
mod distribution;
mod w_privacy;
mod ws_privacy;

pub use binomial::{binomial, generalized_binomial};
pub use costs::{leakage_exponent_bound, reference_cost, reference_cost_exact, CostModel};
pub use distribution::{CategoricalSampler, Distribution};
pub use w_privacy::{sample_pattern_w, w_level_distribution, w_weight_levels, WeightLevel};
pub use ws_privacy::{sample_pattern_ws, ws_level_distribution, ws_side_conditional};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::model::{RandomPattern, RetrievalRequest};
use crate::params::{SchemeParams, Variant};
use crate::Rational;

/// Hamming weights of `(F_U, F_S⁽⁰⁾, F_S⁽¹⁾)` for one mixture component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatternShape {
    pub u_weight: usize,
    pub s0_weight: usize,
    pub s1_weight: usize,
}

impl PatternShape {
    /// The inference server's answer is empty exactly for these shapes.
    pub fn empties_inference_server(&self) -> bool {
        self.u_weight == 0 && self.s0_weight == 0
    }
}

/// The law over shapes for `params.variant()`.
pub fn shape_distribution(params: &SchemeParams) -> Result<Distribution<PatternShape>> {
    match params.variant() {
        Variant::WPrivacy => {
            let levels = w_weight_levels(params);
            let law = w_level_distribution(params)?;
            Distribution::new(
                levels
                    .iter()
                    .zip(law.outcomes())
                    .map(|(lvl, (_, p))| {
                        (
                            PatternShape { u_weight: lvl.ell, s0_weight: lvl.s0_weight, s1_weight: params.side_info() },
                            p.clone(),
                        )
                    })
                    .collect(),
            )
        }
        Variant::WsPrivacy => {
            let levels = ws_level_distribution(params)?;
            let mut out = Vec::new();
            for (&ell, p_ell) in levels.iter() {
                let s0 = ws_side_conditional(ell, 0, params)?;
                let s1 = ws_side_conditional(ell, 1, params)?;
                for (&a, pa) in s0.iter() {
                    for (&b, pb) in s1.iter() {
                        out.push((PatternShape { u_weight: ell, s0_weight: a, s1_weight: b }, p_ell * pa * pb));
                    }
                }
            }
            Distribution::new(out)
        }
    }
}

/// Samples a pattern from the scheme selected by `params.variant()`.
pub fn sample_pattern<R: Rng + ?Sized>(
    params: &SchemeParams,
    req: &RetrievalRequest,
    rng: &mut R,
) -> Result<RandomPattern> {
    match params.variant() {
        Variant::WPrivacy => sample_pattern_w(params, req, rng),
        Variant::WsPrivacy => sample_pattern_ws(params, req, rng),
    }
}

pub(crate) fn uniform_perm<R: Rng + ?Sized>(servers: usize, rng: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..servers).collect();
    perm.shuffle(rng);
    perm
}

/// Uniform over vectors in `[0, N-1]^len` of Hamming weight `weight`: a
/// uniform support set, then independent uniform values in `[1, N-1]`.
pub(crate) fn uniform_weight_vector<R: Rng + ?Sized>(
    len: usize,
    weight: usize,
    servers: usize,
    rng: &mut R,
) -> Vec<usize> {
    let mut v = vec![0; len];
    for pos in rand::seq::index::sample(rng, len, weight).iter() {
        v[pos] = rng.random_range(1..servers);
    }
    v
}

pub(crate) fn fill_pattern<R: Rng + ?Sized>(
    perm: Vec<usize>,
    shape: PatternShape,
    params: &SchemeParams,
    req: &RetrievalRequest,
    rng: &mut R,
) -> Result<RandomPattern> {
    let n = params.servers();
    let m = params.side_info();
    let f_u = uniform_weight_vector(params.unknown_count(), shape.u_weight, n, rng);
    let f_s1 = uniform_weight_vector(m, shape.s1_weight, n, rng);
    let f_s0 = uniform_weight_vector(m, shape.s0_weight, n, rng);
    RandomPattern::from_vectors(perm, req, params.messages(), &f_u, &f_s0, &f_s1)
}

/// All vectors in `[0, N-1]^len` with exactly `weight` nonzero entries.
pub fn weight_vectors(len: usize, weight: usize, servers: usize) -> Vec<Vec<usize>> {
    fn go(pos: usize, left: usize, servers: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let len = cur.len();
        if pos == len {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if len - pos > left {
            go(pos + 1, left, servers, cur, out);
        }
        if left > 0 {
            for v in 1..servers {
                cur[pos] = v;
                go(pos + 1, left - 1, servers, cur, out);
            }
            cur[pos] = 0;
        }
    }
    let mut out = Vec::new();
    if weight <= len {
        go(0, weight, servers, &mut vec![0; len], &mut out);
    }
    out
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (0..n).collect();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).expect("successor exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * i)
}

/// Every pattern with positive probability, with its joint probability.
///
/// With `perm = Some(π)` only realizations with that bijection are listed;
/// their probabilities still include the `1/N!` factor, so they sum to `1/N!`.
pub fn pattern_support(
    params: &SchemeParams,
    req: &RetrievalRequest,
    perm: Option<&[usize]>,
) -> Result<Vec<(RandomPattern, Rational)>> {
    let n = params.servers();
    let m = params.side_info();
    let perms = match perm {
        Some(p) => vec![p.to_vec()],
        None => permutations(n),
    };
    let perm_prob = Rational::new(BigInt::one(), factorial(n));
    let shapes = shape_distribution(params)?;
    let mut out = Vec::new();
    for (shape, p_shape) in shapes.iter() {
        if p_shape.is_zero() {
            continue;
        }
        let us = weight_vectors(params.unknown_count(), shape.u_weight, n);
        let s0s = weight_vectors(m, shape.s0_weight, n);
        let s1s = weight_vectors(m, shape.s1_weight, n);
        let count = BigInt::from(us.len() * s0s.len() * s1s.len());
        let each = p_shape * &perm_prob / Rational::from_integer(count);
        for perm in &perms {
            for u in &us {
                for s0 in &s0s {
                    for s1 in &s1s {
                        let pattern = RandomPattern::from_vectors(perm.clone(), req, params.messages(), u, s0, s1)?;
                        out.push((pattern, each.clone()));
                    }
                }
            }
        }
    }
    Ok(out)
}
