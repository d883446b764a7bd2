//! The ε-leaky (W, S)-privacy scheme for a single side message (M = 1).
//!
//! The unknown pattern weight `ℓ ∈ [0, K-2]` is binomial with odds
//! `r = (N-1)t`. Each side pattern `F_S⁽ʲ⁾` (j = 0 at the inference server,
//! 1 elsewhere) then independently has weight `s_j ∈ {0, 1}` with
//!
//! ```text
//! Pr[s_j | ℓ, j] = (r^(ℓ+s_j+j) + (-1)^(ℓ+s_j+j) r) / ((r+1) r^(ℓ+j))
//! ```
//!
//! which is a probability only when `r >= 1`.

use num_traits::{One, Signed};
use rand::Rng;

use super::binomial::{binomial, pow};
use super::distribution::Distribution;
use super::{fill_pattern, uniform_perm, PatternShape};
use crate::error::{Error, Result};
use crate::model::{RandomPattern, RetrievalRequest};
use crate::params::SchemeParams;
use crate::Rational;

fn require_single_side(params: &SchemeParams) -> Result<()> {
    if params.side_info() != 1 {
        return Err(Error::Domain(format!("WS variant requires M=1, got M={}", params.side_info())));
    }
    Ok(())
}

/// `P_ℓ = C(K-2, ℓ) r^ℓ / (r+1)^(K-2)` over `ℓ ∈ [0, K-2]`.
pub fn ws_level_distribution(params: &SchemeParams) -> Result<Distribution<usize>> {
    require_single_side(params)?;
    let r = params.r();
    let span = params.messages() - 2;
    // normalized by the running sum; the closed-form denominator is checked in tests
    Distribution::from_weights(
        (0..=span).map(|ell| (ell, Rational::from_integer(binomial(span, ell)) * pow(&r, ell))).collect(),
    )
}

/// Law of `s_j ∈ {0, 1}` given `ℓ` and `j`.
pub fn ws_side_conditional(ell: usize, j: usize, params: &SchemeParams) -> Result<Distribution<usize>> {
    require_single_side(params)?;
    params.require_r_at_least_one()?;
    if j > 1 {
        return Err(Error::Validation(format!("server role j must be 0 or 1, got {j}")));
    }
    let r = params.r();
    let one = Rational::one();
    let base = ell + j;
    let denom = (&r + &one) * pow(&r, base);
    let prob = |s: usize| {
        let e = base + s;
        let sign = if e.is_multiple_of(2) { r.clone() } else { -r.clone() };
        (pow(&r, e) + sign) / &denom
    };
    let outcomes = vec![(0, prob(0)), (1, prob(1))];
    debug_assert!(outcomes.iter().all(|(_, p)| !p.is_negative()));
    Distribution::new(outcomes)
}

pub fn sample_pattern_ws<R: Rng + ?Sized>(
    params: &SchemeParams,
    req: &RetrievalRequest,
    rng: &mut R,
) -> Result<RandomPattern> {
    require_single_side(params)?;
    params.require_r_at_least_one()?;
    let perm = uniform_perm(params.servers(), rng);
    let ell = *ws_level_distribution(params)?.sample(rng);
    let s0 = *ws_side_conditional(ell, 0, params)?.sample(rng);
    let s1 = *ws_side_conditional(ell, 1, params)?.sample(rng);
    let shape = PatternShape { u_weight: ell, s0_weight: s0, s1_weight: s1 };
    fill_pattern(perm, shape, params, req, rng)
}
