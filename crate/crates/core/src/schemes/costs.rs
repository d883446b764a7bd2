//! Closed-form download costs: the schemes' own bounds and the baselines they
//! generalize. Every cost here has the form `1 + (1 - 1/Z) / (N - 1)` for
//! some normalizer `Z`, except plain PIR which is written as its geometric sum.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use super::binomial::{generalized_binomial, pow};
use crate::error::{Error, Result};
use crate::params::{rational_to_f64, SchemeParams, Variant};
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CostModel {
    /// Replicated-server PIR without side information: `1 + 1/N + ... + 1/N^(K-1)`.
    Pir,
    /// PIR with side information under perfect (W, S)-privacy: `Z = N^(K-M-1)`.
    PirSiWs,
    /// Best known PIR-SI bound under perfect W-privacy: `Z = Σ_k C(g-1,k)(N-1)^k`.
    PirSiWUpperBound,
    /// Leaky PIR without side information: `Z = ((N-1)t + 1)^(K-1)`.
    LeakyPir,
    /// This crate's W-privacy scheme: `Z = Σ_k C(g-1,k)(N-1)^k t^k`.
    LeakyPirSiW,
    /// This crate's (W, S)-privacy scheme, M = 1: `Z = ((N-1)t + 1)^(K-2)`.
    LeakyPirSiWs,
}

impl CostModel {
    pub const ALL: [CostModel; 6] = [
        CostModel::Pir,
        CostModel::PirSiWs,
        CostModel::PirSiWUpperBound,
        CostModel::LeakyPir,
        CostModel::LeakyPirSiW,
        CostModel::LeakyPirSiWs,
    ];

    /// The model describing the scheme for `variant`.
    pub fn for_variant(variant: Variant) -> Self {
        match variant {
            Variant::WPrivacy => CostModel::LeakyPirSiW,
            Variant::WsPrivacy => CostModel::LeakyPirSiWs,
        }
    }
}

impl fmt::Display for CostModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostModel::Pir => "pir",
            CostModel::PirSiWs => "pir-si-ws",
            CostModel::PirSiWUpperBound => "pir-si-w",
            CostModel::LeakyPir => "l-pir",
            CostModel::LeakyPirSiW => "l-pir-si-w",
            CostModel::LeakyPirSiWs => "l-pir-si-ws",
        })
    }
}

impl FromStr for CostModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CostModel::ALL
            .into_iter()
            .find(|m| m.to_string() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidParams(format!("unknown cost model {s:?}")))
    }
}

fn from_normalizer(servers: usize, z: &Rational) -> Rational {
    let one = Rational::one();
    &one + (&one - &one / z) / Rational::from_integer((servers - 1).into())
}

fn w_normalizer(params: &SchemeParams, t: &Rational) -> Rational {
    let g_minus_1 = params.g() - Rational::one();
    let base = Rational::from_integer((params.servers() - 1).into()) * t;
    (0..params.g_ceil()).map(|k| generalized_binomial(&g_minus_1, k) * pow(&base, k)).sum()
}

pub fn reference_cost_exact(model: CostModel, params: &SchemeParams) -> Result<Rational> {
    let n = params.servers();
    let k = params.messages();
    let m = params.side_info();
    let big_n = Rational::from_integer(n.into());
    let r_plus_1 = params.r() + Rational::one();
    Ok(match model {
        CostModel::Pir => (0..k).map(|i| Rational::one() / pow(&big_n, i)).sum(),
        CostModel::PirSiWs => from_normalizer(n, &pow(&big_n, k - m - 1)),
        CostModel::PirSiWUpperBound => from_normalizer(n, &w_normalizer(params, &Rational::one())),
        CostModel::LeakyPir => from_normalizer(n, &pow(&r_plus_1, k - 1)),
        CostModel::LeakyPirSiW => from_normalizer(n, &w_normalizer(params, params.t())),
        CostModel::LeakyPirSiWs => {
            if m != 1 {
                return Err(Error::Domain(format!("WS cost is defined for M=1 only, got M={m}")));
            }
            from_normalizer(n, &pow(&r_plus_1, k - 2))
        }
    })
}

pub fn reference_cost(model: CostModel, params: &SchemeParams) -> Result<f64> {
    reference_cost_exact(model, params).map(|c| rational_to_f64(&c))
}

/// Upper bound on the leakage exponent achievable at download cost `d`.
///
/// With `C = -ln(1 - (N-1)(D-1))` the bound is `ln((⌈g⌉-1)(N-1)) - ln C`
/// (W variant) or `ln((K-2)(N-1)) - ln C` (WS variant). At the perfect-privacy
/// cost `D = 1 + 1/(N-1)`, `C` is infinite and the bound is `-∞`: no leakage
/// is needed to reach that cost.
pub fn leakage_exponent_bound(variant: Variant, d: f64, params: &SchemeParams) -> Result<f64> {
    let n1 = (params.servers() - 1) as f64;
    let multiplier = match variant {
        Variant::WPrivacy => (params.g_ceil() - 1) as f64,
        Variant::WsPrivacy => {
            if params.side_info() != 1 {
                return Err(Error::Domain(format!("WS bound is defined for M=1 only, got M={}", params.side_info())));
            }
            (params.messages() - 2) as f64
        }
    };
    let slack = 1.0 - n1 * (d - 1.0);
    if d.is_nan() || d <= 1.0 || slack < -1e-12 {
        return Err(Error::Domain(format!("download cost {d} outside (1, 1 + 1/(N-1)] = (1, {}]", 1.0 + 1.0 / n1)));
    }
    if multiplier.is_zero() {
        return Err(Error::Domain("the scheme has a single level here; its cost is exactly 1".into()));
    }
    if slack <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let c = -slack.ln();
    Ok((multiplier * n1).ln() - c.ln())
}
