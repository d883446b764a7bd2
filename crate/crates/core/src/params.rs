use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::Rational;

/// Which leaky privacy condition a scheme targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// Only the demand index is protected.
    WPrivacy,
    /// Demand index and side-information index set are protected (M = 1 only).
    WsPrivacy,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::WPrivacy => "w",
            Variant::WsPrivacy => "ws",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "w" | "w-privacy" => Ok(Variant::WPrivacy),
            "ws" | "ws-privacy" => Ok(Variant::WsPrivacy),
            other => Err(Error::InvalidParams(format!("unknown variant {other:?}"))),
        }
    }
}

/// The tuple `(N, K, M, t, q, variant)`.
///
/// `t = e^{-ε}` is held as an exact rational so every probability the schemes
/// produce is exact. The sub-packet count `L = N - 1`, the equivalent message
/// count `g = K / (M + 1)` and `r = (N - 1) t` are derived on demand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemeParams {
    servers: usize,
    messages: usize,
    side_info: usize,
    t: Rational,
    field: PrimeField,
    variant: Variant,
}

impl SchemeParams {
    pub fn new(
        servers: usize,
        messages: usize,
        side_info: usize,
        t: Rational,
        field: PrimeField,
        variant: Variant,
    ) -> Result<Self> {
        if servers < 2 {
            return Err(Error::InvalidParams(format!("need at least 2 servers, got N={servers}")));
        }
        if servers > u16::MAX as usize {
            return Err(Error::InvalidParams(format!("N={servers} is too large")));
        }
        if messages < 2 {
            return Err(Error::InvalidParams(format!("need at least 2 messages, got K={messages}")));
        }
        if messages > u16::MAX as usize {
            return Err(Error::InvalidParams(format!("K={messages} is too large")));
        }
        if side_info >= messages {
            return Err(Error::InvalidParams(format!(
                "side information size M={side_info} must be at most K-1={}",
                messages - 1
            )));
        }
        if !t.is_positive() || t > Rational::one() {
            return Err(Error::InvalidParams(format!("leakage parameter t={t} must lie in (0, 1]")));
        }
        if variant == Variant::WsPrivacy && side_info != 1 {
            return Err(Error::InvalidParams(format!("WS variant requires M=1, got M={side_info}")));
        }
        Ok(Self { servers, messages, side_info, t, field, variant })
    }

    /// Perfect-privacy parameters (`t = 1`) over the default field.
    pub fn perfect(servers: usize, messages: usize, side_info: usize, variant: Variant) -> Result<Self> {
        Self::new(servers, messages, side_info, Rational::one(), PrimeField::default(), variant)
    }

    pub fn servers(&self) -> usize {
        self.servers
    }

    pub fn messages(&self) -> usize {
        self.messages
    }

    pub fn side_info(&self) -> usize {
        self.side_info
    }

    pub fn t(&self) -> &Rational {
        &self.t
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Sub-packets per message, `L = N - 1`.
    pub fn subpackets(&self) -> usize {
        self.servers - 1
    }

    /// Size of the unknown index set, `K - M - 1`.
    pub fn unknown_count(&self) -> usize {
        self.messages - self.side_info - 1
    }

    pub fn g(&self) -> Rational {
        Rational::new(self.messages.into(), (self.side_info + 1).into())
    }

    pub fn g_ceil(&self) -> usize {
        self.messages.div_ceil(self.side_info + 1)
    }

    pub fn r(&self) -> Rational {
        &self.t * Rational::from_integer((self.servers - 1).into())
    }

    /// `ε = -ln t`, for reporting only.
    pub fn epsilon(&self) -> f64 {
        -rational_to_f64(&self.t).ln()
    }

    pub fn with_t(&self, t: Rational) -> Result<Self> {
        Self::new(self.servers, self.messages, self.side_info, t, self.field, self.variant)
    }

    pub fn with_field(&self, field: PrimeField) -> Self {
        Self { field, ..self.clone() }
    }

    pub fn with_variant(&self, variant: Variant) -> Result<Self> {
        Self::new(self.servers, self.messages, self.side_info, self.t.clone(), self.field, variant)
    }

    /// The WS scheme's conditional law is a probability only for `r >= 1`.
    pub fn require_r_at_least_one(&self) -> Result<()> {
        if self.r() < Rational::one() {
            return Err(Error::Domain(format!("WS scheme requires r ≥ 1, got r = (N-1)t = {}", self.r())));
        }
        Ok(())
    }
}

pub fn rational_to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"3"`, `"1/2"` or a terminating decimal such as `"0.75"` exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidParams(format!("cannot parse {s:?} as a rational"));
    if let Some((num, den)) = s.split_once('/') {
        let num: num_bigint::BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: num_bigint::BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int: num_bigint::BigInt = match int.trim_start_matches(['-', '+']) {
            "" => num_bigint::BigInt::zero(),
            digits => digits.parse().map_err(|_| bad())?,
        };
        let frac_val: num_bigint::BigInt = frac.parse().map_err(|_| bad())?;
        let scale = num_bigint::BigInt::from(10u32).pow(frac.len() as u32);
        let magnitude = Rational::new(int * &scale + frac_val, scale);
        return Ok(if negative { -magnitude } else { magnitude });
    }
    let n: num_bigint::BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}
