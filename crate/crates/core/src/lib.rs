//! Leaky private information retrieval with side information.
//!
//! A user holding `M` of `K` replicated messages retrieves one more from `N`
//! non-colluding servers. Each server sees a query whose distribution depends
//! on the demand (and optionally the side-information set) only up to a
//! factor `e^ε`; in exchange the expected download drops below the
//! perfect-privacy cost.
//!
//! * [`model`] and [`retrieval`]: messages, random patterns, query
//!   construction, answers and decoding.
//! * [`schemes`]: the W-privacy and (W, S)-privacy pattern laws, samplers and
//!   closed-form costs.
//! * [`protocol`]: byte-level wire format, a TCP server, and a runner that
//!   executes a retrieval in-process or over the network.
//! * [`analysis`]: exact enumeration of query laws, leakage certification,
//!   download cost and parameter sweeps.
//!
//! The leakage parameter is carried as the exact rational `t = e^(-ε)`, so
//! every probability is an exact rational and certificates are exact.

pub mod analysis;
pub mod error;
pub mod field;
pub mod model;
pub mod params;
pub mod protocol;
pub mod retrieval;
pub mod schemes;

/// Arbitrary-precision rational used for every probability.
pub type Rational = num_rational::BigRational;

pub use error::{Error, Result};
pub use field::{PrimeField, Symbol};
pub use model::{Answer, Database, Message, Query, RandomPattern, RetrievalRequest};
pub use params::{SchemeParams, Variant};
