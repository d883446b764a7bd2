use std::collections::BTreeMap;

use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Query, RetrievalRequest};
use crate::params::SchemeParams;
use crate::retrieval::build_queries;
use crate::schemes::pattern_support;
use crate::Rational;

/// Cap on the number of pattern realizations (or pattern × database pairs)
/// an exact enumeration may visit.
pub const ENUMERATION_LIMIT: u128 = 100_000_000;

/// `N^K · N!`, the size of the space the brute-force enumeration covers.
pub fn pattern_space(params: &SchemeParams) -> u128 {
    let n = params.servers() as u128;
    let perms = (1..=n).try_fold(1u128, |acc, i| acc.checked_mul(i));
    let vectors = u32::try_from(params.messages()).ok().and_then(|k| n.checked_pow(k));
    perms.zip(vectors).and_then(|(a, b)| a.checked_mul(b)).unwrap_or(u128::MAX)
}

pub fn check_feasible(space: u128) -> Result<()> {
    if space > ENUMERATION_LIMIT {
        return Err(Error::Infeasible { space, limit: ENUMERATION_LIMIT });
    }
    Ok(())
}

/// Exact law of the query each server receives, for one `(W, S)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryLaw {
    request: RetrievalRequest,
    per_server: Vec<BTreeMap<Query, Rational>>,
}

impl QueryLaw {
    pub fn request(&self) -> &RetrievalRequest {
        &self.request
    }

    pub fn servers(&self) -> usize {
        self.per_server.len()
    }

    /// The law at 1-based server `n`.
    pub fn server(&self, n: usize) -> &BTreeMap<Query, Rational> {
        &self.per_server[n - 1]
    }

    pub fn probability(&self, n: usize, query: &Query) -> Rational {
        self.server(n).get(query).cloned().unwrap_or_else(Rational::zero)
    }

    pub(crate) fn into_per_server(self) -> Vec<BTreeMap<Query, Rational>> {
        self.per_server
    }
}

/// Sums the probability of every pattern realization into the query it
/// induces at each server.
pub fn enumerate_query_law(params: &SchemeParams, req: &RetrievalRequest) -> Result<QueryLaw> {
    check_feasible(pattern_space(params))?;
    let mut per_server = vec![BTreeMap::new(); params.servers()];
    for (pattern, prob) in pattern_support(params, req, None)? {
        for (law, q) in per_server.iter_mut().zip(build_queries(&pattern, req, params)?) {
            *law.entry(q).or_insert_with(Rational::zero) += &prob;
        }
    }
    Ok(QueryLaw { request: req.clone(), per_server })
}

/// Query laws for every `(W, S)` with `|S| = M`, in lexicographic order.
pub fn enumerate_all_laws(params: &SchemeParams) -> Result<Vec<QueryLaw>> {
    check_feasible(pattern_space(params))?;
    RetrievalRequest::all(params.messages(), params.side_info())
        .par_iter()
        .map(|req| enumerate_query_law(params, req))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;
    use crate::params::Variant;
    use num_traits::One;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn params(n: usize, k: usize, m: usize, t: Rational, v: Variant) -> SchemeParams {
        SchemeParams::new(n, k, m, t, PrimeField::default(), v).unwrap()
    }

    #[test]
    fn all_zero_query_probability() {
        let zero = Query::new(vec![0, 0, 0]);
        let req = RetrievalRequest::new(1, [2], 3).unwrap();
        for t in [rat(1, 1), rat(1, 2), rat(1, 4)] {
            let w = enumerate_query_law(&params(3, 3, 1, t.clone(), Variant::WPrivacy), &req).unwrap();
            let p0 = Rational::one() / (&t + Rational::one());
            for n in 1..=3 {
                assert_eq!(w.probability(n, &zero), &p0 / rat(3, 1));
            }
            if t >= rat(1, 2) {
                let ws = enumerate_query_law(&params(3, 3, 1, t.clone(), Variant::WsPrivacy), &req).unwrap();
                let p0 = Rational::one() / (rat(2, 1) * &t + Rational::one());
                for n in 1..=3 {
                    assert_eq!(ws.probability(n, &zero), &p0 / rat(3, 1));
                }
            }
        }
    }

    #[test]
    fn laws_are_normalized_with_admissible_weights() {
        for (n, k, m) in [(3, 3, 1), (3, 4, 1), (2, 4, 0), (3, 5, 2), (4, 4, 1)] {
            for variant in [Variant::WPrivacy, Variant::WsPrivacy] {
                if variant == Variant::WsPrivacy && m != 1 {
                    continue;
                }
                let p = params(n, k, m, rat(3, 4), variant);
                for law in enumerate_all_laws(&p).unwrap() {
                    for s in 1..=n {
                        let total: Rational = law.server(s).values().sum();
                        assert_eq!(total, Rational::one());
                        for q in law.server(s).keys() {
                            let w = q.weight();
                            let ok = match variant {
                                Variant::WPrivacy => w == 0 || w == k || w % (m + 1) == 0,
                                Variant::WsPrivacy => w <= k,
                            };
                            assert!(ok, "weight {w} in {variant} law for {:?}", (n, k, m));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn feasibility_guard() {
        let p = params(6, 12, 1, rat(1, 1), Variant::WPrivacy);
        assert_eq!(pattern_space(&params(3, 3, 1, rat(1, 1), Variant::WPrivacy)), 27 * 6);
        assert!(matches!(
            enumerate_query_law(&p, &RetrievalRequest::new(1, [2], 12).unwrap()),
            Err(Error::Infeasible { .. })
        ));
    }
}
