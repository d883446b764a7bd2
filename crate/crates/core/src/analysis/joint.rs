//! Brute-force check of the full (query, answer) leakage condition.
//!
//! Databases are uniform over a tiny field and independent of the request,
//! so every server's joint law is a sum over all `q^(K·L)` databases and all
//! pattern realizations. Nothing here is shared with the query-marginal path
//! except the pattern enumeration itself.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::model::{Answer, Database, Message, Query, RetrievalRequest};
use crate::params::{SchemeParams, Variant};
use crate::retrieval::{build_queries, compute_answer};
use crate::schemes::pattern_support;
use crate::Rational;

use super::leakage::{certify, condition_laws, LeakageReport};
use super::query_law::{check_feasible, pattern_space};

/// Every database with `messages × subpackets` symbols over `field`.
pub fn all_databases(messages: usize, subpackets: usize, field: PrimeField) -> Vec<Database> {
    let q = field.modulus();
    let cells = messages * subpackets;
    let total = q.pow(cells as u32);
    (0..total)
        .map(|mut code| {
            let mut symbols = vec![0; cells];
            for s in symbols.iter_mut() {
                *s = code % q;
                code /= q;
            }
            let msgs = if subpackets == 0 {
                vec![Message::new(Vec::new()); messages]
            } else {
                symbols.chunks(subpackets).map(|c| Message::new(c.to_vec())).collect()
            };
            Database::new(msgs, field).expect("symbols lie in the field")
        })
        .collect()
}

pub fn joint_space(params: &SchemeParams, small_q: u64) -> u128 {
    let cells = (params.messages() * params.subpackets()) as u32;
    (small_q as u128).checked_pow(cells).and_then(|d| d.checked_mul(pattern_space(params))).unwrap_or(u128::MAX)
}

fn joint_law(
    params: &SchemeParams,
    req: &RetrievalRequest,
    dbs: &[Database],
) -> Result<Vec<BTreeMap<(Query, Answer), Rational>>> {
    let db_weight = Rational::new(BigInt::one(), BigInt::from(dbs.len()));
    let mut per_server = vec![BTreeMap::new(); params.servers()];
    for (pattern, prob) in pattern_support(params, req, None)? {
        let queries = build_queries(&pattern, req, params)?;
        let each = &prob * &db_weight;
        for db in dbs {
            for (law, q) in per_server.iter_mut().zip(&queries) {
                let key = (q.clone(), compute_answer(q, db));
                *law.entry(key).or_insert_with(Rational::zero) += &each;
            }
        }
    }
    Ok(per_server)
}

/// Certifies the joint (query, answer) leakage over a field of size `small_q`.
pub fn joint_leakage_oracle(params: &SchemeParams, small_q: u64) -> Result<LeakageReport<(Query, Answer)>> {
    if small_q > 3 {
        return Err(Error::InvalidParams(format!(
            "the joint oracle enumerates databases over a field of size at most 3, got {small_q}"
        )));
    }
    let field = PrimeField::new(small_q)?;
    let params = params.with_field(field);
    if params.variant() == Variant::WsPrivacy {
        params.require_r_at_least_one()?;
    }
    check_feasible(joint_space(&params, small_q))?;
    let dbs = all_databases(params.messages(), params.subpackets(), field);
    let laws = RetrievalRequest::all(params.messages(), params.side_info())
        .par_iter()
        .map(|req| Ok((req.demand(), req.side().to_vec(), joint_law(&params, req, &dbs)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(certify(params.variant(), params.t(), &condition_laws(params.variant(), laws)))
}
