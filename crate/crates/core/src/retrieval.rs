//! Query construction, answer computation and decoding.
//!
//! Every server's query carries the same sub-packet indices for the unknown
//! messages, its own demand sub-packet `π(n)`, and side-information indices
//! from `F_S⁽⁰⁾` (inference server) or `F_S⁽¹⁾` (everyone else). Subtracting
//! the inference server's side-stripped answer from any other server's
//! cancels the unknown contribution and leaves one demand sub-packet.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

use crate::model::{Answer, Database, Message, Query, RandomPattern, RetrievalRequest};
use crate::params::SchemeParams;

/// Builds the N queries induced by `pattern` for `req`. Depends on nothing but
/// the pattern and the request, so queries carry no information about the data.
pub fn build_queries(pattern: &RandomPattern, req: &RetrievalRequest, params: &SchemeParams) -> Result<Vec<Query>> {
    let k = params.messages();
    let n = params.servers();
    if pattern.servers() != n {
        return Err(Error::Validation(format!("pattern covers {} servers, parameters say N={n}", pattern.servers())));
    }
    let unknown = req.unknown(k);
    if req.side().len() != params.side_info() {
        return Err(Error::Validation(format!(
            "request has |S|={}, parameters say M={}",
            req.side().len(),
            params.side_info()
        )));
    }
    if req.demand() > k || !pattern.f_u().keys().copied().eq(unknown.iter().copied()) {
        return Err(Error::Validation("F_U is not keyed by the unknown index set".into()));
    }
    if !pattern.f_s0().keys().eq(req.side().iter()) || !pattern.f_s1().keys().eq(req.side().iter()) {
        return Err(Error::Validation("F_S is not keyed by the side-information set".into()));
    }

    let n_star = pattern.inference_server();
    Ok((1..=n)
        .map(|server| {
            let side = if server == n_star { pattern.f_s0() } else { pattern.f_s1() };
            let mut indices = vec![0; k];
            indices[req.demand() - 1] = pattern.pi(server);
            for (&i, &v) in pattern.f_u() {
                indices[i - 1] = v;
            }
            for (&i, &v) in side {
                indices[i - 1] = v;
            }
            Query::new(indices)
        })
        .collect())
}

/// `Σ_i X_i[q[i]]`, or `Empty` for the all-zero query.
pub fn compute_answer(query: &Query, db: &Database) -> Answer {
    if query.is_zero() {
        return Answer::Empty;
    }
    let field = db.field();
    Answer::Symbol(field.sum(query.indices().iter().zip(db.messages()).map(|(&idx, msg)| msg.get(idx))))
}

/// Recovers `X_W` from the N answers and the side information.
///
/// For each sub-packet `i`, with `n = π⁻¹(i)`:
/// `X_W[i] = (a_n - Σ_{s∈S} X_s[q_n[s]]) - (a_{n*} - Σ_{s∈S} X_s[q_{n*}[s]])`.
pub fn decode(
    answers: &[Answer],
    queries: &[Query],
    pattern: &RandomPattern,
    side_info: &BTreeMap<usize, Message>,
    req: &RetrievalRequest,
    params: &SchemeParams,
) -> Result<Message> {
    let n = params.servers();
    if answers.len() != n || queries.len() != n {
        return Err(Error::Validation(format!(
            "expected {n} answers and queries, got {} and {}",
            answers.len(),
            queries.len()
        )));
    }
    for s in req.side() {
        match side_info.get(s) {
            Some(m) if m.len() == params.subpackets() => {}
            Some(m) => {
                return Err(Error::Validation(format!(
                    "side message {s} has {} sub-packets, expected {}",
                    m.len(),
                    params.subpackets()
                )))
            }
            None => return Err(Error::Validation(format!("side message {s} is missing"))),
        }
    }
    let field = params.field();
    let stripped = |server: usize| -> Result<u64> {
        let q = &queries[server - 1];
        let side = field.sum(req.side().iter().map(|s| side_info[s].get(q.entry(*s))));
        let a = answers[server - 1];
        if !field.contains(a.value_or_zero()) {
            return Err(Error::ProtocolViolation(format!(
                "server {server} returned {} outside the field",
                a.value_or_zero()
            )));
        }
        Ok(field.sub(a.value_or_zero(), side))
    };

    let n_star = pattern.inference_server();
    let reference = stripped(n_star)?;
    let subpackets = (1..=params.subpackets())
        .map(|i| {
            let server = pattern.server_for(i);
            if answers[server - 1].is_empty() {
                return Err(Error::ProtocolViolation(format!(
                    "non-inference server {server} returned an empty answer"
                )));
            }
            Ok(field.sub(stripped(server)?, reference))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Message::new(subpackets))
}

/// Number of non-empty answers.
pub fn downloaded_symbols(answers: &[Answer]) -> usize {
    answers.iter().filter(|a| !a.is_empty()).count()
}

/// Downloaded symbols per retrieved message symbol, `count / L`.
pub fn normalized_cost(answers: &[Answer], params: &SchemeParams) -> f64 {
    downloaded_symbols(answers) as f64 / params.subpackets() as f64
}

/// Convenience used by tests and the simulator: one full in-memory retrieval.
pub fn retrieve_in_memory(
    pattern: &RandomPattern,
    req: &RetrievalRequest,
    db: &Database,
    params: &SchemeParams,
) -> Result<(Message, Vec<Query>, Vec<Answer>)> {
    let queries = build_queries(pattern, req, params)?;
    let answers: Vec<Answer> = queries.iter().map(|q| compute_answer(q, db)).collect();
    let msg = decode(&answers, &queries, pattern, &db.side_info(req), req, params)?;
    Ok((msg, queries, answers))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;
    use crate::params::Variant;
    use crate::Rational;
    use num_traits::One;

    fn params_331(q: u64) -> SchemeParams {
        SchemeParams::new(3, 3, 1, Rational::one(), PrimeField::new(q).unwrap(), Variant::WPrivacy).unwrap()
    }

    fn pattern(perm: [usize; 3], fu: usize, fs0: usize, fs1: usize) -> RandomPattern {
        RandomPattern::new(perm.to_vec(), [(3, fu)].into(), [(2, fs0)].into(), [(2, fs1)].into()).unwrap()
    }

    fn q(v: &[usize]) -> Query {
        Query::new(v.to_vec())
    }

    #[test]
    fn queries_match_first_table_rows() {
        let p = params_331(257);
        let req = RetrievalRequest::new(1, [2], 3).unwrap();
        let qs = build_queries(&pattern([0, 1, 2], 1, 1, 1), &req, &p).unwrap();
        assert_eq!(qs, vec![q(&[0, 1, 1]), q(&[1, 1, 1]), q(&[2, 1, 1])]);
        let qs = build_queries(&pattern([0, 1, 2], 0, 0, 1), &req, &p).unwrap();
        assert_eq!(qs, vec![q(&[0, 0, 0]), q(&[1, 1, 0]), q(&[2, 1, 0])]);
    }

    #[test]
    fn inference_server_never_requests_demand() {
        let p = params_331(257);
        let req = RetrievalRequest::new(2, [3], 3).unwrap();
        let pat = RandomPattern::new(vec![1, 0, 2], [(1, 2)].into(), [(3, 1)].into(), [(3, 2)].into()).unwrap();
        let qs = build_queries(&pat, &req, &p).unwrap();
        assert_eq!(pat.inference_server(), 2);
        assert_eq!(qs[1].entry(2), 0);
        assert_eq!(qs[1], q(&[2, 0, 1]));
        assert_eq!(qs[0], q(&[2, 1, 2]));
    }

    #[test]
    fn mismatched_pattern_is_rejected() {
        let p = params_331(257);
        let req = RetrievalRequest::new(1, [3], 3).unwrap();
        // keyed for S = {2}, U = {3}
        assert!(build_queries(&pattern([0, 1, 2], 1, 1, 1), &req, &p).is_err());
    }

    #[test]
    fn answers() {
        let f = PrimeField::new(7).unwrap();
        let db = Database::new(vec![Message::new(vec![5, 2]), Message::new(vec![3, 6]), Message::new(vec![4, 1])], f)
            .unwrap();
        assert_eq!(compute_answer(&q(&[0, 0, 0]), &db), Answer::Empty);
        assert_eq!(compute_answer(&q(&[1, 1, 0]), &db), Answer::Symbol(1));
        assert_eq!(compute_answer(&q(&[0, 0, 1]), &db), Answer::Symbol(4));
        // a sum that wraps to zero stays a symbol
        assert_eq!(compute_answer(&q(&[0, 2, 2]), &db), Answer::Symbol(0));
    }

    #[test]
    fn decode_table_rows() {
        let p = params_331(7);
        let db = Database::new(
            vec![Message::new(vec![5, 2]), Message::new(vec![3, 6]), Message::new(vec![4, 1])],
            p.field(),
        )
        .unwrap();
        let req = RetrievalRequest::new(1, [2], 3).unwrap();
        for pat in [pattern([0, 1, 2], 1, 1, 1), pattern([0, 1, 2], 0, 0, 1), pattern([2, 0, 1], 2, 1, 2)] {
            let (msg, _, answers) = retrieve_in_memory(&pat, &req, &db, &p).unwrap();
            assert_eq!(&msg, db.message(1));
            if pat.f_u()[&3] == 0 {
                assert_eq!(answers[0], Answer::Empty);
                assert_eq!(downloaded_symbols(&answers), 2);
                assert_eq!(normalized_cost(&answers, &p), 1.0);
            } else {
                assert_eq!(downloaded_symbols(&answers), 3);
                assert_eq!(normalized_cost(&answers, &p), 1.5);
            }
        }
    }

    #[test]
    fn empty_answer_from_non_inference_server_is_a_violation() {
        let p = params_331(7);
        let db = Database::random(3, 2, p.field(), &mut rand::rng());
        let req = RetrievalRequest::new(1, [2], 3).unwrap();
        let pat = pattern([0, 1, 2], 1, 1, 1);
        let queries = build_queries(&pat, &req, &p).unwrap();
        let mut answers: Vec<Answer> = queries.iter().map(|x| compute_answer(x, &db)).collect();
        answers[1] = Answer::Empty;
        let err = decode(&answers, &queries, &pat, &db.side_info(&req), &req, &p).unwrap_err();
        assert!(matches!(err, Error::ProtocolViolation(_)));
    }
}
