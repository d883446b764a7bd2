use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::model::{Database, RetrievalRequest};
use crate::params::{SchemeParams, Variant};
use crate::protocol::runner::simulate_retrieval;
use crate::schemes::{w_level_distribution, ws_level_distribution};
use crate::Rational;

/// Probability that the inference server's query is all-zero: the level-0
/// mass in either scheme (for (W, S)-privacy `s_0 = 0` is forced at `ℓ = 0`).
pub fn empty_probability(params: &SchemeParams) -> Result<Rational> {
    let law = match params.variant() {
        Variant::WPrivacy => w_level_distribution(params)?,
        Variant::WsPrivacy => ws_level_distribution(params)?,
    };
    Ok(law.probability(&0))
}

/// `1 + (1 - P_empty) / (N - 1)`.
pub fn exact_download_cost(params: &SchemeParams) -> Result<Rational> {
    let p_empty = empty_probability(params)?;
    let n1 = Rational::from_integer((params.servers() - 1).into());
    Ok(Rational::one() + (Rational::one() - p_empty) / n1)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// Monte Carlo download cost over `trials` in-process retrievals with a
/// uniformly random `(W, S)` each time and one random database.
pub fn estimate_download_cost(params: &SchemeParams, trials: usize, seed: u64) -> Result<CostEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be at least 1".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let db = Database::random(params.messages(), params.subpackets(), params.field(), &mut rng);
    let requests = RetrievalRequest::all(params.messages(), params.side_info());
    let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
    for _ in 0..trials {
        let req = &requests[rng.random_range(0..requests.len())];
        let cost = simulate_retrieval(params, req, &db, &mut rng)?.normalized_cost();
        sum += cost;
        sum_sq += cost * cost;
    }
    let n = trials as f64;
    let mean = sum / n;
    let stderr = if trials > 1 {
        let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(CostEstimate { mean, stderr, trials })
}

/// `true` when `|mean - exact| <= k · stderr`; an exact match is required
/// when the sample has no spread.
pub fn within_sigma(estimate: &CostEstimate, exact: f64, k: f64) -> bool {
    let gap = (estimate.mean - exact).abs();
    if estimate.stderr.is_zero() {
        return gap < 1e-12;
    }
    gap <= k * estimate.stderr
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::query_law::enumerate_query_law;
    use crate::field::PrimeField;
    use crate::model::Query;
    use crate::params::rational_to_f64;
    use crate::schemes::{reference_cost_exact, shape_distribution, CostModel};

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn params(n: usize, k: usize, m: usize, t: Rational, v: Variant) -> SchemeParams {
        SchemeParams::new(n, k, m, t, PrimeField::default(), v).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(exact_download_cost(&params(3, 3, 1, rat(1, 1), Variant::WPrivacy)).unwrap(), rat(5, 4));
        assert_eq!(exact_download_cost(&params(3, 3, 1, rat(1, 1), Variant::WsPrivacy)).unwrap(), rat(4, 3));
        assert_eq!(exact_download_cost(&params(3, 4, 1, rat(1, 1), Variant::WsPrivacy)).unwrap(), rat(13, 9));
    }

    #[test]
    fn empty_probability_from_shapes_and_from_enumeration() {
        for (n, k, v, t) in [
            (3, 3, Variant::WPrivacy, rat(1, 2)),
            (3, 4, Variant::WPrivacy, rat(3, 4)),
            (3, 4, Variant::WsPrivacy, rat(1, 2)),
            (4, 4, Variant::WsPrivacy, rat(1, 2)),
        ] {
            let p = params(n, k, 1, t, v);
            let from_shapes: Rational = shape_distribution(&p)
                .unwrap()
                .iter()
                .filter(|(s, _)| s.empties_inference_server())
                .map(|(_, q)| q.clone())
                .sum();
            assert_eq!(from_shapes, empty_probability(&p).unwrap());
            let law = enumerate_query_law(&p, &RetrievalRequest::new(1, [2], k).unwrap()).unwrap();
            let zero = Query::new(vec![0; k]);
            let from_law: Rational = (1..=n).map(|s| law.probability(s, &zero)).sum();
            assert_eq!(from_law, empty_probability(&p).unwrap());
        }
    }

    #[test]
    fn matches_closed_forms() {
        for n in 2..=5 {
            for k in 2..=8 {
                for t in [rat(1, 1), rat(1, 2)] {
                    for m in 0..k {
                        let p = params(n, k, m, t.clone(), Variant::WPrivacy);
                        assert_eq!(
                            exact_download_cost(&p).unwrap(),
                            reference_cost_exact(CostModel::LeakyPirSiW, &p).unwrap()
                        );
                    }
                    let p = params(n, k, 1, t.clone(), Variant::WsPrivacy);
                    assert_eq!(
                        exact_download_cost(&p).unwrap(),
                        reference_cost_exact(CostModel::LeakyPirSiWs, &p).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn single_trial_support() {
        let p = params(3, 3, 1, rat(1, 1), Variant::WPrivacy);
        for seed in 0..20 {
            let est = estimate_download_cost(&p, 1, seed).unwrap();
            assert!(est.mean == 1.0 || est.mean == 1.5);
            assert_eq!(est.stderr, 0.0);
        }
        assert!(estimate_download_cost(&p, 0, 0).is_err());
    }

    #[test]
    fn monte_carlo_agrees() {
        let p = params(3, 4, 1, rat(1, 2), Variant::WPrivacy);
        let est = estimate_download_cost(&p, 20_000, 5).unwrap();
        let exact = rational_to_f64(&exact_download_cost(&p).unwrap());
        assert!(within_sigma(&est, exact, 4.0), "{est:?} vs {exact}");
    }
}
