use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use lpirsi::protocol::runner::simulate_retrieval;
use lpirsi::retrieval::{build_queries, compute_answer};
use lpirsi::schemes::{
    sample_pattern, shape_distribution, w_level_distribution, w_weight_levels, ws_level_distribution,
};
use lpirsi::{Answer, Database, PrimeField, Rational, RetrievalRequest, SchemeParams, Variant};

const PRIMES: [u64; 5] = [2, 3, 5, 257, 65_537];

/// Valid parameters for either variant: `WS` forces `M = 1` and `r >= 1`.
fn any_params() -> impl Strategy<Value = SchemeParams> {
    (2usize..=5, 2usize..=8, 0usize..8, 1i64..=8, 1i64..=8, 0usize..PRIMES.len(), any::<bool>()).prop_filter_map(
        "invalid combination",
        |(n, k, m, a, b, q, ws)| {
            let (m, variant) = if ws { (1, Variant::WsPrivacy) } else { (m, Variant::WPrivacy) };
            if m >= k || a > b {
                return None;
            }
            let t = Rational::new(a.into(), b.into());
            let p = SchemeParams::new(n, k, m, t, PrimeField::new(PRIMES[q]).unwrap(), variant).ok()?;
            (!ws || p.require_r_at_least_one().is_ok()).then_some(p)
        },
    )
}

fn any_request(k: usize, m: usize, pick: usize) -> RetrievalRequest {
    let all = RetrievalRequest::all(k, m);
    all[pick % all.len()].clone()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn derived_quantities(p in any_params()) {
        prop_assert_eq!(p.subpackets(), p.servers() - 1);
        prop_assert_eq!(p.g(), Rational::new(p.messages().into(), (p.side_info() + 1).into()));
        prop_assert_eq!(p.r(), Rational::from_integer((p.servers() - 1).into()) * p.t());
        prop_assert!(p.t() > &Rational::zero() && p.t() <= &Rational::one());
    }

    #[test]
    fn laws_are_normalized(p in any_params()) {
        let levels = match p.variant() {
            Variant::WPrivacy => w_level_distribution(&p).unwrap(),
            Variant::WsPrivacy => ws_level_distribution(&p).unwrap(),
        };
        let total: Rational = levels.iter().map(|(_, q)| q.clone()).sum();
        prop_assert_eq!(total, Rational::one());
        prop_assert!(levels.iter().all(|(_, q)| q >= &Rational::zero()));
        let shapes = shape_distribution(&p).unwrap();
        let total: Rational = shapes.iter().map(|(_, q)| q.clone()).sum();
        prop_assert_eq!(total, Rational::one());
    }

    #[test]
    fn weight_levels(p in any_params()) {
        let block = p.side_info() + 1;
        for level in w_weight_levels(&p) {
            prop_assert_eq!(level.ell, (level.k * block).min(p.messages() - p.side_info() - 1));
            prop_assert_eq!(level.s0_weight, level.k * block - level.ell);
            prop_assert!(level.s0_weight <= p.side_info());
        }
    }

    #[test]
    fn sampled_retrievals(p in any_params(), pick in any::<usize>(), seed in any::<u64>()) {
        let req = any_request(p.messages(), p.side_info(), pick);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let pattern = sample_pattern(&p, &req, &mut rng).unwrap();
        let mut perm = pattern.perm().to_vec();
        perm.sort_unstable();
        prop_assert_eq!(perm, (0..p.servers()).collect::<Vec<_>>());
        prop_assert_eq!(pattern.pi(pattern.inference_server()), 0);

        let db = Database::random(p.messages(), p.subpackets(), p.field(), &mut rng);
        prop_assert!(db.messages().iter().all(|m| m.get(0) == 0 && m.len() == p.subpackets()));
        let queries = build_queries(&pattern, &req, &p).unwrap();
        let k = p.messages();
        for (i, q) in queries.iter().enumerate() {
            prop_assert_eq!(q.len(), k);
            prop_assert!(q.indices().iter().all(|&j| j < p.servers()));
            let a = compute_answer(q, &db);
            prop_assert_eq!(a.is_empty(), q.is_zero());
            if i + 1 != pattern.inference_server() {
                prop_assert!(!q.is_zero());
            }
            if p.variant() == Variant::WPrivacy {
                let w = q.weight();
                prop_assert!(w == 0 || w == k || w % (p.side_info() + 1) == 0, "weight {} of {:?}", w, q);
            }
        }

        let outcome = simulate_retrieval(&p, &req, &db, &mut ChaCha20Rng::seed_from_u64(seed)).unwrap();
        let nonempty = outcome.answers.iter().filter(|a| !matches!(a, Answer::Empty)).count();
        prop_assert_eq!(outcome.symbols, nonempty);
        prop_assert!(nonempty >= p.servers() - 1);
        prop_assert_eq!(&outcome.message, db.message(req.demand()));
    }
}
