//! Leakage certification from exact per-server laws.
//!
//! For the W variant each demand `W` is compared against every other `W'`,
//! with the side-information set averaged out uniformly over all
//! `C(K-1, M)` choices. For the (W, S) variant every `(W, S)` is compared
//! against every other `(W', S')`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::Result;
use crate::model::Query;
use crate::params::{SchemeParams, Variant};
use crate::Rational;

use super::query_law::{enumerate_all_laws, QueryLaw};

/// A probability ratio; `Unbounded` when the denominator is zero and the
/// numerator is not.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ratio {
    Finite(Rational),
    Unbounded,
}

impl Ratio {
    fn of(num: &Rational, den: &Rational) -> Option<Ratio> {
        match (num.is_zero(), den.is_zero()) {
            (true, true) => None,
            (false, true) => Some(Ratio::Unbounded),
            _ => Some(Ratio::Finite(num / den)),
        }
    }

    /// `ln` of the ratio; `+∞` when unbounded.
    pub fn ln(&self) -> f64 {
        match self {
            Ratio::Finite(r) => crate::params::rational_to_f64(r).ln(),
            Ratio::Unbounded => f64::INFINITY,
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Finite(r) => write!(f, "{r}"),
            Ratio::Unbounded => f.write_str("unbounded"),
        }
    }
}

/// What a leakage ratio conditions on: the demand, plus the side set for the
/// (W, S) variant.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Condition {
    pub demand: usize,
    pub side: Option<Vec<usize>>,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.side {
            None => write!(f, "W={}", self.demand),
            Some(s) => {
                let s: Vec<String> = s.iter().map(usize::to_string).collect();
                write!(f, "(W={}, S={{{}}})", self.demand, s.join(","))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness<O> {
    pub server: usize,
    pub outcome: O,
    pub numerator: Condition,
    pub denominator: Condition,
    pub numerator_prob: Rational,
    pub denominator_prob: Rational,
}

#[derive(Clone, Debug)]
pub struct LeakageReport<O = Query> {
    pub variant: Variant,
    pub t: Rational,
    pub max_ratio: Ratio,
    pub witness: Option<Witness<O>>,
    /// Every distinct ratio realized by some server, outcome and pair of conditions.
    pub ratio_set: BTreeSet<Ratio>,
    /// `max_ratio <= 1/t`.
    pub certified: bool,
}

impl<O> LeakageReport<O> {
    /// `e^ε = 1/t`.
    pub fn allowed_ratio(&self) -> Rational {
        Rational::one() / &self.t
    }

    pub fn ratio_set_within_t_band(&self) -> bool {
        let allowed = [self.t.clone(), Rational::one(), self.allowed_ratio()];
        self.ratio_set.iter().all(|r| matches!(r, Ratio::Finite(x) if allowed.contains(x)))
    }
}

/// `(W, S, per-server laws)` for each request.
pub(crate) type RequestLaws<O> = Vec<(usize, Vec<usize>, Vec<BTreeMap<O, Rational>>)>;

/// Per-condition, per-server laws over outcomes of type `O`.
pub(crate) type ConditionedLaws<O> = Vec<(Condition, Vec<BTreeMap<O, Rational>>)>;

/// Groups `(W, S)` laws into the conditions the variant compares.
pub(crate) fn condition_laws<O: Ord + Clone>(variant: Variant, laws: RequestLaws<O>) -> ConditionedLaws<O> {
    match variant {
        Variant::WsPrivacy => {
            laws.into_iter().map(|(demand, side, law)| (Condition { demand, side: Some(side) }, law)).collect()
        }
        Variant::WPrivacy => {
            let mut grouped: BTreeMap<usize, (usize, Vec<BTreeMap<O, Rational>>)> = BTreeMap::new();
            for (demand, _, law) in laws {
                let entry = grouped.entry(demand).or_insert_with(|| (0, vec![BTreeMap::new(); law.len()]));
                entry.0 += 1;
                for (acc, server) in entry.1.iter_mut().zip(law) {
                    for (o, p) in server {
                        *acc.entry(o).or_insert_with(Rational::zero) += p;
                    }
                }
            }
            grouped
                .into_iter()
                .map(|(demand, (count, mut law))| {
                    let weight = Rational::new(BigInt::one(), BigInt::from(count));
                    for server in &mut law {
                        for p in server.values_mut() {
                            *p *= &weight;
                        }
                    }
                    (Condition { demand, side: None }, law)
                })
                .collect()
        }
    }
}

struct Partial<O> {
    ratios: BTreeSet<Ratio>,
    best: Option<(Ratio, Witness<O>)>,
}

impl<O> Partial<O> {
    fn empty() -> Self {
        Self { ratios: BTreeSet::new(), best: None }
    }

    fn merge(mut self, other: Self) -> Self {
        self.ratios.extend(other.ratios);
        self.best = match (self.best, other.best) {
            (Some(a), Some(b)) => Some(if b.0 > a.0 { b } else { a }),
            (a, b) => a.or(b),
        };
        self
    }
}

/// Realized ratio set and maximum over every server, outcome and ordered
/// pair of distinct conditions.
pub(crate) fn certify<O>(variant: Variant, t: &Rational, laws: &ConditionedLaws<O>) -> LeakageReport<O>
where
    O: Ord + Clone + Send + Sync,
{
    let servers = laws.first().map(|(_, l)| l.len()).unwrap_or(0);
    let cells: Vec<(usize, &O)> = (0..servers)
        .flat_map(|n| {
            let outcomes: BTreeSet<&O> = laws.iter().flat_map(|(_, l)| l[n].keys()).collect();
            outcomes.into_iter().map(move |o| (n, o))
        })
        .collect();
    let zero = Rational::zero();

    let result = cells
        .par_iter()
        .map(|&(n, o)| {
            // distinct probabilities with one representative condition each
            let mut values: BTreeMap<&Rational, (&Condition, usize)> = BTreeMap::new();
            for (cond, law) in laws {
                let p = law[n].get(o).unwrap_or(&zero);
                values.entry(p).or_insert((cond, 0)).1 += 1;
            }
            let mut part = Partial::empty();
            if values.iter().any(|(p, &(_, c))| c > 1 && !p.is_zero()) {
                part.ratios.insert(Ratio::Finite(Rational::one()));
            }
            for a in values.keys() {
                for b in values.keys() {
                    if a != b {
                        part.ratios.extend(Ratio::of(a, b));
                    }
                }
            }
            let (&hi, &(hi_cond, _)) = values.iter().next_back().expect("at least one condition");
            let (&lo, &(lo_cond, _)) = values.iter().next().expect("at least one condition");
            let (numerator, denominator) = if values.len() == 1 {
                // every condition agrees; pick two distinct ones if they exist
                let other = laws.iter().map(|(c, _)| c).find(|c| *c != hi_cond).unwrap_or(hi_cond);
                (hi_cond, other)
            } else {
                (hi_cond, lo_cond)
            };
            if let Some(r) = Ratio::of(hi, lo) {
                part.best = Some((
                    r,
                    Witness {
                        server: n + 1,
                        outcome: o.clone(),
                        numerator: numerator.clone(),
                        denominator: denominator.clone(),
                        numerator_prob: hi.clone(),
                        denominator_prob: lo.clone(),
                    },
                ));
            }
            part
        })
        .reduce(Partial::empty, Partial::merge);

    let (max_ratio, witness) = match result.best {
        Some((r, w)) => (r, Some(w)),
        None => (Ratio::Finite(Rational::one()), None),
    };
    let allowed = Ratio::Finite(Rational::one() / t);
    LeakageReport {
        variant,
        t: t.clone(),
        certified: max_ratio <= allowed,
        max_ratio,
        witness,
        ratio_set: result.ratios,
    }
}

pub(crate) fn split_laws(laws: Vec<QueryLaw>) -> RequestLaws<Query> {
    laws.into_iter()
        .map(|law| {
            let req = law.request().clone();
            (req.demand(), req.side().to_vec(), law.into_per_server())
        })
        .collect()
}

/// Certifies the variant's leakage condition on query marginals by exact
/// enumeration.
pub fn max_leakage_ratio(params: &SchemeParams) -> Result<LeakageReport> {
    if params.variant() == Variant::WsPrivacy {
        params.require_r_at_least_one()?;
    }
    let laws = split_laws(enumerate_all_laws(params)?);
    Ok(certify(params.variant(), params.t(), &condition_laws(params.variant(), laws)))
}
