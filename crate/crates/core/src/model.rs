//! Messages, requests, random patterns, queries and answers.
//!
//! Message indices are 1-based (`1..=K`) and so are server indices
//! (`1..=N`). Sub-packet indices run over `0..N`, where index 0 names a
//! dummy symbol that is always the field zero.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{PrimeField, Symbol};

/// One message: `L` sub-packets addressed `1..=L`; address 0 is the dummy zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Message {
    subpackets: Vec<Symbol>,
}

impl Message {
    pub fn new(subpackets: Vec<Symbol>) -> Self {
        Self { subpackets }
    }

    pub fn len(&self) -> usize {
        self.subpackets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subpackets.is_empty()
    }

    /// Sub-packet at `index`; index 0 is the dummy symbol and reads as zero.
    ///
    /// Panics if `index > L`.
    pub fn get(&self, index: usize) -> Symbol {
        if index == 0 {
            0
        } else {
            self.subpackets[index - 1]
        }
    }

    pub fn subpackets(&self) -> &[Symbol] {
        &self.subpackets
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, s) in self.subpackets.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "]")
    }
}

/// The K replicated messages every server stores.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Database {
    messages: Vec<Message>,
    field: PrimeField,
}

impl Database {
    pub fn new(messages: Vec<Message>, field: PrimeField) -> Result<Self> {
        let len = messages.first().map(Message::len).unwrap_or(0);
        for (i, m) in messages.iter().enumerate() {
            if m.len() != len {
                return Err(Error::Validation(format!(
                    "message {} has {} sub-packets, expected {len}",
                    i + 1,
                    m.len()
                )));
            }
            if let Some(bad) = m.subpackets().iter().find(|&&s| !field.contains(s)) {
                return Err(Error::Validation(format!(
                    "message {} holds {bad}, outside the field of size {}",
                    i + 1,
                    field.modulus()
                )));
            }
        }
        Ok(Self { messages, field })
    }

    pub fn random<R: Rng + ?Sized>(messages: usize, subpackets: usize, field: PrimeField, rng: &mut R) -> Self {
        let messages = (0..messages)
            .map(|_| Message::new((0..subpackets).map(|_| rng.random_range(0..field.modulus())).collect()))
            .collect();
        Self { messages, field }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn message_count(&self) -> usize {
        self.messages.len()
    }

    pub fn subpackets(&self) -> usize {
        self.messages.first().map(Message::len).unwrap_or(0)
    }

    /// Message `index` (1-based). Panics if out of range.
    pub fn message(&self, index: usize) -> &Message {
        &self.messages[index - 1]
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    /// The side-information messages `X_S` the user is assumed to hold.
    pub fn side_info(&self, req: &RetrievalRequest) -> BTreeMap<usize, Message> {
        req.side().iter().map(|&s| (s, self.message(s).clone())).collect()
    }
}

/// Demand index `W` and side-information set `S` (sorted, `W ∉ S`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RetrievalRequest {
    demand: usize,
    side: Vec<usize>,
}

impl RetrievalRequest {
    pub fn new(demand: usize, side: impl IntoIterator<Item = usize>, messages: usize) -> Result<Self> {
        if demand == 0 || demand > messages {
            return Err(Error::Validation(format!("demand index {demand} outside [1, {messages}]")));
        }
        let mut side: Vec<usize> = side.into_iter().collect();
        side.sort_unstable();
        side.dedup();
        if let Some(&bad) = side.iter().find(|&&s| s == 0 || s > messages) {
            return Err(Error::Validation(format!("side index {bad} outside [1, {messages}]")));
        }
        if side.contains(&demand) {
            return Err(Error::Validation(format!("demand index {demand} cannot also be side information")));
        }
        Ok(Self { demand, side })
    }

    pub fn demand(&self) -> usize {
        self.demand
    }

    pub fn side(&self) -> &[usize] {
        &self.side
    }

    /// `U = [1, K] \ (S ∪ {W})`, ascending.
    pub fn unknown(&self, messages: usize) -> Vec<usize> {
        (1..=messages).filter(|i| *i != self.demand && !self.side.contains(i)).collect()
    }

    /// Every `(W, S)` with `|S| = m`, in lexicographic order.
    pub fn all(messages: usize, m: usize) -> Vec<Self> {
        let mut out = Vec::new();
        for demand in 1..=messages {
            let others: Vec<usize> = (1..=messages).filter(|&i| i != demand).collect();
            for side in subsets(&others, m) {
                out.push(Self { demand, side });
            }
        }
        out
    }
}

/// All `k`-subsets of `items`, each in the order of `items`, lexicographic overall.
pub fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn go(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            go(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(items, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}

/// One realization of the scheme randomness `(π, F_U, F_S⁽⁰⁾, F_S⁽¹⁾)`.
///
/// `perm[n - 1] = π(n)` maps server `n` to the sub-packet of the demand
/// message it is asked for; exactly one server maps to 0, the inference
/// server. The three maps are keyed by message index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RandomPattern {
    perm: Vec<usize>,
    f_u: BTreeMap<usize, usize>,
    f_s0: BTreeMap<usize, usize>,
    f_s1: BTreeMap<usize, usize>,
}

impl RandomPattern {
    pub fn new(
        perm: Vec<usize>,
        f_u: BTreeMap<usize, usize>,
        f_s0: BTreeMap<usize, usize>,
        f_s1: BTreeMap<usize, usize>,
    ) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(Error::Validation(format!(
                    "{perm:?} is not a bijection onto [0, {}]",
                    n.saturating_sub(1)
                )));
            }
            seen[p] = true;
        }
        for (name, map) in [("f_U", &f_u), ("f_S0", &f_s0), ("f_S1", &f_s1)] {
            if let Some((i, v)) = map.iter().find(|(_, &v)| v >= n) {
                return Err(Error::Validation(format!("{name}[{i}] = {v} outside [0, {}]", n - 1)));
            }
        }
        Ok(Self { perm, f_u, f_s0, f_s1 })
    }

    /// Builds the pattern from vectors ordered like `req.unknown()` and `req.side()`.
    pub fn from_vectors(
        perm: Vec<usize>,
        req: &RetrievalRequest,
        messages: usize,
        f_u: &[usize],
        f_s0: &[usize],
        f_s1: &[usize],
    ) -> Result<Self> {
        let unknown = req.unknown(messages);
        if unknown.len() != f_u.len() || req.side().len() != f_s0.len() || req.side().len() != f_s1.len() {
            return Err(Error::Validation("pattern vector lengths do not match the request".into()));
        }
        let zip = |keys: &[usize], vals: &[usize]| keys.iter().copied().zip(vals.iter().copied()).collect();
        Self::new(perm, zip(&unknown, f_u), zip(req.side(), f_s0), zip(req.side(), f_s1))
    }

    pub fn servers(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// `π(n)` for 1-based server `n`.
    pub fn pi(&self, server: usize) -> usize {
        self.perm[server - 1]
    }

    /// The 1-based server assigned sub-packet `index`, i.e. `π⁻¹(index)`.
    pub fn server_for(&self, index: usize) -> usize {
        self.perm.iter().position(|&p| p == index).map(|i| i + 1).expect("perm is a bijection")
    }

    /// `n* = π⁻¹(0)`.
    pub fn inference_server(&self) -> usize {
        self.server_for(0)
    }

    pub fn f_u(&self) -> &BTreeMap<usize, usize> {
        &self.f_u
    }

    pub fn f_s0(&self) -> &BTreeMap<usize, usize> {
        &self.f_s0
    }

    pub fn f_s1(&self) -> &BTreeMap<usize, usize> {
        &self.f_s1
    }
}

/// Requested sub-packet index per message (entry `i - 1` is for message `i`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Query {
    indices: Vec<usize>,
}

impl Query {
    pub fn new(indices: Vec<usize>) -> Self {
        Self { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Index requested from message `i` (1-based).
    pub fn entry(&self, message: usize) -> usize {
        self.indices[message - 1]
    }

    /// Number of nonzero entries.
    pub fn weight(&self) -> usize {
        self.indices.iter().filter(|&&i| i != 0).count()
    }

    pub fn is_zero(&self) -> bool {
        self.indices.iter().all(|&i| i == 0)
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let compact = self.indices.iter().all(|&i| i < 10);
        for (pos, i) in self.indices.iter().enumerate() {
            if !compact && pos > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

/// A server's reply. `Empty` is distinct from `Symbol(0)`: it costs no download.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Answer {
    Empty,
    Symbol(Symbol),
}

impl Answer {
    pub fn is_empty(&self) -> bool {
        matches!(self, Answer::Empty)
    }

    /// The value, with `Empty` read as zero.
    pub fn value_or_zero(&self) -> Symbol {
        match *self {
            Answer::Empty => 0,
            Answer::Symbol(s) => s,
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::Empty => f.write_str("∅"),
            Answer::Symbol(s) => write!(f, "{s}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dummy_subpacket_reads_zero() {
        let m = Message::new(vec![4, 9]);
        assert_eq!(m.get(0), 0);
        assert_eq!(m.get(1), 4);
        assert_eq!(m.get(2), 9);
    }

    #[test]
    fn database_validation() {
        let f = PrimeField::new(7).unwrap();
        assert!(Database::new(vec![Message::new(vec![1, 2]), Message::new(vec![3])], f).is_err());
        assert!(Database::new(vec![Message::new(vec![1, 7])], f).is_err());
        let db = Database::new(vec![Message::new(vec![1, 2]), Message::new(vec![3, 4])], f).unwrap();
        assert_eq!(db.message(2).get(1), 3);
        assert_eq!(db.subpackets(), 2);
    }

    #[test]
    fn request_sets() {
        let req = RetrievalRequest::new(1, [2], 3).unwrap();
        assert_eq!(req.unknown(3), vec![3]);
        let req = RetrievalRequest::new(3, [5, 1], 6).unwrap();
        assert_eq!(req.side(), &[1, 5]);
        assert_eq!(req.unknown(6), vec![2, 4, 6]);
        assert!(RetrievalRequest::new(0, [], 3).is_err());
        assert!(RetrievalRequest::new(1, [1], 3).is_err());
        assert!(RetrievalRequest::new(1, [4], 3).is_err());
    }

    #[test]
    fn all_requests_counts() {
        assert_eq!(RetrievalRequest::all(3, 1).len(), 6);
        assert_eq!(RetrievalRequest::all(6, 2).len(), 6 * 10);
        assert_eq!(RetrievalRequest::all(4, 0).len(), 4);
        assert_eq!(subsets(&[1, 2, 3, 4], 2).len(), 6);
        assert_eq!(subsets(&[1, 2], 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn hamming_weight_examples() {
        assert_eq!(Query::new(vec![0, 0, 0]).weight(), 0);
        assert_eq!(Query::new(vec![0, 1, 1]).weight(), 2);
        assert_eq!(Query::new(vec![1, 2, 1, 2]).weight(), 4);
    }

    #[test]
    fn pattern_rejects_non_bijection() {
        let empty = BTreeMap::new;
        assert!(RandomPattern::new(vec![0, 0, 2], empty(), empty(), empty()).is_err());
        assert!(RandomPattern::new(vec![0, 1, 3], empty(), empty(), empty()).is_err());
        let p = RandomPattern::new(vec![2, 0, 1], empty(), empty(), empty()).unwrap();
        assert_eq!(p.inference_server(), 2);
        assert_eq!(p.server_for(1), 3);
    }
}
