//! Node preference: fault probabilities and the queue order built on them.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::components::ComponentSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueueOrder {
    /// Fewest components first.
    #[default]
    Bfs,
    /// Most probable first.
    Prob,
}

impl FromStr for QueueOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "bfs" => Ok(QueueOrder::Bfs),
            "prob" => Ok(QueueOrder::Prob),
            other => Err(format!(
                "unknown queue order `{other}` (expected bfs or prob)"
            )),
        }
    }
}

impl fmt::Display for QueueOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueueOrder::Bfs => "bfs",
            QueueOrder::Prob => "prob",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProbabilityError {
    #[error("fault probability of a{id} is {value}; it must lie strictly between 0 and 0.5")]
    OutOfRange { id: usize, value: f64 },
    #[error("expected {expected} fault probabilities, got {got}")]
    WrongCount { expected: usize, got: usize },
    #[error("malformed fault probabilities: {0}")]
    Malformed(String),
}

/// Per-axiom fault probabilities, each in `(0, 0.5)`.
///
/// A node's probability is `∏_{i∈node} p_i · ∏_{i∉node} (1 − p_i)`. Ranking
/// uses the equivalent cost `Σ_{i∈node} ln((1 − p_i)/p_i)`, which is strictly
/// positive per element, so a superset always ranks below its subsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FaultProbabilities {
    p: Vec<f64>,
    weight: Vec<f64>,
}

impl TryFrom<Vec<f64>> for FaultProbabilities {
    type Error = ProbabilityError;

    fn try_from(p: Vec<f64>) -> Result<Self, ProbabilityError> {
        Self::new(p)
    }
}

impl From<FaultProbabilities> for Vec<f64> {
    fn from(fp: FaultProbabilities) -> Vec<f64> {
        fp.p
    }
}

impl FaultProbabilities {
    pub fn new(p: Vec<f64>) -> Result<Self, ProbabilityError> {
        for (i, &value) in p.iter().enumerate() {
            if !(value > 0.0 && value < 0.5) {
                return Err(ProbabilityError::OutOfRange { id: i + 1, value });
            }
        }
        let weight = p.iter().map(|&x| ((1.0 - x) / x).ln()).collect();
        Ok(FaultProbabilities { p, weight })
    }

    pub fn uniform(n: usize, value: f64) -> Result<Self, ProbabilityError> {
        Self::new(vec![value; n])
    }

    /// Uniform draws from `[0.01, 0.49)`, reproducible per seed.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = (0..n).map(|_| rng.gen_range(0.01..0.49)).collect();
        Self::new(p).expect("draws lie inside (0, 0.5)")
    }

    /// Accepts a JSON list `[0.1, ...]` or an object `{"a1": 0.1, ...}`.
    pub fn from_json(text: &str, n: usize) -> Result<Self, ProbabilityError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ProbabilityError::Malformed(e.to_string()))?;
        let p: Vec<f64> = match value {
            serde_json::Value::Array(items) => items
                .iter()
                .map(|v| {
                    v.as_f64()
                        .ok_or_else(|| ProbabilityError::Malformed(format!("{v} is not a number")))
                })
                .collect::<Result<_, _>>()?,
            serde_json::Value::Object(map) => {
                let mut p = vec![f64::NAN; n];
                for (k, v) in &map {
                    let id = k
                        .strip_prefix('a')
                        .and_then(|d| d.parse::<usize>().ok())
                        .filter(|id| (1..=n).contains(id))
                        .ok_or_else(|| {
                            ProbabilityError::Malformed(format!("unknown axiom `{k}`"))
                        })?;
                    p[id - 1] = v.as_f64().ok_or_else(|| {
                        ProbabilityError::Malformed(format!("{v} is not a number"))
                    })?;
                }
                p
            }
            other => return Err(ProbabilityError::Malformed(format!("unexpected {other}"))),
        };
        if p.len() != n {
            return Err(ProbabilityError::WrongCount {
                expected: n,
                got: p.len(),
            });
        }
        Self::new(p)
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn get(&self, id: usize) -> f64 {
        self.p[id - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    /// `Σ ln((1 − p_i)/p_i)` over the node, summed in ascending id order.
    pub fn cost(&self, node: ComponentSet) -> f64 {
        node.iter().map(|id| self.weight[id - 1]).sum()
    }

    pub fn node_probability(&self, node: ComponentSet) -> f64 {
        self.p
            .iter()
            .enumerate()
            .map(|(i, &p)| if node.contains(i + 1) { p } else { 1.0 - p })
            .product()
    }
}

/// Queue order plus the probabilities it may depend on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub order: QueueOrder,
    pub pr: FaultProbabilities,
}

impl Ranking {
    pub fn new(order: QueueOrder, pr: FaultProbabilities) -> Self {
        Ranking { order, pr }
    }

    pub fn key(&self, set: ComponentSet, seq: u64) -> NodeKey {
        NodeKey::new(self.order, &self.pr, set, seq)
    }
}

/// Total order on queue entries: primary rank (cardinality or cost), then
/// the sorted id list, then insertion sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeKey {
    pub rank: f64,
    pub set: ComponentSet,
    pub seq: u64,
}

impl NodeKey {
    pub fn new(order: QueueOrder, pr: &FaultProbabilities, set: ComponentSet, seq: u64) -> Self {
        let rank = match order {
            QueueOrder::Bfs => set.len() as f64,
            QueueOrder::Prob => pr.cost(set),
        };
        NodeKey { rank, set, seq }
    }
}

impl Eq for NodeKey {}

impl Ord for NodeKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank
            .total_cmp(&other.rank)
            .then_with(|| self.set.cmp(&other.set))
            .then_with(|| self.seq.cmp(&other.seq))
    }
}

impl PartialOrd for NodeKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A list kept sorted by [`NodeKey`]; the head is the most preferred entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankedQueue<T> {
    entries: Vec<(NodeKey, T)>,
}

impl<T> Default for RankedQueue<T> {
    fn default() -> Self {
        RankedQueue {
            entries: Vec::new(),
        }
    }
}

impl<T> RankedQueue<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: NodeKey, item: T) {
        let at = self.entries.partition_point(|(k, _)| *k <= key);
        self.entries.insert(at, (key, item));
    }

    pub fn pop_first(&mut self) -> Option<(NodeKey, T)> {
        if self.entries.is_empty() {
            None
        } else {
            Some(self.entries.remove(0))
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(NodeKey, T)> {
        self.entries.iter()
    }

    pub fn items(&self) -> impl Iterator<Item = &T> {
        self.entries.iter().map(|(_, t)| t)
    }

    pub fn contains_set(&self, set: ComponentSet) -> bool {
        self.entries.iter().any(|(k, _)| k.set == set)
    }

    pub fn retain(&mut self, mut keep: impl FnMut(&mut T) -> bool) {
        self.entries.retain_mut(|(_, t)| keep(t));
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.entries.iter_mut().map(|(_, t)| t)
    }

    pub fn drain(&mut self) -> impl Iterator<Item = (NodeKey, T)> + '_ {
        self.entries.drain(..)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(ids: &[usize]) -> ComponentSet {
        ComponentSet::from_ids(ids.iter().copied())
    }

    #[test]
    fn rejects_out_of_range_probabilities() {
        assert!(FaultProbabilities::new(vec![0.1, 0.5]).is_err());
        assert!(FaultProbabilities::new(vec![0.0]).is_err());
        assert!(FaultProbabilities::new(vec![f64::NAN]).is_err());
        assert!(FaultProbabilities::new(vec![0.49, 0.01]).is_ok());
    }

    #[test]
    fn supersets_rank_lower() {
        let pr = FaultProbabilities::new(vec![0.4, 0.2, 0.05]).unwrap();
        let a = s(&[1]);
        let ab = s(&[1, 2]);
        assert!(pr.cost(a) < pr.cost(ab));
        assert!(pr.node_probability(a) > pr.node_probability(ab));
        // cost order agrees with probability order
        assert!(pr.cost(s(&[1])) < pr.cost(s(&[2])));
        assert!(pr.node_probability(s(&[1])) > pr.node_probability(s(&[2])));
    }

    #[test]
    fn keys_break_ties_by_set_then_sequence() {
        let pr = FaultProbabilities::uniform(3, 0.1).unwrap();
        let k = |ids: &[usize], seq| NodeKey::new(QueueOrder::Bfs, &pr, s(ids), seq);
        assert!(k(&[3], 9) < k(&[1, 2], 0));
        assert!(k(&[1, 3], 5) < k(&[2, 3], 1));
        assert!(k(&[1, 2], 1) < k(&[1, 2], 2));
        let mut q = RankedQueue::new();
        for (ids, seq) in [
            (&[2, 3][..], 0),
            (&[1][..], 1),
            (&[1, 2][..], 2),
            (&[1, 2][..], 3),
        ] {
            q.insert(k(ids, seq), seq);
        }
        let order: Vec<u64> = q.items().copied().collect();
        assert_eq!(order, vec![1, 2, 3, 0]);
    }

    #[test]
    fn json_forms() {
        let a = FaultProbabilities::from_json("[0.1, 0.2]", 2).unwrap();
        let b = FaultProbabilities::from_json(r#"{"a2": 0.2, "a1": 0.1}"#, 2).unwrap();
        assert_eq!(a, b);
        assert!(FaultProbabilities::from_json("[0.1]", 2).is_err());
        assert!(FaultProbabilities::from_json(r#"{"a1": 0.1}"#, 2).is_err());
        assert!(FaultProbabilities::from_json(r#"{"b1": 0.1}"#, 1).is_err());
        let round: FaultProbabilities =
            serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        assert_eq!(round, a);
    }

    #[test]
    fn random_is_reproducible() {
        assert_eq!(
            FaultProbabilities::random(5, 7),
            FaultProbabilities::random(5, 7)
        );
        assert_ne!(
            FaultProbabilities::random(5, 7),
            FaultProbabilities::random(5, 8)
        );
    }
}
