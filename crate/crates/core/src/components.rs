//! Sets of axiom ids, used for both diagnoses and conflicts.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest axiom id a [`ComponentSet`] can hold.
pub const MAX_COMPONENTS: usize = 64;

/// A set of 1-based axiom ids stored as a bitmask.
///
/// `Ord` compares the ascending element lists lexicographically, so
/// `[1,2] < [1,2,3] < [1,3] < [2]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ComponentSet(u64);

impl ComponentSet {
    pub const EMPTY: ComponentSet = ComponentSet(0);

    /// Panics if an id is 0 or above [`MAX_COMPONENTS`].
    pub fn from_ids(ids: impl IntoIterator<Item = usize>) -> Self {
        let mut s = ComponentSet::EMPTY;
        for id in ids {
            s.insert(id);
        }
        s
    }

    /// `{1, ..., n}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_COMPONENTS, "at most {MAX_COMPONENTS} components");
        if n == MAX_COMPONENTS {
            ComponentSet(u64::MAX)
        } else {
            ComponentSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(id: usize) -> Self {
        Self::from_ids([id])
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn from_bits(bits: u64) -> Self {
        ComponentSet(bits)
    }

    fn bit(id: usize) -> u64 {
        assert!(
            (1..=MAX_COMPONENTS).contains(&id),
            "component id {id} outside 1..={MAX_COMPONENTS}"
        );
        1u64 << (id - 1)
    }

    pub fn insert(&mut self, id: usize) {
        self.0 |= Self::bit(id);
    }

    pub fn remove(&mut self, id: usize) {
        self.0 &= !Self::bit(id);
    }

    pub fn with(self, id: usize) -> Self {
        ComponentSet(self.0 | Self::bit(id))
    }

    pub fn contains(self, id: usize) -> bool {
        (1..=MAX_COMPONENTS).contains(&id) && self.0 & Self::bit(id) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: ComponentSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_proper_subset(self, other: ComponentSet) -> bool {
        self != other && self.is_subset(other)
    }

    pub fn is_superset(self, other: ComponentSet) -> bool {
        other.is_subset(self)
    }

    pub fn is_proper_superset(self, other: ComponentSet) -> bool {
        other.is_proper_subset(self)
    }

    pub fn is_disjoint(self, other: ComponentSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn union(self, other: ComponentSet) -> Self {
        ComponentSet(self.0 | other.0)
    }

    pub fn intersection(self, other: ComponentSet) -> Self {
        ComponentSet(self.0 & other.0)
    }

    pub fn difference(self, other: ComponentSet) -> Self {
        ComponentSet(self.0 & !other.0)
    }

    /// Ids in ascending order.
    pub fn iter(self) -> Iter {
        Iter(self.0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Largest id, if any.
    pub fn max(self) -> Option<usize> {
        (self.0 != 0).then(|| 64 - self.0.leading_zeros() as usize)
    }

    /// Renders as a conflict: `<a1,a2>`.
    pub fn as_conflict(self) -> impl fmt::Display {
        Bracketed(self, '<', '>')
    }

    /// Renders with bare ids: `[1,3]`.
    pub fn as_ids(self) -> impl fmt::Display {
        Plain(self)
    }
}

pub struct Iter(u64);

impl Iterator for Iter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let tz = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(tz + 1)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Iter {}

impl IntoIterator for ComponentSet {
    type Item = usize;
    type IntoIter = Iter;

    fn into_iter(self) -> Iter {
        self.iter()
    }
}

impl FromIterator<usize> for ComponentSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self::from_ids(iter)
    }
}

impl Ord for ComponentSet {
    fn cmp(&self, other: &Self) -> Ordering {
        let diff = self.0 ^ other.0;
        if diff == 0 {
            return Ordering::Equal;
        }
        // The lowest differing id decides unless the set lacking it has
        // nothing above it, in which case that set is a prefix.
        let low = diff & diff.wrapping_neg();
        let above = !(low | (low - 1));
        let (has, lacks) = if self.0 & low != 0 {
            (Ordering::Less, other.0)
        } else {
            (Ordering::Greater, self.0)
        };
        if lacks & above != 0 {
            has
        } else {
            has.reverse()
        }
    }
}

impl PartialOrd for ComponentSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Bracketed(ComponentSet, char, char);

impl fmt::Display for Bracketed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.1)?;
        for (i, id) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "a{id}")?;
        }
        write!(f, "{}", self.2)
    }
}

struct Plain(ComponentSet);

impl fmt::Display for Plain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, id) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{id}")?;
        }
        f.write_str("]")
    }
}

/// Renders as a diagnosis: `[a1,a4]`.
impl fmt::Display for ComponentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&Bracketed(*self, '[', ']'), f)
    }
}

impl fmt::Debug for ComponentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&Plain(*self), f)
    }
}

/// Accepts `a1,a4`, `[a1, a4]`, `1,4` and the empty `[]`.
impl FromStr for ComponentSet {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, String> {
        let t = text.trim();
        let inner = t
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .unwrap_or(t)
            .trim();
        let mut set = ComponentSet::EMPTY;
        if inner.is_empty() {
            return Ok(set);
        }
        for part in inner.split(',') {
            let p = part.trim();
            let digits = p.strip_prefix('a').unwrap_or(p);
            match digits.parse::<usize>() {
                Ok(id) if (1..=MAX_COMPONENTS).contains(&id) => set.insert(id),
                _ => return Err(format!("`{p}` is not an axiom id like a3")),
            }
        }
        Ok(set)
    }
}

impl Serialize for ComponentSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for ComponentSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let ids = Vec::<usize>::deserialize(d)?;
        if let Some(bad) = ids.iter().find(|&&i| !(1..=MAX_COMPONENTS).contains(&i)) {
            return Err(serde::de::Error::custom(format!(
                "component id {bad} outside 1..={MAX_COMPONENTS}"
            )));
        }
        Ok(ComponentSet::from_ids(ids))
    }
}

/// True iff `x` intersects every member of `collection` and lies within
/// their union.
pub fn is_hitting_set(collection: &[ComponentSet], x: ComponentSet) -> bool {
    let union = collection
        .iter()
        .fold(ComponentSet::EMPTY, |acc, s| acc.union(*s));
    x.is_subset(union) && collection.iter().all(|s| !s.is_disjoint(x))
}

/// Keeps only the subset-minimal members, sorted.
pub fn minimal_sets(sets: impl IntoIterator<Item = ComponentSet>) -> Vec<ComponentSet> {
    let mut all: Vec<_> = sets.into_iter().collect();
    all.sort_by_key(|s| (s.len(), *s));
    all.dedup();
    let mut out: Vec<ComponentSet> = Vec::new();
    for s in all {
        if !out.iter().any(|m| m.is_subset(s)) {
            out.push(s);
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(ids: &[usize]) -> ComponentSet {
        ComponentSet::from_ids(ids.iter().copied())
    }

    #[test]
    fn parses_id_lists() {
        assert_eq!("a1,a4".parse::<ComponentSet>().unwrap(), s(&[1, 4]));
        assert_eq!(" [a4, a1] ".parse::<ComponentSet>().unwrap(), s(&[1, 4]));
        assert_eq!("2,3".parse::<ComponentSet>().unwrap(), s(&[2, 3]));
        assert_eq!("[]".parse::<ComponentSet>().unwrap(), ComponentSet::EMPTY);
        assert!("a0".parse::<ComponentSet>().is_err());
        assert!("a1,,a2".parse::<ComponentSet>().is_err());
        assert!("b2".parse::<ComponentSet>().is_err());
    }

    #[test]
    fn renders_both_bracket_styles() {
        assert_eq!(s(&[1, 4]).to_string(), "[a1,a4]");
        assert_eq!(s(&[2, 3, 4]).as_conflict().to_string(), "<a2,a3,a4>");
        assert_eq!(s(&[1, 3]).as_ids().to_string(), "[1,3]");
        assert_eq!(ComponentSet::EMPTY.to_string(), "[]");
    }

    #[test]
    fn json_is_a_list_of_ids() {
        assert_eq!(serde_json::to_string(&s(&[1, 64])).unwrap(), "[1,64]");
        let back: ComponentSet = serde_json::from_str("[3,1]").unwrap();
        assert_eq!(back, s(&[1, 3]));
        assert!(serde_json::from_str::<ComponentSet>("[0]").is_err());
        assert!(serde_json::from_str::<ComponentSet>("[65]").is_err());
    }

    #[test]
    fn hitting_sets_of_example_conflicts() {
        let conf = [s(&[1, 2]), s(&[2, 3, 4]), s(&[1, 3, 5]), s(&[3, 4, 5])];
        assert!(is_hitting_set(&conf, s(&[1, 3])));
        assert!(!is_hitting_set(&conf, s(&[3])));
        assert!(is_hitting_set(&[], ComponentSet::EMPTY));
        assert!(!is_hitting_set(&[], s(&[1])));
    }

    #[test]
    fn full_and_max() {
        assert_eq!(ComponentSet::full(3), s(&[1, 2, 3]));
        assert_eq!(ComponentSet::full(64).len(), 64);
        assert_eq!(s(&[2, 9]).max(), Some(9));
        assert_eq!(ComponentSet::EMPTY.max(), None);
    }

    proptest! {
        #[test]
        fn order_matches_sorted_vec_order(a in 0u64..1 << 10, b in 0u64..1 << 10) {
            let (x, y) = (ComponentSet::from_bits(a), ComponentSet::from_bits(b));
            prop_assert_eq!(x.cmp(&y), x.to_vec().cmp(&y.to_vec()));
        }

        #[test]
        fn subset_ops_match_btreeset(a in any::<u64>(), b in any::<u64>()) {
            use std::collections::BTreeSet;
            let (x, y) = (ComponentSet::from_bits(a), ComponentSet::from_bits(b));
            let (bx, by): (BTreeSet<_>, BTreeSet<_>) = (x.iter().collect(), y.iter().collect());
            prop_assert_eq!(x.is_subset(y), bx.is_subset(&by));
            prop_assert_eq!(x.is_disjoint(y), bx.is_disjoint(&by));
            prop_assert_eq!(x.union(y).to_vec(), bx.union(&by).copied().collect::<Vec<_>>());
            prop_assert_eq!(x.difference(y).to_vec(), bx.difference(&by).copied().collect::<Vec<_>>());
        }
    }
}
