//! Dense binary relations over the events of one execution.
//!
//! Executions are bounded (at most [`MAX_EVENTS`] events), so a relation is a
//! vector of `u128` row masks and event sets are single `u128` masks.

use std::fmt;

/// Upper bound on the number of events a [`Relation`] can index.
pub const MAX_EVENTS: usize = 128;

/// A set of event indices.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct EventSet(u128);

impl EventSet {
    pub const EMPTY: EventSet = EventSet(0);

    pub fn from_fn(n: usize, mut member: impl FnMut(usize) -> bool) -> Self {
        debug_assert!(n <= MAX_EVENTS);
        let mut bits = 0u128;
        for i in 0..n {
            if member(i) {
                bits |= 1 << i;
            }
        }
        EventSet(bits)
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1 << i;
    }

    pub fn union(self, other: EventSet) -> EventSet {
        EventSet(self.0 | other.0)
    }

    pub fn intersection(self, other: EventSet) -> EventSet {
        EventSet(self.0 & other.0)
    }

    pub fn difference(self, other: EventSet) -> EventSet {
        EventSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: EventSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(i)
        })
    }
}

impl fmt::Debug for EventSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A binary relation on `0..n`.
#[derive(Clone, PartialEq, Eq)]
pub struct Relation {
    n: usize,
    rows: Vec<u128>,
}

impl Relation {
    pub fn empty(n: usize) -> Self {
        assert!(n <= MAX_EVENTS, "relation over {n} events exceeds {MAX_EVENTS}");
        Relation { n, rows: vec![0; n] }
    }

    pub fn identity_on(n: usize, set: EventSet) -> Self {
        let mut r = Relation::empty(n);
        for i in set.iter() {
            r.insert(i, i);
        }
        r
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut r = Relation::empty(n);
        for (a, b) in pairs {
            r.insert(a, b);
        }
        r
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, a: usize, b: usize) {
        self.rows[a] |= 1 << b;
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.rows[a] >> b & 1 == 1
    }

    pub fn successors(&self, a: usize) -> EventSet {
        EventSet(self.rows[a])
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(|&r| r == 0)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |a| EventSet(self.rows[a]).iter().map(move |b| (a, b)))
    }

    pub fn union(&self, other: &Relation) -> Relation {
        debug_assert_eq!(self.n, other.n);
        Relation { n: self.n, rows: self.rows.iter().zip(&other.rows).map(|(a, b)| a | b).collect() }
    }

    pub fn intersection(&self, other: &Relation) -> Relation {
        debug_assert_eq!(self.n, other.n);
        Relation { n: self.n, rows: self.rows.iter().zip(&other.rows).map(|(a, b)| a & b).collect() }
    }

    pub fn difference(&self, other: &Relation) -> Relation {
        debug_assert_eq!(self.n, other.n);
        Relation { n: self.n, rows: self.rows.iter().zip(&other.rows).map(|(a, b)| a & !b).collect() }
    }

    /// Relational composition `self ; other`.
    pub fn compose(&self, other: &Relation) -> Relation {
        debug_assert_eq!(self.n, other.n);
        let rows =
            self.rows.iter().map(|&row| EventSet(row).iter().fold(0, |acc, mid| acc | other.rows[mid])).collect();
        Relation { n: self.n, rows }
    }

    pub fn inverse(&self) -> Relation {
        let mut r = Relation::empty(self.n);
        for (a, b) in self.pairs() {
            r.insert(b, a);
        }
        r
    }

    /// `[domain] ; self ; [range]`
    pub fn restrict(&self, domain: EventSet, range: EventSet) -> Relation {
        let rows =
            self.rows.iter().enumerate().map(|(i, &row)| if domain.contains(i) { row & range.0 } else { 0 }).collect();
        Relation { n: self.n, rows }
    }

    /// Keeps only pairs satisfying `keep`.
    pub fn filter(&self, mut keep: impl FnMut(usize, usize) -> bool) -> Relation {
        Relation::from_pairs(self.n, self.pairs().filter(|&(a, b)| keep(a, b)).collect::<Vec<_>>())
    }

    /// Transitive closure `self+` (Warshall).
    pub fn transitive_closure(&self) -> Relation {
        let mut rows = self.rows.clone();
        for k in 0..self.n {
            let bit = 1u128 << k;
            let row_k = rows[k];
            for row in rows.iter_mut() {
                if *row & bit != 0 {
                    *row |= row_k;
                }
            }
        }
        Relation { n: self.n, rows }
    }

    /// Reflexive-transitive closure `self*`.
    pub fn reflexive_transitive_closure(&self) -> Relation {
        let all = EventSet::from_fn(self.n, |_| true);
        self.transitive_closure().union(&Relation::identity_on(self.n, all))
    }

    /// `self?`
    pub fn optional(&self) -> Relation {
        let all = EventSet::from_fn(self.n, |_| true);
        self.union(&Relation::identity_on(self.n, all))
    }

    pub fn is_irreflexive(&self) -> bool {
        (0..self.n).all(|i| !self.contains(i, i))
    }

    pub fn is_acyclic(&self) -> bool {
        self.transitive_closure().is_irreflexive()
    }

    pub fn is_transitive(&self) -> bool {
        self.compose(self).difference(self).is_empty()
    }

    pub fn domain(&self) -> EventSet {
        EventSet::from_fn(self.n, |i| self.rows[i] != 0)
    }

    pub fn range(&self) -> EventSet {
        EventSet(self.rows.iter().fold(0, |acc, r| acc | r))
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.pairs()).finish()
    }
}
