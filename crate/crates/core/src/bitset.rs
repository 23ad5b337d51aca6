//! Fixed-width bit sets over the dense contract and agent index spaces.
//!
//! A market holds at most [`MAX_INDEX`] contracts and agents, so every set
//! type fits in a single `u64` and every set operation is a word operation.

use std::fmt;

/// Largest index space a bit set can represent.
pub const MAX_INDEX: usize = 64;

macro_rules! bitset {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
        pub struct $name(u64);

        impl $name {
            pub const EMPTY: Self = Self(0);

            #[inline]
            pub const fn from_bits(bits: u64) -> Self {
                Self(bits)
            }

            #[inline]
            pub const fn bits(self) -> u64 {
                self.0
            }

            #[inline]
            pub fn singleton(index: usize) -> Self {
                debug_assert!(index < MAX_INDEX);
                Self(1u64 << index)
            }

            /// All indices `0..n`.
            #[inline]
            pub fn full(n: usize) -> Self {
                debug_assert!(n <= MAX_INDEX);
                if n == MAX_INDEX {
                    Self(u64::MAX)
                } else {
                    Self((1u64 << n) - 1)
                }
            }

            #[inline]
            pub const fn is_empty(self) -> bool {
                self.0 == 0
            }

            #[inline]
            pub const fn len(self) -> usize {
                self.0.count_ones() as usize
            }

            #[inline]
            pub const fn contains(self, index: usize) -> bool {
                index < MAX_INDEX && self.0 & (1u64 << index) != 0
            }

            #[inline]
            pub fn insert(&mut self, index: usize) {
                self.0 |= 1u64 << index;
            }

            #[inline]
            pub fn remove(&mut self, index: usize) {
                self.0 &= !(1u64 << index);
            }

            #[inline]
            pub const fn union(self, other: Self) -> Self {
                Self(self.0 | other.0)
            }

            #[inline]
            pub const fn intersection(self, other: Self) -> Self {
                Self(self.0 & other.0)
            }

            #[inline]
            pub const fn difference(self, other: Self) -> Self {
                Self(self.0 & !other.0)
            }

            #[inline]
            pub const fn is_subset(self, other: Self) -> bool {
                self.0 & !other.0 == 0
            }

            #[inline]
            pub const fn is_disjoint(self, other: Self) -> bool {
                self.0 & other.0 == 0
            }

            /// Indices in ascending order.
            pub fn iter(self) -> BitIter {
                BitIter(self.0)
            }
        }

        impl FromIterator<usize> for $name {
            fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
                let mut s = Self::EMPTY;
                for i in iter {
                    s.insert(i);
                }
                s
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.debug_set().entries(self.iter()).finish()
            }
        }
    };
}

bitset!(
    /// A set of contracts, keyed by contract index.
    ContractSet
);
bitset!(
    /// A set of agents, keyed by agent index.
    AgentSet
);
bitset!(
    /// A set of elementary cooperations in an agent-target specification.
    CoopSet
);

pub struct BitIter(u64);

impl Iterator for BitIter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for BitIter {}

/// k-element subsets of `elems`, in lexicographic order of positions in
/// `elems`. With `elems` sorted by contract id this is the canonical
/// "ascending cardinality, then lexicographic" order within one level.
pub struct Combinations<'a> {
    elems: &'a [usize],
    positions: Vec<usize>,
    done: bool,
}

impl<'a> Combinations<'a> {
    pub fn new(elems: &'a [usize], k: usize) -> Self {
        Self {
            elems,
            positions: (0..k).collect(),
            done: k > elems.len(),
        }
    }
}

impl Iterator for Combinations<'_> {
    type Item = ContractSet;

    fn next(&mut self) -> Option<ContractSet> {
        if self.done {
            return None;
        }
        let set = self.positions.iter().map(|&p| self.elems[p]).collect();
        let n = self.elems.len();
        let k = self.positions.len();
        // advance to the next combination
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.positions[i] < n - k + i {
                self.positions[i] += 1;
                for j in i + 1..k {
                    self.positions[j] = self.positions[j - 1] + 1;
                }
                break;
            }
        }
        Some(set)
    }
}

/// Every subset of `elems` in canonical order: ascending cardinality, then
/// lexicographic by position.
pub fn canonical_subsets(elems: &[usize]) -> impl Iterator<Item = ContractSet> + '_ {
    (0..=elems.len()).flat_map(move |k| Combinations::new(elems, k))
}

/// All subsets of `set`, in descending numeric order.
pub fn submasks(set: ContractSet) -> impl Iterator<Item = ContractSet> {
    let full = set.bits();
    let mut next = Some(full);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 {
            None
        } else {
            Some((cur - 1) & full)
        };
        Some(ContractSet::from_bits(cur))
    })
}
