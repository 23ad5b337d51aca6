//! Execution strategy for the exhaustive scans.
//!
//! Every auditor enumerates candidate sets one cardinality level at a time.
//! Within a level the candidates are independent, so a level is scanned
//! either sequentially or with rayon. Results are order-preserving in both
//! modes: searches return the first hit in canonical order and filters keep
//! canonical order, so the two strategies are observationally identical.
//!
//! Without the `parallel` feature, [`Exec::Parallel`] runs sequentially.

use crate::bitset::{Combinations, ContractSet};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// First `f(item)` that is `Some`, in slice order.
    pub fn find_map_first<T, R, F>(self, items: &[T], f: F) -> Option<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> Option<R> + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return items.par_iter().find_map_first(f);
        }
        items.iter().find_map(f)
    }

    /// `f` applied to every item, results in slice order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Items satisfying `pred`, in slice order.
    pub fn filter<T, F>(self, items: &[T], pred: F) -> Vec<T>
    where
        T: Sync + Send + Copy,
        F: Fn(&T) -> bool + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return items.par_iter().filter(|t| pred(t)).copied().collect();
        }
        items.iter().filter(|t| pred(t)).copied().collect()
    }

    /// Scans every subset of `elems` level by level (ascending cardinality,
    /// lexicographic within a level) and returns the first hit.
    pub fn first_subset<R, F>(self, elems: &[usize], min_len: usize, f: F) -> Option<R>
    where
        R: Send,
        F: Fn(ContractSet) -> Option<R> + Sync + Send,
    {
        for k in min_len..=elems.len() {
            let level: Vec<ContractSet> = Combinations::new(elems, k).collect();
            if let Some(hit) = self.find_map_first(&level, |&s| f(s)) {
                return Some(hit);
            }
        }
        None
    }

    /// Every subset of `elems` satisfying `pred`, in canonical order.
    pub fn filter_subsets<F>(self, elems: &[usize], pred: F) -> Vec<ContractSet>
    where
        F: Fn(ContractSet) -> bool + Sync + Send,
    {
        let mut out = Vec::new();
        for k in 0..=elems.len() {
            let level: Vec<ContractSet> = Combinations::new(elems, k).collect();
            out.extend(self.filter(&level, |&s| pred(s)));
        }
        out
    }
}
