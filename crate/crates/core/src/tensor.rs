//! Dense families of series indexed by tuples of cohomology indices.

use rayon::prelude::*;

use crate::error::Result;
use crate::series::Series;

/// `items[index(t)]` is the series at index tuple `t`; tuples are ordered lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Family {
    pub h: usize,
    pub arity: usize,
    pub items: Vec<Series>,
}

/// All tuples of length `arity` over `0..h` in lexicographic order.
pub fn tuples(h: usize, arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..h).map(move |a| {
                    let mut t2 = t.clone();
                    t2.push(a);
                    t2
                })
            })
            .collect();
    }
    out
}

impl Family {
    pub fn from_fn(h: usize, arity: usize, f: impl Fn(&[usize]) -> Series + Sync) -> Self {
        let items = tuples(h, arity).par_iter().map(|t| f(t)).collect();
        Self { h, arity, items }
    }

    pub fn try_from_fn(h: usize, arity: usize, f: impl Fn(&[usize]) -> Result<Series> + Sync) -> Result<Self> {
        let items = tuples(h, arity).par_iter().map(|t| f(t)).collect::<Result<Vec<_>>>()?;
        Ok(Self { h, arity, items })
    }

    /// A family of zero series with the given coefficient dimension and known window.
    pub fn zeros(h: usize, arity: usize, dim: usize, tmax: i32, hprec: i32) -> Self {
        Self { h, arity, items: vec![Series::zero_trunc(dim, tmax, hprec); h.pow(arity as u32)] }
    }

    pub fn index(&self, t: &[usize]) -> usize {
        debug_assert_eq!(t.len(), self.arity);
        t.iter().fold(0, |acc, &a| acc * self.h + a)
    }

    pub fn get(&self, t: &[usize]) -> &Series {
        &self.items[self.index(t)]
    }

    pub fn at2(&self, a: usize, b: usize) -> &Series {
        &self.items[a * self.h + b]
    }

    pub fn at3(&self, c: usize, b: usize, a: usize) -> &Series {
        &self.items[(c * self.h + b) * self.h + a]
    }

    pub fn map(&self, f: impl Fn(&Series) -> Series + Sync + Send) -> Self {
        Self { h: self.h, arity: self.arity, items: self.items.par_iter().map(f).collect() }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(&Series, &Series) -> Series + Sync + Send) -> Self {
        assert_eq!((self.h, self.arity), (other.h, other.arity), "family shape mismatch");
        Self { h: self.h, arity: self.arity, items: self.items.par_iter().zip(&other.items).map(|(a, b)| f(a, b)).collect() }
    }

    pub fn tuples(&self) -> Vec<Vec<usize>> {
        tuples(self.h, self.arity)
    }

    /// Reduction modulo `t^m` of every member.
    pub fn mod_t(&self, m: i32) -> Self {
        self.map(|s| s.mod_t(m))
    }
}

/// Evaluates `check` on every tuple in parallel and returns the first failure in tuple order.
pub fn first_failure(h: usize, arity: usize, check: impl Fn(&[usize]) -> Option<String> + Sync) -> Option<String> {
    tuples(h, arity).par_iter().find_map_first(|t| check(t))
}
