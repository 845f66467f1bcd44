//! Counting access to the target vector `b`.
//!
//! [`TargetOracle`] wraps a [`TargetSource`] and records which entries have
//! been read. The count is of *distinct* indices; rereading an entry is free.
//! The record is an atomic bitset plus an atomic counter: the thread whose
//! `fetch_or` flips a bit is the only one that increments the counter, so the
//! count always equals the size of the queried set, even under concurrent
//! readers.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

/// Backing storage for a target vector.
pub trait TargetSource: Sync {
    fn len(&self) -> usize;
    fn value(&self, i: usize) -> f64;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl TargetSource for Vec<f64> {
    fn len(&self) -> usize {
        self.as_slice().len()
    }
    fn value(&self, i: usize) -> f64 {
        self[i]
    }
}

impl TargetSource for [f64] {
    fn len(&self) -> usize {
        <[f64]>::len(self)
    }
    fn value(&self, i: usize) -> f64 {
        self[i]
    }
}

/// A target defined by a function of the index, for vectors too large to
/// materialize.
pub struct FnSource<F> {
    n: usize,
    f: F,
}

impl<F: Fn(usize) -> f64 + Sync> FnSource<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F: Fn(usize) -> f64 + Sync> TargetSource for FnSource<F> {
    fn len(&self) -> usize {
        self.n
    }
    fn value(&self, i: usize) -> f64 {
        (self.f)(i)
    }
}

/// Anything the regression pipelines can read labels from.
pub trait Labels: Sync {
    fn n(&self) -> usize;
    fn get(&self, i: usize) -> f64;
}

/// Entry access to `b` with a linearizable distinct-query counter.
pub struct TargetOracle<'a> {
    source: Box<dyn TargetSource + 'a>,
    bits: Vec<AtomicU64>,
    count: AtomicUsize,
}

impl<'a> TargetOracle<'a> {
    pub fn new(source: impl TargetSource + 'a) -> Self {
        let n = source.len();
        Self {
            source: Box::new(source),
            bits: (0..n.div_ceil(64)).map(|_| AtomicU64::new(0)).collect(),
            count: AtomicUsize::new(0),
        }
    }

    pub fn from_slice(b: &'a [f64]) -> Self {
        Self::new(SliceSource(b))
    }

    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }

    /// Reads `b[i]`, charging a query the first time `i` is seen.
    pub fn query(&self, i: usize) -> f64 {
        let word = &self.bits[i / 64];
        let mask = 1u64 << (i % 64);
        if word.load(Ordering::Relaxed) & mask == 0 {
            let prev = word.fetch_or(mask, Ordering::AcqRel);
            if prev & mask == 0 {
                self.count.fetch_add(1, Ordering::AcqRel);
            }
        }
        self.source.value(i)
    }

    /// Number of distinct indices read so far.
    pub fn count(&self) -> usize {
        self.count.load(Ordering::Acquire)
    }

    pub fn was_queried(&self, i: usize) -> bool {
        self.bits[i / 64].load(Ordering::Acquire) & (1u64 << (i % 64)) != 0
    }

    /// Sorted list of every index read so far.
    pub fn queried(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.count());
        for (w, word) in self.bits.iter().enumerate() {
            let mut bits = word.load(Ordering::Acquire);
            while bits != 0 {
                let t = bits.trailing_zeros() as usize;
                out.push(w * 64 + t);
                bits &= bits - 1;
            }
        }
        out
    }
}

impl Labels for TargetOracle<'_> {
    fn n(&self) -> usize {
        self.len()
    }
    fn get(&self, i: usize) -> f64 {
        self.query(i)
    }
}

struct SliceSource<'a>(&'a [f64]);

impl TargetSource for SliceSource<'_> {
    fn len(&self) -> usize {
        self.0.len()
    }
    fn value(&self, i: usize) -> f64 {
        self.0[i]
    }
}

/// The residual target `b − A x_c`, read through the base labels so that
/// queries stay charged to the same oracle.
pub struct Shifted<'a> {
    base: &'a dyn Labels,
    shift: Vec<f64>,
}

impl<'a> Shifted<'a> {
    /// `shift[i]` is subtracted from `base[i]`.
    pub fn new(base: &'a dyn Labels, shift: Vec<f64>) -> Self {
        assert_eq!(base.n(), shift.len());
        Self { base, shift }
    }
}

impl Labels for Shifted<'_> {
    fn n(&self) -> usize {
        self.shift.len()
    }
    fn get(&self, i: usize) -> f64 {
        self.base.get(i) - self.shift[i]
    }
}

/// Uncounted labels, for baselines and tests.
pub struct Plain<'a>(pub &'a [f64]);

impl Labels for Plain<'_> {
    fn n(&self) -> usize {
        self.0.len()
    }
    fn get(&self, i: usize) -> f64 {
        self.0[i]
    }
}
