//! Thread-local group operation counting.
//!
//! Every counted group operation (see [`Group::exp`](super::Group::exp),
//! [`Group::mul`](super::Group::mul), [`Group::multi_exp`](super::Group::multi_exp))
//! bumps a per-thread tally. An [`OpCounter`] captures the tally at creation
//! time and reports the delta, so concurrently running sessions on different
//! threads never observe each other's operations.

use std::cell::Cell;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

/// A snapshot (or delta) of group operation counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OpCounts {
    /// Single-base exponentiations `base^e`.
    pub exponentiations: u64,
    /// Multi-exponentiations `∏ bᵢ^eᵢ` (one per call, regardless of term count).
    pub multi_exponentiations: u64,
    /// Total number of terms across all multi-exponentiations.
    pub multi_exp_terms: u64,
    /// Group multiplications.
    pub multiplications: u64,
}

impl OpCounts {
    /// Exponentiation cost counting a k-term multi-exponentiation as k exponentiations.
    pub fn exp_equivalents(&self) -> u64 {
        self.exponentiations + self.multi_exp_terms
    }

    /// Difference `self - earlier`, saturating at zero.
    pub fn since(&self, earlier: &OpCounts) -> OpCounts {
        OpCounts {
            exponentiations: self.exponentiations.saturating_sub(earlier.exponentiations),
            multi_exponentiations: self.multi_exponentiations.saturating_sub(earlier.multi_exponentiations),
            multi_exp_terms: self.multi_exp_terms.saturating_sub(earlier.multi_exp_terms),
            multiplications: self.multiplications.saturating_sub(earlier.multiplications),
        }
    }

    pub fn is_zero(&self) -> bool {
        *self == OpCounts::default()
    }
}

impl Add for OpCounts {
    type Output = OpCounts;

    fn add(self, rhs: OpCounts) -> OpCounts {
        OpCounts {
            exponentiations: self.exponentiations + rhs.exponentiations,
            multi_exponentiations: self.multi_exponentiations + rhs.multi_exponentiations,
            multi_exp_terms: self.multi_exp_terms + rhs.multi_exp_terms,
            multiplications: self.multiplications + rhs.multiplications,
        }
    }
}

impl AddAssign for OpCounts {
    fn add_assign(&mut self, rhs: OpCounts) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for OpCounts {
    fn sum<I: Iterator<Item = OpCounts>>(iter: I) -> OpCounts {
        iter.fold(OpCounts::default(), Add::add)
    }
}

thread_local! {
    static TALLY: Cell<OpCounts> = Cell::new(OpCounts::default());
}

fn bump(f: impl FnOnce(&mut OpCounts)) {
    TALLY.with(|t| {
        let mut c = t.get();
        f(&mut c);
        t.set(c);
    });
}

pub(crate) fn record_exp() {
    bump(|c| c.exponentiations += 1);
}

pub(crate) fn record_mul() {
    bump(|c| c.multiplications += 1);
}

pub(crate) fn record_multi_exp(terms: usize) {
    bump(|c| {
        c.multi_exponentiations += 1;
        c.multi_exp_terms += terms as u64;
    });
}

/// Running tally of the current thread since it started.
pub fn thread_tally() -> OpCounts {
    TALLY.with(|t| t.get())
}

/// A labelled counting scope on the current thread.
#[derive(Debug, Clone)]
pub struct OpCounter {
    label: String,
    start: OpCounts,
}

impl OpCounter {
    pub fn start(label: impl Into<String>) -> Self {
        OpCounter {
            label: label.into(),
            start: thread_tally(),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Operations performed on this thread since the scope started (or was last reset).
    pub fn read(&self) -> OpCounts {
        thread_tally().since(&self.start)
    }

    pub fn reset(&mut self) {
        self.start = thread_tally();
    }
}

/// Runs `f` and returns its result together with the operations it performed.
pub fn measure<T>(f: impl FnOnce() -> T) -> (T, OpCounts) {
    let counter = OpCounter::start("measure");
    let out = f();
    (out, counter.read())
}
