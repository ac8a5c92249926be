//! Generalized-birthday (k-tree) solver for `x₁ + … + x_k ≡ 0 (mod q)`.
//!
//! Lists are merged pairwise up a binary tree. At intermediate level `ℓ` of
//! `L = log₂ k` levels, only pairs whose centered sum lies within
//! `±q^(1 − ℓ/(L+1)) / 2` survive; the final merge requires an exact zero.

use rand::{Rng, RngCore};

/// One list per position; a solution picks one entry from each list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KSumInstance {
    pub q: u64,
    pub lists: Vec<Vec<u64>>,
}

impl KSumInstance {
    pub fn k(&self) -> usize {
        self.lists.len()
    }

    /// `⌈q^(1/(log₂k + 1))⌉ · 4`.
    pub fn default_list_len(q: u64, k: usize) -> usize {
        let levels = k.max(2).trailing_zeros() as f64;
        ((q as f64).powf(1.0 / (levels + 1.0)).ceil() as usize) * 4
    }

    /// `k` lists of `list_len` uniform residues.
    pub fn random<R: RngCore + ?Sized>(q: u64, k: usize, list_len: usize, rng: &mut R) -> Self {
        let lists = (0..k)
            .map(|_| (0..list_len).map(|_| rng.gen_range(0..q)).collect())
            .collect();
        KSumInstance { q, lists }
    }

    /// Sum of the selected entries, mod q.
    pub fn sum_at(&self, indices: &[usize]) -> u64 {
        self.lists
            .iter()
            .zip(indices)
            .fold(0u64, |acc, (list, &i)| (acc + list[i]) % self.q)
    }
}

#[derive(Debug, Clone)]
struct Partial {
    value: u64,
    indices: Vec<usize>,
}

// bound on intermediate list growth
const MAX_MERGED: usize = 1 << 20;

/// Returns one index per list such that the selected values sum to 0 mod q,
/// or `None` when the instance has no solution reachable by the k-tree.
///
/// `k` must be a power of two; lists must be non-empty.
pub fn ksum_solve(instance: &KSumInstance) -> Option<Vec<usize>> {
    let k = instance.k();
    let q = instance.q;
    if k == 0 || !k.is_power_of_two() || q < 2 || instance.lists.iter().any(Vec::is_empty) {
        return None;
    }
    if k == 1 {
        return instance.lists[0].iter().position(|&x| x % q == 0).map(|i| vec![i]);
    }
    let levels = k.trailing_zeros() as usize;
    let mut layer: Vec<Vec<Partial>> = instance
        .lists
        .iter()
        .map(|list| {
            list.iter()
                .enumerate()
                .map(|(i, &x)| Partial {
                    value: x % q,
                    indices: vec![i],
                })
                .collect()
        })
        .collect();

    for level in 1..=levels {
        let half_width = if level == levels {
            0
        } else {
            let exponent = 1.0 - level as f64 / (levels as f64 + 1.0);
            ((q as f64).powf(exponent) / 2.0).floor() as u64
        };
        layer = layer
            .chunks(2)
            .map(|pair| merge(&pair[0], &pair[1], q, half_width))
            .collect();
        if layer.iter().any(Vec::is_empty) {
            return None;
        }
    }
    let indices = layer.into_iter().next()?.into_iter().next()?.indices;
    (instance.sum_at(&indices) == 0).then_some(indices)
}

/// All pairs `(a, b)` with `a + b mod q` inside `[−w, w]` (centered).
fn merge(left: &[Partial], right: &[Partial], q: u64, w: u64) -> Vec<Partial> {
    let mut sorted: Vec<&Partial> = right.iter().collect();
    sorted.sort_by_key(|p| p.value);
    let values: Vec<u64> = sorted.iter().map(|p| p.value).collect();
    let mut out = Vec::new();
    for a in left {
        // b ∈ [−a − w, −a + w] mod q
        let center = (q - a.value) % q;
        let lo = (center + q - w % q) % q;
        let hi = (center + w) % q;
        let ranges: [(u64, u64); 2] = if 2 * w + 1 >= q {
            [(0, q - 1), (1, 0)]
        } else if lo <= hi {
            [(lo, hi), (1, 0)]
        } else {
            [(lo, q - 1), (0, hi)]
        };
        for (from, to) in ranges {
            if from > to {
                continue;
            }
            let start = values.partition_point(|&v| v < from);
            let end = values.partition_point(|&v| v <= to);
            for b in &sorted[start..end] {
                let mut indices = a.indices.clone();
                indices.extend_from_slice(&b.indices);
                out.push(Partial {
                    value: (a.value + b.value) % q,
                    indices,
                });
                if out.len() >= MAX_MERGED {
                    return out;
                }
            }
        }
    }
    out
}
