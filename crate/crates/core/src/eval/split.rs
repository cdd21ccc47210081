//! Seeded train/test splits.
//!
//! All randomness comes from SplitMix64 (Steele, Lea & Flood, 2014), seeded
//! with the raw 64-bit seed as its state. Repeat `r` uses the `(r+1)`-th
//! output of `SplitMix64(seed)` as its own seed. Indices are shuffled with a
//! descending Fisher-Yates pass (`i = n-1 … 1`, swap `i` with `j ∈ [0, i]`),
//! where `j` is drawn as `x mod (i+1)` after rejecting `x < 2⁶⁴ mod (i+1)`.
//! Any implementation following these three rules reproduces the splits.

use std::collections::BTreeMap;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::error::{DkpcaError, Result};

pub const DEFAULT_RATIOS: [f64; 3] = [0.05, 0.10, 0.30];
pub const DEFAULT_REPEATS: usize = 10;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitPlan {
    /// Labeled (training) fraction, strictly between 0 and 1.
    pub ratio: f64,
    pub repeats: usize,
    pub seed: u64,
    /// Allocate the training quota per sense instead of uniformly.
    pub stratified: bool,
}

impl SplitPlan {
    pub fn new(ratio: f64, repeats: usize, seed: u64) -> Result<Self> {
        let plan = SplitPlan {
            ratio,
            repeats,
            seed,
            stratified: false,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn stratified(mut self, on: bool) -> Self {
        self.stratified = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(DkpcaError::parameter(format!(
                "labeled ratio must lie in (0, 1), got {}",
                self.ratio
            )));
        }
        if self.repeats == 0 {
            return Err(DkpcaError::parameter("repeats must be at least 1"));
        }
        Ok(())
    }

    /// `round(ratio · m)`.
    pub fn train_size(&self, corpus_size: usize) -> usize {
        (self.ratio * corpus_size as f64).round() as usize
    }

    pub fn canonical(&self) -> String {
        format!(
            "ratio={:?};repeats={};seed={};stratified={}",
            self.ratio, self.repeats, self.seed, self.stratified
        )
    }
}

/// Sorted, disjoint index sets covering `0..m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seed of repeat `repeat`: the `(repeat+1)`-th SplitMix64 output.
pub fn repeat_seed(seed: u64, repeat: usize) -> u64 {
    let mut rng = SplitMix64::from_seed(seed.to_le_bytes());
    let mut out = 0;
    for _ in 0..=repeat {
        out = rng.next_u64();
    }
    out
}

fn uniform_below(rng: &mut SplitMix64, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let reject_below = bound.wrapping_neg() % bound;
    loop {
        let x = rng.next_u64();
        if x >= reject_below {
            return x % bound;
        }
    }
}

fn shuffle<T>(rng: &mut SplitMix64, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = uniform_below(rng, i as u64 + 1) as usize;
        items.swap(i, j);
    }
}

fn check_sizes(corpus_size: usize, plan: &SplitPlan) -> Result<usize> {
    plan.validate()?;
    if corpus_size < 2 {
        return Err(DkpcaError::parameter(format!(
            "cannot split a corpus of {corpus_size} instances"
        )));
    }
    let train = plan.train_size(corpus_size);
    if train == 0 || train >= corpus_size {
        return Err(DkpcaError::parameter(format!(
            "ratio {} of {corpus_size} instances leaves {train} for training; \
             both train and test sets must be non-empty",
            plan.ratio
        )));
    }
    Ok(train)
}

fn finish(mut train: Vec<usize>, mut test: Vec<usize>) -> Split {
    train.sort_unstable();
    test.sort_unstable();
    Split { train, test }
}

/// `plan.repeats` uniform random splits of `0..corpus_size`.
pub fn make_splits(corpus_size: usize, plan: &SplitPlan) -> Result<Vec<Split>> {
    let train_size = check_sizes(corpus_size, plan)?;
    Ok((0..plan.repeats)
        .map(|r| {
            let mut rng = SplitMix64::from_seed(repeat_seed(plan.seed, r).to_le_bytes());
            let mut idx: Vec<usize> = (0..corpus_size).collect();
            shuffle(&mut rng, &mut idx);
            let test = idx.split_off(train_size);
            finish(idx, test)
        })
        .collect())
}

/// Splits whose training quota is shared among senses by largest remainder.
///
/// The total training size matches [`make_splits`]. Senses are visited in
/// ascending label order, each shuffled with the repeat's generator.
pub fn make_stratified_splits<L: Ord>(labels: &[L], plan: &SplitPlan) -> Result<Vec<Split>> {
    let m = labels.len();
    let train_size = check_sizes(m, plan)?;
    let mut groups: BTreeMap<&L, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        groups.entry(l).or_default().push(i);
    }
    let exact: Vec<f64> = groups.values().map(|g| plan.ratio * g.len() as f64).collect();
    let mut quota: Vec<usize> = exact.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = quota.iter().sum();
    let mut order: Vec<usize> = (0..quota.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    let sizes: Vec<usize> = groups.values().map(Vec::len).collect();
    let mut remaining = train_size.saturating_sub(assigned);
    while remaining > 0 {
        let before = remaining;
        for &g in &order {
            if remaining == 0 {
                break;
            }
            if quota[g] < sizes[g] {
                quota[g] += 1;
                remaining -= 1;
            }
        }
        if before == remaining {
            break;
        }
    }

    Ok((0..plan.repeats)
        .map(|r| {
            let mut rng = SplitMix64::from_seed(repeat_seed(plan.seed, r).to_le_bytes());
            let mut train = Vec::with_capacity(train_size);
            let mut test = Vec::with_capacity(m - train_size);
            for (members, &q) in groups.values().zip(&quota) {
                let mut members = members.clone();
                shuffle(&mut rng, &mut members);
                let rest = members.split_off(q);
                train.extend(members);
                test.extend(rest);
            }
            finish(train, test)
        })
        .collect())
}
