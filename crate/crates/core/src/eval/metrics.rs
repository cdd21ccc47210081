use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;

use crate::error::{DkpcaError, Result};

/// Accuracy with micro- and macro-averaged F1, all in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricSet {
    pub accuracy: f64,
    pub f1_micro: f64,
    pub f1_macro: f64,
}

impl MetricSet {
    /// Arithmetic mean of each field; `None` for an empty slice.
    pub fn mean(sets: &[MetricSet]) -> Option<MetricSet> {
        if sets.is_empty() {
            return None;
        }
        let n = sets.len() as f64;
        let sum = |f: fn(&MetricSet) -> f64| sets.iter().map(f).sum::<f64>() / n;
        Some(MetricSet {
            accuracy: sum(|m| m.accuracy),
            f1_micro: sum(|m| m.f1_micro),
            f1_macro: sum(|m| m.f1_macro),
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Counts {
    tp: usize,
    fp: usize,
    fn_: usize,
}

impl Counts {
    /// `2TP / (2TP + FP + FN)`, zero when undefined.
    fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            0.0
        } else {
            (2 * self.tp) as f64 / denom as f64
        }
    }
}

fn class_counts<'a, L: Ord + Debug>(
    predictions: &'a [L],
    truth: &'a [L],
    inventory: &'a BTreeSet<L>,
) -> Result<BTreeMap<&'a L, Counts>> {
    if predictions.len() != truth.len() {
        return Err(DkpcaError::parameter(format!(
            "{} predictions for {} truth labels",
            predictions.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(DkpcaError::EmptyInput("no predictions to score".into()));
    }
    let mut counts: BTreeMap<&L, Counts> = inventory.iter().map(|l| (l, Counts::default())).collect();
    for (p, t) in predictions.iter().zip(truth) {
        if !inventory.contains(p) {
            return Err(DkpcaError::Contract(format!("predicted label {p:?} is not in the sense inventory")));
        }
        if !inventory.contains(t) {
            return Err(DkpcaError::Contract(format!("true label {t:?} is not in the sense inventory")));
        }
        if p == t {
            counts.get_mut(p).unwrap().tp += 1;
        } else {
            counts.get_mut(p).unwrap().fp += 1;
            counts.get_mut(t).unwrap().fn_ += 1;
        }
    }
    Ok(counts)
}

/// F1 of every inventory class; classes never seen nor predicted score 0.
pub fn per_class_f1<'a, L: Ord + Debug>(
    predictions: &'a [L],
    truth: &'a [L],
    inventory: &'a BTreeSet<L>,
) -> Result<BTreeMap<&'a L, f64>> {
    Ok(class_counts(predictions, truth, inventory)?
        .into_iter()
        .map(|(l, c)| (l, c.f1()))
        .collect())
}

pub fn compute_metrics<L: Ord + Debug>(
    predictions: &[L],
    truth: &[L],
    inventory: &BTreeSet<L>,
) -> Result<MetricSet> {
    let counts = class_counts(predictions, truth, inventory)?;
    let correct = predictions.iter().zip(truth).filter(|(p, t)| p == t).count();
    let pooled = counts.values().fold(Counts::default(), |acc, c| Counts {
        tp: acc.tp + c.tp,
        fp: acc.fp + c.fp,
        fn_: acc.fn_ + c.fn_,
    });
    let f1_macro = counts.values().map(Counts::f1).sum::<f64>() / counts.len() as f64;
    Ok(MetricSet {
        accuracy: correct as f64 / truth.len() as f64,
        f1_micro: pooled.f1(),
        f1_macro,
    })
}
