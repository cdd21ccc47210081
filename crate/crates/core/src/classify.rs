//! Brute-force k-nearest-neighbor classification in projected space.

use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{DkpcaError, Result};
use crate::scalar::Real;

pub const DEFAULT_K: usize = 6;

/// Stored training points; fitting does no computation.
#[derive(Debug, Clone)]
pub struct KnnModel<T, L> {
    points: Array2<T>,
    labels: Vec<L>,
    k: usize,
}

/// Fits on `points` (one row per training example).
pub fn knn_fit<T: Real, L: Ord + Clone>(points: ArrayView2<T>, labels: &[L], k: usize) -> Result<KnnModel<T, L>> {
    if points.nrows() != labels.len() {
        return Err(DkpcaError::parameter(format!(
            "{} training points but {} labels",
            points.nrows(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(DkpcaError::EmptyInput("KNN needs at least one training point".into()));
    }
    if k == 0 || k > labels.len() {
        return Err(DkpcaError::parameter(format!(
            "k = {k} must lie in 1..={}",
            labels.len()
        )));
    }
    Ok(KnnModel {
        points: points.to_owned(),
        labels: labels.to_vec(),
        k,
    })
}

impl<T: Real, L: Ord + Clone> KnnModel<T, L> {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dimension(&self) -> usize {
        self.points.ncols()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Majority label among the `k` nearest stored points (Euclidean).
    ///
    /// Neighbors are ranked by `(distance, insertion index)`. Vote ties go to
    /// the label with the smallest summed neighbor distance, then to the
    /// smallest label.
    pub fn predict(&self, query: ArrayView1<T>) -> Result<L> {
        if query.len() != self.dimension() {
            return Err(DkpcaError::parameter(format!(
                "query has dimension {} but the model has {}",
                query.len(),
                self.dimension()
            )));
        }
        if query.iter().any(|x| !x.is_finite()) {
            return Err(DkpcaError::Numeric("query has non-finite coordinates".into()));
        }
        let mut ranked: Vec<(T, usize)> = self
            .points
            .rows()
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                let d2: T = p
                    .iter()
                    .zip(query.iter())
                    .map(|(&a, &b)| (a - b) * (a - b))
                    .sum();
                (d2.sqrt(), i)
            })
            .collect();
        let by_rank = |a: &(T, usize), b: &(T, usize)| {
            a.0.partial_cmp(&b.0)
                .expect("finite distances")
                .then(a.1.cmp(&b.1))
        };
        if self.k < ranked.len() {
            ranked.select_nth_unstable_by(self.k - 1, by_rank);
            ranked.truncate(self.k);
        }

        let mut votes: BTreeMap<&L, (usize, T)> = BTreeMap::new();
        for &(dist, i) in &ranked {
            let entry = votes.entry(&self.labels[i]).or_insert((0, T::zero()));
            entry.0 += 1;
            entry.1 += dist;
        }
        // BTreeMap iterates labels ascending, so strict comparisons keep the
        // smallest label on a full tie.
        let mut best: Option<(&L, usize, T)> = None;
        for (label, (count, dist)) in votes {
            let better = match best {
                None => true,
                Some((_, c, d)) => count > c || (count == c && dist < d),
            };
            if better {
                best = Some((label, count, dist));
            }
        }
        Ok(best.expect("k >= 1").0.clone())
    }

    pub fn predict_rows(&self, queries: ArrayView2<T>) -> Result<Vec<L>> {
        queries
            .axis_iter(Axis(0))
            .map(|q| self.predict(q))
            .collect()
    }
}
