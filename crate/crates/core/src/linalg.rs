//! Dense helpers shared by the kernel and KPCA modules.

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{DkpcaError, Result};
use crate::scalar::Real;

/// Off-diagonal convergence threshold of the Jacobi solver, relative to the
/// Frobenius norm of the input.
pub const JACOBI_REL_TOL: f64 = 1e-10;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// `rows · rowsᵀ`, with the lower triangle copied from the upper one so the
/// result is exactly symmetric.
pub fn gram_of_rows<T: Real>(rows: ArrayView2<T>) -> Array2<T> {
    let mut k = rows.dot(&rows.t());
    mirror_upper(&mut k);
    k
}

/// Overwrites the strict lower triangle with the strict upper triangle.
pub fn mirror_upper<T: Real>(a: &mut Array2<T>) {
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            a[[j, i]] = a[[i, j]];
        }
    }
}

pub fn frobenius_norm<T: Real>(a: ArrayView2<T>) -> T {
    a.iter().map(|&x| x * x).sum::<T>().sqrt()
}

pub fn max_abs<T: Real>(a: ArrayView2<T>) -> T {
    a.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
}

/// Largest `|a_ij - a_ji|`.
pub fn max_asymmetry<T: Real>(a: ArrayView2<T>) -> T {
    let n = a.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[[i, j]] - a[[j, i]]).abs());
        }
    }
    worst
}

/// Unsorted eigenpairs; `vectors` column `i` belongs to `values[i]`.
#[derive(Debug, Clone)]
pub struct RawEigen<T> {
    pub values: Array1<T>,
    pub vectors: Array2<T>,
    pub sweeps: usize,
}

/// Cyclic Jacobi eigendecomposition of the symmetric part of `a`.
///
/// Each sweep visits every pair once in round-robin order, so every round
/// rotates disjoint pairs. Those rotations commute, which lets a round update
/// rows and then columns in contiguous passes. Sweeps repeat until the
/// off-diagonal Frobenius norm drops below `rel_tol * ‖a‖_F`, failing after
/// `max_sweeps`.
pub fn jacobi_eigen<T: Real>(a: ArrayView2<T>, rel_tol: T, max_sweeps: usize) -> Result<RawEigen<T>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(DkpcaError::parameter(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    if n == 0 {
        return Err(DkpcaError::EmptyInput("0x0 matrix".into()));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(DkpcaError::Numeric("matrix has non-finite entries".into()));
    }

    // Row-major working copy of the symmetric part, and eigenvectors stored
    // as rows.
    let half = T::of(0.5);
    let mut w = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            w[i * n + j] = (a[[i, j]] + a[[j, i]]) * half;
        }
    }
    let mut vt = vec![T::zero(); n * n];
    for i in 0..n {
        vt[i * n + i] = T::one();
    }

    let norm = w.iter().map(|&x| x * x).sum::<T>().sqrt();
    let target = rel_tol * norm;
    // Entries below this cannot move the off-diagonal norm past `target`.
    let negligible = target / T::from_usize(n).unwrap();

    let schedule = RoundRobin::new(n);
    let mut rotations: Vec<Rotation<T>> = Vec::with_capacity(n / 2);
    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&w, n);
        if off <= target {
            break;
        }
        if sweeps == max_sweeps {
            return Err(DkpcaError::Numeric(format!(
                "Jacobi eigensolver did not converge after {max_sweeps} sweeps \
                 (off-diagonal norm {:e}, target {:e})",
                off.as_f64(),
                target.as_f64()
            )));
        }
        sweeps += 1;
        for round in 0..schedule.rounds() {
            rotations.clear();
            for (p, q) in schedule.pairs(round) {
                let apq = w[p * n + q];
                if apq.abs() > negligible {
                    rotations.push(Rotation::annihilating(p, q, w[p * n + p], w[q * n + q], apq));
                }
            }
            if rotations.is_empty() {
                continue;
            }
            for r in &rotations {
                rotate_rows(&mut w, n, r);
                rotate_rows(&mut vt, n, r);
            }
            for row in w.chunks_exact_mut(n) {
                for r in &rotations {
                    let (xp, xq) = (row[r.p], row[r.q]);
                    row[r.p] = r.c * xp - r.s * xq;
                    row[r.q] = r.s * xp + r.c * xq;
                }
            }
            for r in &rotations {
                w[r.p * n + r.p] = r.app - r.t * r.apq;
                w[r.q * n + r.q] = r.aqq + r.t * r.apq;
                w[r.p * n + r.q] = T::zero();
                w[r.q * n + r.p] = T::zero();
            }
        }
    }

    let values = Array1::from_shape_fn(n, |i| w[i * n + i]);
    let vectors = Array2::from_shape_fn((n, n), |(row, col)| vt[col * n + row]);
    Ok(RawEigen {
        values,
        vectors,
        sweeps,
    })
}

/// Plane rotation zeroing `a_pq`, with the entries it was computed from.
struct Rotation<T> {
    p: usize,
    q: usize,
    c: T,
    s: T,
    t: T,
    app: T,
    aqq: T,
    apq: T,
}

impl<T: Real> Rotation<T> {
    fn annihilating(p: usize, q: usize, app: T, aqq: T, apq: T) -> Self {
        let theta = (aqq - app) / (apq + apq);
        let mag = T::one() / (theta.abs() + (theta * theta + T::one()).sqrt());
        let t = if theta < T::zero() { -mag } else { mag };
        let c = T::one() / (t * t + T::one()).sqrt();
        Rotation {
            p,
            q,
            c,
            s: t * c,
            t,
            app,
            aqq,
            apq,
        }
    }
}

fn rotate_rows<T: Real>(m: &mut [T], n: usize, r: &Rotation<T>) {
    let (head, tail) = m.split_at_mut(r.q * n);
    let rp = &mut head[r.p * n..(r.p + 1) * n];
    let rq = &mut tail[..n];
    for (xp, xq) in rp.iter_mut().zip(rq.iter_mut()) {
        let (a0, b0) = (*xp, *xq);
        *xp = r.c * a0 - r.s * b0;
        *xq = r.s * a0 + r.c * b0;
    }
}

/// Circle-method tournament over `n` indices: `rounds()` rounds of disjoint
/// pairs that together cover every pair exactly once.
struct RoundRobin {
    n: usize,
    players: usize,
}

impl RoundRobin {
    fn new(n: usize) -> Self {
        RoundRobin {
            n,
            players: n + n % 2,
        }
    }

    fn rounds(&self) -> usize {
        self.players.saturating_sub(1)
    }

    /// Pairs `(p, q)` with `p < q` played in `round`.
    fn pairs(&self, round: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = self.players - 1;
        let fixed = std::iter::once((round, m));
        let circle = (1..self.players / 2).map(move |i| ((round + i) % m, (round + m - i) % m));
        fixed
            .chain(circle)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .filter(move |&(_, b)| b < self.n)
    }
}

fn off_diagonal_norm<T: Real>(w: &[T], n: usize) -> T {
    let mut acc = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            let x = w[i * n + j];
            acc += x * x;
        }
    }
    (acc + acc).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    fn residual(a: &Array2<f64>, e: &RawEigen<f64>) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..a.nrows() {
            let v = e.vectors.column(i);
            let r = a.dot(&v) - &v.mapv(|x| x * e.values[i]);
            worst = worst.max(r.dot(&r).sqrt());
        }
        worst
    }

    #[test]
    fn two_by_two_eigenvalues() {
        let a = arr2(&[[1.0f64, 2.0], [2.0, 1.0]]);
        let e = jacobi_eigen(a.view(), 1e-12, 100).unwrap();
        let mut vals = e.values.to_vec();
        vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((vals[0] + 1.0).abs() < 1e-12 && (vals[1] - 3.0).abs() < 1e-12);
        assert!(residual(&a, &e) < 1e-12);
    }

    #[test]
    fn diagonal_input_needs_no_sweeps() {
        let a = arr2(&[[3.0f64, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]]);
        let e = jacobi_eigen(a.view(), 1e-10, 100).unwrap();
        assert_eq!(e.sweeps, 0);
        assert_eq!(e.values.to_vec(), vec![3.0, 1.0, 2.0]);
    }

    #[test]
    fn zero_matrix_converges() {
        let a = Array2::<f64>::zeros((4, 4));
        let e = jacobi_eigen(a.view(), 1e-10, 100).unwrap();
        assert!(e.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sweep_cap_reports_residual() {
        let a = arr2(&[[1.0f64, 0.5, 0.2], [0.5, 2.0, 0.3], [0.2, 0.3, 3.0]]);
        let err = jacobi_eigen(a.view(), 1e-14, 0).unwrap_err();
        assert!(err.to_string().contains("off-diagonal norm"));
    }

    #[test]
    fn rejects_non_square_and_nan() {
        let a = Array2::<f64>::zeros((2, 3));
        assert!(jacobi_eigen(a.view(), 1e-10, 10).is_err());
        let b = arr2(&[[f64::NAN, 0.0], [0.0, 1.0]]);
        assert!(matches!(
            jacobi_eigen(b.view(), 1e-10, 10),
            Err(DkpcaError::Numeric(_))
        ));
    }

    #[test]
    fn round_robin_covers_every_pair_once() {
        for n in 1..12 {
            let schedule = RoundRobin::new(n);
            let mut seen = std::collections::BTreeSet::new();
            for round in 0..schedule.rounds() {
                let mut used = vec![false; n];
                for (p, q) in schedule.pairs(round) {
                    assert!(p < q && q < n);
                    assert!(!used[p] && !used[q]);
                    used[p] = true;
                    used[q] = true;
                    assert!(seen.insert((p, q)));
                }
            }
            assert_eq!(seen.len(), n * (n - 1) / 2);
        }
    }

    #[test]
    fn gram_of_rows_is_exactly_symmetric() {
        let x = arr2(&[[0.1f64, 0.7, 0.3], [0.9, 0.2, 0.4], [0.5, 0.5, 0.5]]);
        let k = gram_of_rows(x.view());
        assert_eq!(max_asymmetry(k.view()), 0.0);
        assert!((k[[0, 1]] - (0.09 + 0.14 + 0.12)).abs() < 1e-15);
    }
}
