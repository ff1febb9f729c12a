//! Small linear solvers for the exact oracle and the mean-payoff estimator.

use crate::error::SingularSystem;

/// Systems up to this many unknowns are solved directly.
pub const DENSE_LIMIT: usize = 2000;

const GS_TOLERANCE: f64 = 1e-10;
const GS_MAX_SWEEPS: usize = 1_000_000;

/// Solves `a x = b` for a row-major `n x n` matrix by Gaussian elimination
/// with partial pivoting.
pub fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>) -> Result<Vec<f64>, SingularSystem> {
    let n = b.len();
    assert_eq!(a.len(), n * n);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .ok_or(SingularSystem)?;
        if a[pivot * n + col].abs() < 1e-300 {
            return Err(SingularSystem);
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let d = a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] / d;
            if f != 0.0 {
                for k in col..n {
                    a[row * n + k] -= f * a[col * n + k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row * n + k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row * n + row];
    }
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(SingularSystem)
    }
}

/// Solves `(I - Q) x = b` where `q[i]` lists the sparse entries `(j, Q_ij)`
/// of a substochastic matrix from which every index can leak out.
pub fn solve_leaky(q: &[Vec<(usize, f64)>], b: &[f64]) -> Result<Vec<f64>, SingularSystem> {
    let n = b.len();
    if n <= DENSE_LIMIT {
        let mut a = vec![0.0; n * n];
        for (i, row) in q.iter().enumerate() {
            a[i * n + i] += 1.0;
            for &(j, v) in row {
                a[i * n + j] -= v;
            }
        }
        return solve_dense(a, b.to_vec());
    }
    gauss_seidel(q, b)
}

fn gauss_seidel(q: &[Vec<(usize, f64)>], b: &[f64]) -> Result<Vec<f64>, SingularSystem> {
    let n = b.len();
    let mut x = vec![0.0; n];
    for _ in 0..GS_MAX_SWEEPS {
        for i in 0..n {
            let mut diag = 0.0;
            let mut acc = b[i];
            for &(j, v) in &q[i] {
                if j == i {
                    diag += v;
                } else {
                    acc += v * x[j];
                }
            }
            if diag >= 1.0 {
                return Err(SingularSystem);
            }
            x[i] = acc / (1.0 - diag);
        }
        let residual = (0..n)
            .map(|i| {
                let qx: f64 = q[i].iter().map(|&(j, v)| v * x[j]).sum();
                (x[i] - qx - b[i]).abs()
            })
            .fold(0.0, f64::max);
        if residual <= GS_TOLERANCE {
            return Ok(x);
        }
    }
    Err(SingularSystem)
}

/// Stationary distribution of an irreducible row-stochastic dense matrix:
/// `π P = π`, `Σ π = 1`, with the last balance equation replaced by the
/// normalization.
pub fn stationary_dense(p: &[Vec<f64>]) -> Result<Vec<f64>, SingularSystem> {
    let n = p.len();
    let mut a = vec![0.0; n * n];
    // row j of the system: Σ_i π_i (P_ij - [i = j]) = 0
    for (i, row) in p.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            a[j * n + i] += v;
        }
        a[i * n + i] -= 1.0;
    }
    let mut b = vec![0.0; n];
    for i in 0..n {
        a[(n - 1) * n + i] = 1.0;
    }
    b[n - 1] = 1.0;
    solve_dense(a, b)
}

/// Stationary distribution of an irreducible chain given by sparse rows.
/// Fixes `π_0 = 1`, solves for the rest, then normalizes.
pub fn stationary_sparse(rows: &[Vec<(usize, f64)>]) -> Result<Vec<f64>, SingularSystem> {
    let n = rows.len();
    if n <= DENSE_LIMIT {
        let mut dense = vec![vec![0.0; n]; n];
        for (i, row) in rows.iter().enumerate() {
            for &(j, v) in row {
                dense[i][j] += v;
            }
        }
        return stationary_dense(&dense);
    }
    // unknowns 1..n, shifted to 0..n-1: x_j = Σ_{i≠0} x_i P_ij + P_0j
    let mut qt = vec![Vec::new(); n - 1];
    let mut b = vec![0.0; n - 1];
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            if j == 0 {
                continue;
            }
            if i == 0 {
                b[j - 1] += v;
            } else {
                qt[j - 1].push((i - 1, v));
            }
        }
    }
    let x = gauss_seidel(&qt, &b)?;
    let total = 1.0 + x.iter().sum::<f64>();
    let mut pi = Vec::with_capacity(n);
    pi.push(1.0 / total);
    pi.extend(x.iter().map(|v| v / total));
    Ok(pi)
}
