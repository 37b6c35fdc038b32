//! Dense primal simplex for small linear programs.
//!
//! Solves `max cᵀx` subject to `Ax ≤ b`, `x ≥ 0` with `b ≥ 0`, so the
//! slack basis is immediately feasible and no phase-1 is needed. Bland's
//! rule guarantees termination under degeneracy. Problem sizes here are
//! tiny (n ≤ a few dozen), so no effort is spent on sparsity.

use crate::error::{Error, Result};

const EPS: f64 = 1e-11;

/// Maximize `cᵀx` over `Ax ≤ b`, `x ≥ 0`. Returns the optimal value and
/// an optimal point.
pub fn solve_lp_max(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<(f64, Vec<f64>)> {
    let n = c.len();
    let m = b.len();
    if a.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(Error::Domain("LP dimension mismatch".into()));
    }
    if b.iter().any(|&bi| bi < 0.0) {
        return Err(Error::Domain("LP requires b ≥ 0".into()));
    }
    // tableau: m constraint rows over [structural | slack | rhs], plus
    // an objective row holding reduced costs (negated for max)
    let w = n + m + 1;
    let mut tab = vec![vec![0.0f64; w]; m + 1];
    for (i, row) in a.iter().enumerate() {
        tab[i][..n].copy_from_slice(row);
        tab[i][n + i] = 1.0;
        tab[i][w - 1] = b[i];
    }
    for j in 0..n {
        tab[m][j] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    for _ in 0..100_000 {
        // Bland: entering column is the lowest index with negative
        // reduced cost
        let Some(col) = (0..n + m).find(|&j| tab[m][j] < -EPS) else {
            let mut x = vec![0.0; n];
            for (i, &bi) in basis.iter().enumerate() {
                if bi < n {
                    x[bi] = tab[i][w - 1];
                }
            }
            return Ok((tab[m][w - 1], x));
        };
        // ratio test, ties broken by lowest basis index (Bland again)
        let mut pivot: Option<(usize, f64)> = None;
        for i in 0..m {
            if tab[i][col] > EPS {
                let ratio = tab[i][w - 1] / tab[i][col];
                let better = match pivot {
                    None => true,
                    Some((pi, pr)) => {
                        ratio < pr - EPS || (ratio < pr + EPS && basis[i] < basis[pi])
                    }
                };
                if better {
                    pivot = Some((i, ratio));
                }
            }
        }
        let Some((row, _)) = pivot else {
            return Err(Error::Numerical("LP is unbounded".into()));
        };
        let piv = tab[row][col];
        for v in tab[row].iter_mut() {
            *v /= piv;
        }
        for i in 0..=m {
            if i != row && tab[i][col].abs() > 0.0 {
                let f = tab[i][col];
                for j in 0..w {
                    tab[i][j] -= f * tab[row][j];
                }
            }
        }
        basis[row] = col;
    }
    Err(Error::Numerical("simplex iteration cap reached".into()))
}
