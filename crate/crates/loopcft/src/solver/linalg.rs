//! Arbitrary-precision complex least squares via column-pivoted Householder
//! QR.
//!
//! For an `m x n` matrix with `m >= n`, the factorization `A P = Q R` is
//! computed with full column pivoting (at every step the remaining column of
//! largest norm is eliminated), so the diagonal of `R` is nonincreasing in
//! modulus and the numerical rank can be read off as the number of diagonal
//! entries above a relative threshold. The minimum-norm-style "basic"
//! solution uses only the leading `rank` pivot columns; the remaining
//! coefficients are zero.

use crate::error::{Error, Result};
use rug::{Complex, Float};

/// Result of a least-squares solve.
#[derive(Clone, Debug)]
pub struct LsqOutcome {
    /// Solution coefficients, in the original column order.
    pub x: Vec<Complex>,
    /// Numerical rank at the requested relative threshold.
    pub rank: usize,
    /// `|R_kk|` in pivot order (nonincreasing).
    pub r_diag: Vec<Float>,
}

fn col_norm_sq(rows: &[Vec<Complex>], col: usize, from_row: usize, prec: u32) -> Float {
    let mut acc = Float::with_val(prec, 0);
    for row in rows.iter().skip(from_row) {
        acc += row[col].clone().norm().into_real_imag().0;
    }
    acc
}

/// Solves `min_x ||A x - b||_2` at precision `prec`. `rank_rel_tol` is the
/// relative diagonal threshold for the rank decision (e.g. `2^-(prec/2)`).
pub fn solve_least_squares(
    rows: &[Vec<Complex>],
    rhs: &[Complex],
    prec: u32,
    rank_rel_tol: &Float,
) -> Result<LsqOutcome> {
    let m = rows.len();
    let n = if m == 0 { 0 } else { rows[0].len() };
    if n == 0 {
        return Err(Error::Domain {
            what: "least squares",
            detail: "empty system".into(),
        });
    }
    if m < n {
        return Err(Error::Domain {
            what: "least squares",
            detail: format!("underdetermined system: {m} rows < {n} columns"),
        });
    }
    if rhs.len() != m {
        return Err(Error::Domain {
            what: "least squares",
            detail: format!("rhs length {} != row count {m}", rhs.len()),
        });
    }
    let mut a: Vec<Vec<Complex>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|z| Complex::with_val(prec, z))
                .collect::<Vec<_>>()
        })
        .collect();
    let mut b: Vec<Complex> = rhs.iter().map(|z| Complex::with_val(prec, z)).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut r_diag: Vec<Float> = Vec::with_capacity(n);

    for k in 0..n {
        // Full pivoting: bring the remaining column of largest norm to k.
        let mut best = k;
        let mut best_norm = col_norm_sq(&a, k, k, prec);
        for c in (k + 1)..n {
            let nc = col_norm_sq(&a, c, k, prec);
            if nc > best_norm {
                best_norm = nc;
                best = c;
            }
        }
        if best != k {
            perm.swap(k, best);
            for row in a.iter_mut() {
                row.swap(k, best);
            }
        }
        let norm = best_norm.sqrt();
        if norm.is_zero() {
            for _ in k..n {
                r_diag.push(Float::with_val(prec, 0));
            }
            break;
        }
        // Householder vector u = x + phase * ||x|| * e_1 maps x to
        // -phase * ||x|| * e_1; tau = 1 / (||x||^2 + ||x|| |x_0|) is real.
        let x0 = a[k][k].clone();
        let x0_abs = x0.clone().abs().into_real_imag().0;
        let phase = if x0_abs.is_zero() {
            Complex::with_val(prec, 1)
        } else {
            Complex::with_val(prec, &x0 / &x0_abs)
        };
        let alpha = -Complex::with_val(prec, &phase * &norm);
        let mut u: Vec<Complex> = (k..m).map(|i| a[i][k].clone()).collect();
        u[0] += Complex::with_val(prec, &phase * &norm);
        let denom = Float::with_val(prec, &norm * &norm) + Float::with_val(prec, &norm * &x0_abs);
        let tau = Float::with_val(prec, 1) / denom;

        a[k][k] = alpha.clone();
        for i in (k + 1)..m {
            a[i][k] = Complex::new(prec);
        }
        // Apply H = I - tau u u^H to the trailing columns and to b.
        for c in (k + 1)..n {
            let mut w = Complex::new(prec);
            for (i, ui) in u.iter().enumerate() {
                w += Complex::with_val(prec, ui.clone().conj() * &a[k + i][c]);
            }
            w *= &tau;
            for (i, ui) in u.iter().enumerate() {
                let delta = Complex::with_val(prec, ui * &w);
                a[k + i][c] -= delta;
            }
        }
        let mut w = Complex::new(prec);
        for (i, ui) in u.iter().enumerate() {
            w += Complex::with_val(prec, ui.clone().conj() * &b[k + i]);
        }
        w *= &tau;
        for (i, ui) in u.iter().enumerate() {
            let delta = Complex::with_val(prec, ui * &w);
            b[k + i] -= delta;
        }
        r_diag.push(alpha.abs().into_real_imag().0);
    }

    let rank = {
        let top = r_diag[0].clone();
        if top.is_zero() {
            0
        } else {
            let cut = Float::with_val(prec, &top * rank_rel_tol);
            r_diag.iter().take_while(|d| **d >= cut).count()
        }
    };

    // Back substitution on the leading rank x rank triangle.
    let mut y = vec![Complex::new(prec); n];
    for k in (0..rank).rev() {
        let mut acc = b[k].clone();
        for c in (k + 1)..rank {
            acc -= Complex::with_val(prec, &a[k][c] * &y[c]);
        }
        y[k] = acc / &a[k][k];
    }
    let mut x = vec![Complex::new(prec); n];
    for (k, yk) in y.into_iter().enumerate() {
        x[perm[k]] = yk;
    }
    Ok(LsqOutcome { x, rank, r_diag })
}

/// Maximum modulus of `A x - b` over the rows, for reporting residuals in
/// the caller's own normalization.
pub fn residual_inf_norm(
    rows: &[Vec<Complex>],
    rhs: &[Complex],
    x: &[Complex],
    prec: u32,
) -> Float {
    let mut worst = Float::with_val(prec, 0);
    for (row, b) in rows.iter().zip(rhs) {
        let mut acc = Complex::with_val(prec, -b);
        for (aij, xj) in row.iter().zip(x) {
            acc += Complex::with_val(prec, aij * xj);
        }
        let a = acc.abs().into_real_imag().0;
        if a > worst {
            worst = a;
        }
    }
    worst
}
