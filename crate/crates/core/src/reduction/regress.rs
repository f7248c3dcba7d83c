use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Condition number above which a regression is treated as rank-deficient.
pub const CONDITION_LIMIT: f64 = 1e10;

#[derive(Clone, Copy, Debug)]
pub struct LstsqDiagnostics<T> {
    /// Condition number of the (weighted) design matrix.
    pub condition: T,
    /// `||A x - b||_F / ||b||_F` of the solved system.
    pub residual_rel: T,
}

/// Ordinary least squares via SVD, with optional per-row weights. Returns
/// the coefficient matrix (features x targets) and diagnostics.
pub fn weighted_lstsq<T: Real>(
    design: &DMatrix<T>,
    targets: &DMatrix<T>,
    weights: Option<&[T]>,
) -> Result<(DMatrix<T>, LstsqDiagnostics<T>)> {
    let n = design.nrows();
    let f = design.ncols();
    if targets.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} design rows vs {} target rows",
            targets.nrows()
        )));
    }
    if n < f {
        return Err(Error::RankDeficient(format!("{n} samples for {f} features")));
    }
    let (mut a, mut b) = (design.clone(), targets.clone());
    if let Some(w) = weights {
        if w.len() != n {
            return Err(Error::DimensionMismatch("one weight per sample required".into()));
        }
        for (i, &wi) in w.iter().enumerate() {
            let s = wi.sqrt();
            a.row_mut(i).scale_mut(s);
            b.row_mut(i).scale_mut(s);
        }
    }
    // column equilibration: the condition number then measures the angles
    // between features rather than their scales
    let mut col_scale = vec![T::one(); f];
    for j in 0..f {
        let norm = a.column(j).norm();
        if norm == T::zero() {
            return Err(Error::RankDeficient(format!("feature column {j} is zero")));
        }
        col_scale[j] = norm;
        a.column_mut(j).unscale_mut(norm);
    }

    let svd = a.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let sigma_min = svd.singular_values.min();
    let condition = if sigma_min > T::zero() {
        sigma_max / sigma_min
    } else {
        return Err(Error::RankDeficient("zero singular value".into()));
    };
    if condition > T::lit(CONDITION_LIMIT) {
        return Err(Error::RankDeficient(format!("condition number {condition}")));
    }
    let mut solution = svd
        .solve(&b, T::zero())
        .map_err(|e| Error::RankDeficient(e.to_string()))?;
    // one pass of iterative refinement recovers the last digit on
    // well-conditioned systems with exactly representable solutions
    let residual = &b - &a * &solution;
    if let Ok(delta) = svd.solve(&residual, T::zero()) {
        solution += delta;
    }

    let b_norm = b.norm();
    let residual_rel = if b_norm > T::zero() {
        (&a * &solution - &b).norm() / b_norm
    } else {
        T::zero()
    };
    for j in 0..f {
        solution.row_mut(j).unscale_mut(col_scale[j]);
    }
    Ok((
        solution,
        LstsqDiagnostics {
            condition,
            residual_rel,
        },
    ))
}
