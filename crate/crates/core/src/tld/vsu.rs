use nalgebra::DMatrix;

use super::learn::{magnitude_order, SparseCodes, PATCH_CHUNK};
use super::Transform;
use crate::error::{shape_mismatch, Error, Result};
use crate::par::{self, Exec};

/// Per-patch greedy support growth.
///
/// For each column the coefficients of `W Y_i` are added in order of
/// decreasing magnitude until `||Y_i - W^-1 X_i||^2 <= n c^2 sigma^2` or the
/// support is full. Returns the reconstructions `U = W^-1 X` and the codes.
pub fn variable_sparsity_update(
    w: &Transform,
    y: &DMatrix<f64>,
    sigma: f64,
    c: f64,
) -> Result<(DMatrix<f64>, SparseCodes)> {
    variable_sparsity_update_with(w, y, sigma, c, Exec::Parallel)
}

pub fn variable_sparsity_update_with(
    w: &Transform,
    y: &DMatrix<f64>,
    sigma: f64,
    c: f64,
    exec: Exec,
) -> Result<(DMatrix<f64>, SparseCodes)> {
    let n = w.dim();
    if y.nrows() != n {
        return Err(shape_mismatch(format!("{n} rows"), format!("{} rows", y.nrows())));
    }
    if !(sigma >= 0.0 && sigma.is_finite() && c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need sigma >= 0 and c > 0, got sigma = {sigma}, c = {c}"
        )));
    }
    let w_inv = w.inverse()?;
    let threshold = n as f64 * c * c * sigma * sigma;
    let count = y.ncols();
    let ranges = par::fixed_ranges(count, PATCH_CHUNK);
    let blocks = par::map_indexed(ranges.len(), exec, |b| {
        let range = ranges[b].clone();
        let yb = y.columns(range.start, range.len());
        let z = w.matrix() * yb;
        let mut u = DMatrix::zeros(n, range.len());
        let mut codes = SparseCodes::with_capacity(n, range.len(), 0);
        let mut residual = vec![0.0; n];
        for j in 0..range.len() {
            let zj = z.column(j);
            let yj = yb.column(j);
            residual.copy_from_slice(yj.as_slice());
            let mut energy: f64 = residual.iter().map(|v| v * v).sum();
            let mut support = Vec::new();
            if energy > threshold {
                for &k in &magnitude_order(zj.as_slice()) {
                    let coef = zj[k];
                    let atom = w_inv.column(k);
                    for (r, a) in residual.iter_mut().zip(atom.iter()) {
                        *r -= coef * a;
                    }
                    support.push((k, coef));
                    energy = residual.iter().map(|v| v * v).sum();
                    if energy <= threshold {
                        break;
                    }
                }
            }
            let mut uj = u.column_mut(j);
            for r in 0..n {
                uj[r] = yj[r] - residual[r];
            }
            support.sort_unstable_by_key(|e| e.0);
            codes.push_column(support);
        }
        (u, codes)
    });
    let mut u = DMatrix::zeros(n, count);
    let mut codes = SparseCodes::with_capacity(n, count, 0);
    for (range, (ub, cb)) in ranges.into_iter().zip(blocks) {
        u.columns_mut(range.start, range.len()).copy_from(&ub);
        codes.append(cb);
    }
    Ok((u, codes))
}
