use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};

use super::Transform;
use crate::error::{shape_mismatch, Error, Result};
use crate::par::{self, Exec};

/// Column block size for the patch loops. Reductions are summed block by
/// block in index order, so results do not depend on the thread count.
pub(crate) const PATCH_CHUNK: usize = 4096;

/// Column-sparse code matrix `X` (`n x N`) stored as per-column index/value
/// lists with ascending row indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCodes {
    n: usize,
    offsets: Vec<usize>,
    rows: Vec<u32>,
    values: Vec<f64>,
}

impl SparseCodes {
    pub(crate) fn with_capacity(n: usize, count: usize, nnz: usize) -> Self {
        let mut offsets = Vec::with_capacity(count + 1);
        offsets.push(0);
        Self {
            n,
            offsets,
            rows: Vec::with_capacity(nnz),
            values: Vec::with_capacity(nnz),
        }
    }

    pub(crate) fn push_column(&mut self, entries: impl IntoIterator<Item = (usize, f64)>) {
        for (r, v) in entries {
            self.rows.push(r as u32);
            self.values.push(v);
        }
        self.offsets.push(self.rows.len());
    }

    pub(crate) fn append(&mut self, other: SparseCodes) {
        let base = self.rows.len();
        self.rows.extend(other.rows);
        self.values.extend(other.values);
        self.offsets
            .extend(other.offsets[1..].iter().map(|o| o + base));
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of nonzeros `l_i` of every column.
    pub fn support_sizes(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// `(row, value)` pairs of column `i`, rows ascending.
    pub fn column(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[i]..self.offsets[i + 1];
        self.rows[range.clone()]
            .iter()
            .zip(&self.values[range])
            .map(|(&r, &v)| (r as usize, v))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut x = DMatrix::zeros(self.n, self.count());
        for i in 0..self.count() {
            for (r, v) in self.column(i) {
                x[(r, i)] = v;
            }
        }
        x
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// Indices of `z` ordered by decreasing magnitude; ties go to the lower index.
pub(crate) fn magnitude_order(z: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..z.len()).collect();
    idx.sort_by(|&a, &b| by_magnitude(z, a, b));
    idx
}

fn by_magnitude(z: &[f64], a: usize, b: usize) -> Ordering {
    z[b].abs()
        .partial_cmp(&z[a].abs())
        .unwrap_or(Ordering::Equal)
        .then(a.cmp(&b))
}

/// Keeps the `l` largest-magnitude entries of `z` (lowest index wins ties),
/// returned with ascending row indices.
pub(crate) fn top_entries(z: &[f64], l: usize, scratch: &mut Vec<usize>) -> Vec<(usize, f64)> {
    let n = z.len();
    let l = l.min(n);
    if l == 0 {
        return Vec::new();
    }
    scratch.clear();
    scratch.extend(0..n);
    if l < n {
        scratch.select_nth_unstable_by(l - 1, |&a, &b| by_magnitude(z, a, b));
    }
    let kept = &mut scratch[..l];
    kept.sort_unstable();
    kept.iter().map(|&r| (r, z[r])).collect()
}

/// Hard-thresholds `W Y` column by column to the `levels[i]` largest
/// magnitudes. `levels` has one entry per column, or a single entry applied
/// to all columns.
pub fn sparse_code(w: &Transform, y: &DMatrix<f64>, levels: &[usize]) -> Result<SparseCodes> {
    sparse_code_with(w, y, levels, Exec::Parallel)
}

pub fn sparse_code_with(
    w: &Transform,
    y: &DMatrix<f64>,
    levels: &[usize],
    exec: Exec,
) -> Result<SparseCodes> {
    let n = w.dim();
    if y.nrows() != n {
        return Err(shape_mismatch(format!("{n} rows"), format!("{} rows", y.nrows())));
    }
    let count = y.ncols();
    if levels.len() != 1 && levels.len() != count {
        return Err(Error::InvalidParameter(format!(
            "expected 1 or {count} sparsity levels, got {}",
            levels.len()
        )));
    }
    if let Some(&l) = levels.iter().find(|&&l| l > n) {
        return Err(Error::InvalidParameter(format!(
            "sparsity level {l} exceeds patch dimension {n}"
        )));
    }
    let level = |i: usize| if levels.len() == 1 { levels[0] } else { levels[i] };
    let ranges = par::fixed_ranges(count, PATCH_CHUNK);
    let blocks = par::map_indexed(ranges.len(), exec, |b| {
        let range = ranges[b].clone();
        let z = w.matrix() * y.columns(range.start, range.len());
        let mut out = SparseCodes::with_capacity(n, range.len(), 0);
        let mut scratch = Vec::with_capacity(n);
        for (j, i) in range.enumerate() {
            out.push_column(top_entries(z.column(j).as_slice(), level(i), &mut scratch));
        }
        out
    });
    let mut codes = SparseCodes::with_capacity(n, count, 0);
    for b in blocks {
        codes.append(b);
    }
    Ok(codes)
}

/// `Y Y^T`, accumulated over fixed column blocks.
pub(crate) fn gram(y: &DMatrix<f64>, exec: Exec) -> DMatrix<f64> {
    let n = y.nrows();
    let ranges = par::fixed_ranges(y.ncols(), PATCH_CHUNK);
    let parts = par::map_indexed(ranges.len(), exec, |b| {
        let blk = y.columns(ranges[b].start, ranges[b].len());
        blk * blk.transpose()
    });
    parts
        .into_iter()
        .fold(DMatrix::zeros(n, n), |acc, p| acc + p)
}

/// `Y X^T` for sparse `X`.
pub(crate) fn cross(y: &DMatrix<f64>, x: &SparseCodes, exec: Exec) -> DMatrix<f64> {
    let n = y.nrows();
    let ranges = par::fixed_ranges(y.ncols(), PATCH_CHUNK);
    let parts = par::map_indexed(ranges.len(), exec, |b| {
        let mut c = DMatrix::zeros(n, x.dim());
        for i in ranges[b].clone() {
            let yi = y.column(i);
            for (r, v) in x.column(i) {
                c.column_mut(r).axpy(v, &yi, 1.0);
            }
        }
        c
    });
    parts
        .into_iter()
        .fold(DMatrix::zeros(n, x.dim()), |acc, p| acc + p)
}

/// Regularizer `lambda * (-log|det W| + mu * ||W||_F^2)`.
pub fn regularizer(w: &Transform, lambda: f64, mu: f64) -> f64 {
    lambda * (-w.log_abs_det() + mu * w.matrix().norm_squared())
}

/// Learning objective `||W Y - X||_F^2 + lambda * (-log|det W| + mu ||W||_F^2)`.
pub fn objective(w: &Transform, y: &DMatrix<f64>, x: &SparseCodes, lambda: f64, mu: f64) -> f64 {
    let mut r = w.matrix() * y;
    for i in 0..x.count() {
        for (row, v) in x.column(i) {
            r[(row, i)] -= v;
        }
    }
    r.norm_squared() + regularizer(w, lambda, mu)
}

/// `||W Y - X||_F^2` from the moments `G = Y Y^T`, `C = Y X^T` and `||X||_F^2`.
pub(crate) fn fit_from_moments(w: &DMatrix<f64>, g: &DMatrix<f64>, c: &DMatrix<f64>, x_sq: f64) -> f64 {
    let wg = w * g;
    let quad = wg.component_mul(w).sum();
    let lin = w.component_mul(&c.transpose()).sum();
    quad - 2.0 * lin + x_sq
}

/// Exact minimizer of the objective over `W` for fixed codes.
pub fn transform_update(y: &DMatrix<f64>, x: &SparseCodes, lambda: f64, mu: f64) -> Result<Transform> {
    if y.nrows() != x.dim() || y.ncols() != x.count() {
        return Err(shape_mismatch(
            format!("{}x{}", x.dim(), x.count()),
            format!("{}x{}", y.nrows(), y.ncols()),
        ));
    }
    let g = gram(y, Exec::Parallel);
    let c = cross(y, x, Exec::Parallel);
    update_from_moments(&g, &c, lambda, mu)
}

/// Closed form: `G + lambda mu I = L L^T`, `L^-1 C = Q S R^T`,
/// `W = R (S + (S^2 + 2 lambda I)^(1/2)) Q^T L^-1 / 2`.
pub(crate) fn update_from_moments(
    g: &DMatrix<f64>,
    c: &DMatrix<f64>,
    lambda: f64,
    mu: f64,
) -> Result<Transform> {
    if !(lambda > 0.0 && mu > 0.0 && lambda.is_finite() && mu.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "transform update needs lambda > 0 and mu > 0, got {lambda} and {mu}"
        )));
    }
    let n = g.nrows();
    let mut reg = g.clone();
    for k in 0..n {
        reg[(k, k)] += lambda * mu;
    }
    let chol = reg
        .cholesky()
        .ok_or_else(|| Error::Numerical("Cholesky factorization of Y Y^T + lambda mu I failed".into()))?;
    let l_inv = chol
        .l()
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .ok_or_else(|| Error::Numerical("triangular inverse failed".into()))?;
    let b = &l_inv * c;
    let svd = b.try_svd(true, true, f64::EPSILON, 0).ok_or_else(|| {
        Error::Numerical("SVD of L^-1 Y X^T did not converge".into())
    })?;
    let (q, rt) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::Numerical("SVD factors missing".into())),
    };
    let s = svd.singular_values;
    let mid = DVector::from_iterator(
        s.len(),
        s.iter().map(|&v| 0.5 * (v + (v * v + 2.0 * lambda).sqrt())),
    );
    let w = rt.transpose() * DMatrix::from_diagonal(&mid) * q.transpose() * l_inv;
    Transform::new(w)
}

/// Gradient of the objective with respect to `W`:
/// `2 (W (Y Y^T + lambda mu I) - X Y^T) - lambda W^-T`.
pub fn objective_gradient(
    w: &Transform,
    y: &DMatrix<f64>,
    x: &SparseCodes,
    lambda: f64,
    mu: f64,
) -> Result<DMatrix<f64>> {
    let g = gram(y, Exec::Sequential);
    let c = cross(y, x, Exec::Sequential);
    let n = w.dim();
    let reg = g + DMatrix::identity(n, n) * (lambda * mu);
    let inv_t = w.inverse()?.transpose();
    Ok((w.matrix() * reg - c.transpose()) * 2.0 - inv_t * lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn col(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(v.len(), 1, v)
    }

    #[test]
    fn keeps_largest_magnitude() {
        let x = sparse_code(&Transform::identity(3), &col(&[3.0, -5.0, 1.0]), &[1]).unwrap();
        assert_eq!(x.to_dense(), col(&[0.0, -5.0, 0.0]));
    }

    #[test]
    fn ties_go_to_lower_index() {
        let x = sparse_code(&Transform::identity(3), &col(&[2.0, -2.0, 1.0]), &[1]).unwrap();
        assert_eq!(x.to_dense(), col(&[2.0, 0.0, 0.0]));
        assert_eq!(magnitude_order(&[1.0, -3.0, 3.0, 0.0]), vec![1, 2, 0, 3]);
    }

    #[test]
    fn full_level_is_exact_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w = Transform::new(DMatrix::from_fn(4, 4, |_, _| rng.random_range(-1.0..1.0))).unwrap();
        let y = DMatrix::from_fn(4, 7, |_, _| rng.random_range(-1.0..1.0));
        let x = sparse_code(&w, &y, &[4]).unwrap();
        assert_eq!(x.to_dense(), w.matrix() * &y);
        let back = w.inverse().unwrap() * x.to_dense();
        assert!((back - &y).amax() < 1e-9);
    }

    #[test]
    fn per_column_levels() {
        let y = DMatrix::from_column_slice(3, 3, &[1.0, 2.0, 3.0, 1.0, 2.0, 3.0, 1.0, 2.0, 3.0]);
        let x = sparse_code(&Transform::identity(3), &y, &[0, 1, 3]).unwrap();
        assert_eq!(x.support_sizes(), vec![0, 1, 3]);
        assert!(sparse_code(&Transform::identity(3), &y, &[1, 1]).is_err());
        assert!(sparse_code(&Transform::identity(3), &y, &[4]).is_err());
    }

    #[test]
    fn moments_match_direct_fit() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = Transform::new(DMatrix::from_fn(4, 4, |_, _| rng.random_range(-1.0..1.0))).unwrap();
        let y = DMatrix::from_fn(4, 9000, |_, _| rng.random_range(-1.0..1.0));
        let x = sparse_code(&Transform::dct(2), &y, &[2]).unwrap();
        let direct = objective(&w, &y, &x, 0.0, 1.0);
        let g = gram(&y, Exec::Parallel);
        let c = cross(&y, &x, Exec::Parallel);
        let via = fit_from_moments(w.matrix(), &g, &c, x.frobenius_sq());
        assert!((direct - via).abs() < 1e-9 * direct);
        assert_eq!(g, gram(&y, Exec::Sequential));
        assert_eq!(c, cross(&y, &x, Exec::Sequential));
    }

    #[test]
    fn update_zeroes_the_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let y = DMatrix::from_fn(9, 200, |_, _| rng.random_range(-10.0..10.0));
        let x = sparse_code(&Transform::dct(3), &y, &[2]).unwrap();
        let w = transform_update(&y, &x, 50.0, 1.0).unwrap();
        let grad = objective_gradient(&w, &y, &x, 50.0, 1.0).unwrap();
        let scale = objective(&w, &y, &x, 50.0, 1.0).abs().max(1.0);
        assert!(grad.amax() < 1e-8 * scale, "{}", grad.amax());
    }

    #[test]
    fn update_rejects_non_positive_weights() {
        let y = DMatrix::from_element(2, 3, 1.0);
        let x = sparse_code(&Transform::identity(2), &y, &[1]).unwrap();
        assert!(transform_update(&y, &x, 0.0, 1.0).is_err());
        assert!(transform_update(&y, &x, 1.0, -1.0).is_err());
    }
}
