use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Square sparsifying transform `W` acting on vectorized patches.
#[derive(Debug, Clone, PartialEq)]
pub struct Transform {
    w: DMatrix<f64>,
}

impl Transform {
    pub fn new(w: DMatrix<f64>) -> Result<Self> {
        if !w.is_square() || w.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "transform must be square and non-empty, got {}x{}",
                w.nrows(),
                w.ncols()
            )));
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("transform has non-finite entries".into()));
        }
        Ok(Self { w })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            w: DMatrix::identity(n, n),
        }
    }

    /// 2-D separable DCT-II for `p x p` patches: the Kronecker product of two
    /// orthonormal 1-D DCT matrices.
    pub fn dct(p: usize) -> Self {
        let d = dct_1d(p);
        Self { w: d.kronecker(&d) }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.w
    }

    /// Patch dimension `n`.
    pub fn dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        self.w
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("transform is singular".into()))
    }

    /// `log |det W|` from the LU factors.
    pub fn log_abs_det(&self) -> f64 {
        let lu = self.w.clone().lu();
        lu.u().diagonal().iter().map(|v| v.abs().ln()).sum()
    }
}

/// Orthonormal 1-D DCT-II matrix; row `k` is the `k`-th basis vector.
pub fn dct_1d(p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(p, p, |k, j| {
        let scale = if k == 0 {
            (1.0 / p as f64).sqrt()
        } else {
            (2.0 / p as f64).sqrt()
        };
        scale * (PI * (2 * j + 1) as f64 * k as f64 / (2 * p) as f64).cos()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dct_is_orthonormal() {
        for p in [2, 5, 11] {
            let w = Transform::dct(p);
            let prod = w.matrix() * w.matrix().transpose();
            let eye = DMatrix::<f64>::identity(p * p, p * p);
            assert!((prod - eye).amax() < 1e-12);
            assert!(w.log_abs_det().abs() < 1e-9);
        }
    }

    #[test]
    fn dct_first_row_is_flat() {
        let w = Transform::dct(4);
        assert!(w.matrix().row(0).iter().all(|v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(Transform::new(DMatrix::zeros(2, 3)).is_err());
        let mut m = DMatrix::identity(2, 2);
        m[(0, 1)] = f64::NAN;
        assert!(Transform::new(m).is_err());
        assert!(Transform::new(DMatrix::zeros(2, 2)).unwrap().inverse().is_err());
    }

    #[test]
    fn log_det_of_diagonal() {
        let t = Transform::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            2.0, -3.0, 0.5,
        ])))
        .unwrap();
        assert!((t.log_abs_det() - 3.0f64.ln()).abs() < 1e-14);
    }
}
