//! Dense single-precision matrix multiplication.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{copy_arena, par_map, ExecPlan, Stage};

/// Row-major single-precision matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Config(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::Config(format!(
                "matrix data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn at(&self, i: usize, j: usize) -> f32 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

impl Stage for DenseMatrix {
    fn stage(&self) -> Result<Self> {
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: copy_arena(&self.data)?,
        })
    }
}

/// `a * b` with one fixed left-to-right accumulation per output element.
///
/// Every element `c[i][j]` is the sum of `a[i][k] * b[k][j]` taken in
/// increasing `k`, in f32, under every backend. The parallel backend
/// partitions output rows; the loop nest below (i, k, j) keeps that exact
/// accumulation order while streaming rows of `b`.
pub fn matmul(a: &DenseMatrix, b: &DenseMatrix, plan: &ExecPlan) -> Result<DenseMatrix> {
    if a.cols != b.rows {
        return Err(Error::ShapeMismatch {
            a_rows: a.rows,
            a_cols: a.cols,
            b_rows: b.rows,
            b_cols: b.cols,
        });
    }
    let rows = par_map(a.rows, plan, |i| {
        let mut out = vec![0.0f32; b.cols];
        for (k, &aik) in a.row(i).iter().enumerate() {
            let brow = b.row(k);
            for (o, &bkj) in out.iter_mut().zip(brow) {
                *o += aik * bkj;
            }
        }
        out
    });
    let mut data = Vec::with_capacity(a.rows * b.cols);
    for row in rows {
        data.extend_from_slice(&row);
    }
    DenseMatrix::new(a.rows, b.cols, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::reference_matmul;
    use crate::rng;

    fn random_matrix(rows: usize, cols: usize, rng: &mut rng::SuiteRng) -> DenseMatrix {
        let data = (0..rows * cols).map(|_| rng::unit_f32(rng)).collect();
        DenseMatrix::new(rows, cols, data).unwrap()
    }

    #[test]
    fn identity_is_bit_exact() {
        let mut r = rng::from_seed(11);
        let a = random_matrix(3, 3, &mut r);
        let id = DenseMatrix::identity(3).unwrap();
        let prod = matmul(&a, &id, &ExecPlan::sequential()).unwrap();
        assert_eq!(prod.data(), a.data());
    }

    #[test]
    fn two_by_two_hand_checked() {
        let a = DenseMatrix::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = DenseMatrix::new(2, 2, vec![5.0, 6.0, 7.0, 8.0]).unwrap();
        let c = matmul(&a, &b, &ExecPlan::sequential()).unwrap();
        assert_eq!(c.data(), &[19.0, 22.0, 43.0, 50.0]);
    }

    #[test]
    fn agrees_with_reference_on_seeded_50x50() {
        let mut r = rng::from_seed(1);
        let a = random_matrix(50, 50, &mut r);
        let b = random_matrix(50, 50, &mut r);
        let fast = matmul(&a, &b, &ExecPlan::sequential()).unwrap();
        let slow = reference_matmul(&a, &b).unwrap();
        for (x, y) in fast.data().iter().zip(slow.data()) {
            let rel = (x - y).abs() as f64 / (y.abs() as f64 + 1e-30);
            assert!(rel <= 1e-3, "rel error {rel}");
        }
    }

    #[test]
    fn shape_mismatch_names_both_operands() {
        let a = DenseMatrix::zeros(2, 3).unwrap();
        let b = DenseMatrix::zeros(4, 2).unwrap();
        let err = matmul(&a, &b, &ExecPlan::sequential()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("2x3") && msg.contains("4x2"), "{msg}");
    }

    #[test]
    fn backends_are_bit_identical() {
        let mut r = rng::from_seed(5);
        let a = random_matrix(33, 17, &mut r);
        let b = random_matrix(17, 29, &mut r);
        let seq = matmul(&a, &b, &ExecPlan::sequential()).unwrap();
        let par = matmul(&a, &b, &ExecPlan::parallel_with(8, Some(3)).unwrap()).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn rejects_empty_dims() {
        assert!(DenseMatrix::new(0, 3, vec![]).is_err());
        assert!(DenseMatrix::new(2, 2, vec![0.0; 3]).is_err());
    }
}
