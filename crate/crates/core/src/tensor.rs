//! Dense row-major matrices and the handful of kernels the models need.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Mat {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(rows * cols, data.len(), "data length does not match {rows}x{cols}");
        Mat { rows, cols, data }
    }

    pub fn scalar(value: f64) -> Self {
        Mat::from_vec(1, 1, vec![value])
    }

    /// Rows of one-hot vectors of width `cols`.
    pub fn one_hot(indices: &[usize], cols: usize) -> Self {
        let mut m = Mat::zeros(indices.len(), cols);
        for (r, &c) in indices.iter().enumerate() {
            m.data[r * cols + c] = 1.0;
        }
        m
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn item(&self) -> f64 {
        assert_eq!(self.data.len(), 1, "item() on a {}x{} matrix", self.rows, self.cols);
        self.data[0]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zip(&self, other: &Mat, f: impl Fn(f64, f64) -> f64) -> Mat {
        assert_eq!(self.shape(), other.shape(), "elementwise shape mismatch");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    /// `op(a) · op(b)` where `op` optionally transposes.
    pub fn matmul(a: &Mat, ta: bool, b: &Mat, tb: bool) -> Mat {
        let (m, k) = if ta { (a.cols, a.rows) } else { (a.rows, a.cols) };
        let (k2, n) = if tb { (b.cols, b.rows) } else { (b.rows, b.cols) };
        assert_eq!(k, k2, "matmul inner dimensions differ");
        let mut out = Mat::zeros(m, n);
        match (ta, tb) {
            (false, false) => {
                for i in 0..m {
                    let orow = &mut out.data[i * n..(i + 1) * n];
                    for p in 0..k {
                        let x = a.data[i * k + p];
                        if x == 0.0 {
                            continue;
                        }
                        let brow = &b.data[p * n..(p + 1) * n];
                        for (o, &y) in orow.iter_mut().zip(brow) {
                            *o += x * y;
                        }
                    }
                }
            }
            (false, true) => {
                for i in 0..m {
                    let arow = &a.data[i * k..(i + 1) * k];
                    for j in 0..n {
                        let brow = &b.data[j * k..(j + 1) * k];
                        out.data[i * n + j] = arow.iter().zip(brow).map(|(x, y)| x * y).sum();
                    }
                }
            }
            (true, false) => {
                // a is k×m, b is k×n
                for p in 0..k {
                    let arow = &a.data[p * m..(p + 1) * m];
                    let brow = &b.data[p * n..(p + 1) * n];
                    for (i, &x) in arow.iter().enumerate() {
                        if x == 0.0 {
                            continue;
                        }
                        let orow = &mut out.data[i * n..(i + 1) * n];
                        for (o, &y) in orow.iter_mut().zip(brow) {
                            *o += x * y;
                        }
                    }
                }
            }
            (true, true) => return Mat::matmul(&a.transpose(), false, b, true),
        }
        out
    }

    pub fn add_assign(&mut self, other: &Mat) {
        assert_eq!(self.shape(), other.shape(), "add_assign shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(a: &Mat, b: &Mat) -> Mat {
        let mut out = Mat::zeros(a.rows, b.cols);
        for i in 0..a.rows {
            for j in 0..b.cols {
                for p in 0..a.cols {
                    out.data[i * b.cols + j] += a.data[i * a.cols + p] * b.data[p * b.cols + j];
                }
            }
        }
        out
    }

    #[test]
    fn matmul_variants_agree() {
        let a = Mat::from_vec(2, 3, vec![1.0, -2.0, 0.5, 3.0, 0.0, 4.0]);
        let b = Mat::from_vec(3, 2, vec![0.3, 1.0, -1.0, 2.0, 5.0, 0.0]);
        let expect = naive(&a, &b);
        assert_eq!(Mat::matmul(&a, false, &b, false), expect);
        assert_eq!(Mat::matmul(&a.transpose(), true, &b, false), expect);
        assert_eq!(Mat::matmul(&a, false, &b.transpose(), true), expect);
        assert_eq!(Mat::matmul(&a.transpose(), true, &b.transpose(), true), expect);
    }

    #[test]
    fn one_hot_rows() {
        let m = Mat::one_hot(&[2, 0], 3);
        assert_eq!(m.data, vec![0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn sigmoid_is_stable() {
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
        assert!(sigmoid(-1000.0) >= 0.0 && sigmoid(1000.0) <= 1.0);
    }
}
