//! Reverse-mode automatic differentiation over [`Mat`] values.
//!
//! Gradients are themselves recorded on the tape, so a gradient can be
//! differentiated again. The critic's gradient penalty depends on this: it
//! needs `∂/∂w ‖∂D/∂x‖`.

use crate::tensor::{sigmoid, Mat};

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Clone, Copy, Debug)]
enum Op {
    Leaf,
    MatMul { a: Var, b: Var, ta: bool, tb: bool },
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Div(Var, Var),
    Scale(Var, f64),
    Offset(Var),
    AddRow(Var, Var),
    SumRows(Var),
    BroadcastRows(Var),
    SumCols(Var),
    BroadcastCols(Var),
    Sum(Var),
    Expand(Var),
    Sigmoid(Var),
    Tanh(Var),
    Exp(Var),
    Sqrt(Var),
    SliceCols { a: Var, start: usize },
    PadCols { a: Var, start: usize },
    ConcatCols(Var, Var),
    StraightThrough(Var),
}

struct Node {
    value: Mat,
    op: Op,
    needs_grad: bool,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Mat, op: Op, parents: &[Var]) -> Var {
        let needs_grad = parents.iter().any(|p| self.nodes[p.0].needs_grad);
        self.nodes.push(Node { value, op, needs_grad });
        Var(self.nodes.len() - 1)
    }

    /// A differentiable input.
    pub fn variable(&mut self, value: Mat) -> Var {
        self.nodes.push(Node {
            value,
            op: Op::Leaf,
            needs_grad: true,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn constant(&mut self, value: Mat) -> Var {
        self.nodes.push(Node {
            value,
            op: Op::Leaf,
            needs_grad: false,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Mat {
        &self.nodes[v.0].value
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        self.matmul_t(a, false, b, false)
    }

    pub fn matmul_t(&mut self, a: Var, ta: bool, b: Var, tb: bool) -> Var {
        let value = Mat::matmul(self.value(a), ta, self.value(b), tb);
        self.push(value, Op::MatMul { a, b, ta, tb }, &[a, b])
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a).zip(self.value(b), |x, y| x + y);
        self.push(value, Op::Add(a, b), &[a, b])
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a).zip(self.value(b), |x, y| x - y);
        self.push(value, Op::Sub(a, b), &[a, b])
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a).zip(self.value(b), |x, y| x * y);
        self.push(value, Op::Mul(a, b), &[a, b])
    }

    pub fn div(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a).zip(self.value(b), |x, y| x / y);
        self.push(value, Op::Div(a, b), &[a, b])
    }

    pub fn scale(&mut self, a: Var, k: f64) -> Var {
        let value = self.value(a).map(|x| x * k);
        self.push(value, Op::Scale(a, k), &[a])
    }

    pub fn offset(&mut self, a: Var, k: f64) -> Var {
        let value = self.value(a).map(|x| x + k);
        self.push(value, Op::Offset(a), &[a])
    }

    /// `a + bias` with a `1×c` bias broadcast over every row of `a`.
    pub fn add_row(&mut self, a: Var, bias: Var) -> Var {
        let (am, bm) = (self.value(a), self.value(bias));
        assert_eq!((1, am.cols), bm.shape(), "bias must be 1x{}", am.cols);
        let mut value = am.clone();
        for r in 0..value.rows {
            for (x, b) in value.row_mut(r).iter_mut().zip(&bm.data) {
                *x += b;
            }
        }
        self.push(value, Op::AddRow(a, bias), &[a, bias])
    }

    pub fn sum_rows(&mut self, a: Var) -> Var {
        let am = self.value(a);
        let mut value = Mat::zeros(1, am.cols);
        for r in 0..am.rows {
            for (o, x) in value.data.iter_mut().zip(am.row(r)) {
                *o += x;
            }
        }
        self.push(value, Op::SumRows(a), &[a])
    }

    fn broadcast_rows(&mut self, a: Var, rows: usize) -> Var {
        let am = self.value(a);
        let mut data = Vec::with_capacity(rows * am.cols);
        for _ in 0..rows {
            data.extend_from_slice(&am.data);
        }
        let value = Mat::from_vec(rows, am.cols, data);
        self.push(value, Op::BroadcastRows(a), &[a])
    }

    /// Row sums as an `r×1` column.
    pub fn sum_cols(&mut self, a: Var) -> Var {
        let am = self.value(a);
        let data = (0..am.rows).map(|r| am.row(r).iter().sum()).collect();
        let value = Mat::from_vec(am.rows, 1, data);
        self.push(value, Op::SumCols(a), &[a])
    }

    pub fn broadcast_cols(&mut self, a: Var, cols: usize) -> Var {
        let am = self.value(a);
        assert_eq!(am.cols, 1, "broadcast_cols expects a column");
        let data = am.data.iter().flat_map(|&x| std::iter::repeat_n(x, cols)).collect();
        let value = Mat::from_vec(am.rows, cols, data);
        self.push(value, Op::BroadcastCols(a), &[a])
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let value = Mat::scalar(self.value(a).sum());
        self.push(value, Op::Sum(a), &[a])
    }

    fn expand(&mut self, a: Var, rows: usize, cols: usize) -> Var {
        let value = Mat::filled(rows, cols, self.value(a).item());
        self.push(value, Op::Expand(a), &[a])
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let value = self.value(a).map(sigmoid);
        self.push(value, Op::Sigmoid(a), &[a])
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let value = self.value(a).map(f64::tanh);
        self.push(value, Op::Tanh(a), &[a])
    }

    pub fn exp(&mut self, a: Var) -> Var {
        let value = self.value(a).map(f64::exp);
        self.push(value, Op::Exp(a), &[a])
    }

    pub fn sqrt(&mut self, a: Var) -> Var {
        let value = self.value(a).map(f64::sqrt);
        self.push(value, Op::Sqrt(a), &[a])
    }

    pub fn slice_cols(&mut self, a: Var, start: usize, len: usize) -> Var {
        let am = self.value(a);
        assert!(start + len <= am.cols, "column slice out of bounds");
        let mut data = Vec::with_capacity(am.rows * len);
        for r in 0..am.rows {
            data.extend_from_slice(&am.row(r)[start..start + len]);
        }
        let value = Mat::from_vec(am.rows, len, data);
        self.push(value, Op::SliceCols { a, start }, &[a])
    }

    fn pad_cols(&mut self, a: Var, start: usize, total: usize) -> Var {
        let am = self.value(a);
        let mut value = Mat::zeros(am.rows, total);
        for r in 0..am.rows {
            value.row_mut(r)[start..start + am.cols].copy_from_slice(am.row(r));
        }
        self.push(value, Op::PadCols { a, start }, &[a])
    }

    pub fn concat_cols(&mut self, a: Var, b: Var) -> Var {
        let (am, bm) = (self.value(a), self.value(b));
        assert_eq!(am.rows, bm.rows, "concat row mismatch");
        let mut data = Vec::with_capacity(am.rows * (am.cols + bm.cols));
        for r in 0..am.rows {
            data.extend_from_slice(am.row(r));
            data.extend_from_slice(bm.row(r));
        }
        let value = Mat::from_vec(am.rows, am.cols + bm.cols, data);
        self.push(value, Op::ConcatCols(a, b), &[a, b])
    }

    /// Forward value `hard`, gradient passed unchanged to `relaxed`.
    pub fn straight_through(&mut self, relaxed: Var, hard: Mat) -> Var {
        assert_eq!(
            self.value(relaxed).shape(),
            hard.shape(),
            "straight-through shape mismatch"
        );
        self.push(hard, Op::StraightThrough(relaxed), &[relaxed])
    }

    /// Row-wise softmax. The row maximum is subtracted as a constant, which
    /// leaves both the value and the gradient unchanged.
    pub fn softmax_rows(&mut self, a: Var) -> Var {
        let am = self.value(a);
        let shift: Vec<f64> = (0..am.rows)
            .map(|r| am.row(r).iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect();
        let cols = am.cols;
        let shift = self.constant(Mat::from_vec(shift.len(), 1, shift));
        let shift = self.broadcast_cols(shift, cols);
        let centered = self.sub(a, shift);
        let e = self.exp(centered);
        let total = self.sum_cols(e);
        let total = self.broadcast_cols(total, cols);
        self.div(e, total)
    }

    /// Gradients of the scalar `output` with respect to each of `wrt`.
    ///
    /// The returned nodes live on this tape and can be differentiated again.
    /// `None` means `output` does not depend on that input.
    pub fn grad(&mut self, output: Var, wrt: &[Var]) -> Vec<Option<Var>> {
        assert_eq!(self.value(output).shape(), (1, 1), "grad needs a scalar output");
        let mut grads: Vec<Option<Var>> = vec![None; output.0 + 1];
        grads[output.0] = Some(self.constant(Mat::scalar(1.0)));
        for i in (0..=output.0).rev() {
            let Some(g) = grads[i] else { continue };
            if !self.nodes[i].needs_grad {
                continue;
            }
            let op = self.nodes[i].op;
            let me = Var(i);
            match op {
                Op::Leaf => {}
                Op::MatMul { a, b, ta, tb } => {
                    if self.nodes[a.0].needs_grad {
                        let ga = if ta {
                            self.matmul_t(b, tb, g, true)
                        } else {
                            self.matmul_t(g, false, b, !tb)
                        };
                        self.accumulate(&mut grads, a, ga);
                    }
                    if self.nodes[b.0].needs_grad {
                        let gb = if tb {
                            self.matmul_t(g, true, a, ta)
                        } else {
                            self.matmul_t(a, !ta, g, false)
                        };
                        self.accumulate(&mut grads, b, gb);
                    }
                }
                Op::Add(a, b) => {
                    self.accumulate(&mut grads, a, g);
                    self.accumulate(&mut grads, b, g);
                }
                Op::Sub(a, b) => {
                    self.accumulate(&mut grads, a, g);
                    if self.nodes[b.0].needs_grad {
                        let gb = self.scale(g, -1.0);
                        self.accumulate(&mut grads, b, gb);
                    }
                }
                Op::Mul(a, b) => {
                    if self.nodes[a.0].needs_grad {
                        let ga = self.mul(g, b);
                        self.accumulate(&mut grads, a, ga);
                    }
                    if self.nodes[b.0].needs_grad {
                        let gb = self.mul(g, a);
                        self.accumulate(&mut grads, b, gb);
                    }
                }
                Op::Div(a, b) => {
                    if self.nodes[a.0].needs_grad {
                        let ga = self.div(g, b);
                        self.accumulate(&mut grads, a, ga);
                    }
                    if self.nodes[b.0].needs_grad {
                        let gy = self.mul(g, me);
                        let q = self.div(gy, b);
                        let gb = self.scale(q, -1.0);
                        self.accumulate(&mut grads, b, gb);
                    }
                }
                Op::Scale(a, k) => {
                    let ga = self.scale(g, k);
                    self.accumulate(&mut grads, a, ga);
                }
                Op::Offset(a) => self.accumulate(&mut grads, a, g),
                Op::AddRow(a, bias) => {
                    self.accumulate(&mut grads, a, g);
                    if self.nodes[bias.0].needs_grad {
                        let gb = self.sum_rows(g);
                        self.accumulate(&mut grads, bias, gb);
                    }
                }
                Op::SumRows(a) => {
                    let rows = self.value(a).rows;
                    let ga = self.broadcast_rows(g, rows);
                    self.accumulate(&mut grads, a, ga);
                }
                Op::BroadcastRows(a) => {
                    let ga = self.sum_rows(g);
                    self.accumulate(&mut grads, a, ga);
                }
                Op::SumCols(a) => {
                    let cols = self.value(a).cols;
                    let ga = self.broadcast_cols(g, cols);
                    self.accumulate(&mut grads, a, ga);
                }
                Op::BroadcastCols(a) => {
                    let ga = self.sum_cols(g);
                    self.accumulate(&mut grads, a, ga);
                }
                Op::Sum(a) => {
                    let (r, c) = self.value(a).shape();
                    let ga = self.expand(g, r, c);
                    self.accumulate(&mut grads, a, ga);
                }
                Op::Expand(a) => {
                    let ga = self.sum(g);
                    self.accumulate(&mut grads, a, ga);
                }
                Op::Sigmoid(a) => {
                    // σ' = σ(1 - σ)
                    let neg = self.scale(me, -1.0);
                    let one_minus = self.offset(neg, 1.0);
                    let d = self.mul(me, one_minus);
                    let ga = self.mul(g, d);
                    self.accumulate(&mut grads, a, ga);
                }
                Op::Tanh(a) => {
                    let sq = self.mul(me, me);
                    let neg = self.scale(sq, -1.0);
                    let d = self.offset(neg, 1.0);
                    let ga = self.mul(g, d);
                    self.accumulate(&mut grads, a, ga);
                }
                Op::Exp(a) => {
                    let ga = self.mul(g, me);
                    self.accumulate(&mut grads, a, ga);
                }
                Op::Sqrt(a) => {
                    let half = self.scale(g, 0.5);
                    let ga = self.div(half, me);
                    self.accumulate(&mut grads, a, ga);
                }
                Op::SliceCols { a, start } => {
                    let total = self.value(a).cols;
                    let ga = self.pad_cols(g, start, total);
                    self.accumulate(&mut grads, a, ga);
                }
                Op::PadCols { a, start } => {
                    let len = self.value(a).cols;
                    let ga = self.slice_cols(g, start, len);
                    self.accumulate(&mut grads, a, ga);
                }
                Op::ConcatCols(a, b) => {
                    let (ac, bc) = (self.value(a).cols, self.value(b).cols);
                    if self.nodes[a.0].needs_grad {
                        let ga = self.slice_cols(g, 0, ac);
                        self.accumulate(&mut grads, a, ga);
                    }
                    if self.nodes[b.0].needs_grad {
                        let gb = self.slice_cols(g, ac, bc);
                        self.accumulate(&mut grads, b, gb);
                    }
                }
                Op::StraightThrough(a) => self.accumulate(&mut grads, a, g),
            }
        }
        wrt.iter().map(|v| grads.get(v.0).copied().flatten()).collect()
    }

    fn accumulate(&mut self, grads: &mut [Option<Var>], target: Var, g: Var) {
        if !self.nodes[target.0].needs_grad {
            return;
        }
        grads[target.0] = Some(match grads[target.0] {
            None => g,
            Some(prev) => self.add(prev, g),
        });
    }
}
