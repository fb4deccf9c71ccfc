//! LSTM cell with gates packed as `[input, forget, candidate, output]`.

use crate::tape::{Tape, Var};
use crate::tensor::{sigmoid, Mat};

/// One step on the tape. `w` is `(in + hidden) × 4·hidden`, `b` is `1 × 4·hidden`.
pub(crate) fn cell(tape: &mut Tape, x: Var, h: Var, c: Var, w: Var, b: Var, hidden: usize) -> (Var, Var) {
    let xh = tape.concat_cols(x, h);
    let pre = tape.matmul(xh, w);
    let pre = tape.add_row(pre, b);
    let i = tape.slice_cols(pre, 0, hidden);
    let f = tape.slice_cols(pre, hidden, hidden);
    let g = tape.slice_cols(pre, 2 * hidden, hidden);
    let o = tape.slice_cols(pre, 3 * hidden, hidden);
    let i = tape.sigmoid(i);
    let f = tape.sigmoid(f);
    let g = tape.tanh(g);
    let o = tape.sigmoid(o);
    let keep = tape.mul(f, c);
    let write = tape.mul(i, g);
    let c_next = tape.add(keep, write);
    let squashed = tape.tanh(c_next);
    let h_next = tape.mul(o, squashed);
    (h_next, c_next)
}

/// The same step on plain matrices, for inference.
pub(crate) fn cell_plain(x: &Mat, h: &Mat, c: &Mat, w: &Mat, b: &Mat, hidden: usize) -> (Mat, Mat) {
    let rows = x.rows;
    let mut xh = Mat::zeros(rows, x.cols + h.cols);
    for r in 0..rows {
        let row = xh.row_mut(r);
        row[..x.cols].copy_from_slice(x.row(r));
        row[x.cols..].copy_from_slice(h.row(r));
    }
    let pre = Mat::matmul(&xh, false, w, false);
    let mut h_next = Mat::zeros(rows, hidden);
    let mut c_next = Mat::zeros(rows, hidden);
    for r in 0..rows {
        let p = pre.row(r);
        for j in 0..hidden {
            let i = sigmoid(p[j] + b.data[j]);
            let f = sigmoid(p[hidden + j] + b.data[hidden + j]);
            let g = (p[2 * hidden + j] + b.data[2 * hidden + j]).tanh();
            let o = sigmoid(p[3 * hidden + j] + b.data[3 * hidden + j]);
            let cn = f * c.row(r)[j] + i * g;
            c_next.row_mut(r)[j] = cn;
            h_next.row_mut(r)[j] = o * cn.tanh();
        }
    }
    (h_next, c_next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use rand::Rng;

    #[test]
    fn tape_and_plain_agree() {
        let mut rng = stream_rng(5, 0);
        let mut rand_mat = |r, c| Mat::from_vec(r, c, (0..r * c).map(|_| rng.random_range(-1.0..1.0)).collect());
        let (x, h, c) = (rand_mat(3, 4), rand_mat(3, 2), rand_mat(3, 2));
        let (w, b) = (rand_mat(6, 8), rand_mat(1, 8));
        let (hp, cp) = cell_plain(&x, &h, &c, &w, &b, 2);
        let mut t = Tape::new();
        let vars: Vec<Var> = [&x, &h, &c, &w, &b].iter().map(|m| t.constant((*m).clone())).collect();
        let (ht, ct) = cell(&mut t, vars[0], vars[1], vars[2], vars[3], vars[4], 2);
        for (a, b) in t.value(ht).data.iter().zip(&hp.data) {
            assert!((a - b).abs() < 1e-14);
        }
        for (a, b) in t.value(ct).data.iter().zip(&cp.data) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
