//! Small forward ops around the LSTM stack: temporal max-pooling, the dense
//! output layer, and a stable two-way softmax.

use super::params::ParamSet;
use super::tensor::Tensor2;
use super::NnError;

/// Componentwise maximum over the rows of a T × q matrix.
pub fn max_pool_time(m: &Tensor2) -> Vec<f64> {
    max_pool_time_argmax(m).0
}

/// Max-pool plus, per column, the first row index attaining the maximum —
/// the subgradient route used by the backward pass.
pub fn max_pool_time_argmax(m: &Tensor2) -> (Vec<f64>, Vec<usize>) {
    let q = m.cols();
    let mut best = m.row(0).to_vec();
    let mut arg = vec![0usize; q];
    for t in 1..m.rows() {
        let row = m.row(t);
        for c in 0..q {
            if row[c] > best[c] {
                best[c] = row[c];
                arg[c] = t;
            }
        }
    }
    (best, arg)
}

/// Dense layer parameters: `W` (out × in) and bias `b` (out).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseParams {
    pub w: Tensor2,
    pub b: Vec<f64>,
}

impl DenseParams {
    pub fn zeros(input: usize, output: usize) -> Self {
        DenseParams {
            w: Tensor2::zeros(output, input),
            b: vec![0.0; output],
        }
    }

    pub fn input_size(&self) -> usize {
        self.w.cols()
    }

    pub fn output_size(&self) -> usize {
        self.w.rows()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NnError> {
        dense_forward(&self.w, &self.b, x)
    }
}

impl ParamSet for DenseParams {
    fn visit(&self, f: &mut dyn FnMut(&str, &[usize], &[f64])) {
        f("w", &[self.w.rows(), self.w.cols()], self.w.data());
        f("b", &[self.b.len()], &self.b);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&str, &[usize], &mut [f64])) {
        f("w", &[self.w.rows(), self.w.cols()], self.w.data_mut());
        f("b", &[self.b.len()], &mut self.b);
    }

    fn zip_mut(
        &mut self,
        other: &Self,
        f: &mut dyn FnMut(&mut [f64], &[f64]),
    ) -> Result<(), NnError> {
        if self.w.rows() != other.w.rows() || self.w.cols() != other.w.cols() {
            return Err(NnError::ShapeMismatch {
                context: "DenseParams::zip_mut",
                expected: format!("{}x{}", self.w.rows(), self.w.cols()),
                found: format!("{}x{}", other.w.rows(), other.w.cols()),
            });
        }
        f(self.w.data_mut(), other.w.data());
        f(&mut self.b, &other.b);
        Ok(())
    }
}

/// `W·x + b` with shape checking.
pub fn dense_forward(w: &Tensor2, b: &[f64], x: &[f64]) -> Result<Vec<f64>, NnError> {
    if x.len() != w.cols() || b.len() != w.rows() {
        return Err(NnError::ShapeMismatch {
            context: "dense_forward",
            expected: format!("x[{}] b[{}]", w.cols(), w.rows()),
            found: format!("x[{}] b[{}]", x.len(), b.len()),
        });
    }
    let mut out = b.to_vec();
    w.matvec_into(x, &mut out);
    Ok(out)
}

/// Two-way softmax with max-subtraction for stability. Outputs are strictly
/// positive and sum to 1.
pub fn softmax2(v: [f64; 2]) -> [f64; 2] {
    let m = v[0].max(v[1]);
    let e0 = (v[0] - m).exp();
    let e1 = (v[1] - m).exp();
    let s = e0 + e1;
    [e0 / s, e1 / s]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pool_takes_columnwise_max() {
        let m = Tensor2::from_vec(2, 2, vec![1.0, 5.0, 3.0, 2.0]).unwrap();
        assert_eq!(max_pool_time(&m), vec![3.0, 5.0]);
    }

    #[test]
    fn pool_of_single_row_is_identity() {
        let m = Tensor2::from_vec(1, 3, vec![0.5, -1.0, 2.0]).unwrap();
        assert_eq!(max_pool_time(&m), vec![0.5, -1.0, 2.0]);
    }

    #[test]
    fn pool_argmax_takes_first_winner() {
        let m = Tensor2::from_vec(3, 1, vec![2.0, 2.0, 1.0]).unwrap();
        let (v, arg) = max_pool_time_argmax(&m);
        assert_eq!(v, vec![2.0]);
        assert_eq!(arg, vec![0]);
    }

    #[test]
    fn dense_identity_and_bias() {
        let w = Tensor2::from_vec(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let out = dense_forward(&w, &[0.0, 0.0], &[3.0, -4.0]).unwrap();
        assert_eq!(out, vec![3.0, -4.0]);
        let out = dense_forward(&w, &[1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert_eq!(out, vec![1.0, 2.0]);
    }

    #[test]
    fn dense_shape_mismatch() {
        let w = Tensor2::zeros(2, 3);
        assert!(dense_forward(&w, &[0.0, 0.0], &[1.0]).is_err());
        assert!(dense_forward(&w, &[0.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn softmax_symmetry_and_exact_ratio() {
        assert_eq!(softmax2([0.0, 0.0]), [0.5, 0.5]);
        let [a, b] = softmax2([2.0f64.ln(), 0.0]);
        assert!((a - 2.0 / 3.0).abs() < 1e-15);
        assert!((b - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn softmax_handles_large_inputs() {
        // Max-subtraction keeps exp arguments <= 0, so nothing overflows
        // even for spreads far beyond what bounded activations can produce.
        let [a, b] = softmax2([500.0, 0.0]);
        assert!(a > 0.0 && b > 0.0);
        assert!((a + b - 1.0).abs() < 1e-12);
        let [a, b] = softmax2([1e9, -1e9]);
        assert!(a.is_finite() && b.is_finite());
        assert!((a + b - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn softmax_sums_to_one_and_is_positive(x in -50.0f64..50.0, y in -50.0f64..50.0) {
            let [a, b] = softmax2([x, y]);
            prop_assert!(a > 0.0 && b > 0.0);
            prop_assert!((a + b - 1.0).abs() < 1e-12);
        }

        #[test]
        fn softmax_is_shift_invariant(x in -20.0f64..20.0, y in -20.0f64..20.0, c in -20.0f64..20.0) {
            let [a, b] = softmax2([x, y]);
            let [a2, b2] = softmax2([x + c, y + c]);
            prop_assert!((a - a2).abs() < 1e-12);
            prop_assert!((b - b2).abs() < 1e-12);
        }

        #[test]
        fn pool_dominates_every_row(rows in proptest::collection::vec(proptest::collection::vec(-10.0f64..10.0, 3), 1..6)) {
            let m = Tensor2::from_rows(&rows).unwrap();
            let pooled = max_pool_time(&m);
            for row in &rows {
                for c in 0..3 {
                    prop_assert!(pooled[c] >= row[c]);
                }
            }
        }

        #[test]
        fn pool_is_row_permutation_invariant(rows in proptest::collection::vec(proptest::collection::vec(-10.0f64..10.0, 2), 2..5)) {
            let m = Tensor2::from_rows(&rows).unwrap();
            let mut rev = rows.clone();
            rev.reverse();
            let m2 = Tensor2::from_rows(&rev).unwrap();
            prop_assert_eq!(max_pool_time(&m), max_pool_time(&m2));
        }
    }
}
