//! Boundary-block + interior-stencil storage for 1D operators.
//!
//! Every 1D operator used here (differentiation, interpolation, and their
//! duals) has the same shape: a few special rows at each end and a single
//! repeating stencil in between. `BandedOp` stores exactly that, so
//! application costs O(stencil width) per row, and `to_dense` reconstructs
//! the matrix bit-for-bit for verification and spectrum code.

use nalgebra::DMatrix;

/// Sparse row: coefficients `coeffs` occupy columns `start .. start + coeffs.len()`.
#[derive(Debug, Clone, PartialEq)]
struct Row {
    start: usize,
    coeffs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct BandedOp {
    n_out: usize,
    n_in: usize,
    /// Leading rows stored verbatim (row index = position in the vector).
    top: Vec<Row>,
    /// Trailing rows stored verbatim (row index = n_out - bottom.len() + position).
    bottom: Vec<Row>,
    /// Repeating interior stencil; row i spans columns `i + offset ..`.
    stencil: Vec<f64>,
    /// Column offset of the stencil relative to the row index.
    offset: isize,
}

fn row_window(values: &[f64]) -> Row {
    let first = values.iter().position(|&v| v != 0.0);
    match first {
        None => Row {
            start: 0,
            coeffs: Vec::new(),
        },
        Some(first) => {
            let last = values.iter().rposition(|&v| v != 0.0).unwrap();
            Row {
                start: first,
                coeffs: values[first..=last].to_vec(),
            }
        }
    }
}

impl BandedOp {
    /// Detects the repeating interior stencil of `m` and stores the rest as
    /// boundary blocks. Reconstruction via `to_dense` is exact: rows that do
    /// not participate in a contiguous stencil run through the middle row are
    /// kept verbatim.
    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let n_out = m.nrows();
        let n_in = m.ncols();
        assert!(n_out > 0 && n_in > 0, "empty operator");

        let window = |i: usize| -> Row {
            let row: Vec<f64> = m.row(i).iter().copied().collect();
            row_window(&row)
        };

        let mid = n_out / 2;
        let pattern = window(mid);
        if pattern.coeffs.is_empty() {
            // No usable stencil; store every row verbatim in the top block.
            return Self {
                n_out,
                n_in,
                top: (0..n_out).map(window).collect(),
                bottom: Vec::new(),
                stencil: Vec::new(),
                offset: 0,
            };
        }
        let offset = pattern.start as isize - mid as isize;

        let matches = |i: usize| -> bool {
            let want_start = i as isize + offset;
            if want_start < 0 || want_start as usize + pattern.coeffs.len() > n_in {
                return false;
            }
            let w = window(i);
            w.start == want_start as usize && w.coeffs == pattern.coeffs
        };

        let mut first = mid;
        while first > 0 && matches(first - 1) {
            first -= 1;
        }
        let mut last = mid;
        while last + 1 < n_out && matches(last + 1) {
            last += 1;
        }

        Self {
            n_out,
            n_in,
            top: (0..first).map(window).collect(),
            bottom: (last + 1..n_out).map(window).collect(),
            stencil: pattern.coeffs,
            offset,
        }
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    /// Number of leading rows not covered by the interior stencil.
    pub fn n_top(&self) -> usize {
        self.top.len()
    }

    /// Number of trailing rows not covered by the interior stencil.
    pub fn n_bottom(&self) -> usize {
        self.bottom.len()
    }

    /// Coefficient window of row `i`: (first column, coefficients).
    pub fn row(&self, i: usize) -> (usize, &[f64]) {
        debug_assert!(i < self.n_out);
        if i < self.top.len() {
            let r = &self.top[i];
            (r.start, &r.coeffs)
        } else if i >= self.n_out - self.bottom.len() {
            let r = &self.bottom[i - (self.n_out - self.bottom.len())];
            (r.start, &r.coeffs)
        } else {
            ((i as isize + self.offset) as usize, &self.stencil)
        }
    }

    /// y = A x.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_in);
        debug_assert_eq!(y.len(), self.n_out);
        for i in 0..self.n_out {
            let (start, coeffs) = self.row(i);
            let mut acc = 0.0;
            for (k, &c) in coeffs.iter().enumerate() {
                acc += c * x[start + k];
            }
            y[i] = acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_out, self.n_in);
        for i in 0..self.n_out {
            let (start, coeffs) = self.row(i);
            for (k, &c) in coeffs.iter().enumerate() {
                m[(i, start + k)] = c;
            }
        }
        m
    }
}
