//! Compressed-row complex matrices used by the propagation kernels.
//!
//! Every operator in the model is a sum of a handful of monomials (ladder
//! operators times coupler transitions), each with at most one nonzero per row.
//! Storing them row-compressed keeps matrix-vector and matrix-density products
//! proportional to the number of nonzeros instead of `d^2` or `d^3`.

use ndarray::Array2;
use num_complex::Complex64 as C64;

#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOperator {
    /// Build from `(row, col, value)` triplets. Duplicate positions are summed
    /// and exact zeros dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside dimension {dim}");
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|&(_, _, v)| v != C64::new(0.0, 0.0));

        let mut row_ptr = vec![0; dim + 1];
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        let cols = merged.iter().map(|t| t.1).collect();
        let vals = merged.iter().map(|t| t.2).collect();
        Self { dim, row_ptr, cols, vals }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_triplets(dim, Vec::new())
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let trip = values
            .iter()
            .enumerate()
            .map(|(k, &v)| (k, k, C64::new(v, 0.0)))
            .collect();
        Self::from_triplets(values.len(), trip)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Storage slot of entry `(r, c)` if it is structurally present.
    pub fn position(&self, r: usize, c: usize) -> Option<usize> {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .binary_search(&c)
            .ok()
            .map(|k| span.start + k)
    }

    /// Stored values in slot order; overwriting them keeps the sparsity
    /// pattern.
    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.vals
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    #[inline]
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn adjoint(&self) -> Self {
        let trip = self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.dim, trip)
    }

    pub fn scaled(&self, s: C64) -> Self {
        let trip = self.triplets().map(|(r, c, v)| (r, c, v * s)).collect();
        Self::from_triplets(self.dim, trip)
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &SparseOperator) -> Self {
        assert_eq!(self.dim, rhs.dim, "operator dimensions differ");
        let mut trip = Vec::new();
        for r in 0..self.dim {
            for (k, a) in self.row(r) {
                for (c, b) in rhs.row(k) {
                    trip.push((r, c, a * b));
                }
            }
        }
        Self::from_triplets(self.dim, trip)
    }

    pub fn add(&self, rhs: &SparseOperator) -> Self {
        assert_eq!(self.dim, rhs.dim, "operator dimensions differ");
        let trip = self.triplets().chain(rhs.triplets()).collect();
        Self::from_triplets(self.dim, trip)
    }

    /// True when every nonzero sits on the diagonal.
    pub fn is_diagonal(&self) -> bool {
        self.triplets().all(|(r, c, _)| r == c)
    }

    /// Diagonal entries as a dense vector.
    pub fn diag(&self) -> Vec<C64> {
        let mut d = vec![C64::new(0.0, 0.0); self.dim];
        for (r, c, v) in self.triplets() {
            if r == c {
                d[r] = v;
            }
        }
        d
    }

    pub fn to_dense(&self) -> Array2<C64> {
        let mut m = Array2::zeros((self.dim, self.dim));
        for (r, c, v) in self.triplets() {
            m[[r, c]] += v;
        }
        m
    }

    /// `out += coeff * self * x`.
    #[inline]
    pub fn apply_add(&self, coeff: C64, x: &[C64], out: &mut [C64]) {
        for r in 0..self.dim {
            let span = self.row_ptr[r]..self.row_ptr[r + 1];
            if span.is_empty() {
                continue;
            }
            let mut acc = C64::new(0.0, 0.0);
            for (&c, &v) in self.cols[span.clone()].iter().zip(&self.vals[span]) {
                acc += v * x[c];
            }
            out[r] += coeff * acc;
        }
    }

    /// `out += coeff * self * m` for a row-major `d x d` matrix `m`.
    pub fn left_mul_add(&self, coeff: C64, m: &[C64], out: &mut [C64]) {
        let d = self.dim;
        for r in 0..d {
            let out_row = &mut out[r * d..(r + 1) * d];
            for (c, v) in self.row(r) {
                let w = coeff * v;
                let src = &m[c * d..(c + 1) * d];
                for (o, s) in out_row.iter_mut().zip(src) {
                    *o += w * s;
                }
            }
        }
    }

    /// `out += coeff * m * self` for a row-major `d x d` matrix `m`.
    pub fn right_mul_add(&self, coeff: C64, m: &[C64], out: &mut [C64]) {
        let d = self.dim;
        for a in 0..d {
            let src = &m[a * d..(a + 1) * d];
            let out_row = &mut out[a * d..(a + 1) * d];
            for r in 0..d {
                let s = src[r];
                if s == C64::new(0.0, 0.0) {
                    continue;
                }
                let w = coeff * s;
                for (c, v) in self.row(r) {
                    out_row[c] += w * v;
                }
            }
        }
    }

    /// `out += rate * self * m * self^dagger` for a row-major `d x d` matrix `m`.
    pub fn sandwich_add(&self, rate: f64, m: &[C64], out: &mut [C64]) {
        let d = self.dim;
        for a in 0..d {
            for (ap, va) in self.row(a) {
                let wa = va * rate;
                let src = &m[ap * d..(ap + 1) * d];
                let out_row = &mut out[a * d..(a + 1) * d];
                for b in 0..d {
                    for (bp, vb) in self.row(b) {
                        out_row[b] += wa * src[bp] * vb.conj();
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn duplicates_merge_and_zeros_drop() {
        let op = SparseOperator::from_triplets(
            2,
            vec![(0, 1, c(1.0, 0.0)), (0, 1, c(2.0, 0.0)), (1, 0, c(0.0, 0.0))],
        );
        assert_eq!(op.nnz(), 1);
        assert_eq!(op.to_dense()[[0, 1]], c(3.0, 0.0));
    }

    #[test]
    fn products_match_dense() {
        let a = SparseOperator::from_triplets(3, vec![(0, 1, c(1.0, 2.0)), (2, 0, c(-1.0, 0.5))]);
        let b = SparseOperator::from_triplets(3, vec![(1, 2, c(0.5, 0.0)), (0, 0, c(0.0, 1.0))]);
        let dense = a.to_dense().dot(&b.to_dense());
        assert_eq!(a.mul(&b).to_dense(), dense);

        let m: Vec<C64> = (0..9).map(|k| c(k as f64, -(k as f64) / 3.0)).collect();
        let md = Array2::from_shape_vec((3, 3), m.clone()).unwrap();

        let mut left = vec![c(0.0, 0.0); 9];
        a.left_mul_add(c(1.0, 0.0), &m, &mut left);
        let mut right = vec![c(0.0, 0.0); 9];
        a.right_mul_add(c(1.0, 0.0), &m, &mut right);
        let mut sand = vec![c(0.0, 0.0); 9];
        a.sandwich_add(2.0, &m, &mut sand);

        let ad = a.to_dense();
        let expect_l = ad.dot(&md);
        let expect_r = md.dot(&ad);
        let adag = ad.t().mapv(|v| v.conj());
        let expect_s = ad.dot(&md).dot(&adag).mapv(|v| v * 2.0);
        for k in 0..9 {
            let (i, j) = (k / 3, k % 3);
            assert!((left[k] - expect_l[[i, j]]).norm() < 1e-14);
            assert!((right[k] - expect_r[[i, j]]).norm() < 1e-14);
            assert!((sand[k] - expect_s[[i, j]]).norm() < 1e-14);
        }
    }
}
