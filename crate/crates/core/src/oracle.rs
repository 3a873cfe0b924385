//! Reference product used to check every other multiplication routine.
//!
//! Entries are unpacked to one byte each through [`BitMatrix::get_bit`] and
//! multiplied with a plain triple loop, so nothing here shares code with the
//! packed kernels.

use crate::matrix::BitMatrix;

/// Triple-loop product over GF(2).
///
/// # Panics
/// Panics if `a.ncols() != b.nrows()`.
pub fn naive_mul(a: &BitMatrix, b: &BitMatrix) -> BitMatrix {
    assert_eq!(a.ncols(), b.nrows(), "inner dimension mismatch");
    let (m, l, n) = (a.nrows(), a.ncols(), b.ncols());
    let unpack = |x: &BitMatrix| -> Vec<u8> {
        let mut v = Vec::with_capacity(x.nrows() * x.ncols());
        for r in 0..x.nrows() {
            for c in 0..x.ncols() {
                v.push(x.get_bit(r, c) as u8);
            }
        }
        v
    };
    let ua = unpack(a);
    let ub = unpack(b);
    let mut uc = vec![0u8; m * n];
    for i in 0..m {
        let crow = &mut uc[i * n..(i + 1) * n];
        for j in 0..l {
            let aij = ua[i * l + j];
            let brow = &ub[j * n..(j + 1) * n];
            for (c, &bv) in crow.iter_mut().zip(brow) {
                *c ^= aij & bv;
            }
        }
    }
    BitMatrix::from_fn(m, n, |i, j| uc[i * n + j] == 1)
}

/// First coordinate where `x` and `y` differ, or `None` when equal.
/// Matrices of different shape differ at `(0, 0)`.
pub fn first_difference(x: &BitMatrix, y: &BitMatrix) -> Option<(usize, usize)> {
    if x.dims() != y.dims() {
        return Some((0, 0));
    }
    for r in 0..x.nrows() {
        if x.row(r) != y.row(r) {
            for c in 0..x.ncols() {
                if x.get_bit(r, c) != y.get_bit(r, c) {
                    return Some((r, c));
                }
            }
        }
    }
    None
}
