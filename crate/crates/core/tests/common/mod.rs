#![allow(dead_code)]

use gf2mat::BitMatrix;

/// Entry-by-entry product: `c[i][j]` is the parity of the dot product of row
/// `i` of A with column `j` of B, both unpacked to bytes.
pub fn reference_mul(a: &BitMatrix, b: &BitMatrix) -> BitMatrix {
    assert_eq!(a.ncols(), b.nrows());
    let (m, l, n) = (a.nrows(), a.ncols(), b.ncols());
    let rows: Vec<Vec<u8>> = (0..m).map(|i| (0..l).map(|x| a.get_bit(i, x) as u8).collect()).collect();
    let cols: Vec<Vec<u8>> = (0..n).map(|j| (0..l).map(|x| b.get_bit(x, j) as u8).collect()).collect();
    BitMatrix::from_fn(m, n, |i, j| {
        rows[i].iter().zip(&cols[j]).fold(0u8, |acc, (&p, &q)| acc ^ (p & q)) == 1
    })
}

/// True when every bit past `ncols` in each row's last word is zero.
pub fn trailing_clean(m: &BitMatrix) -> bool {
    let r = m.ncols() % 64;
    r == 0 || (0..m.nrows()).all(|i| m.row(i).last().is_none_or(|w| w & (!0u64 >> r) == 0))
}
