//! Classical cubic multiplication.
//!
//! B is transposed so that entry `(i, j)` of the product is the parity of the
//! word-wise AND of row `i` of A and row `j` of B^T. Parities are produced 64 at
//! a time with [`parity64`] when B has at least 64 columns.

use crate::error::{Error, Result};
use crate::matrix::{transpose_window, BitMatrix};
use crate::window::{Window, WindowMut};

/// Parity of the XOR-fold of `words`.
#[inline]
pub fn parity_accumulate(words: &[u64]) -> bool {
    words.iter().fold(0, |acc, w| acc ^ w).count_ones() & 1 == 1
}

/// Parities of 64 words at once: bit `i` (value `1 << i`) of the result is the
/// parity of `words[i]`.
///
/// Each round pairs word `i` with word `i + h` and folds both into half-width
/// fields of one word, low half from the first, high half from the second,
/// halving the word count and the field width until one word of 1-bit fields
/// remains.
pub fn parity64(words: &[u64; 64]) -> u64 {
    let mut buf = *words;
    let mut n = 64;
    let mut h = 32;
    let mut lo: u64 = 0x0000_0000_FFFF_FFFF;
    while h > 0 {
        let half = n / 2;
        for i in 0..half {
            let a = buf[i];
            let b = buf[i + half];
            buf[i] = ((a ^ (a >> h)) & lo) | ((b ^ (b << h)) & !lo);
        }
        n = half;
        h >>= 1;
        lo ^= lo << h;
    }
    buf[0]
}

/// `A * B` by the cubic algorithm.
pub fn mul_cubic(a: &BitMatrix, b: &BitMatrix) -> Result<BitMatrix> {
    if a.ncols() != b.nrows() {
        return Err(Error::dim(format!(
            "inner dimensions differ: {}x{} times {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let mut c = BitMatrix::new(a.nrows(), b.ncols());
    addmul_cubic(&mut c.as_window_mut(), a.as_window(), b.as_window());
    Ok(c)
}

/// `C += A * B` on windows.
pub fn addmul_cubic(c: &mut WindowMut<'_>, a: Window<'_>, b: Window<'_>) {
    assert_eq!(a.ncols(), b.nrows(), "inner dimension mismatch");
    assert!(c.nrows() == a.nrows() && c.ncols() == b.ncols(), "target dimension mismatch");
    let (m, l, n) = (a.nrows(), a.ncols(), b.ncols());
    if m == 0 || n == 0 || l == 0 {
        return;
    }
    let bt = transpose_window(b);
    let aw = a.width();
    let amask = a.last_mask();
    let mut arow = vec![0u64; aw];
    let full_blocks = if n >= 64 { n / 64 } else { 0 };
    let mut acc = [0u64; 64];
    for i in 0..m {
        arow.copy_from_slice(a.row(i));
        arow[aw - 1] &= amask;
        let crow = c.row_mut(i);
        for (blk, cw) in crow.iter_mut().enumerate().take(full_blocks) {
            // Fill in reverse so that column j lands at bit 63 - j of the word.
            for (jj, slot) in acc.iter_mut().rev().enumerate() {
                let brow = bt.row(blk * 64 + jj);
                *slot = arow.iter().zip(brow).fold(0, |p, (x, y)| p ^ (x & y));
            }
            *cw ^= parity64(&acc);
        }
        for j in full_blocks * 64..n {
            let brow = bt.row(j);
            let p = arow.iter().zip(brow).fold(0, |p, (x, y)| p ^ (x & y));
            if p.count_ones() & 1 == 1 {
                crow[j / 64] ^= 1 << (63 - j % 64);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::naive_mul;

    #[test]
    fn parity_examples() {
        assert!(!parity_accumulate(&[!0]));
        assert!(parity_accumulate(&[1]));
        assert!(!parity_accumulate(&[1, 1]));
        assert!(!parity_accumulate(&[]));
    }

    #[test]
    fn parity64_matches_popcount() {
        let r = BitMatrix::random(1, 64 * 64, 77);
        let words: [u64; 64] = r.row(0).try_into().unwrap();
        let got = parity64(&words);
        for (i, w) in words.iter().enumerate() {
            assert_eq!((got >> i) & 1, (w.count_ones() & 1) as u64, "word {i}");
        }
        let mut single = [0u64; 64];
        single[5] = 1;
        assert_eq!(parity64(&single), 1 << 5);
    }

    #[test]
    fn small_product() {
        let a = BitMatrix::from_rows(&[[1, 0], [1, 1]]);
        let b = BitMatrix::from_rows(&[[0, 1], [1, 0]]);
        assert_eq!(mul_cubic(&a, &b).unwrap(), BitMatrix::from_rows(&[[0, 1], [1, 1]]));
    }

    #[test]
    fn identity_and_zero() {
        let a = BitMatrix::random(70, 70, 3);
        assert_eq!(mul_cubic(&a, &BitMatrix::identity(70)).unwrap(), a);
        assert_eq!(mul_cubic(&BitMatrix::identity(70), &a).unwrap(), a);
        assert_eq!(mul_cubic(&a, &BitMatrix::new(70, 9)).unwrap(), BitMatrix::new(70, 9));
    }

    #[test]
    fn thin_product_matches_oracle() {
        let a = BitMatrix::random(3, 200, 1);
        let b = BitMatrix::random(200, 5, 2);
        assert_eq!(mul_cubic(&a, &b).unwrap(), naive_mul(&a, &b));
        let b = BitMatrix::random(200, 131, 2);
        assert_eq!(mul_cubic(&a, &b).unwrap(), naive_mul(&a, &b));
    }

    #[test]
    fn inner_mismatch() {
        let a = BitMatrix::new(2, 3);
        assert!(matches!(mul_cubic(&a, &a), Err(Error::Dimension(_))));
    }

    #[test]
    fn empty_operands() {
        let a = BitMatrix::new(4, 0);
        let b = BitMatrix::new(0, 6);
        assert_eq!(mul_cubic(&a, &b).unwrap(), BitMatrix::new(4, 6));
        assert_eq!(mul_cubic(&b, &BitMatrix::new(6, 2)).unwrap(), BitMatrix::new(0, 2));
    }
}
