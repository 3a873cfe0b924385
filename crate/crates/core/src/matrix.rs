//! Bit-packed dense matrices over GF(2).
//!
//! Storage is flat row-major: each row occupies `width = ceil(ncols / 64)`
//! consecutive 64-bit words, and column `c` lives in word `c / 64` at bit
//! position `63 - c % 64` (most significant bit first). Rows are located
//! through `row_index`, an array of word offsets into `data`, so rows can be
//! swapped without moving data and windows can address rows indirectly.
//!
//! Bits past `ncols` in the last word of every row are always zero.

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::rowops::{last_word_mask, words_for};
use crate::stats;
use crate::window::{Window, WindowMut};

pub struct BitMatrix {
    nrows: usize,
    ncols: usize,
    width: usize,
    row_index: Vec<usize>,
    data: Vec<u64>,
}

impl BitMatrix {
    /// All-zero `nrows x ncols` matrix with rows laid out in order.
    pub fn new(nrows: usize, ncols: usize) -> Self {
        let width = words_for(ncols);
        let words = nrows.checked_mul(width).expect("matrix size overflows usize");
        let data = vec![0u64; words];
        let row_index = (0..nrows).map(|r| r * width).collect();
        stats::track_alloc((words + nrows) * 8);
        BitMatrix { nrows, ncols, width, row_index, data }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::new(n, n);
        for i in 0..n {
            m.set_bit(i, i, true);
        }
        m
    }

    /// Uniformly random matrix, deterministic in `seed`.
    pub fn random(nrows: usize, ncols: usize, seed: u64) -> Self {
        let mut m = Self::new(nrows, ncols);
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let mask = last_word_mask(ncols);
        for w in m.data.iter_mut() {
            *w = rng.next_u64();
        }
        if m.width > 0 {
            for r in 0..nrows {
                let last = m.row_index[r] + m.width - 1;
                m.data[last] &= mask;
            }
        }
        m
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::new(nrows, ncols);
        for r in 0..nrows {
            for c in 0..ncols {
                if f(r, c) {
                    m.set_bit(r, c, true);
                }
            }
        }
        m
    }

    /// Builds a matrix from rows of 0/1 entries.
    ///
    /// # Panics
    /// Panics if the rows have different lengths.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Self {
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        assert!(rows.iter().all(|r| r.as_ref().len() == ncols), "ragged rows");
        Self::from_fn(rows.len(), ncols, |r, c| rows[r].as_ref()[c] != 0)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Words per row.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Word offset of the first word of each row in the data buffer.
    pub fn row_index(&self) -> &[usize] {
        &self.row_index
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    pub fn is_empty(&self) -> bool {
        self.nrows == 0 || self.ncols == 0
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u64] {
        assert!(r < self.nrows, "row {r} out of range for {} rows", self.nrows);
        let o = self.row_index[r];
        &self.data[o..o + self.width]
    }

    #[inline]
    pub(crate) fn row_mut(&mut self, r: usize) -> &mut [u64] {
        assert!(r < self.nrows, "row {r} out of range for {} rows", self.nrows);
        let o = self.row_index[r];
        &mut self.data[o..o + self.width]
    }

    pub fn get_bit(&self, r: usize, c: usize) -> bool {
        assert!(c < self.ncols, "column {c} out of range for {} columns", self.ncols);
        (self.row(r)[c / 64] >> (63 - c % 64)) & 1 == 1
    }

    pub fn set_bit(&mut self, r: usize, c: usize, v: bool) {
        assert!(c < self.ncols, "column {c} out of range for {} columns", self.ncols);
        let bit = 1u64 << (63 - c % 64);
        let word = &mut self.row_mut(r)[c / 64];
        if v {
            *word |= bit;
        } else {
            *word &= !bit;
        }
    }

    pub fn flip_bit(&mut self, r: usize, c: usize) {
        let v = self.get_bit(r, c);
        self.set_bit(r, c, !v);
    }

    /// Reads `k ≤ 16` entries of row `r` from column `sc` as an integer, the
    /// entry at `sc` weighted `2^(k-1)`.
    pub fn read_bits(&self, r: usize, sc: usize, k: usize) -> usize {
        self.as_window().read_bits(r, sc, k)
    }

    /// Row `dst` += row `src` of this matrix.
    pub fn row_add(&mut self, dst: usize, src: usize) {
        self.as_window_mut().add_row(dst, src);
    }

    /// Row `dst` += row `src_row` of `src`, which must have the same column count.
    pub fn row_add_from(&mut self, dst: usize, src: Window<'_>, src_row: usize) {
        self.as_window_mut().add_row_from(dst, src, src_row);
    }

    /// Exchanges two rows by swapping their row-index entries.
    pub fn swap_rows(&mut self, a: usize, b: usize) {
        assert!(a < self.nrows && b < self.nrows);
        self.row_index.swap(a, b);
    }

    /// True when rows are stored back to back in order.
    pub fn is_contiguous(&self) -> bool {
        self.as_window().is_contiguous()
    }

    pub fn as_window(&self) -> Window<'_> {
        // SAFETY: every row index addresses `width` words inside `data`.
        unsafe { Window::from_raw(self.data.as_ptr(), &self.row_index, 0, self.nrows, self.ncols) }
    }

    pub fn as_window_mut(&mut self) -> WindowMut<'_> {
        // SAFETY: as above, and `&mut self` makes the borrow exclusive. Row
        // indices are distinct, so rows never overlap.
        unsafe { WindowMut::from_raw(self.data.as_mut_ptr(), &self.row_index, 0, self.nrows, self.ncols) }
    }

    /// View of rows `r0..r0+m`, columns `c0..c0+n`. `c0` must be a multiple of 64.
    pub fn window(&self, r0: usize, c0: usize, m: usize, n: usize) -> Result<Window<'_>> {
        self.as_window().window(r0, c0, m, n)
    }

    pub fn window_mut(&mut self, r0: usize, c0: usize, m: usize, n: usize) -> Result<WindowMut<'_>> {
        self.as_window().window(r0, c0, m, n)?;
        Ok(self.as_window_mut().into_sub(r0, c0, m, n))
    }

    /// Entry-wise sum `self + other`.
    pub fn add(&self, other: &BitMatrix) -> Result<BitMatrix> {
        let mut out = BitMatrix::new(self.nrows, self.ncols);
        self.add_to(other, &mut out)?;
        Ok(out)
    }

    /// Writes `self + other` into `target`, which must have matching dimensions.
    pub fn add_to(&self, other: &BitMatrix, target: &mut BitMatrix) -> Result<()> {
        if self.dims() != other.dims() || self.dims() != target.dims() {
            return Err(Error::dim(format!(
                "add of {}x{} and {}x{} into {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols, target.nrows, target.ncols
            )));
        }
        target.as_window_mut().set_sum(self.as_window(), other.as_window());
        Ok(())
    }

    /// `self += other`.
    pub fn add_assign(&mut self, other: &BitMatrix) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::dim(format!("add of {}x{} and {}x{}", self.nrows, self.ncols, other.nrows, other.ncols)));
        }
        self.as_window_mut().add_assign(other.as_window());
        Ok(())
    }

    /// Columns of `self` followed by columns of `other`.
    pub fn augment(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.nrows != other.nrows {
            return Err(Error::dim(format!("augment of {} rows with {} rows", self.nrows, other.nrows)));
        }
        let mut out = BitMatrix::new(self.nrows, self.ncols + other.ncols);
        for r in 0..self.nrows {
            let dst = out.row_mut(r);
            or_bits_at(dst, 0, self.row(r), self.ncols);
            or_bits_at(dst, self.ncols, other.row(r), other.ncols);
        }
        Ok(out)
    }

    /// Rows of `self` above rows of `other`.
    pub fn stack(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.ncols != other.ncols {
            return Err(Error::dim(format!("stack of {} columns with {} columns", self.ncols, other.ncols)));
        }
        let mut out = BitMatrix::new(self.nrows + other.nrows, self.ncols);
        for r in 0..self.nrows {
            out.row_mut(r).copy_from_slice(self.row(r));
        }
        for r in 0..other.nrows {
            out.row_mut(self.nrows + r).copy_from_slice(other.row(r));
        }
        Ok(out)
    }

    pub fn transpose(&self) -> BitMatrix {
        transpose_window(self.as_window())
    }

    /// Bytes of packed entry data (rows times words times 8).
    pub fn data_bytes(&self) -> usize {
        self.nrows * self.width * 8
    }
}

/// ORs the first `nbits` columns of `src` into `dst` starting at column `at`.
/// `dst` must be zero in the target range.
fn or_bits_at(dst: &mut [u64], at: usize, src: &[u64], nbits: usize) {
    let nwords = words_for(nbits);
    let shift = at % 64;
    let base = at / 64;
    for (i, &w) in src[..nwords].iter().enumerate() {
        let w = if i + 1 == nwords { w & last_word_mask(nbits) } else { w };
        dst[base + i] |= w >> shift;
        if shift > 0 && base + i + 1 < dst.len() {
            dst[base + i + 1] |= w << (64 - shift);
        }
    }
}

/// Transposes a 64x64 block in place: row `i` is word `i`, column `j` is bit `63 - j`.
pub(crate) fn transpose64(a: &mut [u64; 64]) {
    let mut j = 32;
    let mut m: u64 = 0x0000_0000_FFFF_FFFF;
    while j != 0 {
        let mut k = 0;
        while k < 64 {
            let t = (a[k] ^ (a[k + j] >> j)) & m;
            a[k] ^= t;
            a[k + j] ^= t << j;
            k = (k + j + 1) & !j;
        }
        j >>= 1;
        m ^= m << j;
    }
}

pub(crate) fn transpose_window(a: Window<'_>) -> BitMatrix {
    let (m, n) = (a.nrows(), a.ncols());
    let mut out = BitMatrix::new(n, m);
    let mask = a.last_mask();
    let aw = a.width();
    let mut block = [0u64; 64];
    for rb in (0..m).step_by(64) {
        let rows = (m - rb).min(64);
        for wc in 0..aw {
            for (i, slot) in block.iter_mut().enumerate() {
                *slot = if i < rows {
                    let w = a.row(rb + i)[wc];
                    if wc + 1 == aw { w & mask } else { w }
                } else {
                    0
                };
            }
            transpose64(&mut block);
            let cols = (n - wc * 64).min(64);
            for (j, &word) in block.iter().enumerate().take(cols) {
                out.row_mut(wc * 64 + j)[rb / 64] = word;
            }
        }
    }
    out
}

impl Clone for BitMatrix {
    fn clone(&self) -> Self {
        stats::track_alloc((self.data.len() + self.nrows) * 8);
        BitMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            width: self.width,
            row_index: self.row_index.clone(),
            data: self.data.clone(),
        }
    }
}

impl Drop for BitMatrix {
    fn drop(&mut self) {
        stats::track_free((self.data.len() + self.nrows) * 8);
    }
}

impl PartialEq for BitMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.nrows == other.nrows
            && self.ncols == other.ncols
            && (0..self.nrows).all(|r| self.row(r) == other.row(r))
    }
}

impl Eq for BitMatrix {}

impl std::fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.nrows, self.ncols)?;
        if self.nrows <= 16 && self.ncols <= 64 {
            for r in 0..self.nrows {
                let line: String = (0..self.ncols).map(|c| if self.get_bit(r, c) { '1' } else { '0' }).collect();
                writeln!(f, "[{line}]")?;
            }
        }
        Ok(())
    }
}

impl<'a> From<&'a BitMatrix> for Window<'a> {
    fn from(m: &'a BitMatrix) -> Self {
        m.as_window()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trailing_clean(m: &BitMatrix) -> bool {
        let mask = last_word_mask(m.ncols());
        m.width() == 0 || (0..m.nrows()).all(|r| m.row(r)[m.width() - 1] & !mask == 0)
    }

    #[test]
    fn create_shapes() {
        let z = BitMatrix::new(2, 2);
        assert_eq!(z, BitMatrix::from_rows(&[[0, 0], [0, 0]]));
        assert_eq!(BitMatrix::new(3, 64).width(), 1);
        let mut w = BitMatrix::new(1, 65);
        assert_eq!(w.width(), 2);
        w.set_bit(0, 64, true);
        assert!(w.get_bit(0, 64));
        assert_eq!(w.row(0)[1], 1 << 63);
        assert!(BitMatrix::new(0, 5).is_empty());
    }

    #[test]
    fn identity_entries() {
        let i = BitMatrix::identity(4);
        assert!(i.get_bit(2, 2));
        assert!(!i.get_bit(2, 3));
    }

    #[test]
    fn set_get_and_masking() {
        let mut a = BitMatrix::new(1, 100);
        a.set_bit(0, 70, true);
        assert!(a.get_bit(0, 70));
        let orig = BitMatrix::random(3, 77, 5);
        let mut b = orig.clone();
        b.flip_bit(1, 76);
        b.flip_bit(1, 76);
        assert_eq!(b, orig);
        b.set_bit(2, 76, true);
        assert!(trailing_clean(&b));
        let mut full = BitMatrix::new(1, 128);
        for c in 0..128 {
            full.set_bit(0, c, true);
        }
        assert_eq!(full.row(0), &[!0u64, !0u64]);
    }

    #[test]
    #[should_panic]
    fn out_of_range_get_panics() {
        BitMatrix::new(2, 2).get_bit(0, 2);
    }

    #[test]
    fn row_add_cases() {
        let mut a = BitMatrix::from_rows(&[[1, 0, 1], [0, 1, 1]]);
        a.row_add(0, 1);
        assert_eq!(a, BitMatrix::from_rows(&[[1, 1, 0], [0, 1, 1]]));
        a.row_add(0, 1);
        assert_eq!(a, BitMatrix::from_rows(&[[1, 0, 1], [0, 1, 1]]));
        a.row_add(0, 0);
        assert_eq!(a, BitMatrix::from_rows(&[[0, 0, 0], [0, 1, 1]]));
        let b = BitMatrix::random(2, 3, 8);
        let before = a.clone();
        a.row_add_from(1, b.as_window(), 0);
        for c in 0..3 {
            assert_eq!(a.get_bit(1, c), before.get_bit(1, c) ^ b.get_bit(0, c));
        }
    }

    #[test]
    fn read_bits_examples() {
        let a = BitMatrix::from_rows(&[[1, 0, 1, 1, 0]]);
        assert_eq!(a.read_bits(0, 0, 4), 11);
        let z = BitMatrix::new(1, 100);
        assert_eq!(z.read_bits(0, 37, 16), 0);
        let mut b = BitMatrix::new(1, 128);
        b.set_bit(0, 64, true);
        assert_eq!(b.read_bits(0, 62, 4), 2);
    }

    #[test]
    fn add_laws() {
        let a = BitMatrix::random(100, 100, 1);
        let b = BitMatrix::random(100, 100, 2);
        let z = BitMatrix::new(100, 100);
        assert_eq!(a.add(&a).unwrap(), z);
        assert_eq!(a.add(&z).unwrap(), a);
        let s = a.add(&b).unwrap();
        for i in 0..100 {
            for j in 0..100 {
                assert_eq!(s.get_bit(i, j), a.get_bit(i, j) ^ b.get_bit(i, j));
            }
        }
        assert!(matches!(a.add(&BitMatrix::new(100, 99)), Err(Error::Dimension(_))));
    }

    #[test]
    fn augment_and_stack() {
        let a = BitMatrix::random(2, 64, 3);
        let b = BitMatrix::random(2, 64, 4);
        let ab = a.augment(&b).unwrap();
        assert_eq!(ab.dims(), (2, 128));
        for r in 0..2 {
            assert_eq!(ab.row(r), &[a.row(r)[0], b.row(r)[0]]);
        }
        let a3 = BitMatrix::random(4, 3, 5);
        let b3 = BitMatrix::random(4, 70, 6);
        let c = a3.augment(&b3).unwrap();
        for r in 0..4 {
            for j in 0..73 {
                let want = if j < 3 { a3.get_bit(r, j) } else { b3.get_bit(r, j - 3) };
                assert_eq!(c.get_bit(r, j), want);
            }
        }
        assert!(trailing_clean(&c));
        assert!(a.augment(&BitMatrix::new(3, 1)).is_err());

        let s = a3.stack(&BitMatrix::random(2, 3, 7)).unwrap();
        assert_eq!(s.nrows(), 6);
        assert_eq!(a3.stack(&BitMatrix::new(0, 3)).unwrap(), a3);
        assert!(a3.stack(&b3).is_err());
    }

    #[test]
    fn transpose_per_entry() {
        let a = BitMatrix::random(65, 130, 11);
        let t = a.transpose();
        assert_eq!(t.dims(), (130, 65));
        for i in 0..65 {
            for j in 0..130 {
                assert_eq!(t.get_bit(j, i), a.get_bit(i, j));
            }
        }
        assert!(trailing_clean(&t));
        assert_eq!(t.transpose(), a);
        assert_eq!(BitMatrix::identity(100).transpose(), BitMatrix::identity(100));
    }

    #[test]
    fn random_is_deterministic() {
        assert_eq!(BitMatrix::random(100, 100, 42), BitMatrix::random(100, 100, 42));
        assert_ne!(BitMatrix::random(100, 100, 42), BitMatrix::random(100, 100, 43));
        assert!(trailing_clean(&BitMatrix::random(7, 71, 1)));
    }

    #[test]
    fn equality_detects_single_flip() {
        let a = BitMatrix::random(10, 10, 1);
        let mut b = a.clone();
        assert_eq!(a, b);
        b.flip_bit(9, 9);
        assert_ne!(a, b);
    }

    #[test]
    fn swapped_rows_follow_row_index() {
        let mut a = BitMatrix::random(3, 90, 2);
        let r0 = a.row(0).to_vec();
        a.swap_rows(0, 2);
        assert_eq!(a.row(2), &r0[..]);
        assert!(!a.is_contiguous());
        let copy = a.as_window().copy_out();
        assert!(copy.is_contiguous());
        assert_eq!(copy, a);
    }
}
