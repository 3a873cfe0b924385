//! Non-owning submatrix views ("matrix windows").
//!
//! A window addresses its rows through a slice of the parent's row index and
//! starts at a word-aligned column, so taking a window never copies data.
//! The right edge may fall anywhere: the last word of a window row can then
//! contain parent bits outside the window, which window operations mask off
//! on read and leave untouched on write.

use std::marker::PhantomData;

use crate::error::{Error, Result};
use crate::matrix::BitMatrix;
use crate::rowops::{self, last_word_mask, words_for};

fn check_window(nrows: usize, ncols: usize, r0: usize, c0: usize, m: usize, n: usize) -> Result<()> {
    if !c0.is_multiple_of(64) {
        return Err(Error::Alignment { col: c0 });
    }
    if r0.checked_add(m).is_none_or(|e| e > nrows) || c0.checked_add(n).is_none_or(|e| e > ncols) {
        return Err(Error::dim(format!(
            "window [{r0}..{}, {c0}..{}] exceeds {nrows}x{ncols}",
            r0.saturating_add(m),
            c0.saturating_add(n)
        )));
    }
    Ok(())
}

/// Read-only view into a [`BitMatrix`].
#[derive(Clone, Copy)]
pub struct Window<'a> {
    ptr: *const u64,
    rows: &'a [usize],
    word_offset: usize,
    nrows: usize,
    ncols: usize,
    _marker: PhantomData<&'a [u64]>,
}

// SAFETY: a Window is a shared borrow of u64 data.
unsafe impl Send for Window<'_> {}
unsafe impl Sync for Window<'_> {}

impl<'a> Window<'a> {
    /// # Safety
    /// Every `rows[r] + word_offset + words_for(ncols)` must lie within the
    /// allocation behind `ptr`, which must stay borrowed shared for `'a`.
    pub(crate) unsafe fn from_raw(
        ptr: *const u64,
        rows: &'a [usize],
        word_offset: usize,
        nrows: usize,
        ncols: usize,
    ) -> Self {
        debug_assert_eq!(rows.len(), nrows);
        Window { ptr, rows, word_offset, nrows, ncols, _marker: PhantomData }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Words per row.
    pub fn width(&self) -> usize {
        words_for(self.ncols)
    }

    /// Column offset of this window inside its parent, in words.
    pub fn word_offset(&self) -> usize {
        self.word_offset
    }

    /// Mask of the valid bits in the last word of each row.
    pub fn last_mask(&self) -> u64 {
        last_word_mask(self.ncols)
    }

    /// Raw words of row `r`. The last word may carry bits beyond `ncols` when
    /// the window ends inside a parent word; mask with [`Window::last_mask`].
    #[inline]
    pub fn row(&self, r: usize) -> &'a [u64] {
        assert!(r < self.nrows, "row {r} out of range for {} rows", self.nrows);
        // SAFETY: guaranteed by the constructor contract.
        unsafe { std::slice::from_raw_parts(self.ptr.add(self.rows[r] + self.word_offset), self.width()) }
    }

    pub fn get_bit(&self, r: usize, c: usize) -> bool {
        assert!(c < self.ncols, "column {c} out of range for {} columns", self.ncols);
        (self.row(r)[c / 64] >> (63 - c % 64)) & 1 == 1
    }

    /// Reads `k` consecutive entries of row `r` starting at column `sc` as an
    /// integer, the entry at `sc` being the most significant bit.
    #[inline]
    pub fn read_bits(&self, r: usize, sc: usize, k: usize) -> usize {
        assert!((1..=16).contains(&k), "read_bits width {k} outside 1..=16");
        assert!(sc + k <= self.ncols, "read_bits range {sc}+{k} exceeds {} columns", self.ncols);
        rowops::read_bits_raw(self.row(r), sc, k) as usize
    }

    /// Sub-window relative to this window.
    pub fn window(&self, r0: usize, c0: usize, m: usize, n: usize) -> Result<Window<'a>> {
        check_window(self.nrows, self.ncols, r0, c0, m, n)?;
        Ok(self.sub(r0, c0, m, n))
    }

    /// Like [`Window::window`], panicking on invalid bounds.
    pub fn sub(&self, r0: usize, c0: usize, m: usize, n: usize) -> Window<'a> {
        assert!(check_window(self.nrows, self.ncols, r0, c0, m, n).is_ok(), "invalid sub-window");
        Window {
            ptr: self.ptr,
            rows: &self.rows[r0..r0 + m],
            word_offset: self.word_offset + c0 / 64,
            nrows: m,
            ncols: n,
            _marker: PhantomData,
        }
    }

    /// True when consecutive rows are adjacent in memory.
    pub fn is_contiguous(&self) -> bool {
        let w = self.width();
        self.rows.windows(2).all(|p| p[1] == p[0] + w)
    }

    /// Copies the window into a freshly owned matrix.
    pub fn copy_out(&self) -> BitMatrix {
        let mut out = BitMatrix::new(self.nrows, self.ncols);
        out.as_window_mut().copy_from(*self);
        out
    }

    pub fn to_matrix(&self) -> BitMatrix {
        self.copy_out()
    }

    /// Entry-wise equality of contents.
    pub fn same_entries(&self, other: &Window<'_>) -> bool {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return false;
        }
        let w = self.width();
        if w == 0 {
            return true;
        }
        let mask = self.last_mask();
        (0..self.nrows).all(|r| {
            let (a, b) = (self.row(r), other.row(r));
            a[..w - 1] == b[..w - 1] && (a[w - 1] ^ b[w - 1]) & mask == 0
        })
    }
}

impl std::fmt::Debug for Window<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Window({}x{}, word_offset={})", self.nrows, self.ncols, self.word_offset)
    }
}

/// Mutable view into a [`BitMatrix`]. Disjoint mutable windows into one
/// parent are obtained by splitting.
pub struct WindowMut<'a> {
    ptr: *mut u64,
    rows: &'a [usize],
    word_offset: usize,
    nrows: usize,
    ncols: usize,
    _marker: PhantomData<&'a mut [u64]>,
}

// SAFETY: a WindowMut is an exclusive borrow of the words it addresses.
unsafe impl Send for WindowMut<'_> {}
unsafe impl Sync for WindowMut<'_> {}

impl<'a> WindowMut<'a> {
    /// # Safety
    /// As [`Window::from_raw`], and the addressed words must not be reachable
    /// through any other live reference for `'a`.
    pub(crate) unsafe fn from_raw(
        ptr: *mut u64,
        rows: &'a [usize],
        word_offset: usize,
        nrows: usize,
        ncols: usize,
    ) -> Self {
        debug_assert_eq!(rows.len(), nrows);
        WindowMut { ptr, rows, word_offset, nrows, ncols, _marker: PhantomData }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn width(&self) -> usize {
        words_for(self.ncols)
    }

    pub fn last_mask(&self) -> u64 {
        last_word_mask(self.ncols)
    }

    /// Shared view of the same region.
    pub fn rb(&self) -> Window<'_> {
        // SAFETY: shared reborrow of our exclusive region.
        unsafe { Window::from_raw(self.ptr, self.rows, self.word_offset, self.nrows, self.ncols) }
    }

    /// Shorter-lived mutable reborrow.
    pub fn rb_mut(&mut self) -> WindowMut<'_> {
        WindowMut { ptr: self.ptr, rows: self.rows, word_offset: self.word_offset, nrows: self.nrows, ncols: self.ncols, _marker: PhantomData }
    }

    pub fn row(&self, r: usize) -> &[u64] {
        self.rb().row(r)
    }

    /// Raw mutable words of row `r`. Callers must not change bits of the last
    /// word outside [`WindowMut::last_mask`].
    #[inline]
    pub(crate) fn row_mut(&mut self, r: usize) -> &mut [u64] {
        assert!(r < self.nrows, "row {r} out of range for {} rows", self.nrows);
        // SAFETY: rows are distinct and the column range is exclusively ours.
        unsafe { std::slice::from_raw_parts_mut(self.ptr.add(self.rows[r] + self.word_offset), self.width()) }
    }

    pub fn get_bit(&self, r: usize, c: usize) -> bool {
        self.rb().get_bit(r, c)
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

    pub fn is_contiguous(&self) -> bool {
        self.rb().is_contiguous()
    }

    /// Mutable sub-window relative to this window.
    pub fn window_mut(&mut self, r0: usize, c0: usize, m: usize, n: usize) -> Result<WindowMut<'_>> {
        check_window(self.nrows, self.ncols, r0, c0, m, n)?;
        Ok(self.rb_mut().into_sub(r0, c0, m, n))
    }

    /// Consuming sub-window, panicking on invalid bounds.
    pub fn into_sub(self, r0: usize, c0: usize, m: usize, n: usize) -> WindowMut<'a> {
        assert!(check_window(self.nrows, self.ncols, r0, c0, m, n).is_ok(), "invalid sub-window");
        WindowMut {
            ptr: self.ptr,
            rows: &self.rows[r0..r0 + m],
            word_offset: self.word_offset + c0 / 64,
            nrows: m,
            ncols: n,
            _marker: PhantomData,
        }
    }

    /// Splits into rows `[0, r)` and `[r, nrows)`.
    pub fn split_at_row(self, r: usize) -> (WindowMut<'a>, WindowMut<'a>) {
        assert!(r <= self.nrows);
        let (top, bottom) = self.rows.split_at(r);
        let mk = |rows: &'a [usize]| WindowMut {
            ptr: self.ptr,
            rows,
            word_offset: self.word_offset,
            nrows: rows.len(),
            ncols: self.ncols,
            _marker: PhantomData,
        };
        (mk(top), mk(bottom))
    }

    /// Splits into columns `[0, c)` and `[c, ncols)`; `c` must be a multiple of 64.
    pub fn split_at_col(self, c: usize) -> (WindowMut<'a>, WindowMut<'a>) {
        assert!(c.is_multiple_of(64) && c <= self.ncols, "column split {c} must be word aligned");
        let left = WindowMut { ptr: self.ptr, rows: self.rows, word_offset: self.word_offset, nrows: self.nrows, ncols: c, _marker: PhantomData };
        let right = WindowMut {
            ptr: self.ptr,
            rows: self.rows,
            word_offset: self.word_offset + c / 64,
            nrows: self.nrows,
            ncols: self.ncols - c,
            _marker: PhantomData,
        };
        (left, right)
    }

    /// Quadrants `[NW, NE, SW, SE]` around row `r` and aligned column `c`.
    pub fn quadrants(self, r: usize, c: usize) -> [WindowMut<'a>; 4] {
        let (top, bottom) = self.split_at_row(r);
        let (nw, ne) = top.split_at_col(c);
        let (sw, se) = bottom.split_at_col(c);
        [nw, ne, sw, se]
    }

    /// Applies `f(dst_row, r)` to each row, preserving parent bits outside the
    /// window in the last word. `f` may write arbitrary bits.
    fn update_rows(&mut self, mut f: impl FnMut(&mut [u64], usize)) {
        let w = self.width();
        if w == 0 {
            return;
        }
        let mask = self.last_mask();
        for r in 0..self.nrows {
            let row = self.row_mut(r);
            let saved = row[w - 1];
            f(row, r);
            row[w - 1] = (saved & !mask) | (row[w - 1] & mask);
        }
    }

    pub fn clear(&mut self) {
        self.update_rows(|row, _| row.fill(0));
    }

    /// `self = src`.
    pub fn copy_from(&mut self, src: Window<'_>) {
        assert!(src.nrows == self.nrows && src.ncols == self.ncols, "copy_from dimension mismatch");
        self.update_rows(|row, r| row.copy_from_slice(src.row(r)));
    }

    /// `self += src`.
    pub fn add_assign(&mut self, src: Window<'_>) {
        assert!(src.nrows == self.nrows && src.ncols == self.ncols, "add_assign dimension mismatch");
        self.update_rows(|row, r| rowops::xor_into(row, src.row(r)));
    }

    /// `self = a + b`.
    pub fn set_sum(&mut self, a: Window<'_>, b: Window<'_>) {
        assert!(
            a.nrows == self.nrows && b.nrows == self.nrows && a.ncols == self.ncols && b.ncols == self.ncols,
            "set_sum dimension mismatch"
        );
        self.update_rows(|row, r| rowops::xor_to(row, a.row(r), b.row(r)));
    }

    /// Adds row `src_row` of `src` into row `dst_row` of `self`.
    pub fn add_row_from(&mut self, dst_row: usize, src: Window<'_>, src_row: usize) {
        assert_eq!(src.ncols, self.ncols, "row_add width mismatch");
        let mask = self.last_mask();
        let s = src.row(src_row);
        let d = self.row_mut(dst_row);
        let w = d.len();
        if w == 0 {
            return;
        }
        rowops::xor_into(&mut d[..w - 1], &s[..w - 1]);
        d[w - 1] ^= s[w - 1] & mask;
    }

    /// Adds row `src_row` of this window into its row `dst_row`.
    pub fn add_row(&mut self, dst_row: usize, src_row: usize) {
        if dst_row == src_row {
            let mask = self.last_mask();
            let d = self.row_mut(dst_row);
            if let Some((last, body)) = d.split_last_mut() {
                body.fill(0);
                *last &= !mask;
            }
            return;
        }
        let mask = self.last_mask();
        let src: Vec<u64> = self.row(src_row).to_vec();
        let d = self.row_mut(dst_row);
        if let Some((last, body)) = d.split_last_mut() {
            rowops::xor_into(body, &src);
            *last ^= src[src.len() - 1] & mask;
        }
    }
}

impl std::fmt::Debug for WindowMut<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "WindowMut({}x{}, word_offset={})", self.nrows, self.ncols, self.word_offset)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_window_matches_parent() {
        let a = BitMatrix::random(5, 130, 3);
        let w = a.as_window();
        for r in 0..5 {
            for c in 0..130 {
                assert_eq!(w.get_bit(r, c), a.get_bit(r, c));
            }
        }
        assert!(w.copy_out() == a);
    }

    #[test]
    fn offset_window_reads_parent_region() {
        let a = BitMatrix::random(4, 128, 9);
        let w = a.window(1, 64, 2, 64).unwrap();
        for r in 0..2 {
            for c in 0..64 {
                assert_eq!(w.get_bit(r, c), a.get_bit(r + 1, c + 64));
            }
        }
    }

    #[test]
    fn writes_alias_parent() {
        let mut a = BitMatrix::new(4, 200);
        {
            let mut w = a.window_mut(2, 128, 2, 72).unwrap();
            w.set_bit(1, 5, true);
        }
        assert!(a.get_bit(3, 133));
        a.set_bit(2, 130, true);
        assert!(a.window(2, 128, 2, 72).unwrap().get_bit(0, 2));
    }

    #[test]
    fn misaligned_and_oversized_windows_rejected() {
        let a = BitMatrix::new(4, 128);
        assert!(matches!(a.window(0, 3, 1, 1), Err(Error::Alignment { col: 3 })));
        assert!(matches!(a.window(3, 0, 2, 1), Err(Error::Dimension(_))));
        assert!(matches!(a.window(0, 64, 1, 65), Err(Error::Dimension(_))));
    }

    #[test]
    fn ragged_window_preserves_outside_bits() {
        let mut a = BitMatrix::new(2, 64);
        for c in 0..64 {
            a.set_bit(0, c, true);
        }
        let src = BitMatrix::random(1, 10, 1);
        {
            let mut w = a.window_mut(0, 0, 1, 10).unwrap();
            w.clear();
            w.add_assign(src.as_window());
        }
        for c in 10..64 {
            assert!(a.get_bit(0, c));
        }
        for c in 0..10 {
            assert_eq!(a.get_bit(0, c), src.get_bit(0, c));
        }
    }

    #[test]
    fn copy_out_is_independent_and_clean() {
        let a = BitMatrix::random(5, 200, 4);
        let w = a.window(1, 64, 3, 65).unwrap();
        let mut c = w.copy_out();
        assert_eq!(c.width(), 2);
        assert_eq!(c.row(0)[1] & !last_word_mask(65), 0);
        c.set_bit(0, 0, !c.get_bit(0, 0));
        assert_ne!(c.get_bit(0, 0), a.get_bit(1, 64));
    }

    #[test]
    fn quadrants_are_disjoint() {
        let mut a = BitMatrix::new(4, 128);
        {
            let [mut nw, mut ne, mut sw, mut se] = a.as_window_mut().quadrants(2, 64);
            nw.set_bit(0, 0, true);
            ne.set_bit(0, 0, true);
            sw.set_bit(1, 63, true);
            se.set_bit(1, 63, true);
            ne.add_assign(nw.rb());
        }
        assert!(a.get_bit(0, 0));
        assert!(!a.get_bit(0, 64));
        assert!(a.get_bit(3, 63));
        assert!(a.get_bit(3, 127));
    }
}
