//! Reflected binary Gray codes and the combination ("greasing") tables built
//! with them.
//!
//! A [`CombinationTable`] over `k` source rows holds all `2^k` linear
//! combinations, indexed directly by the value [`Window::read_bits`] returns
//! for a `k`-column stripe of A: bit `k-1` of the index selects the first
//! source row. Construction walks the Gray code so that every entry after the
//! zero row costs exactly one row addition.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::rowops::{self, last_word_mask, words_for};
use crate::stats;
use crate::window::Window;

pub const MAX_K: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayCode {
    k: usize,
    code: Vec<u32>,
    changed_bit: Vec<u32>,
}

impl GrayCode {
    pub fn k(&self) -> usize {
        self.k
    }

    /// The `2^k` codes in Gray order, starting at zero.
    pub fn code(&self) -> &[u32] {
        &self.code
    }

    /// `changed_bit()[j]` is the bit (0 = least significant) in which
    /// `code[j]` differs from `code[j - 1]`. Entry 0 is unused and zero.
    pub fn changed_bit(&self) -> &[u32] {
        &self.changed_bit
    }
}

/// Builds the `k`-bit reflected Gray code, `1 <= k <= 16`.
///
/// Starting from the 1-bit code `[0, 1]`, each step keeps the previous list
/// (implicitly prefixed with 0) and appends it reversed with the new top bit set.
pub fn build_gray(k: usize) -> Result<GrayCode> {
    if !(1..=MAX_K).contains(&k) {
        return Err(Error::param(format!("Gray code width {k} outside 1..={MAX_K}")));
    }
    let mut code: Vec<u32> = vec![0, 1];
    for bit in 1..k {
        let top = 1u32 << bit;
        let reflected: Vec<u32> = code.iter().rev().map(|&c| c | top).collect();
        code.extend(reflected);
    }
    let mut changed_bit = vec![0u32; code.len()];
    for j in 1..code.len() {
        changed_bit[j] = (code[j] ^ code[j - 1]).trailing_zeros();
    }
    Ok(GrayCode { k, code, changed_bit })
}

/// Cached Gray code for `k` in `1..=16`, built once per process.
pub fn gray_code(k: usize) -> &'static GrayCode {
    static CACHE: OnceLock<Vec<GrayCode>> = OnceLock::new();
    assert!((1..=MAX_K).contains(&k), "Gray code width {k} outside 1..={MAX_K}");
    let all = CACHE.get_or_init(|| (1..=MAX_K).map(|k| build_gray(k).expect("k in range")).collect());
    &all[k - 1]
}

/// All `2^k` linear combinations of `k` consecutive rows of a matrix.
///
/// The buffer is sized for a maximum `k` and column count at construction and
/// reused across stripes; [`make_table`] refills it.
pub struct CombinationTable {
    k: usize,
    ncols: usize,
    width: usize,
    max_k: usize,
    rows: Vec<u64>,
}

impl CombinationTable {
    /// Table able to hold combinations of up to `max_k` rows of `ncols` columns.
    pub fn new(max_k: usize, ncols: usize) -> Self {
        assert!((1..=MAX_K).contains(&max_k), "table width {max_k} outside 1..={MAX_K}");
        let width = words_for(ncols);
        let words = (1usize << max_k) * width;
        stats::track_alloc(words * 8);
        CombinationTable { k: 0, ncols, width, max_k, rows: vec![0; words] }
    }

    /// Number of source rows currently tabulated.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn len(&self) -> usize {
        1 << self.k
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Combination selected by index `x`.
    #[inline]
    pub fn row(&self, x: usize) -> &[u64] {
        debug_assert!(x < (1 << self.k));
        &self.rows[x * self.width..(x + 1) * self.width]
    }

    /// Bytes used by `t` tables of `2^k` rows of `ncols` columns.
    pub fn footprint(t: usize, k: usize, ncols: usize) -> usize {
        t * (1usize << k) * words_for(ncols) * 8
    }
}

impl Drop for CombinationTable {
    fn drop(&mut self) {
        stats::track_free(self.rows.len() * 8);
    }
}

/// Fills `table` with every combination of rows `start_row..start_row + k` of
/// `b` and returns the number of row additions performed, which is always
/// `2^k - 1`.
pub fn make_table(b: Window<'_>, start_row: usize, k: usize, table: &mut CombinationTable) -> Result<usize> {
    if k == 0 || k > table.max_k {
        return Err(Error::param(format!("table width {k} outside 1..={}", table.max_k)));
    }
    if start_row + k > b.nrows() {
        return Err(Error::dim(format!("rows {start_row}..{} exceed {} rows", start_row + k, b.nrows())));
    }
    if b.ncols() != table.ncols {
        return Err(Error::dim(format!("table has {} columns, source has {}", table.ncols, b.ncols())));
    }
    Ok(fill_table(b, start_row, k, table))
}

pub(crate) fn fill_table(b: Window<'_>, start_row: usize, k: usize, table: &mut CombinationTable) -> usize {
    let gray = gray_code(k);
    let w = table.width;
    table.k = k;
    if w == 0 {
        return 0;
    }
    let mask = last_word_mask(table.ncols);
    table.rows[..w].fill(0);
    let mut additions = 0;
    for j in 1..gray.code.len() {
        let dst = gray.code[j] as usize;
        let prev = gray.code[j - 1] as usize;
        // Index bit i selects source row k-1-i.
        let src = b.row(start_row + k - 1 - gray.changed_bit[j] as usize);
        let (p, d) = if prev < dst {
            let (lo, hi) = table.rows.split_at_mut(dst * w);
            (&lo[prev * w..prev * w + w], &mut hi[..w])
        } else {
            let (lo, hi) = table.rows.split_at_mut(prev * w);
            (&hi[..w], &mut lo[dst * w..dst * w + w])
        };
        rowops::xor_to(d, p, src);
        d[w - 1] &= mask;
        additions += 1;
    }
    stats::with(|s| {
        s.table_builds += 1;
        s.table_row_additions += additions as u64;
    });
    additions
}
