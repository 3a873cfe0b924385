//! Method of the Four Russians multiplication (M4RM).
//!
//! A is cut into vertical stripes of `k` columns and B into the matching
//! horizontal stripes of `k` rows. For each stripe, all `2^k` combinations of
//! the `k` rows of B are tabulated, and each row of A then adds the single
//! table row its `k` stripe bits select into the same row of C.
//!
//! Three loop orders are provided:
//!
//! - [`mul_m4rm`]: one table per stripe, all rows of A per table.
//! - [`mul_m4rm_blocked`]: rows of A and C are processed in blocks of `b_s`,
//!   and tables are rebuilt per block so that a block of C stays in cache
//!   while every stripe is applied to it.
//! - [`mul_m4rm_multitable`]: blocked, and `t` consecutive stripes are
//!   tabulated together so each row of C is touched once per `t * k` columns
//!   of A, with a fused addition of `t` table rows.
//!
//! When `k` does not divide the inner dimension the last stripe is narrower,
//! and when `t * k` does not divide it the last group uses fewer tables.
//!
//! Building the `2^k`-entry table with a Gray code costs `2^k - 1` row
//! additions. Tabulating each combination separately would cost more; a
//! commonly quoted estimate is `(k/2 - 1) 2^k - 1` additions, which is not
//! relied on anywhere here.

use crate::error::{Error, Result};
use crate::graycode::{fill_table, CombinationTable, MAX_K};
use crate::matrix::BitMatrix;
use crate::rowops::{self, read_bits_raw};
use crate::stats;
use crate::window::{Window, WindowMut};

pub const MAX_TABLES: usize = 8;

/// Default number of simultaneous tables.
pub const DEFAULT_TABLES: usize = 8;

/// Stripe width, table count and row-block height for one M4RM run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StripeSpec {
    pub k: usize,
    pub t: usize,
    pub b_s: usize,
}

impl StripeSpec {
    pub fn new(k: usize, t: usize, b_s: usize) -> Result<Self> {
        let spec = StripeSpec { k, t, b_s };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_K).contains(&self.k) {
            return Err(Error::param(format!("k = {} outside 1..={MAX_K}", self.k)));
        }
        if !(1..=MAX_TABLES).contains(&self.t) {
            return Err(Error::param(format!("t = {} outside 1..={MAX_TABLES}", self.t)));
        }
        if self.b_s == 0 {
            return Err(Error::param("block size b_s must be at least 1"));
        }
        Ok(())
    }
}

fn check_dims(a: &BitMatrix, b: &BitMatrix) -> Result<()> {
    if a.ncols() != b.nrows() {
        return Err(Error::dim(format!(
            "inner dimensions differ: {}x{} times {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(())
}

/// `A * B`, one table per stripe of `k` columns.
pub fn mul_m4rm(a: &BitMatrix, b: &BitMatrix, k: usize) -> Result<BitMatrix> {
    check_dims(a, b)?;
    StripeSpec::new(k, 1, 1)?;
    let mut c = BitMatrix::new(a.nrows(), b.ncols());
    addmul_m4rm(&mut c.as_window_mut(), a.as_window(), b.as_window(), k);
    Ok(c)
}

/// `A * B` with the row loop blocked into chunks of `b_s` rows.
pub fn mul_m4rm_blocked(a: &BitMatrix, b: &BitMatrix, k: usize, b_s: usize) -> Result<BitMatrix> {
    mul_m4rm_multitable(a, b, k, 1, b_s)
}

/// `A * B` with `t` tables per stripe group and row blocks of `b_s`.
pub fn mul_m4rm_multitable(a: &BitMatrix, b: &BitMatrix, k: usize, t: usize, b_s: usize) -> Result<BitMatrix> {
    check_dims(a, b)?;
    let spec = StripeSpec::new(k, t, b_s)?;
    let mut c = BitMatrix::new(a.nrows(), b.ncols());
    addmul_m4rm_multitable(&mut c.as_window_mut(), a.as_window(), b.as_window(), spec);
    Ok(c)
}

fn assert_shapes(c: &WindowMut<'_>, a: Window<'_>, b: Window<'_>) {
    assert_eq!(a.ncols(), b.nrows(), "inner dimension mismatch");
    assert!(c.nrows() == a.nrows() && c.ncols() == b.ncols(), "target dimension mismatch");
}

/// `C += A * B`, one table per stripe, every row of A per table.
pub fn addmul_m4rm(c: &mut WindowMut<'_>, a: Window<'_>, b: Window<'_>, k: usize) {
    assert_shapes(c, a, b);
    assert!((1..=MAX_K).contains(&k), "k = {k} outside 1..={MAX_K}");
    let (m, l, n) = (a.nrows(), a.ncols(), b.ncols());
    if m == 0 || l == 0 || n == 0 {
        return;
    }
    let mut table = CombinationTable::new(k.min(l), n);
    let mut writes = 0u64;
    let mut groups = 0u64;
    let mut sc = 0;
    while sc < l {
        let kk = k.min(l - sc);
        fill_table(b, sc, kk, &mut table);
        for j in 0..m {
            let x = read_bits_raw(a.row(j), sc, kk) as usize;
            rowops::xor_into(c.row_mut(j), table.row(x));
            writes += 1;
        }
        groups += 1;
        sc += kk;
    }
    stats::with(|s| {
        s.stripe_groups += groups;
        s.c_row_writes += writes;
        s.expected_c_row_writes += groups * m as u64;
    });
}

/// `C += A * B` with `spec.t` tables per group and row blocks of `spec.b_s`.
/// With `t = 1` this is the blocked variant; with `t = 1` and `b_s >= m` it
/// visits rows in the same order as [`addmul_m4rm`].
pub fn addmul_m4rm_multitable(c: &mut WindowMut<'_>, a: Window<'_>, b: Window<'_>, spec: StripeSpec) {
    assert_shapes(c, a, b);
    spec.validate().expect("invalid stripe spec");
    let (m, l, n) = (a.nrows(), a.ncols(), b.ncols());
    if m == 0 || l == 0 || n == 0 {
        return;
    }
    let k = spec.k.min(l);
    let t = spec.t.min(l.div_ceil(k));
    let mut tables: Vec<CombinationTable> = (0..t).map(|_| CombinationTable::new(k, n)).collect();
    let mut starts = [0usize; MAX_TABLES];
    let mut widths = [0usize; MAX_TABLES];
    let mut writes = 0u64;
    let mut groups = 0u64;
    let mut expected = 0u64;

    for block_start in (0..m).step_by(spec.b_s) {
        let block_end = m.min(block_start + spec.b_s);
        let mut sc = 0;
        while sc < l {
            let mut nt = 0;
            while nt < t && sc < l {
                let kk = k.min(l - sc);
                fill_table(b, sc, kk, &mut tables[nt]);
                starts[nt] = sc;
                widths[nt] = kk;
                nt += 1;
                sc += kk;
            }
            for j in block_start..block_end {
                let arow = a.row(j);
                let mut idx = [0usize; MAX_TABLES];
                for i in 0..nt {
                    idx[i] = read_bits_raw(arow, starts[i], widths[i]) as usize;
                }
                let srcs: [&[u64]; MAX_TABLES] =
                    std::array::from_fn(|i| if i < nt { tables[i].row(idx[i]) } else { &[][..] });
                rowops::xor_rows(c.row_mut(j), &srcs[..nt]);
                writes += 1;
            }
            groups += 1;
            expected += (block_end - block_start) as u64;
        }
    }
    stats::with(|s| {
        s.stripe_groups += groups;
        s.c_row_writes += writes;
        s.expected_c_row_writes += expected;
    });
}
