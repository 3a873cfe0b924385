//! Word-level row kernels.
//!
//! Row addition is XOR over 64-bit words. By default the loops are written so
//! that the compiler vectorizes them into whatever wide registers the target
//! offers. [`set_force_scalar`] switches every kernel to a loop that is kept
//! at one 64-bit word per step, for comparing wide and plain row additions.

use std::sync::atomic::{compiler_fence, AtomicBool, Ordering};

static FORCE_SCALAR: AtomicBool = AtomicBool::new(false);

/// Forces plain 64-bit word loops in all row additions (process-wide).
pub fn set_force_scalar(on: bool) {
    FORCE_SCALAR.store(on, Ordering::Relaxed);
}

pub fn force_scalar() -> bool {
    FORCE_SCALAR.load(Ordering::Relaxed)
}

/// Mask selecting the valid bits of the last word of a row with `ncols`
/// columns. Columns are stored most-significant-bit first.
#[inline]
pub fn last_word_mask(ncols: usize) -> u64 {
    match ncols % 64 {
        0 => !0,
        r => !0u64 << (64 - r),
    }
}

#[inline]
pub fn words_for(ncols: usize) -> usize {
    ncols.div_ceil(64)
}

/// `dst ^= src`, word by word.
#[inline]
pub fn xor_into(dst: &mut [u64], src: &[u64]) {
    xor_many::<1>(dst, [src]);
}

/// `dst ^= srcs[0] ^ srcs[1] ^ ...` in a single pass over `dst`.
#[inline]
pub fn xor_many<const N: usize>(dst: &mut [u64], srcs: [&[u64]; N]) {
    let len = dst.len();
    let srcs = srcs.map(|s| &s[..len]);
    if force_scalar() {
        for w in 0..len {
            let mut x = dst[w];
            for s in &srcs {
                x ^= s[w];
            }
            dst[w] = x;
            // Blocks the vectorizer; emits no instruction.
            compiler_fence(Ordering::SeqCst);
        }
    } else {
        for w in 0..len {
            let mut x = dst[w];
            for s in &srcs {
                x ^= s[w];
            }
            dst[w] = x;
        }
    }
}

/// Adds up to eight source rows into `dst` in one pass.
#[inline]
pub fn xor_rows(dst: &mut [u64], srcs: &[&[u64]]) {
    match *srcs {
        [] => {}
        [a] => xor_many(dst, [a]),
        [a, b] => xor_many(dst, [a, b]),
        [a, b, c] => xor_many(dst, [a, b, c]),
        [a, b, c, d] => xor_many(dst, [a, b, c, d]),
        [a, b, c, d, e] => xor_many(dst, [a, b, c, d, e]),
        [a, b, c, d, e, f] => xor_many(dst, [a, b, c, d, e, f]),
        [a, b, c, d, e, f, g] => xor_many(dst, [a, b, c, d, e, f, g]),
        [a, b, c, d, e, f, g, h] => xor_many(dst, [a, b, c, d, e, f, g, h]),
        _ => {
            for chunk in srcs.chunks(8) {
                xor_rows(dst, chunk);
            }
        }
    }
}

/// `dst = a ^ b`.
#[inline]
pub fn xor_to(dst: &mut [u64], a: &[u64], b: &[u64]) {
    let len = dst.len();
    let (a, b) = (&a[..len], &b[..len]);
    if force_scalar() {
        for w in 0..len {
            dst[w] = a[w] ^ b[w];
            compiler_fence(Ordering::SeqCst);
        }
    } else {
        for w in 0..len {
            dst[w] = a[w] ^ b[w];
        }
    }
}

/// Extracts `k ≤ 64` bits starting at column `sc`, first column in the most
/// significant position of the result. Bits at or beyond the end of `row`
/// read as zero.
#[inline]
pub fn read_bits_raw(row: &[u64], sc: usize, k: usize) -> u64 {
    debug_assert!((1..=64).contains(&k));
    let w = sc / 64;
    let off = sc % 64;
    let hi = row[w] << off;
    let bits = if off + k > 64 {
        let lo = row.get(w + 1).copied().unwrap_or(0);
        hi | (lo >> (64 - off))
    } else {
        hi
    };
    bits >> (64 - k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masks() {
        assert_eq!(last_word_mask(64), !0);
        assert_eq!(last_word_mask(1), 1 << 63);
        assert_eq!(last_word_mask(65), 1 << 63);
        assert_eq!(last_word_mask(3), 0b111 << 61);
    }

    #[test]
    fn fused_xor_matches_sequential() {
        let rows: Vec<Vec<u64>> = (0..8u64)
            .map(|i| (0..5).map(|w| (i + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ w).collect())
            .collect();
        for n in 0..=8 {
            let mut fused = vec![0xdead_beef; 5];
            let mut seq = fused.clone();
            let srcs: Vec<&[u64]> = rows[..n].iter().map(|r| r.as_slice()).collect();
            xor_rows(&mut fused, &srcs);
            for r in &rows[..n] {
                xor_into(&mut seq, r);
            }
            assert_eq!(fused, seq);
        }
    }

    #[test]
    fn read_bits_across_boundary() {
        let row = [0b11, 1 << 63];
        // columns 62, 63 set, column 64 set
        assert_eq!(read_bits_raw(&row, 62, 4), 0b1110);
        assert_eq!(read_bits_raw(&row, 0, 1), 0);
    }
}
