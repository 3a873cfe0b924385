//! Strassen-Winograd multiplication over matrix windows.
//!
//! Operands are first peeled to the largest leading submatrices whose
//! dimensions are multiples of `64 * 2^d`, where `d` is the number of
//! recursion levels the cutoff allows. That part is multiplied recursively
//! with seven half-size products per level; below the cutoff the product is
//! handed to M4RM (or to the cubic kernel when B has fewer than 64 columns).
//! The peeled rows and columns are then resolved without recursion.
//!
//! Each level uses exactly two scratch buffers beyond the output. Over GF(2)
//! subtraction is addition, so every step below is an XOR.

use crate::cubic::addmul_cubic;
use crate::error::{Error, Result};
use crate::m4rm::{addmul_m4rm_multitable, StripeSpec, MAX_TABLES};
use crate::matrix::BitMatrix;
use crate::stats;
use crate::tuning::{self, choose_k};
use crate::window::{Window, WindowMut};

/// Tuning parameters for the full multiplication stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MulParams {
    /// Dimension at or below which recursion stops.
    pub cutoff: usize,
    /// Row block height inside M4RM.
    pub b_s: usize,
    /// Table width; 0 picks it per product with [`choose_k`].
    pub k: usize,
    /// Number of simultaneous tables.
    pub t: usize,
    pub l1_bytes: usize,
    pub l2_bytes: usize,
}

impl Default for MulParams {
    fn default() -> Self {
        tuning::default_params(tuning::DEFAULT_L1_BYTES, tuning::DEFAULT_L2_BYTES).expect("default cache sizes are valid")
    }
}

impl MulParams {
    /// Default parameters with a different cutoff (and `b_s = cutoff / 2`).
    pub fn with_cutoff(cutoff: usize) -> Self {
        let d = MulParams::default();
        MulParams { cutoff, b_s: (cutoff / 2).max(1), k: 0, ..d }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cutoff < 64 {
            return Err(Error::param(format!("cutoff {} below 64", self.cutoff)));
        }
        if self.b_s == 0 || self.b_s > self.cutoff {
            return Err(Error::param(format!("b_s {} outside 1..={}", self.b_s, self.cutoff)));
        }
        if !(1..=MAX_TABLES).contains(&self.t) {
            return Err(Error::param(format!("t = {} outside 1..={MAX_TABLES}", self.t)));
        }
        if self.k > 16 {
            return Err(Error::param(format!("k = {} outside 0..=16", self.k)));
        }
        Ok(())
    }

    /// Stripe parameters for a product whose B has `ncols` columns.
    pub fn stripe_spec(&self, ncols: usize) -> StripeSpec {
        let k = if self.k == 0 { choose_k(self.b_s, self.l1_bytes, self.t, ncols) } else { self.k };
        StripeSpec { k, t: self.t, b_s: self.b_s }
    }
}

/// Peeled dimensions and the recursion depth they support. A depth of zero
/// means no recursion is possible and all dimensions are reported as zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeelSplit {
    pub m: usize,
    pub l: usize,
    pub n: usize,
    pub depth: usize,
}

impl PeelSplit {
    pub fn is_fallback(&self) -> bool {
        self.depth == 0
    }
}

/// Largest conforming dimensions `<= (m, l, n)`.
///
/// The depth `d` is the largest value for which the smallest dimension,
/// rounded down to a multiple of `64 * 2^d`, still halves `d` times to at
/// least `cutoff`. Every dimension is then rounded down to a multiple of
/// `64 * 2^d`, so all quadrants at every level are whole words wide.
pub fn peel_split(m: usize, l: usize, n: usize, cutoff: usize) -> PeelSplit {
    let cutoff = cutoff.max(1);
    let smallest = m.min(l).min(n);
    let mut depth = 0;
    loop {
        let d = depth + 1;
        let unit = 64usize << d;
        if (smallest / unit * unit) >> d >= cutoff {
            depth = d;
        } else {
            break;
        }
    }
    if depth == 0 {
        return PeelSplit { m: 0, l: 0, n: 0, depth: 0 };
    }
    let unit = 64usize << depth;
    PeelSplit { m: m / unit * unit, l: l / unit * unit, n: n / unit * unit, depth }
}

/// Two scratch buffers per recursion level, allocated once up front.
pub struct Scratch {
    levels: Vec<(BitMatrix, BitMatrix)>,
}

impl Scratch {
    /// Scratch for `depth` levels of recursion on an `m x l` by `l x n` product.
    pub fn new(m: usize, l: usize, n: usize, depth: usize) -> Self {
        let mut levels = Vec::with_capacity(depth);
        let (mut m, mut l, mut n) = (m, l, n);
        for level in 0..depth {
            let (m2, l2, n2) = (m / 2, l / 2, n / 2);
            // X holds m/2 x l/2 operand sums and later the m/2 x n/2 product A_NW * B_NW.
            let x = BitMatrix::new(m2, l2.max(n2));
            let y = BitMatrix::new(l2, n2);
            stats::with(|s| stats::level(s, level).temp_allocs += 2);
            levels.push((x, y));
            (m, l, n) = (m2, l2, n2);
        }
        Scratch { levels }
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
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

/// `A * B` through the full dispatch: cubic for fewer than 64 columns in B,
/// M4RM at or below the cutoff, otherwise peeled Strassen-Winograd.
pub fn mul_strassen(a: &BitMatrix, b: &BitMatrix, params: &MulParams) -> Result<BitMatrix> {
    check_dims(a, b)?;
    params.validate()?;
    let (m, l, n) = (a.nrows(), a.ncols(), b.ncols());
    let mut c = BitMatrix::new(m, n);
    if m == 0 || l == 0 || n == 0 {
        return Ok(c);
    }
    if n < 64 {
        addmul_cubic(&mut c.as_window_mut(), a.as_window(), b.as_window());
        return Ok(c);
    }
    if m.min(l).min(n) <= params.cutoff {
        base_addmul(c.as_window_mut(), a.as_window(), b.as_window(), params);
        return Ok(c);
    }
    let split = peel_split(m, l, n, params.cutoff);
    if split.is_fallback() {
        base_addmul(c.as_window_mut(), a.as_window(), b.as_window(), params);
        return Ok(c);
    }
    let mut scratch = Scratch::new(split.m, split.l, split.n, split.depth);
    schedule_winograd(
        c.as_window_mut().into_sub(0, 0, split.m, split.n),
        a.as_window().sub(0, 0, split.m, split.l),
        b.as_window().sub(0, 0, split.l, split.n),
        &mut scratch,
        params,
    );
    fixup(c.as_window_mut(), a.as_window(), b.as_window(), (split.m, split.l, split.n), params);
    Ok(c)
}

/// Overwrites `c` with `a * b` by Strassen-Winograd recursion to the depth
/// `scratch` was built for.
///
/// # Panics
/// Panics if the dimensions are not multiples of `64 * 2^depth`.
pub fn schedule_winograd(c: WindowMut<'_>, a: Window<'_>, b: Window<'_>, scratch: &mut Scratch, params: &MulParams) {
    let unit = 64usize << scratch.depth();
    assert!(
        a.nrows().is_multiple_of(unit) && a.ncols().is_multiple_of(unit) && b.ncols().is_multiple_of(unit),
        "dimensions {}x{}x{} not multiples of {unit}",
        a.nrows(),
        a.ncols(),
        b.ncols()
    );
    assert_eq!(a.ncols(), b.nrows(), "inner dimension mismatch");
    assert!(c.nrows() == a.nrows() && c.ncols() == b.ncols(), "target dimension mismatch");
    winograd(c, a, b, &mut scratch.levels, 0, params);
}

fn winograd(
    mut c: WindowMut<'_>,
    a: Window<'_>,
    b: Window<'_>,
    scratch: &mut [(BitMatrix, BitMatrix)],
    level: usize,
    params: &MulParams,
) {
    let Some(((xbuf, ybuf), deeper)) = scratch.split_first_mut() else {
        base_mul_into(c.rb_mut(), a, b, params);
        return;
    };
    stats::with(|s| {
        if s.in_fixup {
            s.strassen_entries_in_fixup += 1;
        }
        stats::level(s, level).calls += 1;
    });

    let (m2, l2, n2) = (a.nrows() / 2, a.ncols() / 2, b.ncols() / 2);
    let a_nw = a.sub(0, 0, m2, l2);
    let a_ne = a.sub(0, l2, m2, l2);
    let a_sw = a.sub(m2, 0, m2, l2);
    let a_se = a.sub(m2, l2, m2, l2);
    let b_nw = b.sub(0, 0, l2, n2);
    let b_ne = b.sub(0, n2, l2, n2);
    let b_sw = b.sub(l2, 0, l2, n2);
    let b_se = b.sub(l2, n2, l2, n2);
    let [mut c_nw, mut c_ne, mut c_sw, mut c_se] = c.quadrants(m2, n2);

    let mut products = 0u64;
    let mut additions = 0u64;
    let mut mul = |dst: WindowMut<'_>, x: Window<'_>, y: Window<'_>, deeper: &mut [(BitMatrix, BitMatrix)]| {
        products += 1;
        winograd(dst, x, y, deeper, level + 1, params);
    };

    {
        let mut x = xbuf.as_window_mut().into_sub(0, 0, m2, l2);
        let mut y = ybuf.as_window_mut();

        x.set_sum(a_nw, a_sw); // S2 = A_NW - A_SW
        y.set_sum(b_se, b_ne); // T2 = B_SE - B_NE
        mul(c_sw.rb_mut(), x.rb(), y.rb(), deeper); // P6 = S2 T2

        x.set_sum(a_sw, a_se); // S0 = A_SW + A_SE
        y.set_sum(b_ne, b_nw); // T0 = B_NE - B_NW
        mul(c_se.rb_mut(), x.rb(), y.rb(), deeper); // P4 = S0 T0

        x.add_assign(a_nw); // S1 = S0 - A_NW
        y.add_assign(b_se); // T1 = B_SE - T0
        mul(c_ne.rb_mut(), x.rb(), y.rb(), deeper); // P5 = S1 T1

        x.add_assign(a_ne); // S3 = A_NE - S1
        mul(c_nw.rb_mut(), x.rb(), b_se, deeper); // P2 = S3 B_SE
        additions += 7;
    }

    let mut p0 = xbuf.as_window_mut().into_sub(0, 0, m2, n2);
    mul(p0.rb_mut(), a_nw, b_nw, deeper); // P0 = A_NW B_NW

    c_ne.add_assign(p0.rb()); // U1 = P0 + P5
    c_sw.add_assign(c_ne.rb()); // U2 = U1 + P6
    c_ne.add_assign(c_se.rb()); // U3 = U1 + P4
    c_se.add_assign(c_sw.rb()); // U6 = U2 + P4  -> C_SE
    c_ne.add_assign(c_nw.rb()); // U4 = U3 + P2  -> C_NE
    additions += 5;

    let mut y = ybuf.as_window_mut();
    y.add_assign(b_sw); // T3 = T1 - B_SW
    mul(c_nw.rb_mut(), a_se, y.rb(), deeper); // P3 = A_SE T3
    c_sw.add_assign(c_nw.rb()); // U5 = U2 - P3  -> C_SW

    mul(c_nw.rb_mut(), a_ne, b_sw, deeper); // P1 = A_NE B_SW
    c_nw.add_assign(p0.rb()); // U0 = P0 + P1  -> C_NW
    additions += 3;

    stats::with(|s| {
        let lv = stats::level(s, level);
        lv.products += products;
        lv.additions += additions;
    });
}

/// Overwrites `c` with `a * b` using M4RM, or the cubic kernel when B has
/// fewer than 64 columns. A non-contiguous target is copied out first.
fn base_mul_into(mut c: WindowMut<'_>, a: Window<'_>, b: Window<'_>, params: &MulParams) {
    if c.is_contiguous() {
        c.clear();
        base_addmul(c, a, b, params);
    } else {
        let mut tmp = BitMatrix::new(c.nrows(), c.ncols());
        base_addmul(tmp.as_window_mut(), a, b, params);
        c.copy_from(tmp.as_window());
    }
}

/// `c += a * b` without recursion.
fn base_addmul(mut c: WindowMut<'_>, a: Window<'_>, b: Window<'_>, params: &MulParams) {
    if b.ncols() < 64 {
        addmul_cubic(&mut c, a, b);
        return;
    }
    if !c.is_contiguous() {
        let mut tmp = BitMatrix::new(c.nrows(), c.ncols());
        base_addmul(tmp.as_window_mut(), a, b, params);
        c.add_assign(tmp.as_window());
        return;
    }
    stats::with(|s| {
        s.base_cases += 1;
        s.base_cases_contiguous += 1;
    });
    addmul_m4rm_multitable(&mut c, a, b, params.stripe_spec(b.ncols()));
}

struct FixupGuard(bool);

impl FixupGuard {
    fn enter() -> Self {
        FixupGuard(stats::with(|s| std::mem::replace(&mut s.in_fixup, true)))
    }
}

impl Drop for FixupGuard {
    fn drop(&mut self) {
        let prev = self.0;
        stats::with(|s| s.in_fixup = prev);
    }
}

fn fixup(mut c: WindowMut<'_>, a: Window<'_>, b: Window<'_>, peeled: (usize, usize, usize), params: &MulParams) {
    let _guard = FixupGuard::enter();
    let (m, l, n) = (a.nrows(), a.ncols(), b.ncols());
    let (mp, lp, np) = peeled;
    let mut count = 0;
    if lp < l && mp > 0 && np > 0 {
        base_addmul(
            c.rb_mut().into_sub(0, 0, mp, np),
            a.sub(0, lp, mp, l - lp),
            b.sub(lp, 0, l - lp, np),
            params,
        );
        count += 1;
    }
    if mp < m {
        base_mul_into(c.rb_mut().into_sub(mp, 0, m - mp, n), a.sub(mp, 0, m - mp, l), b, params);
        count += 1;
    }
    if np < n && mp > 0 {
        base_mul_into(c.rb_mut().into_sub(0, np, mp, n - np), a.sub(0, 0, mp, l), b.sub(0, np, l, n - np), params);
        count += 1;
    }
    stats::with(|s| s.fixup_products += count);
}

/// Completes `c = a * b` given that `c[0..m', 0..n']` already holds
/// `a[0..m', 0..l'] * b[0..l', 0..n']` and the rest of `c` is arbitrary.
/// `l'` and `n'` must be multiples of 64.
pub fn peel_fixup(
    c: &mut BitMatrix,
    a: &BitMatrix,
    b: &BitMatrix,
    peeled: (usize, usize, usize),
    params: &MulParams,
) -> Result<()> {
    check_dims(a, b)?;
    let (m, l, n) = (a.nrows(), a.ncols(), b.ncols());
    if c.dims() != (m, n) {
        return Err(Error::dim(format!("target is {}x{}, product is {m}x{n}", c.nrows(), c.ncols())));
    }
    let (mp, lp, np) = peeled;
    if mp > m || lp > l || np > n {
        return Err(Error::dim(format!("peeled {mp}x{lp}x{np} exceeds {m}x{l}x{n}")));
    }
    if lp % 64 != 0 || np % 64 != 0 {
        return Err(Error::Alignment { col: if lp % 64 != 0 { lp } else { np } });
    }
    fixup(c.as_window_mut(), a.as_window(), b.as_window(), peeled, params);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubic::mul_cubic;

    #[test]
    fn peel_split_examples() {
        assert_eq!(peel_split(16384, 16384, 16384, 4096), PeelSplit { m: 16384, l: 16384, n: 16384, depth: 2 });
        assert_eq!(peel_split(16385, 16385, 16385, 4096), PeelSplit { m: 16384, l: 16384, n: 16384, depth: 2 });
        assert!(peel_split(100, 100, 100, 4096).is_fallback());
        assert_eq!(peel_split(100, 100, 100, 4096).m, 0);
        assert_eq!(peel_split(1023, 1023, 1023, 256), PeelSplit { m: 896, l: 896, n: 896, depth: 1 });
        assert_eq!(peel_split(1025, 2000, 1500, 128).depth, 3);
    }

    #[test]
    fn peel_split_is_conforming() {
        for &(m, l, n, c) in &[(1000, 1500, 700, 128), (4097, 4097, 4097, 1024), (300, 257, 900, 64)] {
            let s = peel_split(m, l, n, c);
            let unit = 64 << s.depth;
            assert!(s.m <= m && s.l <= l && s.n <= n);
            assert_eq!((s.m % unit, s.l % unit, s.n % unit), (0, 0, 0));
            assert!(s.m.min(s.l).min(s.n) >> s.depth >= c);
        }
    }

    #[test]
    fn identity_squared() {
        let i = BitMatrix::identity(512);
        assert_eq!(mul_strassen(&i, &i, &MulParams::with_cutoff(128)).unwrap(), i);
    }

    #[test]
    fn one_level_of_64_quadrants() {
        let a = BitMatrix::random(128, 128, 1);
        let b = BitMatrix::random(128, 128, 2);
        let mut c = BitMatrix::random(128, 128, 3);
        let params = MulParams::with_cutoff(64);
        let mut scratch = Scratch::new(128, 128, 128, 1);
        schedule_winograd(c.as_window_mut(), a.as_window(), b.as_window(), &mut scratch, &params);
        assert_eq!(c, mul_cubic(&a, &b).unwrap());
    }

    #[test]
    fn structural_counts_per_level() {
        let a = BitMatrix::random(512, 512, 1);
        let b = BitMatrix::random(512, 512, 2);
        stats::reset();
        let c = mul_strassen(&a, &b, &MulParams::with_cutoff(128)).unwrap();
        let s = stats::snapshot();
        assert_eq!(c, mul_cubic(&a, &b).unwrap());
        assert_eq!(s.strassen_levels.len(), 2);
        for (depth, lv) in s.strassen_levels.iter().enumerate() {
            assert_eq!(lv.calls, 7u64.pow(depth as u32));
            assert_eq!(lv.products, 7 * lv.calls);
            assert_eq!(lv.additions, 15 * lv.calls);
            assert_eq!(lv.temp_allocs, 2);
        }
        assert_eq!(s.base_cases, 49);
        assert_eq!(s.base_cases_contiguous, s.base_cases);
    }

    #[test]
    fn fixup_cases() {
        let params = MulParams::with_cutoff(64);
        let a = BitMatrix::random(65, 64, 1);
        let b = BitMatrix::random(64, 64, 2);
        let want = mul_cubic(&a, &b).unwrap();
        let mut c = BitMatrix::new(65, 64);
        {
            let top = mul_cubic(&a.window(0, 0, 64, 64).unwrap().copy_out(), &b).unwrap();
            c.window_mut(0, 0, 64, 64).unwrap().copy_from(top.as_window());
        }
        peel_fixup(&mut c, &a, &b, (64, 64, 64), &params).unwrap();
        assert_eq!(c, want);

        let a = BitMatrix::random(100, 70, 3);
        let b = BitMatrix::random(70, 130, 4);
        let mut c = BitMatrix::random(100, 130, 5);
        let core = mul_cubic(&a.window(0, 0, 64, 64).unwrap().copy_out(), &b.window(0, 0, 64, 64).unwrap().copy_out()).unwrap();
        c.window_mut(0, 0, 64, 64).unwrap().copy_from(core.as_window());
        stats::reset();
        peel_fixup(&mut c, &a, &b, (64, 64, 64), &params).unwrap();
        assert_eq!(c, mul_cubic(&a, &b).unwrap());
        let s = stats::snapshot();
        assert_eq!(s.fixup_products, 3);
        assert_eq!(s.strassen_entries_in_fixup, 0);
    }

    #[test]
    fn fixup_noop_when_conforming() {
        let a = BitMatrix::random(64, 64, 1);
        let b = BitMatrix::random(64, 64, 2);
        let mut c = mul_cubic(&a, &b).unwrap();
        stats::reset();
        peel_fixup(&mut c, &a, &b, (64, 64, 64), &MulParams::with_cutoff(64)).unwrap();
        assert_eq!(stats::snapshot().fixup_products, 0);
        assert_eq!(c, mul_cubic(&a, &b).unwrap());
    }

    #[test]
    fn fixup_rejects_inconsistent_split() {
        let a = BitMatrix::random(10, 70, 1);
        let b = BitMatrix::random(70, 80, 2);
        let mut c = BitMatrix::new(10, 80);
        let p = MulParams::default();
        assert!(peel_fixup(&mut c, &a, &b, (11, 64, 64), &p).is_err());
        assert!(peel_fixup(&mut c, &a, &b, (10, 65, 64), &p).is_err());
        assert!(peel_fixup(&mut BitMatrix::new(9, 80), &a, &b, (0, 0, 0), &p).is_err());
    }

    #[test]
    fn odd_shapes_match_cubic() {
        let params = MulParams::with_cutoff(64);
        for &(m, l, n) in &[(300, 257, 200), (129, 400, 65), (1, 300, 300), (300, 300, 1), (200, 1, 200)] {
            let a = BitMatrix::random(m, l, m as u64);
            let b = BitMatrix::random(l, n, n as u64);
            assert_eq!(mul_strassen(&a, &b, &params).unwrap(), mul_cubic(&a, &b).unwrap(), "{m}x{l}x{n}");
        }
    }

    #[test]
    fn params_validation() {
        let p = MulParams { cutoff: 32, ..MulParams::default() };
        assert!(p.validate().is_err());
        let p = MulParams { b_s: 5000, ..MulParams::default() };
        assert!(p.validate().is_err());
        let p = MulParams { t: 0, ..MulParams::default() };
        assert!(p.validate().is_err());
        let a = BitMatrix::new(3, 4);
        assert!(matches!(mul_strassen(&a, &a, &MulParams::default()), Err(Error::Dimension(_))));
    }
}
