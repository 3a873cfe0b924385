//! Dense matrix multiplication over GF(2).
//!
//! Matrices are bit-packed, 64 entries per word, row-major. Addition is XOR
//! and multiplication AND, so one word operation handles 64 entries. The
//! crate provides a hierarchy of multiplication algorithms:
//!
//! - [`cubic::mul_cubic`]: classical product with word-parallel parity.
//! - [`m4rm`]: the Method of the Four Russians with Gray-code tables, in
//!   plain, cache-blocked and multi-table forms.
//! - [`strassen::mul_strassen`]: Strassen-Winograd recursion on matrix
//!   windows with peeling for arbitrary dimensions, switching to M4RM below a
//!   cutoff.
//!
//! [`multiply`] runs the full stack with the given [`MulParams`].
//!
//! ```
//! use gf2mat::{multiply, BitMatrix, MulParams};
//!
//! let a = BitMatrix::random(300, 200, 1);
//! let b = BitMatrix::random(200, 100, 2);
//! let c = multiply(&a, &b, &MulParams::default()).unwrap();
//! assert_eq!(c, gf2mat::cubic::mul_cubic(&a, &b).unwrap());
//! ```

pub mod cli;
pub mod cubic;
pub mod error;
pub mod graycode;
pub mod io;
pub mod m4rm;
pub mod matrix;
pub mod oracle;
pub mod rowops;
pub mod stats;
pub mod strassen;
pub mod tuning;
pub mod window;

pub use error::{Error, Result};
pub use matrix::BitMatrix;
pub use strassen::MulParams;
pub use window::{Window, WindowMut};

/// `A * B` using Strassen-Winograd above `params.cutoff`, M4RM below it and
/// the cubic kernel when B has fewer than 64 columns.
pub fn multiply(a: &BitMatrix, b: &BitMatrix, params: &MulParams) -> Result<BitMatrix> {
    strassen::mul_strassen(a, b, params)
}
