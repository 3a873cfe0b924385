//! Binary matrix file format.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "GF2M"
//! 4       1     version 0x01
//! 5       8     nrows, u64 little-endian
//! 13      8     ncols, u64 little-endian
//! 21      ...   nrows * ceil(ncols/64) words, u64 little-endian, rows in order
//! ```
//!
//! Words use the in-memory bit order (column `c` at bit `63 - c % 64`). Bits
//! past `ncols` in each row's last word must be zero; readers reject files
//! where they are not.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::BitMatrix;
use crate::rowops::{last_word_mask, words_for};

pub const MAGIC: &[u8; 4] = b"GF2M";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: u64 = 21;

pub fn write_matrix<W: Write>(mut w: W, m: &BitMatrix) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&[VERSION])?;
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    let mask = last_word_mask(m.ncols());
    let width = m.width();
    for r in 0..m.nrows() {
        for (i, &word) in m.row(r).iter().enumerate() {
            let word = if i + 1 == width { word & mask } else { word };
            w.write_all(&word.to_le_bytes())?;
        }
    }
    w.flush()
}

fn format_err(offset: u64, reason: impl Into<String>) -> Error {
    Error::Format { offset, reason: reason.into() }
}

/// Reads one matrix. I/O failures are reported against `origin`.
pub fn read_matrix<R: Read>(mut r: R, origin: &Path) -> Result<BitMatrix> {
    let io_err = |source| Error::Io { path: origin.to_path_buf(), source };
    let mut header = [0u8; HEADER_LEN as usize];
    let mut got = 0;
    while got < header.len() {
        match r.read(&mut header[got..]).map_err(io_err)? {
            0 => return Err(format_err(got as u64, "truncated header")),
            n => got += n,
        }
    }
    if &header[0..4] != MAGIC {
        return Err(format_err(0, "bad magic, expected \"GF2M\""));
    }
    if header[4] != VERSION {
        return Err(format_err(4, format!("unsupported version {}", header[4])));
    }
    let nrows = u64::from_le_bytes(header[5..13].try_into().unwrap());
    let ncols = u64::from_le_bytes(header[13..21].try_into().unwrap());
    let nrows = usize::try_from(nrows).map_err(|_| format_err(5, "row count too large"))?;
    let ncols = usize::try_from(ncols).map_err(|_| format_err(13, "column count too large"))?;
    let width = words_for(ncols);
    if nrows.checked_mul(width).and_then(|w| w.checked_mul(8)).is_none() {
        return Err(format_err(5, "matrix size overflows"));
    }

    let mut m = BitMatrix::new(nrows, ncols);
    let mask = last_word_mask(ncols);
    let mut buf = vec![0u8; width * 8];
    let mut offset = HEADER_LEN;
    for row in 0..nrows {
        if let Err(e) = r.read_exact(&mut buf) {
            return Err(if e.kind() == std::io::ErrorKind::UnexpectedEof {
                format_err(offset, format!("truncated data in row {row}"))
            } else {
                io_err(e)
            });
        }
        let dst = m.row_mut(row);
        for (i, chunk) in buf.chunks_exact(8).enumerate() {
            dst[i] = u64::from_le_bytes(chunk.try_into().unwrap());
        }
        if width > 0 && dst[width - 1] & !mask != 0 {
            return Err(format_err(
                offset + (width as u64 - 1) * 8,
                format!("nonzero bits past column {ncols} in row {row}"),
            ));
        }
        offset += width as u64 * 8;
    }
    let mut extra = [0u8; 1];
    match r.read(&mut extra) {
        Ok(0) => Ok(m),
        Ok(_) => Err(format_err(offset, "trailing bytes after matrix data")),
        Err(e) => Err(io_err(e)),
    }
}

pub fn save(path: &Path, m: &BitMatrix) -> Result<()> {
    let io_err = |source| Error::Io { path: path.to_path_buf(), source };
    let f = File::create(path).map_err(io_err)?;
    write_matrix(BufWriter::new(f), m).map_err(io_err)
}

pub fn load(path: &Path) -> Result<BitMatrix> {
    let f = File::open(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    read_matrix(BufReader::new(f), path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn encode(m: &BitMatrix) -> Vec<u8> {
        let mut v = Vec::new();
        write_matrix(&mut v, m).unwrap();
        v
    }

    fn decode(bytes: &[u8]) -> Result<BitMatrix> {
        read_matrix(bytes, Path::new("<mem>"))
    }

    #[test]
    fn header_layout() {
        let mut m = BitMatrix::new(2, 65);
        m.set_bit(0, 0, true);
        m.set_bit(1, 64, true);
        let b = encode(&m);
        assert_eq!(&b[0..5], b"GF2M\x01");
        assert_eq!(&b[5..13], &2u64.to_le_bytes());
        assert_eq!(&b[13..21], &65u64.to_le_bytes());
        assert_eq!(b.len(), 21 + 2 * 2 * 8);
        assert_eq!(&b[21..29], &(1u64 << 63).to_le_bytes());
        assert_eq!(&b[45..53], &(1u64 << 63).to_le_bytes());
        assert_eq!(decode(&b).unwrap(), m);
    }

    #[test]
    fn rejects_malformed() {
        let m = BitMatrix::random(3, 10, 1);
        let good = encode(&m);

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(decode(&bad), Err(Error::Format { offset: 0, .. })));

        let mut bad = good.clone();
        bad[4] = 2;
        assert!(matches!(decode(&bad), Err(Error::Format { offset: 4, .. })));

        // dirty trailing bit in row 1 (least significant byte of the word)
        let mut bad = good.clone();
        bad[21 + 8] |= 1;
        assert!(matches!(decode(&bad), Err(Error::Format { offset: 29, .. })));

        assert!(matches!(decode(&good[..30]), Err(Error::Format { offset: 29, .. })));
        assert!(matches!(decode(&good[..10]), Err(Error::Format { .. })));

        let mut long = good.clone();
        long.push(0);
        assert!(matches!(decode(&long), Err(Error::Format { .. })));
    }

    #[test]
    fn empty_matrices() {
        for (r, c) in [(0, 0), (0, 100), (5, 0)] {
            let m = BitMatrix::new(r, c);
            assert_eq!(decode(&encode(&m)).unwrap(), m);
        }
    }
}
