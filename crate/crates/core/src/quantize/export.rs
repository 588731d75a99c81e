//! Binary and text dumps of operator matrices.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! magic      8 bytes  "PSDOMAT1"
//! version    u32      1
//! row grid   u32 d, u64 n_per_axis, f64 half_width
//! col grid   u32 d, u64 n_per_axis, f64 half_width
//! rows, cols u64, u64
//! entries    rows * cols pairs (f64 re, f64 im), row-major
//! ```

use std::io::{Read, Write};

use faer::Mat;

use super::{Grid, OperatorMatrix, Provenance};
use crate::error::{Error, Result};
use crate::C64;

pub const MAGIC: &[u8; 8] = b"PSDOMAT1";
pub const VERSION: u32 = 1;
/// Text export refuses matrices with more entries than this.
pub const TEXT_LIMIT: usize = 1 << 16;

fn write_grid<W: Write>(w: &mut W, g: &Grid) -> std::io::Result<()> {
    w.write_all(&(g.d as u32).to_le_bytes())?;
    w.write_all(&(g.n_per_axis as u64).to_le_bytes())?;
    w.write_all(&g.half_width.to_le_bytes())
}

pub fn write_binary<W: Write>(m: &OperatorMatrix, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    write_grid(&mut w, &m.grid)?;
    write_grid(&mut w, &m.col_grid)?;
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * m.ncols());
    for i in 0..m.nrows() {
        buf.clear();
        for j in 0..m.ncols() {
            let v = m.mat[(i, j)];
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_grid<R: Read>(r: &mut R) -> Result<Grid> {
    let d = read_u32(r)? as usize;
    let n = read_u64(r)? as usize;
    let l = read_f64(r)?;
    Grid::new(d, l, n)
}

pub fn read_binary<R: Read>(mut r: R) -> Result<OperatorMatrix> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Config("not an operator matrix file (bad magic)".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Config(format!("unsupported matrix file version {version}")));
    }
    let grid = read_grid(&mut r)?;
    let col_grid = read_grid(&mut r)?;
    let rows = read_u64(&mut r)? as usize;
    let cols = read_u64(&mut r)? as usize;
    if rows != grid.size() || cols != col_grid.size() {
        return Err(Error::ShapeMismatch(format!("header says {rows}x{cols}, grids give {}x{}", grid.size(), col_grid.size())));
    }
    let mut data = vec![0u8; rows * cols * 16];
    r.read_exact(&mut data)?;
    let at = |k: usize| f64::from_le_bytes(data[k..k + 8].try_into().unwrap());
    let mat = Mat::from_fn(rows, cols, |i, j| {
        let k = (i * cols + j) * 16;
        C64::new(at(k), at(k + 8))
    });
    Ok(OperatorMatrix { mat, grid, col_grid, provenance: Provenance::named("read from file") })
}

/// One line per row, entries as `re im` pairs separated by tabs, after a `#` header.
pub fn write_text<W: Write>(m: &OperatorMatrix, mut w: W) -> Result<()> {
    if m.nrows() * m.ncols() > TEXT_LIMIT {
        return Err(Error::Precondition(format!(
            "{}x{} is too large for text export (limit {TEXT_LIMIT} entries)",
            m.nrows(),
            m.ncols()
        )));
    }
    writeln!(w, "# {} rows={} cols={} L={} {}", m.provenance.describe(), m.nrows(), m.ncols(), m.grid.half_width, m.col_grid.half_width)?;
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.17e} {:.17e}", m.mat[(i, j)].re, m.mat[(i, j)].im)).collect();
        writeln!(w, "{}", row.join("\t"))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let g = Grid::new(1, 1.5, 5).unwrap();
        let mat = Mat::from_fn(5, 5, |i, j| C64::new(i as f64 - 0.25 * j as f64, 1e-300 * j as f64));
        let m = OperatorMatrix::square(mat, g, Provenance::named("t"));
        let mut buf = Vec::new();
        write_binary(&m, &mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 4 + 2 * 20 + 16 + 25 * 16);
        let back = read_binary(buf.as_slice()).unwrap();
        assert_eq!(back.grid, m.grid);
        assert_eq!(back.max_abs_diff(&m), 0.0);
    }

    #[test]
    fn bad_magic_rejected() {
        assert!(read_binary(&b"NOTAMATRIXFILE.."[..]).is_err());
    }

    #[test]
    fn text_has_one_line_per_row() {
        let g = Grid::new(1, 1.0, 3).unwrap();
        let m = OperatorMatrix::identity(&g);
        let mut buf = Vec::new();
        write_text(&m, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 4);
    }
}
