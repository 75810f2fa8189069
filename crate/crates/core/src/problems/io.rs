//! Byte-level tensor formats.
//!
//! * DTNS: `b"DTNS"`, `u32` order, `order × u64` extents, then the `f64`
//!   entries in storage order (first index fastest); all little-endian.
//! * IDX image files: big-endian magic `0x00000803`, `u32` count, rows and
//!   columns, then `u8` pixels row-major per image. Loaded as a
//!   `rows × cols × count` tensor with pixels scaled to `[0, 1]`.
//! * CSV: one entry per line, `i,j,value` or `i,j,k,value` with 0-based
//!   indices; unlisted entries are zero.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

const DTNS_MAGIC: &[u8; 4] = b"DTNS";
const IDX_MAGIC: u32 = 0x0000_0803;

fn fmt_err(format: &'static str, offset: usize, reason: impl Into<String>) -> Error {
    Error::Format { format, offset, reason: reason.into() }
}

pub fn write_dtns(t: &DenseTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 8 * t.order() + 8 * t.len());
    out.extend_from_slice(DTNS_MAGIC);
    out.extend_from_slice(&(t.order() as u32).to_le_bytes());
    for &e in t.shape() {
        out.extend_from_slice(&(e as u64).to_le_bytes());
    }
    for v in t.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    format: &'static str,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(fmt_err(self.format, self.pos, alloc::format!("truncated while reading {what}")));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn array<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        Ok(self.take(N, what)?.try_into().expect("length checked"))
    }
}

pub fn read_dtns(bytes: &[u8]) -> Result<DenseTensor> {
    let mut r = Reader { bytes, pos: 0, format: "DTNS" };
    if r.take(4, "magic")? != DTNS_MAGIC {
        return Err(fmt_err("DTNS", 0, "bad magic"));
    }
    let order = u32::from_le_bytes(r.array("order")?) as usize;
    if order == 0 {
        return Err(fmt_err("DTNS", 4, "order must be positive"));
    }
    let mut shape = Vec::with_capacity(order);
    for _ in 0..order {
        let at = r.pos;
        let e = u64::from_le_bytes(r.array("extent")?);
        if e == 0 || e > usize::MAX as u64 {
            return Err(fmt_err("DTNS", at, alloc::format!("invalid extent {e}")));
        }
        shape.push(e as usize);
    }
    let count = shape.iter().try_fold(1usize, |a, &e| a.checked_mul(e)).ok_or_else(|| fmt_err("DTNS", 8, "size overflows"))?;
    if bytes.len() - r.pos != 8 * count {
        return Err(fmt_err("DTNS", r.pos, alloc::format!("expected {} payload bytes, found {}", 8 * count, bytes.len() - r.pos)));
    }
    let data = (0..count).map(|_| f64::from_le_bytes(r.array("entry").expect("length checked"))).collect();
    DenseTensor::new(shape, data)
}

pub fn read_idx_images(bytes: &[u8]) -> Result<DenseTensor> {
    let mut r = Reader { bytes, pos: 0, format: "IDX" };
    let magic = u32::from_be_bytes(r.array("magic")?);
    if magic != IDX_MAGIC {
        return Err(fmt_err("IDX", 0, alloc::format!("magic {magic:#010x}, expected {IDX_MAGIC:#010x}")));
    }
    let mut dims = [0usize; 3];
    for d in dims.iter_mut() {
        let at = r.pos;
        *d = u32::from_be_bytes(r.array("dimension")?) as usize;
        if *d == 0 {
            return Err(fmt_err("IDX", at, "zero dimension"));
        }
    }
    let [count, rows, cols] = dims;
    let need = count * rows * cols;
    if bytes.len() - r.pos != need {
        return Err(fmt_err("IDX", r.pos, alloc::format!("expected {need} pixel bytes, found {}", bytes.len() - r.pos)));
    }
    let pix = r.take(need, "pixels")?;
    DenseTensor::from_fn(&[rows, cols, count], |ix| pix[ix[2] * rows * cols + ix[0] * cols + ix[1]] as f64 / 255.0)
}

/// Parses CSV entries. `shape` fixes the extents; otherwise each extent is
/// one more than the largest index seen.
pub fn read_csv(text: &str, shape: Option<&[usize]>) -> Result<DenseTensor> {
    let mut entries: Vec<(Vec<usize>, f64)> = Vec::new();
    let mut order = None;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let at = offset;
        offset += line.len();
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = body.split(',').map(str::trim).collect();
        if fields.len() != 3 && fields.len() != 4 {
            return Err(fmt_err("CSV", at, "expected 2 or 3 indices and a value"));
        }
        if entries.is_empty() && fields.iter().any(|f| f.chars().any(|c| c.is_ascii_alphabetic() && c != 'e' && c != 'E')) {
            continue; // header
        }
        let n = fields.len() - 1;
        if *order.get_or_insert(n) != n {
            return Err(fmt_err("CSV", at, "inconsistent number of indices"));
        }
        let idx: Vec<usize> = fields[..n]
            .iter()
            .map(|f| f.parse::<usize>().map_err(|e| fmt_err("CSV", at, e.to_string())))
            .collect::<Result<_>>()?;
        let v: f64 = fields[n].parse().map_err(|_| fmt_err("CSV", at, alloc::format!("bad value `{}`", fields[n])))?;
        entries.push((idx, v));
    }
    let order = order.ok_or_else(|| fmt_err("CSV", 0, "no entries"))?;
    let shape: Vec<usize> = match shape {
        Some(s) if s.len() == order => s.to_vec(),
        Some(s) => return Err(fmt_err("CSV", 0, alloc::format!("shape {s:?} has the wrong order"))),
        None => (0..order).map(|k| entries.iter().map(|(ix, _)| ix[k] + 1).max().unwrap_or(1)).collect(),
    };
    let mut t = DenseTensor::zeros(&shape)?;
    let mut seen = vec![false; t.len()];
    for (ix, v) in &entries {
        if ix.iter().zip(&shape).any(|(i, e)| i >= e) {
            return Err(fmt_err("CSV", 0, alloc::format!("index {ix:?} outside shape {shape:?}")));
        }
        let li = t.linear_index(ix);
        if seen[li] {
            return Err(fmt_err("CSV", 0, alloc::format!("duplicate index {ix:?}")));
        }
        seen[li] = true;
        t.set(ix, *v);
    }
    Ok(t)
}
