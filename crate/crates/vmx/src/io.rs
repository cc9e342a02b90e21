//! Persistence: self-describing binary grid snapshots (magic, version, dims,
//! dtype, payload, CRC32) and plain CSV writing.
//!
//! Snapshots must round-trip bit-exactly; the CRC covers everything after
//! the magic.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Result, VmxError};
use crate::fields::FieldGrid;

const MAGIC: &[u8; 8] = b"VMXSNAP\x01";
const VERSION: u32 = 1;
const DTYPE_F64_LE: u32 = 1;

/// CRC-32 (IEEE 802.3, reflected) of a byte stream.
pub fn crc32(data: &[u8]) -> u32 {
    let mut crc: u32 = 0xFFFF_FFFF;
    for &byte in data {
        crc ^= byte as u32;
        for _ in 0..8 {
            let mask = (crc & 1).wrapping_neg();
            crc = (crc >> 1) ^ (0xEDB8_8320 & mask);
        }
    }
    !crc
}

fn push_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn push_f64(buf: &mut Vec<u8>, v: f64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn push_array(buf: &mut Vec<u8>, arr: &[f64]) {
    for v in arr {
        push_f64(buf, *v);
    }
}

/// Serialize a grid snapshot to bytes.
pub fn grid_to_bytes(g: &FieldGrid) -> Vec<u8> {
    let mut body = Vec::with_capacity(10 * g.rho.len() * 8 + 64);
    push_u32(&mut body, VERSION);
    push_u32(&mut body, DTYPE_F64_LE);
    push_u32(&mut body, g.n as u32);
    push_u32(&mut body, 10); // array count
    push_f64(&mut body, g.h);
    push_f64(&mut body, g.length);
    push_f64(&mut body, g.t);
    for arr in [&g.ex, &g.ey, &g.ez, &g.bx, &g.by, &g.bz, &g.rho, &g.jx, &g.jy, &g.jz] {
        push_array(&mut body, arr);
    }
    let mut out = Vec::with_capacity(body.len() + 12);
    out.extend_from_slice(MAGIC);
    push_u32(&mut out, crc32(&body));
    out.extend_from_slice(&body);
    out
}

/// Deserialize a grid snapshot, verifying magic, version and CRC.
pub fn grid_from_bytes(bytes: &[u8]) -> Result<FieldGrid> {
    if bytes.len() < 12 || &bytes[0..8] != MAGIC {
        return Err(VmxError::SnapshotFormat("bad magic".into()));
    }
    let stored_crc = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    let body = &bytes[12..];
    if crc32(body) != stored_crc {
        return Err(VmxError::SnapshotFormat("CRC mismatch".into()));
    }
    let mut cur = 0usize;
    let mut take_u32 = || -> Result<u32> {
        if cur + 4 > body.len() {
            return Err(VmxError::SnapshotFormat("truncated header".into()));
        }
        let v = u32::from_le_bytes(body[cur..cur + 4].try_into().unwrap());
        cur += 4;
        Ok(v)
    };
    let version = take_u32()?;
    if version != VERSION {
        return Err(VmxError::SnapshotFormat(format!("unsupported version {version}")));
    }
    let dtype = take_u32()?;
    if dtype != DTYPE_F64_LE {
        return Err(VmxError::SnapshotFormat(format!("unsupported dtype {dtype}")));
    }
    let n = take_u32()? as usize;
    let count = take_u32()? as usize;
    if count != 10 {
        return Err(VmxError::SnapshotFormat(format!("unexpected array count {count}")));
    }
    let take_f64 = |cur: &mut usize| -> Result<f64> {
        if *cur + 8 > body.len() {
            return Err(VmxError::SnapshotFormat("truncated payload".into()));
        }
        let v = f64::from_le_bytes(body[*cur..*cur + 8].try_into().unwrap());
        *cur += 8;
        Ok(v)
    };
    let h = take_f64(&mut cur)?;
    let length = take_f64(&mut cur)?;
    let t = take_f64(&mut cur)?;
    let size = n * n * n;
    let mut arrays: Vec<Vec<f64>> = Vec::with_capacity(10);
    for _ in 0..10 {
        let mut arr = Vec::with_capacity(size);
        for _ in 0..size {
            arr.push(take_f64(&mut cur)?);
        }
        arrays.push(arr);
    }
    if cur != body.len() {
        return Err(VmxError::SnapshotFormat("trailing bytes".into()));
    }
    let mut it = arrays.into_iter();
    Ok(FieldGrid {
        n,
        h,
        length,
        t,
        ex: it.next().unwrap(),
        ey: it.next().unwrap(),
        ez: it.next().unwrap(),
        bx: it.next().unwrap(),
        by: it.next().unwrap(),
        bz: it.next().unwrap(),
        rho: it.next().unwrap(),
        jx: it.next().unwrap(),
        jy: it.next().unwrap(),
        jz: it.next().unwrap(),
    })
}

pub fn write_grid_snapshot(path: &Path, g: &FieldGrid) -> Result<()> {
    let bytes = grid_to_bytes(g);
    let mut f = BufWriter::new(
        File::create(path).map_err(|e| VmxError::io(path.display().to_string(), e))?,
    );
    f.write_all(&bytes).map_err(|e| VmxError::io(path.display().to_string(), e))?;
    f.flush().map_err(|e| VmxError::io(path.display().to_string(), e))?;
    Ok(())
}

pub fn read_grid_snapshot(path: &Path) -> Result<FieldGrid> {
    let mut f = BufReader::new(
        File::open(path).map_err(|e| VmxError::io(path.display().to_string(), e))?,
    );
    let mut bytes = Vec::new();
    f.read_to_end(&mut bytes).map_err(|e| VmxError::io(path.display().to_string(), e))?;
    grid_from_bytes(&bytes)
}

/// Minimal CSV writer with deterministic float formatting (shortest
/// round-trip representation, so identical values give identical bytes).
pub struct CsvWriter {
    out: BufWriter<File>,
    path: String,
    columns: usize,
}

impl CsvWriter {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self> {
        let file = File::create(path).map_err(|e| VmxError::io(path.display().to_string(), e))?;
        let mut w = CsvWriter {
            out: BufWriter::new(file),
            path: path.display().to_string(),
            columns: header.len(),
        };
        w.write_raw_row(header)?;
        Ok(w)
    }

    fn write_raw_row(&mut self, cells: &[&str]) -> Result<()> {
        let line = cells.join(",");
        writeln!(self.out, "{line}").map_err(|e| VmxError::io(self.path.clone(), e))
    }

    pub fn write_row(&mut self, values: &[f64]) -> Result<()> {
        assert_eq!(values.len(), self.columns, "row width mismatch");
        let cells: Vec<String> = values.iter().map(|v| format_f64(*v)).collect();
        let refs: Vec<&str> = cells.iter().map(|s| s.as_str()).collect();
        self.write_raw_row(&refs)
    }

    pub fn write_mixed_row(&mut self, cells: &[String]) -> Result<()> {
        assert_eq!(cells.len(), self.columns, "row width mismatch");
        let refs: Vec<&str> = cells.iter().map(|s| s.as_str()).collect();
        self.write_raw_row(&refs)
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush().map_err(|e| VmxError::io(self.path.clone(), e))
    }
}

/// Shortest round-trip decimal representation of an f64.
pub fn format_f64(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v:.1}")
    } else {
        format!("{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crc_known_value() {
        // CRC32("123456789") = 0xCBF43926
        assert_eq!(crc32(b"123456789"), 0xCBF4_3926);
    }

    #[test]
    fn snapshot_roundtrip_is_bit_exact() {
        let mut g = FieldGrid::new(6, 2.0);
        g.t = 0.731;
        for (i, v) in g.ex.iter_mut().enumerate() {
            *v = (i as f64 * 0.7).sin() * 1e-3;
        }
        for (i, v) in g.rho.iter_mut().enumerate() {
            *v = (i as f64 * 0.3).cos();
        }
        let bytes = grid_to_bytes(&g);
        let back = grid_from_bytes(&bytes).unwrap();
        assert_eq!(back.n, g.n);
        assert!(back.ex.iter().zip(&g.ex).all(|(a, b)| a.to_bits() == b.to_bits()));
        assert!(back.rho.iter().zip(&g.rho).all(|(a, b)| a.to_bits() == b.to_bits()));
        assert_eq!(back.t.to_bits(), g.t.to_bits());
        // serialization is deterministic
        assert_eq!(bytes, grid_to_bytes(&back));
    }

    #[test]
    fn corruption_is_detected() {
        let g = FieldGrid::new(4, 1.0);
        let mut bytes = grid_to_bytes(&g);
        let last = bytes.len() - 1;
        bytes[last] ^= 0x40;
        assert!(matches!(grid_from_bytes(&bytes), Err(VmxError::SnapshotFormat(_))));
    }
}
