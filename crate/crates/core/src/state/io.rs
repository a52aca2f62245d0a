//! Field container and CSV export.
//!
//! Binary layout, all little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 8     | magic `S2FIELD\x01` |
//! | 4     | `dim` (u32) |
//! | 24    | points per axis (3 x u64, unused axes = 1) |
//! | 24    | extents per axis (3 x f64, unused axes = 0) |
//! | 4     | boundary mode (u32: 0 = neumann_mirror, 1 = periodic) |
//! | 4     | component count (u32) |
//! | ...   | payload: f64, node-major, component-minor |

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::state::{make_grid, BoundaryMode, Grid, Vec3Field};

pub const MAGIC: &[u8; 8] = b"S2FIELD\x01";

fn header(grid: &Grid, components: u32) -> Vec<u8> {
    let mut out = Vec::with_capacity(68);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    for a in 0..3 {
        let n = grid.points().get(a).copied().unwrap_or(1) as u64;
        out.extend_from_slice(&n.to_le_bytes());
    }
    for a in 0..3 {
        let l = grid.extents().get(a).copied().unwrap_or(0.0);
        out.extend_from_slice(&l.to_le_bytes());
    }
    let mode: u32 = match grid.mode() {
        BoundaryMode::NeumannMirror => 0,
        BoundaryMode::Periodic => 1,
    };
    out.extend_from_slice(&mode.to_le_bytes());
    out.extend_from_slice(&components.to_le_bytes());
    out
}

pub fn write_field<W: Write>(mut w: W, f: &Vec3Field) -> Result<()> {
    w.write_all(&header(f.grid(), 3))?;
    let mut payload = Vec::with_capacity(f.len() * 24);
    for v in f.data() {
        for c in v {
            payload.extend_from_slice(&c.to_le_bytes());
        }
    }
    w.write_all(&payload)?;
    Ok(())
}

fn take<const N: usize>(buf: &[u8], pos: &mut usize) -> Result<[u8; N]> {
    let end = *pos + N;
    let slice = buf
        .get(*pos..end)
        .ok_or_else(|| Error::Format("truncated header".into()))?;
    *pos = end;
    Ok(slice.try_into().expect("length checked"))
}

/// Reads a container written by [`write_field`]. Only three-component payloads
/// are accepted.
pub fn read_field<R: Read>(mut r: R) -> Result<Vec3Field> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    let mut pos = 0;
    if &take::<8>(&buf, &mut pos)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let dim = u32::from_le_bytes(take(&buf, &mut pos)?) as usize;
    let mut points = [0usize; 3];
    for p in points.iter_mut() {
        *p = u64::from_le_bytes(take(&buf, &mut pos)?) as usize;
    }
    let mut extents = [0.0; 3];
    for e in extents.iter_mut() {
        *e = f64::from_le_bytes(take(&buf, &mut pos)?);
    }
    let mode = match u32::from_le_bytes(take(&buf, &mut pos)?) {
        0 => BoundaryMode::NeumannMirror,
        1 => BoundaryMode::Periodic,
        m => return Err(Error::Format(format!("unknown boundary mode {m}"))),
    };
    let comps = u32::from_le_bytes(take(&buf, &mut pos)?);
    if comps != 3 {
        return Err(Error::Format(format!("expected 3 components, found {comps}")));
    }
    if !(1..=3).contains(&dim) {
        return Err(Error::Format(format!("bad dimension {dim}")));
    }
    let grid = make_grid(dim, &extents[..dim], &points[..dim], mode)
        .map_err(|e| Error::Format(e.to_string()))?;
    let payload = &buf[pos..];
    if payload.len() != grid.len() * 24 {
        return Err(Error::Format(format!(
            "payload has {} bytes, expected {}",
            payload.len(),
            grid.len() * 24
        )));
    }
    let data = payload
        .chunks_exact(24)
        .map(|node| {
            let mut v = [0.0; 3];
            for (c, bytes) in node.chunks_exact(8).enumerate() {
                v[c] = f64::from_le_bytes(bytes.try_into().expect("8 bytes"));
            }
            v
        })
        .collect();
    Vec3Field::from_vec(grid, data)
}

pub fn save_field(path: impl AsRef<Path>, f: &Vec3Field) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_field(std::io::BufWriter::new(file), f)
}

pub fn load_field(path: impl AsRef<Path>) -> Result<Vec3Field> {
    let file = std::fs::File::open(path)?;
    read_field(std::io::BufReader::new(file))
}

/// One row per node: coordinates (one column per axis), then the components.
pub fn write_csv<W: Write>(mut w: W, f: &Vec3Field) -> Result<()> {
    let grid = f.grid();
    let axes = ["x", "y", "z"];
    let mut head: Vec<String> = axes[..grid.dim()].iter().map(|s| s.to_string()).collect();
    head.extend(["f1", "f2", "f3"].iter().map(|s| s.to_string()));
    writeln!(w, "{}", head.join(","))?;
    for (i, v) in f.data().iter().enumerate() {
        let x = grid.coord(i);
        let mut row: Vec<String> = x[..grid.dim()].iter().map(|c| c.to_string()).collect();
        row.extend(v.iter().map(|c| c.to_string()));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}
