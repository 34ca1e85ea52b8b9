//! Binary formats, all little-endian.
//!
//! * `EWF1` grid field: magic, dimension (u8), per-axis counts (u32), then
//!   `f64` values, row-major with the last axis fastest. Vector fields store
//!   their components one after another (component-major); the component count
//!   follows from the payload length.
//! * Wave-state snapshot: 16-byte header (`EWS1`, four zero bytes, time as
//!   `f64`) followed by the `u` and `u_t` `EWF1` blocks.
//! * `EBT1` boundary trace: magic, sample spacing (f64), sample count (u32),
//!   surface count (u32), dimension (u8), surface coordinates (f64), then the
//!   values time-major (f64).

use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{VectorField, WaveState};
use crate::grid::{Grid, Surface};
use crate::solver::BoundaryTrace;

const FIELD_MAGIC: &[u8; 4] = b"EWF1";
const STATE_MAGIC: &[u8; 4] = b"EWS1";
const TRACE_MAGIC: &[u8; 4] = b"EBT1";

/// Coordinates in a trace file must match the domain's surface this closely.
pub const COORD_TOL: f64 = 1e-9;

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    format: &'static str,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8], format: &'static str) -> Self {
        Reader { buf, pos: 0, format }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::format(self.format, "truncated"));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn magic(&mut self, m: &[u8; 4]) -> Result<()> {
        if self.take(4)? != m {
            return Err(Error::format(self.format, "bad magic bytes"));
        }
        Ok(())
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn rest(&self) -> &'a [u8] {
        &self.buf[self.pos..]
    }
}

fn push_f64s(out: &mut Vec<u8>, v: impl IntoIterator<Item = f64>) {
    for x in v {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

fn field_header(grid: &Grid, out: &mut Vec<u8>) {
    out.extend_from_slice(FIELD_MAGIC);
    out.push(grid.dim() as u8);
    for &n in grid.n() {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
}

/// Encodes `components` arrays of grid length.
pub fn encode_components(grid: &Grid, components: &[Vec<f64>]) -> Vec<u8> {
    let mut out = Vec::with_capacity(5 + 4 * grid.dim() + 8 * grid.len() * components.len());
    field_header(grid, &mut out);
    for c in components {
        push_f64s(&mut out, c.iter().copied());
    }
    out
}

pub fn encode_scalar(grid: &Grid, values: &[f64]) -> Vec<u8> {
    encode_components(grid, &[values.to_vec()])
}

pub fn encode_field(f: &VectorField) -> Vec<u8> {
    let comps: Vec<Vec<f64>> = (0..f.dim()).map(|c| f.component(c)).collect();
    encode_components(f.grid(), &comps)
}

/// Decodes one `EWF1` block, checking its shape against `grid`; returns the
/// components and the number of bytes consumed.
fn decode_block(buf: &[u8], grid: &Grid, components: usize) -> Result<(Vec<Vec<f64>>, usize)> {
    let mut r = Reader::new(buf, "EWF1");
    r.magic(FIELD_MAGIC)?;
    let dim = r.u8()? as usize;
    if dim != grid.dim() {
        return Err(Error::format("EWF1", format!("dimension {dim}, expected {}", grid.dim())));
    }
    for a in 0..dim {
        let n = r.u32()? as usize;
        if n != grid.n()[a] {
            return Err(Error::format(
                "EWF1",
                format!("axis {a} has {n} points, expected {}", grid.n()[a]),
            ));
        }
    }
    let mut comps = Vec::with_capacity(components);
    for _ in 0..components {
        let bytes = r.take(8 * grid.len())?;
        comps.push(
            bytes
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                .collect(),
        );
    }
    Ok((comps, r.pos))
}

fn exact(buf: &[u8], used: usize, format: &'static str) -> Result<()> {
    if used != buf.len() {
        return Err(Error::format(format, format!("{} trailing bytes", buf.len() - used)));
    }
    Ok(())
}

pub fn decode_scalar(buf: &[u8], grid: &Grid) -> Result<Vec<f64>> {
    let (mut c, used) = decode_block(buf, grid, 1)?;
    exact(buf, used, "EWF1")?;
    Ok(c.remove(0))
}

pub fn decode_field(buf: &[u8], grid: &Grid) -> Result<VectorField> {
    let (c, used) = decode_block(buf, grid, grid.dim())?;
    exact(buf, used, "EWF1")?;
    VectorField::from_components(grid, &c)
}

pub fn encode_state(s: &WaveState) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(STATE_MAGIC);
    out.extend_from_slice(&[0; 4]);
    out.extend_from_slice(&s.time.to_le_bytes());
    out.extend(encode_field(&s.u));
    out.extend(encode_field(&s.ut));
    out
}

pub fn decode_state(buf: &[u8], grid: &Grid) -> Result<WaveState> {
    let mut r = Reader::new(buf, "EWS1");
    r.magic(STATE_MAGIC)?;
    r.take(4)?;
    let time = r.f64()?;
    let rest = r.rest();
    let (u, used) = decode_block(rest, grid, grid.dim())?;
    let (ut, used2) = decode_block(&rest[used..], grid, grid.dim())?;
    exact(rest, used + used2, "EWS1")?;
    WaveState::new(
        VectorField::from_components(grid, &u)?,
        VectorField::from_components(grid, &ut)?,
        time,
    )
}

pub fn encode_trace(t: &BoundaryTrace) -> Vec<u8> {
    let d = t.dim;
    let mut out = Vec::with_capacity(25 + 8 * (t.surface.len() * d + t.values.len()));
    out.extend_from_slice(TRACE_MAGIC);
    out.extend_from_slice(&t.dt_sample.to_le_bytes());
    out.extend_from_slice(&(t.samples() as u32).to_le_bytes());
    out.extend_from_slice(&(t.surface.len() as u32).to_le_bytes());
    out.push(d as u8);
    for p in &t.surface.points {
        push_f64s(&mut out, p[..d].iter().copied());
    }
    push_f64s(&mut out, t.values.iter().copied());
    out
}

/// Decodes a trace recorded on `surface` (coordinates are checked).
pub fn decode_trace(buf: &[u8], surface: &Surface) -> Result<BoundaryTrace> {
    let mut r = Reader::new(buf, "EBT1");
    r.magic(TRACE_MAGIC)?;
    let dt_sample = r.f64()?;
    let samples = r.u32()? as usize;
    let count = r.u32()? as usize;
    let d = r.u8()? as usize;
    if count != surface.len() {
        return Err(Error::format(
            "EBT1",
            format!("{count} surface points, the domain has {}", surface.len()),
        ));
    }
    if !(2..=3).contains(&d) {
        return Err(Error::format("EBT1", format!("dimension {d}")));
    }
    for p in &surface.points {
        for &x in &p[..d] {
            let y = r.f64()?;
            if (x - y).abs() > COORD_TOL {
                return Err(Error::format("EBT1", "surface coordinates differ from the domain"));
            }
        }
    }
    let values: Vec<f64> = r
        .take(8 * samples * count * d)?
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    exact(buf, r.pos, "EBT1")?;
    Ok(BoundaryTrace {
        surface: surface.clone(),
        dim: d,
        dt_sample,
        values,
    })
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{DomainSpec, Region};

    fn grid() -> Grid {
        Grid::new(2, &[-1.0, -1.0], &[1.0, 2.0], &[9, 12]).unwrap()
    }

    #[test]
    fn field_roundtrip_and_layout() {
        let g = grid();
        let f = VectorField::from_fn(&g, |p| [p[0], p[1] * 2.0, 0.0]);
        let b = encode_field(&f);
        assert_eq!(&b[..4], b"EWF1");
        assert_eq!(b[4], 2);
        assert_eq!(u32::from_le_bytes(b[5..9].try_into().unwrap()), 9);
        assert_eq!(u32::from_le_bytes(b[9..13].try_into().unwrap()), 12);
        // second value of component 0 is node (0, 1): last axis fastest
        let v = f64::from_le_bytes(b[21..29].try_into().unwrap());
        assert_eq!(v, f.get(1, 0));
        assert_eq!(decode_field(&b, &g).unwrap(), f);
        assert!(decode_field(&b[..b.len() - 1], &g).is_err());
        let other = Grid::uniform(2, -1.0, 1.0, 9).unwrap();
        assert!(decode_field(&b, &other).is_err());
    }

    #[test]
    fn state_roundtrip() {
        let g = grid();
        let s = WaveState::new(
            VectorField::from_fn(&g, |p| [p[0], 1.0, 0.0]),
            VectorField::from_fn(&g, |p| [0.0, p[1], 0.0]),
            2.5,
        )
        .unwrap();
        let b = encode_state(&s);
        assert_eq!(&b[..8], b"EWS1\0\0\0\0");
        assert_eq!(decode_state(&b, &g).unwrap(), s);
    }

    #[test]
    fn trace_roundtrip() {
        let g = Grid::uniform(2, -1.5, 1.5, 25).unwrap();
        let dom =
            DomainSpec::new(&g, Region::ball(&[0.0, 0.0], 1.0), Region::ball(&[0.0, 0.0], 0.5)).unwrap();
        let mut t = BoundaryTrace::zeros(dom.surface(), 2, 0.01, 4);
        t.values.iter_mut().enumerate().for_each(|(i, v)| *v = i as f64 * 0.5);
        let b = encode_trace(&t);
        assert_eq!(decode_trace(&b, dom.surface()).unwrap(), t);
        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(matches!(decode_trace(&bad, dom.surface()), Err(Error::Format { .. })));
    }
}
