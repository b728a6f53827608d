//! TURF binary field snapshots.
//!
//! Layout, all little-endian: a 32-byte header (`b"TURF"`, version `u32`,
//! `d` as `u32`, `n` as `u32`, time as `f64`, 8 zero bytes) followed by the
//! `u` samples and then the `v` samples, each `n^d` row-major `f64`.

use std::io::{Read, Write};

use super::{Grid, GridValues, SpectralError};

pub const TURF_MAGIC: [u8; 4] = *b"TURF";
pub const TURF_VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(out: &mut W, values: &GridValues, time: f64) -> Result<(), SpectralError> {
    let grid = values.grid();
    let mut header = [0u8; 32];
    header[0..4].copy_from_slice(&TURF_MAGIC);
    header[4..8].copy_from_slice(&TURF_VERSION.to_le_bytes());
    header[8..12].copy_from_slice(&(grid.dim() as u32).to_le_bytes());
    header[12..16].copy_from_slice(&(grid.n() as u32).to_le_bytes());
    header[16..24].copy_from_slice(&time.to_le_bytes());
    out.write_all(&header)?;
    let mut body = Vec::with_capacity(16 * grid.len());
    for x in values.u().iter().chain(values.v()) {
        body.extend_from_slice(&x.to_le_bytes());
    }
    out.write_all(&body)?;
    Ok(())
}

pub fn read_snapshot<R: Read>(input: &mut R) -> Result<(GridValues, f64), SpectralError> {
    let mut header = [0u8; 32];
    input.read_exact(&mut header)?;
    if header[0..4] != TURF_MAGIC {
        return Err(SpectralError::BadSnapshot("missing TURF magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().expect("4 bytes"));
    let version = word(4);
    if version != TURF_VERSION {
        return Err(SpectralError::BadSnapshot(format!("unsupported version {version}")));
    }
    let grid = Grid::new(word(8) as usize, word(12) as usize)?;
    let time = f64::from_le_bytes(header[16..24].try_into().expect("8 bytes"));
    let mut body = vec![0u8; 16 * grid.len()];
    input.read_exact(&mut body)?;
    let floats: Vec<f64> = body
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
        .collect();
    let (u, v) = floats.split_at(grid.len());
    Ok((GridValues::from_parts(grid, u.to_vec(), v.to_vec())?, time))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_layout() {
        let g = Grid::new(2, 4).unwrap();
        let values = GridValues::from_fn(g, |x| [x[0] - x[1], x[0] * x[1]]);
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &values, 2.5).unwrap();
        assert_eq!(buf.len(), 32 + 2 * 16 * 8);
        assert_eq!(&buf[0..4], b"TURF");
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(buf[12..16].try_into().unwrap()), 4);
        assert!(buf[24..32].iter().all(|&b| b == 0));
        assert_eq!(f64::from_le_bytes(buf[32..40].try_into().unwrap()), values.u()[0]);
        let (back, t) = read_snapshot(&mut buf.as_slice()).unwrap();
        assert_eq!(t, 2.5);
        assert_eq!(back, values);
    }

    #[test]
    fn rejects_bad_magic() {
        let buf = [0u8; 64];
        assert!(matches!(
            read_snapshot(&mut buf.as_slice()),
            Err(SpectralError::BadSnapshot(_))
        ));
    }
}
