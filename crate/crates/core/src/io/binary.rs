use std::fs;
use std::io::Write;
use std::path::Path;

use crate::engine::ImageSequence;
use crate::error::{Error, Result};
use crate::velocity::VelocityField;

pub const SEQUENCE_MAGIC: &[u8; 6] = b"ISEQ1\0";
pub const FIELD_MAGIC: &[u8; 6] = b"VFLD1\0";
pub const DTYPE_F32: u8 = 0;
const SEQUENCE_HEADER: usize = 19;
const FIELD_HEADER: usize = 18;

fn put_dims(out: &mut Vec<u8>, dims: [usize; 3]) -> Result<()> {
    for d in dims {
        let d = u32::try_from(d).map_err(|_| Error::Malformed(format!("dimension {d} exceeds u32")))?;
        out.extend_from_slice(&d.to_le_bytes());
    }
    Ok(())
}

fn get_dims(bytes: &[u8]) -> [usize; 3] {
    std::array::from_fn(|i| u32::from_le_bytes(bytes[6 + 4 * i..10 + 4 * i].try_into().unwrap()) as usize)
}

fn check_magic(bytes: &[u8], magic: &'static [u8; 6], name: &'static str) -> Result<()> {
    if bytes.len() < 6 || &bytes[..6] != magic {
        return Err(Error::BadMagic { expected: name });
    }
    Ok(())
}

fn payload_len(dims: [usize; 3], per_sample: usize) -> Result<usize> {
    dims.iter()
        .try_fold(per_sample, |a, &d| a.checked_mul(d))
        .ok_or_else(|| Error::Malformed(format!("dimensions {dims:?} overflow")))
}

pub fn encode_sequence(seq: &ImageSequence) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(SEQUENCE_HEADER + 4 * seq.len());
    out.extend_from_slice(SEQUENCE_MAGIC);
    put_dims(&mut out, seq.dims())?;
    out.push(DTYPE_F32);
    for v in seq.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_sequence(bytes: &[u8]) -> Result<ImageSequence> {
    check_magic(bytes, SEQUENCE_MAGIC, "ISEQ1")?;
    if bytes.len() < SEQUENCE_HEADER {
        return Err(Error::Truncated {
            expected: SEQUENCE_HEADER,
            found: bytes.len(),
        });
    }
    let dims = get_dims(bytes);
    let dtype = bytes[18];
    if dtype != DTYPE_F32 {
        return Err(Error::UnknownDtype(dtype));
    }
    let expected = SEQUENCE_HEADER + payload_len(dims, 4)?;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Error::Malformed(format!(
            "{} trailing bytes after payload",
            bytes.len() - expected
        )));
    }
    let data = bytes[SEQUENCE_HEADER..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    ImageSequence::new(dims, data).map_err(|e| Error::Malformed(e.to_string()))
}

pub fn write_sequence(path: impl AsRef<Path>, seq: &ImageSequence) -> Result<()> {
    write_atomic(path.as_ref(), &encode_sequence(seq)?)
}

pub fn read_sequence(path: impl AsRef<Path>) -> Result<ImageSequence> {
    decode_sequence(&fs::read(path)?)
}

pub fn encode_field(field: &VelocityField) -> Result<Vec<u8>> {
    let [nx, ny, nz] = field.dims();
    let plane = nx * ny;
    let mut out = Vec::with_capacity(FIELD_HEADER + 9 * field.len());
    out.extend_from_slice(FIELD_MAGIC);
    put_dims(&mut out, field.dims())?;
    for z in 0..nz {
        let r = z * plane..(z + 1) * plane;
        for v in &field.vx[r.clone()] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in &field.vy[r.clone()] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend(field.mask[r].iter().map(|&m| m as u8));
    }
    Ok(out)
}

pub fn decode_field(bytes: &[u8]) -> Result<VelocityField> {
    check_magic(bytes, FIELD_MAGIC, "VFLD1")?;
    if bytes.len() < FIELD_HEADER {
        return Err(Error::Truncated {
            expected: FIELD_HEADER,
            found: bytes.len(),
        });
    }
    let dims = get_dims(bytes);
    let expected = FIELD_HEADER + payload_len(dims, 9)?;
    if bytes.len() != expected {
        if bytes.len() < expected {
            return Err(Error::Truncated {
                expected,
                found: bytes.len(),
            });
        }
        return Err(Error::Malformed(format!(
            "{} trailing bytes after payload",
            bytes.len() - expected
        )));
    }
    let plane = dims[0] * dims[1];
    let n = plane * dims[2];
    let (mut vx, mut vy, mut mask) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    let f32s = |b: &[u8]| {
        b.chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect::<Vec<_>>()
    };
    for frame in bytes[FIELD_HEADER..].chunks_exact(9 * plane.max(1)).take(dims[2]) {
        vx.extend(f32s(&frame[..4 * plane]));
        vy.extend(f32s(&frame[4 * plane..8 * plane]));
        for &m in &frame[8 * plane..] {
            match m {
                0 => mask.push(false),
                1 => mask.push(true),
                other => return Err(Error::Malformed(format!("mask byte {other} is not 0 or 1"))),
            }
        }
    }
    VelocityField::from_parts(dims, vx, vy, mask).map_err(|e| Error::Malformed(e.to_string()))
}

pub fn write_field(path: impl AsRef<Path>, field: &VelocityField) -> Result<()> {
    write_atomic(path.as_ref(), &encode_field(field)?)
}

pub fn read_field(path: impl AsRef<Path>) -> Result<VelocityField> {
    decode_field(&fs::read(path)?)
}

/// Writes via a sibling temporary file so readers never see a partial file.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("partial");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Velocity;
    use proptest::prelude::*;

    #[test]
    fn header_is_19_bytes() {
        let seq = ImageSequence::zeros([2, 3, 4]);
        let b = encode_sequence(&seq).unwrap();
        assert_eq!(b.len(), 19 + 4 * 24);
        assert_eq!(&b[..6], b"ISEQ1\0");
        assert_eq!(&b[6..10], &2u32.to_le_bytes());
        assert_eq!(b[18], 0);
    }

    #[test]
    fn truncation_and_magic_and_dtype_errors_are_distinct() {
        let seq = ImageSequence::from_fn([8, 8, 4], |x, y, z| (x * y + z) as f64);
        let b = encode_sequence(&seq).unwrap();
        assert!(matches!(
            decode_sequence(&b[..b.len() - 1]),
            Err(Error::Truncated { .. })
        ));
        assert!(matches!(decode_sequence(&b[..10]), Err(Error::Truncated { .. })));
        let mut bad = b.clone();
        bad[0] = b'J';
        assert!(matches!(decode_sequence(&bad), Err(Error::BadMagic { .. })));
        let mut dt = b.clone();
        dt[18] = 7;
        assert!(matches!(decode_sequence(&dt), Err(Error::UnknownDtype(7))));
        assert!(matches!(decode_field(&b), Err(Error::BadMagic { .. })));
    }

    #[test]
    fn field_mask_bytes_are_validated() {
        let mut f = VelocityField::empty([2, 2, 1]);
        f.set(1, 0, 0, Velocity::new(0.5, -1.0));
        let mut b = encode_field(&f).unwrap();
        assert_eq!(decode_field(&b).unwrap(), f);
        let last = b.len() - 1;
        b[last] = 2;
        assert!(matches!(decode_field(&b), Err(Error::Malformed(_))));
    }

    proptest! {
        #[test]
        fn sequence_round_trip_is_bit_exact(nx in 1usize..9, ny in 1usize..9, nz in 1usize..5, seed in any::<u64>()) {
            let n = nx * ny * nz;
            let data: Vec<f32> = (0..n).map(|i| f32::from_bits((seed as u32).wrapping_mul(2654435761).wrapping_add(i as u32 * 40503) & 0x7f7f_ffff)).collect();
            let seq = ImageSequence::new([nx, ny, nz], data).unwrap();
            let back = decode_sequence(&encode_sequence(&seq).unwrap()).unwrap();
            prop_assert!(back.as_slice().iter().zip(seq.as_slice()).all(|(a, b)| a.to_bits() == b.to_bits()));
            prop_assert_eq!(back.dims(), seq.dims());
        }

        #[test]
        fn field_round_trip_is_exact(nx in 1usize..7, ny in 1usize..7, nz in 1usize..4, seed in any::<u64>()) {
            let n = nx * ny * nz;
            let vx: Vec<f32> = (0..n).map(|i| ((seed as usize + i) % 17) as f32 * 0.25 - 2.0).collect();
            let vy: Vec<f32> = (0..n).map(|i| ((seed as usize + 3 * i) % 13) as f32 * -0.125).collect();
            let mask: Vec<bool> = (0..n).map(|i| !(seed as usize + i).is_multiple_of(3)).collect();
            let f = VelocityField::from_parts([nx, ny, nz], vx, vy, mask).unwrap();
            prop_assert_eq!(decode_field(&encode_field(&f).unwrap()).unwrap(), f);
        }
    }
}
