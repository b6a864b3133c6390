use std::io::{Read, Write};

use crate::error::{Error, Result};

use super::params::LstmParams;

pub const MAGIC: &[u8; 4] = b"FBTL";
pub const FORMAT_VERSION: u32 = 1;

/// Header, dimensions, then every parameter as little-endian f64.
pub fn write_params<W: Write>(params: &LstmParams, mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&FORMAT_VERSION.to_le_bytes())?;
    out.write_all(&(params.hidden_size() as u32).to_le_bytes())?;
    out.write_all(&(params.input_size() as u32).to_le_bytes())?;
    for v in params.as_slice() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_params<R: Read>(mut input: R) -> Result<LstmParams> {
    let bad = |m: String| Error::InvalidModelFile(m);
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() < 16 || &bytes[..4] != MAGIC {
        return Err(bad("missing FBTL header".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let version = word(4);
    if version != FORMAT_VERSION {
        return Err(bad(format!("unsupported format version {version}")));
    }
    let (h, n) = (word(8) as usize, word(12) as usize);
    if h == 0 || n == 0 || h > 1 << 16 || n > 1 << 16 {
        return Err(bad(format!("implausible dimensions H={h}, n={n}")));
    }
    let expected = 4 * h * n + 4 * h * h + 5 * h + 1;
    let body = &bytes[16..];
    if body.len() != expected * 8 {
        return Err(bad(format!(
            "expected {} parameter bytes for H={h}, n={n}, found {}",
            expected * 8,
            body.len()
        )));
    }
    let data: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if data.iter().any(|v| !v.is_finite()) {
        return Err(bad("non-finite parameter".into()));
    }
    LstmParams::from_vec(h, n, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let p = LstmParams::init(3, 2, 4).unwrap();
        let mut buf = Vec::new();
        write_params(&p, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"FBTL");
        assert_eq!(buf.len(), 16 + 8 * p.layout().len());
        assert_eq!(read_params(&buf[..]).unwrap(), p);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let p = LstmParams::init(3, 2, 4).unwrap();
        let mut buf = Vec::new();
        write_params(&p, &mut buf).unwrap();

        let mut truncated = buf.clone();
        truncated.pop();
        let mut wrong_dims = buf.clone();
        wrong_dims[8] = 4;
        let mut nan = buf.clone();
        nan[16..24].copy_from_slice(&f64::NAN.to_le_bytes());
        let mut magic = buf.clone();
        magic[0] = b'X';
        let mut version = buf.clone();
        version[4] = 9;
        for b in [truncated, wrong_dims, nan, magic, version] {
            assert!(matches!(read_params(&b[..]), Err(Error::InvalidModelFile(_))));
        }
    }
}
