//! Sketch files: a text header of two lines followed by `d` little-endian
//! f64 values.
//!
//! ```text
//! RSKETCH v1
//! d=1050 kind=overall depth=1 erased_prefix=1050 signature=false seed=9f3a0c11d2e4b5a6
//! <8·d bytes>
//! ```

use std::fs;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use thiserror::Error;

use super::{Sketch, SketchKind};
use crate::scalar::Scalar;

const MAGIC: &str = "RSKETCH v1";

#[derive(Debug, Error)]
pub enum SketchFileError {
    #[error("not a sketch file (expected `{MAGIC}` header)")]
    BadMagic,
    #[error("bad header field `{0}`")]
    Header(String),
    #[error("expected {expected} values, found {got}")]
    Truncated { expected: usize, got: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn encode_sketch<T: Scalar>(s: &Sketch<T>) -> Vec<u8> {
    let mut out = format!(
        "{MAGIC}\nd={} kind={} depth={} erased_prefix={} signature={} seed={:016x}\n",
        s.dim(),
        s.kind,
        s.depth,
        s.erased_prefix,
        s.signature,
        s.fingerprint
    )
    .into_bytes();
    out.reserve(8 * s.dim());
    for v in &s.values {
        out.extend_from_slice(&v.f64().to_le_bytes());
    }
    out
}

pub fn decode_sketch<T: Scalar>(bytes: &[u8]) -> Result<Sketch<T>, SketchFileError> {
    let mut r = BufReader::new(bytes);
    let mut line = String::new();
    r.read_line(&mut line)?;
    if line.trim_end() != MAGIC {
        return Err(SketchFileError::BadMagic);
    }
    line.clear();
    r.read_line(&mut line)?;
    let (mut d, mut kind, mut depth, mut prefix, mut sig, mut seed) = (None, None, None, None, None, None);
    for field in line.split_whitespace() {
        let bad = || SketchFileError::Header(field.to_string());
        let (k, v) = field.split_once('=').ok_or_else(bad)?;
        match k {
            "d" => d = Some(v.parse::<usize>().map_err(|_| bad())?),
            "kind" => kind = Some(v.parse::<SketchKind>().map_err(|_| bad())?),
            "depth" => depth = Some(v.parse::<u32>().map_err(|_| bad())?),
            "erased_prefix" => prefix = Some(v.parse::<usize>().map_err(|_| bad())?),
            "signature" => sig = Some(v.parse::<bool>().map_err(|_| bad())?),
            "seed" => seed = Some(u64::from_str_radix(v, 16).map_err(|_| bad())?),
            _ => return Err(bad()),
        }
    }
    let missing = |n: &str| SketchFileError::Header(format!("{n} missing"));
    let d = d.ok_or_else(|| missing("d"))?;
    let mut raw = Vec::new();
    r.read_to_end(&mut raw)?;
    if raw.len() != 8 * d {
        return Err(SketchFileError::Truncated { expected: d, got: raw.len() / 8 });
    }
    let values = raw
        .chunks_exact(8)
        .map(|c| T::of(f64::from_le_bytes(c.try_into().expect("8-byte chunk"))))
        .collect();
    let mut s = Sketch::new(values, kind.ok_or_else(|| missing("kind"))?, depth.ok_or_else(|| missing("depth"))?);
    s.erased_prefix = prefix.ok_or_else(|| missing("erased_prefix"))?;
    if s.erased_prefix == 0 || s.erased_prefix > d {
        return Err(SketchFileError::Header(format!("erased_prefix={}", s.erased_prefix)));
    }
    s.signature = sig.ok_or_else(|| missing("signature"))?;
    s.fingerprint = seed.ok_or_else(|| missing("seed"))?;
    Ok(s)
}

pub fn write_sketch<T: Scalar>(path: &Path, s: &Sketch<T>) -> Result<(), SketchFileError> {
    fs::write(path, encode_sketch(s))?;
    Ok(())
}

pub fn read_sketch<T: Scalar>(path: &Path) -> Result<Sketch<T>, SketchFileError> {
    decode_sketch(&fs::read(path)?)
}

/// `index,value` rows, 0-based, values in shortest round-trip form.
pub fn export_csv<T: Scalar, W: Write>(s: &Sketch<T>, mut w: W) -> io::Result<()> {
    writeln!(w, "index,value")?;
    for (i, v) in s.values.iter().enumerate() {
        writeln!(w, "{i},{}", v.f64())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Sketch<f64> {
        let mut s = Sketch::new(vec![0.25, -1.5, 1e-300, f64::MIN_POSITIVE], SketchKind::Object, 3);
        s.erased_prefix = 2;
        s.signature = true;
        s.fingerprint = 0xdead_beef;
        s
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let s = sample();
        let back: Sketch<f64> = decode_sketch(&encode_sketch(&s)).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_damage() {
        let bytes = encode_sketch(&sample());
        assert!(matches!(decode_sketch::<f64>(&bytes[1..]), Err(SketchFileError::BadMagic)));
        assert!(matches!(
            decode_sketch::<f64>(&bytes[..bytes.len() - 3]),
            Err(SketchFileError::Truncated { expected: 4, got: 3 })
        ));
        let text = String::from_utf8_lossy(&bytes[..]).replace("kind=object", "kind=blob");
        assert!(matches!(decode_sketch::<f64>(text.as_bytes()), Err(SketchFileError::Header(_))));
    }

    #[test]
    fn csv_rows() {
        let mut buf = Vec::new();
        export_csv(&sample(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().nth(2), Some("1,-1.5"));
    }
}
