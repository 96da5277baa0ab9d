//! Binary coefficient cache.
//!
//! Layout (all integers little-endian):
//!
//! | bytes      | content                                   |
//! |------------|-------------------------------------------|
//! | 4          | magic `TAUC`                              |
//! | 4          | format version (`u32`, currently 1)       |
//! | 4          | weight (`u32`)                            |
//! | 4          | level (`u32`)                             |
//! | 8          | X (`u64`)                                 |
//! | 16 * X     | `tau(n)` for `n = 1..=X`, two's-complement `i128` |
//! | 8          | FNV-1a 64 checksum of the record bytes    |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::hecke::{CoefficientTable, FormSpec, Provenance, FAST_CAP};

pub const MAGIC: [u8; 4] = *b"TAUC";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 24;
const RECORD_LEN: usize = 16;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(state: u64, bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(state, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

pub fn encode(table: &CoefficientTable) -> Vec<u8> {
    let x = table.bound();
    let mut out = Vec::with_capacity(HEADER_LEN + RECORD_LEN * x + 8);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&table.spec().weight().to_le_bytes());
    out.extend_from_slice(&table.spec().level().to_le_bytes());
    out.extend_from_slice(&(x as u64).to_le_bytes());
    for t in table.taus() {
        out.extend_from_slice(&t.to_le_bytes());
    }
    let sum = fnv1a(FNV_OFFSET, &out[HEADER_LEN..]);
    out.extend_from_slice(&sum.to_le_bytes());
    out
}

pub fn decode(bytes: &[u8]) -> Result<CoefficientTable> {
    if bytes.len() < 8 {
        return Err(Error::TruncatedFile);
    }
    if bytes[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(Error::BadVersion(version));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::TruncatedFile);
    }
    let spec = FormSpec::new(u32_at(8), u32_at(12))?;
    let x = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
    if x == 0 || x > FAST_CAP as u64 {
        return Err(Error::MalformedCache(format!(
            "record count {x} out of range"
        )));
    }
    let x = x as usize;
    let body_end = HEADER_LEN + RECORD_LEN * x;
    if bytes.len() < body_end + 8 {
        return Err(Error::TruncatedFile);
    }
    if bytes.len() > body_end + 8 {
        return Err(Error::MalformedCache(
            "trailing bytes after checksum".into(),
        ));
    }
    let stored = u64::from_le_bytes(bytes[body_end..body_end + 8].try_into().unwrap());
    let computed = fnv1a(FNV_OFFSET, &bytes[HEADER_LEN..body_end]);
    if stored != computed {
        return Err(Error::ChecksumMismatch { stored, computed });
    }
    let taus = bytes[HEADER_LEN..body_end]
        .chunks_exact(RECORD_LEN)
        .map(|c| i128::from_le_bytes(c.try_into().unwrap()))
        .collect();
    CoefficientTable::from_taus(spec, taus, Provenance::Cache)
}

pub fn write_cache(table: &CoefficientTable, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&encode(table))?;
    w.flush()?;
    Ok(())
}

pub fn read_cache(path: impl AsRef<Path>) -> Result<CoefficientTable> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hecke::{build_coefficient_table, Backend};

    #[test]
    fn roundtrip_bytes() {
        let t = build_coefficient_table(100, Backend::Oracle).unwrap();
        let bytes = encode(&t);
        assert_eq!(bytes.len(), 24 + 16 * 100 + 8);
        assert_eq!(&bytes[..4], b"TAUC");
        let back = decode(&bytes).unwrap();
        assert_eq!(back.taus(), t.taus());
        assert_eq!(back.provenance(), Provenance::Cache);
    }

    #[test]
    fn record_layout() {
        let t = build_coefficient_table(2, Backend::Oracle).unwrap();
        let bytes = encode(&t);
        assert_eq!(&bytes[4..8], &1u32.to_le_bytes());
        assert_eq!(&bytes[8..12], &12u32.to_le_bytes());
        assert_eq!(&bytes[12..16], &1u32.to_le_bytes());
        assert_eq!(&bytes[16..24], &2u64.to_le_bytes());
        assert_eq!(&bytes[24..40], &1i128.to_le_bytes());
        assert_eq!(&bytes[40..56], &(-24i128).to_le_bytes());
    }

    #[test]
    fn corruption_is_detected() {
        let t = build_coefficient_table(100, Backend::Oracle).unwrap();
        let good = encode(&t);

        let mut bad = good.clone();
        bad[100] ^= 0x01;
        assert!(matches!(decode(&bad), Err(Error::ChecksumMismatch { .. })));

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(decode(&bad), Err(Error::BadMagic)));

        let mut bad = good.clone();
        bad[4] = 2;
        assert!(matches!(decode(&bad), Err(Error::BadVersion(2))));

        assert!(matches!(
            decode(&good[..good.len() - 3]),
            Err(Error::TruncatedFile)
        ));
        assert!(matches!(decode(&good[..10]), Err(Error::TruncatedFile)));

        let mut bad = good.clone();
        bad[8] = 24;
        assert!(matches!(decode(&bad), Err(Error::UnsupportedForm { .. })));
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tau.cache");
        let t = build_coefficient_table(100, Backend::Fast).unwrap();
        write_cache(&t, &path).unwrap();
        let back = read_cache(&path).unwrap();
        assert_eq!(back.taus(), t.taus());
    }
}
