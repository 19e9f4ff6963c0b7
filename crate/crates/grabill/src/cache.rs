//! On-disk spectrum cache.
//!
//! One file per spectrum key. Layout, all little-endian:
//!
//! ```text
//! magic "GRBSPEC\0" | version u32 | flags u32 | dim u64 | lo f64 | hi f64 | count u64
//! eigenvalues: count × f64 (sorted)
//! eigenvectors (flag bit 0): count × dim × f64
//! sha256 of everything above: 32 bytes
//! ```
//!
//! Flag bit 1 marks a windowed solve. A full spectrum stores `lo = −∞`,
//! `hi = +∞`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use grabill_core::spectra::{Method, SpectrumRecord};
use sha2::{Digest, Sha256};

pub const MAGIC: &[u8; 8] = b"GRBSPEC\0";
pub const VERSION: u32 = 1;
pub const CACHE_ENV: &str = "GRABILL_CACHE_DIR";
const FLAG_VECTORS: u32 = 1;
const FLAG_WINDOWED: u32 = 2;
const HEADER_LEN: usize = 8 + 4 + 4 + 8 + 8 + 8 + 8;

#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt cache file: {0}")]
    Corrupt(&'static str),
}

pub fn encode(record: &SpectrumRecord, dim: usize) -> Vec<u8> {
    let vectors = record.eigenvectors.as_ref();
    let mut flags = 0;
    if vectors.is_some() {
        flags |= FLAG_VECTORS;
    }
    if record.method == Method::WindowedIterative {
        flags |= FLAG_WINDOWED;
    }
    let (lo, hi) = record.window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let n_vec = vectors.map_or(0, |v| v.len() * dim);
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * (record.len() + n_vec) + 32);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&flags.to_le_bytes());
    out.extend_from_slice(&(dim as u64).to_le_bytes());
    out.extend_from_slice(&lo.to_le_bytes());
    out.extend_from_slice(&hi.to_le_bytes());
    out.extend_from_slice(&(record.len() as u64).to_le_bytes());
    for e in &record.eigenvalues {
        out.extend_from_slice(&e.to_le_bytes());
    }
    for v in vectors.into_iter().flatten() {
        for x in v {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], CacheError> {
        let end = self.pos + N;
        let chunk = self.bytes.get(self.pos..end).ok_or(CacheError::Corrupt("truncated"))?;
        self.pos = end;
        Ok(chunk.try_into().expect("length checked"))
    }

    fn u32(&mut self) -> Result<u32, CacheError> {
        self.take().map(u32::from_le_bytes)
    }

    fn u64(&mut self) -> Result<u64, CacheError> {
        self.take().map(u64::from_le_bytes)
    }

    fn f64(&mut self) -> Result<f64, CacheError> {
        self.take().map(f64::from_le_bytes)
    }
}

/// Decodes a cache file; returns the record and the matrix dimension.
pub fn decode(bytes: &[u8]) -> Result<(SpectrumRecord, usize), CacheError> {
    if bytes.len() < HEADER_LEN + 32 {
        return Err(CacheError::Corrupt("truncated"));
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 32);
    if Sha256::digest(body).as_slice() != trailer {
        return Err(CacheError::Corrupt("checksum mismatch"));
    }
    let mut r = Reader { bytes: body, pos: 0 };
    if &r.take::<8>()? != MAGIC {
        return Err(CacheError::Corrupt("bad magic"));
    }
    if r.u32()? != VERSION {
        return Err(CacheError::Corrupt("unsupported version"));
    }
    let flags = r.u32()?;
    let dim = r.u64()? as usize;
    let (lo, hi) = (r.f64()?, r.f64()?);
    let count = r.u64()? as usize;
    let n_vec = if flags & FLAG_VECTORS != 0 { count.checked_mul(dim).ok_or(CacheError::Corrupt("size overflow"))? } else { 0 };
    if body.len() != HEADER_LEN + 8 * (count + n_vec) {
        return Err(CacheError::Corrupt("length does not match header"));
    }
    let eigenvalues = (0..count).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
    let eigenvectors = if flags & FLAG_VECTORS != 0 {
        let mut vs = Vec::with_capacity(count);
        for _ in 0..count {
            vs.push((0..dim).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?);
        }
        Some(vs)
    } else {
        None
    };
    let window = (lo.is_finite() && hi.is_finite()).then_some((lo, hi));
    let method = if flags & FLAG_WINDOWED != 0 { Method::WindowedIterative } else { Method::Dense };
    Ok((SpectrumRecord { config_hash: String::new(), eigenvalues, eigenvectors, window, method }, dim))
}

#[derive(Debug, Clone)]
pub struct SpectrumCache {
    dir: PathBuf,
}

impl SpectrumCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        SpectrumCache { dir: dir.into() }
    }

    /// Explicit directory, else `$GRABILL_CACHE_DIR`, else `fallback`.
    pub fn resolve(explicit: Option<&Path>, fallback: &Path) -> Self {
        match (explicit, std::env::var_os(CACHE_ENV)) {
            (Some(d), _) => Self::new(d),
            (None, Some(d)) => Self::new(d),
            (None, None) => Self::new(fallback),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.spec"))
    }

    /// `None` on a miss. A corrupt file is reported and treated as a miss.
    pub fn load(&self, key: &str) -> Option<SpectrumRecord> {
        let path = self.path(key);
        let bytes = fs::read(&path).ok()?;
        match decode(&bytes) {
            Ok((record, _)) => {
                log::info!("cache hit: {}", path.display());
                Some(record.with_hash(key))
            }
            Err(e) => {
                log::warn!("{}: {e}; recomputing", path.display());
                None
            }
        }
    }

    /// Writes through a temporary file and an atomic rename.
    pub fn store(&self, key: &str, record: &SpectrumRecord, dim: usize) -> Result<PathBuf, CacheError> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path(key);
        let tmp = self.dir.join(format!(".{key}.{}.tmp", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&encode(record, dim))?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> SpectrumRecord {
        SpectrumRecord {
            config_hash: String::new(),
            eigenvalues: vec![-0.5, 0.25, 1.0 / 3.0],
            eigenvectors: Some(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.6, 0.8]]),
            window: Some((-1.0, 1.0)),
            method: Method::WindowedIterative,
        }
    }

    #[test]
    fn round_trip_is_lossless() {
        let r = record();
        let (back, dim) = decode(&encode(&r, 2)).unwrap();
        assert_eq!(dim, 2);
        assert_eq!(back, r);
        let full = SpectrumRecord { eigenvectors: None, window: None, method: Method::Dense, ..r };
        assert_eq!(decode(&encode(&full, 2)).unwrap().0, full);
    }

    #[test]
    fn corruption_is_detected() {
        let mut bytes = encode(&record(), 2);
        bytes[HEADER_LEN + 3] ^= 1;
        assert!(matches!(decode(&bytes), Err(CacheError::Corrupt(_))));
        assert!(decode(&bytes[..20]).is_err());
    }

    #[test]
    fn store_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let cache = SpectrumCache::new(dir.path());
        assert!(cache.load("k").is_none());
        cache.store("k", &record(), 2).unwrap();
        assert_eq!(cache.load("k").unwrap().eigenvalues, record().eigenvalues);
        fs::write(cache.path("k"), b"garbage").unwrap();
        assert!(cache.load("k").is_none());
    }

    proptest::proptest! {
        #[test]
        fn any_record_round_trips_and_bit_flips_are_caught(
            values in proptest::collection::vec(-10.0f64..10.0, 0..40),
            windowed in proptest::bool::ANY,
            flip in 0usize..10_000,
        ) {
            let r = SpectrumRecord {
                config_hash: String::new(),
                eigenvalues: values,
                eigenvectors: None,
                window: windowed.then_some((-10.0, 10.0)),
                method: if windowed { Method::WindowedIterative } else { Method::Dense },
            };
            let mut bytes = encode(&r, 7);
            proptest::prop_assert_eq!(decode(&bytes).unwrap(), (r, 7));
            let bit = flip % (8 * bytes.len());
            bytes[bit / 8] ^= 1 << (bit % 8);
            proptest::prop_assert!(decode(&bytes).is_err());
        }
    }
}
