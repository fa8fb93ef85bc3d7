//! Binary position snapshots.
//!
//! Layout, all little-endian:
//!
//! | offset | size      | content                       |
//! |--------|-----------|-------------------------------|
//! | 0      | 4         | magic `PHTX`                  |
//! | 4      | 4         | format version (`u32`)        |
//! | 8      | 8         | point count `n` (`u64`)       |
//! | 16     | `16 n`    | `n` pairs of `f64` `(x, y)`   |

use std::io::Write;
use std::path::{Path, PathBuf};

use phototaxis_core::Vec2;
use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"PHTX";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 16;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: bad magic {found:?} at byte 0, expected \"PHTX\"")]
    BadMagic { path: PathBuf, found: Vec<u8> },

    #[error("{path}: unsupported format version {found} at byte 4, expected {VERSION}")]
    Version { path: PathBuf, found: u32 },

    #[error("{path}: truncated at byte {actual}, expected {expected} bytes")]
    Truncated { path: PathBuf, expected: u64, actual: u64 },

    #[error("{path}: {extra} unexpected trailing bytes after byte {expected}")]
    Trailing { path: PathBuf, expected: u64, extra: u64 },
}

pub fn encode(positions: &[Vec2]) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(HEADER_LEN + 16 * positions.len());
    bytes.extend_from_slice(&MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    bytes.extend_from_slice(&(positions.len() as u64).to_le_bytes());
    for p in positions {
        bytes.extend_from_slice(&p[0].to_le_bytes());
        bytes.extend_from_slice(&p[1].to_le_bytes());
    }
    bytes
}

/// Parses a snapshot held in memory; `path` only labels errors.
pub fn decode(bytes: &[u8], path: &Path) -> Result<Vec<Vec2>, SnapshotError> {
    let path = path.to_path_buf();
    let actual = bytes.len() as u64;
    let head = &bytes[..bytes.len().min(4)];
    if head != &MAGIC[..head.len()] {
        return Err(SnapshotError::BadMagic {
            found: head.to_vec(),
            path,
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(SnapshotError::Truncated {
            path,
            expected: HEADER_LEN as u64,
            actual,
        });
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(SnapshotError::Version { path, found: version });
    }
    let count = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let expected = count
        .checked_mul(16)
        .and_then(|b| b.checked_add(HEADER_LEN as u64))
        .unwrap_or(u64::MAX);
    if actual < expected {
        return Err(SnapshotError::Truncated { path, expected, actual });
    }
    if actual > expected {
        return Err(SnapshotError::Trailing {
            path,
            expected,
            extra: actual - expected,
        });
    }
    let body = &bytes[HEADER_LEN..];
    Ok(body
        .chunks_exact(16)
        .map(|c| {
            [
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            ]
        })
        .collect())
}

pub fn write(positions: &[Vec2], path: &Path) -> Result<(), SnapshotError> {
    let io = |source| SnapshotError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    file.write_all(&encode(positions)).map_err(io)?;
    file.flush().map_err(io)
}

pub fn read(path: &Path) -> Result<Vec<Vec2>, SnapshotError> {
    let bytes = std::fs::read(path).map_err(|source| SnapshotError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode(&bytes, path)
}
