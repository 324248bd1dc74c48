//! The FMAP feature-map file format (version 1).
//!
//! ```text
//! "FMAP"  u8 version = 1  u32 H  u32 W  u32 C        (little-endian)
//! C channel names, each NUL-terminated UTF-8
//! H * W * C f32, little-endian, row-major (h, w, c)
//! ```
//!
//! Per-channel scaling ranges are not stored; a loaded map reports `(0, 1)`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use optivmd_core::FeatureMap;

pub const MAGIC: &[u8; 4] = b"FMAP";
pub const VERSION: u8 = 1;
/// Refuse headers describing more than this many values.
const MAX_VALUES: u64 = 1 << 31;

#[derive(Debug, thiserror::Error)]
pub enum FmapError {
    #[error("missing FMAP magic bytes")]
    BadMagic,
    #[error("unsupported FMAP version {0}")]
    UnsupportedVersion(u8),
    #[error("file is truncated")]
    Truncated,
    #[error("invalid channel name: {0}")]
    BadName(String),
    #[error("invalid shape: {0}")]
    BadShape(String),
    #[error(transparent)]
    Io(std::io::Error),
}

impl From<std::io::Error> for FmapError {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            FmapError::Truncated
        } else {
            FmapError::Io(e)
        }
    }
}

pub fn write_fmap_to<W: Write>(mut w: W, map: &FeatureMap) -> Result<(), FmapError> {
    w.write_all(MAGIC)?;
    w.write_all(&[VERSION])?;
    for dim in [map.height, map.width, map.channels] {
        let d = u32::try_from(dim).map_err(|_| FmapError::BadShape(format!("dimension {dim} exceeds u32")))?;
        w.write_all(&d.to_le_bytes())?;
    }
    for name in &map.channel_names {
        if name.as_bytes().contains(&0) {
            return Err(FmapError::BadName(name.clone()));
        }
        w.write_all(name.as_bytes())?;
        w.write_all(&[0])?;
    }
    for v in &map.data {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_bytes(map: &FeatureMap) -> Result<Vec<u8>, FmapError> {
    let mut buf = Vec::with_capacity(17 + map.data.len() * 4);
    write_fmap_to(&mut buf, map)?;
    Ok(buf)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, FmapError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_fmap_from<R: Read>(mut r: R) -> Result<FeatureMap, FmapError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => FmapError::BadMagic,
        _ => FmapError::Io(e),
    })?;
    if &magic != MAGIC {
        return Err(FmapError::BadMagic);
    }
    let mut version = [0u8; 1];
    r.read_exact(&mut version)?;
    if version[0] != VERSION {
        return Err(FmapError::UnsupportedVersion(version[0]));
    }
    let (h, w, c) = (read_u32(&mut r)?, read_u32(&mut r)?, read_u32(&mut r)?);
    let total = h as u64 * w as u64 * c as u64;
    if h == 0 || w == 0 || !(1..=3).contains(&c) || total > MAX_VALUES {
        return Err(FmapError::BadShape(format!("{h} x {w} x {c}")));
    }
    let mut names = Vec::with_capacity(c as usize);
    for _ in 0..c {
        let mut bytes = Vec::new();
        loop {
            let mut b = [0u8; 1];
            r.read_exact(&mut b)?;
            if b[0] == 0 {
                break;
            }
            bytes.push(b[0]);
        }
        names.push(String::from_utf8(bytes).map_err(|e| FmapError::BadName(e.to_string()))?);
    }
    let mut raw = vec![0u8; total as usize * 4];
    r.read_exact(&mut raw)?;
    let data = raw
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    FeatureMap::new(h as usize, w as usize, names, data).map_err(|e| FmapError::BadShape(e.to_string()))
}

pub fn write_fmap(path: &Path, map: &FeatureMap) -> Result<(), FmapError> {
    write_fmap_to(BufWriter::new(File::create(path)?), map)
}

pub fn read_fmap(path: &Path) -> Result<FeatureMap, FmapError> {
    read_fmap_from(BufReader::new(File::open(path)?))
}
