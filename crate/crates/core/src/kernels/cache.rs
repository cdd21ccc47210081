//! Binary kernel-matrix cache.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! offset  size      field
//! 0       4         magic "DKPK"
//! 4       4         version (u32) = 1
//! 8       1         kernel kind (0 linear, 1 rbf, 2 poly, 3 diffusion)
//! 9       8         m (u64)
//! 17      8·m·m     entries, row-major, f64
//! ```
//!
//! Kernel parameters are not stored; callers must key cache files on them.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;

use super::KernelKind;
use crate::error::{DkpcaError, Result};
use crate::scalar::Real;

pub const MAGIC: [u8; 4] = *b"DKPK";
pub const VERSION: u32 = 1;

/// Kernel entries read back from a cache file.
#[derive(Debug, Clone, PartialEq)]
pub struct CachedKernel<T> {
    pub kind: KernelKind,
    pub values: Array2<T>,
}

pub fn write_cache<T: Real, W: Write>(out: &mut W, kind: KernelKind, values: &Array2<T>) -> Result<()> {
    let m = values.nrows();
    if m != values.ncols() {
        return Err(DkpcaError::Cache("kernel matrix is not square".into()));
    }
    let io = |e: std::io::Error| DkpcaError::Cache(e.to_string());
    out.write_all(&MAGIC).map_err(io)?;
    out.write_all(&VERSION.to_le_bytes()).map_err(io)?;
    out.write_all(&[kind.code()]).map_err(io)?;
    out.write_all(&(m as u64).to_le_bytes()).map_err(io)?;
    for row in values.rows() {
        for &v in row {
            out.write_all(&v.as_f64().to_le_bytes()).map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

pub fn read_cache<T: Real, R: Read>(input: &mut R) -> Result<CachedKernel<T>> {
    let io = |e: std::io::Error| DkpcaError::Cache(e.to_string());
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic).map_err(io)?;
    if magic != MAGIC {
        return Err(DkpcaError::Cache(format!("bad magic {magic:?}")));
    }
    let mut word = [0u8; 4];
    input.read_exact(&mut word).map_err(io)?;
    let version = u32::from_le_bytes(word);
    if version != VERSION {
        return Err(DkpcaError::Cache(format!("unsupported version {version}")));
    }
    let mut code = [0u8; 1];
    input.read_exact(&mut code).map_err(io)?;
    let kind = KernelKind::from_code(code[0])
        .ok_or_else(|| DkpcaError::Cache(format!("unknown kernel code {}", code[0])))?;
    let mut long = [0u8; 8];
    input.read_exact(&mut long).map_err(io)?;
    let m = usize::try_from(u64::from_le_bytes(long))
        .map_err(|_| DkpcaError::Cache("matrix order overflows usize".into()))?;
    let cells = m
        .checked_mul(m)
        .ok_or_else(|| DkpcaError::Cache("matrix order overflows usize".into()))?;
    let mut data = Vec::with_capacity(cells);
    for _ in 0..cells {
        input.read_exact(&mut long).map_err(io)?;
        data.push(T::of(f64::from_le_bytes(long)));
    }
    let mut trailing = [0u8; 1];
    if input.read(&mut trailing).map_err(io)? != 0 {
        return Err(DkpcaError::Cache("trailing bytes after matrix data".into()));
    }
    let values = Array2::from_shape_vec((m, m), data)
        .map_err(|e| DkpcaError::Cache(e.to_string()))?;
    Ok(CachedKernel { kind, values })
}

pub fn save<T: Real>(path: &Path, kind: KernelKind, values: &Array2<T>) -> Result<()> {
    let file = fs::File::create(path).map_err(|source| DkpcaError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_cache(&mut BufWriter::new(file), kind, values)
}

pub fn load<T: Real>(path: &Path) -> Result<CachedKernel<T>> {
    let file = fs::File::open(path).map_err(|source| DkpcaError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_cache(&mut BufReader::new(file))
}
