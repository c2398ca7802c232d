//! On-disk eigenpair cache.
//!
//! One file per (code version, model spec, eigensolver options). Layout:
//! the 16-byte magic, a little-endian `u64` header length, a JSON header
//! describing the blocks, then per block the eigenvalues followed by the
//! eigenvectors column by column as `(re, im)` pairs, all little-endian
//! `f64`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use stredalab::model::{OperatorMatrix, Spin};
use stredalab::response::SpectrumSource;
use stredalab::spectral::{eigensolve, BlockSpectrum};
use stredalab::{c64, EigenOptions, HamiltonianSpec, Spectrum, CODE_VERSION};

use crate::log::RunLog;

pub const MAGIC: &[u8; 16] = b"STREDALAB-EIGEN\n";
pub const EXTENSION: &str = "eig";

#[derive(Debug, Serialize, Deserialize)]
struct BlockHeader {
    spin: String,
    dim: usize,
    count: usize,
    complete: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: u32,
    key: String,
    code_version: String,
    spec: HamiltonianSpec,
    eigen_options: String,
    blocks: Vec<BlockHeader>,
}

/// Hex SHA-256 of everything the eigenpairs depend on.
pub fn cache_key(spec: &HamiltonianSpec, opts: &EigenOptions) -> String {
    let mut h = Sha256::new();
    h.update(CODE_VERSION.as_bytes());
    h.update([0]);
    h.update(serde_json::to_vec(spec).expect("spec serializes"));
    h.update([0]);
    h.update(format!("{opts:?}").as_bytes());
    hex::encode(h.finalize())
}

/// Spectrum source that reads and writes the cache directory, or always
/// diagonalizes when disabled. Every call is logged.
pub struct EigenCache {
    dir: Option<PathBuf>,
    log: Arc<RunLog>,
}

impl EigenCache {
    pub fn new(dir: Option<PathBuf>, log: Arc<RunLog>) -> Self {
        EigenCache { dir, log }
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{key}.{EXTENSION}")))
    }
}

impl SpectrumSource for EigenCache {
    fn spectrum(&self, spec: &HamiltonianSpec, h: &OperatorMatrix, opts: &EigenOptions) -> stredalab::Result<Spectrum> {
        let key = cache_key(spec, opts);
        let short = &key[..16];
        if let Some(path) = self.path(&key) {
            match read(&path, &key) {
                Ok(Some(blocks)) => {
                    self.log.line(&format!("cache hit {short}: eigensolve skipped (B = {})", spec.b2));
                    return Ok(Spectrum { geometry: h.geometry().clone(), blocks });
                }
                Ok(None) => self.log.line(&format!("cache miss {short} (B = {})", spec.b2)),
                Err(e) => self.log.line(&format!("cache entry {short} unreadable, recomputing: {e}")),
            }
        }
        let t = Instant::now();
        let spectrum = eigensolve(h, opts)?;
        self.log.line(&format!("stage eigensolve took {:.3}s (B = {})", t.elapsed().as_secs_f64(), spec.b2));
        if let Some(path) = self.path(&key) {
            if let Err(e) = write(&path, &key, spec, opts, &spectrum) {
                self.log.line(&format!("cache write {short} failed: {e}"));
            }
        }
        Ok(spectrum)
    }
}

fn write(path: &Path, key: &str, spec: &HamiltonianSpec, opts: &EigenOptions, s: &Spectrum) -> std::io::Result<()> {
    let header = Header {
        format: 1,
        key: key.to_string(),
        code_version: CODE_VERSION.to_string(),
        spec: spec.clone(),
        eigen_options: format!("{opts:?}"),
        blocks: s
            .blocks
            .iter()
            .map(|b| BlockHeader {
                spin: format!("{:?}", b.spin),
                dim: b.dim,
                count: b.eigenvalues.len(),
                complete: b.complete,
            })
            .collect(),
    };
    let json = serde_json::to_vec(&header)?;
    let mut buf = Vec::with_capacity(json.len() + 24);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(json.len() as u64).to_le_bytes());
    buf.extend_from_slice(&json);
    for b in &s.blocks {
        for v in &b.eigenvalues {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        let m = &b.eigenvectors;
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                let z = m[(r, c)];
                buf.extend_from_slice(&z.re.to_le_bytes());
                buf.extend_from_slice(&z.im.to_le_bytes());
            }
        }
    }
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp)?;
    f.write_all(&buf)?;
    f.sync_all()?;
    fs::rename(tmp, path)
}

fn bad(msg: impl Into<String>) -> std::io::Error {
    std::io::Error::new(std::io::ErrorKind::InvalidData, msg.into())
}

/// `Ok(None)` when no entry exists.
fn read(path: &Path, key: &str) -> std::io::Result<Option<[BlockSpectrum; 2]>> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e),
    };
    if bytes.len() < 24 || &bytes[..16] != MAGIC {
        return Err(bad("bad magic"));
    }
    let hlen = u64::from_le_bytes(bytes[16..24].try_into().unwrap()) as usize;
    let body = bytes.get(24..24 + hlen).ok_or_else(|| bad("truncated header"))?;
    let header: Header = serde_json::from_slice(body)?;
    if header.key != key || header.code_version != CODE_VERSION || header.blocks.len() != 2 {
        return Err(bad("header does not match the requested entry"));
    }
    let mut floats = bytes[24 + hlen..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let expected: usize = header.blocks.iter().map(|b| b.count * (1 + 2 * b.dim)).sum();
    if (bytes.len() - 24 - hlen) != 8 * expected {
        return Err(bad("payload length does not match the header"));
    }
    let mut blocks = Vec::with_capacity(2);
    for (bh, spin) in header.blocks.iter().zip(Spin::BOTH) {
        if bh.spin != format!("{spin:?}") {
            return Err(bad("unexpected block order"));
        }
        let eigenvalues: Vec<f64> = floats.by_ref().take(bh.count).collect();
        let mut data = Vec::with_capacity(bh.dim * bh.count);
        for _ in 0..bh.dim * bh.count {
            let re = floats.next().unwrap();
            let im = floats.next().unwrap();
            data.push(c64::new(re, im));
        }
        let eigenvectors = faer_from_columns(bh.dim, bh.count, &data);
        blocks.push(BlockSpectrum { spin, dim: bh.dim, eigenvalues, eigenvectors, complete: bh.complete });
    }
    let [up, down]: [BlockSpectrum; 2] = blocks.try_into().map_err(|_| bad("block count"))?;
    Ok(Some([up, down]))
}

fn faer_from_columns(rows: usize, cols: usize, data: &[c64]) -> stredalab::faer::Mat<c64> {
    stredalab::faer::Mat::from_fn(rows, cols, |r, c| data[c * rows + r])
}

/// Deletes cache entries in `dir` and in its `cache` subdirectory.
/// Returns the number of files removed.
pub fn clear(dir: &Path) -> std::io::Result<usize> {
    let mut removed = 0;
    for d in [dir.to_path_buf(), dir.join("cache")] {
        let entries = match fs::read_dir(&d) {
            Ok(e) => e,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => continue,
            Err(e) => return Err(e),
        };
        for entry in entries {
            let p = entry?.path();
            let ext = p.extension().and_then(|e| e.to_str());
            if p.is_file() && matches!(ext, Some(EXTENSION) | Some("tmp")) && has_magic(&p) {
                fs::remove_file(&p)?;
                removed += 1;
            }
        }
    }
    Ok(removed)
}

fn has_magic(p: &Path) -> bool {
    use std::io::Read;
    let mut head = [0u8; 16];
    fs::File::open(p).and_then(|mut f| f.read_exact(&mut head)).map(|_| &head == MAGIC).unwrap_or(false)
}
