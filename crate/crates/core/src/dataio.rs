//! Datasets: IDX parsing, binary matrix dumps, subsets and synthetic sets.
//!
//! # Matrix dump format
//!
//! A dump file is a sequence of records. Each record is a 16-byte header
//! followed by a row-major little-endian payload:
//!
//! | bytes  | field                                            |
//! |--------|--------------------------------------------------|
//! | 0..8   | magic: `b"KXMATF32"` (f32 payload) or `b"KXMATU32"` (u32 payload) |
//! | 8..12  | rows, u32 little-endian                          |
//! | 12..16 | cols, u32 little-endian                          |
//!
//! Feature dumps hold one f32 record. Dataset dumps hold an f32 features
//! record (`n x d`), a u32 labels record (`n x 1`) and a u32 class-count
//! record (`1 x 1`). Model checkpoints hold a weights record (`C x F`) and a
//! bias record (`1 x C`).

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::detrand::RandomStream;
use crate::error::{Error, Result};

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

pub const MAGIC_F32: [u8; 8] = *b"KXMATF32";
pub const MAGIC_U32: [u8; 8] = *b"KXMATU32";

/// Dense row-major samples with integer labels in `0..classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f32>,
    labels: Vec<usize>,
    dim: usize,
    classes: usize,
}

impl Dataset {
    pub fn new(features: Vec<f32>, labels: Vec<usize>, dim: usize, classes: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidArgument("dataset needs at least one sample".into()));
        }
        if dim == 0 || classes == 0 {
            return Err(Error::InvalidArgument("dimension and class count must be >= 1".into()));
        }
        if features.len() != labels.len() * dim {
            return Err(Error::LengthMismatch { expected: labels.len() * dim, actual: features.len() });
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::LabelOutOfRange { label, classes });
        }
        Ok(Self { features, labels, dim, classes })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn features(&self) -> &[f32] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    /// New dataset from the given sample indices, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::InvalidArgument(format!("sample index {i} out of range")));
            }
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self::new(features, labels, self.dim, self.classes)
    }

    /// Writes the three-record dump described in the module docs.
    pub fn write_dump(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        encode_f32(&mut buf, self.len(), self.dim, &self.features);
        let labels: Vec<u32> = self.labels.iter().map(|&l| l as u32).collect();
        encode_u32(&mut buf, self.len(), 1, &labels);
        encode_u32(&mut buf, 1, 1, &[self.classes as u32]);
        fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    pub fn read_dump(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let mut reader = RecordReader { path, bytes: &bytes, offset: 0 };
        let (n, d, features) = reader.f32_record()?;
        let (ln, _, labels) = reader.u32_record()?;
        let (_, _, classes) = reader.u32_record()?;
        if ln != n {
            return Err(Error::CountMismatch { images: n, labels: ln });
        }
        let classes = *classes.first().ok_or_else(|| Error::Truncated { path: path.into(), offset: reader.offset, needed: 4 })?;
        Self::new(features, labels.into_iter().map(|l| l as usize).collect(), d, classes as usize)
    }
}

fn header(buf: &mut Vec<u8>, magic: [u8; 8], rows: usize, cols: usize) {
    buf.extend_from_slice(&magic);
    buf.extend_from_slice(&(rows as u32).to_le_bytes());
    buf.extend_from_slice(&(cols as u32).to_le_bytes());
}

pub fn encode_f32(buf: &mut Vec<u8>, rows: usize, cols: usize, data: &[f32]) {
    debug_assert_eq!(rows * cols, data.len());
    header(buf, MAGIC_F32, rows, cols);
    buf.reserve(data.len() * 4);
    for v in data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn encode_u32(buf: &mut Vec<u8>, rows: usize, cols: usize, data: &[u32]) {
    debug_assert_eq!(rows * cols, data.len());
    header(buf, MAGIC_U32, rows, cols);
    for v in data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
}

/// Writes a single f32 matrix record.
pub fn write_matrix(path: &Path, rows: usize, cols: usize, data: &[f32]) -> Result<()> {
    let mut buf = Vec::with_capacity(16 + data.len() * 4);
    encode_f32(&mut buf, rows, cols, data);
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

/// Sequential reader over dump records.
pub struct RecordReader<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    offset: usize,
}

impl<'a> RecordReader<'a> {
    pub fn new(path: &'a Path, bytes: &'a [u8]) -> Self {
        Self { path, bytes, offset: 0 }
    }

    pub fn at_end(&self) -> bool {
        self.offset == self.bytes.len()
    }

    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let rest = self.bytes.len() - self.offset;
        if rest < len {
            return Err(Error::Truncated { path: self.path.into(), offset: self.offset, needed: len - rest });
        }
        let out = &self.bytes[self.offset..self.offset + len];
        self.offset += len;
        Ok(out)
    }

    fn header(&mut self, expected: [u8; 8]) -> Result<(usize, usize)> {
        let h = self.take(16)?;
        if h[..8] != expected {
            return Err(Error::BadMagic {
                path: self.path.into(),
                found: u32::from_be_bytes(h[4..8].try_into().unwrap()),
                expected: u32::from_be_bytes(expected[4..8].try_into().unwrap()),
            });
        }
        let rows = u32::from_le_bytes(h[8..12].try_into().unwrap()) as usize;
        let cols = u32::from_le_bytes(h[12..16].try_into().unwrap()) as usize;
        Ok((rows, cols))
    }

    pub fn f32_record(&mut self) -> Result<(usize, usize, Vec<f32>)> {
        let (rows, cols) = self.header(MAGIC_F32)?;
        let payload = self.take(rows * cols * 4)?;
        let data = payload.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
        Ok((rows, cols, data))
    }

    pub fn u32_record(&mut self) -> Result<(usize, usize, Vec<u32>)> {
        let (rows, cols) = self.header(MAGIC_U32)?;
        let payload = self.take(rows * cols * 4)?;
        let data = payload.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect();
        Ok((rows, cols, data))
    }
}

fn be_u32(path: &Path, bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes(b.try_into().unwrap()))
        .ok_or_else(|| Error::Truncated { path: path.into(), offset, needed: offset + 4 - bytes.len() })
}

/// Parsed IDX image file: `count` images of `rows x cols` bytes.
pub fn parse_idx_images(path: &Path, bytes: &[u8]) -> Result<(usize, usize, Vec<f32>)> {
    let magic = be_u32(path, bytes, 0)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::BadMagic { path: path.into(), found: magic, expected: IDX_IMAGES_MAGIC });
    }
    let count = be_u32(path, bytes, 4)? as usize;
    let rows = be_u32(path, bytes, 8)? as usize;
    let cols = be_u32(path, bytes, 12)? as usize;
    let dim = rows * cols;
    let body = &bytes[16..];
    if body.len() < count * dim {
        return Err(Error::Truncated { path: path.into(), offset: bytes.len(), needed: count * dim - body.len() });
    }
    let pixels = body[..count * dim].iter().map(|&b| f32::from(b) / 255.0).collect();
    Ok((count, dim, pixels))
}

pub fn parse_idx_labels(path: &Path, bytes: &[u8]) -> Result<Vec<usize>> {
    let magic = be_u32(path, bytes, 0)?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::BadMagic { path: path.into(), found: magic, expected: IDX_LABELS_MAGIC });
    }
    let count = be_u32(path, bytes, 4)? as usize;
    let body = &bytes[8..];
    if body.len() < count {
        return Err(Error::Truncated { path: path.into(), offset: bytes.len(), needed: count - body.len() });
    }
    Ok(body[..count].iter().map(|&b| usize::from(b)).collect())
}

/// Loads an IDX image/label pair, scaling pixels to `[0, 1]`. The class
/// count is `max(label) + 1`, at least 10 for digit-style data.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let img = fs::read(images_path).map_err(|e| Error::io(images_path, e))?;
    let lab = fs::read(labels_path).map_err(|e| Error::io(labels_path, e))?;
    let (count, dim, pixels) = parse_idx_images(images_path, &img)?;
    let labels = parse_idx_labels(labels_path, &lab)?;
    if labels.len() != count {
        return Err(Error::CountMismatch { images: count, labels: labels.len() });
    }
    let classes = labels.iter().max().map_or(1, |m| m + 1).max(10);
    Dataset::new(pixels, labels, dim, classes)
}

/// Deterministic subsample of `count` rows drawn by a shuffle of all indices.
pub fn subset(data: &Dataset, count: usize, seed: u64) -> Result<Dataset> {
    if count > data.len() {
        return Err(Error::InvalidArgument(format!("subset of {count} from {} samples", data.len())));
    }
    let mut order = RandomStream::new(seed, "subset", 0).permutation(data.len())?;
    order.truncate(count);
    data.select(&order)
}

/// Four gaussian clusters at `(+-1, +-1)`; class 0 when the center coordinates
/// share a sign, class 1 otherwise. Clusters are assigned round-robin.
pub fn synth_xor(n: usize, noise_sigma: f64, seed: u64) -> Result<Dataset> {
    if n < 4 {
        return Err(Error::InvalidArgument("xor needs at least 4 samples".into()));
    }
    if !(noise_sigma >= 0.0) {
        return Err(Error::InvalidArgument("noise must be >= 0".into()));
    }
    const CENTERS: [(f64, f64); 4] = [(1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)];
    let mut s = RandomStream::new(seed, "xor", 0);
    let mut features = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let (cx, cy) = CENTERS[i % 4];
        features.push((cx + noise_sigma * s.gaussian()) as f32);
        features.push((cy + noise_sigma * s.gaussian()) as f32);
        labels.push(usize::from(cx * cy < 0.0));
    }
    Dataset::new(features, labels, 2, 2)
}

/// Center of blob `c`: `separation * (1 + c / dim)` on axis `c % dim`.
pub fn blob_center(c: usize, dim: usize, separation: f64) -> Vec<f64> {
    let mut center = vec![0.0; dim];
    center[c % dim] = separation * (1 + c / dim) as f64;
    center
}

/// `classes` unit-variance gaussian clusters whose centers are at least
/// `separation` apart, assigned round-robin.
pub fn synth_blobs(n: usize, classes: usize, dim: usize, separation: f64, seed: u64) -> Result<Dataset> {
    if n < classes || classes == 0 || dim == 0 || !(separation > 0.0) {
        return Err(Error::InvalidArgument("blobs need n >= C >= 1, dim >= 1 and separation > 0".into()));
    }
    let centers: Vec<Vec<f64>> = (0..classes).map(|c| blob_center(c, dim, separation)).collect();
    let mut s = RandomStream::new(seed, "blobs", 0);
    let mut features = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % classes;
        features.extend(centers[c].iter().map(|&m| (m + s.gaussian()) as f32));
        labels.push(c);
    }
    Dataset::new(features, labels, dim, classes)
}
