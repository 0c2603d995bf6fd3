//! IDX (MNIST family) ingestion. All header fields are big-endian `u32`.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use super::LabeledDataset;
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, Copy, Default)]
pub struct IdxOptions {
    /// Keep only the first `limit` records (`None` keeps all).
    pub limit: Option<usize>,
    /// Renormalize rows onto the unit sphere and binarize labels
    /// (digits `< 5` ↦ class 0, the rest ↦ class 1).
    pub ntk_mode: bool,
}

fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format { path: path.to_path_buf(), message: message.into() }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn header_u32(bytes: &[u8], field: usize, path: &Path) -> Result<u32> {
    let start = field * 4;
    let chunk = bytes.get(start..start + 4).ok_or_else(|| {
        format_err(path, format!("truncated header: expected at least {} bytes, got {}", start + 4, bytes.len()))
    })?;
    Ok(u32::from_be_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]))
}

fn check_magic(bytes: &[u8], expected: u32, path: &Path) -> Result<()> {
    let magic = header_u32(bytes, 0, path)?;
    if magic != expected {
        return Err(format_err(path, format!("bad magic number 0x{magic:08x}, expected 0x{expected:08x}")));
    }
    Ok(())
}

fn payload<'a>(bytes: &'a [u8], header_len: usize, expected: usize, path: &Path) -> Result<&'a [u8]> {
    let actual = bytes.len().saturating_sub(header_len);
    if actual < expected {
        return Err(format_err(
            path,
            format!("truncated payload: expected {expected} bytes, got {actual}"),
        ));
    }
    Ok(&bytes[header_len..header_len + expected])
}

/// Reads an image file: returns `(count, rows, cols, pixels)`.
pub fn read_idx_images(path: &Path) -> Result<(usize, usize, usize, Vec<u8>)> {
    let bytes = read_file(path)?;
    check_magic(&bytes, IMAGE_MAGIC, path)?;
    let count = header_u32(&bytes, 1, path)? as usize;
    let rows = header_u32(&bytes, 2, path)? as usize;
    let cols = header_u32(&bytes, 3, path)? as usize;
    let data = payload(&bytes, 16, count * rows * cols, path)?;
    Ok((count, rows, cols, data.to_vec()))
}

pub fn read_idx_labels(path: &Path) -> Result<Vec<u8>> {
    let bytes = read_file(path)?;
    check_magic(&bytes, LABEL_MAGIC, path)?;
    let count = header_u32(&bytes, 1, path)? as usize;
    Ok(payload(&bytes, 8, count, path)?.to_vec())
}

/// Writes an IDX image/label pair.
pub fn write_idx(
    images_path: &Path,
    labels_path: &Path,
    rows: usize,
    cols: usize,
    pixels: &[u8],
    labels: &[u8],
) -> Result<()> {
    if pixels.len() != labels.len() * rows * cols {
        return Err(invalid(format!(
            "{} pixels do not match {} labels of {rows}x{cols}",
            pixels.len(),
            labels.len()
        )));
    }
    let to_u32 = |v: usize| u32::try_from(v).map_err(|_| invalid(format!("{v} does not fit an IDX header")));
    let mut img = Vec::with_capacity(16 + pixels.len());
    for field in [IMAGE_MAGIC, to_u32(labels.len())?, to_u32(rows)?, to_u32(cols)?] {
        img.extend_from_slice(&field.to_be_bytes());
    }
    img.extend_from_slice(pixels);
    let mut lab = Vec::with_capacity(8 + labels.len());
    for field in [LABEL_MAGIC, to_u32(labels.len())?] {
        lab.extend_from_slice(&field.to_be_bytes());
    }
    lab.extend_from_slice(labels);
    fs::write(images_path, img).map_err(|source| Error::Io { path: images_path.to_path_buf(), source })?;
    fs::write(labels_path, lab).map_err(|source| Error::Io { path: labels_path.to_path_buf(), source })?;
    Ok(())
}

/// Loads an IDX image/label pair as a clean dataset with pixels scaled to `[0, 1]`.
pub fn load_idx<T: Scalar>(images_path: &Path, labels_path: &Path, options: IdxOptions) -> Result<LabeledDataset<T>> {
    let (count, rows, cols, pixels) = read_idx_images(images_path)?;
    let raw_labels = read_idx_labels(labels_path)?;
    if raw_labels.len() != count {
        return Err(format_err(
            labels_path,
            format!("{} labels but {count} images in {}", raw_labels.len(), images_path.display()),
        ));
    }
    let n = options.limit.map_or(count, |l| l.min(count));
    let d = rows * cols;
    let scale = T::of(255.0);
    let mut inputs = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    let mut dropped = 0usize;
    for i in 0..n {
        let row: Vec<T> = pixels[i * d..(i + 1) * d].iter().map(|&p| T::of(f64::from(p)) / scale).collect();
        let label = usize::from(raw_labels[i]);
        if options.ntk_mode {
            let norm = row.iter().map(|&v| v * v).sum::<T>().sqrt();
            if norm == T::zero() {
                dropped += 1;
                continue;
            }
            inputs.extend(row.into_iter().map(|v| v / norm));
            labels.push(usize::from(label >= 5));
        } else {
            inputs.extend(row);
            labels.push(label);
        }
    }
    if dropped > 0 {
        log::warn!("dropped {dropped} all-zero rows from {}", images_path.display());
    }
    let kept = labels.len();
    let inputs = Array2::from_shape_vec((kept, d), inputs).expect("row-major buffer matches shape");
    let num_classes = if options.ntk_mode {
        2
    } else {
        labels.iter().copied().max().map_or(2, |m| (m + 1).max(2))
    };
    LabeledDataset::new(inputs, labels, num_classes, options.ntk_mode)
}
