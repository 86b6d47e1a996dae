//! Mask and band rasters, their file formats, and elementary pixel statistics.
//!
//! Masks are stored on disk as 8-bit single-channel images (PNG or binary
//! PGM) with water encoded as 255 and land as 0. Band grids are 16-bit PGM
//! (big-endian samples).

use std::fs;
use std::io::Cursor;
use std::path::Path;

use crate::error::{Error, Result};

/// Raw sample value at or above which a loaded pixel counts as water.
pub const LOAD_THRESHOLD: u8 = 128;

/// H×W boolean grid, row-major. `true` is water (white), `false` is land.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    cells: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, cells: Vec<bool>) -> Result<Self> {
        check_dims(width, height, cells.len())?;
        Ok(Self {
            width,
            height,
            cells,
        })
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds a mask from a predicate on `(x, y)`.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        check_dims(width, height, width * height)?;
        let mut cells = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                cells.push(f(x, y));
            }
        }
        Ok(Self {
            width,
            height,
            cells,
        })
    }

    /// Builds a mask from 0/1 (or any nonzero) values.
    pub fn from_bits(width: usize, height: usize, bits: &[u8]) -> Result<Self> {
        Self::new(width, height, bits.iter().map(|&b| b != 0).collect())
    }

    /// Interprets 8-bit samples with the load threshold.
    pub fn from_gray(width: usize, height: usize, samples: &[u8]) -> Result<Self> {
        Self::new(
            width,
            height,
            samples.iter().map(|&v| v >= LOAD_THRESHOLD).collect(),
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    /// Always false; a mask has at least one cell.
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.cells[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.cells[y * self.width + x] = value;
    }

    pub fn same_shape(&self, other: &BinaryMask) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn ensure_same_shape(&self, other: &BinaryMask) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                left_w: self.width,
                left_h: self.height,
                right_w: other.width,
                right_h: other.height,
            })
        }
    }

    pub fn white_count(&self) -> u64 {
        self.cells.iter().filter(|&&c| c).count() as u64
    }

    /// Share of cells that are water.
    pub fn white_fraction(&self) -> f64 {
        self.white_count() as f64 / self.cells.len() as f64
    }

    pub fn complement(&self) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            cells: self.cells.iter().map(|&c| !c).collect(),
        }
    }

    /// `Some(v)` when every cell equals `v`.
    pub fn uniform_value(&self) -> Option<bool> {
        let first = self.cells[0];
        self.cells.iter().all(|&c| c == first).then_some(first)
    }

    /// Pixelwise `self ≤ other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.same_shape(other)
            && self
                .cells
                .iter()
                .zip(&other.cells)
                .all(|(&a, &b)| !a || b)
    }

    /// 0/255 rendering, row-major.
    pub fn to_gray(&self) -> Vec<u8> {
        self.cells.iter().map(|&c| if c { 255 } else { 0 }).collect()
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 || width.checked_mul(height) != Some(len) {
        return Err(Error::Dimensions { width, height });
    }
    Ok(())
}

/// Share of water cells in `mask`.
pub fn white_fraction(mask: &BinaryMask) -> f64 {
    mask.white_fraction()
}

/// Number of cells where `a` and `b` disagree.
pub fn hamming(a: &BinaryMask, b: &BinaryMask) -> Result<u64> {
    a.ensure_same_shape(b)?;
    Ok(a.cells
        .iter()
        .zip(&b.cells)
        .filter(|(x, y)| x != y)
        .count() as u64)
}

/// Single-band reflectance raster with 16-bit samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BandGrid {
    width: usize,
    height: usize,
    cells: Vec<u16>,
}

impl BandGrid {
    pub fn new(width: usize, height: usize, cells: Vec<u16>) -> Result<Self> {
        check_dims(width, height, cells.len())?;
        Ok(Self {
            width,
            height,
            cells,
        })
    }

    pub fn filled(width: usize, height: usize, value: u16) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[u16] {
        &self.cells
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ImageKind {
    Png,
    Pgm,
}

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

fn sniff(bytes: &[u8]) -> Option<ImageKind> {
    if bytes.starts_with(&PNG_SIGNATURE) {
        Some(ImageKind::Png)
    } else if bytes.starts_with(b"P5") {
        Some(ImageKind::Pgm)
    } else {
        None
    }
}

fn kind_from_extension(path: &Path) -> Result<ImageKind> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .as_deref()
    {
        Some("png") => Ok(ImageKind::Png),
        Some("pgm") => Ok(ImageKind::Pgm),
        _ => Err(Error::format(
            path,
            "file extension must be .png or .pgm",
        )),
    }
}

/// Loads an 8-bit single-channel PNG or P5 PGM as a mask.
pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_mask(&bytes, path)
}

/// Decodes mask bytes; `path` is only used in error messages.
pub fn decode_mask(bytes: &[u8], path: &Path) -> Result<BinaryMask> {
    match sniff(bytes) {
        Some(ImageKind::Png) => {
            let (w, h, samples) = decode_png_gray8(bytes, path)?;
            BinaryMask::from_gray(w, h, &samples)
        }
        Some(ImageKind::Pgm) => {
            let pgm = parse_pgm(bytes, path)?;
            if pgm.maxval > 255 {
                return Err(Error::format(
                    path,
                    format!("bit depth 16 (maxval {}), masks must be 8-bit", pgm.maxval),
                ));
            }
            BinaryMask::from_gray(pgm.width, pgm.height, pgm.data)
        }
        None => Err(Error::format(
            path,
            "not a PNG or binary PGM (P5) file",
        )),
    }
}

/// Writes `mask` as 0/255 8-bit grayscale; the format follows the extension.
///
/// The image is fully encoded in memory before the single write, so a failed
/// call leaves no file behind.
pub fn save_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_mask(mask, kind_from_extension(path)?)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn encode_mask(mask: &BinaryMask, kind: ImageKind) -> Result<Vec<u8>> {
    let gray = mask.to_gray();
    match kind {
        ImageKind::Pgm => {
            let mut out = format!("P5\n{} {}\n255\n", mask.width, mask.height).into_bytes();
            out.extend_from_slice(&gray);
            Ok(out)
        }
        ImageKind::Png => encode_png_gray8(mask.width, mask.height, &gray),
    }
}

/// Encodes a mask as PNG bytes.
pub fn mask_to_png(mask: &BinaryMask) -> Result<Vec<u8>> {
    encode_mask(mask, ImageKind::Png)
}

/// Encodes a mask as P5 PGM bytes.
pub fn mask_to_pgm(mask: &BinaryMask) -> Result<Vec<u8>> {
    encode_mask(mask, ImageKind::Pgm)
}

/// Loads a band grid from a P5 PGM with 8- or 16-bit samples.
pub fn load_band(path: impl AsRef<Path>) -> Result<BandGrid> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if sniff(&bytes) != Some(ImageKind::Pgm) {
        return Err(Error::format(path, "band grids must be binary PGM (P5)"));
    }
    let pgm = parse_pgm(&bytes, path)?;
    let cells = if pgm.maxval > 255 {
        pgm.data
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    } else {
        pgm.data.iter().map(|&v| v as u16).collect()
    };
    BandGrid::new(pgm.width, pgm.height, cells)
}

/// Writes a band grid as 16-bit P5 PGM (maxval 65535, big-endian).
pub fn save_band(grid: &BandGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = format!("P5\n{} {}\n65535\n", grid.width, grid.height).into_bytes();
    for v in &grid.cells {
        out.extend_from_slice(&v.to_be_bytes());
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

struct Pgm<'a> {
    width: usize,
    height: usize,
    maxval: u32,
    data: &'a [u8],
}

fn parse_pgm<'a>(bytes: &'a [u8], path: &Path) -> Result<Pgm<'a>> {
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in fields.iter_mut() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|b| b.is_ascii_digit()) {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(path, "malformed PGM header"))?;
    }
    // exactly one whitespace byte separates the header from the raster
    if !bytes.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
        return Err(Error::format(path, "malformed PGM header"));
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::format(path, format!("PGM maxval {maxval} out of range")));
    }
    let (width, height) = (width as usize, height as usize);
    let sample_bytes = if maxval > 255 { 2 } else { 1 };
    let need = width * height * sample_bytes;
    let data = bytes
        .get(pos..pos + need)
        .ok_or_else(|| Error::format(path, "truncated PGM raster"))?;
    Ok(Pgm {
        width,
        height,
        maxval,
        data,
    })
}

fn decode_png_gray8(bytes: &[u8], path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    let png_err = |e: png::DecodingError| Error::format(path, e.to_string());
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder.read_info().map_err(png_err)?;
    let (color, depth) = {
        let info = reader.info();
        (info.color_type, info.bit_depth)
    };
    if color != png::ColorType::Grayscale {
        return Err(Error::format(
            path,
            format!("color type {color:?}, expected single-channel grayscale"),
        ));
    }
    if depth != png::BitDepth::Eight {
        return Err(Error::format(
            path,
            format!("bit depth {}, expected 8", depth as u8),
        ));
    }
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::format(path, "image too large"))?;
    let mut buf = vec![0u8; size];
    let frame = reader.next_frame(&mut buf).map_err(png_err)?;
    let (w, h) = (frame.width as usize, frame.height as usize);
    let samples = buf
        .chunks(frame.line_size)
        .take(h)
        .flat_map(|row| &row[..w])
        .copied()
        .collect();
    Ok((w, h, samples))
}

fn encode_png_gray8(width: usize, height: usize, gray: &[u8]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, width as u32, height as u32);
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::Eight);
        let enc_err = |e: png::EncodingError| Error::Internal(format!("png encoding: {e}"));
        let mut writer = encoder.write_header().map_err(enc_err)?;
        writer.write_image_data(gray).map_err(enc_err)?;
        writer.finish().map_err(enc_err)?;
    }
    Ok(out)
}
