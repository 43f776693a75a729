//! Grayscale images, binary edge maps and raster file I/O (PGM P2/P5, PNG).
//!
//! Intensities stay real-valued in `[0, 255]` through the processing chain;
//! quantization (round half up, clamp) happens only when a file is written.

use std::fs;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

pub const MAX_VALUE: u8 = 255;

/// A grayscale image with real-valued intensities in `[0, 255]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::Dimension(format!(
                "data length {} does not match {width}x{height}",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=255.0).contains(*v)) {
            return Err(Error::InvalidArgument(format!(
                "intensity {v} outside [0, 255]"
            )));
        }
        Ok(GrayImage {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        GrayImage::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Pixel lookup with replicate (clamp-to-edge) border handling.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    /// Maximum pixel intensity over the whole image.
    pub fn max_intensity(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    /// Quantize to 8-bit: round half up, clamp to `[0, 255]`.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.data.iter().map(|&v| quantize(v)).collect()
    }
}

#[inline]
pub fn quantize(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// A binary image whose values are exactly 0 or 255.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl EdgeMap {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension(format!(
                "edge map dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::Dimension(format!(
                "data length {} does not match {width}x{height}",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|&&v| v != 0 && v != MAX_VALUE) {
            return Err(Error::InvalidArgument(format!(
                "edge map value {v} is neither 0 nor {MAX_VALUE}"
            )));
        }
        Ok(EdgeMap {
            width,
            height,
            data,
        })
    }

    pub fn from_predicate(
        width: usize,
        height: usize,
        f: impl Fn(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(if f(x, y) { MAX_VALUE } else { 0 });
            }
        }
        EdgeMap::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn is_edge(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x] == MAX_VALUE
    }

    pub fn edge_count(&self) -> usize {
        self.data.iter().filter(|&&v| v == MAX_VALUE).count()
    }
}

/// Convert packed RGB triples to grayscale using BT.601 luma weights.
pub fn to_grayscale(rgb: &[[f64; 3]], width: usize, height: usize) -> Result<GrayImage> {
    if rgb.len() != width * height {
        return Err(Error::Dimension(format!(
            "pixel count {} does not match {width}x{height}",
            rgb.len()
        )));
    }
    for px in rgb {
        if px.iter().any(|c| !(0.0..=255.0).contains(c)) {
            return Err(Error::InvalidArgument(format!(
                "channel value outside [0, 255] in {px:?}"
            )));
        }
    }
    let data = rgb
        .iter()
        .map(|&[r, g, b]| 0.299 * r + 0.587 * g + 0.114 * b)
        .collect();
    GrayImage::new(width, height, data)
}

/// Load a grayscale image from a PGM (P2/P5) or PNG file. RGB PNGs are
/// converted with [`to_grayscale`].
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    match ext.as_deref() {
        Some("pgm") => load_pgm(path),
        Some("png") => load_png(path),
        other => Err(Error::UnsupportedFormat(format!(
            "unknown image extension {other:?} for {}",
            path.display()
        ))),
    }
}

/// Save a grayscale image as PGM (P5) or PNG, selected by extension.
pub fn save_image(path: impl AsRef<Path>, img: &GrayImage) -> Result<()> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    match ext.as_deref() {
        Some("pgm") => save_pgm(path, img.width, img.height, &img.to_bytes()),
        Some("png") => save_png(path, img.width, img.height, &img.to_bytes()),
        other => Err(Error::UnsupportedFormat(format!(
            "unknown image extension {other:?} for {}",
            path.display()
        ))),
    }
}

/// Save an edge map in the same formats as [`save_image`].
pub fn save_edge_map(path: impl AsRef<Path>, map: &EdgeMap) -> Result<()> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    match ext.as_deref() {
        Some("pgm") => save_pgm(path, map.width, map.height, &map.data),
        Some("png") => save_png(path, map.width, map.height, &map.data),
        other => Err(Error::UnsupportedFormat(format!(
            "unknown image extension {other:?} for {}",
            path.display()
        ))),
    }
}

/// Load a binary edge map; any pixel at exactly 255 is an edge, anything else
/// must be 0.
pub fn load_edge_map(path: impl AsRef<Path>) -> Result<EdgeMap> {
    let path = path.as_ref();
    let img = load_image(path)?;
    let data: Vec<u8> = img.to_bytes();
    if let Some(v) = data.iter().find(|&&v| v != 0 && v != MAX_VALUE) {
        return Err(Error::CorruptImage {
            path: path.to_path_buf(),
            reason: format!("expected binary mask but found value {v}"),
        });
    }
    EdgeMap::new(img.width, img.height, data)
}

fn corrupt(path: &Path, reason: impl Into<String>) -> Error {
    Error::CorruptImage {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn load_pgm(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let (magic, rest) =
        parse_pgm_header_token(&bytes).ok_or_else(|| corrupt(path, "missing magic number"))?;
    let magic = std::str::from_utf8(magic).map_err(|_| corrupt(path, "non-ASCII magic"))?;
    if magic != "P2" && magic != "P5" {
        return Err(Error::UnsupportedFormat(format!(
            "PGM magic {magic:?} in {} (only P2/P5 supported)",
            path.display()
        )));
    }
    let mut cursor = rest;
    let mut header = [0usize; 3]; // width, height, maxval
    for slot in header.iter_mut() {
        let (tok, rest) =
            parse_pgm_header_token(cursor).ok_or_else(|| corrupt(path, "truncated header"))?;
        let tok = std::str::from_utf8(tok).map_err(|_| corrupt(path, "non-ASCII header"))?;
        *slot = tok
            .parse()
            .map_err(|_| corrupt(path, format!("bad header field {tok:?}")))?;
        cursor = rest;
    }
    let [width, height, maxval] = header;
    if maxval != 255 {
        return Err(Error::UnsupportedFormat(format!(
            "PGM maxval {maxval} in {} (only 255 supported)",
            path.display()
        )));
    }
    if width == 0 || height == 0 {
        return Err(corrupt(
            path,
            format!("degenerate dimensions {width}x{height}"),
        ));
    }
    let n = width * height;
    let data: Vec<f64> = if magic == "P5" {
        // single whitespace byte separates header from raster
        if cursor.is_empty() {
            return Err(corrupt(path, "missing raster"));
        }
        let raster = &cursor[1..];
        if raster.len() < n {
            return Err(corrupt(
                path,
                format!("raster has {} bytes, expected {n}", raster.len()),
            ));
        }
        raster[..n].iter().map(|&b| b as f64).collect()
    } else {
        let text = std::str::from_utf8(cursor).map_err(|_| corrupt(path, "non-ASCII P2 data"))?;
        let values: Vec<f64> = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(|l| l.split_ascii_whitespace())
            .map(|tok| {
                tok.parse::<u32>()
                    .map(|v| v as f64)
                    .map_err(|_| corrupt(path, format!("bad sample {tok:?}")))
            })
            .collect::<Result<_>>()?;
        if values.len() < n {
            return Err(corrupt(
                path,
                format!("raster has {} samples, expected {n}", values.len()),
            ));
        }
        values[..n].to_vec()
    };
    if data.iter().any(|&v| v > 255.0) {
        return Err(corrupt(path, "sample above maxval"));
    }
    GrayImage::new(width, height, data)
}

/// Returns the next whitespace-delimited token (skipping `#` comments) and
/// the remaining bytes starting right after the token.
fn parse_pgm_header_token(bytes: &[u8]) -> Option<(&[u8], &[u8])> {
    let mut i = 0;
    loop {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        break;
    }
    if i >= bytes.len() {
        return None;
    }
    let start = i;
    while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
        i += 1;
    }
    Some((&bytes[start..i], &bytes[i..]))
}

fn save_pgm(path: &Path, width: usize, height: usize, bytes: &[u8]) -> Result<()> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(bytes);
    fs::write(path, out).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn load_png(path: &Path) -> Result<GrayImage> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let decoded = ::image::load_from_memory_with_format(&bytes, ::image::ImageFormat::Png)
        .map_err(|e| corrupt(path, e.to_string()))?;
    let (width, height) = (decoded.width() as usize, decoded.height() as usize);
    if width == 0 || height == 0 {
        return Err(corrupt(path, "degenerate dimensions"));
    }
    match decoded {
        ::image::DynamicImage::ImageLuma8(img) => {
            let data = img.into_raw().into_iter().map(|b| b as f64).collect();
            GrayImage::new(width, height, data)
        }
        other => {
            let rgb = other.to_rgb8();
            let pixels: Vec<[f64; 3]> = rgb
                .pixels()
                .map(|p| [p.0[0] as f64, p.0[1] as f64, p.0[2] as f64])
                .collect();
            to_grayscale(&pixels, width, height)
        }
    }
}

fn save_png(path: &Path, width: usize, height: usize, bytes: &[u8]) -> Result<()> {
    let img: ::image::GrayImage =
        ::image::ImageBuffer::from_raw(width as u32, height as u32, bytes.to_vec())
            .expect("buffer length matches dimensions");
    img.save_with_format(path, ::image::ImageFormat::Png)
        .map_err(|e| match e {
            ::image::ImageError::IoError(io) => {
                Error::io(format!("writing {}", path.display()), io)
            }
            other => Error::UnsupportedFormat(other.to_string()),
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grayscale_of_gray_is_identity() {
        let rgb = vec![[42.0, 42.0, 42.0]; 6];
        let img = to_grayscale(&rgb, 3, 2).unwrap();
        for &v in img.data() {
            assert!((v - 42.0).abs() < 1e-12);
        }
    }

    #[test]
    fn grayscale_of_pure_red() {
        // hand oracle: 0.299 * 255 = 76.245
        let img = to_grayscale(&[[255.0, 0.0, 0.0]], 1, 1).unwrap();
        assert!((img.get(0, 0) - 76.245).abs() < 1e-12);
    }

    #[test]
    fn grayscale_is_convex_combination() {
        let rgb = [[10.0, 200.0, 55.0], [0.0, 255.0, 128.0]];
        let img = to_grayscale(&rgb, 2, 1).unwrap();
        for (px, &g) in rgb.iter().zip(img.data()) {
            let lo = px.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = px.iter().cloned().fold(0.0, f64::max);
            assert!(g >= lo - 1e-12 && g <= hi + 1e-12);
        }
    }

    #[test]
    fn empty_image_rejected() {
        assert!(GrayImage::new(0, 5, vec![]).is_err());
        assert!(to_grayscale(&[], 0, 4).is_err());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        assert!(to_grayscale(&[[0.0; 3]; 5], 2, 2).is_err());
        assert!(GrayImage::new(2, 2, vec![0.0; 5]).is_err());
    }

    #[test]
    fn max_intensity_basics() {
        let img = GrayImage::new(2, 2, vec![0.0; 4]).unwrap();
        assert_eq!(img.max_intensity(), 0.0);
        let img = GrayImage::new(2, 2, vec![0.0, 200.0, 0.0, 0.0]).unwrap();
        assert_eq!(img.max_intensity(), 200.0);
    }

    #[test]
    fn edge_map_rejects_non_binary() {
        assert!(EdgeMap::new(2, 1, vec![0, 254]).is_err());
        assert!(EdgeMap::new(2, 1, vec![0, 255]).is_ok());
    }

    #[test]
    fn quantize_rounds_half_up() {
        assert_eq!(quantize(127.5), 128);
        assert_eq!(quantize(127.49), 127);
        assert_eq!(quantize(255.4), 255);
        assert_eq!(quantize(300.0), 255);
    }

    #[test]
    fn pgm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.pgm");
        let img = GrayImage::new(3, 3, (0..9).map(|v| v as f64).collect()).unwrap();
        save_image(&path, &img).unwrap();
        let back = load_image(&path).unwrap();
        assert_eq!(img, back);
    }

    #[test]
    fn p5_intensities_equal_raw_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("raw.pgm");
        let mut bytes = b"P5\n2 2\n255\n".to_vec();
        bytes.extend_from_slice(&[7, 8, 9, 250]);
        fs::write(&path, bytes).unwrap();
        let img = load_image(&path).unwrap();
        assert_eq!(img.data(), &[7.0, 8.0, 9.0, 250.0]);
    }

    #[test]
    fn p2_with_comments() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ascii.pgm");
        fs::write(&path, "P2\n# comment\n2 2\n255\n0 10 # trailing\n20 30\n").unwrap();
        let img = load_image(&path).unwrap();
        assert_eq!(img.data(), &[0.0, 10.0, 20.0, 30.0]);
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.pgm");
        fs::write(&path, "P5\n10 10\n255\n\x01\x02").unwrap();
        match load_image(&path) {
            Err(Error::CorruptImage { .. }) => {}
            other => panic!("expected corrupt-image error, got {other:?}"),
        }
    }

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.png");
        let img = GrayImage::new(4, 2, (0..8).map(|v| (v * 30) as f64).collect()).unwrap();
        save_image(&path, &img).unwrap();
        assert_eq!(load_image(&path).unwrap(), img);
    }
}
