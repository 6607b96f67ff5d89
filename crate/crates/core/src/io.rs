//! Raster file IO: binary PGM (P5) and PNG.
//!
//! PGM is the canonical golden-test format since it has no compressor
//! variance. Intensities quantize round-to-nearest to 8 bits on save and map
//! back as `v / maxval` on load. Color PNG inputs convert to luma with BT.601
//! weights (0.299, 0.587, 0.114).

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Round-to-nearest 8-bit quantization (half away from zero, so 0.5 -> 128).
#[inline]
pub fn quantize_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Loads a PNG or binary PGM image as grayscale intensities in `[0, 1]`.
///
/// The format is chosen by file extension (`.pgm` vs anything else, which is
/// handed to the PNG decoder). 8-bit gray values map to `v / 255`; color
/// inputs are converted with BT.601 luma weights.
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    if has_extension(path, "pgm") {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        decode_pgm(&bytes).map_err(|e| prefix_path(e, path))
    } else {
        let (gray, _) = load_png(path)?;
        Ok(gray)
    }
}

/// Loads an image requiring grayscale content: PGM, or PNG with an 8-bit
/// luma color type. Color or paletted PNGs are rejected.
pub fn load_image_grayscale(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    if has_extension(path, "pgm") {
        return load_image(path);
    }
    let (gray, was_gray) = load_png(path)?;
    if !was_gray {
        return Err(Error::Format(format!(
            "{}: expected a grayscale image",
            path.display()
        )));
    }
    Ok(gray)
}

/// Saves an image with 8-bit quantization; format chosen by extension
/// (`.pgm` -> binary PGM, otherwise PNG).
pub fn save_image(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if has_extension(path, "pgm") {
        fs::write(path, encode_pgm(img)).map_err(|e| Error::io(path, e))
    } else {
        let (w, h) = img.dims();
        let bytes: Vec<u8> = img.as_slice().iter().map(|&v| quantize_u8(v)).collect();
        let buf = ::image::GrayImage::from_raw(w as u32, h as u32, bytes)
            .expect("buffer length matches dimensions");
        buf.save(path)
            .map_err(|e| Error::Format(format!("{}: png encode failed: {e}", path.display())))
    }
}

fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension()
        .map(|e| e.eq_ignore_ascii_case(ext))
        .unwrap_or(false)
}

fn prefix_path(err: Error, path: &Path) -> Error {
    match err {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        Error::Io { path: p, source } if p.as_os_str().is_empty() => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    }
}

fn truncated(detail: String) -> Error {
    Error::Io {
        path: std::path::PathBuf::new(),
        source: std::io::Error::new(std::io::ErrorKind::UnexpectedEof, detail),
    }
}

/// Encodes a binary PGM (P5, maxval 255).
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let (w, h) = img.dims();
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend(img.as_slice().iter().map(|&v| quantize_u8(v)));
    out
}

/// Decodes a binary PGM (P5). Maxval up to 255 is accepted; values map to
/// `v / maxval`.
pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    fn skip_ws(bytes: &[u8], pos: &mut usize) {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            } else {
                return;
            }
        }
    }

    fn read_token(bytes: &[u8], pos: &mut usize) -> Result<usize> {
        skip_ws(bytes, pos);
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if start == *pos {
            if *pos >= bytes.len() {
                return Err(truncated("PGM header ends early".into()));
            }
            return Err(Error::Format("malformed PGM header".into()));
        }
        std::str::from_utf8(&bytes[start..*pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format("malformed PGM header token".into()))
    }

    if bytes.len() < 2 || &bytes[0..2] != b"P5" {
        return Err(Error::Format("not a binary PGM (missing P5 magic)".into()));
    }
    let mut pos = 2;
    let width = read_token(bytes, &mut pos)?;
    let height = read_token(bytes, &mut pos)?;
    let maxval = read_token(bytes, &mut pos)?;
    if width == 0 || height == 0 {
        return Err(Error::Format("PGM dimensions must be at least 1x1".into()));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::Format(format!(
            "unsupported PGM maxval {maxval} (expected 1..=255)"
        )));
    }
    // Exactly one whitespace byte separates the header from the payload.
    if pos >= bytes.len() {
        return Err(truncated("PGM ends at the header".into()));
    }
    if !bytes[pos].is_ascii_whitespace() {
        return Err(Error::Format("missing separator after PGM header".into()));
    }
    pos += 1;
    let expected = width * height;
    let payload = &bytes[pos..];
    if payload.len() < expected {
        return Err(truncated(format!(
            "PGM payload has {} of {expected} bytes",
            payload.len()
        )));
    }
    let max = maxval as f64;
    let data = payload[..expected]
        .iter()
        .map(|&b| b as f64 / max)
        .collect();
    GrayImage::new(width, height, data)
}

/// Decodes a PNG, returning the gray image and whether the source color type
/// was already grayscale.
fn load_png(path: &Path) -> Result<(GrayImage, bool)> {
    let reader = ::image::ImageReader::open(path).map_err(|e| Error::io(path, e))?;
    let decoded = reader
        .decode()
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    match decoded {
        ::image::DynamicImage::ImageLuma8(buf) => {
            let data = buf.as_raw().iter().map(|&v| v as f64 / 255.0).collect();
            Ok((GrayImage::new(w, h, data)?, true))
        }
        other => {
            let rgb = other.to_rgb8();
            let data = rgb
                .pixels()
                .map(|p| {
                    (0.299 * p.0[0] as f64 + 0.587 * p.0[1] as f64 + 0.114 * p.0[2] as f64) / 255.0
                })
                .map(|v| v.clamp(0.0, 1.0))
                .collect();
            Ok((GrayImage::new(w, h, data)?, false))
        }
    }
}
