//! Ingestion of precomputed HED soft edge maps.
//!
//! The HED network itself runs elsewhere; this side only loads its output
//! probability maps and brings them to the working resolution.

use std::path::Path;

use crate::error::Result;
use crate::image::{resize_bicubic, GrayImage};
use crate::io::load_image_grayscale;

/// Loads a grayscale soft edge map and bicubic-resizes it to the target
/// dimensions when they differ. Values stay in `[0, 1]`.
pub fn ingest_hed(path: impl AsRef<Path>, target_w: usize, target_h: usize) -> Result<GrayImage> {
    let map = load_image_grayscale(path)?;
    if map.dims() == (target_w, target_h) {
        Ok(map)
    } else {
        resize_bicubic(&map, target_w, target_h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::io::save_image;

    #[test]
    fn ingest_at_native_size_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hed.pgm");
        let map = GrayImage::from_fn(64, 64, |x, y| ((x + y) % 256) as f64 / 255.0).unwrap();
        save_image(&map, &path).unwrap();
        let got = ingest_hed(&path, 64, 64).unwrap();
        assert_eq!(got, map);
    }

    #[test]
    fn ingest_resizes_to_target() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hed.pgm");
        let map = GrayImage::from_fn(32, 32, |x, _| x as f64 / 31.0).unwrap();
        save_image(&map, &path).unwrap();
        let got = ingest_hed(&path, 64, 64).unwrap();
        let expect = resize_bicubic(&crate::io::load_image(&path).unwrap(), 64, 64).unwrap();
        assert_eq!(got, expect);
    }

    #[test]
    fn missing_file_is_io_error_naming_the_path() {
        let err = ingest_hed("/nonexistent/hed.pgm", 8, 8).unwrap_err();
        match err {
            Error::Io { path, .. } => {
                assert!(path.to_string_lossy().contains("hed.pgm"));
            }
            other => panic!("expected Io error, got {other:?}"),
        }
    }
}
