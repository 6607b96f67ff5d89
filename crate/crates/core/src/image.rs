//! Grayscale image container and deterministic resampling.
//!
//! All pixel math in this crate runs on 64-bit floats in `[0, 1]`;
//! quantization to 8 bits happens only at file boundaries (see [`crate::io`]).

use crate::error::{Error, Result};

/// A 2-D float intensity grid with every value in `[0, 1]`.
///
/// Data is stored row-major: index `y * width + x`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    /// Builds an image from row-major data, validating dimensions and range.
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Shape(format!(
                "image dimensions must be at least 1x1, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::Shape(format!(
                "data length {} does not match {width}x{height}",
                data.len()
            )));
        }
        for &v in &data {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!(
                    "intensity {v} outside [0, 1]"
                )));
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Constant image of the given intensity.
    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image by evaluating `f(x, y)`; values are validated, not clamped.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Errors unless `other` has identical dimensions.
    pub fn check_same_dims(&self, other: &GrayImage) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(())
    }
}

/// A signed (unbounded) float grid with the same row-major layout as [`GrayImage`].
///
/// Used for gradient components, filter responses and per-pixel loss gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Grid {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Shape(format!(
                "data length {} does not match {width}x{height}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("grid contains non-finite values".into()));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Maps absolute values to `[0, 1]` by dividing by the maximum magnitude.
    /// An all-zero grid maps to an all-zero image.
    pub fn normalized_magnitude(&self) -> GrayImage {
        let max = self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let data = if max == 0.0 {
            vec![0.0; self.data.len()]
        } else {
            self.data.iter().map(|v| v.abs() / max).collect()
        };
        GrayImage {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

impl From<GrayImage> for Grid {
    fn from(img: GrayImage) -> Self {
        Grid {
            width: img.width,
            height: img.height,
            data: img.data,
        }
    }
}

/// Catmull-Rom cubic kernel (a = -0.5).
fn catmull_rom(d: f64) -> f64 {
    const A: f64 = -0.5;
    let d = d.abs();
    if d <= 1.0 {
        (A + 2.0) * d * d * d - (A + 3.0) * d * d + 1.0
    } else if d < 2.0 {
        A * d * d * d - 5.0 * A * d * d + 8.0 * A * d - 4.0 * A
    } else {
        0.0
    }
}

/// Bicubic resample with the Catmull-Rom kernel and edge-clamp sampling.
///
/// Output pixel centers map into source coordinates via
/// `s = (d + 0.5) * src/dst - 0.5`; samples outside the image clamp to the
/// nearest edge pixel. Results are clamped to `[0, 1]`. Resizing to the
/// original dimensions is the identity map.
pub fn resize_bicubic(img: &GrayImage, width: usize, height: usize) -> Result<GrayImage> {
    if width == 0 || height == 0 {
        return Err(Error::Shape(format!(
            "target dimensions must be at least 1x1, got {width}x{height}"
        )));
    }
    let (sw, sh) = img.dims();
    let scale_x = sw as f64 / width as f64;
    let scale_y = sh as f64 / height as f64;

    let clamp = |v: isize, hi: usize| -> usize { v.clamp(0, hi as isize - 1) as usize };

    let mut data = Vec::with_capacity(width * height);
    for oy in 0..height {
        let sy = (oy as f64 + 0.5) * scale_y - 0.5;
        let y0 = sy.floor();
        let ty = sy - y0;
        let wy = [
            catmull_rom(ty + 1.0),
            catmull_rom(ty),
            catmull_rom(1.0 - ty),
            catmull_rom(2.0 - ty),
        ];
        for ox in 0..width {
            let sx = (ox as f64 + 0.5) * scale_x - 0.5;
            let x0 = sx.floor();
            let tx = sx - x0;
            let wx = [
                catmull_rom(tx + 1.0),
                catmull_rom(tx),
                catmull_rom(1.0 - tx),
                catmull_rom(2.0 - tx),
            ];
            let mut acc = 0.0;
            for (j, wyj) in wy.iter().enumerate() {
                let py = clamp(y0 as isize - 1 + j as isize, sh);
                for (i, wxi) in wx.iter().enumerate() {
                    let px = clamp(x0 as isize - 1 + i as isize, sw);
                    acc += wyj * wxi * img.get(px, py);
                }
            }
            data.push(acc.clamp(0.0, 1.0));
        }
    }
    Ok(GrayImage {
        width,
        height,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent bicubic evaluation: direct non-separable 4x4 weighting with
    /// the Catmull-Rom formula written out inline.
    fn bicubic_oracle(img: &GrayImage, w: usize, h: usize) -> Vec<f64> {
        fn k(d: f64) -> f64 {
            let a = -0.5_f64;
            let x = d.abs();
            if x <= 1.0 {
                ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0
            } else if x < 2.0 {
                ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a
            } else {
                0.0
            }
        }
        let (sw, sh) = img.dims();
        let mut out = Vec::new();
        for oy in 0..h {
            for ox in 0..w {
                let sx = (ox as f64 + 0.5) * sw as f64 / w as f64 - 0.5;
                let sy = (oy as f64 + 0.5) * sh as f64 / h as f64 - 0.5;
                let bx = sx.floor() as isize;
                let by = sy.floor() as isize;
                let mut acc = 0.0;
                for dy in -1..=2_isize {
                    for dx in -1..=2_isize {
                        let px = (bx + dx).clamp(0, sw as isize - 1) as usize;
                        let py = (by + dy).clamp(0, sh as isize - 1) as usize;
                        let weight = k(sx - (bx + dx) as f64) * k(sy - (by + dy) as f64);
                        acc += weight * img.get(px, py);
                    }
                }
                out.push(acc.clamp(0.0, 1.0));
            }
        }
        out
    }

    #[test]
    fn rejects_out_of_range_and_bad_length() {
        assert!(matches!(
            GrayImage::new(2, 2, vec![0.0, 0.5, 1.0, 1.5]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            GrayImage::new(2, 2, vec![0.0; 3]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            GrayImage::new(0, 2, vec![]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            GrayImage::new(2, 2, vec![0.0, f64::NAN, 0.0, 0.0]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn resize_same_dims_is_identity() {
        let img = GrayImage::from_fn(7, 5, |x, y| ((x * 13 + y * 7) % 11) as f64 / 10.0).unwrap();
        let out = resize_bicubic(&img, 7, 5).unwrap();
        assert_eq!(img, out);
    }

    #[test]
    fn resize_constant_stays_constant() {
        let img = GrayImage::constant(5, 4, 0.37).unwrap();
        let out = resize_bicubic(&img, 13, 9).unwrap();
        for &v in out.as_slice() {
            assert!((v - 0.37).abs() < 1e-12);
        }
    }

    #[test]
    fn checkerboard_upscale_matches_oracle() {
        let img = GrayImage::new(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let out = resize_bicubic(&img, 8, 8).unwrap();
        let expect = bicubic_oracle(&img, 8, 8);
        for (a, b) in out.as_slice().iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn downscale_matches_oracle() {
        let img = GrayImage::from_fn(9, 7, |x, y| ((x * 5 + y * 3) % 13) as f64 / 12.0).unwrap();
        let out = resize_bicubic(&img, 4, 3).unwrap();
        let expect = bicubic_oracle(&img, 4, 3);
        for (a, b) in out.as_slice().iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn normalized_magnitude_handles_zero_grid() {
        let g = Grid::zeros(3, 3);
        let m = g.normalized_magnitude();
        assert!(m.as_slice().iter().all(|&v| v == 0.0));
    }
}
