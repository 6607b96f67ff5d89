//! The staged Canny pipeline: Gaussian blur, CLAHE, median-based
//! auto-thresholds, Sobel gradients, 4-direction non-maximum suppression,
//! double threshold with 8-connected hysteresis, and morphological closing.

use serde::{Deserialize, Serialize};

use super::clahe_u8;
use crate::error::{Error, Result};
use crate::filter::{
    correlate_replicate, gaussian_blur, sigma_from_kernel_size, sobel_x_kernel, sobel_y_kernel,
};
use crate::image::{GrayImage, Grid};

/// Parameters of the Canny stage chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CannyParams {
    /// Gaussian blur kernel size (odd).
    pub gaussian_kernel: usize,
    /// CLAHE clip limit.
    pub clahe_clip_limit: f64,
    /// CLAHE tile count per axis.
    pub clahe_tiles: usize,
    /// Low hysteresis threshold as a fraction of the median intensity.
    pub low_factor: f64,
    /// High hysteresis threshold as a fraction of the median intensity.
    pub high_factor: f64,
    /// Elliptical closing kernel size (odd).
    pub closing_kernel: usize,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self {
            gaussian_kernel: 7,
            clahe_clip_limit: 2.0,
            clahe_tiles: 8,
            low_factor: 0.66,
            high_factor: 1.33,
            closing_kernel: 5,
        }
    }
}

impl CannyParams {
    pub fn validate(&self) -> Result<()> {
        if self.gaussian_kernel < 3 || self.gaussian_kernel.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "gaussian_kernel must be odd and >= 3, got {}",
                self.gaussian_kernel
            )));
        }
        if self.closing_kernel < 3 || self.closing_kernel.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "closing_kernel must be odd and >= 3, got {}",
                self.closing_kernel
            )));
        }
        if self.clahe_tiles == 0 {
            return Err(Error::Config("clahe_tiles must be >= 1".into()));
        }
        if !(self.low_factor > 0.0 && self.low_factor <= self.high_factor) {
            return Err(Error::Config(format!(
                "need 0 < low_factor <= high_factor, got {} and {}",
                self.low_factor, self.high_factor
            )));
        }
        Ok(())
    }
}

/// Runs the full Canny stage chain, producing a binary `{0, 1}` edge map.
///
/// Stage order: Gaussian blur (sigma from the kernel-size rule) -> map to
/// 8 bits -> CLAHE -> thresholds `low/high = factor * median` of the CLAHE
/// output -> Sobel gradients -> non-maximum suppression over four quantized
/// directions -> double threshold with strict comparisons and 8-connected
/// hysteresis -> closing with an elliptical structuring element.
///
/// Constant inputs produce the all-zero map: gradients vanish and the strict
/// threshold comparisons reject zero magnitudes even when the thresholds
/// degenerate to zero.
pub fn canny(img: &GrayImage, params: &CannyParams) -> Result<GrayImage> {
    params.validate()?;
    let (w, h) = img.dims();

    let blurred = gaussian_blur(
        &Grid::from(img.clone()),
        params.gaussian_kernel,
        sigma_from_kernel_size(params.gaussian_kernel),
    );
    let bytes: Vec<u8> = blurred
        .as_slice()
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    let equalized = clahe_u8(&bytes, w, h, params.clahe_clip_limit, params.clahe_tiles);

    let med = median_u8(&equalized);
    let low = params.low_factor * med;
    let high = params.high_factor * med;

    let eq_grid = Grid::new(w, h, equalized.iter().map(|&v| v as f64).collect())?;
    let gx = correlate_replicate(&eq_grid, &sobel_x_kernel());
    let gy = correlate_replicate(&eq_grid, &sobel_y_kernel());
    let mut mag = Grid::zeros(w, h);
    for i in 0..w * h {
        mag.as_mut_slice()[i] = gx.as_slice()[i].hypot(gy.as_slice()[i]);
    }

    let thinned = non_maximum_suppression(&mag, &gx, &gy);
    let linked = hysteresis(&thinned, low, high);
    let closed = closing(&linked, w, h, params.closing_kernel);

    GrayImage::new(w, h, closed.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect())
}

/// Median over 8-bit values; even-length inputs average the two middle
/// elements.
fn median_u8(values: &[u8]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    (sorted[(n - 1) / 2] as f64 + sorted[n / 2] as f64) / 2.0
}

/// Keeps only local maxima along the quantized gradient direction; the
/// one-pixel border is suppressed.
fn non_maximum_suppression(mag: &Grid, gx: &Grid, gy: &Grid) -> Grid {
    let (w, h) = mag.dims();
    let mut out = Grid::zeros(w, h);
    if w < 3 || h < 3 {
        return out;
    }
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let m = mag.get(x, y);
            if m == 0.0 {
                continue;
            }
            let mut angle = gy.get(x, y).atan2(gx.get(x, y)).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            let (n1, n2) = if !(22.5..157.5).contains(&angle) {
                (mag.get(x - 1, y), mag.get(x + 1, y))
            } else if angle < 67.5 {
                (mag.get(x + 1, y + 1), mag.get(x - 1, y - 1))
            } else if angle < 112.5 {
                (mag.get(x, y - 1), mag.get(x, y + 1))
            } else {
                (mag.get(x - 1, y + 1), mag.get(x + 1, y - 1))
            };
            if m >= n1 && m >= n2 {
                out.set(x, y, m);
            }
        }
    }
    out
}

/// Strict double threshold plus 8-connected hysteresis linking.
fn hysteresis(mag: &Grid, low: f64, high: f64) -> Vec<bool> {
    let (w, h) = mag.dims();
    let mut out = vec![false; w * h];
    let mut stack = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if mag.get(x, y) > high && !out[y * w + x] {
                out[y * w + x] = true;
                stack.push((x, y));
                while let Some((cx, cy)) = stack.pop() {
                    for dy in -1..=1_isize {
                        for dx in -1..=1_isize {
                            if dx == 0 && dy == 0 {
                                continue;
                            }
                            let nx = cx as isize + dx;
                            let ny = cy as isize + dy;
                            if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                                continue;
                            }
                            let (nx, ny) = (nx as usize, ny as usize);
                            if !out[ny * w + nx] && mag.get(nx, ny) > low {
                                out[ny * w + nx] = true;
                                stack.push((nx, ny));
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Elliptical structuring element mask (odd size), matching the usual
/// rasterized-ellipse construction.
pub(crate) fn elliptical_element(size: usize) -> Vec<bool> {
    let r = (size / 2) as isize;
    let mut mask = vec![false; size * size];
    for i in 0..size as isize {
        let dy = i - r;
        if dy.abs() > r {
            continue;
        }
        let dx = ((r * r - dy * dy) as f64).sqrt().round() as isize;
        let j1 = (r - dx).max(0);
        let j2 = (r + dx).min(size as isize - 1);
        for j in j1..=j2 {
            mask[(i * size as isize + j) as usize] = true;
        }
    }
    mask
}

/// Binary closing: dilation (out-of-bounds reads as 0) then erosion
/// (out-of-bounds reads as 1), so the border itself neither creates nor
/// destroys structure.
fn closing(src: &[bool], w: usize, h: usize, size: usize) -> Vec<bool> {
    let mask = elliptical_element(size);
    let r = (size / 2) as isize;
    let probe = |buf: &[bool], x: isize, y: isize, oob: bool| -> bool {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            oob
        } else {
            buf[y as usize * w + x as usize]
        }
    };
    let mut dilated = vec![false; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            'scan: for v in 0..size as isize {
                for u in 0..size as isize {
                    if mask[(v * size as isize + u) as usize]
                        && probe(src, x + u - r, y + v - r, false)
                    {
                        dilated[(y * w as isize + x) as usize] = true;
                        break 'scan;
                    }
                }
            }
        }
    }
    let mut eroded = vec![true; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            'scan: for v in 0..size as isize {
                for u in 0..size as isize {
                    if mask[(v * size as isize + u) as usize]
                        && !probe(&dilated, x + u - r, y + v - r, true)
                    {
                        eroded[(y * w as isize + x) as usize] = false;
                        break 'scan;
                    }
                }
            }
        }
    }
    eroded
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_params_echo() {
        let p = CannyParams::default();
        assert_eq!(p.gaussian_kernel, 7);
        assert_eq!(p.clahe_clip_limit, 2.0);
        assert_eq!(p.clahe_tiles, 8);
        assert_eq!(p.low_factor, 0.66);
        assert_eq!(p.high_factor, 1.33);
        assert_eq!(p.closing_kernel, 5);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn invalid_params_are_rejected() {
        let even_kernel = CannyParams {
            gaussian_kernel: 4,
            ..Default::default()
        };
        assert!(even_kernel.validate().is_err());
        let low_above_high = CannyParams {
            low_factor: 2.0,
            ..Default::default()
        };
        assert!(low_above_high.validate().is_err());
        let zero_low = CannyParams {
            low_factor: 0.0,
            ..Default::default()
        };
        assert!(zero_low.validate().is_err());
    }

    #[test]
    fn constant_images_yield_all_zero_maps() {
        for v in [0.0, 0.3, 1.0] {
            let img = GrayImage::constant(24, 24, v).unwrap();
            let out = canny(&img, &CannyParams::default()).unwrap();
            assert!(out.as_slice().iter().all(|&p| p == 0.0), "value {v}");
        }
    }

    #[test]
    fn output_is_binary() {
        let img = GrayImage::from_fn(32, 32, |x, y| {
            if (10..22).contains(&x) && (10..22).contains(&y) {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let out = canny(&img, &CannyParams::default()).unwrap();
        assert!(out.as_slice().iter().all(|&v| v == 0.0 || v == 1.0));
        assert!(out.as_slice().contains(&1.0));
    }

    #[test]
    fn elliptical_element_5x5_shape() {
        let m = elliptical_element(5);
        let rows: Vec<String> = (0..5)
            .map(|i| {
                (0..5)
                    .map(|j| if m[i * 5 + j] { '1' } else { '0' })
                    .collect()
            })
            .collect();
        assert_eq!(rows, vec!["00100", "11111", "11111", "11111", "00100"]);
    }

    #[test]
    fn median_definition() {
        assert_eq!(median_u8(&[1, 2, 3]), 2.0);
        assert_eq!(median_u8(&[1, 2, 3, 4]), 2.5);
        assert_eq!(median_u8(&[5, 5, 5, 5]), 5.0);
    }
}
