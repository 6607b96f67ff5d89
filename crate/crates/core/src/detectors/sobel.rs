//! Dense gradient magnitude via 3x3 Sobel correlation.

use crate::filter::{correlate_replicate_zero_sum, sobel_x_kernel, sobel_y_kernel};
use crate::image::{GrayImage, Grid};

/// Signed Sobel gradients plus the magnitude map normalized to `[0, 1]`.
#[derive(Debug, Clone)]
pub struct GradientField {
    pub gx: Grid,
    pub gy: Grid,
    /// `hypot(gx, gy)` divided by its maximum over the image (all zeros when
    /// the maximum is zero).
    pub magnitude: GrayImage,
}

/// 3x3 Sobel cross-correlation with replicate border padding.
///
/// Positive `gx` means intensity increasing with `x`, positive `gy` with `y`.
pub fn sobel(img: &GrayImage) -> GradientField {
    let src = Grid::from(img.clone());
    let gx = correlate_replicate_zero_sum(&src, &sobel_x_kernel());
    let gy = correlate_replicate_zero_sum(&src, &sobel_y_kernel());
    let (w, h) = img.dims();
    let mut mag = Grid::zeros(w, h);
    for i in 0..w * h {
        let v = gx.as_slice()[i].hypot(gy.as_slice()[i]);
        mag.as_mut_slice()[i] = v;
    }
    let magnitude = mag.normalized_magnitude();
    GradientField { gx, gy, magnitude }
}
