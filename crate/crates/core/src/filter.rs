//! Dense 2-D correlation with replicate border padding, its adjoint, and
//! Gaussian kernel construction.
//!
//! Every filter in the crate is a cross-correlation: for a kernel `K` with
//! center `(cx, cy)`, `out(x, y) = sum_{u,v} K(u, v) * in(clamp(x + u - cx),
//! clamp(y + v - cy))`. Replicate padding clamps sample coordinates to the
//! image border, which avoids spurious responses at the edges.

use crate::image::Grid;

/// A small dense kernel with odd dimensions and an implicit center anchor.
#[derive(Debug, Clone)]
pub struct Kernel {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Kernel {
    /// Builds a kernel from row-major weights. Dimensions must be odd.
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Self {
        assert!(width % 2 == 1 && height % 2 == 1, "kernel dims must be odd");
        assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.data[v * self.width + u]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Cross-correlates `src` with `kernel` using replicate border padding.
pub fn correlate_replicate(src: &Grid, kernel: &Kernel) -> Grid {
    let (w, h) = src.dims();
    let (cx, cy) = (kernel.width / 2, kernel.height / 2);
    let mut out = Grid::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for v in 0..kernel.height {
                let sy = clamp_idx(y as isize + v as isize - cy as isize, h);
                for u in 0..kernel.width {
                    let sx = clamp_idx(x as isize + u as isize - cx as isize, w);
                    acc += kernel.get(u, v) * src.get(sx, sy);
                }
            }
            out.set(x, y, acc);
        }
    }
    out
}

/// [`correlate_replicate`] for zero-sum kernels: samples are taken relative
/// to the first pixel, which leaves the result unchanged in exact arithmetic
/// but guarantees an exactly zero response on constant images (no float
/// cancellation residue to blow up under max-normalization).
pub fn correlate_replicate_zero_sum(src: &Grid, kernel: &Kernel) -> Grid {
    let (w, h) = src.dims();
    let (cx, cy) = (kernel.width / 2, kernel.height / 2);
    let reference = src.get(0, 0);
    let mut out = Grid::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for v in 0..kernel.height {
                let sy = clamp_idx(y as isize + v as isize - cy as isize, h);
                for u in 0..kernel.width {
                    let sx = clamp_idx(x as isize + u as isize - cx as isize, w);
                    acc += kernel.get(u, v) * (src.get(sx, sy) - reference);
                }
            }
            out.set(x, y, acc);
        }
    }
    out
}

/// Exact adjoint of [`correlate_replicate`]: scatters each output
/// contribution back onto the (clamped) source pixel it read. Needed for
/// analytic gradients of losses defined on filter responses.
pub fn correlate_replicate_adjoint(cotangent: &Grid, kernel: &Kernel) -> Grid {
    let (w, h) = cotangent.dims();
    let (cx, cy) = (kernel.width / 2, kernel.height / 2);
    let mut out = Grid::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let g = cotangent.get(x, y);
            if g == 0.0 {
                continue;
            }
            for v in 0..kernel.height {
                let sy = clamp_idx(y as isize + v as isize - cy as isize, h);
                for u in 0..kernel.width {
                    let sx = clamp_idx(x as isize + u as isize - cx as isize, w);
                    out.set(sx, sy, out.get(sx, sy) + kernel.get(u, v) * g);
                }
            }
        }
    }
    out
}

#[inline]
fn clamp_idx(v: isize, len: usize) -> usize {
    v.clamp(0, len as isize - 1) as usize
}

/// Normalized 1-D Gaussian taps of the given (odd) size.
pub fn gaussian_kernel_1d(size: usize, sigma: f64) -> Vec<f64> {
    assert!(size % 2 == 1 && sigma > 0.0);
    let c = (size / 2) as f64;
    let mut taps: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - c;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

/// Separable Gaussian blur with replicate padding.
pub fn gaussian_blur(src: &Grid, size: usize, sigma: f64) -> Grid {
    let taps = gaussian_kernel_1d(size, sigma);
    let horiz = Kernel::new(size, 1, taps.clone());
    // A 1-tall kernel keeps odd dims for the vertical pass.
    let vert = Kernel::new(1, size, taps);
    correlate_replicate(&correlate_replicate(src, &horiz), &vert)
}

/// The OpenCV kernel-size-to-sigma rule: `0.3 * ((k - 1)/2 - 1) + 0.8`.
pub fn sigma_from_kernel_size(size: usize) -> f64 {
    0.3 * ((size as f64 - 1.0) / 2.0 - 1.0) + 0.8
}

pub const SOBEL_X: [f64; 9] = [-1.0, 0.0, 1.0, -2.0, 0.0, 2.0, -1.0, 0.0, 1.0];
pub const SOBEL_Y: [f64; 9] = [-1.0, -2.0, -1.0, 0.0, 0.0, 0.0, 1.0, 2.0, 1.0];

pub fn sobel_x_kernel() -> Kernel {
    Kernel::new(3, 3, SOBEL_X.to_vec())
}

pub fn sobel_y_kernel() -> Kernel {
    Kernel::new(3, 3, SOBEL_Y.to_vec())
}
