//! Per-pair loss components: pixelwise L1/L2, PSNR, Gaussian-windowed SSIM,
//! and analytic gradients of the linear-detector edge losses.

use serde::{Deserialize, Serialize};

use crate::detectors::{log_kernel, DetectorId};
use crate::error::{Error, Result};
use crate::filter::{
    correlate_replicate, correlate_replicate_adjoint, sobel_x_kernel, sobel_y_kernel, Kernel,
};
use crate::image::{GrayImage, Grid};

/// SSIM configuration; defaults follow the original reference setup
/// (11x11 Gaussian window, sigma 1.5, k1 = 0.01, k2 = 0.03, unit range).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SsimParams {
    pub window: usize,
    pub window_sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            window: 11,
            window_sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            dynamic_range: 1.0,
        }
    }
}

impl SsimParams {
    pub fn validate(&self) -> Result<()> {
        if self.window < 3 || self.window.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "SSIM window must be odd and >= 3, got {}",
                self.window
            )));
        }
        if self.window_sigma <= 0.0 || self.k1 <= 0.0 || self.k2 <= 0.0 || self.dynamic_range <= 0.0
        {
            return Err(Error::Config(
                "SSIM window_sigma, k1, k2 and dynamic_range must all be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Mean absolute difference over all pixels.
pub fn l1_loss(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    a.check_same_dims(b)?;
    let sum: f64 = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs())
        .sum();
    Ok(sum / a.as_slice().len() as f64)
}

/// Mean squared difference over all pixels.
pub fn l2_loss(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    a.check_same_dims(b)?;
    let sum: f64 = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(sum / a.as_slice().len() as f64)
}

/// Peak signal-to-noise ratio in dB for unit-range images;
/// identical images return `f64::INFINITY`.
pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    let mse = l2_loss(a, b)?;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (1.0 / mse).log10())
}

/// Mean local SSIM over Gaussian-windowed statistics.
///
/// Windows are evaluated only where they fit entirely inside the images
/// (valid mode), so both dimensions must be at least the window size.
pub fn ssim(a: &GrayImage, b: &GrayImage, p: &SsimParams) -> Result<f64> {
    a.check_same_dims(b)?;
    p.validate()?;
    let (w, h) = a.dims();
    if w < p.window || h < p.window {
        return Err(Error::Shape(format!(
            "image {w}x{h} smaller than SSIM window {}",
            p.window
        )));
    }
    let c1 = (p.k1 * p.dynamic_range).powi(2);
    let c2 = (p.k2 * p.dynamic_range).powi(2);
    let taps = gaussian_taps(p.window, p.window_sigma);

    let aa: Vec<f64> = a.as_slice().iter().map(|x| x * x).collect();
    let bb: Vec<f64> = b.as_slice().iter().map(|x| x * x).collect();
    let ab: Vec<f64> = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| x * y)
        .collect();

    let mu_a = filter_valid(a.as_slice(), w, h, &taps);
    let mu_b = filter_valid(b.as_slice(), w, h, &taps);
    let m_aa = filter_valid(&aa, w, h, &taps);
    let m_bb = filter_valid(&bb, w, h, &taps);
    let m_ab = filter_valid(&ab, w, h, &taps);

    let mut total = 0.0;
    for i in 0..mu_a.len() {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let va = m_aa[i] - ma * ma;
        let vb = m_bb[i] - mb * mb;
        let cov = m_ab[i] - ma * mb;
        let num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
        let den = (ma * ma + mb * mb + c1) * (va + vb + c2);
        total += num / den;
    }
    Ok(total / mu_a.len() as f64)
}

/// `1 - ssim(a, b)`.
pub fn ssim_loss(a: &GrayImage, b: &GrayImage, p: &SsimParams) -> Result<f64> {
    Ok(1.0 - ssim(a, b, p)?)
}

fn gaussian_taps(window: usize, sigma: f64) -> Vec<f64> {
    crate::filter::gaussian_kernel_1d(window, sigma)
}

/// Separable valid-mode correlation with a symmetric 1-D tap set; output is
/// `(w - k + 1) x (h - k + 1)`.
fn filter_valid(src: &[f64], w: usize, h: usize, taps: &[f64]) -> Vec<f64> {
    let k = taps.len();
    let ow = w - k + 1;
    let oh = h - k + 1;
    let mut horiz = vec![0.0; ow * h];
    for y in 0..h {
        for x in 0..ow {
            let mut acc = 0.0;
            for (i, t) in taps.iter().enumerate() {
                acc += t * src[y * w + x + i];
            }
            horiz[y * ow + x] = acc;
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            let mut acc = 0.0;
            for (i, t) in taps.iter().enumerate() {
                acc += t * horiz[(y + i) * ow + x];
            }
            out[y * ow + x] = acc;
        }
    }
    out
}

/// Unnormalized response L1 loss for the linear detectors, the forward
/// counterpart of [`edge_loss_gradient`]. Sobel contributes two terms (gx
/// and gy), LoG one; each term is a pixel mean.
pub fn edge_loss_value(
    detector: DetectorId,
    x_hat: &GrayImage,
    x_gt: &GrayImage,
    log_sigma: f64,
) -> Result<f64> {
    x_hat.check_same_dims(x_gt)?;
    let kernels = linear_kernels(detector, log_sigma)?;
    let hat = Grid::from(x_hat.clone());
    let gt = Grid::from(x_gt.clone());
    let n = x_hat.as_slice().len() as f64;
    let mut total = 0.0;
    for k in &kernels {
        let rh = correlate_replicate(&hat, k);
        let rg = correlate_replicate(&gt, k);
        let sum: f64 = rh
            .as_slice()
            .iter()
            .zip(rg.as_slice())
            .map(|(a, b)| (a - b).abs())
            .sum();
        total += sum / n;
    }
    Ok(total)
}

/// Analytic subgradient of [`edge_loss_value`] with respect to `x_hat`:
/// the adjoint filter applied to `sign(response(x_hat) - response(x_gt))`,
/// scaled by the pixel count, with `sign(0) = 0`.
///
/// Only Sobel and LoG are differentiable; Canny and HED report
/// [`Error::UnsupportedDetector`].
pub fn edge_loss_gradient(
    detector: DetectorId,
    x_hat: &GrayImage,
    x_gt: &GrayImage,
    log_sigma: f64,
) -> Result<Grid> {
    x_hat.check_same_dims(x_gt)?;
    let kernels = linear_kernels(detector, log_sigma)?;
    let hat = Grid::from(x_hat.clone());
    let gt = Grid::from(x_gt.clone());
    let (w, h) = x_hat.dims();
    let n = (w * h) as f64;
    let mut grad = Grid::zeros(w, h);
    for k in &kernels {
        let rh = correlate_replicate(&hat, k);
        let rg = correlate_replicate(&gt, k);
        let mut signs = Grid::zeros(w, h);
        for i in 0..w * h {
            let d = rh.as_slice()[i] - rg.as_slice()[i];
            signs.as_mut_slice()[i] = if d > 0.0 {
                1.0
            } else if d < 0.0 {
                -1.0
            } else {
                0.0
            };
        }
        let back = correlate_replicate_adjoint(&signs, k);
        for i in 0..w * h {
            grad.as_mut_slice()[i] += back.as_slice()[i] / n;
        }
    }
    Ok(grad)
}

fn linear_kernels(detector: DetectorId, log_sigma: f64) -> Result<Vec<Kernel>> {
    match detector {
        DetectorId::Sobel => Ok(vec![sobel_x_kernel(), sobel_y_kernel()]),
        DetectorId::Log => {
            if log_sigma <= 0.0 {
                return Err(Error::Domain(format!(
                    "LoG sigma must be > 0, got {log_sigma}"
                )));
            }
            Ok(vec![log_kernel(log_sigma)])
        }
        other => Err(Error::UnsupportedDetector(other)),
    }
}
