//! Shared input builders for the benchmark targets.

use edgekit::image::GrayImage;
use edgekit::latent::LatentTensor;

/// Deterministic pseudo-random image (splitmix-style hash per pixel).
pub fn bench_image(width: usize, height: usize, seed: u64) -> GrayImage {
    GrayImage::from_fn(width, height, |x, y| {
        let mut v = seed
            .wrapping_add((y * width + x) as u64)
            .wrapping_mul(0x9E3779B97F4A7C15);
        v ^= v >> 30;
        v = v.wrapping_mul(0xBF58476D1CE4E5B9);
        v ^= v >> 27;
        (v >> 11) as f64 / (1u64 << 53) as f64
    })
    .unwrap()
}

pub fn bench_latent(channels: usize, height: usize, width: usize, seed: u64) -> LatentTensor {
    let data = (0..channels * height * width)
        .map(|i| {
            let mut v = seed
                .wrapping_add(i as u64)
                .wrapping_mul(0x9E3779B97F4A7C15);
            v ^= v >> 31;
            (v >> 11) as f64 / (1u64 << 52) as f64 - 1.0
        })
        .collect();
    LatentTensor::new(channels, height, width, data).unwrap()
}
